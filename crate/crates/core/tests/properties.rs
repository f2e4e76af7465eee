mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_table, table_noise};
use vlc_secrecy::baselines::banned_leds;
use vlc_secrecy::prelude::*;
use vlc_secrecy::rate::ue_rate;
use vlc_secrecy::scenario::Room;
use vlc_secrecy::tabu::NeighborhoodKind;

fn table_from_seed(seed: u64) -> ChannelTable {
    random_table(&mut ChaCha8Rng::seed_from_u64(seed), 7, 4)
}

fn scaled(table: &ChannelTable, c: f64) -> ChannelTable {
    let gains = table
        .gains()
        .iter()
        .map(|row| row.iter().map(|h| h * c).collect())
        .collect();
    let eve = table.eve_gains().iter().map(|g| g * c).collect();
    let powers = (0..table.num_leds()).map(|k| table.power(k)).collect();
    ChannelTable::from_gains(gains, eve, powers).unwrap()
}

fn eve_blind(table: &ChannelTable) -> ChannelTable {
    table.with_eve_gains(vec![0.0; table.num_leds()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rates_invariant_under_gain_and_noise_scaling(seed in any::<u64>(), c in 0.01f64..100.0) {
        let table = table_from_seed(seed);
        let x = Assignment::new(table.find_matching().unwrap());
        let noise = table_noise();
        let scaled_noise = NoiseModel::new(noise.variance() * c * c).unwrap();
        let a = sum_secrecy_rate(&table, &x, &noise).unwrap();
        let b = sum_secrecy_rate(&scaled(&table, c), &x, &scaled_noise).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn more_interference_never_raises_a_rate(seed in any::<u64>(), boost in 1.0f64..10.0) {
        let table = table_from_seed(seed);
        prop_assume!(table.num_ues() >= 2);
        let x = Assignment::new(table.find_matching().unwrap());
        let noise = table_noise();
        // Strengthen UE 1's LED as seen by UE 0.
        let interferer = x.leds()[1];
        let mut gains = table.gains().to_vec();
        gains[interferer][0] *= boost;
        let powers = (0..table.num_leds()).map(|k| table.power(k)).collect();
        let louder = ChannelTable::from_gains(gains, table.eve_gains().to_vec(), powers).unwrap();
        prop_assert!(ue_rate(&louder, &x, 0, &noise) <= ue_rate(&table, &x, 0, &noise));
    }

    #[test]
    fn blind_eve_leaves_full_rates(seed in any::<u64>()) {
        let table = eve_blind(&table_from_seed(seed));
        let x = Assignment::new(table.find_matching().unwrap());
        let noise = table_noise();
        let total: f64 = (0..table.num_ues()).map(|m| ue_rate(&table, &x, m, &noise)).sum();
        assert_relative_eq!(sum_secrecy_rate(&table, &x, &noise).unwrap(), total, max_relative = 1e-12);
    }

    #[test]
    fn blind_eve_makes_eve_aware_equal_channel_gain(seed in any::<u64>()) {
        let table = eve_blind(&table_from_seed(seed));
        for m in 0..table.num_ues() {
            prop_assert!(banned_leds(&table, m).is_empty());
        }
        let cg = channel_gain_strategy(&table);
        let ea = eve_aware_strategy(&table);
        prop_assert_eq!(cg.ok(), ea.ok());
    }

    #[test]
    fn gain_is_symmetric_under_reflection(
        lx in 0.0f64..10.0, ly in 0.0f64..10.0,
        rx in 0.0f64..10.0, ry in 0.0f64..10.0,
        half_deg in 10.0f64..80.0, fov_deg in 10.0f64..89.0,
    ) {
        let gain = |lx: f64, ly: f64, rx: f64, ry: f64| {
            let led = Emitter::new(Point3::new(lx, ly, 3.0), half_deg.to_radians(), 1.0).unwrap();
            let pd = Receiver::new(Point3::new(rx, ry, 0.8), fov_deg.to_radians()).unwrap();
            channel_gain(&led, &pd).unwrap()
        };
        let h = gain(lx, ly, rx, ry);
        assert_relative_eq!(h, gain(10.0 - lx, ly, 10.0 - rx, ry), max_relative = 1e-12, epsilon = 1e-300);
        assert_relative_eq!(h, gain(lx, 10.0 - ly, rx, 10.0 - ry), max_relative = 1e-12, epsilon = 1e-300);
        assert_relative_eq!(h, gain(ly, lx, ry, rx), max_relative = 1e-12, epsilon = 1e-300);
    }

    #[test]
    fn oracle_dominates_every_solver(seed in any::<u64>(), ts_seed in any::<u64>()) {
        let table = table_from_seed(seed);
        let noise = table_noise();
        let oracle = global_search(&table, &noise, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let slack = 1e-12 * oracle.value.abs().max(1.0);
        for kind in [NeighborhoodKind::SingleCoordinate, NeighborhoodKind::AllCoordinates] {
            let config = TsConfig { neighborhood: kind, ..TsConfig::for_ues(table.num_ues(), ts_seed) };
            let ts = run_tabu_search(&table, &noise, &config).unwrap();
            prop_assert!(ts.assignment.is_feasible(&table));
            prop_assert!(ts.value <= oracle.value + slack);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ts_seed);
        let greedy = [channel_gain_strategy(&table), eve_aware_strategy(&table), random_strategy(&table, &mut rng)];
        for x in greedy.into_iter().flatten() {
            prop_assert!(x.is_feasible(&table));
            prop_assert!(sum_secrecy_rate(&table, &x, &noise).unwrap() <= oracle.value + slack);
        }
    }

    #[test]
    fn sampling_is_seeded_and_stays_in_the_room(seed in any::<u64>(), err in 0.0f64..3.0, m in 1usize..8) {
        let config = ScenarioConfig { num_ues: m, eve_localization_error_m: err, ..Default::default() };
        let a = sample_instance(&config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = sample_instance(&config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        let room = Room::default();
        let receivers = a.ues.iter().chain([&a.eve_true, &a.eve_estimated]);
        for r in receivers {
            prop_assert!(room.contains(&r.position));
        }
        let offset = a.eve_true.position.distance(&a.eve_estimated.position);
        prop_assert!(offset <= err + 1e-12);
    }
}

#[test]
fn random_strategy_is_uniform_over_feasible_pairs() {
    // Two UEs that both see all three LEDs: six ordered pairs, each 1/6.
    let table = ChannelTable::from_gains(vec![vec![1e-5, 1e-5]; 3], vec![0.0; 3], vec![1.0; 3]).unwrap();
    const N: u64 = 10_000;
    let mut counts = [[0u64; 3]; 3];
    for seed in 0..N {
        let x = random_strategy(&table, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        counts[x.leds()[0]][x.leds()[1]] += 1;
    }
    let p = 1.0 / 6.0;
    let expected = N as f64 * p;
    let sigma = (N as f64 * p * (1.0 - p)).sqrt();
    for (a, row) in counts.iter().enumerate() {
        for (b, &n) in row.iter().enumerate() {
            if a == b {
                assert_eq!(n, 0);
            } else {
                assert!((n as f64 - expected).abs() < 3.0 * sigma, "pair ({a}, {b}): {n}");
            }
        }
    }
}
