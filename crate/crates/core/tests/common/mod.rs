#![allow(dead_code)]

use rand::Rng;
use vlc_secrecy::prelude::*;
use vlc_secrecy::rate::dbm_to_watts;

/// Random gain table with 2..=`max_leds` LEDs and 1..=`max_ues` UEs that
/// admits a one-to-one assignment. Gains are on the scale of a 2–3 m drop.
pub fn random_table<R: Rng>(rng: &mut R, max_leds: usize, max_ues: usize) -> ChannelTable {
    loop {
        let k = rng.random_range(2..=max_leds);
        let m = rng.random_range(1..=max_ues.min(k));
        let draw = |rng: &mut R, p: f64| {
            if rng.random_bool(p) {
                rng.random_range(1e-6..3e-5)
            } else {
                0.0
            }
        };
        let gains: Vec<Vec<f64>> = (0..k).map(|_| (0..m).map(|_| draw(rng, 0.6)).collect()).collect();
        let eve: Vec<f64> = (0..k).map(|_| draw(rng, 0.5)).collect();
        let Ok(table) = ChannelTable::from_gains(gains, eve, vec![dbm_to_watts(23.0); k]) else {
            continue;
        };
        if table.find_matching().is_ok() {
            return table;
        }
    }
}

pub fn table_noise() -> NoiseModel {
    NoiseModel::from_dbm(-98.0).unwrap()
}

/// Exhaustive search written as a K-ary odometer over all K^M vectors,
/// independent of the library's depth-first enumerator. Returns the
/// lexicographically first maximizer and the number of feasible vectors.
pub fn odometer_oracle(table: &ChannelTable, noise: &NoiseModel) -> (Vec<usize>, f64, u64) {
    let (k, m) = (table.num_leds(), table.num_ues());
    let mut digits = vec![0usize; m];
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut feasible = 0;
    loop {
        let distinct = (0..m).all(|i| (0..i).all(|j| digits[i] != digits[j]));
        let reachable = (0..m).all(|i| table.gain(digits[i], i) > 0.0);
        if distinct && reachable {
            feasible += 1;
            let value = sum_secrecy_rate(table, &Assignment::new(digits.clone()), noise).unwrap();
            if best.as_ref().map_or(true, |(_, v)| value > *v) {
                best = Some((digits.clone(), value));
            }
        }
        // Increment the last digit first: lexicographic order.
        let mut pos = m;
        loop {
            if pos == 0 {
                let (x, v) = best.expect("table admits a matching");
                return (x, v, feasible);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}
