//! LED selection for secure indoor visible light communication.
//!
//! A room is lit by a grid of LEDs. Each user (UE) must be served by exactly
//! one LED within its field of view, no LED serves two users, and an
//! eavesdropper listens in. The crate
//!
//! * models the line-of-sight Lambertian channel ([`channel`]),
//! * scores an assignment by its sum secrecy rate ([`rate`]),
//! * searches assignments with tabu search ([`tabu`]),
//! * provides three greedy strategies and an exhaustive oracle
//!   ([`baselines`]),
//! * generates random rooms ([`scenario`]) and runs seeded Monte-Carlo
//!   sweeps ([`experiment`]).
//!
//! ```
//! use vlc_secrecy::prelude::*;
//!
//! let config = ScenarioConfig::default();
//! let scenario = Scenario::reference_layout(&config).unwrap();
//! let table = build_channel_table(&scenario).unwrap();
//!
//! let ts = run_tabu_search(&table, &scenario.noise, &TsConfig::for_ues(5, 1)).unwrap();
//! let oracle = global_search(&table, &scenario.noise, DEFAULT_ENUMERATION_BUDGET).unwrap();
//! assert!(oracle.value >= ts.value);
//! ```

pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod rate;
pub mod scenario;
pub mod seed;
pub mod tabu;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::baselines::{
        channel_gain_strategy, eve_aware_strategy, global_search, random_strategy, GlobalOutcome, StrategyKind,
        DEFAULT_ENUMERATION_BUDGET,
    };
    pub use crate::channel::{
        build_channel_table, build_evaluation_table, channel_gain, ChannelTable, Emitter, Point3, Receiver,
    };
    pub use crate::error::{Error, Result};
    pub use crate::experiment::{run_experiment, write_results, ExperimentId, ExperimentResult, ExperimentSpec};
    pub use crate::rate::{sum_secrecy_rate, Assignment, NoiseModel};
    pub use crate::scenario::{sample_instance, Scenario, ScenarioConfig};
    pub use crate::tabu::{run_tabu_search, NeighborhoodKind, TabuOutcome, TsConfig};
}
