//! Runs the code listings of the guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/channel.md")]
pub mod channel {}

#[doc = include_str!("../../../book/src/secrecy.md")]
pub mod secrecy {}

#[doc = include_str!("../../../book/src/tabu-search.md")]
pub mod tabu_search {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
