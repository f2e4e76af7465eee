//! Achievable rates, secrecy rates and the sum-secrecy-rate objective.
//!
//! Each selected LED sends a unit-variance symbol scaled by its power `P`,
//! so a UE receives electrical power `(P·h)²` from every selected LED in
//! view. The rate of UE `m` uses the capacity lower bound for
//! amplitude-constrained channels,
//!
//! ```text
//! R_m = ½ log2(1 + (e / 2π) · (P h_{k_m,m})² / (Σ_{j≠m} (P h_{k_j,m})² + ξ²))
//! ```
//!
//! and Eve's rate when overhearing UE `m` is the same expression over her own
//! gains. The secrecy rate of UE `m` is `max(0, R_m − Re_m)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelTable;
use crate::error::{Error, Result};

/// `e / 2π`, the SNR penalty of the amplitude-constrained capacity bound.
pub const CAPACITY_BOUND_FACTOR: f64 = std::f64::consts::E / (2.0 * std::f64::consts::PI);

/// `10^((dBm − 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Receiver noise power ξ², watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid(
                "noise variance",
                format!("must be positive, got {variance}"),
            ));
        }
        Ok(NoiseModel { variance })
    }

    pub fn from_dbm(dbm: f64) -> Result<Self> {
        NoiseModel::new(dbm_to_watts(dbm))
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// LED index chosen for each UE, `x = [k_0, .., k_{M-1}]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(leds: Vec<usize>) -> Self {
        Assignment(leds)
    }

    pub fn leds(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Every UE gets a reachable LED and no LED serves two UEs.
    pub fn validate(&self, table: &ChannelTable) -> Result<()> {
        if self.0.len() != table.num_ues() {
            return Err(Error::InfeasibleAssignment(format!(
                "{} entries for {} UEs",
                self.0.len(),
                table.num_ues()
            )));
        }
        let mut seen = HashSet::with_capacity(self.0.len());
        for (ue, &led) in self.0.iter().enumerate() {
            if table.reachable(ue).binary_search(&led).is_err() {
                return Err(Error::InfeasibleAssignment(format!(
                    "LED {led} is not reachable from UE {ue}"
                )));
            }
            if !seen.insert(led) {
                return Err(Error::InfeasibleAssignment(format!("LED {led} assigned twice")));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, table: &ChannelTable) -> bool {
        self.validate(table).is_ok()
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(v: Vec<usize>) -> Self {
        Assignment(v)
    }
}

fn bounded_rate(signal: f64, interference: f64, noise: f64) -> f64 {
    0.5 * (1.0 + CAPACITY_BOUND_FACTOR * signal / (interference + noise)).log2()
}

/// Rate of UE `ue` under `assignment`, bits/s/Hz.
pub fn ue_rate(table: &ChannelTable, assignment: &Assignment, ue: usize, noise: &NoiseModel) -> f64 {
    let leds = assignment.leds();
    let received = |led: usize| {
        let a = table.power(led) * table.gain(led, ue);
        a * a
    };
    let interference: f64 = leds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != ue)
        .map(|(_, &led)| received(led))
        .sum();
    bounded_rate(received(leds[ue]), interference, noise.variance())
}

/// Eve's rate when she overhears UE `ue`, bits/s/Hz.
pub fn eve_rate(table: &ChannelTable, assignment: &Assignment, ue: usize, noise: &NoiseModel) -> f64 {
    let leds = assignment.leds();
    let received = |led: usize| {
        let a = table.power(led) * table.eve_gain(led);
        a * a
    };
    let interference: f64 = leds
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != ue)
        .map(|(_, &led)| received(led))
        .sum();
    bounded_rate(received(leds[ue]), interference, noise.variance())
}

/// `max(0, R_m − Re_m)`.
pub fn secrecy_rate(table: &ChannelTable, assignment: &Assignment, ue: usize, noise: &NoiseModel) -> f64 {
    (ue_rate(table, assignment, ue, noise) - eve_rate(table, assignment, ue, noise)).max(0.0)
}

/// The objective every solver maximizes. Rejects infeasible assignments.
pub fn sum_secrecy_rate(table: &ChannelTable, assignment: &Assignment, noise: &NoiseModel) -> Result<f64> {
    assignment.validate(table)?;
    Ok(objective(table, assignment, noise))
}

/// Unchecked objective for solver inner loops, which only ever build
/// feasible assignments.
pub(crate) fn objective(table: &ChannelTable, assignment: &Assignment, noise: &NoiseModel) -> f64 {
    (0..assignment.len())
        .map(|m| secrecy_rate(table, assignment, m, noise))
        .sum()
}

/// Per-UE breakdown of an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub ue_rates: Vec<f64>,
    pub eve_rates: Vec<f64>,
    pub secrecy_rates: Vec<f64>,
    pub sum_secrecy_rate: f64,
}

pub fn rate_report(table: &ChannelTable, assignment: &Assignment, noise: &NoiseModel) -> Result<RateReport> {
    assignment.validate(table)?;
    let m = assignment.len();
    let ue_rates: Vec<f64> = (0..m).map(|i| ue_rate(table, assignment, i, noise)).collect();
    let eve_rates: Vec<f64> = (0..m).map(|i| eve_rate(table, assignment, i, noise)).collect();
    let secrecy_rates: Vec<f64> = ue_rates
        .iter()
        .zip(&eve_rates)
        .map(|(r, re)| (r - re).max(0.0))
        .collect();
    let sum_secrecy_rate = secrecy_rates.iter().sum();
    Ok(RateReport {
        ue_rates,
        eve_rates,
        secrecy_rates,
        sum_secrecy_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const OVERHEAD_GAIN: f64 = 2.521618317788765e-5;

    fn single(gain: f64, eve: f64, power: f64) -> ChannelTable {
        ChannelTable::from_gains(vec![vec![gain]], vec![eve], vec![power]).unwrap()
    }

    fn table_noise() -> NoiseModel {
        NoiseModel::from_dbm(-98.0).unwrap()
    }

    #[test]
    fn dbm_conversion() {
        assert_relative_eq!(dbm_to_watts(-98.0), 1.584893192461111e-13, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(23.0), 0.19952623149688797, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(30.0), 1.0);
    }

    #[test]
    fn single_ue_rate_matches_direct_evaluation() {
        // ½ log2(1 + (e/2π)(0.2 h)² / ξ²) evaluated independently.
        let table = single(OVERHEAD_GAIN, 0.0, 0.2);
        let x = Assignment::new(vec![0]);
        let r = ue_rate(&table, &x, 0, &table_noise());
        assert_relative_eq!(r, 3.0690363962661613, max_relative = 1e-12);
        assert_eq!(eve_rate(&table, &x, 0, &table_noise()), 0.0);
        assert_eq!(secrecy_rate(&table, &x, 0, &table_noise()), r);
    }

    #[test]
    fn hinge_and_subtraction() {
        let noise = NoiseModel::new(1.0).unwrap();
        let x = Assignment::new(vec![0]);
        // Eve stronger than the UE.
        let table = single(1.0, 2.0, 1.0);
        assert_eq!(secrecy_rate(&table, &x, 0, &noise), 0.0);
        let table = single(2.0, 1.0, 1.0);
        let expected = ue_rate(&table, &x, 0, &noise) - eve_rate(&table, &x, 0, &noise);
        assert!(expected > 0.0);
        assert_eq!(secrecy_rate(&table, &x, 0, &noise), expected);
    }

    #[test]
    fn colocated_eve_has_identical_rate() {
        let table = single(OVERHEAD_GAIN, OVERHEAD_GAIN, 0.2);
        let x = Assignment::new(vec![0]);
        let noise = table_noise();
        assert_eq!(ue_rate(&table, &x, 0, &noise), eve_rate(&table, &x, 0, &noise));
        assert_eq!(sum_secrecy_rate(&table, &x, &noise).unwrap(), 0.0);
    }

    #[test]
    fn zero_ues_give_zero() {
        let table = ChannelTable::from_gains(vec![vec![]], vec![0.0], vec![1.0]).unwrap();
        let noise = table_noise();
        assert_eq!(sum_secrecy_rate(&table, &Assignment::new(vec![]), &noise).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_assignments_are_rejected() {
        let table = ChannelTable::from_gains(vec![vec![1.0, 1.0], vec![0.0, 1.0]], vec![0.0; 2], vec![1.0; 2]).unwrap();
        let noise = table_noise();
        for bad in [vec![0, 0], vec![1, 0], vec![0]] {
            assert!(matches!(
                sum_secrecy_rate(&table, &Assignment::new(bad), &noise),
                Err(Error::InfeasibleAssignment(_))
            ));
        }
        assert!(sum_secrecy_rate(&table, &Assignment::new(vec![0, 1]), &noise).is_ok());
    }

    #[test]
    fn report_is_consistent() {
        let table = ChannelTable::from_gains(
            vec![vec![3e-5, 1e-5], vec![1e-5, 2e-5], vec![0.0, 1e-6]],
            vec![1e-5, 0.0, 2e-5],
            vec![0.2; 3],
        )
        .unwrap();
        let noise = table_noise();
        let x = Assignment::new(vec![0, 2]);
        let report = rate_report(&table, &x, &noise).unwrap();
        assert_eq!(report.sum_secrecy_rate, sum_secrecy_rate(&table, &x, &noise).unwrap());
        for m in 0..2 {
            assert_eq!(report.secrecy_rates[m], secrecy_rate(&table, &x, m, &noise));
        }
    }

    #[test]
    fn noise_must_be_positive() {
        assert!(NoiseModel::new(0.0).is_err());
        assert!(NoiseModel::new(f64::INFINITY).is_err());
    }
}
