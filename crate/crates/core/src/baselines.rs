//! Fixed LED-selection strategies and the exhaustive-search oracle.
//!
//! The three strategies walk the UEs in index order and never reuse an LED
//! already taken by an earlier UE. When a UE's preferred LED is taken it
//! falls back to its next preference.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelTable;
use crate::error::{Error, Result};
use crate::rate::{objective, Assignment, NoiseModel};

/// Default cap on the number of assignments exhaustive search may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Random,
    ChannelGain,
    EveAwareChannelGain,
    GlobalSearch,
    TabuSearch,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Random,
        StrategyKind::ChannelGain,
        StrategyKind::EveAwareChannelGain,
        StrategyKind::GlobalSearch,
        StrategyKind::TabuSearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::ChannelGain => "channel_gain",
            StrategyKind::EveAwareChannelGain => "eve_aware_channel_gain",
            StrategyKind::GlobalSearch => "global_search",
            StrategyKind::TabuSearch => "tabu_search",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match normalized.as_str() {
            "random" => StrategyKind::Random,
            "channel_gain" | "cg" => StrategyKind::ChannelGain,
            "eve_aware_channel_gain" | "eve_aware" | "eve" => StrategyKind::EveAwareChannelGain,
            "global_search" | "global" | "oracle" => StrategyKind::GlobalSearch,
            "tabu_search" | "tabu" | "ts" => StrategyKind::TabuSearch,
            _ => return Err(Error::invalid("solver", format!("unknown solver `{s}`"))),
        };
        Ok(kind)
    }
}

fn exhausted(ue: usize) -> Error {
    Error::InfeasibleInstance(format!("every LED reachable from UE {ue} is already taken"))
}

/// Each UE picks uniformly among its reachable LEDs not yet taken.
pub fn random_strategy<R: Rng + ?Sized>(table: &ChannelTable, rng: &mut R) -> Result<Assignment> {
    let mut taken = vec![false; table.num_leds()];
    let mut leds = Vec::with_capacity(table.num_ues());
    let mut free = Vec::new();
    for ue in 0..table.num_ues() {
        free.clear();
        free.extend(table.reachable(ue).iter().copied().filter(|&k| !taken[k]));
        if free.is_empty() {
            return Err(exhausted(ue));
        }
        let led = free[rng.random_range(0..free.len())];
        taken[led] = true;
        leds.push(led);
    }
    Ok(Assignment::new(leds))
}

/// Reachable LEDs of `ue` by decreasing gain; equal gains keep ascending LED order.
fn by_gain(table: &ChannelTable, ue: usize, leds: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut ranked: Vec<usize> = leds.collect();
    ranked.sort_by(|&a, &b| table.gain(b, ue).total_cmp(&table.gain(a, ue)));
    ranked
}

/// Each UE takes its strongest untaken LED.
pub fn channel_gain_strategy(table: &ChannelTable) -> Result<Assignment> {
    let mut taken = vec![false; table.num_leds()];
    let mut leds = Vec::with_capacity(table.num_ues());
    for ue in 0..table.num_ues() {
        let led = by_gain(table, ue, table.reachable(ue).iter().copied())
            .into_iter()
            .find(|&k| !taken[k])
            .ok_or_else(|| exhausted(ue))?;
        taken[led] = true;
        leds.push(led);
    }
    Ok(Assignment::new(leds))
}

/// LEDs UE `ue` must avoid because Eve hears them at least as well.
pub fn banned_leds(table: &ChannelTable, ue: usize) -> Vec<usize> {
    table
        .reachable(ue)
        .iter()
        .copied()
        .filter(|&k| table.gain(k, ue) <= table.eve_gain(k))
        .collect()
}

/// Each UE takes its strongest untaken LED among those it hears strictly
/// better than Eve does. A UE left with no such LED falls back to its
/// strongest untaken LED overall.
pub fn eve_aware_strategy(table: &ChannelTable) -> Result<Assignment> {
    let mut taken = vec![false; table.num_leds()];
    let mut leds = Vec::with_capacity(table.num_ues());
    for ue in 0..table.num_ues() {
        let reachable = table.reachable(ue).iter().copied();
        let preferred = by_gain(
            table,
            ue,
            reachable.clone().filter(|&k| table.gain(k, ue) > table.eve_gain(k)),
        )
        .into_iter()
        .find(|&k| !taken[k]);
        let led = match preferred {
            Some(led) => led,
            None => by_gain(table, ue, reachable)
                .into_iter()
                .find(|&k| !taken[k])
                .ok_or_else(|| exhausted(ue))?,
        };
        taken[led] = true;
        leds.push(led);
    }
    Ok(Assignment::new(leds))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalOutcome {
    pub assignment: Assignment,
    pub value: f64,
    /// Feasible assignments scored.
    pub evaluations: u64,
}

/// Exact maximizer of the sum secrecy rate by enumerating every feasible
/// assignment. Ties go to the lexicographically smallest vector.
pub fn global_search(table: &ChannelTable, noise: &NoiseModel, budget: u64) -> Result<GlobalOutcome> {
    let bound = table.search_space_bound();
    if bound > budget as f64 {
        return Err(Error::EnumerationTooLarge { size: bound, budget });
    }
    table.find_matching()?;

    let mut search = Enumeration {
        table,
        noise,
        used: vec![false; table.num_leds()],
        partial: Vec::with_capacity(table.num_ues()),
        best: None,
        evaluations: 0,
    };
    search.descend(0);
    let (assignment, value) = search.best.expect("a matching exists, so some assignment was scored");
    Ok(GlobalOutcome {
        assignment,
        value,
        evaluations: search.evaluations,
    })
}

struct Enumeration<'a> {
    table: &'a ChannelTable,
    noise: &'a NoiseModel,
    used: Vec<bool>,
    partial: Vec<usize>,
    best: Option<(Assignment, f64)>,
    evaluations: u64,
}

impl Enumeration<'_> {
    fn descend(&mut self, ue: usize) {
        if ue == self.table.num_ues() {
            let candidate = Assignment::new(self.partial.clone());
            let value = objective(self.table, &candidate, self.noise);
            self.evaluations += 1;
            // Visiting in lexicographic order, so strict > keeps the smallest tie.
            if self.best.as_ref().map_or(true, |(_, v)| value > *v) {
                self.best = Some((candidate, value));
            }
            return;
        }
        for &led in self.table.reachable(ue) {
            if self.used[led] {
                continue;
            }
            self.used[led] = true;
            self.partial.push(led);
            self.descend(ue + 1);
            self.partial.pop();
            self.used[led] = false;
        }
    }
}
