//! Tabu search over LED assignments.
//!
//! Each iteration draws up to `M` neighbor vectors of the current
//! assignment. By default neighbor `q` moves UE `q` to another reachable LED
//! and the link it leaves becomes tabu; [`NeighborhoodKind::AllCoordinates`]
//! instead moves every UE at once and makes the accepted links tabu. The
//! neighbors are ranked by sum secrecy rate and the best one that is either
//! better than the best solution so far (aspiration) or uses no tabu
//! LED↔UE link is taken as the next move. Tabu entries last `M` iterations.
//!
//! Moving every coordinate at once cannot reach some assignments: two UEs
//! that each see exactly two LEDs toggle in lockstep, so only two of their
//! four combinations are ever visited.
//!
//! The tabu list is a `K × M` matrix of countdowns: entry `(k, m)` guards
//! the link between LED `k` and UE `m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelTable;
use crate::error::{Error, Result};
use crate::rate::{objective, Assignment, NoiseModel};

/// How neighbor vectors are drawn from the current assignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodKind {
    /// Neighbor `q` moves every UE that has an alternative. Accepted links
    /// become tabu.
    AllCoordinates,
    /// Neighbor `q` moves UE `q` only (swapping with the holder of the drawn
    /// LED when that keeps both reachable). Abandoned links become tabu.
    #[default]
    SingleCoordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TsConfig {
    pub neighborhood: NeighborhoodKind,
    pub max_iterations: usize,
    /// Stop once the current vector has repeated more than this many
    /// consecutive iterations while sitting on a local maximum.
    pub repetition_threshold: usize,
    pub rng_seed: u64,
}

impl TsConfig {
    /// `max_iterations = 50·M`, `repetition_threshold = M`.
    pub fn for_ues(num_ues: usize, rng_seed: u64) -> Self {
        let m = num_ues.max(1);
        TsConfig {
            neighborhood: NeighborhoodKind::default(),
            max_iterations: 50 * m,
            repetition_threshold: m,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if self.repetition_threshold == 0 {
            return Err(Error::invalid("repetition_threshold", "must be at least 1"));
        }
        Ok(())
    }
}

/// `K × M` countdown matrix, LED-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuList {
    num_ues: usize,
    tenure: u32,
    entries: Vec<u32>,
}

impl TabuList {
    /// All-zero list whose tabu period equals the number of UEs.
    pub fn new(num_leds: usize, num_ues: usize) -> Self {
        TabuList {
            num_ues,
            tenure: num_ues as u32,
            entries: vec![0; num_leds * num_ues],
        }
    }

    #[inline]
    pub fn get(&self, led: usize, ue: usize) -> u32 {
        self.entries[led * self.num_ues + ue]
    }

    pub fn set(&mut self, led: usize, ue: usize, value: u32) {
        self.entries[led * self.num_ues + ue] = value;
    }

    pub fn tenure(&self) -> u32 {
        self.tenure
    }

    /// No link of `assignment` is tabu.
    pub fn permits(&self, assignment: &Assignment) -> bool {
        assignment
            .leds()
            .iter()
            .enumerate()
            .all(|(ue, &led)| self.get(led, ue) == 0)
    }

    /// Every positive entry counts down by one.
    pub fn decay(&mut self) {
        for e in &mut self.entries {
            *e = e.saturating_sub(1);
        }
    }

    /// Makes each link of `assignment` tabu for a full period.
    pub fn forbid(&mut self, assignment: &Assignment) {
        for (ue, &led) in assignment.leds().iter().enumerate() {
            self.set(led, ue, self.tenure);
        }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabuState {
    pub tabu: TabuList,
    pub current: Assignment,
    pub current_value: f64,
    pub best: Assignment,
    pub best_value: f64,
    pub iteration: usize,
    /// Consecutive iterations that left `current` unchanged.
    pub repetition_count: usize,
    /// No neighbor in the last neighborhood strictly improved on `current`.
    pub local_max_flag: bool,
    /// Objective evaluations spent so far, including the initial solution.
    pub evaluations: u64,
}

impl TabuState {
    pub fn new(table: &ChannelTable, initial: Assignment, noise: &NoiseModel) -> Result<Self> {
        initial.validate(table)?;
        let value = objective(table, &initial, noise);
        Ok(TabuState {
            tabu: TabuList::new(table.num_leds(), table.num_ues()),
            current: initial.clone(),
            current_value: value,
            best: initial,
            best_value: value,
            iteration: 0,
            repetition_count: 0,
            local_max_flag: false,
            evaluations: 1,
        })
    }
}

/// A neighbor together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub assignment: Assignment,
    pub value: f64,
}

/// Neighbors of `state.current` under `kind`.
pub fn generate_neighborhood<R: Rng + ?Sized>(
    state: &TabuState,
    table: &ChannelTable,
    kind: NeighborhoodKind,
    rng: &mut R,
) -> Vec<Assignment> {
    match kind {
        NeighborhoodKind::AllCoordinates => all_coordinates_neighborhood(state, table, rng),
        NeighborhoodKind::SingleCoordinate => single_coordinate_neighborhood(state, table, rng),
    }
}

/// Draws `M` neighbors of `state.current`.
///
/// Coordinate `m` of a neighbor is drawn uniformly from the reachable set of
/// UE `m` minus its current LED; UEs with a single reachable LED keep it.
/// Collisions are repaired in UE order by redrawing from the untaken
/// alternatives, then by keeping the current LED. A neighbor that still
/// cannot be made one-to-one degrades to a copy of the current vector, so
/// every returned neighbor is feasible.
pub fn all_coordinates_neighborhood<R: Rng + ?Sized>(
    state: &TabuState,
    table: &ChannelTable,
    rng: &mut R,
) -> Vec<Assignment> {
    let num_ues = table.num_ues();
    let current = state.current.leds();
    let mut taken = vec![false; table.num_leds()];
    let mut alternatives: Vec<usize> = Vec::new();
    let mut neighbors = Vec::with_capacity(num_ues);

    for _ in 0..num_ues {
        taken.fill(false);
        // LEDs of frozen UEs are never up for grabs.
        for (ue, &led) in current.iter().enumerate() {
            if table.reachable(ue).len() == 1 {
                taken[led] = true;
            }
        }

        let mut z = current.to_vec();
        let mut repaired = true;
        for ue in 0..num_ues {
            let reachable = table.reachable(ue);
            if reachable.len() == 1 {
                continue;
            }
            alternatives.clear();
            alternatives.extend(reachable.iter().copied().filter(|&k| k != current[ue]));
            let draw = alternatives[rng.random_range(0..alternatives.len())];
            let choice = if !taken[draw] {
                Some(draw)
            } else {
                alternatives.retain(|&k| !taken[k]);
                if !alternatives.is_empty() {
                    Some(alternatives[rng.random_range(0..alternatives.len())])
                } else if !taken[current[ue]] {
                    Some(current[ue])
                } else {
                    None
                }
            };
            match choice {
                Some(led) => {
                    z[ue] = led;
                    taken[led] = true;
                }
                None => {
                    repaired = false;
                    break;
                }
            }
        }
        neighbors.push(if repaired {
            Assignment::new(z)
        } else {
            state.current.clone()
        });
    }
    neighbors
}

/// Draws up to `M` neighbors of `state.current`, the `q`-th moving UE `q`.
///
/// The new LED is drawn uniformly from the reachable set of UE `q` minus its
/// current LED. If another UE holds it, the two swap when the holder can
/// reach the vacated LED; otherwise the draw is repeated over free
/// alternatives. UEs with nothing to move to contribute no neighbor.
pub fn single_coordinate_neighborhood<R: Rng + ?Sized>(
    state: &TabuState,
    table: &ChannelTable,
    rng: &mut R,
) -> Vec<Assignment> {
    let current = state.current.leds();
    let mut holder = vec![usize::MAX; table.num_leds()];
    for (ue, &led) in current.iter().enumerate() {
        holder[led] = ue;
    }
    let mut alternatives: Vec<usize> = Vec::new();
    let mut neighbors = Vec::with_capacity(current.len());

    for ue in 0..current.len() {
        let here = current[ue];
        alternatives.clear();
        alternatives.extend(table.reachable(ue).iter().copied().filter(|&k| k != here));
        if alternatives.is_empty() {
            continue;
        }
        let draw = alternatives[rng.random_range(0..alternatives.len())];
        let mut z = current.to_vec();
        match holder[draw] {
            usize::MAX => z[ue] = draw,
            other if table.reachable(other).contains(&here) => {
                z[ue] = draw;
                z[other] = here;
            }
            _ => {
                alternatives.retain(|&k| holder[k] == usize::MAX);
                if alternatives.is_empty() {
                    continue;
                }
                z[ue] = alternatives[rng.random_range(0..alternatives.len())];
            }
        }
        neighbors.push(Assignment::new(z));
    }
    neighbors
}

pub fn score_candidates(candidates: Vec<Assignment>, table: &ChannelTable, noise: &NoiseModel) -> Vec<Scored> {
    candidates
        .into_iter()
        .map(|assignment| {
            let value = objective(table, &assignment, noise);
            Scored { assignment, value }
        })
        .collect()
}

/// Index of the accepted candidate, if any.
///
/// Candidates are tried best first (ties: lowest index). A candidate is
/// accepted if it beats the best value so far or none of its links is tabu.
pub fn select_move(candidates: &[Scored], state: &TabuState) -> Option<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    // Stable sort keeps the lowest index first among equal values.
    order.sort_by(|&a, &b| candidates[b].value.total_cmp(&candidates[a].value));
    order.into_iter().find(|&q| {
        let c = &candidates[q];
        c.value > state.best_value || state.tabu.permits(&c.assignment)
    })
}

/// Moves to `accepted`, records it as best on strict improvement, then ages
/// the tabu list. The links made tabu for a full period are the accepted
/// ones for [`NeighborhoodKind::AllCoordinates`] and the abandoned ones for
/// [`NeighborhoodKind::SingleCoordinate`].
pub fn commit_move(state: &mut TabuState, accepted: Scored, kind: NeighborhoodKind) {
    if accepted.value > state.best_value {
        state.best = accepted.assignment.clone();
        state.best_value = accepted.value;
    }
    state.tabu.decay();
    match kind {
        NeighborhoodKind::AllCoordinates => state.tabu.forbid(&accepted.assignment),
        NeighborhoodKind::SingleCoordinate => {
            let tenure = state.tabu.tenure();
            for (ue, (&old, &new)) in state.current.leds().iter().zip(accepted.assignment.leds()).enumerate() {
                if old != new {
                    state.tabu.set(old, ue, tenure);
                }
            }
        }
    }
    state.current = accepted.assignment;
    state.current_value = accepted.value;
}

pub fn stopping_check(state: &TabuState, config: &TsConfig) -> bool {
    state.iteration >= config.max_iterations
        || (state.repetition_count > config.repetition_threshold && state.local_max_flag)
}

/// One point of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Cumulative objective evaluations at the end of this iteration.
    pub evaluations: u64,
    pub current_value: f64,
    pub best_value: f64,
}

impl TraceRecord {
    fn of(state: &TabuState) -> Self {
        TraceRecord {
            iteration: state.iteration,
            evaluations: state.evaluations,
            current_value: state.current_value,
            best_value: state.best_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabuOutcome {
    pub assignment: Assignment,
    pub value: f64,
    /// Record 0 is the initial solution; one record per iteration after it.
    pub trace: Vec<TraceRecord>,
}

impl TabuOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iteration)
    }

    pub fn evaluations(&self) -> u64 {
        self.trace.last().map_or(0, |r| r.evaluations)
    }

    /// Evaluations spent when the best value first reached `target`
    /// (within `rel_tol`), or `None` if it never did.
    pub fn evaluations_to_reach(&self, target: f64, rel_tol: f64) -> Option<u64> {
        let threshold = target - rel_tol * target.abs();
        self.trace
            .iter()
            .find(|r| r.best_value >= threshold)
            .map(|r| r.evaluations)
    }
}

/// Runs one iteration: neighborhood, ranking, acceptance and tabu update.
pub fn step<R: Rng + ?Sized>(
    state: &mut TabuState,
    table: &ChannelTable,
    noise: &NoiseModel,
    kind: NeighborhoodKind,
    rng: &mut R,
) {
    let neighbors = generate_neighborhood(state, table, kind, rng);
    state.evaluations += neighbors.len() as u64;
    let mut scored = score_candidates(neighbors, table, noise);
    state.local_max_flag = scored.iter().all(|c| c.value <= state.current_value);

    let previous = state.current.clone();
    match select_move(&scored, state) {
        Some(q) => commit_move(state, scored.swap_remove(q), kind),
        None => state.tabu.decay(),
    }
    if state.current == previous {
        state.repetition_count += 1;
    } else {
        state.repetition_count = 0;
    }
    state.iteration += 1;
}

/// Uniform draw over feasible assignments by rejection; falls back to a
/// deterministic matching when rejection keeps failing (tight instances).
pub fn random_feasible_assignment<R: Rng + ?Sized>(table: &ChannelTable, rng: &mut R) -> Result<Assignment> {
    let fallback = table.find_matching()?;
    let mut used = vec![false; table.num_leds()];
    'attempt: for _ in 0..256 {
        used.fill(false);
        let mut leds = Vec::with_capacity(table.num_ues());
        for ue in 0..table.num_ues() {
            let reachable = table.reachable(ue);
            let led = reachable[rng.random_range(0..reachable.len())];
            if used[led] {
                continue 'attempt;
            }
            used[led] = true;
            leds.push(led);
        }
        return Ok(Assignment::new(leds));
    }
    Ok(Assignment::new(fallback))
}

/// Runs the search from a random feasible start.
pub fn run_tabu_search(table: &ChannelTable, noise: &NoiseModel, config: &TsConfig) -> Result<TabuOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let initial = random_feasible_assignment(table, &mut rng)?;
    let state = TabuState::new(table, initial, noise)?;
    Ok(run_from(state, table, noise, config, &mut rng))
}

/// Runs the search from a prepared state until the stopping rule fires.
pub fn run_from<R: Rng + ?Sized>(
    mut state: TabuState,
    table: &ChannelTable,
    noise: &NoiseModel,
    config: &TsConfig,
    rng: &mut R,
) -> TabuOutcome {
    let mut trace = vec![TraceRecord::of(&state)];
    while !stopping_check(&state, config) {
        step(&mut state, table, noise, config.neighborhood, rng);
        trace.push(TraceRecord::of(&state));
    }
    TabuOutcome {
        assignment: state.best,
        value: state.best_value,
        trace,
    }
}
