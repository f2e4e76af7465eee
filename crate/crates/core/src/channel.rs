//! Line-of-sight Lambertian channel model.
//!
//! LEDs are modelled as Lambertian point sources and photodiodes as
//! receivers behind an optical filter and a non-imaging concentrator. The
//! DC gain between an LED and a photodiode is
//!
//! ```text
//! h = (γ + 1) A_R / (2π d²) · cos^γ(φ) · cos(ψ) · f(ψ) · g_of
//! ```
//!
//! with `φ` the irradiance angle at the LED, `ψ` the incidence angle at the
//! photodiode, `γ` the Lambertian order and `f` the concentrator gain, which
//! vanishes outside the receiver field of view.
//!
//! All LED and UE indices in this crate are zero-based.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Half-intensity angles below this are rejected; the Lambertian order
/// grows without bound as the angle shrinks.
pub const MIN_HALF_INTENSITY_ANGLE: f64 = PI / 180.0;

/// A position in the room, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn to(&self, other: &Point3) -> [f64; 3] {
        [other.x - self.x, other.y - self.y, other.z - self.z]
    }
}

/// A unit-length direction vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector([f64; 3]);

impl UnitVector {
    /// Facing the floor. Default orientation of ceiling LEDs.
    pub const DOWN: UnitVector = UnitVector([0.0, 0.0, -1.0]);
    /// Facing the ceiling. Default orientation of photodiodes.
    pub const UP: UnitVector = UnitVector([0.0, 0.0, 1.0]);

    /// Normalizes `v`. Fails on a zero or non-finite vector.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid("orientation", "must be a non-zero finite vector"));
        }
        Ok(UnitVector([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for UnitVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for [f64; 3] {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// An LED luminaire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emitter {
    pub position: Point3,
    /// Half-intensity radiation angle, radians.
    pub half_intensity_angle: f64,
    pub orientation: UnitVector,
    /// Transmit power in watts. Symbols are amplitude-scaled by this value.
    pub power: f64,
}

impl Emitter {
    /// A downward-facing LED.
    pub fn new(position: Point3, half_intensity_angle: f64, power: f64) -> Result<Self> {
        let emitter = Emitter {
            position,
            half_intensity_angle,
            orientation: UnitVector::DOWN,
            power,
        };
        emitter.validate()?;
        Ok(emitter)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::invalid("position", "LED coordinates must be finite"));
        }
        lambertian_order(self.half_intensity_angle)?;
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::invalid(
                "power",
                format!("must be finite and >= 0, got {}", self.power),
            ));
        }
        Ok(())
    }
}

/// A photodiode receiver (a UE or the eavesdropper).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub position: Point3,
    /// Field-of-view half angle, radians.
    pub fov: f64,
    /// Photodiode area, m².
    pub pd_area: f64,
    pub refractive_index: f64,
    pub filter_gain: f64,
    pub orientation: UnitVector,
}

impl Receiver {
    /// Photodiode area used throughout the simulations: 1 cm².
    pub const DEFAULT_PD_AREA: f64 = 1e-4;
    pub const DEFAULT_REFRACTIVE_INDEX: f64 = 1.5;
    pub const DEFAULT_FILTER_GAIN: f64 = 1.0;

    /// An upward-facing receiver with the default optics.
    pub fn new(position: Point3, fov: f64) -> Result<Self> {
        let receiver = Receiver {
            position,
            fov,
            pd_area: Self::DEFAULT_PD_AREA,
            refractive_index: Self::DEFAULT_REFRACTIVE_INDEX,
            filter_gain: Self::DEFAULT_FILTER_GAIN,
            orientation: UnitVector::UP,
        };
        receiver.validate()?;
        Ok(receiver)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::invalid("position", "receiver coordinates must be finite"));
        }
        if !(self.fov > 0.0 && self.fov <= FRAC_PI_2) {
            return Err(Error::invalid("fov", format!("must lie in (0, π/2], got {}", self.fov)));
        }
        if !(self.pd_area > 0.0 && self.pd_area.is_finite()) {
            return Err(Error::invalid("pd_area", "must be positive"));
        }
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return Err(Error::invalid("refractive_index", "must be >= 1"));
        }
        if !(self.filter_gain > 0.0 && self.filter_gain.is_finite()) {
            return Err(Error::invalid("filter_gain", "must be positive"));
        }
        Ok(())
    }
}

/// Lambertian emission order `γ = −1 / log2(cos φ½)`.
///
/// Orders within 1e-12 of an integer are snapped to it, so that 60° gives
/// exactly 1 and 45° exactly 2 despite the rounding in `cos`.
///
/// ```
/// use vlc_secrecy::channel::lambertian_order;
/// assert_eq!(lambertian_order(60f64.to_radians()).unwrap(), 1.0);
/// assert_eq!(lambertian_order(45f64.to_radians()).unwrap(), 2.0);
/// ```
pub fn lambertian_order(half_intensity_angle: f64) -> Result<f64> {
    if !(MIN_HALF_INTENSITY_ANGLE..FRAC_PI_2).contains(&half_intensity_angle) {
        return Err(Error::invalid(
            "half_intensity_angle",
            format!("must lie in [1°, 90°), got {:.6}°", half_intensity_angle.to_degrees()),
        ));
    }
    let order = -1.0 / half_intensity_angle.cos().log2();
    let nearest = order.round();
    if (order - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) {
        Ok(nearest)
    } else {
        Ok(order)
    }
}

/// Concentrator gain `q² / sin²(Θ)` inside the field of view, 0 outside.
/// The boundary `incidence_angle == fov` is inside.
pub fn concentrator_gain(incidence_angle: f64, fov: f64, refractive_index: f64) -> f64 {
    if (0.0..=fov).contains(&incidence_angle) {
        let s = fov.sin();
        refractive_index * refractive_index / (s * s)
    } else {
        0.0
    }
}

/// Line-of-sight DC gain from `emitter` to `receiver`.
///
/// Exactly zero when the receiver is behind the LED, the LED is behind the
/// receiver, or the incidence angle exceeds the field of view.
pub fn channel_gain(emitter: &Emitter, receiver: &Receiver) -> Result<f64> {
    let order = lambertian_order(emitter.half_intensity_angle)?;
    gain_with_order(emitter, order, receiver)
}

fn gain_with_order(emitter: &Emitter, order: f64, receiver: &Receiver) -> Result<f64> {
    let d = emitter.position.distance(&receiver.position);
    if d.is_nan() || d <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "LED and receiver coincide at {:?}",
            receiver.position
        )));
    }
    let ray = emitter.position.to(&receiver.position);
    let cos_irradiance = dot(&emitter.orientation.0, &ray) / d;
    let cos_incidence = -dot(&receiver.orientation.0, &ray) / d;
    if cos_irradiance < 0.0 || cos_incidence < 0.0 {
        return Ok(0.0);
    }
    let incidence = cos_incidence.min(1.0).acos();
    let concentrator = concentrator_gain(incidence, receiver.fov, receiver.refractive_index);
    if concentrator == 0.0 {
        return Ok(0.0);
    }
    Ok((order + 1.0) * receiver.pd_area / (2.0 * PI * d * d)
        * cos_irradiance.powf(order)
        * cos_incidence
        * concentrator
        * receiver.filter_gain)
}

/// Precomputed gains for one instance: every LED against every UE, plus
/// every LED against the eavesdropper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTable {
    /// `gains[k][m]`: LED `k` to UE `m`.
    gains: Vec<Vec<f64>>,
    eve_gains: Vec<f64>,
    /// Transmit power of each LED, watts.
    powers: Vec<f64>,
    reachable_sets: Vec<Vec<usize>>,
    eve_reachable_set: Vec<usize>,
}

impl ChannelTable {
    /// Builds a table from raw gains (`gains[k][m]`, LED-major) and derives
    /// the reachable sets from the positive entries.
    ///
    /// Fails if any UE has no reachable LED.
    pub fn from_gains(gains: Vec<Vec<f64>>, eve_gains: Vec<f64>, powers: Vec<f64>) -> Result<Self> {
        let num_leds = gains.len();
        if eve_gains.len() != num_leds || powers.len() != num_leds {
            return Err(Error::invalid(
                "gains",
                format!(
                    "{} LED rows but {} Eve gains and {} powers",
                    num_leds,
                    eve_gains.len(),
                    powers.len()
                ),
            ));
        }
        let num_ues = gains.first().map_or(0, Vec::len);
        if gains.iter().any(|row| row.len() != num_ues) {
            return Err(Error::invalid("gains", "ragged gain matrix"));
        }
        let all_valid = gains
            .iter()
            .flatten()
            .chain(&eve_gains)
            .chain(&powers)
            .all(|g| *g >= 0.0 && g.is_finite());
        if !all_valid {
            return Err(Error::invalid("gains", "gains and powers must be finite and >= 0"));
        }

        let reachable_sets: Vec<Vec<usize>> = (0..num_ues)
            .map(|m| (0..num_leds).filter(|&k| gains[k][m] > 0.0).collect())
            .collect();
        if let Some(ue) = reachable_sets.iter().position(Vec::is_empty) {
            return Err(Error::EmptyReachableSet { ue });
        }
        let eve_reachable_set = (0..num_leds).filter(|&k| eve_gains[k] > 0.0).collect();
        Ok(ChannelTable {
            gains,
            eve_gains,
            powers,
            reachable_sets,
            eve_reachable_set,
        })
    }

    pub fn num_leds(&self) -> usize {
        self.gains.len()
    }

    pub fn num_ues(&self) -> usize {
        self.reachable_sets.len()
    }

    #[inline]
    pub fn gain(&self, led: usize, ue: usize) -> f64 {
        self.gains[led][ue]
    }

    #[inline]
    pub fn eve_gain(&self, led: usize) -> f64 {
        self.eve_gains[led]
    }

    #[inline]
    pub fn power(&self, led: usize) -> f64 {
        self.powers[led]
    }

    pub fn gains(&self) -> &[Vec<f64>] {
        &self.gains
    }

    pub fn eve_gains(&self) -> &[f64] {
        &self.eve_gains
    }

    /// LEDs inside UE `ue`'s field of view, ascending.
    pub fn reachable(&self, ue: usize) -> &[usize] {
        &self.reachable_sets[ue]
    }

    pub fn reachable_sets(&self) -> &[Vec<usize>] {
        &self.reachable_sets
    }

    pub fn eve_reachable_set(&self) -> &[usize] {
        &self.eve_reachable_set
    }

    /// Same UE channels, different eavesdropper channel.
    pub fn with_eve_gains(&self, eve_gains: Vec<f64>) -> Result<Self> {
        ChannelTable::from_gains(self.gains.clone(), eve_gains, self.powers.clone())
    }

    /// Product of reachable-set sizes: an upper bound on the number of
    /// feasible assignments.
    pub fn search_space_bound(&self) -> f64 {
        self.reachable_sets.iter().map(|s| s.len() as f64).product()
    }

    /// Finds some one-to-one assignment of reachable LEDs to UEs, or reports
    /// that none exists.
    pub fn find_matching(&self) -> Result<Vec<usize>> {
        let num_ues = self.num_ues();
        if num_ues > self.num_leds() {
            return Err(Error::InfeasibleInstance(format!(
                "{} UEs but only {} LEDs",
                num_ues,
                self.num_leds()
            )));
        }
        // Kuhn's augmenting paths; instances are tiny.
        let mut owner: Vec<Option<usize>> = vec![None; self.num_leds()];
        for ue in 0..num_ues {
            let mut visited = vec![false; self.num_leds()];
            if !self.augment(ue, &mut visited, &mut owner) {
                return Err(Error::InfeasibleInstance(format!(
                    "no one-to-one LED assignment covers UE {ue}"
                )));
            }
        }
        let mut assignment = vec![0; num_ues];
        for (led, ue) in owner.iter().enumerate() {
            if let Some(ue) = ue {
                assignment[*ue] = led;
            }
        }
        Ok(assignment)
    }

    fn augment(&self, ue: usize, visited: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &led in self.reachable(ue) {
            if visited[led] {
                continue;
            }
            visited[led] = true;
            let free = match owner[led] {
                None => true,
                Some(other) => self.augment(other, visited, owner),
            };
            if free {
                owner[led] = Some(ue);
                return true;
            }
        }
        false
    }
}

fn table_for(scenario: &Scenario, eve: &Receiver) -> Result<ChannelTable> {
    let mut gains = Vec::with_capacity(scenario.leds.len());
    let mut eve_gains = Vec::with_capacity(scenario.leds.len());
    let mut powers = Vec::with_capacity(scenario.leds.len());
    for led in &scenario.leds {
        let order = lambertian_order(led.half_intensity_angle)?;
        gains.push(
            scenario
                .ues
                .iter()
                .map(|ue| gain_with_order(led, order, ue))
                .collect::<Result<Vec<_>>>()?,
        );
        eve_gains.push(gain_with_order(led, order, eve)?);
        powers.push(led.power);
    }
    ChannelTable::from_gains(gains, eve_gains, powers)
}

/// The table the solvers see: Eve's channel comes from her *estimated*
/// position.
pub fn build_channel_table(scenario: &Scenario) -> Result<ChannelTable> {
    table_for(scenario, &scenario.eve_estimated)
}

/// The table used to score a chosen assignment: Eve's channel comes from her
/// *true* position.
pub fn build_evaluation_table(scenario: &Scenario) -> Result<ChannelTable> {
    table_for(scenario, &scenario.eve_true)
}
