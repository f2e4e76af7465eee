//! Room layouts: the LED grid, randomly dropped UEs and an eavesdropper
//! whose position is known only up to a localization error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Emitter, Point3, Receiver};
use crate::error::{Error, Result};
use crate::rate::{dbm_to_watts, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl Room {
    pub fn contains(&self, p: &Point3) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.depth).contains(&p.y) && (0.0..=self.height).contains(&p.z)
    }
}

impl Default for Room {
    fn default() -> Self {
        Room {
            width: 10.0,
            depth: 10.0,
            height: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedGrid {
    pub rows: usize,
    pub cols: usize,
}

impl LedGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameters of one family of random instances. Defaults: 10×10×3 m room,
/// 5×5 LEDs at 23 dBm, five UEs, 50° fields of view, −98 dBm noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub room: Room,
    pub led_grid: LedGrid,
    pub led_power_dbm: f64,
    pub half_intensity_deg: f64,
    pub num_ues: usize,
    pub ue_fov_deg: f64,
    pub eve_fov_deg: f64,
    /// Horizontal distance between Eve's true and estimated positions.
    pub eve_localization_error_m: f64,
    pub noise_dbm: f64,
    /// Height of the UE and Eve photodiodes.
    pub receiver_height: f64,
    pub pd_area: f64,
    pub refractive_index: f64,
    pub filter_gain: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            room: Room::default(),
            led_grid: LedGrid { rows: 5, cols: 5 },
            led_power_dbm: 23.0,
            half_intensity_deg: 60.0,
            num_ues: 5,
            ue_fov_deg: 50.0,
            eve_fov_deg: 50.0,
            eve_localization_error_m: 0.0,
            noise_dbm: -98.0,
            receiver_height: 0.8,
            pd_area: Receiver::DEFAULT_PD_AREA,
            refractive_index: Receiver::DEFAULT_REFRACTIVE_INDEX,
            filter_gain: Receiver::DEFAULT_FILTER_GAIN,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let Room { width, depth, height } = self.room;
        if !(width > 0.0 && depth > 0.0 && height > 0.0) || !(width + depth + height).is_finite() {
            return Err(Error::invalid("room", "dimensions must be positive and finite"));
        }
        if self.led_grid.is_empty() {
            return Err(Error::invalid("led_grid", "needs at least one row and one column"));
        }
        if self.num_ues > self.led_grid.len() {
            return Err(Error::invalid(
                "num_ues",
                format!("{} UEs exceed the {} LEDs", self.num_ues, self.led_grid.len()),
            ));
        }
        for (name, fov) in [("ue_fov_deg", self.ue_fov_deg), ("eve_fov_deg", self.eve_fov_deg)] {
            if !(fov > 0.0 && fov <= 90.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 90], got {fov}")));
            }
        }
        if !(self.eve_localization_error_m >= 0.0 && self.eve_localization_error_m.is_finite()) {
            return Err(Error::invalid("eve_localization_error_m", "must be finite and >= 0"));
        }
        if !(self.receiver_height >= 0.0 && self.receiver_height < height) {
            return Err(Error::invalid(
                "receiver_height",
                "must lie between the floor and the ceiling",
            ));
        }
        if !self.led_power_dbm.is_finite() {
            return Err(Error::invalid("led_power_dbm", "must be finite"));
        }
        NoiseModel::from_dbm(self.noise_dbm)?;
        // Surfaces the remaining optics checks.
        self.receiver(Point3::new(0.0, 0.0, self.receiver_height), self.ue_fov_deg)?;
        crate::channel::lambertian_order(self.half_intensity_deg.to_radians())?;
        Ok(())
    }

    fn receiver(&self, position: Point3, fov_deg: f64) -> Result<Receiver> {
        let receiver = Receiver {
            position,
            fov: fov_deg.to_radians(),
            pd_area: self.pd_area,
            refractive_index: self.refractive_index,
            filter_gain: self.filter_gain,
            orientation: crate::channel::UnitVector::UP,
        };
        receiver.validate()?;
        Ok(receiver)
    }

    pub fn ue_receiver(&self, x: f64, y: f64) -> Result<Receiver> {
        self.receiver(Point3::new(x, y, self.receiver_height), self.ue_fov_deg)
    }

    pub fn eve_receiver(&self, x: f64, y: f64) -> Result<Receiver> {
        self.receiver(Point3::new(x, y, self.receiver_height), self.eve_fov_deg)
    }
}

/// One concrete instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub room: Room,
    pub leds: Vec<Emitter>,
    pub ues: Vec<Receiver>,
    pub eve_true: Receiver,
    /// Where the controller believes Eve is. Solvers only ever see this.
    pub eve_estimated: Receiver,
    pub noise: NoiseModel,
}

impl Scenario {
    /// Builds a scenario from explicit floor positions, with the LED grid
    /// and optics taken from `config`. Eve's estimate is exact.
    pub fn from_positions(config: &ScenarioConfig, ues: &[(f64, f64)], eve: (f64, f64)) -> Result<Self> {
        config.validate()?;
        let ues = ues
            .iter()
            .map(|&(x, y)| config.ue_receiver(x, y))
            .collect::<Result<Vec<_>>>()?;
        let eve = config.eve_receiver(eve.0, eve.1)?;
        let scenario = Scenario {
            room: config.room,
            leds: place_led_grid(config)?,
            ues,
            eve_true: eve.clone(),
            eve_estimated: eve,
            noise: NoiseModel::from_dbm(config.noise_dbm)?,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// The five-UE layout used as the worked example: UEs at (1.34, 1.59),
    /// (5.28, 6.05), (8.66, 4.19), (2.48, 5.89), (7.07, 6.00) and Eve at
    /// (2.13, 4.25), all at 0.8 m, under a 5×5 grid.
    pub fn reference_layout(config: &ScenarioConfig) -> Result<Self> {
        let config = ScenarioConfig {
            num_ues: REFERENCE_UES.len(),
            ..config.clone()
        };
        Scenario::from_positions(&config, &REFERENCE_UES, REFERENCE_EVE)
    }

    pub fn num_leds(&self) -> usize {
        self.leds.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn validate(&self) -> Result<()> {
        for led in &self.leds {
            led.validate()?;
        }
        for rx in self.ues.iter().chain([&self.eve_true, &self.eve_estimated]) {
            rx.validate()?;
        }
        let all_inside = self
            .leds
            .iter()
            .map(|l| &l.position)
            .chain(self.ues.iter().map(|u| &u.position))
            .chain([&self.eve_true.position, &self.eve_estimated.position])
            .all(|p| self.room.contains(p));
        if !all_inside {
            return Err(Error::invalid("scenario", "every position must lie inside the room"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

pub const REFERENCE_UES: [(f64, f64); 5] = [(1.34, 1.59), (5.28, 6.05), (8.66, 4.19), (2.48, 5.89), (7.07, 6.00)];
pub const REFERENCE_EVE: (f64, f64) = (2.13, 4.25);

/// Uniform grid at ceiling height, one LED per cell center, row-major
/// (`index = row * cols + col`, rows along the depth axis).
pub fn place_led_grid(config: &ScenarioConfig) -> Result<Vec<Emitter>> {
    let LedGrid { rows, cols } = config.led_grid;
    let (dx, dy) = (config.room.width / cols as f64, config.room.depth / rows as f64);
    let power = dbm_to_watts(config.led_power_dbm);
    let half_angle = config.half_intensity_deg.to_radians();
    let mut leds = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let position = Point3::new((c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy, config.room.height);
            leds.push(Emitter::new(position, half_angle, power)?);
        }
    }
    Ok(leds)
}

/// Draws one instance. UE and Eve floor positions are uniform over the room;
/// Eve's estimate is displaced by exactly the configured error at a uniform
/// bearing, then clamped to the room.
///
/// Draw order is fixed (Eve, bearing, then UEs in order), so instances that
/// differ only in the UE count or the error magnitude share their geometry.
pub fn sample_instance<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    config.validate()?;
    let Room { width, depth, .. } = config.room;
    let eve_xy = (rng.random::<f64>() * width, rng.random::<f64>() * depth);
    let bearing = rng.random::<f64>() * std::f64::consts::TAU;
    let ues = (0..config.num_ues)
        .map(|_| (rng.random::<f64>() * width, rng.random::<f64>() * depth))
        .collect::<Vec<_>>();

    let err = config.eve_localization_error_m;
    let estimated = (
        (eve_xy.0 + err * bearing.cos()).clamp(0.0, width),
        (eve_xy.1 + err * bearing.sin()).clamp(0.0, depth),
    );

    let mut scenario = Scenario::from_positions(config, &ues, eve_xy)?;
    scenario.eve_estimated = config.eve_receiver(estimated.0, estimated.1)?;
    Ok(scenario)
}
