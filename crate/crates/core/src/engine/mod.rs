//! The ε-simple-pursuit game.
//!
//! Time advances in correction intervals of length `epsilon`. At each moment
//! `τ_i = iε` the Lion aims at the Man's current position and walks the
//! canonical geodesic toward it for one interval (stopping early and waiting
//! if he arrives). The Man follows his own plan for the interval. Positions
//! are sampled `substeps` times per interval.

mod evader;
mod export;
mod game;

pub use evader::{evader_move, Evader, EvaderSpec, ManPlan};
pub use export::{config_hash, json_hash, read_trace_jsonl, write_trace_jsonl, TraceHeader};
pub use game::{distance_profile, random_start, run_game, sweep_capture_time, SweepRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{GeodesicPath, MetricSpace, Point, SpaceDescriptor};

/// Minimum number of trace samples per correction interval.
pub const MIN_SUBSTEPS: u32 = 10;

/// Horizon used on unbounded spaces, in correction intervals.
pub const UNBOUNDED_HORIZON: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    /// Capture radius and length of the correction interval.
    pub epsilon: f64,
    /// Number of correction intervals simulated before declaring escape.
    pub horizon_steps: u64,
    /// Samples per interval; the sampling step is `epsilon / substeps`.
    pub substeps: u32,
    /// Capture is declared when the distance drops below `epsilon - capture_tol`.
    pub capture_tol: f64,
}

impl GameConfig {
    /// Config with the default horizon for a space of the given diameter.
    pub fn new(epsilon: f64, diameter: Option<f64>) -> Result<Self> {
        let cfg = GameConfig {
            epsilon,
            horizon_steps: default_horizon(diameter, epsilon),
            substeps: MIN_SUBSTEPS,
            capture_tol: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn for_space<S: MetricSpace>(space: &S, epsilon: f64) -> Result<Self> {
        GameConfig::new(epsilon, space.diameter_bound())
    }

    pub fn with_horizon(mut self, horizon_steps: u64) -> Self {
        self.horizon_steps = horizon_steps;
        self
    }

    pub fn substep(&self) -> f64 {
        self.epsilon / f64::from(self.substeps)
    }

    /// Time of the `j`-th sample; exact at correction moments.
    pub fn sample_time(&self, j: u64) -> f64 {
        (j as f64 / f64::from(self.substeps)) * self.epsilon
    }

    pub fn moment_time(&self, i: u64) -> f64 {
        i as f64 * self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if self.horizon_steps == 0 {
            return Err(Error::InvalidConfig("horizon_steps must be at least 1".into()));
        }
        if self.substeps < MIN_SUBSTEPS {
            return Err(Error::InvalidConfig(format!(
                "substeps must be at least {MIN_SUBSTEPS}, got {}",
                self.substeps
            )));
        }
        if !(self.capture_tol.is_finite() && self.capture_tol >= 0.0 && self.capture_tol < self.epsilon) {
            return Err(Error::InvalidConfig("capture_tol must lie in [0, epsilon)".into()));
        }
        Ok(())
    }
}

/// `ceil(10 (diameter / ε)^2)` on compact spaces, [`UNBOUNDED_HORIZON`] otherwise.
pub fn default_horizon(diameter: Option<f64>, epsilon: f64) -> u64 {
    match diameter {
        Some(d) if epsilon > 0.0 => (10.0 * (d / epsilon).powi(2)).ceil().max(1.0) as u64,
        _ => UNBOUNDED_HORIZON,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Captured { t: f64 },
    Evaded { horizon: f64 },
}

impl Outcome {
    pub fn is_capture(&self) -> bool {
        matches!(self, Outcome::Captured { .. })
    }

    pub fn capture_time(&self) -> Option<f64> {
        match self {
            Outcome::Captured { t } => Some(*t),
            Outcome::Evaded { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Captured { .. } => "captured",
            Outcome::Evaded { .. } => "evaded",
        }
    }
}

/// Positions at a correction moment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moment {
    pub t: f64,
    pub lion: Point,
    pub man: Point,
}

/// Positions and distance at one sampling time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    #[serde(rename = "L")]
    pub lion: Point,
    #[serde(rename = "M")]
    pub man: Point,
    pub d: f64,
}

/// A simulated joint trajectory.
///
/// `samples[j]` is taken at `config.sample_time(j)`; every `substeps`-th
/// sample coincides with a moment. Moments after a capture are not recorded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub space: SpaceDescriptor,
    pub config: GameConfig,
    pub evader: EvaderSpec,
    pub seed: u64,
    pub moments: Vec<Moment>,
    pub samples: Vec<Sample>,
}

impl Trace {
    /// Sample index of moment `i`.
    pub fn sample_index(&self, i: usize) -> usize {
        i * self.config.substeps as usize
    }

    /// Distance at moment `i`.
    pub fn moment_distance(&self, i: usize) -> f64 {
        self.samples[self.sample_index(i)].d
    }

    /// Index of the last moment with distance at least `epsilon`, i.e. the
    /// end of the longest prefix without capture at a moment.
    pub fn last_pre_capture_moment(&self) -> Option<usize> {
        (0..self.moments.len()).take_while(|&i| self.moment_distance(i) >= self.config.epsilon).last()
    }
}

/// The Lion's motion over one correction interval.
#[derive(Clone, Debug)]
pub struct LionStep {
    pub path: GeodesicPath,
    /// Arc length actually walked: `min(epsilon, path length)`.
    pub travel: f64,
}

impl LionStep {
    /// Position at local time `s` in `[0, epsilon]`.
    pub fn position(&self, s: f64) -> Point {
        self.path.advance(s.min(self.travel))
    }

    pub fn endpoint(&self) -> Point {
        self.path.advance(self.travel)
    }
}

/// The Lion walks the canonical geodesic from `lion` to `man` for arc length
/// `epsilon`, or all of it (then waits) when it is shorter.
pub fn lion_step<S: MetricSpace>(space: &S, lion: &Point, man: &Point, epsilon: f64) -> Result<LionStep> {
    let path = space.geodesic(lion, man)?;
    let travel = epsilon.min(path.length());
    Ok(LionStep { path, travel })
}

/// Where the Lion will be at the next moment.
pub fn predict_lion<S: MetricSpace>(space: &S, lion: &Point, man: &Point, epsilon: f64) -> Result<Point> {
    Ok(lion_step(space, lion, man, epsilon)?.endpoint())
}
