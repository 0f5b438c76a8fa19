//! Structural checks on simulated traces.
//!
//! These validators recompute everything from the stored positions; they
//! never consult the engine's internal state, so a forged or corrupted trace
//! is caught the same way a buggy engine would be.

use serde::Serialize;

use crate::engine::{Moment, Trace};
use crate::error::{Error, Result};
use crate::metric::{between_slack, MetricSpace, Point};

/// The product metric on pairs: the larger of the componentwise distances.
pub fn rho<S: MetricSpace>(space: &S, p: (&Point, &Point), q: (&Point, &Point)) -> Result<f64> {
    Ok(space.distance(p.0, q.0)?.max(space.distance(p.1, q.1)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub item: u8,
    pub name: &'static str,
    /// Smallest slack found; negative values beyond the tolerance fail.
    pub worst_margin: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodCurveReport {
    pub interval: [f64; 2],
    pub moments: [usize; 2],
    pub tolerance: f64,
    pub items: Vec<ItemReport>,
    pub passed: bool,
}

impl GoodCurveReport {
    pub fn item(&self, n: u8) -> &ItemReport {
        &self.items[usize::from(n) - 1]
    }
}

fn moment_index(trace: &Trace, t: f64) -> Result<usize> {
    let eps = trace.config.epsilon;
    let i = (t / eps).round();
    let aligned = i >= 0.0 && (i * eps - t).abs() <= 1e-12 * t.abs().max(1.0);
    if !aligned || i as usize >= trace.moments.len() {
        return Err(Error::Usage(format!(
            "time {t} is not a recorded correction moment (epsilon {eps}, {} moments)",
            trace.moments.len()
        )));
    }
    Ok(i as usize)
}

/// Check the four good-curve conditions on `[t_start, t_end]`:
/// 1. both players are 1-Lipschitz (between consecutive samples);
/// 2. `L(τ_{i+1})` lies between `L(τ_i)` and `M(τ_i)`;
/// 3. `d(L(τ_i), L(τ_{i+1})) = ε`;
/// 4. `d(L(τ_i), M(τ_i)) ≥ ε` at every moment of the closed interval.
pub fn validate_good_curve<S: MetricSpace>(
    space: &S,
    trace: &Trace,
    t_start: f64,
    t_end: f64,
    tol: f64,
) -> Result<GoodCurveReport> {
    let a = moment_index(trace, t_start)?;
    let b = moment_index(trace, t_end)?;
    if a >= b {
        return Err(Error::Usage(format!("empty interval [{t_start}, {t_end}]")));
    }
    let eps = trace.config.epsilon;
    let m = &trace.moments;

    let mut lipschitz = f64::INFINITY;
    let samples = &trace.samples[trace.sample_index(a)..=trace.sample_index(b)];
    for w in samples.windows(2) {
        let dt = w[1].t - w[0].t;
        lipschitz = lipschitz
            .min(dt - space.distance(&w[0].lion, &w[1].lion)?)
            .min(dt - space.distance(&w[0].man, &w[1].man)?);
    }
    let mut aim = f64::INFINITY;
    let mut step = f64::INFINITY;
    for i in a..b {
        aim = aim.min(between_slack(space, &m[i].lion, &m[i + 1].lion, &m[i].man)?);
        step = step.min(-(space.distance(&m[i].lion, &m[i + 1].lion)? - eps).abs());
    }
    let mut separation = f64::INFINITY;
    for mo in &m[a..=b] {
        separation = separation.min(space.distance(&mo.lion, &mo.man)? - eps);
    }
    let items: Vec<ItemReport> = [
        (1, "lipschitz", lipschitz),
        (2, "aim_betweenness", aim),
        (3, "step_length", step),
        (4, "separation", separation),
    ]
    .into_iter()
    .map(|(item, name, worst_margin)| ItemReport { item, name, worst_margin, passed: worst_margin >= -tol })
    .collect();
    let passed = items.iter().all(|i| i.passed);
    Ok(GoodCurveReport { interval: [m[a].t, m[b].t], moments: [a, b], tolerance: tol, items, passed })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneReport {
    pub moments: usize,
    pub tolerance: f64,
    /// Largest `d(τ_{i+1}) - d(τ_i)`; `-inf` for a single moment.
    pub worst_increase: f64,
    pub worst_at: Option<usize>,
    pub passed: bool,
}

/// Whether the distance at correction moments never increases by more than `tol`.
pub fn check_distance_monotone(trace: &Trace, tol: f64) -> MonotoneReport {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    for i in 0..trace.moments.len().saturating_sub(1) {
        let inc = trace.moment_distance(i + 1) - trace.moment_distance(i);
        if inc > worst {
            worst = inc;
            worst_at = Some(i);
        }
    }
    MonotoneReport {
        moments: trace.moments.len(),
        tolerance: tol,
        worst_increase: worst,
        worst_at,
        passed: worst <= tol,
    }
}

/// The three statements about one interval `[τ_i, τ_{i+1}]`, each evaluated
/// independently from the trace:
/// 1. the distance stays equal to `d(τ_i)` at every sample of the interval;
/// 2. `d(τ_i) = d(τ_{i+1})`;
/// 3. the Man moved exactly ε and `M(τ_i)` lies between `L(τ_i)` and `M(τ_{i+1})`.
///
/// Each flag is its deviation compared against the tolerance; the
/// deviations are kept so that near-threshold steps can be recognized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepClassification {
    pub step: usize,
    pub stmt1: bool,
    pub stmt2: bool,
    pub stmt3: bool,
    pub deviations: [f64; 3],
}

impl StepClassification {
    pub fn agree(&self) -> bool {
        self.stmt1 == self.stmt2 && self.stmt2 == self.stmt3
    }

    /// True unless some deviation lies in `(tol, band * tol]`, where a flag
    /// flips under a small change of tolerance.
    pub fn unambiguous(&self, tol: f64, band: f64) -> bool {
        self.deviations.iter().all(|&d| d <= tol || d > band * tol)
    }
}

pub fn classify_constant_step<S: MetricSpace>(
    space: &S,
    trace: &Trace,
    i: usize,
    tol: f64,
) -> Result<StepClassification> {
    if i + 1 >= trace.moments.len() {
        return Err(Error::Usage(format!(
            "step {i} needs moments {i} and {} but the trace has {}",
            i + 1,
            trace.moments.len()
        )));
    }
    let eps = trace.config.epsilon;
    let d_i = trace.moment_distance(i);
    let window = &trace.samples[trace.sample_index(i)..=trace.sample_index(i + 1)];
    let dev1 = window.iter().map(|s| (s.d - d_i).abs()).fold(0.0, f64::max);
    let dev2 = (trace.moment_distance(i + 1) - d_i).abs();
    let (a, b) = (&trace.moments[i], &trace.moments[i + 1]);
    let dev3 = (space.distance(&a.man, &b.man)? - eps)
        .abs()
        .max(-between_slack(space, &a.lion, &a.man, &b.man)?);
    Ok(StepClassification {
        step: i,
        stmt1: dev1 <= tol,
        stmt2: dev2 <= tol,
        stmt3: dev3 <= tol,
        deviations: [dev1, dev2, dev3],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LionGeodesicReport {
    pub i: usize,
    pub j: usize,
    /// False when `d(τ_i) != d(τ_j)`; nothing is asserted then.
    pub applicable: bool,
    pub d_endpoints: f64,
    pub expected: f64,
    pub is_geodesic: Option<bool>,
}

/// Whether the Lion's path between moments `i < j` realizes the distance
/// between its endpoints, given that the players' distance is the same at
/// both moments.
pub fn check_lion_geodesic<S: MetricSpace>(
    space: &S,
    trace: &Trace,
    i: usize,
    j: usize,
    tol: f64,
) -> Result<LionGeodesicReport> {
    if i >= j || j >= trace.moments.len() {
        return Err(Error::Usage(format!(
            "need moments i < j < {}, got ({i}, {j})",
            trace.moments.len()
        )));
    }
    let m = &trace.moments;
    let d_endpoints = space.distance(&m[i].lion, &m[j].lion)?;
    let expected = (j - i) as f64 * trace.config.epsilon;
    let applicable = (trace.moment_distance(i) - trace.moment_distance(j)).abs() <= tol;
    let is_geodesic = applicable.then(|| (d_endpoints - expected).abs() <= tol);
    Ok(LionGeodesicReport { i, j, applicable, d_endpoints, expected, is_geodesic })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub i: usize,
    pub j: usize,
    pub center: [Point; 2],
    pub radius: f64,
}

impl RoundRecord {
    pub fn length(&self) -> usize {
        self.j - self.i
    }
}

/// Rounds for the closed `rho`-ball of `radius` around `center`: pairs of
/// moments `i < j` with `j - i > 1` that both lie in the ball while no
/// moment strictly between them does.
///
/// The radius must stay below `ε/2`, so that the ball is too small to hold
/// two consecutive moments of a pursuit in which the Lion moves ε per step.
pub fn detect_rounds<S: MetricSpace>(
    space: &S,
    moments: &[Moment],
    center: (&Point, &Point),
    radius: f64,
    epsilon: f64,
) -> Result<Vec<RoundRecord>> {
    if !(radius >= 0.0 && radius < epsilon / 2.0) {
        return Err(Error::InvalidConfig(format!(
            "round radius {radius} must lie in [0, epsilon/2) = [0, {})",
            epsilon / 2.0
        )));
    }
    let mut hits = Vec::new();
    for (k, mo) in moments.iter().enumerate() {
        if rho(space, (&mo.lion, &mo.man), center)? <= radius {
            hits.push(k);
        }
    }
    Ok(hits
        .windows(2)
        .filter(|w| w[1] - w[0] > 1)
        .map(|w| RoundRecord {
            i: w[0],
            j: w[1],
            center: [center.0.clone(), center.1.clone()],
            radius,
        })
        .collect())
}

/// The moment whose closed `rho`-ball of `radius` contains the most moments
/// (earliest on ties). Quadratic in the number of moments.
pub fn most_revisited_center<S: MetricSpace>(
    space: &S,
    moments: &[Moment],
    radius: f64,
) -> Result<Option<(Point, Point)>> {
    let mut best: Option<(usize, usize)> = None;
    for (c, cm) in moments.iter().enumerate() {
        let mut count = 0;
        for mo in moments {
            if rho(space, (&mo.lion, &mo.man), (&cm.lion, &cm.man))? <= radius {
                count += 1;
            }
        }
        if best.is_none_or(|(_, n)| count > n) {
            best = Some((c, count));
        }
    }
    Ok(best.map(|(c, _)| (moments[c].lion.clone(), moments[c].man.clone())))
}

/// Everything the harness writes next to a trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceDiagnostics {
    pub good_curve: Option<GoodCurveReport>,
    pub monotone: MonotoneReport,
    pub steps_checked: usize,
    pub steps_with_disagreement: Vec<StepClassification>,
    pub rounds: Vec<RoundRecord>,
}

/// Run the standard diagnostics over a trace: good-curve validation of the
/// longest pre-capture prefix, monotonicity, step-flag agreement at every
/// step of that prefix, and rounds around the most revisited `ε/3`-ball.
pub fn diagnose<S: MetricSpace>(space: &S, trace: &Trace, tol: f64) -> Result<TraceDiagnostics> {
    let eps = trace.config.epsilon;
    let last = trace.last_pre_capture_moment().unwrap_or(0);
    let good_curve = if last > 0 {
        Some(validate_good_curve(space, trace, 0.0, trace.moments[last].t, tol)?)
    } else {
        None
    };
    let mut disagreements = Vec::new();
    for i in 0..last {
        let c = classify_constant_step(space, trace, i, tol)?;
        if !c.agree() {
            disagreements.push(c);
        }
    }
    let radius = eps / 3.0;
    let rounds = match most_revisited_center(space, &trace.moments, radius)? {
        Some((l, m)) => detect_rounds(space, &trace.moments, (&l, &m), radius, eps)?,
        None => Vec::new(),
    };
    Ok(TraceDiagnostics {
        good_curve,
        monotone: check_distance_monotone(trace, tol),
        steps_checked: last,
        steps_with_disagreement: disagreements,
        rounds,
    })
}
