//! Sampled verification of metric properties and counterexample search.
//!
//! Each check reports the slack of the property on every sample that meets
//! its hypotheses. Slack is zero when the property holds with equality and
//! negative when it fails; a sample is a violation when its slack is below
//! `-tolerance`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::metric::{between_slack, MetricSpace, Point, SpaceDescriptor};
use crate::seed::{rng_for, GameRng};

/// Default tolerance for betweenness relations between sampled points.
pub const BETWEENNESS_TOL: f64 = 1e-7;

/// Betweenness hypotheses are tested at this fraction of the conclusion
/// tolerance. A triangle excess of `δ` allows a transverse offset of order
/// `sqrt(δ · length)`, which can show up as a much larger excess in the
/// conclusion; testing hypotheses more tightly keeps such near-misses out.
pub const HYPOTHESIS_TOL_FACTOR: f64 = 1e-3;

/// Minimum pairwise distance for a sampled quadruple to count as distinct.
pub const MIN_SEPARATION: f64 = 1e-4;

/// Ptolemy margins below this are reported as violations.
pub const PTOLEMY_TOL: f64 = 1e-9;

const MAX_WITNESSES: usize = 64;
const GRID_RESOLUTION: usize = 4;
const GRID_POINTS: usize = 16;
const RANDOM_PTOLEMY_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub points: Vec<Point>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    pub margin: f64,
}

/// Outcome of a sampled property check.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub space: SpaceDescriptor,
    pub samples: usize,
    pub tolerance: f64,
    /// Samples that met the property's hypotheses.
    pub hypothesis_hits: usize,
    /// The first violations found (at most 64 are kept).
    pub violations: Vec<Witness>,
    pub violation_count: usize,
    /// Most negative slack observed; zero when nothing met the hypotheses.
    pub worst_margin: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl PropertyReport {
    fn new(property: &str, space: &SpaceDescriptor, tolerance: f64) -> Self {
        PropertyReport {
            property: property.to_owned(),
            space: space.clone(),
            samples: 0,
            tolerance,
            hypothesis_hits: 0,
            violations: Vec::new(),
            violation_count: 0,
            worst_margin: 0.0,
            metadata: BTreeMap::new(),
        }
    }

    fn record(&mut self, outcome: Sampled) {
        self.samples += 1;
        let Some((margin, points, params)) = outcome else { return };
        self.hypothesis_hits += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -self.tolerance {
            self.violation_count += 1;
            if self.violations.len() < MAX_WITNESSES {
                self.violations.push(Witness { points, params, margin });
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Four points, in the roles A, B, C, D.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quadruple {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
}

impl Quadruple {
    pub fn new(a: Point, b: Point, c: Point, d: Point) -> Self {
        Quadruple { a, b, c, d }
    }

    pub fn points(&self) -> Vec<Point> {
        vec![self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }

    fn distinct<S: MetricSpace>(&self, space: &S, min_sep: f64) -> Result<bool> {
        let p = [&self.a, &self.b, &self.c, &self.d];
        for i in 0..4 {
            for j in i + 1..4 {
                if space.distance(p[i], p[j])? <= min_sep {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Slack of the betweenness implication on one quadruple.
///
/// Returns `None` unless the points are distinct, B lies between A and C,
/// and C lies between B and D (each within `tol * HYPOTHESIS_TOL_FACTOR`).
/// Otherwise returns the smaller of the slacks of "B between A, D" and
/// "C between A, D".
pub fn betweenness_margin<S: MetricSpace>(space: &S, q: &Quadruple, tol: f64) -> Result<Option<f64>> {
    if !q.distinct(space, MIN_SEPARATION)? {
        return Ok(None);
    }
    let hyp = tol * HYPOTHESIS_TOL_FACTOR;
    if between_slack(space, &q.a, &q.b, &q.c)? < -hyp || between_slack(space, &q.b, &q.c, &q.d)? < -hyp {
        return Ok(None);
    }
    let b_in = between_slack(space, &q.a, &q.b, &q.d)?;
    let c_in = between_slack(space, &q.a, &q.c, &q.d)?;
    Ok(Some(b_in.min(c_in)))
}

/// Slack of "C between A and D" given "B between A, D" and "C between B, D".
///
/// Hypotheses are tested at `tol / 2`: the triangle inequality then bounds
/// the conclusion's slack below by `-tol` in every metric space.
pub fn transitivity_margin<S: MetricSpace>(space: &S, q: &Quadruple, tol: f64) -> Result<Option<f64>> {
    if !q.distinct(space, MIN_SEPARATION)? {
        return Ok(None);
    }
    let half = tol / 2.0;
    if between_slack(space, &q.a, &q.b, &q.d)? < -half || between_slack(space, &q.b, &q.c, &q.d)? < -half {
        return Ok(None);
    }
    Ok(Some(between_slack(space, &q.a, &q.c, &q.d)?))
}

/// Build a quadruple that has a fair chance of meeting betweenness
/// hypotheses. Independent uniform points almost never do.
fn constructive_quadruple<S: MetricSpace>(space: &S, rng: &mut GameRng, mode: usize) -> Result<Quadruple> {
    let scale = space.diameter_bound().unwrap_or(1.0).min(1.0);
    let fraction_on = |rng: &mut GameRng, from: &Point, to: &Point| -> Result<Point> {
        space.geodesic(from, to)?.point_at_fraction(rng.gen_range(0.0..=1.0))
    };
    match mode % 3 {
        0 => {
            // Four ordered points on one geodesic, optionally nudged off it.
            let p = space.sample_point(rng);
            let q = space.sample_point(rng);
            let g = space.geodesic(&p, &q)?;
            let mut ts: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..=1.0)).collect();
            ts.sort_by(f64::total_cmp);
            let mut pts = ts.iter().map(|&t| g.point_at_fraction(t)).collect::<Result<Vec<_>>>()?;
            if rng.gen_bool(0.5) {
                for p in pts.iter_mut() {
                    if rng.gen_bool(0.5) {
                        let toward = space.sample_point(rng);
                        let delta = rng.gen_range(1e-2..5e-2) * scale;
                        *p = space.geodesic(p, &toward)?.advance(delta);
                    }
                }
            }
            let [a, b, c, d] = <[Point; 4]>::try_from(pts).expect("four points");
            Ok(Quadruple::new(a, b, c, d))
        }
        1 => {
            // A chain of geodesic hops toward fresh random targets.
            let a = space.sample_point(rng);
            let x = space.sample_point(rng);
            let b = fraction_on(rng, &a, &x)?;
            let y = space.sample_point(rng);
            let c = fraction_on(rng, &b, &y)?;
            let z = space.sample_point(rng);
            let d = fraction_on(rng, &c, &z)?;
            Ok(Quadruple::new(a, b, c, d))
        }
        _ => {
            // B, C on one geodesic out of A; D branches off from C.
            let a = space.sample_point(rng);
            let x = space.sample_point(rng);
            let g = space.geodesic(&a, &x)?;
            let (mut s1, mut s2) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            if s1 > s2 {
                std::mem::swap(&mut s1, &mut s2);
            }
            let b = g.point_at_fraction(s1)?;
            let c = g.point_at_fraction(s2)?;
            let y = space.sample_point(rng);
            let d = fraction_on(rng, &c, &y)?;
            Ok(Quadruple::new(a, b, c, d))
        }
    }
}

fn grid_quadruples<S: MetricSpace>(space: &S) -> Vec<Quadruple> {
    let grid: Vec<Point> = space.grid(GRID_RESOLUTION).into_iter().take(GRID_POINTS).collect();
    let n = grid.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if i != j && i != k && i != l && j != k && j != l && k != l {
                        out.push(Quadruple::new(
                            grid[i].clone(),
                            grid[j].clone(),
                            grid[k].clone(),
                            grid[l].clone(),
                        ));
                    }
                }
            }
        }
    }
    out
}

type QuadMargin<S> = fn(&S, &Quadruple, f64) -> Result<Option<f64>>;

/// A sample that met the hypotheses: margin, points, and any parameters.
type Sampled = Option<(f64, Vec<Point>, Vec<f64>)>;

fn quadruple_check<S: MetricSpace + Sync>(
    name: &str,
    margin_fn: QuadMargin<S>,
    space: &S,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new(name, space.descriptor(), tol);
    for q in grid_quadruples(space) {
        let m = margin_fn(space, &q, tol)?;
        report.record(m.map(|m| (m, q.points(), Vec::new())));
    }
    let outcomes: Vec<Sampled> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let q = constructive_quadruple(space, &mut rng, i)?;
            Ok(margin_fn(space, &q, tol)?.map(|m| (m, q.points(), Vec::new())))
        })
        .collect::<Result<_>>()?;
    for o in outcomes {
        report.record(o);
    }
    Ok(report)
}

/// Sampled check of the betweenness property.
///
/// A deterministic grid of quadruples is scanned first, then `n_samples`
/// constructed quadruples.
pub fn check_betweenness<S: MetricSpace + Sync>(
    space: &S,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    quadruple_check("betweenness", betweenness_margin, space, n_samples, tol, seed)
}

/// Sampled check of betweenness transitivity. Holds in every metric space.
pub fn check_between_transitivity<S: MetricSpace + Sync>(
    space: &S,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    quadruple_check("between_transitivity", transitivity_margin, space, n_samples, tol, seed)
}

/// `d(x,y)d(z,w) + d(x,w)d(y,z) - d(x,z)d(y,w)`; negative means the Ptolemy
/// inequality fails on `q = (x, y, z, w)`.
pub fn check_ptolemy<S: MetricSpace>(space: &S, q: &Quadruple) -> Result<f64> {
    let d = |p: &Point, r: &Point| space.distance(p, r);
    let (x, y, z, w) = (&q.a, &q.b, &q.c, &q.d);
    Ok(d(x, y)? * d(z, w)? + d(x, w)? * d(y, z)? - d(x, z)? * d(y, w)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PtolemyWitness {
    pub quadruple: Quadruple,
    pub margin: f64,
}

/// Scan every ordered quadruple of the space's grid, then random quadruples,
/// and return the most violating one (margin below `-1e-9`), if any.
pub fn search_ptolemy_violation<S: MetricSpace>(
    space: &S,
    grid_resolution: usize,
    seed: u64,
) -> Result<Option<PtolemyWitness>> {
    Ok(ptolemy_scan(space, grid_resolution, seed)?.0)
}

fn ptolemy_scan<S: MetricSpace>(
    space: &S,
    grid_resolution: usize,
    seed: u64,
) -> Result<(Option<PtolemyWitness>, usize)> {
    if grid_resolution < 4 {
        return Err(crate::Error::Usage(format!(
            "grid resolution must be at least 4, got {grid_resolution}"
        )));
    }
    let grid = space.grid(grid_resolution);
    let n = grid.len();
    let mut dm = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dm[i * n + j] = space.distance(&grid[i], &grid[j])?;
        }
    }
    let d = |i: usize, j: usize| dm[i * n + j];
    let mut worst: Option<(f64, [usize; 4])> = None;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let (dxy, dxz, dyz) = (d(x, y), d(x, z), d(y, z));
                for w in 0..n {
                    let margin = dxy * d(z, w) + d(x, w) * dyz - dxz * d(y, w);
                    if margin < -PTOLEMY_TOL && worst.is_none_or(|(m, _)| margin < m) {
                        worst = Some((margin, [x, y, z, w]));
                    }
                }
            }
        }
    }
    let mut best = worst.map(|(margin, [x, y, z, w])| PtolemyWitness {
        quadruple: Quadruple::new(grid[x].clone(), grid[y].clone(), grid[z].clone(), grid[w].clone()),
        margin,
    });
    let mut rng = rng_for(seed, 0);
    for _ in 0..RANDOM_PTOLEMY_SAMPLES {
        let q = Quadruple::new(
            space.sample_point(&mut rng),
            space.sample_point(&mut rng),
            space.sample_point(&mut rng),
            space.sample_point(&mut rng),
        );
        let margin = check_ptolemy(space, &q)?;
        if margin < -PTOLEMY_TOL && best.as_ref().is_none_or(|b| margin < b.margin) {
            best = Some(PtolemyWitness { quadruple: q, margin });
        }
    }
    Ok((best, n.pow(4) + RANDOM_PTOLEMY_SAMPLES))
}

/// Ptolemy search packaged as a report. Planar spaces that contain the unit
/// square's axis points also record the margins of the two reference
/// quadruples on `(0,1), (1,0), (0,-1)` with fourth point `(0,-1)` or `(-1,0)`.
pub fn ptolemy_report<S: MetricSpace>(space: &S, grid_resolution: usize, seed: u64) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("ptolemy", space.descriptor(), PTOLEMY_TOL);
    let (found, samples) = ptolemy_scan(space, grid_resolution, seed)?;
    report.samples = samples;
    report.hypothesis_hits = samples;
    if let Some(w) = found {
        report.worst_margin = w.margin;
        report.violation_count = 1;
        report.violations.push(Witness { points: w.quadruple.points(), params: Vec::new(), margin: w.margin });
    }
    for (label, q) in reference_ptolemy_quadruples(space) {
        report.metadata.insert(format!("margin[{label}]"), format!("{}", check_ptolemy(space, &q)?));
    }
    report.metadata.insert("grid_resolution".into(), grid_resolution.to_string());
    Ok(report)
}

/// The axis quadruples `x=(0,1), y=(1,0), z=(0,-1)` with `w=(0,-1)` (equal
/// to `z`) and with `w=(-1,0)`, when the space admits them.
pub fn reference_ptolemy_quadruples<S: MetricSpace>(space: &S) -> Vec<(&'static str, Quadruple)> {
    let planar = matches!(
        space.descriptor(),
        SpaceDescriptor::Disk { .. } | SpaceDescriptor::ChebyshevDisk { .. } | SpaceDescriptor::Plane {}
    );
    if !planar {
        return Vec::new();
    }
    let p = |x: f64, y: f64| space.point(vec![x, y]);
    let (Ok(x), Ok(y), Ok(z), Ok(w_left)) = (p(0.0, 1.0), p(1.0, 0.0), p(0.0, -1.0), p(-1.0, 0.0)) else {
        return Vec::new();
    };
    vec![
        ("w=z=(0,-1)", Quadruple::new(x.clone(), y.clone(), z.clone(), z.clone())),
        ("w=(-1,0)", Quadruple::new(x, y, z, w_left)),
    ]
}

/// Midpoint-convexity slack of `t -> d(g1(t), g2(t))` for the canonical
/// geodesics `g1 = [p1, q1]`, `g2 = [p2, q2]` affinely reparametrized to
/// [0, 1]: `(f(t0) + f(t1)) / 2 - f((t0 + t1) / 2)`.
pub fn convexity_margin<S: MetricSpace>(
    space: &S,
    g1: (&Point, &Point),
    g2: (&Point, &Point),
    t0: f64,
    t1: f64,
) -> Result<f64> {
    let a = space.geodesic(g1.0, g1.1)?;
    let b = space.geodesic(g2.0, g2.1)?;
    let f = |t: f64| -> Result<f64> { space.distance(&a.point_at_fraction(t)?, &b.point_at_fraction(t)?) };
    Ok((f(t0)? + f(t1)?) / 2.0 - f((t0 + t1) / 2.0)?)
}

/// Sampled midpoint convexity of the metric along canonical geodesics.
pub fn check_metric_convexity<S: MetricSpace + Sync>(
    space: &S,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("metric_convexity", space.descriptor(), tol);
    report.metadata.insert(
        "definition".into(),
        "t -> d(g1(t), g2(t)) midpoint-convex for canonical geodesics affinely parametrized on [0,1]"
            .into(),
    );
    let outcomes: Vec<_> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let pts: Vec<Point> = (0..4).map(|_| space.sample_point(&mut rng)).collect();
            let t0 = rng.gen_range(0.0..=1.0);
            let t1 = rng.gen_range(0.0..=1.0);
            let m = convexity_margin(space, (&pts[0], &pts[1]), (&pts[2], &pts[3]), t0, t1)?;
            Ok(Some((m, pts, vec![t0, t1])))
        })
        .collect::<Result<_>>()?;
    for o in outcomes {
        report.record(o);
    }
    Ok(report)
}

/// Sampled triangle inequality: slack `d(a,b) + d(b,c) - d(a,c)`.
pub fn check_triangle<S: MetricSpace + Sync>(
    space: &S,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("triangle", space.descriptor(), tol);
    let outcomes: Vec<_> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let pts: Vec<Point> = (0..3).map(|_| space.sample_point(&mut rng)).collect();
            let m = space.distance(&pts[0], &pts[1])? + space.distance(&pts[1], &pts[2])?
                - space.distance(&pts[0], &pts[2])?;
            Ok(Some((m, pts, Vec::new())))
        })
        .collect::<Result<_>>()?;
    for o in outcomes {
        report.record(o);
    }
    Ok(report)
}

/// Sampled geodesic consistency: for random pairs and `params` random arc
/// lengths, slack `tol_scale - |d(g(s), g(s')) - |s - s'||` where
/// `tol_scale = max(1, length)`; the report tolerance is relative.
pub fn check_geodesics<S: MetricSpace + Sync>(
    space: &S,
    n_pairs: usize,
    params: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("geodesic_consistency", space.descriptor(), tol);
    report.metadata.insert("margin".into(), "-|d(g(s),g(s')) - |s-s'|| / max(1, length)".into());
    let outcomes: Vec<Vec<_>> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let a = space.sample_point(&mut rng);
            let b = space.sample_point(&mut rng);
            let g = space.geodesic(&a, &b)?;
            let len = g.length();
            let mut out = Vec::with_capacity(params);
            for _ in 0..params {
                let s = rng.gen_range(0.0..=len);
                let s2 = rng.gen_range(0.0..=len);
                let err = (space.distance(&g.point_at(s)?, &g.point_at(s2)?)? - (s - s2).abs()).abs();
                out.push(Some((-err / len.max(1.0), vec![a.clone(), b.clone()], vec![s, s2])));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for o in outcomes.into_iter().flatten() {
        report.record(o);
    }
    Ok(report)
}
