use rayon::prelude::*;
use serde::Serialize;

use super::{lion_step, Evader, EvaderSpec, GameConfig, Moment, Outcome, Sample, Trace};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::seed::{rng_for, stream_id};

const EVADER_STREAM: u64 = 1;
const START_STREAM: u64 = 2;
const START_ATTEMPTS: usize = 10_000;

/// Simulate one game from `(lion0, man0)`.
///
/// Capture is declared at the first sample (including `t = 0`) where the
/// distance is below `epsilon - capture_tol`; otherwise the Man has evaded
/// until `horizon_steps` intervals have elapsed.
pub fn run_game<S: MetricSpace>(
    space: &S,
    config: &GameConfig,
    lion0: &Point,
    man0: &Point,
    evader: &EvaderSpec,
    seed: u64,
) -> Result<(Trace, Outcome)> {
    config.validate()?;
    let eps = config.epsilon;
    let threshold = eps - config.capture_tol;
    let n = u64::from(config.substeps);
    let mut strategy = Evader::new(evader, space)?;
    let mut rng = rng_for(seed, EVADER_STREAM);

    let mut trace = Trace {
        space: space.descriptor().clone(),
        config: config.clone(),
        evader: evader.clone(),
        seed,
        moments: Vec::new(),
        samples: Vec::new(),
    };
    let mut lion = lion0.clone();
    let mut man = man0.clone();
    let d0 = space.distance(&lion, &man)?;
    trace.moments.push(Moment { t: 0.0, lion: lion.clone(), man: man.clone() });
    trace.samples.push(Sample { t: 0.0, lion: lion.clone(), man: man.clone(), d: d0 });
    if d0 < threshold {
        return Ok((trace, Outcome::Captured { t: 0.0 }));
    }

    for i in 0..config.horizon_steps {
        let lion_path = lion_step(space, &lion, &man, eps)?;
        let man_plan = strategy.plan(space, &man, &lion, eps, &mut rng)?;
        for k in 1..=n {
            let j = i * n + k;
            let t = config.sample_time(j);
            let local = if k == n { eps } else { (k as f64 / n as f64) * eps };
            let l = lion_path.position(local);
            let m = man_plan.position(local);
            let d = space.distance(&l, &m)?;
            trace.samples.push(Sample { t, lion: l.clone(), man: m.clone(), d });
            if k == n {
                trace.moments.push(Moment { t, lion: l.clone(), man: m.clone() });
            }
            if d < threshold {
                return Ok((trace, Outcome::Captured { t }));
            }
            if k == n {
                lion = l;
                man = m;
            }
        }
    }
    let horizon = config.moment_time(config.horizon_steps);
    Ok((trace, Outcome::Evaded { horizon }))
}

/// The substep distance series `(t, d)`.
pub fn distance_profile(trace: &Trace) -> Result<Vec<(f64, f64)>> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(trace.samples.iter().map(|s| (s.t, s.d)).collect())
}

/// One cell of a capture-time sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub evader: String,
    pub trial: usize,
    pub outcome: &'static str,
    pub capture_time: Option<f64>,
}

/// Draw a start pair with `d(L0, M0) > min_distance`.
pub fn random_start<S: MetricSpace>(space: &S, min_distance: f64, seed: u64, trial: u64) -> Result<(Point, Point)> {
    let mut rng = rng_for(seed, stream_id(&[START_STREAM, trial]));
    for _ in 0..START_ATTEMPTS {
        let l = space.sample_point(&mut rng);
        let m = space.sample_point(&mut rng);
        if space.distance(&l, &m)? > min_distance {
            return Ok((l, m));
        }
    }
    Err(Error::InvalidConfig(format!(
        "no start pair farther apart than {min_distance} found in {START_ATTEMPTS} draws"
    )))
}

/// Run every `(epsilon, evader, trial)` combination with the default horizon.
///
/// Trial `t` uses the same start pair for every epsilon and evader; it is
/// drawn with separation above the largest epsilon. Rows come back ordered
/// by epsilon, then evader, then trial, regardless of scheduling.
pub fn sweep_capture_time<S: MetricSpace + Sync>(
    space: &S,
    epsilons: &[f64],
    evaders: &[EvaderSpec],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if let Some(bad) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {bad}")));
    }
    let max_eps = epsilons.iter().copied().fold(0.0, f64::max);
    let starts = (0..trials)
        .map(|t| random_start(space, max_eps, seed, t as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for (ei, &eps) in epsilons.iter().enumerate() {
        for (vi, ev) in evaders.iter().enumerate() {
            for trial in 0..trials {
                cells.push((ei, eps, vi, ev, trial));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(ei, eps, vi, ev, trial)| {
            let config = GameConfig::for_space(space, eps)?;
            let (l0, m0) = &starts[trial];
            let game_seed = stream_id(&[seed, ei as u64, vi as u64, trial as u64]);
            let (_, outcome) = run_game(space, &config, l0, m0, ev, game_seed)?;
            Ok(SweepRow {
                epsilon: eps,
                evader: ev.label(),
                trial,
                outcome: outcome.label(),
                capture_time: outcome.capture_time(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{CircleSpace, PlanarSpace};

    #[test]
    fn stationary_target_is_reached_linearly() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let cfg = GameConfig::for_space(&disk, 0.1).unwrap();
        let l = disk.point(vec![-0.5, 0.0]).unwrap();
        let m = disk.point(vec![0.5, 0.0]).unwrap();
        let (trace, outcome) = run_game(&disk, &cfg, &l, &m, &EvaderSpec::Stationary {}, 0).unwrap();
        // d(t) = 1 - t reaches 0.1 at t = 0.9; depending on rounding the
        // first sample strictly below it is that moment or one substep later.
        let t = outcome.capture_time().unwrap();
        assert!((t - 0.9).abs() < 1e-12 || (t - 0.91).abs() < 1e-12, "{t}");
        let last = trace.samples.len() - 1;
        assert!(trace.samples[last].d < 0.1 && trace.samples[last - 1].d >= 0.1);
        let profile = distance_profile(&trace).unwrap();
        assert!(profile.windows(2).all(|w| w[1].1 < w[0].1));
        for (t, d) in profile {
            assert!((d - (1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_runner_keeps_distance() {
        let c = CircleSpace::new(1.0).unwrap();
        let cfg = GameConfig::for_space(&c, 0.05).unwrap().with_horizon(500);
        let l = c.point(vec![0.0]).unwrap();
        let m = c.point(vec![0.4]).unwrap();
        let ev = EvaderSpec::CircleRunner { orientation: 1.0 };
        let (trace, outcome) = run_game(&c, &cfg, &l, &m, &ev, 0).unwrap();
        assert!(!outcome.is_capture());
        assert_eq!(trace.moments.len(), 501);
        assert!(trace.samples.iter().all(|s| (s.d - 0.4).abs() < 1e-9));
    }

    #[test]
    fn moments_sit_on_the_epsilon_lattice() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let cfg = GameConfig::for_space(&disk, 0.1).unwrap();
        let l = disk.point(vec![-0.9, 0.0]).unwrap();
        let m = disk.point(vec![0.9, 0.0]).unwrap();
        let (trace, _) = run_game(&disk, &cfg, &l, &m, &EvaderSpec::GreedyMaxDistance { k: 8 }, 4).unwrap();
        for (i, mo) in trace.moments.iter().enumerate() {
            assert_eq!(mo.t, i as f64 * 0.1);
            assert_eq!(trace.samples[trace.sample_index(i)].t, mo.t);
        }
    }

    #[test]
    fn empty_trace_has_no_profile() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let trace = Trace {
            space: disk.descriptor().clone(),
            config: GameConfig::for_space(&disk, 0.1).unwrap(),
            evader: EvaderSpec::Stationary {},
            seed: 0,
            moments: vec![],
            samples: vec![],
        };
        assert!(matches!(distance_profile(&trace), Err(Error::EmptyTrace)));
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let disk = PlanarSpace::euclidean_disk(1.0).unwrap();
        let evs = [EvaderSpec::Stationary {}, EvaderSpec::GreedyMaxDistance { k: 8 }];
        let a = sweep_capture_time(&disk, &[0.2, 0.1], &evs, 3, 9).unwrap();
        let b = sweep_capture_time(&disk, &[0.2, 0.1], &evs, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert!(a.iter().all(|r| r.outcome == "captured"));
        assert_eq!((a[0].epsilon, a[0].trial), (0.2, 0));
        assert_eq!((a[11].epsilon, a[11].trial), (0.1, 2));
        assert!(sweep_capture_time(&disk, &[0.0], &evs, 1, 0).is_err());
    }
}
