use pursuit_core::diagnostics::{
    check_distance_monotone, check_lion_geodesic, classify_constant_step, detect_rounds, diagnose,
    most_revisited_center, rho, validate_good_curve,
};
use pursuit_core::engine::{random_start, run_game, EvaderSpec, GameConfig, Trace};
use pursuit_core::spaces::reference_tree_edges;
use pursuit_core::{make_space, MetricSpace, Point, Space, SpaceDescriptor};

const TOL: f64 = 1e-7;
const BAND: f64 = 100.0;

fn space(d: SpaceDescriptor) -> Space {
    make_space(&d).unwrap()
}

fn pt(s: &Space, c: &[f64]) -> Point {
    s.point(c.to_vec()).unwrap()
}

fn seeded_games(s: &Space) -> Vec<Trace> {
    let evaders = [
        EvaderSpec::Stationary {},
        EvaderSpec::GreedyMaxDistance { k: 8 },
        EvaderSpec::RadialFlee {},
        EvaderSpec::ScriptedRunner {},
    ];
    let mut out = Vec::new();
    for seed in 0..20u64 {
        let ev = &evaders[seed as usize % evaders.len()];
        let (l, m) = random_start(s, 0.1, seed, 0).unwrap();
        let cfg = GameConfig::for_space(s, 0.1).unwrap();
        out.push(run_game(s, &cfg, &l, &m, ev, seed).unwrap().0);
    }
    out
}

#[test]
fn good_curves_and_step_flags_on_seeded_games() {
    for d in [
        SpaceDescriptor::Disk { radius: 1.0 },
        SpaceDescriptor::ChebyshevDisk { radius: 1.0 },
        SpaceDescriptor::Tree { edges: reference_tree_edges() },
    ] {
        let s = space(d);
        let (mut steps, mut ambiguous) = (0usize, 0usize);
        for t in seeded_games(&s) {
            let Some(last) = t.last_pre_capture_moment().filter(|&l| l > 0) else { continue };
            let r = validate_good_curve(&s, &t, 0.0, t.moments[last].t, TOL).unwrap();
            assert!(r.passed, "{}: {:?}", s.descriptor(), r.items);
            assert!(check_distance_monotone(&t, TOL).passed);
            for i in 0..last {
                let c = classify_constant_step(&s, &t, i, TOL).unwrap();
                steps += 1;
                if c.unambiguous(TOL, BAND) {
                    assert!(c.agree(), "{}: {c:?}", s.descriptor());
                } else {
                    ambiguous += 1;
                }
            }
        }
        println!("{}: {steps} steps, {ambiguous} near-threshold", s.descriptor());
        assert!(steps > 0 && (ambiguous as f64) < 0.05 * steps as f64);
    }
}

#[test]
fn good_curve_interval_must_align() {
    let s = space(SpaceDescriptor::Disk { radius: 1.0 });
    let t = &seeded_games(&s)[0];
    assert!(validate_good_curve(&s, t, 0.0, 0.15, TOL).is_err());
    assert!(validate_good_curve(&s, t, 0.1, 0.1, TOL).is_err());
}

#[test]
fn lion_geodesic_on_the_circle_runner() {
    let c = space(SpaceDescriptor::Circle { circumference: 1.0 });
    let cfg = GameConfig::for_space(&c, 0.05).unwrap().with_horizon(10);
    let (t, _) = run_game(&c, &cfg, &pt(&c, &[0.0]), &pt(&c, &[0.4]), &EvaderSpec::CircleRunner { orientation: 1.0 }, 0)
        .unwrap();
    let r = check_lion_geodesic(&c, &t, 0, 5, 1e-9).unwrap();
    assert!(r.applicable);
    assert!((r.d_endpoints - 0.25).abs() < 1e-12);
    assert_eq!(r.is_geodesic, Some(true));
    // Over 12 steps the Lion has gone 0.6 round a circle of length 1, so its
    // path no longer realizes the distance between its endpoints.
    let cfg = cfg.with_horizon(12);
    let (t, _) = run_game(&c, &cfg, &pt(&c, &[0.0]), &pt(&c, &[0.4]), &EvaderSpec::CircleRunner { orientation: 1.0 }, 0)
        .unwrap();
    let r = check_lion_geodesic(&c, &t, 0, 12, 1e-9).unwrap();
    assert_eq!(r.is_geodesic, Some(false));
    assert!(check_lion_geodesic(&c, &t, 5, 5, 1e-9).is_err());
}

#[test]
fn rho_is_the_larger_coordinate_distance() {
    let s = space(SpaceDescriptor::Disk { radius: 1.0 });
    let (a, b, c, d) = (pt(&s, &[0.0, 0.0]), pt(&s, &[0.3, 0.4]), pt(&s, &[0.1, 0.0]), pt(&s, &[0.3, 0.0]));
    assert!((rho(&s, (&a, &b), (&c, &d)).unwrap() - 0.4).abs() < 1e-15);
}

#[test]
fn rounds_match_a_direct_scan() {
    let c = space(SpaceDescriptor::Circle { circumference: 1.0 });
    let eps = 0.05;
    let cfg = GameConfig::for_space(&c, eps).unwrap().with_horizon(100);
    let (t, _) = run_game(&c, &cfg, &pt(&c, &[0.0]), &pt(&c, &[0.4]), &EvaderSpec::CircleRunner { orientation: 1.0 }, 0)
        .unwrap();
    let center = (t.moments[0].lion.clone(), t.moments[0].man.clone());
    let rounds = detect_rounds(&c, &t.moments, (&center.0, &center.1), eps / 3.0, eps).unwrap();
    // Both players return to their starting points every 20 moments.
    let got: Vec<(usize, usize)> = rounds.iter().map(|r| (r.i, r.j)).collect();
    assert_eq!(got, vec![(0, 20), (20, 40), (40, 60), (60, 80), (80, 100)]);
    assert!(rounds.iter().all(|r| r.length() == 20));
    let best = most_revisited_center(&c, &t.moments, eps / 3.0).unwrap().unwrap();
    assert_eq!(best, center);
}

#[test]
fn rounds_reject_large_balls_and_skip_consecutive_hits() {
    let s = space(SpaceDescriptor::Disk { radius: 1.0 });
    let cfg = GameConfig::for_space(&s, 0.1).unwrap().with_horizon(3);
    let (t, _) = run_game(&s, &cfg, &pt(&s, &[-0.5, 0.0]), &pt(&s, &[0.5, 0.0]), &EvaderSpec::Stationary {}, 0).unwrap();
    let (l, m) = (t.moments[0].lion.clone(), t.moments[0].man.clone());
    assert!(detect_rounds(&s, &t.moments, (&l, &m), 0.05, 0.1).is_err());
    assert!(detect_rounds(&s, &t.moments, (&l, &m), -0.01, 0.1).is_err());
    // A straight chase never returns to a ball it has left.
    assert!(detect_rounds(&s, &t.moments, (&l, &m), 0.03, 0.1).unwrap().is_empty());
    // A ball wide enough for consecutive moments is not a round.
    let mut still = t.clone();
    for mo in &mut still.moments {
        mo.lion = l.clone();
    }
    assert!(detect_rounds(&s, &still.moments, (&l, &m), 0.0, 0.1).unwrap().is_empty());
}

#[test]
fn monotone_check_flags_a_forged_increase() {
    let s = space(SpaceDescriptor::Disk { radius: 1.0 });
    let mut t = seeded_games(&s).remove(1);
    assert!(check_distance_monotone(&t, TOL).passed);
    let j = t.sample_index(3);
    t.samples[j].d += 0.5;
    let r = check_distance_monotone(&t, TOL);
    assert!(!r.passed);
    assert_eq!(r.worst_at, Some(2));
}

#[test]
fn diagnose_summarizes_a_trace() {
    let s = space(SpaceDescriptor::Disk { radius: 1.0 });
    let t = &seeded_games(&s)[1];
    let d = diagnose(&s, t, TOL).unwrap();
    assert!(d.good_curve.as_ref().is_some_and(|g| g.passed));
    assert!(d.monotone.passed);
    assert_eq!(d.steps_checked, t.last_pre_capture_moment().unwrap());
    let c = space(SpaceDescriptor::Circle { circumference: 1.0 });
    let cfg = GameConfig::for_space(&c, 0.05).unwrap().with_horizon(60);
    let (t, _) = run_game(&c, &cfg, &pt(&c, &[0.0]), &pt(&c, &[0.4]), &EvaderSpec::CircleRunner { orientation: 1.0 }, 0)
        .unwrap();
    let d = diagnose(&c, &t, TOL).unwrap();
    assert_eq!(d.rounds.len(), 3);
    assert!(s.diameter_bound().is_some());
}
