//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::time::Instant;

use pursuit_core::diagnostics::{
    check_distance_monotone, check_lion_geodesic, classify_constant_step, detect_rounds,
    most_revisited_center, rho, validate_good_curve,
};
use pursuit_core::engine::{random_start, run_game, write_trace_jsonl, EvaderSpec, GameConfig, Outcome, Trace};
use pursuit_core::properties::{
    check_betweenness, check_metric_convexity, check_ptolemy, ptolemy_report, reference_ptolemy_quadruples,
    search_ptolemy_violation, BETWEENNESS_TOL,
};
use pursuit_core::spaces::reference_tree_edges;
use pursuit_core::{make_space, MetricSpace, Point, Space, SpaceDescriptor};
use rayon::prelude::*;

const SEED: u64 = 20_240_601;
const EPSILONS: [f64; 3] = [0.2, 0.1, 0.05];

struct Verdict {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(id: &'static str, title: &'static str, passed: bool, detail: String) -> Verdict {
    println!("[{}] {id} {title}: {detail}", if passed { "PASS" } else { "FAIL" });
    Verdict { id, title, passed, detail }
}

fn evaders() -> Vec<EvaderSpec> {
    vec![
        EvaderSpec::Stationary {},
        EvaderSpec::GreedyMaxDistance { k: 32 },
        EvaderSpec::RadialFlee {},
        EvaderSpec::ScriptedRunner {},
    ]
}

fn capture_spaces() -> Vec<(&'static str, Space)> {
    vec![
        ("disk", make_space(&SpaceDescriptor::Disk { radius: 1.0 }).unwrap()),
        ("chebyshev_disk", make_space(&SpaceDescriptor::ChebyshevDisk { radius: 1.0 }).unwrap()),
        ("tree", make_space(&SpaceDescriptor::Tree { edges: reference_tree_edges() }).unwrap()),
    ]
}

struct Game {
    space: usize,
    epsilon: f64,
    evader: EvaderSpec,
    trial: u64,
    trace: Trace,
    outcome: Outcome,
}

fn theorem_grid(spaces: &[(&'static str, Space)]) -> Vec<Game> {
    let mut cells = Vec::new();
    for si in 0..spaces.len() {
        for (ei, &eps) in EPSILONS.iter().enumerate() {
            for (vi, ev) in evaders().into_iter().enumerate() {
                for trial in 0..5u64 {
                    cells.push((si, ei, eps, vi, ev.clone(), trial));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(si, ei, eps, vi, evader, trial)| {
            let space = &spaces[si].1;
            let (l0, m0) = random_start(space, eps, SEED + si as u64, trial).unwrap();
            let config = GameConfig::for_space(space, eps).unwrap();
            let seed = SEED ^ ((si as u64) << 48 | (ei as u64) << 32 | (vi as u64) << 16 | trial);
            let (trace, outcome) = run_game(space, &config, &l0, &m0, &evader, seed).unwrap();
            Game { space: si, epsilon: eps, evader, trial, trace, outcome }
        })
        .collect()
}

fn jsonl(trace: &Trace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace_jsonl(trace, &mut buf).unwrap();
    buf
}

fn point(space: &Space, coords: &[f64]) -> Point {
    space.point(coords.to_vec()).unwrap()
}

fn c1_theorem(spaces: &[(&'static str, Space)], games: &[Game]) -> Verdict {
    let captured = games.iter().filter(|g| g.outcome.is_capture()).count();
    let starts_ok = games.iter().all(|g| g.trace.moment_distance(0) > g.epsilon);
    let slowest = games.iter().filter_map(|g| g.outcome.capture_time()).fold(0.0, f64::max);
    let mut detail = format!("{captured}/{} captured, start separation > eps: {starts_ok}, slowest capture t={slowest:.3}", games.len());
    for g in games.iter().filter(|g| !g.outcome.is_capture()) {
        detail.push_str(&format!(
            "; EVADED {} eps={} {} trial {}",
            spaces[g.space].0,
            g.epsilon,
            g.evader.label(),
            g.trial
        ));
    }
    verdict("C1", "capture on betweenness spaces", captured == games.len() && starts_ok, detail)
}

fn c2_corollary(spaces: &[(&'static str, Space)], games: &[Game]) -> Verdict {
    let cheb_idx = spaces.iter().position(|(n, _)| *n == "chebyshev_disk").unwrap();
    let rows: Vec<_> = games.iter().filter(|g| g.space == cheb_idx).collect();
    let captured = rows.iter().filter(|g| g.outcome.is_capture()).count();
    let report = check_metric_convexity(&spaces[cheb_idx].1, 10_000, 1e-7, SEED).unwrap();
    let passed = captured == rows.len() && report.violation_count == 0 && report.samples == 10_000;
    verdict(
        "C2",
        "Chebyshev capture and metric convexity",
        passed,
        format!(
            "{captured}/{} Chebyshev games captured; convexity {} samples, {} violations, worst margin {:.3e}",
            rows.len(),
            report.samples,
            report.violation_count,
            report.worst_margin
        ),
    )
}

fn c3_necessity() -> Verdict {
    let circle = make_space(&SpaceDescriptor::Circle { circumference: 1.0 }).unwrap();
    let config = GameConfig::for_space(&circle, 0.05).unwrap().with_horizon(10_000);
    let (trace, outcome) = run_game(
        &circle,
        &config,
        &point(&circle, &[0.0]),
        &point(&circle, &[0.4]),
        &EvaderSpec::CircleRunner { orientation: 1.0 },
        SEED,
    )
    .unwrap();
    let drift = (0..trace.moments.len()).map(|i| (trace.moment_distance(i) - 0.4).abs()).fold(0.0, f64::max);
    let escaped = matches!(outcome, Outcome::Evaded { .. }) && trace.moments.len() == 10_001;

    // Arc-distance oracle for the quarter points: B between A,D fails by
    // d(A,B) + d(B,D) - d(A,D) = 0.25 + 0.5 - 0.25, and symmetrically for C.
    let arc = |x: f64, y: f64| {
        let u = (x - y).abs();
        u.min(1.0 - u)
    };
    let (a, b, c, d) = (0.0, 0.25, 0.5, 0.75);
    let oracle = -(arc(a, b) + arc(b, d) - arc(a, d)).abs().max((arc(a, c) + arc(c, d) - arc(a, d)).abs());
    let report = check_betweenness(&circle, 1_000, BETWEENNESS_TOL, SEED).unwrap();
    let witness = report
        .violations
        .iter()
        .find(|w| w.points.iter().map(|p| p.coords()[0]).eq([a, b, c, d]));
    let margin_ok = witness.is_some_and(|w| (w.margin - oracle).abs() <= 1e-12);
    verdict(
        "C3",
        "circle escape and betweenness witness",
        escaped && drift <= 1e-9 && margin_ok,
        format!(
            "outcome {}, {} moments, max |d - 0.4| = {drift:.2e}; quarter-point witness margin {:?} vs oracle {oracle}",
            outcome.label(),
            trace.moments.len(),
            witness.map(|w| w.margin)
        ),
    )
}

fn c4_plane_escape() -> Verdict {
    let plane = make_space(&SpaceDescriptor::Plane {}).unwrap();
    let mut starts = vec![(point(&plane, &[0.0, 0.0]), point(&plane, &[1.0, 0.0]))];
    for t in 0..4 {
        starts.push(random_start(&plane, 0.1, SEED, t).unwrap());
    }
    let mut all_evaded = true;
    let mut worst_drop: f64 = 0.0;
    for (l0, m0) in &starts {
        let config = GameConfig::for_space(&plane, 0.1).unwrap().with_horizon(1_000);
        let (trace, outcome) = run_game(&plane, &config, l0, m0, &EvaderSpec::RadialFlee {}, SEED).unwrap();
        all_evaded &= matches!(outcome, Outcome::Evaded { .. }) && trace.moments.len() == 1_001;
        for i in 1..trace.moments.len() {
            worst_drop = worst_drop.max(trace.moment_distance(i - 1) - trace.moment_distance(i));
        }
    }
    verdict(
        "C4",
        "plane escape by radial flight",
        all_evaded && worst_drop <= 1e-9,
        format!("{} starts, all evaded for 1000 steps: {all_evaded}; largest moment-to-moment decrease {worst_drop:.2e}", starts.len()),
    )
}

fn c5_ptolemy() -> Verdict {
    let cheb = make_space(&SpaceDescriptor::ChebyshevDisk { radius: 1.0 }).unwrap();
    let found = search_ptolemy_violation(&cheb, 8, SEED).unwrap();
    let refs = reference_ptolemy_quadruples(&cheb);
    let literal = check_ptolemy(&cheb, &refs[0].1).unwrap();
    let corrected = check_ptolemy(&cheb, &refs[1].1).unwrap();
    let report = ptolemy_report(&cheb, 8, SEED).unwrap();
    let recorded = report.metadata.get("margin[w=z=(0,-1)]").map(String::as_str) == Some("0")
        && report.metadata.get("margin[w=(-1,0)]").map(String::as_str) == Some("-2");
    let best = found.as_ref().map(|w| w.margin);
    verdict(
        "C5",
        "Ptolemy violation on the Chebyshev disk",
        best.is_some_and(|m| m <= -1.0) && literal == 0.0 && corrected == -2.0 && recorded,
        format!("search margin {best:?}; literal quadruple {literal}; corrected quadruple {corrected}; recorded in report: {recorded}"),
    )
}

fn c6_monotone(games: &[Game]) -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for g in games.iter().filter(|g| g.outcome.is_capture()) {
        count += 1;
        let r = check_distance_monotone(&g.trace, 1e-9);
        worst = worst.max(r.worst_increase);
    }
    verdict(
        "C6",
        "distance at moments does not increase",
        count == games.len() && worst <= 1e-9,
        format!("{count} captured traces, max d(i+1) - d(i) = {worst:.3e}"),
    )
}

/// Shift `L` at moment `i` (and its sample) by `offset`.
fn forge_lion(space: &Space, trace: &mut Trace, i: usize, offset: [f64; 2]) {
    let j = trace.sample_index(i);
    let c = trace.moments[i].lion.coords();
    let moved = point(space, &[c[0] + offset[0], c[1] + offset[1]]);
    trace.moments[i].lion = moved.clone();
    trace.samples[j].lion = moved;
    trace.samples[j].d = space.distance(&trace.samples[j].lion, &trace.samples[j].man).unwrap();
}

fn c7_good_curves(spaces: &[(&'static str, Space)], games: &[Game]) -> Verdict {
    let mut checked = 0;
    let mut failures = Vec::new();
    for g in games {
        let space = &spaces[g.space].1;
        let Some(last) = g.trace.last_pre_capture_moment().filter(|&l| l > 0) else { continue };
        checked += 1;
        let r = validate_good_curve(space, &g.trace, 0.0, g.trace.moments[last].t, 1e-7).unwrap();
        if !r.passed {
            failures.push(format!("{} eps={} {} trial {}", spaces[g.space].0, g.epsilon, g.evader.label(), g.trial));
        }
    }

    // Negative controls on a straight chase across the disk.
    let disk = make_space(&SpaceDescriptor::Disk { radius: 1.0 }).unwrap();
    let config = GameConfig::for_space(&disk, 0.1).unwrap();
    let (base, _) = run_game(
        &disk,
        &config,
        &point(&disk, &[-0.5, 0.0]),
        &point(&disk, &[0.5, 0.0]),
        &EvaderSpec::Stationary {},
        SEED,
    )
    .unwrap();
    let t4 = base.moments[4].t;
    let clean = validate_good_curve(&disk, &base, 0.0, t4, 1e-7).unwrap();
    let mut off_aim = base.clone();
    forge_lion(&disk, &mut off_aim, 1, [0.0, 0.01]);
    let aim = validate_good_curve(&disk, &off_aim, 0.0, t4, 1e-7).unwrap();
    let mut too_close = base.clone();
    let m3 = too_close.moments[3].lion.coords().to_vec();
    let man = &too_close.moments[3].man.coords().to_vec();
    // Pull the Lion to within 0.05 of the Man at moment 3.
    forge_lion(&disk, &mut too_close, 3, [man[0] - 0.05 - m3[0], 0.0]);
    let sep = validate_good_curve(&disk, &too_close, 0.0, t4, 1e-7).unwrap();
    let controls = clean.passed && !aim.item(2).passed && !sep.item(4).passed;

    verdict(
        "C7",
        "good-curve validation with negative controls",
        checked > 0 && failures.is_empty() && controls,
        format!(
            "{checked} pre-capture traces validated, {} failed{}; off-aim control item 2 margin {:.2e}, separation control item 4 margin {:.2e}",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(" ({})", failures.join(", ")) },
            aim.item(2).worst_margin,
            sep.item(4).worst_margin
        ),
    )
}

fn c8_constant_steps() -> Verdict {
    let disk = make_space(&SpaceDescriptor::Disk { radius: 1.0 }).unwrap();
    let config = GameConfig::for_space(&disk, 0.1).unwrap().with_horizon(4);
    let chase = EvaderSpec::Scripted { waypoints: vec![vec![0.9, 0.0]], cycle: false };
    let (trace, _) = run_game(&disk, &config, &point(&disk, &[-0.9, 0.0]), &point(&disk, &[-0.4, 0.0]), &chase, SEED).unwrap();
    let flags: Vec<_> = (0..4).map(|i| classify_constant_step(&disk, &trace, i, 1e-7).unwrap()).collect();
    let all_true = flags.iter().all(|f| f.stmt1 && f.stmt2 && f.stmt3);
    let geo = check_lion_geodesic(&disk, &trace, 0, 4, 1e-9).unwrap();
    let geo_ok = geo.is_geodesic == Some(true) && (geo.d_endpoints - 0.4).abs() <= 1e-9;

    let config = GameConfig::for_space(&disk, 0.1).unwrap().with_horizon(2);
    let (still, _) = run_game(
        &disk,
        &config,
        &point(&disk, &[-0.5, 0.0]),
        &point(&disk, &[0.5, 0.0]),
        &EvaderSpec::Stationary {},
        SEED,
    )
    .unwrap();
    let s = classify_constant_step(&disk, &still, 0, 1e-7).unwrap();
    let all_false = !s.stmt1 && !s.stmt2 && !s.stmt3;
    verdict(
        "C8",
        "constant-distance step equivalence",
        all_true && geo_ok && all_false,
        format!(
            "colinear chase flags all true: {all_true}; d(L0, L4) = {:.12} (expected 0.4); stationary step 0 flags ({}, {}, {})",
            geo.d_endpoints, s.stmt1, s.stmt2, s.stmt3
        ),
    )
}

fn c9_rounds() -> Verdict {
    let circle = make_space(&SpaceDescriptor::Circle { circumference: 1.0 }).unwrap();
    let eps = 0.05;
    let config = GameConfig::for_space(&circle, eps).unwrap().with_horizon(199);
    let (trace, _) = run_game(
        &circle,
        &config,
        &point(&circle, &[0.0]),
        &point(&circle, &[0.4]),
        &EvaderSpec::CircleRunner { orientation: 1.0 },
        SEED,
    )
    .unwrap();
    let radius = eps / 3.0;
    let (cl, cm) = most_revisited_center(&circle, &trace.moments, radius).unwrap().unwrap();
    let rounds = detect_rounds(&circle, &trace.moments, (&cl, &cm), radius, eps).unwrap();

    // Direct scan oracle over the same ball.
    let inside: Vec<bool> = trace
        .moments
        .iter()
        .map(|m| rho(&circle, (&m.lion, &m.man), (&cl, &cm)).unwrap() <= radius)
        .collect();
    let hits: Vec<usize> = (0..inside.len()).filter(|&k| inside[k]).collect();
    let expected: Vec<(usize, usize)> = hits.windows(2).map(|w| (w[0], w[1])).filter(|(i, j)| j - i > 1).collect();
    let got: Vec<(usize, usize)> = rounds.iter().map(|r| (r.i, r.j)).collect();
    let no_adjacent = inside.windows(2).all(|w| !(w[0] && w[1]));
    let lengths: Vec<usize> = rounds.iter().map(|r| r.length()).collect();
    verdict(
        "C9",
        "rounds on a circle-runner trace",
        trace.moments.len() == 200 && rounds.len() >= 3 && got == expected && lengths.iter().all(|&l| l > 1) && no_adjacent,
        format!("{} moments, {} rounds, lengths {:?}, matches direct scan: {}, no consecutive moments in ball: {no_adjacent}", trace.moments.len(), rounds.len(), lengths, got == expected),
    )
}

fn c10_reproducible(spaces: &[(&'static str, Space)], games: &[Game]) -> Verdict {
    let rerun = theorem_grid(spaces);
    let traces_equal = games.iter().zip(&rerun).all(|(a, b)| jsonl(&a.trace) == jsonl(&b.trace));
    let circle = make_space(&SpaceDescriptor::Circle { circumference: 1.0 }).unwrap();
    let cheb = &spaces[1].1;
    let reports = |()| {
        (
            serde_json::to_vec(&check_betweenness(&circle, 1_000, BETWEENNESS_TOL, SEED).unwrap()).unwrap(),
            serde_json::to_vec(&check_metric_convexity(cheb, 2_000, 1e-7, SEED).unwrap()).unwrap(),
            serde_json::to_vec(&ptolemy_report(cheb, 8, SEED).unwrap()).unwrap(),
        )
    };
    let reports_equal = reports(()) == reports(());
    verdict(
        "C10",
        "byte-identical reruns",
        traces_equal && reports_equal,
        format!("{} traces identical: {traces_equal}; property reports identical: {reports_equal}", games.len()),
    )
}

// Runs without the libtest harness so the verdict lines always reach stdout.
fn main() {
    let started = Instant::now();
    let spaces = capture_spaces();
    let games = theorem_grid(&spaces);
    let grid_secs = started.elapsed().as_secs_f64();
    let verdicts = vec![
        c1_theorem(&spaces, &games),
        c2_corollary(&spaces, &games),
        c3_necessity(),
        c4_plane_escape(),
        c5_ptolemy(),
        c6_monotone(&games),
        c7_good_curves(&spaces, &games),
        c8_constant_steps(),
        c9_rounds(),
        c10_reproducible(&spaces, &games),
    ];
    println!("theorem grid: {} games in {grid_secs:.1}s; total {:.1}s", games.len(), started.elapsed().as_secs_f64());
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.passed).map(|v| format!("{} {} ({})", v.id, v.title, v.detail)).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria:\n{}", failed.join("\n"));
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", verdicts.len());
}
