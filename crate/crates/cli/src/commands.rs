//! The work behind each subcommand, independent of argument parsing.

use std::io::Write;
use std::path::{Path, PathBuf};

use pursuit_core::diagnostics::{detect_rounds, diagnose, most_revisited_center, RoundRecord, TraceDiagnostics};
use pursuit_core::engine::{
    config_hash, json_hash, random_start, read_trace_jsonl, run_game, sweep_capture_time, write_trace_jsonl,
    EvaderSpec, GameConfig, Outcome, SweepRow, Trace, TraceHeader,
};
use pursuit_core::properties::{
    check_between_transitivity, check_betweenness, check_geodesics, check_metric_convexity, check_triangle,
    ptolemy_report, PropertyReport, BETWEENNESS_TOL,
};
use pursuit_core::seed::stream_id;
use pursuit_core::{make_space, MetricSpace, Point, Space, SpaceDescriptor};
use serde::Serialize;

use crate::config::{check_epsilon, ExperimentConfig, Expectation, Format, StartPlan};
use crate::error::{CliError, Status};
use crate::presets::PresetId;

/// Tolerance used for the diagnostics written next to each trace.
pub const DIAGNOSTIC_TOL: f64 = 1e-7;

/// Moment distances may drift this much in a constant-distance escape.
pub const CONSTANT_DISTANCE_TOL: f64 = 1e-9;

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("report serializes");
    v.push(b'\n');
    v
}

/// CSV trace: a `#`-prefixed JSON header line, then `t, L…, M…, d` rows.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<(), CliError> {
    let header = TraceHeader {
        space: trace.space.clone(),
        config: trace.config.clone(),
        evader: trace.evader.clone(),
        seed: trace.seed,
        config_hash: config_hash(&trace.space, &trace.config, &trace.evader),
    };
    let mut out = out;
    writeln!(out, "# {}", serde_json::to_string(&header).map_err(pursuit_core::Error::from)?)
        .map_err(|e| CliError::io("<trace>", e))?;
    let dim = trace.samples.first().map_or(0, |s| s.lion.coords().len());
    let mut w = csv::Writer::from_writer(out);
    let mut cols = vec!["t".to_owned()];
    cols.extend((0..dim).map(|k| format!("L{k}")));
    cols.extend((0..dim).map(|k| format!("M{k}")));
    cols.push("d".into());
    w.write_record(&cols)?;
    for s in &trace.samples {
        let mut rec = vec![s.t.to_string()];
        rec.extend(s.lion.coords().iter().map(f64::to_string));
        rec.extend(s.man.coords().iter().map(f64::to_string));
        rec.push(s.d.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io("<trace>", e))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub index: usize,
    pub lion0: Point,
    pub man0: Point,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub moments: usize,
    /// Largest `|d(τ_i) - d(τ_0)|` over the recorded moments.
    pub max_distance_drift: f64,
    pub trace: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<&'static str>,
    pub space: SpaceDescriptor,
    pub game: GameConfig,
    pub evader: EvaderSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    pub runs: Vec<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_met: Option<bool>,
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    config_hash: &'a str,
    seed: u64,
    trace: &'a str,
    tolerance: f64,
    diagnostics: &'a TraceDiagnostics,
}

pub fn expectation_met(expect: Expectation, runs: &[RunSummary]) -> bool {
    match expect {
        Expectation::Capture => runs.iter().all(|r| r.outcome.is_capture()),
        Expectation::Escape => runs.iter().all(|r| !r.outcome.is_capture()),
        Expectation::ConstantDistance => runs
            .iter()
            .all(|r| !r.outcome.is_capture() && r.max_distance_drift <= CONSTANT_DISTANCE_TOL),
    }
}

/// Run every start of an experiment and write one trace per start, its
/// diagnostics sidecar, and `summary.json` into the output directory.
pub fn simulate(cfg: &ExperimentConfig, preset: Option<PresetId>) -> Result<(Summary, Status), CliError> {
    let starts: Vec<(Point, Point)> = match &cfg.starts {
        StartPlan::Pairs(p) => p.clone(),
        StartPlan::Random(n) => (0..*n as u64)
            .map(|k| random_start(&cfg.space, cfg.game.epsilon, cfg.seed, k))
            .collect::<Result<_, _>>()?,
    };
    let hash = config_hash(&cfg.descriptor, &cfg.game, &cfg.evader);
    let ext = match cfg.format {
        Format::Jsonl => "jsonl",
        Format::Csv => "csv",
    };
    let mut runs = Vec::new();
    for (k, (l0, m0)) in starts.into_iter().enumerate() {
        let game_seed = stream_id(&[cfg.seed, k as u64]);
        let (trace, outcome) = run_game(&cfg.space, &cfg.game, &l0, &m0, &cfg.evader, game_seed)?;
        let name = format!("trace-{k:03}.{ext}");
        let mut bytes = Vec::new();
        match cfg.format {
            Format::Jsonl => write_trace_jsonl(&trace, &mut bytes)?,
            Format::Csv => write_trace_csv(&trace, &mut bytes)?,
        }
        write_atomic(&cfg.out_dir.join(&name), &bytes)?;
        let diagnostics = diagnose(&cfg.space, &trace, DIAGNOSTIC_TOL)?;
        let trace_hash = config_hash(&trace.space, &trace.config, &trace.evader);
        let diag = DiagnosticsFile {
            config_hash: &trace_hash,
            seed: game_seed,
            trace: &name,
            tolerance: DIAGNOSTIC_TOL,
            diagnostics: &diagnostics,
        };
        write_atomic(&cfg.out_dir.join(format!("{name}.diag.json")), &to_json_bytes(&diag))?;
        let d0 = trace.moment_distance(0);
        let drift = (0..trace.moments.len()).map(|i| (trace.moment_distance(i) - d0).abs()).fold(0.0, f64::max);
        runs.push(RunSummary {
            index: k,
            lion0: l0,
            man0: m0,
            outcome,
            moments: trace.moments.len(),
            max_distance_drift: drift,
            trace: name,
        });
    }
    let met = cfg.expect.map(|e| expectation_met(e, &runs));
    let summary = Summary {
        config_hash: hash,
        seed: cfg.seed,
        preset: preset.map(PresetId::name),
        space: cfg.descriptor.clone(),
        game: cfg.game.clone(),
        evader: cfg.evader.clone(),
        expect: cfg.expect,
        runs,
        expectation_met: met,
    };
    write_atomic(&cfg.out_dir.join("summary.json"), &to_json_bytes(&summary))?;
    let status = if met == Some(false) { Status::UnexpectedOutcome } else { Status::Success };
    Ok((summary, status))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Betweenness,
    Transitivity,
    Ptolemy,
    Convexity,
    Triangle,
    Geodesics,
    All,
}

impl Property {
    const EACH: [Property; 6] = [
        Property::Betweenness,
        Property::Transitivity,
        Property::Ptolemy,
        Property::Convexity,
        Property::Triangle,
        Property::Geodesics,
    ];

    pub fn default_samples(self) -> usize {
        match self {
            Property::Betweenness | Property::Transitivity => 100_000,
            Property::Geodesics => 1_000,
            _ => 10_000,
        }
    }

    pub fn default_tol(self) -> f64 {
        match self {
            Property::Betweenness | Property::Transitivity | Property::Convexity => BETWEENNESS_TOL,
            _ => 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRequest {
    pub space: SpaceDescriptor,
    pub property: Property,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub grid_resolution: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutput {
    pub config_hash: String,
    pub seed: u64,
    pub reports: Vec<PropertyReport>,
}

/// Geodesic sampling draws this many arc-length pairs per endpoint pair.
const GEODESIC_PARAMS: usize = 10;

pub fn check(req: &CheckRequest) -> Result<(CheckOutput, Status), CliError> {
    let space = make_space(&req.space)?;
    let props: Vec<Property> =
        if req.property == Property::All { Property::EACH.to_vec() } else { vec![req.property] };
    let mut reports = Vec::new();
    for p in props {
        let n = req.samples.unwrap_or(p.default_samples());
        let tol = req.tol.unwrap_or(p.default_tol());
        let seed = req.seed;
        reports.push(match p {
            Property::Betweenness => check_betweenness(&space, n, tol, seed)?,
            Property::Transitivity => check_between_transitivity(&space, n, tol, seed)?,
            Property::Ptolemy => ptolemy_report(&space, req.grid_resolution, seed)?,
            Property::Convexity => check_metric_convexity(&space, n, tol, seed)?,
            Property::Triangle => check_triangle(&space, n, tol, seed)?,
            Property::Geodesics => check_geodesics(&space, n, GEODESIC_PARAMS, tol, seed)?,
            Property::All => unreachable!("expanded above"),
        });
    }
    let status = if reports.iter().all(PropertyReport::passed) { Status::Success } else { Status::Violation };
    Ok((CheckOutput { config_hash: json_hash(req), seed: req.seed, reports }, status))
}

/// Parse one `--evaders` item: a strategy name, optionally followed by
/// `:k` for `greedy_max_distance` or `:±1` for `circle_runner`.
pub fn parse_evader(item: &str) -> Result<EvaderSpec, CliError> {
    let (name, arg) = match item.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (item.trim(), None),
    };
    let bad = || CliError::Input(format!("bad evader `{item}`"));
    let spec = match (name, arg) {
        ("stationary", None) => EvaderSpec::Stationary {},
        ("radial_flee", None) => EvaderSpec::RadialFlee {},
        ("scripted_runner", None) => EvaderSpec::ScriptedRunner {},
        ("greedy_max_distance", None) => EvaderSpec::GreedyMaxDistance { k: 32 },
        ("greedy_max_distance", Some(k)) => EvaderSpec::GreedyMaxDistance { k: k.parse().map_err(|_| bad())? },
        ("circle_runner", None) => EvaderSpec::CircleRunner { orientation: 1.0 },
        ("circle_runner", Some(o)) => EvaderSpec::CircleRunner { orientation: o.parse().map_err(|_| bad())? },
        _ => return Err(bad()),
    };
    Ok(spec)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepHeader {
    pub config_hash: String,
    pub seed: u64,
    pub space: SpaceDescriptor,
    pub epsilons: Vec<f64>,
    pub evaders: Vec<EvaderSpec>,
    pub trials: usize,
}

#[derive(Serialize)]
struct SweepHashInput<'a> {
    space: &'a SpaceDescriptor,
    epsilons: &'a [f64],
    evaders: &'a [EvaderSpec],
    trials: usize,
}

pub fn sweep(
    space: &Space,
    epsilons: &[f64],
    evaders: &[EvaderSpec],
    trials: usize,
    seed: u64,
) -> Result<(SweepHeader, Vec<SweepRow>), CliError> {
    if epsilons.is_empty() || evaders.is_empty() || trials == 0 {
        return Err(CliError::Input("a sweep needs at least one epsilon, one evader, and one trial".into()));
    }
    for &e in epsilons {
        check_epsilon(space, e).map_err(|m| CliError::Input(format!("--epsilons: {m}")))?;
    }
    let descriptor = space.descriptor().clone();
    let hash = json_hash(&SweepHashInput { space: &descriptor, epsilons, evaders, trials });
    let rows = sweep_capture_time(space, epsilons, evaders, trials, seed)?;
    let header = SweepHeader {
        config_hash: hash,
        seed,
        space: descriptor,
        epsilons: epsilons.to_vec(),
        evaders: evaders.to_vec(),
        trials,
    };
    Ok((header, rows))
}

/// The sweep table, as CSV (after a `#` header line) or as JSON lines
/// (after a header record).
pub fn render_sweep(header: &SweepHeader, rows: &[SweepRow], format: Format) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    let head = serde_json::to_string(header).map_err(pursuit_core::Error::from)?;
    match format {
        Format::Csv => {
            out.extend_from_slice(format!("# {head}\n").as_bytes());
            let mut w = csv::Writer::from_writer(&mut out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| CliError::io("<sweep>", e))?;
        }
        Format::Jsonl => {
            out.extend_from_slice(head.as_bytes());
            out.push(b'\n');
            for r in rows {
                out.extend_from_slice(serde_json::to_string(r).map_err(pursuit_core::Error::from)?.as_bytes());
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundsOutput {
    pub config_hash: String,
    pub seed: u64,
    pub trace: PathBuf,
    pub radius: f64,
    pub center: Option<[Point; 2]>,
    pub rounds: Vec<RoundRecord>,
}

/// Rounds in a stored JSONL trace, around the most revisited moment.
/// The ball radius defaults to `ε/3`.
pub fn rounds(trace_path: &Path, radius: Option<f64>) -> Result<RoundsOutput, CliError> {
    let file = std::fs::File::open(trace_path).map_err(|e| CliError::io(trace_path, e))?;
    let trace = read_trace_jsonl(std::io::BufReader::new(file))?;
    let space = make_space(&trace.space)?;
    let eps = trace.config.epsilon;
    let radius = radius.unwrap_or(eps / 3.0);
    let center = most_revisited_center(&space, &trace.moments, radius)?;
    let rounds = match &center {
        Some((l, m)) => detect_rounds(&space, &trace.moments, (l, m), radius, eps)?,
        None => Vec::new(),
    };
    Ok(RoundsOutput {
        config_hash: config_hash(&trace.space, &trace.config, &trace.evader),
        seed: trace.seed,
        trace: trace_path.to_path_buf(),
        radius,
        center: center.map(|(l, m)| [l, m]),
        rounds,
    })
}

pub fn json_report<T: Serialize>(value: &T) -> Vec<u8> {
    to_json_bytes(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evader_items_parse() {
        assert_eq!(parse_evader("greedy_max_distance:8").unwrap(), EvaderSpec::GreedyMaxDistance { k: 8 });
        assert_eq!(parse_evader("circle_runner:-1").unwrap(), EvaderSpec::CircleRunner { orientation: -1.0 });
        assert_eq!(parse_evader(" radial_flee ").unwrap(), EvaderSpec::RadialFlee {});
        assert!(parse_evader("teleport").is_err());
        assert!(parse_evader("stationary:3").is_err());
    }

    #[test]
    fn circle_check_reports_a_violation() {
        let req = CheckRequest {
            space: SpaceDescriptor::Circle { circumference: 1.0 },
            property: Property::Betweenness,
            samples: Some(1_000),
            tol: None,
            grid_resolution: 8,
            seed: 0,
        };
        let (out, status) = check(&req).unwrap();
        assert_eq!(status, Status::Violation);
        assert!(out.reports[0].violation_count > 0);
    }
}
