use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pursuit_cli::commands::{self, CheckRequest, Property};
use pursuit_cli::config::{parse_document, ConfigDocument, Format, Overrides, StartPlan};
use pursuit_cli::presets::PresetId;
use pursuit_cli::{CliError, Status};
use pursuit_core::spaces::{parse_edge_list, reference_tree_edges};
use pursuit_core::{make_space, SpaceDescriptor};

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Discrete-time Lion and Man pursuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play every start of a config or preset and write traces, diagnostics, and a summary.
    Simulate(SimulateArgs),
    /// Run sampled property checks on a space and print the reports as JSON.
    Check(CheckArgs),
    /// Capture times over a grid of epsilons, evaders, and seeded starts.
    Sweep(SweepArgs),
    /// Detect rounds in a stored JSONL trace.
    Rounds(RoundsArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_enum)]
    preset: Option<PresetId>,
}

#[derive(Args)]
struct Common {
    #[arg(long, env = "PURSUIT_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceName {
    Disk,
    ChebyshevDisk,
    Circle,
    Tree,
    Plane,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum, required_unless_present = "config", conflicts_with = "config")]
    space: Option<SpaceName>,
    /// Take the space from a config file instead.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    property: Property,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Disk radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    circumference: f64,
    /// Tree edge list (`u v length` per line); the built-in ten-edge tree otherwise.
    #[arg(long)]
    edges_file: Option<PathBuf>,
    /// Grid resolution for the Ptolemy search.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    common: Common,
    /// Comma-separated; defaults to the config's epsilon.
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated evaders, e.g. `stationary,greedy_max_distance:32,radial_flee,scripted_runner`;
    /// defaults to the config's evader.
    #[arg(long, value_delimiter = ',')]
    evaders: Vec<String>,
    /// Seeded random starts per cell; defaults to the config's random start count, or 5.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct RoundsArgs {
    /// JSONL trace written by `simulate`.
    #[arg(long)]
    trace: PathBuf,
    /// Ball radius; defaults to epsilon / 3.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(source: &Source) -> Result<(ConfigDocument, PathBuf, Option<PresetId>), CliError> {
    match (&source.config, source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((parse_document(&text)?, base, None))
        }
        (None, Some(id)) => Ok((id.document(), PathBuf::from("."), Some(id))),
        (None, None) => Err(CliError::Input("one of --config or --preset is required".into())),
    }
}

fn overrides(common: &Common, epsilon: Option<f64>) -> Overrides {
    Overrides { seed: common.seed, epsilon, out: common.out.clone(), format: common.format }
}

fn print(bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    std::io::stdout().write_all(bytes).map_err(|e| CliError::io("<stdout>", e))
}

fn simulate(args: &SimulateArgs) -> Result<Status, CliError> {
    let (doc, base, preset) = load(&args.source)?;
    let cfg = doc.resolve(&base, &overrides(&args.common, args.epsilon))?;
    let (summary, status) = commands::simulate(&cfg, preset)?;
    print(&commands::json_report(&summary))?;
    if status == Status::UnexpectedOutcome {
        eprintln!("unexpected outcome: expected {:?}, see {}", cfg.expect, cfg.out_dir.join("summary.json").display());
    }
    Ok(status)
}

fn check(args: &CheckArgs) -> Result<Status, CliError> {
    let space = match (&args.config, args.space) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            parse_document(&text)?.space_descriptor(&base)?
        }
        (None, Some(SpaceName::Disk)) => SpaceDescriptor::Disk { radius: args.radius },
        (None, Some(SpaceName::ChebyshevDisk)) => SpaceDescriptor::ChebyshevDisk { radius: args.radius },
        (None, Some(SpaceName::Circle)) => SpaceDescriptor::Circle { circumference: args.circumference },
        (None, Some(SpaceName::Plane)) => SpaceDescriptor::Plane {},
        (None, Some(SpaceName::Tree)) => {
            let edges = match &args.edges_file {
                Some(p) => parse_edge_list(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?)?,
                None => reference_tree_edges(),
            };
            SpaceDescriptor::Tree { edges }
        }
        (None, None) => return Err(CliError::Input("one of --space or --config is required".into())),
    };
    let req = CheckRequest {
        space,
        property: args.property,
        samples: args.samples,
        tol: args.tol,
        grid_resolution: args.grid,
        seed: args.common.seed.unwrap_or(0),
    };
    let (out, status) = commands::check(&req)?;
    let bytes = commands::json_report(&out);
    if let Some(dir) = &args.common.out {
        let name = format!("check-{}.json", serde_json::to_value(args.property).unwrap().as_str().unwrap());
        commands::write_atomic(&dir.join(name), &bytes)?;
    }
    print(&bytes)?;
    Ok(status)
}

fn sweep(args: &SweepArgs) -> Result<Status, CliError> {
    let (doc, base, _) = load(&args.source)?;
    let cfg = doc.resolve(&base, &overrides(&args.common, args.epsilon))?;
    let epsilons = if args.epsilons.is_empty() { vec![cfg.game.epsilon] } else { args.epsilons.clone() };
    let evaders = if args.evaders.is_empty() {
        vec![cfg.evader.clone()]
    } else {
        args.evaders.iter().map(|e| commands::parse_evader(e)).collect::<Result<_, _>>()?
    };
    let trials = args.trials.unwrap_or(match cfg.starts {
        StartPlan::Random(n) => n,
        StartPlan::Pairs(_) => 5,
    });
    let space = make_space(&cfg.descriptor)?;
    let (header, rows) = commands::sweep(&space, &epsilons, &evaders, trials, cfg.seed)?;
    let format = args.common.format.unwrap_or(Format::Csv);
    let bytes = commands::render_sweep(&header, &rows, format)?;
    if let Some(dir) = &args.common.out {
        let ext = if format == Format::Csv { "csv" } else { "jsonl" };
        commands::write_atomic(&dir.join(format!("sweep.{ext}")), &bytes)?;
    }
    print(&bytes)?;
    Ok(Status::Success)
}

fn rounds(args: &RoundsArgs) -> Result<Status, CliError> {
    let out = commands::rounds(&args.trace, args.radius)?;
    let bytes = commands::json_report(&out);
    if let Some(dir) = &args.out {
        let stem = args.trace.file_name().map_or("trace".into(), |s| s.to_string_lossy().into_owned());
        commands::write_atomic(&dir.join(format!("{stem}.rounds.json")), &bytes)?;
    }
    print(&bytes)?;
    Ok(Status::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
        Command::Sweep(a) => sweep(a),
        Command::Rounds(a) => rounds(a),
    };
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::InvalidInput.code())
        }
    }
}
