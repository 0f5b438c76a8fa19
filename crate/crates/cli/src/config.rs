//! Experiment configuration files.
//!
//! A config is a JSON document with a `version` field. Parsing happens in two
//! stages: the document is deserialized strictly (unknown keys and type
//! mismatches are errors, reported with their JSON path), then resolved
//! against the chosen backend, which checks the cross-field invariants.

use std::fmt;
use std::path::{Path, PathBuf};

use pursuit_core::engine::{Evader, EvaderSpec, GameConfig};
use pursuit_core::spaces::parse_edge_list;
use pursuit_core::{make_space, MetricSpace, Point, Space, SpaceDescriptor, TreeEdge};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    pub space: SpaceSection,
    pub game: GameSection,
    pub evader: EvaderSpec,
    pub starts: Starts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Outputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

/// Like [`SpaceDescriptor`], except that a tree may name an edge-list file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSection {
    Disk {
        radius: f64,
    },
    ChebyshevDisk {
        radius: f64,
    },
    Circle {
        circumference: f64,
    },
    Tree {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<TreeEdge>>,
        /// `u v length` per line; relative paths are resolved against the
        /// config file's directory.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges_file: Option<PathBuf>,
    },
    Plane {},
}

impl From<SpaceDescriptor> for SpaceSection {
    fn from(d: SpaceDescriptor) -> Self {
        match d {
            SpaceDescriptor::Disk { radius } => SpaceSection::Disk { radius },
            SpaceDescriptor::ChebyshevDisk { radius } => SpaceSection::ChebyshevDisk { radius },
            SpaceDescriptor::Circle { circumference } => SpaceSection::Circle { circumference },
            SpaceDescriptor::Tree { edges } => SpaceSection::Tree { edges: Some(edges), edges_file: None },
            SpaceDescriptor::Plane {} => SpaceSection::Plane {},
        }
    }
}

/// Game parameters; anything left out takes the engine default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substeps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Starts {
    /// This many seeded random start pairs with `d(L0, M0) > epsilon`.
    Random(usize),
    /// Explicit `[lion, man]` coordinate pairs.
    Pairs(Vec<[Vec<f64>; 2]>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Outcome class a run is expected to show.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Every start is captured.
    Capture,
    /// Every start evades until the horizon.
    Escape,
    /// Every start evades and the distance at moments never changes.
    ConstantDistance,
}

/// Command-line values that take precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A fully validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub space: Space,
    pub descriptor: SpaceDescriptor,
    pub game: GameConfig,
    pub evader: EvaderSpec,
    pub starts: StartPlan,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
    pub expect: Option<Expectation>,
}

#[derive(Clone, Debug)]
pub enum StartPlan {
    Random(usize),
    Pairs(Vec<(Point, Point)>),
}

pub const DEFAULT_OUT_DIR: &str = "pursuit-out";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

/// Every problem found in one config, each tagged with its JSON path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if e.path.is_empty() {
                write!(f, "{}", e.message)?;
            } else {
                write!(f, "{}: {}", e.path, e.message)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    fn one(path: &str, message: impl fmt::Display) -> Self {
        ConfigErrors(vec![ConfigError { path: path.to_owned(), message: message.to_string() }])
    }

    pub fn messages(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.message.as_str())
    }
}

/// Strict deserialization of a config document.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigErrors::one(if path == "." { "" } else { &path }, e.into_inner())
    })?;
    Ok(doc)
}

/// Parse and validate a config; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigErrors> {
    parse_document(text)?.resolve(base_dir, &Overrides::default())
}

impl ConfigDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The space this document describes, with any edge file loaded.
    pub fn space_descriptor(&self, base_dir: &Path) -> Result<SpaceDescriptor, ConfigErrors> {
        resolve_space(&self.space, base_dir)
    }

    pub fn resolve(&self, base_dir: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigErrors> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigErrors::one(
                "version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version),
            ));
        }
        let descriptor = self.space_descriptor(base_dir)?;
        let space = make_space(&descriptor).map_err(|e| ConfigErrors::one("space", e))?;

        let mut errors = Vec::new();
        let mut push = |path: &str, message: String| errors.push(ConfigError { path: path.into(), message });

        let epsilon = overrides.epsilon.unwrap_or(self.game.epsilon);
        let game = match check_epsilon(&space, epsilon) {
            Err(msg) => {
                push("game.epsilon", msg);
                None
            }
            Ok(()) => {
                let mut game = GameConfig::for_space(&space, epsilon).expect("epsilon already checked");
                if let Some(h) = self.game.horizon_steps {
                    game.horizon_steps = h;
                }
                if let Some(n) = self.game.substeps {
                    game.substeps = n;
                }
                if let Some(tol) = self.game.capture_tol {
                    game.capture_tol = tol;
                }
                match game.validate() {
                    Ok(()) => Some(game),
                    Err(e) => {
                        push("game", e.to_string());
                        None
                    }
                }
            }
        };

        if let Err(e) = Evader::new(&self.evader, &space) {
            push("evader", e.to_string());
        }

        let starts = match &self.starts {
            Starts::Random(0) => {
                push("starts.random", "starts must be nonempty".into());
                None
            }
            Starts::Random(n) => Some(StartPlan::Random(*n)),
            Starts::Pairs(pairs) if pairs.is_empty() => {
                push("starts.pairs", "starts must be nonempty".into());
                None
            }
            Starts::Pairs(pairs) => {
                let mut out = Vec::new();
                for (i, [l, m]) in pairs.iter().enumerate() {
                    let l = space.point(l.clone()).map_err(|e| push(&format!("starts.pairs[{i}][0]"), e.to_string()));
                    let m = space.point(m.clone()).map_err(|e| push(&format!("starts.pairs[{i}][1]"), e.to_string()));
                    if let (Ok(l), Ok(m)) = (l, m) {
                        out.push((l, m));
                    }
                }
                Some(StartPlan::Pairs(out))
            }
        };

        if !errors.is_empty() {
            return Err(ConfigErrors(errors));
        }
        let outputs = self.outputs.clone().unwrap_or_default();
        Ok(ExperimentConfig {
            space,
            descriptor,
            game: game.expect("no errors"),
            evader: self.evader.clone(),
            starts: starts.expect("no errors"),
            seed: overrides.seed.or(self.seed).unwrap_or(0),
            out_dir: overrides
                .out
                .clone()
                .or(outputs.dir.map(|d| base_dir.join(d)))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            format: overrides.format.or(outputs.format).unwrap_or_default(),
            expect: self.expect,
        })
    }
}

/// Epsilon must be positive and, on compact spaces, below the diameter.
pub fn check_epsilon(space: &Space, epsilon: f64) -> Result<(), String> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err("epsilon must be positive".into());
    }
    if let Some(d) = space.diameter_bound() {
        if epsilon >= d {
            return Err(format!("epsilon {epsilon} must be below the space diameter {d}"));
        }
    }
    Ok(())
}

fn resolve_space(section: &SpaceSection, base_dir: &Path) -> Result<SpaceDescriptor, ConfigErrors> {
    Ok(match section {
        SpaceSection::Disk { radius } => SpaceDescriptor::Disk { radius: *radius },
        SpaceSection::ChebyshevDisk { radius } => SpaceDescriptor::ChebyshevDisk { radius: *radius },
        SpaceSection::Circle { circumference } => SpaceDescriptor::Circle { circumference: *circumference },
        SpaceSection::Plane {} => SpaceDescriptor::Plane {},
        SpaceSection::Tree { edges, edges_file } => match (edges, edges_file) {
            (Some(edges), None) => SpaceDescriptor::Tree { edges: edges.clone() },
            (None, Some(file)) => {
                let path = base_dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ConfigErrors::one("space.edges_file", format!("{}: {e}", path.display())))?;
                let edges = parse_edge_list(&text).map_err(|e| ConfigErrors::one("space.edges_file", e))?;
                SpaceDescriptor::Tree { edges }
            }
            _ => return Err(ConfigErrors::one("space", "a tree needs exactly one of `edges` and `edges_file`")),
        },
    })
}
