//! Built-in scenarios.

use pursuit_core::engine::EvaderSpec;
use pursuit_core::spaces::reference_tree_edges;
use serde::Serialize;

use crate::config::{ConfigDocument, Expectation, GameSection, SpaceSection, Starts, SCHEMA_VERSION};

pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PresetId {
    /// Plane, Man runs straight away from the Lion: escape.
    Example1Plane,
    /// Unit Euclidean disk against a greedy evader: capture.
    Example2Disk,
    /// Unit disk with the l-infinity metric against a greedy evader: capture.
    Example3Chebyshev,
    /// Unit circle, Man runs ahead of the Lion at distance 0.4: escape at constant distance.
    CircleCounterexample,
    /// Ten-edge metric tree against a greedy evader: capture.
    TreeCat0,
}

impl PresetId {
    pub const ALL: [PresetId; 5] = [
        PresetId::Example1Plane,
        PresetId::Example2Disk,
        PresetId::Example3Chebyshev,
        PresetId::CircleCounterexample,
        PresetId::TreeCat0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Example1Plane => "example1_plane",
            PresetId::Example2Disk => "example2_disk",
            PresetId::Example3Chebyshev => "example3_chebyshev",
            PresetId::CircleCounterexample => "circle_counterexample",
            PresetId::TreeCat0 => "tree_cat0",
        }
    }

    pub fn expectation(self) -> Expectation {
        match self {
            PresetId::Example1Plane => Expectation::Escape,
            PresetId::CircleCounterexample => Expectation::ConstantDistance,
            _ => Expectation::Capture,
        }
    }

    pub fn document(self) -> ConfigDocument {
        let greedy = EvaderSpec::GreedyMaxDistance { k: 32 };
        let (space, evader, epsilon, starts) = match self {
            PresetId::Example1Plane => (SpaceSection::Plane {}, EvaderSpec::RadialFlee {}, DEFAULT_EPSILON, Starts::Random(5)),
            PresetId::Example2Disk => (SpaceSection::Disk { radius: 1.0 }, greedy, DEFAULT_EPSILON, Starts::Random(5)),
            PresetId::Example3Chebyshev => {
                (SpaceSection::ChebyshevDisk { radius: 1.0 }, greedy, DEFAULT_EPSILON, Starts::Random(5))
            }
            PresetId::CircleCounterexample => (
                SpaceSection::Circle { circumference: 1.0 },
                EvaderSpec::CircleRunner { orientation: 1.0 },
                0.05,
                Starts::Pairs(vec![[vec![0.0], vec![0.4]]]),
            ),
            PresetId::TreeCat0 => (
                SpaceSection::Tree { edges: Some(reference_tree_edges()), edges_file: None },
                greedy,
                DEFAULT_EPSILON,
                Starts::Random(5),
            ),
        };
        ConfigDocument {
            version: SCHEMA_VERSION,
            space,
            game: GameSection { epsilon, horizon_steps: None, substeps: None, capture_tol: None },
            evader,
            starts,
            seed: None,
            outputs: None,
            expect: Some(self.expectation()),
        }
    }
}
