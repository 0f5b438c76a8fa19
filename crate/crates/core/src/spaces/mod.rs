//! Concrete playing spaces.

pub mod circle;
pub mod planar;
pub mod tree;

pub use circle::CircleSpace;
pub use planar::{Norm, PlanarSpace};
pub use tree::{parse_edge_list, MetricTree};

use rand::Rng;

use crate::metric::{GeodesicPath, MetricSpace, Point, SpaceDescriptor, SpaceTag, TreeEdge};

/// Any of the shipped backends, built from a [`SpaceDescriptor`].
#[derive(Clone, Debug)]
pub enum Space {
    Planar(PlanarSpace),
    Circle(CircleSpace),
    Tree(MetricTree),
}

/// Validate a descriptor and build its backend.
pub fn make_space(descriptor: &SpaceDescriptor) -> crate::Result<Space> {
    Ok(match descriptor {
        SpaceDescriptor::Disk { radius } => Space::Planar(PlanarSpace::euclidean_disk(*radius)?),
        SpaceDescriptor::ChebyshevDisk { radius } => {
            Space::Planar(PlanarSpace::chebyshev_disk(*radius)?)
        }
        SpaceDescriptor::Plane {} => Space::Planar(PlanarSpace::plane()),
        SpaceDescriptor::Circle { circumference } => Space::Circle(CircleSpace::new(*circumference)?),
        SpaceDescriptor::Tree { edges } => Space::Tree(MetricTree::new(edges.clone())?),
    })
}

/// The ten-edge tree used by the shipped scenarios.
pub fn reference_tree_edges() -> Vec<TreeEdge> {
    [
        ("r", "a", 1.0),
        ("a", "b", 0.7),
        ("a", "c", 0.5),
        ("r", "d", 1.2),
        ("d", "e", 0.4),
        ("d", "f", 0.9),
        ("f", "g", 0.6),
        ("r", "h", 0.8),
        ("h", "i", 0.5),
        ("h", "j", 1.1),
    ]
    .into_iter()
    .map(|(u, v, l)| TreeEdge(u.into(), v.into(), l))
    .collect()
}

impl Space {
    pub fn as_circle(&self) -> Option<&CircleSpace> {
        match self {
            Space::Circle(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&MetricTree> {
        match self {
            Space::Tree(t) => Some(t),
            _ => None,
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $body:expr) => {
        match $self {
            Space::Planar($s) => $body,
            Space::Circle($s) => $body,
            Space::Tree($s) => $body,
        }
    };
}

impl MetricSpace for Space {
    fn descriptor(&self) -> &SpaceDescriptor {
        dispatch!(self, s => s.descriptor())
    }

    fn tag(&self) -> SpaceTag {
        dispatch!(self, s => s.tag())
    }

    fn admits(&self, coords: &[f64]) -> bool {
        dispatch!(self, s => s.admits(coords))
    }

    fn canonicalize(&self, coords: Vec<f64>) -> Vec<f64> {
        dispatch!(self, s => s.canonicalize(coords))
    }

    fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        dispatch!(self, s => s.raw_distance(a, b))
    }

    fn raw_geodesic(&self, a: &Point, b: &Point) -> GeodesicPath {
        dispatch!(self, s => s.raw_geodesic(a, b))
    }

    fn diameter_bound(&self) -> Option<f64> {
        dispatch!(self, s => s.diameter_bound())
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        dispatch!(self, s => s.sample_point(rng))
    }

    fn step_candidates<R: Rng + ?Sized>(
        &self,
        from: &Point,
        step: f64,
        k: usize,
        rng: &mut R,
    ) -> Vec<Point> {
        dispatch!(self, s => s.step_candidates(from, step, k, rng))
    }

    fn flee_target(&self, lion: &Point, man: &Point, step: f64) -> Point {
        dispatch!(self, s => s.flee_target(lion, man, step))
    }

    fn grid(&self, resolution: usize) -> Vec<Point> {
        dispatch!(self, s => s.grid(resolution))
    }

    fn runner_route(&self) -> Vec<Point> {
        dispatch!(self, s => s.runner_route())
    }
}
