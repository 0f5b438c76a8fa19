//! The geodesic metric space contract.
//!
//! Every backend exposes a distance, one canonical geodesic per ordered pair
//! of points, and seeded point sampling. Points carry the tag of the space
//! that produced them; mixing points across spaces is an error, never a
//! silently wrong number.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spaces::tree::{TreeLeg, TreeTopology};

/// Membership slack for points on the boundary of a carrier.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Identifier of the space a point belongs to, derived from its descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceTag(pub u64);

impl SpaceTag {
    pub fn of(descriptor: &SpaceDescriptor) -> Self {
        let canonical = serde_json::to_vec(descriptor).expect("descriptor serializes");
        let digest = Sha256::digest(&canonical);
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        SpaceTag(u64::from_be_bytes(bytes))
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// One edge of a metric tree: endpoint ids and a positive length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge(pub String, pub String, pub f64);

/// Which backend to build, and with what parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDescriptor {
    /// Closed Euclidean disk centred at the origin.
    Disk { radius: f64 },
    /// Closed Euclidean disk carrying the l-infinity metric.
    ChebyshevDisk { radius: f64 },
    /// Circle with its intrinsic arc-length metric; points are arc positions.
    Circle { circumference: f64 },
    /// Finite metric tree given by its edge list.
    Tree { edges: Vec<TreeEdge> },
    /// The whole Euclidean plane.
    Plane {},
}

impl SpaceDescriptor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceDescriptor::Disk { .. } => "disk",
            SpaceDescriptor::ChebyshevDisk { .. } => "chebyshev_disk",
            SpaceDescriptor::Circle { .. } => "circle",
            SpaceDescriptor::Tree { .. } => "tree",
            SpaceDescriptor::Plane {} => "plane",
        }
    }

    pub fn compact(&self) -> bool {
        !matches!(self, SpaceDescriptor::Plane {})
    }

    pub fn tag(&self) -> SpaceTag {
        SpaceTag::of(self)
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceDescriptor::Disk { radius } => write!(f, "disk(r={radius})"),
            SpaceDescriptor::ChebyshevDisk { radius } => write!(f, "chebyshev_disk(r={radius})"),
            SpaceDescriptor::Circle { circumference } => write!(f, "circle(c={circumference})"),
            SpaceDescriptor::Tree { edges } => write!(f, "tree({} edges)", edges.len()),
            SpaceDescriptor::Plane {} => write!(f, "plane"),
        }
    }
}

/// An element of a space. Coordinates are interpreted by the owning backend:
/// planar `[x, y]`, circle `[arc position]`, tree `[edge index, offset]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    tag: SpaceTag,
}

impl Point {
    /// Callers must guarantee membership; use [`MetricSpace::point`] otherwise.
    pub(crate) fn new_unchecked(tag: SpaceTag, coords: Vec<f64>) -> Self {
        Point { coords, tag }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

#[derive(Clone, Debug)]
pub(crate) enum PathShape {
    /// Straight segment, parametrized proportionally to the metric length.
    Affine,
    /// Arc of a circle walked in a fixed orientation (+1 or -1).
    Arc { circumference: f64, orientation: f64 },
    /// Sequence of (partial) tree edges.
    Tree { legs: Vec<TreeLeg>, topology: Arc<TreeTopology> },
}

/// A unit-speed shortest path from `start` to `end`.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    start: Point,
    end: Point,
    length: f64,
    shape: PathShape,
}

impl GeodesicPath {
    pub(crate) fn new(start: Point, end: Point, length: f64, shape: PathShape) -> Self {
        GeodesicPath { start, end, length, shape }
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// The point at arc length `s` from the start.
    pub fn point_at(&self, s: f64) -> Result<Point> {
        if !(0.0..=self.length).contains(&s) {
            return Err(Error::ParameterOutOfRange { s, length: self.length });
        }
        if s == 0.0 {
            return Ok(self.start.clone());
        }
        if s == self.length {
            return Ok(self.end.clone());
        }
        let tag = self.start.tag;
        let coords = match &self.shape {
            PathShape::Affine => {
                let t = s / self.length;
                self.start
                    .coords
                    .iter()
                    .zip(&self.end.coords)
                    .map(|(a, b)| a + t * (b - a))
                    .collect()
            }
            PathShape::Arc { circumference, orientation } => {
                vec![wrap_arc(self.start.coords[0] + orientation * s, *circumference)]
            }
            PathShape::Tree { legs, topology } => topology.walk_legs(legs, s),
        };
        Ok(Point::new_unchecked(tag, coords))
    }

    /// The point at fraction `t` in [0, 1] of the length (affine reparametrization).
    pub fn point_at_fraction(&self, t: f64) -> Result<Point> {
        if t == 1.0 {
            return Ok(self.end.clone());
        }
        self.point_at(t * self.length)
    }

    /// Endpoint after travelling at most `budget` along the path.
    pub fn advance(&self, budget: f64) -> Point {
        if budget >= self.length {
            self.end.clone()
        } else {
            self.point_at(budget.max(0.0)).expect("parameter clamped into range")
        }
    }
}

/// Reduce an arc position into `[0, circumference)`.
pub(crate) fn wrap_arc(x: f64, circumference: f64) -> f64 {
    let r = x.rem_euclid(circumference);
    if r >= circumference {
        0.0
    } else {
        r
    }
}

/// The contract shared by every playing space.
///
/// Implementors provide the unchecked primitives; the provided methods add
/// tag and membership validation.
pub trait MetricSpace {
    fn descriptor(&self) -> &SpaceDescriptor;

    fn tag(&self) -> SpaceTag;

    /// Membership predicate on raw coordinates.
    fn admits(&self, coords: &[f64]) -> bool;

    /// Normal form of admitted coordinates (identity except on trees).
    fn canonicalize(&self, coords: Vec<f64>) -> Vec<f64> {
        coords
    }

    fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64;

    /// Canonical geodesic between two points already known to be members.
    fn raw_geodesic(&self, a: &Point, b: &Point) -> GeodesicPath;

    /// `None` when the space is unbounded.
    fn diameter_bound(&self) -> Option<f64>;

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point;

    /// Points reachable from `from` by moving exactly `step` (or less where
    /// the carrier ends). `k` is a direction budget for continuous backends.
    fn step_candidates<R: Rng + ?Sized>(&self, from: &Point, step: f64, k: usize, rng: &mut R)
        -> Vec<Point>;

    /// Where a runner at `man` goes after moving up to `step` directly away from `lion`.
    fn flee_target(&self, lion: &Point, man: &Point, step: f64) -> Point;

    /// Deterministic lattice of points at the given resolution.
    fn grid(&self, resolution: usize) -> Vec<Point>;

    /// A closed route a scripted runner can loop along.
    fn runner_route(&self) -> Vec<Point>;

    fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if !self.admits(&coords) {
            return Err(Error::OutsideSpace { space: self.descriptor().to_string(), coords });
        }
        Ok(Point::new_unchecked(self.tag(), self.canonicalize(coords)))
    }

    fn check(&self, p: &Point) -> Result<()> {
        if p.tag != self.tag() {
            return Err(Error::SpaceMismatch { expected: self.tag(), found: p.tag });
        }
        if !self.admits(&p.coords) {
            return Err(Error::OutsideSpace {
                space: self.descriptor().to_string(),
                coords: p.coords.clone(),
            });
        }
        Ok(())
    }

    fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.raw_distance(&a.coords, &b.coords))
    }

    fn geodesic(&self, a: &Point, b: &Point) -> Result<GeodesicPath> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.raw_geodesic(a, b))
    }

    /// Whether `b` lies between `a` and `c`: d(a,b) + d(b,c) = d(a,c) within `tol`.
    fn between(&self, a: &Point, b: &Point, c: &Point, tol: f64) -> Result<bool> {
        Ok(between_slack(self, a, b, c)? >= -tol)
    }
}

/// Signed slack of the betweenness relation `b` between `a` and `c`:
/// `d(a,c) - d(a,b) - d(b,c)`, zero exactly when `b` lies between.
pub fn between_slack<S: MetricSpace + ?Sized>(
    space: &S,
    a: &Point,
    b: &Point,
    c: &Point,
) -> Result<f64> {
    let excess = space.distance(a, b)? + space.distance(b, c)? - space.distance(a, c)?;
    Ok(-excess.abs())
}
