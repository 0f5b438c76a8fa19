use rand::Rng;

use crate::metric::{wrap_arc, GeodesicPath, MetricSpace, PathShape, Point, SpaceDescriptor, SpaceTag};

/// A circle of given circumference with the arc-length metric.
///
/// Geodesics take the shorter arc; antipodal pairs go counterclockwise.
#[derive(Clone, Debug)]
pub struct CircleSpace {
    circumference: f64,
    descriptor: SpaceDescriptor,
    tag: SpaceTag,
}

impl CircleSpace {
    pub fn new(circumference: f64) -> crate::Result<Self> {
        if !(circumference.is_finite() && circumference > 0.0) {
            return Err(crate::Error::InvalidSpace(format!(
                "circumference must be positive and finite, got {circumference}"
            )));
        }
        let descriptor = SpaceDescriptor::Circle { circumference };
        let tag = descriptor.tag();
        Ok(CircleSpace { circumference, descriptor, tag })
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    fn make(&self, x: f64) -> Point {
        Point::new_unchecked(self.tag, vec![wrap_arc(x, self.circumference)])
    }

    /// Move along the circle by `arc` in `orientation` (+1 counterclockwise).
    pub fn advance(&self, p: &Point, arc: f64, orientation: f64) -> Point {
        self.make(p.coords()[0] + orientation * arc)
    }

    /// Orientation of the canonical geodesic from `a` to `b`.
    pub fn orientation(&self, a: &Point, b: &Point) -> f64 {
        let ccw = (b.coords()[0] - a.coords()[0]).rem_euclid(self.circumference);
        if ccw <= self.circumference - ccw {
            1.0
        } else {
            -1.0
        }
    }
}

impl MetricSpace for CircleSpace {
    fn descriptor(&self) -> &SpaceDescriptor {
        &self.descriptor
    }

    fn tag(&self) -> SpaceTag {
        self.tag
    }

    fn admits(&self, coords: &[f64]) -> bool {
        coords.len() == 1 && coords[0].is_finite() && (0.0..self.circumference).contains(&coords[0])
    }

    fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff = (a[0] - b[0]).abs();
        diff.min(self.circumference - diff)
    }

    fn raw_geodesic(&self, a: &Point, b: &Point) -> GeodesicPath {
        let length = self.raw_distance(a.coords(), b.coords());
        let orientation = self.orientation(a, b);
        GeodesicPath::new(
            a.clone(),
            b.clone(),
            length,
            PathShape::Arc { circumference: self.circumference, orientation },
        )
    }

    fn diameter_bound(&self) -> Option<f64> {
        Some(self.circumference / 2.0)
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.make(rng.gen_range(0.0..self.circumference))
    }

    fn step_candidates<R: Rng + ?Sized>(
        &self,
        from: &Point,
        step: f64,
        _k: usize,
        _rng: &mut R,
    ) -> Vec<Point> {
        let step = step.min(self.circumference / 2.0);
        vec![self.advance(from, step, 1.0), self.advance(from, step, -1.0)]
    }

    fn flee_target(&self, lion: &Point, man: &Point, step: f64) -> Point {
        let orientation = if lion == man { 1.0 } else { self.orientation(lion, man) };
        self.advance(man, step.min(self.circumference / 2.0), orientation)
    }

    fn grid(&self, resolution: usize) -> Vec<Point> {
        let n = resolution.max(1);
        (0..n).map(|i| self.make(self.circumference * i as f64 / n as f64)).collect()
    }

    fn runner_route(&self) -> Vec<Point> {
        self.grid(8)
    }
}
