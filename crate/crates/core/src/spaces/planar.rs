//! Planar backends: the Euclidean disk, the disk with the l-infinity metric,
//! and the unbounded plane. All share affine canonical geodesics.

use std::f64::consts::TAU;

use rand::Rng;

use crate::metric::{
    GeodesicPath, MetricSpace, PathShape, Point, SpaceDescriptor, SpaceTag, MEMBERSHIP_TOL,
};

/// Side of the sampling square used on the unbounded plane.
pub const PLANE_SAMPLING_HALF_WIDTH: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Euclidean,
    Chebyshev,
}

impl Norm {
    pub fn length(self, x: f64, y: f64) -> f64 {
        match self {
            Norm::Euclidean => x.hypot(y),
            Norm::Chebyshev => x.abs().max(y.abs()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlanarSpace {
    norm: Norm,
    /// Euclidean radius of the carrier disk; `None` for the whole plane.
    radius: Option<f64>,
    descriptor: SpaceDescriptor,
    tag: SpaceTag,
}

impl PlanarSpace {
    pub(crate) fn new(norm: Norm, radius: Option<f64>, descriptor: SpaceDescriptor) -> Self {
        let tag = descriptor.tag();
        PlanarSpace { norm, radius, descriptor, tag }
    }

    pub fn euclidean_disk(radius: f64) -> crate::Result<Self> {
        check_positive(radius, "radius")?;
        Ok(Self::new(Norm::Euclidean, Some(radius), SpaceDescriptor::Disk { radius }))
    }

    pub fn chebyshev_disk(radius: f64) -> crate::Result<Self> {
        check_positive(radius, "radius")?;
        Ok(Self::new(Norm::Chebyshev, Some(radius), SpaceDescriptor::ChebyshevDisk { radius }))
    }

    pub fn plane() -> Self {
        Self::new(Norm::Euclidean, None, SpaceDescriptor::Plane {})
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    fn xy(p: &Point) -> (f64, f64) {
        (p.coords()[0], p.coords()[1])
    }

    fn make(&self, x: f64, y: f64) -> Point {
        Point::new_unchecked(self.tag, vec![x, y])
    }

    /// Move from `(x, y)` along direction `(ux, uy)` (unit in this space's
    /// norm) by `step`, stopping early at the carrier boundary.
    fn ray(&self, x: f64, y: f64, ux: f64, uy: f64, step: f64) -> Point {
        let t = match self.radius {
            None => step,
            Some(r) => {
                // Largest t in [0, step] with |(x, y) + t u|_2 <= r.
                let uu = ux * ux + uy * uy;
                let pu = x * ux + y * uy;
                let pp = x * x + y * y;
                let disc = (pu * pu - uu * (pp - r * r)).max(0.0);
                let exit = (-pu + disc.sqrt()) / uu;
                exit.clamp(0.0, step)
            }
        };
        if t == 0.0 {
            return self.make(x, y);
        }
        self.make(x + t * ux, y + t * uy)
    }

    fn unit_direction(&self, angle: f64) -> (f64, f64) {
        let (s, c) = angle.sin_cos();
        let n = self.norm.length(c, s);
        (c / n, s / n)
    }
}

fn check_positive(value: f64, what: &str) -> crate::Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(crate::Error::InvalidSpace(format!("{what} must be positive and finite, got {value}")))
    }
}

impl MetricSpace for PlanarSpace {
    fn descriptor(&self) -> &SpaceDescriptor {
        &self.descriptor
    }

    fn tag(&self) -> SpaceTag {
        self.tag
    }

    fn admits(&self, coords: &[f64]) -> bool {
        if coords.len() != 2 || !coords.iter().all(|c| c.is_finite()) {
            return false;
        }
        match self.radius {
            None => true,
            Some(r) => coords[0].hypot(coords[1]) <= r + MEMBERSHIP_TOL,
        }
    }

    fn raw_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm.length(a[0] - b[0], a[1] - b[1])
    }

    fn raw_geodesic(&self, a: &Point, b: &Point) -> GeodesicPath {
        let length = self.raw_distance(a.coords(), b.coords());
        GeodesicPath::new(a.clone(), b.clone(), length, PathShape::Affine)
    }

    fn diameter_bound(&self) -> Option<f64> {
        // Both norms attain 2r on the Euclidean disk (antipodal points on an axis).
        self.radius.map(|r| 2.0 * r)
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.radius {
            None => {
                let h = PLANE_SAMPLING_HALF_WIDTH;
                self.make(rng.gen_range(-h..=h), rng.gen_range(-h..=h))
            }
            Some(r) => loop {
                let x = rng.gen_range(-r..=r);
                let y = rng.gen_range(-r..=r);
                if x.hypot(y) <= r {
                    return self.make(x, y);
                }
            },
        }
    }

    fn step_candidates<R: Rng + ?Sized>(
        &self,
        from: &Point,
        step: f64,
        k: usize,
        rng: &mut R,
    ) -> Vec<Point> {
        let (x, y) = Self::xy(from);
        let offset = rng.gen_range(0.0..TAU);
        (0..k)
            .map(|j| {
                let (ux, uy) = self.unit_direction(offset + TAU * j as f64 / k as f64);
                self.ray(x, y, ux, uy, step)
            })
            .collect()
    }

    fn flee_target(&self, lion: &Point, man: &Point, step: f64) -> Point {
        let (lx, ly) = Self::xy(lion);
        let (mx, my) = Self::xy(man);
        let (dx, dy) = (mx - lx, my - ly);
        let n = self.norm.length(dx, dy);
        let (ux, uy) = if n > 0.0 { (dx / n, dy / n) } else { (1.0, 0.0) };
        self.ray(mx, my, ux, uy, step)
    }

    fn grid(&self, resolution: usize) -> Vec<Point> {
        let half = self.radius.unwrap_or(1.0);
        let n = resolution.max(1);
        let coord = |i: usize| -half + 2.0 * half * i as f64 / n as f64;
        let mut out = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (coord(i), coord(j));
                if self.admits(&[x, y]) {
                    out.push(self.make(x, y));
                }
            }
        }
        out
    }

    fn runner_route(&self) -> Vec<Point> {
        let r = 0.8 * self.radius.unwrap_or(1.0);
        (0..64)
            .map(|j| {
                let (s, c) = (TAU * j as f64 / 64.0).sin_cos();
                self.make(r * c, r * s)
            })
            .collect()
    }
}
