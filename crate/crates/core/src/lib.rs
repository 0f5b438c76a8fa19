//! Discrete-time simple pursuit on compact geodesic metric spaces.
//!
//! The pursuer (Lion) re-aims every `epsilon` time units at the evader's
//! (Man's) current position and walks the canonical geodesic toward it at unit
//! speed. The crate provides the playing spaces, the game loop, sampled
//! checkers for the metric properties capture depends on, and validators for
//! the structure of the produced trajectories.

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod metric;
pub mod properties;
pub mod seed;
pub mod spaces;

pub use error::{Error, Result};
pub use metric::{GeodesicPath, MetricSpace, Point, SpaceDescriptor, SpaceTag, TreeEdge};
pub use spaces::{make_space, Space};
