//! Exact kinetic Delaunay triangulation of moving points.
//!
//! The crate maintains the Delaunay triangulation of points with polynomial
//! trajectories using exact rational arithmetic, enumerates every topological
//! event by brute force for cross-checking, and measures the combinatorial
//! quantities behind the known bounds on the number of Delaunay changes:
//! event levels and indices, red-blue arrangements of a pair, and Delaunay
//! crossings.

pub mod analysis;
pub mod crossings;
pub mod error;
pub mod experiments;
pub mod kinetic;
pub mod motion;
pub mod oracle;
pub mod pairwise;
pub mod poly;
pub mod predicates;
pub mod redblue;
pub mod roots;

pub use error::{KdtError, Result};
pub use kinetic::{EventKind, EventLog, HullChange, KineticEvent, TriangulationState};
pub use motion::{generate_scene, MotionFamily, MovingPoint, Scene, Time};
pub use oracle::CensusEvent;
pub use roots::IsolatedRoot;
