//! Elliptic solver for (lap - sigma) u = f on arbitrary level-set-defined 2D
//! domains embedded in a square auxiliary box, at second and fourth order.
//!
//! The discrete problem is reduced to a dense system on a thin layer of grid
//! points near the boundary; every bulk operation reuses a sine-transform
//! fast solver on the box. The boundary conditions are collocated with local
//! piecewise-Lagrange bases at the intersections of the boundary curve with
//! the grid lines, so the geometry only enters through 1D root finding.

pub mod basis;
pub mod bc;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod oned;
pub mod potential;
pub mod spectral;

pub use error::{Error, Result};
