//! Local piecewise-Lagrange basis functions of degree 1 and 3 and their
//! tensor products.
//!
//! Each basis function is attached to a grid node, takes the value 1 there,
//! vanishes at every other node, and has compact support (one cell on each
//! side for degree 1, two cells for degree 3). Pieces are half-open:
//! left-open, right-closed. Value evaluation is continuous everywhere;
//! first and second derivatives jump at the piece breakpoints, so derivative
//! evaluation refuses breakpoints and the caller must nudge off grid lines.

use crate::error::{Error, Result};

/// Polynomial degree of the local basis.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Degree {
    Linear,
    Cubic,
}

impl Degree {
    /// Support radius in units of h: degree 1 covers one cell each side,
    /// degree 3 covers two.
    pub fn support_cells(self) -> usize {
        match self {
            Degree::Linear => 1,
            Degree::Cubic => 2,
        }
    }
}

/// Relative distance below which an offset counts as sitting on a breakpoint.
const BREAK_TOL: f64 = 1e-12;

fn near_breakpoint(xi: f64, h: f64, radius: usize) -> bool {
    let r = radius as f64;
    let t = xi / h;
    if t.abs() > r + BREAK_TOL {
        return false;
    }
    (t - t.round()).abs() <= BREAK_TOL
}

/// Basis value at offset `xi` from the owning node.
pub fn phi(degree: Degree, xi: f64, h: f64) -> f64 {
    match degree {
        Degree::Linear => {
            if xi > -h && xi <= 0.0 {
                (xi + h) / h
            } else if xi > 0.0 && xi <= h {
                (xi - h) / -h
            } else {
                0.0
            }
        }
        Degree::Cubic => {
            let h3 = h * h * h;
            if xi > -2.0 * h && xi <= -h {
                (xi + 3.0 * h) * (xi + 2.0 * h) * (xi + h) / (6.0 * h3)
            } else if xi > -h && xi <= 0.0 {
                (xi + 2.0 * h) * (xi + h) * (xi - h) / (-2.0 * h3)
            } else if xi > 0.0 && xi <= h {
                (xi + h) * (xi - h) * (xi - 2.0 * h) / (2.0 * h3)
            } else if xi > h && xi <= 2.0 * h {
                (xi - h) * (xi - 2.0 * h) * (xi - 3.0 * h) / (-6.0 * h3)
            } else {
                0.0
            }
        }
    }
}

/// First derivative. Errors exactly at piece breakpoints, where the
/// derivative is discontinuous.
pub fn dphi(degree: Degree, xi: f64, h: f64) -> Result<f64> {
    if near_breakpoint(xi, h, degree.support_cells()) {
        return Err(Error::Breakpoint(xi));
    }
    Ok(match degree {
        Degree::Linear => {
            if xi > -h && xi < 0.0 {
                1.0 / h
            } else if xi > 0.0 && xi < h {
                -1.0 / h
            } else {
                0.0
            }
        }
        Degree::Cubic => {
            let h2 = h * h;
            let h3 = h2 * h;
            if xi > -2.0 * h && xi < -h {
                (3.0 * xi * xi + 12.0 * h * xi + 11.0 * h2) / (6.0 * h3)
            } else if xi > -h && xi < 0.0 {
                (3.0 * xi * xi + 4.0 * h * xi - h2) / (-2.0 * h3)
            } else if xi > 0.0 && xi < h {
                (3.0 * xi * xi - 4.0 * h * xi - h2) / (2.0 * h3)
            } else if xi > h && xi < 2.0 * h {
                (3.0 * xi * xi - 12.0 * h * xi + 11.0 * h2) / (-6.0 * h3)
            } else {
                0.0
            }
        }
    })
}

/// Second derivative, with the same breakpoint refusal as [`dphi`].
pub fn d2phi(degree: Degree, xi: f64, h: f64) -> Result<f64> {
    if near_breakpoint(xi, h, degree.support_cells()) {
        return Err(Error::Breakpoint(xi));
    }
    Ok(match degree {
        Degree::Linear => 0.0,
        Degree::Cubic => {
            let h3 = h * h * h;
            if xi > -2.0 * h && xi < -h {
                (xi + 2.0 * h) / h3
            } else if xi > -h && xi < 0.0 {
                -(3.0 * xi + 2.0 * h) / h3
            } else if xi > 0.0 && xi < h {
                (3.0 * xi - 2.0 * h) / h3
            } else if xi > h && xi < 2.0 * h {
                -(xi - 2.0 * h) / h3
            } else {
                0.0
            }
        }
    })
}

/// A tensor-product basis function attached to the grid node `(x, y)`.
#[derive(Copy, Clone, Debug)]
pub struct TensorBasisNode {
    pub x: f64,
    pub y: f64,
    pub degree: Degree,
}

impl TensorBasisNode {
    pub fn value(&self, px: f64, py: f64, h: f64) -> f64 {
        phi(self.degree, px - self.x, h) * phi(self.degree, py - self.y, h)
    }

    pub fn grad(&self, px: f64, py: f64, h: f64) -> Result<(f64, f64)> {
        let fx = phi(self.degree, px - self.x, h);
        let fy = phi(self.degree, py - self.y, h);
        let dx = dphi(self.degree, px - self.x, h)?;
        let dy = dphi(self.degree, py - self.y, h)?;
        Ok((dx * fy, fx * dy))
    }

    /// Laplacian phi''(x)phi(y) + phi(x)phi''(y).
    pub fn laplacian(&self, px: f64, py: f64, h: f64) -> Result<f64> {
        let fx = phi(self.degree, px - self.x, h);
        let fy = phi(self.degree, py - self.y, h);
        let dxx = d2phi(self.degree, px - self.x, h)?;
        let dyy = d2phi(self.degree, py - self.y, h)?;
        Ok(dxx * fy + fx * dyy)
    }
}
