//! Implicit geometries defined by level-set functions, boundary-gridline
//! intersection search, and outward normals.
//!
//! The sign convention is fixed for the whole crate: psi < 0 strictly inside
//! the domain, psi > 0 strictly outside, psi = 0 only on the boundary curve.

use crate::error::{Error, Result};
use crate::grid::AuxGrid;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Which family of grid lines an intersection point lies on.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LineAxis {
    /// A line of constant y (the point sits on a horizontal edge).
    Horizontal,
    /// A line of constant x (the point sits on a vertical edge).
    Vertical,
}

/// A root of psi on a grid line, before pairing with a boundary-layer node.
#[derive(Copy, Clone, Debug)]
pub struct RawIntersection {
    pub pos: Point,
    pub axis: LineAxis,
    /// Physical index of the grid line the point lies on.
    pub line: usize,
    /// Physical index of the left/bottom node of the hosting edge.
    pub edge_lo: usize,
}

#[derive(Clone, Debug)]
pub enum ShapeKind {
    Circle,
    Ellipse { alpha: f64 },
    MultiConnected,
    Triangle,
}

type Evaluator = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradEvaluator = Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// An implicit shape: a signed level-set function with optional analytic
/// gradient and a kind tag for reporting.
pub struct LevelSetShape {
    eval: Evaluator,
    grad: Option<GradEvaluator>,
    pub kind: ShapeKind,
}

impl LevelSetShape {
    pub fn psi(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn is_inside(&self, x: f64, y: f64) -> bool {
        self.psi(x, y) < 0.0
    }

    /// Shapes with corners are exempt from the two-sign-changes-per-edge
    /// resolution guard: near a corner the boundary legitimately crosses a
    /// single edge twice at every grid size.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, ShapeKind::Triangle)
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ShapeKind::Circle => "circle".into(),
            ShapeKind::Ellipse { alpha } => format!("ellipse(alpha={alpha})"),
            ShapeKind::MultiConnected => "multi".into(),
            ShapeKind::Triangle => "triangle".into(),
        }
    }
}

/// psi(x, y) = x^2 + alpha^2 y^2 - 1.
pub fn make_ellipse(alpha: f64) -> Result<LevelSetShape> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ellipse aspect ratio must be positive, got {alpha}"
        )));
    }
    let a2 = alpha * alpha;
    Ok(LevelSetShape {
        eval: Box::new(move |x, y| x * x + a2 * y * y - 1.0),
        grad: Some(Box::new(move |x, y| (2.0 * x, 2.0 * a2 * y))),
        kind: ShapeKind::Ellipse { alpha },
    })
}

/// Unit circle (the alpha = 1 ellipse).
pub fn make_circle() -> LevelSetShape {
    LevelSetShape {
        eval: Box::new(|x, y| x * x + y * y - 1.0),
        grad: Some(Box::new(|x, y| (2.0 * x, 2.0 * y))),
        kind: ShapeKind::Circle,
    }
}

/// Unit disc with two circular holes; the interior is where the product of
/// the three quadratics is negative.
pub fn make_multi_connected() -> LevelSetShape {
    let p1 = |x: f64, y: f64| x * x + y * y - 1.0;
    let p2 = |x: f64, y: f64| 4.0 * x * x + 4.0 * (y - 0.5) * (y - 0.5) - 1.0;
    let p3 = |x: f64, y: f64| 16.0 * (x + 0.3) * (x + 0.3) + 16.0 * (y + 0.4) * (y + 0.4) - 1.0;
    LevelSetShape {
        eval: Box::new(move |x, y| p1(x, y) * p2(x, y) * p3(x, y)),
        grad: Some(Box::new(move |x, y| {
            let (f1, f2, f3) = (p1(x, y), p2(x, y), p3(x, y));
            let g1 = (2.0 * x, 2.0 * y);
            let g2 = (8.0 * x, 8.0 * (y - 0.5));
            let g3 = (32.0 * (x + 0.3), 32.0 * (y + 0.4));
            (
                g1.0 * f2 * f3 + f1 * g2.0 * f3 + f1 * f2 * g3.0,
                g1.1 * f2 * f3 + f1 * g2.1 * f3 + f1 * f2 * g3.1,
            )
        })),
        kind: ShapeKind::MultiConnected,
    }
}

/// Triangle via barycentric coordinates: psi = -min(b1, b2, 1 - b1 - b2).
pub fn make_triangle(v1: (f64, f64), v2: (f64, f64), v3: (f64, f64)) -> Result<LevelSetShape> {
    let det = (v2.0 - v1.0) * (v3.1 - v1.1) - (v3.0 - v1.0) * (v2.1 - v1.1);
    if det.abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "triangle vertices are collinear".into(),
        ));
    }
    let bary = move |x: f64, y: f64| -> (f64, f64, f64) {
        let b1 = ((v3.1 - v1.1) * (x - v1.0) - (v3.0 - v1.0) * (y - v1.1)) / det;
        let b2 = ((v2.0 - v1.0) * (y - v1.1) - (v2.1 - v1.1) * (x - v1.0)) / det;
        (b1, b2, 1.0 - b1 - b2)
    };
    let gb1 = ((v3.1 - v1.1) / det, -(v3.0 - v1.0) / det);
    let gb2 = (-(v2.1 - v1.1) / det, (v2.0 - v1.0) / det);
    let gb3 = (-gb1.0 - gb2.0, -gb1.1 - gb2.1);
    Ok(LevelSetShape {
        eval: Box::new(move |x, y| {
            let (b1, b2, b3) = bary(x, y);
            -b1.min(b2).min(b3)
        }),
        grad: Some(Box::new(move |x, y| {
            let (b1, b2, b3) = bary(x, y);
            let g = if b1 <= b2 && b1 <= b3 {
                gb1
            } else if b2 <= b3 {
                gb2
            } else {
                gb3
            };
            (-g.0, -g.1)
        })),
        kind: ShapeKind::Triangle,
    })
}

/// The triangular domain used by the experiment presets.
pub fn make_preset_triangle() -> LevelSetShape {
    make_triangle((0.5, 0.9), (0.9, -0.2), (-0.9, -0.9)).expect("preset vertices")
}

/// Shape selection by string key.
pub fn shape_from_key(key: &str, alpha: f64) -> Result<LevelSetShape> {
    match key {
        "ellipse" => make_ellipse(alpha),
        "circle" => Ok(make_circle()),
        "multi" => Ok(make_multi_connected()),
        "triangle" => Ok(make_preset_triangle()),
        other => Err(Error::InvalidParameter(format!("unknown shape key {other:?}"))),
    }
}

fn sgn(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

const BISECT_MAX_ITER: usize = 200;

/// Bisection for psi = 0 on the segment p(t) = a + t (b - a), given a sign
/// change between t_lo and t_hi. Interval tolerance is 1e-12 h.
fn bisect(
    shape: &LevelSetShape,
    a: Point,
    b: Point,
    mut t_lo: f64,
    mut t_hi: f64,
    h: f64,
) -> Result<Point> {
    let at = |t: f64| Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    let seg = a.dist(b);
    let mut f_lo = shape.psi(at(t_lo).x, at(t_lo).y);
    let tol = 1e-12 * h / seg.max(1e-300);
    for _ in 0..BISECT_MAX_ITER {
        if t_hi - t_lo <= tol {
            let p = at(0.5 * (t_lo + t_hi));
            return Ok(p);
        }
        let mid = 0.5 * (t_lo + t_hi);
        let f_mid = shape.psi(at(mid).x, at(mid).y);
        if f_mid == 0.0 {
            return Ok(at(mid));
        }
        if sgn(f_lo) != sgn(f_mid) {
            t_hi = mid;
        } else {
            t_lo = mid;
            f_lo = f_mid;
        }
    }
    Err(Error::GeometryResolution(format!(
        "root find did not converge on segment ({}, {})-({}, {})",
        a.x, a.y, b.x, b.y
    )))
}

/// Interior sample count used by the per-edge resolution guard.
const EDGE_SAMPLES: usize = 8;

fn scan_edge(
    shape: &LevelSetShape,
    a: Point,
    b: Point,
    h: f64,
    axis: LineAxis,
    line: usize,
    edge_lo: usize,
    out: &mut Vec<RawIntersection>,
) -> Result<()> {
    let m = EDGE_SAMPLES + 2;
    let mut signs = [0i8; EDGE_SAMPLES + 2];
    let mut ts = [0.0f64; EDGE_SAMPLES + 2];
    for (k, (s, t)) in signs.iter_mut().zip(ts.iter_mut()).enumerate() {
        *t = k as f64 / (m - 1) as f64;
        let p = Point::new(a.x + *t * (b.x - a.x), a.y + *t * (b.y - a.y));
        *s = sgn(shape.psi(p.x, p.y));
    }
    let flips: Vec<usize> = (0..m - 1).filter(|&k| signs[k] != signs[k + 1]).collect();
    if flips.len() >= 2 && shape.is_smooth() {
        return Err(Error::GeometryResolution(format!(
            "edge ({}, {})-({}, {}) crosses the boundary {} times; refine the grid",
            a.x,
            a.y,
            b.x,
            b.y,
            flips.len()
        )));
    }
    for &k in &flips {
        let pos = bisect(shape, a, b, ts[k], ts[k + 1], h)?;
        out.push(RawIntersection { pos, axis, line, edge_lo });
    }
    Ok(())
}

/// Finds every root of psi on the grid lines of `grid` by scanning all cell
/// edges for sign changes and bisecting each bracket.
///
/// Smooth shapes abort with a resolution error if a single edge hosts two
/// sign changes among its sampled points.
pub fn grid_line_intersections(
    shape: &LevelSetShape,
    grid: &AuxGrid,
) -> Result<Vec<RawIntersection>> {
    let n = grid.n;
    let h = grid.h;
    let mut out = Vec::new();
    // horizontal edges, on lines of constant y
    for j in 0..=n + 1 {
        let y = grid.phys_y(j);
        for i in 0..=n {
            let a = Point::new(grid.phys_x(i), y);
            let b = Point::new(grid.phys_x(i + 1), y);
            scan_edge(shape, a, b, h, LineAxis::Horizontal, j, i, &mut out)?;
        }
    }
    // vertical edges, on lines of constant x
    for i in 0..=n + 1 {
        let x = grid.phys_x(i);
        for j in 0..=n {
            let a = Point::new(x, grid.phys_y(j));
            let b = Point::new(x, grid.phys_y(j + 1));
            scan_edge(shape, a, b, h, LineAxis::Vertical, i, j, &mut out)?;
        }
    }
    Ok(out)
}

/// Unit outward normal grad(psi)/|grad(psi)| at `p`, using the analytic
/// gradient when the shape provides one and central differences with step
/// h/100 otherwise.
pub fn outward_normal(shape: &LevelSetShape, p: Point, h: f64) -> Result<(f64, f64)> {
    let (gx, gy) = match &shape.grad {
        Some(g) => g(p.x, p.y),
        None => {
            let d = h / 100.0;
            (
                (shape.psi(p.x + d, p.y) - shape.psi(p.x - d, p.y)) / (2.0 * d),
                (shape.psi(p.x, p.y + d) - shape.psi(p.x, p.y - d)) / (2.0 * d),
            )
        }
    };
    let norm = (gx * gx + gy * gy).sqrt();
    if norm < 1e-10 {
        return Err(Error::DegenerateNormal(p.x, p.y));
    }
    Ok((gx / norm, gy / norm))
}

/// An axis-aligned open cell (x_lo, x_hi) x (y_lo, y_hi).
#[derive(Copy, Clone, Debug)]
pub struct CellRect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl CellRect {
    fn strictly_contains(&self, p: Point, clearance: f64) -> bool {
        p.x > self.x_lo + clearance
            && p.x < self.x_hi - clearance
            && p.y > self.y_lo + clearance
            && p.y < self.y_hi - clearance
    }
}

/// Moves a boundary point a short distance along the boundary curve into the
/// open support cell, so that basis derivatives can be evaluated there.
///
/// Starts at 1e-3 h along the tangent, re-roots onto the boundary along the
/// normal, and doubles the step up to 3 times if the result still sits on a
/// grid line.
pub fn nudge_into_cell(
    shape: &LevelSetShape,
    xb: Point,
    cell: CellRect,
    h: f64,
) -> Result<Point> {
    let (nx, ny) = outward_normal(shape, xb, h)?;
    let (tx, ty) = (-ny, nx);
    let clearance = 1e-12 * h;
    let mut delta = 1e-3 * h;
    for _ in 0..4 {
        for s in [1.0, -1.0] {
            let p = Point::new(xb.x + s * delta * tx, xb.y + s * delta * ty);
            // re-root onto the boundary along the normal direction
            let lo = Point::new(p.x - 2.0 * delta * nx, p.y - 2.0 * delta * ny);
            let hi = Point::new(p.x + 2.0 * delta * nx, p.y + 2.0 * delta * ny);
            if sgn(shape.psi(lo.x, lo.y)) == sgn(shape.psi(hi.x, hi.y)) {
                continue;
            }
            let q = bisect(shape, lo, hi, 0.0, 1.0, h)?;
            if cell.strictly_contains(q, clearance) {
                return Ok(q);
            }
        }
        delta *= 2.0;
    }
    Err(Error::Breakpoint(0.0))
}
