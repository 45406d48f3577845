//! Uniform auxiliary grid and the boundary-layer point sets: interior and
//! exterior node masks, the discrete grid boundary and its split, the
//! companion sets eta and omega, and the pairing of exterior boundary-layer
//! nodes with boundary intersection points.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::basis::Degree;
use crate::error::{Error, Result};
use crate::geometry::{LevelSetShape, LineAxis, Point, RawIntersection};

/// Discretization order of the centered stencils.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Order {
    Two,
    Four,
}

impl Order {
    pub fn stencil_radius(self) -> usize {
        match self {
            Order::Two => 1,
            Order::Four => 2,
        }
    }

    pub fn degree(self) -> Degree {
        match self {
            Order::Two => Degree::Linear,
            Order::Four => Degree::Cubic,
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Order::Two => 2,
            Order::Four => 4,
        }
    }

    pub fn from_int(v: u8) -> Result<Self> {
        match v {
            2 => Ok(Order::Two),
            4 => Ok(Order::Four),
            other => Err(Error::InvalidParameter(format!("order must be 2 or 4, got {other}"))),
        }
    }
}

/// Square auxiliary box with N interior nodes per axis.
///
/// Physical nodes are x_i = x0 + i h for i = 0..=N+1; the ring i = 0, N+1
/// carries the homogeneous Dirichlet value and is not an unknown.
#[derive(Copy, Clone, Debug)]
pub struct AuxGrid {
    pub x0: f64,
    pub y0: f64,
    pub n: usize,
    pub h: f64,
}

impl AuxGrid {
    pub fn build(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, n: usize) -> Result<Self> {
        let w = x_hi - x_lo;
        let hgt = y_hi - y_lo;
        if !(w > 0.0) || !(hgt > 0.0) {
            return Err(Error::InvalidParameter("degenerate bounds".into()));
        }
        if (w - hgt).abs() > 1e-12 * w.max(hgt) {
            return Err(Error::InvalidParameter(format!(
                "auxiliary bounds must be square, got {w} x {hgt}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one interior node".into()));
        }
        let h = w / (n as f64 + 1.0);
        Ok(AuxGrid { x0: x_lo, y0: y_lo, n, h })
    }

    pub fn x_hi(&self) -> f64 {
        self.x0 + (self.n as f64 + 1.0) * self.h
    }

    pub fn y_hi(&self) -> f64 {
        self.y0 + (self.n as f64 + 1.0) * self.h
    }

    /// Coordinate of physical node i (0..=N+1).
    pub fn phys_x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn phys_y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    /// Coordinate of interior node i (0-based, physical i+1).
    pub fn node_x(&self, i: usize) -> f64 {
        self.phys_x(i + 1)
    }

    pub fn node_y(&self, j: usize) -> f64 {
        self.phys_y(j + 1)
    }

    pub fn node_point(&self, node: Node) -> Point {
        Point::new(self.node_x(node.i), self.node_y(node.j))
    }

    /// Physical index a of the cell (x_a, x_{a+1}] containing `x`; a
    /// coordinate sitting exactly on a node belongs to the cell on its left.
    pub fn cell_left_of_x(&self, x: f64) -> i64 {
        cell_left(x, self.x0, self.h)
    }

    pub fn cell_left_of_y(&self, y: f64) -> i64 {
        cell_left(y, self.y0, self.h)
    }
}

fn cell_left(v: f64, origin: f64, h: f64) -> i64 {
    let t = (v - origin) / h;
    let r = t.round();
    if (t - r).abs() <= 1e-9 {
        r as i64 - 1
    } else {
        t.floor() as i64
    }
}

/// Interior grid node, 0-based in both axes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

impl Node {
    pub fn flat(&self, n: usize) -> usize {
        self.j * n + self.i
    }

    fn key(&self) -> (usize, usize) {
        (self.j, self.i)
    }
}

/// Real values on the N x N interior nodes, with an implicit zero ring.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub n: usize,
    pub v: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(n: usize) -> Self {
        GridFunction { n, v: vec![0.0; n * n] }
    }

    pub fn from_fn(grid: &AuxGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                v.push(f(grid.node_x(i), grid.node_y(j)));
            }
        }
        GridFunction { n, v }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, val: f64) {
        self.v[j * self.n + i] = val;
    }
}

/// A boundary intersection paired 1-to-1 with an exterior boundary-layer
/// node, carrying its support cell (physical indices) and layer tag.
#[derive(Copy, Clone, Debug)]
pub struct PairedIntersection {
    pub pos: Point,
    pub owner: Node,
    pub axis: LineAxis,
    pub layer: u8,
    /// Support cell (a, b): the cell [x_a, x_{a+1}] x [y_b, y_{b+1}].
    pub cell: (usize, usize),
    pub nudged: Option<Point>,
}

/// All point sets of one discretization: masks for the interior split,
/// stencil-dilated masks, the grid boundary gamma with its splits and layers,
/// and (after [`build_eta_omega`]) the companion sets and the zeta ordering.
pub struct PointSets {
    pub order: Order,
    pub n: usize,
    pub m_plus: Vec<bool>,
    pub n_plus: Vec<bool>,
    pub n_minus: Vec<bool>,
    pub gamma: Vec<Node>,
    pub gamma_mask: Vec<bool>,
    pub gamma_plus: Vec<Node>,
    pub gamma_minus: Vec<Node>,
    /// First layer: equals the exterior boundary layer of the 3x3-stencil
    /// classification. For order two this is all of gamma_minus.
    pub gamma_minus_l1: Vec<Node>,
    /// Second layer (order four only): gamma_minus minus the first layer.
    pub gamma_minus_l2: Vec<Node>,
    pub eta: Vec<Node>,
    pub omega: Vec<Node>,
    /// Concatenation (eta, gamma, omega).
    pub zeta: Vec<Node>,
    /// Flat node index -> position in zeta, or -1.
    pub zeta_index: Vec<i64>,
    /// Positions in zeta of the gamma_plus and omega nodes, ascending.
    pub zeta_plus: Vec<usize>,
}

impl PointSets {
    pub fn zeta_pos(&self, node: Node) -> Option<usize> {
        let v = self.zeta_index[node.flat(self.n)];
        (v >= 0).then_some(v as usize)
    }

    pub fn in_m_plus(&self, node: Node) -> bool {
        self.m_plus[node.flat(self.n)]
    }
}

/// Dilation by the cross-shaped operator stencil: offsets (+-l, 0) and
/// (0, +-l) for l <= r. The dimension-split centered operators only couple
/// along the axes, and the boundary-layer counting of the method (one
/// grid-line intersection per exterior layer node) relies on it.
fn dilate(mask: &[bool], n: usize, r: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    let ni = n as i64;
    for j in 0..ni {
        for i in 0..ni {
            if !mask[(j * ni + i) as usize] {
                continue;
            }
            for l in -(r as i64)..=r as i64 {
                if (0..ni).contains(&(i + l)) {
                    out[(j * ni + i + l) as usize] = true;
                }
                if (0..ni).contains(&(j + l)) {
                    out[((j + l) * ni + i) as usize] = true;
                }
            }
        }
    }
    out
}

fn collect_nodes(mask: impl Fn(usize, usize) -> bool, n: usize) -> Vec<Node> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if mask(i, j) {
                out.push(Node { i, j });
            }
        }
    }
    out
}

/// Classifies every interior node and derives the boundary-layer sets from
/// square (2n+1)^2 stencil dilations of the interior/exterior masks.
pub fn classify_points(grid: &AuxGrid, shape: &LevelSetShape, order: Order) -> Result<PointSets> {
    let n = grid.n;
    let r = order.stencil_radius();
    let mut m_plus = vec![false; n * n];
    for j in 0..n {
        for i in 0..n {
            m_plus[j * n + i] = shape.is_inside(grid.node_x(i), grid.node_y(j));
        }
    }
    if !m_plus.iter().any(|&b| b) {
        return Err(Error::EmptyInterior);
    }
    let m_minus: Vec<bool> = m_plus.iter().map(|&b| !b).collect();
    let n_plus = dilate(&m_plus, n, r);
    let n_minus = dilate(&m_minus, n, r);

    // the stencils of interior-domain nodes must stay inside the box
    for j in 0..n {
        for i in 0..n {
            if m_plus[j * n + i] && (i < r || i + r >= n || j < r || j + r >= n) {
                return Err(Error::DomainMargin(format!(
                    "interior node ({}, {}) is within the stencil radius of the box edge",
                    grid.node_x(i),
                    grid.node_y(j)
                )));
            }
        }
    }

    let gamma = collect_nodes(|i, j| n_plus[j * n + i] && n_minus[j * n + i], n);
    let mut gamma_mask = vec![false; n * n];
    for g in &gamma {
        gamma_mask[g.flat(n)] = true;
    }
    let gamma_plus: Vec<Node> = gamma.iter().copied().filter(|g| m_plus[g.flat(n)]).collect();
    let gamma_minus: Vec<Node> = gamma.iter().copied().filter(|g| !m_plus[g.flat(n)]).collect();

    let (gamma_minus_l1, gamma_minus_l2) = match order {
        Order::Two => (gamma_minus.clone(), Vec::new()),
        Order::Four => {
            let np1 = dilate(&m_plus, n, 1);
            let nm1 = dilate(&m_minus, n, 1);
            let l1: Vec<Node> = gamma_minus
                .iter()
                .copied()
                .filter(|g| np1[g.flat(n)] && nm1[g.flat(n)])
                .collect();
            let l1_set: HashSet<Node> = l1.iter().copied().collect();
            let l2: Vec<Node> =
                gamma_minus.iter().copied().filter(|g| !l1_set.contains(g)).collect();
            (l1, l2)
        }
    };

    Ok(PointSets {
        order,
        n,
        m_plus,
        n_plus,
        n_minus,
        gamma,
        gamma_mask,
        gamma_plus,
        gamma_minus,
        gamma_minus_l1,
        gamma_minus_l2,
        eta: Vec::new(),
        omega: Vec::new(),
        zeta: Vec::new(),
        zeta_index: Vec::new(),
        zeta_plus: Vec::new(),
    })
}

/// Checks that the boundary curve keeps at least (n+1) h distance from the
/// auxiliary box, where n is the stencil radius.
pub fn validate_margin(grid: &AuxGrid, raw: &[RawIntersection], order: Order) -> Result<()> {
    let need = (order.stencil_radius() as f64 + 1.0) * grid.h;
    for r in raw {
        let d = (r.pos.x - grid.x0)
            .min(grid.x_hi() - r.pos.x)
            .min(r.pos.y - grid.y0)
            .min(grid.y_hi() - r.pos.y);
        if d < need {
            return Err(Error::DomainMargin(format!(
                "boundary point ({}, {}) is {d:.4} from the box edge, need {need:.4}",
                r.pos.x, r.pos.y
            )));
        }
    }
    Ok(())
}

/// Support cell of an intersection point: the cell to the left of a point on
/// a vertical line, below for a horizontal line; at a node, left and below.
pub fn support_cell(
    pos: Point,
    axis: LineAxis,
    line: usize,
    grid: &AuxGrid,
) -> Result<(usize, usize)> {
    let (a, b) = match axis {
        LineAxis::Vertical => (line as i64 - 1, grid.cell_left_of_y(pos.y)),
        LineAxis::Horizontal => (grid.cell_left_of_x(pos.x), line as i64 - 1),
    };
    let max = grid.n as i64;
    if a < 0 || a > max || b < 0 || b > max {
        return Err(Error::Pairing(format!(
            "support cell of ({}, {}) falls outside the box",
            pos.x, pos.y
        )));
    }
    Ok((a as usize, b as usize))
}

struct LineIndex {
    horizontal: BTreeMap<usize, Vec<usize>>,
    vertical: BTreeMap<usize, Vec<usize>>,
}

impl LineIndex {
    fn build(raw: &[RawIntersection]) -> Self {
        let mut horizontal: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut vertical: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, r) in raw.iter().enumerate() {
            match r.axis {
                LineAxis::Horizontal => horizontal.entry(r.line).or_default().push(k),
                LineAxis::Vertical => vertical.entry(r.line).or_default().push(k),
            }
        }
        LineIndex { horizontal, vertical }
    }

    /// Intersections on the two grid lines through `node`, sorted by
    /// distance with deterministic tie-breaking (horizontal line first,
    /// then smaller coordinates).
    fn candidates(&self, node: Node, p: Point, raw: &[RawIntersection]) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        if let Some(list) = self.horizontal.get(&(node.j + 1)) {
            out.extend(list.iter().map(|&k| (p.dist(raw[k].pos), k)));
        }
        if let Some(list) = self.vertical.get(&(node.i + 1)) {
            out.extend(list.iter().map(|&k| (p.dist(raw[k].pos), k)));
        }
        out.sort_by(|a, b| {
            let ka = sort_key(a.0, &raw[a.1]);
            let kb = sort_key(b.0, &raw[b.1]);
            ka.partial_cmp(&kb).unwrap()
        });
        out
    }
}

fn sort_key(dist: f64, r: &RawIntersection) -> (f64, u8, f64, f64) {
    let axis_rank = match r.axis {
        LineAxis::Horizontal => 0,
        LineAxis::Vertical => 1,
    };
    (dist, axis_rank, r.pos.x, r.pos.y)
}

/// Pairs every exterior boundary-layer node with one intersection point.
///
/// Layer-1 nodes take their nearest intersection on their own grid lines;
/// layer-2 nodes likewise, and may share a point with a layer-1 record but
/// not with another layer-2 record. A layer-2 node whose lines carry no
/// intersection within stencil reach borrows the point of its nearest
/// layer-1 neighbor.
pub fn pair_intersections(
    sets: &PointSets,
    raw: &[RawIntersection],
    grid: &AuxGrid,
) -> Result<Vec<PairedIntersection>> {
    let index = LineIndex::build(raw);
    let reach = sets.order.stencil_radius() as f64 * grid.h * (1.0 + 1e-9);
    let mut records = Vec::with_capacity(sets.gamma_minus.len());

    let mut claimed_l1: HashSet<usize> = HashSet::new();
    let l1_pairs = match_layer(
        &sets.gamma_minus_l1,
        raw,
        &index,
        grid,
        reach,
        &mut claimed_l1,
        None,
    )?;
    for &(owner, k) in &l1_pairs {
        records.push(make_record(owner, k, raw, grid, 1)?);
    }

    if !sets.gamma_minus_l2.is_empty() {
        let mut claimed_l2: HashSet<usize> = HashSet::new();
        let l2_pairs = match_layer(
            &sets.gamma_minus_l2,
            raw,
            &index,
            grid,
            reach,
            &mut claimed_l2,
            Some(&l1_pairs),
        )?;
        for &(owner, k) in &l2_pairs {
            records.push(make_record(owner, k, raw, grid, 2)?);
        }
    }
    Ok(records)
}

fn make_record(
    owner: Node,
    k: usize,
    raw: &[RawIntersection],
    grid: &AuxGrid,
    layer: u8,
) -> Result<PairedIntersection> {
    let r = &raw[k];
    let cell = support_cell(r.pos, r.axis, r.line, grid)?;
    Ok(PairedIntersection { pos: r.pos, owner, axis: r.axis, layer, cell, nudged: None })
}

fn match_layer(
    points: &[Node],
    raw: &[RawIntersection],
    index: &LineIndex,
    grid: &AuxGrid,
    reach: f64,
    claimed: &mut HashSet<usize>,
    borrow_from: Option<&[(Node, usize)]>,
) -> Result<Vec<(Node, usize)>> {
    // points with fewer in-reach options claim first
    let mut order: Vec<(usize, Node, Vec<(f64, usize)>)> = points
        .iter()
        .map(|&p| {
            let cands = index.candidates(p, grid.node_point(p), raw);
            let in_reach = cands.iter().filter(|c| c.0 <= reach).count();
            (in_reach, p, cands)
        })
        .collect();
    order.sort_by_key(|(cnt, p, _)| (*cnt, p.key()));

    let mut pairs = Vec::with_capacity(points.len());
    for (_, p, cands) in order {
        let pp = grid.node_point(p);
        let mut pick = cands
            .iter()
            .find(|(d, k)| *d <= reach && !claimed.contains(k))
            .map(|&(_, k)| k);
        if pick.is_none() {
            // borrow the point paired with the nearest layer-1 neighbor
            if let Some(l1) = borrow_from {
                pick = l1
                    .iter()
                    .filter(|(_, k)| !claimed.contains(k))
                    .min_by(|(a, _), (b, _)| {
                        let da = pp.dist(grid.node_point(*a));
                        let db = pp.dist(grid.node_point(*b));
                        da.partial_cmp(&db).unwrap().then(a.key().cmp(&b.key()))
                    })
                    .map(|&(_, k)| k);
            }
        }
        if pick.is_none() {
            pick = cands.iter().find(|(_, k)| !claimed.contains(k)).map(|&(_, k)| k);
        }
        if pick.is_none() {
            // nearest unclaimed intersection anywhere
            let mut best: Option<(f64, usize)> = None;
            for (k, r) in raw.iter().enumerate() {
                if claimed.contains(&k) {
                    continue;
                }
                let d = pp.dist(r.pos);
                if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                    best = Some((d, k));
                }
            }
            pick = best.map(|(_, k)| k);
        }
        let k = pick.ok_or_else(|| {
            Error::Pairing(format!(
                "no intersection available for boundary-layer node ({}, {})",
                grid.node_x(p.i),
                grid.node_y(p.j)
            ))
        })?;
        claimed.insert(k);
        pairs.push((p, k));
    }
    Ok(pairs)
}

/// Builds eta and omega from the support cells of the paired intersections
/// and fixes the zeta ordering (eta, gamma, omega).
pub fn build_eta_omega(
    sets: &mut PointSets,
    pairs: &[PairedIntersection],
    grid: &AuxGrid,
) -> Result<()> {
    let n = grid.n;
    let cells: BTreeSet<(usize, usize)> = pairs.iter().map(|p| p.cell).collect();
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(a, b) in &cells {
        let (lo, hi): (i64, i64) = match sets.order {
            Order::Two => (0, 1),
            Order::Four => (-1, 2),
        };
        for dj in lo..=hi {
            for di in lo..=hi {
                let pi = a as i64 + di;
                let pj = b as i64 + dj;
                // convert physical -> interior
                if pi < 1 || pj < 1 || pi > n as i64 || pj > n as i64 {
                    return Err(Error::StencilRange(format!(
                        "basis node of support cell ({a}, {b}) leaves the interior"
                    )));
                }
                candidates.insert(((pj - 1) as usize, (pi - 1) as usize));
            }
        }
    }
    let mut eta = Vec::new();
    let mut omega = Vec::new();
    for &(j, i) in &candidates {
        let node = Node { i, j };
        if sets.gamma_mask[node.flat(n)] {
            continue;
        }
        if sets.m_plus[node.flat(n)] {
            omega.push(node);
        } else {
            eta.push(node);
        }
    }
    sets.eta = eta;
    sets.omega = omega;
    sets.zeta = Vec::with_capacity(sets.eta.len() + sets.gamma.len() + sets.omega.len());
    sets.zeta.extend_from_slice(&sets.eta);
    sets.zeta.extend_from_slice(&sets.gamma);
    sets.zeta.extend_from_slice(&sets.omega);
    sets.zeta_index = vec![-1; n * n];
    for (k, z) in sets.zeta.iter().enumerate() {
        sets.zeta_index[z.flat(n)] = k as i64;
    }
    sets.zeta_plus = Vec::with_capacity(sets.gamma_plus.len() + sets.omega.len());
    for (k, z) in sets.zeta.iter().enumerate() {
        let in_gamma = sets.gamma_mask[z.flat(n)];
        let in_omega = k >= sets.eta.len() + sets.gamma.len();
        if (in_gamma && sets.m_plus[z.flat(n)]) || in_omega {
            sets.zeta_plus.push(k);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{grid_line_intersections, make_circle, make_ellipse, make_preset_triangle};

    #[test]
    fn grid_conventions() {
        let g = AuxGrid::build(-1.2, 1.2, -1.2, 1.2, 63).unwrap();
        assert!((g.h - 2.4 / 64.0).abs() < 1e-15);
        let g1 = AuxGrid::build(0.0, 2.0, 0.0, 2.0, 1).unwrap();
        assert_eq!(g1.h, 1.0);
        assert_eq!(g1.node_x(0), 1.0);
        assert!(matches!(
            AuxGrid::build(0.0, 2.0, 0.0, 1.0, 8),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn cell_left_rule() {
        let g = AuxGrid::build(0.0, 1.0, 0.0, 1.0, 9).unwrap();
        // strictly inside a cell
        assert_eq!(g.cell_left_of_x(0.35), 3);
        // exactly on a node: the cell on the left
        assert_eq!(g.cell_left_of_x(0.3), 2);
    }

    #[test]
    fn support_cell_rules() {
        let g = AuxGrid::build(0.0, 1.0, 0.0, 1.0, 9).unwrap();
        // point on the vertical line x = x_4, strictly between nodes in y
        let c = support_cell(Point::new(0.4, 0.33), LineAxis::Vertical, 4, &g).unwrap();
        assert_eq!(c, (3, 3));
        // point on the horizontal line y = y_4
        let c = support_cell(Point::new(0.33, 0.4), LineAxis::Horizontal, 4, &g).unwrap();
        assert_eq!(c, (3, 3));
        // point at a cell corner: left-below cell in both axes
        let c = support_cell(Point::new(0.4, 0.3), LineAxis::Vertical, 4, &g).unwrap();
        assert_eq!(c, (3, 2));
    }

    fn full_sets(
        shape: &LevelSetShape,
        grid: &AuxGrid,
        order: Order,
    ) -> (PointSets, Vec<PairedIntersection>) {
        let raw = grid_line_intersections(shape, grid).unwrap();
        validate_margin(grid, &raw, order).unwrap();
        let mut sets = classify_points(grid, shape, order).unwrap();
        let pairs = pair_intersections(&sets, &raw, grid).unwrap();
        build_eta_omega(&mut sets, &pairs, grid).unwrap();
        (sets, pairs)
    }

    /// gamma = N+ intersect N-, re-derived by brute-force enumeration of the
    /// operator stencils from the interior mask.
    #[test]
    fn gamma_matches_bruteforce() {
        for order in [Order::Two, Order::Four] {
            for n in [32usize, 64, 128] {
                let shape = make_circle();
                let grid = AuxGrid::build(-1.2, 1.2, -1.2, 1.2, n).unwrap();
                let sets = classify_points(&grid, &shape, order).unwrap();
                let r = order.stencil_radius() as i64;
                let mut expect = Vec::new();
                for j in 0..n as i64 {
                    for i in 0..n as i64 {
                        let mut near_plus = false;
                        let mut near_minus = false;
                        for l in -r..=r {
                            for (ii, jj) in [(i + l, j), (i, j + l)] {
                                if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                                    continue;
                                }
                                if sets.m_plus[(jj as usize) * n + ii as usize] {
                                    near_plus = true;
                                } else {
                                    near_minus = true;
                                }
                            }
                        }
                        if near_plus && near_minus {
                            expect.push(Node { i: i as usize, j: j as usize });
                        }
                    }
                }
                assert_eq!(sets.gamma, expect, "order {order:?} n {n}");
            }
        }
    }

    #[test]
    fn empty_interior_is_an_error() {
        let shape = make_circle();
        let grid = AuxGrid::build(10.0, 12.0, 10.0, 12.0, 16).unwrap();
        assert!(matches!(
            classify_points(&grid, &shape, Order::Two),
            Err(Error::EmptyInterior)
        ));
    }

    #[test]
    fn o4_layers_match_o2_classification() {
        let shape = make_circle();
        let grid = AuxGrid::build(-1.2, 1.2, -1.2, 1.2, 48).unwrap();
        let o4 = classify_points(&grid, &shape, Order::Four).unwrap();
        let o2 = classify_points(&grid, &shape, Order::Two).unwrap();
        assert_eq!(o4.gamma_minus_l1, o2.gamma_minus);
        let l1: HashSet<Node> = o4.gamma_minus_l1.iter().copied().collect();
        assert!(o4.gamma_minus_l2.iter().all(|g| !l1.contains(g)));
        assert_eq!(
            o4.gamma_minus_l1.len() + o4.gamma_minus_l2.len(),
            o4.gamma_minus.len()
        );
    }

    #[test]
    fn zeta_structure_and_pairing() {
        for order in [Order::Two, Order::Four] {
            for shape in [make_circle(), make_ellipse(4.0).unwrap()] {
                let grid = AuxGrid::build(-1.2, 1.2, -1.2, 1.2, 48).unwrap();
                let (sets, pairs) = full_sets(&shape, &grid, order);

                // zeta = disjoint union
                assert_eq!(
                    sets.zeta.len(),
                    sets.eta.len() + sets.gamma.len() + sets.omega.len()
                );
                let uniq: HashSet<Node> = sets.zeta.iter().copied().collect();
                assert_eq!(uniq.len(), sets.zeta.len());

                // eta never touches N+
                for e in &sets.eta {
                    assert!(!sets.n_plus[e.flat(sets.n)], "eta in N+ ({e:?})");
                }
                // omega inside, eta outside
                assert!(sets.omega.iter().all(|o| sets.m_plus[o.flat(sets.n)]));
                assert!(sets.eta.iter().all(|e| !sets.m_plus[e.flat(sets.n)]));

                // pairing is a bijection over both layers
                assert_eq!(
                    pairs.len(),
                    sets.gamma_minus_l1.len() + sets.gamma_minus_l2.len()
                );
                let owners: HashSet<(usize, usize, u8)> =
                    pairs.iter().map(|p| (p.owner.i, p.owner.j, p.layer)).collect();
                assert_eq!(owners.len(), pairs.len());
                // within a layer, claimed points are distinct
                for layer in [1u8, 2] {
                    let pts: Vec<(u64, u64)> = pairs
                        .iter()
                        .filter(|p| p.layer == layer)
                        .map(|p| (p.pos.x.to_bits(), p.pos.y.to_bits()))
                        .collect();
                    let uniq: HashSet<_> = pts.iter().collect();
                    assert_eq!(uniq.len(), pts.len(), "layer {layer} duplicates");
                }

                // support-cell completeness: the covering node block of every
                // support cell is contained in zeta
                let span: i64 = match order {
                    Order::Two => 0,
                    Order::Four => 1,
                };
                for p in &pairs {
                    for dj in -span..=1 + span {
                        for di in -span..=1 + span {
                            let pi = p.cell.0 as i64 + di;
                            let pj = p.cell.1 as i64 + dj;
                            let node = Node { i: (pi - 1) as usize, j: (pj - 1) as usize };
                            assert!(
                                sets.zeta_pos(node).is_some(),
                                "covering node {node:?} of cell {:?} missing",
                                p.cell
                            );
                        }
                    }
                }

                // zeta_plus = gamma_plus then omega, ascending
                assert_eq!(sets.zeta_plus.len(), sets.gamma_plus.len() + sets.omega.len());
                assert!(sets.zeta_plus.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn triangle_sets_build() {
        let shape = make_preset_triangle();
        let grid = AuxGrid::build(-1.1, 1.1, -1.1, 1.1, 64).unwrap();
        for order in [Order::Two, Order::Four] {
            let (sets, pairs) = full_sets(&shape, &grid, order);
            assert_eq!(pairs.len(), sets.gamma_minus.len());
            assert_eq!(sets.zeta.len(), sets.eta.len() + sets.gamma.len() + sets.omega.len());
        }
    }
}
