//! Fast direct solver for the auxiliary problem (lap - sigma) u = q on the
//! square, for the second- and fourth-order centered stencils.
//!
//! Both operators are diagonalized by the type-I discrete sine transform
//! under homogeneous Dirichlet conditions; the wide fourth-order stencil
//! closes its ghost points antisymmetrically (u(-x) = -u(x) about the
//! boundary line), which keeps the sine vectors exact eigenvectors. The same
//! closure is baked into [`SpectralPlan::lap_at`], and a test pins the two
//! sites against each other.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Node, Order};

/// Entries of the sine matrix S_{jk} = sin(jk pi / (N+1)), 1-based j, k.
fn sine_entry(j: usize, k: usize, n: usize) -> f64 {
    ((j * k) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin()
}

/// Direct O(N^2) sine transform, the oracle for the FFT path.
pub fn dst_direct(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (1..=n)
        .map(|j| (1..=n).map(|k| sine_entry(j, k, n) * v[k - 1]).sum())
        .collect()
}

/// Type-I sine transform plan: dense multiplication for small N, odd
/// extension through a complex FFT otherwise.
pub struct Dst {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    table: Option<Vec<f64>>,
}

const DIRECT_LIMIT: usize = 64;

impl Dst {
    pub fn new(n: usize) -> Self {
        let m = 2 * (n + 1);
        let fft = FftPlanner::new().plan_fft_forward(m);
        let table = (n <= DIRECT_LIMIT).then(|| {
            let mut t = vec![0.0; n * n];
            for j in 1..=n {
                for k in 1..=n {
                    t[(j - 1) * n + (k - 1)] = sine_entry(j, k, n);
                }
            }
            t
        });
        Dst { n, fft, table }
    }

    pub fn scratch(&self) -> DstScratch {
        let m = 2 * (self.n + 1);
        DstScratch {
            buf: vec![Complex::new(0.0, 0.0); m],
            fft_scratch: vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()],
            tmp: vec![0.0; self.n],
        }
    }

    /// In-place S v.
    pub fn apply(&self, v: &mut [f64], scratch: &mut DstScratch) {
        debug_assert_eq!(v.len(), self.n);
        if let Some(table) = &self.table {
            let n = self.n;
            for j in 0..n {
                let row = &table[j * n..(j + 1) * n];
                scratch.tmp[j] = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            }
            v.copy_from_slice(&scratch.tmp);
            return;
        }
        let n = self.n;
        let m = 2 * (n + 1);
        let buf = &mut scratch.buf;
        buf[0] = Complex::new(0.0, 0.0);
        buf[n + 1] = Complex::new(0.0, 0.0);
        for k in 1..=n {
            buf[k] = Complex::new(v[k - 1], 0.0);
            buf[m - k] = Complex::new(-v[k - 1], 0.0);
        }
        self.fft.process_with_scratch(buf, &mut scratch.fft_scratch);
        for j in 1..=n {
            v[j - 1] = -0.5 * buf[j].im;
        }
    }
}

pub struct DstScratch {
    buf: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
    tmp: Vec<f64>,
}

/// One-shot sine transform of a vector.
pub fn dst(v: &[f64]) -> Vec<f64> {
    let plan = Dst::new(v.len());
    let mut out = v.to_vec();
    plan.apply(&mut out, &mut plan.scratch());
    out
}

/// Eigenvalue of the dimensionless 1D stencil matrix for mode j (1-based).
pub fn eigenvalue(order: Order, j: usize, n: usize) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!("mode index {j} out of 1..={n}")));
    }
    let c = ((j as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
    Ok(match order {
        Order::Two => 2.0 * (c - 1.0),
        Order::Four => -(c - 1.0) * (c - 7.0) / 3.0,
    })
}

/// Per-axis stencil weights of the dimensionless operator.
pub fn stencil_weights(order: Order) -> &'static [f64] {
    match order {
        Order::Two => &[1.0, -2.0, 1.0],
        Order::Four => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
    }
}

/// Value of a grid function at 1D index k (which may leave the interior),
/// under the homogeneous Dirichlet ring and antisymmetric ghost closure.
/// Returns (interior index, sign); sign 0 encodes a ring zero.
#[inline]
fn reflect(k: i64, n: i64) -> (usize, f64) {
    if (0..n).contains(&k) {
        (k as usize, 1.0)
    } else if k == -1 || k == n {
        (0, 0.0)
    } else if k == -2 {
        (0, -1.0)
    } else if k == n + 1 {
        ((n - 1) as usize, -1.0)
    } else {
        unreachable!("stencil reaches past the reflected range")
    }
}

/// Spectral solver plan for (lap_h - sigma) on the N x N interior.
pub struct SpectralPlan {
    pub n: usize,
    pub order: Order,
    pub h: f64,
    pub sigma: f64,
    eig: Vec<f64>,
    dst: Dst,
}

impl SpectralPlan {
    pub fn new(n: usize, order: Order, h: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reaction coefficient must be nonnegative, got {sigma}"
            )));
        }
        let eig = (1..=n).map(|j| eigenvalue(order, j, n)).collect::<Result<Vec<_>>>()?;
        Ok(SpectralPlan { n, order, h, sigma, eig, dst: Dst::new(n) })
    }

    fn dst_2d(&self, v: &mut [f64], scratch: &mut DstScratch) {
        let n = self.n;
        for row in v.chunks_exact_mut(n) {
            self.dst.apply(row, scratch);
        }
        transpose_square(v, n);
        for row in v.chunks_exact_mut(n) {
            self.dst.apply(row, scratch);
        }
        transpose_square(v, n);
    }

    /// Solves (lap_h - sigma I) u = q with the auxiliary boundary conditions;
    /// exact in spectral space.
    pub fn solve(&self, q: &GridFunction) -> GridFunction {
        let n = self.n;
        let mut w = q.v.clone();
        let mut scratch = self.dst.scratch();
        self.dst_2d(&mut w, &mut scratch);
        let c = 2.0 / (n as f64 + 1.0);
        let scale = c * c;
        let h2 = self.h * self.h;
        for j in 0..n {
            for i in 0..n {
                let denom = (self.eig[i] + self.eig[j]) / h2 - self.sigma;
                w[j * n + i] *= scale / denom;
            }
        }
        self.dst_2d(&mut w, &mut scratch);
        GridFunction { n, v: w }
    }

    /// (lap_h - sigma) u at one interior node, reading ghosts through the
    /// antisymmetric closure. Must agree with the matrix the solver inverts.
    pub fn lap_at(&self, u: &GridFunction, i: usize, j: usize) -> f64 {
        let n = self.n as i64;
        let w = stencil_weights(self.order);
        let r = self.order.stencil_radius() as i64;
        let h2 = self.h * self.h;
        let mut acc = 0.0;
        for (t, &wt) in w.iter().enumerate() {
            let o = t as i64 - r;
            let (ix, sx) = reflect(i as i64 + o, n);
            if sx != 0.0 {
                acc += wt * sx * u.at(ix, j);
            }
            let (jy, sy) = reflect(j as i64 + o, n);
            if sy != 0.0 {
                acc += wt * sy * u.at(i, jy);
            }
        }
        acc / h2 - self.sigma * u.at(i, j)
    }

    /// Operator application at a set of nodes.
    pub fn apply_lh(&self, u: &GridFunction, at: &[Node]) -> Result<Vec<f64>> {
        if self.n < self.order.stencil_radius() {
            return Err(Error::StencilRange(format!(
                "grid of {} nodes cannot host a radius-{} stencil",
                self.n,
                self.order.stencil_radius()
            )));
        }
        Ok(at.iter().map(|p| self.lap_at(u, p.i, p.j)).collect())
    }
}

fn transpose_square(v: &mut [f64], n: usize) {
    for j in 0..n {
        for i in 0..j {
            v.swap(j * n + i, i * n + j);
        }
    }
}

/// 1D analogue of [`SpectralPlan`].
pub struct SpectralPlan1d {
    pub n: usize,
    pub order: Order,
    pub h: f64,
    pub sigma: f64,
    eig: Vec<f64>,
    dst: Dst,
}

impl SpectralPlan1d {
    pub fn new(n: usize, order: Order, h: f64, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reaction coefficient must be nonnegative, got {sigma}"
            )));
        }
        let eig = (1..=n).map(|j| eigenvalue(order, j, n)).collect::<Result<Vec<_>>>()?;
        Ok(SpectralPlan1d { n, order, h, sigma, eig, dst: Dst::new(n) })
    }

    pub fn solve(&self, q: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut w = q.to_vec();
        let mut scratch = self.dst.scratch();
        self.dst.apply(&mut w, &mut scratch);
        let scale = 2.0 / (n as f64 + 1.0);
        let h2 = self.h * self.h;
        for (x, lam) in w.iter_mut().zip(&self.eig) {
            *x *= scale / (lam / h2 - self.sigma);
        }
        self.dst.apply(&mut w, &mut scratch);
        w
    }

    pub fn lap_at(&self, u: &[f64], i: usize) -> f64 {
        let n = self.n as i64;
        let w = stencil_weights(self.order);
        let r = self.order.stencil_radius() as i64;
        let mut acc = 0.0;
        for (t, &wt) in w.iter().enumerate() {
            let (ix, s) = reflect(i as i64 + t as i64 - r, n);
            if s != 0.0 {
                acc += wt * s * u[ix];
            }
        }
        acc / (self.h * self.h) - self.sigma * u[i]
    }
}

/// The 1D stencil matrix assembled exactly in its printed form: the
/// five-band (or three-band) Toeplitz part plus the (1/12) corner
/// corrections from the antisymmetric closure. Dimensionless (no 1/h^2).
pub fn dense_k1d(order: Order, n: usize) -> faer::Mat<f64> {
    let w = stencil_weights(order);
    let r = order.stencil_radius() as i64;
    let mut k = faer::Mat::zeros(n, n);
    for row in 0..n as i64 {
        for (t, &wt) in w.iter().enumerate() {
            let col = row + t as i64 - r;
            if (0..n as i64).contains(&col) {
                k[(row as usize, col as usize)] += wt;
            }
        }
    }
    if order == Order::Four {
        k[(0, 0)] += 1.0 / 12.0;
        k[(n - 1, n - 1)] += 1.0 / 12.0;
    }
    k
}

/// Dense (lap_h - sigma I) over the N^2 interior, built from [`dense_k1d`]
/// by the Kronecker sum; the oracle the fast solver is tested against.
pub fn dense_operator_2d(order: Order, n: usize, h: f64, sigma: f64) -> faer::Mat<f64> {
    let k1 = dense_k1d(order, n);
    let h2 = h * h;
    let nn = n * n;
    let mut a = faer::Mat::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            a[(row, row)] -= sigma;
            for c in 0..n {
                let kx = k1[(i, c)];
                if kx != 0.0 {
                    a[(row, j * n + c)] += kx / h2;
                }
                let ky = k1[(j, c)];
                if ky != 0.0 {
                    a[(row, c * n + i)] += ky / h2;
                }
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn dst_small_values() {
        // S entries sin(pi/3), sin(2pi/3) for N = 2
        let out = dst(&[1.0, 0.0]);
        let s = 3.0f64.sqrt() / 2.0;
        assert!((out[0] - s).abs() < 1e-14);
        assert!((out[1] - s).abs() < 1e-14);
        assert!(dst(&[0.0; 5]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dst_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [3usize, 17, 64, 129] {
            let v = rand_vec(n, &mut rng);
            let twice = dst(&dst(&v));
            let scale = 2.0 / (n as f64 + 1.0);
            for (a, b) in twice.iter().zip(&v) {
                assert!((scale * a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fft_path_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [65usize, 100, 255] {
            let v = rand_vec(n, &mut rng);
            let plan = Dst::new(n);
            assert!(plan.table.is_none());
            let mut fast = v.clone();
            plan.apply(&mut fast, &mut plan.scratch());
            let slow = dst_direct(&v);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12 * slow.iter().fold(1.0f64, |m, x| m.max(x.abs())));
            }
        }
        // and the direct path is the table path for small n
        let v = rand_vec(31, &mut rng);
        let plan = Dst::new(31);
        assert!(plan.table.is_some());
        let mut fast = v.clone();
        plan.apply(&mut fast, &mut plan.scratch());
        for (a, b) in fast.iter().zip(&dst_direct(&v)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_closed_forms() {
        assert!((eigenvalue(Order::Two, 2, 3).unwrap() - (-2.0)).abs() < 1e-15);
        assert!((eigenvalue(Order::Four, 2, 3).unwrap() - (-7.0 / 3.0)).abs() < 1e-15);
        assert!(eigenvalue(Order::Two, 0, 3).is_err());
        assert!(eigenvalue(Order::Two, 4, 3).is_err());
        for order in [Order::Two, Order::Four] {
            for n in [1usize, 7, 31] {
                for j in 1..=n {
                    assert!(eigenvalue(order, j, n).unwrap() < 0.0);
                }
            }
        }
    }

    /// K_1d S_col(j) = lambda_j S_col(j) with the matrix assembled exactly
    /// in its printed form.
    #[test]
    fn eigen_relation() {
        for order in [Order::Two, Order::Four] {
            for n in [7usize, 15, 31] {
                let k = dense_k1d(order, n);
                for j in 1..=n {
                    let lam = eigenvalue(order, j, n).unwrap();
                    let col: Vec<f64> = (1..=n).map(|i| sine_entry(i, j, n)).collect();
                    for row in 0..n {
                        let kv: f64 = (0..n).map(|c| k[(row, c)] * col[c]).sum();
                        assert!(
                            (kv - lam * col[row]).abs() <= 1e-10,
                            "order {order:?} n {n} mode {j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn solve_scalar_case() {
        // N = 1, O2, sigma = 0 in 1D: -2u/h^2 = 1 so u = -h^2/2
        let h = 0.5;
        let plan = SpectralPlan1d::new(1, Order::Two, h, 0.0).unwrap();
        let u = plan.solve(&[1.0]);
        assert!((u[0] + h * h / 2.0).abs() < 1e-14);
        // the 2D operator doubles the diagonal: u = -h^2/4
        let plan2 = SpectralPlan::new(1, Order::Two, h, 0.0).unwrap();
        let u2 = plan2.solve(&GridFunction { n: 1, v: vec![1.0] });
        assert!((u2.v[0] + h * h / 4.0).abs() < 1e-14);
    }

    #[test]
    fn solve_recovers_eigenmode() {
        for order in [Order::Two, Order::Four] {
            let n = 24;
            let h = 0.1;
            let sigma = 1.5;
            let plan = SpectralPlan::new(n, order, h, sigma).unwrap();
            let (jm, km) = (3usize, 5usize);
            let lam = (eigenvalue(order, jm, n).unwrap() + eigenvalue(order, km, n).unwrap())
                / (h * h)
                - sigma;
            let mode = GridFunction {
                n,
                v: (0..n * n)
                    .map(|f| {
                        let (i, j) = (f % n, f / n);
                        sine_entry(i + 1, jm, n) * sine_entry(j + 1, km, n)
                    })
                    .collect(),
            };
            let q = GridFunction { n, v: mode.v.iter().map(|&m| lam * m).collect() };
            let u = plan.solve(&q);
            for (a, b) in u.v.iter().zip(&mode.v) {
                assert!((a - b).abs() < 1e-11);
            }
            // lap_at reproduces the eigen relation
            for i in 0..n {
                for j in 0..n {
                    let lv = plan.lap_at(&mode, i, j);
                    assert!((lv - lam * mode.at(i, j)).abs() < 1e-9 / (h * h));
                }
            }
        }
    }

    #[test]
    fn solve_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for order in [Order::Two, Order::Four] {
            for sigma in [0.0, 1.0, 100.0] {
                let n = 15;
                let h = 2.4 / (n as f64 + 1.0);
                let plan = SpectralPlan::new(n, order, h, sigma).unwrap();
                let q = GridFunction { n, v: rand_vec(n * n, &mut rng) };
                let fast = plan.solve(&q);
                let a = dense_operator_2d(order, n, h, sigma);
                let rhs = Mat::from_fn(n * n, 1, |r, _| q.v[r]);
                let dense = a.partial_piv_lu().solve(&rhs);
                for r in 0..n * n {
                    assert!(
                        (fast.v[r] - dense[(r, 0)]).abs() <= 1e-11,
                        "order {order:?} sigma {sigma}"
                    );
                }
            }
        }
    }

    #[test]
    fn solve_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 20;
        let plan = SpectralPlan::new(n, Order::Four, 0.05, 2.0).unwrap();
        let q1 = GridFunction { n, v: rand_vec(n * n, &mut rng) };
        let q2 = GridFunction { n, v: rand_vec(n * n, &mut rng) };
        let (a, b) = (0.7, -1.3);
        let mix = GridFunction {
            n,
            v: q1.v.iter().zip(&q2.v).map(|(x, y)| a * x + b * y).collect(),
        };
        let u_mix = plan.solve(&mix);
        let (u1, u2) = (plan.solve(&q1), plan.solve(&q2));
        for r in 0..n * n {
            assert!((u_mix.v[r] - (a * u1.v[r] + b * u2.v[r])).abs() < 1e-12);
        }
    }

    /// The ghost closure in lap_at and the spectral matrix must agree:
    /// solve(apply(u)) = u even when the support touches the boundary ring.
    #[test]
    fn apply_then_solve_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for order in [Order::Two, Order::Four] {
            let n = 17;
            let plan = SpectralPlan::new(n, order, 0.08, 3.0).unwrap();
            let u = GridFunction { n, v: rand_vec(n * n, &mut rng) };
            let mut q = GridFunction::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    q.set(i, j, plan.lap_at(&u, i, j));
                }
            }
            let back = plan.solve(&q);
            for r in 0..n * n {
                assert!((back.v[r] - u.v[r]).abs() < 1e-11, "order {order:?}");
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let plan = SpectralPlan::new(9, Order::Four, 0.1, 0.0).unwrap();
        let z = GridFunction::zeros(9);
        assert!(plan.solve(&z).v.iter().all(|&v| v == 0.0));
        let vals = plan.apply_lh(&z, &[Node { i: 4, j: 4 }]).unwrap();
        assert_eq!(vals[0], 0.0);
    }

    #[test]
    fn oned_solver_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for order in [Order::Two, Order::Four] {
            let n = 21;
            let h = 0.11;
            let sigma = 0.7;
            let plan = SpectralPlan1d::new(n, order, h, sigma).unwrap();
            let q = rand_vec(n, &mut rng);
            let fast = plan.solve(&q);
            let k = dense_k1d(order, n);
            let a = Mat::from_fn(n, n, |r, c| k[(r, c)] / (h * h) - if r == c { sigma } else { 0.0 });
            let rhs = Mat::from_fn(n, 1, |r, _| q[r]);
            let dense = a.partial_piv_lu().solve(&rhs);
            for r in 0..n {
                assert!((fast[r] - dense[(r, 0)]).abs() < 1e-11);
            }
            // roundtrip through lap_at
            let u = rand_vec(n, &mut rng);
            let qq: Vec<f64> = (0..n).map(|i| plan.lap_at(&u, i)).collect();
            let back = plan.solve(&qq);
            for r in 0..n {
                assert!((back[r] - u[r]).abs() < 1e-11);
            }
        }
    }
}
