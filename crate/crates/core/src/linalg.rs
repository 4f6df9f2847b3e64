//! Small linear-algebra kernels shared by the solvers: a pivoted complex
//! tridiagonal factorization, a sparse LU wrapper, and the power iteration
//! used for every operator-norm estimate.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Seed of the starting vector for every norm estimate.
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 200;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pseudo-random complex vector with entries uniform in the unit square.
pub fn random_field(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn euclid_norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn euclid_norm(x: &[Complex64]) -> f64 {
    euclid_norm_sqr(x).sqrt()
}

pub fn conj_vec(x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|z| z.conj()).collect()
}

/// LU factorization of a complex tridiagonal matrix with partial pivoting.
///
/// Row interchanges introduce a second superdiagonal, stored in `du2`.
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper`.
    pub fn factor(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::InvalidArgument("inconsistent tridiagonal band lengths".into()));
        }
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].norm() >= dl[i].norm() {
                if d[i] != ZERO {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d.iter().any(|z| *z == ZERO || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular { sigma_min: 0.0 });
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Sparse LU with partial pivoting for a square complex matrix.
pub struct SparseLu {
    lu: Lu<usize, Complex64>,
    matrix: SparseColMat<usize, Complex64>,
}

impl SparseLu {
    pub fn factor(n: usize, entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let triplets: Vec<Triplet<usize, usize, Complex64>> =
            entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = matrix.sp_lu().map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { lu, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut rhs = Mat::<Complex64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Sparse matrix-vector product with the factored matrix.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; x.len()];
        let m = self.matrix.as_ref();
        for (col, &xc) in x.iter().enumerate() {
            let rows = m.symbolic().row_idx_of_col_raw(col);
            let vals = m.val_of_col(col);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xc;
            }
        }
        y
    }
}

/// Largest singular value of a dense matrix.
pub fn dense_sigma_max(m: MatRef<'_, Complex64>) -> Result<f64> {
    let s = m
        .singular_values()
        .map_err(|e| Error::Factorization(format!("dense SVD failed: {e:?}")))?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

/// Smallest singular value of a dense matrix.
pub fn dense_sigma_min(m: MatRef<'_, Complex64>) -> Result<f64> {
    let s = m
        .singular_values()
        .map_err(|e| Error::Factorization(format!("dense SVD failed: {e:?}")))?;
    Ok(s.iter().copied().fold(f64::INFINITY, f64::min))
}

/// How a norm estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Power,
    /// Lanczos on `B^† B` restarted from the last power iterate, used when
    /// the two leading singular values are too close for plain iteration.
    Lanczos,
}

/// Result of an operator-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub norm: f64,
    pub iterations: usize,
    /// Relative change of the estimate in the final iteration.
    pub last_change: f64,
    pub method: NormMethod,
}

/// Power iteration on `B^† B` for an operator `B` given by its action and
/// the action of its adjoint with respect to the inner product `inner`.
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov steps allowed after a stalled power iteration; 0 disables it.
    pub lanczos_steps: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, seed: DEFAULT_SEED, lanczos_steps: 120 }
    }
}

/// Euclidean inner product `Σ a b̄`.
pub fn euclid_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

impl PowerIteration {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn operator_norm<B, A, I>(&self, dim: usize, mut apply: B, mut apply_adjoint: A, inner: I) -> Result<PowerEstimate>
    where
        B: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
        A: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
        I: Fn(&[Complex64], &[Complex64]) -> Complex64,
    {
        let norm = |v: &[Complex64]| inner(v, v).re.max(0.0).sqrt();
        let mut x = random_field(dim, self.seed);
        let nx = norm(&x);
        x.iter_mut().for_each(|z| *z /= nx);
        let mut prev = 0.0;
        let mut change = f64::INFINITY;
        for it in 1..=self.max_iter {
            let y = apply(&x)?;
            let est = norm(&y);
            if !est.is_finite() {
                return Err(Error::Singular { sigma_min: 0.0 });
            }
            if est == 0.0 {
                return Ok(PowerEstimate { norm: 0.0, iterations: it, last_change: 0.0, method: NormMethod::Power });
            }
            if it > 1 {
                change = (est - prev).abs() / est;
                if change <= self.tol {
                    return Ok(PowerEstimate { norm: est, iterations: it, last_change: change, method: NormMethod::Power });
                }
            }
            let z = apply_adjoint(&y)?;
            let nz = norm(&z);
            if nz == 0.0 || !nz.is_finite() {
                return Err(Error::Singular { sigma_min: 0.0 });
            }
            x = z.into_iter().map(|v| v / nz).collect();
            prev = est;
        }
        if self.lanczos_steps == 0 {
            return Err(Error::NoConvergence { iterations: self.max_iter, last_ratio: 1.0 + change });
        }
        let mut gram = |v: &[Complex64]| -> Result<Vec<Complex64>> { apply_adjoint(&apply(v)?) };
        match lanczos_max(&x, &mut gram, &inner, self.lanczos_steps, self.tol)? {
            Some((theta, steps, ch)) => Ok(PowerEstimate {
                norm: theta.sqrt(),
                iterations: self.max_iter + steps,
                last_change: ch,
                method: NormMethod::Lanczos,
            }),
            None => Err(Error::NoConvergence { iterations: self.max_iter, last_ratio: 1.0 + change }),
        }
    }
}

/// Largest eigenvalue of a self-adjoint positive operator by Lanczos with
/// full reorthogonalization. Returns `(θ, steps, last relative change)`, or
/// `None` if the estimate has not settled within `max_steps`.
fn lanczos_max<M, I>(start: &[Complex64], op: &mut M, inner: &I, max_steps: usize, tol: f64) -> Result<Option<(f64, usize, f64)>>
where
    M: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    I: Fn(&[Complex64], &[Complex64]) -> Complex64,
{
    let dim = start.len();
    let nrm = inner(start, start).re.sqrt();
    let mut basis: Vec<Vec<Complex64>> = vec![start.iter().map(|z| z / nrm).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    for j in 0..max_steps.min(dim) {
        let mut w = op(&basis[j])?;
        alpha.push(inner(&w, &basis[j]).re);
        for _ in 0..2 {
            for q in &basis {
                let c = inner(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = inner(&w, &w).re.max(0.0).sqrt();
        let theta = tridiag_max_eigenvalue(&alpha, &beta)?;
        let change = if theta > 0.0 { (theta - prev).abs() / theta } else { 0.0 };
        // the squared norm converges twice as fast as the norm itself
        if j > 0 && change <= tol * tol {
            return Ok(Some((theta, j + 1, change)));
        }
        if b <= 1e-14 * theta.abs() {
            return Ok(Some((theta, j + 1, 0.0)));
        }
        prev = theta;
        beta.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    Ok(None)
}

fn tridiag_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let n = alpha.len();
    let t = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let ev = t
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Factorization(format!("tridiagonal eigenvalues failed: {e:?}")))?;
    Ok(ev.last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_tridiag(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Mat<Complex64> {
        let n = diag.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                lower[j]
            } else if j == i + 1 {
                upper[i]
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn tridiagonal_needs_pivoting() {
        // zero leading diagonal forces an interchange
        let lower = [c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5)];
        let diag = [c(0.0, 0.0), c(1e-3, 0.0), c(3.0, 0.0), c(1.0, -1.0)];
        let upper = [c(2.0, 0.0), c(1.0, 1.0), c(0.5, 0.0)];
        let lu = TridiagLu::factor(&lower, &diag, &upper).unwrap();
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(0.5, 0.5)];
        let x = lu.solve(&b);
        let a = dense_tridiag(&lower, &diag, &upper);
        for i in 0..4 {
            let ax: Complex64 = (0..4).map(|j| a[(i, j)] * x[j]).sum();
            assert!((ax - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_detects_singularity() {
        let lower = [c(1.0, 0.0)];
        let diag = [c(1.0, 0.0), c(1.0, 0.0)];
        let upper = [c(1.0, 0.0)];
        assert!(matches!(TridiagLu::factor(&lower, &diag, &upper), Err(Error::Singular { .. })));
    }

    proptest! {
        #[test]
        fn tridiagonal_solve_has_small_residual(
            vals in proptest::collection::vec(-2.0f64..2.0, 60),
            n in 2usize..10,
        ) {
            let lower: Vec<_> = (0..n - 1).map(|i| c(vals[i], vals[i + 10])).collect();
            let upper: Vec<_> = (0..n - 1).map(|i| c(vals[i + 20], vals[i + 30])).collect();
            let diag: Vec<_> = (0..n).map(|i| c(vals[i + 40], vals[i + 50])).collect();
            let a = dense_tridiag(&lower, &diag, &upper);
            prop_assume!(dense_sigma_min(a.as_ref()).unwrap() > 1e-3);
            let lu = TridiagLu::factor(&lower, &diag, &upper).unwrap();
            let b: Vec<_> = (0..n).map(|i| c(i as f64, 1.0)).collect();
            let x = lu.solve(&b);
            for i in 0..n {
                let ax: Complex64 = (0..n).map(|j| a[(i, j)] * x[j]).sum();
                prop_assert!((ax - b[i]).norm() < 1e-8 * (1.0 + euclid_norm(&x)));
            }
        }
    }

    #[test]
    fn sparse_lu_round_trip() {
        let entries = vec![
            (0, 0, c(4.0, 1.0)),
            (0, 1, c(-1.0, 0.0)),
            (1, 0, c(-1.0, 0.0)),
            (1, 1, c(4.0, -1.0)),
            (1, 2, c(-1.0, 0.0)),
            (2, 1, c(-1.0, 0.0)),
            (2, 2, c(0.0, 2.0)),
        ];
        let lu = SparseLu::factor(3, &entries).unwrap();
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 3.0)];
        let x = lu.solve(&b);
        let r = lu.apply(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-13);
        }
    }

    #[test]
    fn power_iteration_matches_dense_svd() {
        let n = 12;
        let a = Mat::<Complex64>::from_fn(n, n, |i, j| c(((i * 3 + j * 7) as f64).sin(), ((i + 2 * j) as f64).cos()));
        let apply = |x: &[Complex64]| Ok((0..n).map(|i| (0..n).map(|j| a[(i, j)] * x[j]).sum()).collect());
        let adj = |x: &[Complex64]| Ok((0..n).map(|i| (0..n).map(|j| a[(j, i)].conj() * x[j]).sum()).collect());
        let est = PowerIteration { tol: 1e-12, max_iter: 5000, seed: 7, lanczos_steps: 0 }
            .operator_norm(n, apply, adj, euclid_inner)
            .unwrap();
        let exact = dense_sigma_max(a.as_ref()).unwrap();
        assert!((est.norm - exact).abs() < 1e-8 * exact, "{} vs {}", est.norm, exact);
    }

    #[test]
    fn power_iteration_reports_non_convergence() {
        // two equal singular values with a rotation between them never settle
        let apply = |x: &[Complex64]| Ok(vec![x[1], -x[0] * 2.0]);
        let adj = |x: &[Complex64]| Ok(vec![-x[1] * 2.0, x[0]]);
        let res = PowerIteration { tol: 0.0, max_iter: 5, seed: 1, lanczos_steps: 0 }.operator_norm(2, apply, adj, euclid_inner);
        assert!(matches!(res, Err(Error::NoConvergence { iterations: 5, .. })));
    }

    #[test]
    fn stalled_power_iteration_falls_back_to_lanczos() {
        // nearly equal leading singular values: plain iteration cannot settle in 200 steps
        let sig: Vec<f64> = (0..30).map(|i| if i == 0 { 1.0 } else if i == 1 { 1.0 - 1e-3 } else { 0.5 / i as f64 }).collect();
        let s2 = sig.clone();
        let apply = move |x: &[Complex64]| Ok(x.iter().zip(&sig).map(|(z, s)| z * *s).collect());
        let adj = move |x: &[Complex64]| Ok(x.iter().zip(&s2).map(|(z, s)| z * *s).collect());
        let est = PowerIteration::with_tol(1e-9).operator_norm(30, apply, adj, euclid_inner).unwrap();
        assert_eq!(est.method, NormMethod::Lanczos);
        assert!((est.norm - 1.0).abs() < 1e-9, "{}", est.norm);
    }

    #[test]
    fn random_field_is_deterministic() {
        assert_eq!(random_field(16, DEFAULT_SEED), random_field(16, DEFAULT_SEED));
        assert_ne!(random_field(16, 1), random_field(16, 2));
    }
}
