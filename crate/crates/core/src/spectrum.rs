//! Spectrum of the generator `A(u, v) = (v, -Δ_h u + 2iav)`.
//!
//! Eigenvalues of `A` are the roots of the quadratic pencil
//! `-Δ_h + 2iaλ - λ²`, with eigenvectors `(u, λu)`.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::geometry::GridMesh;
use crate::linalg::random_field;
use crate::resolvent2d::{generator_resolvent_norm, GeneratorResolvent, HelmholtzSystem, NormReport};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest dimension `2n` that is materialized densely.
pub const DENSE_LIMIT: usize = 4000;

/// Distance below which two eigenvalues are merged.
pub const DEDUP_TOL: f64 = 1e-6;

/// Block operator `A` on stacked pairs `[u; v]`.
pub struct GeneratorMatrix<'m> {
    mesh: &'m GridMesh,
    damping: &'m DampingProfile,
    a: &'m [f64],
}

pub fn assemble_generator<'m>(mesh: &'m GridMesh, damping: &'m DampingProfile) -> Result<GeneratorMatrix<'m>> {
    mesh.check_len(damping.values().len())?;
    Ok(GeneratorMatrix { mesh, damping, a: damping.values() })
}

impl<'m> GeneratorMatrix<'m> {
    pub fn dim(&self) -> usize {
        2 * self.mesh.n_interior()
    }

    pub fn a_max(&self) -> f64 {
        self.damping.a_max()
    }

    pub fn mesh(&self) -> &GridMesh {
        self.mesh
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::SizeMismatch { expected: self.dim(), got: x.len() });
        }
        let n = self.mesh.n_interior();
        let (u, v) = x.split_at(n);
        let mut out = v.to_vec();
        let mut lu = vec![ZERO; n];
        self.mesh.laplacian_into(u, &mut lu);
        out.extend((0..n).map(|p| lu[p] + 2.0 * I * self.a[p] * v[p]));
        Ok(out)
    }

    /// Dense `[[0, I], [-Δ_h, 2i·diag(a)]]`.
    pub fn dense(&self) -> Result<Mat<Complex64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!("dense generator limited to dimension {DENSE_LIMIT}, got {dim}")));
        }
        let n = self.mesh.n_interior();
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for p in 0..n {
            m[(p, n + p)] = Complex64::new(1.0, 0.0);
            m[(n + p, n + p)] = 2.0 * I * self.a[p];
        }
        for (r, c, v) in self.mesh.laplacian_triplets() {
            m[(n + r, c)] += Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    /// `‖A x - λx‖ / (‖x‖ max(1, |λ|))`.
    pub fn residual(&self, lambda: Complex64, x: &[Complex64]) -> Result<f64> {
        let ax = self.apply(x)?;
        let num: f64 = ax.iter().zip(x).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(num / (den * lambda.norm().max(1.0)))
    }

    /// `‖(-Δ_h + 2iaλ - λ²) u‖ / ‖u‖` for the position block of `x`.
    pub fn pencil_residual(&self, lambda: Complex64, x: &[Complex64]) -> f64 {
        let n = self.mesh.n_interior();
        let u = &x[..n];
        let mut out = vec![ZERO; n];
        self.mesh.laplacian_into(u, &mut out);
        let num: f64 = (0..n)
            .map(|p| (out[p] + (2.0 * I * self.a[p] * lambda - lambda * lambda) * u[p]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Dense,
    ShiftInvert,
}

/// Rectangle `[re_lo, re_hi] × [im_lo, im_hi]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl SpectrumWindow {
    pub fn everything() -> Self {
        Self { re: [f64::NEG_INFINITY, f64::INFINITY], im: [f64::NEG_INFINITY, f64::INFINITY] }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re[0] && z.re <= self.re[1] && z.im >= self.im[0] && z.im <= self.im[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub lambda: Complex64,
    pub residual: f64,
    pub pencil_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Eigenvalue>,
    pub method: SpectrumMethod,
    pub window: SpectrumWindow,
    /// Targets whose inverse iteration did not converge.
    pub failed_targets: Vec<Complex64>,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn max_pencil_residual(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.pencil_residual).fold(0.0, f64::max)
    }

    /// `(min Im λ, max Im λ)`.
    pub fn imag_range(&self) -> (f64, f64) {
        self.eigenvalues
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.lambda.im), hi.max(e.lambda.im)))
    }

    /// Largest distance from `λ` to the nearest `-λ̄` in the set: zero when the
    /// spectrum is symmetric about the imaginary axis.
    pub fn reflection_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| {
                let r = -e.lambda.conj();
                self.eigenvalues.iter().map(|f| (f.lambda - r).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `re_lambda,im_lambda,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_lambda,im_lambda,residual\n");
        for e in &self.eigenvalues {
            s.push_str(&format!("{:.11e},{:.11e},{:.11e}\n", e.lambda.re, e.lambda.im, e.residual));
        }
        s
    }
}

/// Strategy for [`compute_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumRequest {
    /// Full dense eigendecomposition, filtered to the window.
    Dense(SpectrumWindow),
    /// Inverse iteration from each target; results kept if inside the window.
    ShiftInvert { window: SpectrumWindow, targets: Vec<Complex64>, tol: f64, max_iter: usize },
}

/// Dense eigendecomposition when `2n ≤ 4000`, shift-invert otherwise.
pub fn compute_spectrum(gen: &GeneratorMatrix<'_>, request: &SpectrumRequest) -> Result<SpectrumResult> {
    match request {
        SpectrumRequest::Dense(window) => dense_spectrum(gen, *window),
        SpectrumRequest::ShiftInvert { window, targets, tol, max_iter } => {
            shift_invert_spectrum(gen, *window, targets, *tol, *max_iter)
        }
    }
}

fn dense_spectrum(gen: &GeneratorMatrix<'_>, window: SpectrumWindow) -> Result<SpectrumResult> {
    let m = gen.dense()?;
    let eig = m.eigen().map_err(|e| Error::Factorization(format!("dense eigensolver failed: {e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    let dim = gen.dim();
    let mut eigenvalues = Vec::new();
    for j in 0..dim {
        let lambda = values[j];
        if !window.contains(lambda) {
            continue;
        }
        let x: Vec<Complex64> = (0..dim).map(|i| vectors[(i, j)]).collect();
        eigenvalues.push(Eigenvalue {
            lambda,
            residual: gen.residual(lambda, &x)?,
            pencil_residual: gen.pencil_residual(lambda, &x),
        });
    }
    sort_eigenvalues(&mut eigenvalues);
    Ok(SpectrumResult { eigenvalues, method: SpectrumMethod::Dense, window, failed_targets: Vec::new() })
}

fn shift_invert_spectrum(
    gen: &GeneratorMatrix<'_>,
    window: SpectrumWindow,
    targets: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<SpectrumResult> {
    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
    let mut failed_targets = Vec::new();
    for (t, &sigma) in targets.iter().enumerate() {
        match inverse_iteration(gen, sigma, tol, max_iter, t as u64) {
            Ok(Some(ev)) => {
                if window.contains(ev.lambda) && eigenvalues.iter().all(|e| (e.lambda - ev.lambda).norm() > DEDUP_TOL) {
                    eigenvalues.push(ev);
                }
            }
            Ok(None) | Err(_) => failed_targets.push(sigma),
        }
    }
    sort_eigenvalues(&mut eigenvalues);
    Ok(SpectrumResult { eigenvalues, method: SpectrumMethod::ShiftInvert, window, failed_targets })
}

/// Inverse iteration with `(σ - A)^{-1}`, which differs from `(A - σ)^{-1}`
/// only by sign.
fn inverse_iteration(gen: &GeneratorMatrix<'_>, sigma: Complex64, tol: f64, max_iter: usize, seed: u64) -> Result<Option<Eigenvalue>> {
    let solver = GeneratorResolvent::new(gen.mesh, gen.damping, sigma)?;
    let mut x = random_field(gen.dim(), 0x5EED ^ seed);
    for _ in 0..max_iter {
        let y = solver.apply(&x)?.0;
        let ny = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = y.into_iter().map(|z| z / ny).collect();
        let ax = gen.apply(&x)?;
        let lambda: Complex64 = ax.iter().zip(&x).map(|(a, b)| a * b.conj()).sum();
        let residual = gen.residual(lambda, &x)?;
        if residual < tol {
            return Ok(Some(Eigenvalue { lambda, residual, pencil_residual: gen.pencil_residual(lambda, &x) }));
        }
    }
    Ok(None)
}

fn sort_eigenvalues(v: &mut [Eigenvalue]) {
    v.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
}

/// `‖(λ - A)^{-1}‖_{H→H}` for `Im λ < 0`.
pub fn lower_halfplane_bound_check(mesh: &GridMesh, damping: &DampingProfile, lambda: Complex64, tol: f64) -> Result<NormReport> {
    if !(lambda.im < 0.0) {
        return Err(Error::Regime(format!("lower half-plane bound needs Im λ < 0, got {lambda}")));
    }
    generator_resolvent_norm(mesh, damping, lambda, tol)
}

/// Roots `ic ± √(μ - c²)` of `μ + 2icλ - λ² = 0` for constant damping `c`.
pub fn constant_damping_roots(mu: f64, c: f64) -> [Complex64; 2] {
    let s = Complex64::new(mu - c * c, 0.0).sqrt();
    [I * c + s, I * c - s]
}

/// Checks that the stationary operator at a computed eigenvalue is singular
/// to the given relative tolerance (smallest singular value of a solve).
pub fn pencil_is_singular(mesh: &GridMesh, damping: &DampingProfile, lambda: Complex64) -> bool {
    match HelmholtzSystem::new(mesh, damping, lambda) {
        Ok(sys) => sys.solve(&random_field(mesh.n_interior(), 1)).is_err(),
        Err(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::{build_constant_damping, build_wing_damping};
    use crate::geometry::{build_rectangle, build_stadium};
    use crate::linalg::dense_sigma_max;
    use faer::linalg::solvers::Solve;
    use std::f64::consts::PI;

    fn discrete_mu(mesh: &GridMesh) -> Vec<f64> {
        let (nx, ny) = mesh.rectangle_dims().unwrap();
        let one = |j: usize, h: f64, l: f64| 4.0 / (h * h) * (j as f64 * PI * h / (2.0 * l)).sin().powi(2);
        let mut mu = Vec::new();
        for n in 1..=nx {
            for k in 1..=ny {
                mu.push(one(n, mesh.hx(), 1.0) + one(k, mesh.hy(), PI));
            }
        }
        mu
    }

    #[test]
    fn block_action() {
        let mesh = build_rectangle(1.0, PI, 0.2).unwrap();
        let d = build_wing_damping(&mesh, [0.3, 0.7], 1.0).unwrap();
        let gen = assemble_generator(&mesh, &d).unwrap();
        let n = mesh.n_interior();
        let u = random_field(n, 4);
        let mut x = u.clone();
        x.extend(vec![ZERO; n]);
        let ax = gen.apply(&x).unwrap();
        let lu = mesh.apply_laplacian(&u).unwrap();
        assert!(ax[..n].iter().all(|z| *z == ZERO));
        assert_eq!(&ax[n..], &lu[..]);
        let dense = gen.dense().unwrap();
        for i in 0..2 * n {
            let s: Complex64 = (0..2 * n).map(|j| dense[(i, j)] * x[j]).sum();
            assert!((s - ax[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_damping_matches_quadratic_formula() {
        let mesh = build_rectangle(1.0, PI, 0.2).unwrap();
        let c = 0.7;
        let d = build_constant_damping(&mesh, c).unwrap();
        let gen = assemble_generator(&mesh, &d).unwrap();
        let res = compute_spectrum(&gen, &SpectrumRequest::Dense(SpectrumWindow::everything())).unwrap();
        let mut oracle: Vec<Complex64> = discrete_mu(&mesh).into_iter().flat_map(|mu| constant_damping_roots(mu, c)).collect();
        assert_eq!(oracle.len(), res.eigenvalues.len());
        for e in &res.eigenvalues {
            let (k, dist) = oracle
                .iter()
                .enumerate()
                .map(|(k, z)| (k, (z - e.lambda).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < 1e-8, "{} off by {dist}", e.lambda);
            oracle.swap_remove(k);
            assert!((e.lambda.im - c).abs() < 1e-8);
        }
        assert!(res.max_residual() < 1e-8);
    }

    #[test]
    fn wing_damped_stadium_lies_in_band() {
        let mesh = build_stadium(PI / 2.0, 0.3).unwrap();
        let d = build_wing_damping(&mesh, [0.15, 0.85], 1.0).unwrap();
        let gen = assemble_generator(&mesh, &d).unwrap();
        let res = compute_spectrum(&gen, &SpectrumRequest::Dense(SpectrumWindow::everything())).unwrap();
        let (lo, hi) = res.imag_range();
        assert!(lo > 0.0 && hi <= 2.0 * d.a_max() + 1e-10, "{lo} {hi}");
        assert!(res.max_residual() < 1e-8);
        assert!(res.max_pencil_residual() < 1e-7, "{}", res.max_pencil_residual());
        assert!(res.reflection_defect() < 1e-8);
    }

    #[test]
    fn shift_invert_finds_dense_eigenvalues() {
        let mesh = build_stadium(PI / 2.0, 0.3).unwrap();
        let d = build_wing_damping(&mesh, [0.15, 0.85], 1.0).unwrap();
        let gen = assemble_generator(&mesh, &d).unwrap();
        let dense = compute_spectrum(&gen, &SpectrumRequest::Dense(SpectrumWindow::everything())).unwrap();
        let targets: Vec<Complex64> = dense.eigenvalues.iter().take(6).map(|e| e.lambda + Complex64::new(0.01, 0.01)).collect();
        let si = compute_spectrum(
            &gen,
            &SpectrumRequest::ShiftInvert { window: SpectrumWindow::everything(), targets, tol: 1e-10, max_iter: 200 },
        )
        .unwrap();
        assert!(!si.eigenvalues.is_empty());
        for e in &si.eigenvalues {
            let near = dense.eigenvalues.iter().map(|f| (f.lambda - e.lambda).norm()).fold(f64::INFINITY, f64::min);
            assert!(near < 1e-8, "{}", e.lambda);
            assert!(pencil_is_singular(&mesh, &d, e.lambda));
        }
    }

    #[test]
    fn lower_half_plane_norm_matches_dense_oracle() {
        let mesh = build_rectangle(1.0, 1.0, 1.0 / 21.0).unwrap();
        let d = build_wing_damping(&mesh, [0.3, 0.7], 1.0).unwrap();
        let gen = assemble_generator(&mesh, &d).unwrap();
        let n = mesh.n_interior();
        let lambda = Complex64::new(0.0, -1.0);
        // S (λ - A)^{-1} S^{-1} with S = diag(L^{1/2}, I)
        let l = mesh.dense_laplacian();
        let eig = l.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let q = eig.U();
        let s = eig.S().column_vector();
        let sqrt_l = Mat::<f64>::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * s[k].sqrt() * q[(j, k)]).sum());
        let inv_sqrt_l = Mat::<f64>::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] / s[k].sqrt() * q[(j, k)]).sum());
        let a = gen.dense().unwrap();
        let shifted = Mat::<Complex64>::from_fn(2 * n, 2 * n, |i, j| if i == j { lambda - a[(i, j)] } else { -a[(i, j)] });
        let b = shifted.partial_piv_lu().solve(Mat::<Complex64>::identity(2 * n, 2 * n));
        let sm = Mat::<Complex64>::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => Complex64::new(sqrt_l[(i, j)], 0.0),
            (false, false) if i == j => Complex64::new(1.0, 0.0),
            _ => ZERO,
        });
        let sinv = Mat::<Complex64>::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => Complex64::new(inv_sqrt_l[(i, j)], 0.0),
            (false, false) if i == j => Complex64::new(1.0, 0.0),
            _ => ZERO,
        });
        let exact = dense_sigma_max((&sm * &b * &sinv).as_ref()).unwrap();
        let est = lower_halfplane_bound_check(&mesh, &d, lambda, 1e-10).unwrap();
        assert!((est.norm - exact).abs() < 1e-5 * exact, "{} vs {exact}", est.norm);
        assert!(exact <= 1.0 + 1e-10);
        assert!(lower_halfplane_bound_check(&mesh, &d, Complex64::new(1.0, 0.5), 1e-6).is_err());
    }
}
