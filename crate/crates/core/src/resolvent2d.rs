//! Stationary damped Helmholtz problem on the whole domain,
//!
//! ```text
//! (-Δ_h + 2iaλ - λ²) u = f,
//! ```
//!
//! resolvent-norm estimates along the real axis, and the resolvent of the
//! generator `A(u, v) = (v, -Δ_h u + 2iav)` on `H = H¹₀ × L²`.

use std::cell::Cell;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::fitting::{fit_power_law, FitReport};
use crate::geometry::GridMesh;
use crate::linalg::{conj_vec, random_field, NormMethod, PowerEstimate, PowerIteration, SparseLu};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest accepted relative residual of a single solve.
pub const SOLVE_RESIDUAL_LIMIT: f64 = 1e-9;

/// Lower end of the default exponent-fit window.
pub const DEFAULT_FIT_MIN: f64 = 5.0;

/// Factored `T(λ) = -Δ_h + 2iaλ - λ²` for complex `λ`.
pub struct HelmholtzSystem<'m> {
    mesh: &'m GridMesh,
    a: Vec<f64>,
    lambda: Complex64,
    lu: SparseLu,
}

impl<'m> HelmholtzSystem<'m> {
    pub fn new(mesh: &'m GridMesh, damping: &DampingProfile, lambda: Complex64) -> Result<Self> {
        mesh.check_len(damping.values().len())?;
        let shift = -lambda * lambda;
        let mut entries: Vec<(usize, usize, Complex64)> =
            mesh.laplacian_triplets().into_iter().map(|(r, c, v)| (r, c, Complex64::new(v, 0.0))).collect();
        for (p, &a) in damping.values().iter().enumerate() {
            entries.push((p, p, 2.0 * I * a * lambda + shift));
        }
        let lu = SparseLu::factor(mesh.n_interior(), &entries)?;
        Ok(Self { mesh, a: damping.values().to_vec(), lambda, lu })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn mesh(&self) -> &GridMesh {
        self.mesh
    }

    /// `T(λ) u` computed from the stencil.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; u.len()];
        self.mesh.laplacian_into(u, &mut out);
        let shift = -self.lambda * self.lambda;
        for ((o, &a), &x) in out.iter_mut().zip(&self.a).zip(u) {
            *o += (2.0 * I * a * self.lambda + shift) * x;
        }
        out
    }

    /// `‖T u - f‖ / ‖f‖`.
    pub fn residual(&self, u: &[Complex64], f: &[Complex64]) -> f64 {
        let tu = self.apply(u);
        let num: f64 = tu.iter().zip(f).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Solves `T u = f` with one step of iterative refinement; returns the
    /// solution and its relative residual.
    pub fn solve(&self, f: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        self.mesh.check_len(f.len())?;
        let mut u = self.lu.solve(f);
        let tu = self.apply(&u);
        let r: Vec<Complex64> = f.iter().zip(&tu).map(|(a, b)| a - b).collect();
        let du = self.lu.solve(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
        let res = self.residual(&u, f);
        if !res.is_finite() || res > SOLVE_RESIDUAL_LIMIT {
            warn!("Helmholtz solve at λ = {} has residual {res:.3e}", self.lambda);
            return Err(Error::Singular { sigma_min: 0.0 });
        }
        Ok((u, res))
    }

    /// Solves `T^H u = f`. `T` is complex symmetric, so `T^H = conj(T)`.
    pub fn solve_adjoint(&self, f: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        let (u, res) = self.solve(&conj_vec(f))?;
        Ok((conj_vec(&u), res))
    }
}

fn resolution_guard(mesh: &GridMesh, lambda: f64) {
    if lambda != 0.0 && mesh.h() > 2.0 * std::f64::consts::PI / (10.0 * lambda.abs()) {
        warn!(
            "h = {:.4} resolves fewer than 10 points per wavelength at λ = {lambda}; expect pollution",
            mesh.h()
        );
    }
}

/// Solves `(-Δ_h + 2iaλ - λ²) u = f` for real `λ`.
pub fn solve_helmholtz(mesh: &GridMesh, damping: &DampingProfile, lambda: f64, f: &[Complex64]) -> Result<Vec<Complex64>> {
    resolution_guard(mesh, lambda);
    let sys = HelmholtzSystem::new(mesh, damping, Complex64::new(lambda, 0.0))?;
    Ok(sys.solve(f)?.0)
}

/// Relative defect of `λ ∫ a|u|² = ½ Im ∫ f ū` for a solve with real `λ`.
pub fn imaginary_identity_defect(mesh: &GridMesh, damping: &DampingProfile, lambda: f64, f: &[Complex64], u: &[Complex64]) -> f64 {
    let w = mesh.cell_area();
    let damped: f64 = damping.values().iter().zip(u).map(|(a, z)| a * z.norm_sqr()).sum::<f64>() * w;
    let lhs = lambda * damped;
    let rhs = 0.5 * mesh.inner(f, u).im;
    let scale = mesh.norm(f) * mesh.norm(u);
    if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Norm estimate together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: f64,
    pub iterations: usize,
    /// Largest relative residual over all solves.
    pub residual: f64,
    /// Largest relative defect of the imaginary-part identity (0 for
    /// generator norms).
    pub identity_defect: f64,
    pub lanczos: bool,
}

impl NormReport {
    fn from_estimate(est: PowerEstimate, residual: f64, identity_defect: f64) -> Self {
        Self {
            norm: est.norm,
            iterations: est.iterations,
            residual,
            identity_defect,
            lanczos: est.method == NormMethod::Lanczos,
        }
    }
}

/// `‖R(λ)‖_{L²→L²}` for real `λ` by power iteration on `R^* R`.
pub fn resolvent_norm(mesh: &GridMesh, damping: &DampingProfile, lambda: f64, tol: f64) -> Result<NormReport> {
    resolution_guard(mesh, lambda);
    let sys = HelmholtzSystem::new(mesh, damping, Complex64::new(lambda, 0.0))?;
    let max_res = Cell::new(0.0f64);
    let max_defect = Cell::new(0.0f64);
    let est = PowerIteration::with_tol(tol).operator_norm(
        mesh.n_interior(),
        |f| {
            let (u, r) = sys.solve(f)?;
            max_res.set(max_res.get().max(r));
            max_defect.set(max_defect.get().max(imaginary_identity_defect(mesh, damping, lambda, f, &u)));
            Ok(u)
        },
        |f| {
            let (u, r) = sys.solve_adjoint(f)?;
            max_res.set(max_res.get().max(r));
            Ok(u)
        },
        |a, b| mesh.inner(a, b),
    )?;
    Ok(NormReport::from_estimate(est, max_res.get(), max_defect.get()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub lambda: f64,
    pub norm: f64,
    pub iterations: usize,
    pub residual: f64,
    pub identity_defect: f64,
    pub failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// `None` when fewer than three successful entries fall in the window.
    pub fit: Option<FitReport>,
    pub fit_window: [f64; 2],
}

impl SweepResult {
    pub fn fitted_exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.exponent)
    }

    pub fn fit_residual(&self) -> Option<f64> {
        self.fit.map(|f| f.residual)
    }

    pub fn max_identity_defect(&self) -> f64 {
        self.entries.iter().filter(|e| !e.failed).map(|e| e.identity_defect).fold(0.0, f64::max)
    }

    /// CSV with columns `lambda,norm,iterations,residual,failed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,norm,iterations,residual,failed\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{:.11e},{:.11e},{},{:.11e},{}\n",
                e.lambda, e.norm, e.iterations, e.residual, e.failed
            ));
        }
        s
    }

    /// Fit summary `{alpha, c, window, residual}`.
    pub fn fit_json(&self) -> serde_json::Value {
        match self.fit {
            Some(f) => serde_json::json!({
                "alpha": f.exponent,
                "c": f.intercept,
                "window": f.window,
                "residual": f.residual,
            }),
            None => serde_json::json!({ "alpha": null, "c": null, "window": self.fit_window, "residual": null }),
        }
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l >= 1.0)) || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sweep frequencies must be ≥ 1 and strictly increasing".into()));
    }
    Ok(())
}

/// Runs `norm_at` at every frequency (concurrently) and fits the growth
/// exponent over `window` (default `λ ≥ 5`). Failed entries are kept and
/// marked rather than aborting the sweep.
pub fn sweep_with<F>(lambdas: &[f64], window: Option<[f64; 2]>, norm_at: F) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<NormReport> + Sync,
{
    check_lambdas(lambdas)?;
    let entries: Vec<SweepEntry> = lambdas
        .par_iter()
        .map(|&lambda| match norm_at(lambda) {
            Ok(r) => SweepEntry {
                lambda,
                norm: r.norm,
                iterations: r.iterations,
                residual: r.residual,
                identity_defect: r.identity_defect,
                failed: false,
                error: None,
            },
            Err(e) => {
                warn!("sweep entry λ = {lambda} failed: {e}");
                SweepEntry {
                    lambda,
                    norm: f64::NAN,
                    iterations: 0,
                    residual: f64::NAN,
                    identity_defect: f64::NAN,
                    failed: true,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    let fit_window = window.unwrap_or([DEFAULT_FIT_MIN, f64::INFINITY]);
    let ok: Vec<&SweepEntry> = entries.iter().filter(|e| !e.failed).collect();
    let xs: Vec<f64> = ok.iter().map(|e| e.lambda).collect();
    let ys: Vec<f64> = ok.iter().map(|e| e.norm).collect();
    let fit = fit_power_law(&xs, &ys, Some(fit_window)).ok();
    Ok(SweepResult { entries, fit, fit_window })
}

/// Real-axis sweep of `‖R(λ)‖` with an exponent fit.
pub fn sweep_and_fit(mesh: &GridMesh, damping: &DampingProfile, lambdas: &[f64], tol: f64, window: Option<[f64; 2]>) -> Result<SweepResult> {
    sweep_with(lambdas, window, |l| resolvent_norm(mesh, damping, l, tol))
}

/// Real-axis sweep of `‖(λ - A)^{-1}‖_{H→H}` with an exponent fit.
pub fn generator_sweep(mesh: &GridMesh, damping: &DampingProfile, lambdas: &[f64], tol: f64, window: Option<[f64; 2]>) -> Result<SweepResult> {
    sweep_with(lambdas, window, |l| {
        resolution_guard(mesh, l);
        GeneratorResolvent::new(mesh, damping, Complex64::new(l, 0.0))?.norm(tol)
    })
}

/// Pair `(u, v)` in `H = H¹₀ × L²`, stored as `[u; v]`.
pub type HPair = Vec<Complex64>;

/// `(λ - A)^{-1}` assembled from stationary solves:
///
/// ```text
/// u = R(λ)((2ia - λ) f - g),   v = λu - f.
/// ```
pub struct GeneratorResolvent<'m> {
    sys: HelmholtzSystem<'m>,
    laplacian: SparseLu,
}

impl<'m> GeneratorResolvent<'m> {
    pub fn new(mesh: &'m GridMesh, damping: &DampingProfile, lambda: Complex64) -> Result<Self> {
        let sys = HelmholtzSystem::new(mesh, damping, lambda)?;
        let entries: Vec<(usize, usize, Complex64)> =
            mesh.laplacian_triplets().into_iter().map(|(r, c, v)| (r, c, Complex64::new(v, 0.0))).collect();
        let laplacian = SparseLu::factor(mesh.n_interior(), &entries)?;
        Ok(Self { sys, laplacian })
    }

    fn n(&self) -> usize {
        self.sys.mesh.n_interior()
    }

    pub fn lambda(&self) -> Complex64 {
        self.sys.lambda
    }

    /// `(λ - A)(u, v) = (λu - v, λv + Δ_h u - 2iav)`.
    pub fn apply_shifted(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let (u, v) = x.split_at(n);
        let lam = self.sys.lambda;
        let mut lu = vec![ZERO; n];
        self.sys.mesh.laplacian_into(u, &mut lu);
        let mut out = Vec::with_capacity(2 * n);
        out.extend(u.iter().zip(v).map(|(u, v)| lam * u - v));
        out.extend((0..n).map(|p| lam * v[p] - lu[p] - 2.0 * I * self.sys.a[p] * v[p]));
        out
    }

    /// `(λ - A)^{-1} (f, g)`; also returns the residual of the inner solve.
    pub fn apply(&self, x: &[Complex64]) -> Result<(HPair, f64)> {
        let n = self.n();
        let (f, g) = x.split_at(n);
        let lam = self.sys.lambda;
        let rhs: Vec<Complex64> = (0..n).map(|p| (2.0 * I * self.sys.a[p] - lam) * f[p] - g[p]).collect();
        let (u, res) = self.sys.solve(&rhs)?;
        let mut out = u.clone();
        out.extend(u.iter().zip(f).map(|(u, f)| lam * u - f));
        Ok((out, res))
    }

    /// Adjoint of `(λ - A)^{-1}` with respect to the `H` inner product.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Result<(HPair, f64)> {
        let n = self.n();
        let (p, q) = x.split_at(n);
        let lam = self.sys.lambda;
        let mut lp = vec![ZERO; n];
        self.sys.mesh.laplacian_into(p, &mut lp);
        let rhs: Vec<Complex64> = (0..n).map(|i| lp[i] + lam.conj() * q[i]).collect();
        let (s, res) = self.sys.solve_adjoint(&rhs)?;
        let first: Vec<Complex64> = (0..n).map(|i| (-2.0 * I * self.sys.a[i] - lam.conj()) * s[i] - q[i]).collect();
        let mut out = self.laplacian.solve(&first);
        out.extend(s.iter().map(|z| -z));
        Ok((out, res))
    }

    /// `⟨x, y⟩_H = ⟨-Δ_h x_u, y_u⟩ + ⟨x_v, y_v⟩`.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        h_inner(self.sys.mesh, x, y)
    }

    /// `‖(λ - A)^{-1}‖_{H→H}`.
    pub fn norm(&self, tol: f64) -> Result<NormReport> {
        let max_res = Cell::new(0.0f64);
        let est = PowerIteration::with_tol(tol).operator_norm(
            2 * self.n(),
            |x| {
                let (y, r) = self.apply(x)?;
                max_res.set(max_res.get().max(r));
                Ok(y)
            },
            |x| {
                let (y, r) = self.apply_adjoint(x)?;
                max_res.set(max_res.get().max(r));
                Ok(y)
            },
            |a, b| self.inner(a, b),
        )?;
        Ok(NormReport::from_estimate(est, max_res.get(), 0.0))
    }

    /// `‖(λ - A)^{-1}(λ - A) x - x‖_H / ‖x‖_H` for a seeded random `x`.
    pub fn block_identity_defect(&self, seed: u64) -> Result<f64> {
        let x = random_field(2 * self.n(), seed);
        let (back, _) = self.apply(&self.apply_shifted(&x))?;
        let d: Vec<Complex64> = back.iter().zip(&x).map(|(a, b)| a - b).collect();
        Ok(self.inner(&d, &d).re.sqrt() / self.inner(&x, &x).re.sqrt())
    }
}

/// `H¹₀ × L²` inner product of two stacked pairs.
pub fn h_inner(mesh: &GridMesh, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let n = mesh.n_interior();
    let mut lx = vec![ZERO; n];
    mesh.laplacian_into(&x[..n], &mut lx);
    mesh.inner(&lx, &y[..n]) + mesh.inner(&x[n..], &y[n..])
}

/// `H` norm of a stacked pair.
pub fn h_norm(mesh: &GridMesh, x: &[Complex64]) -> f64 {
    h_inner(mesh, x, x).re.max(0.0).sqrt()
}

/// `‖(λ - A)^{-1}‖_{H→H}` for complex `λ`.
pub fn generator_resolvent_norm(mesh: &GridMesh, damping: &DampingProfile, lambda: Complex64, tol: f64) -> Result<NormReport> {
    GeneratorResolvent::new(mesh, damping, lambda)?.norm(tol)
}
