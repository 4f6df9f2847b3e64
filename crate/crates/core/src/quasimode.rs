//! Bouncing-ball quasimodes `e_k = φ(x) sin(ky)` on a truncated strip
//! `[-L, L] × [0, π]` and their undamped wave evolution.
//!
//! The discrete transverse mode `sin(ky)` is an exact eigenvector of the
//! y-part of `-Δ_h` with eigenvalue `k_h² = (4/h_y²) sin²(k h_y / 2)`, and
//! leapfrog advances it with the phase `θ` given by
//! `cos θ = 1 - dt² k_h² / 2`. Residuals are measured against
//! `cos(t k_eff) e_k` with `k_eff = θ / dt`, so that only the envelope
//! dynamics contributes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{CauchyPair, Leapfrog};
use crate::geometry::GridMesh;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncation radius of the Gaussian envelope in units of `σ`.
pub const GAUSSIAN_CUTOFF: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(-(x - center)² / (2σ²))`, set to zero beyond `9σ`.
    Gaussian { center: f64, sigma: f64 },
    /// Constant in x; only meaningful on an x-periodic strip.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeSpec {
    pub k: usize,
    pub envelope: Envelope,
    pub strip_half_length: f64,
    /// Largest time at which residuals may be requested.
    pub horizon: f64,
}

impl QuasimodeSpec {
    /// Gaussian packet centred at 0 on the shortest strip that keeps the
    /// support clear of the ends up to `horizon`.
    pub fn gaussian(k: usize, sigma: f64, horizon: f64) -> Self {
        Self {
            k,
            envelope: Envelope::Gaussian { center: 0.0, sigma },
            strip_half_length: GAUSSIAN_CUTOFF * sigma + horizon + 1.0,
            horizon,
        }
    }

    fn validate(&self, mesh: &GridMesh) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("mode index k must be at least 1".into()));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::InvalidArgument("horizon must be nonnegative".into()));
        }
        let spec = mesh.spec();
        let (x_lo, x_hi) = (spec.x_min, spec.x_min + spec.lx);
        let l = self.strip_half_length;
        if (x_lo + l).abs() > 1e-9 * l.max(1.0) || (x_hi - l).abs() > 1e-9 * l.max(1.0) {
            return Err(Error::Geometry(format!("mesh must cover [-{l}, {l}] in x")));
        }
        if (spec.ly - std::f64::consts::PI).abs() > 1e-12 {
            return Err(Error::Geometry("quasimodes live on strips of height π".into()));
        }
        match self.envelope {
            Envelope::Gaussian { center, sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidArgument("envelope width must be positive".into()));
                }
                let allowed = l - self.horizon - 1.0;
                let r = GAUSSIAN_CUTOFF * sigma;
                if center - r < -allowed - 1e-12 || center + r > allowed + 1e-12 {
                    return Err(Error::Geometry(format!(
                        "envelope support [{}, {}] leaves [-{allowed}, {allowed}]",
                        center - r,
                        center + r
                    )));
                }
            }
            Envelope::Constant => {
                if !mesh.is_periodic_x() {
                    return Err(Error::Geometry("a constant envelope needs an x-periodic strip".into()));
                }
            }
        }
        Ok(())
    }

    fn envelope_at(&self, x: f64) -> f64 {
        match self.envelope {
            Envelope::Gaussian { center, sigma } => {
                let d = x - center;
                if d.abs() > GAUSSIAN_CUTOFF * sigma {
                    0.0
                } else {
                    (-d * d / (2.0 * sigma * sigma)).exp()
                }
            }
            Envelope::Constant => 1.0,
        }
    }
}

/// Samples `φ(x) sin(ky)` with `Σ φ(x_i)² h_x = 1`.
pub fn build_quasimode(mesh: &GridMesh, spec: &QuasimodeSpec) -> Result<Vec<Complex64>> {
    spec.validate(mesh)?;
    let mut norm2 = 0.0;
    let mut last_x = f64::NAN;
    for p in 0..mesh.n_interior() {
        let (x, _) = mesh.coords(p);
        if x != last_x {
            norm2 += spec.envelope_at(x).powi(2) * mesh.hx();
            last_x = x;
        }
    }
    let scale = 1.0 / norm2.sqrt();
    let k = spec.k as f64;
    Ok(mesh.sample(|x, y| Complex64::new(scale * spec.envelope_at(x) * (k * y).sin(), 0.0)))
}

/// Eigenvalue `k_h²` of the discrete `-∂²_y` on `sin(ky)`.
pub fn discrete_transverse_eigenvalue(mesh: &GridMesh, k: usize) -> f64 {
    let hy = mesh.hy();
    let s = (k as f64 * hy / 2.0).sin();
    4.0 * s * s / (hy * hy)
}

/// Leapfrog frequency `θ / dt` of the transverse mode, `cos θ = 1 - dt² k_h² / 2`.
pub fn transverse_frequency(mesh: &GridMesh, k: usize, dt: f64) -> f64 {
    let c = 1.0 - 0.5 * dt * dt * discrete_transverse_eigenvalue(mesh, k);
    c.clamp(-1.0, 1.0).acos() / dt
}

/// `‖(-Δ_h - k_h²) e‖`.
pub fn laplacian_defect(mesh: &GridMesh, field: &[Complex64], k: usize) -> Result<f64> {
    let mut r = mesh.apply_laplacian(field)?;
    let kh2 = discrete_transverse_eigenvalue(mesh, k);
    r.iter_mut().zip(field).for_each(|(r, e)| *r -= kh2 * e);
    Ok(mesh.norm(&r))
}

/// `‖u(t) - cos(t k_eff) e_k‖` for undamped evolution from `(e_k, 0)`, at
/// each requested time (sorted ascending, each at most the horizon).
pub fn quasimode_residual_series(mesh: &GridMesh, spec: &QuasimodeSpec, times: &[f64], dt: f64) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be sorted".into()));
    }
    if let Some(&t) = times.iter().find(|&&t| t > spec.horizon + 1e-12 || t < 0.0) {
        return Err(Error::Regime(format!("time {t} lies outside [0, {}]", spec.horizon)));
    }
    let e = build_quasimode(mesh, spec)?;
    let data = CauchyPair::new(mesh, e.clone(), vec![ZERO; e.len()])?;
    let mut stepper = Leapfrog::new(mesh, None, &data, dt)?;
    let omega = transverse_frequency(mesh, spec.k, dt);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let n = (t / dt).round() as usize;
        while stepper.steps() < n {
            stepper.step();
        }
        if !stepper.is_finite() {
            return Err(Error::NonFinite { t: stepper.time(), step: stepper.steps() });
        }
        let c = (stepper.time() * omega).cos();
        let diff: Vec<Complex64> = stepper.u().iter().zip(&e).map(|(u, e)| u - c * e).collect();
        out.push((t, mesh.norm(&diff)));
    }
    Ok(out)
}

/// Residual at a single time.
pub fn quasimode_residual(mesh: &GridMesh, spec: &QuasimodeSpec, t: f64, dt: f64) -> Result<f64> {
    Ok(quasimode_residual_series(mesh, spec, &[t], dt)?[0].1)
}

/// CSV rows `k,t,residual,residual_over_t_over_k`.
pub fn residual_csv(rows: &[(usize, f64, f64)]) -> String {
    let mut s = String::from("k,t,residual,residual_over_t_over_k\n");
    for &(k, t, r) in rows {
        let scaled = if t > 0.0 { format!("{:.11e}", r / (t / k as f64)) } else { String::new() };
        s.push_str(&format!("{k},{t:.11e},{r:.11e},{scaled}\n"));
    }
    s
}
