//! Separation of variables on the core rectangle.
//!
//! On `[0, Lx] × [0, Ly]` with damping depending on `x` only, the sine
//! modes `e_k(y) = √(2/Ly) sin(kπy/Ly)` decouple the stationary problem
//! into the two-point boundary value problems
//!
//! ```text
//! (-∂²_x + 2iaλ + κ_k - λ²) u_k = f_k + ∂_x g_k,   u_k(0) = u_k(Lx) = 0,
//! ```
//!
//! with `κ_k = (kπ/Ly)²`. Everything here works on the x-line of interior
//! nodes of a rectangle mesh.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::geometry::GridMesh;
use crate::linalg::{conj_vec, dense_sigma_min, euclid_inner, random_field, PowerIteration, TridiagLu};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest line for which norms are taken from a dense SVD.
pub const DENSE_NODE_LIMIT: usize = 400;

/// Interior x-nodes of a segment `[x_min, x_min + length]` with a sampled
/// damping coefficient.
#[derive(Debug, Clone)]
pub struct XLine {
    hx: f64,
    x: Vec<f64>,
    a: Vec<f64>,
}

impl XLine {
    /// Uniform line with `intervals` cells on `[0, length]`.
    pub fn from_fn<F: Fn(f64) -> f64>(intervals: usize, length: f64, a: F) -> Result<Self> {
        if intervals < 2 || !(length > 0.0) {
            return Err(Error::InvalidArgument("x-line needs at least 2 intervals and positive length".into()));
        }
        let hx = length / intervals as f64;
        let x: Vec<f64> = (1..intervals).map(|i| i as f64 * hx).collect();
        let a: Vec<f64> = x.iter().map(|&x| a(x)).collect();
        Self::new(hx, x, a)
    }

    /// Samples the closed-form profile on a uniform line over `[0, 1]`.
    pub fn from_profile(profile: &DampingProfile, intervals: usize) -> Result<Self> {
        Self::from_fn(intervals, 1.0, |x| profile.value_at(x))
    }

    /// x-line of a rectangle mesh, carrying the minorant `inf_y a(x, y)`.
    pub fn from_rectangle(mesh: &GridMesh, damping: &DampingProfile) -> Result<Self> {
        mesh.rectangle_dims()
            .ok_or_else(|| Error::Geometry("separation of variables needs a rectangle mesh".into()))?;
        mesh.check_len(damping.values().len())?;
        let (x, a): (Vec<f64>, Vec<f64>) = damping.inf_over_y(mesh).into_iter().unzip();
        Self::new(mesh.hx(), x, a)
    }

    fn new(hx: f64, x: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if a.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Damping("damping on the x-line must be finite and nonnegative".into()));
        }
        Ok(Self { hx, x, a })
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn norm(&self, u: &[Complex64]) -> f64 {
        (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.hx).sqrt()
    }

    /// Centred difference `(g_{i+1} - g_{i-1}) / 2h` with zero boundary values.
    pub fn centred_derivative(&self, g: &[Complex64]) -> Vec<Complex64> {
        let n = g.len();
        let at = |i: isize| if i < 0 || i as usize >= n { ZERO } else { g[i as usize] };
        (0..n as isize).map(|i| (at(i + 1) - at(i - 1)) / (2.0 * self.hx)).collect()
    }

    /// Bands `(lower, diag, upper)` of `-∂²_x + 2iaλ + shift`.
    fn bands(&self, lambda: f64, shift: f64) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let n = self.len();
        let c = 1.0 / (self.hx * self.hx);
        let off = vec![Complex64::new(-c, 0.0); n - 1];
        let diag = self.a.iter().map(|&a| Complex64::new(2.0 * c + shift, 2.0 * a * lambda)).collect();
        (off.clone(), diag, off)
    }

    fn dense(&self, lambda: f64, shift: f64) -> Mat<Complex64> {
        let (lo, d, up) = self.bands(lambda, shift);
        let n = self.len();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else if i == j + 1 {
                lo[j]
            } else if j == i + 1 {
                up[i]
            } else {
                ZERO
            }
        })
    }

    /// Applies `-∂²_x + 2iaλ + shift` with zero boundary values.
    pub fn apply(&self, lambda: f64, shift: f64, u: &[Complex64]) -> Vec<Complex64> {
        let (lo, d, up) = self.bands(lambda, shift);
        let n = u.len();
        (0..n)
            .map(|i| {
                let mut s = d[i] * u[i];
                if i > 0 {
                    s += lo[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    s += up[i] * u[i + 1];
                }
                s
            })
            .collect()
    }
}

/// One mode of the separated problem.
#[derive(Debug, Clone)]
pub struct Mode1DProblem {
    pub k: usize,
    /// Transverse eigenvalue `κ_k`; `k²` for `Ly = π`.
    pub transverse: f64,
    pub lambda: f64,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl Mode1DProblem {
    pub fn new(k: usize, lambda: f64, f: Vec<Complex64>, g: Vec<Complex64>) -> Self {
        Self { k, transverse: (k * k) as f64, lambda, f, g }
    }

    pub fn with_transverse(mut self, transverse: f64) -> Self {
        self.transverse = transverse;
        self
    }

    fn shift(&self) -> f64 {
        self.transverse - self.lambda * self.lambda
    }

    fn rhs(&self, line: &XLine) -> Vec<Complex64> {
        let dg = line.centred_derivative(&self.g);
        self.f.iter().zip(dg).map(|(f, d)| f + d).collect()
    }

    fn check(&self, line: &XLine) -> Result<()> {
        for len in [self.f.len(), self.g.len()] {
            if len != line.len() {
                return Err(Error::SizeMismatch { expected: line.len(), got: len });
            }
        }
        Ok(())
    }
}

/// Solves one separated boundary value problem.
pub fn solve_mode_bvp(line: &XLine, p: &Mode1DProblem) -> Result<Vec<Complex64>> {
    p.check(line)?;
    let (lo, d, up) = line.bands(p.lambda, p.shift());
    let lu = match TridiagLu::factor(&lo, &d, &up) {
        Ok(lu) => lu,
        Err(Error::Singular { .. }) => {
            let sigma_min = if line.len() <= DENSE_NODE_LIMIT {
                dense_sigma_min(line.dense(p.lambda, p.shift()).as_ref()).unwrap_or(0.0)
            } else {
                0.0
            };
            return Err(Error::Singular { sigma_min });
        }
        Err(e) => return Err(e),
    };
    let u = lu.solve(&p.rhs(line));
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular { sigma_min: 0.0 });
    }
    Ok(u)
}

/// Relative residual `‖T u - (f + ∂_x g)‖ / ‖f + ∂_x g‖` of a mode solve.
pub fn mode_residual(line: &XLine, p: &Mode1DProblem, u: &[Complex64]) -> f64 {
    let rhs = p.rhs(line);
    let tu = line.apply(p.lambda, p.shift(), u);
    let num: f64 = tu.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = rhs.iter().map(|z| z.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// L² operator norm of `R₀(τ) = (-∂²_x + 2iaτ - τ²)^{-1}` on the line.
pub fn r0_operator_norm(line: &XLine, tau: f64) -> Result<f64> {
    let shift = -tau * tau;
    if line.len() <= DENSE_NODE_LIMIT {
        let s = dense_sigma_min(line.dense(tau, shift).as_ref())?;
        if s <= f64::EPSILON * (4.0 / (line.hx * line.hx)) {
            return Err(Error::Singular { sigma_min: s });
        }
        return Ok(1.0 / s);
    }
    let (lo, d, up) = line.bands(tau, shift);
    let lu = TridiagLu::factor(&lo, &d, &up)?;
    // the matrix is complex symmetric, so R^H y = conj(R conj(y))
    let est = PowerIteration::with_tol(1e-6).operator_norm(
        line.len(),
        |x| Ok(lu.solve(x)),
        |y| Ok(conj_vec(&lu.solve(&conj_vec(y)))),
        euclid_inner,
    )?;
    Ok(est.norm)
}

/// `(τ, ‖R₀(τ)‖)` at each requested frequency.
pub fn r0_sweep(line: &XLine, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    taus.iter().map(|&t| Ok((t, r0_operator_norm(line, t)?))).collect()
}

/// Supremum of `(1 + τ)‖R₀(τ)‖` over `[lo, hi]`: a scan with spacing `step`
/// followed by golden-section refinement around every local maximum.
/// Returns the maximizing `τ` and the value.
pub fn r0_window_sup(line: &XLine, lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    if !(hi > lo) || !(step > 0.0) {
        return Err(Error::InvalidArgument("window must satisfy lo < hi and step > 0".into()));
    }
    let weighted = |t: f64| -> Result<f64> { Ok((1.0 + t) * r0_operator_norm(line, t)?) };
    let n = ((hi - lo) / step).ceil() as usize;
    let taus: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
    let vals: Vec<f64> = taus.iter().map(|&t| weighted(t)).collect::<Result<_>>()?;
    let mut best = (taus[0], vals[0]);
    for i in 0..taus.len() {
        if vals[i] > best.1 {
            best = (taus[i], vals[i]);
        }
        let left = i == 0 || vals[i] >= vals[i - 1];
        let right = i + 1 == taus.len() || vals[i] >= vals[i + 1];
        if left && right {
            let a = if i == 0 { taus[0] } else { taus[i - 1] };
            let b = if i + 1 == taus.len() { taus[i] } else { taus[i + 1] };
            if b > a {
                let cand = golden_max(&weighted, a, b, 1e-9 * (1.0 + hi))?;
                if cand.1 > best.1 {
                    best = cand;
                }
            }
        }
    }
    Ok(best)
}

fn golden_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Worst ratio `‖u_k‖ / (‖f_k‖ + ‖g_k‖)` over random data in the regime
/// `k ≥ |λ|`, with `κ_k = k²`.
pub fn high_mode_check(line: &XLine, k: usize, lambda: f64, trials: usize, seed: u64) -> Result<f64> {
    if (k as f64) < lambda.abs() {
        return Err(Error::Regime(format!("high-mode estimate needs k ≥ |λ|, got k = {k}, λ = {lambda}")));
    }
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let s = seed.wrapping_add(2 * t as u64);
        let p = Mode1DProblem::new(k, lambda, random_field(line.len(), s), random_field(line.len(), s + 1));
        worst = worst.max(mode_ratio(line, &p)?);
    }
    Ok(worst)
}

/// `‖u_k‖ / (‖f_k‖ + ‖g_k‖)` for one problem; zero data gives zero.
pub fn mode_ratio(line: &XLine, p: &Mode1DProblem) -> Result<f64> {
    let data = line.norm(&p.f) + line.norm(&p.g);
    if data == 0.0 {
        return Ok(0.0);
    }
    let u = solve_mode_bvp(line, p)?;
    Ok(line.norm(&u) / data)
}

/// Sine coefficients `u_k(x_i) = ⟨u(x_i, ·), e_k⟩` of a field on a rectangle.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    /// `coefficients[k - 1][i]`.
    coefficients: Vec<Vec<Complex64>>,
    ly: f64,
    hx: f64,
    hy: f64,
}

/// DST-I `S_k = Σ_{j=1}^{N-1} v_j sin(πjk/N)`, `k = 1..N-1`, via the odd
/// extension of length `2N`.
struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        Self { n, fft }
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut buf = vec![ZERO; 2 * n];
        for (j, &x) in v.iter().enumerate() {
            buf[j + 1] = x;
            buf[2 * n - 1 - j] = -x;
        }
        self.fft.process(&mut buf);
        // X_k = -2i S_k
        (1..n).map(|k| buf[k] * Complex64::new(0.0, 0.5)).collect()
    }
}

/// Decomposes a field on a rectangle mesh into transverse sine modes.
pub fn sine_decompose(mesh: &GridMesh, u: &[Complex64]) -> Result<ModeDecomposition> {
    let (nx, ny) = mesh
        .rectangle_dims()
        .ok_or_else(|| Error::Geometry("sine decomposition needs a rectangle mesh".into()))?;
    mesh.check_len(u.len())?;
    let ly = mesh.spec().ly;
    let hy = mesh.hy();
    let dst = SineTransform::new(ny + 1);
    let scale = hy * (2.0 / ly).sqrt();
    let mut coefficients = vec![vec![ZERO; nx]; ny];
    for i in 0..nx {
        // column-major numbering: column i holds ny consecutive values
        let col = &u[i * ny..(i + 1) * ny];
        for (k, s) in dst.apply(col).into_iter().enumerate() {
            coefficients[k][i] = s * scale;
        }
    }
    Ok(ModeDecomposition { coefficients, ly, hx: mesh.hx(), hy })
}

impl ModeDecomposition {
    pub fn n_modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    /// Coefficient line of mode `k ≥ 1`.
    pub fn mode(&self, k: usize) -> Option<&[Complex64]> {
        k.checked_sub(1).and_then(|i| self.coefficients.get(i)).map(|v| v.as_slice())
    }

    /// Replaces the coefficient line of mode `k`.
    pub fn set_mode(&mut self, k: usize, values: Vec<Complex64>) -> Result<()> {
        let slot = k
            .checked_sub(1)
            .and_then(|i| self.coefficients.get_mut(i))
            .ok_or_else(|| Error::InvalidArgument(format!("mode {k} out of range")))?;
        if values.len() != slot.len() {
            return Err(Error::SizeMismatch { expected: slot.len(), got: values.len() });
        }
        *slot = values;
        Ok(())
    }

    /// Continuum transverse eigenvalue `(kπ/Ly)²`.
    pub fn transverse_eigenvalue(&self, k: usize) -> f64 {
        let w = k as f64 * std::f64::consts::PI / self.ly;
        w * w
    }

    /// Eigenvalue of the discrete `-∂²_y` on `sin(kπy/Ly)`.
    pub fn discrete_transverse_eigenvalue(&self, k: usize) -> f64 {
        let s = (k as f64 * std::f64::consts::PI * self.hy / (2.0 * self.ly)).sin();
        4.0 * s * s / (self.hy * self.hy)
    }

    /// `Σ_k ‖u_k‖²` with the x-quadrature weight.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * self.hx
    }

    /// Inverse transform back to the mesh numbering.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let ny = self.coefficients.len();
        let nx = self.coefficients.first().map_or(0, |c| c.len());
        let dst = SineTransform::new(ny + 1);
        let scale = (2.0 / self.ly).sqrt();
        let mut out = vec![ZERO; nx * ny];
        let mut col = vec![ZERO; ny];
        for i in 0..nx {
            for (c, row) in col.iter_mut().zip(&self.coefficients) {
                *c = row[i];
            }
            for (j, v) in dst.apply(&col).into_iter().enumerate() {
                out[i * ny + j] = v * scale;
            }
        }
        out
    }
}
