//! Time integration of `∂²_t u - Δu + 2a ∂_t u = 0` and energy bookkeeping.
//!
//! The scheme is staggered leapfrog with the damping averaged over the two
//! half steps:
//!
//! ```text
//! (1 + a dt) v^{n+1/2} = (1 - a dt) v^{n-1/2} - dt (-Δ_h) u^n
//! u^{n+1} = u^n + dt v^{n+1/2}
//! ```
//!
//! It dissipates the staggered energy
//! `E_{n+1/2} = ½‖v^{n+1/2}‖² + ½⟨-Δ_h u^{n+1}, u^n⟩` exactly:
//! `E_{n+1/2} - E_{n-1/2} = -(dt/2)⟨a s, s⟩` with `s = v^{n+1/2} + v^{n-1/2}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::geometry::GridMesh;
use crate::resolvent2d::h_norm;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `dt ≤ CFL · min(hx, hy)`.
pub const CFL: f64 = 0.4;

pub const METHOD: &str = "leapfrog-centred-damping";

/// Initial data `u(0) = u0`, `D_t u(0) = u1` with `D_t = -i∂_t`, so that
/// `∂_t u(0) = i u1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPair {
    pub u0: Vec<Complex64>,
    pub u1: Vec<Complex64>,
}

impl CauchyPair {
    pub fn new(mesh: &GridMesh, u0: Vec<Complex64>, u1: Vec<Complex64>) -> Result<Self> {
        mesh.check_len(u0.len())?;
        mesh.check_len(u1.len())?;
        Ok(Self { u0, u1 })
    }

    /// Data with prescribed velocity `∂_t u(0) = v0`.
    pub fn from_velocity(mesh: &GridMesh, u0: Vec<Complex64>, v0: &[Complex64]) -> Result<Self> {
        Self::new(mesh, u0, v0.iter().map(|v| -I * v).collect())
    }

    pub fn velocity(&self) -> Vec<Complex64> {
        self.u1.iter().map(|z| I * z).collect()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { u0: self.u0.iter().map(|z| z * c).collect(), u1: self.u1.iter().map(|z| z * c).collect() }
    }

    /// Stacked pair `[u0; u1]`.
    pub fn stacked(&self) -> Vec<Complex64> {
        let mut x = self.u0.clone();
        x.extend_from_slice(&self.u1);
        x
    }
}

/// `½(⟨-Δ_h u, u⟩ + ‖v‖²)`.
pub fn energy(mesh: &GridMesh, u: &[Complex64], v: &[Complex64]) -> Result<f64> {
    mesh.check_len(u.len())?;
    mesh.check_len(v.len())?;
    let lu = mesh.apply_laplacian(u)?;
    Ok(0.5 * (mesh.inner(&lu, u).re + mesh.norm(v).powi(2)))
}

/// Explicit stepper state.
pub struct Leapfrog<'m> {
    mesh: &'m GridMesh,
    a: Vec<f64>,
    dt: f64,
    step: usize,
    u: Vec<Complex64>,
    /// `v^{n-1/2}`
    v_prev: Vec<Complex64>,
    /// `v^{n+1/2}` and `u^{n+1}`, computed ahead so the state at step `n` is
    /// centred.
    v_next: Vec<Complex64>,
    u_next: Vec<Complex64>,
    lu: Vec<Complex64>,
    /// `E_{n-1/2}`
    e_prev: f64,
    e_next: f64,
}

impl<'m> Leapfrog<'m> {
    /// `a = None` means undamped.
    pub fn new(mesh: &'m GridMesh, damping: Option<&DampingProfile>, data: &CauchyPair, dt: f64) -> Result<Self> {
        let limit = CFL * mesh.hx().min(mesh.hy());
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        mesh.check_len(data.u0.len())?;
        let n = mesh.n_interior();
        let a = match damping {
            Some(d) => {
                mesh.check_len(d.values().len())?;
                d.values().to_vec()
            }
            None => vec![0.0; n],
        };
        let v0 = data.velocity();
        let mut lu = vec![ZERO; n];
        mesh.laplacian_into(&data.u0, &mut lu);
        let h = 0.5 * dt;
        let v_prev: Vec<Complex64> = (0..n).map(|p| v0[p] + h * (lu[p] + 2.0 * a[p] * v0[p])).collect();
        let u_prev: Vec<Complex64> = (0..n).map(|p| data.u0[p] - dt * v_prev[p]).collect();
        let mut s = Self {
            mesh,
            a,
            dt,
            step: 0,
            u: data.u0.clone(),
            v_prev,
            v_next: vec![ZERO; n],
            u_next: vec![ZERO; n],
            lu,
            e_prev: 0.0,
            e_next: 0.0,
        };
        s.e_prev = s.staggered_energy(&s.v_prev, &s.u, &u_prev);
        s.advance_half();
        Ok(s)
    }

    fn staggered_energy(&self, v: &[Complex64], u_hi: &[Complex64], u_lo: &[Complex64]) -> f64 {
        let mut l = vec![ZERO; u_hi.len()];
        self.mesh.laplacian_into(u_hi, &mut l);
        0.5 * (self.mesh.norm(v).powi(2) + self.mesh.inner(&l, u_lo).re)
    }

    /// Computes `v^{n+1/2}`, `u^{n+1}` and `E_{n+1/2}` from the current state.
    fn advance_half(&mut self) {
        let dt = self.dt;
        self.mesh.laplacian_into(&self.u, &mut self.lu);
        for p in 0..self.u.len() {
            let ad = self.a[p] * dt;
            self.v_next[p] = ((1.0 - ad) * self.v_prev[p] - dt * self.lu[p]) / (1.0 + ad);
            self.u_next[p] = self.u[p] + dt * self.v_next[p];
        }
        self.e_next = self.staggered_energy(&self.v_next, &self.u_next, &self.u);
    }

    pub fn step(&mut self) {
        std::mem::swap(&mut self.u, &mut self.u_next);
        std::mem::swap(&mut self.v_prev, &mut self.v_next);
        self.e_prev = self.e_next;
        self.step += 1;
        self.advance_half();
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    /// Centred velocity `(v^{n+1/2} + v^{n-1/2}) / 2`.
    pub fn velocity(&self) -> Vec<Complex64> {
        self.v_prev.iter().zip(&self.v_next).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// `(E_{n-1/2} + E_{n+1/2}) / 2`; nonincreasing in `n` for `a ≥ 0`.
    pub fn dissipated_energy(&self) -> f64 {
        0.5 * (self.e_prev + self.e_next)
    }

    /// `½(⟨-Δ_h u^n, u^n⟩ + ‖v^n‖²)` with the centred velocity.
    pub fn state_energy(&self) -> f64 {
        let v = self.velocity();
        let mut l = vec![ZERO; self.u.len()];
        self.mesh.laplacian_into(&self.u, &mut l);
        0.5 * (self.mesh.inner(&l, &self.u).re + self.mesh.norm(&v).powi(2))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v_next).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    /// Exactly dissipated staggered energy of the scheme.
    pub energies: Vec<f64>,
    /// `½(⟨-Δ_h u, u⟩ + ‖∂_t u‖²)` at the same instants.
    pub state_energies: Vec<f64>,
    /// `k → ‖(u0, u1)‖_{D(A^k)}`.
    pub data_norms: BTreeMap<u32, f64>,
    pub dt: f64,
    pub sample_every: usize,
    pub method: String,
}

/// Smoothed bouncing-ball data: `u0 = ψ((x - center)/width) sin(k π y / Ly)`,
/// `u1 = 0`, with the C^∞ bump `ψ(r) = exp(1 - 1/(1 - r²))` on `|r| < 1`.
pub fn bouncing_ball_data(mesh: &GridMesh, center: f64, width: f64, k: usize) -> Result<CauchyPair> {
    if !(width > 0.0) || k == 0 {
        return Err(Error::InvalidArgument("bump width and mode index must be positive".into()));
    }
    let ly = mesh.spec().ly;
    let u0 = mesh.sample(|x, y| {
        let r = (x - center) / width;
        let bump = if r.abs() < 1.0 { (1.0 - 1.0 / (1.0 - r * r)).exp() } else { 0.0 };
        Complex64::new(bump * (k as f64 * std::f64::consts::PI * y / ly).sin(), 0.0)
    });
    if u0.iter().all(|z| *z == ZERO) {
        return Err(Error::InvalidArgument("bump misses every interior node".into()));
    }
    let n = u0.len();
    CauchyPair::new(mesh, u0, vec![ZERO; n])
}

/// Steps per trace sample: `⌈0.1 / dt⌉`.
pub fn sample_interval(dt: f64) -> usize {
    ((0.1 / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Integrates to time `t_final` and records the energy every
/// [`sample_interval`] steps. Graph norms for `k = 0, 1, 2` are attached.
pub fn evolve(mesh: &GridMesh, damping: &DampingProfile, data: &CauchyPair, t_final: f64, dt: f64) -> Result<EnergyTrace> {
    evolve_with(mesh, Some(damping), data, t_final, dt)
}

/// As [`evolve`]; `None` integrates the undamped equation.
pub fn evolve_with(mesh: &GridMesh, damping: Option<&DampingProfile>, data: &CauchyPair, t_final: f64, dt: f64) -> Result<EnergyTrace> {
    let mut stepper = Leapfrog::new(mesh, damping, data, dt)?;
    let every = sample_interval(dt);
    let n_steps = (t_final / dt).round() as usize;
    let mut data_norms = BTreeMap::new();
    for k in 0..=2 {
        data_norms.insert(k, d_ak_norm_with(mesh, damping, data, k)?);
    }
    let mut trace = EnergyTrace {
        times: Vec::new(),
        energies: Vec::new(),
        state_energies: Vec::new(),
        data_norms,
        dt,
        sample_every: every,
        method: METHOD.to_string(),
    };
    loop {
        if stepper.steps() % every == 0 || stepper.steps() == n_steps {
            if !stepper.is_finite() {
                return Err(Error::NonFinite { t: stepper.time(), step: stepper.steps() });
            }
            trace.times.push(stepper.time());
            trace.energies.push(stepper.dissipated_energy());
            trace.state_energies.push(stepper.state_energy());
        }
        if stepper.steps() >= n_steps {
            break;
        }
        stepper.step();
    }
    Ok(trace)
}

fn apply_generator(mesh: &GridMesh, a: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let n = mesh.n_interior();
    let (u, v) = x.split_at(n);
    let mut lu = vec![ZERO; n];
    mesh.laplacian_into(u, &mut lu);
    let mut out = v.to_vec();
    out.extend((0..n).map(|p| lu[p] + 2.0 * I * a[p] * v[p]));
    out
}

/// Graph norm `‖x‖_H + ‖A^k x‖_H` of `x = (u0, u1)`.
pub fn d_ak_norm(mesh: &GridMesh, damping: &DampingProfile, data: &CauchyPair, k: u32) -> Result<f64> {
    d_ak_norm_with(mesh, Some(damping), data, k)
}

fn d_ak_norm_with(mesh: &GridMesh, damping: Option<&DampingProfile>, data: &CauchyPair, k: u32) -> Result<f64> {
    mesh.check_len(data.u0.len())?;
    let a = damping.map_or_else(|| vec![0.0; mesh.n_interior()], |d| d.values().to_vec());
    let x = data.stacked();
    let base = h_norm(mesh, &x);
    if k == 0 {
        return Ok(base);
    }
    let mut y = x;
    for _ in 0..k {
        y = apply_generator(mesh, &a, &y);
    }
    Ok(base + h_norm(mesh, &y))
}

/// `E^{1/2} t^{k/2} / ((log t)^{k/2+1} ‖data‖_{D(A^k)})` at one sample.
pub fn decay_functional_at(t: f64, e: f64, k: u32, data_norm: f64) -> f64 {
    let p = k as f64 / 2.0;
    e.max(0.0).sqrt() * t.powf(p) / (t.ln().powf(p + 1.0) * data_norm)
}

fn data_norm(trace: &EnergyTrace, k: u32) -> Result<f64> {
    let norm = *trace
        .data_norms
        .get(&k)
        .ok_or_else(|| Error::InvalidArgument(format!("trace has no D(A^{k}) norm")))?;
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("initial data vanish".into()));
    }
    Ok(norm)
}

fn check_span(trace: &EnergyTrace) -> Result<()> {
    if trace.times.last().is_none_or(|&t| t < 2.0) {
        return Err(Error::InvalidArgument("trace must reach t = 2".into()));
    }
    Ok(())
}

/// Empirical constant `sup_{t ≥ 2} E^{1/2} t^{k/2} / ((log t)^{k/2+1} ‖data‖_{D(A^k)})`.
pub fn decay_bound_functional(trace: &EnergyTrace, k: u32) -> Result<f64> {
    check_span(trace)?;
    let norm = data_norm(trace, k)?;
    Ok(trace
        .times
        .iter()
        .zip(&trace.energies)
        .filter(|(t, _)| **t >= 2.0)
        .map(|(&t, &e)| decay_functional_at(t, e, k, norm))
        .fold(0.0, f64::max))
}

/// `sup_{t ≥ 2} E^{1/2} t^{k/(1+4/m) - ε} / ‖data‖_{D(A^k)}`.
pub fn improved_decay_functional(trace: &EnergyTrace, k: u32, m: u32, eps: f64) -> Result<f64> {
    check_span(trace)?;
    let norm = data_norm(trace, k)?;
    let p = k as f64 / (1.0 + 4.0 / m as f64) - eps;
    Ok(trace
        .times
        .iter()
        .zip(&trace.energies)
        .filter(|(t, _)| **t >= 2.0)
        .map(|(&t, &e)| e.max(0.0).sqrt() * t.powf(p) / norm)
        .fold(0.0, f64::max))
}

impl EnergyTrace {
    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Restriction to samples with `t ≤ t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let n = self.times.iter().take_while(|&&t| t <= t_max + 1e-9).count();
        Self {
            times: self.times[..n].to_vec(),
            energies: self.energies[..n].to_vec(),
            state_energies: self.state_energies[..n].to_vec(),
            ..self.clone()
        }
    }

    /// Largest relative increase between consecutive samples (0 if monotone).
    pub fn max_relative_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { 0.0 })
            .fold(0.0, f64::max)
    }

    /// `max_t |E_state(t) - E_state(0)| / E_state(0)`.
    pub fn state_energy_drift(&self) -> f64 {
        let e0 = self.state_energies[0];
        self.state_energies.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    /// CSV with columns `t,E,sqrtE,functional_k1,functional_k2`; the
    /// functionals are left empty for `t < 2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,E,sqrtE,functional_k1,functional_k2\n");
        let n1 = self.data_norms.get(&1).copied();
        let n2 = self.data_norms.get(&2).copied();
        for (&t, &e) in self.times.iter().zip(&self.energies) {
            let f = |k: u32, n: Option<f64>| match n {
                Some(n) if t >= 2.0 && n > 0.0 => format!("{:.11e}", decay_functional_at(t, e, k, n)),
                _ => String::new(),
            };
            s.push_str(&format!("{t:.11e},{e:.11e},{:.11e},{},{}\n", e.max(0.0).sqrt(), f(1, n1), f(2, n2)));
        }
        s
    }
}
