//! Damping coefficients `a(x, y) ≥ 0`.
//!
//! Two families are provided. The *wing-continuous* profile vanishes on a
//! vertical strip of the core rectangle, ramps up linearly towards the
//! vertical sides and is constant on the wings. The *order-m* profile is a
//! monomial boundary layer
//!
//! ```text
//! a(x) = A·((δ - x)₊/δ)^m + A·((x - (Lx - δ))₊/δ)^m
//! ```
//!
//! that vanishes exactly on `[δ, Lx - δ]`, is independent of `y`, and is
//! continued into the wings by its edge value `A`. All derivatives of the
//! order-m profile are evaluated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    WingContinuous,
    SmoothOrderM,
    Constant,
}

/// Closed-form description of a profile, kept next to the sampled values.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Formula {
    Wing { x_lo: f64, x_hi: f64, floor: f64 },
    OrderM { m: u32, delta: f64, amplitude: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone)]
pub struct DampingProfile {
    values: Vec<f64>,
    kind: DampingKind,
    formula: Formula,
    /// x-extent of the core rectangle `[x_min, x_min + lx]`.
    core: (f64, f64),
    a_max: f64,
    wing_floor: f64,
}

/// JSON metadata attached to exported profiles.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DampingMetadata {
    pub kind: DampingKind,
    pub m: Option<u32>,
    pub delta: Option<f64>,
    pub amplitude: f64,
    pub strip: Option<[f64; 2]>,
    pub a_max: f64,
    pub wing_floor: f64,
}

/// Zero on `[x_lo, x_hi]`, linear ramps up to `floor` at the vertical sides
/// of the core rectangle, `floor` on the wings.
pub fn build_wing_damping(mesh: &GridMesh, strip: [f64; 2], floor: f64) -> Result<DampingProfile> {
    let (x0, x1) = core_range(mesh);
    let [x_lo, x_hi] = strip;
    if !(x0 < x_lo && x_lo < x_hi && x_hi < x1) {
        return Err(Error::Damping(format!(
            "strip [{x_lo}, {x_hi}] must be a nonempty interval inside ({x0}, {x1})"
        )));
    }
    if !(floor > 0.0) {
        return Err(Error::Damping(format!("floor must be positive, got {floor}")));
    }
    DampingProfile::sample(mesh, DampingKind::WingContinuous, Formula::Wing { x_lo, x_hi, floor })
}

/// Order-m monomial boundary layer of width `delta`.
pub fn build_smooth_m_damping(mesh: &GridMesh, m: u32, delta: f64, amplitude: f64) -> Result<DampingProfile> {
    if m < 4 {
        return Err(Error::Damping(format!("order m must be at least 4, got {m}")));
    }
    let (x0, x1) = core_range(mesh);
    if !(delta > 0.0 && delta < 0.5 * (x1 - x0)) {
        return Err(Error::Damping(format!("delta = {delta} must lie in (0, Lx/2)")));
    }
    if !(amplitude > 0.0) {
        return Err(Error::Damping(format!("amplitude must be positive, got {amplitude}")));
    }
    DampingProfile::sample(mesh, DampingKind::SmoothOrderM, Formula::OrderM { m, delta, amplitude })
}

/// `a ≡ value` on the whole mesh.
pub fn build_constant_damping(mesh: &GridMesh, value: f64) -> Result<DampingProfile> {
    if !(value >= 0.0) {
        return Err(Error::Damping(format!("constant damping must be nonnegative, got {value}")));
    }
    DampingProfile::sample(mesh, DampingKind::Constant, Formula::Constant { value })
}

fn core_range(mesh: &GridMesh) -> (f64, f64) {
    let spec = mesh.spec();
    (spec.x_min, spec.x_min + spec.lx)
}

fn falling_factorial(m: u32, n: u32) -> f64 {
    (0..n).map(|i| (m - i) as f64).product()
}

impl Formula {
    fn eval(&self, x: f64, core: (f64, f64)) -> f64 {
        let (x0, x1) = core;
        match *self {
            Formula::Wing { x_lo, x_hi, floor } => {
                if x < x_lo {
                    floor * ((x_lo - x) / (x_lo - x0)).min(1.0)
                } else if x > x_hi {
                    floor * ((x - x_hi) / (x1 - x_hi)).min(1.0)
                } else {
                    0.0
                }
            }
            Formula::OrderM { m, delta, amplitude } => {
                // constant continuation into the wings
                let x = x.clamp(x0, x1);
                let left = ((x0 + delta - x) / delta).max(0.0);
                let right = ((x - (x1 - delta)) / delta).max(0.0);
                amplitude * (left.powi(m as i32) + right.powi(m as i32))
            }
            Formula::Constant { value } => value,
        }
    }
}

impl DampingProfile {
    fn sample(mesh: &GridMesh, kind: DampingKind, formula: Formula) -> Result<Self> {
        let core = core_range(mesh);
        let values: Vec<f64> = (0..mesh.n_interior())
            .map(|p| formula.eval(mesh.coords(p).0, core))
            .collect();
        if values.iter().all(|&a| a == 0.0) {
            return Err(Error::Damping("damping vanishes identically on the mesh".into()));
        }
        let a_max = values.iter().copied().fold(0.0, f64::max);
        // closure of the wings: the wing nodes plus the two vertical sides
        let mut wing_floor = formula.eval(core.0, core).min(formula.eval(core.1, core));
        for (p, &a) in values.iter().enumerate() {
            let x = mesh.coords(p).0;
            if x < core.0 || x > core.1 {
                wing_floor = wing_floor.min(a);
            }
        }
        Ok(Self { values, kind, formula, core, a_max, wing_floor })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> DampingKind {
        self.kind
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn wing_floor(&self) -> f64 {
        self.wing_floor
    }

    pub fn order(&self) -> Option<u32> {
        match self.formula {
            Formula::OrderM { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self.formula {
            Formula::OrderM { delta, .. } => Some(delta),
            _ => None,
        }
    }

    /// Evaluates the analytic profile at an arbitrary abscissa.
    pub fn value_at(&self, x: f64) -> f64 {
        self.formula.eval(x, self.core)
    }

    /// `a^{(n)}(x)` of the order-m profile inside the core rectangle.
    pub fn derivative(&self, x: f64, n: u32) -> Result<f64> {
        let Formula::OrderM { m, delta, amplitude } = self.formula else {
            return Err(Error::Damping("closed-form derivatives need an order-m profile".into()));
        };
        if n > m {
            return Ok(0.0);
        }
        let (x0, x1) = self.core;
        let coef = amplitude * falling_factorial(m, n) / delta.powi(m as i32);
        let left = x0 + delta - x;
        let right = x - (x1 - delta);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut d = 0.0;
        if left > 0.0 {
            d += sign * coef * left.powi((m - n) as i32);
        }
        if right > 0.0 {
            d += coef * right.powi((m - n) as i32);
        }
        Ok(d)
    }

    /// Sign condition on the m-th derivative at both ends of the undamped
    /// strip: `a^{(m)} ≥ 0` to the right of `Lx - δ`, and `(-1)^m a^{(m)} ≥ 0`
    /// to the left of `δ` (the mirror image of the right-hand condition).
    pub fn order_m_sign_condition(&self) -> Result<bool> {
        let Formula::OrderM { m, delta, .. } = self.formula else {
            return Err(Error::Damping("sign condition applies to order-m profiles".into()));
        };
        let (x0, x1) = self.core;
        let probes = [0.25, 0.5, 0.75, 0.999];
        let mirror = if m % 2 == 0 { 1.0 } else { -1.0 };
        for s in probes {
            let right = self.derivative(x1 - delta + s * delta, m)?;
            let left = self.derivative(x0 + delta - s * delta, m)?;
            if right < 0.0 || mirror * left < 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest value of `a` over each lattice column of the core rectangle,
    /// as `(x, inf_y a(x, y))`.
    pub fn inf_over_y(&self, mesh: &GridMesh) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in 0..mesh.n_interior() {
            let (x, _) = mesh.coords(p);
            if x < self.core.0 || x > self.core.1 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1.min(self.values[p]),
                _ => out.push((x, self.values[p])),
            }
        }
        out
    }

    /// Abscissae of lattice columns inside the core rectangle on which the
    /// damping vanishes for every y. Vertical bouncing-ball orbits along these
    /// columns never meet the damping region.
    pub fn undamped_columns(&self, mesh: &GridMesh) -> Vec<f64> {
        let mut sup: Vec<(f64, f64)> = Vec::new();
        for p in 0..mesh.n_interior() {
            let (x, _) = mesh.coords(p);
            if x < self.core.0 || x > self.core.1 {
                continue;
            }
            match sup.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1.max(self.values[p]),
                _ => sup.push((x, self.values[p])),
            }
        }
        sup.into_iter().filter(|&(_, a)| a == 0.0).map(|(x, _)| x).collect()
    }

    pub fn metadata(&self) -> DampingMetadata {
        let (m, delta, amplitude, strip) = match self.formula {
            Formula::Wing { x_lo, x_hi, floor } => (None, None, floor, Some([x_lo, x_hi])),
            Formula::OrderM { m, delta, amplitude } => (Some(m), Some(delta), amplitude, None),
            Formula::Constant { value } => (None, None, value, None),
        };
        DampingMetadata { kind: self.kind, m, delta, amplitude, strip, a_max: self.a_max, wing_floor: self.wing_floor }
    }

    /// CSV rows `x,y,a` for every interior node.
    pub fn to_csv(&self, mesh: &GridMesh) -> String {
        let mut s = String::from("x,y,a\n");
        for (p, a) in self.values.iter().enumerate() {
            let (x, y) = mesh.coords(p);
            s.push_str(&format!("{x:.11e},{y:.11e},{a:.11e}\n"));
        }
        s
    }
}

/// Empirical constant of the derivative bound `|a^{(n)}| ≤ C a^{(m-n)/m}`:
/// the supremum of `|a^{(n)}(x)| / a(x)^{(m-n)/m}` over mesh abscissae in the
/// damped part of the core rectangle.
pub fn lemma31_constant(profile: &DampingProfile, mesh: &GridMesh, n: u32) -> Result<f64> {
    let m = profile
        .order()
        .ok_or_else(|| Error::Damping("derivative bound needs an order-m profile".into()))?;
    if n == 0 || n >= m {
        return Err(Error::InvalidArgument(format!("derivative order must satisfy 1 ≤ n < m = {m}, got {n}")));
    }
    let (x0, x1) = profile.core;
    let exponent = (m - n) as f64 / m as f64;
    let mut sup: Option<f64> = None;
    for i in mesh.columns() {
        let x = mesh.x_of_column(i);
        if x < x0 || x > x1 {
            continue;
        }
        let a = profile.value_at(x);
        if a <= 0.0 {
            continue;
        }
        let ratio = profile.derivative(x, n)?.abs() / a.powf(exponent);
        sup = Some(sup.map_or(ratio, |s: f64| s.max(ratio)));
    }
    sup.ok_or_else(|| Error::Damping("no mesh column falls inside the damped boundary layer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rectangle, build_stadium};
    use std::f64::consts::PI;

    #[test]
    fn wing_profile_on_stadium() {
        let mesh = build_stadium(PI / 2.0, 0.05).unwrap();
        let d = build_wing_damping(&mesh, [0.2, 0.8], 1.0).unwrap();
        assert_eq!(d.value_at(0.5), 0.0);
        assert_eq!(d.value_at(-PI / 4.0), 1.0);
        assert_eq!(d.value_at(1.3), 1.0);
        assert!((d.value_at(0.1) - 0.5).abs() < 1e-12);
        assert_eq!(d.wing_floor(), 1.0);
        assert_eq!(d.a_max(), 1.0);
        assert!(d.values().iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn wing_profile_leaves_bouncing_ball_columns_undamped() {
        let mesh = build_stadium(PI / 2.0, 0.05).unwrap();
        let d = build_wing_damping(&mesh, [0.2, 0.8], 1.0).unwrap();
        let cols = d.undamped_columns(&mesh);
        assert!(!cols.is_empty());
        assert!(cols.iter().all(|&x| (0.2..=0.8).contains(&x)));
        let inf = d.inf_over_y(&mesh);
        assert!(inf.iter().any(|&(_, a)| a > 0.0));
    }

    #[test]
    fn wing_profile_rejects_bad_input() {
        let mesh = build_stadium(PI / 2.0, 0.05).unwrap();
        assert!(build_wing_damping(&mesh, [0.6, 0.4], 1.0).is_err());
        assert!(build_wing_damping(&mesh, [0.0, 0.4], 1.0).is_err());
        assert!(build_wing_damping(&mesh, [0.2, 0.8], 0.0).is_err());
    }

    #[test]
    fn order_m_direct_values() {
        let mesh = build_rectangle(1.0, PI, 0.01).unwrap();
        let d = build_smooth_m_damping(&mesh, 4, 0.1, 2.0).unwrap();
        assert!((d.value_at(0.05) - 2.0 / 16.0).abs() < 1e-15);
        assert!((d.value_at(0.95) - 2.0 / 16.0).abs() < 1e-15);
        assert_eq!(d.value_at(0.5), 0.0);
        assert_eq!(d.value_at(0.1), 0.0);
        assert_eq!(d.value_at(0.9), 0.0);
        assert!(d.wing_floor() > 0.0);
        assert!(d.order_m_sign_condition().unwrap());
        assert!(build_smooth_m_damping(&mesh, 3, 0.1, 1.0).is_err());
        assert!(build_smooth_m_damping(&mesh, 4, 0.6, 1.0).is_err());
    }

    #[test]
    fn order_m_vanishes_exactly_on_middle_strip() {
        let mesh = build_stadium(PI / 2.0, 0.02).unwrap();
        let d = build_smooth_m_damping(&mesh, 6, 0.1, 1.0).unwrap();
        for p in 0..mesh.n_interior() {
            let (x, _) = mesh.coords(p);
            let a = d.values()[p];
            if (0.1..=0.9).contains(&x) {
                assert_eq!(a, 0.0);
            } else {
                assert!(a > 0.0, "x = {x}");
            }
        }
        assert!((d.wing_floor() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_are_smooth_across_delta() {
        let mesh = build_rectangle(1.0, PI, 0.01).unwrap();
        let d = build_smooth_m_damping(&mesh, 5, 0.1, 1.0).unwrap();
        for n in 0..5 {
            let below = d.derivative(0.1 - 1e-9, n).unwrap();
            let above = d.derivative(0.1 + 1e-9, n).unwrap();
            // the (m-1)-th derivative vanishes linearly, the others faster
            let tol = if n == 4 { 0.1 } else { 1e-6 };
            assert!(below.abs() < tol && above == 0.0, "n = {n}: {below}");
        }
        // m-th derivative jumps: C^{m-1} but not C^m
        assert!(d.derivative(0.1 - 1e-9, 5).unwrap().abs() > 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference_where_well_conditioned() {
        let mesh = build_rectangle(1.0, PI, 0.01).unwrap();
        let d = build_smooth_m_damping(&mesh, 4, 0.1, 1.0).unwrap();
        let x = 0.95;
        let eps = 1e-6;
        let fd = (d.value_at(x + eps) - d.value_at(x - eps)) / (2.0 * eps);
        assert!((fd - d.derivative(x, 1).unwrap()).abs() < 1e-5);
        let x = 0.03;
        let fd = (d.value_at(x + eps) - d.value_at(x - eps)) / (2.0 * eps);
        assert!((fd - d.derivative(x, 1).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn lemma_constant_for_pure_monomial() {
        // amplitude δ^m turns the right layer into (x - (1-δ))^m
        let mesh = build_rectangle(1.0, PI, 0.005).unwrap();
        let delta: f64 = 0.1;
        let d = build_smooth_m_damping(&mesh, 4, delta, delta.powi(4)).unwrap();
        assert!((lemma31_constant(&d, &mesh, 1).unwrap() - 4.0).abs() < 1e-10);
        assert!((lemma31_constant(&d, &mesh, 2).unwrap() - 12.0).abs() < 1e-10);
        assert!(lemma31_constant(&d, &mesh, 4).is_err());
        assert!(lemma31_constant(&d, &mesh, 0).is_err());
    }

    #[test]
    fn metadata_and_csv() {
        let mesh = build_rectangle(1.0, 1.0, 0.25).unwrap();
        let d = build_wing_damping(&mesh, [0.3, 0.7], 2.0).unwrap();
        let meta = d.metadata();
        assert_eq!(meta.kind, DampingKind::WingContinuous);
        assert_eq!(meta.strip, Some([0.3, 0.7]));
        let csv = d.to_csv(&mesh);
        assert_eq!(csv.lines().count(), 1 + mesh.n_interior());
        assert!(csv.starts_with("x,y,a\n"));
    }
}
