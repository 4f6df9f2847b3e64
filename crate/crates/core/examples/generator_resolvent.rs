//! The generator resolvent (λ - A)^{-1} on H¹₀ × L²: the lower half-plane
//! bound, the block formula check and a short real-axis sweep.
//!
//! cargo run --release --example generator_resolvent

use std::f64::consts::PI;

use stadium_decay::resolvent2d::{generator_sweep, GeneratorResolvent};
use stadium_decay::{build_stadium, build_wing_damping, generator_resolvent_norm, Complex64};

fn main() -> stadium_decay::Result<()> {
    let mesh = build_stadium(PI / 2.0, 0.1)?;
    let d = build_wing_damping(&mesh, [0.15, 0.85], 1.0)?;

    for s in [0.5, 1.0, 2.0, 4.0] {
        let r = generator_resolvent_norm(&mesh, &d, Complex64::new(0.0, -s), 1e-10)?;
        println!("λ = -{s}i: ‖(λ-A)^-1‖ = {:.6} ≤ 1/|Im λ| = {:.6}", r.norm, 1.0 / s);
    }

    let r = GeneratorResolvent::new(&mesh, &d, Complex64::new(6.0, 0.0))?;
    println!("block formula defect at λ = 6: {:.2e}", r.block_identity_defect(3)?);

    let sweep = generator_sweep(&mesh, &d, &[5.0, 7.0, 10.0, 14.0, 20.0], 1e-6, None)?;
    for e in &sweep.entries {
        println!("λ = {:<4} ‖(λ-A)^-1‖ = {:.4e} ({} iterations)", e.lambda, e.norm, e.iterations);
    }
    println!("fitted exponent {:.3}", sweep.fitted_exponent().unwrap_or(f64::NAN));
    Ok(())
}
