//! Dense spectrum of the damped generator on a coarse stadium, the band
//! 0 < Im λ ≤ 2‖a‖∞ and shift-invert refinement of a few eigenvalues.
//!
//! cargo run --release --example spectrum_band

use std::f64::consts::PI;

use stadium_decay::spectrum::SpectrumWindow;
use stadium_decay::{assemble_generator, build_stadium, build_wing_damping, compute_spectrum, Complex64, SpectrumRequest};

fn main() -> stadium_decay::Result<()> {
    let mesh = build_stadium(PI / 2.0, 0.15)?;
    let d = build_wing_damping(&mesh, [0.15, 0.85], 1.0)?;
    let gen = assemble_generator(&mesh, &d)?;
    let dense = compute_spectrum(&gen, &SpectrumRequest::Dense(SpectrumWindow::everything()))?;
    let (lo, hi) = dense.imag_range();
    println!(
        "{} eigenvalues, Im λ ∈ [{lo:.4e}, {hi:.4}], 2 a_max = {}, max residual {:.1e}, reflection defect {:.1e}",
        dense.eigenvalues.len(),
        2.0 * d.a_max(),
        dense.max_residual(),
        dense.reflection_defect()
    );

    // the least damped eigenvalues come from bouncing-ball modes
    let mut slow: Vec<Complex64> = dense.eigenvalues.iter().map(|e| e.lambda).filter(|z| z.re > 0.0).collect();
    slow.sort_by(|a, b| a.im.total_cmp(&b.im));
    for z in slow.iter().take(5) {
        println!("  λ = {:.6} {:+.6}i", z.re, z.im);
    }

    let targets: Vec<Complex64> = slow.iter().take(3).map(|z| z + Complex64::new(0.05, 0.01)).collect();
    let window = SpectrumWindow { re: [0.0, f64::INFINITY], im: [0.0, 2.0] };
    let refined = compute_spectrum(&gen, &SpectrumRequest::ShiftInvert { window, targets, tol: 1e-12, max_iter: 100 })?;
    for e in &refined.eigenvalues {
        println!("shift-invert: λ = {:.10} {:+.10}i, residual {:.1e}", e.lambda.re, e.lambda.im, e.residual);
    }
    Ok(())
}
