//! Separation of variables on the core rectangle: sine decomposition of a
//! grid function, the high-mode estimate and the 1D damped resolvent.
//!
//! cargo run --release --example mode_reduction

use std::f64::consts::PI;

use stadium_decay::linalg::random_field;
use stadium_decay::mode1d::{high_mode_check, r0_window_sup, sine_decompose, XLine};
use stadium_decay::{build_rectangle, build_smooth_m_damping, build_wing_damping};

fn main() -> stadium_decay::Result<()> {
    let mesh = build_rectangle(1.0, PI, PI / 64.0)?;
    let u = random_field(mesh.n_interior(), 7);
    let modes = sine_decompose(&mesh, &u)?;
    let back = modes.reconstruct();
    let err: f64 = u.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!(
        "{} sine modes, Parseval: {:.6e} vs {:.6e}, round trip error {err:.2e}",
        modes.n_modes(),
        modes.energy(),
        mesh.norm(&u).powi(2)
    );

    // high modes k ≥ λ are controlled without any damping help
    let wing = build_wing_damping(&mesh, [0.15, 0.85], 1.0)?;
    let line = XLine::from_rectangle(&mesh, &wing)?;
    for lambda in [8.0, 16.0] {
        for k in [16, 32, 64] {
            if (k as f64) < lambda {
                continue;
            }
            let r = high_mode_check(&line, k, lambda, 20, 1)?;
            println!("λ={lambda:<4} k={k:<3} worst ‖u_k‖/(‖f_k‖+‖g_k‖) = {r:.4e}");
        }
    }

    // (1+τ)‖R₀(τ)‖ on dyadic windows
    let constant = XLine::from_fn(400, 1.0, |_| 1.0)?;
    let m4 = XLine::from_profile(&build_smooth_m_damping(&mesh, 4, 0.1, 1.0)?, 400)?;
    for (name, line) in [("a≡1", &constant), ("m=4", &m4)] {
        let mut lo = 1.0;
        let mut row = Vec::new();
        while lo < 64.0 {
            let (tau, v) = r0_window_sup(line, lo, 2.0 * lo, 0.5)?;
            row.push(format!("[{lo},{}]: {v:.3} at τ={tau:.2}", 2.0 * lo));
            lo *= 2.0;
        }
        println!("{name}: {}", row.join("  "));
    }
    Ok(())
}
