//! Energy decay of bouncing-ball data on the stadium with wing damping,
//! and the empirical decay constants C_k.
//!
//! cargo run --release --example energy_decay [T]

use std::f64::consts::PI;

use stadium_decay::evolution::{evolve_with, CFL};
use stadium_decay::{bouncing_ball_data, build_stadium, build_wing_damping, decay_bound_functional, fit_decay_with_log};

fn main() -> stadium_decay::Result<()> {
    let t_final: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100.0);
    let mesh = build_stadium(PI / 2.0, 0.05)?;
    let d = build_wing_damping(&mesh, [0.15, 0.85], 1.0)?;
    let data = bouncing_ball_data(&mesh, 0.5, 0.2, 1)?;
    let dt = CFL * mesh.hx().min(mesh.hy());

    let damped = evolve_with(&mesh, Some(&d), &data, t_final, dt)?;
    let free = evolve_with(&mesh, None, &data, t_final.min(20.0), dt)?;
    println!("dt = {dt:.4}, {} samples, energy never increases: {}", damped.times.len(), damped.max_relative_increase() <= 1e-12);
    println!("undamped state energy drift over t ≤ 20: {:.2e}", free.state_energy_drift());

    for (t, e) in damped.times.iter().zip(&damped.energies).step_by(damped.times.len() / 10) {
        println!("t = {t:7.2}  E = {e:.4e}");
    }
    for k in [1, 2] {
        println!("C_{k} = {:.4e}", decay_bound_functional(&damped, k)?);
    }

    let (ts, es): (Vec<f64>, Vec<f64>) =
        damped.times.iter().zip(&damped.energies).filter(|(t, _)| **t >= 2.0 && **t <= 20.0).map(|(t, e)| (*t, *e)).unzip();
    let fit = fit_decay_with_log(&ts, &es, 1, None)?;
    println!("effective rate on [2, 20] after log removal: {:.3}", fit.exponent);
    Ok(())
}
