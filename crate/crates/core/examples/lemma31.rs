//! Derivative bounds |a^{(n)}| ≤ C a^{(m-n)/m} for the order-m damping layer.
//!
//! cargo run --example lemma31

use std::f64::consts::PI;

use stadium_decay::{build_rectangle, build_smooth_m_damping, lemma31_constant};

fn main() -> stadium_decay::Result<()> {
    let mesh = build_rectangle(1.0, PI, 0.005)?;
    let delta: f64 = 0.1;
    for m in [4u32, 6, 8] {
        let profile = build_smooth_m_damping(&mesh, m, delta, 1.0)?;
        let row: Vec<String> = (1..m).map(|n| Ok(format!("n={n}: {:.4e}", lemma31_constant(&profile, &mesh, n)?))).collect::<stadium_decay::Result<_>>()?;
        println!("m = {m}: {}", row.join("  "));
        // with amplitude δ^m the layer is the monomial (x - x₀)^m and C = m for n = 1
        let monomial = build_smooth_m_damping(&mesh, m, delta, delta.powi(m as i32))?;
        println!("        monomial, n=1: {:.12}", lemma31_constant(&monomial, &mesh, 1)?);
    }
    Ok(())
}
