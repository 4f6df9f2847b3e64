//! Bouncing-ball quasimodes φ(x) sin(ky) on a truncated strip: Laplacian
//! defect and the residual of undamped evolution against cos(t k_eff).
//!
//! cargo run --release --example quasimode

use std::f64::consts::PI;

use stadium_decay::geometry::build_rectangle_anisotropic;
use stadium_decay::quasimode::{laplacian_defect, quasimode_residual_series, transverse_frequency};
use stadium_decay::{build_quasimode, QuasimodeSpec};

fn main() -> stadium_decay::Result<()> {
    for k in [8usize, 16] {
        let horizon = k as f64 / 4.0;
        let spec = QuasimodeSpec::gaussian(k, 1.5, horizon);
        let l = spec.strip_half_length;
        let mesh = build_rectangle_anisotropic(-l, 2.0 * l, PI, 0.1, PI / 256.0)?;
        let e = build_quasimode(&mesh, &spec)?;
        let dt = 0.4 * mesh.hy();
        println!(
            "k = {k}: strip [-{l}, {l}], ‖e‖² = {:.6} (π/2 = {:.6}), defect {:.4e}, k_eff = {:.5}",
            mesh.norm(&e).powi(2),
            PI / 2.0,
            laplacian_defect(&mesh, &e, k)?,
            transverse_frequency(&mesh, k, dt)
        );
        let times: Vec<f64> = (1..=(horizon / 0.5) as usize).map(|i| 0.5 * i as f64).collect();
        for (t, r) in quasimode_residual_series(&mesh, &spec, &times, dt)? {
            println!("   t = {t:4.1}  residual = {r:.4e}  residual/(t/k) = {:.4}", r / (t / k as f64));
        }
    }
    Ok(())
}
