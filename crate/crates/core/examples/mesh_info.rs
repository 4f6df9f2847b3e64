//! Builds the stadium and a few rectangles, prints their mesh summaries and
//! the undamped columns of the wing damping.
//!
//! cargo run --example mesh_info

use std::f64::consts::PI;

use stadium_decay::geometry::build_rectangle_with_wings;
use stadium_decay::{build_rectangle, build_stadium, build_wing_damping};

fn main() -> stadium_decay::Result<()> {
    for h in [0.1, 0.05, 0.025] {
        let mesh = build_stadium(PI / 2.0, h)?;
        let s = mesh.summary();
        // the exact stadium area is 2β + πβ²
        let exact = PI + PI.powi(3) / 4.0;
        println!("stadium h={h:<6} n={:<6} area≈{:.4} (exact {exact:.4})", s.n_interior, s.area_estimate);
    }

    let mesh = build_stadium(PI / 2.0, 0.05)?;
    let damping = build_wing_damping(&mesh, [0.15, 0.85], 1.0)?;
    let cols = damping.undamped_columns(&mesh);
    println!(
        "wing damping: a_max={} floor={} undamped columns x∈[{:.3}, {:.3}] ({} of them)",
        damping.a_max(),
        damping.wing_floor(),
        cols.first().unwrap(),
        cols.last().unwrap(),
        cols.len()
    );

    let rect = build_rectangle(1.0, PI, PI / 32.0)?;
    println!("{}", serde_json::to_string_pretty(&rect.summary())?);
    let wings = build_rectangle_with_wings(2.0, 1.0, 0.5, 0.05)?;
    println!("rectangle with wings: n={}", wings.n_interior());
    Ok(())
}
