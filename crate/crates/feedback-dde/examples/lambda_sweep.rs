//! Sweep the homotopy parameter λ and watch every orbit respect one box.
//!
//! The right-hand side scaled by λ ∈ (0, 1] keeps the same a-priori bounds:
//! the recursion divides λ out at interior extrema. Orbits found at
//! different λ therefore all live inside the single box certified once.

use feedback_dde::bounds::compute_bounds;
use feedback_dde::model::TestosteronePreset;
use feedback_dde::periodic::{box_containment, find_periodic, PeriodicConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0]).build()?;
    let bbox = compute_bounds(&model, 0.05, 256)?;
    println!(
        "one box for all λ: {:?} .. {:?}\n",
        bbox.lower, bbox.upper
    );

    for lambda in [0.25, 0.5, 1.0] {
        let config = PeriodicConfig {
            lambda,
            ..PeriodicConfig::default()
        };
        match find_periodic(&model, &bbox, &config) {
            Ok(orbit) => {
                let contained = box_containment(&orbit, &bbox, 1e-9).all_pass;
                println!(
                    "λ = {lambda:>4}: {:>3} periods, residual {:.2e}, inside box: {contained}",
                    orbit.iterations, orbit.residual
                );
            }
            Err(err) => println!("λ = {lambda:>4}: {err}"),
        }
    }
    Ok(())
}
