//! Locate the guaranteed periodic orbit of the forced secretion cycle.
//!
//! Pipeline: hypothesis validation → a-priori box → face-sign certificate →
//! return-map iteration from the averaged-map root. The orbit inherits the
//! forcing period; its residual is the relative distance between
//! consecutive return-map iterates.

use feedback_dde::bounds::{compute_bounds, miranda_certificate};
use feedback_dde::model::{SamplingConfig, TestosteronePreset};
use feedback_dde::periodic::{box_containment, find_periodic, PeriodicConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0]).build()?;

    let report = model.check_conditions(&SamplingConfig::default())?;
    if !report.all_passed {
        return Err("model fails hypothesis validation".into());
    }

    let bbox = compute_bounds(&model, 0.05, 256)?;
    let cert = miranda_certificate(&model, &bbox, 9, 256);
    if !cert.is_valid() {
        return Err("face-sign certificate invalid".into());
    }
    println!("certificate valid, degree {:?}", cert.degree);

    let orbit = find_periodic(&model, &bbox, &PeriodicConfig::default())?;
    println!(
        "converged after {} periods with residual {:.3e}",
        orbit.iterations, orbit.residual
    );
    println!("amplitude per component: {:?}", orbit.amplitude);

    let containment = box_containment(&orbit, &bbox, 1e-9);
    for c in &containment.components {
        println!(
            "component {}: orbit in [{:.6}, {:.6}] ⊂ ({:.6}, {:.6}) — {}",
            c.component,
            c.orbit_min,
            c.orbit_max,
            c.lower,
            c.upper,
            if c.pass { "inside" } else { "OUTSIDE" }
        );
    }
    Ok(())
}
