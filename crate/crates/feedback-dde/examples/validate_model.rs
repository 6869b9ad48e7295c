//! Validate the structural hypotheses of a model on sampled grids.
//!
//! Builds the secretion-cycle preset, checks it, then shows how a broken
//! configuration (a saturating loss that cannot absorb a linear gain)
//! surfaces as an image-containment failure instead of a panic.

use feedback_dde::model::{
    DecaySpec, Production1Spec, SamplingConfig, TestosteronePreset, TimeProfile,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0]).build()?;
    let report = model.check_conditions(&SamplingConfig::default())?;
    println!("secretion preset:");
    for check in &report.checks {
        println!(
            "  hypothesis {} ({}): {}",
            check.hypothesis,
            check.name,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    println!("  all passed: {}\n", report.all_passed);

    // sabotage the tail: a bounded loss cannot reach a linear gain's image
    let mut broken = model;
    broken.h = Production1Spec::LinearGain {
        profile: TimeProfile::constant(5.0, 1.0)?,
    };
    broken.b[2] = DecaySpec::Bounded {
        beta: 1.0,
        kappa: 1.0,
    };
    let report = broken.check_conditions(&SamplingConfig::default())?;
    println!("broken tail:");
    let tail = report.check(4);
    println!("  hypothesis 4 passed: {}", tail.passed);
    println!("  diagnosis: {}", tail.detail);
    Ok(())
}
