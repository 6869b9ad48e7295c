//! Certify the face-sign pattern and read off the degree.
//!
//! The averaged map must point inward on every face of the a-priori box:
//! positive on lower faces, negative on upper faces. When the sampled
//! pattern is strict and the boundary homotopy stays away from zero, the
//! degree on the box is (−1)^(n+1): −1 for a three-component cycle, +1 for
//! a two-component one.

use feedback_dde::bounds::{compute_bounds, homotopy_scan, miranda_certificate, phi_root};
use feedback_dde::model::{
    DecaySpec, ModelSpec, Production1Spec, TestosteronePreset, TimeProfile,
};

fn two_component_cycle() -> Result<ModelSpec, Box<dyn std::error::Error>> {
    let unit = |base: f64| TimeProfile::constant(base, 1.0);
    let model = ModelSpec {
        n: 1,
        period: 1.0,
        tau: vec![0.25],
        eps: vec![0.0],
        f: Production1Spec::HillRepression {
            profile: unit(1.0)?,
            kappa: 1.0,
            m: 1,
        },
        g: vec![],
        h: Production1Spec::LinearGain { profile: unit(1.0)? },
        b: vec![
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
        ],
    };
    model.validate()?;
    Ok(model)
}

fn certify(name: &str, model: &ModelSpec) -> Result<(), Box<dyn std::error::Error>> {
    let bbox = compute_bounds(model, 0.05, 256)?;
    let mut cert = miranda_certificate(model, &bbox, 9, 256);
    cert.homotopy = Some(homotopy_scan(model, &bbox, 10, 9, 256));
    println!("{name}:");
    for fs in &cert.face_signs {
        println!(
            "  component {}: lower-face min {:+.4e}, upper-face max {:+.4e}",
            fs.component, fs.lower_min, fs.upper_max
        );
    }
    if let Some(scan) = &cert.homotopy {
        println!("  homotopy min |h| = {:.4e} at λ = {}", scan.min_norm, scan.at_lambda);
    }
    println!(
        "  valid: {}, degree: {:?}",
        cert.is_valid(),
        cert.degree
    );
    let root = phi_root(model, &bbox, 1e-10, 256)?;
    println!("  averaged-map root: {root:?}\n");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0]).build()?;
    certify("three-component secretion preset", &preset)?;
    certify("two-component cycle", &two_component_cycle()?)?;
    Ok(())
}
