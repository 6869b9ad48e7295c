//! Compute the a-priori solution box for a minimal feedback cycle and show
//! how the margin controls it.
//!
//! The cycle is F = 2/(1+x), G = x/(1+y), H = x with identity losses, so
//! the recursion can be followed by hand: upper bounds 2·1.05, then ·1.05
//! twice more; lower bounds re-enter the cycle at the feedback maximum.

use feedback_dde::bounds::compute_bounds;
use feedback_dde::model::{
    ActivationKind, DecaySpec, ModelSpec, Production1Spec, Production2Spec, Repression,
    TimeProfile,
};

fn minimal_cycle() -> Result<ModelSpec, Box<dyn std::error::Error>> {
    let unit = |base: f64| TimeProfile::constant(base, 1.0);
    let model = ModelSpec {
        n: 2,
        period: 1.0,
        tau: vec![0.25, 0.0],
        eps: vec![0.0, 0.0],
        f: Production1Spec::HillRepression {
            profile: unit(2.0)?,
            kappa: 1.0,
            m: 1,
        },
        g: vec![Production2Spec {
            profile: unit(1.0)?,
            up: ActivationKind::LinearGain,
            down: Some(Repression {
                kappa_w: 1.0,
                m_w: 1,
            }),
        }],
        h: Production1Spec::LinearGain { profile: unit(1.0)? },
        b: vec![
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
        ],
    };
    model.validate()?;
    Ok(model)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = minimal_cycle()?;
    for delta in [0.01, 0.05, 0.2] {
        let bbox = compute_bounds(&model, delta, 256)?;
        println!("margin {delta}:");
        for k in 0..bbox.dim() {
            println!(
                "  component {k}: ({:.6}, {:.6})  width {:.6}",
                bbox.lower[k],
                bbox.upper[k],
                bbox.width(k)
            );
        }
    }
    Ok(())
}
