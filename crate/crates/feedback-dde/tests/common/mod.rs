//! Shared fixtures for the integration suites.

use feedback_dde::model::{
    ActivationKind, DecaySpec, ModelSpec, Production1Spec, Production2Spec, Repression,
    TimeProfile,
};

/// Minimal three-component cycle with unit losses:
/// F = 2/(1+x), G = x/(1+y), H = x, b = identity, T = 1.
pub fn worked_cycle() -> ModelSpec {
    let unit = |base: f64| TimeProfile::constant(base, 1.0).unwrap();
    let model = ModelSpec {
        n: 2,
        period: 1.0,
        tau: vec![0.25, 0.0],
        eps: vec![0.0, 0.0],
        f: Production1Spec::HillRepression {
            profile: unit(2.0),
            kappa: 1.0,
            m: 1,
        },
        g: vec![Production2Spec {
            profile: unit(1.0),
            up: ActivationKind::LinearGain,
            down: Some(Repression {
                kappa_w: 1.0,
                m_w: 1,
            }),
        }],
        h: Production1Spec::LinearGain { profile: unit(1.0) },
        b: vec![
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
        ],
    };
    model.validate().unwrap();
    model
}

/// Two-component cycle: F = 1/(1+x), H = x, b = identity, T = 1.
pub fn short_cycle() -> ModelSpec {
    let unit = |base: f64| TimeProfile::constant(base, 1.0).unwrap();
    let model = ModelSpec {
        n: 1,
        period: 1.0,
        tau: vec![0.25],
        eps: vec![0.0],
        f: Production1Spec::HillRepression {
            profile: unit(1.0),
            kappa: 1.0,
            m: 1,
        },
        g: vec![],
        h: Production1Spec::LinearGain { profile: unit(1.0) },
        b: vec![
            DecaySpec::Linear { beta: 1.0 },
            DecaySpec::Linear { beta: 1.0 },
        ],
    };
    model.validate().unwrap();
    model
}
