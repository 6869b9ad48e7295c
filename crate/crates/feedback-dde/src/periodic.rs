//! Periodic-orbit search by forward iteration of the period return map.
//!
//! A periodic solution is a fixed point of the map that integrates one
//! forcing period beyond a history segment and keeps the trailing window.
//! Forward iteration (power iteration on the flow) finds it whenever the
//! orbit attracts; an orbit that attracts too slowly, or not at all, comes
//! back as an explicit non-convergence outcome rather than a wrong answer —
//! existence of the orbit does not depend on it being attracting. Newton
//! shooting on the discretized segment would extend this to unstable orbits
//! and is the natural extension point.

use crate::bounds::{phi_root, BoundsBox, BoundsError};
use crate::dde::{self, DdeError, HistorySegment, Trajectory};
use crate::model::ModelSpec;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error(
        "return map did not converge within {periods} periods (last residual {last_residual:.3e}); \
         this does not contradict existence of the periodic orbit — the theory guarantees \
         existence, not attractivity, so the orbit may attract too slowly or be unstable"
    )]
    NonConvergence {
        periods: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },
    #[error(transparent)]
    Integration(#[from] DdeError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// Search configuration; defaults match the pipeline defaults.
#[derive(Debug, Clone)]
pub struct PeriodicConfig {
    /// Relative max-norm residual between consecutive return-map iterates.
    pub tol: f64,
    pub max_periods: usize,
    pub lambda: f64,
    /// Integration step; `None` picks [`dde::default_step`].
    pub step: Option<f64>,
    pub quad_nodes: usize,
}

impl Default for PeriodicConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_periods: 2000,
            lambda: 1.0,
            step: None,
            quad_nodes: 256,
        }
    }
}

/// A converged periodic orbit: the fixed-point history segment, the dense
/// orbit over one period, and convergence metadata.
#[derive(Debug)]
pub struct PeriodicOrbit {
    pub segment: HistorySegment,
    pub orbit: Trajectory,
    pub residual: f64,
    pub iterations: usize,
    pub lambda: f64,
    /// Per-component max − min over the period.
    pub amplitude: Vec<f64>,
}

/// Advance a history segment by one forcing period: integrate across the
/// period (forcing evaluated at absolute time, so the phase is preserved)
/// and extract the trailing window of equal span.
pub fn period_map(
    model: &ModelSpec,
    seg: &HistorySegment,
    lambda: f64,
    step: f64,
) -> Result<HistorySegment, DdeError> {
    let t_next = seg.t_end() + model.period;
    let traj = dde::integrate(model, seg, t_next, step, lambda)?;
    traj.extract_segment(t_next, seg.span())
}

/// Relative max-norm distance between two segments of equal shape:
/// `max |a − b| / (1 + |a|)` over nodes and components.
pub fn residual(a: &HistorySegment, b: &HistorySegment) -> Result<f64, DdeError> {
    if a.dim() != b.dim() || a.nodes() != b.nodes() {
        return Err(DdeError::ShapeMismatch(format!(
            "{}x{} nodes vs {}x{} nodes",
            a.nodes(),
            a.dim(),
            b.nodes(),
            b.dim()
        )));
    }
    if (a.step() - b.step()).abs() > 1e-12 * a.step().max(b.step()) {
        return Err(DdeError::ShapeMismatch(format!(
            "node spacing {} vs {}",
            a.step(),
            b.step()
        )));
    }
    let mut worst = 0.0f64;
    for node in 0..a.nodes() {
        for (va, vb) in a.state(node).iter().zip(b.state(node)) {
            worst = worst.max((va - vb).abs() / (1.0 + va.abs()));
        }
    }
    Ok(worst)
}

/// Locate the periodic orbit inside a certified box by iterating the return
/// map from a constant history at the averaged-map root (box center when the
/// root search fails). Each iterate is re-based by one period so node times
/// stay small; the forcing is period-exact under that shift.
pub fn find_periodic(
    model: &ModelSpec,
    bbox: &BoundsBox,
    config: &PeriodicConfig,
) -> Result<PeriodicOrbit, PeriodicError> {
    let step = config.step.unwrap_or_else(|| dde::default_step(model));
    let start = phi_root(model, bbox, 1e-10, config.quad_nodes)
        .unwrap_or_else(|_| bbox.center());
    let nodes = dde::history_nodes(model.max_delay(), step);
    let seg = HistorySegment::constant(&start, 0.0, step, nodes);
    find_periodic_from(model, seg, config, step)
}

/// Same search from an explicit starting segment (must end at t = 0).
pub fn find_periodic_from(
    model: &ModelSpec,
    mut seg: HistorySegment,
    config: &PeriodicConfig,
    step: f64,
) -> Result<PeriodicOrbit, PeriodicError> {
    let mut residuals = Vec::new();
    for iteration in 1..=config.max_periods {
        let mut next = period_map(model, &seg, config.lambda, step)?;
        next.shift_time(-model.period);
        let r = residual(&seg, &next)?;
        residuals.push(r);
        seg = next;
        if r <= config.tol {
            let orbit = dde::integrate(model, &seg, model.period, step, config.lambda)?;
            let amplitude = (0..model.dim())
                .map(|c| {
                    let (lo, hi) = orbit.component_range(c);
                    hi - lo
                })
                .collect();
            return Ok(PeriodicOrbit {
                segment: seg,
                orbit,
                residual: r,
                iterations: iteration,
                lambda: config.lambda,
                amplitude,
            });
        }
    }
    Err(PeriodicError::NonConvergence {
        periods: config.max_periods,
        last_residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        residual_history: residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentContainment {
    pub component: usize,
    pub orbit_min: f64,
    pub orbit_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Per-component comparison of the orbit range against the box.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub slack: f64,
    pub all_pass: bool,
    pub components: Vec<ComponentContainment>,
}

/// Check that the orbit stays inside `[lower − slack, upper + slack]`
/// component-wise over one period.
pub fn box_containment(orbit: &PeriodicOrbit, bbox: &BoundsBox, slack: f64) -> ContainmentReport {
    let components: Vec<ComponentContainment> = (0..orbit.orbit.dim())
        .map(|c| {
            let (orbit_min, orbit_max) = orbit.orbit.component_range(c);
            let lower = bbox.lower[c];
            let upper = bbox.upper[c];
            ComponentContainment {
                component: c,
                orbit_min,
                orbit_max,
                lower,
                upper,
                pass: orbit_min >= lower - slack && orbit_max <= upper + slack,
            }
        })
        .collect();
    ContainmentReport {
        slack,
        all_pass: components.iter().all(|c| c.pass),
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::compute_bounds;
    use crate::model::{
        ActivationKind, DecaySpec, Production1Spec, Production2Spec, Repression,
        TestosteronePreset, TimeProfile,
    };
    use approx::assert_abs_diff_eq;

    fn worked_cycle() -> ModelSpec {
        let unit = |base: f64| TimeProfile::constant(base, 1.0).unwrap();
        ModelSpec {
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
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_the_return_map() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let root = phi_root(&model, &bbox, 1e-12, 256).unwrap();
        let step = dde::default_step(&model);
        let nodes = dde::history_nodes(model.max_delay(), step);
        let seg = HistorySegment::constant(&root, 0.0, step, nodes);
        let mut mapped = period_map(&model, &seg, 1.0, step).unwrap();
        mapped.shift_time(-model.period);
        assert!(residual(&seg, &mapped).unwrap() < 1e-10);
    }

    #[test]
    fn period_map_composes_like_the_flow() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = dde::default_step(&model);
        let nodes = dde::history_nodes(model.max_delay(), step);
        let seg = HistorySegment::constant(&[1.2, 0.9, 1.1], 0.0, step, nodes);
        let twice = {
            let once = period_map(&model, &seg, 1.0, step).unwrap();
            period_map(&model, &once, 1.0, step).unwrap()
        };
        let direct = {
            let traj = dde::integrate(&model, &seg, 2.0, step, 1.0).unwrap();
            traj.extract_segment(2.0, seg.span()).unwrap()
        };
        assert!(residual(&twice, &direct).unwrap() <= 1e-12);
    }

    #[test]
    fn residual_properties() {
        let seg = HistorySegment::constant(&[1.0, 2.0], 0.0, 0.1, 5);
        assert_eq!(residual(&seg, &seg).unwrap(), 0.0);

        // one node nudged by 1e-6 at value ~1 gives ~5e-7 relative
        let mut states = Vec::new();
        for _ in 0..5 {
            states.extend_from_slice(&[1.0, 2.0]);
        }
        let mut nudged = states.clone();
        nudged[0] += 1e-6;
        let a = HistorySegment::from_nodes(0.0, 0.1, 2, states, vec![0.0; 10]).unwrap();
        let b = HistorySegment::from_nodes(0.0, 0.1, 2, nudged, vec![0.0; 10]).unwrap();
        assert_abs_diff_eq!(residual(&a, &b).unwrap(), 5e-7, epsilon = 1e-9);

        let short = HistorySegment::constant(&[1.0, 2.0], 0.0, 0.1, 4);
        assert!(residual(&seg, &short).is_err());
    }

    #[test]
    fn autonomous_search_lands_on_the_equilibrium() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let config = PeriodicConfig::default();
        let orbit = find_periodic(&model, &bbox, &config).unwrap();
        assert!(orbit.residual <= config.tol);
        for amp in &orbit.amplitude {
            assert!(*amp <= 10.0 * config.tol, "amplitude {amp}");
        }
        let root = phi_root(&model, &bbox, 1e-10, 256).unwrap();
        for (v, r) in orbit.segment.end_state().iter().zip(&root) {
            assert_abs_diff_eq!(v, r, epsilon = 1e-6);
        }
    }

    #[test]
    fn forced_search_converges_inside_the_box() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let config = PeriodicConfig::default();
        let orbit = find_periodic(&model, &bbox, &config).unwrap();
        assert!(orbit.residual <= config.tol);
        // nonconstant forcing forces a nonconstant orbit
        assert!(orbit.amplitude.iter().any(|&a| a > 1e-3));
        // strictly positive over the period
        for c in 0..3 {
            let (lo, _) = orbit.orbit.component_range(c);
            assert!(lo > 0.0);
        }
        let report = box_containment(&orbit, &bbox, 1e-9);
        assert!(report.all_pass, "{report:?}");

        // fixed-point property re-checked post hoc
        let step = dde::default_step(&model);
        let mut mapped = period_map(&model, &orbit.segment, 1.0, step).unwrap();
        mapped.shift_time(-model.period);
        assert!(residual(&orbit.segment, &mapped).unwrap() <= config.tol);
    }

    #[test]
    fn orbit_period_is_the_forcing_period() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let config = PeriodicConfig::default();
        let orbit = find_periodic(&model, &bbox, &config).unwrap();
        // two applications of the map move the segment by 2T and leave it
        // unchanged, while the swing over one period is far above noise
        let step = dde::default_step(&model);
        let once = period_map(&model, &orbit.segment, 1.0, step).unwrap();
        let mut twice = period_map(&model, &once, 1.0, step).unwrap();
        twice.shift_time(-2.0 * model.period);
        assert!(residual(&orbit.segment, &twice).unwrap() <= 10.0 * config.tol);
        assert!(orbit.amplitude.iter().any(|&a| a > 100.0 * config.tol));
    }

    #[test]
    fn center_and_root_seeds_agree() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let config = PeriodicConfig::default();
        let step = dde::default_step(&model);
        let nodes = dde::history_nodes(model.max_delay(), step);
        let from_root = find_periodic(&model, &bbox, &config).unwrap();
        let center_seg = HistorySegment::constant(&bbox.center(), 0.0, step, nodes);
        let from_center = find_periodic_from(&model, center_seg, &config, step).unwrap();
        assert!(
            residual(&from_root.segment, &from_center.segment).unwrap() <= 10.0 * config.tol
        );
    }

    #[test]
    fn one_period_cannot_converge_and_says_so() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let config = PeriodicConfig {
            max_periods: 1,
            ..PeriodicConfig::default()
        };
        match find_periodic(&model, &bbox, &config) {
            Err(err @ PeriodicError::NonConvergence { .. }) => {
                let message = err.to_string();
                assert!(message.contains("existence"));
                assert!(message.contains("attractivity"));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn shrunken_box_still_contains_the_same_orbit() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let orbit = find_periodic(&model, &bbox, &PeriodicConfig::default()).unwrap();
        let tight = compute_bounds(&model, 0.05 / 100.0, 256).unwrap();
        let cert = crate::bounds::miranda_certificate(&model, &tight, 9, 256);
        if cert.face_valid {
            let report = box_containment(&orbit, &tight, 1e-9);
            assert!(report.all_pass, "{report:?}");
        }
    }
}
