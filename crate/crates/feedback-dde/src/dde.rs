//! Fixed-step integration of the delay system by the method of steps.
//!
//! The integrator is classical RK4 with the step capped at the smallest
//! positive delay, so every delayed lookup — including the ones at interior
//! stage times — lands in history that is already computed. Dense output is
//! cubic Hermite on the stored node values and right-hand-side derivatives,
//! which matches the fourth-order accuracy of the stepper. Zero delays are
//! resolved from the current stage value instead of a history lookup, which
//! turns those couplings into plain ODE terms.
//!
//! Derivative jumps that propagate from a constant initial history are not
//! tracked specially; the fixed small step bounds the induced local error.

use crate::model::ModelSpec;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DdeError {
    #[error("step {step} exceeds the smallest positive delay {delay}")]
    StepExceedsDelay { step: f64, delay: f64 },
    #[error("step {step} is not commensurate with the {what} {value}")]
    Incommensurate {
        step: f64,
        what: &'static str,
        value: f64,
    },
    #[error("history lookup at t = {t} is outside the covered interval [{start}, {end}]")]
    HistoryUnderflow { t: f64, start: f64, end: f64 },
    #[error("history span {span} is shorter than the largest delay {max_delay}")]
    HistoryTooShort { span: f64, max_delay: f64 },
    #[error("non-finite state in component {component} at t = {t}")]
    BlowUp { t: f64, component: usize },
    #[error("requested range [{start}, {end}] is outside trajectory coverage [{have_start}, {have_end}]")]
    OutOfCoverage {
        start: f64,
        end: f64,
        have_start: f64,
        have_end: f64,
    },
    #[error("segment shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid integration setup: {0}")]
    Config(String),
}

/// Cubic Hermite value on one step: `theta` in [0, 1], node values `ya`,
/// `yb`, node derivatives `fa`, `fb`, step width `h`.
fn hermite_value(theta: f64, h: f64, ya: f64, fa: f64, yb: f64, fb: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    ya * (2.0 * t3 - 3.0 * t2 + 1.0)
        + h * fa * (t3 - 2.0 * t2 + theta)
        + yb * (-2.0 * t3 + 3.0 * t2)
        + h * fb * (t3 - t2)
}

/// Derivative of the Hermite cubic with respect to `t`.
fn hermite_slope(theta: f64, h: f64, ya: f64, fa: f64, yb: f64, fb: f64) -> f64 {
    let t2 = theta * theta;
    (ya * (6.0 * t2 - 6.0 * theta)
        + h * fa * (3.0 * t2 - 4.0 * theta + 1.0)
        + yb * (-6.0 * t2 + 6.0 * theta)
        + h * fb * (3.0 * t2 - 2.0 * theta))
        / h
}

/// Dense, interpolable record of the state over one delay window: a uniform
/// node grid carrying state and derivative vectors for Hermite evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    t_end: f64,
    step: f64,
    dim: usize,
    states: Vec<f64>,
    derivs: Vec<f64>,
}

impl HistorySegment {
    /// Constant history: every node carries `values`, derivatives are zero.
    /// `nodes = 1` gives the degenerate zero-span segment used by
    /// delay-free systems.
    pub fn constant(values: &[f64], t_end: f64, step: f64, nodes: usize) -> Self {
        assert!(nodes >= 1 && step > 0.0);
        let dim = values.len();
        let mut states = Vec::with_capacity(nodes * dim);
        for _ in 0..nodes {
            states.extend_from_slice(values);
        }
        Self {
            t_end,
            step,
            dim,
            states,
            derivs: vec![0.0; nodes * dim],
        }
    }

    /// Build a segment from explicit node data (node-major layout, oldest
    /// node first, last node at `t_end`).
    pub fn from_nodes(
        t_end: f64,
        step: f64,
        dim: usize,
        states: Vec<f64>,
        derivs: Vec<f64>,
    ) -> Result<Self, DdeError> {
        if dim == 0 || states.len() % dim != 0 || states.len() != derivs.len() || states.is_empty()
        {
            return Err(DdeError::ShapeMismatch(format!(
                "{} state values / {} derivative values for dimension {dim}",
                states.len(),
                derivs.len()
            )));
        }
        if !(step > 0.0) {
            return Err(DdeError::Config("segment step must be positive".into()));
        }
        Ok(Self {
            t_end,
            step,
            dim,
            states,
            derivs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn span(&self) -> f64 {
        (self.nodes() - 1) as f64 * self.step
    }

    pub fn t_start(&self) -> f64 {
        self.t_end - self.span()
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.states[node * self.dim..(node + 1) * self.dim]
    }

    pub fn deriv(&self, node: usize) -> &[f64] {
        &self.derivs[node * self.dim..(node + 1) * self.dim]
    }

    pub fn end_state(&self) -> &[f64] {
        self.state(self.nodes() - 1)
    }

    /// Translate the segment in time; node values are untouched.
    pub fn shift_time(&mut self, offset: f64) {
        self.t_end += offset;
    }

    fn locate(&self, t: f64) -> Result<(usize, f64), DdeError> {
        let pad = 1e-9 * (1.0 + t.abs().max(self.step));
        let start = self.t_start();
        if t < start - pad || t > self.t_end + pad {
            return Err(DdeError::HistoryUnderflow {
                t,
                start,
                end: self.t_end,
            });
        }
        if self.nodes() == 1 {
            return Ok((0, 0.0));
        }
        let raw = (t - start) / self.step;
        let idx = (raw.floor() as isize).clamp(0, self.nodes() as isize - 2) as usize;
        let theta = ((t - start) / self.step - idx as f64).clamp(0.0, 1.0);
        Ok((idx, theta))
    }

    /// Interpolate one component at `t` within the covered interval.
    pub fn eval1(&self, t: f64, component: usize) -> Result<f64, DdeError> {
        let (idx, theta) = self.locate(t)?;
        if self.nodes() == 1 {
            return Ok(self.state(0)[component]);
        }
        Ok(hermite_value(
            theta,
            self.step,
            self.state(idx)[component],
            self.deriv(idx)[component],
            self.state(idx + 1)[component],
            self.deriv(idx + 1)[component],
        ))
    }

    /// Interpolate the full state vector at `t`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), DdeError> {
        let (idx, theta) = self.locate(t)?;
        if self.nodes() == 1 {
            out.copy_from_slice(self.state(0));
            return Ok(());
        }
        for c in 0..self.dim {
            out[c] = hermite_value(
                theta,
                self.step,
                self.state(idx)[c],
                self.deriv(idx)[c],
                self.state(idx + 1)[c],
                self.deriv(idx + 1)[c],
            );
        }
        Ok(())
    }

    fn eval_with_deriv(&self, t: f64, y: &mut [f64], dy: &mut [f64]) -> Result<(), DdeError> {
        let (idx, theta) = self.locate(t)?;
        if self.nodes() == 1 {
            y.copy_from_slice(self.state(0));
            dy.copy_from_slice(self.deriv(0));
            return Ok(());
        }
        for c in 0..self.dim {
            let (ya, fa) = (self.state(idx)[c], self.deriv(idx)[c]);
            let (yb, fb) = (self.state(idx + 1)[c], self.deriv(idx + 1)[c]);
            y[c] = hermite_value(theta, self.step, ya, fa, yb, fb);
            dy[c] = hermite_slope(theta, self.step, ya, fa, yb, fb);
        }
        Ok(())
    }

    /// Nearest node index when `t` sits on the node grid (within 1e-9 steps).
    fn node_index_at(&self, t: f64) -> Option<usize> {
        let raw = (t - self.t_start()) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() <= 1e-9 && idx >= 0.0 && (idx as usize) < self.nodes() {
            Some(idx as usize)
        } else {
            None
        }
    }
}

/// Read-only view of the state history available to a right-hand side:
/// either a bare segment (for direct evaluation) or the initial segment plus
/// the nodes integrated so far.
pub struct History<'a> {
    inner: HistoryInner<'a>,
}

enum HistoryInner<'a> {
    Segment(&'a HistorySegment),
    Composite {
        prefix: &'a HistorySegment,
        t0: f64,
        step: f64,
        dim: usize,
        states: &'a [f64],
        derivs: &'a [f64],
    },
}

impl<'a> History<'a> {
    pub fn from_segment(segment: &'a HistorySegment) -> Self {
        Self {
            inner: HistoryInner::Segment(segment),
        }
    }

    pub fn eval1(&self, t: f64, component: usize) -> Result<f64, DdeError> {
        match &self.inner {
            HistoryInner::Segment(seg) => seg.eval1(t, component),
            HistoryInner::Composite {
                prefix,
                t0,
                step,
                dim,
                states,
                derivs,
            } => {
                if t <= *t0 {
                    return prefix.eval1(t, component);
                }
                let nodes = derivs.len().min(states.len()) / dim;
                let last = *t0 + (nodes - 1) as f64 * step;
                let pad = 1e-9 * (1.0 + t.abs().max(*step));
                if t > last + pad || nodes < 2 {
                    return Err(DdeError::HistoryUnderflow {
                        t,
                        start: prefix.t_start(),
                        end: last,
                    });
                }
                let raw = (t - t0) / step;
                let idx = (raw.floor() as isize).clamp(0, nodes as isize - 2) as usize;
                let theta = (raw - idx as f64).clamp(0.0, 1.0);
                let a = idx * dim + component;
                let b = (idx + 1) * dim + component;
                Ok(hermite_value(
                    theta, *step, states[a], derivs[a], states[b], derivs[b],
                ))
            }
        }
    }
}

/// A delay system the engine can integrate: a dimension plus a right-hand
/// side that may look up delayed state through a [`History`] view.
pub trait DelaySystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], history: &History<'_>, dydt: &mut [f64])
        -> Result<(), DdeError>;
}

/// Right-hand side of the cyclic feedback system, scaled by the homotopy
/// parameter `lambda`. Zero delays use the current stage value `y` directly.
pub fn rhs(
    model: &ModelSpec,
    t: f64,
    y: &[f64],
    delayed: &History<'_>,
    lambda: f64,
    dydt: &mut [f64],
) -> Result<(), DdeError> {
    let n = model.n;
    let feedback = |tau: f64| -> Result<f64, DdeError> {
        if tau == 0.0 {
            Ok(y[n])
        } else {
            delayed.eval1(t - tau, n)
        }
    };
    let fb = feedback(model.tau[0])?;
    dydt[0] = lambda * (model.f.value_at(t, fb) - model.b[0].value_at(y[0]));
    for j in 1..n {
        let up = if model.eps[j - 1] == 0.0 {
            y[j - 1]
        } else {
            delayed.eval1(t - model.eps[j - 1], j - 1)?
        };
        let fb = feedback(model.tau[j])?;
        dydt[j] = lambda * (model.g[j - 1].value_at(t, up, fb) - model.b[j].value_at(y[j]));
    }
    let up = if model.eps[n - 1] == 0.0 {
        y[n - 1]
    } else {
        delayed.eval1(t - model.eps[n - 1], n - 1)?
    };
    dydt[n] = lambda * (model.h.value_at(t, up) - model.b[n].value_at(y[n]));
    Ok(())
}

/// [`DelaySystem`] adapter for a model with a fixed homotopy parameter.
pub struct ModelSystem<'a> {
    pub model: &'a ModelSpec,
    pub lambda: f64,
}

impl DelaySystem for ModelSystem<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn rhs(
        &self,
        t: f64,
        y: &[f64],
        history: &History<'_>,
        dydt: &mut [f64],
    ) -> Result<(), DdeError> {
        rhs(self.model, t, y, history, self.lambda, dydt)
    }
}

/// Dense output of an integration run: the initial segment is retained as a
/// prefix so delayed lookups and segment extraction stay inside coverage.
#[derive(Debug, Clone)]
pub struct Trajectory {
    prefix: HistorySegment,
    t0: f64,
    step: f64,
    dim: usize,
    states: Vec<f64>,
    derivs: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.steps() as f64 * self.step
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of integration steps taken (nodes minus one).
    pub fn steps(&self) -> usize {
        self.states.len() / self.dim - 1
    }

    pub fn prefix(&self) -> &HistorySegment {
        &self.prefix
    }

    pub fn node_time(&self, node: usize) -> f64 {
        self.t0 + node as f64 * self.step
    }

    pub fn node_state(&self, node: usize) -> &[f64] {
        &self.states[node * self.dim..(node + 1) * self.dim]
    }

    pub fn node_deriv(&self, node: usize) -> &[f64] {
        &self.derivs[node * self.dim..(node + 1) * self.dim]
    }

    /// Min and max of one component over the integrated span `[t0, t1]`.
    pub fn component_range(&self, component: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for node in 0..=self.steps() {
            let v = self.node_state(node)[component];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn coverage(&self) -> (f64, f64) {
        (self.prefix.t_start(), self.t1())
    }

    /// Dense evaluation anywhere in `[t0 − span, t1]`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), DdeError> {
        if t <= self.t0 {
            return self.prefix.eval_into(t, out);
        }
        let mut dy = vec![0.0; self.dim];
        self.eval_with_deriv(t, out, &mut dy)
    }

    fn eval_with_deriv(&self, t: f64, y: &mut [f64], dy: &mut [f64]) -> Result<(), DdeError> {
        if t <= self.t0 {
            return self.prefix.eval_with_deriv(t, y, dy);
        }
        let (start, end) = self.coverage();
        let pad = 1e-9 * (1.0 + t.abs().max(self.step));
        if t > end + pad {
            return Err(DdeError::OutOfCoverage {
                start: t,
                end: t,
                have_start: start,
                have_end: end,
            });
        }
        let nodes = self.steps() + 1;
        let raw = (t - self.t0) / self.step;
        let idx = (raw.floor() as isize).clamp(0, nodes as isize - 2) as usize;
        let theta = (raw - idx as f64).clamp(0.0, 1.0);
        for c in 0..self.dim {
            let a = idx * self.dim + c;
            let b = (idx + 1) * self.dim + c;
            y[c] = hermite_value(
                theta,
                self.step,
                self.states[a],
                self.derivs[a],
                self.states[b],
                self.derivs[b],
            );
            dy[c] = hermite_slope(
                theta,
                self.step,
                self.states[a],
                self.derivs[a],
                self.states[b],
                self.derivs[b],
            );
        }
        Ok(())
    }

    fn integrated_node_at(&self, t: f64) -> Option<usize> {
        let raw = (t - self.t0) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() <= 1e-9 && idx >= 0.0 && (idx as usize) <= self.steps() {
            Some(idx as usize)
        } else {
            None
        }
    }

    /// Copy out the trailing window `[t_end − span, t_end]` as a history
    /// segment. Grid-aligned nodes are copied bit-for-bit; offset grids are
    /// resampled through the Hermite interpolant.
    pub fn extract_segment(&self, t_end: f64, span: f64) -> Result<HistorySegment, DdeError> {
        let (have_start, have_end) = self.coverage();
        let pad = 1e-9 * (1.0 + t_end.abs().max(self.step));
        if span < 0.0 || t_end > have_end + pad || t_end - span < have_start - pad {
            return Err(DdeError::OutOfCoverage {
                start: t_end - span,
                end: t_end,
                have_start,
                have_end,
            });
        }
        let (nodes, seg_step) = if span == 0.0 {
            (1usize, self.step)
        } else {
            let ratio = span / self.step;
            let rounded = ratio.round();
            if (ratio - rounded).abs() <= 1e-9 && rounded >= 1.0 {
                (rounded as usize + 1, self.step)
            } else {
                let k = ratio.ceil().max(1.0);
                (k as usize + 1, span / k)
            }
        };
        let dim = self.dim;
        let mut states = Vec::with_capacity(nodes * dim);
        let mut derivs = Vec::with_capacity(nodes * dim);
        let mut y = vec![0.0; dim];
        let mut dy = vec![0.0; dim];
        for j in 0..nodes {
            let s = t_end - (nodes - 1 - j) as f64 * seg_step;
            if let Some(i) = self.integrated_node_at(s) {
                states.extend_from_slice(self.node_state(i));
                derivs.extend_from_slice(self.node_deriv(i));
            } else if let Some(i) = self.prefix.node_index_at(s) {
                states.extend_from_slice(self.prefix.state(i));
                derivs.extend_from_slice(self.prefix.deriv(i));
            } else {
                self.eval_with_deriv(s, &mut y, &mut dy)?;
                states.extend_from_slice(&y);
                derivs.extend_from_slice(&dy);
            }
        }
        HistorySegment::from_nodes(t_end, seg_step, dim, states, derivs)
    }

    /// Write the trajectory as CSV (`t,x0,…,xn`, 17 significant digits),
    /// optionally prepending the history prefix rows.
    pub fn write_csv<W: Write>(&self, out: &mut W, include_prefix: bool) -> std::io::Result<()> {
        write!(out, "t")?;
        for c in 0..self.dim {
            write!(out, ",x{c}")?;
        }
        writeln!(out)?;
        let mut row = |t: f64, state: &[f64]| -> std::io::Result<()> {
            write!(out, "{t:.16e}")?;
            for v in state {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)
        };
        let first_integrated = if include_prefix {
            for node in 0..self.prefix.nodes() {
                let t = self.prefix.t_start() + node as f64 * self.prefix.step();
                row(t, self.prefix.state(node))?;
            }
            1
        } else {
            0
        };
        for node in first_integrated..=self.steps() {
            row(self.node_time(node), self.node_state(node))?;
        }
        Ok(())
    }
}

fn commensurate(step: f64, interval: f64, what: &'static str) -> Result<usize, DdeError> {
    let ratio = interval / step;
    let count = ratio.round();
    if (ratio - count).abs() > 1e-12 * (ratio.abs().max(1.0)) || count < 0.0 {
        return Err(DdeError::Incommensurate {
            step,
            what,
            value: interval,
        });
    }
    Ok(count as usize)
}

/// Integrate any [`DelaySystem`] from an initial segment up to `t1` with a
/// fixed step. The step must divide the integration span.
pub fn integrate_system<S: DelaySystem>(
    system: &S,
    init: &HistorySegment,
    t1: f64,
    step: f64,
) -> Result<Trajectory, DdeError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DdeError::Config(format!("step must be positive, got {step}")));
    }
    let dim = system.dim();
    if init.dim() != dim {
        return Err(DdeError::ShapeMismatch(format!(
            "initial segment dimension {} vs system dimension {dim}",
            init.dim()
        )));
    }
    let t0 = init.t_end();
    if t1 < t0 - 1e-12 * (1.0 + t0.abs()) {
        return Err(DdeError::Config(format!(
            "end time {t1} precedes the initial segment end {t0}"
        )));
    }
    let n_steps = commensurate(step, t1 - t0, "integration span")?;

    let mut states = Vec::with_capacity((n_steps + 1) * dim);
    let mut derivs = Vec::with_capacity((n_steps + 1) * dim);
    states.extend_from_slice(init.end_state());

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let mut y_cur = vec![0.0; dim];

    for i in 0..=n_steps {
        let t = t0 + i as f64 * step;
        y_cur.copy_from_slice(&states[i * dim..(i + 1) * dim]);
        {
            // derivative at the freshly finalized node; its lookups reach at
            // least one step back, which the delay cap keeps in range
            let history = History {
                inner: HistoryInner::Composite {
                    prefix: init,
                    t0,
                    step,
                    dim,
                    states: &states,
                    derivs: &derivs,
                },
            };
            system.rhs(t, &y_cur, &history, &mut k1)?;
        }
        derivs.extend_from_slice(&k1);
        if i == n_steps {
            break;
        }
        {
            let history = History {
                inner: HistoryInner::Composite {
                    prefix: init,
                    t0,
                    step,
                    dim,
                    states: &states,
                    derivs: &derivs,
                },
            };
            let half = 0.5 * step;
            for c in 0..dim {
                stage[c] = y_cur[c] + half * k1[c];
            }
            system.rhs(t + half, &stage, &history, &mut k2)?;
            for c in 0..dim {
                stage[c] = y_cur[c] + half * k2[c];
            }
            system.rhs(t + half, &stage, &history, &mut k3)?;
            for c in 0..dim {
                stage[c] = y_cur[c] + step * k3[c];
            }
            system.rhs(t + step, &stage, &history, &mut k4)?;
            for c in 0..dim {
                next[c] =
                    y_cur[c] + step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        for (c, v) in next.iter().enumerate() {
            if !v.is_finite() {
                return Err(DdeError::BlowUp {
                    t: t + step,
                    component: c,
                });
            }
        }
        states.extend_from_slice(&next);
    }

    Ok(Trajectory {
        prefix: init.clone(),
        t0,
        step,
        dim,
        states,
        derivs,
    })
}

/// Integrate the model from `init` to `t1`. On top of the engine checks this
/// enforces the model preconditions: the step may not exceed the smallest
/// positive delay (method-of-steps explicitness), must divide the forcing
/// period (return-map commensuration), and the history must span the largest
/// delay.
pub fn integrate(
    model: &ModelSpec,
    init: &HistorySegment,
    t1: f64,
    step: f64,
    lambda: f64,
) -> Result<Trajectory, DdeError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DdeError::Config(format!("step must be positive, got {step}")));
    }
    if let Some(delay) = model.min_positive_delay() {
        if step > delay * (1.0 + 1e-12) {
            return Err(DdeError::StepExceedsDelay { step, delay });
        }
    }
    commensurate(step, model.period, "forcing period")?;
    let max_delay = model.max_delay();
    if init.span() + 1e-12 * (1.0 + max_delay) < max_delay {
        return Err(DdeError::HistoryTooShort {
            span: init.span(),
            max_delay,
        });
    }
    let system = ModelSystem { model, lambda };
    integrate_system(&system, init, t1, step)
}

/// Default step: fine enough to resolve the forcing (period/2048) and the
/// shortest delay (delay/8), snapped to an exact divisor of the period.
pub fn default_step(model: &ModelSpec) -> f64 {
    let period = model.period;
    let mut base = period / 2048.0;
    if let Some(delay) = model.min_positive_delay() {
        base = base.min(delay / 8.0);
    }
    let pieces = (period / base - 1e-9).ceil().max(1.0);
    period / pieces
}

/// Number of nodes a constant history needs so that its span covers the
/// largest delay on the integration grid.
pub fn history_nodes(max_delay: f64, step: f64) -> usize {
    if max_delay <= 0.0 {
        1
    } else {
        (max_delay / step - 1e-9).ceil() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TestosteronePreset;
    use approx::assert_abs_diff_eq;

    /// x'(t) = −x(t − 1)
    struct DelayedNegation;

    impl DelaySystem for DelayedNegation {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(
            &self,
            t: f64,
            _y: &[f64],
            history: &History<'_>,
            dydt: &mut [f64],
        ) -> Result<(), DdeError> {
            dydt[0] = -history.eval1(t - 1.0, 0)?;
            Ok(())
        }
    }

    /// x' = −x (no delay)
    struct Decay;

    impl DelaySystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(
            &self,
            _t: f64,
            y: &[f64],
            _history: &History<'_>,
            dydt: &mut [f64],
        ) -> Result<(), DdeError> {
            dydt[0] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn delayed_negation_matches_the_piecewise_solution() {
        let init = HistorySegment::constant(&[1.0], 0.0, 1e-3, 1001);
        let traj = integrate_system(&DelayedNegation, &init, 2.0, 1e-3).unwrap();
        let mut out = [0.0];
        traj.eval_into(1.0, &mut out).unwrap();
        assert_abs_diff_eq!(out[0], 0.0, epsilon = 1e-8);
        traj.eval_into(2.0, &mut out).unwrap();
        assert_abs_diff_eq!(out[0], -0.5, epsilon = 1e-8);
    }

    #[test]
    fn plain_decay_hits_rk4_accuracy() {
        let init = HistorySegment::constant(&[1.0], 0.0, 1e-3, 1);
        let traj = integrate_system(&Decay, &init, 1.0, 1e-3).unwrap();
        let mut out = [0.0];
        traj.eval_into(1.0, &mut out).unwrap();
        assert_abs_diff_eq!(out[0], (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn equilibrium_input_stays_put() {
        // x' = 1 − x from x(0) = 1
        struct Relax;
        impl DelaySystem for Relax {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(
                &self,
                _t: f64,
                y: &[f64],
                _h: &History<'_>,
                dydt: &mut [f64],
            ) -> Result<(), DdeError> {
                dydt[0] = 1.0 - y[0];
                Ok(())
            }
        }
        let init = HistorySegment::constant(&[1.0], 0.0, 0.01, 1);
        let traj = integrate_system(&Relax, &init, 1.0, 0.01).unwrap();
        for node in 0..=traj.steps() {
            assert_abs_diff_eq!(traj.node_state(node)[0], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn step_halving_shows_fourth_order() {
        let endpoint_error = |h: f64| -> f64 {
            let init = HistorySegment::constant(&[1.0], 0.0, h, 1);
            let traj = integrate_system(&Decay, &init, 1.0, h).unwrap();
            let mut out = [0.0];
            traj.eval_into(1.0, &mut out).unwrap();
            (out[0] - (-1.0f64).exp()).abs()
        };
        let ratio = endpoint_error(1.0 / 16.0) / endpoint_error(1.0 / 32.0);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "step-halving error ratio {ratio} outside [12, 20]"
        );
    }

    #[test]
    fn rhs_scales_linearly_in_lambda() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let seg = HistorySegment::constant(&[1.0, 0.8, 1.2], 0.0, 0.05, 9);
        let history = History::from_segment(&seg);
        let y = [1.1, 0.9, 1.0];
        let mut full = [0.0; 3];
        let mut half = [0.0; 3];
        rhs(&model, 0.0, &y, &history, 1.0, &mut full).unwrap();
        rhs(&model, 0.0, &y, &history, 0.5, &mut half).unwrap();
        for c in 0..3 {
            assert_abs_diff_eq!(half[c], 0.5 * full[c], epsilon = 1e-15);
        }
    }

    #[test]
    fn rhs_vanishes_at_the_equilibrium_for_any_lambda() {
        // (1, 1, 1) balances the autonomous preset: 2/(1+1) = 1 = b(1)
        let model = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let seg = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, 0.05, 9);
        let history = History::from_segment(&seg);
        let mut dydt = [0.0; 3];
        for lambda in [0.25, 0.5, 1.0] {
            rhs(&model, 0.0, &[1.0, 1.0, 1.0], &history, lambda, &mut dydt).unwrap();
            for v in dydt {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rhs_at_the_origin_of_the_autonomous_preset() {
        let model = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let seg = HistorySegment::constant(&[0.0, 0.0, 0.0], 0.0, 0.05, 9);
        let history = History::from_segment(&seg);
        let y = [0.0, 0.0, 0.0];
        let mut dydt = [0.0; 3];
        rhs(&model, 0.0, &y, &history, 1.0, &mut dydt).unwrap();
        assert_abs_diff_eq!(dydt[0], 2.0, epsilon = 1e-15); // kappa1/kappa2
        assert_abs_diff_eq!(dydt[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dydt[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn step_above_the_smallest_delay_is_rejected() {
        let model = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let init = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, 0.5, 2);
        assert!(matches!(
            integrate(&model, &init, 1.0, 0.5, 1.0),
            Err(DdeError::StepExceedsDelay { .. })
        ));
    }

    #[test]
    fn short_history_is_rejected() {
        let model = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = default_step(&model);
        let init = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, step, 2);
        assert!(matches!(
            integrate(&model, &init, 1.0, step, 1.0),
            Err(DdeError::HistoryTooShort { .. })
        ));
    }

    #[test]
    fn blow_up_is_reported_with_a_time_stamp() {
        // x' = x^2 from x(0) = 1 leaves f64 range before t = 2
        struct Quadratic;
        impl DelaySystem for Quadratic {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(
                &self,
                _t: f64,
                y: &[f64],
                _h: &History<'_>,
                dydt: &mut [f64],
            ) -> Result<(), DdeError> {
                dydt[0] = y[0] * y[0];
                Ok(())
            }
        }
        let init = HistorySegment::constant(&[1.0], 0.0, 0.01, 1);
        match integrate_system(&Quadratic, &init, 2.0, 0.01) {
            Err(DdeError::BlowUp { t, .. }) => assert!(t > 0.9 && t <= 2.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn extraction_copies_grid_aligned_nodes_exactly() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = default_step(&model);
        let nodes = history_nodes(model.max_delay(), step);
        let init = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, step, nodes);
        let traj = integrate(&model, &init, 1.0, step, 1.0).unwrap();
        let seg = traj.extract_segment(1.0, init.span()).unwrap();
        let mut out = [0.0; 3];
        traj.eval_into(1.0, &mut out).unwrap();
        assert_eq!(seg.end_state(), &out[..]);
        assert_eq!(seg.nodes(), nodes);
    }

    #[test]
    fn zero_span_extraction_yields_a_single_node() {
        let init = HistorySegment::constant(&[1.0], 0.0, 0.01, 1);
        let traj = integrate_system(&Decay, &init, 0.5, 0.01).unwrap();
        let seg = traj.extract_segment(0.25, 0.0).unwrap();
        assert_eq!(seg.nodes(), 1);
        let mut out = [0.0];
        traj.eval_into(0.25, &mut out).unwrap();
        assert_eq!(seg.end_state()[0], out[0]);
    }

    #[test]
    fn continuation_from_an_extracted_segment_reproduces_the_run() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = default_step(&model);
        let nodes = history_nodes(model.max_delay(), step);
        let init = HistorySegment::constant(&[1.2, 0.9, 1.1], 0.0, step, nodes);
        let long = integrate(&model, &init, 2.0, step, 1.0).unwrap();
        let seg = long.extract_segment(1.0, init.span()).unwrap();
        let cont = integrate(&model, &seg, 2.0, step, 1.0).unwrap();
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for i in 0..=8 {
            let t = 1.0 + i as f64 * 0.125;
            long.eval_into(t, &mut a).unwrap();
            cont.eval_into(t, &mut b).unwrap();
            for c in 0..3 {
                assert_abs_diff_eq!(a[c], b[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn integration_is_deterministic() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = default_step(&model);
        let nodes = history_nodes(model.max_delay(), step);
        let init = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, step, nodes);
        let a = integrate(&model, &init, 3.0, step, 1.0).unwrap();
        let b = integrate(&model, &init, 3.0, step, 1.0).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.derivs, b.derivs);
    }

    #[test]
    fn lambda_scaling_matches_delay_rescaled_time() {
        // autonomous system: x_λ(t) with delays τ equals x_1(λt) with delays λτ
        let lambda = 0.5;
        let model_a = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let model_b = TestosteronePreset::classic(0.0, 1.0, [0.125, 0.0, 0.0])
            .build()
            .unwrap();
        let step = 1.0 / 2048.0;
        let start = [1.3, 0.7, 1.1];
        let init_a =
            HistorySegment::constant(&start, 0.0, step, history_nodes(0.25, step));
        let init_b =
            HistorySegment::constant(&start, 0.0, step, history_nodes(0.125, step));
        let traj_a = integrate(&model_a, &init_a, 4.0, step, lambda).unwrap();
        let traj_b = integrate(&model_b, &init_b, 2.0, step, 1.0).unwrap();
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for i in 1..=16 {
            let t = i as f64 * 0.25;
            traj_a.eval_into(t, &mut a).unwrap();
            traj_b.eval_into(lambda * t, &mut b).unwrap();
            for c in 0..3 {
                assert_abs_diff_eq!(a[c], b[c], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn csv_row_count_includes_the_history_prefix() {
        let model = TestosteronePreset::classic(0.0, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let step = 0.25 / 8.0;
        let nodes = history_nodes(model.max_delay(), step);
        let init = HistorySegment::constant(&[1.0, 1.0, 1.0], 0.0, step, nodes);
        let traj = integrate(&model, &init, 2.0, step, 1.0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text.lines().count();
        assert_eq!(rows, 1 + nodes + traj.steps());
        assert!(text.starts_with("t,x0,x1,x2"));
    }
}
