//! A-priori box construction and the face-sign / homotopy certificate.
//!
//! The box is produced by a two-pass recursion through the cycle: upper
//! bounds follow the chain forward with the feedback argument at zero, lower
//! bounds follow it again with the feedback argument at its upper bound.
//! Every periodic solution of the (λ-scaled) system must stay strictly
//! inside the box, so the averaged map
//!
//! ```text
//! phi_k(x) = (1/T) ∫_0^T production_k(t, x) dt − b_k(x_k)
//! ```
//!
//! points inward on every face: positive where `x_k` sits on the lower face,
//! negative on the upper face. That sign pattern is verified on sampled face
//! grids; when it holds, the straight-line homotopy from the center shift
//! `p − x` to `phi` cannot vanish on the boundary, and the degree of `phi`
//! on the box equals `(−1)^(n+1)`. The certificate records the sampled
//! evidence; it is a numerical check, not a computer-assisted proof.

use crate::model::{ModelError, ModelSpec, DEFAULT_INVERT_RTOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("image containment failed at the {stage} stage of the bound recursion: {source}")]
    ImageContainment {
        stage: String,
        source: ModelError,
    },
    #[error("degenerate box at component {index}: lower {lower:.6e} ≥ upper {upper:.6e}")]
    DegenerateBox {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("margin must lie in (0, 1), got {0}")]
    BadMargin(f64),
    #[error("no root of the averaged map found: {0}")]
    RootNotFound(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Rectangular box `∏ (lower_k, upper_k)` that every periodic solution must
/// stay inside, together with the multiplicative margin used to make the
/// inequalities strict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub margin: f64,
}

impl BoundsBox {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Box center, the anchor of the boundary homotopy.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&m, &hi)| 0.5 * (m + hi))
            .collect()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(BoundsError::DegenerateBox {
                index: 0,
                lower: f64::NAN,
                upper: f64::NAN,
            });
        }
        for (k, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                return Err(BoundsError::DegenerateBox {
                    index: k,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Max,
    Min,
}

/// Extremum of a function over one period: coarse grid scan followed by
/// golden-section refinement around the best sample. The profiles are smooth
/// sinusoid modulations, so the grid bracket captures the global extremum.
pub fn extremum_over_period(f: impl Fn(f64) -> f64, period: f64, mode: Extremum, grid: usize) -> f64 {
    assert!(grid >= 16, "extremum grid must have at least 16 samples");
    let sign = match mode {
        Extremum::Max => -1.0,
        Extremum::Min => 1.0,
    };
    let g = |t: f64| sign * f(t);
    let h = period / grid as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..grid {
        let v = g(i as f64 * h);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let center = best_i as f64 * h;
    let refined = golden_min(&g, center - h, center + h, 1e-10 * period);
    sign * refined.min(best)
}

/// Golden-section minimization on [a, b]; returns the minimal value.
fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a) > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    gc.min(gd)
}

/// Compensated composite Simpson average of `f` over one period with the
/// given (even) number of intervals.
fn simpson_average(f: impl Fn(f64) -> f64, period: f64, intervals: usize) -> f64 {
    let n = if intervals % 2 == 0 {
        intervals.max(2)
    } else {
        intervals + 1
    };
    let h = period / n as f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut add = |v: f64| {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    add(f(0.0));
    add(f(period));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        add(w * f(i as f64 * h));
    }
    sum * h / (3.0 * period)
}

/// Two-pass bound recursion with multiplicative margin `delta`.
///
/// Upper pass: head inverse at feedback 0, then each chain stage at its
/// predecessor's upper bound with feedback 0, then the tail. Lower pass:
/// head inverse at the feedback *upper* bound, then the chain at the
/// predecessor's lower bound, then the tail. Extrema over time commute with
/// the loss inverses (both strictly increasing), so each stage takes the
/// production extremum first and inverts once.
pub fn compute_bounds(model: &ModelSpec, delta: f64, grid: usize) -> Result<BoundsBox, BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::BadMargin(delta));
    }
    let n = model.n;
    let period = model.period;
    let invert = |k: usize, y: f64, stage: String| -> Result<f64, BoundsError> {
        model.b[k]
            .invert(y, DEFAULT_INVERT_RTOL)
            .map_err(|source| BoundsError::ImageContainment { stage, source })
    };

    let mut upper = vec![0.0; n + 1];
    let peak = extremum_over_period(|t| model.f.value_at(t, 0.0), period, Extremum::Max, grid);
    upper[0] = (1.0 + delta) * invert(0, peak, "head upper".into())?;
    for j in 1..n {
        let peak = extremum_over_period(
            |t| model.g[j - 1].value_at(t, upper[j - 1], 0.0),
            period,
            Extremum::Max,
            grid,
        );
        upper[j] = (1.0 + delta) * invert(j, peak, format!("chain {j} upper"))?;
    }
    let peak = extremum_over_period(
        |t| model.h.value_at(t, upper[n - 1]),
        period,
        Extremum::Max,
        grid,
    );
    upper[n] = (1.0 + delta) * invert(n, peak, "tail upper".into())?;

    let mut lower = vec![0.0; n + 1];
    let trough = extremum_over_period(
        |t| model.f.value_at(t, upper[n]),
        period,
        Extremum::Min,
        grid,
    );
    lower[0] = (1.0 - delta) * invert(0, trough, "head lower".into())?;
    for j in 1..n {
        let trough = extremum_over_period(
            |t| model.g[j - 1].value_at(t, lower[j - 1], upper[n]),
            period,
            Extremum::Min,
            grid,
        );
        lower[j] = (1.0 - delta) * invert(j, trough, format!("chain {j} lower"))?;
    }
    let trough = extremum_over_period(
        |t| model.h.value_at(t, lower[n - 1]),
        period,
        Extremum::Min,
        grid,
    );
    lower[n] = (1.0 - delta) * invert(n, trough, "tail lower".into())?;

    let bbox = BoundsBox {
        lower,
        upper,
        margin: delta,
    };
    bbox.validate()?;
    Ok(bbox)
}

/// One component of the averaged map at a constant state vector.
pub fn phi_component(model: &ModelSpec, k: usize, x: &[f64], quad_nodes: usize) -> f64 {
    debug_assert!(x.iter().all(|&v| v >= 0.0));
    let avg = simpson_average(
        |t| model.production_at_constant(k, t, x),
        model.period,
        quad_nodes,
    );
    avg - model.b[k].value_at(x[k])
}

/// Averaged map `phi(x)`: period average of each production term at the
/// constant vector `x` minus the loss at `x`. Delays vanish on constants.
pub fn phi(model: &ModelSpec, x: &[f64], quad_nodes: usize) -> Vec<f64> {
    assert_eq!(x.len(), model.dim());
    assert!(
        x.iter().all(|&v| v >= 0.0),
        "phi is defined on the nonnegative orthant"
    );
    (0..model.dim())
        .map(|k| phi_component(model, k, x, quad_nodes))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceSide {
    Lower,
    Upper,
}

/// Extreme sampled values of `phi_k` on the two faces orthogonal to
/// component `k`, with the face points where they occurred.
#[derive(Debug, Clone, Serialize)]
pub struct FaceSign {
    pub component: usize,
    pub lower_min: f64,
    pub lower_argmin: Vec<f64>,
    pub upper_max: f64,
    pub upper_argmax: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceViolation {
    pub component: usize,
    pub side: FaceSide,
    pub point: Vec<f64>,
    pub value: f64,
}

/// Outcome of the face-sign analysis plus (optionally) the boundary
/// homotopy scan. Valid means: `phi_k` strictly positive on every sampled
/// lower-face point, strictly negative on every sampled upper-face point,
/// and — once the scan ran — a strictly positive minimum of `|h|` on the
/// sampled boundary cylinder.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub dim: usize,
    pub margin: f64,
    pub face_samples: usize,
    pub quad_nodes: usize,
    pub face_points: u64,
    pub face_signs: Vec<FaceSign>,
    pub face_valid: bool,
    /// `(−1)^(n+1)`, reported only while the sign pattern holds.
    pub degree: Option<i64>,
    pub violation: Option<FaceViolation>,
    pub homotopy: Option<HomotopyScan>,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.face_valid
            && self
                .homotopy
                .as_ref()
                .map_or(true, |scan| scan.min_norm > 0.0)
    }

    /// Smallest distance of any sampled face value from zero.
    pub fn face_slack(&self) -> f64 {
        self.face_signs
            .iter()
            .map(|fs| fs.lower_min.min(-fs.upper_max))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Regular grid on the face of a box orthogonal to `fixed`, endpoints
/// included so corners are always sampled.
struct FaceGrid<'a> {
    bbox: &'a BoundsBox,
    fixed: usize,
    fixed_value: f64,
    samples: usize,
    free: Vec<usize>,
}

impl<'a> FaceGrid<'a> {
    fn new(bbox: &'a BoundsBox, fixed: usize, side: FaceSide, samples: usize) -> Self {
        let fixed_value = match side {
            FaceSide::Lower => bbox.lower[fixed],
            FaceSide::Upper => bbox.upper[fixed],
        };
        let free = (0..bbox.dim()).filter(|&i| i != fixed).collect();
        Self {
            bbox,
            fixed,
            fixed_value,
            samples,
            free,
        }
    }

    fn len(&self) -> usize {
        self.samples.pow(self.free.len() as u32)
    }

    fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.bbox.dim()];
        x[self.fixed] = self.fixed_value;
        for &i in &self.free {
            let digit = flat % self.samples;
            flat /= self.samples;
            x[i] = if self.samples == 1 {
                0.5 * (self.bbox.lower[i] + self.bbox.upper[i])
            } else {
                self.bbox.lower[i]
                    + digit as f64 * self.bbox.width(i) / (self.samples - 1) as f64
            };
        }
        x
    }
}

/// Cap per-dimension face samples so a full face grid stays below 1e5 points.
fn effective_samples(requested: usize, free_dims: usize) -> usize {
    let mut s = requested.max(2);
    while s > 2 && (s as f64).powi(free_dims as i32) > 1e5 {
        s -= 1;
    }
    s
}

/// Run `work` on a rayon pool sized by `FEEDBACK_DDE_THREADS` (global pool
/// when unset). Reductions below use total-order keys, so the result does
/// not depend on the thread count.
fn with_face_pool<R: Send>(work: impl FnOnce() -> R + Send) -> R {
    match std::env::var("FEEDBACK_DDE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(threads) if threads >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("face evaluation thread pool")
            .install(work),
        _ => work(),
    }
}

/// Sample the averaged map on every face of the box and certify the inward
/// sign pattern. A violation invalidates the certificate (it is recorded,
/// not raised); the degree is reported from the sign pattern.
pub fn miranda_certificate(
    model: &ModelSpec,
    bbox: &BoundsBox,
    face_samples: usize,
    quad_nodes: usize,
) -> Certificate {
    let dim = model.dim();
    let samples = effective_samples(face_samples, dim - 1);
    let mut face_signs = Vec::with_capacity(dim);
    let mut face_points = 0u64;
    let mut violation: Option<FaceViolation> = None;

    // Extremum over a face grid with a deterministic (value, index) tie
    // break, so the parallel reduction is order-insensitive.
    let face_extremum = |k: usize, side: FaceSide, want_min: bool| -> (f64, usize) {
        let grid = FaceGrid::new(bbox, k, side, samples);
        with_face_pool(|| {
            (0..grid.len())
                .into_par_iter()
                .map(|flat| {
                    let x = grid.point(flat);
                    (phi_component(model, k, &x, quad_nodes), flat)
                })
                .reduce(
                    || {
                        if want_min {
                            (f64::INFINITY, usize::MAX)
                        } else {
                            (f64::NEG_INFINITY, usize::MAX)
                        }
                    },
                    |a, b| {
                        let a_wins = if want_min {
                            a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
                        } else {
                            a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
                        };
                        if a_wins {
                            a
                        } else {
                            b
                        }
                    },
                )
        })
    };

    for k in 0..dim {
        face_points += 2 * FaceGrid::new(bbox, k, FaceSide::Lower, samples).len() as u64;
        let (lower_min, lower_flat) = face_extremum(k, FaceSide::Lower, true);
        let (upper_max, upper_flat) = face_extremum(k, FaceSide::Upper, false);
        let lower_argmin = FaceGrid::new(bbox, k, FaceSide::Lower, samples).point(lower_flat);
        let upper_argmax = FaceGrid::new(bbox, k, FaceSide::Upper, samples).point(upper_flat);
        if violation.is_none() {
            if lower_min <= 0.0 {
                violation = Some(FaceViolation {
                    component: k,
                    side: FaceSide::Lower,
                    point: lower_argmin.clone(),
                    value: lower_min,
                });
            } else if upper_max >= 0.0 {
                violation = Some(FaceViolation {
                    component: k,
                    side: FaceSide::Upper,
                    point: upper_argmax.clone(),
                    value: upper_max,
                });
            }
        }
        face_signs.push(FaceSign {
            component: k,
            lower_min,
            lower_argmin,
            upper_max,
            upper_argmax,
        });
    }

    let face_valid = violation.is_none();
    Certificate {
        dim,
        margin: bbox.margin,
        face_samples: samples,
        quad_nodes,
        face_points,
        face_signs,
        face_valid,
        degree: face_valid.then(|| if dim % 2 == 0 { 1 } else { -1 }),
        violation,
        homotopy: None,
    }
}

/// Minimum of the boundary homotopy norm over the sampled face grids crossed
/// with a uniform λ grid.
#[derive(Debug, Clone, Serialize)]
pub struct HomotopyScan {
    /// `min |h(x, λ)|` in the max norm over the sampled set.
    pub min_norm: f64,
    pub at_point: Vec<f64>,
    pub at_lambda: f64,
    pub lambda_steps: usize,
    pub points: u64,
}

/// Scan `h(x, λ) = (1 − λ)(p − x) + λ·phi(x)` over every face grid and
/// λ ∈ {0, 1/steps, …, 1}; a strictly positive minimum supports the claim
/// that the homotopy never vanishes on the boundary cylinder.
pub fn homotopy_scan(
    model: &ModelSpec,
    bbox: &BoundsBox,
    lambda_steps: usize,
    face_samples: usize,
    quad_nodes: usize,
) -> HomotopyScan {
    let dim = model.dim();
    let samples = effective_samples(face_samples, dim - 1);
    let center = bbox.center();
    let steps = lambda_steps.max(1);

    let mut faces = Vec::new();
    for k in 0..dim {
        for side in [FaceSide::Lower, FaceSide::Upper] {
            faces.push(FaceGrid::new(bbox, k, side, samples));
        }
    }
    let per_face = faces[0].len();
    let total = faces.len() * per_face;

    let best = with_face_pool(|| {
        (0..total)
            .into_par_iter()
            .map(|global| {
                let grid = &faces[global / per_face];
                let x = grid.point(global % per_face);
                let phi_x = phi(model, &x, quad_nodes);
                let mut local = (f64::INFINITY, 0usize);
                for s in 0..=steps {
                    let lambda = s as f64 / steps as f64;
                    let norm = x
                        .iter()
                        .zip(center.iter().zip(&phi_x))
                        .map(|(&xi, (&pi, &fi))| {
                            ((1.0 - lambda) * (pi - xi) + lambda * fi).abs()
                        })
                        .fold(0.0f64, f64::max);
                    if norm < local.0 {
                        local = (norm, s);
                    }
                }
                (local.0, global, local.1)
            })
            .reduce(
                || (f64::INFINITY, usize::MAX, 0usize),
                |a, b| if (a.0, a.1) < (b.0, b.1) { a } else { b },
            )
    });

    let (min_norm, global, s) = best;
    let at_point = faces[global / per_face].point(global % per_face);
    HomotopyScan {
        min_norm,
        at_point,
        at_lambda: s as f64 / steps as f64,
        lambda_steps: steps,
        points: (total as u64) * (steps as u64 + 1),
    }
}

/// Newton step on the forward-difference Jacobian; falls back to coordinate
/// bisection driven by the face sign pattern (each `phi_k` is strictly
/// decreasing in `x_k`).
pub fn phi_root(
    model: &ModelSpec,
    bbox: &BoundsBox,
    tol: f64,
    quad_nodes: usize,
) -> Result<Vec<f64>, BoundsError> {
    let dim = model.dim();
    let clip = |x: &mut [f64]| {
        for k in 0..dim {
            x[k] = x[k].clamp(bbox.lower[k], bbox.upper[k]);
        }
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));

    let mut x = bbox.center();
    let mut fx = phi(model, &x, quad_nodes);
    for _ in 0..200 {
        if norm(&fx) <= tol {
            return Ok(x);
        }
        // forward-difference Jacobian, relative step 1e-6
        let mut jac = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            let mut step = 1e-6 * x[i].abs().max(1e-6);
            if x[i] + step > bbox.upper[i] {
                step = -step;
            }
            let mut xs = x.clone();
            xs[i] += step;
            let fs = phi(model, &xs, quad_nodes);
            for k in 0..dim {
                jac[k][i] = (fs[k] - fx[k]) / step;
            }
        }
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let Some(delta) = solve_dense(&mut jac, rhs) else {
            break;
        };
        // damped line search on the residual norm
        let base = norm(&fx);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(&xi, &di)| xi + scale * di)
                .collect();
            clip(&mut trial);
            let ft = phi(model, &trial, quad_nodes);
            if norm(&ft) < base {
                x = trial;
                fx = ft;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(&fx) <= tol {
        return Ok(x);
    }

    // Coordinate bisection: phi_k(·) brackets zero along the k-th edge of
    // the box whenever the face signs hold.
    let mut x = bbox.center();
    for _ in 0..40 {
        for k in 0..dim {
            let mut lo = bbox.lower[k];
            let mut hi = bbox.upper[k];
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                x[k] = mid;
                let v = phi_component(model, k, &x, quad_nodes);
                if v > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            x[k] = 0.5 * (lo + hi);
        }
        let fx = phi(model, &x, quad_nodes);
        if norm(&fx) <= tol {
            return Ok(x);
        }
    }
    Err(BoundsError::RootNotFound(format!(
        "Newton and coordinate bisection both stalled above tolerance {tol:.1e}"
    )))
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(a: &mut [Vec<f64>], mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ActivationKind, DecaySpec, Production1Spec, Production2Spec, Repression,
        TestosteronePreset, TimeProfile,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    /// Minimal three-component cycle with unit losses:
    /// F = 2/(1+x), G = x/(1+y), H = x, b = identity.
    fn worked_cycle() -> ModelSpec {
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

    /// Two-component cycle: F = 1/(1+x), H = x, b = identity.
    fn short_cycle() -> ModelSpec {
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
            b: vec![DecaySpec::Linear { beta: 1.0 }, DecaySpec::Linear { beta: 1.0 }],
        };
        model.validate().unwrap();
        model
    }

    #[test]
    fn extremum_of_constant_and_sinusoid() {
        assert_abs_diff_eq!(
            extremum_over_period(|_| 2.0, 1.0, Extremum::Max, 64),
            2.0,
            epsilon = 1e-14
        );
        let f = |t: f64| 1.0 + 0.5 * (TAU * t).sin();
        assert_abs_diff_eq!(
            extremum_over_period(f, 1.0, Extremum::Max, 64),
            1.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            extremum_over_period(f, 1.0, Extremum::Min, 64),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn worked_cycle_bounds_match_hand_recursion() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        // hand recursion with identity losses
        let m0 = 1.05 * 2.0;
        let m1 = 1.05 * m0;
        let m2 = 1.05 * m1;
        let l0 = 0.95 * 2.0 / (1.0 + m2);
        let l1 = 0.95 * l0 / (1.0 + m2);
        let l2 = 0.95 * l1;
        for (got, want) in bbox.upper.iter().zip([m0, m1, m2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        for (got, want) in bbox.lower.iter().zip([l0, l1, l2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        bbox.validate().unwrap();
    }

    #[test]
    fn margin_widens_the_box_monotonically() {
        let model = worked_cycle();
        let tight = compute_bounds(&model, 0.01, 64).unwrap();
        let wide = compute_bounds(&model, 0.2, 64).unwrap();
        for k in 0..3 {
            assert!(wide.upper[k] >= tight.upper[k]);
            assert!(wide.lower[k] <= tight.lower[k]);
        }
    }

    #[test]
    fn phi_at_balanced_point_and_faces() {
        let model = worked_cycle();
        let v = phi(&model, &[2.0, 1.0, 0.0], 256);
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v[2], 1.0, epsilon = 1e-13);

        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let mut face = vec![bbox.lower[0], bbox.lower[1], bbox.upper[2]];
        let slack = phi_component(&model, 0, &face, 256);
        let expect = 2.0 / (1.0 + bbox.upper[2]) - bbox.lower[0];
        assert_abs_diff_eq!(slack, expect, epsilon = 1e-12);
        // the head slack equals the margin headroom, about +0.0302
        assert_abs_diff_eq!(slack, 0.030164, epsilon = 1e-5);
        face[0] = bbox.upper[0];
        assert!(phi_component(&model, 0, &face, 256) < 0.0);
    }

    #[test]
    fn quadrature_matches_pointwise_values_for_constant_profiles() {
        let model = worked_cycle();
        let x = [1.3, 0.7, 0.9];
        let v = phi(&model, &x, 256);
        let direct = [
            2.0 / (1.0 + x[2]) - x[0],
            x[0] / (1.0 + x[2]) - x[1],
            x[1] - x[2],
        ];
        for (got, want) in v.iter().zip(direct) {
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn certificates_report_the_degree_by_parity() {
        let worked = worked_cycle();
        let bbox = compute_bounds(&worked, 0.05, 64).unwrap();
        let cert = miranda_certificate(&worked, &bbox, 9, 256);
        assert!(cert.face_valid, "{:?}", cert.violation);
        assert_eq!(cert.degree, Some(-1));
        assert!(cert.face_slack() > 0.0);

        let short = short_cycle();
        let bbox = compute_bounds(&short, 0.05, 64).unwrap();
        let cert = miranda_certificate(&short, &bbox, 9, 256);
        assert!(cert.face_valid);
        assert_eq!(cert.degree, Some(1));
    }

    #[test]
    fn forced_preset_certificate_is_valid() {
        let model = TestosteronePreset::classic(0.3, 1.0, [0.25, 0.0, 0.0])
            .build()
            .unwrap();
        let bbox = compute_bounds(&model, 0.05, 256).unwrap();
        let cert = miranda_certificate(&model, &bbox, 9, 256);
        assert!(cert.face_valid, "{:?}", cert.violation);
        assert_eq!(cert.degree, Some(-1));
    }

    #[test]
    fn inflating_one_upper_bound_deepens_that_face_sign() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let cert = miranda_certificate(&model, &bbox, 9, 256);
        let mut inflated = bbox.clone();
        inflated.upper[0] *= 10.0;
        let cert2 = miranda_certificate(&model, &inflated, 9, 256);
        // phi_0 decreases in x_0, so the inflated upper face is even more negative
        assert!(cert2.face_signs[0].upper_max < cert.face_signs[0].upper_max);
        assert!(cert2.face_signs[0].upper_max < 0.0);
    }

    #[test]
    fn manual_box_with_bad_lower_bound_is_rejected() {
        let model = worked_cycle();
        let mut bbox = compute_bounds(&model, 0.05, 64).unwrap();
        bbox.lower[0] = bbox.upper[0] * 0.99; // above the true head bound
        let cert = miranda_certificate(&model, &bbox, 9, 256);
        assert!(!cert.face_valid);
        assert!(cert.degree.is_none());
        let violation = cert.violation.unwrap();
        assert_eq!(violation.component, 0);
    }

    #[test]
    fn homotopy_scan_stays_away_from_zero() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let cert = miranda_certificate(&model, &bbox, 9, 256);
        let scan = homotopy_scan(&model, &bbox, 10, 9, 256);
        assert!(scan.min_norm > 0.0);
        // lower bound: min(face slack, half the smallest width)
        let half_width = (0..3).map(|k| 0.5 * bbox.width(k)).fold(f64::INFINITY, f64::min);
        let floor = cert.face_slack().min(half_width);
        assert!(
            scan.min_norm >= floor - 1e-12,
            "{} < {}",
            scan.min_norm,
            floor
        );
        // at λ = 0 the homotopy is the center shift, which on the face
        // orthogonal to k has |h_k| = half the box width
        assert!(half_width > 0.0);
    }

    #[test]
    fn phi_root_matches_scalar_reduction() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let root = phi_root(&model, &bbox, 1e-10, 256).unwrap();
        // eliminate the chain: c(1+c)^2 = 2, root = (c(1+c), c, c)
        let mut lo = 0.0;
        let mut hi = 2.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * (1.0 + mid) * (1.0 + mid) < 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        assert_abs_diff_eq!(root[2], c, epsilon = 1e-8);
        assert_abs_diff_eq!(root[1], c, epsilon = 1e-8);
        assert_abs_diff_eq!(root[0], c * (1.0 + c), epsilon = 1e-8);
        // interior and balanced
        assert!(bbox.contains(&root, 0.0));
        let residual = phi(&model, &root, 256);
        assert!(residual.iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn phi_root_short_cycle_hits_the_golden_ratio() {
        let model = short_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        let root = phi_root(&model, &bbox, 1e-10, 256).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(root[1], golden, epsilon = 1e-8);
        assert_abs_diff_eq!(root[0], golden, epsilon = 1e-8);
    }

    #[test]
    fn degenerate_margin_is_rejected() {
        let model = worked_cycle();
        assert!(matches!(
            compute_bounds(&model, 0.0, 64),
            Err(BoundsError::BadMargin(_))
        ));
        assert!(matches!(
            compute_bounds(&model, 1.0, 64),
            Err(BoundsError::BadMargin(_))
        ));
    }

    #[test]
    fn inverted_box_fails_validation_with_the_offending_index() {
        let bbox = BoundsBox {
            lower: vec![0.5, 2.0],
            upper: vec![1.0, 1.5],
            margin: 0.05,
        };
        match bbox.validate() {
            Err(BoundsError::DegenerateBox { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected degenerate box, got {other:?}"),
        }
    }

    #[test]
    fn unreachable_tolerance_reports_root_not_found() {
        let model = worked_cycle();
        let bbox = compute_bounds(&model, 0.05, 64).unwrap();
        assert!(matches!(
            phi_root(&model, &bbox, 1e-30, 64),
            Err(BoundsError::RootNotFound(_))
        ));
    }

    #[test]
    fn containment_failure_is_tagged_with_the_stage() {
        let mut model = worked_cycle();
        model.h = Production1Spec::LinearGain {
            profile: TimeProfile::constant(5.0, 1.0).unwrap(),
        };
        model.b[2] = DecaySpec::Bounded {
            beta: 1.0,
            kappa: 1.0,
        };
        match compute_bounds(&model, 0.05, 64) {
            Err(BoundsError::ImageContainment { stage, .. }) => {
                assert!(stage.contains("tail"), "stage = {stage}");
            }
            other => panic!("expected image containment, got {other:?}"),
        }
    }
}
