//! Constructive analysis of cyclic feedback delay differential systems.
//!
//! The system couples `n + 1` nonnegative components in a production/decay
//! cycle with discrete delays and `T`-periodic forcing: a head component
//! produced under repression by the tail, a chain of intermediate
//! components each driven by its predecessor, and a tail component that
//! closes the feedback loop. Under monotonicity and image-containment
//! hypotheses such a system carries a positive `T`-periodic solution; this
//! crate makes that statement computational:
//!
//! * [`model`] — the function families, their structural validation, and a
//!   built-in hormonal-secretion preset;
//! * [`bounds`] — the a-priori box every periodic solution must stay in,
//!   the averaged map `phi`, the face-sign certificate with its boundary
//!   homotopy scan, and the degree `(−1)^(n+1)` read off the sign pattern;
//! * [`dde`] — fixed-step method-of-steps RK4 integration with cubic
//!   Hermite dense output and a homotopy-scaled right-hand side;
//! * [`periodic`] — the period return map and the fixed-point iteration
//!   that locates the orbit, plus box-containment reporting;
//! * [`cli`] — the JSON-config pipeline behind the `feedback-dde` binary.
//!
//! Certificates here are sample-based numerical evidence, not
//! computer-assisted proofs; see the README for the exact guarantees.
//!
//! The `examples/` directory walks through each capability end to end:
//! model validation, bound computation, certification, simulation, orbit
//! search, and a λ-sweep.

pub mod bounds;
pub mod cli;
pub mod dde;
pub mod model;
pub mod periodic;

pub use bounds::{
    compute_bounds, homotopy_scan, miranda_certificate, phi, phi_root, BoundsBox, Certificate,
};
pub use dde::{
    default_step, integrate, integrate_system, DelaySystem, HistorySegment, Trajectory,
};
pub use model::{ModelSpec, SamplingConfig, TestosteronePreset, ValidationReport};
pub use periodic::{
    box_containment, find_periodic, period_map, residual, PeriodicConfig, PeriodicOrbit,
};
