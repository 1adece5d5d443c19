//! Arc fields on metric spaces.
//!
//! An arc field is a map `X(x, t)` with `X(x, 0) = x`, the metric-space
//! stand-in for a vector field. This crate composes them ([`algebra`]),
//! integrates them by Euler curves ([`flow`]), measures the asymptotic
//! order of gaps between curves ([`metric`]) and estimates the regularity
//! constants and integrability properties of pairs of fields
//! ([`diagnostics`]). The [`l2`] module steers the zero function of
//! `L^2(R)` towards a target using only a translation-like and an
//! addition-like flow.
//!
//! Parallel sweeps use rayon when the `parallel` feature is on (the
//! default). Results do not depend on the number of threads.

// `!(x > 0.0)` rejects NaN along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod flow;
pub mod l2;
pub mod metric;
pub mod par;
pub mod spaces;

pub use algebra::{
    bracket, difference, evaluate, iterated_bracket, linear_combination, scale, scale_const, sum,
    ArcField, ClaimedConstants, ScalarField,
};
pub use error::{ArcError, Result};
pub use expr::parse_expression;
pub use flow::{
    euler_curve, lie_identity_gap, pull_back, push_forward, solve, Exactness, Flow, SolveOptions,
    SolveResult, SolveSummary,
};
pub use diagnostics::{field_tangency, field_tangency_with_floor, ConstantEstimate, RegionSampler};
pub use metric::{
    curve_gap, default_t_grid, distance_to_set, estimate_order, verify_metric_axioms, AxiomReport,
    MetricSpace, Region, SampledSet, TangencyReport, Verdict,
};
