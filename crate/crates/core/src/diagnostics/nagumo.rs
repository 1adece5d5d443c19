use serde::{Deserialize, Serialize};

use crate::algebra::ArcField;
use crate::error::{ArcError, Result};
use crate::flow::{solve, SolveOptions};
use crate::metric::{distance_to_set, MetricSpace, SampledSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NagumoMode {
    /// `x` is off the set: values are `d(σ_x(t), S) / (e^{Λ|t|} d(x, S))`.
    Ratio,
    /// `x` is on the set: values are the absolute drift `d(σ_x(t), S)`.
    Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NagumoReport {
    pub mode: NagumoMode,
    pub lambda: f64,
    pub initial_distance: f64,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest entry of `values`.
    pub max_value: f64,
    /// Largest Richardson estimate among the solves.
    pub max_solver_error: f64,
    pub set_resolution: Option<f64>,
}

/// Follows the solution through `x` and measures its distance to `set`
/// against the exponential bound `e^{Λ|t|} d(x, S)`.
///
/// `x` counts as on the set when `d(x, S)` does not exceed the set's
/// resolution (or is exactly zero when no resolution is known).
pub fn nagumo_check<S>(
    space: &S,
    field: &ArcField<S::Point>,
    lambda: f64,
    set: &SampledSet<S::Point>,
    x: &S::Point,
    t_grid: &[f64],
    opts: SolveOptions,
) -> Result<NagumoReport>
where
    S: MetricSpace,
    S::Point: 'static,
{
    if t_grid.is_empty() || t_grid.iter().any(|t| *t == 0.0 || t.abs() > 1.0) {
        return Err(ArcError::InvalidInput(
            "times must be nonzero with magnitude at most 1".into(),
        ));
    }
    let d0 = distance_to_set(space, x, set);
    let mode = if d0 <= set.resolution.unwrap_or(0.0) {
        NagumoMode::Drift
    } else {
        NagumoMode::Ratio
    };
    let mut values = Vec::with_capacity(t_grid.len());
    let mut max_solver_error: f64 = 0.0;
    for &t in t_grid {
        let sol = solve(space, field, x, t, opts)?;
        if sol.escaped {
            return Err(ArcError::PointEscaped {
                steps_completed: sol.steps_used,
                detail: format!("solution left the space before t = {t}"),
            });
        }
        max_solver_error = max_solver_error.max(sol.error_estimate);
        let d = distance_to_set(space, &sol.endpoint, set);
        values.push(match mode {
            NagumoMode::Ratio => d / ((lambda * t.abs()).exp() * d0),
            NagumoMode::Drift => d,
        });
    }
    Ok(NagumoReport {
        mode,
        lambda,
        initial_distance: d0,
        t_grid: t_grid.to_vec(),
        max_value: values.iter().copied().fold(0.0, f64::max),
        values,
        max_solver_error,
        set_resolution: set.resolution,
    })
}
