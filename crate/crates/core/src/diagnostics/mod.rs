//! Sampled estimators for the regularity constants of arc fields and the
//! integrability properties of pairs of flows.
//!
//! Every estimator is a supremum or infimum over a seeded sample, never a
//! certified bound. Each returns the sample that attains it, so a surprising
//! value can be replayed.

mod estimators;
mod nagumo;
mod surface;

pub use estimators::{
    commutation_gap, commutation_gap_at, estimate_closeness, estimate_e1, estimate_e2,
    estimate_speed_growth, estimate_transversality, exp_growth_check, ExpGrowthReport,
    SpeedGrowth, TRANSVERSALITY_FLOOR,
};
pub use nagumo::{nagumo_check, NagumoMode, NagumoReport};
pub use surface::{
    involutivity_check, sample_integral_surface, surface_tangency, Distribution,
    InvolutivityReport, InvolutivityVerdict, PointFit, SampledSurface, SurfaceTangency,
};

use serde::{Deserialize, Serialize};

use crate::algebra::ArcField;
use crate::error::{ArcError, Result};
use crate::metric::{curve_gap, estimate_order_with_floor, zero_floor, MetricSpace, TangencyReport};

/// Tangency of two arc fields at a base point: fits the order of
/// `t -> d(A_t(x), B_t(x))` over `t_grid`.
pub fn field_tangency<S>(
    space: &S,
    a: &ArcField<S::Point>,
    b: &ArcField<S::Point>,
    x: &S::Point,
    t_grid: &[f64],
) -> Result<TangencyReport>
where
    S: MetricSpace,
    S::Point: 'static,
{
    field_tangency_with_floor(space, a, b, x, t_grid, zero_floor(space.magnitude(x)))
}

/// [`field_tangency`] with an explicit zero floor, for spaces whose maps
/// carry a known discretization error.
pub fn field_tangency_with_floor<S>(
    space: &S,
    a: &ArcField<S::Point>,
    b: &ArcField<S::Point>,
    x: &S::Point,
    t_grid: &[f64],
    floor: f64,
) -> Result<TangencyReport>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let gaps = curve_gap(space, |t| a.eval(x, t), |t| b.eval(x, t), t_grid)?;
    estimate_order_with_floor(t_grid, &gaps, floor)
}

/// Where and how finely an estimator samples.
#[derive(Debug, Clone)]
pub struct RegionSampler<P> {
    pub center: P,
    pub radius: f64,
    /// Number of random samples (pairs, for two-point estimators) drawn in
    /// addition to the center.
    pub samples: usize,
    /// Largest time magnitude; times are `±delta 2^-k`.
    pub delta: f64,
    /// Number of dyadic time levels.
    pub levels: usize,
    pub seed: u64,
}

/// Default number of dyadic time levels.
pub const DEFAULT_LEVELS: usize = 6;

impl<P> RegionSampler<P> {
    pub fn new(center: P, radius: f64, samples: usize, delta: f64, seed: u64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(ArcError::InvalidInput("sampler radius must be positive".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(ArcError::InvalidInput("sampler delta must lie in (0, 1]".into()));
        }
        Ok(RegionSampler {
            center,
            radius,
            samples,
            delta,
            levels: DEFAULT_LEVELS,
            seed,
        })
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels.max(1);
        self
    }

    /// `{±delta 2^-k : k < levels}`, positive entries first.
    pub fn times(&self, levels: usize) -> Vec<f64> {
        let pos: Vec<f64> = (0..levels).map(|k| self.delta * 2f64.powi(-(k as i32))).collect();
        pos.iter().copied().chain(pos.iter().map(|t| -t)).collect()
    }

    fn spec(&self) -> SamplingSpec {
        SamplingSpec {
            radius: self.radius,
            delta: self.delta,
            levels: self.levels,
            samples: self.samples,
            refined_levels: self.levels + REFINE_EXTRA_LEVELS,
            refined_samples: 2 * self.samples,
        }
    }
}

/// Extra dyadic levels used by the refinement pass.
const REFINE_EXTRA_LEVELS: usize = 2;
/// Relative growth under refinement that flags an estimate as diverging.
pub const DIVERGENCE_GROWTH: f64 = 0.10;
/// Absolute slack added to the divergence test.
const DIVERGENCE_SLACK: f64 = 1e-9;

/// The sample attaining an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Index into the sampled points; `0` is the center.
    pub sample_index: usize,
    pub s: f64,
    pub t: f64,
}

/// Sampling parameters of both passes, as reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub radius: f64,
    pub delta: f64,
    pub levels: usize,
    pub samples: usize,
    pub refined_levels: usize,
    pub refined_samples: usize,
}

/// A sampled supremum (or infimum) with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub estimator: String,
    /// Value from the refined pass.
    pub value: f64,
    /// Value from the first pass.
    pub coarse_value: f64,
    pub witness: Option<Witness>,
    /// The refined pass exceeded the first by more than 10%.
    pub diverging: bool,
    pub grid_spec: SamplingSpec,
    pub seed: u64,
}
