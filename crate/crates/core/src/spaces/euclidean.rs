//! Euclidean `R^n` and its standard arc fields.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{ArcField, ClaimedConstants};
use crate::error::{ArcError, Result};
use crate::flow::Flow;
use crate::metric::{seeded_rng, MetricSpace, Region};

pub type EuclideanPoint = DVector<f64>;

/// `EuclideanPoint` from a coordinate slice.
pub fn point(coords: &[f64]) -> EuclideanPoint {
    DVector::from_column_slice(coords)
}

/// `(R^n, ||u - v||)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    pub dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Euclidean { dim }
    }
}

impl MetricSpace for Euclidean {
    type Point = EuclideanPoint;

    fn name(&self) -> String {
        format!("r{}", self.dim)
    }

    fn distance(&self, p: &EuclideanPoint, q: &EuclideanPoint) -> f64 {
        (p - q).norm()
    }

    fn magnitude(&self, p: &EuclideanPoint) -> f64 {
        p.norm()
    }

    /// Uniform samples from the ball of the given radius.
    fn sample(&self, seed: u64, region: &Region<EuclideanPoint>) -> Result<Vec<EuclideanPoint>> {
        if !(region.radius > 0.0) {
            return Err(ArcError::Sampler("radius must be positive".into()));
        }
        let center = match &region.center {
            Some(c) if c.len() != self.dim => {
                return Err(ArcError::Sampler(format!(
                    "center has dimension {}, space has {}",
                    c.len(),
                    self.dim
                )))
            }
            Some(c) => c.clone(),
            None => DVector::zeros(self.dim),
        };
        let mut rng = seeded_rng(seed);
        Ok((0..region.count)
            .map(|_| {
                let dir = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = dir.norm().max(f64::MIN_POSITIVE);
                let r = region.radius * rng.random::<f64>().powf(1.0 / self.dim as f64);
                &center + dir * (r / norm)
            })
            .collect())
    }
}

pub(crate) fn check_dim(x: &EuclideanPoint, dim: usize) -> Result<()> {
    if x.len() == dim {
        Ok(())
    } else {
        Err(ArcError::InvalidInput(format!(
            "point has dimension {}, field expects {dim}",
            x.len()
        )))
    }
}

/// `X_t(x) = x + t u`; its own flow.
pub fn make_translation(u: &EuclideanPoint) -> ArcField<EuclideanPoint> {
    let u = u.clone();
    let dim = u.len();
    let speed = u.norm();
    ArcField::primitive(format!("trans{}", fmt_vec(&u)), format!("r{dim}"), move |x, t| {
        check_dim(x, dim)?;
        Ok(x + &u * t)
    })
    .exact_flow()
    .with_constants(ClaimedConstants {
        lambda: 0.0,
        omega: 0.0,
        rho: speed,
    })
}

/// The closed-form flow of [`make_translation`].
pub fn translation_flow(u: &EuclideanPoint) -> Flow<EuclideanPoint> {
    Flow::closed_form(make_translation(u))
}

/// `X_t(x) = (1 + t)(x - u) + u`.
pub fn make_dilation(u: &EuclideanPoint) -> ArcField<EuclideanPoint> {
    let u = u.clone();
    let dim = u.len();
    ArcField::primitive(format!("dil{}", fmt_vec(&u)), format!("r{dim}"), move |x, t| {
        check_dim(x, dim)?;
        Ok((x - &u) * (1.0 + t) + &u)
    })
    .with_constants(ClaimedConstants {
        lambda: 1.0,
        omega: 0.0,
        rho: f64::INFINITY,
    })
}

/// Closed-form flow of the dilation about `u`: `F_t(x) = e^t x - (e^t - 1) u`.
pub fn dilation_flow(u: &EuclideanPoint) -> Flow<EuclideanPoint> {
    let u = u.clone();
    let dim = u.len();
    Flow::closed_form(
        ArcField::primitive(format!("dilflow{}", fmt_vec(&u)), format!("r{dim}"), move |x, t| {
            check_dim(x, dim)?;
            let e = t.exp();
            Ok(x * e - &u * (e - 1.0))
        })
        .with_constants(ClaimedConstants {
            lambda: 1.0,
            omega: 0.0,
            rho: f64::INFINITY,
        }),
    )
}

/// `X(x, t) = x + t f(x)`.
pub fn vector_field_arc<F>(name: impl Into<String>, dim: usize, f: F) -> ArcField<EuclideanPoint>
where
    F: Fn(&EuclideanPoint) -> EuclideanPoint + Send + Sync + 'static,
{
    ArcField::primitive(name, format!("r{dim}"), move |x, t| {
        check_dim(x, dim)?;
        let v = f(x);
        check_dim(&v, dim)?;
        Ok(x + v * t)
    })
}

pub(crate) fn fmt_vec(v: &EuclideanPoint) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
    format!("({})", parts.join(";"))
}
