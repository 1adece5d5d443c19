//! Finite planar point sets under the Hausdorff metric.
//!
//! Arc fields on this space act pointwise through a planar map.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{ArcField, ClaimedConstants};
use crate::error::{ArcError, Result};
use crate::flow::Flow;
use crate::metric::{seeded_rng, MetricSpace, Region};

/// Points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;

/// A nonempty finite subset of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactSet {
    points: Vec<[f64; 2]>,
}

impl CompactSet {
    /// Builds the set, dropping points within [`DEDUP_TOL`] of an earlier one.
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(ArcError::InvalidInput("a compact set needs at least one point".into()));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(ArcError::InvalidInput("set coordinates must be finite".into()));
        }
        let mut kept: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for p in points {
            if !kept.iter().any(|q| planar_distance(&p, q) <= DEDUP_TOL) {
                kept.push(p);
            }
        }
        Ok(CompactSet { points: kept })
    }

    pub fn singleton(p: [f64; 2]) -> Self {
        CompactSet {
            points: vec![p],
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Applies `f` to every member.
    pub fn map(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Self> {
        CompactSet::new(self.points.iter().map(|p| f(*p)).collect())
    }
}

fn planar_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn directed(a: &CompactSet, b: &CompactSet) -> f64 {
    a.points
        .iter()
        .map(|p| {
            b.points
                .iter()
                .map(|q| planar_distance(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// `max(sup_a d(a, B), sup_b d(b, A))`.
pub fn hausdorff_distance(a: &CompactSet, b: &CompactSet) -> f64 {
    directed(a, b).max(directed(b, a))
}

/// `(finite subsets of R^2, d_H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Hausdorff;

/// Largest set the sampler draws.
const MAX_SAMPLED_POINTS: usize = 6;

impl MetricSpace for Hausdorff {
    type Point = CompactSet;

    fn name(&self) -> String {
        "hausdorff".into()
    }

    fn distance(&self, p: &CompactSet, q: &CompactSet) -> f64 {
        hausdorff_distance(p, q)
    }

    fn magnitude(&self, p: &CompactSet) -> f64 {
        p.points
            .iter()
            .map(|q| q[0].hypot(q[1]))
            .fold(0.0, f64::max)
    }

    /// Sets of 1 to 6 points drawn uniformly from the disc of the given radius
    /// around the first point of the center (or the origin).
    fn sample(&self, seed: u64, region: &Region<CompactSet>) -> Result<Vec<CompactSet>> {
        if !(region.radius > 0.0) {
            return Err(ArcError::Sampler("radius must be positive".into()));
        }
        let origin = region.center.as_ref().map_or([0.0, 0.0], |c| c.points[0]);
        let mut rng = seeded_rng(seed);
        (0..region.count)
            .map(|_| {
                let k = rng.random_range(1..=MAX_SAMPLED_POINTS);
                let pts = (0..k)
                    .map(|_| {
                        let r = region.radius * rng.random::<f64>().sqrt();
                        let phi = rng.random_range(0.0..std::f64::consts::TAU);
                        [origin[0] + r * phi.cos(), origin[1] + r * phi.sin()]
                    })
                    .collect();
                CompactSet::new(pts)
            })
            .collect()
    }
}

fn planar_field<F>(name: String, f: F) -> ArcField<CompactSet>
where
    F: Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'static,
{
    ArcField::primitive(name, "hausdorff", move |a: &CompactSet, t| a.map(|p| f(p, t)))
}

/// Pointwise translation `A + t u`.
pub fn set_translation(u: [f64; 2]) -> ArcField<CompactSet> {
    planar_field(format!("settrans({};{})", u[0], u[1]), move |p, t| {
        [p[0] + t * u[0], p[1] + t * u[1]]
    })
    .exact_flow()
    .with_constants(ClaimedConstants {
        lambda: 0.0,
        omega: 0.0,
        rho: u[0].hypot(u[1]),
    })
}

/// Pointwise dilation `(1 + t)(p - u) + u`.
pub fn set_dilation(u: [f64; 2]) -> ArcField<CompactSet> {
    planar_field(format!("setdil({};{})", u[0], u[1]), move |p, t| {
        [
            (1.0 + t) * (p[0] - u[0]) + u[0],
            (1.0 + t) * (p[1] - u[1]) + u[1],
        ]
    })
    .with_constants(ClaimedConstants {
        lambda: 1.0,
        omega: 0.0,
        rho: f64::INFINITY,
    })
}

/// Closed-form flow of [`set_dilation`]: `e^t p - (e^t - 1) u` pointwise.
pub fn set_dilation_flow(u: [f64; 2]) -> Flow<CompactSet> {
    Flow::closed_form(planar_field(
        format!("setdilflow({};{})", u[0], u[1]),
        move |p, t| {
            let e = t.exp();
            [e * p[0] - (e - 1.0) * u[0], e * p[1] - (e - 1.0) * u[1]]
        },
    ))
}
