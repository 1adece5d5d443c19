use serde::{Deserialize, Serialize};

use crate::algebra::ArcField;
use crate::error::{ArcError, Result};
use crate::flow::Flow;
use crate::metric::{MetricSpace, Region};
use crate::par;

use super::{
    ConstantEstimate, RegionSampler, Witness, DIVERGENCE_GROWTH, DIVERGENCE_SLACK,
    REFINE_EXTRA_LEVELS,
};

/// `δ̂` at or below this counts as not transverse.
pub const TRANSVERSALITY_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Sup,
    Inf,
}

/// Center followed by `count` seeded samples around it.
fn draw<S: MetricSpace>(
    space: &S,
    sampler: &RegionSampler<S::Point>,
    count: usize,
) -> Result<Vec<S::Point>> {
    let mut points = vec![sampler.center.clone()];
    if count > 0 {
        points.extend(space.sample(
            sampler.seed,
            &Region::around(sampler.center.clone(), sampler.radius, count),
        )?);
    }
    Ok(points)
}

/// Extremum of `f(i, s, t)` over `i < n` and the given time pairs; `None`
/// values are skipped. Ties go to the lowest flat index.
fn extremum<F>(n: usize, times: &[(f64, f64)], kind: Extremum, f: F) -> Result<Option<(f64, Witness)>>
where
    F: Fn(usize, f64, f64) -> Result<Option<f64>> + Sync + Send,
{
    let m = times.len();
    let values = par::try_map_indices(n * m, |k| f(k / m, times[k % m].0, times[k % m].1))?;
    let mut best: Option<(f64, usize)> = None;
    for (k, v) in values.into_iter().enumerate() {
        let Some(v) = v else { continue };
        if v.is_nan() {
            return Err(ArcError::InvalidInput("estimator produced NaN".into()));
        }
        let better = match (best, kind) {
            (None, _) => true,
            (Some((b, _)), Extremum::Sup) => v > b,
            (Some((b, _)), Extremum::Inf) => v < b,
        };
        if better {
            best = Some((v, k));
        }
    }
    Ok(best.map(|(v, k)| {
        (
            v,
            Witness {
                sample_index: k / m,
                s: times[k % m].0,
                t: times[k % m].1,
            },
        )
    }))
}

type TimePairs = fn(&[f64]) -> Vec<(f64, f64)>;

fn single_times(ts: &[f64]) -> Vec<(f64, f64)> {
    ts.iter().map(|&t| (0.0, t)).collect()
}

fn all_pairs(ts: &[f64]) -> Vec<(f64, f64)> {
    ts.iter()
        .flat_map(|&s| ts.iter().map(move |&t| (s, t)))
        .collect()
}

fn all_pairs_with_zero(ts: &[f64]) -> Vec<(f64, f64)> {
    let mut with_zero = vec![0.0];
    with_zero.extend_from_slice(ts);
    all_pairs(&with_zero)
        .into_iter()
        .filter(|&(s, t)| s != 0.0 || t != 0.0)
        .collect()
}

struct Pass<'a, S: MetricSpace> {
    space: &'a S,
    sampler: &'a RegionSampler<S::Point>,
    name: &'a str,
    /// Points drawn per requested sample.
    points_per_sample: usize,
    /// Evaluation indices from the drawn point count.
    indices: fn(usize) -> usize,
    times: TimePairs,
    kind: Extremum,
}

impl<S: MetricSpace> Pass<'_, S> {
    /// Runs the estimator at the sampler's resolution and again with twice
    /// the samples and two extra time levels.
    fn run<F>(&self, f: F) -> Result<ConstantEstimate>
    where
        F: Fn(&[S::Point], usize, f64, f64) -> Result<Option<f64>> + Sync + Send,
    {
        let s = self.sampler;
        let level = |samples: usize, levels: usize| -> Result<Option<(f64, Witness)>> {
            let pts = draw(self.space, s, samples * self.points_per_sample)?;
            let times = (self.times)(&s.times(levels));
            extremum((self.indices)(pts.len()), &times, self.kind, |i, a, b| f(&pts, i, a, b))
        };
        let coarse = level(s.samples, s.levels)?;
        let fine = level(2 * s.samples, s.levels + REFINE_EXTRA_LEVELS)?;
        let (Some((coarse_value, _)), Some((value, witness))) = (coarse, fine) else {
            return Err(ArcError::InsufficientData(format!(
                "{}: every sampled configuration was degenerate",
                self.name
            )));
        };
        let diverging = match self.kind {
            Extremum::Sup => value > (1.0 + DIVERGENCE_GROWTH) * coarse_value + DIVERGENCE_SLACK,
            Extremum::Inf => false,
        };
        Ok(ConstantEstimate {
            estimator: self.name.to_string(),
            value,
            coarse_value,
            witness: Some(witness),
            diverging,
            grid_spec: s.spec(),
            seed: s.seed,
        })
    }
}

fn same_space<S: MetricSpace>(space: &S, fields: &[&str]) -> Result<()> {
    let name = space.name();
    for f in fields {
        if *f != name && *f != crate::algebra::ANY_SPACE {
            return Err(ArcError::SpaceMismatch {
                left: name,
                right: f.to_string(),
            });
        }
    }
    Ok(())
}

/// `Λ̂ = sup (d(X_t x, X_t y) / d(x, y) - 1) / |t|`, clipped below at 0.
/// Pairs at distance 0 are skipped.
pub fn estimate_e1<S>(
    space: &S,
    field: &ArcField<S::Point>,
    sampler: &RegionSampler<S::Point>,
) -> Result<ConstantEstimate>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[field.space()])?;
    Pass {
        space,
        sampler,
        name: "E1",
        points_per_sample: 2,
        indices: |n| n.saturating_sub(1),
        times: single_times,
        kind: Extremum::Sup,
    }
    .run(|pts, i, _, t| {
        let (x, y) = (&pts[i], &pts[i + 1]);
        let d = space.distance(x, y);
        if d == 0.0 {
            return Ok(None);
        }
        let moved = space.distance(&field.eval(x, t)?, &field.eval(y, t)?);
        Ok(Some(((moved / d - 1.0) / t.abs()).max(0.0)))
    })
}

/// `Ω̂ = sup d(X_{s+t} x, X_t X_s x) / |st|`.
pub fn estimate_e2<S>(
    space: &S,
    field: &ArcField<S::Point>,
    sampler: &RegionSampler<S::Point>,
) -> Result<ConstantEstimate>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[field.space()])?;
    Pass {
        space,
        sampler,
        name: "E2",
        points_per_sample: 1,
        indices: |n| n,
        times: all_pairs,
        kind: Extremum::Sup,
    }
    .run(|pts, i, s, t| {
        let x = &pts[i];
        let direct = field.eval(x, s + t)?;
        let composed = field.eval(&field.eval(x, s)?, t)?;
        Ok(Some(space.distance(&direct, &composed) / (s * t).abs()))
    })
}

/// `Ĉ = sup d(Y_s X_t x, X_t Y_s x) / |st|`.
pub fn estimate_closeness<S>(
    space: &S,
    x_field: &ArcField<S::Point>,
    y_field: &ArcField<S::Point>,
    sampler: &RegionSampler<S::Point>,
) -> Result<ConstantEstimate>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[x_field.space(), y_field.space()])?;
    Pass {
        space,
        sampler,
        name: "closeness",
        points_per_sample: 1,
        indices: |n| n,
        times: all_pairs,
        kind: Extremum::Sup,
    }
    .run(|pts, i, s, t| {
        let p = &pts[i];
        let a = y_field.eval(&x_field.eval(p, t)?, s)?;
        let b = x_field.eval(&y_field.eval(p, s)?, t)?;
        Ok(Some(space.distance(&a, &b) / (s * t).abs()))
    })
}

/// `δ̂ = inf d(X_s x, Y_t x) / (|s| + |t|)` over `(s, t) != (0, 0)`, where
/// either time may be zero. The pair is transverse when `δ̂` exceeds
/// [`TRANSVERSALITY_FLOOR`].
pub fn estimate_transversality<S>(
    space: &S,
    x_field: &ArcField<S::Point>,
    y_field: &ArcField<S::Point>,
    sampler: &RegionSampler<S::Point>,
) -> Result<ConstantEstimate>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[x_field.space(), y_field.space()])?;
    Pass {
        space,
        sampler,
        name: "transversality",
        points_per_sample: 1,
        indices: |n| n,
        times: all_pairs_with_zero,
        kind: Extremum::Inf,
    }
    .run(|pts, i, s, t| {
        let p = &pts[i];
        let d = space.distance(&x_field.eval(p, s)?, &y_field.eval(p, t)?);
        Ok(Some(d / (s.abs() + t.abs())))
    })
}

/// `sup d(F_t G_s x, G_s F_t x)` over the sampled points and all time pairs.
pub fn commutation_gap<S>(
    space: &S,
    f: &Flow<S::Point>,
    g: &Flow<S::Point>,
    sampler: &RegionSampler<S::Point>,
) -> Result<ConstantEstimate>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[f.as_arc_field().space(), g.as_arc_field().space()])?;
    let mut est = Pass {
        space,
        sampler,
        name: "commutation",
        points_per_sample: 1,
        indices: |n| n,
        times: all_pairs,
        kind: Extremum::Sup,
    }
    .run(|pts, i, s, t| commutation_gap_at(space, f, g, &pts[i], s, t).map(Some))?;
    // a sup of exact zeros does not diverge
    est.diverging &= est.value > 0.0;
    Ok(est)
}

/// `d(F_t G_s x, G_s F_t x)` at one configuration.
pub fn commutation_gap_at<S>(
    space: &S,
    f: &Flow<S::Point>,
    g: &Flow<S::Point>,
    x: &S::Point,
    s: f64,
    t: f64,
) -> Result<f64>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let a = f.map(&g.map(x, s)?, t)?;
    let b = g.map(&f.map(x, t)?, s)?;
    Ok(space.distance(&a, &b))
}

/// Empirical speed bound `ρ̂(x, r)` per radius and the least-squares line
/// `ρ̂ ≈ c1 r + c2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedGrowth {
    pub radii: Vec<f64>,
    pub rho: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
}

/// `ρ̂(x, r) = sup d(X_s y, X_t y) / |s - t|` over `y` sampled in `B(x, r)`
/// and distinct times in `{0, ±delta 2^-k}`.
pub fn estimate_speed_growth<S>(
    space: &S,
    field: &ArcField<S::Point>,
    x: &S::Point,
    radii: &[f64],
    samples: usize,
    delta: f64,
    seed: u64,
) -> Result<SpeedGrowth>
where
    S: MetricSpace,
    S::Point: 'static,
{
    same_space(space, &[field.space()])?;
    if radii.len() < 2 {
        return Err(ArcError::InsufficientData("speed fit needs at least two radii".into()));
    }
    let rho = radii
        .iter()
        .map(|&r| {
            let sampler = RegionSampler::new(x.clone(), r, samples, delta, seed)?;
            let pts = draw(space, &sampler, samples)?;
            let times: Vec<(f64, f64)> = all_pairs_with_zero(&sampler.times(sampler.levels))
                .into_iter()
                .filter(|(s, t)| s < t)
                .collect();
            let best = extremum(pts.len(), &times, Extremum::Sup, |i, s, t| {
                let p = &pts[i];
                let d = space.distance(&field.eval(p, s)?, &field.eval(p, t)?);
                Ok(Some(d / (t - s)))
            })?;
            Ok(best.map_or(0.0, |b| b.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = radii.len() as f64;
    let mx = radii.iter().sum::<f64>() / n;
    let my = rho.iter().sum::<f64>() / n;
    let sxx: f64 = radii.iter().map(|r| (r - mx).powi(2)).sum();
    let sxy: f64 = radii.iter().zip(&rho).map(|(r, p)| (r - mx) * (p - my)).sum();
    if sxx == 0.0 {
        return Err(ArcError::InsufficientData("radii must not all be equal".into()));
    }
    let c1 = sxy / sxx;
    Ok(SpeedGrowth {
        radii: radii.to_vec(),
        c2: my - c1 * mx,
        c1,
        rho,
    })
}

/// Ratios `d(F_t x, F_t y) / (e^{Λ|t|} d(x, y))` over sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpGrowthReport {
    pub lambda: f64,
    pub pairs: usize,
    pub max_ratio: f64,
    /// Largest `|ratio - 1|` among forward times `t > 0`; zero when the bound
    /// is attained exactly.
    pub max_forward_deviation: f64,
    pub witness: Option<Witness>,
}

/// Checks `d(F_t x, F_t y) <= e^{Λ|t|} d(x, y)` on `pairs` sampled pairs and
/// every time `±delta 2^-k`.
pub fn exp_growth_check<S>(
    space: &S,
    flow: &Flow<S::Point>,
    lambda: f64,
    sampler: &RegionSampler<S::Point>,
) -> Result<ExpGrowthReport>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let pts = draw(space, sampler, 2 * sampler.samples)?;
    let times = single_times(&sampler.times(sampler.levels));
    let ratio = |i: usize, t: f64| -> Result<Option<f64>> {
        let (x, y) = (&pts[i], &pts[i + 1]);
        let d = space.distance(x, y);
        if d == 0.0 {
            return Ok(None);
        }
        let moved = space.distance(&flow.map(x, t)?, &flow.map(y, t)?);
        Ok(Some(moved / ((lambda * t.abs()).exp() * d)))
    };
    let n = pts.len() - 1;
    let max = extremum(n, &times, Extremum::Sup, |i, _, t| ratio(i, t))?;
    let forward: Vec<(f64, f64)> = times.iter().copied().filter(|p| p.1 > 0.0).collect();
    let dev = extremum(n, &forward, Extremum::Sup, |i, _, t| {
        Ok(ratio(i, t)?.map(|r| (r - 1.0).abs()))
    })?;
    let (max_ratio, witness) = max.ok_or_else(|| {
        ArcError::InsufficientData("all sampled pairs were degenerate".into())
    })?;
    Ok(ExpGrowthReport {
        lambda,
        pairs: n,
        max_ratio,
        max_forward_deviation: dev.map_or(0.0, |d| d.0),
        witness: Some(witness),
    })
}
