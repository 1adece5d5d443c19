use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, ArcField};
use crate::error::{ArcError, Result};
use crate::flow::Flow;
use crate::metric::{estimate_order_with_floor, zero_floor, MetricSpace, SampledSet, TangencyReport, Verdict};
use crate::par;

/// Distinct parameters mapping within this (relative) distance are a collision.
const COLLISION_TOL: f64 = 1e-10;
/// Above this many points only grid neighbours are compared for collisions.
const FULL_COLLISION_CHECK_MAX: usize = 2500;
/// Smallest compass-search step, relative to the initial one.
const COMPASS_MIN_STEP: f64 = 1e-14;
const COMPASS_MAX_ITERS: usize = 20_000;

/// Points `F_t G_s(x0)` on a rectangular parameter grid.
#[derive(Debug, Clone)]
pub struct SampledSurface<P> {
    pub base: P,
    /// Ascending, contains 0.
    pub s_grid: Vec<f64>,
    /// Ascending, contains 0.
    pub t_grid: Vec<f64>,
    /// Row-major: index `i * t_grid.len() + j` holds `F_{t_j} G_{s_i}(x0)`.
    pub points: Vec<P>,
    /// Half the largest cell diagonal: a bound on the distance from the
    /// swept surface to the nearest sample.
    pub resolution: f64,
    f: Flow<P>,
    g: Flow<P>,
}

impl<P: Clone + Send + Sync + 'static> SampledSurface<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize, j: usize) -> &P {
        &self.points[i * self.t_grid.len() + j]
    }

    pub fn parameters(&self, k: usize) -> (f64, f64) {
        let nt = self.t_grid.len();
        (self.s_grid[k / nt], self.t_grid[k % nt])
    }

    /// `F_t G_s(x0)` for parameters off the grid.
    pub fn surface_point(&self, s: f64, t: f64) -> Result<P> {
        self.f.map(&self.g.map(&self.base, s)?, t)
    }

    pub fn as_sampled_set(&self, provenance: impl Into<String>) -> Result<SampledSet<P>> {
        Ok(SampledSet::new(self.points.clone(), provenance)?.with_resolution(self.resolution))
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ArcError::InvalidInput(format!("{name} must be strictly ascending")));
    }
    if !grid.contains(&0.0) {
        return Err(ArcError::InvalidInput(format!("{name} must contain 0")));
    }
    Ok(())
}

/// Samples `S = {F_t G_s(x0)}` and spot-checks that distinct parameters give
/// distinct points.
pub fn sample_integral_surface<S>(
    space: &S,
    f: &Flow<S::Point>,
    g: &Flow<S::Point>,
    x0: &S::Point,
    s_grid: &[f64],
    t_grid: &[f64],
) -> Result<SampledSurface<S::Point>>
where
    S: MetricSpace,
    S::Point: 'static,
{
    check_grid("s grid", s_grid)?;
    check_grid("t grid", t_grid)?;
    let (ns, nt) = (s_grid.len(), t_grid.len());
    let points = par::try_map_indices(ns * nt, |k| {
        f.map(&g.map(x0, s_grid[k / nt])?, t_grid[k % nt])
    })?;
    let tol = COLLISION_TOL * (1.0 + space.magnitude(x0));
    let n = points.len();
    let collide = |a: usize, b: usize| space.distance(&points[a], &points[b]) <= tol;
    let collision = if n <= FULL_COLLISION_CHECK_MAX {
        par::map_indices(n, |a| ((a + 1)..n).find(|&b| collide(a, b)).map(|b| (a, b)))
            .into_iter()
            .flatten()
            .next()
    } else {
        par::map_indices(n, |a| {
            let (i, j) = (a / nt, a % nt);
            let mut near = Vec::with_capacity(3);
            if j + 1 < nt {
                near.push(a + 1);
            }
            if i + 1 < ns {
                near.push(a + nt);
                if j + 1 < nt {
                    near.push(a + nt + 1);
                }
            }
            near.into_iter().find(|&b| collide(a, b)).map(|b| (a, b))
        })
        .into_iter()
        .flatten()
        .next()
    };
    if let Some((a, b)) = collision {
        return Err(ArcError::SurfaceDegenerate(format!(
            "parameters (s,t) = ({}, {}) and ({}, {}) map to the same point",
            s_grid[a / nt],
            t_grid[a % nt],
            s_grid[b / nt],
            t_grid[b % nt]
        )));
    }
    let resolution = if ns > 1 && nt > 1 {
        0.5 * par::max_of((ns - 1) * (nt - 1), |c| {
            let a = (c / (nt - 1)) * nt + c % (nt - 1);
            space
                .distance(&points[a], &points[a + nt + 1])
                .max(space.distance(&points[a + 1], &points[a + nt]))
        })
    } else {
        0.5 * par::max_of(n.saturating_sub(1), |a| space.distance(&points[a], &points[a + 1]))
    };
    Ok(SampledSurface {
        base: x0.clone(),
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        points,
        resolution,
        f: f.clone(),
        g: g.clone(),
    })
}

/// Minimizes `phi` over the box by compass search from `start`.
fn compass_search<F>(phi: F, start: (f64, f64), value: f64, step: f64, lo: (f64, f64), hi: (f64, f64)) -> Result<((f64, f64), f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (mut best, mut best_value) = (start, value);
    let mut h = step;
    let min_step = step * COMPASS_MIN_STEP;
    let mut iters = 0;
    while h >= min_step && iters < COMPASS_MAX_ITERS {
        iters += 1;
        let mut moved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let cand = (
                (best.0 + da).clamp(lo.0, hi.0),
                (best.1 + db).clamp(lo.1, hi.1),
            );
            if cand == best {
                continue;
            }
            let v = phi(cand.0, cand.1)?;
            if v < best_value {
                best = cand;
                best_value = v;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok((best, best_value))
}

fn grid_step(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Distance from `q` to the surface: nearest sample, then a local search
/// over the flow parameters.
fn distance_to_surface<S>(space: &S, surface: &SampledSurface<S::Point>, q: &S::Point) -> Result<f64>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let (k, coarse) = par::argmin(surface.len(), |k| space.distance(q, &surface.points[k]))
        .expect("surface is nonempty");
    if coarse == 0.0 {
        return Ok(0.0);
    }
    let step = grid_step(&surface.s_grid).max(grid_step(&surface.t_grid));
    if step == 0.0 {
        return Ok(coarse);
    }
    let lo = (surface.s_grid[0], surface.t_grid[0]);
    let hi = (*surface.s_grid.last().unwrap(), *surface.t_grid.last().unwrap());
    let phi = |s: f64, t: f64| Ok(space.distance(q, &surface.surface_point(s, t)?));
    let (_, refined) = compass_search(phi, surface.parameters(k), coarse, step, lo, hi)?;
    Ok(refined.min(coarse))
}

/// Tangency of a combination field to a sampled surface at several base
/// points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTangency {
    pub combo: String,
    /// `(s, t)` parameters of each base point.
    pub base_params: Vec<(f64, f64)>,
    pub reports: Vec<TangencyReport>,
    /// Worst verdict over the base points.
    pub verdict: Verdict,
    /// Smallest fitted order over the base points.
    pub worst_order: f64,
    pub surface_resolution: f64,
}

fn verdict_rank(v: Verdict) -> u8 {
    match v {
        Verdict::NotTangent => 0,
        Verdict::Tangent => 1,
        Verdict::SecondOrder => 2,
        Verdict::ExactZero => 3,
    }
}

/// Fits the order of `τ -> d(combo_τ(x), S)` at each base point
/// `x = F_t G_s(x0)`, `(s, t)` from `base_params`.
pub fn surface_tangency<S>(
    space: &S,
    surface: &SampledSurface<S::Point>,
    combo: &ArcField<S::Point>,
    base_params: &[(f64, f64)],
    t_grid: &[f64],
) -> Result<SurfaceTangency>
where
    S: MetricSpace,
    S::Point: 'static,
{
    if base_params.is_empty() {
        return Err(ArcError::InvalidInput("need at least one base point".into()));
    }
    let reports = base_params
        .iter()
        .map(|&(s, t)| {
            let x = surface.surface_point(s, t)?;
            let gaps = par::try_map_indices(t_grid.len(), |i| {
                distance_to_surface(space, surface, &combo.eval(&x, t_grid[i])?)
            })?;
            estimate_order_with_floor(t_grid, &gaps, zero_floor(space.magnitude(&x)))
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = reports
        .iter()
        .map(|r| r.verdict)
        .min_by_key(|v| verdict_rank(*v))
        .expect("nonempty");
    let worst_order = reports.iter().map(|r| r.order_p).fold(f64::INFINITY, f64::min);
    Ok(SurfaceTangency {
        combo: combo.name().to_string(),
        base_params: base_params.to_vec(),
        reports,
        verdict,
        worst_order,
        surface_resolution: surface.resolution,
    })
}

/// Generators of a distribution, each with its flow.
#[derive(Debug, Clone)]
pub struct Distribution<P> {
    flows: Vec<Flow<P>>,
}

impl<P: Clone + Send + Sync + 'static> Distribution<P> {
    pub fn new(flows: Vec<Flow<P>>) -> Result<Self> {
        let Some(first) = flows.first() else {
            return Err(ArcError::InvalidInput("a distribution needs a generator".into()));
        };
        let space = first.as_arc_field().space().to_string();
        if let Some(other) = flows.iter().find(|f| f.as_arc_field().space() != space) {
            return Err(ArcError::SpaceMismatch {
                left: space,
                right: other.as_arc_field().space().to_string(),
            });
        }
        Ok(Distribution { flows })
    }

    pub fn generators(&self) -> Vec<&ArcField<P>> {
        self.flows.iter().map(|f| f.generator()).collect()
    }

    pub fn flows(&self) -> &[Flow<P>] {
        &self.flows
    }

    /// Arcs `τ -> F^i_τ(x)` of every generator's flow at the given times.
    pub fn curves_at(&self, x: &P, times: &[f64]) -> Result<Vec<Vec<P>>> {
        self.flows
            .iter()
            .map(|f| times.iter().map(|&t| f.map(x, t)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InvolutivityVerdict {
    Involutive,
    NotInvolutive,
}

/// Best constant combination at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFit {
    pub base_index: usize,
    /// Minimizing coefficients at the smallest time of the grid.
    pub best_a: f64,
    pub best_b: f64,
    /// Order fit of `τ -> min_{a,b} d([F,G]_τ x, (aF + bG)_τ x)`.
    pub report: TangencyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutivityReport {
    pub points: Vec<PointFit>,
    pub verdict: InvolutivityVerdict,
}

/// Decides whether `[F, G]` stays tangent to the span of two flows.
///
/// At each base point and time `τ` the gap between `[F,G]_τ(x)` and
/// `(aF + bG)_τ(x)` is minimized over constant `(a, b)`: first over
/// `coeff_grid × coeff_grid`, then by compass search. The pair is involutive
/// when the minimal gap is `o(τ)` at every base point.
pub fn involutivity_check<S>(
    space: &S,
    dist: &Distribution<S::Point>,
    bases: &[S::Point],
    coeff_grid: &[f64],
    t_grid: &[f64],
) -> Result<InvolutivityReport>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let [f, g] = dist.flows() else {
        return Err(ArcError::InvalidInput(format!(
            "involutivity is implemented for two generators, got {}",
            dist.flows().len()
        )));
    };
    if bases.is_empty() || coeff_grid.len() < 2 {
        return Err(ArcError::InvalidInput(
            "need base points and at least two coefficient values".into(),
        ));
    }
    let br = bracket(f.as_arc_field(), g.as_arc_field())?;
    let nc = coeff_grid.len();
    let step = grid_step(coeff_grid);
    let lo = coeff_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = coeff_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let points = bases
        .iter()
        .enumerate()
        .map(|(base_index, x)| {
            let fits = par::try_map_indices(t_grid.len(), |k| {
                let tau = t_grid[k];
                let q = br.eval(x, tau)?;
                let phi = |a: f64, b: f64| -> Result<f64> {
                    Ok(space.distance(&q, &g.map(&f.map(x, a * tau)?, b * tau)?))
                };
                let coarse = (0..nc * nc)
                    .map(|c| Ok((c, phi(coeff_grid[c / nc], coeff_grid[c % nc])?)))
                    .collect::<Result<Vec<_>>>()?;
                let (c, v) = coarse
                    .into_iter()
                    .fold((0, f64::INFINITY), |acc, (c, v)| if v < acc.1 { (c, v) } else { acc });
                let start = (coeff_grid[c / nc], coeff_grid[c % nc]);
                if v == 0.0 {
                    return Ok((start, 0.0));
                }
                compass_search(phi, start, v, step, (lo, lo), (hi, hi))
            })?;
            let gaps: Vec<f64> = fits.iter().map(|f| f.1).collect();
            let report = estimate_order_with_floor(t_grid, &gaps, zero_floor(space.magnitude(x)))?;
            let smallest = (0..t_grid.len())
                .min_by(|&a, &b| t_grid[a].total_cmp(&t_grid[b]))
                .expect("nonempty grid");
            Ok(PointFit {
                base_index,
                best_a: fits[smallest].0 .0,
                best_b: fits[smallest].0 .1,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if points.iter().all(|p| p.report.verdict.is_tangent()) {
        InvolutivityVerdict::Involutive
    } else {
        InvolutivityVerdict::NotInvolutive
    };
    Ok(InvolutivityReport { points, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::default_t_grid;
    use crate::spaces::euclidean::{point, translation_flow, Euclidean};

    fn axis(lo: i32, hi: i32, h: f64) -> Vec<f64> {
        (lo..=hi).map(|k| k as f64 * h).collect()
    }

    #[test]
    fn translation_plane() {
        let sp = Euclidean::new(3);
        let f = translation_flow(&point(&[1.0, 0.0, 0.0]));
        let g = translation_flow(&point(&[0.0, 1.0, 0.0]));
        let grid = axis(-8, 8, 0.125);
        let surf = sample_integral_surface(&sp, &f, &g, &point(&[0.0, 0.0, 0.0]), &grid, &grid).unwrap();
        assert_eq!(surf.len(), 17 * 17);
        assert_eq!(surf.point(8, 8), &point(&[0.0, 0.0, 0.0]));
        assert_eq!(surf.point(8, 9), &point(&[0.125, 0.0, 0.0]));
        let combo = crate::algebra::sum(f.as_arc_field(), g.as_arc_field()).unwrap();
        let st = surface_tangency(&sp, &surf, &combo, &[(0.0, 0.5)], &default_t_grid()).unwrap();
        assert_eq!(st.verdict, Verdict::ExactZero);
    }

    #[test]
    fn collision_is_reported() {
        let sp = Euclidean::new(3);
        let f = translation_flow(&point(&[1.0, 0.0, 0.0]));
        let grid = axis(-2, 2, 0.25);
        assert!(matches!(
            sample_integral_surface(&sp, &f, &f, &point(&[0.0, 0.0, 0.0]), &grid, &grid),
            Err(ArcError::SurfaceDegenerate(_))
        ));
        assert!(sample_integral_surface(&sp, &f, &f, &point(&[0.0, 0.0, 0.0]), &[0.1, 0.2], &grid).is_err());
    }

    #[test]
    fn translations_are_involutive() {
        let sp = Euclidean::new(2);
        let d = Distribution::new(vec![
            translation_flow(&point(&[1.0, 0.0])),
            translation_flow(&point(&[0.0, 1.0])),
        ])
        .unwrap();
        let coeffs = axis(-8, 8, 0.25);
        let r = involutivity_check(&sp, &d, &[point(&[0.3, -0.2])], &coeffs, &default_t_grid()).unwrap();
        assert_eq!(r.verdict, InvolutivityVerdict::Involutive);
        assert_eq!((r.points[0].best_a, r.points[0].best_b), (0.0, 0.0));
    }
}
