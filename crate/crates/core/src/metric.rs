//! Metric-space interface, axiom checks and the asymptotic-order estimator.
//!
//! Every "gap is o(t)" statement in this crate is decided by
//! [`estimate_order`]: a least-squares fit of `log gap = log C + p log t` on a
//! finite grid of small times, with fixed verdict margins.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::par;

/// Absolute zero floor before scaling by the magnitude of the points involved.
pub const ZERO_FLOOR: f64 = 1e-11;
/// Fitted order above which a gap counts as `o(t)`.
pub const TANGENT_ORDER: f64 = 1.15;
/// Fitted order above which a gap counts as `O(t^2)`.
pub const SECOND_ORDER: f64 = 1.85;

/// `1e-11 * (1 + scale)`.
pub fn zero_floor(scale: f64) -> f64 {
    ZERO_FLOOR * (1.0 + scale.abs())
}

/// Description of where a sampler should draw points.
#[derive(Debug, Clone)]
pub struct Region<P> {
    /// Center of the ball; `None` lets the space pick its canonical origin.
    pub center: Option<P>,
    pub radius: f64,
    pub count: usize,
}

impl<P> Region<P> {
    pub fn around(center: P, radius: f64, count: usize) -> Self {
        Region {
            center: Some(center),
            radius,
            count,
        }
    }

    pub fn anywhere(radius: f64, count: usize) -> Self {
        Region {
            center: None,
            radius,
            count,
        }
    }
}

/// A metric space: a point type, a distance oracle and a seeded sampler.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + Send + Sync + fmt::Debug;

    /// Short identifier, used to detect arc fields living on different spaces.
    fn name(&self) -> String;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> f64;

    /// Characteristic size of a point (its norm, in linear spaces). Only used
    /// to scale absolute floors.
    fn magnitude(&self, p: &Self::Point) -> f64;

    /// Draws `region.count` points from the ball described by `region`.
    /// Deterministic in `seed`.
    fn sample(&self, seed: u64, region: &Region<Self::Point>) -> Result<Vec<Self::Point>>;
}

/// Deterministic RNG used by every sampler in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of [`verify_metric_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub space: String,
    pub pass: bool,
    pub n_triples: usize,
    pub seed: u64,
    /// max of `d(x,y) - d(x,z) - d(z,y)`.
    pub worst_triangle: f64,
    /// The same violation divided by `d(x,z) + d(z,y)`.
    pub worst_triangle_relative: f64,
    /// max of `|d(x,y) - d(y,x)|`.
    pub worst_symmetry: f64,
    /// max of `d(x,x)`.
    pub worst_identity: f64,
    /// Number of sampled pairs with distinct representations at distance 0.
    pub separation_failures: usize,
}

/// Relative slack allowed on the triangle inequality.
pub const TRIANGLE_SLACK: f64 = 1e-9;
const SYMMETRY_SLACK: f64 = 1e-12;

/// Samples `n_triples` triples and measures the worst violation of each
/// metric axiom.
pub fn verify_metric_axioms<S: MetricSpace>(
    space: &S,
    n_triples: usize,
    seed: u64,
) -> Result<AxiomReport> {
    if n_triples == 0 {
        return Err(ArcError::InvalidInput("n_triples must be at least 1".into()));
    }
    let points = space
        .sample(seed, &Region::anywhere(1.0, 3 * n_triples))
        .map_err(|e| match e {
            ArcError::Sampler(_) => e,
            other => ArcError::Sampler(other.to_string()),
        })?;
    if points.len() < 3 * n_triples {
        return Err(ArcError::Sampler(format!(
            "asked for {} points, got {}",
            3 * n_triples,
            points.len()
        )));
    }

    struct Triple {
        tri: f64,
        tri_rel: f64,
        sym: f64,
        ident: f64,
        separation_failure: bool,
    }
    let per = par::map_indices(n_triples, |i| {
        let (x, y, z) = (&points[3 * i], &points[3 * i + 1], &points[3 * i + 2]);
        let dxy = space.distance(x, y);
        let dyx = space.distance(y, x);
        let dxz = space.distance(x, z);
        let dzy = space.distance(z, y);
        let tri = dxy - dxz - dzy;
        let denom = dxz + dzy;
        let tri_rel = if denom > 0.0 { tri / denom } else { tri };
        let ident = space
            .distance(x, x)
            .max(space.distance(y, y))
            .max(space.distance(z, z));
        let separation_failure = dxy <= 0.0 && format!("{x:?}") != format!("{y:?}");
        Triple {
            tri,
            tri_rel,
            sym: (dxy - dyx).abs(),
            ident,
            separation_failure,
        }
    });

    let mut report = AxiomReport {
        space: space.name(),
        pass: true,
        n_triples,
        seed,
        worst_triangle: f64::NEG_INFINITY,
        worst_triangle_relative: f64::NEG_INFINITY,
        worst_symmetry: 0.0,
        worst_identity: 0.0,
        separation_failures: 0,
    };
    let mut sym_scale: f64 = 0.0;
    for (i, t) in per.iter().enumerate() {
        report.worst_triangle = report.worst_triangle.max(t.tri);
        report.worst_triangle_relative = report.worst_triangle_relative.max(t.tri_rel);
        report.worst_symmetry = report.worst_symmetry.max(t.sym);
        report.worst_identity = report.worst_identity.max(t.ident);
        report.separation_failures += usize::from(t.separation_failure);
        sym_scale = sym_scale.max(space.distance(&points[3 * i], &points[3 * i + 1]).abs());
    }
    report.pass = report.worst_triangle_relative <= TRIANGLE_SLACK
        && report.worst_symmetry <= SYMMETRY_SLACK * (1.0 + sym_scale)
        && report.worst_identity == 0.0
        && report.separation_failures == 0;
    Ok(report)
}

/// Pointwise gaps `d(A(t_i), B(t_i))` along a strictly descending positive
/// time grid.
pub fn curve_gap<S, A, B>(space: &S, curve_a: A, curve_b: B, t_grid: &[f64]) -> Result<Vec<f64>>
where
    S: MetricSpace,
    A: Fn(f64) -> Result<S::Point> + Sync + Send,
    B: Fn(f64) -> Result<S::Point> + Sync + Send,
{
    validate_descending(t_grid)?;
    par::try_map_indices(t_grid.len(), |i| {
        let t = t_grid[i];
        let escaped = |e: ArcError| match e {
            ArcError::PointEscaped { .. } => ArcError::CurveEscaped { index: i },
            other => other,
        };
        let a = curve_a(t).map_err(escaped)?;
        let b = curve_b(t).map_err(escaped)?;
        Ok(space.distance(&a, &b))
    })
}

fn validate_descending(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(ArcError::InvalidInput("empty time grid".into()));
    }
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(ArcError::InvalidInput(
            "time grid must be strictly positive".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ArcError::InvalidInput(
            "time grid must be sorted strictly descending".into(),
        ));
    }
    Ok(())
}

/// `{2^-k : k = k_lo..=k_hi}`, descending.
pub fn dyadic_grid(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 2f64.powi(-k)).collect()
}

/// The default tangency grid `{2^-k : k = 4..12}`.
pub fn default_t_grid() -> Vec<f64> {
    dyadic_grid(4, 12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NotTangent,
    Tangent,
    SecondOrder,
    ExactZero,
}

impl Verdict {
    /// True for every verdict meaning `o(t)`.
    pub fn is_tangent(self) -> bool {
        !matches!(self, Verdict::NotTangent)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotTangent => "NOT_TANGENT",
            Verdict::Tangent => "TANGENT",
            Verdict::SecondOrder => "SECOND_ORDER",
            Verdict::ExactZero => "EXACT_ZERO",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fitted asymptotic order of a gap function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyReport {
    pub t_grid: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Log-log slope; `+inf` (serialized as `null`) for exact zeros.
    pub order_p: f64,
    #[serde(rename = "constant_C")]
    pub constant_c: f64,
    /// Root-mean-square residual of the log-log fit.
    pub fit_residual: f64,
    pub verdict: Verdict,
}

/// Fits `log gap = log C + p log t` using the default zero floor.
pub fn estimate_order(t_grid: &[f64], gaps: &[f64]) -> Result<TangencyReport> {
    estimate_order_with_floor(t_grid, gaps, ZERO_FLOOR)
}

/// Fits `log gap = log C + p log t` over the entries with `gap > floor`.
pub fn estimate_order_with_floor(
    t_grid: &[f64],
    gaps: &[f64],
    floor: f64,
) -> Result<TangencyReport> {
    if t_grid.len() != gaps.len() {
        return Err(ArcError::InvalidInput(format!(
            "{} times but {} gaps",
            t_grid.len(),
            gaps.len()
        )));
    }
    if gaps.iter().any(|g| *g < 0.0 || g.is_nan()) {
        return Err(ArcError::InvalidInput("gaps must be nonnegative".into()));
    }
    if t_grid.len() < 4 {
        return Err(ArcError::InsufficientData(format!(
            "need at least 4 grid points, got {}",
            t_grid.len()
        )));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(ArcError::InvalidInput("times must be positive".into()));
    }
    let t_max = t_grid.iter().cloned().fold(f64::MIN, f64::max);
    let t_min = t_grid.iter().cloned().fold(f64::MAX, f64::min);
    if t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(ArcError::InsufficientData(
            "time grid must span at least two decades".into(),
        ));
    }

    let mut report = TangencyReport {
        t_grid: t_grid.to_vec(),
        gaps: gaps.to_vec(),
        order_p: f64::INFINITY,
        constant_c: 0.0,
        fit_residual: 0.0,
        verdict: Verdict::ExactZero,
    };
    let usable: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(gaps)
        .filter(|(_, g)| **g > floor)
        .map(|(t, g)| (t.ln(), g.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(report);
    }
    if usable.len() < 4 {
        return Err(ArcError::InsufficientData(format!(
            "only {} gaps above the zero floor {floor:e}",
            usable.len()
        )));
    }

    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();

    report.order_p = slope;
    report.constant_c = intercept.exp();
    report.fit_residual = (rss / n).sqrt();
    report.verdict = if slope > SECOND_ORDER {
        Verdict::SecondOrder
    } else if slope > TANGENT_ORDER {
        Verdict::Tangent
    } else {
        Verdict::NotTangent
    };
    Ok(report)
}

/// A finite sample standing in for a (possibly infinite) subset.
#[derive(Debug, Clone)]
pub struct SampledSet<P> {
    pub points: Vec<P>,
    pub provenance: String,
    /// Largest distance from a member of the true set to the nearest sample,
    /// when known.
    pub resolution: Option<f64>,
}

impl<P> SampledSet<P> {
    pub fn new(points: Vec<P>, provenance: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(ArcError::InvalidInput("sampled set must be nonempty".into()));
        }
        Ok(SampledSet {
            points,
            provenance: provenance.into(),
            resolution: None,
        })
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `min_{q in S} d(p, q)`.
pub fn distance_to_set<S: MetricSpace>(space: &S, p: &S::Point, set: &SampledSet<S::Point>) -> f64 {
    par::min_of(set.points.len(), |i| space.distance(p, &set.points[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// A deliberately broken "metric" on the line: d(x, y) = x - y.
    struct SignedLine;

    impl MetricSpace for SignedLine {
        type Point = f64;
        fn name(&self) -> String {
            "signed-line".into()
        }
        fn distance(&self, p: &f64, q: &f64) -> f64 {
            p - q
        }
        fn magnitude(&self, p: &f64) -> f64 {
            p.abs()
        }
        fn sample(&self, seed: u64, region: &Region<f64>) -> Result<Vec<f64>> {
            use rand::Rng;
            let mut rng = seeded_rng(seed);
            Ok((0..region.count)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect())
        }
    }

    struct Line;

    impl MetricSpace for Line {
        type Point = f64;
        fn name(&self) -> String {
            "line".into()
        }
        fn distance(&self, p: &f64, q: &f64) -> f64 {
            (p - q).abs()
        }
        fn magnitude(&self, p: &f64) -> f64 {
            p.abs()
        }
        fn sample(&self, _seed: u64, _region: &Region<f64>) -> Result<Vec<f64>> {
            Err(ArcError::Sampler("no entropy".into()))
        }
    }

    #[test]
    fn signed_distance_fails_symmetry() {
        let report = verify_metric_axioms(&SignedLine, 1000, 3).unwrap();
        assert!(!report.pass);
        assert!(report.worst_symmetry > 0.1);
    }

    #[test]
    fn sampler_failure_is_reported() {
        let err = verify_metric_axioms(&Line, 10, 0).unwrap_err();
        assert!(matches!(err, ArcError::Sampler(_)));
        assert!(matches!(
            verify_metric_axioms(&Line, 0, 0),
            Err(ArcError::InvalidInput(_))
        ));
    }

    #[test]
    fn curve_gap_examples() {
        let grid = default_t_grid();
        let zeros = curve_gap(&Line, Ok, Ok, &grid).unwrap();
        assert!(zeros.iter().all(|g| *g == 0.0));
        let sq = curve_gap(&Line, Ok, |t| Ok(t + t * t), &grid).unwrap();
        for (t, g) in grid.iter().zip(&sq) {
            assert_abs_diff_eq!(*g, t * t, epsilon = 1e-18);
        }
    }

    #[test]
    fn curve_gap_validates_grid_and_escape() {
        assert!(curve_gap(&Line, Ok, Ok, &[0.1, 0.2]).is_err());
        assert!(curve_gap(&Line, Ok, Ok, &[0.1, 0.0]).is_err());
        let err = curve_gap(
            &Line,
            Ok,
            |t| {
                if t < 0.01 {
                    Err(ArcError::escaped("left the domain"))
                } else {
                    Ok(t)
                }
            },
            &default_t_grid(),
        )
        .unwrap_err();
        assert_eq!(err, ArcError::CurveEscaped { index: 3 });
    }

    #[test]
    fn exact_square_gaps_are_second_order() {
        let grid = default_t_grid();
        let gaps: Vec<f64> = grid.iter().map(|t| t * t).collect();
        let r = estimate_order(&grid, &gaps).unwrap();
        assert_abs_diff_eq!(r.order_p, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.constant_c, 1.0, epsilon = 1e-6);
        assert_eq!(r.verdict, Verdict::SecondOrder);
    }

    #[test]
    fn order_verdicts_and_errors() {
        let grid = default_t_grid();
        let zeros = vec![0.0; grid.len()];
        assert_eq!(estimate_order(&grid, &zeros).unwrap().verdict, Verdict::ExactZero);
        let lin: Vec<f64> = grid.iter().map(|t| 0.5 * t).collect();
        assert_eq!(estimate_order(&grid, &lin).unwrap().verdict, Verdict::NotTangent);
        let mid: Vec<f64> = grid.iter().map(|t| t.powf(1.5)).collect();
        assert_eq!(estimate_order(&grid, &mid).unwrap().verdict, Verdict::Tangent);

        // three usable gaps only
        let mut few = zeros.clone();
        few[0] = 1e-3;
        few[1] = 1e-4;
        few[2] = 1e-5;
        assert!(matches!(
            estimate_order(&grid, &few),
            Err(ArcError::InsufficientData(_))
        ));
        // one decade only
        assert!(matches!(
            estimate_order(&[0.1, 0.08, 0.05, 0.02], &[1.0; 4]),
            Err(ArcError::InsufficientData(_))
        ));
        assert!(estimate_order(&grid, &[1.0; 3]).is_err());
    }

    #[test]
    fn report_json_shape() {
        let grid = default_t_grid();
        let gaps: Vec<f64> = grid.iter().map(|t| t * t).collect();
        let json = serde_json::to_value(estimate_order(&grid, &gaps).unwrap()).unwrap();
        for key in ["t_grid", "gaps", "order_p", "constant_C", "fit_residual", "verdict"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["verdict"], "SECOND_ORDER");
    }

    #[test]
    fn distance_to_set_on_line() {
        let set = SampledSet::new(vec![0.0, 1.0, 2.5], "three points").unwrap();
        assert_eq!(distance_to_set(&Line, &1.0, &set), 0.0);
        assert_abs_diff_eq!(distance_to_set(&Line, &1.6, &set), 0.6, epsilon = 1e-15);
        assert!(SampledSet::<f64>::new(vec![], "empty").is_err());
    }
}
