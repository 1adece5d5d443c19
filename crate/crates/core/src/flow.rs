//! Euler-curve integration, flows, pull-backs and push-forwards.

use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, euler_steps, scale_const, sum, ArcField};
use crate::error::{ArcError, Result};
use crate::metric::MetricSpace;

/// Starting resolution of [`solve`].
pub const SOLVE_START_STEPS: usize = 16;
/// Default cap on the number of Euler steps in [`solve`].
pub const DEFAULT_N_MAX: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    /// The generator's arcs are the flow itself.
    ClosedForm,
    /// The flow is approximated by this many Euler steps.
    Euler(usize),
}

/// A flow `F_t` with `F_t^{-1} = F_{-t}`.
#[derive(Debug, Clone)]
pub struct Flow<P> {
    generator: ArcField<P>,
    exactness: Exactness,
    arcs: ArcField<P>,
}

impl<P: Clone + Send + Sync + 'static> Flow<P> {
    /// Wraps a field whose evaluation is already the flow (translations,
    /// dilations in closed form, the elementary L² flows).
    pub fn closed_form(generator: ArcField<P>) -> Self {
        let arcs = generator.clone().exact_flow();
        Flow {
            generator,
            exactness: Exactness::ClosedForm,
            arcs,
        }
    }

    /// Approximates the flow of `generator` by `steps` Euler steps.
    pub fn euler(generator: ArcField<P>, steps: usize) -> Result<Self> {
        let arcs = generator.euler_flow(steps)?;
        Ok(Flow {
            generator,
            exactness: Exactness::Euler(steps),
            arcs,
        })
    }

    pub fn renamed(self, name: impl Into<String>) -> Self {
        let name = name.into();
        Flow {
            generator: self.generator.renamed(name.clone()),
            exactness: self.exactness,
            arcs: self.arcs.renamed(name),
        }
    }

    pub fn generator(&self) -> &ArcField<P> {
        &self.generator
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    /// `F_t(x)`.
    pub fn map(&self, x: &P, t: f64) -> Result<P> {
        self.arcs.eval(x, t)
    }

    /// `F_t^{-1}(x) = F_{-t}(x)`.
    pub fn inverse(&self, x: &P, t: f64) -> Result<P> {
        self.arcs.eval(x, -t)
    }

    /// The flow viewed as an arc field.
    pub fn as_arc_field(&self) -> &ArcField<P> {
        &self.arcs
    }
}

/// `X_{t/n}^{(n)}(x)`: `n`-fold self-composition of `X` with step `t / n`.
pub fn euler_curve<P>(field: &ArcField<P>, x: &P, t: f64, n: usize) -> Result<P>
where
    P: Clone + Send + Sync + 'static,
{
    if n == 0 {
        return Err(ArcError::InvalidInput("Euler step count must be >= 1".into()));
    }
    euler_steps(field, x, t, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub n_max: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-4,
            n_max: DEFAULT_N_MAX,
        }
    }
}

/// Endpoint of a Euler-flow solve.
#[derive(Debug, Clone)]
pub struct SolveResult<P> {
    /// Endpoint of the finest Euler curve computed (`2 * steps_used` steps),
    /// or the last point reached before an escape.
    pub endpoint: P,
    /// Accepted resolution `n`: the estimate compares `n` and `2n` steps.
    pub steps_used: usize,
    /// `d(E_n, E_2n)`.
    pub error_estimate: f64,
    pub escaped: bool,
    /// Magnitude of the time at which the curve left the space.
    pub escape_time: Option<f64>,
    /// `(n, d(E_n, E_2n))` for every level visited.
    pub trace: Vec<(usize, f64)>,
}

/// Serializable summary of a [`SolveResult`]; the endpoint itself is
/// written elsewhere and referenced by `endpoint_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub endpoint_ref: String,
    pub steps_used: usize,
    pub error_estimate: f64,
    pub escaped: bool,
    pub escape_time: Option<f64>,
}

impl<P> SolveResult<P> {
    pub fn summary(&self, endpoint_ref: impl Into<String>) -> SolveSummary {
        SolveSummary {
            endpoint_ref: endpoint_ref.into(),
            steps_used: self.steps_used,
            error_estimate: self.error_estimate,
            escaped: self.escaped,
            escape_time: self.escape_time,
        }
    }
}

enum Walk<P> {
    Done(P),
    Escaped { last: P, step: usize },
}

fn walk<P>(field: &ArcField<P>, x: &P, t: f64, n: usize) -> Result<Walk<P>>
where
    P: Clone + Send + Sync + 'static,
{
    let h = t / n as f64;
    let mut p = x.clone();
    for k in 0..n {
        match field.eval(&p, h) {
            Ok(next) => p = next,
            Err(ArcError::PointEscaped { .. }) => return Ok(Walk::Escaped { last: p, step: k }),
            Err(e) => return Err(e),
        }
    }
    Ok(Walk::Done(p))
}

/// Integrates `X` from `x` for time `t`, doubling the Euler resolution from
/// 16 until `d(E_n, E_2n) <= tol`.
pub fn solve<S>(
    space: &S,
    field: &ArcField<S::Point>,
    x: &S::Point,
    t: f64,
    opts: SolveOptions,
) -> Result<SolveResult<S::Point>>
where
    S: MetricSpace,
    S::Point: 'static,
{
    if !(opts.tol > 0.0) {
        return Err(ArcError::InvalidInput("tol must be positive".into()));
    }
    if opts.n_max < 2 * SOLVE_START_STEPS {
        return Err(ArcError::InvalidInput(format!(
            "n_max must be at least {}",
            2 * SOLVE_START_STEPS
        )));
    }
    let escaped = |last: S::Point, step: usize, n: usize, trace: Vec<(usize, f64)>| {
        let estimate = trace.last().map_or(0.0, |e| e.1);
        SolveResult {
            endpoint: last,
            steps_used: n,
            error_estimate: estimate,
            escaped: true,
            escape_time: Some(t.abs() * (step as f64 + 0.5) / n as f64),
            trace,
        }
    };

    let mut trace = Vec::new();
    let mut n = SOLVE_START_STEPS;
    let mut coarse = match walk(field, x, t, n)? {
        Walk::Done(p) => p,
        Walk::Escaped { last, step } => return Ok(escaped(last, step, n, trace)),
    };
    loop {
        let fine = match walk(field, x, t, 2 * n)? {
            Walk::Done(p) => p,
            Walk::Escaped { last, step } => return Ok(escaped(last, step, 2 * n, trace)),
        };
        let estimate = space.distance(&coarse, &fine);
        trace.push((n, estimate));
        if estimate <= opts.tol {
            return Ok(SolveResult {
                endpoint: fine,
                steps_used: n,
                error_estimate: estimate,
                escaped: false,
                escape_time: None,
                trace,
            });
        }
        n *= 2;
        if 2 * n > opts.n_max {
            return Err(ArcError::NoConvergence {
                n_max: opts.n_max,
                last_estimate: estimate,
            });
        }
        coarse = fine;
    }
}

/// `(F_s)^* X`: evaluates `F_{-s}(X_t(F_s(x)))`.
pub fn pull_back<P>(flow: &Flow<P>, s: f64, field: &ArcField<P>) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    ArcField::conjugate(
        flow.as_arc_field(),
        s,
        field,
        format!("pullback({},{s},{})", flow.as_arc_field().name(), field.name()),
    )
}

/// `(F_s)_* X`: evaluates `F_s(X_t(F_{-s}(x)))`.
pub fn push_forward<P>(flow: &Flow<P>, s: f64, field: &ArcField<P>) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    ArcField::conjugate(
        flow.as_arc_field(),
        -s,
        field,
        format!("pushforward({},{s},{})", flow.as_arc_field().name(), field.name()),
    )
}

/// Distance between the two sides of the bracket/pull-back identity
/// `F_t^* G_t(x) = (t[F,G] + G)_t(x)` (for `t >= 0`) and
/// `F_s^* G_s(x) = (-s[-F,-G] - G)_{-s}(x)` (for `s < 0`).
pub fn lie_identity_gap<S>(
    space: &S,
    f: &Flow<S::Point>,
    g: &Flow<S::Point>,
    x: &S::Point,
    t: f64,
) -> Result<f64>
where
    S: MetricSpace,
    S::Point: 'static,
{
    let (fa, ga) = (f.as_arc_field(), g.as_arc_field());
    let lhs = pull_back(f, t, ga)?.eval(x, t)?;
    let rhs = if t >= 0.0 {
        sum(&scale_const(t, &bracket(fa, ga)?), ga)?.eval(x, t)?
    } else {
        let neg_f = scale_const(-1.0, fa);
        let neg_g = scale_const(-1.0, ga);
        sum(&scale_const(-t, &bracket(&neg_f, &neg_g)?), &neg_g)?.eval(x, -t)?
    };
    Ok(space.distance(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::euclidean::{dilation_flow, make_dilation, make_translation, point, Euclidean};
    use crate::spaces::grid::{GridFunction, GridSpec, L2Grid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn euler_curve_of_dilation() {
        let dil = make_dilation(&point(&[0.0]));
        let x = point(&[1.0]);
        assert_abs_diff_eq!(euler_curve(&dil, &x, 1.0, 10).unwrap()[0], 1.1f64.powi(10), epsilon = 1e-13);
        assert!(euler_curve(&dil, &x, 1.0, 0).is_err());
    }

    #[test]
    fn solve_reaches_e() {
        let sp = Euclidean::new(1);
        let r = solve(&sp, &make_dilation(&point(&[0.0])), &point(&[1.0]), 1.0, SolveOptions::default()).unwrap();
        assert!(!r.escaped);
        assert!(r.error_estimate <= 1e-4);
        assert!((r.endpoint[0] - std::f64::consts::E).abs() <= 1e-4);
        assert_eq!(r.trace.last().unwrap().0, r.steps_used);
    }

    #[test]
    fn solve_reports_no_convergence() {
        let sp = Euclidean::new(1);
        let opts = SolveOptions { tol: 1e-12, n_max: 64 };
        assert!(matches!(
            solve(&sp, &make_dilation(&point(&[0.0])), &point(&[1.0]), 1.0, opts),
            Err(ArcError::NoConvergence { n_max: 64, .. })
        ));
    }

    #[test]
    fn solve_flags_escape() {
        let grid = GridSpec::new(2.0, 1.0 / 16.0).unwrap();
        let sp = L2Grid::new(grid);
        let y = crate::l2::l2_y();
        let r = solve(&sp, &y, &GridFunction::gaussian(grid), 1.0, SolveOptions::default()).unwrap();
        assert!(r.escaped);
        let at = r.escape_time.unwrap();
        assert!(at > 0.0 && at < 1.0, "{at}");
    }

    #[test]
    fn pull_back_and_push_forward_values() {
        let f = dilation_flow(&point(&[0.0, 0.0]));
        let u = point(&[1.0, 2.0]);
        let x = point(&[0.5, -1.0]);
        let (s, t) = (0.3, 0.2);
        let tr = make_translation(&u);
        let pb = pull_back(&f, s, &tr).unwrap().eval(&x, t).unwrap();
        let pf = push_forward(&f, s, &tr).unwrap().eval(&x, t).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(pb[i], x[i] + t * (-s).exp() * u[i], epsilon = 1e-14);
            assert_abs_diff_eq!(pf[i], x[i] + t * s.exp() * u[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn pull_back_of_own_flow_is_itself() {
        let dil = make_dilation(&point(&[0.0, 0.0]));
        let flow = Flow::closed_form(ArcField::primitive("exp", "r2", |x: &crate::spaces::EuclideanPoint, t| {
            Ok(x * t.exp())
        }));
        let x = point(&[1.0, 1.0]);
        let pb = pull_back(&flow, 0.7, &dil).unwrap();
        for t in [0.1, -0.4] {
            let (a, b) = (pb.eval(&x, t).unwrap(), dil.eval(&x, t).unwrap());
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn lie_identity_for_dilations() {
        let sp = Euclidean::new(2);
        let (f, g) = (dilation_flow(&point(&[0.0, 0.0])), dilation_flow(&point(&[1.0, 0.0])));
        let x = point(&[1.0, 1.0]);
        for t in [0.25, -0.25] {
            assert!(lie_identity_gap(&sp, &f, &g, &x, t).unwrap() <= 1e-10 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn euler_flow_tracks_the_exact_flow() {
        let f = Flow::euler(make_dilation(&point(&[0.0])), 4096).unwrap();
        assert_eq!(f.exactness(), Exactness::Euler(4096));
        let y = f.map(&point(&[1.0]), 0.5).unwrap();
        assert!((y[0] - 0.5f64.exp()).abs() < 1e-3);
        let back = f.inverse(&y, 0.5).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-3);
    }
}
