//! Arc fields as composable values.
//!
//! An [`ArcField`] is an immutable composition tree. Leaves are closed-form
//! maps `(x, t) -> x'`; interior nodes are sums, scalar multiples, brackets,
//! Euler curves and conjugations by flow maps. Evaluation walks the tree, so
//! the cost of a depth-`n` iterated bracket is `4^n` leaf evaluations, which
//! [`ArcField::leaf_cost`] reports without evaluating anything.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};

/// Space id of the constant arc field, compatible with every space.
pub const ANY_SPACE: &str = "*";

type EvalFn<P> = dyn Fn(&P, f64) -> Result<P> + Send + Sync;
type ScalarFn<P> = dyn Fn(&P) -> f64 + Send + Sync;

/// Constants a fixture claims to satisfy; diagnostics compare against them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimedConstants {
    /// Growth constant of condition E1.
    pub lambda: f64,
    /// Semigroup-defect constant of condition E2.
    pub omega: f64,
    /// Speed bound.
    pub rho: f64,
}

/// Real-valued function on the space, used as a time multiplier.
pub struct ScalarField<P> {
    name: String,
    eval: Arc<ScalarFn<P>>,
    /// Claimed Lipschitz constant; metadata only, never relied upon.
    pub lipschitz_bound: Option<f64>,
    constant: Option<f64>,
}

impl<P> Clone for ScalarField<P> {
    fn clone(&self) -> Self {
        ScalarField {
            name: self.name.clone(),
            eval: self.eval.clone(),
            lipschitz_bound: self.lipschitz_bound,
            constant: self.constant,
        }
    }
}

impl<P> ScalarField<P> {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&P) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            eval: Arc::new(f),
            lipschitz_bound: None,
            constant: None,
        }
    }

    pub fn constant(value: f64) -> Self
    where
        P: 'static,
    {
        ScalarField {
            name: format_number(value),
            eval: Arc::new(move |_| value),
            lipschitz_bound: Some(0.0),
            constant: Some(value),
        }
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz_bound = Some(bound);
        self
    }

    pub fn eval(&self, x: &P) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    /// Pointwise product `(a·b)(x) = a(x) b(x)`.
    pub fn product(&self, other: &ScalarField<P>) -> ScalarField<P>
    where
        P: 'static,
    {
        if let (Some(a), Some(b)) = (self.constant, other.constant) {
            return ScalarField::constant(a * b);
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = ScalarField::new(format!("({}*{})", self.name, other.name), move |x| {
            a(x) * b(x)
        });
        // K_ab <= K_a sup|b| + K_b sup|a| needs sup bounds we do not track
        out.lipschitz_bound = None;
        out
    }

    /// Largest observed `|a(x) - a(y)| / d(x, y)` over the given pairs.
    pub fn sampled_lipschitz<D>(&self, pairs: &[(P, P)], distance: D) -> f64
    where
        D: Fn(&P, &P) -> f64,
    {
        pairs
            .iter()
            .filter_map(|(x, y)| {
                let d = distance(x, y);
                (d > 0.0).then(|| (self.eval(x) - self.eval(y)).abs() / d)
            })
            .fold(0.0, f64::max)
    }
}

impl<P> fmt::Debug for ScalarField<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .finish()
    }
}

enum Kind<P> {
    Primitive(Arc<EvalFn<P>>),
    Zero,
    Sum(ArcField<P>, ArcField<P>),
    Scale(ScalarField<P>, ArcField<P>),
    Bracket(ArcField<P>, ArcField<P>),
    Euler { field: ArcField<P>, steps: usize },
    /// `outer(field(inner(x), t))` where `inner = map(., s)` and
    /// `outer = map(., -s)`.
    Conjugate {
        map: ArcField<P>,
        s: f64,
        field: ArcField<P>,
    },
}

struct Node<P> {
    name: String,
    space: String,
    exact_flow: bool,
    constants: Option<ClaimedConstants>,
    kind: Kind<P>,
}

/// A map `(x, t) -> X_t(x)` with `X_0 = id`, evaluated for `t` in `[-1, 1]`.
pub struct ArcField<P> {
    node: Arc<Node<P>>,
}

impl<P> Clone for ArcField<P> {
    fn clone(&self) -> Self {
        ArcField {
            node: self.node.clone(),
        }
    }
}

impl<P> fmt::Debug for ArcField<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArcField")
            .field("name", &self.node.name)
            .field("space", &self.node.space)
            .field("exact_flow", &self.node.exact_flow)
            .finish()
    }
}

fn format_number(v: f64) -> String {
    format!("{v}")
}

fn check_space<P>(a: &ArcField<P>, b: &ArcField<P>) -> Result<String> {
    let (l, r) = (a.node.space.as_str(), b.node.space.as_str());
    if l == r || r == ANY_SPACE {
        Ok(l.to_string())
    } else if l == ANY_SPACE {
        Ok(r.to_string())
    } else {
        Err(ArcError::SpaceMismatch {
            left: l.to_string(),
            right: r.to_string(),
        })
    }
}

impl<P: Clone + Send + Sync + 'static> ArcField<P> {
    fn from_kind(name: String, space: String, exact_flow: bool, kind: Kind<P>) -> Self {
        ArcField {
            node: Arc::new(Node {
                name,
                space,
                exact_flow,
                constants: None,
                kind,
            }),
        }
    }

    /// A leaf arc field from a closed-form map. The map is only ever called
    /// with `t` in `[-1, 1]`, `t != 0`.
    pub fn primitive<F>(name: impl Into<String>, space: impl Into<String>, f: F) -> Self
    where
        F: Fn(&P, f64) -> Result<P> + Send + Sync + 'static,
    {
        Self::from_kind(name.into(), space.into(), false, Kind::Primitive(Arc::new(f)))
    }

    /// The constant arc field `0(x, t) = x`.
    pub fn zero() -> Self {
        Self::from_kind("0".into(), ANY_SPACE.into(), true, Kind::Zero)
    }

    /// Declares that this field satisfies the group law exactly, i.e. it is
    /// its own flow.
    pub fn exact_flow(self) -> Self {
        self.map_node(|n| n.exact_flow = true)
    }

    pub fn with_constants(self, constants: ClaimedConstants) -> Self {
        self.map_node(|n| n.constants = Some(constants))
    }

    pub fn renamed(self, name: impl Into<String>) -> Self {
        let name = name.into();
        self.map_node(|n| n.name = name)
    }

    fn map_node(self, edit: impl FnOnce(&mut Node<P>)) -> Self {
        let node = match Arc::try_unwrap(self.node) {
            Ok(node) => node,
            Err(shared) => Node {
                name: shared.name.clone(),
                space: shared.space.clone(),
                exact_flow: shared.exact_flow,
                constants: shared.constants,
                kind: shared.kind.shallow_clone(),
            },
        };
        let mut node = node;
        edit(&mut node);
        ArcField {
            node: Arc::new(node),
        }
    }

    pub fn name(&self) -> &str {
        &self.node.name
    }

    pub fn space(&self) -> &str {
        &self.node.space
    }

    pub fn is_exact_flow(&self) -> bool {
        self.node.exact_flow
    }

    pub fn claimed_constants(&self) -> Option<ClaimedConstants> {
        self.node.constants
    }

    /// `X(x, clamp(t))`; `t` outside `[-1, 1]` is clamped and `t = 0` returns
    /// `x` unchanged.
    pub fn eval(&self, x: &P, t: f64) -> Result<P> {
        if t.is_nan() {
            return Err(ArcError::InvalidInput("time is NaN".into()));
        }
        let t = t.clamp(-1.0, 1.0);
        if t == 0.0 {
            return Ok(x.clone());
        }
        match &self.node.kind {
            Kind::Primitive(f) => f(x, t),
            Kind::Zero => Ok(x.clone()),
            Kind::Sum(a, b) => b.eval(&a.eval(x, t)?, t),
            Kind::Scale(a, field) => {
                let factor = a.eval(x);
                if factor == 0.0 {
                    Ok(x.clone())
                } else {
                    field.eval(x, factor * t)
                }
            }
            Kind::Bracket(a, b) => {
                let s = t.abs().sqrt();
                if t > 0.0 {
                    let p = a.eval(x, s)?;
                    let p = b.eval(&p, s)?;
                    let p = a.eval(&p, -s)?;
                    b.eval(&p, -s)
                } else {
                    let p = b.eval(x, s)?;
                    let p = a.eval(&p, s)?;
                    let p = b.eval(&p, -s)?;
                    a.eval(&p, -s)
                }
            }
            Kind::Euler { field, steps } => euler_steps(field, x, t, *steps),
            Kind::Conjugate { map, s, field } => {
                let p = map.eval(x, *s)?;
                let p = field.eval(&p, t)?;
                map.eval(&p, -*s)
            }
        }
    }

    /// Number of leaf evaluations one call of [`eval`](Self::eval) performs
    /// (at `t != 0`, without short-circuits).
    pub fn leaf_cost(&self) -> u64 {
        match &self.node.kind {
            Kind::Primitive(_) => 1,
            Kind::Zero => 0,
            Kind::Sum(a, b) => a.leaf_cost() + b.leaf_cost(),
            Kind::Scale(_, f) => f.leaf_cost(),
            Kind::Bracket(a, b) => 2 * (a.leaf_cost() + b.leaf_cost()),
            Kind::Euler { field, steps } => *steps as u64 * field.leaf_cost(),
            Kind::Conjugate { map, field, .. } => 2 * map.leaf_cost() + field.leaf_cost(),
        }
    }

    /// The field whose arcs are `n`-step Euler curves of `self`.
    pub fn euler_flow(&self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(ArcError::InvalidInput("Euler step count must be >= 1".into()));
        }
        Ok(Self::from_kind(
            format!("euler({},{steps})", self.name()),
            self.space().to_string(),
            self.is_exact_flow(),
            Kind::Euler {
                field: self.clone(),
                steps,
            },
        ))
    }

    /// `map_{-s} ∘ field_t ∘ map_s`.
    pub(crate) fn conjugate(map: &Self, s: f64, field: &Self, name: String) -> Result<Self> {
        let space = check_space(map, field)?;
        Ok(Self::from_kind(
            name,
            space,
            false,
            Kind::Conjugate {
                map: map.clone(),
                s,
                field: field.clone(),
            },
        ))
    }
}

impl<P> Kind<P> {
    fn shallow_clone(&self) -> Self {
        match self {
            Kind::Primitive(f) => Kind::Primitive(f.clone()),
            Kind::Zero => Kind::Zero,
            Kind::Sum(a, b) => Kind::Sum(a.clone(), b.clone()),
            Kind::Scale(a, f) => Kind::Scale(a.clone(), f.clone()),
            Kind::Bracket(a, b) => Kind::Bracket(a.clone(), b.clone()),
            Kind::Euler { field, steps } => Kind::Euler {
                field: field.clone(),
                steps: *steps,
            },
            Kind::Conjugate { map, s, field } => Kind::Conjugate {
                map: map.clone(),
                s: *s,
                field: field.clone(),
            },
        }
    }
}

/// `n`-fold composition of `field` with step `t / n`, starting at `x`. On
/// escape the error records how many steps completed.
pub(crate) fn euler_steps<P>(field: &ArcField<P>, x: &P, t: f64, n: usize) -> Result<P>
where
    P: Clone + Send + Sync + 'static,
{
    let h = t / n as f64;
    let mut p = x.clone();
    for k in 0..n {
        p = field.eval(&p, h).map_err(|e| match e {
            ArcError::PointEscaped { detail, .. } => ArcError::PointEscaped {
                steps_completed: k,
                detail,
            },
            other => other,
        })?;
    }
    Ok(p)
}

/// `X(x, clamp(t))`.
pub fn evaluate<P>(field: &ArcField<P>, x: &P, t: f64) -> Result<P>
where
    P: Clone + Send + Sync + 'static,
{
    field.eval(x, t)
}

/// `(X + Y)_t(x) = Y_t(X_t(x))`.
pub fn sum<P>(x: &ArcField<P>, y: &ArcField<P>) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    let space = check_space(x, y)?;
    Ok(ArcField::from_kind(
        format!("sum({},{})", x.name(), y.name()),
        space,
        false,
        Kind::Sum(x.clone(), y.clone()),
    ))
}

/// `(aX)_t(x) = X(x, clamp(a(x) t))`, the constant arc where `a(x) = 0`.
pub fn scale<P>(a: &ScalarField<P>, x: &ArcField<P>) -> ArcField<P>
where
    P: Clone + Send + Sync + 'static,
{
    // a constant multiple of a flow is again a flow
    let exact = x.is_exact_flow() && a.as_constant().is_some();
    ArcField::from_kind(
        format!("scale({},{})", a.name(), x.name()),
        x.space().to_string(),
        exact,
        Kind::Scale(a.clone(), x.clone()),
    )
}

/// Shorthand for `scale(constant(c), x)`.
pub fn scale_const<P>(c: f64, x: &ArcField<P>) -> ArcField<P>
where
    P: Clone + Send + Sync + 'static,
{
    scale(&ScalarField::constant(c), x)
}

/// `X - Y := X + (-1)Y`.
pub fn difference<P>(x: &ArcField<P>, y: &ArcField<P>) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    sum(x, &scale_const(-1.0, y))
}

/// Left-to-right composition `a_1 X_1 + a_2 X_2 + ...`: the first term is
/// applied first. An empty list gives the constant arc field.
pub fn linear_combination<P>(terms: &[(ScalarField<P>, ArcField<P>)]) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    let mut iter = terms.iter();
    let Some((a, x)) = iter.next() else {
        return Ok(ArcField::zero());
    };
    let mut acc = if a.as_constant() == Some(1.0) {
        x.clone()
    } else {
        scale(a, x)
    };
    for (a, x) in iter {
        acc = sum(&acc, &scale(a, x))?;
    }
    Ok(acc)
}

/// The asymptotic bracket: `Y_{-√t} X_{-√t} Y_{√t} X_{√t}(x)` for `t >= 0`
/// and `X_{-√|t|} Y_{-√|t|} X_{√|t|} Y_{√|t|}(x)` for `t < 0`.
pub fn bracket<P>(x: &ArcField<P>, y: &ArcField<P>) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    let space = check_space(x, y)?;
    Ok(ArcField::from_kind(
        format!("bracket({},{})", x.name(), y.name()),
        space,
        false,
        Kind::Bracket(x.clone(), y.clone()),
    ))
}

/// `[X,0,Y] = X`, `[X,n,Y] = [[X,n-1,Y],Y]`.
pub fn iterated_bracket<P>(x: &ArcField<P>, y: &ArcField<P>, n: usize) -> Result<ArcField<P>>
where
    P: Clone + Send + Sync + 'static,
{
    check_space(x, y)?;
    let mut acc = x.clone();
    for _ in 0..n {
        acc = bracket(&acc, y)?;
    }
    Ok(acc)
}
