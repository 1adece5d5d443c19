//! Standard test fields on `R^n` used across the diagnostics.

use crate::algebra::{ArcField, ClaimedConstants};
use crate::flow::Flow;

use super::euclidean::{point, vector_field_arc, EuclideanPoint};

/// Curvature of the paraboloid chart used by [`curved_dilation_flow`] and
/// [`curved_translation_flow`].
pub const CHART_CURVATURE: f64 = 0.5;

/// `X(x, t) = x + t J x` with `J` the quarter turn.
pub fn rotation_field() -> ArcField<EuclideanPoint> {
    vector_field_arc("rot", 2, |x| point(&[-x[1], x[0]])).with_constants(ClaimedConstants {
        lambda: 1.0,
        omega: 1.0,
        rho: f64::INFINITY,
    })
}

/// `X(x, t) = x + t sin(x)` componentwise.
pub fn sin_field(dim: usize) -> ArcField<EuclideanPoint> {
    vector_field_arc("sin", dim, |x| x.map(f64::sin)).with_constants(ClaimedConstants {
        lambda: 1.0,
        omega: 1.0,
        rho: 1.0,
    })
}

/// `X(x, t) = x + t cos(x)` componentwise.
pub fn cos_field(dim: usize) -> ArcField<EuclideanPoint> {
    vector_field_arc("cos", dim, |x| x.map(f64::cos)).with_constants(ClaimedConstants {
        lambda: 1.0,
        omega: 1.0,
        rho: 1.0,
    })
}

/// First Heisenberg generator on `R^3`: translation along `e1`.
pub fn heisenberg_x() -> Flow<EuclideanPoint> {
    super::euclidean::translation_flow(&point(&[1.0, 0.0, 0.0])).renamed("heisX")
}

/// Second Heisenberg generator, `x + t (e2 + x1 e3)`. Since `x1` is constant
/// along its arcs this is also its own flow.
pub fn heisenberg_y() -> Flow<EuclideanPoint> {
    Flow::closed_form(vector_field_arc("heisY", 3, |x| point(&[0.0, 1.0, x[0]])))
}

fn chart(w: [f64; 3]) -> EuclideanPoint {
    point(&[w[0], w[1], w[2] + CHART_CURVATURE * (w[0] * w[0] + w[1] * w[1])])
}

fn chart_inverse(z: &EuclideanPoint) -> [f64; 3] {
    [z[0], z[1], z[2] - CHART_CURVATURE * (z[0] * z[0] + z[1] * z[1])]
}

/// `phi(1, 0, 0)`, a base point on the curved leaf through the chart.
pub fn curved_base_point() -> EuclideanPoint {
    chart([1.0, 0.0, 0.0])
}

/// Dilation about the origin, conjugated by the paraboloid chart
/// `phi(w) = (w1, w2, w3 + k (w1^2 + w2^2))`.
pub fn curved_dilation_flow() -> Flow<EuclideanPoint> {
    Flow::closed_form(ArcField::primitive("cdil", "r3", |z: &EuclideanPoint, t| {
        crate::spaces::euclidean::check_dim(z, 3)?;
        let w = chart_inverse(z);
        let e = t.exp();
        Ok(chart([e * w[0], e * w[1], e * w[2]]))
    }))
}

/// Translation along `e2`, conjugated by the same chart.
pub fn curved_translation_flow() -> Flow<EuclideanPoint> {
    Flow::closed_form(ArcField::primitive("ctrans", "r3", |z: &EuclideanPoint, t| {
        crate::spaces::euclidean::check_dim(z, 3)?;
        let w = chart_inverse(z);
        Ok(chart([w[0], w[1] + t, w[2]]))
    }))
}

/// Straight-line arcs of the generator of [`curved_dilation_flow`].
pub fn curved_dilation_field() -> ArcField<EuclideanPoint> {
    vector_field_arc("cdilv", 3, |z| {
        point(&[z[0], z[1], z[2] + CHART_CURVATURE * (z[0] * z[0] + z[1] * z[1])])
    })
}

/// Straight-line arcs of the generator of [`curved_translation_flow`].
pub fn curved_translation_field() -> ArcField<EuclideanPoint> {
    vector_field_arc("ctransv", 3, |z| point(&[0.0, 1.0, 2.0 * CHART_CURVATURE * z[1]]))
}
