//! The four elementary flows on grid functions.

use crate::algebra::{ArcField, ClaimedConstants};
use crate::error::Result;
use crate::spaces::grid::{grid_axpy, grid_dilate_arg, grid_norm, grid_scale, grid_shift, GridFunction};

/// Space identifier shared by every grid field.
pub const L2_SPACE: &str = "l2";

/// `X_t(f) = f + t h`.
pub fn l2_x(h: &GridFunction) -> ArcField<GridFunction> {
    let h = h.clone();
    let speed = grid_norm(&h);
    ArcField::primitive("X", L2_SPACE, move |f: &GridFunction, t| grid_axpy(t, &h, f))
        .exact_flow()
        .with_constants(ClaimedConstants {
            lambda: 0.0,
            omega: 0.0,
            rho: speed,
        })
}

/// `Y_t(f)(x) = f(x + t)`.
pub fn l2_y() -> ArcField<GridFunction> {
    ArcField::primitive("Y", L2_SPACE, |f: &GridFunction, t| grid_shift(f, t)).exact_flow()
}

/// `V_t(f) = e^t f`.
pub fn l2_v() -> ArcField<GridFunction> {
    ArcField::primitive("V", L2_SPACE, |f: &GridFunction, t| Ok(grid_scale(t.exp(), f)))
        .exact_flow()
        .with_constants(ClaimedConstants {
            lambda: std::f64::consts::E - 1.0,
            omega: 0.0,
            rho: f64::INFINITY,
        })
}

/// `W_t(f)(x) = f(e^t x)`.
pub fn l2_w() -> ArcField<GridFunction> {
    ArcField::primitive("W", L2_SPACE, |f: &GridFunction, t| grid_dilate_arg(f, t)).exact_flow()
}

/// `f + t g` as an arc field; the candidate arcs of the bracket table.
pub fn l2_add(name: impl Into<String>, g: &GridFunction) -> ArcField<GridFunction> {
    let g = g.clone();
    ArcField::primitive(name, L2_SPACE, move |f: &GridFunction, t| -> Result<GridFunction> {
        grid_axpy(t, &g, f)
    })
    .exact_flow()
}
