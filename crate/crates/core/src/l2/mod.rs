//! Two-flow control of `L^2(R)`.
//!
//! `X` adds multiples of the Gaussian `h`, `Y` translates. Iterated brackets
//! `[X,n,Y]` are tangent to `f + t h^[n]`, so following
//! `sum_n c_n [X,n,Y]` for unit time from `0` approximates
//! `sum_n c_n h^[n]`, which in turn approximates any target whose Hermite
//! coefficients are `c_n`.

pub mod control;
pub mod fields;
pub mod hermite;

pub use control::{
    bracket_table_check, bracket_table_check_with, build_control_field, reach, BracketRelation, BracketTable, MAX_ORDER, ReachReport, ReachSpec,
    ReachTrace,
};
pub use fields::{l2_add, l2_v, l2_w, l2_x, l2_y, L2_SPACE};
pub use hermite::{
    coefficients_chi01, coefficients_general, direct_sum_oracle, gaussian_derivative,
    gaussian_derivative_grid, hermite_all, hermite_eval, hermite_norm_squared, hermite_orthogonality,
    CoefficientVector,
};
