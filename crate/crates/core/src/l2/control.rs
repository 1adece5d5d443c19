//! Steering the zero function towards a target with the control field
//! `sum_n c_n [X,n,Y]`, and the bracket relations between `X, Y, V, W`.

use serde::{Deserialize, Serialize};

use crate::algebra::{iterated_bracket, linear_combination, ArcField, ScalarField};
use crate::diagnostics::field_tangency_with_floor;
use crate::error::{ArcError, Result};
use crate::flow::euler_curve;
use crate::metric::{default_t_grid, zero_floor, MetricSpace, TangencyReport, Verdict};
use crate::par;
use crate::spaces::grid::{grid_shift, interpolation_floor, GridFunction, GridSpec, L2Grid};

use super::fields::{l2_add, l2_v, l2_w, l2_x, l2_y};
use super::hermite::{
    coefficients_chi01, coefficients_general, direct_sum_oracle, gaussian_derivative,
    CoefficientVector,
};

/// Largest bracket depth [`reach`] accepts.
pub const MAX_ORDER: usize = 10;

/// `sum_n c_n [X,n,Y]`, composed with `n = 0` innermost.
pub fn build_control_field(
    x: &ArcField<GridFunction>,
    y: &ArcField<GridFunction>,
    c: &CoefficientVector,
) -> Result<ArcField<GridFunction>> {
    let terms = c
        .values
        .iter()
        .enumerate()
        .map(|(n, &cn)| Ok((ScalarField::constant(cn), iterated_bracket(x, y, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_combination(&terms)?.renamed(format!("control[N={}]", c.order())))
}

/// What to reach and how finely.
#[derive(Debug, Clone)]
pub struct ReachSpec {
    pub target: GridFunction,
    pub target_name: String,
    pub order: usize,
    /// Euler step counts to run, ascending.
    pub steps: Vec<usize>,
    /// Coefficients to use; computed from the target when absent.
    pub coefficients: Option<CoefficientVector>,
}

impl ReachSpec {
    /// The indicator of `[0, 1]` with its closed-form coefficients.
    pub fn chi01(spec: GridSpec, order: usize, steps: Vec<usize>) -> Self {
        ReachSpec {
            target: GridFunction::indicator(spec, 0.0, 1.0),
            target_name: "chi01".into(),
            order,
            steps,
            coefficients: Some(coefficients_chi01(order)),
        }
    }

    /// A sampled target; coefficients by quadrature.
    pub fn general(target: GridFunction, name: impl Into<String>, order: usize, steps: Vec<usize>) -> Self {
        ReachSpec {
            target,
            target_name: name.into(),
            order,
            steps,
            coefficients: None,
        }
    }
}

/// Per-resolution record of a [`reach`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachTrace {
    #[serde(rename = "N")]
    pub order: usize,
    pub n_values: Vec<usize>,
    pub gap_oracle: Vec<f64>,
    pub gap_target: Vec<f64>,
    /// Leaf-map applications per Euler curve.
    pub cost_evals: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ReachReport {
    /// Euler endpoint at the largest step count.
    pub output: GridFunction,
    pub oracle: GridFunction,
    pub target: GridFunction,
    pub coefficients: CoefficientVector,
    pub trace: ReachTrace,
    /// `||oracle - target||`, the truncation error of the expansion itself.
    pub oracle_target_gap: f64,
}

/// Follows the control field for unit time from the zero function with
/// each requested number of Euler steps.
pub fn reach(spec: &ReachSpec) -> Result<ReachReport> {
    if spec.order > MAX_ORDER {
        return Err(ArcError::InvalidInput(format!(
            "order {} exceeds the maximum {MAX_ORDER}",
            spec.order
        )));
    }
    if spec.steps.is_empty() || spec.steps.contains(&0) {
        return Err(ArcError::InvalidInput("step counts must be >= 1".into()));
    }
    let grid = *spec.target.spec();
    let coefficients = match &spec.coefficients {
        Some(c) if c.values.len() < spec.order + 1 => {
            return Err(ArcError::InvalidInput(format!(
                "{} coefficients given for order {}",
                c.values.len(),
                spec.order
            )))
        }
        Some(c) => c.truncated(spec.order),
        None => coefficients_general(&spec.target, spec.order, spec.target_name.clone())?,
    };
    let h = GridFunction::gaussian(grid);
    let field = build_control_field(&l2_x(&h), &l2_y(), &coefficients)?;
    let oracle = direct_sum_oracle(&coefficients, grid);
    let space = L2Grid::new(grid);
    let zero = GridFunction::zeros(grid);

    let outputs = par::try_map_indices(spec.steps.len(), |i| {
        euler_curve(&field, &zero, 1.0, spec.steps[i])
    })?;
    let trace = ReachTrace {
        order: spec.order,
        n_values: spec.steps.clone(),
        gap_oracle: outputs.iter().map(|o| space.distance(o, &oracle)).collect(),
        gap_target: outputs.iter().map(|o| space.distance(o, &spec.target)).collect(),
        cost_evals: spec
            .steps
            .iter()
            .map(|&n| n as u64 * field.leaf_cost())
            .collect(),
    };
    Ok(ReachReport {
        output: outputs.into_iter().last().expect("steps is nonempty"),
        oracle_target_gap: space.distance(&oracle, &spec.target),
        oracle,
        target: spec.target.clone(),
        coefficients,
        trace,
    })
}

/// Relation, bracket, expected field, base name, base point, expected verdict.
type Case<'a> = (&'a str, ArcField<GridFunction>, ArcField<GridFunction>, &'a str, &'a GridFunction, Verdict);

/// One row of [`bracket_table_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketRelation {
    pub relation: String,
    pub candidate: String,
    pub base: String,
    pub expected: Verdict,
    pub report: TangencyReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketTable {
    /// Gaps at or below this are treated as zero.
    pub floor: f64,
    pub rows: Vec<BracketRelation>,
    pub pass: bool,
}

/// Checks the six bracket relations between the elementary flows:
/// `[X,V] ~ (f + t h)`, `[X,W] ~ (f + t x h')`, `[Y,V] = 0`,
/// `[Y,W] ~ (f(. - t))`, `[V,W] = 0` and `[X,Y] ~ (f + t h')`.
///
/// Gaps below the interpolation floor of `h` count as zero: a shift or
/// argument dilation followed by its inverse is not the identity on the grid.
pub fn bracket_table_check(grid: GridSpec) -> Result<BracketTable> {
    bracket_table_check_with(grid, &default_t_grid())
}

pub fn bracket_table_check_with(grid: GridSpec, t_grid: &[f64]) -> Result<BracketTable> {
    let space = L2Grid::new(grid);
    let h = GridFunction::gaussian(grid);
    let zero = GridFunction::zeros(grid);
    let dh = GridFunction::from_fn(grid, |x| gaussian_derivative(1, x));
    let x_dh = GridFunction::from_fn(grid, |x| x * gaussian_derivative(1, x));
    let (x, y, v, w) = (l2_x(&h), l2_y(), l2_v(), l2_w());
    let back_shift = ArcField::primitive("f(.-t)", "l2", |f: &GridFunction, t| grid_shift(f, -t));

    let cases: Vec<Case> = vec![
        ("[X,V]", crate::algebra::bracket(&x, &v)?, l2_add("f+th", &h), "0", &zero, Verdict::Tangent),
        ("[X,W]", crate::algebra::bracket(&x, &w)?, l2_add("f+txh'", &x_dh), "0", &zero, Verdict::Tangent),
        ("[Y,V]", crate::algebra::bracket(&y, &v)?, ArcField::zero(), "h", &h, Verdict::ExactZero),
        ("[Y,W]", crate::algebra::bracket(&y, &w)?, back_shift, "h", &h, Verdict::Tangent),
        ("[V,W]", crate::algebra::bracket(&v, &w)?, ArcField::zero(), "h", &h, Verdict::ExactZero),
        ("[X,Y]", crate::algebra::bracket(&x, &y)?, l2_add("f+th'", &dh), "0", &zero, Verdict::Tangent),
    ];
    let floor = interpolation_floor(&h).max(zero_floor(space.magnitude(&h)));
    let rows = cases
        .into_iter()
        .map(|(relation, lhs, rhs, base_name, base, expected)| {
            let report = field_tangency_with_floor(&space, &lhs, &rhs, base, t_grid, floor)?;
            let pass = match expected {
                Verdict::ExactZero => report.verdict == Verdict::ExactZero,
                _ => report.verdict.is_tangent(),
            };
            Ok(BracketRelation {
                relation: relation.into(),
                candidate: rhs.name().into(),
                base: base_name.into(),
                expected,
                report,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(BracketTable { floor, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_grid() -> GridSpec {
        GridSpec::new(8.0, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn single_term_field_is_x() {
        let grid = small_grid();
        let h = GridFunction::gaussian(grid);
        let c = CoefficientVector::from_values(vec![1.0], "h");
        let f = build_control_field(&l2_x(&h), &l2_y(), &c).unwrap();
        let zero = GridFunction::zeros(grid);
        assert_eq!(f.eval(&zero, 0.3).unwrap(), l2_x(&h).eval(&zero, 0.3).unwrap());
    }

    #[test]
    fn bracket_term_matches_hand_value() {
        // c = (0, 1): the field is [X,Y]; at f = 0, t = 0.01 it is
        // 0.1 (h(x) - h(x - 0.1)). The spacing makes 0.1 an exact index shift.
        let grid = GridSpec::new(8.0, 1.0 / 80.0).unwrap();
        let h = GridFunction::gaussian(grid);
        let c = CoefficientVector::from_values(vec![0.0, 1.0], "h'");
        let f = build_control_field(&l2_x(&h), &l2_y(), &c).unwrap();
        let out = f.eval(&GridFunction::zeros(grid), 0.01).unwrap();
        for i in 0..grid.len() {
            let x = grid.node(i);
            let want = 0.1 * ((-x * x).exp() - (-(x - 0.1) * (x - 0.1)).exp());
            assert_abs_diff_eq!(out.samples()[i], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn order_zero_reach_is_exact() {
        let grid = small_grid();
        let r = reach(&ReachSpec::chi01(grid, 0, vec![1, 4, 16])).unwrap();
        for g in &r.trace.gap_oracle {
            assert!(*g <= 1e-12, "{g}");
        }
    }

    #[test]
    fn reach_rejects_bad_specs() {
        let grid = small_grid();
        assert!(reach(&ReachSpec::chi01(grid, 11, vec![16])).is_err());
        assert!(reach(&ReachSpec::chi01(grid, 1, vec![0])).is_err());
    }

    #[test]
    fn one_bracket_term_converges_in_n() {
        let r = reach(&ReachSpec::chi01(GridSpec::default(), 1, vec![16, 256])).unwrap();
        let g = &r.trace.gap_oracle;
        assert!(g[1] <= 0.5 * g[0], "{g:?}");
    }

    #[test]
    fn three_terms_land_near_the_expansion() {
        let r = reach(&ReachSpec::chi01(GridSpec::default(), 3, vec![16, 64, 256])).unwrap();
        let g = &r.trace.gap_oracle;
        assert!(g[1] <= g[0] && g[2] <= g[1], "{g:?}");
        let target = *r.trace.gap_target.last().unwrap();
        assert!((target - r.oracle_target_gap).abs() <= 0.1 * r.oracle_target_gap);
        assert_eq!(r.trace.cost_evals, vec![16 * 37, 64 * 37, 256 * 37]);
    }

    #[test]
    fn bracket_table_holds_on_default_grid() {
        let table = bracket_table_check(GridSpec::default()).unwrap();
        for row in &table.rows {
            assert!(row.pass, "{} -> {:?} p={}", row.relation, row.report.verdict, row.report.order_p);
        }
        assert!(table.pass);
    }
}
