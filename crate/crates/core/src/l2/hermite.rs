//! Physicists' Hermite polynomials, Gaussian derivatives and expansion
//! coefficients in the basis `h^[n]`, the `n`-th derivative of `e^{-x^2}`.

use serde::{Deserialize, Serialize};

use crate::error::{ArcError, Result};
use crate::par;
use crate::spaces::grid::{GridFunction, GridSpec};

/// `x^2` above which `e^{x^2}` overflows an `f64`.
const WEIGHT_EXPONENT_LIMIT: f64 = 709.0;

/// `H_n(x)` by the three-term recurrence `H_{n+1} = 2x H_n - 2n H_{n-1}`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), ..., H_n(x)` in one pass.
pub fn hermite_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(2.0 * x);
    }
    for k in 1..n {
        out.push(2.0 * x * out[k] - 2.0 * k as f64 * out[k - 1]);
    }
    out
}

/// `h^[n](x) = (-1)^n H_n(x) e^{-x^2}`.
pub fn gaussian_derivative(n: usize, x: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite_eval(n, x) * (-x * x).exp()
}

/// `h^[n]` sampled on a grid.
pub fn gaussian_derivative_grid(n: usize, spec: GridSpec) -> GridFunction {
    GridFunction::from_fn(spec, move |x| gaussian_derivative(n, x))
}

/// Rectangle-rule value of `∫ H_m H_n e^{-x^2} dx` on the grid.
pub fn hermite_orthogonality(m: usize, n: usize, spec: &GridSpec) -> f64 {
    let dx = spec.dx();
    dx * par::sum_indices(spec.len(), |i| {
        let x = spec.node(i);
        hermite_eval(m, x) * hermite_eval(n, x) * (-x * x).exp()
    })
}

/// `n! 2^n √π`, the squared norm of `H_n` under the weight `e^{-x^2}`.
pub fn hermite_norm_squared(n: usize) -> f64 {
    let mut v = std::f64::consts::PI.sqrt();
    for k in 1..=n {
        v *= 2.0 * k as f64;
    }
    v
}

/// `n! 2^n sqrt(2π)`: the normalization shared by both coefficient formulas.
fn coefficient_denominator(n: usize) -> f64 {
    let mut v = (2.0 * std::f64::consts::PI).sqrt();
    for k in 1..=n {
        v *= 2.0 * k as f64;
    }
    v
}

fn alternating(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Expansion coefficients `c_0..=c_N` of a target in the basis `h^[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub target: String,
    /// How each entry was obtained.
    pub provenance: Vec<String>,
}

impl CoefficientVector {
    /// Coefficients given directly.
    pub fn from_values(values: Vec<f64>, target: impl Into<String>) -> Self {
        let provenance = vec!["given".to_string(); values.len()];
        CoefficientVector {
            values,
            target: target.into(),
            provenance,
        }
    }

    /// Highest index `N`.
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn truncated(&self, order: usize) -> Self {
        let k = (order + 1).min(self.values.len());
        CoefficientVector {
            values: self.values[..k].to_vec(),
            target: self.target.clone(),
            provenance: self.provenance[..k].to_vec(),
        }
    }
}

/// Closed-form coefficients of the indicator of `[0, 1]`:
/// `c_n = (-1)^n [H_{n+1}(1) - H_{n+1}(0)] / (2(n+1) n! 2^n sqrt(2π))`.
pub fn coefficients_chi01(order: usize) -> CoefficientVector {
    let at_one = hermite_all(order + 1, 1.0);
    let at_zero = hermite_all(order + 1, 0.0);
    let values = (0..=order)
        .map(|n| {
            alternating(n) * (at_one[n + 1] - at_zero[n + 1])
                / (2.0 * (n + 1) as f64 * coefficient_denominator(n))
        })
        .collect();
    CoefficientVector {
        values,
        target: "chi01".into(),
        provenance: vec!["closed form (Hermite endpoint difference)".into(); order + 1],
    }
}

/// Coefficients of a sampled target by rectangle-rule quadrature of
/// `(-1)^n / (n! 2^n sqrt(2π)) ∫ g H_n`.
///
/// The target must have finite weighted norm `∫ g^2 e^{x^2}` on the grid;
/// where `g != 0` at a node with `e^{x^2}` beyond `f64` range the call fails
/// with [`ArcError::WeightOverflow`]. Truncate the support of `g` first.
pub fn coefficients_general(
    g: &GridFunction,
    order: usize,
    target: impl Into<String>,
) -> Result<CoefficientVector> {
    let spec = *g.spec();
    let samples = g.samples();
    if let Some(i) = (0..spec.len())
        .find(|&i| samples[i] != 0.0 && spec.node(i).powi(2) > WEIGHT_EXPONENT_LIMIT)
    {
        return Err(ArcError::WeightOverflow { at: spec.node(i) });
    }
    let weighted = spec.dx()
        * par::sum_indices(spec.len(), |i| {
            let x = spec.node(i);
            if samples[i] == 0.0 {
                0.0
            } else {
                samples[i] * samples[i] * (x * x).exp()
            }
        });
    if !weighted.is_finite() {
        return Err(ArcError::WeightOverflow {
            at: spec.half_width(),
        });
    }
    let values = (0..=order)
        .map(|n| {
            let integral = spec.dx()
                * par::sum_indices(spec.len(), |i| {
                    if samples[i] == 0.0 {
                        0.0
                    } else {
                        samples[i] * hermite_eval(n, spec.node(i))
                    }
                });
            alternating(n) * integral / coefficient_denominator(n)
        })
        .collect();
    Ok(CoefficientVector {
        values,
        target: target.into(),
        provenance: vec!["rectangle-rule quadrature".into(); order + 1],
    })
}

/// `sum_n c_n h^[n]` sampled on the grid.
pub fn direct_sum_oracle(c: &CoefficientVector, spec: GridSpec) -> GridFunction {
    let values = c.values.clone();
    let order = c.order();
    GridFunction::from_fn(spec, move |x| {
        if values.is_empty() {
            return 0.0;
        }
        let hs = hermite_all(order, x);
        let w = (-x * x).exp();
        values
            .iter()
            .enumerate()
            .map(|(n, c)| c * alternating(n) * hs[n])
            .sum::<f64>()
            * w
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recurrence_values() {
        assert_eq!(hermite_eval(0, 3.7), 1.0);
        assert_eq!(hermite_eval(2, 1.0), 2.0);
        assert_eq!(hermite_eval(3, 1.0), -4.0);
        assert_eq!(hermite_eval(2, 0.0), -2.0);
        // explicit H_4 = 16x^4 - 48x^2 + 12
        let x = 0.3f64;
        assert_abs_diff_eq!(
            hermite_eval(4, x),
            16.0 * x.powi(4) - 48.0 * x * x + 12.0,
            epsilon = 1e-12
        );
        assert_eq!(hermite_all(4, x)[4], hermite_eval(4, x));
    }

    #[test]
    fn gaussian_derivatives() {
        assert_eq!(gaussian_derivative(0, 0.0), 1.0);
        assert_abs_diff_eq!(gaussian_derivative(1, 1.0), -0.735758882342885, epsilon = 1e-12);
        assert_eq!(gaussian_derivative(2, 0.0), -2.0);
    }

    #[test]
    fn chi_coefficients() {
        let c = coefficients_chi01(4);
        let s = (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(c.values[0], 1.0 / s, epsilon = 1e-15);
        assert_abs_diff_eq!(c.values[1], -1.0 / (2.0 * s), epsilon = 1e-15);
        assert_abs_diff_eq!(c.values[2], -1.0 / (12.0 * s), epsilon = 1e-15);
        assert_abs_diff_eq!(c.values[3], 1.0 / (12.0 * s), epsilon = 1e-15);
        assert_abs_diff_eq!(c.values[4], -1.0 / (480.0 * s), epsilon = 1e-15);
    }

    #[test]
    fn weight_overflow() {
        let spec = GridSpec::new(30.0, 0.5).unwrap();
        let g = GridFunction::from_fn(spec, |_| 1.0);
        assert!(matches!(
            coefficients_general(&g, 2, "one"),
            Err(ArcError::WeightOverflow { .. })
        ));
        let zero = GridFunction::zeros(spec);
        let c = coefficients_general(&zero, 3, "zero").unwrap();
        assert!(c.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn oracle_of_unit_vector_is_the_gaussian() {
        let spec = GridSpec::new(4.0, 1.0 / 16.0).unwrap();
        let o = direct_sum_oracle(&CoefficientVector::from_values(vec![1.0, 0.0], "h"), spec);
        assert_eq!(o, GridFunction::gaussian(spec));
    }
}
