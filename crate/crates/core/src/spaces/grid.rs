//! Uniform-grid discretization of `L^2(R)`.
//!
//! A [`GridFunction`] holds samples at `x_i = -L + i dx`, `i = 0..=2L/dx`, and
//! is taken to vanish outside `[-L, L]`. Norms use the rectangle rule; shifts
//! and argument dilations use linear interpolation with zero extension.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ArcError, Result};
use crate::metric::{seeded_rng, MetricSpace, Region};
use crate::par;

/// Default half-width of the grid.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
/// Default spacing.
pub const DEFAULT_DX: f64 = 1.0 / 256.0;
/// Relative L² mass a shift or dilation may drop before it counts as an escape.
pub const MASS_LOSS_THRESHOLD: f64 = 1e-6;
/// Fractional offsets closer than this to an integer are snapped to exact
/// index shifts.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    dx: f64,
    len: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, dx: f64) -> Result<Self> {
        if !(half_width > 0.0 && dx > 0.0) || !half_width.is_finite() || !dx.is_finite() {
            return Err(ArcError::InvalidInput(format!(
                "grid needs positive L and dx, got L={half_width} dx={dx}"
            )));
        }
        let cells = 2.0 * half_width / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 2.0 {
            return Err(ArcError::InvalidInput(format!(
                "2L/dx must be an integer >= 2, got {cells}"
            )));
        }
        Ok(GridSpec {
            half_width,
            dx,
            len: rounded as usize + 1,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of nodes, `2L/dx + 1`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.len == other.len && self.half_width == other.half_width && self.dx == other.dx
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(DEFAULT_HALF_WIDTH, DEFAULT_DX).expect("default grid is valid")
    }
}

/// Samples of an `L^2(R)` function on a [`GridSpec`].
#[derive(Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    samples: Arc<[f64]>,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // a stable content digest instead of 4097 numbers
        let mut hash: u64 = 0xcbf29ce484222325;
        for v in self.samples.iter() {
            hash ^= v.to_bits();
            hash = hash.wrapping_mul(0x100000001b3);
        }
        write!(
            f,
            "GridFunction(L={}, dx={}, n={}, norm={:.6e}, digest={hash:016x})",
            self.spec.half_width,
            self.spec.dx,
            self.spec.len,
            grid_norm(self)
        )
    }
}

impl GridFunction {
    pub fn new(spec: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(ArcError::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                spec.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(ArcError::InvalidInput("grid samples must be finite".into()));
        }
        Ok(GridFunction {
            spec,
            samples: samples.into(),
        })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction {
            spec,
            samples: vec![0.0; spec.len()].into(),
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let mut samples = vec![0.0; spec.len()];
        par::fill(&mut samples, |i| f(spec.node(i)));
        GridFunction {
            spec,
            samples: samples.into(),
        }
    }

    /// `e^{-x^2}` on the grid.
    pub fn gaussian(spec: GridSpec) -> Self {
        Self::from_fn(spec, |x| (-x * x).exp())
    }

    /// Indicator of `[a, b]`.
    pub fn indicator(spec: GridSpec, a: f64, b: f64) -> Self {
        Self::from_fn(spec, |x| if x >= a && x <= b { 1.0 } else { 0.0 })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn with_samples(&self, samples: Vec<f64>) -> Self {
        GridFunction {
            spec: self.spec,
            samples: samples.into(),
        }
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.spec.same_as(&other.spec) {
            Ok(())
        } else {
            Err(ArcError::GridMismatch(format!(
                "grid (L={}, dx={}) vs (L={}, dx={})",
                self.spec.half_width, self.spec.dx, other.spec.half_width, other.spec.dx
            )))
        }
    }

    /// Linear interpolation at a real position measured in index units;
    /// zero outside the grid.
    fn interpolate(&self, pos: f64) -> f64 {
        let n = self.samples.len();
        let k = pos.floor();
        let theta = pos - k;
        let at = |j: f64| -> f64 {
            if j < 0.0 || j >= n as f64 {
                0.0
            } else {
                self.samples[j as usize]
            }
        };
        if theta == 0.0 {
            at(k)
        } else {
            (1.0 - theta) * at(k) + theta * at(k + 1.0)
        }
    }

    /// Writes the `x,value` CSV format with its `# L=.. dx=..` metadata line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut buf = String::with_capacity(self.samples.len() * 24);
        writeln!(buf, "# L={} dx={}", self.spec.half_width, self.spec.dx).unwrap();
        buf.push_str("x,value\n");
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(buf, "{},{}", self.spec.node(i), v).unwrap();
        }
        out.write_all(buf.as_bytes())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: String| ArcError::Parse {
            token: "csv".into(),
            message: msg,
        };
        let mut lines = input.lines();
        let mut next = || -> Result<Option<String>> {
            lines
                .next()
                .transpose()
                .map_err(|e| bad(format!("read error: {e}")))
        };
        let meta = next()?.ok_or_else(|| bad("empty file".into()))?;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| bad("missing `# L=.. dx=..` line".into()))?;
        let (mut half_width, mut dx) = (None, None);
        for item in meta.split_whitespace() {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("bad metadata item `{item}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| bad(format!("bad number `{value}`")))?;
            match key {
                "L" => half_width = Some(value),
                "dx" => dx = Some(value),
                _ => {}
            }
        }
        let spec = GridSpec::new(
            half_width.ok_or_else(|| bad("metadata lacks L".into()))?,
            dx.ok_or_else(|| bad("metadata lacks dx".into()))?,
        )?;
        let header = next()?.ok_or_else(|| bad("missing header".into()))?;
        if header.trim() != "x,value" {
            return Err(bad(format!("expected header `x,value`, got `{header}`")));
        }
        let mut samples = Vec::with_capacity(spec.len());
        while let Some(line) = next()? {
            if line.trim().is_empty() {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("bad row `{line}`")))?;
            samples.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad value in `{line}`")))?,
            );
        }
        GridFunction::new(spec, samples)
    }
}

/// `sqrt(dx * sum f_i^2)`.
pub fn grid_norm(f: &GridFunction) -> f64 {
    let s = f.samples();
    (f.spec.dx * par::sum_indices(s.len(), |i| s[i] * s[i])).sqrt()
}

/// `<f, g> = dx * sum f_i g_i`.
pub fn grid_inner(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_same_grid(g)?;
    let (a, b) = (f.samples(), g.samples());
    Ok(f.spec.dx * par::sum_indices(a.len(), |i| a[i] * b[i]))
}

/// `alpha f + g`.
pub fn grid_axpy(alpha: f64, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.check_same_grid(g)?;
    let (a, b) = (f.samples(), g.samples());
    let mut out = vec![0.0; a.len()];
    par::fill(&mut out, |i| alpha * a[i] + b[i]);
    Ok(f.with_samples(out))
}

/// Error scale of one linear-interpolation pass over `f`:
/// `dx^2 max|f''| / 8 * sqrt(2L)`, with `f''` from central differences.
/// Gaps below this are indistinguishable from interpolation noise.
pub fn interpolation_floor(f: &GridFunction) -> f64 {
    let s = f.samples();
    let dx = f.spec.dx;
    let curvature = if s.len() < 3 {
        0.0
    } else {
        par::max_of(s.len() - 2, |i| (s[i] - 2.0 * s[i + 1] + s[i + 2]).abs()) / (dx * dx)
    };
    dx * dx * curvature / 8.0 * (2.0 * f.spec.half_width).sqrt()
}

/// `c f`.
pub fn grid_scale(c: f64, f: &GridFunction) -> GridFunction {
    let a = f.samples();
    let mut out = vec![0.0; a.len()];
    par::fill(&mut out, |i| c * a[i]);
    f.with_samples(out)
}

fn dropped_mass(f: &GridFunction, keep: impl Fn(usize) -> bool + Sync + Send) -> f64 {
    let s = f.samples();
    (f.spec.dx * par::sum_indices(s.len(), |j| if keep(j) { 0.0 } else { s[j] * s[j] })).sqrt()
}

fn check_mass(f: &GridFunction, lost: f64, what: &str) -> Result<()> {
    let norm = grid_norm(f);
    if norm > 0.0 && lost > MASS_LOSS_THRESHOLD * norm {
        return Err(ArcError::escaped(format!(
            "{what} drops L2 mass {lost:e} of {norm:e} beyond the grid"
        )));
    }
    Ok(())
}

/// Samples of `x -> f(x + t)`: an exact index shift when `t` is a multiple
/// of `dx`, linear interpolation otherwise.
pub fn grid_shift(f: &GridFunction, t: f64) -> Result<GridFunction> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    let spec = f.spec;
    if !(t.abs() < spec.half_width) {
        return Err(ArcError::escaped(format!(
            "shift {t} exceeds the half-width {}",
            spec.half_width
        )));
    }
    let offset = t / spec.dx;
    let mut k = offset.floor();
    let mut theta = offset - k;
    if theta < SNAP {
        theta = 0.0;
    } else if theta > 1.0 - SNAP {
        theta = 0.0;
        k += 1.0;
    }
    let n = spec.len() as i64;
    let ki = k as i64;
    // source indices reached by some output node
    let lo = ki;
    let hi = n - 1 + ki + i64::from(theta > 0.0);
    let lost = dropped_mass(f, |j| (j as i64) >= lo && (j as i64) <= hi);
    check_mass(f, lost, "shift")?;

    let s = f.samples();
    let at = |j: i64| if j < 0 || j >= n { 0.0 } else { s[j as usize] };
    let mut out = vec![0.0; s.len()];
    if theta == 0.0 {
        par::fill(&mut out, |i| at(i as i64 + ki));
    } else {
        par::fill(&mut out, |i| {
            let j = i as i64 + ki;
            (1.0 - theta) * at(j) + theta * at(j + 1)
        });
    }
    Ok(f.with_samples(out))
}

/// Samples of `x -> f(e^t x)` by linear interpolation.
pub fn grid_dilate_arg(f: &GridFunction, t: f64) -> Result<GridFunction> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    let spec = f.spec;
    let e = t.exp();
    let pos = |i: usize| (e * spec.node(i) + spec.half_width) / spec.dx;
    let first = pos(0).floor();
    let last = pos(spec.len() - 1).ceil();
    let lost = dropped_mass(f, |j| (j as f64) >= first && (j as f64) <= last);
    check_mass(f, lost, "argument dilation")?;

    let mut out = vec![0.0; spec.len()];
    par::fill(&mut out, |i| f.interpolate(pos(i)));
    Ok(f.with_samples(out))
}

/// The metric space `(grid functions, L2 rectangle-rule distance)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct L2Grid {
    pub spec: GridSpec,
}

impl L2Grid {
    pub fn new(spec: GridSpec) -> Self {
        L2Grid { spec }
    }
}

impl MetricSpace for L2Grid {
    type Point = GridFunction;

    fn name(&self) -> String {
        "l2".into()
    }

    /// Infinite for functions on different grids.
    fn distance(&self, p: &GridFunction, q: &GridFunction) -> f64 {
        if !p.spec.same_as(&q.spec) {
            return f64::INFINITY;
        }
        let (a, b) = (p.samples(), q.samples());
        (p.spec.dx * par::sum_indices(a.len(), |i| (a[i] - b[i]) * (a[i] - b[i]))).sqrt()
    }

    fn magnitude(&self, p: &GridFunction) -> f64 {
        grid_norm(p)
    }

    /// Points `center + r u w` where `w` is a unit-norm sum of three random
    /// Gaussian bumps and `u` is uniform in `[0, 1]`.
    fn sample(&self, seed: u64, region: &Region<GridFunction>) -> Result<Vec<GridFunction>> {
        if !(region.radius > 0.0) {
            return Err(ArcError::Sampler("radius must be positive".into()));
        }
        let center = match &region.center {
            Some(c) if !c.spec.same_as(&self.spec) => {
                return Err(ArcError::Sampler("center lives on another grid".into()))
            }
            Some(c) => c.clone(),
            None => GridFunction::zeros(self.spec),
        };
        let reach = (self.spec.half_width / 2.0).min(3.0);
        let mut rng = seeded_rng(seed);
        let mut out = Vec::with_capacity(region.count);
        for _ in 0..region.count {
            let bumps: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.sample::<f64, _>(StandardNormal),
                        rng.random_range(-reach..reach),
                        rng.random_range(0.3..1.5),
                    )
                })
                .collect();
            let w = GridFunction::from_fn(self.spec, |x| {
                bumps
                    .iter()
                    .map(|(a, c, s)| a * (-((x - c) / s).powi(2)).exp())
                    .sum()
            });
            let norm = grid_norm(&w);
            let r = region.radius * rng.random::<f64>();
            let scale = if norm > 0.0 { r / norm } else { 0.0 };
            out.push(grid_axpy(scale, &w, &center)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> GridSpec {
        GridSpec::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert_eq!(GridSpec::default().len(), 4097);
        assert!(GridSpec::new(1.0, 0.3).is_err());
        assert!(GridSpec::new(-1.0, 0.5).is_err());
        assert_eq!(small().nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn shift_by_one_cell_is_exact() {
        let spec = small();
        let f = GridFunction::new(spec, vec![0.0, 1.0, 2.0, 3.0, 0.0]).unwrap();
        let g = grid_shift(&f, 0.5).unwrap();
        assert_eq!(g.samples(), &[1.0, 2.0, 3.0, 0.0, 0.0]);
        let g = grid_shift(&f, -0.5).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(grid_shift(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn half_cell_shift_interpolates() {
        let spec = small();
        let f = GridFunction::new(spec, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let g = grid_shift(&f, 0.25).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn shift_that_drops_mass_escapes() {
        let spec = small();
        let f = GridFunction::new(spec, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(grid_shift(&f, 0.5), Err(ArcError::PointEscaped { .. })));
        assert!(grid_shift(&f, -0.5).is_ok());
        assert!(matches!(grid_shift(&f, 2.0), Err(ArcError::PointEscaped { .. })));
    }

    #[test]
    fn norms() {
        let spec = GridSpec::new(8.0, 1.0 / 256.0).unwrap();
        let one = GridFunction::from_fn(spec, |_| 1.0);
        assert_abs_diff_eq!(grid_norm(&one), (16.0f64 + 1.0 / 256.0).sqrt(), epsilon = 1e-12);
        let h = GridFunction::gaussian(spec);
        let exact = (std::f64::consts::PI / 2.0).powf(0.25);
        assert_abs_diff_eq!(grid_norm(&h), exact, epsilon = 1e-12);
        assert_abs_diff_eq!(exact, 1.11951, epsilon = 1e-5);
    }

    #[test]
    fn axpy_and_mismatch() {
        let spec = small();
        let f = GridFunction::new(spec, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let g = grid_axpy(2.0, &f, &f).unwrap();
        assert_eq!(g.samples(), &[3.0, 6.0, 9.0, 12.0, 15.0]);
        let other = GridFunction::zeros(GridSpec::new(1.0, 0.25).unwrap());
        assert!(matches!(grid_axpy(1.0, &f, &other), Err(ArcError::GridMismatch(_))));
        assert!(GridFunction::new(spec, vec![1.0]).is_err());
        assert_eq!(L2Grid::new(spec).distance(&f, &other), f64::INFINITY);
    }

    #[test]
    fn dilate_identity_and_value() {
        let spec = GridSpec::new(4.0, 1.0 / 64.0).unwrap();
        let h = GridFunction::gaussian(spec);
        assert_eq!(grid_dilate_arg(&h, 0.0).unwrap(), h);
        let g = grid_dilate_arg(&h, 2f64.ln()).unwrap();
        // node x = 0.5 maps to e^t x = 1.0, itself a node
        let i = spec.nodes().iter().position(|x| *x == 0.5).unwrap();
        assert_abs_diff_eq!(g.samples()[i], (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let spec = GridSpec::new(1.0, 0.25).unwrap();
        let f = GridFunction::from_fn(spec, |x| x.sin() / 3.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# L=1 dx=0.25\nx,value\n-1,"));
        let back = GridFunction::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::read_csv(std::io::Cursor::new("x,value\n")).is_err());
    }
}
