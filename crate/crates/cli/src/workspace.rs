//! Named spaces, their fixture fields and point syntax.

use std::fmt::Debug;
use std::fs::File;
use std::io::BufReader;

use arcflow::l2::{l2_add, l2_v, l2_w, l2_x, l2_y};
use arcflow::spaces::euclidean::{dilation_flow, make_dilation, make_translation, point};
use arcflow::spaces::fixtures::{
    cos_field, curved_base_point, curved_dilation_field, curved_dilation_flow,
    curved_translation_field, curved_translation_flow, heisenberg_x, heisenberg_y, rotation_field,
    sin_field,
};
use arcflow::spaces::hausdorff::{set_dilation, set_dilation_flow, set_translation};
use arcflow::spaces::{CompactSet, Euclidean, EuclideanPoint, GridFunction, GridSpec, Hausdorff, L2Grid};
use arcflow::{parse_expression, ArcError, ArcField, Flow, MetricSpace, SampledSet};
use serde_json::{json, Value};

use crate::Error;

/// Centers of the dilation pair `dilU`, `dilV` in the plane.
const U: [f64; 2] = [0.0, 0.0];
const V: [f64; 2] = [1.0, 0.0];

pub enum SpaceKind {
    Euclidean(usize),
    L2,
    Hausdorff,
}

impl SpaceKind {
    pub fn parse(name: &str) -> Result<Self, Error> {
        match name {
            "l2" => Ok(SpaceKind::L2),
            "hausdorff" => Ok(SpaceKind::Hausdorff),
            _ => name
                .strip_prefix('r')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|d| *d >= 1)
                .map(SpaceKind::Euclidean)
                .ok_or_else(|| Error::usage(format!("unknown space `{name}` (expected rN, l2 or hausdorff)"))),
        }
    }
}

pub trait Workspace {
    type Point: Clone + Send + Sync + Debug + 'static;
    type Space: MetricSpace<Point = Self::Point>;

    fn space(&self) -> &Self::Space;
    fn field(&self, name: &str) -> Option<ArcField<Self::Point>>;
    fn parse_point(&self, src: &str) -> Result<Self::Point, Error>;
    fn point_json(&self, p: &Self::Point) -> Value;

    fn named_set(&self, name: &str, _samples: usize) -> Result<SampledSet<Self::Point>, Error> {
        Err(Error::usage(format!("unknown set `{name}` on {}", self.space().name())))
    }

    /// Default base point, if the space has a natural one.
    fn origin(&self) -> Option<Self::Point> {
        None
    }

    fn expression(&self, src: &str) -> Result<ArcField<Self::Point>, Error> {
        Ok(parse_expression(src, &|n: &str| self.field(n))?)
    }

    /// The exact flow of a closed-form fixture, or the Euler flow of any other
    /// expression.
    fn flow(&self, src: &str, steps: usize) -> Result<Flow<Self::Point>, Error> {
        let field = self.expression(src)?;
        if field.is_exact_flow() {
            Ok(Flow::closed_form(field))
        } else {
            Ok(Flow::euler(field, steps)?)
        }
    }

    fn point_or_origin(&self, src: Option<&str>) -> Result<Self::Point, Error> {
        match src {
            Some(s) => self.parse_point(s),
            None => self.origin().ok_or_else(|| Error::usage("a base point is required".into())),
        }
    }

    /// Points separated by `|`.
    fn parse_points(&self, src: &str) -> Result<Vec<Self::Point>, Error> {
        src.split('|').map(|p| self.parse_point(p.trim())).collect()
    }
}

pub fn parse_floats(src: &str) -> Result<Vec<f64>, Error> {
    src.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| Error::usage(format!("expected a number, got `{s}`")))
        })
        .collect()
}

pub struct EuclideanWs {
    space: Euclidean,
}

impl EuclideanWs {
    pub fn new(dim: usize) -> Self {
        EuclideanWs {
            space: Euclidean::new(dim),
        }
    }

    fn axis(&self, i: usize) -> EuclideanPoint {
        let mut e = EuclideanPoint::zeros(self.space.dim);
        e[i] = 1.0;
        e
    }
}

impl Workspace for EuclideanWs {
    type Point = EuclideanPoint;
    type Space = Euclidean;

    fn space(&self) -> &Euclidean {
        &self.space
    }

    fn field(&self, name: &str) -> Option<ArcField<EuclideanPoint>> {
        let dim = self.space.dim;
        let zero = EuclideanPoint::zeros(dim);
        if let Some(i) = name.strip_prefix("transE").and_then(|i| i.parse::<usize>().ok()) {
            return (1..=dim).contains(&i).then(|| make_translation(&self.axis(i - 1)));
        }
        let plane = |p: [f64; 2]| point(&p);
        let f = match (name, dim) {
            ("dil0", _) => make_dilation(&zero),
            ("dilflow0", _) => dilation_flow(&zero).as_arc_field().clone(),
            ("sin", _) => sin_field(dim),
            ("cos", _) => cos_field(dim),
            ("dilU", 2) => dilation_flow(&plane(U)).as_arc_field().clone().renamed("dilU"),
            ("dilV", 2) => dilation_flow(&plane(V)).as_arc_field().clone().renamed("dilV"),
            ("transVU", 2) => make_translation(&plane([V[0] - U[0], V[1] - U[1]])).renamed("transVU"),
            ("rot", 2) => rotation_field(),
            ("heisX", 3) => heisenberg_x().as_arc_field().clone(),
            ("heisY", 3) => heisenberg_y().as_arc_field().clone(),
            ("cdil", 3) => curved_dilation_flow().as_arc_field().clone(),
            ("ctrans", 3) => curved_translation_flow().as_arc_field().clone(),
            ("cdilv", 3) => curved_dilation_field(),
            ("ctransv", 3) => curved_translation_field(),
            _ => return None,
        };
        Some(f)
    }

    fn parse_point(&self, src: &str) -> Result<EuclideanPoint, Error> {
        if src == "curved" && self.space.dim == 3 {
            return Ok(curved_base_point());
        }
        let coords = parse_floats(src)?;
        if coords.len() != self.space.dim {
            return Err(Error::usage(format!(
                "point `{src}` has {} coordinates, space is r{}",
                coords.len(),
                self.space.dim
            )));
        }
        Ok(point(&coords))
    }

    fn point_json(&self, p: &EuclideanPoint) -> Value {
        json!(p.iter().copied().collect::<Vec<f64>>())
    }

    fn named_set(&self, name: &str, samples: usize) -> Result<SampledSet<EuclideanPoint>, Error> {
        if self.space.dim != 2 || samples < 2 {
            return Err(Error::usage(format!("set `{name}` needs r2 and at least 2 samples")));
        }
        let n = samples as f64;
        let (points, resolution) = match name {
            "circle" => {
                let pts = (0..samples)
                    .map(|k| {
                        let a = std::f64::consts::TAU * k as f64 / n;
                        point(&[a.cos(), a.sin()])
                    })
                    .collect();
                (pts, 2.0 * (std::f64::consts::PI / (2.0 * n)).sin())
            }
            "x-axis" => {
                let pts = (0..samples)
                    .map(|k| point(&[-4.0 + 8.0 * k as f64 / (n - 1.0), 0.0]))
                    .collect();
                (pts, 4.0 / (n - 1.0))
            }
            _ => return Err(Error::usage(format!("unknown set `{name}` (circle, x-axis)"))),
        };
        Ok(SampledSet::new(points, name)?.with_resolution(resolution))
    }

    fn origin(&self) -> Option<EuclideanPoint> {
        Some(EuclideanPoint::zeros(self.space.dim))
    }
}

pub struct L2Ws {
    space: L2Grid,
    grid: GridSpec,
    h: GridFunction,
}

impl L2Ws {
    pub fn new(grid: GridSpec) -> Self {
        L2Ws {
            space: L2Grid::new(grid),
            grid,
            h: GridFunction::gaussian(grid),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn gaussian_derivative(&self) -> GridFunction {
        GridFunction::from_fn(self.grid, |x| -2.0 * x * (-x * x).exp())
    }

    /// `zero`, `h`, `dh`, `chi01` or `csv:PATH`.
    pub fn function(&self, src: &str) -> Result<GridFunction, Error> {
        match src {
            "zero" => Ok(GridFunction::zeros(self.grid)),
            "h" => Ok(self.h.clone()),
            "dh" => Ok(self.gaussian_derivative()),
            "chi01" => Ok(GridFunction::indicator(self.grid, 0.0, 1.0)),
            _ => {
                let path = src.strip_prefix("csv:").ok_or_else(|| {
                    Error::usage(format!("unknown function `{src}` (zero, h, dh, chi01, csv:PATH)"))
                })?;
                let file = File::open(path).map_err(|e| Error::usage(format!("{path}: {e}")))?;
                let f = GridFunction::read_csv(BufReader::new(file))?;
                if !f.spec().same_as(&self.grid) {
                    return Err(ArcError::GridMismatch(format!("{path} does not match the working grid")).into());
                }
                Ok(f)
            }
        }
    }
}

impl Workspace for L2Ws {
    type Point = GridFunction;
    type Space = L2Grid;

    fn space(&self) -> &L2Grid {
        &self.space
    }

    fn field(&self, name: &str) -> Option<ArcField<GridFunction>> {
        Some(match name {
            "X" => l2_x(&self.h),
            "Y" => l2_y(),
            "V" => l2_v(),
            "W" => l2_w(),
            "Z" => l2_add("Z", &self.gaussian_derivative()),
            _ => return None,
        })
    }

    fn parse_point(&self, src: &str) -> Result<GridFunction, Error> {
        self.function(src)
    }

    fn point_json(&self, p: &GridFunction) -> Value {
        json!({
            "half_width": p.spec().half_width(),
            "dx": p.spec().dx(),
            "norm": self.space.magnitude(p),
        })
    }

    fn origin(&self) -> Option<GridFunction> {
        Some(self.h.clone())
    }
}

pub struct HausdorffWs;

impl Workspace for HausdorffWs {
    type Point = CompactSet;
    type Space = Hausdorff;

    fn space(&self) -> &Hausdorff {
        &Hausdorff
    }

    fn field(&self, name: &str) -> Option<ArcField<CompactSet>> {
        Some(match name {
            "setTransE1" => set_translation([1.0, 0.0]),
            "setTransE2" => set_translation([0.0, 1.0]),
            "setDil0" => set_dilation([0.0, 0.0]),
            "setDilU" => set_dilation_flow(U).as_arc_field().clone().renamed("setDilU"),
            "setDilV" => set_dilation_flow(V).as_arc_field().clone().renamed("setDilV"),
            _ => return None,
        })
    }

    /// Points of the set as `x,y;x,y;...`.
    fn parse_point(&self, src: &str) -> Result<CompactSet, Error> {
        let pts = src
            .split(';')
            .map(|p| match parse_floats(p)?.as_slice() {
                [x, y] => Ok([*x, *y]),
                _ => Err(Error::usage(format!("set member `{p}` is not a plane point"))),
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(CompactSet::new(pts)?)
    }

    fn point_json(&self, p: &CompactSet) -> Value {
        json!(p.points())
    }
}
