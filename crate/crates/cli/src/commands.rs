use std::fmt::Write as _;
use std::path::PathBuf;

use arcflow::diagnostics::{
    commutation_gap, estimate_closeness, estimate_e1, estimate_e2, estimate_speed_growth,
    estimate_transversality, involutivity_check, nagumo_check, sample_integral_surface,
    surface_tangency, Distribution, NagumoMode,
};
use arcflow::l2::{
    bracket_table_check_with, coefficients_chi01, coefficients_general, hermite_orthogonality, reach,
    ReachSpec,
};
use arcflow::metric::dyadic_grid;
use arcflow::spaces::{GridFunction, GridSpec};
use arcflow::{
    bracket, euler_curve, field_tangency, solve, verify_metric_axioms, MetricSpace, RegionSampler,
    SolveOptions, TangencyReport,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::workspace::{parse_floats, EuclideanWs, HausdorffWs, L2Ws, SpaceKind, Workspace};
use crate::Error;

/// Result of a subcommand, written out by `main`.
pub struct Outcome {
    pub json: Value,
    pub verdict: Option<String>,
    /// Verdict required when `--expect` is absent.
    pub required: Option<&'static str>,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn new(json: Value) -> Self {
        Outcome {
            json,
            verdict: None,
            required: None,
            files: Vec::new(),
        }
    }

    fn verdict(mut self, v: impl Into<String>) -> Self {
        self.verdict = Some(v.into());
        self
    }

    fn csv(mut self, path: &Option<PathBuf>, body: String) -> Self {
        if let Some(p) = path {
            self.files.push((p.clone(), body));
        }
        self
    }
}

macro_rules! on_space {
    ($args:expr, |$w:ident| $body:expr) => {
        match SpaceKind::parse(&$args.space)? {
            SpaceKind::Euclidean(d) => {
                let $w = EuclideanWs::new(d);
                $body
            }
            SpaceKind::L2 => {
                let $w = L2Ws::new(grid(&$args.grid)?);
                $body
            }
            SpaceKind::Hausdorff => {
                let $w = HausdorffWs;
                $body
            }
        }
    };
}

pub fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Tangency(a) => on_space!(a.space, |w| tangency(&w, a)),
        Command::Euler(a) => on_space!(a.space, |w| euler(&w, a)),
        Command::Bracket(a) if a.table => bracket_table(a),
        Command::Bracket(a) => on_space!(a.space, |w| bracket_values(&w, a)),
        Command::Diagnose(a) => on_space!(a.space, |w| diagnose(&w, a)),
        Command::Commute(a) => on_space!(a.space, |w| commute(&w, a)),
        Command::Surface(a) => on_space!(a.space, |w| surface(&w, a)),
        Command::Involutive(a) => on_space!(a.space, |w| involutive(&w, a)),
        Command::Nagumo(a) => on_space!(a.space, |w| nagumo(&w, a)),
        Command::L2Reach(a) => l2_reach(a),
        Command::Hermite(a) => hermite(a),
        Command::MetricCheck(a) => on_space!(a.space, |w| metric_check(&w, a)),
    }
}

fn grid(g: &GridArgs) -> Result<GridSpec, Error> {
    Ok(GridSpec::new(g.grid_half_width, g.grid_dx)?)
}

fn times(t: &TimeArgs) -> Result<Vec<f64>, Error> {
    if t.k_min > t.k_max {
        return Err(Error::usage(format!("k-min {} exceeds k-max {}", t.k_min, t.k_max)));
    }
    Ok(dyadic_grid(t.k_min, t.k_max))
}

fn gap_csv(r: &TangencyReport) -> String {
    let mut s = String::from("t,gap\n");
    for (t, g) in r.t_grid.iter().zip(&r.gaps) {
        writeln!(s, "{t},{g}").unwrap();
    }
    s
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn sampler<W: Workspace>(w: &W, a: &SamplerArgs) -> Result<RegionSampler<W::Point>, Error> {
    let center = w.point_or_origin(a.center.as_deref())?;
    Ok(RegionSampler::new(center, a.radius, a.samples, a.delta, a.seed)?.with_levels(a.levels))
}

fn tangency<W: Workspace>(w: &W, a: &TangencyArgs) -> Result<Outcome, Error> {
    let (fa, fb) = (w.expression(&a.a)?, w.expression(&a.b)?);
    let x = w.point_or_origin(a.x.as_deref())?;
    let report = field_tangency(w.space(), &fa, &fb, &x, &times(&a.times)?)?;
    let json = json!({ "a": fa.name(), "b": fb.name(), "x": w.point_json(&x), "report": to_json(&report) });
    Ok(Outcome::new(json)
        .verdict(report.verdict.as_str())
        .csv(&a.out.csv, gap_csv(&report)))
}

fn euler<W: Workspace>(w: &W, a: &EulerArgs) -> Result<Outcome, Error> {
    let field = w.expression(&a.field)?;
    let x = w.point_or_origin(a.x.as_deref())?;
    let (endpoint, steps, estimate, escaped, trace) = match a.n {
        Some(n) => {
            let coarse = euler_curve(&field, &x, a.t, n)?;
            let fine = euler_curve(&field, &x, a.t, 2 * n)?;
            let d = w.space().distance(&coarse, &fine);
            (fine, n, d, false, vec![(n, d)])
        }
        None => {
            let opts = SolveOptions {
                tol: a.tol,
                n_max: a.n_max,
            };
            let r = solve(w.space(), &field, &x, a.t, opts)?;
            (r.endpoint, r.steps_used, r.error_estimate, r.escaped, r.trace)
        }
    };
    let mut csv = String::from("n,error_estimate\n");
    for (n, e) in &trace {
        writeln!(csv, "{n},{e}").unwrap();
    }
    let converged = a.n.is_some() || (!escaped && estimate <= a.tol);
    let json = json!({
        "field": field.name(),
        "t": a.t,
        "steps_used": steps,
        "error_estimate": estimate,
        "escaped": escaped,
        "endpoint": w.point_json(&endpoint),
        "trace": trace,
    });
    Ok(Outcome::new(json)
        .verdict(if escaped { "ESCAPED" } else if converged { "CONVERGED" } else { "NOT_CONVERGED" })
        .csv(&a.out.csv, csv))
}

fn bracket_values<W: Workspace>(w: &W, a: &BracketArgs) -> Result<Outcome, Error> {
    let (Some(fa), Some(fb)) = (&a.a, &a.b) else {
        return Err(Error::usage("bracket needs --a and --b (or --table true)".into()));
    };
    let br = bracket(&w.expression(fa)?, &w.expression(fb)?)?;
    let x = w.point_or_origin(a.x.as_deref())?;
    let mut rows = Vec::new();
    let mut csv = String::from("t,distance\n");
    for t in times(&a.times)? {
        let p = br.eval(&x, t)?;
        let d = w.space().distance(&p, &x);
        writeln!(csv, "{t},{d}").unwrap();
        rows.push(json!({ "t": t, "distance": d, "point": w.point_json(&p) }));
    }
    let json = json!({ "bracket": br.name(), "leaf_cost": br.leaf_cost(), "x": w.point_json(&x), "rows": rows });
    Ok(Outcome::new(json).csv(&a.out.csv, csv))
}

fn bracket_table(a: &BracketArgs) -> Result<Outcome, Error> {
    if !matches!(SpaceKind::parse(&a.space.space)?, SpaceKind::L2) {
        return Err(Error::usage("the bracket table lives on --space l2".into()));
    }
    let table = bracket_table_check_with(grid(&a.space.grid)?, &times(&a.times)?)?;
    let mut csv = String::from("relation,t,gap\n");
    for row in &table.rows {
        for (t, g) in row.report.t_grid.iter().zip(&row.report.gaps) {
            writeln!(csv, "{},{t},{g}", row.relation).unwrap();
        }
    }
    Ok(Outcome::new(to_json(&table))
        .verdict(if table.pass { "PASS" } else { "FAIL" })
        .csv(&a.out.csv, csv))
}

fn diagnose<W: Workspace>(w: &W, a: &DiagnoseArgs) -> Result<Outcome, Error> {
    let field = w.expression(&a.field)?;
    let other = || -> Result<_, Error> {
        let src = a
            .other
            .as_deref()
            .ok_or_else(|| Error::usage(format!("estimator {} needs --other", a.estimator)))?;
        w.expression(src)
    };
    let s = sampler(w, &a.sampler)?;
    let est = match a.estimator.as_str() {
        "e1" => estimate_e1(w.space(), &field, &s)?,
        "e2" => estimate_e2(w.space(), &field, &s)?,
        "close" => estimate_closeness(w.space(), &field, &other()?, &s)?,
        "transverse" => estimate_transversality(w.space(), &field, &other()?, &s)?,
        "speed" => {
            let radii = parse_floats(&a.radii)?;
            let g = estimate_speed_growth(
                w.space(),
                &field,
                &s.center,
                &radii,
                a.sampler.samples,
                a.sampler.delta,
                a.sampler.seed,
            )?;
            let mut csv = String::from("radius,rho\n");
            for (r, p) in g.radii.iter().zip(&g.rho) {
                writeln!(csv, "{r},{p}").unwrap();
            }
            return Ok(Outcome::new(to_json(&g)).csv(&a.out.csv, csv));
        }
        other => {
            return Err(Error::usage(format!(
                "unknown estimator `{other}` (e1, e2, close, transverse, speed)"
            )))
        }
    };
    let csv = format!("estimator,value,coarse_value\n{},{},{}\n", est.estimator, est.value, est.coarse_value);
    Ok(Outcome::new(to_json(&est))
        .verdict(if est.diverging { "DIVERGING" } else { "FINITE" })
        .csv(&a.out.csv, csv))
}

fn commute<W: Workspace>(w: &W, a: &CommuteArgs) -> Result<Outcome, Error> {
    let (f, g) = (w.flow(&a.f, a.flow_steps)?, w.flow(&a.g, a.flow_steps)?);
    let s = sampler(w, &a.sampler)?;
    let est = commutation_gap(w.space(), &f, &g, &s)?;
    let floor = a.floor * (1.0 + w.space().magnitude(&s.center));
    let json = json!({ "estimate": to_json(&est), "floor": floor });
    let csv = format!("value,coarse_value\n{},{}\n", est.value, est.coarse_value);
    Ok(Outcome::new(json)
        .verdict(if est.value <= floor { "COMMUTING" } else { "NOT_COMMUTING" })
        .csv(&a.out.csv, csv))
}

fn param_grid(half: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(half > 0.0 && step > 0.0 && step <= half) {
        return Err(Error::usage("need 0 < param-step <= param-half".into()));
    }
    let k = (half / step).round() as i64;
    Ok((-k..=k).map(|i| i as f64 * step).collect())
}

fn surface<W: Workspace>(w: &W, a: &SurfaceArgs) -> Result<Outcome, Error> {
    let (f, g) = (w.flow(&a.f, a.flow_steps)?, w.flow(&a.g, a.flow_steps)?);
    let x0 = w.point_or_origin(a.x0.as_deref())?;
    let grid = param_grid(a.param_half, a.param_step)?;
    let surf = sample_integral_surface(w.space(), &f, &g, &x0, &grid, &grid)?;
    let bases = a
        .bases
        .split('|')
        .map(|b| match parse_floats(b)?.as_slice() {
            [s, t] => Ok((*s, *t)),
            _ => Err(Error::usage(format!("base `{b}` is not an s,t pair"))),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let combo = w.expression(&a.combo)?;
    let r = surface_tangency(w.space(), &surf, &combo, &bases, &times(&a.times)?)?;
    let worst = r
        .reports
        .iter()
        .min_by(|p, q| p.order_p.total_cmp(&q.order_p))
        .expect("at least one base");
    let csv = gap_csv(worst);
    Ok(Outcome::new(to_json(&r)).verdict(r.verdict.as_str()).csv(&a.out.csv, csv))
}

fn involutive<W: Workspace>(w: &W, a: &InvolutiveArgs) -> Result<Outcome, Error> {
    let dist = Distribution::new(vec![w.flow(&a.f, a.flow_steps)?, w.flow(&a.g, a.flow_steps)?])?;
    let bases = match &a.bases {
        Some(b) => w.parse_points(b)?,
        None => vec![w.point_or_origin(None)?],
    };
    if !(a.coeff_step > 0.0 && a.coeff_lo <= a.coeff_hi) {
        return Err(Error::usage("need coeff-step > 0 and coeff-lo <= coeff-hi".into()));
    }
    let n = ((a.coeff_hi - a.coeff_lo) / a.coeff_step).round() as usize;
    let coeffs: Vec<f64> = (0..=n).map(|i| a.coeff_lo + i as f64 * a.coeff_step).collect();
    let r = involutivity_check(w.space(), &dist, &bases, &coeffs, &times(&a.times)?)?;
    let mut csv = String::from("base,t,gap\n");
    for p in &r.points {
        for (t, g) in p.report.t_grid.iter().zip(&p.report.gaps) {
            writeln!(csv, "{},{t},{g}", p.base_index).unwrap();
        }
    }
    let verdict = to_json(&r.verdict);
    Ok(Outcome::new(to_json(&r))
        .verdict(verdict.as_str().unwrap_or_default())
        .csv(&a.out.csv, csv))
}

fn nagumo<W: Workspace>(w: &W, a: &NagumoArgs) -> Result<Outcome, Error> {
    let field = w.expression(&a.field)?;
    let set = w.named_set(&a.set, a.set_samples)?;
    let x = w.parse_point(&a.x)?;
    let t_grid = parse_floats(&a.times)?;
    let opts = SolveOptions {
        tol: a.tol,
        n_max: a.n_max,
    };
    let r = nagumo_check(w.space(), &field, a.lambda, &set, &x, &t_grid, opts)?;
    let bound = match r.mode {
        NagumoMode::Ratio => 1.0 + a.slack,
        NagumoMode::Drift => a.slack,
    };
    let mut csv = String::from("t,value\n");
    for (t, v) in r.t_grid.iter().zip(&r.values) {
        writeln!(csv, "{t},{v}").unwrap();
    }
    Ok(Outcome::new(to_json(&r))
        .verdict(if r.max_value <= bound { "BOUNDED" } else { "UNBOUNDED" })
        .csv(&a.out.csv, csv))
}

fn function_csv(f: &GridFunction) -> String {
    let mut buf = Vec::new();
    f.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

fn l2_reach(a: &ReachArgs) -> Result<Outcome, Error> {
    let w = L2Ws::new(grid(&a.grid)?);
    let steps = a
        .steps
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<usize>()
                .map_err(|_| Error::usage(format!("expected a step count, got `{s}`")))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let spec = if a.target == "chi01" {
        ReachSpec::chi01(w.grid(), a.order, steps)
    } else {
        ReachSpec::general(w.function(&a.target)?, a.target.clone(), a.order, steps)
    };
    let r = reach(&spec)?;
    let t = &r.trace;
    let mut csv = String::from("n,gap_oracle,gap_target\n");
    for i in 0..t.n_values.len() {
        writeln!(csv, "{},{},{}", t.n_values[i], t.gap_oracle[i], t.gap_target[i]).unwrap();
    }
    let monotone = t.gap_oracle.windows(2).all(|p| p[1] <= p[0]);
    let json = json!({
        "target": a.target,
        "coefficients": to_json(&r.coefficients),
        "trace": to_json(t),
        "oracle_target_gap": r.oracle_target_gap,
    });
    let mut out = Outcome::new(json)
        .verdict(if monotone { "MONOTONE" } else { "NOT_MONOTONE" })
        .csv(&a.out.csv, csv);
    out = out
        .csv(&a.target_csv, function_csv(&r.target))
        .csv(&a.output_csv, function_csv(&r.output))
        .csv(&a.oracle_csv, function_csv(&r.oracle));
    Ok(out)
}

fn hermite(a: &HermiteArgs) -> Result<Outcome, Error> {
    let w = L2Ws::new(grid(&a.grid)?);
    let closed = coefficients_chi01(a.order);
    let chi = w.function("chi01")?;
    let quad = coefficients_general(&chi, a.order, "chi01")?;
    let spec = w.grid();
    let gram: Vec<Vec<f64>> = (0..=a.order)
        .map(|m| (0..=a.order).map(|n| hermite_orthogonality(m, n, &spec)).collect())
        .collect();
    let mut csv = String::from("n,closed_form,quadrature\n");
    for n in 0..=a.order {
        writeln!(csv, "{n},{},{}", closed.values[n], quad.values[n]).unwrap();
    }
    let json = json!({
        "closed_form": to_json(&closed),
        "quadrature": to_json(&quad),
        "orthogonality": gram,
    });
    Ok(Outcome::new(json).csv(&a.out.csv, csv))
}

fn metric_check<W: Workspace>(w: &W, a: &MetricCheckArgs) -> Result<Outcome, Error> {
    let r = verify_metric_axioms(w.space(), a.triples, a.seed)?;
    let csv = format!(
        "worst_triangle,worst_symmetry,worst_identity,separation_failures\n{},{},{},{}\n",
        r.worst_triangle, r.worst_symmetry, r.worst_identity, r.separation_failures
    );
    let mut out = Outcome::new(to_json(&r))
        .verdict(if r.pass { "PASS" } else { "FAIL" })
        .csv(&a.out.csv, csv);
    out.required = Some("PASS");
    Ok(out)
}
