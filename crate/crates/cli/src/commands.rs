use std::cell::Cell;
use std::time::{SystemTime, UNIX_EPOCH};

use fptlab::diffusion::{
    check_growth_condition, daniels_f, daniels_fpt_density, daniels_value, kendall_fpt_density,
    linear_fpt_density, linear_noncross_prob, meander_endpoint_density, meander_laplace,
    meander_transition_density,
};
use fptlab::fpt::{
    bridge_fpt_density, empirical_density, fpt_density_from_f, fpt_density_via_regression, DensityCurve,
    DensityMethod, RegressionDensityOptions,
};
use fptlab::gateaux::{
    bm_linear_gateaux_closed_lhs, bm_linear_gateaux_quadrature_rhs, fpt_distribution_bm_linear,
    gateaux_derivative_with, FptRepresentation, GateauxOptions, GateauxResult,
};
use fptlab::sim::{
    default_offsets, estimate_cond_noncross_prob_with, estimate_f_regression, meander_endpoint, sample_fpt,
    FEstimate, PathGrid, RegressionOptions, SimOptions,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::envelope::{num, Entry, Report};
use crate::error::CliError;
use crate::presets::{parse_list, BoundarySpec, GridSpec, ModelSpec};

type Res<T> = Result<T, CliError>;
type McTag = (usize, u64, f64);

/// Shared flags plus the seed, drawn from the clock on first use when not
/// given.
pub struct Ctx {
    pub common: Common,
    seed: Cell<Option<u64>>,
}

impl Ctx {
    pub fn new(common: Common) -> Self {
        let seed = Cell::new(common.seed);
        Self { common, seed }
    }

    pub fn seed(&self) -> u64 {
        if let Some(s) = self.seed.get() {
            return s;
        }
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
        let s = (nanos as u64) ^ ((nanos >> 64) as u64) ^ u64::from(std::process::id());
        self.seed.set(Some(s));
        s
    }

    pub fn used_seed(&self) -> Option<u64> {
        self.seed.get()
    }

    fn n_or(&self, default: usize) -> Res<usize> {
        let n = self.common.n.unwrap_or(default);
        if n == 0 {
            return Err(CliError::invalid("--n must be positive"));
        }
        Ok(n)
    }

    fn grid_or(&self, step: f64, fine: Option<(f64, f64)>) -> Res<GridSpec> {
        let c = &self.common;
        if c.step.is_none() && c.step2.is_none() && c.split.is_none() {
            return Ok(GridSpec { step, fine });
        }
        GridSpec::new(c.step.unwrap_or(step), c.step2, c.split)
    }
}

fn model(arg: &ModelArg) -> Res<ModelSpec> {
    ModelSpec::parse(&arg.model)
}

fn boundary_spec(b: &BoundaryArgs) -> Res<Option<BoundarySpec>> {
    BoundarySpec::from_flags(b.linear.as_deref(), b.daniels.as_deref(), b.boundary_file.as_deref())
}

fn required_boundary(b: &BoundaryArgs) -> Res<BoundarySpec> {
    boundary_spec(b)?.ok_or_else(|| CliError::usage("a boundary is required: --linear, --daniels or --boundary-file"))
}

fn check_positive(v: f64, what: &str) -> Res<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(format!("{what} must be positive, got {v}")))
    }
}

fn grid_detail(grid: &PathGrid, gs: &GridSpec) -> Value {
    json!({
        "steps": grid.n_steps(),
        "step": gs.step,
        "fine_step": gs.fine.map(|f| f.0),
        "split": gs.fine.map(|f| f.1),
    })
}

/// `f(t, x)` in closed form, where one is known for the preset.
fn exact_f(m: ModelSpec, b: &BoundarySpec, t: f64, x: f64) -> Res<Option<f64>> {
    Ok(match (b, m.constant_drift()) {
        // bridge laws do not see a constant drift
        (BoundarySpec::Linear { a, .. }, Some(_)) => Some(2.0 * (a - x) / t),
        (BoundarySpec::Daniels { delta, k1, k2 }, Some(0.0)) => Some(daniels_f(*delta, *k1, *k2, t, x)?),
        _ => None,
    })
}

/// Closed-form first-passage density of the preset, where one is known.
fn exact_density(m: ModelSpec, b: &BoundarySpec, x: f64) -> Option<Box<dyn Fn(f64) -> Res<f64>>> {
    match (b.clone(), m.constant_drift()) {
        (BoundarySpec::Linear { a, b }, Some(c)) => Some(Box::new(move |t| Ok(linear_fpt_density(a - x, b - c, t)?))),
        (BoundarySpec::Daniels { delta, k1, k2 }, Some(0.0)) => {
            let kernel = m.kernel();
            Some(Box::new(move |t| {
                let f = daniels_f(delta, k1, k2, t, x)?;
                Ok(fpt_density_from_f(f, kernel(t, x, daniels_value(delta, k1, k2, t)))?)
            }))
        }
        _ => None,
    }
}

pub fn cond_prob(a: &CondProbArgs, ctx: &Ctx) -> Res<Report> {
    let m = model(&a.model)?;
    let bspec = required_boundary(&a.boundary)?;
    check_positive(a.t, "--t")?;
    let boundary = bspec.build(a.t)?;
    let gspec = ctx.grid_or(1e-3, None)?;
    let grid = gspec.build(a.t)?;
    let n = ctx.n_or(10_000)?;
    let seed = ctx.seed();
    let opts = SimOptions { bridge_correction: a.bridge_correction, ..SimOptions::default() };
    let est = estimate_cond_noncross_prob_with(&m.transformed(), &boundary, a.t, a.x, a.z, &grid, n, seed, 0, opts)?;
    let mut results = vec![Entry::mc("cond_noncross_prob", est.value, est.stderr, est.n, seed, gspec.step)];
    if let (BoundarySpec::Linear { a: g0, b }, Some(_)) = (&bspec, m.constant_drift()) {
        let exact = linear_noncross_prob(a.x, *g0, g0 + b * a.t, a.t, a.z)?;
        results.push(Entry::closed("cond_noncross_prob_exact", exact));
    }
    Ok(Report {
        results,
        detail: json!({ "excluded": est.excluded, "grid": grid_detail(&grid, &gspec) }),
        csv: None,
    })
}

fn regression_csv(f: &FEstimate) -> String {
    let mut out = String::from("offset,value,stderr\n");
    for p in &f.points {
        out.push_str(&format!("{},{},{}\n", num(p.offset), num(p.estimate.value), num(p.estimate.stderr)));
    }
    out
}

pub fn estimate_f(a: &EstimateFArgs, ctx: &Ctx) -> Res<Report> {
    let m = model(&a.model)?;
    let bspec = required_boundary(&a.boundary)?;
    check_positive(a.t, "--t")?;
    check_positive(a.window, "--window")?;
    if a.offsets == 0 {
        return Err(CliError::invalid("--offsets must be positive"));
    }
    let boundary = bspec.build(a.t)?;
    let gspec = ctx.grid_or(1e-4, Some((1e-5, 0.99)))?;
    let grid = gspec.build(a.t)?;
    let n = ctx.n_or(10_000)?;
    let seed = ctx.seed();
    let offsets = default_offsets(a.window, a.offsets);
    let opts = RegressionOptions {
        through_origin: !a.free_intercept,
        sim: SimOptions { bridge_correction: a.bridge_correction, ..SimOptions::default() },
    };
    let f = estimate_f_regression(&m.transformed(), &boundary, a.t, a.x, a.window, &offsets, n, &grid, seed, opts)?;
    let total = n * offsets.len();
    let step = gspec.step;
    let p = m.kernel()(a.t, a.x, boundary.value(a.t));

    let mut results = vec![
        Entry::mc("f", f.slope, f.slope_stderr, total, seed, step),
        Entry::mc("fpt_density", 0.5 * f.slope.max(0.0) * p, 0.5 * f.slope_stderr * p, total, seed, step),
    ];
    if let Some(fx) = exact_f(m, &bspec, a.t, a.x)? {
        results.push(Entry::closed("f_exact", fx));
        results.push(Entry::closed("fpt_density_exact", fpt_density_from_f(fx, p)?));
    }
    results.push(Entry::closed("transition_density", p));
    let points: Vec<Value> = f
        .points
        .iter()
        .map(|pt| {
            json!({
                "offset": pt.offset,
                "value": pt.estimate.value,
                "stderr": pt.estimate.stderr,
                "excluded": pt.estimate.excluded,
            })
        })
        .collect();
    Ok(Report {
        results,
        detail: json!({
            "boundary_at_t": boundary.value(a.t),
            "through_origin": f.through_origin,
            "intercept": f.intercept,
            "n_per_offset": n,
            "points": points,
            "grid": grid_detail(&grid, &gspec),
        }),
        csv: Some(regression_csv(&f)),
    })
}

fn eval_times(t: &TimesArg) -> Res<Vec<f64>> {
    match &t.ts {
        Some(s) => {
            let v = parse_list(s, 0, "--ts")?;
            for &ti in &v {
                check_positive(ti, "evaluation time")?;
            }
            Ok(v)
        }
        None => {
            check_positive(t.t_max, "--t-max")?;
            if t.points == 0 {
                return Err(CliError::invalid("--points must be positive"));
            }
            Ok((1..=t.points).map(|k| t.t_max * k as f64 / t.points as f64).collect())
        }
    }
}

fn curve_entries(name: &str, curve: &DensityCurve, n: usize, seed: u64, step: f64) -> Vec<Entry> {
    (0..curve.ts.len())
        .map(|i| Entry::mc(name, curve.values[i], curve.stderrs[i], n, seed, step).at(curve.ts[i]))
        .collect()
}

fn closed_curve(name: &str, ts: &[f64], f: &dyn Fn(f64) -> Res<f64>) -> Res<(DensityCurve, Vec<Entry>)> {
    let values = ts.iter().map(|&t| f(t)).collect::<Res<Vec<_>>>()?;
    let entries = ts.iter().zip(&values).map(|(&t, &v)| Entry::closed(name, v).at(t)).collect();
    Ok((DensityCurve::new(ts.to_vec(), values, vec![0.0; ts.len()], "closed_form")?, entries))
}

pub fn fpt_density(a: &FptDensityArgs, ctx: &Ctx) -> Res<Report> {
    let m = model(&a.model)?;
    let bspec = required_boundary(&a.boundary)?;
    let ts = eval_times(&a.times)?;
    let horizon = ts.iter().copied().fold(0.0, f64::max);
    let boundary = bspec.build(horizon)?;
    let exact = exact_density(m, &bspec, a.x);

    let (curve, mut results, detail) = match a.method {
        DensityMethodArg::Closed => {
            let f = exact.as_ref().ok_or_else(|| {
                CliError::invalid("no closed form for this model and boundary; use --method regression or histogram")
            })?;
            let (curve, entries) = closed_curve("fpt_density", &ts, f.as_ref())?;
            (curve, entries, json!({}))
        }
        DensityMethodArg::Regression => {
            check_positive(a.window, "--window")?;
            if a.offsets == 0 {
                return Err(CliError::invalid("--offsets must be positive"));
            }
            let gspec = ctx.grid_or(1e-3, None)?;
            let n = ctx.n_or(10_000)?;
            let seed = ctx.seed();
            let opts = RegressionDensityOptions {
                window: a.window,
                offsets: default_offsets(a.window, a.offsets),
                n_per_offset: n,
                regression: RegressionOptions::default(),
            };
            let kernel = m.kernel();
            let (curve, points) = fpt_density_via_regression(
                &m.transformed(),
                &boundary,
                a.x,
                &ts,
                &kernel,
                |t| gspec.build(t).map_err(|e| fptlab::Error::InvalidInput(e.to_string())),
                &opts,
                seed,
            )?;
            let entries = curve_entries("fpt_density", &curve, n * a.offsets, seed, gspec.step);
            let f: Vec<Value> = points
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    json!({ "t": p.t, "f": p.f.slope, "f_stderr": p.f.slope_stderr, "seed": seed.wrapping_add(k as u64) })
                })
                .collect();
            (curve, entries, json!({ "f": f }))
        }
        DensityMethodArg::Histogram | DensityMethodArg::Kde => {
            let gspec = ctx.grid_or(1e-3, None)?;
            let grid = gspec.build(horizon)?;
            let n = ctx.n_or(100_000)?;
            let seed = ctx.seed();
            let dist = sample_fpt(&m.transformed(), &boundary, a.x, &grid, n, seed)?;
            let method = if a.method == DensityMethodArg::Histogram {
                DensityMethod::Histogram { bins: a.bins }
            } else {
                DensityMethod::Kernel { bandwidth: a.bandwidth, points: a.times.points }
            };
            let curve = empirical_density(&dist, method)?;
            let entries = curve_entries("fpt_density", &curve, n, seed, gspec.step);
            let detail = json!({
                "crossings": dist.samples().len(),
                "censored": dist.censored(),
                "excluded": dist.excluded(),
                "crossing_fraction": dist.crossing_fraction(),
                "grid": grid_detail(&grid, &gspec),
            });
            (curve, entries, detail)
        }
    };
    if a.method != DensityMethodArg::Closed {
        if let Some(f) = &exact {
            results.extend(closed_curve("fpt_density_exact", &curve.ts, f.as_ref())?.1);
        }
    }
    Ok(Report { results, detail, csv: Some(curve.to_csv()) })
}

pub fn bridge_fpt(a: &BridgeFptArgs, ctx: &Ctx) -> Res<Report> {
    let m = model(&a.model)?;
    let bspec = required_boundary(&a.boundary)?;
    let big_t = a.pin_time;
    check_positive(big_t, "--pin-time")?;
    let ts = match &a.ts {
        Some(s) => parse_list(s, 0, "--ts")?,
        None => {
            if a.points == 0 {
                return Err(CliError::invalid("--points must be positive"));
            }
            (1..=a.points).map(|k| big_t * k as f64 / (a.points + 1) as f64).collect()
        }
    };
    if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t < big_t)) {
        return Err(CliError::invalid(format!("evaluation time {t} outside (0, {big_t})")));
    }
    let boundary = bspec.build(big_t)?;
    let kernel = m.kernel();
    let p_end = kernel(big_t, a.x, a.y);
    let exact = exact_density(m, &bspec, a.x);
    let use_closed = a.method == BridgeMethodArg::Auto && exact.is_some();

    // (value, stderr) per time, plus (n, seed, step) when simulated
    let (free, mc): (Vec<(f64, f64)>, Option<McTag>) = if use_closed {
        let f = exact.as_ref().expect("checked");
        (ts.iter().map(|&t| f(t).map(|v| (v, 0.0))).collect::<Res<_>>()?, None)
    } else {
        check_positive(a.window, "--window")?;
        if a.offsets == 0 {
            return Err(CliError::invalid("--offsets must be positive"));
        }
        let gspec = ctx.grid_or(1e-3, None)?;
        let n = ctx.n_or(10_000)?;
        let seed = ctx.seed();
        let opts = RegressionDensityOptions {
            window: a.window,
            offsets: default_offsets(a.window, a.offsets),
            n_per_offset: n,
            regression: RegressionOptions::default(),
        };
        let (curve, _) = fpt_density_via_regression(
            &m.transformed(),
            &boundary,
            a.x,
            &ts,
            &kernel,
            |t| gspec.build(t).map_err(|e| fptlab::Error::InvalidInput(e.to_string())),
            &opts,
            seed,
        )?;
        (curve.values.iter().copied().zip(curve.stderrs.iter().copied()).collect(), Some((n * a.offsets, seed, gspec.step)))
    };

    let mut values = Vec::with_capacity(ts.len());
    let mut stderrs = Vec::with_capacity(ts.len());
    let mut results = Vec::with_capacity(ts.len());
    for (&t, &(v, se)) in ts.iter().zip(&free) {
        let p_rest = kernel(big_t - t, boundary.value(t), a.y);
        let d = bridge_fpt_density(v, p_rest, p_end)?;
        let ratio = p_rest / p_end;
        values.push(d);
        stderrs.push(se * ratio);
        results.push(match mc {
            None => Entry::closed("bridge_fpt_density", d).at(t),
            Some((n, seed, step)) => Entry::mc("bridge_fpt_density", d, se * ratio, n, seed, step).at(t),
        });
    }
    let curve = DensityCurve::new(ts, values, stderrs, if mc.is_some() { "monte_carlo" } else { "closed_form" })?;
    Ok(Report {
        results,
        detail: json!({ "pin_time": big_t, "pin_level": a.y, "end_density": p_end }),
        csv: Some(curve.to_csv()),
    })
}

pub fn daniels(a: &DanielsArgs) -> Res<Report> {
    check_positive(a.t, "--t")?;
    let g = daniels_value(a.delta, a.k1, a.k2, a.t);
    let f = daniels_f(a.delta, a.k1, a.k2, a.t, a.x)?;
    let q = ModelSpec::Brownian.kernel()(a.t, a.x, g);
    let via_f = fpt_density_from_f(f, q)?;
    let mut results = vec![
        Entry::closed("boundary", g),
        Entry::closed("f", f),
        Entry::closed("transition_density", q),
        Entry::closed("fpt_density", via_f),
    ];
    let mut detail = json!({ "boundary_at_0": daniels_value(a.delta, a.k1, a.k2, 0.0) });
    if a.x == 0.0 {
        let direct = daniels_fpt_density(a.delta, a.k1, a.k2, a.t)?;
        results.push(Entry::closed("fpt_density_direct", direct));
        detail["identity_gap"] = json!((direct - via_f).abs());
    }
    Ok(Report { results, detail, csv: None })
}

pub fn kendall(a: &KendallArgs) -> Res<Report> {
    let m = model(&a.model)?;
    if m.constant_drift().is_none() {
        return Err(CliError::invalid("Kendall's identity needs a Levy process: use bm or drift:c"));
    }
    let kernel = m.kernel();
    let v = kendall_fpt_density(a.y, a.x, a.t, |t, x, z| kernel(t, x, z))?;
    Ok(Report {
        results: vec![Entry::closed("fpt_density", v)],
        detail: json!({ "transition_density": kernel(a.t, a.x, a.y) }),
        csv: None,
    })
}

pub fn meander_density(a: &MeanderArgs, ctx: &Ctx) -> Res<Report> {
    if a.endpoint.is_none() && a.laplace.is_none() && a.pinned.is_none() && !a.mc {
        return Err(CliError::usage("give at least one of --endpoint, --laplace, --pinned or --mc"));
    }
    let mut results = Vec::new();
    let mut detail = json!({});
    if let Some(y) = a.endpoint {
        results.push(Entry::closed("endpoint_density", meander_endpoint_density(y)));
    }
    let lambda = a.laplace.unwrap_or(1.0);
    if a.laplace.is_some() || a.mc {
        results.push(Entry::closed("laplace", meander_laplace(lambda)));
    }
    if let Some(s) = &a.pinned {
        let v = parse_list(s, 5, "--pinned")?;
        results.push(Entry::closed("pinned_transition_density", meander_transition_density(v[0], v[1], v[2], v[3], v[4])?));
    }
    if a.mc {
        let n = ctx.n_or(100_000)?;
        if n < 2 {
            return Err(CliError::invalid("--n must be at least 2"));
        }
        let seed = ctx.seed();
        let mut ys: Vec<f64> = (0..n as u64).into_par_iter().map(|i| meander_endpoint(seed, i)).collect();
        let w: Vec<f64> = ys.iter().map(|&y| (lambda * y).exp()).collect();
        let mean = w.iter().sum::<f64>() / n as f64;
        let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        ys.sort_by(f64::total_cmp);
        let ks = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let c = -(-0.5 * y * y).exp_m1();
                (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
            })
            .fold(0.0, f64::max);
        // endpoints are drawn exactly: a single step of length 1
        results.push(Entry::mc("laplace_mc", mean, (var / n as f64).sqrt(), n, seed, 1.0));
        detail["ks_distance"] = json!(ks);
        detail["ks_critical_1pct"] = json!(1.63 / (n as f64).sqrt());
    }
    Ok(Report { results, detail, csv: None })
}

fn gateaux_detail(r: &GateauxResult) -> Value {
    json!({
        "tolerance": r.tolerance(),
        "meander_stderr": r.meander_stderr,
        "fpt_stderr": r.fpt_stderr,
        "quadrature_error": r.quadrature_error,
        "t_min": r.t_min_truncation,
        "truncation_bound": r.truncation_bound,
        "excluded": r.excluded,
        "nodes": r.nodes,
        "warnings": r.warnings,
    })
}

pub fn gateaux(a: &GateauxArgs, ctx: &Ctx) -> Res<Report> {
    let m = model(&a.model)?;
    let gspec_b = required_boundary(&a.boundary)?;
    let hspec = BoundarySpec::from_flags(a.h_linear.as_deref(), None, a.h_file.as_deref())?
        .ok_or_else(|| CliError::usage("a direction is required: --h-linear or --h-file"))?;
    let g = gspec_b.build(1.0)?;
    let h = hspec.build(1.0)?;
    let tm = m.transformed();
    let seed = ctx.seed();

    let closed = match (&gspec_b, m.constant_drift()) {
        (BoundarySpec::Linear { a, b }, Some(c)) => Some((*a, b - c)),
        _ => None,
    };
    let sampled = match (a.fpt, closed) {
        (FptLawArg::Closed, None) => {
            return Err(CliError::invalid("no closed-form crossing law for this model and boundary; use --fpt sample"))
        }
        (FptLawArg::Sample, _) | (FptLawArg::Auto, None) => true,
        _ => false,
    };
    let fpt = if sampled {
        check_positive(a.fpt_step, "--fpt-step")?;
        let grid = PathGrid::with_step(1.0, a.fpt_step)?;
        sample_fpt(&tm, &g, 0.0, &grid, a.fpt_n, seed.wrapping_add(1))?
    } else {
        let (a1, b1) = closed.expect("checked");
        fpt_distribution_bm_linear(a1, b1, FptRepresentation::ClosedForm)?
    };

    let gs = ctx.grid_or(1e-3, None)?;
    let grid = gs.build(1.0)?;
    let n = ctx.n_or(100_000)?;
    let opts = GateauxOptions { t_min: a.t_min, ..GateauxOptions::default() };
    let r = gateaux_derivative_with(&tm, &g, &h, &fpt, n, &grid, seed, opts)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    let mut results = vec![Entry::mc("gateaux", r.value, r.mc_stderr, n, seed, gs.step)];
    let mut detail = gateaux_detail(&r);
    detail["crossing_law"] = json!(if sampled { "euler_samples" } else { "closed_form" });
    if sampled {
        detail["crossing_samples"] = json!({ "n": a.fpt_n, "seed": seed.wrapping_add(1), "grid_step": a.fpt_step });
    }
    if let (Some((a1, b1)), BoundarySpec::Linear { a: a2, b: b2 }) = (closed, &hspec) {
        let exact = bm_linear_gateaux_closed_lhs(a1, *a2, b1, *b2)?;
        results.push(Entry::closed("gateaux_exact", exact));
        detail["within_tolerance"] = json!((r.value - exact).abs() <= r.tolerance());
    }
    Ok(Report { results, detail, csv: None })
}

pub fn verify_example1(a: &VerifyExample1Args, ctx: &Ctx) -> Res<Report> {
    check_positive(a.tol, "--tol")?;
    let lhs = bm_linear_gateaux_closed_lhs(a.a1, a.a2, a.b1, a.b2)?;
    let rhs = bm_linear_gateaux_quadrature_rhs(a.a1, a.a2, a.b1, a.b2, a.tol)?;
    let mut results = vec![
        Entry::closed("lhs", lhs),
        Entry::quadrature("rhs", rhs.value, rhs.abs_error),
        Entry::quadrature("abs_diff", (lhs - rhs.value).abs(), rhs.abs_error),
    ];
    let mut detail = json!({ "quadrature_evaluations": rhs.evaluations });
    if a.mc {
        let gs = ctx.grid_or(1e-3, None)?;
        let grid = gs.build(1.0)?;
        let n = ctx.n_or(100_000)?;
        let seed = ctx.seed();
        let tm = ModelSpec::Brownian.transformed();
        let g = BoundarySpec::Linear { a: a.a1, b: a.b1 }.build(1.0)?;
        let h = BoundarySpec::Linear { a: a.a2, b: a.b2 }.build(1.0)?;
        let fpt = fpt_distribution_bm_linear(a.a1, a.b1, FptRepresentation::ClosedForm)?;
        let r = gateaux_derivative_with(&tm, &g, &h, &fpt, n, &grid, seed, GateauxOptions::default())?;
        results.push(Entry::mc("gateaux_mc", r.value, r.mc_stderr, n, seed, gs.step));
        let mut d = gateaux_detail(&r);
        d["within_tolerance"] = json!((r.value - lhs).abs() <= r.tolerance());
        detail["monte_carlo"] = d;
    }
    Ok(Report { results, detail, csv: None })
}

pub fn verify_example2(a: &VerifyExample2Args, ctx: &Ctx) -> Res<Report> {
    let args = EstimateFArgs {
        model: ModelArg { model: "bm".into() },
        boundary: BoundaryArgs { daniels: Some(format!("{},{},{}", a.delta, a.k1, a.k2)), ..BoundaryArgs::default() },
        t: a.t,
        x: a.x,
        window: a.window,
        offsets: a.offsets,
        free_intercept: a.free_intercept,
        bridge_correction: false,
    };
    let mut report = estimate_f(&args, ctx)?;
    if a.x == 0.0 {
        report.results.push(Entry::closed("fpt_density_direct", daniels_fpt_density(a.delta, a.k1, a.k2, a.t)?));
    }
    Ok(report)
}

pub fn check_conditions(a: &CheckConditionsArgs) -> Res<Report> {
    let m = model(&a.model)?;
    let d = check_growth_condition(&m.transformed(), a.t, a.y_lo, a.y_hi, a.scan_points)?;
    let mut results = vec![
        Entry::closed("min_potential", d.min_value),
        Entry::closed("limsup_ratio", d.limsup_ratio),
        Entry::closed("threshold_fpt", d.threshold_fpt),
        Entry::closed("threshold_gateaux", d.threshold_gateaux),
    ];
    let mut detail = json!({
        "passes_fpt": d.passes_fpt,
        "passes_gateaux": d.passes_gateaux,
        "tail_points": d.tail_points,
        "scan": [a.y_lo, a.y_hi, a.scan_points],
    });
    if let Some(bspec) = boundary_spec(&a.boundary)? {
        check_positive(a.t, "--t")?;
        let b = bspec.build(a.t)?;
        let (kp, km) = b.lipschitz();
        results.push(Entry::closed("boundary_at_0", b.value(0.0)));
        results.push(Entry::closed("lipschitz_plus", kp));
        results.push(Entry::closed("lipschitz_minus", km));
        detail["starts_below_boundary"] = json!(b.value(0.0) > 0.0);
    }
    Ok(Report { results, detail, csv: None })
}
