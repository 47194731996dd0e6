//! Dispatch of scenarios to the library operations.

use std::f64::consts::PI;
use std::time::Instant;

use polyapprox::approx::{self, ApproxOptions, CONTAINMENT_TOL};
use polyapprox::net::{self, DEFAULT_OVERSAMPLE};
use polyapprox::shape::{self, constants};
use polyapprox::volumes::{
    self, eval_side, exact_intrinsic_volumes, intrinsic_volumes, side_polynomial, IntrinsicVolumeVector,
    VolumeOptions, DEFAULT_KUBOTA_SAMPLES,
};
use polyapprox::{ConvexBody, Error};
use serde_json::{json, Value};

use crate::report::{Recorder, Report};
use crate::scenario::{Operation, Scenario};

const DEFAULT_CAP_TRIALS: usize = 50;
const DEFAULT_CAP_SAMPLES: usize = 20_000;
const CONTAINMENT_DIRS: usize = 10_000;

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub samples_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: None, samples_scale: 1.0 }
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    body: ConvexBody,
    seed: u64,
    scale: f64,
}

impl Ctx<'_> {
    fn scaled(&self, n: usize) -> usize {
        ((n as f64 * self.scale).round() as usize).max(1)
    }

    fn samples(&self, default: usize) -> usize {
        self.scaled(self.scenario.params.samples.unwrap_or(default))
    }

    fn volume_options(&self) -> VolumeOptions {
        VolumeOptions { samples: self.samples(DEFAULT_KUBOTA_SAMPLES), ..VolumeOptions::with_seed(self.seed) }
    }

    fn approx_options(&self) -> ApproxOptions {
        ApproxOptions {
            oversample: self.scenario.params.oversample.unwrap_or(DEFAULT_OVERSAMPLE),
            volumes: self.volume_options(),
            containment_dirs: self.scaled(CONTAINMENT_DIRS),
            ..ApproxOptions::with_seed(self.seed)
        }
    }

    fn volumes(&self) -> Result<IntrinsicVolumeVector, Error> {
        intrinsic_volumes(&self.body, &self.volume_options())
    }
}

pub fn run_scenario(scenario: &Scenario, cfg: &RunConfig) -> Report {
    let start = Instant::now();
    let seed = cfg.seed.unwrap_or(scenario.seed);
    let mut rec = Recorder::new(seed, scenario.params.bound_scale.unwrap_or(1.0));
    let outcome = ConvexBody::from_spec(&scenario.body).and_then(|body| {
        let ctx = Ctx { scenario, body, seed, scale: cfg.samples_scale };
        dispatch(&ctx, &mut rec)
    });
    let (details, error) = match outcome {
        Ok(v) => (v, None),
        Err(e) => (Value::Null, Some(e.to_string())),
    };
    let passed = error.is_none() && rec.checks.iter().all(|c| c.pass);
    Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: scenario.clone(),
        seed,
        samples_scale: cfg.samples_scale,
        results: rec.checks,
        details,
        error,
        passed,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn dispatch(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    match ctx.scenario.operation {
        Operation::Volumes => run_volumes(ctx, rec),
        Operation::Net => run_net(ctx, rec),
        Operation::Caps => run_caps(ctx, rec),
        Operation::ApproxEps => run_approx_eps(ctx, rec),
        Operation::ApproxN => run_approx_n(ctx, rec),
        Operation::ApproxScaled => run_approx_scaled(ctx, rec),
        Operation::Shape => run_shape(ctx, rec),
        Operation::Certificate => run_certificate(ctx, rec),
        Operation::Sweep => run_sweep(ctx, rec),
    }
}

fn stderr_of(v: &IntrinsicVolumeVector, k: usize) -> Option<f64> {
    (!v.values[k].is_exact()).then(|| v.stderr(k))
}

fn run_volumes(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let d = ctx.body.dim();
    let v = ctx.volumes()?;
    for k in 0..=d {
        rec.above(format!("V_{k}"), v.get(k), 0.0, false, stderr_of(&v, k));
    }
    // closed forms, where they exist, against the projection estimator
    if let Ok(exact) = exact_intrinsic_volumes(&ctx.body) {
        for k in 1..d {
            let (est, se) = volumes::kubota_with(&ctx.body, k, &ctx.volume_options())?;
            let want = exact.get(k);
            let slack = 4.0 * se + 1e-9 * want.abs().max(1.0);
            rec.between(format!("V_{k} projection estimate"), est, want - slack, want + slack, Some(se));
        }
    }
    let side = eval_side(&side_polynomial(&v), 1.0)?;
    let outer = v.ball_sum(1.0);
    rec.info(format!("V_{}(K + B) from p(1)", d - 1), side, stderr_of(&outer, d - 1));
    Ok(to_json(&v))
}

fn run_net(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let d = ctx.body.dim();
    let table = constants(d)?;
    let v = ctx.volumes()?;
    let oversample = ctx.scenario.params.oversample.unwrap_or(DEFAULT_OVERSAMPLE);
    let mut out = Vec::new();
    for (k, &delta) in ctx.scenario.params.deltas.iter().enumerate() {
        let net = net::boundary_net(&ctx.body, delta, oversample, ctx.seed.wrapping_add(k as u64))?;
        let card = net::net_cardinality_report(&net, &v, &table);
        rec.between(format!("|S| at delta={delta}"), card.count as f64, card.lower, card.upper, None);
        if let Some(m) = net.min_center_distance {
            rec.above(format!("min center distance at delta={delta}"), m, delta, true, None);
        }
        rec.below(format!("covering radius at delta={delta}"), net.covering_radius, delta, false, None);
        rec.below(format!("candidate gap at delta={delta}"), net.density_radius, delta / 10.0, false, None);
        out.push(json!({ "delta": delta, "cardinality": card, "candidates": net.candidate_count }));
    }
    Ok(Value::Array(out))
}

fn run_caps(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let p = &ctx.scenario.params;
    let trials = p.trials.unwrap_or(DEFAULT_CAP_TRIALS);
    let checks = net::cap_bound_report(&ctx.body, &p.deltas, trials, ctx.samples(DEFAULT_CAP_SAMPLES), ctx.seed)?;
    for (t, c) in checks.iter().enumerate() {
        let slack = 4.0 * c.stderr;
        rec.between(format!("cap {t} at delta={}", c.delta), c.value, c.lower - slack, c.upper + slack, Some(c.stderr));
    }
    Ok(to_json(&checks))
}

fn containment(rec: &mut Recorder, label: &str, r: &approx::ApproxResult) {
    rec.above(format!("containment slack {label}"), r.containment_slack, -CONTAINMENT_TOL, false, None);
}

fn run_approx_eps(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let opts = ctx.approx_options();
    let v = intrinsic_volumes(&ctx.body, &opts.volumes)?;
    let mut out = Vec::new();
    for &eps in &ctx.scenario.params.eps {
        let r = approx::approximate_eps_with(&ctx.body, eps, &v, &opts)?;
        let label = format!("at eps={eps}");
        rec.below(format!("d_H {label}"), r.d_h, eps, true, None);
        rec.below(format!("facets {label}"), r.facet_count as f64, r.bound_facets, false, None);
        containment(rec, &label, &r);
        out.push(to_json(&r));
    }
    Ok(Value::Array(out))
}

fn run_approx_n(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let opts = ctx.approx_options();
    let v = intrinsic_volumes(&ctx.body, &opts.volumes)?;
    let mut out = Vec::new();
    for &n in &ctx.scenario.params.n {
        let r = approx::approximate_n_with(&ctx.body, n, &v, &opts)?;
        let label = format!("at n={n}");
        rec.info(format!("eps target {label}"), r.eps_target, None);
        rec.below(format!("d_H {label}"), r.d_h, r.bound_d_h, true, None);
        rec.below(format!("facets {label}"), r.facet_count as f64, n as f64, false, None);
        rec.info(format!("c1 {label}"), r.c1, None);
        containment(rec, &label, &r);
        out.push(to_json(&r));
    }
    Ok(Value::Array(out))
}

fn run_approx_scaled(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let opts = ctx.approx_options();
    let mut out = Vec::new();
    for &n in &ctx.scenario.params.n {
        let r = approx::approximate_scaled(&ctx.body, n, &opts)?;
        let label = format!("at n={n}");
        rec.info(format!("scale {label}"), r.scale, None);
        rec.below(format!("d_H {label}"), r.d_h, r.bound_d_h, true, None);
        rec.below(format!("facets {label}"), r.facet_count as f64, n as f64, false, None);
        rec.info(format!("c1 {label}"), r.c1, None);
        containment(rec, &label, &r);
        out.push(to_json(&r));
    }
    Ok(Value::Array(out))
}

fn run_shape(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let d = ctx.body.dim();
    let table = constants(d)?;
    let v = ctx.volumes()?;
    let mut ls = ctx.scenario.params.l.clone();
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    let factors = ls.iter().map(|&l| shape::shape_factor(&v, l, &table)).collect::<Result<Vec<_>, _>>()?;
    // the extremes over d=3 bodies: segments below, balls above
    let extremes = d == 3 && !matches!(ctx.body.kind_name(), "ball" | "segment");
    let segment = IntrinsicVolumeVector::from_exact(vec![1.0, 1.0, 0.0, 0.0]);
    let ball = IntrinsicVolumeVector::from_exact(shape::ball_volumes(3));
    for (k, sf) in factors.iter().enumerate() {
        let l = sf.l;
        rec.info(format!("rho at l={l}"), sf.rho, None);
        if extremes {
            let lo = shape::g(&segment, l, &table)?;
            let hi = shape::g(&ball, l, &table)?;
            rec.between(format!("g at l={l}"), sf.g, lo, hi, None);
        } else {
            rec.info(format!("g at l={l}"), sf.g, None);
        }
        if k > 0 {
            rec.below(format!("g increase from l={} to l={l}", factors[k - 1].l), sf.g - factors[k - 1].g, 1e-9, false, None);
        }
        if d == 2 && l >= 2.0 * table.c12bisbis {
            rec.below(format!("|g - 4 pi| at l={l}"), (sf.g - 4.0 * PI).abs(), 1e-8, false, None);
        }
    }
    Ok(to_json(&factors))
}

fn run_certificate(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let table = constants(ctx.body.dim())?;
    let v = ctx.volumes()?;
    let p = &ctx.scenario.params;
    let [i, j] = p.pair.expect("validated");
    let ratio = v.ratio(i, j)?;
    let eps_list = match p.eps_factor {
        Some(f) => vec![f * ratio],
        None => p.eps.clone(),
    };
    let mut out = Vec::new();
    for eps in eps_list {
        let c = shape::elongation_certificate(&v, eps, i, j, &table)?;
        let label = format!("at eps={eps:.6}");
        rec.info(format!("ratio V_{j}^(1/{j}) / V_{i}^(1/{i})"), c.ratio, None);
        rec.info(format!("N {label}"), c.n, None);
        rec.info(format!("t_eps {label}"), c.t_eps, None);
        if c.claimed() {
            rec.below(format!("g_N {label}"), c.g_value, c.bound, false, None);
            rec.above(format!("rho_N {label}"), c.rho_n, c.t_eps, true, None);
            rec.below(format!("f(t_eps) {label}"), c.f_t_eps, c.q_t_eps, false, None);
        } else {
            rec.info(format!("g_N {label} (no claim)"), c.g_value, None);
        }
        out.push(to_json(&c));
    }
    Ok(Value::Array(out))
}

fn run_sweep(ctx: &Ctx, rec: &mut Recorder) -> Result<Value, Error> {
    let d = ctx.body.dim();
    let table = constants(d)?;
    let opts = ctx.approx_options();
    let v = intrinsic_volumes(&ctx.body, &opts.volumes)?;
    let side = v.ball_sum(1.0).get(d - 1);
    let expo = 2.0 / (d as f64 - 1.0);
    let points = approx::c1_sweep(&ctx.body, &ctx.scenario.params.n, &opts)?;
    for p in &points {
        let bound = approx::eps_for_budget(p.n, side, &table)? * (p.n as f64).powf(expo);
        rec.below(format!("c1 at n={}", p.n), p.c1, bound, true, None);
        rec.info(format!("suffix max c1 at n={}", p.n), p.suffix_max, None);
    }
    Ok(to_json(&points))
}
