//! Circumscribed polytopes built from body nets, Hausdorff distances through
//! support-function gaps, and the end-to-end approximation procedures.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::{sample_unit_directions, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, Points};
use crate::net::{BoundaryCloud, DEFAULT_OVERSAMPLE};
use crate::polytope::{HPolytope, Halfspace};
use crate::rng;
use crate::shape::{constants, shape_factor, ConstantsTable};
use crate::volumes::{intrinsic_volumes, IntrinsicVolumeVector, VolumeOptions};

/// Containment tolerance for `h_P(u) ≥ h_K(u)`.
pub const CONTAINMENT_TOL: f64 = 1e-9;
/// Gap below which [`hausdorff_gap`] reports a containment violation.
pub const VIOLATION_TOL: f64 = 1e-6;
/// Relative offset lift used to put a polytope in general position before
/// enumerating its vertices.
const LIFT: f64 = 1e-6;
const REFINE_STARTS: usize = 32;
const SHRINK: f64 = 0.85;
const GROW: f64 = 1.01;
const GROW_STEPS: usize = 12;

#[derive(Debug, Clone)]
pub struct ApproxOptions {
    pub seed: u64,
    pub oversample: usize,
    pub volumes: VolumeOptions,
    /// Directions used for the containment spot check.
    pub containment_dirs: usize,
    /// Halvings of δ allowed when the measured distance misses the target.
    pub max_retries: usize,
    /// Spend the facet budget of [`approximate_n`] on a finer net.
    pub refine: bool,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            oversample: DEFAULT_OVERSAMPLE,
            volumes: VolumeOptions::default(),
            containment_dirs: 10_000,
            max_retries: 6,
            refine: true,
        }
    }
}

impl ApproxOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, volumes: VolumeOptions::with_seed(seed), ..Self::default() }
    }
}

/// Intersection of the supporting halfspaces `⟨x, ν⟩ ≤ h_K(ν)`. Repeated
/// normals are kept once.
pub fn circumscribe(body: &ConvexBody, normals: &Points) -> Result<HPolytope> {
    if normals.is_empty() {
        return Err(Error::Precondition("circumscribe needs at least one normal".into()));
    }
    if normals.dim() != body.dim() {
        return Err(Error::Precondition("normal dimension does not match the body".into()));
    }
    let mut hs: Vec<Halfspace> = Vec::with_capacity(normals.len());
    for n in normals.iter() {
        let u = linalg::normalized(n)
            .ok_or_else(|| Error::Precondition("zero normal".into()))?;
        hs.push(Halfspace { offset: body.support_value(&u)?, normal: u });
    }
    hs.sort_by(|a, b| a.normal.iter().zip(&b.normal).fold(std::cmp::Ordering::Equal, |o, (x, y)| {
        o.then(x.total_cmp(y))
    }));
    hs.dedup_by(|a, b| linalg::dist(&a.normal, &b.normal) <= 1e-12);
    let poly = HPolytope::with_feasible_point(&hs, &body.interior_hint()?)?;
    if !poly.is_bounded() {
        return Err(Error::UnboundedCircumscription);
    }
    Ok(poly)
}

/// `max ⟨u, x⟩` over a bounded polytope.
pub fn polytope_support(p: &HPolytope, u: &[f64]) -> Result<f64> {
    if !p.is_bounded() {
        return Err(Error::Unbounded);
    }
    p.support(u)
}

fn support_fn(p: &HPolytope) -> impl Fn(&[f64]) -> Result<f64> + Sync + '_ {
    let verts = p.vertices().ok();
    move |u| match verts {
        Some(v) => Ok(v.iter().map(|x| dot(x, u)).fold(f64::NEG_INFINITY, f64::max)),
        None => p.support(u),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HausdorffEstimate {
    /// Largest gap found; a lower bound on `d_H`.
    pub value: f64,
    pub direction: Vec<f64>,
    /// Smallest gap seen on the coarse directions.
    pub min_gap: f64,
    /// Lipschitz constant of `u ↦ h_P(u) - h_K(u)` on the sphere.
    pub lipschitz: f64,
    /// Empirical covering radius of the coarse directions.
    pub covering_radius: f64,
    /// `value + lipschitz · covering_radius`.
    pub upper_estimate: f64,
    pub evaluations: usize,
}

/// `sup_u h_P(u) - h_K(u)` by coarse random search followed by local
/// perturbation refinement of the best starts. For `K ⊆ P` this is `d_H(K, P)`.
pub fn hausdorff_gap(
    body: &ConvexBody,
    p: &HPolytope,
    coarse_dirs: usize,
    refine_iters: usize,
    seed: u64,
) -> Result<HausdorffEstimate> {
    if !p.is_bounded() {
        return Err(Error::Unbounded);
    }
    let d = body.dim();
    let h_p = support_fn(p);
    let gap = |u: &[f64]| -> Result<f64> { Ok(h_p(u)? - body.support_value(u)?) };

    let dirs = sample_unit_directions(d, coarse_dirs.max(1), seed)?;
    let gaps: Vec<f64> = dirs.iter().collect::<Vec<_>>().par_iter().map(|u| gap(u)).collect::<Result<_>>()?;
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_gap < -VIOLATION_TOL {
        return Err(Error::ContainmentViolation { gap: min_gap });
    }

    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]));
    let refined: Vec<(f64, Vec<f64>)> = order
        .iter()
        .take(REFINE_STARTS)
        .enumerate()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(k, &i)| {
            let mut r = rng::substream(seed ^ 0x9e37_79b9, k as u64);
            let mut u = dirs.row(i).to_vec();
            let mut best = gaps[i];
            let mut step = 0.25;
            for _ in 0..refine_iters {
                let g = rng::gaussian_vector(&mut r, d);
                let cand = linalg::normalized(&linalg::axpy(&u, step, &g)).unwrap_or_else(|| u.clone());
                let v = gap(&cand)?;
                if v < -VIOLATION_TOL {
                    return Err(Error::ContainmentViolation { gap: v });
                }
                if v > best {
                    best = v;
                    u = cand;
                } else {
                    step *= 0.5;
                }
            }
            Ok((best, u))
        })
        .collect::<Result<_>>()?;
    let (value, direction) = refined
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or_else(|| (gaps[0], dirs.row(0).to_vec()));

    let r_p = match p.vertices() {
        Ok(v) => v.iter().map(linalg::norm).fold(0.0, f64::max),
        Err(_) => (0..d)
            .flat_map(|k| [1.0, -1.0].map(|s| linalg::scale(&linalg::unit(d, k), s)))
            .map(|u| p.support(&u).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max)
            * (d as f64).sqrt(),
    };
    let lipschitz = r_p + body.norm_bound()?;
    let probes = sample_unit_directions(d, 2000, seed ^ 0x7f4a_7c15)?;
    let covering_radius = probes
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|q| dirs.iter().map(|u| linalg::dist(q, u)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);

    Ok(HausdorffEstimate {
        value,
        direction,
        min_gap,
        lipschitz,
        covering_radius,
        upper_estimate: value + lipschitz * covering_radius,
        evaluations: gaps.len() + REFINE_STARTS.min(gaps.len()) * refine_iters,
    })
}

/// `max_v dist(v, K)` over the vertices of `P` with every offset raised by at
/// most `1e-6` (relative), which puts the facets in general position. The
/// lifted polytope contains `P`, so the value bounds `d_H(K, P)` from above
/// and exceeds it only by the lift.
pub fn hausdorff_exact(body: &ConvexBody, p: &HPolytope) -> Result<f64> {
    if !p.is_bounded() {
        return Err(Error::Unbounded);
    }
    let scale = p.offsets().iter().fold(1.0f64, |m, b| m.max(b.abs()));
    let mut r = rng::substream(0x6c69_6674, 0);
    let hs: Vec<Halfspace> = p
        .halfspaces()
        .into_iter()
        .map(|h| Halfspace { offset: h.offset + LIFT * scale * r.random::<f64>(), normal: h.normal })
        .collect();
    let lifted = HPolytope::with_feasible_point(&hs, &body.interior_hint()?)?;
    let verts = lifted.dual_vertices()?;
    verts
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|v| body.distance_to(v))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Smallest slack of `P`'s constraints at the facet tangency values and at
/// support points of `K` in `dirs` random directions; nonnegative iff the
/// spot check finds `K ⊆ P`.
pub fn containment_slack(body: &ConvexBody, p: &HPolytope, dirs: usize, seed: u64) -> Result<f64> {
    let tangency = p
        .halfspaces()
        .par_iter()
        .map(|h| body.support_value(&h.normal).map(|s| h.offset - s))
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
    let normals = p.normals();
    let offsets = p.offsets();
    let u = sample_unit_directions(body.dim(), dirs.max(1), seed)?;
    let spot = u
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|u| {
            let s = body.support_point(u)?;
            Ok(normals.iter().zip(offsets).map(|(a, b)| b - dot(a, &s)).fold(f64::INFINITY, f64::min))
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))?;
    Ok(tangency.min(spot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxMode {
    Eps,
    N,
    Scaled,
}

/// Outcome of one approximation run. Every inequality carries both sides.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    #[serde(skip)]
    pub polytope: HPolytope,
    pub mode: ApproxMode,
    pub dim: usize,
    pub facet_count: usize,
    /// Facet budget for `n`-mode runs.
    pub n: Option<usize>,
    pub eps_target: f64,
    /// Measured Hausdorff distance between the body and the polytope.
    pub d_h: f64,
    /// `d_h · n^{2/(d-1)}` with `n` the budget when given, else the facet count.
    pub c1: f64,
    /// `d_h · facet_count^{2/(d-1)}`.
    pub c1_facets: f64,
    pub bound_facets: f64,
    pub facets_ok: bool,
    pub bound_d_h: f64,
    pub d_h_ok: bool,
    /// `V_{d-1}(K + Bᵈ)` and its standard error.
    pub side_volume: f64,
    pub side_stderr: f64,
    pub delta: f64,
    pub attempts: usize,
    pub gamma: f64,
    /// Homothety applied before construction (1 unless scaled).
    pub scale: f64,
    pub containment_slack: f64,
    pub containment_ok: bool,
    pub seed: u64,
}

impl ApproxResult {
    pub fn passed(&self) -> bool {
        self.facets_ok && self.d_h_ok && self.containment_ok
    }
}

struct Construction {
    polytope: HPolytope,
    d_h: f64,
    delta: f64,
    attempts: usize,
    gamma: f64,
}

fn build(body: &ConvexBody, cloud: &BoundaryCloud, delta: f64, seed: u64) -> Result<(HPolytope, f64)> {
    let net = cloud.body_net(delta, seed)?;
    let normals = net.normals().expect("body nets carry normals");
    let poly = circumscribe(body, &normals)?;
    let d_h = hausdorff_exact(body, &poly)?;
    Ok((poly, d_h))
}

/// Guarantee loop: nets at `δ = √(ε/√3)`, halving `δ` until `d_H < ε`.
fn construct_eps(body: &ConvexBody, eps: f64, opts: &ApproxOptions) -> Result<Construction> {
    let mut delta = (eps / 3f64.sqrt()).sqrt();
    let mut best = f64::INFINITY;
    for attempt in 0..=opts.max_retries {
        let seed = opts.seed.wrapping_add(attempt as u64);
        let cloud = BoundaryCloud::for_delta(body, delta, opts.oversample, seed)?;
        let (polytope, d_h) = build(body, &cloud, delta, seed)?;
        if d_h < eps {
            return Ok(Construction { polytope, d_h, delta, attempts: attempt + 1, gamma: cloud.gamma() });
        }
        best = best.min(d_h);
        delta *= 0.5;
    }
    Err(Error::RetryExhausted { target: eps, attempts: opts.max_retries + 1, best })
}

fn outer_side(v: &IntrinsicVolumeVector) -> (f64, f64) {
    let outer = v.ball_sum(1.0);
    (outer.get(v.dim - 1), outer.stderr(v.dim - 1))
}

fn finish(
    body: &ConvexBody,
    c: Construction,
    mode: ApproxMode,
    n: Option<usize>,
    eps_target: f64,
    bound_facets: f64,
    side: (f64, f64),
    opts: &ApproxOptions,
) -> Result<ApproxResult> {
    let d = body.dim();
    let expo = 2.0 / (d as f64 - 1.0);
    let facet_count = c.polytope.len();
    let slack = containment_slack(body, &c.polytope, opts.containment_dirs, opts.seed ^ 0xc0_4e7a)?;
    Ok(ApproxResult {
        mode,
        dim: d,
        facet_count,
        n,
        eps_target,
        d_h: c.d_h,
        c1: c.d_h * (n.unwrap_or(facet_count) as f64).powf(expo),
        c1_facets: c.d_h * (facet_count as f64).powf(expo),
        bound_facets,
        facets_ok: facet_count as f64 <= bound_facets,
        bound_d_h: eps_target,
        d_h_ok: c.d_h < eps_target,
        side_volume: side.0,
        side_stderr: side.1,
        delta: c.delta,
        attempts: c.attempts,
        gamma: c.gamma,
        scale: 1.0,
        containment_slack: slack,
        containment_ok: slack >= -CONTAINMENT_TOL,
        seed: opts.seed,
        polytope: c.polytope,
    })
}

/// Circumscribed polytope with `d_H < ε` and at most
/// `c12bis V_{d-1}(K + Bᵈ) ε^{-(d-1)/2}` facets.
pub fn approximate_eps(body: &ConvexBody, eps: f64, opts: &ApproxOptions) -> Result<ApproxResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0, 1), got {eps}")));
    }
    let v = intrinsic_volumes(body, &opts.volumes)?;
    approximate_eps_with(body, eps, &v, opts)
}

pub fn approximate_eps_with(
    body: &ConvexBody,
    eps: f64,
    v: &IntrinsicVolumeVector,
    opts: &ApproxOptions,
) -> Result<ApproxResult> {
    let d = body.dim();
    let table = constants(d)?;
    let side = outer_side(v);
    let bound = table.c12bis * (side.0 + 4.0 * side.1) * eps.powf(-(d as f64 - 1.0) / 2.0);
    let c = construct_eps(body, eps, opts)?;
    finish(body, c, ApproxMode::Eps, None, eps, bound, side, opts)
}

/// Circumscribed polytope with at most `n` facets and
/// `d_H < c13 V_{d-1}(K + Bᵈ)^{2/(d-1)} n^{-2/(d-1)}`.
pub fn approximate_n(body: &ConvexBody, n: usize, opts: &ApproxOptions) -> Result<ApproxResult> {
    let v = intrinsic_volumes(body, &opts.volumes)?;
    approximate_n_with(body, n, &v, opts)
}

/// Target distance `c13 V^{2/(d-1)} n^{-2/(d-1)}` for a facet budget `n`, or
/// an error when `n ≤ c12bis V`.
pub fn eps_for_budget(n: usize, side_volume: f64, table: &ConstantsTable) -> Result<f64> {
    let threshold = table.c12bis * side_volume;
    if n as f64 <= threshold {
        return Err(Error::ThresholdNotMet { n: n as f64, threshold });
    }
    let expo = 2.0 / (table.d as f64 - 1.0);
    Ok(table.c13 * side_volume.powf(expo) * (n as f64).powf(-expo))
}

pub fn approximate_n_with(
    body: &ConvexBody,
    n: usize,
    v: &IntrinsicVolumeVector,
    opts: &ApproxOptions,
) -> Result<ApproxResult> {
    let table = constants(body.dim())?;
    let side = outer_side(v);
    let eps = eps_for_budget(n, side.0, &table)?;
    let mut c = construct_eps(body, eps, opts)?;
    if opts.refine && c.polytope.len() < n {
        if let Some(finer) = spend_budget(body, n, &c, opts)? {
            if finer.d_h < c.d_h {
                c = finer;
            }
        }
    }
    finish(body, c, ApproxMode::N, Some(n), eps, n as f64, side, opts)
}

/// Smallest net spacing whose polytope still has at most `n` facets, found by
/// bisection on `log δ` over one candidate cloud.
fn spend_budget(body: &ConvexBody, n: usize, base: &Construction, opts: &ApproxOptions) -> Result<Option<Construction>> {
    let d = body.dim() as f64;
    let seed = opts.seed ^ 0x00b0_d6e7;
    // the search counts facets on a prefix of the cloud; the full cloud only
    // builds the final polytope
    let facets = |cloud: &BoundaryCloud, delta: f64, limit: usize| -> Result<usize> {
        let net = cloud.body_net_prefix(delta, seed, limit);
        Ok(circumscribe(body, &net.normals().expect("normals"))?.len())
    };
    let mut hi = base.delta;
    let mut lo = hi * (base.polytope.len() as f64 / n as f64).powf(1.0 / (d - 1.0)) * SHRINK;
    let mut cloud = BoundaryCloud::for_delta(body, lo, opts.oversample, seed)?;
    let mut prefix = cloud.len() / 4;
    let mut tries = 0;
    while facets(&cloud, lo, prefix)? <= n {
        tries += 1;
        if tries > 8 {
            return Ok(None);
        }
        hi = lo;
        lo *= SHRINK;
        if cloud.gamma() > lo / 10.0 {
            cloud = BoundaryCloud::for_delta(body, lo, opts.oversample, seed)?;
            prefix = cloud.len() / 4;
        }
    }
    for _ in 0..10 {
        let mid = (lo * hi).sqrt();
        if facets(&cloud, mid, prefix)? <= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for _ in 0..GROW_STEPS {
        if facets(&cloud, hi, cloud.len())? <= n {
            let (polytope, d_h) = build(body, &cloud, hi, seed)?;
            return Ok(Some(Construction { polytope, d_h, delta: hi, attempts: base.attempts, gamma: cloud.gamma() }));
        }
        hi *= GROW;
        if hi >= base.delta {
            break;
        }
    }
    Ok(None)
}

/// Approximation through the best homothety: runs [`approximate_n`] on `t*K`,
/// with `t*` minimizing the side-volume ratio below `ρ_n`, then scales back.
/// The distance bound is `c13bis g_n(K) V_1(K) n^{-2/(d-1)}`.
pub fn approximate_scaled(body: &ConvexBody, n: usize, opts: &ApproxOptions) -> Result<ApproxResult> {
    let d = body.dim();
    let table = constants(d)?;
    if n as f64 <= table.c12bisbis {
        return Err(Error::ThresholdNotMet { n: n as f64, threshold: table.c12bisbis });
    }
    let v = intrinsic_volumes(body, &opts.volumes)?;
    let sf = shape_factor(&v, n as f64, &table)?;
    let t = sf.t_star.min(sf.rho * (1.0 - 1e-9));
    let scaled = ConvexBody::scaled(body.clone(), t)?;
    let inner = approximate_n_with(&scaled, n, &v.scaled(t), opts)?;

    let expo = 2.0 / (d as f64 - 1.0);
    let polytope = inner.polytope.scaled(1.0 / t)?;
    let d_h = inner.d_h / t;
    let bound = table.c13bis * sf.g * v.get(1) * (n as f64).powf(-expo);
    let slack = containment_slack(body, &polytope, opts.containment_dirs, opts.seed ^ 0xc0_4e7a)?;
    Ok(ApproxResult {
        mode: ApproxMode::Scaled,
        facet_count: polytope.len(),
        eps_target: inner.eps_target / t,
        d_h,
        c1: d_h * (n as f64).powf(expo),
        c1_facets: d_h * (polytope.len() as f64).powf(expo),
        bound_d_h: bound,
        d_h_ok: d_h < bound,
        scale: t,
        containment_slack: slack,
        containment_ok: slack >= -CONTAINMENT_TOL,
        polytope,
        ..inner
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub c1: f64,
    pub c1_facets: f64,
    pub d_h: f64,
    pub facets: usize,
    /// `max_{m ≥ n} c1(m)` over the swept values: a lower-bound proxy for the
    /// supremum over all larger budgets.
    pub suffix_max: f64,
}

/// [`approximate_n`] at each budget, with the running suffix maximum of `c1`.
pub fn c1_sweep(body: &ConvexBody, n_values: &[usize], opts: &ApproxOptions) -> Result<Vec<SweepPoint>> {
    let v = intrinsic_volumes(body, &opts.volumes)?;
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::with_capacity(ns.len());
    for &n in &ns {
        let r = approximate_n_with(body, n, &v, opts)?;
        out.push(SweepPoint { n, c1: r.c1, c1_facets: r.c1_facets, d_h: r.d_h, facets: r.facet_count, suffix_max: r.c1 });
    }
    let mut running = f64::NEG_INFINITY;
    for p in out.iter_mut().rev() {
        running = running.max(p.c1);
        p.suffix_max = running;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volumes::exact_intrinsic_volumes;
    use std::f64::consts::PI;

    fn axes(d: usize) -> Points {
        let mut p = Points::new(d);
        for k in 0..d {
            for s in [1.0, -1.0] {
                p.push(&linalg::scale(&linalg::unit(d, k), s));
            }
        }
        p
    }

    #[test]
    fn circumscribe_examples() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let cube = circumscribe(&ball, &axes(3)).unwrap();
        assert_eq!(cube.len(), 6);
        assert!(cube.offsets().iter().all(|b| (b - 1.0).abs() < 1e-15));
        let u = [1.0 / 3f64.sqrt(); 3];
        assert!((polytope_support(&cube, &u).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((polytope_support(&cube, &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);

        let half = Points::from_rows(3, [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.0, 0.6, 0.8], [-0.6, 0.0, 0.8]]);
        assert!(matches!(circumscribe(&ball, &half), Err(Error::UnboundedCircumscription)));

        let e = ConvexBody::ellipsoid_aligned(vec![1.0, 0.5]).unwrap();
        let b = circumscribe(&e, &axes(2)).unwrap();
        assert!((polytope_support(&b, &[0.6, 0.8]).unwrap() - 1.0).abs() < 1e-12);
        let mut offs = b.offsets().to_vec();
        offs.sort_by(f64::total_cmp);
        assert_eq!(offs, vec![0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn duplicate_normals_are_merged() {
        let cube = ConvexBody::unit_cube(3).unwrap();
        let mut n = axes(3);
        n.push(&[1.0, 0.0, 0.0]);
        assert_eq!(circumscribe(&cube, &n).unwrap().len(), 6);
    }

    #[test]
    fn hausdorff_of_cube_around_ball() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let cube = circumscribe(&ball, &axes(3)).unwrap();
        let est = hausdorff_gap(&ball, &cube, 5000, 40, 1).unwrap();
        assert!((est.value - (3f64.sqrt() - 1.0)).abs() < 1e-4, "{est:?}");
        assert!(est.upper_estimate >= est.value);
        let exact = hausdorff_exact(&ball, &cube).unwrap();
        assert!((exact - (3f64.sqrt() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn hausdorff_of_concentric_balls() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let big = ConvexBody::ball(vec![0.0; 3], 1.2).unwrap();
        // golden-angle spiral: well-spread normals
        let m = 1000;
        let normals = Points::from_rows(
            3,
            (0..m).map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let a = i as f64 * PI * (3.0 - 5f64.sqrt());
                [r * a.cos(), r * a.sin(), z]
            }),
        );
        let p = circumscribe(&big, &normals).unwrap();
        let est = hausdorff_gap(&ball, &p, 2000, 40, 2).unwrap();
        assert!(est.min_gap >= 0.2 - 1e-9);
        let exact = hausdorff_exact(&ball, &p).unwrap();
        assert!(exact >= est.value - 1e-9 && exact - est.value < 2e-4, "{exact} {est:?}");
        // vertices sit at most 1.2 (sec θ - 1) outside 1.2B, θ the normal spacing
        assert!(est.value < 0.2 + 1.2 * (1.0 / 0.1f64.cos() - 1.0), "{est:?}");
    }

    #[test]
    fn containment_violation_detected() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let small = ConvexBody::ball(vec![0.0; 3], 0.5).unwrap();
        let p = circumscribe(&small, &axes(3)).unwrap();
        assert!(matches!(hausdorff_gap(&ball, &p, 100, 5, 0), Err(Error::ContainmentViolation { .. })));
        assert!(containment_slack(&ball, &p, 100, 0).unwrap() < -0.4);
    }

    #[test]
    fn eps_run_on_ball() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let r = approximate_eps(&ball, 0.3, &ApproxOptions::with_seed(3)).unwrap();
        assert!(r.d_h < 0.3 && r.passed(), "{r:?}");
        assert!((r.bound_facets - 35.285 * 8.0 * PI / 0.3).abs() < 1.0);
        assert!((r.facet_count as f64) < r.bound_facets / 10.0);
        assert!(r.containment_slack >= -CONTAINMENT_TOL);
        assert!(matches!(approximate_eps(&ball, 1.0, &ApproxOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn budget_threshold_and_target() {
        let table = constants(3).unwrap();
        let v = 8.0 * PI;
        assert!((table.c12bis * v - 886.8).abs() < 0.2);
        let eps = eps_for_budget(1000, v, &table).unwrap();
        assert!((eps - table.c13 * v / 1000.0).abs() < 1e-15);
        assert!((eps - 0.8868).abs() < 1e-3);
        assert!(matches!(eps_for_budget(500, v, &table), Err(Error::ThresholdNotMet { .. })));
    }

    #[test]
    fn n_run_on_ball() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let opts = ApproxOptions::with_seed(5);
        let r = approximate_n(&ball, 1000, &opts).unwrap();
        let table = constants(3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.facet_count <= 1000 && r.facet_count > 500, "{}", r.facet_count);
        assert!(r.c1 < table.c13 * 8.0 * PI);
        assert!(r.c1 > 2.0 && r.c1 < 8.0, "{}", r.c1);
    }

    #[test]
    fn scaled_run_on_ball_reduces_to_unit_scale() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let table = constants(3).unwrap();
        let v = exact_intrinsic_volumes(&ball).unwrap();
        let sf = shape_factor(&v, 1000.0, &table).unwrap();
        assert!((sf.t_star - 1.0).abs() < 1e-6);
        let r = approximate_scaled(&ball, 1000, &ApproxOptions::with_seed(5)).unwrap();
        assert!((r.scale - 1.0).abs() < 1e-6);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sweep_suffix_max_is_nonincreasing() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let mut opts = ApproxOptions::with_seed(9);
        opts.refine = false;
        let pts = c1_sweep(&ball, &[2000, 1000], &opts).unwrap();
        assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), vec![1000, 2000]);
        assert!(pts[0].suffix_max >= pts[1].suffix_max);
        assert!(pts.iter().all(|p| p.suffix_max >= p.c1));
    }
}
