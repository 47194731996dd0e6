//! Greedy δ-nets on sampled metric spaces and on the boundary of the outer
//! parallel body `D = K + Bᵈ`.
//!
//! A continuum space is represented by a finite candidate cloud together with
//! an estimate `γ` of how densely the cloud covers the space. Greedy
//! acceptance in a shuffled order gives a set with pairwise distances `> δ`
//! (a `δ/2`-packing) which, by maximality, covers every candidate within `δ`
//! and hence the space within `δ + γ`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bodies::{ConvexBody, OuterBoundaryPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, Points};
use crate::rng::{self, StreamRng};
use crate::shape::ConstantsTable;
use crate::volumes::{kappa, IntrinsicVolumeVector};

/// Candidates drawn per `(δ/10)`-ball of boundary area.
pub const DEFAULT_OVERSAMPLE: usize = 14;
/// Probe points used to estimate the candidate covering radius.
pub const DEFAULT_PROBES: usize = 2000;
/// Hard ceiling on the candidate cloud size.
pub const MAX_CANDIDATES: usize = 16_000_000;
const DENSITY_EXTENSIONS: usize = 3;
/// Width of the outer shell candidates are drawn from.
const SHELL: f64 = 0.25;
const PROBE_SHELL: f64 = 0.02;
const PILOT: usize = 20_000;
const PILOT_STREAM: u64 = 0x0009_1107;
/// Grid cells used to localize the shell.
const SHELL_CELLS: usize = 1 << 17;
const GRID_DIMS: usize = 6;

pub type DistanceFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    Euclidean,
    Mixed,
    Custom,
}

/// Distance on a candidate cloud.
///
/// Every metric bounds the Euclidean distance of the first coordinates
/// ("anchors") from above, up to the Lipschitz factor, which is what the
/// neighbor grid relies on.
#[derive(Clone)]
pub enum Metric {
    Euclidean,
    /// Points are `(foot, normal)` concatenations and
    /// `d_m = max(|Δfoot|, |Δnormal|)`; anchors are the feet.
    Mixed,
    /// `|anchor(a) - anchor(b)| ≤ lipschitz · distance(a, b)` must hold.
    Custom { distance: DistanceFn, lipschitz: f64 },
}

impl std::fmt::Debug for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Euclidean => write!(f, "Euclidean"),
            Metric::Mixed => write!(f, "Mixed"),
            Metric::Custom { lipschitz, .. } => write!(f, "Custom(lipschitz = {lipschitz})"),
        }
    }
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => linalg::dist(a, b),
            Metric::Mixed => {
                let h = a.len() / 2;
                linalg::dist(&a[..h], &b[..h]).max(linalg::dist(&a[h..], &b[h..]))
            }
            Metric::Custom { distance, .. } => distance(a, b),
        }
    }

    fn anchor_dim(&self, dim: usize) -> usize {
        let a = match self {
            Metric::Mixed => dim / 2,
            _ => dim,
        };
        a.min(GRID_DIMS)
    }

    fn lipschitz(&self) -> f64 {
        match self {
            Metric::Custom { lipschitz, .. } => *lipschitz,
            _ => 1.0,
        }
    }

    pub fn tag(&self) -> MetricTag {
        match self {
            Metric::Euclidean => MetricTag::Euclidean,
            Metric::Mixed => MetricTag::Mixed,
            Metric::Custom { .. } => MetricTag::Custom,
        }
    }
}

/// A finite candidate cloud standing in for a metric space.
#[derive(Debug, Clone)]
pub struct SampledMetricSpace {
    points: Points,
    metric: Metric,
    density_radius: f64,
}

impl SampledMetricSpace {
    pub fn new(points: Points, metric: Metric, density_radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("metric space needs at least one point".into()));
        }
        if !(density_radius >= 0.0 && density_radius.is_finite()) {
            return Err(Error::Precondition(format!("invalid density radius {density_radius}")));
        }
        if let Metric::Mixed = metric {
            if points.dim() % 2 != 0 {
                return Err(Error::Precondition("mixed metric needs (foot, normal) pairs".into()));
            }
        }
        if let Metric::Custom { lipschitz, .. } = metric {
            if !(lipschitz > 0.0 && lipschitz.is_finite()) {
                return Err(Error::Precondition(format!("invalid Lipschitz factor {lipschitz}")));
            }
        }
        Ok(Self { points, metric, density_radius })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn density_radius(&self) -> f64 {
        self.density_radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.points.row(i), self.points.row(j))
    }

    /// Largest triangle-inequality or symmetry defect over random triples.
    pub fn metric_defect(&self, triples: usize, seed: u64) -> f64 {
        let mut r = rng::substream(seed, 0);
        let n = self.len();
        let mut worst: f64 = 0.0;
        for _ in 0..triples {
            let (a, b, c) = (r.random_range(0..n), r.random_range(0..n), r.random_range(0..n));
            let (ab, bc, ac) = (self.distance(a, b), self.distance(b, c), self.distance(a, c));
            worst = worst.max(ac - ab - bc).max((ab - self.distance(b, a)).abs());
        }
        worst
    }
}

/// Cell offsets within `reach` of the origin, nearest first.
fn offsets(adim: usize, reach: i64) -> Vec<[i64; GRID_DIMS]> {
    let mut out = vec![[0i64; GRID_DIMS]];
    for axis in 0..adim {
        out = out
            .into_iter()
            .flat_map(|o| {
                (-reach..=reach).map(move |v| {
                    let mut n = o;
                    n[axis] = v;
                    n
                })
            })
            .collect();
    }
    out.sort_by_key(|o| o.iter().map(|v| v * v).sum::<i64>());
    out
}

/// Uniform grid over the anchor coordinates.
struct Grid {
    cell: f64,
    adim: usize,
    map: FxHashMap<[i64; GRID_DIMS], Vec<u32>>,
    near: Vec<[i64; GRID_DIMS]>,
}

impl Grid {
    fn new(cell: f64, adim: usize) -> Self {
        Self { cell, adim, map: FxHashMap::default(), near: offsets(adim, 1) }
    }

    fn key(&self, p: &[f64]) -> [i64; GRID_DIMS] {
        let mut k = [0i64; GRID_DIMS];
        for (slot, v) in k.iter_mut().zip(&p[..self.adim]) {
            *slot = (v / self.cell).floor() as i64;
        }
        k
    }

    fn insert(&mut self, p: &[f64], idx: usize) {
        self.map.entry(self.key(p)).or_default().push(idx as u32);
    }

    fn build(points: &Points, cell: f64, adim: usize) -> Self {
        let mut g = Self::new(cell, adim);
        for (i, p) in points.iter().enumerate() {
            g.insert(p, i);
        }
        g
    }

    /// Calls `f` on stored indices in the cells at `offs` around `p`, nearest
    /// cells first, until `f` returns true. Returns whether it did.
    fn visit(&self, p: &[f64], offs: &[[i64; GRID_DIMS]], mut f: impl FnMut(usize) -> bool) -> bool {
        let base = self.key(p);
        for o in offs {
            let mut k = base;
            for (slot, v) in k.iter_mut().zip(o) {
                *slot += v;
            }
            if let Some(list) = self.map.get(&k) {
                if list.iter().any(|&i| f(i as usize)) {
                    return true;
                }
            }
        }
        false
    }

    fn visit_near(&self, p: &[f64], f: impl FnMut(usize) -> bool) -> bool {
        self.visit(p, &self.near, f)
    }
}

/// Result of a greedy net construction with its measured certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaNet {
    pub centers: Points,
    /// Candidate indices of the centers, in acceptance order.
    pub indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<OuterBoundaryPoint>>,
    pub delta: f64,
    pub metric_tag: MetricTag,
    pub density_radius: f64,
    pub candidate_count: usize,
    /// Smallest distance between two centers; `None` when no two centers
    /// are within grid reach of each other.
    pub min_center_distance: Option<f64>,
    /// Largest distance from a rejected candidate to the center that blocked
    /// it; bounds the candidate covering radius from above.
    pub covering_radius: f64,
    pub packing_ok: bool,
    pub covering_ok: bool,
    pub seed: u64,
}

impl DeltaNet {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Outer normals of the centers, when they carry boundary data.
    pub fn normals(&self) -> Option<Points> {
        let b = self.boundary.as_ref()?;
        let dim = b.first().map_or(0, |p| p.normal.len());
        Some(Points::from_rows(dim, b.iter().map(|p| &p.normal)))
    }
}

/// Greedy filter over `order`. Returns the accepted candidate indices and the
/// largest blocking distance among rejected ones.
fn greedy_indices(space: &SampledMetricSpace, delta: f64, order: &[usize]) -> (Vec<usize>, f64) {
    let adim = space.metric.anchor_dim(space.points.dim());
    let mut grid = Grid::new(space.metric.lipschitz() * delta, adim);
    let mut accepted = Vec::new();
    let mut cover: f64 = 0.0;
    for &i in order {
        let p = space.points.row(i);
        let mut blocking = 0.0;
        let blocked = grid.visit_near(p, |c| {
            blocking = space.metric.distance(p, space.points.row(c));
            blocking <= delta
        });
        if blocked {
            cover = cover.max(blocking);
        } else {
            grid.insert(p, i);
            accepted.push(i);
        }
    }
    (accepted, cover)
}

fn certify(
    space: &SampledMetricSpace,
    delta: f64,
    (accepted, covering_radius): (Vec<usize>, f64),
    candidate_count: usize,
    seed: u64,
) -> DeltaNet {
    let metric = &space.metric;
    let adim = metric.anchor_dim(space.points.dim());
    let centers = Points::from_rows(space.points.dim(), accepted.iter().map(|&i| space.points.row(i)));
    let grid = Grid::build(&centers, metric.lipschitz() * delta, adim);
    let min_center_distance = (0..centers.len())
        .into_par_iter()
        .map(|a| {
            let p = centers.row(a);
            let mut best = f64::INFINITY;
            grid.visit_near(p, |c| {
                if c != a {
                    best = best.min(metric.distance(p, centers.row(c)));
                }
                false
            });
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let min_center_distance = min_center_distance.is_finite().then_some(min_center_distance);

    DeltaNet {
        centers,
        indices: accepted,
        boundary: None,
        delta,
        metric_tag: metric.tag(),
        density_radius: space.density_radius,
        candidate_count,
        packing_ok: min_center_distance.is_none_or(|m| m > delta),
        covering_ok: covering_radius <= delta,
        min_center_distance,
        covering_radius,
        seed,
    }
}

/// Greedy maximal `δ`-separated subset of the cloud, accepted in a seeded
/// random order.
pub fn greedy_net(space: &SampledMetricSpace, delta: f64, seed: u64) -> Result<DeltaNet> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    let limit = delta / 10.0;
    if space.density_radius > limit {
        return Err(Error::DensityViolation { gamma: space.density_radius, limit });
    }
    Ok(greedy_prefix(space, delta, seed, space.len()))
}

fn greedy_prefix(space: &SampledMetricSpace, delta: f64, seed: u64, limit: usize) -> DeltaNet {
    let mut order: Vec<usize> = (0..limit.min(space.len())).collect();
    order.shuffle(&mut rng::substream(seed, u64::MAX));
    let accepted = greedy_indices(space, delta, &order);
    certify(space, delta, accepted, order.len(), seed)
}

/// Uniform sampler of the outer shell `1 ≤ dist(y, K) ≤ 1 + width`, mapping
/// accepted points radially onto `∂(K + Bᵈ)`. For a thin shell the images
/// are close to area-uniform. Draws come from the grid cells of the bounding
/// box that can meet the shell.
#[derive(Debug, Clone)]
struct ShellSampler {
    body: ConvexBody,
    corners: Points,
    cell: f64,
    width: f64,
}

impl ShellSampler {
    fn new(body: &ConvexBody, width: f64) -> Result<Self> {
        let d = body.dim();
        let (mut lo, mut hi) = body.bounding_box()?;
        lo.iter_mut().for_each(|v| *v -= 1.0 + width);
        hi.iter_mut().for_each(|v| *v += 1.0 + width);
        let volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        let cell = (volume / SHELL_CELLS as f64).powf(1.0 / d as f64);
        let dims: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| ((h - l) / cell).ceil().max(1.0) as usize).collect();
        let total: usize = dims.iter().product();
        let reach = 0.5 * cell * (d as f64).sqrt();
        let kept: Vec<Result<Option<Vec<f64>>>> = (0..total)
            .into_par_iter()
            .map(|mut k| {
                let mut corner = Vec::with_capacity(d);
                for (l, n) in lo.iter().zip(&dims) {
                    corner.push(l + (k % n) as f64 * cell);
                    k /= n;
                }
                let center: Vec<f64> = corner.iter().map(|c| c + 0.5 * cell).collect();
                let dist = body.distance_to(&center)?;
                Ok((dist >= 1.0 - reach && dist <= 1.0 + width + reach).then_some(corner))
            })
            .collect();
        let mut corners = Points::new(d);
        for c in kept {
            if let Some(c) = c? {
                corners.push(&c);
            }
        }
        if corners.is_empty() {
            return Err(Error::DegenerateBody("no grid cell meets the outer shell".into()));
        }
        Ok(Self { body: body.clone(), corners, cell, width })
    }

    fn volume(&self) -> f64 {
        self.corners.len() as f64 * self.cell.powi(self.corners.dim() as i32)
    }

    fn draw(&self, r: &mut StreamRng) -> Result<Option<OuterBoundaryPoint>> {
        let corner = self.corners.row(r.random_range(0..self.corners.len()));
        let y: Vec<f64> = corner.iter().map(|c| c + self.cell * r.random::<f64>()).collect();
        let foot = self.body.project_onto(&y)?;
        let v = linalg::sub(&y, &foot);
        let dist = linalg::norm(&v);
        if !(1.0..=1.0 + self.width).contains(&dist) {
            return Ok(None);
        }
        let normal = linalg::scale(&v, 1.0 / dist);
        Ok(Some(OuterBoundaryPoint { x: linalg::add(&foot, &normal), foot, normal }))
    }

    /// `count` accepted points from chunk substreams `first_chunk..`.
    fn fill(&self, count: usize, seed: u64, first_chunk: u64) -> Result<(Points, Points)> {
        let d = self.corners.dim();
        let parts: Vec<Result<(Points, Points)>> = rng::chunks(count)
            .into_par_iter()
            .map(|(c, len)| {
                let mut r = rng::substream(seed, first_chunk + c);
                let mut xs = Points::with_capacity(d, len);
                let mut feet = Points::with_capacity(d, len);
                let mut tries = 0usize;
                while xs.len() < len {
                    tries += 1;
                    if tries > 100_000 * len {
                        return Err(Error::ConvergenceFailure { what: "shell sampling", steps: tries });
                    }
                    if let Some(p) = self.draw(&mut r)? {
                        xs.push(&p.x);
                        feet.push(&p.foot);
                    }
                }
                Ok((xs, feet))
            })
            .collect();
        let mut xs = Points::with_capacity(d, count);
        let mut feet = Points::with_capacity(d, count);
        for p in parts {
            let (a, b) = p?;
            xs.extend(&a);
            feet.extend(&b);
        }
        Ok((xs, feet))
    }

    /// Shell volume over width: slightly above the boundary area.
    fn area_estimate(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut r = rng::substream(seed, 0);
        let mut hits = 0usize;
        for _ in 0..samples {
            if self.draw(&mut r)?.is_some() {
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(Error::ConvergenceFailure { what: "boundary area pilot", steps: samples });
        }
        Ok(self.volume() * hits as f64 / samples as f64 / self.width)
    }
}

/// Estimate of `H^{d-1}(∂(K + Bᵈ))` from a pilot shell sample.
pub fn boundary_area_estimate(body: &ConvexBody, seed: u64) -> Result<f64> {
    ShellSampler::new(body, SHELL)?.area_estimate(PILOT, seed ^ PILOT_STREAM)
}

/// Candidate cloud on `∂(K + Bᵈ)` with the foot point of each candidate.
#[derive(Debug, Clone)]
pub struct BoundaryCloud {
    sampler: ShellSampler,
    space: SampledMetricSpace,
    feet: Points,
    probes: Points,
    area: f64,
    chunks: u64,
    seed: u64,
}

impl BoundaryCloud {
    /// `count` candidates drawn uniformly from a thin outer shell, with `γ`
    /// estimated from [`DEFAULT_PROBES`] probe points.
    pub fn sample(body: &ConvexBody, count: usize, seed: u64) -> Result<Self> {
        let sampler = ShellSampler::new(body, SHELL)?;
        let area = sampler.area_estimate(PILOT, seed ^ PILOT_STREAM)?;
        Self::sample_with(sampler, area, count, seed)
    }

    fn sample_with(sampler: ShellSampler, area: f64, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Precondition("candidate count must be positive".into()));
        }
        let (xs, feet) = sampler.fill(count, seed, 0)?;
        let probes = ShellSampler::new(&sampler.body, PROBE_SHELL)?.fill(DEFAULT_PROBES, seed ^ 0x5bd1_e995, 0)?.0;
        let gamma = covering_gap(&xs, &probes, area);
        Ok(Self {
            sampler,
            space: SampledMetricSpace::new(xs, Metric::Euclidean, gamma)?,
            feet,
            probes,
            area,
            chunks: rng::chunks(count).len() as u64,
            seed,
        })
    }

    /// Appends `extra` candidates from fresh substreams and re-estimates `γ`.
    pub fn extend(&mut self, extra: usize) -> Result<()> {
        let (xs, feet) = self.sampler.fill(extra, self.seed, self.chunks)?;
        self.chunks += rng::chunks(extra).len() as u64;
        let mut all = self.space.points.clone();
        all.extend(&xs);
        self.feet.extend(&feet);
        let gamma = covering_gap(&all, &self.probes, self.area);
        self.space = SampledMetricSpace::new(all, Metric::Euclidean, gamma)?;
        Ok(())
    }

    /// A cloud dense enough for nets at `delta`: `oversample` candidates per
    /// `(δ/10)`-ball of estimated boundary area, extended while `γ > δ/10`.
    pub fn for_delta(body: &ConvexBody, delta: f64, oversample: usize, seed: u64) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::Precondition("oversample must be positive".into()));
        }
        let d = body.dim();
        let limit = delta / 10.0;
        let sampler = ShellSampler::new(body, SHELL)?;
        let area = sampler.area_estimate(PILOT, seed ^ PILOT_STREAM)?;
        let count = (oversample as f64 * area / (kappa(d - 1) * limit.powi(d as i32 - 1))).ceil();
        let mut cloud = Self::sample_with(sampler, area, (count as usize).clamp(1000, MAX_CANDIDATES), seed)?;
        for _ in 0..DENSITY_EXTENSIONS {
            if cloud.gamma() <= limit || cloud.len() >= MAX_CANDIDATES {
                break;
            }
            cloud.extend((cloud.len() / 2).min(MAX_CANDIDATES - cloud.len()))?;
        }
        if cloud.gamma() > limit {
            return Err(Error::DensityViolation { gamma: cloud.gamma(), limit });
        }
        Ok(cloud)
    }

    pub fn body(&self) -> &ConvexBody {
        &self.sampler.body
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.space.density_radius
    }

    /// Estimated area of `∂(K + Bᵈ)`.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn space(&self) -> &SampledMetricSpace {
        &self.space
    }

    pub fn point(&self, i: usize) -> OuterBoundaryPoint {
        let x = self.space.points.row(i).to_vec();
        let foot = self.feet.row(i).to_vec();
        let normal = linalg::sub(&x, &foot);
        OuterBoundaryPoint { x, foot, normal }
    }

    /// Euclidean net of `∂(K + Bᵈ)`.
    pub fn boundary_net(&self, delta: f64, seed: u64) -> Result<DeltaNet> {
        check_unit_interval(delta)?;
        let mut net = greedy_net(&self.space, delta, seed)?;
        net.boundary = Some(net.indices.iter().map(|&i| self.point(i)).collect());
        Ok(net)
    }

    /// Net of `∂K` under `d_m = max(|Δfoot|, |Δnormal|)`: the boundary net
    /// projected to its feet, then thinned again under `d_m`.
    pub fn body_net(&self, delta: f64, seed: u64) -> Result<DeltaNet> {
        let outer = self.boundary_net(delta, seed)?;
        Ok(self.project_net(outer, delta, seed))
    }

    /// [`Self::body_net`] over the first `limit` candidates and without the
    /// density check; for cheap size estimates.
    pub(crate) fn body_net_prefix(&self, delta: f64, seed: u64, limit: usize) -> DeltaNet {
        let mut outer = greedy_prefix(&self.space, delta, seed, limit);
        outer.boundary = Some(outer.indices.iter().map(|&i| self.point(i)).collect());
        self.project_net(outer, delta, seed)
    }

    fn project_net(&self, outer: DeltaNet, delta: f64, seed: u64) -> DeltaNet {
        let points = outer.boundary.as_ref().expect("boundary payload");
        let d = self.body().dim();
        let mut pairs = Points::with_capacity(2 * d, points.len());
        for p in points {
            let mut row = p.foot.clone();
            row.extend_from_slice(&p.normal);
            pairs.push(&row);
        }
        // the projected set covers ∂K within δ + γ under d_m
        let space = SampledMetricSpace::new(pairs, Metric::Mixed, delta + self.gamma())
            .expect("nonempty net of even dimension");
        let order: Vec<usize> = (0..space.len()).collect();
        let kept = greedy_indices(&space, delta, &order);
        let mut net = certify(&space, delta, kept.clone(), order.len(), seed);
        let kept = kept.0;
        net.centers = Points::from_rows(d, kept.iter().map(|&k| &points[k].foot));
        net.boundary = Some(kept.iter().map(|&k| points[k].clone()).collect());
        net.indices = kept.iter().map(|&k| outer.indices[k]).collect();
        net
    }
}

/// Largest distance from a probe to its nearest candidate.
fn covering_gap(candidates: &Points, probes: &Points, area: f64) -> f64 {
    let d = candidates.dim();
    let spacing = (area / candidates.len() as f64).powf(1.0 / (d as f64 - 1.0).max(1.0));
    let grid = Grid::build(candidates, spacing, d.min(GRID_DIMS));
    let wide = offsets(grid.adim, 2);
    probes
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| {
            let mut best = f64::INFINITY;
            grid.visit(p, &wide, |c| {
                best = best.min(linalg::dist(p, candidates.row(c)));
                false
            });
            if best > 2.0 * spacing {
                // nothing inside the scanned block: fall back to a full scan
                best = candidates.iter().map(|c| linalg::dist(p, c)).fold(f64::INFINITY, f64::min);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

fn check_unit_interval(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Euclidean `δ`-net of `∂(K + Bᵈ)`.
pub fn boundary_net(body: &ConvexBody, delta: f64, oversample: usize, seed: u64) -> Result<DeltaNet> {
    check_unit_interval(delta)?;
    BoundaryCloud::for_delta(body, delta, oversample, seed)?.boundary_net(delta, seed)
}

/// `δ`-net of `∂K` under the mixed foot/normal metric.
pub fn body_net(body: &ConvexBody, delta: f64, oversample: usize, seed: u64) -> Result<DeltaNet> {
    check_unit_interval(delta)?;
    BoundaryCloud::for_delta(body, delta, oversample, seed)?.body_net(delta, seed)
}

/// Shell estimate of a cap area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapEstimate {
    pub value: f64,
    pub stderr: f64,
    pub hits: usize,
}

pub const MIN_CAP_HITS: usize = 100;

/// `H^{d-1}` of the cap `∂D ∩ B(center.x, δ)` of `D = K + Bᵈ`, estimated from
/// the outer shell `1 < dist(y, K) ≤ 1 + h` around it.
pub fn cap_area_shell_mc(
    body: &ConvexBody,
    center: &OuterBoundaryPoint,
    delta: f64,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<CapEstimate> {
    if !(h > 0.0 && h <= delta / 10.0) {
        return Err(Error::Precondition(format!("shell width must lie in (0, δ/10], got {h}")));
    }
    if samples == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let reach = delta + h;
    let (glo, ghi) = body.bounding_box()?;
    let lo: Vec<f64> = center.x.iter().zip(&glo).map(|(c, g)| (c - reach).max(g - 1.0 - h)).collect();
    let hi: Vec<f64> = center.x.iter().zip(&ghi).map(|(c, g)| (c + reach).min(g + 1.0 + h)).collect();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, u)| (u - l).max(0.0)).product();
    let m = rng::parallel_moments(samples, seed, |r| {
        let y: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| l + (u - l) * r.random::<f64>()).collect();
        let foot = body.project_onto(&y)?;
        let v = linalg::sub(&y, &foot);
        let dist = linalg::norm(&v);
        if dist <= 1.0 || dist > 1.0 + h {
            return Ok(0.0);
        }
        let on_d = linalg::axpy(&foot, 1.0 / dist, &v);
        Ok(if linalg::dist(&on_d, &center.x) <= delta { 1.0 } else { 0.0 })
    })?;
    let hits = (m.mean * m.n as f64).round() as usize;
    if hits < MIN_CAP_HITS {
        return Err(Error::InsufficientHits { hits, required: MIN_CAP_HITS });
    }
    Ok(CapEstimate { value: box_vol * m.mean / h, stderr: box_vol * m.stderr() / h, hits })
}

/// Lower and upper cap-area bounds `(δ/2)^{d-1} κ_{d-1}` and `d κ_{d-1} δ^{d-1}`.
pub fn cap_bounds(d: usize, delta: f64) -> (f64, f64) {
    let k = kappa(d - 1) * delta.powi(d as i32 - 1);
    (k * 0.5f64.powi(d as i32 - 1), k * d as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapCheck {
    pub delta: f64,
    pub center: Vec<f64>,
    pub value: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Cap estimates at `trials` random centers per `δ`, each compared with
/// [`cap_bounds`] widened by four standard errors.
pub fn cap_bound_report(
    body: &ConvexBody,
    deltas: &[f64],
    trials: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CapCheck>> {
    let d = body.dim();
    let mut out = Vec::with_capacity(deltas.len() * trials);
    for (k, &delta) in deltas.iter().enumerate() {
        check_unit_interval(delta)?;
        let dirs = crate::bodies::sample_unit_directions(d, trials.max(1), seed.wrapping_add(k as u64))?;
        let (lower, upper) = cap_bounds(d, delta);
        let checks: Vec<Result<CapCheck>> = dirs
            .iter()
            .take(trials)
            .enumerate()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(t, u)| {
                let center = body.outer_boundary_sample(1.0, u)?;
                let sub = seed ^ ((k as u64) << 40) ^ ((t as u64) << 20) ^ 0xa5a5;
                let est = cap_area_shell_mc(body, &center, delta, delta / 20.0, samples, sub)?;
                let slack = 4.0 * est.stderr;
                Ok(CapCheck {
                    delta,
                    center: center.x,
                    value: est.value,
                    stderr: est.stderr,
                    lower,
                    upper,
                    pass: lower - slack < est.value && est.value < upper + slack,
                })
            })
            .collect();
        for c in checks {
            out.push(c?);
        }
    }
    Ok(out)
}

/// [`cap_bound_report`] that fails on the first violated cap.
pub fn verify_cap_bounds(
    body: &ConvexBody,
    deltas: &[f64],
    trials: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<CapCheck>> {
    let report = cap_bound_report(body, deltas, trials, samples, seed)?;
    if let Some(bad) = report.iter().find(|c| !c.pass) {
        return Err(Error::BoundViolation(format!(
            "cap at {:?} with δ = {}: {} ± {} outside ({}, {})",
            bad.center, bad.delta, bad.value, bad.stderr, bad.lower, bad.upper
        )));
    }
    Ok(report)
}

/// Net-size bounds from a measure whose `δ`-balls have measure between
/// `c_lower δ^k` and `c_upper δ^k`.
pub fn packing_count_bounds(
    total_measure: f64,
    c_upper: f64,
    c_lower: f64,
    k: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    if ![total_measure, c_upper, c_lower, k, delta].iter().all(|v| *v > 0.0) {
        return Err(Error::Precondition("packing bounds need positive arguments".into()));
    }
    let dk = delta.powf(k);
    Ok((total_measure / (c_upper * dk), 2f64.powf(k) * total_measure / (c_lower * dk)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardinalityReport {
    pub count: usize,
    pub delta: f64,
    /// `V_{d-1}(K + Bᵈ)` and its standard error.
    pub side_volume: f64,
    pub side_stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Bounds `c12min V δ^{-(d-1)} < |S| < c12 V δ^{-(d-1)}` for a boundary net,
/// with `V = V_{d-1}(K + Bᵈ)` widened by four standard errors.
pub fn net_cardinality_report(
    net: &DeltaNet,
    volumes: &IntrinsicVolumeVector,
    table: &ConstantsTable,
) -> CardinalityReport {
    let d = volumes.dim;
    let outer = volumes.ball_sum(1.0);
    let (v, se) = (outer.get(d - 1), outer.stderr(d - 1));
    let scale = net.delta.powi(-(d as i32 - 1));
    let lower = table.c12min * (v - 4.0 * se) * scale;
    let upper = table.c12 * (v + 4.0 * se) * scale;
    let count = net.len();
    CardinalityReport {
        count,
        delta: net.delta,
        side_volume: v,
        side_stderr: se,
        lower,
        upper,
        pass: lower < count as f64 && (count as f64) < upper,
    }
}

pub fn verify_net_cardinality(
    net: &DeltaNet,
    volumes: &IntrinsicVolumeVector,
    table: &ConstantsTable,
) -> Result<CardinalityReport> {
    let r = net_cardinality_report(net, volumes, table);
    if !r.pass {
        return Err(Error::BoundViolation(format!(
            "net of {} points at δ = {} outside ({}, {})",
            r.count, r.delta, r.lower, r.upper
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::sample_unit_directions;

    fn circle(n: usize, seed: u64) -> Points {
        let mut r = rng::substream(seed, 0);
        let mut p = Points::with_capacity(2, n);
        for _ in 0..n {
            let a = r.random::<f64>() * std::f64::consts::TAU;
            p.push(&[a.cos(), a.sin()]);
        }
        p
    }

    #[test]
    fn collinear_points_all_accepted() {
        let pts = Points::from_rows(2, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let space = SampledMetricSpace::new(pts, Metric::Euclidean, 0.0).unwrap();
        let net = greedy_net(&space, 0.5, 1).unwrap();
        assert_eq!(net.len(), 3);
        assert!(net.packing_ok && net.covering_ok);
    }

    #[test]
    fn circle_net_size() {
        let space = SampledMetricSpace::new(circle(2000, 3), Metric::Euclidean, 0.0).unwrap();
        for seed in 0..5 {
            let net = greedy_net(&space, 0.5, seed).unwrap();
            // consecutive gaps lie in (θ, 2θ] with θ = 2 asin(1/4)
            assert!((7..=12).contains(&net.len()), "{}", net.len());
            assert!(net.min_center_distance.unwrap() > 0.5);
            assert!(net.covering_radius <= 0.5);
        }
    }

    #[test]
    fn huge_delta_gives_single_center() {
        let space = SampledMetricSpace::new(circle(500, 4), Metric::Euclidean, 0.0).unwrap();
        let net = greedy_net(&space, 2.5, 0).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.min_center_distance, None);
        assert!(net.packing_ok);
    }

    #[test]
    fn density_precondition() {
        let space = SampledMetricSpace::new(circle(100, 5), Metric::Euclidean, 0.2).unwrap();
        assert!(matches!(greedy_net(&space, 0.5, 0), Err(Error::DensityViolation { .. })));
    }

    #[test]
    fn arc_length_net_respects_packing_bounds() {
        let arc: DistanceFn = Arc::new(|a: &[f64], b: &[f64]| {
            let t = (a[1].atan2(a[0]) - b[1].atan2(b[0])).abs();
            t.min(std::f64::consts::TAU - t)
        });
        // chord length never exceeds arc length
        let metric = Metric::Custom { distance: arc, lipschitz: 1.0 };
        let space = SampledMetricSpace::new(circle(20_000, 6), metric, 0.001).unwrap();
        assert!(space.metric_defect(1000, 1) < 1e-9);
        let (lo, hi) = packing_count_bounds(std::f64::consts::TAU, 2.0, 2.0, 1.0, 0.1).unwrap();
        assert!((lo - 31.4159).abs() < 1e-3 && (hi - 62.8318).abs() < 1e-3);
        for seed in 0..3 {
            let net = greedy_net(&space, 0.1, seed).unwrap();
            assert!(net.len() as f64 >= lo && net.len() as f64 <= hi, "{}", net.len());
            assert!(net.packing_ok && net.covering_ok);
        }
        let (lo2, hi2) = packing_count_bounds(std::f64::consts::TAU, 2.0, 2.0, 1.0, 0.2).unwrap();
        assert!((lo2 - lo / 2.0).abs() < 1e-12 && (hi2 - hi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_net_of_ball_within_bounds() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let net = boundary_net(&ball, 0.5, DEFAULT_OVERSAMPLE, 11).unwrap();
        let table = crate::shape::constants(3).unwrap();
        let v = crate::volumes::exact_intrinsic_volumes(&ball).unwrap();
        let report = verify_net_cardinality(&net, &v, &table).unwrap();
        assert!((report.lower - 21.33).abs() < 0.01, "{report:?}");
        assert!((report.upper - 2048.0).abs() < 1e-9, "{report:?}");
        assert!(net.packing_ok && net.covering_ok);
        assert!(net.density_radius <= 0.05);

        let again = boundary_net(&ball, 0.5, DEFAULT_OVERSAMPLE, 11).unwrap();
        assert_eq!(net, again);

        let finer = boundary_net(&ball, 0.25, DEFAULT_OVERSAMPLE, 11).unwrap();
        let ratio = finer.len() as f64 / net.len() as f64;
        assert!(ratio > 2.0 && ratio < 8.0, "{ratio}");
    }

    #[test]
    fn small_segment_net_has_several_points() {
        let seg = ConvexBody::segment(vec![0.0; 3], vec![0.1, 0.0, 0.0]).unwrap();
        let net = boundary_net(&seg, 0.9, DEFAULT_OVERSAMPLE, 2).unwrap();
        assert!(net.len() >= 4);
    }

    #[test]
    fn body_net_projection_contracts() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let net = body_net(&ball, 0.4, DEFAULT_OVERSAMPLE, 5).unwrap();
        let pts = net.boundary.as_ref().unwrap();
        for p in pts {
            assert!(linalg::dist(&p.foot, &linalg::scale(&p.x, 0.5)) < 1e-12);
        }
        for a in 0..pts.len().min(200) {
            for b in 0..a {
                let dx = linalg::dist(&pts[a].x, &pts[b].x);
                assert!(linalg::dist(&pts[a].foot, &pts[b].foot) <= dx + 1e-12);
                assert!(linalg::dist(&pts[a].normal, &pts[b].normal) <= dx + 1e-12);
            }
        }
        assert!(net.packing_ok);
        let table = crate::shape::constants(3).unwrap();
        let bound = table.c12 * 8.0 * std::f64::consts::PI * 0.4f64.powi(-2);
        assert!(!net.is_empty() && (net.len() as f64) < bound);
    }

    #[test]
    fn cube_normals_cover_sphere() {
        let cube = ConvexBody::unit_cube(3).unwrap();
        let delta = 0.4;
        let net = body_net(&cube, delta, DEFAULT_OVERSAMPLE, 8).unwrap();
        let normals = net.normals().unwrap();
        let probes = sample_unit_directions(3, 5000, 9).unwrap();
        let worst = probes
            .iter()
            .map(|u| normals.iter().map(|n| linalg::dist(u, n)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert!(worst <= 2.0 * delta, "{worst}");
    }

    #[test]
    fn cap_examples() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let c = ball.outer_boundary_sample(1.0, &[0.0, 0.0, 1.0]).unwrap();
        let full = cap_area_shell_mc(&ball, &c, 5.0, 0.02, 400_000, 1).unwrap();
        let area = 16.0 * std::f64::consts::PI;
        // the outer shell overestimates the area by about h·(d-1)/(2·2)
        assert!((full.value - area * 1.005).abs() < 4.0 * full.stderr + 0.01 * area, "{full:?}");

        let seg = ConvexBody::segment(vec![0.0; 3], vec![0.1, 0.0, 0.0]).unwrap();
        let c = seg.outer_boundary_sample(1.0, &[0.0, 1.0, 0.0]).unwrap();
        let est = cap_area_shell_mc(&seg, &c, 0.5, 0.025, 100_000, 2).unwrap();
        let (lo, hi) = cap_bounds(3, 0.5);
        assert!((lo - 0.19635).abs() < 1e-5 && (hi - 2.3562).abs() < 1e-4);
        assert!(est.value > lo && est.value < hi);

        let tiny = cap_area_shell_mc(&ball, &c, 1e-3, 1e-4, 10_000, 3);
        assert!(matches!(tiny, Err(Error::InsufficientHits { .. })));
    }

    #[test]
    fn cap_bound_arithmetic() {
        let (lo, hi) = cap_bounds(3, 0.9);
        assert!((lo - 0.6362).abs() < 1e-4 && (hi - 7.634).abs() < 1e-3);
        let (lo, hi) = cap_bounds(2, 0.5);
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
    }
}
