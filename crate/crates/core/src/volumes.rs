//! Intrinsic volumes, isoperimetric ratios and the side polynomial
//! `p(t) = V_{d-1}(tK + Bᵈ)`.
//!
//! Balls, boxes and segments have closed forms. Ellipsoids and polytopes go
//! through Kubota's projection formula
//!
//! ```text
//! V_k(K) = C(d,k) · κ_d / (κ_k κ_{d-k}) · E[vol_k(K | L)]
//! ```
//!
//! over uniformly random k-dimensional subspaces `L`, with the shadow volume
//! computed exactly for each sampled subspace.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodyKind, ConvexBody, Ellipsoid};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, Points};
use crate::polytope::{HPolytope, VERTEX_CAP};
use crate::rng::{self, StreamRng};

pub const DEFAULT_KUBOTA_SAMPLES: usize = 100_000;
pub const DEFAULT_VOLUME_SAMPLES: usize = 1_000_000;

/// Volume of the unit ball in ℝⁿ.
pub fn kappa(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * kappa(n - 2),
    }
}

/// Surface area of the unit sphere `S^{n-1}`.
pub fn omega(n: usize) -> f64 {
    n as f64 * kappa(n)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One intrinsic volume; `stderr` is `None` for exact values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicVolume {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl IntrinsicVolume {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: None }
    }

    pub fn estimated(value: f64, stderr: f64) -> Self {
        Self { value, stderr: Some(stderr) }
    }

    pub fn is_exact(&self) -> bool {
        self.stderr.is_none()
    }
}

/// `V_0..V_d` of a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicVolumeVector {
    pub dim: usize,
    pub values: Vec<IntrinsicVolume>,
}

impl IntrinsicVolumeVector {
    pub fn from_exact(values: Vec<f64>) -> Self {
        let dim = values.len() - 1;
        Self { dim, values: values.into_iter().map(IntrinsicVolume::exact).collect() }
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j].value
    }

    pub fn stderr(&self, j: usize) -> f64 {
        self.values[j].stderr.unwrap_or(0.0)
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(IntrinsicVolume::is_exact)
    }

    pub fn as_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value).collect()
    }

    /// Intrinsic volumes of `tK`.
    pub fn scaled(&self, t: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let f = t.powi(j as i32);
                IntrinsicVolume { value: f * v.value, stderr: v.stderr.map(|s| f * s) }
            })
            .collect();
        Self { dim: self.dim, values }
    }

    /// Intrinsic volumes of `K + rBᵈ`:
    /// `V_j(K + rB) = Σ_{i≤j} C(d-i, j-i) (κ_{d-i}/κ_{d-j}) r^{j-i} V_i(K)`.
    pub fn ball_sum(&self, r: f64) -> Self {
        let d = self.dim;
        let values = (0..=d)
            .map(|j| {
                let mut value = 0.0;
                let mut var = 0.0;
                let mut exact = true;
                for i in 0..=j {
                    let c = binomial(d - i, j - i) * kappa(d - i) / kappa(d - j)
                        * r.powi((j - i) as i32);
                    value += c * self.values[i].value;
                    if let Some(s) = self.values[i].stderr {
                        exact = false;
                        var += (c * s).powi(2);
                    }
                }
                IntrinsicVolume { value, stderr: (!exact).then(|| var.sqrt()) }
            })
            .collect();
        Self { dim: d, values }
    }

    /// `V_j^{1/j} / V_i^{1/i}`.
    pub fn ratio(&self, i: usize, j: usize) -> Result<f64> {
        if !(1 <= i && i < j && j <= self.dim) {
            return Err(Error::Precondition(format!(
                "isoperimetric ratio needs 1 <= i < j <= {}, got ({i}, {j})",
                self.dim
            )));
        }
        let vi = self.get(i);
        if vi <= 0.0 {
            return Err(Error::DegenerateBody(format!("V_{i} = {vi}")));
        }
        let vj = self.get(j).max(0.0);
        Ok(vj.powf(1.0 / j as f64) / vi.powf(1.0 / i as f64))
    }

    /// `V_d(K + εBᵈ) = Σ_j ε^{d-j} κ_{d-j} V_j(K)`.
    pub fn steiner_volume(&self, eps: f64) -> f64 {
        let d = self.dim;
        (0..=d)
            .map(|j| eps.powi((d - j) as i32) * kappa(d - j) * self.get(j))
            .sum()
    }
}

/// Sampling configuration for Monte-Carlo intrinsic volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeOptions {
    pub samples: usize,
    pub seed: u64,
    pub vertex_cap: usize,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_KUBOTA_SAMPLES, seed: 0, vertex_cap: VERTEX_CAP }
    }
}

impl VolumeOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

fn elementary_symmetric(a: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; a.len() + 1];
    e[0] = 1.0;
    for (n, &x) in a.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// Closed-form intrinsic volumes of balls, boxes and segments, and of scaled
/// copies and parallel bodies of those.
pub fn exact_intrinsic_volumes(body: &ConvexBody) -> Result<IntrinsicVolumeVector> {
    let d = body.dim();
    match body.kind() {
        BodyKind::Ball { radius, .. } => Ok(IntrinsicVolumeVector::from_exact(
            (0..=d)
                .map(|j| binomial(d, j) * kappa(d) / kappa(d - j) * radius.powi(j as i32))
                .collect(),
        )),
        BodyKind::Box { sides, .. } => {
            Ok(IntrinsicVolumeVector::from_exact(elementary_symmetric(sides)))
        }
        BodyKind::Segment { a, b } => {
            let mut v = vec![0.0; d + 1];
            v[0] = 1.0;
            v[1] = linalg::dist(a, b);
            Ok(IntrinsicVolumeVector::from_exact(v))
        }
        BodyKind::Scaled { inner, factor } => Ok(exact_intrinsic_volumes(inner)?.scaled(*factor)),
        BodyKind::BallSum { inner, radius } => {
            Ok(exact_intrinsic_volumes(inner)?.ball_sum(*radius))
        }
        BodyKind::Ellipsoid(_) => Err(Error::Unsupported("no closed form for ellipsoids")),
        BodyKind::Polytope(_) => Err(Error::Unsupported("no closed form for general polytopes")),
    }
}

/// All intrinsic volumes, exact where a closed form exists and Kubota
/// estimates otherwise.
pub fn intrinsic_volumes(body: &ConvexBody, opts: &VolumeOptions) -> Result<IntrinsicVolumeVector> {
    let d = body.dim();
    match body.kind() {
        BodyKind::Ball { .. } | BodyKind::Box { .. } | BodyKind::Segment { .. } => {
            exact_intrinsic_volumes(body)
        }
        BodyKind::Scaled { inner, factor } => Ok(intrinsic_volumes(inner, opts)?.scaled(*factor)),
        BodyKind::BallSum { inner, radius } => {
            Ok(intrinsic_volumes(inner, opts)?.ball_sum(*radius))
        }
        BodyKind::Ellipsoid(_) | BodyKind::Polytope(_) => {
            let mut values = vec![IntrinsicVolume::exact(1.0)];
            for k in 1..d {
                let (v, se) = kubota_with(body, k, opts)?;
                values.push(IntrinsicVolume::estimated(v, se));
            }
            values.push(IntrinsicVolume::exact(full_volume(body, opts.vertex_cap)?));
            Ok(IntrinsicVolumeVector { dim: d, values })
        }
    }
}

fn full_volume(body: &ConvexBody, cap: usize) -> Result<f64> {
    match body.kind() {
        BodyKind::Ellipsoid(e) => Ok(kappa(body.dim()) * e.semi_axes().iter().product::<f64>()),
        BodyKind::Polytope(p) => {
            let verts = p.vertices_with_cap(cap)?;
            hull_volume(verts)
        }
        _ => Ok(exact_intrinsic_volumes(body)?.get(body.dim())),
    }
}

/// Kubota estimate of `V_k(K)` with `samples` random subspaces; returns
/// `(value, stderr)`.
pub fn kubota_estimate(body: &ConvexBody, k: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    kubota_with(body, k, &VolumeOptions { samples, seed, vertex_cap: VERTEX_CAP })
}

pub fn kubota_with(body: &ConvexBody, k: usize, opts: &VolumeOptions) -> Result<(f64, f64)> {
    let d = body.dim();
    if !(1..d).contains(&k) {
        return Err(Error::Precondition(format!("Kubota order must be in 1..{d}, got {k}")));
    }
    if opts.samples == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let seed = opts.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let factor = binomial(d, k) * kappa(d) / (kappa(k) * kappa(d - k));
    let moments = match body.kind() {
        BodyKind::Ball { radius, .. } => {
            return Ok((factor * kappa(k) * radius.powi(k as i32), 0.0));
        }
        BodyKind::Segment { .. } => return Ok((exact_intrinsic_volumes(body)?.get(k), 0.0)),
        BodyKind::Scaled { inner, factor: t } => {
            let (v, se) = kubota_with(inner, k, opts)?;
            let f = t.powi(k as i32);
            return Ok((f * v, f * se));
        }
        BodyKind::BallSum { inner, radius } => {
            let mut values = vec![IntrinsicVolume::exact(1.0)];
            for i in 1..=k {
                let (v, se) = kubota_with(inner, i, opts)?;
                values.push(IntrinsicVolume::estimated(v, se));
            }
            values.resize(d + 1, IntrinsicVolume::exact(0.0));
            let partial = IntrinsicVolumeVector { dim: d, values }.ball_sum(*radius);
            return Ok((partial.get(k), partial.stderr(k)));
        }
        BodyKind::Box { sides, .. } => rng::parallel_moments(opts.samples, seed, |r| {
            let u = random_subspace(r, d, k);
            Ok(zonotope_volume(&u, sides))
        })?,
        BodyKind::Ellipsoid(e) => rng::parallel_moments(opts.samples, seed, |r| {
            let u = random_subspace(r, d, k);
            Ok(ellipsoid_shadow(e, &u))
        })?,
        BodyKind::Polytope(p) => {
            let verts = polytope_vertices(p, opts.vertex_cap)?;
            rng::parallel_moments(opts.samples, seed, |r| {
                let u = random_subspace(r, d, k);
                let mut shadow = Points::with_capacity(k, verts.len());
                for v in verts.iter() {
                    let c: Vec<f64> = u.iter().map(|ui| dot(ui, v)).collect();
                    shadow.push(&c);
                }
                hull_volume(&shadow)
            })?
        }
    };
    Ok((factor * moments.mean, factor * moments.stderr()))
}

fn polytope_vertices(p: &HPolytope, cap: usize) -> Result<&Points> {
    p.vertices_with_cap(cap)
}

/// Orthonormal basis (k rows) of a uniformly random k-dimensional subspace.
fn random_subspace(r: &mut StreamRng, d: usize, k: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut g = rng::gaussian_vector(r, d);
        for b in &basis {
            let c = dot(&g, b);
            for (gi, bi) in g.iter_mut().zip(b) {
                *gi -= c * bi;
            }
        }
        if let Some(u) = linalg::normalized(&g) {
            if linalg::norm(&g) > 1e-8 {
                basis.push(u);
            }
        }
    }
    basis
}

fn det(m: Vec<Vec<f64>>) -> f64 {
    let k = m.len();
    nalgebra::DMatrix::from_fn(k, k, |i, j| m[i][j]).determinant()
}

fn ellipsoid_shadow(e: &Ellipsoid, u: &[Vec<f64>]) -> f64 {
    // Gram matrix of the projected semi-axis vectors: UᵀMU with M = Σ a_i² f_i f_iᵀ
    let k = u.len();
    let proj: Vec<Vec<f64>> = e
        .frame()
        .iter()
        .zip(e.semi_axes())
        .map(|(f, a)| u.iter().map(|ui| a * dot(ui, f)).collect())
        .collect();
    let g: Vec<Vec<f64>> = (0..k)
        .map(|r| (0..k).map(|c| proj.iter().map(|p| p[r] * p[c]).sum()).collect())
        .collect();
    kappa(k) * det(g).max(0.0).sqrt()
}

/// Volume of the zonotope `Σ_i [0, s_i Uᵀe_i]`.
fn zonotope_volume(u: &[Vec<f64>], sides: &[f64]) -> f64 {
    let k = u.len();
    let d = sides.len();
    let gens: Vec<Vec<f64>> = (0..d).map(|i| u.iter().map(|row| row[i] * sides[i]).collect()).collect();
    let mut total = 0.0;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        total += det(subset.iter().map(|&i| gens[i].clone()).collect()).abs();
        // next k-subset in lexicographic order
        let mut pos = k;
        while pos > 0 && subset[pos - 1] == d - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        subset[pos - 1] += 1;
        for q in pos..k {
            subset[q] = subset[q - 1] + 1;
        }
    }
    total
}

/// k-volume of the convex hull of a point set in ℝᵏ.
pub fn hull_volume(points: &Points) -> Result<f64> {
    let k = points.dim();
    match k {
        0 => Ok(0.0),
        1 => {
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[0]), h.max(p[0])));
            Ok((hi - lo).max(0.0))
        }
        2 => Ok(polygon_area(points)),
        _ => {
            let rows = points.to_rows();
            let scale = rows
                .iter()
                .flat_map(|r| r.iter().map(|v| v.abs()))
                .fold(0.0, f64::max)
                .max(1.0);
            let hull = chull::ConvexHull::try_new(&rows, 1e-12 * scale, None)
                .map_err(|e| Error::DegenerateBody(format!("convex hull failed: {e}")))?;
            Ok(hull.volume().abs())
        }
    }
}

/// Area of the convex hull of planar points (monotone chain).
fn polygon_area(points: &Points) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// `V_j(K)^{1/j} / V_i(K)^{1/i}`.
pub fn isoperimetric_ratio(body: &ConvexBody, i: usize, j: usize, opts: &VolumeOptions) -> Result<f64> {
    intrinsic_volumes(body, opts)?.ratio(i, j)
}

/// Whether the `(i, j)` isoperimetric ratio of `K` is below `eps`.
pub fn is_elongated(body: &ConvexBody, eps: f64, i: usize, j: usize, opts: &VolumeOptions) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    Ok(isoperimetric_ratio(body, i, j, opts)? < eps)
}

/// `p(t) = Σ_{k<d} a_k t^k = V_{d-1}(tK + Bᵈ)` with `a_k = (d-k) κ_{d-k} V_k(K) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidePolynomial {
    pub dim: usize,
    pub coefficients: Vec<f64>,
}

impl SidePolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, a)| acc * t + k as f64 * a)
    }
}

pub fn side_polynomial(v: &IntrinsicVolumeVector) -> SidePolynomial {
    let d = v.dim;
    let coefficients = (0..d)
        .map(|k| (d - k) as f64 * kappa(d - k) / 2.0 * v.get(k).max(0.0))
        .collect();
    SidePolynomial { dim: d, coefficients }
}

pub fn eval_side(p: &SidePolynomial, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("t must be positive, got {t}")));
    }
    Ok(p.eval(t))
}

fn sample_box(r: &mut StreamRng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(l, h)| l + (h - l) * r.random::<f64>()).collect()
}

/// Rejection-sampling estimate of `V_d(K + εBᵈ)`; returns `(value, stderr)`.
pub fn mc_parallel_volume(body: &ConvexBody, eps: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::Precondition("need at least 1000 samples".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!("eps must be nonnegative, got {eps}")));
    }
    let (mut lo, mut hi) = body.bounding_box()?;
    lo.iter_mut().for_each(|v| *v -= eps);
    hi.iter_mut().for_each(|v| *v += eps);
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let m = rng::parallel_moments(samples, seed, |r| {
        let x = sample_box(r, &lo, &hi);
        Ok(if body.distance_to(&x)? <= eps { 1.0 } else { 0.0 })
    })?;
    Ok((box_vol * m.mean, box_vol * m.stderr()))
}

/// Shell estimate of the boundary measure `H^{d-1}(∂(K + rBᵈ))` from the
/// volume of `{r - h/2 < dist(x, K) ≤ r + h/2}` divided by `h`.
pub fn mc_boundary_measure(
    body: &ConvexBody,
    r: f64,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(r > 0.0 && h > 0.0 && h < 2.0 * r) {
        return Err(Error::Precondition(format!("need 0 < h < 2r, got r = {r}, h = {h}")));
    }
    let outer = r + h / 2.0;
    let inner = r - h / 2.0;
    let (mut lo, mut hi) = body.bounding_box()?;
    lo.iter_mut().for_each(|v| *v -= outer);
    hi.iter_mut().for_each(|v| *v += outer);
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let m = rng::parallel_moments(samples, seed, |rg| {
        let x = sample_box(rg, &lo, &hi);
        let dist = body.distance_to(&x)?;
        Ok(if dist > inner && dist <= outer { 1.0 } else { 0.0 })
    })?;
    Ok((box_vol * m.mean / h, box_vol * m.stderr() / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_constants() {
        assert_eq!(kappa(0), 1.0);
        assert_eq!(kappa(1), 2.0);
        assert!((kappa(2) - PI).abs() < 1e-15);
        assert!((kappa(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI).abs() < 1e-14);
        // Gamma-function form at n = 7
        assert!((kappa(7) - 16.0 * PI.powi(3) / 105.0).abs() < 1e-12);
    }

    #[test]
    fn exact_vectors() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let v = exact_intrinsic_volumes(&ball).unwrap().as_values();
        let expect = [1.0, 4.0, 2.0 * PI, 4.0 * PI / 3.0];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
        let bx = ConvexBody::cuboid(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(exact_intrinsic_volumes(&bx).unwrap().as_values(), vec![1.0, 6.0, 11.0, 6.0]);
        let seg = ConvexBody::segment(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(exact_intrinsic_volumes(&seg).unwrap().as_values(), vec![1.0, 2.0, 0.0, 0.0]);
        let e = ConvexBody::ellipsoid_aligned(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(exact_intrinsic_volumes(&e), Err(Error::Unsupported(_))));
    }

    #[test]
    fn parallel_body_of_point_like_segment_matches_ball() {
        // V_j(K + rB) for tiny K approaches V_j(rB)
        let seg = ConvexBody::segment(vec![0.0; 3], vec![1e-9, 0.0, 0.0]).unwrap();
        let sum = ConvexBody::ball_sum(seg, 2.0).unwrap();
        let v = exact_intrinsic_volumes(&sum).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::ball(vec![0.0; 3], 2.0).unwrap()).unwrap();
        for j in 0..=3 {
            assert!((v.get(j) - ball.get(j)).abs() < 1e-7);
        }
    }

    #[test]
    fn kubota_matches_exact() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let (v, _) = kubota_estimate(&ball, 1, 1000, 1).unwrap();
        assert!((v - 4.0).abs() < 1e-12);

        let bx = ConvexBody::cuboid(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let (v, se) = kubota_estimate(&bx, 2, 100_000, 2).unwrap();
        assert!((v - 11.0).abs() < 3.0 * se, "{v} ± {se}");
        let (v, se) = kubota_estimate(&bx, 1, 100_000, 3).unwrap();
        assert!((v - 6.0).abs() < 3.0 * se, "{v} ± {se}");

        let seg = ConvexBody::segment(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(kubota_estimate(&seg, 1, 1000, 4).unwrap(), (2.0, 0.0));
    }

    #[test]
    fn kubota_round_ellipsoid_is_ball() {
        let e = ConvexBody::ellipsoid_aligned(vec![1.0; 4]).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(4).unwrap()).unwrap();
        for k in 1..4 {
            let (v, se) = kubota_estimate(&e, k, 2000, 5).unwrap();
            assert!((v - ball.get(k)).abs() < 1e-10);
            assert!(se < 1e-10);
        }
    }

    #[test]
    fn polytope_kubota_matches_box() {
        use crate::polytope::Halfspace;
        let mut hs = Vec::new();
        for (k, side) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            let mut n = vec![0.0; 3];
            n[k] = 1.0;
            hs.push(Halfspace { normal: n.clone(), offset: side });
            n[k] = -1.0;
            hs.push(Halfspace { normal: n, offset: 0.0 });
        }
        let p = ConvexBody::h_polytope(&hs).unwrap();
        let v = intrinsic_volumes(&p, &VolumeOptions { samples: 20_000, ..Default::default() }).unwrap();
        assert!((v.get(3) - 6.0).abs() < 1e-9);
        assert!((v.get(1) - 6.0).abs() < 4.0 * v.stderr(1));
        assert!((v.get(2) - 11.0).abs() < 4.0 * v.stderr(2));
    }

    #[test]
    fn hull_volumes() {
        let sq = Points::from_rows(2, [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        assert!((hull_volume(&sq).unwrap() - 1.0).abs() < 1e-15);
        let mut cube = Points::new(3);
        for m in 0..8 {
            cube.push(&[(m & 1) as f64, ((m >> 1) & 1) as f64 * 2.0, ((m >> 2) & 1) as f64]);
        }
        assert!((hull_volume(&cube).unwrap() - 2.0).abs() < 1e-12);
        let seg = Points::from_rows(1, [[3.0], [-1.0], [0.5]]);
        assert_eq!(hull_volume(&seg).unwrap(), 4.0);
    }

    #[test]
    fn ratios_and_elongation() {
        let opts = VolumeOptions::default();
        let ball = ConvexBody::unit_ball(4).unwrap();
        let r = isoperimetric_ratio(&ball, 1, 2, &opts).unwrap();
        let expect = (3.0 * PI).sqrt() / (1.5 * PI);
        assert!((r - expect).abs() < 1e-12);
        assert!((r - 0.6515).abs() < 1e-4);
        assert!(!is_elongated(&ball, 0.5, 1, 2, &opts).unwrap());

        let big = ConvexBody::ball(vec![1.0; 4], 7.5).unwrap();
        assert!((isoperimetric_ratio(&big, 1, 2, &opts).unwrap() - r).abs() < 1e-12);

        let seg = ConvexBody::segment(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(isoperimetric_ratio(&seg, 1, 2, &opts).unwrap(), 0.0);
        assert!(is_elongated(&seg, 1e-6, 1, 2, &opts).unwrap());
        assert!(matches!(isoperimetric_ratio(&seg, 2, 3, &opts), Err(Error::DegenerateBody(_))));
    }

    #[test]
    fn side_polynomial_examples() {
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(3).unwrap()).unwrap();
        let p = side_polynomial(&ball);
        let expect = [2.0 * PI, 4.0 * PI, 2.0 * PI];
        for (a, b) in p.coefficients.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!((eval_side(&p, 1.0).unwrap() - 8.0 * PI).abs() < 1e-12);

        let seg = ConvexBody::segment(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let p = side_polynomial(&exact_intrinsic_volumes(&seg).unwrap());
        assert!((eval_side(&p, 3.0).unwrap() - (2.0 * PI + 6.0 * PI)).abs() < 1e-12);

        for d in 2..=6 {
            let mut v = vec![0.0; d + 1];
            v[0] = 1.0;
            let p = side_polynomial(&IntrinsicVolumeVector::from_exact(v));
            let vb = exact_intrinsic_volumes(&ConvexBody::unit_ball(d).unwrap()).unwrap();
            assert!((eval_side(&p, 0.37).unwrap() - vb.get(d - 1)).abs() < 1e-12);
        }
        assert!(eval_side(&p, 0.0).is_err());
    }

    #[test]
    fn side_polynomial_is_parallel_body_side_volume() {
        // p(t) = V_{d-1}(tK + B) computed independently through the Steiner expansion
        let bx = ConvexBody::cuboid(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let v = exact_intrinsic_volumes(&bx).unwrap();
        let p = side_polynomial(&v);
        for t in [0.3, 1.0, 2.5] {
            let direct = v.scaled(t).ball_sum(1.0).get(2);
            assert!((p.eval(t) - direct).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn parallel_volume_monte_carlo() {
        let ball = ConvexBody::unit_ball(3).unwrap();
        let (v, se) = mc_parallel_volume(&ball, 1.0, 200_000, 1).unwrap();
        assert!((v - 32.0 * PI / 3.0).abs() < 3.0 * se);
        let cube = ConvexBody::unit_cube(3).unwrap();
        let (v, se) = mc_parallel_volume(&cube, 1.0, 200_000, 2).unwrap();
        assert!((v - (7.0 + 3.0 * PI + 4.0 * PI / 3.0)).abs() < 3.0 * se);
        let seg = ConvexBody::segment(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let (v, se) = mc_parallel_volume(&seg, 1.0, 200_000, 3).unwrap();
        assert!((v - 10.0 * PI / 3.0).abs() < 3.0 * se);
        assert!(mc_parallel_volume(&seg, 1.0, 10, 3).is_err());
    }
}
