//! Oracle model of convex bodies.
//!
//! A body is never meshed. Everything downstream goes through three oracles:
//! the support function `h_K(u) = max_{x∈K} ⟨x, u⟩`, a support point realizing
//! it, and the nearest-point projection onto `K`. Boundary points of the outer
//! parallel body `K + rBᵈ` are obtained from the support point as
//! `s_K(u) + r·u`.
//!
//! Set-valued support points (segment endpoints tying, box faces, polytope
//! faces) resolve to the lexicographically smallest extreme point of the
//! maximizing face, which keeps every downstream construction deterministic.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Points};
use crate::polytope::{HPolytope, Halfspace};
use crate::rng;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;
/// Default iteration cap for iterative projections.
pub const PROJECTION_STEPS: usize = 10_000;

const UNIT_TOL: f64 = 1e-12;

/// Serializable description of a body, e.g.
/// `{"dim": 3, "variant": "ellipsoid", "semi_axes": [1, 0.3, 0.2]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexBodySpec {
    pub dim: usize,
    #[serde(flatten)]
    pub variant: BodyVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BodyVariant {
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    Ellipsoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        semi_axes: Vec<f64>,
        /// Axis directions `f_1..f_d`, one row each; identity when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<Vec<Vec<f64>>>,
    },
    Segment {
        endpoints: [Vec<f64>; 2],
    },
    Box {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_corner: Option<Vec<f64>>,
        sides: Vec<f64>,
    },
    HPolytope {
        halfspaces: Vec<Halfspace>,
    },
    Scaled {
        inner: std::boxed::Box<ConvexBodySpec>,
        factor: f64,
    },
    BallSum {
        inner: std::boxed::Box<ConvexBodySpec>,
        radius: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: Vec<f64>,
    semi_axes: Vec<f64>,
    /// Rows are the unit axis directions.
    frame: Vec<Vec<f64>>,
}

impl Ellipsoid {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// The matrix `M = Σ a_i² f_i f_iᵀ`; the ellipsoid is `{c + M^{1/2} y : |y| ≤ 1}`.
    pub fn shape_matrix(&self) -> DMatrix<f64> {
        let d = self.center.len();
        DMatrix::from_fn(d, d, |r, c| {
            self.semi_axes
                .iter()
                .zip(&self.frame)
                .map(|(a, f)| a * a * f[r] * f[c])
                .sum()
        })
    }

    fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let y = linalg::sub(x, &self.center);
        self.frame.iter().map(|f| dot(f, &y)).collect()
    }

    fn from_local(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.center.clone();
        for (zi, f) in z.iter().zip(&self.frame) {
            for (xk, fk) in x.iter_mut().zip(f) {
                *xk += zi * fk;
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
pub enum BodyKind {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid(Ellipsoid),
    Segment { a: Vec<f64>, b: Vec<f64> },
    Box { min: Vec<f64>, sides: Vec<f64> },
    Polytope(Arc<HPolytope>),
    Scaled { inner: Arc<ConvexBody>, factor: f64 },
    BallSum { inner: Arc<ConvexBody>, radius: f64 },
}

/// A validated, immutable convex body.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    kind: BodyKind,
}

/// A point of `∂(K + rBᵈ)` with its nearest point on `K` and the unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterBoundaryPoint {
    pub x: Vec<f64>,
    pub foot: Vec<f64>,
    pub normal: Vec<f64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidBody(format!(
            "dimension {dim} outside {MIN_DIM}..={MAX_DIM}"
        )));
    }
    Ok(())
}

fn check_point(p: &[f64], dim: usize, what: &str) -> Result<()> {
    if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidBody(format!("{what} must be {dim} finite coordinates")));
    }
    Ok(())
}

fn check_positive(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidBody(format!("{what} must be positive, got {v}")));
    }
    Ok(())
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dim = center.len();
        check_dim(dim)?;
        check_point(&center, dim, "center")?;
        check_positive(radius, "radius")?;
        Ok(Self { dim, kind: BodyKind::Ball { center, radius } })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(vec![0.0; dim], 1.0)
    }

    /// Ellipsoid with the given axis directions (rows of `frame`).
    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>, frame: Vec<Vec<f64>>) -> Result<Self> {
        let dim = center.len();
        check_dim(dim)?;
        check_point(&center, dim, "center")?;
        if semi_axes.len() != dim || frame.len() != dim {
            return Err(Error::InvalidBody("ellipsoid needs d semi-axes and d frame rows".into()));
        }
        for &a in &semi_axes {
            check_positive(a, "semi-axis")?;
        }
        for (i, fi) in frame.iter().enumerate() {
            check_point(fi, dim, "frame row")?;
            for (j, fj) in frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot(fi, fj) - expect).abs() > 1e-9 {
                    return Err(Error::InvalidBody("ellipsoid frame is not orthonormal".into()));
                }
            }
        }
        Ok(Self { dim, kind: BodyKind::Ellipsoid(Ellipsoid { center, semi_axes, frame }) })
    }

    /// Origin-centred ellipsoid with axes along the coordinate directions.
    pub fn ellipsoid_aligned(semi_axes: Vec<f64>) -> Result<Self> {
        let d = semi_axes.len();
        let frame = (0..d).map(|k| linalg::unit(d, k)).collect();
        Self::ellipsoid(vec![0.0; d], semi_axes, frame)
    }

    pub fn segment(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let dim = a.len();
        check_dim(dim)?;
        check_point(&a, dim, "endpoint")?;
        check_point(&b, dim, "endpoint")?;
        if linalg::dist(&a, &b) <= 0.0 {
            return Err(Error::InvalidBody("segment endpoints coincide".into()));
        }
        Ok(Self { dim, kind: BodyKind::Segment { a, b } })
    }

    /// Axis-aligned box `[min, min + sides]`.
    pub fn cuboid(min: Vec<f64>, sides: Vec<f64>) -> Result<Self> {
        let dim = min.len();
        check_dim(dim)?;
        check_point(&min, dim, "min corner")?;
        if sides.len() != dim {
            return Err(Error::InvalidBody("box needs d side lengths".into()));
        }
        for &s in &sides {
            check_positive(s, "side length")?;
        }
        Ok(Self { dim, kind: BodyKind::Box { min, sides } })
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::cuboid(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn h_polytope(halfspaces: &[Halfspace]) -> Result<Self> {
        let poly = HPolytope::new(halfspaces)?;
        Self::from_polytope(poly)
    }

    pub fn from_polytope(poly: HPolytope) -> Result<Self> {
        let dim = poly.dim();
        check_dim(dim)?;
        if !poly.is_bounded() {
            return Err(Error::UnboundedBody);
        }
        let verts = poly.vertices()?;
        let first = verts.row(0);
        if verts.iter().all(|v| linalg::dist(v, first) <= 1e-12) {
            return Err(Error::InvalidBody("polytope is a single point".into()));
        }
        Ok(Self { dim, kind: BodyKind::Polytope(Arc::new(poly)) })
    }

    pub fn scaled(inner: ConvexBody, factor: f64) -> Result<Self> {
        check_positive(factor, "scale factor")?;
        Ok(Self { dim: inner.dim, kind: BodyKind::Scaled { inner: Arc::new(inner), factor } })
    }

    pub fn ball_sum(inner: ConvexBody, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("ball radius must be nonnegative, got {radius}")));
        }
        Ok(Self { dim: inner.dim, kind: BodyKind::BallSum { inner: Arc::new(inner), radius } })
    }

    pub fn from_spec(spec: &ConvexBodySpec) -> Result<Self> {
        let d = spec.dim;
        check_dim(d)?;
        let center = |c: &Option<Vec<f64>>| c.clone().unwrap_or_else(|| vec![0.0; d]);
        let body = match &spec.variant {
            BodyVariant::Ball { center: c, radius } => Self::ball(center(c), *radius)?,
            BodyVariant::Ellipsoid { center: c, semi_axes, frame } => {
                let frame =
                    frame.clone().unwrap_or_else(|| (0..d).map(|k| linalg::unit(d, k)).collect());
                Self::ellipsoid(center(c), semi_axes.clone(), frame)?
            }
            BodyVariant::Segment { endpoints } => {
                Self::segment(endpoints[0].clone(), endpoints[1].clone())?
            }
            BodyVariant::Box { min_corner, sides } => Self::cuboid(center(min_corner), sides.clone())?,
            BodyVariant::HPolytope { halfspaces } => Self::h_polytope(halfspaces)?,
            BodyVariant::Scaled { inner, factor } => Self::scaled(Self::from_spec(inner)?, *factor)?,
            BodyVariant::BallSum { inner, radius } => {
                Self::ball_sum(Self::from_spec(inner)?, *radius)?
            }
        };
        if body.dim != d {
            return Err(Error::InvalidBody(format!(
                "declared dim {d} but the {} data has dimension {}",
                body.kind_name(),
                body.dim
            )));
        }
        Ok(body)
    }

    pub fn spec(&self) -> ConvexBodySpec {
        let variant = match &self.kind {
            BodyKind::Ball { center, radius } => {
                BodyVariant::Ball { center: Some(center.clone()), radius: *radius }
            }
            BodyKind::Ellipsoid(e) => BodyVariant::Ellipsoid {
                center: Some(e.center.clone()),
                semi_axes: e.semi_axes.clone(),
                frame: Some(e.frame.clone()),
            },
            BodyKind::Segment { a, b } => BodyVariant::Segment { endpoints: [a.clone(), b.clone()] },
            BodyKind::Box { min, sides } => {
                BodyVariant::Box { min_corner: Some(min.clone()), sides: sides.clone() }
            }
            BodyKind::Polytope(p) => BodyVariant::HPolytope { halfspaces: p.halfspaces() },
            BodyKind::Scaled { inner, factor } => {
                BodyVariant::Scaled { inner: std::boxed::Box::new(inner.spec()), factor: *factor }
            }
            BodyKind::BallSum { inner, radius } => {
                BodyVariant::BallSum { inner: std::boxed::Box::new(inner.spec()), radius: *radius }
            }
        };
        ConvexBodySpec { dim: self.dim, variant }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            BodyKind::Ball { .. } => "ball",
            BodyKind::Ellipsoid(_) => "ellipsoid",
            BodyKind::Segment { .. } => "segment",
            BodyKind::Box { .. } => "box",
            BodyKind::Polytope(_) => "h_polytope",
            BodyKind::Scaled { .. } => "scaled",
            BodyKind::BallSum { .. } => "ball_sum",
        }
    }

    /// `self + shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        check_point(shift, self.dim, "translation")?;
        let kind = match &self.kind {
            BodyKind::Ball { center, radius } => {
                BodyKind::Ball { center: linalg::add(center, shift), radius: *radius }
            }
            BodyKind::Ellipsoid(e) => BodyKind::Ellipsoid(Ellipsoid {
                center: linalg::add(&e.center, shift),
                ..e.clone()
            }),
            BodyKind::Segment { a, b } => {
                BodyKind::Segment { a: linalg::add(a, shift), b: linalg::add(b, shift) }
            }
            BodyKind::Box { min, sides } => {
                BodyKind::Box { min: linalg::add(min, shift), sides: sides.clone() }
            }
            BodyKind::Polytope(p) => {
                let hs: Vec<Halfspace> = p
                    .halfspaces()
                    .into_iter()
                    .map(|h| Halfspace { offset: h.offset + dot(&h.normal, shift), normal: h.normal })
                    .collect();
                BodyKind::Polytope(Arc::new(HPolytope::new(&hs)?))
            }
            BodyKind::Scaled { inner, factor } => BodyKind::Scaled {
                inner: Arc::new(inner.translated(&linalg::scale(shift, 1.0 / factor))?),
                factor: *factor,
            },
            BodyKind::BallSum { inner, radius } => BodyKind::BallSum {
                inner: Arc::new(inner.translated(shift)?),
                radius: *radius,
            },
        };
        Ok(Self { dim: self.dim, kind })
    }

    fn check_unit(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::Precondition(format!(
                "direction has {} coordinates, body has dimension {}",
                u.len(),
                self.dim
            )));
        }
        let n = linalg::norm(u);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::Precondition(format!("direction norm {n} is not 1")));
        }
        Ok(())
    }

    /// `h_K(u)` for a unit vector `u`.
    pub fn support_value(&self, u: &[f64]) -> Result<f64> {
        self.check_unit(u)?;
        self.h(u)
    }

    /// The support function extended positively homogeneously to all of ℝᵈ.
    pub fn support_function(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Precondition("dimension mismatch".into()));
        }
        match linalg::normalized(x) {
            None => Ok(0.0),
            Some(u) => Ok(linalg::norm(x) * self.h(&u)?),
        }
    }

    fn h(&self, u: &[f64]) -> Result<f64> {
        Ok(match &self.kind {
            BodyKind::Ball { center, radius } => dot(center, u) + radius * linalg::norm(u),
            BodyKind::Ellipsoid(e) => {
                let q: f64 = e
                    .semi_axes
                    .iter()
                    .zip(&e.frame)
                    .map(|(a, f)| {
                        let t = a * dot(f, u);
                        t * t
                    })
                    .sum();
                dot(&e.center, u) + q.sqrt()
            }
            BodyKind::Segment { a, b } => dot(a, u).max(dot(b, u)),
            BodyKind::Box { min, sides } => min
                .iter()
                .zip(sides)
                .zip(u)
                .map(|((m, s), ui)| if *ui > 0.0 { (m + s) * ui } else { m * ui })
                .sum(),
            BodyKind::Polytope(p) => p.support(u).map_err(|e| match e {
                Error::Unbounded => Error::UnboundedBody,
                e => e,
            })?,
            BodyKind::Scaled { inner, factor } => factor * inner.h(u)?,
            BodyKind::BallSum { inner, radius } => inner.h(u)? + radius * linalg::norm(u),
        })
    }

    /// A point `s ∈ K` with `⟨s, u⟩ = h_K(u)`; ties resolve to the
    /// lexicographically smallest extreme point of the maximizing face.
    pub fn support_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_unit(u)?;
        self.s(u)
    }

    fn s(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            BodyKind::Ball { center, radius } => linalg::axpy(center, *radius, u),
            BodyKind::Ellipsoid(e) => {
                let coeff: Vec<f64> =
                    e.semi_axes.iter().zip(&e.frame).map(|(a, f)| a * a * dot(f, u)).collect();
                let q: f64 = e
                    .semi_axes
                    .iter()
                    .zip(&e.frame)
                    .map(|(a, f)| (a * dot(f, u)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if q > 0.0 {
                    let z: Vec<f64> = coeff.iter().map(|c| c / q).collect();
                    e.from_local(&z)
                } else {
                    e.center.clone()
                }
            }
            BodyKind::Segment { a, b } => {
                let (ha, hb) = (dot(a, u), dot(b, u));
                let tie = (ha - hb).abs() <= 1e-14 * (ha.abs() + hb.abs());
                if tie {
                    if linalg::lex_less(b, a) { b.clone() } else { a.clone() }
                } else if ha > hb {
                    a.clone()
                } else {
                    b.clone()
                }
            }
            BodyKind::Box { min, sides } => min
                .iter()
                .zip(sides)
                .zip(u)
                .map(|((m, s), ui)| if *ui > 0.0 { m + s } else { *m })
                .collect(),
            BodyKind::Polytope(p) => p.lex_support_point(u)?,
            BodyKind::Scaled { inner, factor } => linalg::scale(&inner.s(u)?, *factor),
            BodyKind::BallSum { inner, radius } => linalg::axpy(&inner.s(u)?, *radius, u),
        })
    }

    /// Nearest point of `K` to `x`.
    pub fn project_onto(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.project_with_cap(x, PROJECTION_STEPS)
    }

    pub fn project_with_cap(&self, x: &[f64], max_steps: usize) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Precondition("dimension mismatch".into()));
        }
        Ok(match &self.kind {
            BodyKind::Ball { center, radius } => {
                let v = linalg::sub(x, center);
                let n = linalg::norm(&v);
                if n <= *radius {
                    x.to_vec()
                } else {
                    linalg::axpy(center, radius / n, &v)
                }
            }
            BodyKind::Ellipsoid(e) => project_ellipsoid(e, x, max_steps)?,
            BodyKind::Segment { a, b } => {
                let ab = linalg::sub(b, a);
                let t = (dot(&linalg::sub(x, a), &ab) / dot(&ab, &ab)).clamp(0.0, 1.0);
                linalg::axpy(a, t, &ab)
            }
            BodyKind::Box { min, sides } => x
                .iter()
                .zip(min)
                .zip(sides)
                .map(|((xi, m), s)| xi.clamp(*m, m + s))
                .collect(),
            BodyKind::Polytope(p) => p.project(x, max_steps)?,
            BodyKind::Scaled { inner, factor } => linalg::scale(
                &inner.project_with_cap(&linalg::scale(x, 1.0 / factor), max_steps)?,
                *factor,
            ),
            BodyKind::BallSum { inner, radius } => {
                let p = inner.project_with_cap(x, max_steps)?;
                let v = linalg::sub(x, &p);
                let n = linalg::norm(&v);
                if n <= *radius {
                    x.to_vec()
                } else {
                    linalg::axpy(&p, radius / n, &v)
                }
            }
        })
    }

    /// `dist(x, K)`.
    pub fn distance_to(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dist(x, &self.project_onto(x)?))
    }

    /// The point of `∂(K + rBᵈ)` with outer normal `u`.
    pub fn outer_boundary_sample(&self, r: f64, u: &[f64]) -> Result<OuterBoundaryPoint> {
        if !(r > 0.0) {
            return Err(Error::Precondition(format!("radius must be positive, got {r}")));
        }
        let foot = self.support_point(u)?;
        Ok(OuterBoundaryPoint { x: linalg::axpy(&foot, r, u), foot, normal: u.to_vec() })
    }

    /// Maps an arbitrary point outside `K` to `∂(K + rBᵈ)`: the foot is its
    /// projection onto `K` and the normal points from the foot to `y`.
    /// Returns `None` for points of `K` itself.
    pub fn outer_boundary_through(&self, r: f64, y: &[f64]) -> Result<Option<OuterBoundaryPoint>> {
        let foot = self.project_onto(y)?;
        let v = linalg::sub(y, &foot);
        let n = linalg::norm(&v);
        if n <= 1e-12 * (1.0 + linalg::norm(y)) {
            return Ok(None);
        }
        let normal = linalg::scale(&v, 1.0 / n);
        Ok(Some(OuterBoundaryPoint { x: linalg::axpy(&foot, r, &normal), foot, normal }))
    }

    /// Axis-aligned bounding box `(lower, upper)` from support values.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.dim;
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            hi[k] = self.h(&e)?;
            e[k] = -1.0;
            lo[k] = -self.h(&e)?;
        }
        Ok((lo, hi))
    }

    /// Upper bound on `max_{x∈K} |x|` (corner of the bounding box).
    pub fn norm_bound(&self) -> Result<f64> {
        let (lo, hi) = self.bounding_box()?;
        Ok(lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// Upper bound on the diameter (bounding-box diagonal).
    pub fn diameter_bound(&self) -> Result<f64> {
        let (lo, hi) = self.bounding_box()?;
        Ok(linalg::dist(&lo, &hi))
    }

    /// A point of `K` (midpoint of two opposite support points).
    pub fn interior_hint(&self) -> Result<Vec<f64>> {
        let e = linalg::unit(self.dim, 0);
        let a = self.s(&e)?;
        let b = self.s(&linalg::scale(&e, -1.0))?;
        Ok(linalg::scale(&linalg::add(&a, &b), 0.5))
    }
}

fn project_ellipsoid(e: &Ellipsoid, x: &[f64], max_steps: usize) -> Result<Vec<f64>> {
    let z = e.to_local(x);
    let inside: f64 = z.iter().zip(&e.semi_axes).map(|(zi, a)| (zi / a).powi(2)).sum();
    if inside <= 1.0 {
        return Ok(x.to_vec());
    }
    // Σ (a_i z_i / (a_i² + λ))² = 1 has a unique root λ > 0; the left side is
    // decreasing and convex, so Newton from the left never overshoots.
    // Bisection takes over if a step leaves the bracket.
    let eval = |lam: f64| -> (f64, f64) {
        z.iter().zip(&e.semi_axes).fold((-1.0, 0.0), |(g, dg), (zi, a)| {
            let q = a * zi / (a * a + lam);
            (g + q * q, dg - 2.0 * q * q / (a * a + lam))
        })
    };
    let amax = e.semi_axes.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, amax * linalg::norm(&z));
    let mut lam = 0.0;
    let mut steps = 0;
    loop {
        if steps >= max_steps {
            return Err(Error::ConvergenceFailure { what: "ellipsoid projection", steps });
        }
        steps += 1;
        let (g, dg) = eval(lam);
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            lo = lam;
        } else {
            hi = lam;
        }
        let newton = lam - g / dg;
        let next = if g > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let done = (next - lam).abs() <= 1e-15 * next.max(1e-300) || hi - lo <= 1e-15 * hi.max(1e-300);
        lam = next;
        if done {
            break;
        }
    }
    let y: Vec<f64> = z.iter().zip(&e.semi_axes).map(|(zi, a)| a * a * zi / (a * a + lam)).collect();
    Ok(e.from_local(&y))
}

/// `count` independent uniform directions on `S^{dim-1}`, reproducible for a
/// fixed seed regardless of thread count.
pub fn sample_unit_directions(dim: usize, count: usize, seed: u64) -> Result<Points> {
    if count == 0 {
        return Err(Error::Precondition("direction count must be at least 1".into()));
    }
    if dim == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    let parts: Vec<Points> = rng::chunks(count)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut r = rng::substream(seed, chunk);
            let mut p = Points::with_capacity(dim, len);
            for _ in 0..len {
                p.push(&rng::unit_vector(&mut r, dim));
            }
            p
        })
        .collect();
    let mut out = Points::with_capacity(dim, count);
    for p in &parts {
        out.extend(p);
    }
    Ok(out)
}
