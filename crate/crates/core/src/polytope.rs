//! Halfspace polytopes `{x : ⟨a_i, x⟩ ≤ b_i}` with unit normals.

use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Points};
use crate::lp::{Lp, Vertex};

/// Default cap on enumerated vertices.
pub const VERTEX_CAP: usize = 100_000;

/// One constraint `⟨normal, x⟩ ≤ offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug)]
pub struct HPolytope {
    normals: Points,
    offsets: Vec<f64>,
    bounded: bool,
    /// A vertex used to warm-start every linear maximization.
    anchor: Option<Vertex>,
    vertices: OnceLock<Result<Points>>,
}

impl Clone for HPolytope {
    fn clone(&self) -> Self {
        let vertices = OnceLock::new();
        if let Some(v) = self.vertices.get() {
            let _ = vertices.set(v.clone());
        }
        Self {
            normals: self.normals.clone(),
            offsets: self.offsets.clone(),
            bounded: self.bounded,
            anchor: self.anchor.clone(),
            vertices,
        }
    }
}

impl HPolytope {
    /// Builds a polytope from arbitrary halfspaces. Normals are rescaled to
    /// unit length; a feasible point is found by a phase-one program.
    pub fn new(halfspaces: &[Halfspace]) -> Result<Self> {
        let (normals, offsets) = normalize(halfspaces)?;
        let lp = Lp::new(&normals, &offsets);
        let (point, slack) = lp.max_slack_point()?;
        if slack < -lp.tolerance() {
            return Err(Error::Infeasible);
        }
        Self::finish(normals, offsets, &point)
    }

    /// Builds a polytope when a feasible point is already known (for example
    /// any point of a body the polytope circumscribes).
    pub fn with_feasible_point(halfspaces: &[Halfspace], point: &[f64]) -> Result<Self> {
        let (normals, offsets) = normalize(halfspaces)?;
        let lp = Lp::new(&normals, &offsets);
        if !lp.is_feasible(point, 1e-7 * (1.0 + linalg::norm(point))) {
            return Err(Error::Precondition("supplied point is not feasible".into()));
        }
        Self::finish(normals, offsets, point)
    }

    fn finish(normals: Points, offsets: Vec<f64>, point: &[f64]) -> Result<Self> {
        let d = normals.dim();
        let lp = Lp::new(&normals, &offsets);
        let anchor = match lp.crash(point, &linalg::unit(d, 0)) {
            Ok(v) => Some(v),
            Err(Error::Unbounded) => None,
            Err(e) => return Err(e),
        };
        let mut poly = Self {
            normals,
            offsets,
            bounded: false,
            anchor,
            vertices: OnceLock::new(),
        };
        poly.bounded = poly.anchor.is_some() && poly.check_bounded()?;
        Ok(poly)
    }

    fn check_bounded(&self) -> Result<bool> {
        let d = self.dim();
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut u = vec![0.0; d];
                u[k] = s;
                match self.maximize(&u) {
                    Ok(_) => {}
                    Err(Error::Unbounded) => return Ok(false),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.normals.dim()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn normals(&self) -> &Points {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, &b)| Halfspace { normal: n.to_vec(), offset: b })
            .collect()
    }

    fn lp(&self) -> Lp<'_> {
        Lp::new(&self.normals, &self.offsets)
    }

    fn maximize(&self, u: &[f64]) -> Result<(f64, Vertex)> {
        let start = self.anchor.clone().ok_or(Error::Unbounded)?;
        self.lp().maximize_from(u, start)
    }

    /// Support value by linear maximization.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.maximize(u).map(|(v, _)| v)
    }

    /// Support value and maximizing vertex by linear maximization.
    pub fn support_vertex(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.maximize(u).map(|(v, x)| (v, x.point))
    }

    /// Vertices, enumerated once and cached. Fails for unbounded polytopes or
    /// when more than [`VERTEX_CAP`] vertices exist.
    pub fn vertices(&self) -> Result<&Points> {
        self.vertices_with_cap(VERTEX_CAP)
    }

    pub fn vertices_with_cap(&self, cap: usize) -> Result<&Points> {
        self.vertices
            .get_or_init(|| {
                if !self.bounded {
                    return Err(Error::Unbounded);
                }
                let start = self.anchor.clone().ok_or(Error::Unbounded)?;
                self.lp().enumerate_vertices(start, cap)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Vertices through the convex hull of the polar dual about the
    /// max-slack point `c`: each hull facet `{⟨w, y⟩ = 1}` gives the vertex
    /// `c + w`. Degenerate vertices repeat once per facet of their
    /// triangulation.
    pub fn dual_vertices(&self) -> Result<Points> {
        if !self.bounded {
            return Err(Error::Unbounded);
        }
        let d = self.dim();
        let (center, _) = self.lp().max_slack_point()?;
        let center = center.as_slice();
        let mut dual = Vec::with_capacity(self.len());
        for (a, b) in self.normals.iter().zip(&self.offsets) {
            let gap = b - dot(a, center);
            if gap <= 0.0 {
                return Err(Error::Precondition("center is not interior".into()));
            }
            dual.push(linalg::scale(a, 1.0 / gap));
        }
        let scale = dual.iter().flat_map(|y| y.iter().map(|v| v.abs())).fold(0.0, f64::max).max(1.0);
        let hull = chull::ConvexHull::try_new(&dual, 1e-13 * scale, None)
            .map_err(|e| Error::DegenerateBody(format!("dual hull failed: {e}")))?;
        let (points, indices) = hull.vertices_indices();
        let ones = vec![1.0; d];
        let mut out = Points::with_capacity(d, indices.len() / d);
        for facet in indices.chunks(d) {
            let rows: Vec<&[f64]> = facet.iter().map(|&i| points[i].as_slice()).collect();
            let w = linalg::solve(&rows, &ones)
                .ok_or_else(|| Error::DegenerateBody("singular dual facet".into()))?;
            out.push(&linalg::add(center, &w));
        }
        Ok(out)
    }

    /// Support value as a maximum over cached vertices.
    pub fn support_by_vertices(&self, u: &[f64]) -> Result<f64> {
        let v = self.vertices()?;
        Ok(v.iter().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.lp().is_feasible(x, tol)
    }

    /// Lexicographically smallest vertex among those maximizing `⟨·, u⟩`.
    pub fn lex_support_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        let verts = self.vertices()?;
        let h = verts.iter().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-10 * (1.0 + h.abs());
        let best = verts
            .iter()
            .filter(|p| dot(p, u) >= h - tol)
            .reduce(|a, b| if linalg::lex_less(b, a) { b } else { a })
            .expect("bounded polytope has a vertex");
        Ok(best.to_vec())
    }

    /// Euclidean projection by a primal active-set method.
    pub fn project(&self, x: &[f64], max_steps: usize) -> Result<Vec<f64>> {
        let lp = self.lp();
        if lp.is_feasible(x, 0.0) {
            return Ok(x.to_vec());
        }
        let d = self.dim();
        let mut y = self
            .anchor
            .as_ref()
            .map(|v| v.point.clone())
            .ok_or(Error::Unbounded)?;
        let mut working: Vec<usize> = Vec::new();
        let scale = 1.0 + linalg::norm(x) + linalg::norm(&y);
        for _ in 0..max_steps {
            let rows: Vec<&[f64]> = working.iter().map(|&i| self.normals.row(i)).collect();
            // minimizer of |z - x| on the affine set of the working rows
            let (target, mult) = if rows.is_empty() {
                (x.to_vec(), Vec::new())
            } else {
                let k = rows.len();
                let gram: Vec<Vec<f64>> =
                    (0..k).map(|i| (0..k).map(|j| dot(rows[i], rows[j])).collect()).collect();
                let grefs: Vec<&[f64]> = gram.iter().map(Vec::as_slice).collect();
                let rhs: Vec<f64> = working
                    .iter()
                    .map(|&i| dot(self.normals.row(i), x) - self.offsets[i])
                    .collect();
                let mu = linalg::solve(&grefs, &rhs).ok_or(Error::ConvergenceFailure {
                    what: "polytope projection",
                    steps: 0,
                })?;
                let mut z = x.to_vec();
                for (m, r) in mu.iter().zip(&rows) {
                    for (zi, ri) in z.iter_mut().zip(r.iter()) {
                        *zi -= m * ri;
                    }
                }
                (z, mu)
            };
            let step = linalg::sub(&target, &y);
            if linalg::norm(&step) <= 1e-14 * scale {
                match mult
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m < -1e-13 * scale)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                {
                    None => return Ok(target),
                    Some((pos, _)) => {
                        working.remove(pos);
                        continue;
                    }
                }
            }
            let mut alpha = 1.0;
            let mut blocking = None;
            for i in 0..self.len() {
                if working.contains(&i) {
                    continue;
                }
                let rate = dot(self.normals.row(i), &step);
                if rate > 1e-15 * scale {
                    let t = lp.slack(i, &y).max(0.0) / rate;
                    if t < alpha {
                        alpha = t;
                        blocking = Some(i);
                    }
                }
            }
            y = linalg::axpy(&y, alpha, &step);
            if let Some(i) = blocking {
                if working.len() < d {
                    working.push(i);
                }
            }
        }
        Err(Error::ConvergenceFailure { what: "polytope projection", steps: max_steps })
    }

    /// Same polytope with offsets multiplied by `factor` (a homothety about the origin).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let hs: Vec<Halfspace> = self
            .halfspaces()
            .into_iter()
            .map(|h| Halfspace { normal: h.normal, offset: h.offset * factor })
            .collect();
        let point = self
            .anchor
            .as_ref()
            .map(|v| linalg::scale(&v.point, factor))
            .ok_or(Error::Unbounded)?;
        Self::with_feasible_point(&hs, &point)
    }

    /// Plain-text dump, one `a_1 … a_d b` row per facet.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, b) in self.normals.iter().zip(&self.offsets) {
            for a in n {
                let _ = write!(s, "{a:.17e} ");
            }
            let _ = writeln!(s, "{b:.17e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut hs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Precondition(format!("line {}: {e}", lineno + 1)))?;
            if vals.len() < 2 {
                return Err(Error::Precondition(format!("line {}: too few values", lineno + 1)));
            }
            let (normal, offset) = vals.split_at(vals.len() - 1);
            hs.push(Halfspace { normal: normal.to_vec(), offset: offset[0] });
        }
        Self::new(&hs)
    }
}

fn normalize(halfspaces: &[Halfspace]) -> Result<(Points, Vec<f64>)> {
    let d = halfspaces
        .first()
        .map(|h| h.normal.len())
        .ok_or_else(|| Error::InvalidBody("polytope needs at least one halfspace".into()))?;
    let mut normals = Points::with_capacity(d, halfspaces.len());
    let mut offsets = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        if h.normal.len() != d || !h.offset.is_finite() {
            return Err(Error::InvalidBody("inconsistent halfspace".into()));
        }
        let n = linalg::norm(&h.normal);
        if !(n > 1e-14) || !n.is_finite() {
            return Err(Error::InvalidBody("zero halfspace normal".into()));
        }
        normals.push(&linalg::scale(&h.normal, 1.0 / n));
        offsets.push(h.offset / n);
    }
    Ok((normals, offsets))
}
