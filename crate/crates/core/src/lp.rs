//! Dense simplex over halfspace systems `⟨a_i, x⟩ ≤ b_i` in small dimension.
//!
//! The method walks vertices directly: a basis is a set of `dim` linearly
//! independent tight constraints. Each pivot solves a `dim × dim` system and
//! scans all rows once, which keeps warm-started queries cheap even with
//! many thousands of constraints.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::{dot, project_out, solve, solve_transposed, Points};

const PIVOT_CAP: usize = 100_000;
/// Consecutive zero-length pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

/// A vertex of the feasible region together with the tight rows defining it.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub basis: Vec<usize>,
}

/// Borrowed view of a halfspace system.
#[derive(Debug, Clone, Copy)]
pub struct Lp<'a> {
    rows: &'a Points,
    rhs: &'a [f64],
    tol: f64,
}

impl<'a> Lp<'a> {
    pub fn new(rows: &'a Points, rhs: &'a [f64]) -> Self {
        let scale = rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        Self { rows, rhs, tol: 1e-10 * scale }
    }

    pub fn dim(&self) -> usize {
        self.rows.dim()
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    #[inline]
    pub fn slack(&self, i: usize, x: &[f64]) -> f64 {
        self.rhs[i] - dot(self.rows.row(i), x)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        (0..self.len()).all(|i| self.slack(i, x) >= -tol)
    }

    fn basis_rows(&self, basis: &[usize]) -> Vec<&[f64]> {
        basis.iter().map(|&i| self.rows.row(i)).collect()
    }

    fn basis_point(&self, basis: &[usize]) -> Option<Vec<f64>> {
        let rhs: Vec<f64> = basis.iter().map(|&i| self.rhs[i]).collect();
        solve(&self.basis_rows(basis), &rhs)
    }

    /// Minimum-ratio step along `dir` from `x`, skipping rows in `skip`.
    /// Returns the step and every row attaining it (ties within tolerance).
    fn ratio_test(&self, x: &[f64], dir: &[f64], skip: &[usize]) -> Option<(f64, Vec<usize>)> {
        let dn = crate::linalg::norm(dir);
        let mut best = f64::INFINITY;
        let mut hits: Vec<usize> = Vec::new();
        for i in 0..self.len() {
            let rate = dot(self.rows.row(i), dir);
            if rate <= 1e-12 * dn || skip.contains(&i) {
                continue;
            }
            let t = self.slack(i, x).max(0.0) / rate;
            let tie = 1e-10 * (1.0 + best.min(t).abs());
            if best.is_infinite() || t < best - tie {
                best = t;
                hits.clear();
                hits.push(i);
            } else if t <= best + tie {
                hits.push(i);
            }
        }
        if hits.is_empty() {
            None
        } else {
            Some((best, hits))
        }
    }

    /// Moves from a feasible point to a vertex without decreasing `⟨c, x⟩`.
    pub fn crash(&self, start: &[f64], c: &[f64]) -> Result<Vertex> {
        let d = self.dim();
        let mut x = start.to_vec();
        let mut tight: Vec<usize> = Vec::with_capacity(d);
        while tight.len() < d {
            let rows = self.basis_rows(&tight);
            let mut dir = project_out(&rows, c);
            if crate::linalg::norm(&dir) <= 1e-12 * (1.0 + crate::linalg::norm(c)) {
                // objective is constant on the current face: pick any free axis
                dir = (0..d)
                    .map(|k| project_out(&rows, &crate::linalg::unit(d, k)))
                    .max_by(|a, b| {
                        crate::linalg::norm(a).total_cmp(&crate::linalg::norm(b))
                    })
                    .expect("dimension is positive");
            }
            let step = match self.ratio_test(&x, &dir, &tight) {
                Some(s) => Some((s, dir.clone())),
                None if dot(c, &dir) > 1e-12 => return Err(Error::Unbounded),
                None => {
                    let back: Vec<f64> = dir.iter().map(|v| -v).collect();
                    self.ratio_test(&x, &back, &tight).map(|s| (s, back))
                }
            };
            let ((t, hits), dir) = step.ok_or(Error::Unbounded)?;
            for (xi, di) in x.iter_mut().zip(&dir) {
                *xi += t * di;
            }
            tight.push(hits[0]);
        }
        let point = self.basis_point(&tight).unwrap_or(x);
        Ok(Vertex { point, basis: tight })
    }

    /// Maximizes `⟨c, x⟩` starting from a feasible vertex.
    pub fn maximize_from(&self, c: &[f64], start: Vertex) -> Result<(f64, Vertex)> {
        let d = self.dim();
        let mut basis = start.basis;
        let mut x = start.point;
        let mut streak = 0usize;
        let cn = 1.0 + crate::linalg::norm(c);
        for _ in 0..PIVOT_CAP {
            let rows = self.basis_rows(&basis);
            let lambda = solve_transposed(&rows, c).ok_or(Error::ConvergenceFailure {
                what: "simplex basis",
                steps: 0,
            })?;
            let bland = streak >= DEGENERATE_STREAK;
            let leave = (0..d)
                .filter(|&j| lambda[j] < -1e-12 * cn)
                .min_by(|&p, &q| {
                    if bland {
                        basis[p].cmp(&basis[q])
                    } else {
                        lambda[p].total_cmp(&lambda[q])
                    }
                });
            let Some(j) = leave else {
                return Ok((dot(c, &x), Vertex { point: x, basis }));
            };
            let mut e = vec![0.0; d];
            e[j] = -1.0;
            let dir = solve(&rows, &e).ok_or(Error::ConvergenceFailure {
                what: "simplex direction",
                steps: 0,
            })?;
            let (t, hits) = self.ratio_test(&x, &dir, &basis).ok_or(Error::Unbounded)?;
            let enter = *hits.iter().min().expect("nonempty ties");
            streak = if t <= 1e-14 { streak + 1 } else { 0 };
            basis[j] = enter;
            x = match self.basis_point(&basis) {
                Some(p) => p,
                None => x.iter().zip(&dir).map(|(a, b)| a + t * b).collect(),
            };
        }
        Err(Error::ConvergenceFailure { what: "simplex", steps: PIVOT_CAP })
    }

    /// Phase one: a point maximizing the minimal slack (capped at 1).
    /// Returns the point and its minimal slack.
    pub fn max_slack_point(&self) -> Result<(Vec<f64>, f64)> {
        let d = self.dim();
        let mut aug = Points::with_capacity(d + 1, self.len() + 1);
        let mut rhs = Vec::with_capacity(self.len() + 1);
        for i in 0..self.len() {
            let mut r = self.rows.row(i).to_vec();
            r.push(crate::linalg::norm(self.rows.row(i)));
            aug.push(&r);
            rhs.push(self.rhs[i]);
        }
        let mut cap = vec![0.0; d + 1];
        cap[d] = 1.0;
        aug.push(&cap);
        rhs.push(1.0);
        let lp = Lp::new(&aug, &rhs);
        let s0 = rhs.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0) - 1.0;
        let mut start = vec![0.0; d + 1];
        start[d] = s0;
        let vertex = lp.crash(&start, &cap)?;
        let (value, vertex) = lp.maximize_from(&cap, vertex)?;
        Ok((vertex.point[..d].to_vec(), value))
    }

    /// Breadth-first walk over feasible bases. Returns deduplicated vertices.
    pub fn enumerate_vertices(&self, start: Vertex, cap: usize) -> Result<Points> {
        let d = self.dim();
        let mut seen_bases: HashSet<Vec<usize>> = HashSet::new();
        let mut vertex_keys: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut out = Points::new(d);
        let mut queue = VecDeque::new();
        let mut first = start.basis.clone();
        first.sort_unstable();
        seen_bases.insert(first.clone());
        queue.push_back(first);
        let tight_tol = 1e2 * self.tol;
        while let Some(basis) = queue.pop_front() {
            let Some(x) = self.basis_point(&basis) else { continue };
            let key: Vec<usize> =
                (0..self.len()).filter(|&i| self.slack(i, &x).abs() <= tight_tol).collect();
            if !vertex_keys.contains_key(&key) {
                if out.len() >= cap {
                    return Err(Error::VertexEnumerationOverflow { cap });
                }
                vertex_keys.insert(key, out.len());
                out.push(&x);
            }
            let rows = self.basis_rows(&basis);
            for j in 0..d {
                let mut e = vec![0.0; d];
                e[j] = -1.0;
                let Some(dir) = solve(&rows, &e) else { continue };
                let (_, hits) = self.ratio_test(&x, &dir, &basis).ok_or(Error::Unbounded)?;
                for i in hits {
                    let mut next = basis.clone();
                    next[j] = i;
                    next.sort_unstable();
                    if seen_bases.insert(next.clone()) {
                        if seen_bases.len() > cap.saturating_mul(64) {
                            return Err(Error::VertexEnumerationOverflow { cap });
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(d: usize) -> (Points, Vec<f64>) {
        let mut rows = Points::new(d);
        let mut rhs = Vec::new();
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut r = vec![0.0; d];
                r[k] = s;
                rows.push(&r);
                rhs.push(1.0);
            }
        }
        (rows, rhs)
    }

    #[test]
    fn maximizes_over_cube() {
        let (rows, rhs) = cube(3);
        let lp = Lp::new(&rows, &rhs);
        let c = [1.0, 2.0, -0.5];
        let v = lp.crash(&[0.0; 3], &c).unwrap();
        let (value, v) = lp.maximize_from(&c, v).unwrap();
        assert!((value - 3.5).abs() < 1e-12);
        assert_eq!(v.point, vec![1.0, 1.0, -1.0]);
    }

    #[test]
    fn detects_unbounded() {
        let mut rows = Points::new(2);
        rows.push(&[1.0, 0.0]);
        rows.push(&[0.0, 1.0]);
        rows.push(&[-1.0, 0.0]);
        let rhs = vec![1.0, 1.0, 1.0];
        let lp = Lp::new(&rows, &rhs);
        let v = lp.crash(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let r = lp.maximize_from(&[0.0, -1.0], v);
        assert_eq!(r.unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn phase_one_finds_interior() {
        // triangle x >= 2, y >= 2, x + y <= 10
        let mut rows = Points::new(2);
        rows.push(&[-1.0, 0.0]);
        rows.push(&[0.0, -1.0]);
        rows.push(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]);
        let rhs = vec![-2.0, -2.0, 10.0 / 2f64.sqrt()];
        let lp = Lp::new(&rows, &rhs);
        let (x, s) = lp.max_slack_point().unwrap();
        assert!(s > 0.9, "slack {s}");
        assert!(lp.is_feasible(&x, 0.0));
    }

    #[test]
    fn phase_one_reports_negative_slack_when_empty() {
        let mut rows = Points::new(1);
        rows.push(&[1.0]);
        rows.push(&[-1.0]);
        let rhs = vec![-1.0, -1.0]; // x <= -1 and x >= 1
        let (_, s) = Lp::new(&rows, &rhs).max_slack_point().unwrap();
        assert!(s < -0.5);
    }

    #[test]
    fn enumerates_cube_and_octahedron_vertices() {
        let (rows, rhs) = cube(3);
        let lp = Lp::new(&rows, &rhs);
        let v = lp.crash(&[0.0; 3], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(lp.enumerate_vertices(v, 1000).unwrap().len(), 8);

        // octahedron |x|+|y|+|z| <= 1: degenerate (4 facets per vertex)
        let mut rows = Points::new(3);
        let mut rhs = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let r = [sx, sy, sz];
                    rows.push(&r.map(|v: f64| v / 3f64.sqrt()));
                    rhs.push(1.0 / 3f64.sqrt());
                }
            }
        }
        let lp = Lp::new(&rows, &rhs);
        let v = lp.crash(&[0.0; 3], &[0.3, 0.2, 0.1]).unwrap();
        let verts = lp.enumerate_vertices(v, 1000).unwrap();
        assert_eq!(verts.len(), 6);
    }

    #[test]
    fn vertex_cap_overflows() {
        let (rows, rhs) = cube(4);
        let lp = Lp::new(&rows, &rhs);
        let v = lp.crash(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            lp.enumerate_vertices(v, 5).unwrap_err(),
            Error::VertexEnumerationOverflow { cap: 5 }
        );
    }
}
