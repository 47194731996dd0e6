//! Small dense helpers over `&[f64]` points. Dimensions never exceed 7 here,
//! so everything is written as straight loops.

use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a + t * b`
#[inline]
pub fn axpy(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

#[inline]
pub fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| t * x).collect()
}

/// Returns `None` for (numerically) zero vectors.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 1e-300 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn unit(dim: usize, axis: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[axis] = 1.0;
    e
}

/// Lexicographic "a < b" with exact comparison.
pub fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Solves `M x = rhs` for a square matrix given row by row.
pub fn solve(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = m.lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .map(|x| x.as_slice().to_vec())
}

/// Solves `Mᵀ x = rhs` for a square matrix given row by row.
pub fn solve_transposed(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[j][i]);
    m.lu()
        .solve(&DVector::from_column_slice(rhs))
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .map(|x| x.as_slice().to_vec())
}

/// Projects `v` onto the orthogonal complement of the span of `rows`
/// (rows assumed linearly independent).
pub fn project_out(rows: &[&[f64]], v: &[f64]) -> Vec<f64> {
    if rows.is_empty() {
        return v.to_vec();
    }
    let k = rows.len();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(rows[i], rows[j]));
    let rhs = DVector::from_fn(k, |i, _| dot(rows[i], v));
    let coeff = match gram.cholesky() {
        Some(c) => c.solve(&rhs),
        None => return v.to_vec(),
    };
    let mut out = v.to_vec();
    for (i, row) in rows.iter().enumerate() {
        for (o, r) in out.iter_mut().zip(row.iter()) {
            *o -= coeff[i] * r;
        }
    }
    out
}

/// Flat row-major point cloud.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self { dim, data: Vec::with_capacity(dim * n) }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: impl IntoIterator<Item = R>) -> Self {
        let mut p = Self::new(dim);
        for r in rows {
            p.push(r.as_ref());
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.data.extend_from_slice(p);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn extend(&mut self, other: &Points) {
        debug_assert_eq!(self.dim, other.dim);
        self.data.extend_from_slice(&other.data);
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}
