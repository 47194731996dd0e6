//! Dimension constants and the shape factor `g_l(K)`.
//!
//! With `p(t) = V_{d-1}(tK + Bᵈ)` the side polynomial of `K`:
//!
//! - `ρ_l(K)` solves `p(ρ) = l / c12bis`;
//! - `φ_l(K) = min_{0 < t ≤ ρ_l} (t^{-(d-1)/2} p(t))^{2/(d-1)}`;
//! - `g_l(K) = φ_l(K) / V_1(K)`, which is invariant under scaling and
//!   translation of `K`, and small for elongated bodies.

use serde::{Deserialize, Serialize};

use crate::bodies::{MAX_DIM, MIN_DIM};
use crate::error::{Error, Result};
use crate::volumes::{kappa, side_polynomial, IntrinsicVolumeVector, SidePolynomial};

/// Constants that depend on the dimension only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub d: usize,
    pub j0: usize,
    pub c12min: f64,
    pub c12: f64,
    pub c12bis: f64,
    pub c12bisbis: f64,
    pub c13: f64,
    pub c13bis: f64,
    /// `v[k-1] = V_k(Bᵈ)^{1/k}` for `k = 1..=d`.
    pub v: Vec<f64>,
    pub c_iv1: f64,
    pub c_iv2: f64,
    pub c_iv3: f64,
    pub c_iv4: f64,
    pub c_iv5: f64,
    pub alpha: f64,
    pub beta_strong: f64,
    pub beta_thm: f64,
    pub delta_1j0: f64,
    pub n_1j0: f64,
}

/// Intrinsic volumes of the unit ball.
pub fn ball_volumes(d: usize) -> Vec<f64> {
    (0..=d)
        .map(|j| crate::volumes::binomial(d, j) * kappa(d) / kappa(d - j))
        .collect()
}

/// Weight of `V_k` in the side polynomial.
fn weight(d: usize, k: usize) -> f64 {
    (d - k) as f64 * kappa(d - k) / 2.0
}

pub fn constants(d: usize) -> Result<ConstantsTable> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::Precondition(format!("dimension {d} outside {MIN_DIM}..={MAX_DIM}")));
    }
    let df = d as f64;
    let j0 = d / 2; // ⌈(d-1)/2⌉
    let vb = ball_volumes(d);
    let v: Vec<f64> = (1..=d).map(|k| vb[k].powf(1.0 / k as f64)).collect();
    let vk = |k: usize| v[k - 1];

    let c12min = 2.0 / (df * kappa(d - 1));
    let c12 = 4f64.powi(d as i32) / kappa(d - 1);
    let c12bis = 3f64.powf((df - 1.0) / 4.0) * c12;
    let c12bisbis = c12bis * vb[d - 1];
    let c13 = c12bis.powf(2.0 / (df - 1.0));

    let c_iv1 = weight(d, 0)
        + (1..j0).map(|k| weight(d, k) * (vk(k) / vk(1)).powi(k as i32)).sum::<f64>();
    let c_iv2 = (j0..d).map(|k| weight(d, k) * (vk(k) / vk(j0)).powi(k as i32)).sum::<f64>();
    let c_iv3 = (c_iv2 * (df - 1.0) / c_iv1).powf(-2.0 / df);
    let c_iv4 = c_iv1 * c_iv3.powf(-0.5) + c_iv2 * c_iv3.powf((df - 1.0) / 2.0);
    let c_iv5 = weight(d, 0)
        + (1..d).map(|k| weight(d, k) * (vk(k) / vk(1)).powi(k as i32)).sum::<f64>();

    let j0f = j0 as f64;
    Ok(ConstantsTable {
        d,
        j0,
        c12min,
        c12,
        c12bis,
        c12bisbis,
        c13,
        c13bis: 1.01 * c13,
        v,
        c_iv1,
        c_iv2,
        c_iv3,
        c_iv4,
        c_iv5,
        alpha: 2.0 * j0f * (df - 1.0) / df,
        beta_strong: 2.0 * j0f / ((df - 1.0) * df),
        beta_thm: j0f / ((df - 1.0) * df),
        delta_1j0: c_iv4.powf(2.0 / (df - 1.0)),
        n_1j0: c12bis * c_iv5 * c_iv3.powf(df - 1.0),
    })
}

impl ConstantsTable {
    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if !(1 <= i && i < j && j <= self.j0) {
            return Err(Error::InvalidIndexPair { i, j, j0: self.j0 });
        }
        Ok(())
    }

    /// `c_{i,j} = v_{j0} v_i / (v_j v_1)`.
    pub fn c_ij(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        let v = |k: usize| self.v[k - 1];
        Ok(v(self.j0) * v(i) / (v(j) * v(1)))
    }

    pub fn delta_ij(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.delta_1j0 * self.c_ij(i, j)?.powf(self.beta_strong))
    }

    pub fn n_ij(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.n_1j0 * self.c_ij(i, j)?.powf(-self.alpha))
    }

    /// `n^{-2/(d-1)}`.
    pub fn rate(&self, n: f64) -> f64 {
        n.powf(-2.0 / (self.d as f64 - 1.0))
    }
}

/// `ρ_l`: the `t` with `p(t) = l / c12bis`, by bisection.
pub fn rho(p: &SidePolynomial, l: f64, table: &ConstantsTable) -> Result<f64> {
    if !(l > table.c12bisbis) {
        return Err(Error::ParameterBelowThreshold { l, threshold: table.c12bisbis });
    }
    if p.coefficients.iter().skip(1).all(|&a| a <= 0.0) {
        return Err(Error::DegenerateBody("side polynomial is constant".into()));
    }
    let target = l / table.c12bis;
    let mut hi = 1.0;
    while p.eval(hi) <= target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::ConvergenceFailure { what: "rho bracketing", steps: 1100 });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p.eval(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `f(t) = t^{-(d-1)/2} p(t)`.
pub fn side_ratio(p: &SidePolynomial, t: f64) -> f64 {
    t.powf(-(p.dim as f64 - 1.0) / 2.0) * p.eval(t)
}

/// Minimizer of `f` on `(0, ρ]`: golden section on `log t`.
fn minimize_side_ratio(p: &SidePolynomial, rho: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let f = |s: f64| side_ratio(p, s.exp());
    let (mut a, mut b) = ((rho * 1e-9).ln(), rho.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > 1e-10 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_PHI * (b - a);
            fe = f(e);
        }
    }
    let s = 0.5 * (a + b);
    let (t, ft) = (s.exp(), f(s));
    let fr = side_ratio(p, rho);
    if fr <= ft {
        (rho, fr)
    } else {
        (t, ft)
    }
}

/// The scale profile of a body at parameter `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFactor {
    pub l: f64,
    pub rho: f64,
    /// Minimizer `t*` of `f` on `(0, ρ]`.
    pub t_star: f64,
    pub phi: f64,
    pub g: f64,
}

pub fn shape_factor(v: &IntrinsicVolumeVector, l: f64, table: &ConstantsTable) -> Result<ShapeFactor> {
    if v.dim != table.d {
        return Err(Error::Precondition("dimension mismatch".into()));
    }
    let v1 = v.get(1);
    if !(v1 > 0.0) {
        return Err(Error::DegenerateBody(format!("V_1 = {v1}")));
    }
    let p = side_polynomial(v);
    let rho = rho(&p, l, table)?;
    let (t_star, fmin) = minimize_side_ratio(&p, rho);
    let phi = fmin.powf(2.0 / (table.d as f64 - 1.0));
    Ok(ShapeFactor { l, rho, t_star, phi, g: phi / v1 })
}

pub fn phi(v: &IntrinsicVolumeVector, l: f64, table: &ConstantsTable) -> Result<f64> {
    Ok(shape_factor(v, l, table)?.phi)
}

pub fn g(v: &IntrinsicVolumeVector, l: f64, table: &ConstantsTable) -> Result<f64> {
    Ok(shape_factor(v, l, table)?.g)
}

/// Numerical form of the elongation bound for one body and one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElongationCertificate {
    pub i: usize,
    pub j: usize,
    pub eps: f64,
    pub ratio: f64,
    pub elongated: bool,
    /// `N = n_{i,j} ε^{-α}`.
    pub n: f64,
    /// `δ_{i,j} ε^{β}` with the strong exponent.
    pub bound: f64,
    /// Same with the weaker exponent of the facet-count statement.
    pub bound_thm: f64,
    pub g_value: f64,
    /// `t_ε` for `ε' = c_{i,j} ε`.
    pub t_eps: f64,
    pub applicable: bool,
    pub passed: bool,
    /// `ρ_N` of the body normalized to `V_1 = 1`.
    pub rho_n: f64,
    pub f_t_eps: f64,
    /// `c_IV4 (c_{i,j} ε)^{j0/d}`.
    pub q_t_eps: f64,
    pub chain_ok: bool,
}

impl ElongationCertificate {
    /// Whether the bound makes a claim here.
    pub fn claimed(&self) -> bool {
        self.elongated && self.applicable
    }

    /// No claimed inequality is violated.
    pub fn holds(&self) -> bool {
        !self.claimed() || (self.passed && self.chain_ok)
    }
}

pub fn elongation_certificate(
    v: &IntrinsicVolumeVector,
    eps: f64,
    i: usize,
    j: usize,
    table: &ConstantsTable,
) -> Result<ElongationCertificate> {
    let cij = table.c_ij(i, j)?;
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let d = table.d as f64;
    let ratio = v.ratio(i, j)?;
    let n = table.n_ij(i, j)? * eps.powf(-table.alpha);
    let bound = table.delta_ij(i, j)? * eps.powf(table.beta_strong);
    let bound_thm = table.delta_ij(i, j)? * eps.powf(table.beta_thm);
    let eps_c = cij * eps;
    let j0 = table.j0 as f64;
    let t_eps = table.c_iv3 * eps_c.powf(-2.0 * j0 / d);
    let applicable = t_eps > 1.0 && eps_c < 1.0;

    let normalized = v.scaled(1.0 / v.get(1));
    let p = side_polynomial(&normalized);
    let g_value = g(v, n, table)?;
    let rho_n = rho(&p, n, table)?;
    let f_t_eps = side_ratio(&p, t_eps);
    let q_t_eps = table.c_iv4 * eps_c.powf(j0 / d);
    Ok(ElongationCertificate {
        i,
        j,
        eps,
        ratio,
        elongated: ratio < eps,
        n,
        bound,
        bound_thm,
        g_value,
        t_eps,
        applicable,
        passed: g_value <= bound,
        rho_n,
        f_t_eps,
        q_t_eps,
        chain_ok: rho_n > t_eps && f_t_eps <= q_t_eps,
    })
}

/// Right-hand side of the facet-count bound for elongated bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElongatedBound {
    pub threshold_n: f64,
    /// `δ_{i,j} ε^{β} V_1(K) n^{-2/(d-1)}` with the strong exponent.
    pub dh_bound: f64,
    pub dh_bound_thm: f64,
}

pub fn elongated_bound(
    v: &IntrinsicVolumeVector,
    n: f64,
    eps: f64,
    i: usize,
    j: usize,
    table: &ConstantsTable,
) -> Result<ElongatedBound> {
    let delta = table.delta_ij(i, j)?;
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let threshold_n = table.n_ij(i, j)? * eps.powf(-table.alpha);
    if n < threshold_n {
        return Err(Error::ThresholdNotMet { n, threshold: threshold_n });
    }
    let tail = v.get(1) * table.rate(n);
    Ok(ElongatedBound {
        threshold_n,
        dh_bound: delta * eps.powf(table.beta_strong) * tail,
        dh_bound_thm: delta * eps.powf(table.beta_thm) * tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;
    use crate::volumes::exact_intrinsic_volumes;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn d3_constants() {
        let c = constants(3).unwrap();
        assert!(close(c.c12min, 2.0 / (3.0 * PI), 1e-14));
        assert!(close(c.c12, 64.0 / PI, 1e-14));
        assert!(close(c.c12bis, 3f64.sqrt() * 64.0 / PI, 1e-14));
        assert!(close(c.c12bisbis, c.c12bis * 2.0 * PI, 1e-14));
        assert!((c.c12bis - 35.2850).abs() < 1e-4);
        assert!((c.c12bisbis - 221.70).abs() < 1e-2);
        assert!(close(c.c13, c.c12bis, 1e-14));
        assert!(c.c13bis > c.c13);
        assert_eq!(c.j0, 1);
    }

    #[test]
    fn d4_constants() {
        let c = constants(4).unwrap();
        assert_eq!(c.j0, 2);
        assert!((c.alpha - 3.0).abs() < 1e-15);
        assert!((c.beta_thm - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.beta_strong - 1.0 / 3.0).abs() < 1e-15);
        assert!(close(c.c_iv1, PI * PI + 2.0 * PI, 1e-13));
        assert!((c.c_iv3 - 1.2436).abs() < 1e-3);
        assert!((c.delta_ij(1, 2).unwrap() - 7.19).abs() < 0.01);
        assert!((c.n_ij(1, 2).unwrap() - 4710.0).abs() < 5.0);
    }

    #[test]
    fn all_constants_positive() {
        for d in 2..=6 {
            let c = constants(d).unwrap();
            let vals = [
                c.c12min, c.c12, c.c12bis, c.c12bisbis, c.c13, c.c13bis, c.c_iv1, c.c_iv2,
                c.c_iv3, c.c_iv4, c.c_iv5, c.alpha, c.beta_strong, c.beta_thm, c.delta_1j0,
                c.n_1j0,
            ];
            assert!(vals.iter().all(|v| *v > 0.0 && v.is_finite()), "d = {d}");
            assert_eq!(c.j0, (d - 1).div_ceil(2));
        }
        assert!(constants(7).is_err());
    }

    #[test]
    fn segment_and_ball_shape_factors() {
        let c = constants(3).unwrap();
        let seg = ConvexBody::segment(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        let sf = shape_factor(&exact_intrinsic_volumes(&seg).unwrap(), 1000.0, &c).unwrap();
        assert!((sf.rho - 3.5105).abs() < 1e-4);
        assert_eq!(sf.t_star, sf.rho);
        assert!((sf.phi - 8.0731).abs() < 2e-4);
        assert!((sf.g - 4.0365).abs() < 1e-4);

        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(3).unwrap()).unwrap();
        let sf = shape_factor(&ball, 1000.0, &c).unwrap();
        assert!((sf.rho - ((1000.0 / c.c12bis / (2.0 * PI)).sqrt() - 1.0)).abs() < 1e-10);
        assert!((sf.rho - 1.1239).abs() < 1e-4);
        assert!((sf.t_star - 1.0).abs() < 1e-6);
        assert!((sf.g - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn rho_threshold() {
        let c = constants(3).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(3).unwrap()).unwrap();
        let p = side_polynomial(&ball);
        assert!(matches!(rho(&p, 100.0, &c), Err(Error::ParameterBelowThreshold { .. })));
        assert!(rho(&p, c.c12bisbis * (1.0 + 1e-9), &c).unwrap() < 1e-8);
    }

    #[test]
    fn planar_constancy() {
        let c = constants(2).unwrap();
        let bodies = [
            ConvexBody::segment(vec![0.0, 0.0], vec![3.0, 1.0]).unwrap(),
            ConvexBody::unit_cube(2).unwrap(),
            ConvexBody::ball(vec![0.0; 2], 0.4).unwrap(),
        ];
        for body in &bodies {
            let v = exact_intrinsic_volumes(body).unwrap();
            for l in [2.0 * c.c12bisbis, 5.0 * c.c12bisbis, 1e6] {
                assert!((g(&v, l, &c).unwrap() - 4.0 * PI).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn g_is_scale_and_translation_invariant() {
        let c = constants(3).unwrap();
        let bx = ConvexBody::cuboid(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        let base = g(&exact_intrinsic_volumes(&bx).unwrap(), 5000.0, &c).unwrap();
        for t in [0.5, 2.0] {
            let moved = ConvexBody::scaled(bx.translated(&[0.3, -2.0, 1.0]).unwrap(), t).unwrap();
            let v = exact_intrinsic_volumes(&moved).unwrap();
            assert!((g(&v, 5000.0, &c).unwrap() - base).abs() < 1e-9);
        }
    }

    #[test]
    fn certificate_rejects_low_dimensions() {
        let c = constants(3).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(3).unwrap()).unwrap();
        assert!(matches!(
            elongation_certificate(&ball, 0.1, 1, 2, &c),
            Err(Error::InvalidIndexPair { .. })
        ));
    }

    #[test]
    fn certificate_for_ball_makes_no_claim() {
        let c = constants(4).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(4).unwrap()).unwrap();
        let cert = elongation_certificate(&ball, 0.5, 1, 2, &c).unwrap();
        assert!(!cert.elongated);
        assert!(!cert.claimed());
        assert!(cert.holds());
    }

    #[test]
    fn elongated_bound_scaling() {
        let c = constants(4).unwrap();
        let ball = exact_intrinsic_volumes(&ConvexBody::unit_ball(4).unwrap()).unwrap();
        let eps = 0.3;
        let b1 = elongated_bound(&ball, 1e6, eps, 1, 2, &c).unwrap();
        assert!(close(b1.threshold_n, c.n_ij(1, 2).unwrap() * eps.powi(-3), 1e-12));
        let b2 = elongated_bound(&ball, 8e6, eps, 1, 2, &c).unwrap();
        assert!(close(b2.dh_bound / b1.dh_bound, 8f64.powf(-2.0 / 3.0), 1e-12));
        assert!(b1.dh_bound_thm > b1.dh_bound);
        assert!(matches!(
            elongated_bound(&ball, 10.0, eps, 1, 2, &c),
            Err(Error::ThresholdNotMet { .. })
        ));
    }
}
