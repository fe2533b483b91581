//! Complex polynomials, the superpotential type, critical points, the
//! residue functional and the series reversion `omega^(n+1) = p(z)`.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cjson, CMatrix, C64, ONE, ZERO};
use crate::tolerance::ToleranceConfig;

/// Dense polynomial with ascending coefficients.
///
/// Trailing exact zeros are trimmed, so the zero polynomial has no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    #[serde(with = "cjson::vec")]
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c z^k`.
    pub fn monomial(k: usize, c: C64) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficient vector padded or cut to length `len`.
    pub fn padded(&self, len: usize) -> Vec<C64> {
        (0..len).map(|k| self.coeff(k)).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        linalg::max_norm(&self.coeffs)
    }

    pub fn max_abs_diff(&self, other: &Poly) -> f64 {
        linalg::max_abs_diff(&self.coeffs, &other.coeffs)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        poly_mul(self, rhs)
    }
}

pub fn poly_mul(q1: &Poly, q2: &Poly) -> Poly {
    if q1.is_zero() || q2.is_zero() {
        return Poly::zero();
    }
    let mut out = vec![ZERO; q1.coeffs.len() + q2.coeffs.len() - 1];
    for (i, &x) in q1.coeffs.iter().enumerate() {
        for (j, &y) in q2.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Poly::new(out)
}

/// Quotient and remainder of `q` by `m`.
pub fn poly_divrem(q: &Poly, m: &Poly) -> Result<(Poly, Poly)> {
    let dm = m.degree().ok_or(Error::ZeroDivisor)?;
    let lead = m.coeffs[dm];
    let mut r = q.coeffs.clone();
    if r.len() <= dm {
        return Ok((Poly::zero(), q.clone()));
    }
    let mut quot = vec![ZERO; r.len() - dm];
    for k in (dm..r.len()).rev() {
        let f = r[k] / lead;
        quot[k - dm] = f;
        for (j, &mj) in m.coeffs.iter().enumerate() {
            r[k - dm + j] -= f * mj;
        }
        r[k] = ZERO;
    }
    r.truncate(dm);
    Ok((Poly::new(quot), Poly::new(r)))
}

pub fn poly_mod(q: &Poly, m: &Poly) -> Result<Poly> {
    poly_divrem(q, m).map(|(_, r)| r)
}

/// Superpotential `p(z) = z^(n+1) + a_1 z^(n-1) + ... + a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LgJson", into = "LgJson")]
pub struct LGPolynomial {
    a: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct LgJson {
    n: usize,
    #[serde(with = "cjson::vec")]
    a: Vec<C64>,
}

impl TryFrom<LgJson> for LGPolynomial {
    type Error = Error;
    fn try_from(j: LgJson) -> Result<Self> {
        if j.a.len() != j.n {
            return Err(Error::DimensionMismatch(format!(
                "n = {} but {} coefficients given",
                j.n,
                j.a.len()
            )));
        }
        LGPolynomial::new(j.a)
    }
}

impl From<LGPolynomial> for LgJson {
    fn from(p: LGPolynomial) -> Self {
        LgJson { n: p.n(), a: p.a }
    }
}

impl LGPolynomial {
    pub fn new(a: Vec<C64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { a })
    }

    pub fn from_real(a: &[f64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `z^(n+1)`.
    pub fn monomial(n: usize) -> Result<Self> {
        Self::new(vec![ZERO; n])
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Coefficients `a_1..a_n`.
    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn to_poly(&self) -> Poly {
        let n = self.n();
        let mut c = vec![ZERO; n + 2];
        c[n + 1] = ONE;
        for (k, &ak) in self.a.iter().enumerate() {
            c[n - 1 - k] = ak;
        }
        Poly::new(c)
    }

    pub fn derivative(&self) -> Poly {
        self.to_poly().derivative()
    }

    pub fn second_derivative(&self) -> Poly {
        self.derivative().derivative()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.to_poly().eval(z)
    }

    /// Polynomial of degree `< n` with `a`-coordinate vector `da`,
    /// i.e. `sum_k da_k z^(n-k)`.
    pub fn tangent_from_a(da: &[C64]) -> Poly {
        let n = da.len();
        Poly::new((0..n).map(|j| da[n - 1 - j]).collect())
    }

    /// Inverse of [`LGPolynomial::tangent_from_a`].
    pub fn a_from_tangent(q: &Poly, n: usize) -> Vec<C64> {
        (1..=n).map(|k| q.coeff(n - k)).collect()
    }
}

fn root_residual_bound(alpha: C64, n: usize, eq_tol: f64) -> f64 {
    eq_tol * alpha.norm().powi(n as i32).max(1.0)
}

fn newton_polish(pd: &Poly, pdd: &Poly, z0: C64) -> C64 {
    let mut z = z0;
    for _ in 0..100 {
        let f = pd.eval(z);
        let d = pdd.eval(z);
        if d == ZERO {
            break;
        }
        let step = f / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Sort by real part, then by imaginary part inside groups of (nearly)
/// equal real parts.
pub fn sort_roots(roots: &mut [C64]) {
    let scale = linalg::max_norm(roots).max(1.0);
    let tie = 1e-10 * scale;
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < roots.len() {
        let mut end = start + 1;
        while end < roots.len() && roots[end].re - roots[end - 1].re <= tie {
            end += 1;
        }
        roots[start..end].sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal));
        start = end;
    }
}

pub fn min_separation(roots: &[C64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            sep = sep.min((roots[i] - roots[j]).norm());
        }
    }
    sep
}

/// The `n` simple roots of `p'`, sorted by `(re, im)`.
pub fn critical_points(p: &LGPolynomial, tol: &ToleranceConfig) -> Result<Vec<C64>> {
    let n = p.n();
    let pd = p.derivative();
    let pdd = pd.derivative();
    let lead = C64::new((n + 1) as f64, 0.0);
    // Companion matrix of the monic p'/(n+1).
    let mut comp = CMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -pd.coeff(i) / lead;
    }
    let raw = linalg::eigenvalues(&comp).ok_or(Error::NoConvergence("companion eigenvalues"))?;
    let mut roots: Vec<C64> = raw.into_iter().map(|z| newton_polish(&pd, &pdd, z)).collect();
    sort_roots(&mut roots);

    let sep = min_separation(&roots);
    let scale = linalg::max_norm(&roots).max(1.0);
    // A near-double root keeps p'' small even if the eigenvalues split.
    let curvature_floor = tol.root_sep_tol * ((n + 1) * n.max(1)) as f64 * scale.powi(n.saturating_sub(1) as i32);
    let flat = n > 1 && roots.iter().any(|&r| pdd.eval(r).norm() < curvature_floor);
    if sep < tol.root_sep_tol || flat {
        return Err(Error::DegenerateCriticalPoints { separation: sep });
    }
    for &r in &roots {
        if pd.eval(r).norm() >= root_residual_bound(r, n, tol.eq_tol) {
            return Err(Error::NoConvergence("critical point polishing"));
        }
    }
    Ok(roots)
}

/// Largest `|p'(alpha)| / max(1, |alpha|^n)` over the given roots.
pub fn critical_point_residual(p: &LGPolynomial, roots: &[C64]) -> f64 {
    let pd = p.derivative();
    roots
        .iter()
        .map(|&r| pd.eval(r).norm() / r.norm().powi(p.n() as i32).max(1.0))
        .fold(0.0, f64::max)
}

/// Relabel `new` so that entry `i` is the root nearest `prev[i]`.
pub fn match_roots(prev: &[C64], new: &[C64], tol: &ToleranceConfig) -> Result<Vec<C64>> {
    if prev.len() != new.len() {
        return Err(Error::DimensionMismatch("root lists differ in length".into()));
    }
    let mut used = vec![false; new.len()];
    let mut out = Vec::with_capacity(prev.len());
    for &r in prev {
        let mut d: Vec<(f64, usize)> = new.iter().enumerate().map(|(j, &s)| ((s - r).norm(), j)).collect();
        d.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
        if d.len() > 1 && d[1].0 - d[0].0 <= tol.root_sep_tol {
            return Err(Error::FrameContinuation);
        }
        let j = d[0].1;
        if used[j] {
            return Err(Error::FrameContinuation);
        }
        used[j] = true;
        out.push(new[j]);
    }
    Ok(out)
}

/// `sum_i q(alpha_i) / p''(alpha_i)` over precomputed critical points.
pub fn residue_at_roots(q: &Poly, p: &LGPolynomial, roots: &[C64]) -> C64 {
    let pdd = p.second_derivative();
    roots.iter().map(|&r| q.eval(r) / pdd.eval(r)).sum()
}

/// Residue functional `l_p(q)`, partial-fraction route.
pub fn residue_functional(q: &Poly, p: &LGPolynomial, tol: &ToleranceConfig) -> Result<C64> {
    let roots = critical_points(p, tol)?;
    Ok(residue_at_roots(q, p, &roots))
}

/// Residue functional via `q mod p'`: the `z^(n-1)` coefficient over `n+1`.
/// Needs no roots and is exact in exact arithmetic.
pub fn residue_laurent(q: &Poly, p: &LGPolynomial) -> C64 {
    let n = p.n();
    let r = poly_mod(q, &p.derivative()).expect("p' is never zero");
    r.coeff(n - 1) / (n + 1) as f64
}

/// Minimal commutative-ring interface used by the reversion, so the same
/// code runs on plain scalars and on first-order jets.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn div_real(&self, s: f64) -> Self {
        self.scale(1.0 / s)
    }
}

impl Ring for C64 {
    fn zero_like(&self) -> Self {
        ZERO
    }
    fn one_like(&self) -> Self {
        ONE
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

/// Value plus gradient, for exact first derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub d: Vec<C64>,
}

impl Jet {
    pub fn constant(v: C64, dim: usize) -> Self {
        Self { v, d: vec![ZERO; dim] }
    }

    pub fn variable(v: C64, index: usize, dim: usize) -> Self {
        let mut d = vec![ZERO; dim];
        d[index] = ONE;
        Self { v, d }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.v += rhs.v;
        for (x, y) in self.d.iter_mut().zip(rhs.d) {
            *x += y;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.v -= rhs.v;
        for (x, y) in self.d.iter_mut().zip(rhs.d) {
            *x -= y;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let d = self
            .d
            .iter()
            .zip(&rhs.d)
            .map(|(&x, &y)| x * rhs.v + self.v * y)
            .collect();
        Jet { v: self.v * rhs.v, d }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d: self.d.into_iter().map(|x| -x).collect(),
        }
    }
}

impl Ring for Jet {
    fn zero_like(&self) -> Self {
        Jet::constant(ZERO, self.d.len())
    }
    fn one_like(&self) -> Self {
        Jet::constant(ONE, self.d.len())
    }
    fn scale(&self, s: f64) -> Self {
        Jet {
            v: self.v * s,
            d: self.d.iter().map(|x| x * s).collect(),
        }
    }
}

fn series_mul<T: Ring>(x: &[T], y: &[T], len: usize, zero: &T) -> Vec<T> {
    let mut out = vec![zero.clone(); len];
    for (i, xi) in x.iter().enumerate().take(len) {
        for (j, yj) in y.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + xi.clone() * yj.clone();
        }
    }
    out
}

/// Coefficients of `p(z) / omega^(n+1)` in `x = 1/omega` up to `x^deg`,
/// where `z = omega (1 + u)` and `u = sum_k tt_k x^(k+1)`.
fn reversion_defect<T: Ring>(a: &[T], tt: &[T], deg: usize, zero: &T) -> Vec<T> {
    let n = a.len();
    let len = deg + 1;
    let one = zero.one_like();
    let mut w = vec![zero.clone(); len];
    w[0] = one.clone();
    for (k, t) in tt.iter().enumerate() {
        if k + 2 < len {
            w[k + 2] = t.clone();
        }
    }
    let mut pow = vec![zero.clone(); len];
    pow[0] = one.clone();
    let mut g = vec![zero.clone(); len];
    for m in 0..=n + 1 {
        let shift = n + 1 - m;
        let cm = if m == n + 1 {
            Some(one.clone())
        } else if m == n {
            None
        } else {
            Some(a[n - 1 - m].clone())
        };
        if let Some(c) = cm {
            for j in 0..len.saturating_sub(shift) {
                g[j + shift] = g[j + shift].clone() + c.clone() * pow[j].clone();
            }
        }
        if m <= n {
            pow = series_mul(&pow, &w, len, zero);
        }
    }
    g
}

/// Reversion coefficients over any [`Ring`]; `a` must be non-empty.
pub fn revert_generic<T: Ring>(a: &[T], order: usize) -> Vec<T> {
    let n = a.len();
    let zero = a[0].zero_like();
    let mut tt = vec![zero.clone(); order];
    for k in 1..=order {
        let g = reversion_defect(a, &tt[..k], k + 1, &zero);
        tt[k - 1] = -g[k + 1].div_real((n + 1) as f64);
    }
    tt
}

/// Coefficients `tt_1..tt_order` of `z = omega + sum_k tt_k omega^(-k)`
/// solving `omega^(n+1) = p(z)` up to `O(omega^(n-order))`.
pub fn revert_series(p: &LGPolynomial, order: usize) -> Result<Vec<C64>> {
    if order < p.n() {
        return Err(Error::InvalidInput(format!(
            "reversion order {order} is below n = {}",
            p.n()
        )));
    }
    Ok(revert_generic(p.a(), order))
}

/// The first `n` reversion coefficients and their exact Jacobian
/// `d tt_i / d a_k` (row `i`, column `k`).
pub fn revert_with_jacobian(p: &LGPolynomial) -> (Vec<C64>, CMatrix) {
    let n = p.n();
    let jets: Vec<Jet> = p.a().iter().enumerate().map(|(k, &v)| Jet::variable(v, k, n)).collect();
    let tt = revert_generic(&jets, n);
    let values = tt.iter().map(|j| j.v).collect();
    let jac = CMatrix::from_fn(n, n, |i, k| tt[i].d[k]);
    (values, jac)
}

/// Exact inverse of the reversion: the coefficients `a` whose first `n`
/// reversion coefficients are `tt`.
pub fn a_from_reversion(tt: &[C64]) -> Result<LGPolynomial> {
    let n = tt.len();
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut a = vec![ZERO; n];
    for k in 1..=n {
        let g = reversion_defect(&a, &tt[..k], k + 1, &ZERO);
        a[k - 1] = -g[k + 1];
    }
    LGPolynomial::new(a)
}

/// `dp / d tt_i = -[p' p^(-i/(n+1))]_+`, the polynomial part of a Laurent
/// series at infinity. Independent of the Jacobian route.
pub fn reversion_tangent(p: &LGPolynomial, i: usize) -> Poly {
    let n = p.n();
    assert!((1..=n).contains(&i), "index out of range");
    // (1 + w)^beta with w = sum_k a_k y^(k+1), y = 1/z, to degree n.
    let len = n + 1;
    let mut w = vec![ZERO; len];
    for (k, &ak) in p.a().iter().enumerate() {
        if k + 2 < len {
            w[k + 2] = ak;
        }
    }
    let beta = -(i as f64) / (n + 1) as f64;
    let mut f = vec![ZERO; len];
    let mut wr = vec![ZERO; len];
    wr[0] = ONE;
    let mut binom = 1.0;
    for r in 0..len {
        for j in 0..len {
            f[j] += wr[j] * binom;
        }
        binom *= (beta - r as f64) / (r + 1) as f64;
        wr = series_mul(&wr, &w, len, &ZERO);
    }
    // p' z^(-i) f(1/z): keep non-negative powers of z.
    let pd = p.derivative();
    let mut out = vec![ZERO; n];
    for (j, &dj) in pd.coeffs().iter().enumerate() {
        for (l, &fl) in f.iter().enumerate() {
            if j >= i + l {
                out[j - i - l] -= dj * fl;
            }
        }
    }
    Poly::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn poly_mul_examples() {
        let p = &Poly::from_real(&[1.0, 1.0]) * &Poly::from_real(&[-1.0, 1.0]);
        assert_eq!(p, Poly::from_real(&[-1.0, 0.0, 1.0]));
        assert!(poly_mul(&Poly::zero(), &p).is_zero());
        let z = Poly::monomial(1, ONE);
        assert_eq!(poly_mul(&z, &z), Poly::monomial(2, ONE));
    }

    #[test]
    fn poly_mod_examples() {
        let z2 = Poly::monomial(2, ONE);
        let m = Poly::from_real(&[-3.0, 0.0, 3.0]);
        let rem = poly_mod(&z2, &m).unwrap();
        assert!(rem.max_abs_diff(&Poly::one()) < 1e-15);

        let a1 = c(0.7, -0.2);
        let m = Poly::new(vec![a1, ZERO, r(3.0)]);
        let rem = poly_mod(&Poly::monomial(3, ONE), &m).unwrap();
        assert!(rem.max_abs_diff(&Poly::monomial(1, -a1 / 3.0)) < 1e-15);

        let q = Poly::from_real(&[1.0, 2.0]);
        assert_eq!(poly_mod(&q, &Poly::from_real(&[0.0, 0.0, 1.0])).unwrap(), q);
        assert_eq!(poly_mod(&q, &Poly::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn divrem_reconstructs() {
        let q = Poly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), r(0.0), c(2.0, -1.0), r(4.0)]);
        let m = Poly::new(vec![c(0.3, 0.1), r(1.0), c(2.0, 1.0)]);
        let (quot, rem) = poly_divrem(&q, &m).unwrap();
        let back = &(&quot * &m) + &rem;
        assert!(back.max_abs_diff(&q) < 1e-13);
        assert!(rem.degree().unwrap() < 2);
    }

    #[test]
    fn lg_polynomial_layout() {
        let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
        assert_eq!(p.to_poly(), Poly::from_real(&[0.0, -3.0, 0.0, 1.0]));
        assert_eq!(p.derivative(), Poly::from_real(&[-3.0, 0.0, 3.0]));
        assert!(LGPolynomial::new(vec![]).is_err());
        let da = vec![r(1.0), r(2.0), r(3.0)];
        let q = LGPolynomial::tangent_from_a(&da);
        assert_eq!(q, Poly::from_real(&[3.0, 2.0, 1.0]));
        assert_eq!(LGPolynomial::a_from_tangent(&q, 3), da);
    }

    #[test]
    fn lg_polynomial_json() {
        let p = LGPolynomial::new(vec![c(-3.0, 0.0), c(0.0, 1.5)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"n":2,"a":[[-3.0,0.0],[0.0,1.5]]}"#);
        let back: LGPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<LGPolynomial>(r#"{"n":3,"a":[[1,0]]}"#).is_err());
    }

    #[test]
    fn critical_points_examples() {
        let tol = ToleranceConfig::default();
        let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
        let roots = critical_points(&p, &tol).unwrap();
        assert!(close(roots[0], r(-1.0), 1e-14) && close(roots[1], r(1.0), 1e-14));

        let p = LGPolynomial::from_real(&[0.0]).unwrap();
        assert_eq!(critical_points(&p, &tol).unwrap(), vec![ZERO]);

        let p = LGPolynomial::monomial(2).unwrap();
        assert!(matches!(
            critical_points(&p, &tol),
            Err(Error::DegenerateCriticalPoints { .. })
        ));
    }

    #[test]
    fn near_double_root_is_degenerate() {
        // p' = 4 (z - 1)^2 (z + 2) = 4z^3 - 12z + 8 has a double root at 1.
        let a = vec![r(-6.0), r(8.0), r(0.5)];
        let p = LGPolynomial::new(a).unwrap();
        assert!(critical_points(&p, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn critical_points_sorted_and_polished() {
        let tol = ToleranceConfig::default();
        let p = LGPolynomial::new(vec![c(0.3, 0.2), c(-0.5, 0.1), c(0.2, -0.7), c(0.1, 0.1)]).unwrap();
        let roots = critical_points(&p, &tol).unwrap();
        assert_eq!(roots.len(), 4);
        for w in roots.windows(2) {
            assert!(w[0].re <= w[1].re);
        }
        assert!(critical_point_residual(&p, &roots) < 1e-13);
    }

    #[test]
    fn residue_examples() {
        let tol = ToleranceConfig::default();
        let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
        let z = Poly::monomial(1, ONE);
        assert!(close(residue_functional(&z, &p, &tol).unwrap(), r(1.0 / 3.0), 1e-15));
        assert!(close(residue_functional(&Poly::one(), &p, &tol).unwrap(), ZERO, 1e-15));
        assert!(close(
            residue_functional(&p.derivative(), &p, &tol).unwrap(),
            ZERO,
            1e-14
        ));
        assert!(close(residue_laurent(&z, &p), r(1.0 / 3.0), 1e-15));
    }

    #[test]
    fn residue_routes_agree_on_high_degree() {
        let tol = ToleranceConfig::default();
        let p = LGPolynomial::new(vec![c(0.4, -0.3), c(0.1, 0.9), c(-0.6, 0.2)]).unwrap();
        let q = Poly::new((0..9).map(|k| c(0.1 * k as f64, 1.0 - 0.2 * k as f64)).collect());
        let a = residue_functional(&q, &p, &tol).unwrap();
        let b = residue_laurent(&q, &p);
        assert!((a - b).norm() < 1e-11 * a.norm().max(1.0));
    }

    #[test]
    fn reversion_leading_coefficients() {
        let p = LGPolynomial::new(vec![c(0.4, -0.3), c(0.1, 0.9), c(-0.6, 0.2)]).unwrap();
        let tt = revert_series(&p, 5).unwrap();
        assert!(close(tt[0], -p.a()[0] / 4.0, 1e-15));
        assert!(close(tt[1], -p.a()[1] / 4.0, 1e-15));
        assert!(revert_series(&p, 2).is_err());
        let zero = revert_series(&LGPolynomial::monomial(3).unwrap(), 6).unwrap();
        assert!(zero.iter().all(|&x| x == ZERO));
    }

    #[test]
    fn reversion_n2_example() {
        let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
        let tt = revert_series(&p, 2).unwrap();
        assert!(close(tt[0], r(1.0), 1e-15) && close(tt[1], ZERO, 1e-15));
    }

    #[test]
    fn reversion_inverse_round_trip() {
        let p = LGPolynomial::new(vec![c(0.4, -0.3), c(0.1, 0.9), c(-0.6, 0.2), c(0.3, 0.3)]).unwrap();
        let tt = revert_series(&p, 4).unwrap();
        let back = a_from_reversion(&tt).unwrap();
        assert!(linalg::max_abs_diff(back.a(), p.a()) < 1e-14);
    }

    #[test]
    fn reversion_jacobian_matches_central_differences() {
        let p = LGPolynomial::new(vec![c(0.4, -0.3), c(0.1, 0.9), c(-0.6, 0.2)]).unwrap();
        let (_, jac) = revert_with_jacobian(&p);
        let h = 1e-6;
        for k in 0..3 {
            let mut ap = p.a().to_vec();
            let mut am = p.a().to_vec();
            ap[k] += h;
            am[k] -= h;
            let tp = revert_series(&LGPolynomial::new(ap).unwrap(), 3).unwrap();
            let tm = revert_series(&LGPolynomial::new(am).unwrap(), 3).unwrap();
            for i in 0..3 {
                let fd = (tp[i] - tm[i]) / (2.0 * h);
                assert!((fd - jac[(i, k)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn reversion_tangent_n2() {
        let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
        assert!(reversion_tangent(&p, 1).max_abs_diff(&Poly::from_real(&[0.0, -3.0])) < 1e-15);
        assert!(reversion_tangent(&p, 2).max_abs_diff(&Poly::from_real(&[-3.0])) < 1e-15);
    }

    #[test]
    fn jet_arithmetic() {
        let x = Jet::variable(c(2.0, 0.0), 0, 2);
        let y = Jet::variable(c(3.0, 1.0), 1, 2);
        let z = x.clone() * y.clone() - x.clone().scale(2.0);
        assert_eq!(z.v, c(2.0, 2.0));
        assert_eq!(z.d, vec![c(1.0, 1.0), c(2.0, 0.0)]);
    }
}
