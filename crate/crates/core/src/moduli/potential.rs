use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chart::{flat_chart, structure_tensor, EulerData};
use crate::error::{Error, Result};
use crate::linalg::{self, cjson, CMatrix, CVector, C64, ONE, ZERO};
use crate::sampling::{indexed_rng, sample_polynomial, SamplerConfig};
use crate::tolerance::ToleranceConfig;

/// Polynomial in `t^1..t^n`, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MPoly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, C64>,
}

impl MPoly {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: C64) {
        debug_assert_eq!(exps.len(), self.n);
        let e = self.terms.entry(exps).or_insert(ZERO);
        *e += c;
        self.terms.retain(|_, v| *v != ZERO);
    }

    pub fn eval(&self, t: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(t)
                    .fold(c, |acc, (&m, &x)| if m == 0 { acc } else { acc * x.powu(m) })
            })
            .sum()
    }

    pub fn derivative(&self, i: usize) -> MPoly {
        let mut out = MPoly::new(self.n);
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                *out.terms.entry(f).or_insert(ZERO) += c * e[i] as f64;
            }
        }
        out
    }

    /// Coefficients of `F(t0 + tau)` as a polynomial in `tau`.
    pub fn taylor_shift(&self, t0: &[C64]) -> MPoly {
        let mut out = MPoly::new(self.n);
        for (e, &c) in &self.terms {
            // Expand prod_i (t0_i + tau_i)^{e_i}.
            let mut partial: Vec<(Vec<u32>, C64)> = vec![(vec![0; self.n], c)];
            for i in 0..self.n {
                let m = e[i];
                let mut next = Vec::new();
                for (b, v) in &partial {
                    for k in 0..=m {
                        let coef = binomial(m, k) * t0[i].powu(m - k);
                        let mut bb = b.clone();
                        bb[i] = k;
                        next.push((bb, v * coef));
                    }
                }
                partial = next;
            }
            for (b, v) in partial {
                *out.terms.entry(b).or_insert(ZERO) += v;
            }
        }
        out.terms.retain(|_, v| *v != ZERO);
        out
    }

    pub fn degree_of(e: &[u32]) -> u32 {
        e.iter().sum()
    }
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (m - j) as f64 / (j + 1) as f64)
}

/// Quasi-homogeneous cubic-and-higher part of a Frobenius potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialJson", into = "PotentialJson")]
pub struct PotentialPoly {
    poly: MPoly,
    weights: Vec<u32>,
    index_reversed: bool,
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    exponents: Vec<u32>,
    #[serde(with = "cjson::scalar")]
    coeff: C64,
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    n: usize,
    monomials: Vec<MonomialJson>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    index_reversed: bool,
}

impl TryFrom<PotentialJson> for PotentialPoly {
    type Error = Error;
    fn try_from(j: PotentialJson) -> Result<Self> {
        let terms = j.monomials.into_iter().map(|m| (m.exponents, m.coeff)).collect();
        let p = PotentialPoly::new(j.n, terms)?;
        Ok(if j.index_reversed { p.reversed() } else { p })
    }
}

impl From<PotentialPoly> for PotentialJson {
    fn from(p: PotentialPoly) -> Self {
        let (n, rev) = (p.n(), p.index_reversed);
        let base = if rev { p.reversed() } else { p };
        PotentialJson {
            n,
            monomials: base
                .poly
                .terms
                .into_iter()
                .map(|(exponents, coeff)| MonomialJson { exponents, coeff })
                .collect(),
            index_reversed: rev,
        }
    }
}

impl PotentialPoly {
    /// Validates that every term has degree `>= 3` and E-degree `v + 3`.
    pub fn new(n: usize, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        let weights = EulerData::weights(n);
        let target = 2 * n as u32 + 4;
        let mut poly = MPoly::new(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector of length {} for n = {n}",
                    e.len()
                )));
            }
            let wdeg: u32 = e.iter().zip(&weights).map(|(m, w)| m * w).sum();
            if wdeg != target || MPoly::degree_of(&e) < 3 {
                return Err(Error::InvalidInput(format!(
                    "monomial {e:?} is not quasi-homogeneous of the potential degree"
                )));
            }
            poly.add_term(e, c);
        }
        Ok(Self {
            poly,
            weights,
            index_reversed: false,
        })
    }

    /// Skip validation (used for corrupted controls and raw fits).
    pub fn from_poly_unchecked(poly: MPoly) -> Self {
        let n = poly.n;
        Self {
            poly,
            weights: EulerData::weights(n),
            index_reversed: false,
        }
    }

    pub fn n(&self) -> usize {
        self.poly.n
    }

    pub fn poly(&self) -> &MPoly {
        &self.poly
    }

    /// Integer weights `(n+1) d_i` in the current index order.
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn is_index_reversed(&self) -> bool {
        self.index_reversed
    }

    pub fn coefficient(&self, exps: &[u32]) -> C64 {
        self.poly.terms.get(exps).copied().unwrap_or(ZERO)
    }

    pub fn set_coefficient(&mut self, exps: Vec<u32>, c: C64) {
        self.poly.terms.insert(exps, c);
        self.poly.terms.retain(|_, v| *v != ZERO);
    }

    pub fn eval(&self, t: &[C64]) -> C64 {
        self.poly.eval(t)
    }

    /// All third derivatives at `t`, flattened `(i * n + j) * n + k`.
    pub fn third_derivatives(&self, t: &[C64]) -> Vec<C64> {
        let n = self.n();
        let mut out = vec![ZERO; n * n * n];
        for i in 0..n {
            let di = self.poly.derivative(i);
            for j in i..n {
                let dij = di.derivative(j);
                for k in j..n {
                    let v = dij.derivative(k).eval(t);
                    for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        out[(a * n + b) * n + c] = v;
                    }
                }
            }
        }
        out
    }

    /// Relabel `t^i -> t^(n+1-i)`.
    pub fn reversed(&self) -> PotentialPoly {
        let mut poly = MPoly::new(self.n());
        for (e, &c) in &self.poly.terms {
            let mut r = e.clone();
            r.reverse();
            poly.terms.insert(r, c);
        }
        let mut weights = self.weights.clone();
        weights.reverse();
        PotentialPoly {
            poly,
            weights,
            index_reversed: !self.index_reversed,
        }
    }

    /// Drop coefficients with modulus below `eps`.
    pub fn pruned(&self, eps: f64) -> PotentialPoly {
        let mut out = self.clone();
        out.poly.terms.retain(|_, v| v.norm() >= eps);
        out
    }

    /// `max |c_beta| |deg_E(beta) - (v + 3)|` over monomials of degree >= 3.
    pub fn quasi_homogeneity_defect(&self) -> f64 {
        let n = self.n();
        let target = (2 * n + 4) as f64 / (n + 1) as f64;
        self.poly
            .terms
            .iter()
            .filter(|(e, _)| MPoly::degree_of(e) >= 3)
            .map(|(e, c)| {
                let deg: u32 = e.iter().zip(&self.weights).map(|(m, w)| m * w).sum();
                c.norm() * (deg as f64 / (n + 1) as f64 - target).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Exponent vectors of degree `>= 3` and weighted degree `2n + 4`.
pub fn ansatz_monomials(n: usize) -> Vec<Vec<u32>> {
    let weights = EulerData::weights(n);
    let target = 2 * n as u32 + 4;
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, w: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            if left == 0 && cur.iter().sum::<u32>() >= 3 {
                out.push(cur.clone());
            }
            return;
        }
        let mut m = 0;
        while m * w[i] <= left {
            cur[i] = m;
            rec(i + 1, left - m * w[i], w, cur, out);
            m += 1;
        }
        cur[i] = 0;
    }
    rec(0, target, &weights, &mut cur, &mut out);
    out.sort();
    out
}

/// One sampled point with its structure tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(with = "cjson::vec")]
    pub a: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub t: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub c: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub n: usize,
    pub samples: Vec<Sample>,
}

impl SampleSet {
    /// Draw `count` points with per-index seeds and record `t`, `c_ijk`.
    pub fn draw(n: usize, count: usize, seed: u64, tol: &ToleranceConfig) -> Result<Self> {
        let cfg = SamplerConfig::default();
        let samples = (0..count)
            .map(|s| {
                let p = sample_polynomial(&mut indexed_rng(seed, s as u64), n, &cfg, tol)?;
                let chart = flat_chart(&p, tol)?;
                let st = structure_tensor(&chart);
                Ok(Sample {
                    a: p.a().to_vec(),
                    t: chart.t.clone(),
                    c: st.c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, samples })
    }

    pub fn to_csv(&self) -> String {
        let n = self.n;
        let mut head = Vec::new();
        for i in 1..=n {
            head.push(format!("t{i}_re"));
            head.push(format!("t{i}_im"));
        }
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    head.push(format!("c{i}{j}{k}_re"));
                    head.push(format!("c{i}{j}{k}_im"));
                }
            }
        }
        let mut out = head.join(",");
        out.push('\n');
        for s in &self.samples {
            let row: Vec<String> =
                s.t.iter()
                    .chain(&s.c)
                    .flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)])
                    .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result of the least-squares potential fit.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub potential: PotentialPoly,
    /// Largest equation residual relative to `max(1, max |c|)`.
    pub fit_residual: f64,
    /// `sigma_min / sigma_max` of the design matrix.
    pub conditioning: f64,
    pub samples: SampleSet,
}

impl Reconstruction {
    /// For `n = 2`: `(beta_1, beta_2)` of `beta_1 (t1)^2 t2 + beta_2 (t2)^4`.
    pub fn n2_coefficients(&self) -> Option<(C64, C64)> {
        (self.potential.n() == 2).then(|| (self.potential.coefficient(&[2, 1]), self.potential.coefficient(&[0, 4])))
    }
}

/// Largest discrepancy between the potential's third derivatives and
/// structure tensors of a sample set, relative to `max(1, |c|)`.
pub fn potential_sample_residual(f: &PotentialPoly, set: &SampleSet) -> f64 {
    set.samples
        .iter()
        .map(|s| {
            let d3 = f.third_derivatives(&s.t);
            let scale = linalg::max_norm(&s.c).max(1.0);
            linalg::max_abs_diff(&d3, &s.c) / scale
        })
        .fold(0.0, f64::max)
}

pub const MAX_RECONSTRUCTION_N: usize = 6;

/// Fit the quasi-homogeneous ansatz to structure tensors at random points.
pub fn reconstruct_potential(
    n: usize,
    sample_count: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Reconstruction> {
    if n == 0 || n > MAX_RECONSTRUCTION_N {
        return Err(Error::InvalidInput(format!(
            "reconstruction supports 1 <= n <= {MAX_RECONSTRUCTION_N}"
        )));
    }
    if sample_count == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let monos = ansatz_monomials(n);
    if monos.is_empty() {
        return Err(Error::EmptyAnsatz);
    }
    let samples = SampleSet::draw(n, sample_count, seed, tol)?;
    let basis: Vec<PotentialPoly> = monos
        .iter()
        .map(|e| {
            let mut p = MPoly::new(n);
            p.add_term(e.clone(), ONE);
            PotentialPoly::from_poly_unchecked(p)
        })
        .collect();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                triples.push((i * n + j) * n + k);
            }
        }
    }
    let rows = samples.samples.len() * triples.len();
    let mut a = CMatrix::zeros(rows, monos.len());
    let mut b = CVector::zeros(rows);
    for (s, smp) in samples.samples.iter().enumerate() {
        let derivs: Vec<Vec<C64>> = basis.iter().map(|f| f.third_derivatives(&smp.t)).collect();
        for (r, &idx) in triples.iter().enumerate() {
            let row = s * triples.len() + r;
            for (m, d) in derivs.iter().enumerate() {
                a[(row, m)] = d[idx];
            }
            b[row] = smp.c[idx];
        }
    }
    let beta = linalg::least_squares(&a, &b).ok_or(Error::NoConvergence("least squares"))?;
    let resid = &a * &beta - &b;
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let fit_residual = resid.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    let conditioning = linalg::singular_value_margin(&a);
    let potential = PotentialPoly::new(n, monos.into_iter().zip(beta.iter().copied()).collect())?;
    Ok(Reconstruction {
        potential,
        fit_residual,
        conditioning,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn ansatz_small_n() {
        assert_eq!(ansatz_monomials(1), vec![vec![3]]);
        assert_eq!(ansatz_monomials(2), vec![vec![0, 4], vec![2, 1]]);
        assert_eq!(
            ansatz_monomials(3),
            vec![
                vec![0, 0, 5],
                vec![0, 2, 2],
                vec![1, 0, 3],
                vec![1, 2, 0],
                vec![2, 0, 1]
            ]
        );
    }

    #[test]
    fn validation_rejects_wrong_degree() {
        assert!(PotentialPoly::new(2, vec![(vec![1, 1], ONE)]).is_err());
        assert!(PotentialPoly::new(2, vec![(vec![3, 0], ONE)]).is_err());
        assert!(PotentialPoly::new(2, vec![(vec![2, 1], ONE)]).is_ok());
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let mut p = MPoly::new(2);
        p.add_term(vec![2, 1], c(0.5, 0.0));
        p.add_term(vec![0, 4], c(-0.375, 0.1));
        let t0 = [c(0.3, -0.2), c(-1.0, 0.4)];
        let s = p.taylor_shift(&t0);
        let tau = [c(0.05, 0.02), c(-0.03, 0.01)];
        let direct = p.eval(&[t0[0] + tau[0], t0[1] + tau[1]]);
        assert!((s.eval(&tau) - direct).norm() < 1e-14);
    }

    #[test]
    fn third_derivatives_of_f2() {
        let f = PotentialPoly::new(2, vec![(vec![2, 1], c(0.5, 0.0)), (vec![0, 4], c(1.0 / 24.0, 0.0))]).unwrap();
        let t = [c(0.2, 0.1), c(-0.7, 0.3)];
        let d = f.third_derivatives(&t);
        assert!((d[1] - ONE).norm() < 1e-15); // F_112
        assert!((d[7] - t[1]).norm() < 1e-15); // F_222
    }

    #[test]
    fn reversal_is_involution_and_json() {
        let f = PotentialPoly::new(2, vec![(vec![2, 1], c(0.5, 0.0)), (vec![0, 4], c(0.1, 0.0))]).unwrap();
        let r = f.reversed();
        assert_eq!(r.coefficient(&[1, 2]), c(0.5, 0.0));
        assert_eq!(r.reversed(), f);
        assert_eq!(r.quasi_homogeneity_defect(), 0.0);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"monomials":[{"exponents":[0,4],"coeff":[0.1,0.0]},{"exponents":[2,1],"coeff":[0.5,0.0]}]}"#
        );
        assert_eq!(serde_json::from_str::<PotentialPoly>(&s).unwrap(), f);
        let rs = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<PotentialPoly>(&rs).unwrap(), r);
    }

    #[test]
    fn reconstruct_n2() {
        let tol = ToleranceConfig::default();
        let rec = reconstruct_potential(2, 12, 7, &tol).unwrap();
        assert!(rec.fit_residual < 1e-9);
        let (b1, b2) = rec.n2_coefficients().unwrap();
        assert!((b1 - c(0.5, 0.0)).norm() < 1e-8);
        assert!((b2 - c(-0.375, 0.0)).norm() < 1e-8);
        let fresh = SampleSet::draw(2, 20, 999, &tol).unwrap();
        assert!(potential_sample_residual(&rec.potential, &fresh) < 1e-7);
    }

    #[test]
    fn reconstruct_n1() {
        let rec = reconstruct_potential(1, 3, 1, &ToleranceConfig::default()).unwrap();
        // c_111 = l(1) = 1/2, so F = (1/12) t^3.
        assert!((rec.potential.coefficient(&[3]) - c(1.0 / 12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reconstruct_rejects_large_n() {
        assert!(reconstruct_potential(7, 5, 1, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn csv_shape() {
        let set = SampleSet::draw(2, 3, 1, &ToleranceConfig::default()).unwrap();
        let csv = set.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0].split(',').count(), 2 * (2 + 8));
    }
}
