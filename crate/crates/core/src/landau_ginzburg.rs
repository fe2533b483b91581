//! The chiral ring `A_p = C[z]/(p')` with the residue functional, its
//! idempotents and weights, and the quaternion model `{A_p, B_p, phi_p}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cardy::CardyFrobeniusAlgebra;
use crate::error::{Error, Result};
use crate::frobenius::{self, FiniteAlgebra, FrobeniusPair};
use crate::linalg::{self, cjson, CMatrix, C64, ONE, ZERO};
use crate::polycore::{self, critical_points, poly_mod, LGPolynomial, Poly};
use crate::report::VerificationReport;
use crate::tolerance::{rel, ToleranceConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LGClosedAlgebra {
    p: LGPolynomial,
    roots: Vec<C64>,
    pair: FrobeniusPair,
    idempotents: Vec<Poly>,
    mu: Vec<C64>,
}

/// Closed algebra with roots from [`critical_points`].
pub fn build_closed(p: &LGPolynomial, tol: &ToleranceConfig) -> Result<LGClosedAlgebra> {
    let roots = critical_points(p, tol)?;
    LGClosedAlgebra::from_roots(p, roots, tol)
}

impl LGClosedAlgebra {
    /// Build with a caller-chosen labeling of the critical points.
    pub fn from_roots(p: &LGPolynomial, roots: Vec<C64>, tol: &ToleranceConfig) -> Result<Self> {
        let n = p.n();
        if roots.len() != n {
            return Err(Error::DimensionMismatch(format!("{} roots for n = {n}", roots.len())));
        }
        let pd = p.derivative();
        let unit = Poly::one().padded(n);
        let algebra = FiniteAlgebra::from_products(n, unit, |i, j| {
            poly_mod(&Poly::monomial(i + j, ONE), &pd)
                .expect("p' is nonzero")
                .padded(n)
        })?;
        let functional = (0..n)
            .map(|k| polycore::residue_at_roots(&Poly::monomial(k, ONE), p, &roots))
            .collect();
        let pair = FrobeniusPair::new(algebra, functional)?;

        let idempotents: Vec<Poly> = (0..n)
            .map(|i| {
                let mut e = Poly::one();
                for j in 0..n {
                    if j != i {
                        let factor = Poly::new(vec![-roots[j], ONE]).scale(ONE / (roots[i] - roots[j]));
                        e = &e * &factor;
                    }
                }
                e
            })
            .collect();
        let mu: Vec<C64> = idempotents
            .iter()
            .map(|e| polycore::residue_at_roots(e, p, &roots))
            .collect();
        if let Some(m) = mu.iter().find(|m| m.norm() < tol.eq_tol) {
            return Err(Error::DegenerateWeight(m.norm()));
        }
        Ok(Self {
            p: p.clone(),
            roots,
            pair,
            idempotents,
            mu,
        })
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn p(&self) -> &LGPolynomial {
        &self.p
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    /// The pair in the monomial basis `1, z, ..., z^(n-1)`.
    pub fn pair(&self) -> &FrobeniusPair {
        &self.pair
    }

    pub fn idempotents(&self) -> &[Poly] {
        &self.idempotents
    }

    /// `mu_i = l_p(e_i)`.
    pub fn mu(&self) -> &[C64] {
        &self.mu
    }

    /// `mu_i = 1 / ((n+1) prod_{j != i} (alpha_i - alpha_j))`.
    pub fn mu_product(&self) -> Vec<C64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let prod: C64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.roots[i] - self.roots[j])
                    .product();
                ONE / (prod * (n + 1) as f64)
            })
            .collect()
    }

    pub fn multiply(&self, q1: &Poly, q2: &Poly) -> Poly {
        poly_mod(&(q1 * q2), &self.p.derivative()).expect("p' is nonzero")
    }

    pub fn functional(&self, q: &Poly) -> C64 {
        polycore::residue_at_roots(q, &self.p, &self.roots)
    }

    /// Values `q(alpha_i)`: coordinates of `q` in the idempotent basis.
    pub fn idempotent_coords(&self, q: &Poly) -> Vec<C64> {
        self.roots.iter().map(|&r| q.eval(r)).collect()
    }

    /// `max |e_i * e_j - delta_ij e_i|` and `|sum e_i - 1|`, coefficient-wise.
    pub fn idempotent_residual(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let prod = self.multiply(&self.idempotents[i], &self.idempotents[j]);
                let expect = if i == j {
                    self.idempotents[i].clone()
                } else {
                    Poly::zero()
                };
                let scale = self.idempotents[i].max_abs_coeff() * self.idempotents[j].max_abs_coeff();
                worst = worst.max(rel(prod.max_abs_diff(&expect), scale));
            }
        }
        let total = self.idempotents.iter().fold(Poly::zero(), |acc, e| &acc + e);
        let scale = self.idempotents.iter().map(Poly::max_abs_coeff).fold(0.0, f64::max);
        worst.max(rel(total.max_abs_diff(&Poly::one()), scale))
    }

    pub fn mu_route_discrepancy(&self) -> f64 {
        self.mu
            .iter()
            .zip(self.mu_product())
            .map(|(a, b)| rel((a - b).norm(), a.norm()))
            .fold(0.0, f64::max)
    }

    /// Gram in the monomial basis against `[l_p(z^(i+j))]`.
    pub fn hankel_residual(&self) -> f64 {
        let g = self.pair.gram();
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let h = self.functional(&Poly::monomial(i + j, ONE));
                worst = worst.max(rel((g[(i, j)] - h).norm(), h.norm()));
            }
        }
        worst
    }

    /// Partial-fraction against Laurent residues on `z^k`, `k < 2n - 1`.
    pub fn residue_route_discrepancy(&self) -> f64 {
        (0..2 * self.n() - 1)
            .map(|k| {
                let q = Poly::monomial(k, ONE);
                let a = self.functional(&q);
                let b = polycore::residue_laurent(&q, &self.p);
                rel((a - b).norm(), a.norm())
            })
            .fold(0.0, f64::max)
    }

    /// The same algebra in the idempotent basis: diagonal, weights `mu`.
    pub fn idempotent_pair(&self) -> FrobeniusPair {
        let n = self.n();
        let alg = FiniteAlgebra::from_products(n, vec![ONE; n], |i, j| {
            let mut v = vec![ZERO; n];
            if i == j {
                v[i] = ONE;
            }
            v
        })
        .expect("diagonal algebra");
        FrobeniusPair::new(alg, self.mu.clone()).expect("dimensions agree")
    }

    /// Column `k` holds the idempotent coordinates of `z^k`.
    pub fn monomial_to_idempotent(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, k| self.roots[i].powi(k as i32))
    }

    pub fn verify(&self, tol: &ToleranceConfig) -> VerificationReport {
        let mut rep = frobenius::verify_frobenius(&self.pair, tol);
        rep.at_most(
            "commutativity",
            self.pair.algebra().commutativity_residual(),
            tol.eq_tol,
        );
        rep.at_most("idempotents", self.idempotent_residual(), tol.eq_tol);
        rep.at_most("mu_routes", self.mu_route_discrepancy(), tol.eq_tol);
        rep.at_most("hankel", self.hankel_residual(), tol.eq_tol);
        rep.at_most("residue_routes", self.residue_route_discrepancy(), tol.eq_tol);
        rep.at_most(
            "critical_points",
            polycore::critical_point_residual(&self.p, &self.roots),
            tol.eq_tol,
        );
        rep
    }
}

/// Sign applied to the principal square root in one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl BranchSign {
    pub fn apply(self, z: C64) -> C64 {
        match self {
            BranchSign::Plus => z,
            BranchSign::Minus => -z,
        }
    }
}

impl fmt::Display for BranchSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        })
    }
}

impl FromStr for BranchSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" => Ok(BranchSign::Plus),
            "-" | "minus" => Ok(BranchSign::Minus),
            other => Err(Error::InvalidInput(format!("branch sign '{other}'"))),
        }
    }
}

/// Parse `"+,-,+"`.
pub fn parse_branches(s: &str) -> Result<Vec<BranchSign>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

pub fn principal_branches(n: usize) -> Vec<BranchSign> {
    vec![BranchSign::Plus; n]
}

/// Square root with argument in `(-pi/2, pi/2]`.
pub fn principal_sqrt(z: C64) -> C64 {
    let r = z.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionLGModel {
    closed: LGClosedAlgebra,
    rho: Vec<C64>,
    branch: Vec<BranchSign>,
    cf: CardyFrobeniusAlgebra,
}

pub fn build_quaternion_model(
    p: &LGPolynomial,
    branch: &[BranchSign],
    tol: &ToleranceConfig,
) -> Result<QuaternionLGModel> {
    if branch.len() != p.n() {
        return Err(Error::InvalidBranch {
            expected: p.n(),
            got: branch.len(),
        });
    }
    let closed = build_closed(p, tol)?;
    let rho = closed
        .mu()
        .iter()
        .zip(branch)
        .map(|(&m, b)| b.apply(principal_sqrt(m)))
        .collect();
    QuaternionLGModel::from_closed(closed, rho, branch.to_vec())
}

impl QuaternionLGModel {
    /// Assemble from explicit `rho` values (each must square to `mu`).
    pub fn from_closed(closed: LGClosedAlgebra, rho: Vec<C64>, branch: Vec<BranchSign>) -> Result<Self> {
        let n = closed.n();
        if rho.len() != n || branch.len() != n {
            return Err(Error::InvalidBranch {
                expected: n,
                got: rho.len().min(branch.len()),
            });
        }
        let mut b = FrobeniusPair::zero();
        for &r in &rho {
            b = b.orthogonal_sum(&frobenius::quaternion_pair(r)?);
        }
        let mut phi = CMatrix::zeros(4 * n, n);
        for i in 0..n {
            phi[(4 * i, i)] = ONE;
        }
        let cf = CardyFrobeniusAlgebra::new(closed.idempotent_pair(), b, phi)?;
        Ok(Self {
            closed,
            rho,
            branch,
            cf,
        })
    }

    pub fn n(&self) -> usize {
        self.closed.n()
    }

    pub fn p(&self) -> &LGPolynomial {
        self.closed.p()
    }

    pub fn closed(&self) -> &LGClosedAlgebra {
        &self.closed
    }

    pub fn rho(&self) -> &[C64] {
        &self.rho
    }

    pub fn branch(&self) -> &[BranchSign] {
        &self.branch
    }

    /// A in the idempotent basis, B the block sum, phi to block units.
    pub fn cf(&self) -> &CardyFrobeniusAlgebra {
        &self.cf
    }

    /// `phi` on the monomial basis: column `k` is `phi(z^k)`.
    pub fn phi_monomial(&self) -> CMatrix {
        self.cf.phi() * self.closed.monomial_to_idempotent()
    }

    /// Block `i` as `{K(mu_i), H(rho_i), phi_H}`.
    pub fn block_cf(&self, i: usize) -> Result<CardyFrobeniusAlgebra> {
        crate::cardy::quaternion_cf_weighted(self.closed.mu()[i], self.rho[i])
    }

    pub fn rho_squared_residual(&self) -> f64 {
        self.rho
            .iter()
            .zip(self.closed.mu())
            .map(|(r, m)| rel((r * r - m).norm(), m.norm()))
            .fold(0.0, f64::max)
    }

    pub fn verify(&self, tol: &ToleranceConfig) -> VerificationReport {
        let mut rep = VerificationReport::new();
        rep.merge("closed", &self.closed.verify(tol));
        rep.at_most("rho_squared", self.rho_squared_residual(), tol.eq_tol);
        rep.merge("cf", &crate::cardy::verify_cardy_frobenius(&self.cf, tol));
        rep
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            n: self.n(),
            a: self.p().a().to_vec(),
            roots: self.closed.roots.clone(),
            mu: self.closed.mu.clone(),
            rho: self.rho.clone(),
            branch: self.branch.clone(),
            closed_algebra: self.closed.pair.clone(),
            cf: self.cf.clone(),
        }
    }
}

/// JSON form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub n: usize,
    #[serde(with = "cjson::vec")]
    pub a: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub roots: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub mu: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub rho: Vec<C64>,
    pub branch: Vec<BranchSign>,
    pub closed_algebra: FrobeniusPair,
    pub cf: CardyFrobeniusAlgebra,
}

impl ModelDump {
    pub fn max_abs_diff_to(&self, other: &ModelDump) -> f64 {
        [
            linalg::max_abs_diff(&self.roots, &other.roots),
            linalg::max_abs_diff(&self.mu, &other.mu),
            linalg::max_abs_diff(&self.rho, &other.rho),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn z3() -> LGPolynomial {
        LGPolynomial::from_real(&[-3.0, 0.0]).unwrap()
    }

    #[test]
    fn chiral_ring_z3_minus_3z() {
        let a = build_closed(&z3(), &tol()).unwrap();
        let g = a.pair().gram();
        let third = c(1.0 / 3.0, 0.0);
        assert!((g[(0, 0)]).norm() < 1e-15 && (g[(1, 1)]).norm() < 1e-15);
        assert!((g[(0, 1)] - third).norm() < 1e-15 && (g[(1, 0)] - third).norm() < 1e-15);
        let z = Poly::monomial(1, ONE);
        assert!(a.multiply(&z, &z).max_abs_diff(&Poly::one()) < 1e-15);
        // roots sorted (-1, 1): mu = (-1/6, 1/6)
        assert!((a.mu()[0] - c(-1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((a.mu()[1] - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!(a.verify(&tol()).pass);
    }

    #[test]
    fn quaternion_model_z3_minus_3z() {
        let m = build_quaternion_model(&z3(), &principal_branches(2), &tol()).unwrap();
        let s6 = 6f64.sqrt();
        // alpha = -1 carries mu = -1/6, alpha = 1 carries mu = 1/6.
        assert!((m.rho()[0] - c(0.0, 1.0 / s6)).norm() < 1e-15);
        assert!((m.rho()[1] - c(1.0 / s6, 0.0)).norm() < 1e-15);
        let rep = m.verify(&tol());
        assert!(rep.pass, "{rep}");
        assert!(rep.value("cf.cardy_trace").unwrap() < 1e-9);
        assert_eq!(m.cf().b().dim(), 8);
    }

    #[test]
    fn single_block_n1() {
        let p = LGPolynomial::from_real(&[0.0]).unwrap();
        let m = build_quaternion_model(&p, &principal_branches(1), &tol()).unwrap();
        assert_eq!(m.closed().idempotents()[0], Poly::one());
        assert!((m.closed().mu()[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m.rho()[0] - c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(m.verify(&tol()).pass);
    }

    #[test]
    fn branch_errors_and_signs() {
        assert_eq!(
            build_quaternion_model(&z3(), &[BranchSign::Plus], &tol()),
            Err(Error::InvalidBranch { expected: 2, got: 1 })
        );
        let m = build_quaternion_model(&z3(), &[BranchSign::Minus, BranchSign::Plus], &tol()).unwrap();
        assert!((m.rho()[0] - c(0.0, -1.0 / 6f64.sqrt())).norm() < 1e-15);
        assert!(m.verify(&tol()).pass);
        assert_eq!(
            parse_branches("+,-").unwrap(),
            vec![BranchSign::Plus, BranchSign::Minus]
        );
        assert!(parse_branches("+,x").is_err());
    }

    #[test]
    fn principal_sqrt_branch() {
        assert_eq!(principal_sqrt(c(-4.0, -0.0)), c(0.0, 2.0));
        assert_eq!(principal_sqrt(c(-4.0, 0.0)), c(0.0, 2.0));
        assert!(principal_sqrt(c(0.0, -1.0)).re > 0.0);
    }

    #[test]
    fn degenerate_polynomial_rejected() {
        let p = LGPolynomial::monomial(2).unwrap();
        assert!(matches!(
            build_closed(&p, &tol()),
            Err(Error::DegenerateCriticalPoints { .. })
        ));
    }

    #[test]
    fn blocks_match_standard_example() {
        let p = LGPolynomial::new(vec![c(0.3, -0.4), c(-0.2, 0.5), c(0.6, 0.1)]).unwrap();
        let m = build_quaternion_model(&p, &principal_branches(3), &tol()).unwrap();
        for i in 0..3 {
            let blk = m.block_cf(i).unwrap();
            assert!(crate::cardy::verify_cardy_frobenius(&blk, &tol()).pass);
        }
        assert!(m.verify(&tol()).pass);
    }

    #[test]
    fn phi_monomial_sends_one_to_unit() {
        let m = build_quaternion_model(&z3(), &principal_branches(2), &tol()).unwrap();
        let pm = m.phi_monomial();
        let unit = m.cf().b().algebra().unit();
        for r in 0..8 {
            assert!((pm[(r, 0)] - unit[r]).norm() < 1e-15);
        }
    }

    #[test]
    fn dump_round_trip() {
        let m = build_quaternion_model(&z3(), &principal_branches(2), &tol()).unwrap();
        let s = serde_json::to_string(&m.dump()).unwrap();
        let back: ModelDump = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m.dump());
        assert!(s.contains(r#""branch":["+","+"]"#));
    }
}
