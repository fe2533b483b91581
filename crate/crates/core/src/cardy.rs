//! Cardy-Frobenius algebras `{A, B, phi}`: the adjoint `phi*`, the Cardy
//! condition in trace and coordinate form, block sums and idempotent
//! decomposition of commutative pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{self, FrobeniusPair};
use crate::linalg::{self, cjson, CMatrix, CVector, C64, ONE, ZERO};
use crate::report::VerificationReport;
use crate::tolerance::{rel, ToleranceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CfJson", into = "CfJson")]
pub struct CardyFrobeniusAlgebra {
    a: FrobeniusPair,
    b: FrobeniusPair,
    /// `dim B x dim A`; column `i` is `phi(a_i)`.
    phi: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct CfJson {
    a: FrobeniusPair,
    b: FrobeniusPair,
    #[serde(with = "cjson::matrix")]
    phi: CMatrix,
}

impl TryFrom<CfJson> for CardyFrobeniusAlgebra {
    type Error = Error;
    fn try_from(j: CfJson) -> Result<Self> {
        let phi = if j.phi.nrows() == 0 {
            CMatrix::zeros(j.b.dim(), j.a.dim())
        } else {
            j.phi
        };
        CardyFrobeniusAlgebra::new(j.a, j.b, phi)
    }
}

impl From<CardyFrobeniusAlgebra> for CfJson {
    fn from(cf: CardyFrobeniusAlgebra) -> Self {
        CfJson {
            a: cf.a,
            b: cf.b,
            phi: cf.phi,
        }
    }
}

impl CardyFrobeniusAlgebra {
    pub fn new(a: FrobeniusPair, b: FrobeniusPair, phi: CMatrix) -> Result<Self> {
        if phi.nrows() != b.dim() || phi.ncols() != a.dim() {
            return Err(Error::DimensionMismatch(format!(
                "phi is {}x{}, expected {}x{}",
                phi.nrows(),
                phi.ncols(),
                b.dim(),
                a.dim()
            )));
        }
        Ok(Self { a, b, phi })
    }

    pub fn a(&self) -> &FrobeniusPair {
        &self.a
    }

    pub fn b(&self) -> &FrobeniusPair {
        &self.b
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    pub fn phi_apply(&self, x: &[C64]) -> Vec<C64> {
        (&self.phi * CVector::from_column_slice(x)).iter().copied().collect()
    }

    /// `M[i][j] = l_B(phi(a_i) b_j)`.
    fn pairing_matrix(&self) -> CMatrix {
        let (da, db) = (self.a.dim(), self.b.dim());
        let images: Vec<Vec<C64>> = (0..da).map(|i| self.phi_apply(&self.a.algebra().basis(i))).collect();
        CMatrix::from_fn(da, db, |i, j| self.b.form(&images[i], &self.b.algebra().basis(j)))
    }

    /// Matrix of `phi*` (`dim A x dim B`), from one Gram factorization.
    pub fn phi_star_matrix(&self) -> Result<CMatrix> {
        let g = self.a.gram();
        if self.a.dim() > 0 && linalg::singular_value_margin(&g) < 1e-14 {
            return Err(Error::DegenerateAForm);
        }
        let m = self.pairing_matrix();
        if self.a.dim() == 0 {
            return Ok(m);
        }
        g.lu().solve(&m).ok_or(Error::DegenerateAForm)
    }

    /// `a*` with `(a, a*)_A = (phi(a), b)_B` for all `a`.
    pub fn phi_star(&self, b: &[C64]) -> Result<Vec<C64>> {
        let m = self.phi_star_matrix()?;
        Ok((&m * CVector::from_column_slice(b)).iter().copied().collect())
    }

    /// Replace `phi`, keeping `A` and `B`.
    pub fn with_phi(&self, phi: CMatrix) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), phi)
    }

    pub fn with_b(&self, b: FrobeniusPair) -> Result<Self> {
        Self::new(self.a.clone(), b, self.phi.clone())
    }

    pub fn with_a(&self, a: FrobeniusPair) -> Result<Self> {
        Self::new(a, self.b.clone(), self.phi.clone())
    }
}

pub fn phi_star(cf: &CardyFrobeniusAlgebra, b: &[C64]) -> Result<Vec<C64>> {
    cf.phi_star(b)
}

struct CardySides {
    lhs: CMatrix,
    trace: CMatrix,
}

fn trace_sides(cf: &CardyFrobeniusAlgebra) -> Result<CardySides> {
    let db = cf.b.dim();
    let ps = cf.phi_star_matrix()?;
    let ga = cf.a.gram();
    let lhs = ps.transpose() * &ga * &ps;
    let alg = cf.b.algebra();
    let lefts: Vec<CMatrix> = (0..db).map(|x| alg.left_mul_matrix(&alg.basis(x))).collect();
    let rights: Vec<CMatrix> = (0..db).map(|y| alg.right_mul_matrix(&alg.basis(y))).collect();
    let trace = CMatrix::from_fn(db, db, |x, y| (&lefts[x] * &rights[y]).trace());
    Ok(CardySides { lhs, trace })
}

fn coordinate_sides(cf: &CardyFrobeniusAlgebra) -> Result<CardySides> {
    let db = cf.b.dim();
    let fa = linalg::inverse(&cf.a.gram(), 1e-14).ok_or(Error::DegenerateAForm)?;
    let fb = linalg::inverse(&cf.b.gram(), 1e-14).ok_or(Error::SingularGram)?;
    let m = cf.pairing_matrix();
    let lhs = m.transpose() * fa * &m;
    let alg = cf.b.algebra();
    let basis: Vec<Vec<C64>> = (0..db).map(|i| alg.basis(i)).collect();
    let mut rhs = CMatrix::zeros(db, db);
    for x in 0..db {
        for j in 0..db {
            let xbj = alg.mul(&basis[x], &basis[j]);
            for y in 0..db {
                let xbjy = alg.mul(&xbj, &basis[y]);
                let mut acc = ZERO;
                for k in 0..db {
                    if fb[(k, j)] != ZERO {
                        acc += fb[(k, j)] * cf.b.apply(&alg.mul(&xbjy, &basis[k]));
                    }
                }
                rhs[(x, y)] += acc;
            }
        }
    }
    Ok(CardySides { lhs, trace: rhs })
}

fn max_rel_diff(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(p, q)| rel((p - q).norm(), p.norm().max(q.norm())))
        .fold(0.0, f64::max)
}

/// `max |(phi*(x), phi*(y))_A - tr(b -> x b y)|` over basis pairs.
pub fn cardy_residual_trace(cf: &CardyFrobeniusAlgebra) -> Result<f64> {
    let s = trace_sides(cf)?;
    Ok(max_rel_diff(&s.lhs, &s.trace))
}

/// The same condition with both sides contracted through inverse Grams.
pub fn cardy_residual_coordinates(cf: &CardyFrobeniusAlgebra) -> Result<f64> {
    let s = coordinate_sides(cf)?;
    Ok(max_rel_diff(&s.lhs, &s.trace))
}

/// Largest discrepancy between the two routes, side by side.
pub fn cardy_route_agreement(cf: &CardyFrobeniusAlgebra) -> Result<f64> {
    let t = trace_sides(cf)?;
    let c = coordinate_sides(cf)?;
    Ok(max_rel_diff(&t.lhs, &c.lhs).max(max_rel_diff(&t.trace, &c.trace)))
}

pub fn homomorphism_residual(cf: &CardyFrobeniusAlgebra) -> f64 {
    let a = cf.a.algebra();
    let b = cf.b.algebra();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..a.dim() {
        let pi = cf.phi_apply(&a.basis(i));
        for j in 0..a.dim() {
            let pj = cf.phi_apply(&a.basis(j));
            let lhs = cf.phi_apply(&a.mul(&a.basis(i), &a.basis(j)));
            let rhs = b.mul(&pi, &pj);
            worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
            scale = scale.max(linalg::max_norm(&lhs)).max(linalg::max_norm(&rhs));
        }
    }
    rel(worst, scale)
}

pub fn unit_preservation_residual(cf: &CardyFrobeniusAlgebra) -> f64 {
    let img = cf.phi_apply(cf.a.algebra().unit());
    linalg::max_abs_diff(&img, cf.b.algebra().unit())
}

pub fn centrality_residual(cf: &CardyFrobeniusAlgebra) -> f64 {
    let a = cf.a.algebra();
    let b = cf.b.algebra();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..a.dim() {
        let pi = cf.phi_apply(&a.basis(i));
        for j in 0..b.dim() {
            let bj = b.basis(j);
            let l = b.mul(&pi, &bj);
            let r = b.mul(&bj, &pi);
            worst = worst.max(linalg::max_abs_diff(&l, &r));
            scale = scale.max(linalg::max_norm(&l)).max(linalg::max_norm(&r));
        }
    }
    rel(worst, scale)
}

/// Every axiom of a Cardy-Frobenius algebra as a named residual.
pub fn verify_cardy_frobenius(cf: &CardyFrobeniusAlgebra, tol: &ToleranceConfig) -> VerificationReport {
    let eq = tol.eq_tol;
    let mut rep = VerificationReport::new();
    rep.at_most("commutativity", cf.a.algebra().commutativity_residual(), eq);
    rep.at_most("associativity_a", cf.a.algebra().associativity_residual(), eq);
    rep.at_most("associativity_b", cf.b.algebra().associativity_residual(), eq);
    rep.at_most("unit_a", cf.a.algebra().unit_residual(), eq);
    rep.at_most("unit_b", cf.b.algebra().unit_residual(), eq);
    rep.at_most("homomorphism", homomorphism_residual(cf), eq);
    rep.at_most("unit_preservation", unit_preservation_residual(cf), eq);
    rep.at_most("centrality", centrality_residual(cf), eq);
    let inf = f64::INFINITY;
    rep.at_most("cardy_trace", cardy_residual_trace(cf).unwrap_or(inf), eq);
    rep.at_most("cardy_coordinate", cardy_residual_coordinates(cf).unwrap_or(inf), eq);
    rep.at_most(
        "cardy_route_agreement",
        cardy_route_agreement(cf).unwrap_or(inf),
        10.0 * eq,
    );
    rep.at_least("nondegeneracy_a", cf.a.nondegeneracy_margin(), eq);
    rep.at_least("nondegeneracy_b", cf.b.nondegeneracy_margin(), eq);
    rep
}

/// Block sum of two Cardy-Frobenius algebras.
pub fn orthogonal_sum_cf(cf1: &CardyFrobeniusAlgebra, cf2: &CardyFrobeniusAlgebra) -> CardyFrobeniusAlgebra {
    let a = cf1.a.orthogonal_sum(&cf2.a);
    let b = cf1.b.orthogonal_sum(&cf2.b);
    let (r1, c1) = cf1.phi.shape();
    let (r2, c2) = cf2.phi.shape();
    let mut phi = CMatrix::zeros(r1 + r2, c1 + c2);
    phi.view_mut((0, 0), (r1, c1)).copy_from(&cf1.phi);
    phi.view_mut((r1, c1), (r2, c2)).copy_from(&cf2.phi);
    CardyFrobeniusAlgebra { a, b, phi }
}

/// `{K(lambda), 0, 0}`.
pub fn number_cf(lambda: C64) -> Result<CardyFrobeniusAlgebra> {
    CardyFrobeniusAlgebra::new(
        frobenius::number_pair(lambda)?,
        FrobeniusPair::zero(),
        CMatrix::zeros(0, 1),
    )
}

/// `{K(mu^2), M(m)(mu), phi_M}` with `phi_M(1)` the identity matrix.
pub fn matrix_cf(m: usize, mu: C64) -> Result<CardyFrobeniusAlgebra> {
    let b = frobenius::matrix_pair(m, mu)?;
    let phi = CMatrix::from_column_slice(m * m, 1, b.algebra().unit());
    CardyFrobeniusAlgebra::new(frobenius::number_pair(mu * mu)?, b, phi)
}

/// `{K(rho^2), H(rho), phi_H}` with `phi_H(1) = 1`.
pub fn quaternion_cf(rho: C64) -> Result<CardyFrobeniusAlgebra> {
    quaternion_cf_weighted(rho * rho, rho)
}

/// `{K(weight), H(rho), phi_H}`; Cardy holds only for `weight = rho^2`.
pub fn quaternion_cf_weighted(weight: C64, rho: C64) -> Result<CardyFrobeniusAlgebra> {
    let phi = CMatrix::from_column_slice(4, 1, &[ONE, ZERO, ZERO, ZERO]);
    CardyFrobeniusAlgebra::new(frobenius::number_pair(weight)?, frobenius::quaternion_pair(rho)?, phi)
}

/// Idempotent basis of a commutative semisimple pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Coordinates of `e_i` in the pair's basis.
    pub idempotents: Vec<Vec<C64>>,
    /// `lambda_i = l(e_i)`.
    pub weights: Vec<C64>,
    /// `max |e_i e_j - delta_ij e_i|` and `|sum e_i - 1|`.
    pub residual: f64,
}

impl Decomposition {
    /// Columns are the idempotents.
    pub fn change_of_basis(&self) -> CMatrix {
        let d = self.idempotents.len();
        CMatrix::from_fn(d, d, |k, i| self.idempotents[i][k])
    }

    /// Gram matrix rebuilt from the weights: `E^{-T} diag(lambda) E^{-1}`.
    pub fn rebuilt_gram(&self) -> Result<CMatrix> {
        let e = self.change_of_basis();
        let einv = linalg::inverse(&e, 1e-14).ok_or(Error::NotSemisimple)?;
        let diag = CMatrix::from_diagonal(&CVector::from_vec(self.weights.clone()));
        Ok(einv.transpose() * diag * einv)
    }
}

const DECOMPOSE_SEED: u64 = 0x1de4_907e;

/// Idempotents from the spectrum of multiplication by a random element.
pub fn decompose_commutative(pair: &FrobeniusPair, tol: &ToleranceConfig) -> Result<Decomposition> {
    let alg = pair.algebra();
    let d = alg.dim();
    if d == 0 {
        return Ok(Decomposition {
            idempotents: Vec::new(),
            weights: Vec::new(),
            residual: 0.0,
        });
    }
    if alg.commutativity_residual() > tol.eq_tol {
        return Err(Error::NotSemisimple);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DECOMPOSE_SEED);
    for _attempt in 0..4 {
        let g: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let lg = alg.left_mul_matrix(&g);
        let mut ev = linalg::eigenvalues(&lg).ok_or(Error::NoConvergence("multiplication spectrum"))?;
        crate::polycore::sort_roots(&mut ev);
        let scale = linalg::max_norm(&ev).max(1.0);
        if crate::polycore::min_separation(&ev) < tol.root_sep_tol.max(1e-6) * scale {
            continue;
        }
        // e_k = prod_{j != k} (g - lambda_j) / (lambda_k - lambda_j)
        let mut idempotents = Vec::with_capacity(d);
        for k in 0..d {
            let mut e = alg.unit().to_vec();
            for j in 0..d {
                if j == k {
                    continue;
                }
                let mut f = g.clone();
                for (fi, ui) in f.iter_mut().zip(alg.unit()) {
                    *fi -= ev[j] * ui;
                }
                let denom = ev[k] - ev[j];
                e = alg.mul(&e, &f).into_iter().map(|x| x / denom).collect();
            }
            idempotents.push(e);
        }
        let mut residual = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let prod = alg.mul(&idempotents[i], &idempotents[j]);
                let expect = if i == j { idempotents[i].clone() } else { vec![ZERO; d] };
                let s = linalg::max_norm(&idempotents[i]).max(linalg::max_norm(&idempotents[j]));
                residual = residual.max(rel(linalg::max_abs_diff(&prod, &expect), s * s));
            }
        }
        let mut total = vec![ZERO; d];
        for e in &idempotents {
            for (t, x) in total.iter_mut().zip(e) {
                *t += x;
            }
        }
        residual = residual.max(linalg::max_abs_diff(&total, alg.unit()));
        if residual > tol.eq_tol.sqrt() {
            return Err(Error::NotSemisimple);
        }
        let weights: Vec<C64> = idempotents.iter().map(|e| pair.apply(e)).collect();
        if weights.iter().any(|w| w.norm() < tol.eq_tol) {
            return Err(Error::DegenerateFunctional);
        }
        return Ok(Decomposition {
            idempotents,
            weights,
            residual,
        });
    }
    Err(Error::NotSemisimple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::FiniteAlgebra;
    use crate::linalg::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn phi_star_quaternion_block() {
        let rho = c(0.8, -0.3);
        let cf = quaternion_cf(rho).unwrap();
        let one = cf.phi_star(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!((one[0] - 2.0 / rho).norm() < 1e-14);
        for v in 1..4 {
            let mut b = vec![ZERO; 4];
            b[v] = ONE;
            assert!(cf.phi_star(&b).unwrap()[0].norm() < 1e-15);
        }
        assert_eq!(cf.phi_star(&[ZERO; 4]).unwrap(), vec![ZERO]);
    }

    #[test]
    fn cardy_trace_quaternion_values() {
        let cf = quaternion_cf(ONE).unwrap();
        let s = trace_sides(&cf).unwrap();
        assert!((s.lhs[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
        assert!((s.trace[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
        assert!(s.lhs[(1, 0)].norm() < 1e-14 && s.trace[(1, 0)].norm() < 1e-14);
        assert!(s.lhs[(1, 1)].norm() < 1e-14 && s.trace[(1, 1)].norm() < 1e-14);
        assert!(cardy_residual_trace(&cf).unwrap() < 1e-14);
    }

    #[test]
    fn cardy_coordinate_matrix_values() {
        let cf = matrix_cf(2, ONE).unwrap();
        let s = coordinate_sides(&cf).unwrap();
        // E^11 is index 0, E^22 index 3, E^12 index 1.
        assert!((s.lhs[(0, 3)] - ONE).norm() < 1e-14 && (s.trace[(0, 3)] - ONE).norm() < 1e-14);
        assert!(s.lhs[(1, 1)].norm() < 1e-14 && s.trace[(1, 1)].norm() < 1e-14);
        assert!(cardy_residual_coordinates(&cf).unwrap() < 1e-14);
    }

    #[test]
    fn canonical_examples_pass() {
        for cf in [
            matrix_cf(2, c(0.7, 0.4)).unwrap(),
            matrix_cf(3, c(-1.2, 0.1)).unwrap(),
            quaternion_cf(c(0.3, 1.1)).unwrap(),
            number_cf(c(2.0, -1.0)).unwrap(),
        ] {
            let rep = verify_cardy_frobenius(&cf, &tol());
            assert!(rep.pass, "{rep}");
        }
    }

    #[test]
    fn wrong_weight_fails_cardy() {
        let rho = c(1.3, 0.2);
        let cf = quaternion_cf_weighted(rho * rho * rho, rho).unwrap();
        let rep = verify_cardy_frobenius(&cf, &tol());
        assert!(!rep.get("cardy_trace").unwrap().pass);
        assert!(!rep.get("cardy_coordinate").unwrap().pass);
        assert!(rep.get("homomorphism").unwrap().pass);
    }

    #[test]
    fn orthogonal_sums() {
        let q = quaternion_cf(c(0.5, 0.5)).unwrap();
        let s = orthogonal_sum_cf(&q, &q);
        assert_eq!((s.a().dim(), s.b().dim()), (2, 8));
        assert!(verify_cardy_frobenius(&s, &tol()).pass);
        let s = orthogonal_sum_cf(&q, &number_cf(c(3.0, 0.0)).unwrap());
        assert_eq!((s.a().dim(), s.b().dim()), (2, 4));
        assert!(verify_cardy_frobenius(&s, &tol()).pass);
        let empty =
            CardyFrobeniusAlgebra::new(FrobeniusPair::zero(), FrobeniusPair::zero(), CMatrix::zeros(0, 0)).unwrap();
        assert_eq!(orthogonal_sum_cf(&empty, &orthogonal_sum_cf(&q, &empty)), q);
    }

    #[test]
    fn json_round_trip() {
        let cf = orthogonal_sum_cf(&quaternion_cf(c(0.5, 0.5)).unwrap(), &number_cf(ONE).unwrap());
        let s = serde_json::to_string(&cf).unwrap();
        let back: CardyFrobeniusAlgebra = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cf);
    }

    fn chiral_ring_z3() -> FrobeniusPair {
        // C[z]/(3z^2 - 3), basis {1, z}, l(1) = 0, l(z) = 1/3.
        let alg = FiniteAlgebra::new(2, vec![ONE, ZERO, ZERO, ONE, ZERO, ONE, ONE, ZERO], vec![ONE, ZERO]).unwrap();
        FrobeniusPair::new(alg, vec![ZERO, c(1.0 / 3.0, 0.0)]).unwrap()
    }

    #[test]
    fn decompose_chiral_ring() {
        let d = decompose_commutative(&chiral_ring_z3(), &tol()).unwrap();
        let mut pairs: Vec<(Vec<C64>, C64)> = d.idempotents.iter().cloned().zip(d.weights.iter().cloned()).collect();
        pairs.sort_by(|x, y| x.0[1].re.partial_cmp(&y.0[1].re).unwrap());
        // (1 - z)/2 has weight -1/6, (1 + z)/2 has weight 1/6.
        assert!(linalg::max_abs_diff(&pairs[0].0, &[c(0.5, 0.0), c(-0.5, 0.0)]) < 1e-12);
        assert!((pairs[0].1 - c(-1.0 / 6.0, 0.0)).norm() < 1e-12);
        assert!(linalg::max_abs_diff(&pairs[1].0, &[c(0.5, 0.0), c(0.5, 0.0)]) < 1e-12);
        assert!((pairs[1].1 - c(1.0 / 6.0, 0.0)).norm() < 1e-12);
        let g = d.rebuilt_gram().unwrap();
        assert!(linalg::max_abs(&(g - chiral_ring_z3().gram())) < 1e-12);
    }

    #[test]
    fn decompose_number_and_nilpotent() {
        let p = frobenius::number_pair(c(2.0, 1.0)).unwrap();
        let d = decompose_commutative(&p, &tol()).unwrap();
        assert_eq!(d.idempotents, vec![vec![ONE]]);
        // C[z]/(z^2) with l(z) = 1.
        let alg = FiniteAlgebra::new(2, vec![ONE, ZERO, ZERO, ONE, ZERO, ONE, ZERO, ZERO], vec![ONE, ZERO]).unwrap();
        let nil = FrobeniusPair::new(alg, vec![ZERO, ONE]).unwrap();
        assert_eq!(decompose_commutative(&nil, &tol()), Err(Error::NotSemisimple));
    }
}
