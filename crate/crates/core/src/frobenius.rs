//! Finite-dimensional algebras given by structure constants, Frobenius
//! pairs and the three standard families: numbers, matrices, quaternions.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cjson, CMatrix, C64, I, ONE, ZERO};
use crate::report::VerificationReport;
use crate::tolerance::{rel, ToleranceConfig};

/// Algebra with basis `b_0..b_{d-1}` and `b_i b_j = sum_k C[i][j][k] b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAlgebra {
    dim: usize,
    structure: Vec<C64>,
    unit: Vec<C64>,
}

impl FiniteAlgebra {
    /// `structure` is flattened row-major as `C[(i * d + j) * d + k]`.
    pub fn new(dim: usize, structure: Vec<C64>, unit: Vec<C64>) -> Result<Self> {
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "structure has {} entries, expected {}",
                structure.len(),
                dim * dim * dim
            )));
        }
        if unit.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "unit has {} entries, expected {dim}",
                unit.len()
            )));
        }
        Ok(Self { dim, structure, unit })
    }

    /// Build from a closure `(i, j) -> coordinates of b_i b_j`.
    pub fn from_products(dim: usize, unit: Vec<C64>, mut prod: impl FnMut(usize, usize) -> Vec<C64>) -> Result<Self> {
        let mut structure = vec![ZERO; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let v = prod(i, j);
                if v.len() != dim {
                    return Err(Error::DimensionMismatch("product has wrong length".into()));
                }
                structure[(i * dim + j) * dim..(i * dim + j + 1) * dim].copy_from_slice(&v);
            }
        }
        Self::new(dim, structure, unit)
    }

    pub fn zero() -> Self {
        Self {
            dim: 0,
            structure: Vec::new(),
            unit: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> &[C64] {
        &self.structure
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> C64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn unit(&self) -> &[C64] {
        &self.unit
    }

    pub fn basis(&self, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim];
        v[i] = ONE;
        v
    }

    pub fn mul(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![ZERO; d];
        for i in 0..d {
            if x[i] == ZERO {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == ZERO {
                    continue;
                }
                let row = &self.structure[(i * d + j) * d..(i * d + j + 1) * d];
                for k in 0..d {
                    out[k] += xy * row[k];
                }
            }
        }
        out
    }

    /// Matrix of `y -> x y`.
    pub fn left_mul_matrix(&self, x: &[C64]) -> CMatrix {
        let d = self.dim;
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.mul(x, &self.basis(j));
            for k in 0..d {
                m[(k, j)] = col[k];
            }
        }
        m
    }

    /// Matrix of `y -> y x`.
    pub fn right_mul_matrix(&self, x: &[C64]) -> CMatrix {
        let d = self.dim;
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.mul(&self.basis(j), x);
            for k in 0..d {
                m[(k, j)] = col[k];
            }
        }
        m
    }

    fn scale(&self) -> f64 {
        linalg::max_norm(&self.structure)
    }

    pub fn associativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let bij = self.mul(&self.basis(i), &self.basis(j));
                for k in 0..d {
                    let lhs = self.mul(&bij, &self.basis(k));
                    let bjk = self.mul(&self.basis(j), &self.basis(k));
                    let rhs = self.mul(&self.basis(i), &bjk);
                    worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
                }
            }
        }
        rel(worst, self.scale() * self.scale())
    }

    pub fn unit_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            let b = self.basis(j);
            worst = worst.max(linalg::max_abs_diff(&self.mul(&self.unit, &b), &b));
            worst = worst.max(linalg::max_abs_diff(&self.mul(&b, &self.unit), &b));
        }
        rel(worst, self.scale() * linalg::max_norm(&self.unit))
    }

    pub fn commutativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((self.c(i, j, k) - self.c(j, i, k)).norm());
                }
            }
        }
        rel(worst, self.scale())
    }

    /// Block sum with zero cross products.
    pub fn direct_sum(&self, other: &FiniteAlgebra) -> FiniteAlgebra {
        let (d1, d2) = (self.dim, other.dim);
        let d = d1 + d2;
        let mut unit = self.unit.clone();
        unit.extend_from_slice(&other.unit);
        FiniteAlgebra::from_products(d, unit, |i, j| {
            let mut v = vec![ZERO; d];
            if i < d1 && j < d1 {
                for k in 0..d1 {
                    v[k] = self.c(i, j, k);
                }
            } else if i >= d1 && j >= d1 {
                for k in 0..d2 {
                    v[d1 + k] = other.c(i - d1, j - d1, k);
                }
            }
            v
        })
        .expect("block sum dimensions are consistent")
    }
}

/// Algebra plus linear functional `l` (values on the basis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson", into = "PairJson")]
pub struct FrobeniusPair {
    algebra: FiniteAlgebra,
    functional: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    dim: usize,
    #[serde(with = "cjson::vec")]
    structure: Vec<C64>,
    #[serde(with = "cjson::vec")]
    functional: Vec<C64>,
    #[serde(with = "cjson::vec")]
    unit: Vec<C64>,
}

impl TryFrom<PairJson> for FrobeniusPair {
    type Error = Error;
    fn try_from(j: PairJson) -> Result<Self> {
        FrobeniusPair::new(FiniteAlgebra::new(j.dim, j.structure, j.unit)?, j.functional)
    }
}

impl From<FrobeniusPair> for PairJson {
    fn from(p: FrobeniusPair) -> Self {
        PairJson {
            dim: p.algebra.dim,
            structure: p.algebra.structure,
            functional: p.functional,
            unit: p.algebra.unit,
        }
    }
}

impl FrobeniusPair {
    pub fn new(algebra: FiniteAlgebra, functional: Vec<C64>) -> Result<Self> {
        if functional.len() != algebra.dim() {
            return Err(Error::DimensionMismatch(format!(
                "functional has {} entries, algebra has dimension {}",
                functional.len(),
                algebra.dim()
            )));
        }
        Ok(Self { algebra, functional })
    }

    pub fn zero() -> Self {
        Self {
            algebra: FiniteAlgebra::zero(),
            functional: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn functional(&self) -> &[C64] {
        &self.functional
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn apply(&self, x: &[C64]) -> C64 {
        self.functional.iter().zip(x).map(|(l, x)| l * x).sum()
    }

    /// `(x, y) = l(x y)`.
    pub fn form(&self, x: &[C64], y: &[C64]) -> C64 {
        self.apply(&self.algebra.mul(x, y))
    }

    pub fn gram(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| {
            (0..d).map(|k| self.algebra.c(i, j, k) * self.functional[k]).sum()
        })
    }

    pub fn nondegeneracy_margin(&self) -> f64 {
        linalg::singular_value_margin(&self.gram())
    }

    /// `max |l((b_i b_j) b_k) - l(b_i (b_j b_k))|`, relative.
    pub fn frobenius_symmetry_residual(&self) -> f64 {
        let a = &self.algebra;
        let d = a.dim();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let bij = a.mul(&a.basis(i), &a.basis(j));
                for k in 0..d {
                    let lhs = self.apply(&a.mul(&bij, &a.basis(k)));
                    let rhs = self.apply(&a.mul(&a.basis(i), &a.mul(&a.basis(j), &a.basis(k))));
                    worst = worst.max((lhs - rhs).norm());
                    scale = scale.max(lhs.norm()).max(rhs.norm());
                }
            }
        }
        rel(worst, scale)
    }

    pub fn gram_symmetry_residual(&self) -> f64 {
        let g = self.gram();
        rel(linalg::max_abs(&(&g - g.transpose())), linalg::max_abs(&g))
    }

    /// Orthogonal (block) sum of two pairs.
    pub fn orthogonal_sum(&self, other: &FrobeniusPair) -> FrobeniusPair {
        let mut functional = self.functional.clone();
        functional.extend_from_slice(&other.functional);
        FrobeniusPair {
            algebra: self.algebra.direct_sum(&other.algebra),
            functional,
        }
    }
}

/// Full axiom check of a Frobenius pair.
pub fn verify_frobenius(pair: &FrobeniusPair, tol: &ToleranceConfig) -> VerificationReport {
    let mut rep = VerificationReport::new();
    rep.at_most("associativity", pair.algebra.associativity_residual(), tol.eq_tol);
    rep.at_most("unit", pair.algebra.unit_residual(), tol.eq_tol);
    rep.at_most("frobenius_symmetry", pair.frobenius_symmetry_residual(), tol.eq_tol);
    rep.at_least("nondegeneracy_margin", pair.nondegeneracy_margin(), tol.eq_tol);
    rep
}

pub fn orthogonal_sum(p1: &FrobeniusPair, p2: &FrobeniusPair) -> FrobeniusPair {
    p1.orthogonal_sum(p2)
}

fn nonzero(x: C64) -> Result<()> {
    if x == ZERO || !x.re.is_finite() || !x.im.is_finite() {
        Err(Error::DegenerateFunctional)
    } else {
        Ok(())
    }
}

/// One-dimensional pair `K(lambda)` with `l(1) = lambda`.
pub fn number_pair(lambda: C64) -> Result<FrobeniusPair> {
    nonzero(lambda)?;
    FrobeniusPair::new(FiniteAlgebra::new(1, vec![ONE], vec![ONE])?, vec![lambda])
}

/// `M(m)` on the elementary basis `E^{kr}` (index `k * m + r`) with
/// `l = mu * trace`.
pub fn matrix_pair(m: usize, mu: C64) -> Result<FrobeniusPair> {
    nonzero(mu)?;
    if m == 0 {
        return Err(Error::InvalidInput("matrix size must be positive".into()));
    }
    let d = m * m;
    let unit = (0..d).map(|i| if i / m == i % m { ONE } else { ZERO }).collect();
    let algebra = FiniteAlgebra::from_products(d, unit, |x, y| {
        let (k, r) = (x / m, x % m);
        let (l, s) = (y / m, y % m);
        let mut v = vec![ZERO; d];
        if r == l {
            v[k * m + s] = ONE;
        }
        v
    })?;
    let functional = (0..d).map(|i| if i / m == i % m { mu } else { ZERO }).collect();
    FrobeniusPair::new(algebra, functional)
}

/// Quaternion with complex components on `1, I, J, K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuaternionElement {
    #[serde(with = "quat_json")]
    pub q: [C64; 4],
}

mod quat_json {
    use super::*;
    use serde::{Deserializer, Serializer};
    pub fn serialize<S: Serializer>(q: &[C64; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
        cjson::to_pairs(q).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[C64; 4], D::Error> {
        let v = <[[f64; 2]; 4]>::deserialize(d)?;
        Ok(v.map(cjson::from_pair))
    }
}

/// `QUAT_TABLE[a][b] = (sign, c)` means `e_a e_b = sign * e_c`,
/// with `e_0 = 1, e_1 = I, e_2 = J, e_3 = K`.
pub const QUAT_TABLE: [[(f64, usize); 4]; 4] = [
    [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
    [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
    [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
    [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
];

impl QuaternionElement {
    pub fn new(q0: C64, q1: C64, q2: C64, q3: C64) -> Self {
        Self { q: [q0, q1, q2, q3] }
    }

    pub fn basis(i: usize) -> Self {
        let mut q = [ZERO; 4];
        q[i] = ONE;
        Self { q }
    }

    pub fn one() -> Self {
        Self::basis(0)
    }
}

impl Mul for QuaternionElement {
    type Output = QuaternionElement;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [ZERO; 4];
        for a in 0..4 {
            for b in 0..4 {
                let (s, c) = QUAT_TABLE[a][b];
                out[c] += self.q[a] * rhs.q[b] * s;
            }
        }
        Self { q: out }
    }
}

impl Add for QuaternionElement {
    type Output = QuaternionElement;
    fn add(self, rhs: Self) -> Self {
        Self {
            q: [0, 1, 2, 3].map(|i| self.q[i] + rhs.q[i]),
        }
    }
}

/// `H(rho)`: quaternions with `l(1) = 2 rho`, `l(I) = l(J) = l(K) = 0`.
pub fn quaternion_pair(rho: C64) -> Result<FrobeniusPair> {
    nonzero(rho)?;
    quaternion_pair_with_functional(vec![rho * 2.0, ZERO, ZERO, ZERO])
}

/// Quaternion algebra with an arbitrary functional (no validation of the
/// induced form).
pub fn quaternion_pair_with_functional(functional: Vec<C64>) -> Result<FrobeniusPair> {
    let algebra = FiniteAlgebra::from_products(4, QuaternionElement::one().q.to_vec(), |a, b| {
        (QuaternionElement::basis(a) * QuaternionElement::basis(b)).q.to_vec()
    })?;
    FrobeniusPair::new(algebra, functional)
}

/// Change of basis `M(2) -> H` and its homomorphism residual.
#[derive(Debug, Clone)]
pub struct IsomorphismCheck {
    /// Column `x` holds the quaternion coordinates of the image of `E^x`.
    pub map: CMatrix,
    pub residual: f64,
    pub determinant: C64,
}

/// 2x2 matrices of `1, I, J, K`, row-major.
pub fn quaternion_matrices() -> [[C64; 4]; 4] {
    [
        [ONE, ZERO, ZERO, ONE],
        [-I, ZERO, ZERO, I],
        [ZERO, -ONE, ONE, ZERO],
        [ZERO, I, I, ZERO],
    ]
}

/// The isomorphism `M(2)(rho) -> H(rho)` given by the matrix images of
/// `1, I, J, K`, checked on every basis product and on the functionals.
pub fn m2_quaternion_isomorphism(rho: C64) -> Result<IsomorphismCheck> {
    let mats = quaternion_matrices();
    // H -> M: column a = elementary coordinates of the matrix for e_a.
    let h_to_m = CMatrix::from_fn(4, 4, |x, a| mats[a][x]);
    let map = linalg::inverse(&h_to_m, 1e-12).ok_or(Error::SingularGram)?;
    let m2 = matrix_pair(2, rho)?;
    let hq = quaternion_pair(rho)?;
    let apply = |x: &[C64]| -> Vec<C64> {
        let v = &map * crate::linalg::CVector::from_column_slice(x);
        v.iter().copied().collect()
    };
    let mut worst = 0.0f64;
    for x in 0..4 {
        let bx = m2.algebra().basis(x);
        for y in 0..4 {
            let by = m2.algebra().basis(y);
            let lhs = apply(&m2.algebra().mul(&bx, &by));
            let rhs = hq.algebra().mul(&apply(&bx), &apply(&by));
            worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
        }
        worst = worst.max((hq.apply(&apply(&bx)) - m2.apply(&bx)).norm());
    }
    let determinant = map.determinant();
    Ok(IsomorphismCheck {
        map,
        residual: worst,
        determinant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn number_pair_examples() {
        let p = number_pair(c(2.0, 0.0)).unwrap();
        let rep = verify_frobenius(&p, &tol());
        assert!(rep.pass);
        assert_eq!(rep.value("nondegeneracy_margin"), Some(1.0));
        assert_eq!(p.apply(p.algebra().unit()), c(2.0, 0.0));
        assert_eq!(p.gram()[(0, 0)], c(2.0, 0.0));
        assert_eq!(number_pair(ZERO), Err(Error::DegenerateFunctional));
    }

    #[test]
    fn matrix_pair_examples() {
        let lam = c(0.3, -1.1);
        assert_eq!(matrix_pair(1, lam).unwrap(), number_pair(lam).unwrap());
        let p = matrix_pair(2, ONE).unwrap();
        let e = |k: usize, r: usize| p.algebra().basis(k * 2 + r);
        assert_eq!(p.form(&e(0, 0), &e(0, 0)), ONE);
        assert_eq!(p.form(&e(0, 1), &e(1, 0)), ONE);
        assert_eq!(p.form(&e(0, 1), &e(0, 1)), ZERO);
        // Gram is a permutation matrix.
        let g = p.gram();
        for i in 0..4 {
            let row: Vec<C64> = (0..4).map(|j| g[(i, j)]).collect();
            assert_eq!(row.iter().filter(|&&x| x == ONE).count(), 1);
            assert_eq!(row.iter().filter(|&&x| x == ZERO).count(), 3);
        }
        assert!(verify_frobenius(&p, &tol()).pass);
        assert!(matrix_pair(2, ZERO).is_err());
    }

    #[test]
    fn quaternion_table_relations() {
        let [one, i, j, k] = [0, 1, 2, 3].map(QuaternionElement::basis);
        let neg = |x: QuaternionElement| QuaternionElement { q: x.q.map(|z| -z) };
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, neg(k));
        assert_eq!(k * j, neg(i));
        assert_eq!(i * k, neg(j));
        for x in [i, j, k] {
            assert_eq!(x * x, neg(one));
        }
        assert_eq!(i * j * k, neg(one));
    }

    #[test]
    fn quaternion_pair_examples() {
        let p = quaternion_pair(ONE).unwrap();
        let g = p.gram();
        let expect = [2.0, -2.0, -2.0, -2.0];
        for a in 0..4 {
            for b in 0..4 {
                let e = if a == b { c(expect[a], 0.0) } else { ZERO };
                assert_eq!(g[(a, b)], e);
            }
        }
        let ij = p.algebra().mul(&p.algebra().basis(1), &p.algebra().basis(2));
        assert_eq!(p.apply(&ij), ZERO);
        let half = quaternion_pair(c(0.5, 0.0)).unwrap();
        assert_eq!(half.apply(half.algebra().unit()), ONE);
        assert!(verify_frobenius(&p, &tol()).pass);
        assert!(p.gram_symmetry_residual() < 1e-15);
        assert!(quaternion_pair(ZERO).is_err());
    }

    #[test]
    fn zero_functional_fails_nondegeneracy() {
        let p = quaternion_pair_with_functional(vec![ZERO; 4]).unwrap();
        let rep = verify_frobenius(&p, &tol());
        assert!(!rep.pass);
        assert!(!rep.get("nondegeneracy_margin").unwrap().pass);
    }

    #[test]
    fn orthogonal_sum_examples() {
        let s = orthogonal_sum(&number_pair(ONE).unwrap(), &number_pair(c(2.0, 0.0)).unwrap());
        assert_eq!(s.dim(), 2);
        let g = s.gram();
        assert_eq!((g[(0, 0)], g[(1, 1)], g[(0, 1)]), (ONE, c(2.0, 0.0), ZERO));

        let lam = number_pair(c(1.5, 0.5)).unwrap();
        assert_eq!(orthogonal_sum(&lam, &FrobeniusPair::zero()), lam);

        let h = orthogonal_sum(&quaternion_pair(ONE).unwrap(), &number_pair(c(3.0, 0.0)).unwrap());
        assert_eq!(h.dim(), 5);
        assert!(h.algebra().associativity_residual() < 1e-15);
        assert!(verify_frobenius(&h, &tol()).pass);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let alg = FiniteAlgebra::new(1, vec![ONE], vec![ONE]).unwrap();
        assert!(matches!(
            FrobeniusPair::new(alg, vec![]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(FiniteAlgebra::new(2, vec![ONE], vec![ONE, ZERO]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = quaternion_pair(c(0.5, 0.25)).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with(r#"{"dim":4,"structure":"#));
        let back: FrobeniusPair = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"dim":1,"structure":[[1,0]],"functional":[],"unit":[[1,0]]}"#;
        assert!(serde_json::from_str::<FrobeniusPair>(bad).is_err());
    }

    #[test]
    fn m2_isomorphism() {
        let rho = c(0.7, 0.2);
        let iso = m2_quaternion_isomorphism(rho).unwrap();
        assert!(iso.residual < 1e-12);
        assert!(iso.determinant.norm() > 1e-3);
        // The matrix of J squares to minus the identity.
        let j = [ZERO, -ONE, ONE, ZERO];
        let m2 = matrix_pair(2, rho).unwrap();
        let jj = m2.algebra().mul(&j, &j);
        let image = &iso.map * crate::linalg::CVector::from_column_slice(&jj);
        let expect = [-ONE, ZERO, ZERO, ZERO];
        for a in 0..4 {
            assert!((image[a] - expect[a]).norm() < 1e-15);
        }
        // l_M(identity) = 2 rho = l_H(1).
        assert_eq!(m2.apply(m2.algebra().unit()), rho * 2.0);
    }
}
