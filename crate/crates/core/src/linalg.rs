//! Thin helpers over `nalgebra` for complex dense matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// `sigma_min / sigma_max`; 1 for an empty matrix, 0 for the zero matrix.
pub fn singular_value_margin(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 1.0;
    }
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || !max.is_finite() {
        0.0
    } else {
        min / max
    }
}

/// Inverse, refusing matrices whose margin is below `min_margin`.
pub fn inverse(m: &CMatrix, min_margin: f64) -> Option<CMatrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.nrows() == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    if singular_value_margin(m) < min_margin {
        return None;
    }
    m.clone().lu().try_inverse()
}

pub fn eigenvalues(m: &CMatrix) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(Vec::new());
    }
    m.clone().try_schur(1e-15, 10_000).map(|s| {
        s.eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect()
    })
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Option<CVector> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, smax * 1e-13).ok()
}

/// Least squares with one right-hand side per column of `b`.
pub fn least_squares_columns(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, smax * 1e-13).ok()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(ZERO);
            let y = b.get(i).copied().unwrap_or(ZERO);
            (x - y).norm()
        })
        .fold(0.0, f64::max)
}

pub fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Complex numbers as `[re, im]` pairs in JSON.
pub mod cjson {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_pair(z: C64) -> [f64; 2] {
        [z.re, z.im]
    }

    pub fn from_pair(p: [f64; 2]) -> C64 {
        C64::new(p[0], p[1])
    }

    pub fn to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
        v.iter().map(|z| to_pair(*z)).collect()
    }

    pub fn from_pairs(v: &[[f64; 2]]) -> Vec<C64> {
        v.iter().map(|p| from_pair(*p)).collect()
    }

    pub mod scalar {
        use super::*;
        pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
            to_pair(*z).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
            <[f64; 2]>::deserialize(d).map(from_pair)
        }
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
            to_pairs(v).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
            <Vec<[f64; 2]>>::deserialize(d).map(|v| from_pairs(&v))
        }
    }

    /// Row-major matrix of pairs.
    pub mod matrix {
        use super::*;
        use crate::linalg::CMatrix;
        pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect())
                .collect();
            rows.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
            let rows = <Vec<Vec<[f64; 2]>>>::deserialize(d)?;
            let nr = rows.len();
            let nc = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != nc) {
                return Err(serde::de::Error::custom("ragged matrix"));
            }
            Ok(CMatrix::from_fn(nr, nc, |i, j| from_pair(rows[i][j])))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_of_identity_and_zero() {
        assert_eq!(singular_value_margin(&CMatrix::identity(3, 3)), 1.0);
        assert_eq!(singular_value_margin(&CMatrix::zeros(2, 2)), 0.0);
        assert_eq!(singular_value_margin(&CMatrix::zeros(0, 0)), 1.0);
    }

    #[test]
    fn inverse_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let inv = inverse(&m, 1e-12).unwrap();
        let id = &m * &inv;
        assert!(max_abs(&(id - CMatrix::identity(2, 2))) < 1e-14);
        assert!(inverse(&CMatrix::zeros(2, 2), 1e-12).is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 1.0)]));
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn least_squares_exact_system() {
        let a = CMatrix::from_row_slice(3, 2, &[ONE, ZERO, ZERO, ONE, ONE, ONE]);
        let b = CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - ONE).norm() < 1e-13 && (x[1] - c(2.0, 0.0)).norm() < 1e-13);
    }
}
