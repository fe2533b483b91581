use serde::{Deserialize, Serialize};

use super::potential::PotentialPoly;
use crate::linalg::{self, C64, ONE, ZERO};
use crate::report::VerificationReport;
use crate::tolerance::rel;

/// Which flat index carries the unit vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WdvvConvention {
    /// Unit is `d/dt^1`: normalization checks `F_{ij1}`.
    #[default]
    UnitFirst,
    /// Indices are reversed first, then `F_{ijn}` is checked literally.
    IndexReversal,
}

/// Threshold for checks on fitted potentials.
pub const FIT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdvvReport {
    pub associativity: f64,
    pub normalization: Option<f64>,
    pub quasi_homogeneity: f64,
    pub points: usize,
    /// Checks not applicable here, with the reason.
    pub skipped: Vec<String>,
}

impl WdvvReport {
    pub fn to_report(&self, tol: f64) -> VerificationReport {
        let mut rep = VerificationReport::new();
        rep.at_most("wdvv_associativity", self.associativity, tol);
        if let Some(v) = self.normalization {
            rep.at_most("wdvv_normalization", v, tol);
        }
        rep.at_most("wdvv_quasi_homogeneity", self.quasi_homogeneity, tol);
        rep
    }
}

/// Associativity, normalization and quasi-homogeneity of `f` at `points`.
pub fn wdvv_check(f: &PotentialPoly, points: &[Vec<C64>], convention: WdvvConvention) -> WdvvReport {
    let g = match convention {
        WdvvConvention::UnitFirst => f.clone(),
        WdvvConvention::IndexReversal => f.reversed(),
    };
    let n = g.n();
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut assoc = 0.0f64;
    let mut norm = 0.0f64;
    let mut skipped = Vec::new();
    let check_norm = n >= 2;
    if !check_norm {
        skipped.push("wdvv_normalization: n = 1 has no unit-normalized pairing (g = 1/2)".to_string());
    }
    let unit = match convention {
        WdvvConvention::UnitFirst => 0,
        WdvvConvention::IndexReversal => n - 1,
    };
    for t in points {
        let d = g.third_derivatives(t);
        let scale = linalg::max_norm(&d);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut lhs = ZERO;
                        let mut rhs = ZERO;
                        for q in 0..n {
                            lhs += d[idx(i, j, q)] * d[idx(k, l, n - 1 - q)];
                            rhs += d[idx(k, j, q)] * d[idx(i, l, n - 1 - q)];
                        }
                        assoc = assoc.max(rel((lhs - rhs).norm(), scale * scale));
                    }
                }
                if check_norm {
                    let e = if i + j == n - 1 { ONE } else { ZERO };
                    norm = norm.max((d[idx(i, j, unit)] - e).norm());
                }
            }
        }
    }
    WdvvReport {
        associativity: assoc,
        normalization: check_norm.then_some(norm),
        quasi_homogeneity: g.quasi_homogeneity_defect(),
        points: points.len(),
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::moduli::reconstruct_potential;
    use crate::sampling::{indexed_rng, random_complex};
    use crate::tolerance::ToleranceConfig;

    fn points(n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
        (0..count)
            .map(|s| {
                let mut rng = indexed_rng(seed, s as u64);
                (0..n).map(|_| random_complex(&mut rng, 1.0)).collect()
            })
            .collect()
    }

    #[test]
    fn f2_both_normalizations() {
        for b2 in [1.0 / 24.0, -0.375] {
            let f = PotentialPoly::new(2, vec![(vec![2, 1], c(0.5, 0.0)), (vec![0, 4], c(b2, 0.0))]).unwrap();
            let r = wdvv_check(&f, &points(2, 5, 1), WdvvConvention::UnitFirst);
            assert!(r.associativity < 1e-15);
            assert!(r.normalization.unwrap() < 1e-15);
            let rr = wdvv_check(&f, &points(2, 5, 1), WdvvConvention::IndexReversal);
            assert!(rr.normalization.unwrap() < 1e-15);
        }
    }

    #[test]
    fn reconstructed_f3_and_corruption() {
        let tol = ToleranceConfig::default();
        let rec = reconstruct_potential(3, 12, 3, &tol).unwrap();
        let pts = points(3, 20, 77);
        let r = wdvv_check(&rec.potential, &pts, WdvvConvention::UnitFirst);
        assert!(r.to_report(FIT_TOL).pass, "{r:?}");
        let mut bad = rec.potential.clone();
        let e = vec![0, 2, 2];
        bad.set_coefficient(e.clone(), bad.coefficient(&e) + 0.1);
        let r = wdvv_check(&bad, &pts, WdvvConvention::UnitFirst);
        assert!(r.associativity > 1e-3);
    }

    #[test]
    fn n1_is_trivial() {
        let f = PotentialPoly::new(1, vec![(vec![3], c(1.0 / 12.0, 0.0))]).unwrap();
        let r = wdvv_check(&f, &points(1, 3, 2), WdvvConvention::UnitFirst);
        assert_eq!(r.associativity, 0.0);
        assert!(r.normalization.is_none());
        assert_eq!(r.skipped.len(), 1);
        assert!(r.to_report(FIT_TOL).pass);
    }
}
