//! WDVV associativity of the reconstructed `n = 3` potential, and of a
//! corrupted copy.
//!
//! ```bash
//! cargo run --example wdvv
//! ```

use quaternion_lg::linalg::C64;
use quaternion_lg::moduli::{reconstruct_potential, wdvv_check, WdvvConvention};
use quaternion_lg::sampling::{indexed_rng, random_complex};
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let f = reconstruct_potential(3, 12, 3, &tol)?.potential;
    let points: Vec<Vec<C64>> = (0..20)
        .map(|k| {
            let mut rng = indexed_rng(11, k);
            (0..3).map(|_| random_complex(&mut rng, 1.0)).collect()
        })
        .collect();
    let r = wdvv_check(&f, &points, WdvvConvention::UnitFirst);
    println!(
        "fitted:    associativity {:.2e}, quasi-homogeneity {:.2e}",
        r.associativity, r.quasi_homogeneity
    );

    let mut bad = f.clone();
    bad.set_coefficient(vec![0, 2, 2], bad.coefficient(&[0, 2, 2]) + 0.1);
    let r = wdvv_check(&bad, &points, WdvvConvention::UnitFirst);
    println!("corrupted: associativity {:.2e}", r.associativity);
    Ok(())
}
