//! Fits the potential for `n = 2` and `n = 3` from sampled structure tensors.
//!
//! ```bash
//! cargo run --example potential_reconstruction
//! ```

use quaternion_lg::moduli::reconstruct_potential;
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let rec = reconstruct_potential(2, 12, 1, &tol)?;
    let (b1, b2) = rec.n2_coefficients().expect("n = 2");
    println!("n = 2: F = {:.6} (t1)^2 t2 + {:.6} (t2)^4", b1.re, b2.re);
    println!("       beta2 / (1/24) = {:.4}", b2.re * 24.0);
    println!("       fit residual {:.2e}", rec.fit_residual);

    let rec = reconstruct_potential(3, 12, 1, &tol)?;
    println!(
        "n = 3: fit residual {:.2e}, conditioning {:.2e}",
        rec.fit_residual, rec.conditioning
    );
    for (e, coeff) in &rec.potential.pruned(1e-12).poly().terms {
        println!("       t^{e:?}: {:.6}", coeff.re);
    }
    Ok(())
}
