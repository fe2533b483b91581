//! Cardy condition in trace form and coordinate form, with a failing
//! quaternion functional.
//!
//! ```bash
//! cargo run --example cardy_condition
//! ```

use quaternion_lg::cardy::{
    cardy_residual_coordinates, cardy_residual_trace, matrix_cf, orthogonal_sum_cf, quaternion_cf,
    quaternion_cf_weighted, verify_cardy_frobenius,
};
use quaternion_lg::frobenius::m2_quaternion_isomorphism;
use quaternion_lg::linalg::c;
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let rho = c(0.8, -0.3);
    let cases = [
        ("M(2)", matrix_cf(2, rho)?),
        ("H", quaternion_cf(rho)?),
        ("H, weight 2", quaternion_cf_weighted(c(2.0, 0.0), rho)?),
    ];
    for (name, cf) in &cases {
        println!(
            "{name:12} trace {:.2e}  coordinates {:.2e}  pass {}",
            cardy_residual_trace(cf)?,
            cardy_residual_coordinates(cf)?,
            verify_cardy_frobenius(cf, &tol).pass
        );
    }
    let sum = orthogonal_sum_cf(&cases[0].1, &cases[1].1);
    println!("M(2) + H pass {}", verify_cardy_frobenius(&sum, &tol).pass);
    println!("M(2) -> H residual {:.2e}", m2_quaternion_isomorphism(rho)?.residual);
    Ok(())
}
