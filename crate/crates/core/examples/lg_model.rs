//! Builds the quaternion Landau-Ginzburg model of `p = z^3 - 3z` and prints
//! its critical points, `mu` values and verification report.
//!
//! ```bash
//! cargo run --example lg_model
//! ```

use quaternion_lg::landau_ginzburg::{build_quaternion_model, principal_branches};
use quaternion_lg::polycore::LGPolynomial;
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let p = LGPolynomial::from_real(&[-3.0, 0.0])?;
    let model = build_quaternion_model(&p, &principal_branches(2), &tol)?;
    let closed = model.closed();
    for ((x, mu), rho) in closed.roots().iter().zip(closed.mu()).zip(model.rho()) {
        println!("x = {x:.6}  mu = {mu:.6}  rho = {rho:.6}");
    }
    println!("mu routes differ by {:.2e}", closed.mu_route_discrepancy());
    print!("{}", model.verify(&tol));
    Ok(())
}
