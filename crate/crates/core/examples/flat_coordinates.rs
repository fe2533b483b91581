//! Flat coordinates of a random quartic deformation: reversion, metric and
//! Euler field.
//!
//! ```bash
//! cargo run --example flat_coordinates
//! ```

use quaternion_lg::moduli::{a_from_flat, euler_check, flat_chart, flat_coordinates};
use quaternion_lg::sampling::{indexed_rng, sample_polynomial, SamplerConfig};
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let p = sample_polynomial(&mut indexed_rng(7, 0), 3, &SamplerConfig::default(), &tol)?;
    let t = flat_coordinates(&p);
    println!("a = {:.4?}", p.a());
    println!("t = {t:.4?}");
    let back = a_from_flat(&t)?;
    println!(
        "round trip error {:.2e}",
        quaternion_lg::linalg::max_abs_diff(back.a(), p.a())
    );

    let chart = flat_chart(&p, &tol)?;
    println!("metric residual {:.2e}", chart.metric_residual());
    let e = euler_check(&p, &tol);
    println!(
        "Euler: polynomial {:.2e}, flat {:.2e}",
        e.polynomial_residual, e.flat_residual
    );
    Ok(())
}
