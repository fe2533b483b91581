//! Derivatives of noncommutative tensor series and the extended WDVV check
//! on a small hand-built series.
//!
//! ```bash
//! cargo run --example tensor_calculus
//! ```

use quaternion_lg::linalg::c;
use quaternion_lg::tensor_series::{ext_wdvv_check, TensorMonomial, TensorSeries};

fn main() -> quaternion_lg::Result<()> {
    // t2 (x) s1 s2 s3 s1
    let mut f = TensorSeries::new(2, 3, 6);
    f.add_term(TensorMonomial::new(vec![1], vec![0, 1, 2, 0]), c(1.0, 0.0))?;
    println!("F              = {f}");
    println!("d_t2 F         = {}", f.d_t(1));
    println!("d_s1 F         = {}", f.d_s(0));
    println!("d_s1 d_s2 d_s3 = {}", f.d_sss(0, 1, 2));
    println!("projection     = {:?}", f.project().map());

    // A = B = K with unit pairing and phi = id:
    // G = 1/2 t1 t1 + 1/6 t1^3 + s1 s1 + t1 s1 + 1/3 s1^3
    let mut g = TensorSeries::new(1, 1, 6);
    g.add_term(TensorMonomial::new(vec![0, 0], vec![]), c(0.5, 0.0))?;
    g.add_term(TensorMonomial::new(vec![0, 0, 0], vec![]), c(1.0 / 6.0, 0.0))?;
    g.add_term(TensorMonomial::new(vec![], vec![0, 0]), c(1.0, 0.0))?;
    g.add_term(TensorMonomial::new(vec![0], vec![0]), c(1.0, 0.0))?;
    g.add_term(TensorMonomial::new(vec![], vec![0, 0, 0]), c(1.0 / 3.0, 0.0))?;
    let r = ext_wdvv_check(&g, 1e-9)?;
    println!(
        "residuals {:?} (condition 2 is the smallest Gram margin)",
        r.residuals()
    );
    Ok(())
}
