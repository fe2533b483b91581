//! The three canonical Frobenius pairs and their orthogonal sum.
//!
//! ```bash
//! cargo run --example frobenius_pairs
//! ```

use quaternion_lg::frobenius::{
    matrix_pair, number_pair, orthogonal_sum, quaternion_pair, verify_frobenius, QuaternionElement,
};
use quaternion_lg::linalg::c;
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let k = number_pair(c(2.0, 0.0))?;
    let m = matrix_pair(2, c(0.5, 0.0))?;
    let h = quaternion_pair(c(1.0, 0.0))?;
    for (name, pair) in [("K(lambda)", &k), ("M(2)(mu)", &m), ("H(rho)", &h)] {
        let rep = verify_frobenius(pair, &tol);
        println!("{name:10} dim {:2}  pass {}", pair.dim(), rep.pass);
    }

    let i = QuaternionElement::basis(1);
    let j = QuaternionElement::basis(2);
    let show = |q: QuaternionElement| q.q.map(|z| z.re);
    println!("I*J = {:?}", show(i * j));
    println!("J*I = {:?}", show(j * i));

    let sum = orthogonal_sum(&h, &k);
    println!("H + K: dim {}, pass {}", sum.dim(), verify_frobenius(&sum, &tol).pass);
    Ok(())
}
