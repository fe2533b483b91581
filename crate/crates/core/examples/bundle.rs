//! Flat bundle of the `n = 2` model: pairing drift under both frame scales,
//! the two verification routes, and corruption detection.
//!
//! ```bash
//! cargo run --release --example bundle
//! ```

use quaternion_lg::bundle::{flat_s_frame, verify_bundle, BundleOptions, Corruption, FrameScale};
use quaternion_lg::landau_ginzburg::{build_quaternion_model, principal_branches};
use quaternion_lg::linalg;
use quaternion_lg::polycore::LGPolynomial;
use quaternion_lg::sampling::{indexed_rng, sample_near, SamplerConfig};
use quaternion_lg::tolerance::ToleranceConfig;

fn main() -> quaternion_lg::Result<()> {
    let tol = ToleranceConfig::default();
    let p = LGPolynomial::from_real(&[-3.0, 0.0])?;
    let model = build_quaternion_model(&p, &principal_branches(2), &tol)?;
    let q = sample_near(&mut indexed_rng(5, 0), &p, 1e-2, &SamplerConfig::default(), &tol)?;

    for scale in [FrameScale::FormPreserving, FrameScale::Literal] {
        let base = flat_s_frame(&model, &p, scale, &tol)?;
        let moved = flat_s_frame(&model, &q, scale, &tol)?;
        println!(
            "{scale}: pairing drift {:.2e}",
            linalg::max_abs(&(&moved.b_gram - &base.b_gram))
        );
    }

    let rep = verify_bundle(&model, std::slice::from_ref(&q), &BundleOptions::default(), &tol)?;
    println!(
        "clean: pass {}, routes agree {}, closure defect (literal) {:.2e}",
        rep.report.pass, rep.agreement, rep.closure_defect_literal
    );
    for corruption in Corruption::TARGETED {
        let opts = BundleOptions {
            corruption: Some(corruption),
            ..BundleOptions::default()
        };
        let rep = verify_bundle(&model, &[], &opts, &tol)?;
        let r = rep.points[0].ext.residuals();
        println!(
            "{corruption:22} condition {} = {:.2e}, detected {:?}",
            corruption.predicted_condition(),
            r[corruption.predicted_condition() - 1],
            rep.detected
        );
    }
    Ok(())
}
