//! Both verification routes of the bundle agree on randomized models, with
//! and without targeted corruptions.

use quaternion_lg::bundle::{verify_bundle, BundleOptions, Corruption};
use quaternion_lg::landau_ginzburg::{build_quaternion_model, principal_branches};
use quaternion_lg::sampling::{indexed_rng, sample_near, sample_polynomial, SamplerConfig};
use quaternion_lg::tolerance::ToleranceConfig;

const MODELS: u64 = 20;

#[test]
fn routes_agree_over_random_models() {
    let tol = ToleranceConfig::default();
    let sampler = SamplerConfig::default();
    let mut corrupted_runs = 0;
    for k in 0..MODELS {
        let n = 2 + (k % 2) as usize;
        let mut rng = indexed_rng(1000, k);
        let p = sample_polynomial(&mut rng, n, &sampler, &tol).unwrap();
        let model = build_quaternion_model(&p, &principal_branches(n), &tol).unwrap();
        let q = sample_near(&mut rng, &p, 1e-2, &sampler, &tol).unwrap();
        let clean = verify_bundle(&model, std::slice::from_ref(&q), &BundleOptions::default(), &tol).unwrap();
        assert!(
            clean.agreement,
            "model {k}: {:?}",
            clean.report.failures().collect::<Vec<_>>()
        );
        assert!(
            clean.report.pass,
            "model {k}: {:?}",
            clean.report.failures().collect::<Vec<_>>()
        );
        for corruption in Corruption::TARGETED {
            let opts = BundleOptions {
                corruption: Some(corruption),
                ..BundleOptions::default()
            };
            let rep = verify_bundle(&model, &[], &opts, &tol).unwrap();
            assert!(rep.agreement, "model {k}, {corruption}");
            assert_eq!(rep.detected, Some(true), "model {k}, {corruption}");
            assert!(!rep.report.pass, "model {k}, {corruption}");
            corrupted_runs += 1;
        }
    }
    assert_eq!(corrupted_runs, 5 * MODELS);
}
