//! Command-line front end shared by the `qlg` binary and the tests.
//!
//! Every command produces one JSON document with a `residuals` array of
//! `{name, value, tol, pass, bound}`, a `pass` verdict, a `skipped` list and
//! a command-specific `result`. Exit codes: 0 pass, 1 verification failure,
//! 2 bad input, 3 degenerate model.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bundle::{verify_bundle, AssemblyOptions, BundleOptions, Corruption, FrameScale};
use crate::cardy::{verify_cardy_frobenius, CardyFrobeniusAlgebra};
use crate::error::{Error, Result};
use crate::landau_ginzburg::{build_quaternion_model, parse_branches, principal_branches, QuaternionLGModel};
use crate::linalg::{c, cjson, C64};
use crate::moduli::{
    euler_check, flat_chart, potential_sample_residual, reconstruct_potential, wdvv_check, PotentialPoly, SampleSet,
    WdvvConvention, FIT_TOL,
};
use crate::polycore::LGPolynomial;
use crate::report::VerificationReport;
use crate::sampling::{indexed_rng, random_complex, sample_near, sample_polynomial, SamplerConfig};
use crate::tensor_series::{ext_wdvv_check, TensorSeries};
use crate::tolerance::ToleranceConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Expected `n = 2` quartic coefficient printed alongside the fitted one.
pub const REFERENCE_BETA2: f64 = 1.0 / 24.0;

#[derive(Debug, Clone, Parser)]
#[command(name = "qlg", version, about = "Verify quaternion Landau-Ginzburg models")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Number of critical points of p (degree n + 1).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Coefficients a_1..a_n as space-separated "re,im" pairs.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// JSON input (polynomial, Cardy-Frobenius algebra, potential or series).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Sample count (potential fit, WDVV points, bundle points).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Truncation degree of the assembled bundle potential.
    #[arg(long, global = true, default_value_t = 4)]
    pub t_degree: usize,
    /// Equality tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Per-block signs of rho, e.g. "+,-".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// Scale frames by rho_0 / rho instead of its square root.
    #[arg(long, global = true)]
    pub paper_scale: bool,
    /// Reverse flat indices before the WDVV check (unit on the last index).
    #[arg(long, global = true)]
    pub index_reversal: bool,
    /// Break the bundle algebra on purpose (e.g. break_cardy).
    #[arg(long, global = true)]
    pub corruption: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build the quaternion model of p and check all of its axioms.
    Build,
    /// Check the Cardy-Frobenius axioms of a model or of a JSON algebra.
    VerifyCf,
    /// Flat and canonical coordinates at p with chart residuals.
    Chart,
    /// Reconstruct the potential of Pol(n) from sampled structure tensors.
    Potential,
    /// Classical WDVV equations for a fitted or supplied potential.
    Wdvv,
    /// Extended WDVV conditions for a tensor series or an assembled model.
    ExtWdvv,
    /// Bundle frames, assembly and two-route verification.
    Bundle,
}

/// Exit code plus the JSON report text.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: String,
    pub message: Option<String>,
}

/// Parse a list of "re,im" pairs (a bare number means a real value).
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split_whitespace()
        .map(|tok| {
            let parts: Vec<&str> = tok.split(',').collect();
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad number {x:?} in {tok:?}")))
            };
            match parts.as_slice() {
                [re] => Ok(c(num(re)?, 0.0)),
                [re, im] => Ok(c(num(re)?, num(im)?)),
                _ => Err(Error::InvalidInput(format!("expected re,im but got {tok:?}"))),
            }
        })
        .collect()
}

struct Output {
    report: VerificationReport,
    skipped: Vec<String>,
    result: Value,
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_degenerate() {
        EXIT_DEGENERATE
    } else {
        match e {
            Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::InvalidBranch { .. } => EXIT_PARSE,
            _ => EXIT_FAIL,
        }
    }
}

/// Execute one command. The report is also written to `config.output` if set.
pub fn run(config: &RunConfig) -> RunOutcome {
    let outcome = match execute(config) {
        Ok(out) => {
            let doc = json!({
                "command": config.command,
                "seed": config.seed,
                "pass": out.report.pass,
                "residuals": out.report.residuals,
                "skipped": out.skipped,
                "result": out.result,
            });
            RunOutcome {
                exit_code: if out.report.pass { EXIT_PASS } else { EXIT_FAIL },
                report: serde_json::to_string_pretty(&doc).expect("report serializes"),
                message: None,
            }
        }
        Err(e) => {
            let code = exit_code_for(&e);
            let doc = json!({
                "command": config.command,
                "seed": config.seed,
                "pass": false,
                "error": e.to_string(),
                "exit_code": code,
            });
            RunOutcome {
                exit_code: code,
                report: serde_json::to_string_pretty(&doc).expect("report serializes"),
                message: Some(e.to_string()),
            }
        }
    };
    if let Some(path) = &config.output {
        if let Err(e) = fs::write(path, &outcome.report) {
            return RunOutcome {
                exit_code: EXIT_PARSE,
                report: outcome.report,
                message: Some(format!("cannot write {}: {e}", path.display())),
            };
        }
    }
    outcome
}

fn tolerance(config: &RunConfig) -> Result<ToleranceConfig> {
    match config.tol {
        Some(t) => ToleranceConfig::default().with_eq_tol(t),
        None => Ok(ToleranceConfig::default()),
    }
}

fn read_input(config: &RunConfig) -> Result<Option<Value>> {
    let Some(path) = &config.input else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// The polynomial from `--a`, `--input`, or a seeded random draw for `--n`.
fn polynomial(config: &RunConfig, input: Option<Value>, tol: &ToleranceConfig) -> Result<LGPolynomial> {
    let p = if let Some(a) = &config.a {
        LGPolynomial::new(parse_complex_list(a)?)?
    } else if let Some(v) = input {
        from_value(v)?
    } else if let Some(n) = config.n {
        sample_polynomial(&mut indexed_rng(config.seed, 0), n, &SamplerConfig::default(), tol)?
    } else {
        return Err(Error::InvalidInput("give --a, --input or --n".into()));
    };
    if let Some(n) = config.n {
        if n != p.n() {
            return Err(Error::InvalidInput(format!("--n {n} but {} coefficients", p.n())));
        }
    }
    Ok(p)
}

fn model(config: &RunConfig, input: Option<Value>, tol: &ToleranceConfig) -> Result<QuaternionLGModel> {
    let p = polynomial(config, input, tol)?;
    let branch = match &config.branch {
        Some(b) => parse_branches(b)?,
        None => principal_branches(p.n()),
    };
    build_quaternion_model(&p, &branch, tol)
}

fn require_n(config: &RunConfig) -> Result<usize> {
    config
        .n
        .or_else(|| config.a.as_ref().map(|a| a.split_whitespace().count()))
        .ok_or_else(|| Error::InvalidInput("--n is required".into()))
}

fn execute(config: &RunConfig) -> Result<Output> {
    let tol = tolerance(config)?;
    let input = read_input(config)?;
    match config.command {
        Command::Build => {
            let m = model(config, input, &tol)?;
            Ok(Output {
                report: m.verify(&tol),
                skipped: Vec::new(),
                result: serde_json::to_value(m.dump()).expect("model serializes"),
            })
        }
        Command::VerifyCf => {
            if let Some(v) = input.as_ref().filter(|v| v.get("phi").is_some()) {
                let cf: CardyFrobeniusAlgebra = from_value(v.clone())?;
                return Ok(Output {
                    report: verify_cardy_frobenius(&cf, &tol),
                    skipped: Vec::new(),
                    result: json!({ "dim_a": cf.a().dim(), "dim_b": cf.b().dim() }),
                });
            }
            let m = model(config, input, &tol)?;
            let mut report = VerificationReport::new();
            report.merge("model", &m.verify(&tol));
            for i in 0..m.n() {
                report.merge(
                    &format!("block{}", i + 1),
                    &verify_cardy_frobenius(&m.block_cf(i)?, &tol),
                );
            }
            Ok(Output {
                report,
                skipped: Vec::new(),
                result: json!({
                    "a": cjson::to_pairs(m.p().a()),
                    "mu": cjson::to_pairs(m.closed().mu()),
                    "rho": cjson::to_pairs(m.rho()),
                }),
            })
        }
        Command::Chart => {
            let p = polynomial(config, input, &tol)?;
            let chart = flat_chart(&p, &tol)?;
            let euler = euler_check(&p, &tol);
            let mut report = VerificationReport::new();
            report.at_most("flat_metric", chart.metric_residual(), 10.0 * tol.eq_tol);
            report.at_most("ttilde_metric", chart.ttilde_metric_residual(), 10.0 * tol.eq_tol);
            report.at_most("tangent_routes", chart.tangent_route_residual(), 10.0 * tol.eq_tol);
            report.at_most("unit_vector_field", chart.unit_residual(), 10.0 * tol.eq_tol);
            report.at_most("reversion_leading", chart.reversion_residual(), 10.0 * tol.eq_tol);
            report.at_most("euler_polynomial", euler.polynomial_residual, 10.0 * tol.eq_tol);
            report.at_most("euler_flat", euler.flat_residual, 10.0 * tol.eq_tol);
            let mut skipped = Vec::new();
            match euler.canonical_residual {
                Some(r) => report.at_most("euler_canonical", r, 10.0 * tol.eq_tol),
                None => skipped.push("euler_canonical: p is degenerate".to_string()),
            }
            Ok(Output {
                report,
                skipped,
                result: json!({
                    "a": cjson::to_pairs(p.a()),
                    "ttilde": cjson::to_pairs(&chart.ttilde),
                    "t": cjson::to_pairs(&chart.t),
                    "canonical": cjson::to_pairs(&chart.x),
                    "critical_points": cjson::to_pairs(chart.roots()),
                }),
            })
        }
        Command::Potential => {
            let n = require_n(config)?;
            let rec = reconstruct_potential(n, config.samples.unwrap_or(40), config.seed, &tol)?;
            let fresh = SampleSet::draw(n, 10, config.seed.wrapping_add(1), &tol)?;
            let mut report = VerificationReport::new();
            report.at_most("fit_residual", rec.fit_residual, tol.eq_tol);
            report.at_most(
                "fresh_sample_residual",
                potential_sample_residual(&rec.potential, &fresh),
                10.0 * tol.eq_tol,
            );
            let pruned = rec.potential.pruned(1e-12);
            let mut result = json!({
                "potential": pruned,
                "fit_residual": rec.fit_residual,
                "conditioning": rec.conditioning,
            });
            if let Some((b1, b2)) = rec.n2_coefficients() {
                result["beta1"] = json!(cjson::to_pair(b1));
                result["beta2"] = json!(cjson::to_pair(b2));
                result["quartic_reference"] = json!(REFERENCE_BETA2);
                result["quartic_ratio_to_reference"] = json!(cjson::to_pair(b2 / REFERENCE_BETA2));
            }
            Ok(Output {
                report,
                skipped: Vec::new(),
                result,
            })
        }
        Command::Wdvv => {
            let (f, tol_used) = match input {
                Some(v) => (from_value::<PotentialPoly>(v)?, tol.eq_tol),
                None => {
                    let n = require_n(config)?;
                    let rec = reconstruct_potential(n, 12, config.seed, &tol)?;
                    (rec.potential.pruned(1e-12), FIT_TOL)
                }
            };
            let n = f.n();
            let count = config.samples.unwrap_or(20);
            let points: Vec<Vec<C64>> = (0..count)
                .map(|s| {
                    let mut rng = indexed_rng(config.seed.wrapping_add(7), s as u64);
                    (0..n).map(|_| random_complex(&mut rng, 1.0)).collect()
                })
                .collect();
            let convention = if config.index_reversal {
                WdvvConvention::IndexReversal
            } else {
                WdvvConvention::UnitFirst
            };
            let w = wdvv_check(&f, &points, convention);
            Ok(Output {
                report: w.to_report(tol_used),
                skipped: w.skipped.clone(),
                result: json!({ "potential": f, "points": count, "convention": convention }),
            })
        }
        Command::ExtWdvv => {
            let (series, skipped) = match input {
                Some(v) => (from_value::<TensorSeries>(v)?, Vec::new()),
                None => {
                    let m = model(config, None, &tol)?;
                    let f = reconstruct_potential(m.n(), 12, config.seed, &tol)?
                        .potential
                        .pruned(1e-13);
                    let opts = AssemblyOptions {
                        t_degree: config.t_degree,
                        seed: config.seed,
                        ..Default::default()
                    };
                    let asm = crate::bundle::assemble_potential(&m, &f, &opts, corruption(config)?, &tol)?;
                    (asm.series, Vec::new())
                }
            };
            let r = ext_wdvv_check(&series, tol.eq_tol)?;
            let mut skipped = skipped;
            skipped.extend(r.vacuous.iter().cloned());
            Ok(Output {
                report: r.to_report(tol.eq_tol),
                skipped,
                result: serde_json::to_value(&r).expect("report serializes"),
            })
        }
        Command::Bundle => {
            let m = model(config, input, &tol)?;
            let count = config.samples.unwrap_or(3);
            let cfg = SamplerConfig::default();
            let samples = (0..count)
                .map(|s| {
                    sample_near(
                        &mut indexed_rng(config.seed.wrapping_add(11), s as u64),
                        m.p(),
                        1e-2,
                        &cfg,
                        &tol,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let opts = BundleOptions {
                assembly: AssemblyOptions {
                    t_degree: config.t_degree,
                    seed: config.seed,
                    ..Default::default()
                },
                scale: if config.paper_scale {
                    FrameScale::Literal
                } else {
                    FrameScale::FormPreserving
                },
                corruption: corruption(config)?,
                ..Default::default()
            };
            let rep = verify_bundle(&m, &samples, &opts, &tol)?;
            let mut result = serde_json::to_value(&rep).expect("report serializes");
            if let Some(obj) = result.as_object_mut() {
                obj.remove("report");
            }
            Ok(Output {
                report: rep.report,
                skipped: Vec::new(),
                result,
            })
        }
    }
}

fn corruption(config: &RunConfig) -> Result<Option<Corruption>> {
    config.corruption.as_deref().map(str::parse).transpose()
}
