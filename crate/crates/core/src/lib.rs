//! Numerical verification of quaternion Landau-Ginzburg models.
//!
//! A polynomial `p(z) = z^(n+1) + a_1 z^(n-1) + ... + a_n` gives a commutative
//! Frobenius algebra `C[z]/(p')` with the residue functional. Attaching one
//! quaternion block per critical point yields a Cardy-Frobenius algebra.
//! This crate builds those objects and checks their axioms, the flat
//! structure on the space of deformations, WDVV for the fitted potential, and
//! the extended WDVV system for noncommutative tensor series.
//!
//! | module | contents |
//! |---|---|
//! | [`polycore`] | polynomials, residues, critical points, series reversion |
//! | [`frobenius`] | finite algebras, Frobenius pairs, quaternions |
//! | [`cardy`] | Cardy-Frobenius algebras and their checks |
//! | [`landau_ginzburg`] | the closed algebra of `p` and the quaternion model |
//! | [`moduli`] | flat and canonical charts, potential fit, WDVV |
//! | [`tensor_series`] | tensor series calculus and the extended WDVV check |
//! | [`bundle`] | the flat bundle of B-algebras and assembled potentials |
//! | [`cli`] | the `qlg` command line |
//!
//! ```
//! use quaternion_lg::landau_ginzburg::{build_quaternion_model, principal_branches};
//! use quaternion_lg::polycore::LGPolynomial;
//! use quaternion_lg::tolerance::ToleranceConfig;
//!
//! let tol = ToleranceConfig::default();
//! let p = LGPolynomial::from_real(&[-3.0, 0.0]).unwrap();
//! let model = build_quaternion_model(&p, &principal_branches(2), &tol).unwrap();
//! assert!(model.verify(&tol).pass);
//! ```

pub mod bundle;
pub mod cardy;
pub mod cli;
pub mod error;
pub mod frobenius;
pub mod landau_ginzburg;
pub mod linalg;
pub mod moduli;
pub mod polycore;
pub mod report;
pub mod sampling;
pub mod tensor_series;
pub mod tolerance;

pub use error::{Error, Result};
