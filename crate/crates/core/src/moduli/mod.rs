//! Frobenius-manifold structure on the space of superpotentials:
//! canonical and flat charts, Euler field, structure tensor, potential
//! reconstruction and the classical WDVV checker.

mod chart;
mod potential;
mod wdvv;

pub use chart::*;
pub use potential::*;
pub use wdvv::*;
