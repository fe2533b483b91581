//! Named residual collections shared by every verifier and by the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which side of the tolerance a residual must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `value <= tol`.
    AtMost,
    /// Pass iff `value >= tol` (margins).
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
    pub bound: Bound,
}

impl Residual {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        let pass = value.is_finite() && value <= tol;
        Self {
            name: name.into(),
            value,
            tol,
            pass,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        let pass = value.is_finite() && value >= tol;
        Self {
            name: name.into(),
            value,
            tol,
            pass,
            bound: Bound::AtLeast,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residuals: Vec<Residual>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self {
            residuals: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, r: Residual) {
        self.pass &= r.pass;
        self.residuals.push(r);
    }

    pub fn at_most(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.push(Residual::at_most(name, value, tol));
    }

    pub fn at_least(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.push(Residual::at_least(name, value, tol));
    }

    /// Append every residual of `other`, prefixing names with `prefix.`.
    pub fn merge(&mut self, prefix: &str, other: &VerificationReport) {
        for r in &other.residuals {
            let mut r = r.clone();
            if !prefix.is_empty() {
                r.name = format!("{prefix}.{}", r.name);
            }
            self.push(r);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|r| r.value)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.pass)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.residuals {
            let op = match r.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            writeln!(
                f,
                "{:<4} {:<48} {:>12.3e} {op} {:.1e}",
                if r.pass { "ok" } else { "FAIL" },
                r.name,
                r.value,
                r.tol
            )?;
        }
        write!(f, "overall: {}", if self.pass { "pass" } else { "fail" })
    }
}
