//! Pass/fail reports shared by the validators and verifiers.

use serde::{Deserialize, Serialize};

/// Indices locating a violated relation. `a`, `b` are outcome (or basis)
/// indices; `basis_index` points into the relevant input basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub basis_index: Option<usize>,
}

impl Witness {
    pub fn basis(i: usize) -> Self {
        Witness { basis_index: Some(i), ..Default::default() }
    }

    pub fn pair(a: usize, b: usize) -> Self {
        Witness { a: Some(a), b: Some(b), basis_index: None }
    }

    pub fn full(a: usize, b: usize, i: usize) -> Self {
        Witness { a: Some(a), b: Some(b), basis_index: Some(i) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub max_residual: f64,
    pub witness: Option<Witness>,
}

impl Check {
    /// Passes iff `residual ≤ threshold`; the witness is kept only on failure.
    pub fn new(name: &str, residual: f64, threshold: f64, witness: Option<Witness>) -> Self {
        let pass = residual <= threshold;
        Check { name: name.to_string(), pass, max_residual: residual, witness: if pass { None } else { witness } }
    }

    pub fn flag(name: &str, pass: bool, residual: f64, witness: Option<Witness>) -> Self {
        Check { name: name.to_string(), pass, max_residual: residual, witness: if pass { None } else { witness } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        Report { pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

/// Tracks the largest residual seen and where it occurred.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Worst {
    pub value: f64,
    pub at: Option<Witness>,
}

impl Worst {
    pub fn see(&mut self, value: f64, at: Witness) {
        if value > self.value || (self.at.is_none() && value >= self.value) {
            self.value = value;
            self.at = Some(at);
        }
    }

    pub fn merge(mut self, other: Worst) -> Worst {
        if let Some(at) = other.at {
            self.see(other.value, at);
        }
        self
    }

    pub fn check(self, name: &str, threshold: f64) -> Check {
        Check::new(name, self.value, threshold, self.at)
    }
}
