use std::fmt;

use serde::Serialize;

/// A single violated constraint with the point that witnesses it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: String,
    /// Input at which the violation was observed (grid point, `λ`, `x`, ...).
    pub witness: Option<f64>,
    /// Observed size of the violation.
    pub magnitude: f64,
}

/// Findings of a validation pass. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, constraint: impl Into<String>, witness: Option<f64>, magnitude: f64) {
        self.violations.push(Violation {
            constraint: constraint.into(),
            witness,
            magnitude,
        });
    }

    pub fn violates(&self, constraint: &str) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }

    pub fn find(&self, constraint: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.constraint == constraint)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} (magnitude {:e}", v.constraint, v.magnitude)?;
            if let Some(w) = v.witness {
                write!(f, " at {w}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}
