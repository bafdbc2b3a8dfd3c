//! Numerical tolerances shared by every module.
//!
//! A single [`Tolerances`] record is consulted process-wide. It may be
//! replaced once, before any computation, through [`install`]; after that it
//! is read-only.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max entrywise |A - A^dagger| accepted as Hermitian.
    pub hermitian: f64,
    /// Allowed deviation of a density-matrix trace from 1.
    pub trace: f64,
    /// Most negative eigenvalue accepted (as `-positivity`) and clamped to 0.
    pub positivity: f64,
    /// Allowed deviation of a pure-state norm from 1.
    pub norm: f64,
    /// Unitarity / reconstruction tolerance for decompositions.
    pub unitary: f64,
    /// Kraus completeness tolerance for channels.
    pub kraus: f64,
    /// Slack in majorization partial-sum comparisons.
    pub majorization: f64,
    /// Schmidt transfers smaller than this are skipped during synthesis.
    pub transfer_skip: f64,
    /// Largest total Hilbert-space dimension any single matrix may have.
    pub dim_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-10,
            trace: 1e-10,
            positivity: 1e-10,
            norm: 1e-12,
            unitary: 1e-9,
            kraus: 1e-10,
            majorization: 1e-12,
            transfer_skip: 1e-12,
            dim_cap: 4096,
        }
    }
}

impl Tolerances {
    /// Override one field by name, as used by `key=value` configuration.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_f = |v: &str| -> Result<f64, String> {
            let x: f64 = v.parse().map_err(|_| format!("{key}: not a number: {v}"))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(format!("{key}: must be finite and non-negative"));
            }
            Ok(x)
        };
        match key {
            "hermitian" => self.hermitian = parse_f(value)?,
            "trace" => self.trace = parse_f(value)?,
            "positivity" => self.positivity = parse_f(value)?,
            "norm" => self.norm = parse_f(value)?,
            "unitary" => self.unitary = parse_f(value)?,
            "kraus" => self.kraus = parse_f(value)?,
            "majorization" => self.majorization = parse_f(value)?,
            "transfer_skip" => self.transfer_skip = parse_f(value)?,
            "dim_cap" => {
                self.dim_cap = value
                    .parse()
                    .map_err(|_| format!("dim_cap: not a count: {value}"))?
            }
            _ => return Err(format!("unknown tolerance `{key}`")),
        }
        Ok(())
    }
}

static INSTALLED: OnceLock<Tolerances> = OnceLock::new();

/// The active tolerances (defaults unless [`install`] was called).
pub fn tolerances() -> &'static Tolerances {
    INSTALLED.get_or_init(Tolerances::default)
}

/// Install process-wide tolerances. Fails if tolerances were already read or
/// installed.
pub fn install(tol: Tolerances) -> Result<(), Tolerances> {
    INSTALLED.set(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_by_name() {
        let mut t = Tolerances::default();
        t.set("trace", "1e-8").unwrap();
        t.set("dim_cap", "128").unwrap();
        assert_eq!(t.trace, 1e-8);
        assert_eq!(t.dim_cap, 128);
        assert!(t.set("bogus", "1").is_err());
        assert!(t.set("trace", "-1").is_err());
        assert!(t.set("trace", "abc").is_err());
    }
}
