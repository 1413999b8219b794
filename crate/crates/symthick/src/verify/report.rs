//! Check records and report rendering.
//!
//! Every record carries its tolerance, sample count and seed so a verdict can
//! be audited from the report alone. The structured rendering has a fixed
//! field order (`name status residual tolerance samples seed note`) and all
//! numbers print with 17 significant digits, so identical inputs produce
//! byte-identical report bodies.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "pass"),
            CheckStatus::Warn => write!(f, "warn"),
            CheckStatus::Fail => write!(f, "fail"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub note: String,
}

impl CheckRecord {
    /// Pass/fail by residual against tolerance (the report invariant:
    /// `pass <=> residual <= tolerance`).
    pub fn from_residual(
        name: &str,
        residual: f64,
        tolerance: f64,
        samples: usize,
        seed: u64,
        note: impl Into<String>,
    ) -> CheckRecord {
        let status = if residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckRecord {
            name: name.to_string(),
            status,
            residual,
            tolerance,
            samples,
            seed,
            note: note.into(),
        }
    }

    pub fn warn(name: &str, samples: usize, seed: u64, note: impl Into<String>) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            status: CheckStatus::Warn,
            residual: 0.0,
            tolerance: 0.0,
            samples,
            seed,
            note: note.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

/// Full verification report: ordered check records plus the global sampling
/// parameters they were produced under.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
    pub seed: u64,
    pub samples: usize,
}

/// 17 significant digits, the crate-wide numeric output format.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl VerificationReport {
    /// True when no record failed (warnings do not count as failures).
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed())
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.passed()).count()
    }

    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verification report (seed {}, samples {})\n",
            self.seed, self.samples
        ));
        let width = self
            .records
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0);
        for r in &self.records {
            out.push_str(&format!(
                "  {:width$}  {:4}  residual {}  tol {}",
                r.name,
                r.status.to_string(),
                fmt_f64(r.residual),
                fmt_f64(r.tolerance),
            ));
            if !r.note.is_empty() {
                out.push_str(&format!("  [{}]", r.note));
            }
            out.push('\n');
        }
        let verdict = if self.all_passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "result: {} ({}/{} checks passed)\n",
            verdict,
            self.records.len() - self.failures(),
            self.records.len()
        ));
        out
    }

    /// Machine-readable rendering: one record per line, stable field order.
    pub fn render_structured(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "name={} status={} residual={} tolerance={} samples={} seed={} note={}\n",
                r.name,
                r.status,
                fmt_f64(r.residual),
                fmt_f64(r.tolerance),
                r.samples,
                r.seed,
                r.note.replace('\n', " "),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_constructor_respects_tolerance() {
        let pass = CheckRecord::from_residual("a", 1e-12, 1e-10, 5, 1, "");
        assert_eq!(pass.status, CheckStatus::Pass);
        let fail = CheckRecord::from_residual("a", 1e-8, 1e-10, 5, 1, "");
        assert_eq!(fail.status, CheckStatus::Fail);
        let edge = CheckRecord::from_residual("a", 1e-10, 1e-10, 5, 1, "");
        assert_eq!(edge.status, CheckStatus::Pass);
    }

    #[test]
    fn warnings_do_not_fail_a_report() {
        let report = VerificationReport {
            records: vec![
                CheckRecord::from_residual("ok", 0.0, 0.0, 1, 0, ""),
                CheckRecord::warn("info", 1, 0, "informational"),
            ],
            seed: 0,
            samples: 1,
        };
        assert!(report.all_passed());
        assert_eq!(report.failures(), 0);
    }

    #[test]
    fn structured_rendering_has_stable_field_order() {
        let report = VerificationReport {
            records: vec![CheckRecord::from_residual("x-check", 0.5, 0.25, 7, 3, "note text")],
            seed: 3,
            samples: 7,
        };
        let line = report.render_structured();
        assert_eq!(
            line,
            "name=x-check status=fail residual=5.0000000000000000e-1 \
             tolerance=2.5000000000000000e-1 samples=7 seed=3 note=note text\n"
        );
    }
}
