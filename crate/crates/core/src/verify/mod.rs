//! Acceptance checks shared by the test suite and the `verify` subcommand.
//!
//! Every criterion produces a list of [`Check`] rows. Rows carry only
//! deterministic quantities so that the CSV body is reproducible; wall-clock
//! times live on [`CriterionResult`] and go to the JSON summary.

mod criteria;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::branches::TraceSettings;
use crate::error::{Error, Result};

pub use criteria::{C7_FROZEN_CONSTANT, SPACING_CONSTANTS};

/// Criteria run by `verify --quick`.
pub const QUICK: [u32; 3] = [1, 10, 11];
pub const ALL: [u32; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub case: String,
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(
        case: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
        passed: bool,
    ) -> Self {
        Check {
            case: case.into(),
            quantity: quantity.into(),
            value,
            reference,
            tolerance,
            passed,
        }
    }

    /// `|value − reference| ≤ tolerance`.
    pub fn close(
        case: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        let ok = (value - reference).abs() <= tolerance;
        Check::new(case, quantity, value, reference, tolerance, ok)
    }

    /// `value ≤ bound`.
    pub fn at_most(
        case: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        bound: f64,
    ) -> Self {
        Check::new(case, quantity, value, bound, 0.0, value <= bound)
    }

    /// `value ≥ bound`.
    pub fn at_least(
        case: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        bound: f64,
    ) -> Self {
        Check::new(case, quantity, value, bound, 0.0, value >= bound)
    }

    pub fn flag(case: impl Into<String>, quantity: impl Into<String>, ok: bool) -> Self {
        Check::new(case, quantity, ok as u8 as f64, 1.0, 0.0, ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Numerical failure that stopped the criterion.
    pub error: Option<String>,
    pub seconds: f64,
    /// Runtime budget in seconds, when the criterion has one.
    pub budget_seconds: Option<f64>,
}

impl CriterionResult {
    /// One human-readable line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let mut s = format!(
            "criterion {:>2} {status} {} ({}/{} checks, {:.1}s)",
            self.id,
            self.name,
            self.checks.len() - failed,
            self.checks.len(),
            self.seconds
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        } else if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            s.push_str(&format!(
                " first failure: {} {} = {:e} vs {:e}",
                c.case, c.quantity, c.value, c.reference
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub settings: TraceSettings,
    /// Worker counts compared by the determinism criterion.
    pub determinism_workers: (usize, usize),
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            settings: TraceSettings::default(),
            determinism_workers: (1, 3),
        }
    }
}

pub fn name(id: u32) -> &'static str {
    match id {
        1 => "exact second-order coefficient",
        2 => "power-law asymptotics of lambda_l",
        3 => "odd-nu zero mode",
        4 => "even-nu exponential smallness",
        5 => "symmetry and spacing",
        6 => "sign separation and zero structure",
        7 => "fiber integral vs 2D oracle",
        8 => "remainder scaling",
        9 => "l = 0 correction vanishes",
        10 => "derivative coefficients",
        11 => "determinism",
        _ => "unknown",
    }
}

pub fn budget(id: u32) -> Option<f64> {
    match id {
        1 => Some(10.0),
        2 => Some(300.0),
        // 20 minutes per point, six points
        7 => Some(6.0 * 1200.0),
        _ => None,
    }
}

pub fn run_criterion(id: u32, cfg: &VerifyConfig) -> Result<CriterionResult> {
    if !ALL.contains(&id) {
        return Err(Error::InvalidParameter(format!("no criterion {id}")));
    }
    let t = Instant::now();
    let out = criteria::run(id, cfg);
    let seconds = t.elapsed().as_secs_f64();
    let budget_seconds = budget(id);
    let (checks, error) = match out {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let in_budget = budget_seconds.is_none_or(|b| seconds <= b);
    let passed =
        error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed) && in_budget;
    Ok(CriterionResult {
        id,
        name: name(id).to_string(),
        passed,
        checks,
        error,
        seconds,
        budget_seconds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub results: Vec<CriterionResult>,
    pub passed: bool,
    pub errors: usize,
}

pub fn run_suite(ids: &[u32], cfg: &VerifyConfig) -> Result<VerifyReport> {
    let results = ids
        .iter()
        .map(|&id| run_criterion(id, cfg))
        .collect::<Result<Vec<_>>>()?;
    let errors = results.iter().filter(|r| r.error.is_some()).count();
    Ok(VerifyReport {
        passed: results.iter().all(|r| r.passed),
        errors,
        results,
    })
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    config_hash: &'a str,
    version: &'a str,
    schema: u32,
    op_id: String,
    case: &'a str,
    quantity: &'a str,
    value: String,
    reference: String,
    tolerance: String,
    passed: bool,
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// CSV of every check, prefixed with the config hash and artifact version.
pub fn checks_csv(results: &[CriterionResult], config_hash: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in results {
        for c in &r.checks {
            w.serialize(CsvRow {
                config_hash,
                version: crate::ARTIFACT_VERSION,
                schema: CSV_SCHEMA_VERSION,
                op_id: format!("criterion-{}", r.id),
                case: &c.case,
                quantity: &c.quantity,
                value: num(c.value),
                reference: num(c.reference),
                tolerance: num(c.tolerance),
                passed: c.passed,
            })
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_carry_hash_and_version() {
        let r = CriterionResult {
            id: 1,
            name: name(1).into(),
            passed: true,
            checks: vec![Check::close("nu=2 l=1", "omega2", 1.0, 1.0, 0.0)],
            error: None,
            seconds: 0.1,
            budget_seconds: None,
        };
        let s = checks_csv(&[r], "abc").unwrap();
        let mut lines = s.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("config_hash,version,schema,op_id"));
        let row = lines.next().unwrap();
        assert!(row.starts_with(&format!("abc,{},1,criterion-1,", crate::ARTIFACT_VERSION)));
        assert!(row.ends_with(",true"));
    }

    #[test]
    fn unknown_criterion_is_rejected() {
        assert!(run_criterion(12, &VerifyConfig::default()).is_err());
    }

    #[test]
    fn quick_subset_passes() {
        let rep = run_suite(&QUICK, &VerifyConfig::default()).unwrap();
        for r in &rep.results {
            assert!(r.passed, "{}", r.line());
        }
    }
}
