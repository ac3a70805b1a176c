//! Verified-inequality reports.
//!
//! One [`ComparisonReport`] records a single checked inequality instance:
//! left side, right side, the constant in force (analytic where the theory
//! states one, otherwise the configured empirical ceiling), the normalized
//! ratio and the verdict. Reports serialize to JSON lines; identical inputs
//! produce byte-identical lines.

use serde::{Serialize, Serializer};

/// Verdict of one checked instance. `Inconclusive` is reserved for
/// divergence- or truncation-dominated instances and never counts as a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// Canonical reports pin this field to zero so that reruns with identical
/// inputs stay byte-identical; wall-clock timing is printed to stderr
/// summaries instead.
fn zero_ms<S: Serializer>(_: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(0)
}

/// One verified inequality instance.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub check_id: String,
    /// Serialized exponent configuration, family spec, quadrature spec and
    /// per-check extras (tolerance, truncation bounds, exclusion notes).
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    /// Analytic constant where the theory provides one, else the configured
    /// empirical ceiling.
    pub constant: f64,
    /// `lhs / (constant * rhs)` with `0/0 -> 0`.
    pub ratio: f64,
    pub status: Status,
    pub mesh_level: u32,
    #[serde(serialize_with = "zero_ms")]
    pub runtime_ms: u64,
}

impl ComparisonReport {
    /// Builds a report, computing the ratio and the PASS/FAIL verdict
    /// (`ratio <= 1 + tol`).
    pub fn evaluate(
        check_id: impl Into<String>,
        params: serde_json::Value,
        lhs: f64,
        rhs: f64,
        constant: f64,
        tol: f64,
        mesh_level: u32,
    ) -> ComparisonReport {
        let denom = constant * rhs;
        let ratio = if lhs == 0.0 && denom == 0.0 {
            0.0
        } else {
            lhs / denom
        };
        let status = if ratio.is_finite() && ratio <= 1.0 + tol {
            Status::Pass
        } else {
            Status::Fail
        };
        ComparisonReport {
            check_id: check_id.into(),
            params,
            lhs,
            rhs,
            constant,
            ratio,
            status,
            mesh_level,
            runtime_ms: 0,
        }
    }

    /// Builds an inconclusive report with the divergence reason recorded in
    /// the params object.
    pub fn inconclusive(
        check_id: impl Into<String>,
        mut params: serde_json::Value,
        lhs: f64,
        rhs: f64,
        constant: f64,
        mesh_level: u32,
        reason: &str,
    ) -> ComparisonReport {
        if let serde_json::Value::Object(map) = &mut params {
            map.insert(
                "inconclusive_reason".to_string(),
                serde_json::Value::String(reason.to_string()),
            );
        }
        ComparisonReport {
            check_id: check_id.into(),
            params,
            lhs,
            rhs,
            constant,
            ratio: f64::NAN,
            status: Status::Inconclusive,
            mesh_level,
            runtime_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One JSON line, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Writes reports as JSON lines (one object per line).
pub fn write_jsonl<W: std::io::Write>(
    reports: &[ComparisonReport],
    w: &mut W,
) -> std::io::Result<()> {
    for r in reports {
        writeln!(w, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Summary row of one campaign, written to the CSV summary file.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignSummary {
    pub check_id: String,
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// Maximum observed `lhs/rhs` over conclusive instances.
    pub c_emp: f64,
    pub max_ratio: f64,
    pub excluded: usize,
}

impl CampaignSummary {
    pub fn from_reports(check_id: &str, reports: &[ComparisonReport], excluded: usize) -> Self {
        let mut pass = 0;
        let mut fail = 0;
        let mut inconclusive = 0;
        let mut c_emp: f64 = 0.0;
        let mut max_ratio: f64 = 0.0;
        for r in reports {
            match r.status {
                Status::Pass => pass += 1,
                Status::Fail => fail += 1,
                Status::Inconclusive => inconclusive += 1,
            }
            if r.status != Status::Inconclusive && r.rhs != 0.0 {
                c_emp = c_emp.max(r.lhs / r.rhs);
            }
            if r.ratio.is_finite() {
                max_ratio = max_ratio.max(r.ratio);
            }
        }
        CampaignSummary {
            check_id: check_id.to_string(),
            instances: reports.len(),
            pass,
            fail,
            inconclusive,
            c_emp,
            max_ratio,
            excluded,
        }
    }
}

/// Writes campaign summaries as CSV.
pub fn write_summary_csv<W: std::io::Write>(
    rows: &[CampaignSummary],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "check_id,instances,pass,fail,inconclusive,c_emp,max_ratio,excluded"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.check_id, r.instances, r.pass, r.fail, r.inconclusive, r.c_emp, r.max_ratio, r.excluded
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_conventions() {
        let r = ComparisonReport::evaluate("t", serde_json::json!({}), 0.0, 0.0, 2.0, 1e-6, 0);
        assert_eq!(r.ratio, 0.0);
        assert!(r.passed());
        let r = ComparisonReport::evaluate("t", serde_json::json!({}), 1.0, 1.0, 2.0, 1e-6, 0);
        assert_eq!(r.ratio, 0.5);
        assert!(r.passed());
        let r = ComparisonReport::evaluate("t", serde_json::json!({}), 3.0, 1.0, 2.0, 1e-6, 0);
        assert!(!r.passed());
        assert_eq!(r.status, Status::Fail);
    }

    #[test]
    fn inconclusive_is_not_a_pass() {
        let r = ComparisonReport::inconclusive(
            "t",
            serde_json::json!({}),
            1.0,
            f64::INFINITY,
            1.0,
            0,
            "tail did not converge",
        );
        assert!(!r.passed());
        assert!(r.to_json_line().contains("tail did not converge"));
    }

    #[test]
    fn json_lines_are_deterministic_and_timing_free() {
        let mk = || {
            ComparisonReport {
                runtime_ms: 1234,
                ..ComparisonReport::evaluate(
                    "hardy/q2",
                    serde_json::json!({"sigma": 0.0, "q": 2.0}),
                    1.0,
                    1.0,
                    2.0,
                    1e-6,
                    0,
                )
            }
        };
        let a = mk().to_json_line();
        let b = mk().to_json_line();
        assert_eq!(a, b);
        assert!(a.contains("\"runtime_ms\":0"));
    }
}
