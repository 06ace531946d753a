//! Report structures and JSON emission.
//!
//! All floating-point output is rounded to 12 significant digits; non-finite
//! values serialize as null. With timing suppressed, reports are bit-for-bit
//! reproducible for a fixed instance and seed.

use serde::Serialize;
use serde_json::Value;

use invopt::cutplane::{CutStatus, IterationRecord};
use invopt::inverse::{InverseSolution, Metrics, ModelKind};

use crate::{CliError, CliResult};

pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub format: u32,
    pub instance: String,
    pub model: ModelKind,
    /// Structural entries of the recovered cost (slack entries are zero).
    pub c_hat: Vec<f64>,
    pub l1_deviation: f64,
    pub eps_total: f64,
    pub obj_at_xhat: f64,
    pub master_objective: f64,
    pub forward: ForwardReport,
    pub lp_certificate: CertificateReport,
    pub metrics: Metrics,
    pub cpu_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled: Option<ScaledReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutplane: Option<CutPlaneReport>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwardReport {
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub optimal: bool,
    pub node_count: u64,
    pub incumbent: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub z_lp: f64,
    pub gap: f64,
    pub x_lp_struct: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledReport {
    pub lambda: f64,
    pub c_hat: Vec<f64>,
    pub l1_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutPlaneReport {
    pub status: CutStatus,
    pub iterations: usize,
    pub final_tau: f64,
    pub cuts: usize,
    pub infeasible_retries: usize,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub format: u32,
    pub instance: String,
    pub cost: Vec<f64>,
    pub obj_at_xhat: f64,
    pub forward: ForwardReport,
    pub rgap: f64,
    pub optimal_at_e2: bool,
    pub optimal_at_e5: bool,
    /// Exact enumeration result; absent when the instance is too large.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub cpu_seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub optimal: bool,
    pub gap: f64,
}

/// Assemble the common solve-report body from an inverse solution.
pub fn solve_report(
    instance: &str,
    sol: &InverseSolution,
    obs: &invopt::model::Observation,
    structural: usize,
    seed: u64,
) -> SolveReport {
    let forward = sol.forward.as_ref().expect("solves always price the cost");
    let cert = sol.lp_certificate.as_ref().expect("solves always recover a certificate");
    SolveReport {
        format: REPORT_FORMAT,
        instance: instance.to_string(),
        model: sol.model_kind,
        c_hat: sol.c_hat[..structural].to_vec(),
        l1_deviation: sol.l1_deviation(),
        eps_total: sol.eps_total(),
        obj_at_xhat: sol.obj_at(obs),
        master_objective: sol.master_objective,
        forward: ForwardReport {
            upper_bound: forward.upper_bound,
            lower_bound: forward.lower_bound,
            optimal: forward.optimal,
            node_count: forward.node_count,
            incumbent: forward.incumbent.clone(),
        },
        lp_certificate: CertificateReport {
            z_lp: cert.z_lp,
            gap: sol.eps_total(),
            x_lp_struct: cert.x_lp[..structural].to_vec(),
        },
        metrics: sol.metrics.clone(),
        cpu_seconds: sol.metrics.cpu_seconds,
        tau: None,
        scaled: None,
        cutplane: None,
        seed,
    }
}

/// Round to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

/// Recursively round every number to 12 significant digits; non-finite
/// values become null.
fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.is_f64() {
                    *v = match serde_json::Number::from_f64(round_sig(x, 12)) {
                        Some(num) => Value::Number(num),
                        None => Value::Null,
                    };
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serialize a report with rounding; timing fields are zeroed when
/// `suppress_timing` is set so outputs are bit-for-bit reproducible.
pub fn emit<T: Serialize>(report: &T, suppress_timing: bool) -> CliResult<String> {
    let mut value = serde_json::to_value(report)
        .map_err(|e| CliError { exit_code: 4, message: format!("serialization failed: {e}") })?;
    if suppress_timing {
        zero_timing(&mut value);
    }
    round_value(&mut value);
    serde_json::to_string_pretty(&value)
        .map_err(|e| CliError { exit_code: 4, message: format!("serialization failed: {e}") })
}

fn zero_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (key, val) in map.iter_mut() {
                if key == "cpu_seconds" {
                    *val = Value::from(0.0);
                } else {
                    zero_timing(val);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(zero_timing),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_sig(123456.789012345, 12), 123456.789012);
        assert_eq!(round_sig(-1.23456789012345e-7, 12), -1.23456789012e-7);
        assert_eq!(round_sig(0.0, 12), 0.0);
    }

    #[test]
    fn emit_zeroes_timing_on_request() {
        #[derive(Serialize)]
        struct T {
            cpu_seconds: f64,
            value: f64,
        }
        let t = T { cpu_seconds: 1.25, value: 2.0 };
        let with = emit(&t, false).unwrap();
        assert!(with.contains("1.25"));
        let without = emit(&t, true).unwrap();
        assert!(without.contains("\"cpu_seconds\": 0.0"));
        assert!(without.contains("2.0"));
    }

    #[test]
    fn non_finite_serializes_as_null() {
        #[derive(Serialize)]
        struct T {
            v: f64,
        }
        let s = emit(&T { v: f64::INFINITY }, false).unwrap();
        assert!(s.contains("null"));
    }
}
