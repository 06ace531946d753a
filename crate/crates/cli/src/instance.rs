//! The versioned JSON instance format.
//!
//! One self-describing file carries the constraint system, the observed
//! structural point, the reference cost, and optional configuration
//! overrides. Unknown keys are rejected; every number must be finite. The
//! machine-readable schema ships in `docs/instance.schema.json`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use invopt::model::{
    attach_observation, standardize, ForwardProblem, Observation, RawProblem, Rel, ReferenceCost,
};

use crate::{CliError, CliResult};

/// Current file format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: u32,
    pub problem: ProblemSection,
    /// Structural values of the observed point; slacks are always derived.
    pub observation: Vec<f64>,
    /// Structural reference cost; slack costs are pinned to zero.
    pub reference_cost: Vec<f64>,
    #[serde(default)]
    pub config: ConfigSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    pub num_vars: usize,
    pub constraints: Vec<ConstraintRow>,
    #[serde(default)]
    pub lower_bounds: Option<Vec<f64>>,
    #[serde(default)]
    pub upper_bounds: Option<Vec<Option<f64>>>,
    pub integrality: Vec<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintRow {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Optional per-instance overrides; command-line flags win over these.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSection {
    pub tau: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub big_m: Option<f64>,
    pub forward_time_cap_s: Option<f64>,
    pub forward_node_cap: Option<u64>,
    pub seed: Option<u64>,
    pub group: Option<String>,
}

/// A parsed and standardized instance, ready to solve.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub name: String,
    pub group: Option<String>,
    pub problem: ForwardProblem,
    pub observation: Observation,
    pub c_ring: ReferenceCost,
    pub config: ConfigSection,
}

pub fn parse_instance(text: &str) -> CliResult<InstanceFile> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| CliError::schema(format!("invalid JSON: {e}")))?;
    if file.format != FORMAT_VERSION {
        return Err(CliError::schema(format!(
            "unsupported format {}, expected {FORMAT_VERSION}",
            file.format
        )));
    }
    validate_finite(&file)?;
    Ok(file)
}

fn validate_finite(file: &InstanceFile) -> CliResult<()> {
    let mut ok = file
        .observation
        .iter()
        .chain(file.reference_cost.iter())
        .all(|v| v.is_finite());
    for row in &file.problem.constraints {
        ok &= row.rhs.is_finite() && row.coeffs.iter().all(|v| v.is_finite());
    }
    if let Some(bounds) = &file.problem.upper_bounds {
        ok &= bounds.iter().flatten().all(|v| v.is_finite());
    }
    for section in [&file.config.tau, &file.config.big_m, &file.config.forward_time_cap_s] {
        if let Some(v) = section {
            ok &= v.is_finite();
        }
    }
    if let Some(w) = &file.config.weights {
        ok &= w.iter().all(|v| v.is_finite());
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::schema("instance contains non-finite numbers"))
    }
}

impl InstanceFile {
    pub fn to_raw_problem(&self) -> CliResult<RawProblem> {
        let n = self.problem.num_vars;
        let mut raw = RawProblem::new(&self.problem.name, n, self.problem.integrality.clone());
        if let Some(lower) = &self.problem.lower_bounds {
            if lower.len() != n {
                return Err(CliError::schema("lower_bounds has the wrong length"));
            }
            raw.lower_bounds = lower.clone();
        }
        if let Some(upper) = &self.problem.upper_bounds {
            if upper.len() != n {
                return Err(CliError::schema("upper_bounds has the wrong length"));
            }
            raw.upper_bounds = upper.clone();
        }
        for row in &self.problem.constraints {
            raw.push_row(row.coeffs.clone(), row.rel, row.rhs);
        }
        Ok(raw)
    }

    pub fn load(&self) -> CliResult<LoadedInstance> {
        let raw = self.to_raw_problem()?;
        let problem = standardize(&raw).map_err(CliError::from_solver)?;
        let observation =
            attach_observation(&problem, &self.observation).map_err(CliError::from_solver)?;
        let c_ring =
            ReferenceCost::new(&problem, &self.reference_cost).map_err(CliError::from_solver)?;
        Ok(LoadedInstance {
            name: self.problem.name.clone(),
            group: self.config.group.clone(),
            problem,
            observation,
            c_ring,
            config: self.config.clone(),
        })
    }
}

pub fn load_instance_file(path: &Path) -> CliResult<LoadedInstance> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)?.load()
}

/// A verify-cost file: a bare JSON array over the structural variables.
pub fn load_cost_file(path: &Path, expected_len: usize) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))?;
    let cost: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::schema(format!("invalid cost file: {e}")))?;
    if cost.len() != expected_len {
        return Err(CliError::schema(format!(
            "cost file has length {}, expected {expected_len}",
            cost.len()
        )));
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(CliError::schema("cost file contains non-finite numbers"));
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
        "format": 1,
        "problem": {
            "name": "ex1",
            "num_vars": 2,
            "constraints": [
                {"coeffs": [-4, -3], "rel": "<=", "rhs": -19},
                {"coeffs": [-1, -3], "rel": "<=", "rhs": -8},
                {"coeffs": [6, 1], "rel": "<=", "rhs": 30},
                {"coeffs": [-3, 5], "rel": "<=", "rhs": 17}
            ],
            "integrality": [true, true]
        },
        "observation": [4, 2],
        "reference_cost": [3, 1]
    }"#;

    #[test]
    fn parses_and_loads_ex1() {
        let inst = parse_instance(EX1).unwrap().load().unwrap();
        assert_eq!(inst.problem.num_cols(), 6);
        assert_eq!(inst.observation.x_hat, vec![4.0, 2.0, 3.0, 2.0, 4.0, 19.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_format() {
        let with_extra = EX1.replace("\"format\": 1", "\"format\": 1, \"bogus\": 2");
        assert_eq!(parse_instance(&with_extra).unwrap_err().exit_code, 2);
        let wrong_version = EX1.replace("\"format\": 1", "\"format\": 9");
        assert_eq!(parse_instance(&wrong_version).unwrap_err().exit_code, 2);
    }

    #[test]
    fn rejects_non_finite() {
        let bad = EX1.replace("[4, 2]", "[4, 1e999]");
        assert_eq!(parse_instance(&bad).unwrap_err().exit_code, 2);
    }

    #[test]
    fn infeasible_observation_maps_to_exit_3() {
        let bad = EX1.replace("\"observation\": [4, 2]", "\"observation\": [0, 0]");
        let err = parse_instance(&bad).unwrap().load().unwrap_err();
        assert_eq!(err.exit_code, 3);
    }
}
