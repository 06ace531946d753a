//! Problem ingestion: raw constraint systems, standard-form conversion with
//! slack bookkeeping, observation validation, and support-set partitioning.
//!
//! Every downstream model works on the standard form `A x = b, x >= 0` where
//! the columns of `A` are the original structural variables followed by one
//! slack column per inequality row. Slacks for `<=` rows carry coefficient
//! `+1`; slacks for `>=` rows carry `-1`, so `b` keeps its input sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Feasibility tolerance for observations and certificates.
pub const FEAS_TOL: f64 = 1e-7;
/// Integrality tolerance.
pub const INT_TOL: f64 = 1e-6;
/// Threshold above which an entry of the observation counts as positive.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// One raw constraint row.
#[derive(Debug, Clone)]
pub struct RawConstraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// A problem as the user states it: structural variables with zero lower
/// bounds, optional finite upper bounds, and an integrality mask.
#[derive(Debug, Clone)]
pub struct RawProblem {
    pub name: String,
    pub num_vars: usize,
    pub constraints: Vec<RawConstraint>,
    /// Lower bounds; the only supported value is 0.
    pub lower_bounds: Vec<f64>,
    /// Optional finite upper bounds, folded into constraint rows on standardization.
    pub upper_bounds: Vec<Option<f64>>,
    pub integrality: Vec<bool>,
}

impl RawProblem {
    /// Convenience constructor with all-zero lower bounds and no uppers.
    pub fn new(name: &str, num_vars: usize, integrality: Vec<bool>) -> Self {
        RawProblem {
            name: name.to_string(),
            num_vars,
            constraints: Vec::new(),
            lower_bounds: vec![0.0; num_vars],
            upper_bounds: vec![None; num_vars],
            integrality,
        }
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, rel: Rel, rhs: f64) {
        self.constraints.push(RawConstraint { coeffs, rel, rhs });
    }

    fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::Schema("problem has no variables".into()));
        }
        for v in [
            self.lower_bounds.len(),
            self.upper_bounds.len(),
            self.integrality.len(),
        ] {
            if v != self.num_vars {
                return Err(Error::Schema(format!(
                    "per-variable field has length {v}, expected {}",
                    self.num_vars
                )));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(Error::Schema(format!(
                    "constraint {i} has {} coefficients, expected {}",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Schema(format!("constraint {i} has non-finite data")));
            }
        }
        for (i, &l) in self.lower_bounds.iter().enumerate() {
            if l != 0.0 {
                return Err(Error::UnsupportedForm(format!(
                    "variable {i} has lower bound {l}; only 0 is supported"
                )));
            }
        }
        for (i, u) in self.upper_bounds.iter().enumerate() {
            if let Some(u) = u {
                if !u.is_finite() || *u < 0.0 {
                    return Err(Error::Schema(format!(
                        "variable {i} has invalid upper bound {u}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Standard-form problem data shared by every model in the crate.
#[derive(Debug, Clone)]
pub struct ForwardProblem {
    pub name: String,
    /// m x n matrix: structural columns, then slack columns in row order.
    pub a: Mat,
    pub b: Vec<f64>,
    /// Integrality mask over all n columns; slacks are always continuous.
    pub integrality: Vec<bool>,
    /// Per row: the slack column index, absent for original equality rows.
    pub slack_map: Vec<Option<usize>>,
    /// Number of structural columns.
    pub structural_count: usize,
}

impl ForwardProblem {
    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn num_cols(&self) -> usize {
        self.a.cols()
    }

    /// Slack coefficient of row r (+1 for <=, -1 for >=), if the row has one.
    pub fn slack_sign(&self, r: usize) -> Option<f64> {
        self.slack_map[r].map(|j| self.a.get(r, j))
    }

    /// True when every row has a slack column (pure-inequality origin).
    pub fn slack_map_total(&self) -> bool {
        self.slack_map.iter().all(Option::is_some)
    }

    /// Pad a structural cost vector with zero slack costs.
    pub fn pad_cost(&self, c_struct: &[f64]) -> Vec<f64> {
        assert_eq!(c_struct.len(), self.structural_count);
        let mut c = c_struct.to_vec();
        c.resize(self.num_cols(), 0.0);
        c
    }
}

/// The observed point, structural values plus derived slack values.
#[derive(Debug, Clone)]
pub struct Observation {
    pub x_hat: Vec<f64>,
    pub feasibility_residual: f64,
    pub integrality_residual: f64,
}

/// Index partition of the observation support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSets {
    /// Columns with x_hat above the tolerance.
    pub i_set: Vec<usize>,
    /// The complement.
    pub i_bar: Vec<usize>,
    /// Members of `i_set` that are slack columns.
    pub i_sigma: Vec<usize>,
    /// Members of `i_bar` that are slack columns.
    pub i_bar_sigma: Vec<usize>,
}

/// Reference cost: structural entries given, slack entries pinned to zero.
#[derive(Debug, Clone)]
pub struct ReferenceCost {
    c_ring: Vec<f64>,
}

impl ReferenceCost {
    pub fn new(p: &ForwardProblem, c_struct: &[f64]) -> Result<Self> {
        if c_struct.len() != p.structural_count {
            return Err(Error::Schema(format!(
                "reference cost has length {}, expected {}",
                c_struct.len(),
                p.structural_count
            )));
        }
        if c_struct.iter().any(|c| !c.is_finite()) {
            return Err(Error::Schema("reference cost has non-finite entries".into()));
        }
        Ok(ReferenceCost { c_ring: p.pad_cost(c_struct) })
    }

    /// Full-length cost vector (slack entries are exactly 0).
    pub fn full(&self) -> &[f64] {
        &self.c_ring
    }

    pub fn structural<'a>(&'a self, p: &ForwardProblem) -> &'a [f64] {
        &self.c_ring[..p.structural_count]
    }
}

/// Convert a raw problem to standard form.
///
/// Equality rows are kept as-is; every inequality row gains a fresh slack
/// column; finite upper bounds become additional `x_i <= u` rows (with their
/// own slacks) appended after the original rows.
pub fn standardize(raw: &RawProblem) -> Result<ForwardProblem> {
    raw.validate()?;
    let n_s = raw.num_vars;

    let mut rows: Vec<RawConstraint> = raw.constraints.clone();
    for (i, u) in raw.upper_bounds.iter().enumerate() {
        if let Some(u) = u {
            let mut coeffs = vec![0.0; n_s];
            coeffs[i] = 1.0;
            rows.push(RawConstraint { coeffs, rel: Rel::Le, rhs: *u });
        }
    }

    let m = rows.len();
    let num_slacks = rows.iter().filter(|r| r.rel != Rel::Eq).count();
    let n = n_s + num_slacks;

    let mut a = Mat::zeros(m, n);
    let mut b = vec![0.0; m];
    let mut slack_map = vec![None; m];
    let mut next_slack = n_s;
    for (r, row) in rows.iter().enumerate() {
        for (j, &v) in row.coeffs.iter().enumerate() {
            a.set(r, j, v);
        }
        b[r] = row.rhs;
        match row.rel {
            Rel::Eq => {}
            Rel::Le => {
                a.set(r, next_slack, 1.0);
                slack_map[r] = Some(next_slack);
                next_slack += 1;
            }
            Rel::Ge => {
                a.set(r, next_slack, -1.0);
                slack_map[r] = Some(next_slack);
                next_slack += 1;
            }
        }
    }

    let mut integrality = raw.integrality.clone();
    integrality.resize(n, false);

    Ok(ForwardProblem {
        name: raw.name.clone(),
        a,
        b,
        integrality,
        slack_map,
        structural_count: n_s,
    })
}

/// Attach an observation given by its structural values.
///
/// Slack values are always derived from `b - A_struct x`, never read from
/// input. Fails if a row is violated beyond [`FEAS_TOL`] or an integer-marked
/// variable is fractional beyond [`INT_TOL`].
pub fn attach_observation(p: &ForwardProblem, x_struct: &[f64]) -> Result<Observation> {
    if x_struct.len() != p.structural_count {
        return Err(Error::Schema(format!(
            "observation has length {}, expected {}",
            x_struct.len(),
            p.structural_count
        )));
    }
    if x_struct.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema("observation has non-finite entries".into()));
    }
    for (j, &v) in x_struct.iter().enumerate() {
        if v < -FEAS_TOL {
            return Err(Error::Schema(format!("observation variable {j} is negative ({v})")));
        }
        if p.integrality[j] && (v - v.round()).abs() > INT_TOL {
            return Err(Error::ObservationFractional { index: j, value: v });
        }
    }

    let mut x_hat = vec![0.0; p.num_cols()];
    x_hat[..p.structural_count].copy_from_slice(x_struct);

    let mut feas_residual: f64 = 0.0;
    for r in 0..p.num_rows() {
        let dot: f64 = (0..p.structural_count)
            .map(|j| p.a.get(r, j) * x_struct[j])
            .sum();
        let gap = p.b[r] - dot;
        match p.slack_map[r] {
            Some(sj) => {
                // sigma_r = sign * (b_r - a_r.x); must be nonnegative.
                let sigma = p.a.get(r, sj) * gap;
                if sigma < -FEAS_TOL {
                    return Err(Error::ObservationInfeasible { row: r, violation: -sigma });
                }
                feas_residual = feas_residual.max(-sigma.min(0.0));
                x_hat[sj] = sigma.max(0.0);
            }
            None => {
                if gap.abs() > FEAS_TOL {
                    return Err(Error::ObservationInfeasible { row: r, violation: gap.abs() });
                }
                feas_residual = feas_residual.max(gap.abs());
            }
        }
    }

    let integrality_residual = x_hat
        .iter()
        .zip(&p.integrality)
        .filter(|(_, &m)| m)
        .map(|(v, _)| (v - v.round()).abs())
        .fold(0.0, f64::max);

    Ok(Observation { x_hat, feasibility_residual: feas_residual, integrality_residual })
}

/// Partition column indices by whether the observation exceeds `support_tol`.
pub fn partition_support(p: &ForwardProblem, obs: &Observation, support_tol: f64) -> SupportSets {
    let mut i_set = Vec::new();
    let mut i_bar = Vec::new();
    let mut i_sigma = Vec::new();
    let mut i_bar_sigma = Vec::new();
    for (j, &v) in obs.x_hat.iter().enumerate() {
        let is_slack = j >= p.structural_count;
        if v > support_tol {
            i_set.push(j);
            if is_slack {
                i_sigma.push(j);
            }
        } else {
            i_bar.push(j);
            if is_slack {
                i_bar_sigma.push(j);
            }
        }
    }
    SupportSets { i_set, i_bar, i_sigma, i_bar_sigma }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 2-variable quadrilateral used throughout the crate's tests.
    fn ex1() -> RawProblem {
        let mut raw = RawProblem::new("ex1", 2, vec![true, true]);
        raw.push_row(vec![-4.0, -3.0], Rel::Le, -19.0);
        raw.push_row(vec![-1.0, -3.0], Rel::Le, -8.0);
        raw.push_row(vec![6.0, 1.0], Rel::Le, 30.0);
        raw.push_row(vec![-3.0, 5.0], Rel::Le, 17.0);
        raw
    }

    #[test]
    fn standardize_ex1_shape() {
        let p = standardize(&ex1()).unwrap();
        assert_eq!(p.num_rows(), 4);
        assert_eq!(p.num_cols(), 6);
        assert_eq!(p.b, vec![-19.0, -8.0, 30.0, 17.0]);
        assert_eq!(p.structural_count, 2);
        // Slack block is the identity on its own rows.
        for r in 0..4 {
            let sj = p.slack_map[r].unwrap();
            assert_eq!(p.a.get(r, sj), 1.0);
            for r2 in 0..4 {
                if r2 != r {
                    assert_eq!(p.a.get(r2, sj), 0.0);
                }
            }
        }
        assert_eq!(p.integrality, vec![true, true, false, false, false, false]);
    }

    #[test]
    fn standardize_pure_equality_passthrough() {
        let mut raw = RawProblem::new("eq", 2, vec![false, false]);
        raw.push_row(vec![1.0, 1.0], Rel::Eq, 3.0);
        let p = standardize(&raw).unwrap();
        assert_eq!(p.num_cols(), 2);
        assert!(p.slack_map.iter().all(Option::is_none));
    }

    #[test]
    fn standardize_upper_bound_becomes_row() {
        let mut raw = RawProblem::new("ub", 2, vec![true, true]);
        raw.push_row(vec![1.0, 1.0], Rel::Le, 8.0);
        raw.upper_bounds[0] = Some(5.0);
        let p = standardize(&raw).unwrap();
        assert_eq!(p.num_rows(), 2);
        assert_eq!(p.a.row(1)[..2], [1.0, 0.0]);
        assert_eq!(p.b[1], 5.0);
        assert!(p.slack_map[1].is_some());
    }

    #[test]
    fn standardize_rejects_bad_rows() {
        let mut raw = ex1();
        raw.constraints[1].coeffs.pop();
        assert!(matches!(standardize(&raw), Err(Error::Schema(_))));

        let mut raw = ex1();
        raw.lower_bounds[0] = -1.0;
        assert!(matches!(standardize(&raw), Err(Error::UnsupportedForm(_))));
    }

    #[test]
    fn ge_rows_get_negative_slack() {
        let mut raw = RawProblem::new("ge", 1, vec![false]);
        raw.push_row(vec![2.0], Rel::Ge, 4.0);
        let p = standardize(&raw).unwrap();
        assert_eq!(p.slack_sign(0), Some(-1.0));
        // x = 3 gives sigma = -(4 - 6) = 2.
        let obs = attach_observation(&p, &[3.0]).unwrap();
        assert_eq!(obs.x_hat, vec![3.0, 2.0]);
    }

    #[test]
    fn observation_ex1_goldens() {
        let p = standardize(&ex1()).unwrap();
        let obs = attach_observation(&p, &[4.0, 2.0]).unwrap();
        assert_eq!(obs.x_hat, vec![4.0, 2.0, 3.0, 2.0, 4.0, 19.0]);

        let obs = attach_observation(&p, &[2.0, 4.0]).unwrap();
        assert_eq!(obs.x_hat, vec![2.0, 4.0, 1.0, 6.0, 14.0, 3.0]);

        match attach_observation(&p, &[0.0, 0.0]) {
            Err(Error::ObservationInfeasible { row, .. }) => assert_eq!(row, 0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn observation_rejects_fractional_integer() {
        let p = standardize(&ex1()).unwrap();
        match attach_observation(&p, &[3.5, 3.0]) {
            Err(Error::ObservationFractional { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected fractional, got {other:?}"),
        }
    }

    #[test]
    fn support_partition_cases() {
        let p = standardize(&ex1()).unwrap();
        let obs = attach_observation(&p, &[4.0, 2.0]).unwrap();
        let s = partition_support(&p, &obs, SUPPORT_TOL);
        assert_eq!(s.i_set, vec![0, 1, 2, 3, 4, 5]);
        assert!(s.i_bar.is_empty());
        assert_eq!(s.i_sigma, vec![2, 3, 4, 5]);

        // A tiny entry below tolerance lands in the complement.
        let obs = Observation {
            x_hat: vec![1e-12, 5.0],
            feasibility_residual: 0.0,
            integrality_residual: 0.0,
        };
        let mut raw = RawProblem::new("t", 2, vec![false, false]);
        raw.push_row(vec![1.0, 1.0], Rel::Eq, 5.0);
        let p2 = standardize(&raw).unwrap();
        let s = partition_support(&p2, &obs, 1e-9);
        assert_eq!(s.i_set, vec![1]);
        assert_eq!(s.i_bar, vec![0]);
    }
}
