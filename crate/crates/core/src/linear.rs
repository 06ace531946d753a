//! Inverse linear optimization: reduced-cost basis model, complementarity
//! model, and the interior-point minimum-gap LP.
//!
//! All three act on the standard-form data of a [`ForwardProblem`]. The l1
//! objective `||c - c̊||_1` is linearized with the split `c = c̊ + f - g`,
//! `f, g >= 0`, everywhere.

use crate::engine::{solve_lp, LpModel, LpStatus};
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, independent_columns, Lu};
use crate::model::{ForwardProblem, Observation, Rel, SUPPORT_TOL};

/// Result of the minimum-gap LP: the dual point, the per-coordinate gaps, and
/// their sum, which bounds how far the observation is from LP-optimal.
#[derive(Debug, Clone)]
pub struct MinGapSolution {
    pub y: Vec<f64>,
    pub eps: Vec<f64>,
    pub gap: f64,
}

/// Minimum total gap of a strictly interior observation under cost `c`:
/// `min e^T eps  s.t.  A^T y + X̂^{-1} eps = c, eps >= 0`.
///
/// The optimal value equals `c^T x̂ - z_LP(c)`. Requires `x̂ > 0`; fails with
/// [`Error::NotInterior`] otherwise, and with [`Error::Unbounded`] when the
/// forward LP has no finite optimum under `c` (the gap LP is then infeasible).
pub fn min_gap_lp(p: &ForwardProblem, obs: &Observation, c: &[f64]) -> Result<MinGapSolution> {
    let m = p.num_rows();
    let n = p.num_cols();
    assert_eq!(c.len(), n);
    if let Some(j) = obs.x_hat.iter().position(|&v| v <= SUPPORT_TOL) {
        return Err(Error::NotInterior(j));
    }

    // Variables: y (m, free) then eps (n, >= 0).
    let mut objective = vec![0.0; m + n];
    for o in objective[m..].iter_mut() {
        *o = 1.0;
    }
    let mut lp = LpModel::new(objective);
    for j in 0..m {
        lp.free[j] = true;
    }
    for j in 0..n {
        let mut row = vec![0.0; m + n];
        for i in 0..m {
            row[i] = p.a.get(i, j);
        }
        row[m + j] = 1.0 / obs.x_hat[j];
        lp.push_row(row, Rel::Eq, c[j]);
    }

    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(MinGapSolution {
            y: sol.x[..m].to_vec(),
            eps: sol.x[m..].to_vec(),
            gap: sol.objective,
        }),
        LpStatus::Infeasible => Err(Error::Unbounded),
        LpStatus::Unbounded => Err(Error::Internal("gap LP cannot be unbounded".into())),
    }
}

/// Reduced-cost inverse LP for a basic feasible observation.
///
/// The basis starts from the support columns and is completed greedily with
/// complement columns in ascending index order. Returns the cost vector of
/// minimum l1 deviation from `c_ring` under which `x̂` is LP-optimal.
pub fn inverse_lp_basis(p: &ForwardProblem, obs: &Observation, c_ring: &[f64]) -> Result<Vec<f64>> {
    let m = p.num_rows();
    let n = p.num_cols();
    assert_eq!(c_ring.len(), n);

    let support: Vec<usize> = (0..n).filter(|&j| obs.x_hat[j] > SUPPORT_TOL).collect();
    let complement: Vec<usize> = (0..n).filter(|&j| obs.x_hat[j] <= SUPPORT_TOL).collect();
    if !independent_columns(&p.a, &support) {
        return Err(Error::NotExtreme);
    }
    let basis = complete_basis(&p.a, &support, &complement).ok_or_else(|| {
        Error::DegenerateBasis(format!(
            "support of size {} admits no invertible completion over {} rows",
            support.len(),
            m
        ))
    })?;

    let in_basis = {
        let mut mask = vec![false; n];
        for &j in &basis {
            mask[j] = true;
        }
        mask
    };
    let nonbasic: Vec<usize> = (0..n).filter(|&j| !in_basis[j]).collect();

    let cols: Vec<Vec<f64>> = basis.iter().map(|&j| p.a.col(j)).collect();
    let lu = Lu::factor(m, &cols)?;

    // Variables: f (n) then g (n), both >= 0; c = c_ring + f - g.
    // One row per nonbasic column j: reduced cost of j must stay nonnegative.
    let mut lp = LpModel::new(vec![1.0; 2 * n]);
    for &j in &nonbasic {
        let w = lu.solve(&p.a.col(j)); // B^{-1} a_.j
        let mut row = vec![0.0; 2 * n];
        row[j] += 1.0; // f_j
        row[n + j] -= 1.0; // g_j
        let mut rhs = -c_ring[j];
        for (k, &bj) in basis.iter().enumerate() {
            row[bj] -= w[k];
            row[n + bj] += w[k];
            rhs += w[k] * c_ring[bj];
        }
        lp.push_row(row, Rel::Ge, rhs);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "reduced-cost inverse LP ended {:?}; it is always feasible",
            sol.status
        )));
    }
    Ok((0..n).map(|j| c_ring[j] + sol.x[j] - sol.x[n + j]).collect())
}

/// Complementarity inverse LP for boundary observations that need not be
/// extreme: `B̃^T y = c_B̃`, `Ñ^T y <= c_Ñ` with `B̃ = A_{x̂>0}`, `Ñ = A_{x̂=0}`.
///
/// Returns the recovered cost vector and the dual `y`.
pub fn inverse_lp_complementarity(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = p.num_rows();
    let n = p.num_cols();
    assert_eq!(c_ring.len(), n);

    // Variables: y (m, free), f (n), g (n).
    let mut objective = vec![0.0; m + 2 * n];
    for o in objective[m..].iter_mut() {
        *o = 1.0;
    }
    let mut lp = LpModel::new(objective);
    for j in 0..m {
        lp.free[j] = true;
    }
    for j in 0..n {
        let mut row = vec![0.0; m + 2 * n];
        for i in 0..m {
            row[i] = p.a.get(i, j);
        }
        row[m + j] = -1.0; // -f_j
        row[m + n + j] = 1.0; // +g_j
        let rel = if obs.x_hat[j] > SUPPORT_TOL { Rel::Eq } else { Rel::Le };
        lp.push_row(row, rel, c_ring[j]);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "complementarity inverse LP ended {:?}; it is always feasible",
            sol.status
        )));
    }
    let c_hat: Vec<f64> = (0..n)
        .map(|j| c_ring[j] + sol.x[m + j] - sol.x[m + n + j])
        .collect();
    Ok((c_hat, sol.x[..m].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::solve_lp;
    use crate::model::{attach_observation, standardize, RawProblem};

    fn one_var_slack() -> ForwardProblem {
        // min c x : x <= 1, x >= 0 standardized to x + s = 1.
        let mut raw = RawProblem::new("one", 1, vec![false]);
        raw.push_row(vec![1.0], Rel::Le, 1.0);
        standardize(&raw).unwrap()
    }

    #[test]
    fn basis_model_deactivates_single_cost() {
        let p = one_var_slack();
        let obs = attach_observation(&p, &[1.0]).unwrap();
        let c_hat = inverse_lp_basis(&p, &obs, &[1.0, 0.0]).unwrap();
        let norm: f64 = c_hat
            .iter()
            .zip(&[1.0, 0.0])
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!((norm - 1.0).abs() < 1e-8, "norm was {norm}");
        // x̂ must now be LP-optimal.
        let sol = solve_lp(&p.lp_model(&c_hat)).unwrap();
        assert!((sol.objective - (c_hat[0] * 1.0)).abs() < 1e-8);
    }

    #[test]
    fn already_optimal_costs_nothing() {
        let p = one_var_slack();
        let obs = attach_observation(&p, &[1.0]).unwrap();
        // Under c = (-1, 0), x = 1 is already optimal.
        let c_hat = inverse_lp_basis(&p, &obs, &[-1.0, 0.0]).unwrap();
        assert!((c_hat[0] + 1.0).abs() < 1e-9);
        assert!(c_hat[1].abs() < 1e-9);
        let (c_hat2, _) = inverse_lp_complementarity(&p, &obs, &[-1.0, 0.0]).unwrap();
        assert!((c_hat2[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_gap_requires_interior() {
        let p = one_var_slack();
        let obs = attach_observation(&p, &[1.0]).unwrap(); // slack = 0
        assert!(matches!(
            min_gap_lp(&p, &obs, &[1.0, 0.0]),
            Err(Error::NotInterior(1))
        ));
    }

    #[test]
    fn min_gap_zero_cost_is_zero() {
        let p = one_var_slack();
        let obs = attach_observation(&p, &[0.5]).unwrap();
        let gap = min_gap_lp(&p, &obs, &[0.0, 0.0]).unwrap();
        assert!(gap.gap.abs() < 1e-10);
        assert!(gap.eps.iter().all(|&e| e.abs() < 1e-10));
    }
}
