//! Closed-form optimal solutions of the unit-norm inverse problems.
//!
//! Two model families, both constrained by `||c||_1 = 1`:
//!
//! * The equality-form model over all columns of the standardized problem
//!   ([`iop_closed_form`]). Any nonzero row yields a zero-objective solution;
//!   a zero entry of the observation yields the unit-vector variant.
//! * The slack-split model over structural costs only
//!   ([`iop2_closed_form`]), for problems where every row carries a slack.
//!   Boundary observations admit zero-objective solutions; strictly interior
//!   ones pay `min{ min_i x̂_i, min_r σ̂_r / ||a_r||_1 }`.
//!
//! Constraint-row solutions report `c* = -(sign_p) a_p / ||a_p||_1`, the
//! orientation that satisfies the dual rows; for `<=`-origin rows this is
//! the negative of the normalized row, matching the printed example vectors.

use crate::error::{Error, Result};
use crate::model::{ForwardProblem, Observation, SUPPORT_TOL};

/// Which formula produced the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Equality-form model, row-based solution.
    RowNormal,
    /// Equality-form model, a zero observation entry.
    ZeroVariable,
    /// Slack-split model, boundary case: the observation has a zero entry.
    BoundaryZeroX,
    /// Slack-split model, boundary case: some slack is zero.
    BoundaryZeroSigma,
    /// Slack-split model, interior case, constraint-row solution.
    InteriorConstraint,
    /// Slack-split model, interior case, minimum-variable solution.
    InteriorVariable,
}

/// A closed-form certificate. Vector layouts depend on the model:
/// the equality-form model fills `c`, `s`, `eps` over all columns and leaves
/// the `*_sigma` fields empty; the slack-split model fills `c`, `s`, `eps`
/// over structural columns and `eps_sigma`, `s_sigma` over rows.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub y: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub eps: Vec<f64>,
    pub eps_sigma: Vec<f64>,
    pub s_sigma: Vec<f64>,
    pub objective: f64,
    /// Row index for constraint-based cases, variable index otherwise.
    pub chosen_index: usize,
    pub case_tag: CaseTag,
}

impl ClosedFormSolution {
    /// l1 norm of the reported cost vector.
    pub fn c_norm(&self) -> f64 {
        self.c.iter().map(|v| v.abs()).sum()
    }
}

/// Zero-gap solution of the equality-form unit-norm model.
///
/// `row` picks the constraint row used by the row-based formula; it defaults
/// to the first row with a nonzero l1 norm. If the observation has a zero
/// entry the unit-vector variant is returned instead and `row` is ignored.
pub fn iop_closed_form(
    p: &ForwardProblem,
    obs: &Observation,
    row: Option<usize>,
) -> Result<ClosedFormSolution> {
    let m = p.num_rows();
    let n = p.num_cols();

    if let Some(q) = obs.x_hat.iter().position(|&v| v <= SUPPORT_TOL) {
        let mut c = vec![0.0; n];
        c[q] = 1.0;
        let mut s = vec![0.0; n];
        s[q] = 1.0;
        return Ok(ClosedFormSolution {
            y: vec![0.0; m],
            c,
            s,
            eps: vec![0.0; n],
            eps_sigma: Vec::new(),
            s_sigma: Vec::new(),
            objective: 0.0,
            chosen_index: q,
            case_tag: CaseTag::ZeroVariable,
        });
    }

    let pick = match row {
        Some(r) => {
            if r >= m || p.a.row_l1(r) <= 0.0 {
                return Err(Error::DegenerateMatrix(format!("row {r} unusable for the row formula")));
            }
            r
        }
        None => (0..m)
            .find(|&r| p.a.row_l1(r) > 0.0)
            .ok_or_else(|| Error::DegenerateMatrix("all rows are zero".into()))?,
    };

    let norm = p.a.row_l1(pick);
    let mut y = vec![0.0; m];
    y[pick] = 1.0 / norm;
    let c: Vec<f64> = (0..n).map(|j| p.a.get(pick, j) / norm).collect();
    Ok(ClosedFormSolution {
        y,
        c,
        s: vec![0.0; n],
        eps: vec![0.0; n],
        eps_sigma: Vec::new(),
        s_sigma: Vec::new(),
        objective: 0.0,
        chosen_index: pick,
        case_tag: CaseTag::RowNormal,
    })
}

/// Closed-form solution of the slack-split unit-norm model, with the slack
/// values derived from the observation.
pub fn iop2_closed_form(p: &ForwardProblem, obs: &Observation) -> Result<ClosedFormSolution> {
    let (x_s, sigma) = split_observation(p, obs)?;
    iop2_closed_form_with_sigma(p, &x_s, &sigma)
}

/// Structural values and per-row slack values of an observation.
fn split_observation(p: &ForwardProblem, obs: &Observation) -> Result<(Vec<f64>, Vec<f64>)> {
    if !p.slack_map_total() {
        return Err(Error::UnsupportedForm(
            "slack-split model needs a slack on every row".into(),
        ));
    }
    let x_s = obs.x_hat[..p.structural_count].to_vec();
    let sigma = (0..p.num_rows())
        .map(|r| obs.x_hat[p.slack_map[r].unwrap()])
        .collect();
    Ok((x_s, sigma))
}

/// Closed-form solution of the slack-split unit-norm model for explicit
/// `(x̂, σ̂)` data. The model takes both vectors as given; nothing here
/// requires `σ̂ = b - A x̂`.
///
/// Case selection: a zero structural entry wins, then a zero slack, then the
/// interior comparison `min_i x̂_i` versus `min_r σ̂_r / ||a_r||_1` with ties
/// going to the constraint-row solution.
pub fn iop2_closed_form_with_sigma(
    p: &ForwardProblem,
    x_s: &[f64],
    sigma: &[f64],
) -> Result<ClosedFormSolution> {
    let m = p.num_rows();
    let n_s = p.structural_count;
    if x_s.len() != n_s || sigma.len() != m {
        return Err(Error::Schema("observation data has wrong dimensions".into()));
    }
    if !p.slack_map_total() {
        return Err(Error::UnsupportedForm(
            "slack-split model needs a slack on every row".into(),
        ));
    }
    let row_norm = |r: usize| {
        (0..n_s).map(|j| p.a.get(r, j).abs()).sum::<f64>()
    };

    // Boundary: zero structural entry.
    if let Some(q) = x_s.iter().position(|&v| v <= SUPPORT_TOL) {
        let mut c = vec![0.0; n_s];
        c[q] = 1.0;
        let mut s = vec![0.0; n_s];
        s[q] = 1.0;
        return Ok(ClosedFormSolution {
            y: vec![0.0; m],
            c,
            s,
            eps: vec![0.0; n_s],
            eps_sigma: vec![0.0; m],
            s_sigma: vec![0.0; m],
            objective: 0.0,
            chosen_index: q,
            case_tag: CaseTag::BoundaryZeroX,
        });
    }

    // Boundary: zero slack on a usable row.
    if sigma.iter().any(|&v| v <= SUPPORT_TOL) {
        let pick = (0..m)
            .find(|&r| sigma[r] <= SUPPORT_TOL && row_norm(r) > 0.0)
            .ok_or_else(|| Error::DegenerateMatrix("every tight row is a zero row".into()))?;
        let (mut sol, _) = constraint_row_solution(p, pick);
        sol.eps_sigma = vec![0.0; m];
        sol.objective = 0.0;
        let mut s_sigma = vec![0.0; m];
        s_sigma[pick] = 1.0 / row_norm(pick);
        sol.s_sigma = s_sigma;
        sol.case_tag = CaseTag::BoundaryZeroSigma;
        return Ok(sol);
    }

    // Interior.
    let (p_x, m1) = x_s
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut p_r = None;
    let mut m2 = f64::INFINITY;
    for r in 0..m {
        let norm = row_norm(r);
        if norm > 0.0 {
            let ratio = sigma[r] / norm;
            if ratio < m2 {
                m2 = ratio;
                p_r = Some(r);
            }
        }
    }

    if let Some(pick) = p_r {
        if m2 <= m1 {
            let (mut sol, norm) = constraint_row_solution(p, pick);
            sol.eps_sigma[pick] = sigma[pick] / norm;
            sol.objective = m2;
            sol.case_tag = CaseTag::InteriorConstraint;
            return Ok(sol);
        }
    }

    let mut c = vec![0.0; n_s];
    c[p_x] = 1.0;
    let mut eps = vec![0.0; n_s];
    eps[p_x] = x_s[p_x];
    Ok(ClosedFormSolution {
        y: vec![0.0; m],
        c,
        s: vec![0.0; n_s],
        eps,
        eps_sigma: vec![0.0; m],
        s_sigma: vec![0.0; m],
        objective: m1,
        chosen_index: p_x,
        case_tag: CaseTag::InteriorVariable,
    })
}

/// The shared shape of the constraint-row solutions:
/// `y = -(o_p) e_p / ||a_p||`, `c = -(o_p) a_p / ||a_p||` where `o_p` is the
/// slack coefficient of row p.
fn constraint_row_solution(p: &ForwardProblem, pick: usize) -> (ClosedFormSolution, f64) {
    let m = p.num_rows();
    let n_s = p.structural_count;
    let norm: f64 = (0..n_s).map(|j| p.a.get(pick, j).abs()).sum();
    let orient = p.slack_sign(pick).unwrap_or(1.0);
    let mut y = vec![0.0; m];
    y[pick] = -orient / norm;
    let c: Vec<f64> = (0..n_s).map(|j| -orient * p.a.get(pick, j) / norm).collect();
    (
        ClosedFormSolution {
            y,
            c,
            s: vec![0.0; n_s],
            eps: vec![0.0; n_s],
            eps_sigma: vec![0.0; m],
            s_sigma: vec![0.0; m],
            objective: 0.0,
            chosen_index: pick,
            case_tag: CaseTag::InteriorConstraint,
        },
        norm,
    )
}

/// Max constraint violation of a solution against the equality-form model.
pub fn iop_residual(p: &ForwardProblem, obs: &Observation, sol: &ClosedFormSolution) -> f64 {
    let n = p.num_cols();
    let mut res: f64 = (sol.c_norm() - 1.0).abs();
    for j in 0..n {
        let col_dot: f64 = (0..p.num_rows()).map(|i| p.a.get(i, j) * sol.y[i]).sum();
        let v = if obs.x_hat[j] > SUPPORT_TOL {
            col_dot + sol.eps[j] / obs.x_hat[j] - sol.c[j]
        } else {
            col_dot + sol.s[j] - sol.c[j]
        };
        res = res.max(v.abs());
        res = res.max(-sol.eps[j]);
        res = res.max(-sol.s[j]);
    }
    res
}

/// Max constraint violation of a solution against the slack-split model.
pub fn iop2_residual(p: &ForwardProblem, obs: &Observation, sol: &ClosedFormSolution) -> f64 {
    let m = p.num_rows();
    let n_s = p.structural_count;
    let mut res: f64 = (sol.c_norm() - 1.0).abs();
    for j in 0..n_s {
        let col_dot: f64 = (0..m).map(|i| p.a.get(i, j) * sol.y[i]).sum();
        let v = if obs.x_hat[j] > SUPPORT_TOL {
            col_dot + sol.eps[j] / obs.x_hat[j] - sol.c[j]
        } else {
            col_dot + sol.s[j] - sol.c[j]
        };
        res = res.max(v.abs());
        res = res.max(-sol.eps[j]);
        res = res.max(-sol.s[j]);
    }
    for r in 0..m {
        let orient = p.slack_sign(r).unwrap_or(1.0);
        let sigma_r = obs.x_hat[p.slack_map[r].unwrap()];
        let v = if sigma_r > SUPPORT_TOL {
            orient * sol.y[r] + sol.eps_sigma[r] / sigma_r
        } else {
            orient * sol.y[r] + sol.s_sigma[r]
        };
        res = res.max(v.abs());
        res = res.max(-sol.eps_sigma[r]);
        res = res.max(-sol.s_sigma[r]);
    }
    res
}

/// Exhaustive verification of the slack-split optimum: enumerate the sign
/// pattern of `c`, solve each restriction as an LP with the linearized
/// `||c||_1 = 1` row, and take the best value. Exact at desk scale; limited
/// to 8 rows and 6 structural variables.
pub fn iop2_objective_oracle(p: &ForwardProblem, obs: &Observation) -> Result<f64> {
    let (x_s, sigma) = split_observation(p, obs)?;
    iop2_objective_oracle_with_sigma(p, &x_s, &sigma)
}

/// The sign-pattern oracle on explicit `(x̂, σ̂)` data.
pub fn iop2_objective_oracle_with_sigma(
    p: &ForwardProblem,
    x_s: &[f64],
    sigma: &[f64],
) -> Result<f64> {
    use crate::engine::{solve_lp, LpModel, LpStatus};
    use crate::model::Rel;

    let m = p.num_rows();
    let n_s = p.structural_count;
    if m > 8 || n_s > 6 {
        return Err(Error::SizeLimit(format!(
            "oracle limited to m <= 8, n_s <= 6 (got {m}, {n_s})"
        )));
    }
    if x_s.len() != n_s || sigma.len() != m {
        return Err(Error::Schema("observation data has wrong dimensions".into()));
    }
    if !p.slack_map_total() {
        return Err(Error::UnsupportedForm(
            "slack-split oracle needs a slack on every row".into(),
        ));
    }

    // Variables per pattern: u (n_s, >= 0, c_i = eta_i u_i), y (m, free),
    // eps (n_s), eps_sigma (m), s (n_s), s_sigma (m), all >= 0.
    let nv = n_s + m + n_s + m + n_s + m;
    let (u0, y0, e0, es0, s0, ss0) =
        (0, n_s, n_s + m, n_s + m + n_s, n_s + m + n_s + m, n_s + m + n_s + m + n_s);

    let mut best = f64::INFINITY;
    for pattern in 0..(1u32 << n_s) {
        let eta: Vec<f64> = (0..n_s)
            .map(|i| if pattern & (1 << i) != 0 { -1.0 } else { 1.0 })
            .collect();
        let mut objective = vec![0.0; nv];
        for i in 0..n_s {
            objective[e0 + i] = 1.0;
        }
        for r in 0..m {
            objective[es0 + r] = 1.0;
        }
        let mut lp = LpModel::new(objective);
        for r in 0..m {
            lp.free[y0 + r] = true;
        }
        for i in 0..n_s {
            let mut row = vec![0.0; nv];
            for r in 0..m {
                row[y0 + r] = p.a.get(r, i);
            }
            row[u0 + i] = -eta[i];
            if x_s[i] > SUPPORT_TOL {
                row[e0 + i] = 1.0 / x_s[i];
            } else {
                row[s0 + i] = 1.0;
            }
            lp.push_row(row, Rel::Eq, 0.0);
        }
        for r in 0..m {
            let orient = p.slack_sign(r).unwrap();
            let mut row = vec![0.0; nv];
            row[y0 + r] = orient;
            if sigma[r] > SUPPORT_TOL {
                row[es0 + r] = 1.0 / sigma[r];
            } else {
                row[ss0 + r] = 1.0;
            }
            lp.push_row(row, Rel::Eq, 0.0);
        }
        let mut norm_row = vec![0.0; nv];
        for i in 0..n_s {
            norm_row[u0 + i] = 1.0;
        }
        lp.push_row(norm_row, Rel::Eq, 1.0);

        let sol = solve_lp(&lp)?;
        if sol.status == LpStatus::Optimal && sol.objective < best {
            best = sol.objective;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Internal("every sign pattern was infeasible".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{attach_observation, standardize, RawProblem, Rel};

    fn ex1() -> ForwardProblem {
        let mut raw = RawProblem::new("ex1", 2, vec![true, true]);
        raw.push_row(vec![-4.0, -3.0], Rel::Le, -19.0);
        raw.push_row(vec![-1.0, -3.0], Rel::Le, -8.0);
        raw.push_row(vec![6.0, 1.0], Rel::Le, 30.0);
        raw.push_row(vec![-3.0, 5.0], Rel::Le, 17.0);
        standardize(&raw).unwrap()
    }

    #[test]
    fn equality_form_row_solution() {
        let p = ex1();
        let obs = attach_observation(&p, &[4.0, 2.0]).unwrap();
        let sol = iop_closed_form(&p, &obs, Some(0)).unwrap();
        assert_eq!(sol.case_tag, CaseTag::RowNormal);
        // Row 1 of [A | I] has l1 norm 8.
        let expect = [-4.0 / 8.0, -3.0 / 8.0, 1.0 / 8.0, 0.0, 0.0, 0.0];
        for (a, b) in sol.c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(sol.objective, 0.0);
        assert!(iop_residual(&p, &obs, &sol) <= 1e-12);
    }

    #[test]
    fn equality_form_zero_entry_variant() {
        // x <= 1 standardized; observation x = 1 makes the slack zero.
        let mut raw = RawProblem::new("one", 1, vec![false]);
        raw.push_row(vec![1.0], Rel::Le, 1.0);
        let p = standardize(&raw).unwrap();
        let obs = attach_observation(&p, &[1.0]).unwrap();
        let sol = iop_closed_form(&p, &obs, None).unwrap();
        assert_eq!(sol.case_tag, CaseTag::ZeroVariable);
        assert_eq!(sol.chosen_index, 1);
        assert_eq!(sol.c, vec![0.0, 1.0]);
        assert_eq!(sol.s[1], 1.0);
        assert!(iop_residual(&p, &obs, &sol) <= 1e-12);
    }

    #[test]
    fn interior_cases_match_printed_values() {
        let p = ex1();
        // (4,2): min{ min{4,2}, min{3/7, 2/4, 4/7, 19/8} } = 3/7 via row 1.
        let obs = attach_observation(&p, &[4.0, 2.0]).unwrap();
        let sol = iop2_closed_form(&p, &obs).unwrap();
        assert_eq!(sol.case_tag, CaseTag::InteriorConstraint);
        assert_eq!(sol.objective, 3.0 / 7.0);
        assert!((sol.c[0] - 4.0 / 7.0).abs() < 1e-15);
        assert!((sol.c[1] - 3.0 / 7.0).abs() < 1e-15);
        assert!(iop2_residual(&p, &obs, &sol) <= 1e-12);

        // Explicit (x̂, σ̂) data need not satisfy σ̂ = b - A x̂; the model
        // takes both as given.
        let sol =
            iop2_closed_form_with_sigma(&p, &[2.0, 4.0], &[1.0, 4.0, 14.0, 3.0]).unwrap();
        assert_eq!(sol.objective, 1.0 / 7.0);
        assert!((sol.c[0] - 4.0 / 7.0).abs() < 1e-15);

        let sol =
            iop2_closed_form_with_sigma(&p, &[4.0, 5.0], &[12.0, 11.0, 1.0, 4.0]).unwrap();
        assert_eq!(sol.objective, 1.0 / 7.0);
        assert!((sol.c[0] + 6.0 / 7.0).abs() < 1e-15);
        assert!((sol.c[1] + 1.0 / 7.0).abs() < 1e-15);

        let sol =
            iop2_closed_form_with_sigma(&p, &[3.0, 5.0], &[8.0, 10.0, 7.0, 11.0]).unwrap();
        assert_eq!(sol.objective, 1.0);
        assert!((sol.c[0] + 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn derived_slacks_pick_the_true_minimum() {
        // At (3,5) the true slacks are (8, 10, 7, 1): row 4 has slack 1 and
        // l1 norm 8, so the derived-data objective is 1/8, not 1.
        let p = ex1();
        let obs = attach_observation(&p, &[3.0, 5.0]).unwrap();
        assert_eq!(obs.x_hat[5], 1.0);
        let sol = iop2_closed_form(&p, &obs).unwrap();
        assert_eq!(sol.objective, 1.0 / 8.0);
        assert_eq!(sol.chosen_index, 3);
        assert!(iop2_residual(&p, &obs, &sol) <= 1e-12);
        let oracle = iop2_objective_oracle(&p, &obs).unwrap();
        assert!((oracle - 1.0 / 8.0).abs() < 1e-7);
    }

    #[test]
    fn oracle_agrees_on_printed_case() {
        let p = ex1();
        let obs = attach_observation(&p, &[2.0, 4.0]).unwrap();
        let oracle = iop2_objective_oracle(&p, &obs).unwrap();
        assert!((oracle - 1.0 / 7.0).abs() < 1e-7, "oracle gave {oracle}");
    }

    #[test]
    fn boundary_cases_have_zero_objective() {
        let mut raw = RawProblem::new("b", 2, vec![false, false]);
        raw.push_row(vec![1.0, 1.0], Rel::Le, 4.0);
        raw.push_row(vec![1.0, 0.0], Rel::Le, 2.0);
        let p = standardize(&raw).unwrap();

        // x = (0, 1): structural zero.
        let obs = attach_observation(&p, &[0.0, 1.0]).unwrap();
        let sol = iop2_closed_form(&p, &obs).unwrap();
        assert_eq!(sol.case_tag, CaseTag::BoundaryZeroX);
        assert_eq!(sol.objective, 0.0);
        assert!(iop2_residual(&p, &obs, &sol) <= 1e-12);
        assert!((iop2_objective_oracle(&p, &obs).unwrap()).abs() < 1e-9);

        // x = (2, 1): second row tight.
        let obs = attach_observation(&p, &[2.0, 1.0]).unwrap();
        let sol = iop2_closed_form(&p, &obs).unwrap();
        assert_eq!(sol.case_tag, CaseTag::BoundaryZeroSigma);
        assert_eq!(sol.chosen_index, 1);
        assert_eq!(sol.objective, 0.0);
        assert!(iop2_residual(&p, &obs, &sol) <= 1e-12);
    }
}
