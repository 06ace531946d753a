//! Two-phase primal simplex on a dense tableau.
//!
//! Free variables are split into differences of nonnegatives, bound rows are
//! appended, rows are sign-normalized to `rhs >= 0`, and slack / surplus /
//! artificial columns complete the standard form. Phase 1 drives the
//! artificials to zero (deleting redundant rows), phase 2 optimizes the real
//! objective. Pricing is Dantzig with lowest-index ties; after `5 (m + n)`
//! consecutive degenerate pivots the rule switches to Bland's, which cannot
//! cycle.

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::model::Rel;

use super::{dot, LpModel, LpSolution, LpStatus};

const RATIO_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-9;
const STALL_IMPROVEMENT: f64 = 1e-12;

pub(crate) enum Outcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

/// A standard-form column's origin.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ColKind {
    /// (original variable, sign) of a structural split column.
    Var(usize, f64),
    /// Slack or surplus of a standard row.
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// m x (ncols + 1); last column is the rhs.
    t: Vec<Vec<f64>>,
    /// Reduced-cost row, length ncols.
    d: Vec<f64>,
    /// Current objective value (of the phase's costs).
    z: f64,
    /// Basic column per row.
    basis: Vec<usize>,
    /// Columns excluded from pricing (artificials that have left the basis).
    dead: Vec<bool>,
    first_artificial: usize,
    bland: bool,
    stall: usize,
    stall_limit: usize,
    max_iters: usize,
}

impl Tableau {
    fn price(&self) -> Option<usize> {
        if self.bland {
            (0..self.ncols).find(|&j| !self.dead[j] && self.d[j] < -COST_EPS)
        } else {
            let mut best = None;
            let mut best_v = -COST_EPS;
            for j in 0..self.ncols {
                if !self.dead[j] && self.d[j] < best_v {
                    best_v = self.d[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn ratio_test(&self, e: usize) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for r in 0..self.m {
            let a = self.t[r][e];
            if a > RATIO_EPS {
                let ratio = self.t[r][self.ncols].max(0.0) / a;
                let better = match best {
                    None => true,
                    Some((br, brow)) => {
                        ratio < br - 1e-12
                            || (ratio < br + 1e-12
                                && if self.bland {
                                    self.basis[r] < self.basis[brow]
                                } else {
                                    r < brow
                                })
                    }
                };
                if better {
                    best = Some((ratio, r));
                }
            }
        }
        best.map(|(_, r)| r)
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.t[r][e];
        for v in self.t[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.m {
            if i != r {
                let f = self.t[i][e];
                if f != 0.0 {
                    for j in 0..=self.ncols {
                        self.t[i][j] -= f * self.t[r][j];
                    }
                    self.t[i][e] = 0.0;
                }
            }
        }
        let f = self.d[e];
        if f != 0.0 {
            for j in 0..self.ncols {
                self.d[j] -= f * self.t[r][j];
            }
            self.d[e] = 0.0;
            self.z += f * self.t[r][self.ncols];
        }
        let leaving = self.basis[r];
        if leaving >= self.first_artificial {
            self.dead[leaving] = true;
        }
        self.basis[r] = e;
    }

    /// Run to optimality of the current costs. Returns false on unbounded.
    fn optimize(&mut self) -> Result<bool> {
        let mut iters = 0usize;
        loop {
            let Some(e) = self.price() else { return Ok(true) };
            let Some(r) = self.ratio_test(e) else { return Ok(false) };
            let before = self.z;
            self.pivot(r, e);
            if (before - self.z).abs() < STALL_IMPROVEMENT {
                self.stall += 1;
                if self.stall > self.stall_limit {
                    self.bland = true;
                }
            } else {
                self.stall = 0;
            }
            iters += 1;
            if iters > self.max_iters {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} iterations",
                    self.max_iters
                )));
            }
        }
    }

    /// Recompute the reduced-cost row and objective for a new cost vector.
    fn load_costs(&mut self, costs: &[f64]) {
        self.z = 0.0;
        for j in 0..self.ncols {
            self.d[j] = costs[j];
        }
        for r in 0..self.m {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                self.z += cb * self.t[r][self.ncols];
                for j in 0..self.ncols {
                    self.d[j] -= cb * self.t[r][j];
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }
}

pub(crate) fn run(model: &LpModel) -> Result<Outcome> {
    let n = model.num_vars();

    // Split columns: one per nonnegative variable, two per free variable.
    let mut col_of: Vec<ColKind> = Vec::new();
    for j in 0..n {
        col_of.push(ColKind::Var(j, 1.0));
        if model.free[j] {
            col_of.push(ColKind::Var(j, -1.0));
        }
    }
    let n_split = col_of.len();

    // Effective rows, sign-normalized to rhs >= 0.
    let bound_rows = model.expanded_bound_rows();
    let eff: Vec<&super::LpRow> = model.rows.iter().chain(bound_rows.iter()).collect();
    let m = eff.len();
    let mut flipped = vec![false; m];
    let mut std_rows: Vec<(Vec<f64>, Rel, f64)> = Vec::with_capacity(m);
    for (i, row) in eff.iter().enumerate() {
        let mut coeffs: Vec<f64> = col_of
            .iter()
            .map(|k| match k {
                ColKind::Var(j, sign) => row.coeffs[*j] * sign,
                _ => unreachable!(),
            })
            .collect();
        let mut rel = row.rel;
        let mut rhs = row.rhs;
        if rhs < 0.0 {
            flipped[i] = true;
            rhs = -rhs;
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
            rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
        std_rows.push((coeffs, rel, rhs));
    }

    // Column layout: split vars, slacks/surpluses, artificials.
    let mut kind = col_of.clone();
    let mut slack_col_of_row = vec![None::<usize>; m];
    for (i, (_, rel, _)) in std_rows.iter().enumerate() {
        if *rel != Rel::Eq {
            slack_col_of_row[i] = Some(kind.len());
            kind.push(ColKind::Slack);
        }
    }
    let first_artificial = kind.len();
    let mut art_col_of_row = vec![None::<usize>; m];
    for (i, (_, rel, _)) in std_rows.iter().enumerate() {
        if *rel != Rel::Le {
            art_col_of_row[i] = Some(kind.len());
            kind.push(ColKind::Artificial);
        }
    }
    let ncols = kind.len();

    // Original standard-form columns, kept pristine for the final LU solve.
    let mut a_std: Vec<Vec<f64>> = vec![vec![0.0; ncols]; m];
    let mut b_std = vec![0.0; m];
    for (i, (coeffs, rel, rhs)) in std_rows.iter().enumerate() {
        a_std[i][..n_split].copy_from_slice(coeffs);
        if let Some(sc) = slack_col_of_row[i] {
            a_std[i][sc] = if *rel == Rel::Le { 1.0 } else { -1.0 };
        }
        if let Some(ac) = art_col_of_row[i] {
            a_std[i][ac] = 1.0;
        }
        b_std[i] = *rhs;
    }

    let mut basis = vec![0usize; m];
    for i in 0..m {
        basis[i] = art_col_of_row[i].or(slack_col_of_row[i]).expect("every row starts basic");
    }

    let mut tab = Tableau {
        m,
        ncols,
        t: a_std
            .iter()
            .zip(&b_std)
            .map(|(row, &b)| {
                let mut v = row.clone();
                v.push(b);
                v
            })
            .collect(),
        d: vec![0.0; ncols],
        z: 0.0,
        basis,
        dead: vec![false; ncols],
        first_artificial,
        bland: false,
        stall: 0,
        stall_limit: 5 * (m + ncols),
        max_iters: 10_000 + 200 * (m + ncols),
    };

    // Phase 1: minimize the sum of artificials.
    let phase1_costs: Vec<f64> = (0..ncols)
        .map(|j| if j >= first_artificial { 1.0 } else { 0.0 })
        .collect();
    tab.load_costs(&phase1_costs);
    if !tab.optimize()? {
        return Err(Error::Internal("phase-1 objective unbounded".into()));
    }
    let b_scale = 1.0 + b_std.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if tab.z > 1e-7 * b_scale {
        return Ok(Outcome::Infeasible);
    }

    // Drive artificials out of the basis; delete rows that prove redundant.
    let mut keep = vec![true; m];
    for r in 0..m {
        if tab.basis[r] >= first_artificial {
            let pivot_col = (0..first_artificial)
                .find(|&j| !tab.dead[j] && tab.t[r][j].abs() > 1e-7);
            match pivot_col {
                Some(e) => tab.pivot(r, e),
                None => keep[r] = false,
            }
        }
    }
    if keep.iter().any(|k| !k) {
        let mut new_t = Vec::new();
        let mut new_basis = Vec::new();
        for r in 0..m {
            if keep[r] {
                new_t.push(std::mem::take(&mut tab.t[r]));
                new_basis.push(tab.basis[r]);
            }
        }
        tab.m = new_t.len();
        tab.t = new_t;
        tab.basis = new_basis;
    }
    for j in first_artificial..ncols {
        tab.dead[j] = true;
    }
    tab.bland = false;
    tab.stall = 0;

    // Phase 2: the real objective over split columns.
    let phase2_costs: Vec<f64> = kind
        .iter()
        .map(|k| match k {
            ColKind::Var(j, sign) => model.objective[*j] * sign,
            _ => 0.0,
        })
        .collect();
    tab.load_costs(&phase2_costs);
    if !tab.optimize()? {
        return Ok(Outcome::Unbounded);
    }

    // Certificate from scratch: LU of the final basis over the kept rows.
    let kept_rows: Vec<usize> = (0..m).filter(|&r| keep[r]).collect();
    let mk = kept_rows.len();
    let basis_cols: Vec<Vec<f64>> = tab
        .basis
        .iter()
        .map(|&j| kept_rows.iter().map(|&r| a_std[r][j]).collect())
        .collect();
    let lu = Lu::factor(mk, &basis_cols)
        .map_err(|e| Error::NumericalFailure(format!("final basis not invertible: {e}")))?;
    let b_kept: Vec<f64> = kept_rows.iter().map(|&r| b_std[r]).collect();
    let xb = lu.solve(&b_kept);
    let cb: Vec<f64> = tab.basis.iter().map(|&j| phase2_costs[j]).collect();
    let y_kept = lu.solve_transpose(&cb);

    // Map primal values back to the original variables.
    let mut x = vec![0.0; n];
    for (pos, &j) in tab.basis.iter().enumerate() {
        if let ColKind::Var(v, sign) = kind[j] {
            x[v] += sign * xb[pos];
        }
    }
    // Snap away LU noise on variables that should be exactly zero.
    for (j, xv) in x.iter_mut().enumerate() {
        if !model.free[j] && xv.abs() < 1e-11 {
            *xv = 0.0;
        }
    }

    // Duals per effective row, original orientation; deleted rows get 0.
    let mut y = vec![0.0; m];
    for (pos, &r) in kept_rows.iter().enumerate() {
        y[r] = if flipped[r] { -y_kept[pos] } else { y_kept[pos] };
    }

    // Reduced costs in the original variable space.
    let mut s = vec![0.0; n];
    for j in 0..n {
        let mut at_y = 0.0;
        for (i, row) in eff.iter().enumerate() {
            at_y += row.coeffs[j] * y[i];
        }
        s[j] = model.objective[j] - at_y;
    }

    let objective = dot(&model.objective, &x);
    Ok(Outcome::Optimal(LpSolution { status: LpStatus::Optimal, x, y, s, objective }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{check_certificate, solve_lp};

    #[test]
    fn solves_textbook_max_as_min() {
        // min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18.
        let mut lp = LpModel::new(vec![-3.0, -5.0]);
        lp.push_row(vec![1.0, 0.0], Rel::Le, 4.0);
        lp.push_row(vec![0.0, 2.0], Rel::Le, 12.0);
        lp.push_row(vec![3.0, 2.0], Rel::Le, 18.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - (-36.0)).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 6.0).abs() < 1e-9);
        assert!(check_certificate(&lp, &sol).passes(1e-8));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LpModel::new(vec![0.0]);
        lp.push_row(vec![0.0], Rel::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let lp = LpModel::new(vec![-1.0]); // min -x, x >= 0, no rows
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |style| problem: min f + g s.t. y free, y - f + g = 3, f,g >= 0.
        let mut lp = LpModel::new(vec![0.0, 1.0, 1.0]);
        lp.free[0] = true;
        lp.push_row(vec![1.0, -1.0, 1.0], Rel::Eq, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective.abs() < 1e-9);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!(check_certificate(&lp, &sol).passes(1e-8));
    }

    #[test]
    fn bounds_expand_to_rows() {
        // min -x - y, x <= 2.5 (upper), y in [1, 3].
        let mut lp = LpModel::new(vec![-1.0, -1.0]);
        lp.upper[0] = Some(2.5);
        lp.lower[1] = 1.0;
        lp.upper[1] = Some(3.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.x[0] - 2.5).abs() < 1e-9);
        assert!((sol.x[1] - 3.0).abs() < 1e-9);
        // y covers 3 expanded rows: x<=2.5, y<=3, y>=1.
        assert_eq!(sol.y.len(), 3);
        assert!(check_certificate(&lp, &sol).passes(1e-8));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LpModel::new(vec![1.0, 1.0]);
        lp.push_row(vec![1.0, 1.0], Rel::Eq, 2.0);
        lp.push_row(vec![2.0, 2.0], Rel::Eq, 4.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!(check_certificate(&lp, &sol).passes(1e-8));
    }

    #[test]
    fn zero_objective_is_optimal_zero() {
        let mut lp = LpModel::new(vec![0.0, 0.0]);
        lp.push_row(vec![1.0, 2.0], Rel::Ge, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert_eq!(sol.objective, 0.0);
    }
}
