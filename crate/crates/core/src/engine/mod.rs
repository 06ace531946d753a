//! Self-contained dense LP and MILP engines.
//!
//! [`solve_lp`] is a two-phase primal simplex over a dense tableau with
//! Dantzig pricing and a Bland's-rule fallback once it detects stalling.
//! The returned certificate (primal point, row duals, reduced costs) is
//! recomputed from an LU factorization of the final basis, so residuals sit
//! at machine precision rather than tableau-drift precision.
//!
//! [`solve_milp`] is a depth-first branch-and-bound on top of it: most
//! fractional branching, branch-down first, incumbent pool, node and wall
//! time limits.

mod milp;
mod simplex;

use std::time::Duration;

use crate::error::{Error, Result};

use crate::model::ForwardProblem;
use crate::model::Rel;

pub use milp::{MilpLimits, MilpModel, MilpSolution, MilpStatus};

/// One linear constraint row.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// A linear program `min c^T x` over rows and simple variable bounds.
///
/// Variables are nonnegative unless marked `free`. Nonzero lower bounds and
/// finite upper bounds are expanded into extra rows internally; the dual
/// vector of a solution covers the declared rows first, then the expanded
/// bound rows in [`LpModel::expanded_bound_rows`] order.
#[derive(Debug, Clone)]
pub struct LpModel {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub free: Vec<bool>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LpModel {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpModel {
            objective,
            rows: Vec::new(),
            free: vec![false; n],
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, rel: Rel, rhs: f64) {
        self.rows.push(LpRow { coeffs, rel, rhs });
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::Schema("LP has no variables".into()));
        }
        if self.free.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Schema("LP per-variable fields have inconsistent length".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Schema(format!(
                    "LP row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
        }
        for (j, &l) in self.lower.iter().enumerate() {
            if self.free[j] && (l != 0.0 || self.upper[j].is_some()) {
                return Err(Error::Schema(format!("free variable {j} cannot carry bounds")));
            }
            if l < 0.0 {
                return Err(Error::Schema(format!("variable {j} has negative lower bound {l}")));
            }
        }
        Ok(())
    }

    /// The bound rows the engine appends after the declared rows: first
    /// `x_j <= u_j` for each finite upper bound, then `x_j >= l_j` for each
    /// nonzero lower bound, both in ascending variable order.
    pub fn expanded_bound_rows(&self) -> Vec<LpRow> {
        let n = self.num_vars();
        let unit = |j: usize| {
            let mut c = vec![0.0; n];
            c[j] = 1.0;
            c
        };
        let mut rows = Vec::new();
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                rows.push(LpRow { coeffs: unit(j), rel: Rel::Le, rhs: *u });
            }
        }
        for (j, &l) in self.lower.iter().enumerate() {
            if l != 0.0 {
                rows.push(LpRow { coeffs: unit(j), rel: Rel::Ge, rhs: l });
            }
        }
        rows
    }
}

/// Solve status of an LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Primal-dual certificate returned by [`solve_lp`].
///
/// On `Optimal`: `x` is primal feasible, `y` holds one dual per effective row
/// (declared rows, then expanded bound rows), and `s = c - A^T y` are the
/// reduced costs.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn empty(status: LpStatus) -> Self {
        LpSolution { status, x: Vec::new(), y: Vec::new(), s: Vec::new(), objective: f64::NAN }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solve a linear program. Deterministic for a fixed model.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    model.validate()?;
    match simplex::run(model)? {
        simplex::Outcome::Optimal(cert) => Ok(cert),
        simplex::Outcome::Infeasible => Ok(LpSolution::empty(LpStatus::Infeasible)),
        simplex::Outcome::Unbounded => Ok(LpSolution::empty(LpStatus::Unbounded)),
    }
}

/// Solve a mixed-integer program by branch and bound.
pub fn solve_milp(model: &MilpModel, limits: &MilpLimits) -> Result<MilpSolution> {
    milp::solve(model, limits)
}

/// Residual report for an LP certificate.
#[derive(Debug, Clone, Copy)]
pub struct CertificateReport {
    /// Max violation of any row or variable bound by `x`.
    pub primal_residual: f64,
    /// Max violation of dual feasibility: `s = c - A^T y`, sign conditions on
    /// `s` and on inequality-row duals.
    pub dual_residual: f64,
    /// Max |x_j * s_j|.
    pub complementarity: f64,
    /// |c^T x - b^T y| over the effective rows.
    pub duality_gap: f64,
}

impl CertificateReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.primal_residual <= tol
            && self.dual_residual <= tol
            && self.complementarity <= tol
            && self.duality_gap <= tol
    }
}

/// Replay a certificate against its model. Pure report, no judgement.
pub fn check_certificate(model: &LpModel, sol: &LpSolution) -> CertificateReport {
    let n = model.num_vars();
    let mut eff: Vec<LpRow> = model.rows.clone();
    eff.extend(model.expanded_bound_rows());

    let mut primal: f64 = 0.0;
    for row in &eff {
        let ax: f64 = row.coeffs.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
        let v = match row.rel {
            Rel::Eq => (ax - row.rhs).abs(),
            Rel::Le => (ax - row.rhs).max(0.0),
            Rel::Ge => (row.rhs - ax).max(0.0),
        };
        primal = primal.max(v);
    }
    for j in 0..n {
        if !model.free[j] {
            primal = primal.max(-sol.x[j]);
        }
    }

    let mut dual: f64 = 0.0;
    for j in 0..n {
        let at_y: f64 = eff.iter().zip(&sol.y).map(|(row, y)| row.coeffs[j] * y).sum();
        let implied = model.objective[j] - at_y;
        dual = dual.max((sol.s[j] - implied).abs());
        if model.free[j] {
            dual = dual.max(sol.s[j].abs());
        } else {
            dual = dual.max(-sol.s[j]);
        }
    }
    for (row, &y) in eff.iter().zip(&sol.y) {
        match row.rel {
            Rel::Le => dual = dual.max(y),
            Rel::Ge => dual = dual.max(-y),
            Rel::Eq => {}
        }
    }

    let complementarity = sol
        .x
        .iter()
        .zip(&sol.s)
        .map(|(x, s)| (x * s).abs())
        .fold(0.0, f64::max);

    let obj: f64 = model.objective.iter().zip(&sol.x).map(|(c, x)| c * x).sum();
    let dual_obj: f64 = eff.iter().zip(&sol.y).map(|(row, y)| row.rhs * y).sum();
    let duality_gap = (obj - dual_obj).abs();

    CertificateReport { primal_residual: primal, dual_residual: dual, complementarity, duality_gap }
}

impl ForwardProblem {
    /// The forward LP relaxation `min c^T x : A x = b, x >= 0`.
    pub fn lp_model(&self, c: &[f64]) -> LpModel {
        assert_eq!(c.len(), self.num_cols());
        let mut lp = LpModel::new(c.to_vec());
        for r in 0..self.num_rows() {
            lp.push_row(self.a.row(r).to_vec(), Rel::Eq, self.b[r]);
        }
        lp
    }

    /// The forward MILP `min c^T x` with this problem's integrality marks.
    pub fn milp_model(&self, c: &[f64]) -> MilpModel {
        MilpModel { lp: self.lp_model(c), integer: self.integrality.clone() }
    }
}

/// Convenience wrapper: default MILP limits with a wall-clock cap.
pub fn time_capped(cap: Duration) -> MilpLimits {
    MilpLimits { max_nodes: None, time_cap: Some(cap) }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
