//! Single-level inverse models over the forward problem's optimality system.
//!
//! The workhorse is the concise strong-duality LP in variables
//! `(y, eps, s, f, g)` with `c = c̊ + f - g`:
//!
//! * rows over supported columns:   `a_.i^T y + eps_i / x̂_i - f_i + g_i = c̊_i`
//! * rows over unsupported columns: `a_.i^T y + s_i - f_i + g_i = c̊_i`
//! * the strong-duality row:        `b^T y + e^T eps - x̂^T f + x̂^T g = c̊^T x̂`
//!
//! Slack columns never deviate: their `f` and `g` are pinned to zero, so every
//! reported cost vector has zero slack entries. On top of the concise LP sit
//! the tolerance model (cap `e^T eps` at `tau * e^T(f+g)`), the bi-objective
//! model (add `sum w_i eps_i` to the objective), and a big-M MILP that
//! enforces the complementarity conditions exactly.
//!
//! Every solve re-derives its certificate by solving the forward LP under the
//! recovered cost: the reported `(y, eps, s)` come from that independent
//! solve, which makes the gap identity `e^T eps = ĉ^T x̂ - z_LP` hold by
//! strong duality rather than by trust in the master's variables.

use std::time::Instant;

use serde::Serialize;

use crate::engine::{
    solve_lp, solve_milp, LpModel, LpStatus, MilpLimits, MilpModel, MilpSolution, MilpStatus,
};
use crate::error::{Error, Result};
use crate::model::{
    partition_support, ForwardProblem, Observation, ReferenceCost, Rel, SupportSets, SUPPORT_TOL,
};

/// Which inverse model produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Concise,
    Tolerance,
    BiObjective,
    BigM,
}

/// Caps and tolerances shared by the solve pipeline.
#[derive(Debug, Clone)]
pub struct InverseConfig {
    pub support_tol: f64,
    /// Limits for the forward MILP that prices the recovered cost.
    pub forward_limits: MilpLimits,
    /// Limits for the big-M master MILP.
    pub master_limits: MilpLimits,
    /// Big-M override; `None` picks the default from the instance data.
    pub big_m: Option<f64>,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            support_tol: SUPPORT_TOL,
            forward_limits: MilpLimits {
                max_nodes: None,
                time_cap: Some(std::time::Duration::from_secs(30)),
            },
            master_limits: MilpLimits {
                max_nodes: None,
                time_cap: Some(std::time::Duration::from_secs(60)),
            },
            big_m: None,
        }
    }
}

/// Certificate of the forward LP relaxation under the recovered cost.
#[derive(Debug, Clone, Serialize)]
pub struct LpCertificate {
    pub x_lp: Vec<f64>,
    pub y_lp: Vec<f64>,
    pub s_lp: Vec<f64>,
    pub z_lp: f64,
}

/// Bounds from the forward MILP under the recovered cost.
#[derive(Debug, Clone, Serialize)]
pub struct ForwardSummary {
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub optimal: bool,
    pub node_count: u64,
    /// Structural part of the forward incumbent (empty if none).
    pub incumbent: Vec<f64>,
    /// Structural parts of every improving incumbent, in discovery order.
    pub pool: Vec<Vec<f64>>,
}

/// Quality metrics mirroring the reporting columns of the batch runner.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    /// |ĉ^T x̂ - lb| / max(1, |ĉ^T x̂|).
    pub rgap: f64,
    /// (||ĉ||_1 - ||c̊||_1) / max(1, ||c̊||_1).
    pub rnorm_diff_of_norms: f64,
    /// ||ĉ - c̊||_1 / max(1, ||c̊||_1); the primary proximity measure.
    pub rnorm_norm_of_diff: f64,
    pub eps_total: f64,
    /// Modeled deviation `e^T (f + g)`.
    pub l1_deviation: f64,
    pub cpu_seconds: f64,
    pub optimal_at_e2: bool,
    pub optimal_at_e5: bool,
}

/// A recovered cost vector with its certificates and metrics.
#[derive(Debug, Clone)]
pub struct InverseSolution {
    pub model_kind: ModelKind,
    /// Full-length cost; slack entries are exactly zero.
    pub c_hat: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Canonical gaps `x̂_i s^LP_i` over the support, zero elsewhere.
    pub eps: Vec<f64>,
    /// Canonical dual slacks over the complement, zero elsewhere.
    pub s: Vec<f64>,
    /// Dual of the forward LP under `c_hat`.
    pub y: Vec<f64>,
    pub master_objective: f64,
    /// Big-M only: the primal displacement, `x^LP = x̂ - delta`.
    pub delta: Option<Vec<f64>>,
    pub lp_certificate: Option<LpCertificate>,
    pub forward: Option<ForwardSummary>,
    pub metrics: Metrics,
}

impl InverseSolution {
    pub fn eps_total(&self) -> f64 {
        self.eps.iter().sum()
    }

    pub fn l1_deviation(&self) -> f64 {
        self.f.iter().chain(self.g.iter()).sum()
    }

    pub fn obj_at(&self, obs: &Observation) -> f64 {
        dot(&self.c_hat, &obs.x_hat)
    }

    pub fn structural_cost<'a>(&'a self, p: &ForwardProblem) -> &'a [f64] {
        &self.c_hat[..p.structural_count]
    }
}

/// Variable layout of the concise LP and its relatives.
#[derive(Debug, Clone)]
pub struct ConciseLayout {
    pub m: usize,
    pub n: usize,
    pub n_s: usize,
    pub i_set: Vec<usize>,
    pub i_bar: Vec<usize>,
    pub y0: usize,
    pub eps0: usize,
    pub s0: usize,
    pub f0: usize,
    pub g0: usize,
    pub num_vars: usize,
    eps_pos: Vec<Option<usize>>,
    s_pos: Vec<Option<usize>>,
}

/// Master variables unpacked to full-length vectors.
#[derive(Debug, Clone)]
pub struct MasterVars {
    pub y: Vec<f64>,
    pub eps: Vec<f64>,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl ConciseLayout {
    fn new(p: &ForwardProblem, supports: &SupportSets) -> Self {
        let m = p.num_rows();
        let n = p.num_cols();
        let n_s = p.structural_count;
        let y0 = 0;
        let eps0 = m;
        let s0 = eps0 + supports.i_set.len();
        let f0 = s0 + supports.i_bar.len();
        let g0 = f0 + n_s;
        let num_vars = g0 + n_s;
        let mut eps_pos = vec![None; n];
        for (k, &j) in supports.i_set.iter().enumerate() {
            eps_pos[j] = Some(eps0 + k);
        }
        let mut s_pos = vec![None; n];
        for (k, &j) in supports.i_bar.iter().enumerate() {
            s_pos[j] = Some(s0 + k);
        }
        ConciseLayout {
            m,
            n,
            n_s,
            i_set: supports.i_set.clone(),
            i_bar: supports.i_bar.clone(),
            y0,
            eps0,
            s0,
            f0,
            g0,
            num_vars,
            eps_pos,
            s_pos,
        }
    }

    /// Column index of `eps_i`, when `i` is supported.
    pub fn eps_col(&self, i: usize) -> Option<usize> {
        self.eps_pos[i]
    }

    /// Column index of `s_i`, when `i` is unsupported.
    pub fn s_col(&self, i: usize) -> Option<usize> {
        self.s_pos[i]
    }

    /// Unpack a master LP point into full-length vectors.
    pub fn extract(&self, x: &[f64]) -> MasterVars {
        let mut vars = MasterVars {
            y: x[self.y0..self.y0 + self.m].to_vec(),
            eps: vec![0.0; self.n],
            s: vec![0.0; self.n],
            f: vec![0.0; self.n],
            g: vec![0.0; self.n],
        };
        for (i, pos) in self.eps_pos.iter().enumerate() {
            if let Some(k) = pos {
                vars.eps[i] = x[*k];
            }
        }
        for (i, pos) in self.s_pos.iter().enumerate() {
            if let Some(k) = pos {
                vars.s[i] = x[*k];
            }
        }
        for j in 0..self.n_s {
            vars.f[j] = x[self.f0 + j];
            vars.g[j] = x[self.g0 + j];
        }
        vars
    }
}

/// A valid optimality cut `c^T x̂ <= c^T x̄` generated from a feasible point.
///
/// Since slack costs are pinned to zero the cut only involves the structural
/// part of `x̂ - x̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCut {
    pub x_bar_struct: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Build the concise strong-duality LP: objective `e^T f + e^T g`, one row
/// per column, one strong-duality row.
pub fn build_concise_lp(
    p: &ForwardProblem,
    obs: &Observation,
    supports: &SupportSets,
    c_ring: &ReferenceCost,
) -> Result<(LpModel, ConciseLayout)> {
    build_master(p, obs, supports, c_ring, None, None, &[])
}

/// Shared builder for the concise LP, the tolerance row, weighted objectives,
/// and optimality cuts.
fn build_master(
    p: &ForwardProblem,
    obs: &Observation,
    supports: &SupportSets,
    c_ring: &ReferenceCost,
    tau: Option<f64>,
    weights: Option<&[f64]>,
    cuts: &[OptimalityCut],
) -> Result<(LpModel, ConciseLayout)> {
    let layout = ConciseLayout::new(p, supports);
    for &i in &supports.i_set {
        if obs.x_hat[i] <= SUPPORT_TOL {
            return Err(Error::Internal(format!(
                "support index {i} has value {} at or below the support tolerance",
                obs.x_hat[i]
            )));
        }
    }
    if let Some(w) = weights {
        if w.len() != supports.i_set.len() {
            return Err(Error::Schema(format!(
                "weight vector has length {}, expected |I| = {}",
                w.len(),
                supports.i_set.len()
            )));
        }
        if let Some(bad) = w.iter().find(|&&wi| !(wi > 0.0)) {
            return Err(Error::Schema(format!("weights must be positive, got {bad}")));
        }
    }

    let mut objective = vec![0.0; layout.num_vars];
    for j in 0..layout.n_s {
        objective[layout.f0 + j] = 1.0;
        objective[layout.g0 + j] = 1.0;
    }
    if let Some(w) = weights {
        for (k, &wi) in w.iter().enumerate() {
            objective[layout.eps0 + k] = wi;
        }
    }

    let mut lp = LpModel::new(objective);
    for i in 0..layout.m {
        lp.free[layout.y0 + i] = true;
    }

    // One row per column of A.
    for j in 0..layout.n {
        let mut row = vec![0.0; layout.num_vars];
        for i in 0..layout.m {
            row[layout.y0 + i] = p.a.get(i, j);
        }
        if let Some(k) = layout.eps_pos[j] {
            row[k] = 1.0 / obs.x_hat[j];
        }
        if let Some(k) = layout.s_pos[j] {
            row[k] = 1.0;
        }
        if j < layout.n_s {
            row[layout.f0 + j] = -1.0;
            row[layout.g0 + j] = 1.0;
        }
        lp.push_row(row, Rel::Eq, c_ring.full()[j]);
    }

    // Strong duality row.
    let mut row = vec![0.0; layout.num_vars];
    for i in 0..layout.m {
        row[layout.y0 + i] = p.b[i];
    }
    for k in 0..layout.i_set.len() {
        row[layout.eps0 + k] = 1.0;
    }
    for j in 0..layout.n_s {
        row[layout.f0 + j] = -obs.x_hat[j];
        row[layout.g0 + j] = obs.x_hat[j];
    }
    lp.push_row(row, Rel::Eq, dot(c_ring.full(), &obs.x_hat));

    // Tolerance row: e^T eps <= tau * e^T (f + g).
    if let Some(tau) = tau {
        let mut row = vec![0.0; layout.num_vars];
        for k in 0..layout.i_set.len() {
            row[layout.eps0 + k] = 1.0;
        }
        for j in 0..layout.n_s {
            row[layout.f0 + j] = -tau;
            row[layout.g0 + j] = -tau;
        }
        lp.push_row(row, Rel::Le, 0.0);
    }

    // Optimality cuts: (x̂ - x̄)^T (c̊ + f - g) <= 0 over structural columns.
    for cut in cuts {
        if cut.x_bar_struct.len() != layout.n_s {
            return Err(Error::InvalidCut(format!(
                "cut point has length {}, expected {}",
                cut.x_bar_struct.len(),
                layout.n_s
            )));
        }
        let mut row = vec![0.0; layout.num_vars];
        let mut rhs = 0.0;
        for j in 0..layout.n_s {
            let d = obs.x_hat[j] - cut.x_bar_struct[j];
            row[layout.f0 + j] = d;
            row[layout.g0 + j] = -d;
            rhs -= d * c_ring.full()[j];
        }
        lp.push_row(row, Rel::Le, rhs);
    }

    Ok((lp, layout))
}

/// Layout of the big-M MILP variables.
#[derive(Debug, Clone)]
pub struct BigMLayout {
    pub m: usize,
    pub n: usize,
    pub n_s: usize,
    pub i_set: Vec<usize>,
    pub i_bar: Vec<usize>,
    pub y0: usize,
    pub f0: usize,
    pub g0: usize,
    pub eps0: usize,
    pub s0: usize,
    pub delta0: usize,
    pub z0: usize,
    pub num_vars: usize,
    eps_pos: Vec<Option<usize>>,
    s_pos: Vec<Option<usize>>,
}

/// The complementarity MILP with binaries `z` and big-M linking rows.
#[derive(Debug, Clone)]
pub struct BigMModel {
    pub milp: MilpModel,
    pub layout: BigMLayout,
    pub big_m: f64,
}

/// Default big M: a generous multiple of the data magnitudes.
pub fn default_big_m(p: &ForwardProblem, obs: &Observation, c_ring: &ReferenceCost) -> f64 {
    let x_inf = obs.x_hat.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let c_inf = c_ring.full().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    10.0 * (1.0 + x_inf + c_inf * (1.0 + p.a.inf_norm()))
}

/// Build the big-M complementarity MILP.
pub fn build_bigm_milp(
    p: &ForwardProblem,
    obs: &Observation,
    supports: &SupportSets,
    c_ring: &ReferenceCost,
    big_m: f64,
) -> Result<BigMModel> {
    if !(big_m.is_finite() && big_m > 0.0) {
        return Err(Error::Schema(format!("big M must be finite and positive, got {big_m}")));
    }
    let m = p.num_rows();
    let n = p.num_cols();
    let n_s = p.structural_count;
    let y0 = 0;
    let f0 = m;
    let g0 = f0 + n_s;
    let eps0 = g0 + n_s;
    let s0 = eps0 + supports.i_set.len();
    let delta0 = s0 + supports.i_bar.len();
    let z0 = delta0 + n;
    let num_vars = z0 + n;

    let mut eps_pos = vec![None; n];
    for (k, &j) in supports.i_set.iter().enumerate() {
        eps_pos[j] = Some(eps0 + k);
    }
    let mut s_pos = vec![None; n];
    for (k, &j) in supports.i_bar.iter().enumerate() {
        s_pos[j] = Some(s0 + k);
    }

    let mut objective = vec![0.0; num_vars];
    for j in 0..n_s {
        objective[f0 + j] = 1.0;
        objective[g0 + j] = 1.0;
    }
    let mut lp = LpModel::new(objective);
    for i in 0..m {
        lp.free[y0 + i] = true;
    }
    for j in 0..n {
        lp.free[delta0 + j] = true;
        lp.upper[z0 + j] = Some(1.0);
    }

    // Dual rows, as in the concise LP.
    for j in 0..n {
        let mut row = vec![0.0; num_vars];
        for i in 0..m {
            row[y0 + i] = p.a.get(i, j);
        }
        if let Some(k) = eps_pos[j] {
            row[k] = 1.0 / obs.x_hat[j];
        }
        if let Some(k) = s_pos[j] {
            row[k] = 1.0;
        }
        if j < n_s {
            row[f0 + j] = -1.0;
            row[g0 + j] = 1.0;
        }
        lp.push_row(row, Rel::Eq, c_ring.full()[j]);
    }
    // A delta = 0.
    for i in 0..m {
        let mut row = vec![0.0; num_vars];
        for j in 0..n {
            row[delta0 + j] = p.a.get(i, j);
        }
        lp.push_row(row, Rel::Eq, 0.0);
    }
    // delta_j <= x̂_j.
    for j in 0..n {
        let mut row = vec![0.0; num_vars];
        row[delta0 + j] = 1.0;
        lp.push_row(row, Rel::Le, obs.x_hat[j]);
    }
    // Complementarity linking.
    for &j in &supports.i_set {
        let mut row = vec![0.0; num_vars];
        row[delta0 + j] = 1.0;
        row[z0 + j] = big_m;
        lp.push_row(row, Rel::Ge, obs.x_hat[j]);

        let mut row = vec![0.0; num_vars];
        row[eps_pos[j].unwrap()] = 1.0;
        row[z0 + j] = big_m;
        lp.push_row(row, Rel::Le, big_m);
    }
    for &j in &supports.i_bar {
        let mut row = vec![0.0; num_vars];
        row[s_pos[j].unwrap()] = 1.0;
        row[z0 + j] = big_m;
        lp.push_row(row, Rel::Le, big_m);

        let mut row = vec![0.0; num_vars];
        row[delta0 + j] = 1.0;
        row[z0 + j] = big_m;
        lp.push_row(row, Rel::Ge, 0.0);
    }

    let mut integer = vec![false; num_vars];
    for j in 0..n {
        integer[z0 + j] = true;
    }

    Ok(BigMModel {
        milp: MilpModel { lp, integer },
        layout: BigMLayout {
            m,
            n,
            n_s,
            i_set: supports.i_set.clone(),
            i_bar: supports.i_bar.clone(),
            y0,
            f0,
            g0,
            eps0,
            s0,
            delta0,
            z0,
            num_vars,
            eps_pos,
            s_pos,
        },
        big_m,
    })
}

/// Tolerance ladder keyed on the reference forward objective `c̊^T x̊`.
pub fn default_tau(reference_objective: f64) -> f64 {
    if reference_objective < 1e3 {
        1e-3
    } else if reference_objective < 1e4 {
        1e-4
    } else if reference_objective < 1e5 {
        1e-5
    } else {
        1e-6
    }
}

/// Default bi-objective weights over the support: `w_i = max(x̂_i, 2)`.
pub fn default_weights(obs: &Observation) -> Vec<f64> {
    obs.x_hat
        .iter()
        .filter(|&&v| v > SUPPORT_TOL)
        .map(|&v| v.max(2.0))
        .collect()
}

/// Solve the plain concise LP. Its optimum is always `ĉ = c̊` (deviation 0);
/// the value lies in the recovered certificate and gap.
pub fn solve_concise_model(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
) -> Result<InverseSolution> {
    solve_concise_model_with(p, obs, c_ring, &[], &InverseConfig::default())
}

pub fn solve_concise_model_with(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    cuts: &[OptimalityCut],
    cfg: &InverseConfig,
) -> Result<InverseSolution> {
    let started = Instant::now();
    let supports = partition_support(p, obs, cfg.support_tol);
    let (lp, layout) = build_master(p, obs, &supports, c_ring, None, None, cuts)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("concise LP ended {:?}", sol.status)));
    }
    let vars = layout.extract(&sol.x);
    finish(p, obs, c_ring, ModelKind::Concise, sol.objective, vars, None, cfg, started)
}

/// Solve the tolerance model: concise LP plus `e^T eps <= tau e^T (f+g)`.
pub fn solve_tolerance_model(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    tau: f64,
) -> Result<InverseSolution> {
    solve_tolerance_model_with(p, obs, c_ring, tau, &[], &InverseConfig::default())
}

pub fn solve_tolerance_model_with(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    tau: f64,
    cuts: &[OptimalityCut],
    cfg: &InverseConfig,
) -> Result<InverseSolution> {
    if !(tau > 0.0) {
        return Err(Error::Schema(format!("tau must be positive, got {tau}")));
    }
    let started = Instant::now();
    let supports = partition_support(p, obs, cfg.support_tol);
    let (lp, layout) = build_master(p, obs, &supports, c_ring, Some(tau), None, cuts)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::ToleranceInfeasible(tau)),
        LpStatus::Unbounded => {
            return Err(Error::Internal("tolerance master cannot be unbounded".into()))
        }
    }
    let vars = layout.extract(&sol.x);
    finish(p, obs, c_ring, ModelKind::Tolerance, sol.objective, vars, None, cfg, started)
}

/// Solve the bi-objective model: concise LP with `sum w_i eps_i` added to the
/// objective. `weights` aligns with the support set in ascending index order.
pub fn solve_biobjective_model(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    weights: &[f64],
) -> Result<InverseSolution> {
    solve_biobjective_model_with(p, obs, c_ring, weights, &[], &InverseConfig::default())
}

pub fn solve_biobjective_model_with(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    weights: &[f64],
    cuts: &[OptimalityCut],
    cfg: &InverseConfig,
) -> Result<InverseSolution> {
    let started = Instant::now();
    let supports = partition_support(p, obs, cfg.support_tol);
    let (lp, layout) = build_master(p, obs, &supports, c_ring, None, Some(weights), cuts)?;
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        other => return Err(Error::Internal(format!("bi-objective master ended {other:?}"))),
    }
    let vars = layout.extract(&sol.x);
    finish(p, obs, c_ring, ModelKind::BiObjective, sol.objective, vars, None, cfg, started)
}

/// Solve the big-M complementarity MILP. The default M is retried at 10x
/// (three times) whenever a variable lands on its cap.
pub fn solve_bigm_model(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
) -> Result<InverseSolution> {
    solve_bigm_model_with(p, obs, c_ring, &InverseConfig::default())
}

pub fn solve_bigm_model_with(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    cfg: &InverseConfig,
) -> Result<InverseSolution> {
    let started = Instant::now();
    let supports = partition_support(p, obs, cfg.support_tol);
    let mut big_m = cfg.big_m.unwrap_or_else(|| default_big_m(p, obs, c_ring));
    let mut last_err = None;
    for _attempt in 0..=3 {
        let model = build_bigm_milp(p, obs, &supports, c_ring, big_m)?;
        let milp = solve_milp(&model.milp, &cfg.master_limits)?;
        match milp.status {
            MilpStatus::Optimal | MilpStatus::Feasible => {}
            MilpStatus::Infeasible => {
                return Err(Error::Internal("big-M master is infeasible".into()))
            }
            MilpStatus::Limit => {
                return Err(Error::NumericalFailure(
                    "big-M master hit its limits with no incumbent".into(),
                ))
            }
        }
        if let Some(cap_hit) = cap_violation(&model, &milp) {
            last_err = Some(cap_hit);
            big_m *= 10.0;
            continue;
        }
        let lay = &model.layout;
        let x = &milp.x;
        let mut vars = MasterVars {
            y: x[lay.y0..lay.y0 + lay.m].to_vec(),
            eps: vec![0.0; lay.n],
            s: vec![0.0; lay.n],
            f: vec![0.0; lay.n],
            g: vec![0.0; lay.n],
        };
        for (i, pos) in lay.eps_pos.iter().enumerate() {
            if let Some(k) = pos {
                vars.eps[i] = x[*k];
            }
        }
        for (i, pos) in lay.s_pos.iter().enumerate() {
            if let Some(k) = pos {
                vars.s[i] = x[*k];
            }
        }
        for j in 0..lay.n_s {
            vars.f[j] = x[lay.f0 + j];
            vars.g[j] = x[lay.g0 + j];
        }
        let delta = x[lay.delta0..lay.delta0 + lay.n].to_vec();
        return finish(
            p,
            obs,
            c_ring,
            ModelKind::BigM,
            milp.upper_bound,
            vars,
            Some(delta),
            cfg,
            started,
        );
    }
    Err(last_err.unwrap_or(Error::BigMTooSmall(big_m)))
}

/// Detect solutions pinned against the big-M cap.
fn cap_violation(model: &BigMModel, milp: &MilpSolution) -> Option<Error> {
    let lay = &model.layout;
    let threshold = model.big_m * (1.0 - 1e-6);
    for k in 0..lay.i_set.len() {
        if milp.x[lay.eps0 + k] >= threshold {
            return Some(Error::BigMTooSmall(model.big_m));
        }
    }
    for k in 0..lay.i_bar.len() {
        if milp.x[lay.s0 + k] >= threshold {
            return Some(Error::BigMTooSmall(model.big_m));
        }
    }
    for j in 0..lay.n {
        if milp.x[lay.delta0 + j] <= -threshold {
            return Some(Error::BigMTooSmall(model.big_m));
        }
    }
    None
}

/// Common tail of every solve: pin slack costs to zero, recover the LP
/// certificate, price the cost with a capped forward MILP, compute metrics.
#[allow(clippy::too_many_arguments)]
fn finish(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    kind: ModelKind,
    master_objective: f64,
    vars: MasterVars,
    delta: Option<Vec<f64>>,
    cfg: &InverseConfig,
    started: Instant,
) -> Result<InverseSolution> {
    let n = p.num_cols();
    let mut c_hat = vec![0.0; n];
    for j in 0..n {
        c_hat[j] = c_ring.full()[j] + vars.f[j] - vars.g[j];
        if c_hat[j].abs() < 1e-12 {
            c_hat[j] = 0.0;
        }
    }
    for j in p.structural_count..n {
        c_hat[j] = 0.0;
    }

    let cert = lp_certificate(p, &c_hat)?;
    let (eps, s, y) = canonical_certificate(p, obs, &cert, cfg.support_tol);
    verify_gap_identity(obs, &c_hat, &eps, cert.z_lp)?;
    if let Some(delta) = &delta {
        verify_delta(p, obs, &c_hat, delta, cert.z_lp)?;
    }

    let forward = solve_milp(&p.milp_model(&c_hat), &cfg.forward_limits)?;
    let summary = ForwardSummary {
        upper_bound: forward.upper_bound,
        lower_bound: forward.lower_bound,
        optimal: forward.status == MilpStatus::Optimal,
        node_count: forward.node_count,
        incumbent: if forward.has_incumbent() {
            forward.x[..p.structural_count].to_vec()
        } else {
            Vec::new()
        },
        pool: forward
            .pool
            .iter()
            .map(|x| x[..p.structural_count].to_vec())
            .collect(),
    };

    let cpu_seconds = started.elapsed().as_secs_f64();
    let metrics = compute_metrics(
        obs,
        &c_hat,
        c_ring.full(),
        &vars.f,
        &vars.g,
        &eps,
        (summary.upper_bound, summary.lower_bound),
        cpu_seconds,
    );

    Ok(InverseSolution {
        model_kind: kind,
        c_hat,
        f: vars.f,
        g: vars.g,
        eps,
        s,
        y,
        master_objective,
        delta,
        lp_certificate: Some(cert),
        forward: Some(summary),
        metrics,
    })
}

fn lp_certificate(p: &ForwardProblem, c_hat: &[f64]) -> Result<LpCertificate> {
    let sol = solve_lp(&p.lp_model(c_hat))?;
    match sol.status {
        LpStatus::Optimal => Ok(LpCertificate { x_lp: sol.x, y_lp: sol.y, s_lp: sol.s, z_lp: sol.objective }),
        other => Err(Error::CertificateMismatch(format!(
            "forward LP under the recovered cost ended {other:?}"
        ))),
    }
}

/// Map a forward LP certificate onto `(eps, s, y)`:
/// `eps_i = x̂_i s^LP_i` over the support, `s_i = s^LP_i` elsewhere.
fn canonical_certificate(
    p: &ForwardProblem,
    obs: &Observation,
    cert: &LpCertificate,
    support_tol: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = p.num_cols();
    let mut eps = vec![0.0; n];
    let mut s = vec![0.0; n];
    for j in 0..n {
        if obs.x_hat[j] > support_tol {
            eps[j] = (obs.x_hat[j] * cert.s_lp[j]).max(0.0);
        } else {
            s[j] = cert.s_lp[j].max(0.0);
        }
    }
    (eps, s, cert.y_lp.clone())
}

fn verify_gap_identity(
    obs: &Observation,
    c_hat: &[f64],
    eps: &[f64],
    z_lp: f64,
) -> Result<()> {
    let eps_total: f64 = eps.iter().sum();
    let gap = dot(c_hat, &obs.x_hat) - z_lp;
    let tol = 1e-6 * (1.0 + z_lp.abs());
    if (eps_total - gap).abs() > tol {
        return Err(Error::CertificateMismatch(format!(
            "gap identity violated: e^T eps = {eps_total:.9e}, c^T x̂ - z_LP = {gap:.9e}"
        )));
    }
    Ok(())
}

/// Big-M extraction check: `x̂ - delta` must be LP-feasible and lie on the
/// optimal face of the forward LP.
fn verify_delta(
    p: &ForwardProblem,
    obs: &Observation,
    c_hat: &[f64],
    delta: &[f64],
    z_lp: f64,
) -> Result<()> {
    let x_lp: Vec<f64> = obs.x_hat.iter().zip(delta).map(|(x, d)| x - d).collect();
    for (j, &v) in x_lp.iter().enumerate() {
        if v < -1e-6 {
            return Err(Error::CertificateMismatch(format!(
                "x̂ - delta has negative entry {v:.3e} at column {j}"
            )));
        }
    }
    let ax = p.a.mul_vec(&x_lp);
    for (i, (axi, bi)) in ax.iter().zip(&p.b).enumerate() {
        if (axi - bi).abs() > 1e-6 * (1.0 + bi.abs()) {
            return Err(Error::CertificateMismatch(format!(
                "x̂ - delta violates row {i} by {:.3e}",
                (axi - bi).abs()
            )));
        }
    }
    let obj = dot(c_hat, &x_lp);
    if (obj - z_lp).abs() > 1e-6 * (1.0 + z_lp.abs()) {
        return Err(Error::CertificateMismatch(format!(
            "x̂ - delta has objective {obj:.9e}, LP optimum is {z_lp:.9e}"
        )));
    }
    Ok(())
}

/// Recover the forward LP certificate of an existing solution and re-check
/// the gap identity. Returns the certificate and the LP optimum.
pub fn recover_lp_certificate(
    p: &ForwardProblem,
    obs: &Observation,
    sol: &InverseSolution,
) -> Result<LpCertificate> {
    let cert = lp_certificate(p, &sol.c_hat)?;
    verify_gap_identity(obs, &sol.c_hat, &sol.eps, cert.z_lp)?;
    if let Some(delta) = &sol.delta {
        verify_delta(p, obs, &sol.c_hat, delta, cert.z_lp)?;
    }
    Ok(cert)
}

/// Move a fraction `alpha` of a supported slack's gap into its cost, then
/// fold slack costs back into the structural cost so the reported vector
/// keeps zero slack entries.
pub fn shift_epsilon(
    p: &ForwardProblem,
    obs: &Observation,
    sol: &InverseSolution,
    slack_index: usize,
    alpha: f64,
) -> Result<InverseSolution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidShift(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if slack_index < p.structural_count || slack_index >= p.num_cols() {
        return Err(Error::InvalidShift(format!(
            "index {slack_index} is not a slack column"
        )));
    }
    if obs.x_hat[slack_index] <= SUPPORT_TOL {
        return Err(Error::InvalidShift(format!(
            "slack {slack_index} is outside the support"
        )));
    }
    if sol.eps[slack_index] <= 0.0 {
        return Err(Error::InvalidShift(format!(
            "slack {slack_index} carries no gap to shift"
        )));
    }

    // New slack cost from the dual row: c_i = -alpha * eps_i / x̂_i.
    let mut c_with_slack = sol.c_hat.clone();
    c_with_slack[slack_index] = -alpha * sol.eps[slack_index] / obs.x_hat[slack_index];
    let (folded, _offset) = slack_cost_fold(p, &c_with_slack);
    let c_hat = p.pad_cost(&folded);

    let c_ring_struct: Vec<f64> = sol
        .c_hat
        .iter()
        .zip(&sol.f)
        .zip(&sol.g)
        .map(|((c, f), g)| c - f + g)
        .take(p.structural_count)
        .collect();
    rebuild_from_cost(p, obs, &c_ring_struct, c_hat, sol.model_kind)
}

/// Build a full solution record around an externally produced cost vector.
fn rebuild_from_cost(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring_struct: &[f64],
    c_hat: Vec<f64>,
    kind: ModelKind,
) -> Result<InverseSolution> {
    let c_ring = ReferenceCost::new(p, c_ring_struct)?;
    let n = p.num_cols();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    for j in 0..p.structural_count {
        let d = c_hat[j] - c_ring.full()[j];
        if d >= 0.0 {
            f[j] = d;
        } else {
            g[j] = -d;
        }
    }
    let master_objective = f.iter().chain(g.iter()).sum();
    let vars = MasterVars { y: vec![0.0; p.num_rows()], eps: vec![0.0; n], s: vec![0.0; n], f, g };
    finish(
        p,
        obs,
        &c_ring,
        kind,
        master_objective,
        vars,
        None,
        &InverseConfig::default(),
        Instant::now(),
    )
}

/// Fold slack costs into the structural cost: for every feasible `x`,
/// `folded^T x_struct + offset = c^T (x, sigma)`.
pub fn slack_cost_fold(p: &ForwardProblem, c_full: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(c_full.len(), p.num_cols());
    // Weighted row combination: weight_r = sign_r * c_sigma_r.
    let mut weights = vec![0.0; p.num_rows()];
    for r in 0..p.num_rows() {
        if let Some(sj) = p.slack_map[r] {
            weights[r] = p.a.get(r, sj) * c_full[sj];
        }
    }
    let mut folded: Vec<f64> = c_full[..p.structural_count].to_vec();
    for r in 0..p.num_rows() {
        if weights[r] != 0.0 {
            for j in 0..p.structural_count {
                folded[j] -= weights[r] * p.a.get(r, j);
            }
        }
    }
    let offset = dot(&weights, &p.b);
    (folded, offset)
}

/// Best positive rescaling of the structural cost toward the reference:
/// evaluates the piecewise-linear `||lambda c - c̊||_1` at its breakpoints
/// (plus 1) and returns the minimizing `(lambda, lambda * c)`.
pub fn scale_cost(c_hat_struct: &[f64], c_ring_struct: &[f64]) -> Result<(f64, Vec<f64>)> {
    assert_eq!(c_hat_struct.len(), c_ring_struct.len());
    if c_hat_struct.iter().all(|&v| v == 0.0) {
        return Err(Error::NoScale);
    }
    let norm_at = |lambda: f64| -> f64 {
        c_hat_struct
            .iter()
            .zip(c_ring_struct)
            .map(|(c, r)| (lambda * c - r).abs())
            .sum()
    };
    let mut candidates: Vec<f64> = vec![1.0];
    for (c, r) in c_hat_struct.iter().zip(c_ring_struct) {
        if *c != 0.0 {
            let bp = r / c;
            if bp > 0.0 {
                candidates.push(bp);
            }
        }
    }
    let mut best = (candidates[0], norm_at(candidates[0]));
    for &lambda in &candidates[1..] {
        let v = norm_at(lambda);
        if v < best.1 - 1e-12 {
            best = (lambda, v);
        }
    }
    let scaled = c_hat_struct.iter().map(|c| best.0 * c).collect();
    Ok((best.0, scaled))
}

/// Relative optimality gap of the observation against a forward lower bound.
pub fn relative_gap(obj_at_xhat: f64, lower_bound: f64) -> f64 {
    (obj_at_xhat - lower_bound).abs() / 1f64.max(obj_at_xhat.abs())
}

/// Relative norm, difference-of-norms form.
pub fn rnorm_diff_of_norms(c_hat: &[f64], c_ring: &[f64]) -> f64 {
    let a: f64 = c_hat.iter().map(|v| v.abs()).sum();
    let b: f64 = c_ring.iter().map(|v| v.abs()).sum();
    (a - b) / 1f64.max(b)
}

/// Relative norm, norm-of-difference form.
pub fn rnorm_norm_of_diff(c_hat: &[f64], c_ring: &[f64]) -> f64 {
    let d: f64 = c_hat.iter().zip(c_ring).map(|(a, b)| (a - b).abs()).sum();
    let b: f64 = c_ring.iter().map(|v| v.abs()).sum();
    d / 1f64.max(b)
}

/// Assemble metrics from a solution's pieces and forward bounds.
#[allow(clippy::too_many_arguments)]
pub fn compute_metrics(
    obs: &Observation,
    c_hat: &[f64],
    c_ring: &[f64],
    f: &[f64],
    g: &[f64],
    eps: &[f64],
    forward_bounds: (f64, f64),
    cpu_seconds: f64,
) -> Metrics {
    let obj_at_xhat = dot(c_hat, &obs.x_hat);
    let rgap = relative_gap(obj_at_xhat, forward_bounds.1);
    Metrics {
        rgap,
        rnorm_diff_of_norms: rnorm_diff_of_norms(c_hat, c_ring),
        rnorm_norm_of_diff: rnorm_norm_of_diff(c_hat, c_ring),
        eps_total: eps.iter().sum(),
        l1_deviation: f.iter().chain(g.iter()).sum(),
        cpu_seconds,
        optimal_at_e2: rgap <= 1e-2,
        optimal_at_e5: rgap <= 1e-5,
    }
}
