//! Cutting-plane refinement around the tolerance model.
//!
//! The loop alternates a tolerance-model master with a time-capped forward
//! MILP under the recovered cost. Every improving incumbent of the forward
//! solve contributes an optimality cut `c^T x̂ <= c^T x̄`, valid for every
//! cost that renders the observation optimal. The bootstrap master runs at a
//! small tau; afterwards tau restarts at 1 and swings up on odd iterations
//! and down on even ones. The loop stops when the absolute gap
//! `ĉ^T x̂ - lb` drops below the threshold, or on iteration / time limits.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::engine::MilpLimits;
use crate::error::{Error, Result};
use crate::inverse::{
    solve_tolerance_model_with, InverseConfig, InverseSolution, OptimalityCut,
};
use crate::model::{ForwardProblem, Observation, ReferenceCost, FEAS_TOL, INT_TOL};

/// Loop parameters with the defaults used throughout.
#[derive(Debug, Clone)]
pub struct CutPlaneConfig {
    /// Bootstrap tolerance.
    pub tau_init: f64,
    /// Odd-iteration multiplier.
    pub tau_up: f64,
    /// Even-iteration multiplier.
    pub tau_down: f64,
    /// Wall-clock cap per forward MILP solve.
    pub forward_time_cap: Duration,
    /// Wall-clock cap for the whole loop.
    pub total_time_cap: Duration,
    pub max_iters: usize,
    /// Absolute-gap convergence threshold.
    pub abs_gap_stop: f64,
}

impl Default for CutPlaneConfig {
    fn default() -> Self {
        CutPlaneConfig {
            tau_init: 0.01,
            tau_up: 1.25,
            tau_down: 0.75,
            forward_time_cap: Duration::from_secs(30),
            total_time_cap: Duration::from_secs(3600),
            max_iters: 1000,
            abs_gap_stop: 1e-2,
        }
    }
}

impl CutPlaneConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tau_init > 0.0) {
            return Err(Error::Schema("tau_init must be positive".into()));
        }
        if !(self.tau_up > 1.0 && self.tau_down > 0.0 && self.tau_down < 1.0) {
            return Err(Error::Schema("need tau_up > 1 > tau_down > 0".into()));
        }
        if self.forward_time_cap.is_zero() || self.total_time_cap.is_zero() {
            return Err(Error::Schema("time caps must be positive".into()));
        }
        if !(self.abs_gap_stop > 0.0) {
            return Err(Error::Schema("abs_gap_stop must be positive".into()));
        }
        Ok(())
    }
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutStatus {
    Converged,
    IterLimit,
    TimeLimit,
}

/// One master + forward round. `k = 0` is the bootstrap.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub tau: f64,
    pub master_norm: f64,
    pub forward_gap: f64,
    pub cuts: usize,
    pub cpu_seconds: f64,
}

/// Cut pool, iteration log, and the best cost seen so far.
#[derive(Debug, Clone, Default)]
pub struct CutPlaneState {
    pub cuts: Vec<OptimalityCut>,
    pub log: Vec<IterationRecord>,
    pub best_c_hat: Vec<f64>,
    pub best_gap: f64,
    /// Masters that came back infeasible and forced a tau bump.
    pub infeasible_retries: usize,
}

impl CutPlaneState {
    fn new() -> Self {
        CutPlaneState { best_gap: f64::INFINITY, ..Default::default() }
    }
}

/// The tau update: up by `tau_up` on odd iterations, down by `tau_down` on
/// even ones, matching the published schedule constants.
pub fn tau_schedule(k: usize, tau_prev: f64) -> f64 {
    schedule_with(1.25, 0.75, k, tau_prev)
}

fn schedule_with(up: f64, down: f64, k: usize, tau_prev: f64) -> f64 {
    if k % 2 == 1 {
        up * tau_prev
    } else {
        down * tau_prev
    }
}

/// Validate and append an optimality cut. Returns false when the point is
/// vacuous (equals the observation) or already pooled.
pub fn add_optimality_cut(
    p: &ForwardProblem,
    obs: &Observation,
    state: &mut CutPlaneState,
    x_bar_struct: &[f64],
) -> Result<bool> {
    if x_bar_struct.len() != p.structural_count {
        return Err(Error::InvalidCut(format!(
            "cut point has length {}, expected {}",
            x_bar_struct.len(),
            p.structural_count
        )));
    }
    for r in 0..p.num_rows() {
        let dot: f64 = (0..p.structural_count)
            .map(|j| p.a.get(r, j) * x_bar_struct[j])
            .sum();
        let gap = p.b[r] - dot;
        match p.slack_map[r] {
            Some(sj) => {
                if p.a.get(r, sj) * gap < -FEAS_TOL {
                    return Err(Error::InvalidCut(format!("cut point violates row {r}")));
                }
            }
            None => {
                if gap.abs() > FEAS_TOL {
                    return Err(Error::InvalidCut(format!("cut point violates row {r}")));
                }
            }
        }
    }
    for (j, &v) in x_bar_struct.iter().enumerate() {
        if v < -FEAS_TOL {
            return Err(Error::InvalidCut(format!("cut point has negative entry {j}")));
        }
        if p.integrality[j] && (v - v.round()).abs() > INT_TOL {
            return Err(Error::InvalidCut(format!("cut point is fractional at {j}")));
        }
    }
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
    if same(x_bar_struct, &obs.x_hat[..p.structural_count]) {
        return Ok(false);
    }
    if state.cuts.iter().any(|c| same(&c.x_bar_struct, x_bar_struct)) {
        return Ok(false);
    }
    state.cuts.push(OptimalityCut { x_bar_struct: x_bar_struct.to_vec() });
    Ok(true)
}

/// Run the refinement loop. `observer` sees each iteration record as it is
/// produced (the CLI streams them as line-delimited JSON).
pub fn run(
    p: &ForwardProblem,
    obs: &Observation,
    c_ring: &ReferenceCost,
    cfg: &CutPlaneConfig,
    mut observer: Option<&mut dyn FnMut(&IterationRecord)>,
) -> Result<(InverseSolution, CutPlaneState, CutStatus)> {
    cfg.validate()?;
    let started = Instant::now();
    let mut state = CutPlaneState::new();

    let remaining = |started: Instant| {
        cfg.total_time_cap
            .checked_sub(started.elapsed())
            .unwrap_or(Duration::ZERO)
    };
    let solve_master = |tau: f64, cuts: &[OptimalityCut], started: Instant| {
        let inv_cfg = InverseConfig {
            forward_limits: MilpLimits {
                max_nodes: None,
                time_cap: Some(cfg.forward_time_cap.min(remaining(started).max(Duration::from_millis(1)))),
            },
            ..Default::default()
        };
        solve_tolerance_model_with(p, obs, c_ring, tau, cuts, &inv_cfg)
    };

    let push_record = |state: &mut CutPlaneState,
                           observer: &mut Option<&mut dyn FnMut(&IterationRecord)>,
                           k: usize,
                           tau: f64,
                           sol: &InverseSolution,
                           gap: f64,
                           started: Instant| {
        let rec = IterationRecord {
            k,
            tau,
            master_norm: sol.l1_deviation(),
            forward_gap: gap,
            cuts: state.cuts.len(),
            cpu_seconds: started.elapsed().as_secs_f64(),
        };
        if let Some(obs_fn) = observer.as_mut() {
            obs_fn(&rec);
        }
        state.log.push(rec);
    };

    let absolute_gap = |sol: &InverseSolution| -> f64 {
        let lb = sol
            .forward
            .as_ref()
            .map(|f| f.lower_bound)
            .unwrap_or(f64::NEG_INFINITY);
        sol.obj_at(obs) - lb
    };
    let harvest_cuts = |state: &mut CutPlaneState, sol: &InverseSolution| -> Result<()> {
        if let Some(fwd) = &sol.forward {
            for point in &fwd.pool {
                add_optimality_cut(p, obs, state, point)?;
            }
        }
        Ok(())
    };
    let better = |state: &CutPlaneState, gap: f64| -> bool { gap < state.best_gap - 1e-12 };

    // Bootstrap master at tau_init.
    let mut best: InverseSolution;
    let sol = solve_master(cfg.tau_init, &[], started)?;
    let gap = absolute_gap(&sol);
    push_record(&mut state, &mut observer, 0, cfg.tau_init, &sol, gap, started);
    state.best_c_hat = sol.c_hat.clone();
    state.best_gap = gap;
    best = sol.clone();
    if gap < cfg.abs_gap_stop {
        return Ok((sol, state, CutStatus::Converged));
    }
    harvest_cuts(&mut state, &sol)?;

    // Refinement loop: tau restarts at 1 and oscillates by the schedule.
    let mut tau = 1.0;
    for k in 1..=cfg.max_iters {
        if remaining(started).is_zero() {
            return Ok((best, state, CutStatus::TimeLimit));
        }
        tau = schedule_with(cfg.tau_up, cfg.tau_down, k, tau);
        let sol = match solve_master(tau, &state.cuts, started) {
            Ok(sol) => sol,
            Err(Error::ToleranceInfeasible(_)) => {
                // Not covered by the schedule: relax and try the next round.
                state.infeasible_retries += 1;
                tau *= 4.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let gap = absolute_gap(&sol);
        push_record(&mut state, &mut observer, k, tau, &sol, gap, started);
        if better(&state, gap) {
            state.best_c_hat = sol.c_hat.clone();
            state.best_gap = gap;
            best = sol.clone();
        }
        if gap < cfg.abs_gap_stop {
            return Ok((sol, state, CutStatus::Converged));
        }
        harvest_cuts(&mut state, &sol)?;
    }
    Ok((best, state, CutStatus::IterLimit))
}
