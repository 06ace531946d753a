//! Depth-first branch and bound for mixed-integer programs.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::INT_TOL;

use super::{solve_lp, LpModel, LpStatus};

/// An LP plus an integrality mask.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub lp: LpModel,
    pub integer: Vec<bool>,
}

/// Search limits. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct MilpLimits {
    pub max_nodes: Option<u64>,
    pub time_cap: Option<Duration>,
}

/// Outcome of a branch-and-bound run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Search exhausted; the incumbent is a true optimum.
    Optimal,
    /// A limit tripped with an incumbent in hand.
    Feasible,
    /// Search exhausted without any integer-feasible point.
    Infeasible,
    /// A limit tripped before any integer-feasible point was found.
    Limit,
}

/// Incumbent, bounds, and the pool of improving incumbents.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integer-feasible point found (empty when none).
    pub x: Vec<f64>,
    /// Incumbent objective (+inf when none).
    pub upper_bound: f64,
    /// Proven lower bound on the optimum.
    pub lower_bound: f64,
    /// Every improving incumbent, in discovery order; objectives strictly decrease.
    pub pool: Vec<Vec<f64>>,
    pub node_count: u64,
    pub wall_time: Duration,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.x.is_empty()
    }

    /// ub - lb; +inf when no incumbent exists.
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
    /// LP bound inherited from the parent; optimistic for the subtree.
    bound: f64,
}

pub(crate) fn solve(model: &MilpModel, limits: &MilpLimits) -> Result<MilpSolution> {
    model.lp.validate()?;
    if model.integer.len() != model.lp.num_vars() {
        return Err(Error::Schema("integrality mask length mismatch".into()));
    }
    let start = Instant::now();

    if !model.integer.iter().any(|&b| b) {
        // Degenerate case: plain LP.
        let sol = solve_lp(&model.lp)?;
        return match sol.status {
            LpStatus::Optimal => Ok(MilpSolution {
                status: MilpStatus::Optimal,
                upper_bound: sol.objective,
                lower_bound: sol.objective,
                pool: vec![sol.x.clone()],
                x: sol.x,
                node_count: 1,
                wall_time: start.elapsed(),
            }),
            LpStatus::Infeasible => Ok(infeasible_solution(1, start.elapsed())),
            LpStatus::Unbounded => Err(Error::Unbounded),
        };
    }

    let mut stack: Vec<Node> = vec![Node {
        lower: model.lp.lower.clone(),
        upper: model.lp.upper.clone(),
        bound: f64::NEG_INFINITY,
    }];
    let mut incumbent: Option<Vec<f64>> = None;
    let mut ub = f64::INFINITY;
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let mut node_count: u64 = 0;
    let mut limit_hit = false;

    while let Some(node) = stack.pop() {
        if node.bound >= ub - 1e-9 {
            continue;
        }
        if let Some(cap) = limits.max_nodes {
            if node_count >= cap {
                stack.push(node);
                limit_hit = true;
                break;
            }
        }
        if let Some(cap) = limits.time_cap {
            if start.elapsed() >= cap {
                stack.push(node);
                limit_hit = true;
                break;
            }
        }

        let mut lp = model.lp.clone();
        lp.lower = node.lower.clone();
        lp.upper = node.upper.clone();
        node_count += 1;
        let relax = solve_lp(&lp)?;
        match relax.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => {}
        }
        if relax.objective >= ub - 1e-9 {
            continue;
        }

        // Most fractional integer variable, lowest index on ties.
        let mut branch: Option<(usize, f64)> = None;
        let mut best_dist = INT_TOL;
        for (j, &is_int) in model.integer.iter().enumerate() {
            if is_int {
                let v = relax.x[j];
                let dist = (v - v.round()).abs();
                if dist > best_dist + 1e-12 {
                    best_dist = dist;
                    branch = Some((j, v));
                }
            }
        }

        match branch {
            None => {
                // Integer feasible: snap the integer coordinates.
                let mut x = relax.x.clone();
                for (j, &is_int) in model.integer.iter().enumerate() {
                    if is_int {
                        x[j] = x[j].round();
                    }
                }
                ub = relax.objective;
                incumbent = Some(x.clone());
                pool.push(x);
            }
            Some((j, v)) => {
                let floor = v.floor();
                // Push up-branch first so the down-branch pops first.
                let mut up = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    bound: relax.objective,
                };
                up.lower[j] = up.lower[j].max(floor + 1.0);
                stack.push(up);
                let mut down = Node { lower: node.lower, upper: node.upper, bound: relax.objective };
                down.upper[j] = Some(down.upper[j].map_or(floor, |u| u.min(floor)));
                stack.push(down);
            }
        }
    }

    let wall_time = start.elapsed();
    if limit_hit {
        let mut lb = ub;
        for node in &stack {
            if node.bound < lb {
                lb = node.bound;
            }
        }
        let status = if incumbent.is_some() { MilpStatus::Feasible } else { MilpStatus::Limit };
        Ok(MilpSolution {
            status,
            x: incumbent.unwrap_or_default(),
            upper_bound: ub,
            lower_bound: lb,
            pool,
            node_count,
            wall_time,
        })
    } else if let Some(x) = incumbent {
        Ok(MilpSolution {
            status: MilpStatus::Optimal,
            x,
            upper_bound: ub,
            lower_bound: ub,
            pool,
            node_count,
            wall_time,
        })
    } else {
        Ok(infeasible_solution(node_count, wall_time))
    }
}

fn infeasible_solution(node_count: u64, wall_time: Duration) -> MilpSolution {
    MilpSolution {
        status: MilpStatus::Infeasible,
        x: Vec::new(),
        upper_bound: f64::INFINITY,
        lower_bound: f64::INFINITY,
        pool: Vec::new(),
        node_count,
        wall_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rel;

    fn knapsack() -> MilpModel {
        // max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        // as a minimization with binaries.
        let mut lp = LpModel::new(vec![-5.0, -4.0, -3.0]);
        lp.push_row(vec![2.0, 3.0, 1.0], Rel::Le, 5.0);
        lp.push_row(vec![4.0, 1.0, 2.0], Rel::Le, 11.0);
        lp.push_row(vec![3.0, 4.0, 2.0], Rel::Le, 8.0);
        for j in 0..3 {
            lp.upper[j] = Some(1.0);
        }
        MilpModel { lp, integer: vec![true; 3] }
    }

    #[test]
    fn small_binary_knapsack() {
        let sol = solve(&knapsack(), &MilpLimits::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        // Optimum: a = b = 1 -> -9.
        assert!((sol.upper_bound - (-9.0)).abs() < 1e-9);
        assert_eq!(sol.x, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn pool_objectives_strictly_decrease() {
        let sol = solve(&knapsack(), &MilpLimits::default()).unwrap();
        let objs: Vec<f64> = sol
            .pool
            .iter()
            .map(|x| x.iter().zip(&[-5.0, -4.0, -3.0]).map(|(a, b)| a * b).sum())
            .collect();
        for w in objs.windows(2) {
            assert!(w[1] < w[0] - 1e-12);
        }
    }

    #[test]
    fn determinism() {
        let a = solve(&knapsack(), &MilpLimits::default()).unwrap();
        let b = solve(&knapsack(), &MilpLimits::default()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.node_count, b.node_count);
    }

    #[test]
    fn node_limit_reports_bounds() {
        let limits = MilpLimits { max_nodes: Some(1), time_cap: None };
        let sol = solve(&knapsack(), &limits).unwrap();
        assert!(matches!(sol.status, MilpStatus::Feasible | MilpStatus::Limit));
        assert!(sol.lower_bound <= sol.upper_bound + 1e-9);
        assert!(sol.node_count <= 1);
    }

    #[test]
    fn infeasible_milp() {
        let mut m = knapsack();
        m.lp.push_row(vec![0.0, 0.0, 0.0], Rel::Le, -1.0);
        let sol = solve(&m, &MilpLimits::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
    }
}
