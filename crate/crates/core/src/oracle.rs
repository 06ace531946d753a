//! Brute-force ground truth for desk-scale verification.
//!
//! Enumerates the integer-feasible points of a bounded problem, evaluates
//! the forward objective exactly over them, and certifies inverse solutions
//! by comparing the observed point against the true optimum. With the
//! `parallel` feature (on by default) enumeration fans out over the first
//! integer variable's range; results are merged in lexicographic order, so
//! both paths return identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::engine::{solve_lp, LpStatus};
use crate::error::{Error, Result};
use crate::model::{ForwardProblem, Observation, Rel, FEAS_TOL};

/// Default cap on the enumerated lattice size.
pub const DEFAULT_BOX_LIMIT: u64 = 1_000_000;

/// An integer assignment over the integer structural variables, in index order.
pub type IntegerPoint = Vec<i64>;

/// Outcome of [`certify_inverse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certification {
    /// The observation attains the exact forward optimum (within tolerance).
    Optimal,
    /// The observation is suboptimal by this exact gap.
    Gap(f64),
}

impl Certification {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Certification::Optimal)
    }

    pub fn gap(&self) -> f64 {
        match self {
            Certification::Optimal => 0.0,
            Certification::Gap(g) => *g,
        }
    }
}

/// Integer ranges of the integer structural variables, from LP bounds.
struct Box {
    int_vars: Vec<usize>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

fn integer_box(p: &ForwardProblem, box_limit: u64) -> Result<Box> {
    let int_vars: Vec<usize> = (0..p.structural_count)
        .filter(|&j| p.integrality[j])
        .collect();
    let mut lo = Vec::with_capacity(int_vars.len());
    let mut hi = Vec::with_capacity(int_vars.len());
    let mut size: u64 = 1;
    for &j in &int_vars {
        let mut bounds = [0i64; 2];
        for (slot, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let mut c = vec![0.0; p.num_cols()];
            c[j] = sign;
            let sol = solve_lp(&p.lp_model(&c))?;
            match sol.status {
                LpStatus::Optimal => {
                    let v = sol.x[j];
                    bounds[slot] = if sign > 0.0 {
                        (v - FEAS_TOL).ceil() as i64
                    } else {
                        (v + FEAS_TOL).floor() as i64
                    };
                }
                LpStatus::Unbounded => {
                    return Err(Error::SizeLimit(format!("variable {j} is unbounded")));
                }
                LpStatus::Infeasible => {
                    // Empty region: any empty range works.
                    bounds = [0, -1];
                    break;
                }
            }
        }
        let width = (bounds[1] - bounds[0] + 1).max(0) as u64;
        size = size.saturating_mul(width.max(1));
        if size > box_limit {
            return Err(Error::SizeLimit(format!(
                "lattice exceeds the {box_limit}-point cap"
            )));
        }
        lo.push(bounds[0]);
        hi.push(bounds[1]);
    }
    Ok(Box { int_vars, lo, hi })
}

/// True when fixing the integer variables to `point` leaves the problem
/// feasible; pure-integer problems are checked by direct arithmetic,
/// mixed ones by a feasibility LP over the remaining variables.
fn assignment_feasible(p: &ForwardProblem, bx: &Box, point: &[i64]) -> Result<bool> {
    let pure = bx.int_vars.len() == p.structural_count;
    if pure {
        for r in 0..p.num_rows() {
            let dot: f64 = bx
                .int_vars
                .iter()
                .zip(point)
                .map(|(&j, &v)| p.a.get(r, j) * v as f64)
                .sum();
            let gap = p.b[r] - dot;
            match p.slack_map[r] {
                Some(sj) => {
                    if p.a.get(r, sj) * gap < -FEAS_TOL {
                        return Ok(false);
                    }
                }
                None => {
                    if gap.abs() > FEAS_TOL {
                        return Ok(false);
                    }
                }
            }
        }
        return Ok(true);
    }
    Ok(profile_lp(p, bx, point, None)?.is_some())
}

/// Solve the continuous profile of an integer assignment: minimize `c` (or 0)
/// over the non-fixed columns. Returns None when infeasible.
fn profile_lp(
    p: &ForwardProblem,
    bx: &Box,
    point: &[i64],
    c: Option<&[f64]>,
) -> Result<Option<(f64, Vec<f64>)>> {
    let n = p.num_cols();
    let fixed: Vec<Option<f64>> = {
        let mut f = vec![None; n];
        for (&j, &v) in bx.int_vars.iter().zip(point) {
            f[j] = Some(v as f64);
        }
        f
    };
    let cont: Vec<usize> = (0..n).filter(|j| fixed[*j].is_none()).collect();
    let mut lp = crate::engine::LpModel::new(
        cont.iter()
            .map(|&j| c.map_or(0.0, |c| c[j]))
            .collect(),
    );
    for r in 0..p.num_rows() {
        let mut rhs = p.b[r];
        for (j, f) in fixed.iter().enumerate() {
            if let Some(v) = f {
                rhs -= p.a.get(r, j) * v;
            }
        }
        lp.push_row(cont.iter().map(|&j| p.a.get(r, j)).collect(), Rel::Eq, rhs);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut full = vec![0.0; n];
            for (j, f) in fixed.iter().enumerate() {
                if let Some(v) = f {
                    full[j] = *v;
                }
            }
            for (k, &j) in cont.iter().enumerate() {
                full[j] = sol.x[k];
            }
            let base: f64 = c.map_or(0.0, |c| {
                fixed
                    .iter()
                    .enumerate()
                    .filter_map(|(j, f)| f.map(|v| c[j] * v))
                    .sum()
            });
            Ok(Some((base + sol.objective, full)))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

fn enumerate_with(
    p: &ForwardProblem,
    bx: &Box,
    first: i64,
) -> Result<Vec<IntegerPoint>> {
    let k = bx.int_vars.len();
    let mut out = Vec::new();
    let mut point = vec![0i64; k];
    point[0] = first;
    fn rec(
        p: &ForwardProblem,
        bx: &Box,
        point: &mut Vec<i64>,
        depth: usize,
        out: &mut Vec<IntegerPoint>,
    ) -> Result<()> {
        if depth == point.len() {
            if assignment_feasible(p, bx, point)? {
                out.push(point.clone());
            }
            return Ok(());
        }
        for v in bx.lo[depth]..=bx.hi[depth] {
            point[depth] = v;
            rec(p, bx, point, depth + 1, out)?;
        }
        Ok(())
    }
    if k == 1 {
        if assignment_feasible(p, bx, &point)? {
            out.push(point);
        }
        return Ok(out);
    }
    rec(p, bx, &mut point, 1, &mut out)?;
    Ok(out)
}

/// Sequential enumeration of the integer-feasible assignments.
pub fn enumerate_integer_points_seq(
    p: &ForwardProblem,
    box_limit: u64,
) -> Result<Vec<IntegerPoint>> {
    let bx = integer_box(p, box_limit)?;
    if bx.int_vars.is_empty() {
        return Err(Error::SizeLimit("problem has no integer variables".into()));
    }
    let mut out = Vec::new();
    for first in bx.lo[0]..=bx.hi[0] {
        out.extend(enumerate_with(p, &bx, first)?);
    }
    out.sort();
    Ok(out)
}

/// Enumerate the integer-feasible assignments, in lexicographic order.
///
/// Partitioned over the first integer variable's range when the `parallel`
/// feature is enabled.
pub fn enumerate_integer_points(p: &ForwardProblem, box_limit: u64) -> Result<Vec<IntegerPoint>> {
    #[cfg(feature = "parallel")]
    {
        let bx = integer_box(p, box_limit)?;
        if bx.int_vars.is_empty() {
            return Err(Error::SizeLimit("problem has no integer variables".into()));
        }
        let chunks: Vec<Result<Vec<IntegerPoint>>> = (bx.lo[0]..=bx.hi[0])
            .into_par_iter()
            .map(|first| enumerate_with(p, &bx, first))
            .collect();
        let mut out = Vec::new();
        for chunk in chunks {
            out.extend(chunk?);
        }
        out.sort();
        Ok(out)
    }
    #[cfg(not(feature = "parallel"))]
    {
        enumerate_integer_points_seq(p, box_limit)
    }
}

/// Exact forward optimum by enumeration: the optimal value and every
/// integer assignment attaining it (within `1e-9` absolute).
pub fn brute_force_forward(
    p: &ForwardProblem,
    c: &[f64],
    box_limit: u64,
) -> Result<(f64, Vec<IntegerPoint>)> {
    assert_eq!(c.len(), p.num_cols());
    let bx = integer_box(p, box_limit)?;
    let points = enumerate_integer_points(p, box_limit)?;
    if points.is_empty() {
        return Err(Error::SizeLimit("no integer-feasible points to optimize over".into()));
    }
    let pure = bx.int_vars.len() == p.structural_count;
    let mut values = Vec::with_capacity(points.len());
    for point in &points {
        let v = if pure {
            point_value(p, &bx, point, c)
        } else {
            profile_lp(p, &bx, point, Some(c))?
                .ok_or_else(|| Error::Internal("enumerated point lost feasibility".into()))?
                .0
        };
        values.push(v);
    }
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let argmin = points
        .into_iter()
        .zip(&values)
        .filter(|(_, &v)| v <= best + 1e-9)
        .map(|(pt, _)| pt)
        .collect();
    Ok((best, argmin))
}

/// Objective of a pure-integer assignment, including slack-cost terms.
fn point_value(p: &ForwardProblem, bx: &Box, point: &[i64], c: &[f64]) -> f64 {
    let mut v: f64 = bx
        .int_vars
        .iter()
        .zip(point)
        .map(|(&j, &x)| c[j] * x as f64)
        .sum();
    for r in 0..p.num_rows() {
        if let Some(sj) = p.slack_map[r] {
            if c[sj] != 0.0 {
                let dot: f64 = bx
                    .int_vars
                    .iter()
                    .zip(point)
                    .map(|(&j, &x)| p.a.get(r, j) * x as f64)
                    .sum();
                v += c[sj] * (p.a.get(r, sj) * (p.b[r] - dot));
            }
        }
    }
    v
}

/// Certify whether the observation is forward-optimal under `c_hat`.
pub fn certify_inverse(
    p: &ForwardProblem,
    obs: &Observation,
    c_hat: &[f64],
    tol: f64,
    box_limit: u64,
) -> Result<Certification> {
    let (best, _) = brute_force_forward(p, c_hat, box_limit)?;
    let at_obs: f64 = c_hat.iter().zip(&obs.x_hat).map(|(a, b)| a * b).sum();
    let gap = at_obs - best;
    if gap <= tol {
        Ok(Certification::Optimal)
    } else {
        Ok(Certification::Gap(gap))
    }
}
