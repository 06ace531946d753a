//! A deliberately plain textbook tableau simplex used as an independent
//! objective oracle: Bland's rule only, no certificate extraction, no basis
//! refactorization. Agreement with the production engine on random models is
//! the evidence the engine tests rely on.

use invopt::engine::LpModel;
use invopt::model::Rel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NaiveOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

/// Solve `min c^T x` over the model's rows and bounds with a two-phase
/// Bland-rule tableau. Returns the optimal objective only.
pub fn solve(model: &LpModel) -> NaiveOutcome {
    let n = model.num_vars();

    // Columns: x_j (plus a negated twin for free variables).
    let mut col_var: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        col_var.push((j, 1.0));
        if model.free[j] {
            col_var.push((j, -1.0));
        }
    }

    // Rows: declared rows plus bound rows, normalized to rhs >= 0.
    let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
    let mut add_row = |coeffs: Vec<f64>, rel: Rel, rhs: f64| {
        if rhs < 0.0 {
            let flipped = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
            rows.push((coeffs.iter().map(|v| -v).collect(), flipped, -rhs));
        } else {
            rows.push((coeffs, rel, rhs));
        }
    };
    for row in &model.rows {
        let coeffs = col_var.iter().map(|&(j, s)| row.coeffs[j] * s).collect();
        add_row(coeffs, row.rel, row.rhs);
    }
    for (j, u) in model.upper.iter().enumerate() {
        if let Some(u) = u {
            let coeffs = col_var.iter().map(|&(v, s)| if v == j { s } else { 0.0 }).collect();
            add_row(coeffs, Rel::Le, *u);
        }
    }
    for (j, &l) in model.lower.iter().enumerate() {
        if l != 0.0 {
            let coeffs = col_var.iter().map(|&(v, s)| if v == j { s } else { 0.0 }).collect();
            add_row(coeffs, Rel::Ge, l);
        }
    }

    let m = rows.len();
    let nv = col_var.len();
    // Layout: structural | slack/surplus | artificial.
    let mut ncols = nv;
    let mut slack_of = vec![None; m];
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        if *rel != Rel::Eq {
            slack_of[i] = Some(ncols);
            ncols += 1;
        }
    }
    let first_art = ncols;
    let mut art_of = vec![None; m];
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        if *rel != Rel::Le {
            art_of[i] = Some(ncols);
            ncols += 1;
        }
    }

    let mut t = vec![vec![0.0; ncols + 1]; m];
    let mut basis = vec![0usize; m];
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..nv].copy_from_slice(coeffs);
        if let Some(sc) = slack_of[i] {
            t[i][sc] = if *rel == Rel::Le { 1.0 } else { -1.0 };
        }
        if let Some(ac) = art_of[i] {
            t[i][ac] = 1.0;
        }
        t[i][ncols] = *rhs;
        basis[i] = art_of[i].or(slack_of[i]).unwrap();
    }

    let reduced = |t: &Vec<Vec<f64>>, basis: &Vec<usize>, costs: &Vec<f64>| -> (Vec<f64>, f64) {
        let mut d = costs.clone();
        let mut z = 0.0;
        for (i, &b) in basis.iter().enumerate() {
            if costs[b] != 0.0 {
                z += costs[b] * t[i][ncols];
                for j in 0..ncols {
                    d[j] -= costs[b] * t[i][j];
                }
            }
        }
        (d, z)
    };

    // Bland iteration until no entering column; `enterable` filters columns.
    let mut iterate = |t: &mut Vec<Vec<f64>>,
                       basis: &mut Vec<usize>,
                       costs: &Vec<f64>,
                       allow_art: bool|
     -> Option<()> {
        loop {
            let (d, _) = reduced(t, basis, costs);
            let entering = (0..ncols)
                .find(|&j| (allow_art || j < first_art) && d[j] < -EPS);
            let Some(e) = entering else { return Some(()) };
            // Ratio test; rows holding a zero-valued basic artificial leave
            // first so artificials never climb back above zero.
            let mut pick: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..m {
                if basis[i] >= first_art && t[i][ncols].abs() <= EPS && t[i][e].abs() > EPS {
                    pick = Some(i);
                    best = 0.0;
                    break;
                }
                if t[i][e] > EPS {
                    let ratio = t[i][ncols].max(0.0) / t[i][e];
                    if ratio < best - 1e-12
                        || (ratio < best + 1e-12
                            && pick.is_some_and(|p| basis[i] < basis[p]))
                    {
                        best = ratio;
                        pick = Some(i);
                    }
                }
            }
            let r = pick?;
            let piv = t[r][e];
            for v in t[r].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i != r && t[i][e] != 0.0 {
                    let f = t[i][e];
                    for j in 0..=ncols {
                        t[i][j] -= f * t[r][j];
                    }
                }
            }
            basis[r] = e;
        }
    };

    // Phase 1.
    let mut costs = vec![0.0; ncols];
    for j in first_art..ncols {
        costs[j] = 1.0;
    }
    if iterate(&mut t, &mut basis, &costs, true).is_none() {
        return NaiveOutcome::Unbounded; // cannot happen in phase 1
    }
    let (_, z1) = reduced(&t, &basis, &costs);
    let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
    if z1 > 1e-7 * scale {
        return NaiveOutcome::Infeasible;
    }

    // Phase 2: real costs on structural columns, artificials barred.
    let mut costs = vec![0.0; ncols];
    for (k, &(j, s)) in col_var.iter().enumerate() {
        costs[k] = model.objective[j] * s;
    }
    if iterate(&mut t, &mut basis, &costs, false).is_none() {
        return NaiveOutcome::Unbounded;
    }
    let (_, z2) = reduced(&t, &basis, &costs);
    NaiveOutcome::Optimal(z2)
}
