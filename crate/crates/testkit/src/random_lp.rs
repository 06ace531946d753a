//! Random feasible LPs: an anchor point is sampled first and every row is
//! anchored to it, so the models are feasible by construction (the objective
//! may still be unbounded, which both solvers must agree on).

use invopt::engine::LpModel;
use invopt::model::Rel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random feasible LP with up to `max_rows` x `max_vars` shape.
pub fn random_feasible_lp(seed: u64, max_rows: usize, max_vars: usize) -> LpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_vars);
    let m = rng.gen_range(1..=max_rows);

    let anchor: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=5) as f64).collect();
    let mut lp = LpModel::new((0..n).map(|_| rng.gen_range(-10..=10) as f64).collect());
    for j in 0..n {
        if rng.gen_bool(0.15) {
            lp.free[j] = true;
        }
    }
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let at_anchor: f64 = coeffs.iter().zip(&anchor).map(|(a, b)| a * b).sum();
        let margin = rng.gen_range(0..=6) as f64;
        let (rel, rhs) = match rng.gen_range(0..4) {
            0 => (Rel::Eq, at_anchor),
            1 => (Rel::Ge, at_anchor - margin),
            _ => (Rel::Le, at_anchor + margin),
        };
        lp.push_row(coeffs, rel, rhs);
    }
    lp
}
