//! Seeded random instance generation for tests, property suites, and benches.
//!
//! Instances are built feasible by construction: an integer anchor point is
//! sampled first, rows are sampled with small integer coefficients, and each
//! right-hand side is set to the row value at the anchor plus a nonnegative
//! margin. Box upper bounds keep the region bounded and enumerable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{attach_observation, standardize, ForwardProblem, Observation, RawProblem, Rel};

/// Shape of a generated instance.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub num_vars: usize,
    pub num_rows: usize,
    /// Box upper bound for every variable.
    pub var_box: i64,
    /// Coefficients are drawn from [-coeff_range, coeff_range].
    pub coeff_range: i64,
    /// Reference costs are drawn from [-cost_range, cost_range].
    pub cost_range: i64,
    /// Fraction of integer variables (the rest stay continuous).
    pub integer_fraction: f64,
    /// Force the anchor (and hence the observation) strictly positive.
    pub positive_anchor: bool,
    /// Row margins are drawn from [0, margin]; 0 makes rows tight at the anchor.
    pub margin: i64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            num_vars: 4,
            num_rows: 3,
            var_box: 6,
            coeff_range: 4,
            cost_range: 5,
            integer_fraction: 1.0,
            positive_anchor: false,
            margin: 4,
        }
    }
}

/// A generated instance: the standardized problem, a feasible observation,
/// and a reference cost over the structural variables.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub raw: RawProblem,
    pub problem: ForwardProblem,
    pub observation: Observation,
    pub c_ring_struct: Vec<f64>,
    pub seed: u64,
}

/// Generate one instance. Deterministic in `(config, seed)`.
pub fn generate_instance(cfg: &GeneratorConfig, seed: u64) -> GeneratedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.num_vars;

    let integrality: Vec<bool> = (0..n)
        .map(|_| rng.gen_bool(cfg.integer_fraction.clamp(0.0, 1.0)))
        .collect();

    let anchor: Vec<i64> = (0..n)
        .map(|_| {
            if cfg.positive_anchor {
                rng.gen_range(1..=cfg.var_box)
            } else {
                rng.gen_range(0..=cfg.var_box)
            }
        })
        .collect();

    let mut raw = RawProblem::new(&format!("gen-{seed}"), n, integrality);
    raw.upper_bounds = vec![Some(cfg.var_box as f64); n];
    for _ in 0..cfg.num_rows {
        let coeffs: Vec<f64> = loop {
            let c: Vec<i64> = (0..n)
                .map(|_| rng.gen_range(-cfg.coeff_range..=cfg.coeff_range))
                .collect();
            if c.iter().any(|&v| v != 0) {
                break c.iter().map(|&v| v as f64).collect();
            }
        };
        let at_anchor: f64 = coeffs
            .iter()
            .zip(&anchor)
            .map(|(c, &x)| c * x as f64)
            .sum();
        let margin = rng.gen_range(0..=cfg.margin) as f64;
        raw.push_row(coeffs, Rel::Le, at_anchor + margin);
    }

    let c_ring_struct: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-cfg.cost_range..=cfg.cost_range) as f64)
        .collect();

    let problem = standardize(&raw).expect("generated problem is well-formed");
    let x_struct: Vec<f64> = anchor.iter().map(|&v| v as f64).collect();
    let observation =
        attach_observation(&problem, &x_struct).expect("anchor is feasible by construction");

    GeneratedInstance { raw, problem, observation, c_ring_struct, seed }
}
