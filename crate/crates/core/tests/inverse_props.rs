//! Randomized property suites: closed-form feasibility, oracle agreement,
//! the gap identity across every model, tolerance-row satisfaction, and
//! upper-level dominance. The acceptance suite runs larger versions; these
//! keep day-to-day runs fast.

use invopt::closed_form::{
    iop2_closed_form, iop2_objective_oracle, iop2_residual, iop_closed_form, iop_residual,
};
use invopt::generator::{generate_instance, GeneratorConfig};
use invopt::inverse::{
    default_tau, default_weights, solve_biobjective_model, solve_bigm_model, solve_concise_model,
    solve_tolerance_model,
};
use invopt::linear::min_gap_lp;
use invopt::model::{partition_support, ReferenceCost, SUPPORT_TOL};
use proptest::prelude::*;

fn interior_cfg() -> GeneratorConfig {
    GeneratorConfig {
        num_vars: 4,
        num_rows: 3,
        var_box: 5,
        positive_anchor: true,
        margin: 4,
        ..Default::default()
    }
}

#[test]
fn closed_forms_are_feasible_on_random_instances() {
    let cfg = interior_cfg();
    for seed in 0..60 {
        let inst = generate_instance(&cfg, seed);
        let sol = iop_closed_form(&inst.problem, &inst.observation, None).unwrap();
        assert_eq!(sol.objective, 0.0, "seed {seed}");
        let res = iop_residual(&inst.problem, &inst.observation, &sol);
        assert!(res <= 1e-9, "seed {seed}: residual {res}");

        let sol2 = iop2_closed_form(&inst.problem, &inst.observation).unwrap();
        let res2 = iop2_residual(&inst.problem, &inst.observation, &sol2);
        assert!(res2 <= 1e-9, "seed {seed}: residual {res2}");
        assert!((sol2.c_norm() - 1.0).abs() <= 1e-9, "seed {seed}");
    }
}

#[test]
fn closed_form_matches_sign_pattern_oracle() {
    let cfg = interior_cfg();
    let mut interior = 0;
    for seed in 0..25 {
        let inst = generate_instance(&cfg, seed);
        let sol = iop2_closed_form(&inst.problem, &inst.observation).unwrap();
        let oracle = iop2_objective_oracle(&inst.problem, &inst.observation).unwrap();
        assert!(
            (sol.objective - oracle).abs() <= 1e-7,
            "seed {seed}: closed form {} vs oracle {oracle}",
            sol.objective
        );
        if sol.objective > 0.0 {
            interior += 1;
        }
    }
    assert!(interior > 5, "too few interior cases: {interior}");
}

#[test]
fn gap_identity_holds_for_every_model() {
    let cfg = GeneratorConfig { num_vars: 4, num_rows: 3, var_box: 5, ..Default::default() };
    for seed in 0..25 {
        let inst = generate_instance(&cfg, seed);
        let p = &inst.problem;
        let obs = &inst.observation;
        let c_ring = ReferenceCost::new(p, &inst.c_ring_struct).unwrap();

        // The solves themselves enforce the identity and re-derive the
        // certificate; any violation comes back as an error.
        let sols = [
            solve_concise_model(p, obs, &c_ring).unwrap(),
            solve_tolerance_model(p, obs, &c_ring, 1e-3).unwrap(),
            solve_biobjective_model(p, obs, &c_ring, &default_weights(obs)).unwrap(),
            solve_bigm_model(p, obs, &c_ring).unwrap(),
        ];
        for sol in &sols {
            let cert = sol.lp_certificate.as_ref().unwrap();
            let gap = sol.obj_at(obs) - cert.z_lp;
            assert!(
                (sol.eps_total() - gap).abs() <= 1e-6 * (1.0 + cert.z_lp.abs()),
                "seed {seed} {:?}: eps {} vs gap {gap}",
                sol.model_kind,
                sol.eps_total()
            );
            // Recovered primal point is feasible with tiny residuals.
            let ax = p.a.mul_vec(&cert.x_lp);
            for (axi, bi) in ax.iter().zip(&p.b) {
                assert!((axi - bi).abs() <= 1e-6 * (1.0 + bi.abs()));
            }
            assert!(cert.x_lp.iter().all(|&v| v >= -1e-7));
            // Strong duality of the recovered pair.
            let comp: f64 = cert.x_lp.iter().zip(&cert.s_lp).map(|(x, s)| x * s).sum();
            assert!(comp.abs() <= 1e-6 * (1.0 + cert.z_lp.abs()));
        }

        // Upper-level dominance: the concise model never deviates.
        assert!(sols[0].l1_deviation() <= 1e-9, "seed {seed}");
        // Tolerance row satisfied.
        assert!(
            sols[1].eps_total() <= 1e-3 * sols[1].l1_deviation() + 1e-9,
            "seed {seed}"
        );
    }
}

#[test]
fn min_gap_zero_iff_lp_optimal() {
    let cfg = interior_cfg();
    let mut zero = 0;
    let mut positive = 0;
    for seed in 0..40 {
        let inst = generate_instance(&cfg, seed);
        let supports = partition_support(&inst.problem, &inst.observation, SUPPORT_TOL);
        if !supports.i_bar.is_empty() {
            continue; // interior points only
        }
        let c = inst.problem.pad_cost(&inst.c_ring_struct);
        let gap = min_gap_lp(&inst.problem, &inst.observation, &c).unwrap();
        let lp = invopt::engine::solve_lp(&inst.problem.lp_model(&c)).unwrap();
        let at_obs: f64 = c.iter().zip(&inst.observation.x_hat).map(|(a, b)| a * b).sum();
        let true_gap = at_obs - lp.objective;
        assert!(gap.gap >= -1e-9, "seed {seed}");
        assert!(
            (gap.gap - true_gap).abs() <= 1e-6 * (1.0 + true_gap.abs()),
            "seed {seed}: {} vs {true_gap}",
            gap.gap
        );
        if true_gap <= 1e-9 {
            zero += 1;
        } else {
            positive += 1;
        }
    }
    assert!(positive > 0, "no positive-gap instances ({zero} zero)");
}

#[test]
fn cost_shift_law() {
    // For the min-gap solution (y, eps) with s = eps / x̂ and any 0 < v < s,
    // the gap under c - v equals sum(eps_i - v_i x̂_i).
    let cfg = interior_cfg();
    let mut exercised = 0;
    for seed in 0..40 {
        let inst = generate_instance(&cfg, seed);
        let supports = partition_support(&inst.problem, &inst.observation, SUPPORT_TOL);
        if !supports.i_bar.is_empty() {
            continue;
        }
        let c = inst.problem.pad_cost(&inst.c_ring_struct);
        let base = min_gap_lp(&inst.problem, &inst.observation, &c).unwrap();
        let x_hat = &inst.observation.x_hat;
        let s_hat: Vec<f64> = base.eps.iter().zip(x_hat).map(|(e, x)| e / x).collect();
        if s_hat.iter().all(|&v| v <= 1e-9) {
            continue;
        }
        let shift: Vec<f64> = s_hat.iter().map(|&v| 0.5 * v).collect();
        let c_shifted: Vec<f64> = c.iter().zip(&shift).map(|(a, b)| a - b).collect();
        let shifted = min_gap_lp(&inst.problem, &inst.observation, &c_shifted).unwrap();
        let expect: f64 = base
            .eps
            .iter()
            .zip(&shift)
            .zip(x_hat)
            .map(|((e, v), x)| e - v * x)
            .sum();
        assert!(
            (shifted.gap - expect).abs() <= 1e-6 * (1.0 + expect.abs()),
            "seed {seed}: {} vs {expect}",
            shifted.gap
        );
        exercised += 1;
    }
    assert!(exercised > 5, "only {exercised} instances had positive gaps");
}

#[test]
fn default_tau_ladder() {
    assert_eq!(default_tau(500.0), 1e-3);
    assert_eq!(default_tau(-123.0), 1e-3);
    assert_eq!(default_tau(5e3), 1e-4);
    assert_eq!(default_tau(5e4), 1e-5);
    assert_eq!(default_tau(1e7), 1e-6);
    // Boundary cases of the ladder.
    assert_eq!(default_tau(1e3), 1e-4);
    assert_eq!(default_tau(1e4), 1e-5);
    assert_eq!(default_tau(1e5), 1e-6);
}

#[test]
fn default_weights_clamp() {
    let obs = invopt::model::Observation {
        x_hat: vec![0.5, 19.0, 0.0],
        feasibility_residual: 0.0,
        integrality_residual: 0.0,
    };
    assert_eq!(default_weights(&obs), vec![2.0, 19.0]);
    let empty = invopt::model::Observation {
        x_hat: vec![0.0, 0.0],
        feasibility_residual: 0.0,
        integrality_residual: 0.0,
    };
    assert!(default_weights(&empty).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// partition_support always returns a partition, for any tolerance.
    #[test]
    fn support_partition_is_a_partition(
        values in prop::collection::vec(0.0f64..10.0, 1..8),
        tol in 0.0f64..2.0,
    ) {
        let n = values.len();
        let mut raw = invopt::model::RawProblem::new("prop", n, vec![false; n]);
        raw.push_row(vec![1.0; n], invopt::model::Rel::Le, 1e6);
        let p = invopt::model::standardize(&raw).unwrap();
        let obs = invopt::model::Observation {
            x_hat: {
                let mut v = values.clone();
                v.push(0.0);
                v
            },
            feasibility_residual: 0.0,
            integrality_residual: 0.0,
        };
        let s = partition_support(&p, &obs, tol);
        let mut all: Vec<usize> = s.i_set.iter().chain(s.i_bar.iter()).cloned().collect();
        all.sort();
        prop_assert_eq!(all, (0..=n).collect::<Vec<_>>());
        for &i in &s.i_set {
            prop_assert!(obs.x_hat[i] > tol);
        }
        for &i in &s.i_bar {
            prop_assert!(obs.x_hat[i] <= tol);
        }
    }

    /// Folding slack costs preserves the objective of every feasible point.
    #[test]
    fn slack_fold_objective_preservation(
        slack_costs in prop::collection::vec(-3.0f64..3.0, 4),
        point_idx in 0usize..8,
    ) {
        let p = invopt_testkit::fixtures::ex1();
        let mut c = p.pad_cost(&[2.0, -1.0]);
        c[2..].copy_from_slice(&slack_costs);
        let (folded, offset) = invopt::inverse::slack_cost_fold(&p, &c);
        let (x1, x2) = invopt_testkit::fixtures::ex1_integer_points()[point_idx];
        let obs = invopt_testkit::fixtures::ex1_observation(x1 as f64, x2 as f64);
        let direct: f64 = c.iter().zip(&obs.x_hat).map(|(a, b)| a * b).sum();
        let via_fold = folded[0] * x1 as f64 + folded[1] * x2 as f64 + offset;
        prop_assert!((direct - via_fold).abs() <= 1e-9);
    }

    /// Positive rescaling never changes the forward argmin set.
    #[test]
    fn scaling_preserves_argmin(
        c1 in -5.0f64..5.0,
        c2 in -5.0f64..5.0,
    ) {
        prop_assume!(c1.abs() + c2.abs() > 1e-6);
        let p = invopt_testkit::fixtures::ex1();
        let c = [c1, c2];
        let (lambda, scaled) = invopt::inverse::scale_cost(&c, &[3.0, 1.0]).unwrap();
        prop_assert!(lambda > 0.0);
        let (_, argmin_a) = invopt::oracle::brute_force_forward(&p, &p.pad_cost(&c), 1_000_000).unwrap();
        let (_, argmin_b) = invopt::oracle::brute_force_forward(&p, &p.pad_cost(&scaled), 1_000_000).unwrap();
        prop_assert_eq!(argmin_a, argmin_b);
    }
}
