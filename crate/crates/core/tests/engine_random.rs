//! Engine soundness at moderate scale: random LPs against the independent
//! naive tableau, certificate residuals, and random MILPs against the
//! enumeration oracle. The acceptance suite runs the full-size versions.

use invopt::engine::{check_certificate, solve_lp, solve_milp, LpStatus, MilpLimits, MilpStatus};
use invopt::generator::{generate_instance, GeneratorConfig};
use invopt::oracle::brute_force_forward;
use invopt_testkit::naive::{self, NaiveOutcome};
use invopt_testkit::random_lp::random_feasible_lp;

#[test]
fn lp_objective_matches_naive_tableau() {
    let mut optimal = 0;
    let mut unbounded = 0;
    for seed in 0..120 {
        let lp = random_feasible_lp(seed, 10, 14);
        let sol = solve_lp(&lp).unwrap();
        let reference = naive::solve(&lp);
        match (sol.status, reference) {
            (LpStatus::Optimal, NaiveOutcome::Optimal(obj)) => {
                optimal += 1;
                let tol = 1e-6 * (1.0 + obj.abs());
                assert!(
                    (sol.objective - obj).abs() <= tol,
                    "seed {seed}: engine {} vs naive {obj}",
                    sol.objective
                );
            }
            (LpStatus::Unbounded, NaiveOutcome::Unbounded) => unbounded += 1,
            (a, b) => panic!("seed {seed}: engine {a:?} vs naive {b:?}"),
        }
    }
    // The generator never produces infeasible models, so everything lands
    // in one of the two buckets; make sure both actually occur.
    assert!(optimal > 40, "only {optimal} optimal instances");
    assert!(unbounded > 0, "no unbounded instances seen");
}

#[test]
fn lp_certificates_have_tiny_residuals() {
    for seed in 0..120 {
        let lp = random_feasible_lp(seed, 10, 14);
        let sol = solve_lp(&lp).unwrap();
        if sol.status == LpStatus::Optimal {
            let report = check_certificate(&lp, &sol);
            assert!(
                report.passes(1e-7),
                "seed {seed}: residuals {report:?}"
            );
        }
    }
}

#[test]
fn milp_matches_enumeration_oracle() {
    let cfg = GeneratorConfig { num_vars: 5, num_rows: 3, var_box: 4, ..Default::default() };
    for seed in 0..30 {
        let inst = generate_instance(&cfg, seed);
        let c = inst.problem.pad_cost(&inst.c_ring_struct);
        let milp = solve_milp(&inst.problem.milp_model(&c), &MilpLimits::default()).unwrap();
        let (best, _) = brute_force_forward(&inst.problem, &c, 1_000_000).unwrap();
        assert_eq!(milp.status, MilpStatus::Optimal, "seed {seed}");
        assert!(
            (milp.upper_bound - best).abs() <= 1e-7 * (1.0 + best.abs()),
            "seed {seed}: milp {} vs oracle {best}",
            milp.upper_bound
        );
    }
}

#[test]
fn milp_is_deterministic_with_monotone_pool() {
    let cfg = GeneratorConfig { num_vars: 5, num_rows: 3, var_box: 4, ..Default::default() };
    for seed in [3u64, 11, 19] {
        let inst = generate_instance(&cfg, seed);
        let c = inst.problem.pad_cost(&inst.c_ring_struct);
        let model = inst.problem.milp_model(&c);
        let a = solve_milp(&model, &MilpLimits::default()).unwrap();
        let b = solve_milp(&model, &MilpLimits::default()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.node_count, b.node_count);
        let objs: Vec<f64> = a
            .pool
            .iter()
            .map(|x| x.iter().zip(&c).map(|(v, cv)| v * cv).sum())
            .collect();
        for w in objs.windows(2) {
            assert!(w[1] < w[0] - 1e-12, "pool not strictly improving: {objs:?}");
        }
    }
}

#[test]
fn perturbed_certificate_shows_in_primal_residual() {
    // Nudging x_0 by 1e-3 in an equality system must surface as a primal
    // residual of max_i |a_{i,0}| * 1e-3.
    let p = invopt_testkit::fixtures::ex1();
    let lp = p.lp_model(&p.pad_cost(&[4.0 / 3.0, 1.0]));
    let mut sol = solve_lp(&lp).unwrap();
    assert!(sol.is_optimal());
    assert!(check_certificate(&lp, &sol).passes(1e-8));
    sol.x[0] += 1e-3;
    let report = check_certificate(&lp, &sol);
    let expected = 6.0 * 1e-3; // max |a_{i,0}| over the four rows is 6
    assert!((report.primal_residual - expected).abs() <= 1e-9);
}
