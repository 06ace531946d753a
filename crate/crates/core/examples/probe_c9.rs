use invopt::engine::{solve_milp, MilpLimits};
use invopt::generator::{generate_instance, GeneratorConfig};
use invopt::inverse::{default_tau, default_weights, solve_biobjective_model, solve_tolerance_model};
use invopt::model::ReferenceCost;
use invopt::oracle::certify_inverse;

fn main() {
    let sizes = [(3usize, 2usize), (4, 3), (5, 3)];
    for model in ["tol", "bio"] {
        let mut pass = 0;
        let mut total = 0;
        for (gi, (nv, nr)) in sizes.iter().enumerate() {
            let cfg = GeneratorConfig { num_vars: *nv, num_rows: *nr, var_box: 5, ..Default::default() };
            for s in 0..20u64 {
                let seed = 1000 * (gi as u64 + 1) + s;
                let inst = generate_instance(&cfg, seed);
                let c_ring = ReferenceCost::new(&inst.problem, &inst.c_ring_struct).unwrap();
                let sol = if model == "tol" {
                    let fwd = solve_milp(&inst.problem.milp_model(c_ring.full()), &MilpLimits::default()).unwrap();
                    let obj: f64 = c_ring.full().iter().zip(&fwd.x).map(|(a, b)| a * b).sum();
                    solve_tolerance_model(&inst.problem, &inst.observation, &c_ring, default_tau(obj)).unwrap()
                } else {
                    solve_biobjective_model(&inst.problem, &inst.observation, &c_ring, &default_weights(&inst.observation)).unwrap()
                };
                let cert = certify_inverse(&inst.problem, &inst.observation, &sol.c_hat, 1e-9, 1_000_000).unwrap();
                let at_obs = sol.obj_at(&inst.observation);
                let rgap = cert.gap() / 1f64.max(at_obs.abs());
                total += 1;
                if rgap <= 1e-2 { pass += 1; }
            }
        }
        println!("{model}: {pass}/{total}");
    }
}
