use invopt::inverse::solve_biobjective_model;
use invopt::model::ReferenceCost;
use invopt_testkit::fixtures::{ex1, ex1_observation};

fn main() {
    let p = ex1();
    let obs = ex1_observation(4.0, 2.0);
    let c_ring = ReferenceCost::new(&p, &[3.0, 1.0]).unwrap();
    let sol = solve_biobjective_model(&p, &obs, &c_ring, &[1.0; 6]).unwrap();
    println!("master_obj {}", sol.master_objective);
    println!("c_hat {:?}", sol.c_hat);
    println!("f {:?}", sol.f);
    println!("g {:?}", sol.g);
    println!("eps {:?}", sol.eps);
    println!("y {:?}", sol.y);
    let cert = sol.lp_certificate.as_ref().unwrap();
    println!("z_lp {} x_lp {:?}", cert.z_lp, cert.x_lp);
    println!("fwd {:?}", sol.forward);
    println!("metrics {:?}", sol.metrics);
}
