use std::time::Instant;
use invopt::engine::{solve_lp, LpStatus};
use invopt_testkit::naive::{self, NaiveOutcome};
use invopt_testkit::random_lp::random_feasible_lp;

fn main() {
    let mut slow = Vec::new();
    for seed in 0..500u64 {
        let lp = random_feasible_lp(seed, 15, 25);
        let t0 = Instant::now();
        let e = solve_lp(&lp).unwrap();
        let t_engine = t0.elapsed();
        let t1 = Instant::now();
        let n = naive::solve(&lp);
        let t_naive = t1.elapsed();
        if t_naive.as_millis() > 200 || t_engine.as_millis() > 200 {
            slow.push((seed, t_engine, t_naive));
        }
        match (e.status, n) {
            (LpStatus::Optimal, NaiveOutcome::Optimal(_)) | (LpStatus::Unbounded, NaiveOutcome::Unbounded) => {}
            (a, b) => println!("MISMATCH seed {seed}: {a:?} vs {b:?}"),
        }
    }
    println!("slow cases: {slow:?}");
}
