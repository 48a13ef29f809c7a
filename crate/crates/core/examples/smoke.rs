use realroots::bench::{run_mignotte, run_table1, run_table2, SolverKind};
use realroots::linalg::RngSeed;

fn main() {
    let t0 = std::time::Instant::now();
    let rows = run_mignotte(&[32, 64], RngSeed(42)).unwrap();
    for row in &rows {
        println!(
            "mignotte n={} found={} iters={} err={:.3e} status={:?} time={:.2}s",
            row.n, row.real_roots_found, row.iterations, row.max_error, row.status, row.seconds
        );
    }
    println!("-- mignotte total {:.2}s", t0.elapsed().as_secs_f64());

    let t1 = std::time::Instant::now();
    let stats = run_table1(&[50], &[8], 5, SolverKind::Sign, RngSeed(7)).unwrap();
    for s in &stats {
        println!(
            "table1 n={} r={} iter_mean={:.2} bound_mean={:.3e} failures={}",
            s.n, s.r, s.iter_mean, s.bound_mean, s.failures
        );
    }
    println!("-- table1 5 trials {:.2}s", t1.elapsed().as_secs_f64());

    let t2 = std::time::Instant::now();
    let stats = run_table2(&[50], &[8], 5, RngSeed(7)).unwrap();
    for s in &stats {
        println!(
            "table2 n={} r={} iter_mean={:.2} bound_mean={:.3e} failures={}",
            s.n, s.r, s.iter_mean, s.bound_mean, s.failures
        );
    }
    println!("-- table2 5 trials {:.2}s", t2.elapsed().as_secs_f64());
}
