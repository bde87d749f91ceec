//! Estimates the critical transmission probability for one pair of average
//! degrees on a coarse λ grid.
//!
//! `cargo run --release -p cfvp-core --example threshold -- [k_a] [k_b] [runs]`

use cfvp_core::experiments::{estimate_lambda_c, evaluate_point, PointParams};
use cfvp_core::IsolationStrategy;

fn main() {
    let arg = |i: usize, default: usize| std::env::args().nth(i).map_or(default, |s| s.parse().expect("integer argument"));
    let (k_a, k_b, runs) = (arg(1, 8), arg(2, 8), arg(3, 30));
    let mut points = Vec::new();
    for i in 0..=20 {
        let lambda = i as f64 / 20.0;
        let params = PointParams { n: 2000, k_a, k_b, lambda, strategy: IsolationStrategy::NONE };
        let point = evaluate_point(&params, 1, runs).expect("valid parameters");
        println!("lambda {lambda:.2}  G {:.4} +- {:.4}", point.mean_g, point.std_error());
        points.push(point);
    }
    match estimate_lambda_c(&points, 0.005).expect("sorted grid") {
        Some(l) => println!("lambda_c ~ {l:.2}"),
        None => println!("lambda_c not reached"),
    }
}
