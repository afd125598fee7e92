//! Prints the noise/accuracy curve for the 5-member default layout.
//!
//! `cargo run --release --example sigma_sweep`

use gazelink_core::sim::{run_scenario, Scenario};

fn main() {
    let tile_w = 560.0;
    println!("divisor,sigma_px,random_mean,random_min,fixation_mean,fixation_min");
    for div in [16.0, 12.0, 10.0, 9.0, 8.0, 7.0, 6.0, 5.0] {
        let sigma = tile_w / div;
        let r = run_scenario(&Scenario::random(5, 60_000.0, sigma, 1)).expect("valid scenario");
        let f = run_scenario(&Scenario::fixation(5, 60_000.0, 5_000.0, sigma, 1)).expect("valid scenario");
        println!(
            "{div},{sigma:.1},{:.4},{:.4},{:.4},{:.4}",
            r.mean_accuracy, r.min_accuracy, f.mean_accuracy, f.min_accuracy
        );
    }
}
