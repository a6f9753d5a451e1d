//! Grid search of the tracker bias parameters against a target median of the
//! tracked Ego-Right lateral separation.
//!
//! Usage: cargo run --release --example calibrate -- [config.toml] [target]
//!
//! The tracker does not depend on the swarm, so no boids are simulated.

use std::path::Path;

use boidplaus::experiment::run_tracker_only;
use boidplaus::metrics::{summarize, Pair, Source};
use boidplaus::RunConfig;
use rayon::prelude::*;

fn main() -> boidplaus::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let cfg = match args.get(1) {
        Some(p) => RunConfig::load(Path::new(p))?,
        None => RunConfig::default(),
    };
    let target: f64 = args.get(2).map_or(2.4, |s| s.parse().expect("target must be a number"));
    println!("target tracked Ego-Right median {target:.2} m, {} runs per point", cfg.experiment.runs);
    println!("{:>10} {:>10} {:>8} {:>8} {:>8}", "rate", "magnitude", "p1", "p50", "mean");
    let mut best: Option<(f64, f64, f64)> = None;
    for rate in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0] {
        for magnitude in [0.6, 0.8, 1.0, 1.2, 1.4, 1.6] {
            let mut c = cfg.clone();
            c.noise.bias_event_rate = rate;
            c.noise.bias_magnitude = magnitude;
            let values: Vec<f64> = (0..c.experiment.runs as u64)
                .into_par_iter()
                .flat_map_iter(|i| run_tracker_only(&c, i))
                .filter(|s| s.pair == Pair::EgoRight && s.source == Source::Tracked)
                .map(|s| s.value)
                .collect();
            let s = summarize(&values)?;
            println!("{rate:>10.2} {magnitude:>10.2} {:>8.3} {:>8.3} {:>8.3}", s.p1, s.p50, s.mean);
            let err = (s.p50 - target).abs();
            if best.is_none_or(|b| err < b.2) {
                best = Some((rate, magnitude, err));
            }
        }
    }
    if let Some((rate, magnitude, err)) = best {
        println!("closest: bias_event_rate = {rate}, bias_magnitude = {magnitude} (|median - target| = {err:.3})");
    }
    Ok(())
}
