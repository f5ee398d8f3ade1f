//! Alignment of a 5 K thermal ensemble through a 128-pixel pulse shaper,
//! followed by one last filtering of the optimized field.
//!
//! cargo run --release --example thermal_pixelation -- [iterations] [temperature_K]

use oct_align::config::ExperimentConfig;
use oct_align::runner;

fn main() -> oct_align::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(40, |a| a.parse().expect("iteration count"));
    let temperature: u32 = args.next().map_or(5, |a| a.parse().expect("temperature in K"));

    let mut config = ExperimentConfig::preset(&format!("paper-3.2-{temperature}K-128px"))?;
    config.optimizer.max_iters = iterations;
    let result = runner::run_experiment(&config.resolve()?)?;

    for r in result.history.iter().filter(|r| r.k % 5 == 0) {
        println!(
            "k={:4}  J={:.6}  P={:.6}  mu={}",
            r.k,
            r.cost,
            r.projection,
            r.mu.map_or("-".to_string(), |m| format!("{m:.2}"))
        );
    }
    println!(
        "projection {:.6} before and {:.6} after the final filtering",
        result.projection, result.filtered_projection
    );
    println!("largest population in the two top levels: {:.2e}", result.max_top_population);
    Ok(())
}
