//! Zero-temperature alignment with the field restricted to three narrow
//! bands at 4B, 10B and 26B, using the built-in `paper-3.1` preset.
//!
//! cargo run --release --example bandpass_optimization -- [iterations] [out_dir]

use std::path::PathBuf;

use oct_align::config::ExperimentConfig;
use oct_align::runner;

fn main() -> oct_align::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(60, |a| a.parse().expect("iteration count"));
    let out: Option<PathBuf> = args.next().map(PathBuf::from);

    let mut config = ExperimentConfig::preset("paper-3.1")?;
    config.optimizer.max_iters = iterations;
    let exp = config.resolve()?;
    let result = runner::run_experiment(&exp)?;

    for r in result.history.iter().filter(|r| r.k % 10 == 0) {
        println!(
            "k={:4}  J={:.6}  P={:.6}  mu={}  out-of-band={:.1e}",
            r.k,
            r.cost,
            r.projection,
            r.mu.map_or("-".to_string(), |m| format!("{m:.2}")),
            r.out_of_band
        );
    }
    println!("{}", result.summary());
    if let Some(dir) = out {
        runner::write_outputs(&result, &dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
