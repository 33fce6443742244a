//! The file-based workflow behind the command-line tool: run a config,
//! then score the run directory.
//!
//! ```text
//! cargo run --release --example experiment_pipeline -- [config.json]
//! ```

use std::path::PathBuf;

use mcmc_vqa::experiment::{cmd_analyze, cmd_run, ExperimentConfig};

fn main() -> mcmc_vqa::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/small_sweep.json")));
    let cfg = ExperimentConfig::load(&path)?;
    println!("running {} into {}", path.display(), cfg.outdir.display());

    let manifest = cmd_run(&cfg, std::thread::available_parallelism().map_or(1, |n| n.get()))?;
    println!("{} cells, {} failed", manifest.cells.len(), manifest.failed());

    let report = cmd_analyze(&cfg.outdir.join("manifest.json"), None)?;
    for row in &report.best {
        println!(
            "{:9} beta {:?} xi {:?} eta {}: accuracy {:.4} ± {:.4} over {} runs",
            row.method, row.beta, row.xi, row.eta, row.mean_accuracy, row.std, row.n
        );
    }
    for fit in &report.fits {
        println!(
            "fit beta {:?}: rate {:.3e}, amplitude {:.4}, proxy {:.3}",
            fit.beta, fit.fit.rate, fit.fit.amplitude, fit.pi_star_proxy
        );
    }
    Ok(())
}
