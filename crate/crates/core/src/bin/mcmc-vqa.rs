use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcmc_vqa::experiment::{
    cmd_analyze, cmd_brute_force, cmd_gen_graphs, cmd_run, ExperimentConfig, GenerateSpec,
};
use mcmc_vqa::{Error, Shots};

#[derive(Parser)]
#[command(version, about = "Metropolis-Hastings VQE experiments on weighted MaxCut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random graphs with standard-normal edge weights
    GenGraphs {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "graphs")]
        outdir: PathBuf,
    },
    /// Exact energy extrema of graph files
    BruteForce {
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
        /// Defaults to each graph's directory
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Execute every cell of an experiment config
    Run(RunArgs),
    /// Score a finished run against ground truth
    Analyze {
        /// Run manifest; defaults to `<outdir of --config>/manifest.json`
        #[arg(long, required_unless_present = "config")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to the manifest's directory
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `outdir`
    #[arg(long)]
    outdir: Option<PathBuf>,
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long)]
    shots: Option<u64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(dir) = &self.outdir {
            cfg.outdir = dir.clone();
        }
        if self.exact {
            cfg.shots = Shots::Exact;
        }
        if let Some(m) = self.shots {
            cfg.shots = Shots::Finite(m);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::GenGraphs {
            n,
            m,
            count,
            seed,
            outdir,
        } => {
            let paths = cmd_gen_graphs(&GenerateSpec { n, m, count, seed }, &outdir)?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::BruteForce { graphs, outdir } => {
            for gt in cmd_brute_force(&graphs, outdir.as_deref())? {
                println!(
                    "{}: e_min {} e_max {} argmin {:?}",
                    gt.graph.display(),
                    gt.truth.e_min,
                    gt.truth.e_max,
                    gt.truth.argmin.spins()
                );
            }
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let workers = args
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let manifest = cmd_run(&cfg, workers)?;
            let failed = manifest.failed();
            println!(
                "{} cells, {failed} failed, manifest at {}",
                manifest.cells.len(),
                cfg.outdir.join("manifest.json").display()
            );
            for cell in manifest.cells.iter().filter(|c| c.error.is_some()) {
                eprintln!("cell {}: {}", cell.spec.index, cell.error.as_deref().unwrap_or(""));
            }
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Analyze {
            manifest,
            config,
            outdir,
        } => {
            let manifest = match (manifest, config) {
                (Some(m), _) => m,
                (None, Some(c)) => ExperimentConfig::load(&c)?.outdir.join("manifest.json"),
                (None, None) => unreachable!("clap requires one of --manifest or --config"),
            };
            let report = cmd_analyze(&manifest, outdir.as_deref())?;
            for row in &report.best {
                println!(
                    "{:9} beta={:<6} xi={:<6} eta={:<5} accuracy {:.4} ± {:.4} (n={})",
                    row.method,
                    row.beta.map_or("-".into(), |b| b.to_string()),
                    row.xi.map_or("-".into(), |x| x.to_string()),
                    row.eta,
                    row.mean_accuracy,
                    row.std,
                    row.n
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
