//! Mean accuracy against inverse temperature, next to the plain-VQE
//! baseline on the same graphs and initial parameters. Each row is reported
//! at its best learning rate.
//!
//! ```text
//! cargo run --release --example beta_sweep -- [n_graphs] [n_seeds] [betas]
//! cargo run --release --example beta_sweep -- 10 20 0.1,0.2,0.4,0.8
//! ```

use mcmc_vqa::analysis::{normalized_error, GroupSummary};
use mcmc_vqa::experiment::{execute_cell, plan_cells, ExperimentConfig};
use mcmc_vqa::graph::brute_force_extrema;
use rayon::prelude::*;

fn main() -> mcmc_vqa::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_graphs: usize = args.first().map_or(3, |a| a.parse().expect("graph count"));
    let n_seeds: usize = args.get(1).map_or(4, |a| a.parse().expect("seed count"));
    let betas: Vec<f64> = args
        .get(2)
        .map_or("0.2,0.8", String::as_str)
        .split(',')
        .map(|b| b.parse().expect("beta list"))
        .collect();

    let graphs_json = serde_json::json!({"generate": {"n": 10, "m": 10, "count": n_graphs, "seed": 2021}});
    let base = serde_json::json!({"graphs": graphs_json, "methods": "vqe", "n_seeds": n_seeds});
    let vqe: ExperimentConfig = serde_json::from_value(base.clone()).expect("valid config");
    let truths: Vec<_> = vqe
        .load_graphs()?
        .iter()
        .map(|(_, g)| brute_force_extrema(g))
        .collect::<Result<_, _>>()?;

    println!("{:>9} {:>6} {:>6} {:>5} {:>9} {:>7}", "method", "beta", "xi", "eta", "accuracy", "std");
    report("vqe", None, &vqe, &truths)?;
    for &beta in &betas {
        let mut cfg = vqe.clone();
        cfg.methods = vec![mcmc_vqa::experiment::Method::McmcVqa];
        cfg.beta = vec![beta];
        cfg.xi = vec![0.4 / beta];
        report("mcmc-vqa", Some(beta), &cfg, &truths)?;
    }
    Ok(())
}

fn report(
    method: &str,
    beta: Option<f64>,
    cfg: &ExperimentConfig,
    truths: &[mcmc_vqa::GroundTruth],
) -> mcmc_vqa::Result<()> {
    let graphs = cfg.load_graphs()?;
    let ansatz = cfg.ansatz.build(10)?;
    let scored: Vec<(f64, f64)> = plan_cells(cfg, &graphs)
        .par_iter()
        .map(|cell| {
            let res = execute_cell(cfg, &graphs[cell.graph_index].1, &ansatz, cell)?;
            Ok((cell.eta, 1.0 - normalized_error(res.final_loss, &truths[cell.graph_index])?))
        })
        .collect::<mcmc_vqa::Result<_>>()?;
    let mut best: Option<(f64, GroupSummary)> = None;
    for &eta in &cfg.eta {
        let acc: Vec<f64> = scored.iter().filter(|(e, _)| *e == eta).map(|(_, a)| *a).collect();
        let summary = GroupSummary::from_values(&acc)?;
        if best.as_ref().is_none_or(|(_, b)| summary.mean_accuracy > b.mean_accuracy) {
            best = Some((eta, summary));
        }
    }
    let (eta, s) = best.expect("non-empty eta grid");
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    println!(
        "{method:>9} {:>6} {:>6} {eta:>5} {:>9.4} {:>7.4}",
        fmt(beta),
        fmt(beta.map(|b| 0.4 / b)),
        s.mean_accuracy,
        s.std
    );
    Ok(())
}
