//! Ensemble best-so-far error during the Markov phase, fitted to
//! `α(t) = a·exp(−b·t)` for several temperatures.
//!
//! ```text
//! cargo run --release --example mixing_fit -- [n_graphs] [n_seeds] [eta]
//! ```

use mcmc_vqa::analysis::{fit_mixing_curve, mean_error_curve, pi_star_proxy};
use mcmc_vqa::experiment::{execute_cell, plan_cells, ExperimentConfig};
use mcmc_vqa::graph::brute_force_extrema;
use rayon::prelude::*;

fn main() -> mcmc_vqa::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_graphs: usize = args.first().map_or(3, |a| a.parse().expect("graph count"));
    let n_seeds: usize = args.get(1).map_or(4, |a| a.parse().expect("seed count"));
    let eta: f64 = args.get(2).map_or(0.1, |a| a.parse().expect("learning rate"));

    for beta in [0.2, 0.5, 0.8] {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "graphs": {"generate": {"n": 10, "m": 10, "count": n_graphs, "seed": 2021}},
            "methods": "mcmc-vqa",
            "beta": beta,
            "xi": 0.4 / beta,
            "eta": eta,
            "t_close": 0,
            "n_seeds": n_seeds,
        }))
        .expect("valid config");
        let graphs = cfg.load_graphs()?;
        let truths: Vec<_> = graphs.iter().map(|(_, g)| brute_force_extrema(g)).collect::<Result<_, _>>()?;
        let ansatz = cfg.ansatz.build(10)?;
        let curves: Vec<(Vec<f64>, usize)> = plan_cells(&cfg, &graphs)
            .par_iter()
            .map(|cell| {
                let res = execute_cell(&cfg, &graphs[cell.graph_index].1, &ansatz, cell)?;
                Ok((res.best_so_far(), cell.graph_index))
            })
            .collect::<mcmc_vqa::Result<_>>()?;
        let runs: Vec<_> = curves.iter().map(|(c, gi)| (c.as_slice(), &truths[*gi])).collect();
        let mean = mean_error_curve(&runs)?;
        let points: Vec<(f64, f64)> = mean
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(t, &a)| (t as f64, a))
            .collect();
        let fit = fit_mixing_curve(&points)?;
        let proxy = truths.iter().map(|gt| pi_star_proxy(gt, beta)).sum::<f64>() / truths.len() as f64;
        println!(
            "beta {beta}: a = {:.4}, b = {:.3e}, residual/point {:.2e}, proxy {proxy:.3}",
            fit.amplitude,
            fit.rate,
            fit.residual_per_point()
        );
        for t in (0..mean.len()).step_by(100) {
            println!("  epoch {t:3}: mean error {:.4}, fitted {:.4}", mean[t], fit.predict(t as f64));
        }
    }
    Ok(())
}
