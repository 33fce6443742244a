//! One Metropolis-Hastings chain over circuit parameters followed by the
//! closing descent from the best visited state.
//!
//! ```text
//! cargo run --release --example mcmc_chain -- [beta] [xi] [eta]
//! ```

use mcmc_vqa::analysis::normalized_error;
use mcmc_vqa::graph::{brute_force_extrema, generate_random_graph};
use mcmc_vqa::mcmc::{run_mcmc_vqa, ChainConfig, Phase};
use mcmc_vqa::{Ansatz, ParameterVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcmc_vqa::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = ChainConfig {
        beta: args.first().copied().unwrap_or(0.2),
        xi: args.get(1).copied().unwrap_or(2.0),
        eta: args.get(2).copied().unwrap_or(0.1),
        ..ChainConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = generate_random_graph(10, 10, &mut rng)?;
    let gt = brute_force_extrema(&g)?;
    let ansatz = Ansatz::linear(10, 1)?;
    let theta0 = ParameterVector::random_uniform(ansatz.n_params(), &mut rng);

    let (_, trace) = run_mcmc_vqa(&g, &ansatz, &theta0, &cfg, &mut rng)?;
    println!("beta {} xi {} eta {}: {} Markov + {} closing epochs", cfg.beta, cfg.xi, cfg.eta, cfg.t_mc, cfg.t_close);
    println!("initial loss {:+.4}, ground truth {:+.4}", trace.initial_loss, gt.e_min);
    for r in trace.records.iter().filter(|r| r.epoch % 50 == 49) {
        let tag = match r.phase {
            Phase::Markov => "markov ",
            Phase::Closing => "closing",
        };
        println!("  epoch {:3} {tag} loss {:+.4}", r.epoch + 1, r.loss);
    }
    let best = trace.best_so_far();
    println!("accepted {:.1}% of proposals", 100.0 * trace.accepted_fraction());
    println!(
        "best visited loss {:+.4} (error {:.4}); after closing {:+.4} (error {:.4})",
        trace.lambda_min,
        normalized_error(best[best.len() - 1], &gt)?,
        trace.final_loss(),
        normalized_error(trace.final_loss(), &gt)?
    );
    Ok(())
}
