//! Plain gradient-descent VQE from a batch of random starts. Runs that end
//! far from the ground truth are stuck in local minima.

use mcmc_vqa::analysis::normalized_error;
use mcmc_vqa::graph::{brute_force_extrema, generate_random_graph};
use mcmc_vqa::qsim::exact_loss;
use mcmc_vqa::vqe::{run_vqe, VqeConfig};
use mcmc_vqa::{Ansatz, ParameterVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcmc_vqa::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let g = generate_random_graph(10, 10, &mut rng)?;
    let gt = brute_force_extrema(&g)?;
    let ansatz = Ansatz::linear(10, 1)?;
    let cfg = VqeConfig {
        eta: 0.1,
        ..VqeConfig::default()
    };

    let mut errors = Vec::new();
    for run in 0..20 {
        let theta0 = ParameterVector::random_uniform(ansatz.n_params(), &mut rng);
        let start = exact_loss(&g, &ansatz, &theta0)?;
        let (theta, _) = run_vqe(&g, &ansatz, &theta0, &cfg, &mut rng)?;
        let loss = exact_loss(&g, &ansatz, &theta)?;
        let err = normalized_error(loss, &gt)?;
        println!("run {run:2}: {start:+.4} -> {loss:+.4}  error {err:.4}");
        errors.push(err);
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let stuck = errors.iter().filter(|&&e| e > 0.05).count();
    println!("ground truth {:+.4}; mean accuracy {:.4}; {stuck}/20 runs above 5% error", gt.e_min, 1.0 - mean);
    Ok(())
}
