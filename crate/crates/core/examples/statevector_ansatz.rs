//! Prepares the layered RY/CZ ansatz and reads out the graph Hamiltonian,
//! exactly and with a finite number of shots.

use std::f64::consts::PI;

use mcmc_vqa::graph::{brute_force_extrema, generate_random_graph};
use mcmc_vqa::qsim::{exact_loss, loss_statistics};
use mcmc_vqa::{Ansatz, ParameterVector, Shots};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcmc_vqa::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = generate_random_graph(10, 10, &mut rng)?;
    let ansatz = Ansatz::linear(10, 1)?;
    let theta = ParameterVector::random_uniform(ansatz.n_params(), &mut rng);

    let state = ansatz.prepare_state(&theta)?;
    println!("{} amplitudes, norm² {:.15}", state.amplitudes().len(), state.norm_sqr());
    for e in g.edges().iter().take(3) {
        println!("<Z{} Z{}> = {:+.6}", e.a, e.b, state.expectation_zz(e.a, e.b)?);
    }

    let exact = loss_statistics(&g, &state, Shots::Exact, &mut rng)?;
    println!("exact loss {:+.6}", exact.loss);
    for m in [100, 10_000, 1_000_000] {
        let est = loss_statistics(&g, &state, Shots::Finite(m), &mut rng)?;
        println!(
            "M = {m:>9}: estimate {:+.6}, std error {:.2e}",
            est.loss,
            est.loss_variance.sqrt()
        );
    }

    // angles 0 or π encode a classical assignment exactly
    let gt = brute_force_extrema(&g)?;
    let corner = ParameterVector::new(
        gt.argmin.spins().iter().map(|&s| if s == 1 { 0.0 } else { PI }).collect(),
    )?;
    println!("loss at the optimal corner {:+.6} (e_min {:+.6})", exact_loss(&g, &ansatz, &corner)?, gt.e_min);
    Ok(())
}
