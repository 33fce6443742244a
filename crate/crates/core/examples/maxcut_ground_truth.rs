//! Generates a random weighted graph and solves MaxCut exactly.
//!
//! ```text
//! cargo run --release --example maxcut_ground_truth -- [n] [m] [seed]
//! ```

use mcmc_vqa::graph::{brute_force_extrema, generate_random_graph, ising_energy, maxcut_objective};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcmc_vqa::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(10) as usize;
    let m = args.get(1).copied().unwrap_or(10) as usize;
    let seed = args.get(2).copied().unwrap_or(0);

    let g = generate_random_graph(n, m, &mut ChaCha8Rng::seed_from_u64(seed))?;
    println!("{n} vertices, {m} edges, total weight {:.4}", g.total_weight());
    for e in g.edges() {
        println!("  ({}, {})  w = {:+.4}", e.a, e.b, e.weight);
    }

    let gt = brute_force_extrema(&g)?;
    let cut = maxcut_objective(&g, &gt.argmin)?;
    println!("energy range [{:.4}, {:.4}], gap {:.4}", gt.e_min, gt.e_max, gt.gap());
    println!("optimal spins {:?}", gt.argmin.spins());
    println!("max cut {cut:.4} = (total weight - e_min) / 2 = {:.4}", (g.total_weight() - gt.e_min) / 2.0);

    // a global spin flip leaves every edge term unchanged
    let flipped = gt.argmin.flipped();
    assert_eq!(ising_energy(&g, &flipped)?, gt.e_min);
    Ok(())
}
