// Annealed spin-glass partition sum at quenched couplings.
//
//     cargo run --release --example replica_partition

use nclab::quench::{self, QuenchingSpec, ReplicaModelConfig};

pub fn run_example() -> nclab::Result<()> {
    // two spins, one replica: E exp(beta J / sqrt 2) summed over 4 states
    let exact = ReplicaModelConfig::quadrature(2, 1.0, 1, 20)?;
    let z = quench::replica_partition(&exact, &QuenchingSpec::uniform(1)?)?;
    println!(
        "N = 2, beta = 1: Z = {:.6}, 4 e^(1/4) = {:.6}",
        z.z,
        4.0 * 0.25f64.exp()
    );

    let betas = [0.0, 0.25, 0.5, 1.0];
    for p in [1, 2, 4] {
        let model = ReplicaModelConfig::monte_carlo(4, 0.5, p, 20_000, 11)?;
        let sweep = quench::partition_sweep(&model, &QuenchingSpec::uniform(p)?, &betas)?;
        let cells: Vec<String> = sweep
            .iter()
            .map(|(b, r)| format!("beta {b}: {:.3} +- {:.3}", r.z, r.stderr))
            .collect();
        println!("p = {p}: {}", cells.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
