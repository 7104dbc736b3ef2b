// Search over observable directions for the largest |S|, on overlapping
// supports where the A and B sides do not commute.
//
//     cargo run --release --example chsh_search

use nclab::bell::{self, Backend, ChshSearch, Transform};

pub fn run_example() -> nclab::Result<()> {
    for backend in [
        Backend::Fock { max_len: 3 },
        Backend::Classical {
            samples: 4000,
            seed: 3,
        },
    ] {
        let search = ChshSearch {
            modes: 2,
            a_support: vec![0, 1],
            b_support: vec![0, 1],
            resolution: 6,
            refinement_steps: 8,
            transform: Transform::Sign,
            quenching: true,
            backend,
        };
        let out = bell::maximize_chsh(&search)?;
        let n = out.result.commutator_norms;
        println!(
            "{:?}: coarse |S| {:.4}, refined S {:.4}, {} evaluations, |[A1,B1]| {}",
            backend,
            out.coarse_best_abs_s,
            out.result.s,
            out.trace.len(),
            n.map_or("n/a".to_string(), |n| format!("{:.3}", n.a1_b1))
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
