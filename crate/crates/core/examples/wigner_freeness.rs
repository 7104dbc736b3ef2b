// Independent symmetric Gaussian matrices against free predictions.
//
//     cargo run --release --example wigner_freeness -- 256 64
//
// Arguments are the matrix size and the number of samples.

use nclab::wigner::{self, EnsembleConfig};

pub fn run_example_with(n: usize, samples: usize) -> nclab::Result<()> {
    let config = EnsembleConfig::new(n, 2, samples, 2024)?;
    let report = wigner::freeness_report(4, &config)?;
    println!("N = {n}, {samples} samples, two replicas");
    println!(
        "{:<10} {:>10} {:>9} {:>6} {:>7}",
        "pattern", "estimate", "stderr", "free", "z"
    );
    for r in &report.rows {
        let pattern: Vec<String> = r.pattern.iter().map(usize::to_string).collect();
        println!(
            "{:<10} {:>10.5} {:>9.5} {:>6} {:>7.2}",
            pattern.join(" "),
            r.estimate,
            r.stderr,
            r.prediction,
            r.zscore
        );
    }
    // real symmetric ensembles carry an O(1/N) correction on crossing words
    println!("1/N = {:.5}", 1.0 / n as f64);
    Ok(())
}

pub fn run_example() -> nclab::Result<()> {
    run_example_with(48, 8)
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    match args[..] {
        [n, samples, ..] => run_example_with(n, samples),
        _ => run_example(),
    }
}
