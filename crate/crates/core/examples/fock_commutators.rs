// Truncated Fock matrices: free generators do not commute, bosonic ones
// do (below the truncation edge), and matrix vacuum expectations agree
// with the combinatorial engine.
//
//     cargo run --example fock_commutators

use nclab::fock::{self, BoseFockBasis, FockBasis, FreeFockBasis};
use nclab::wick::{ContractionRule, OperatorExpr, Statistics};

pub fn run_example() -> nclab::Result<()> {
    let free = FreeFockBasis::new(2, 3)?;
    let q0 = fock::expr_matrix(&OperatorExpr::q(0), &free)?;
    let q1 = fock::expr_matrix(&OperatorExpr::q(1), &free)?;
    let c = fock::commutator(&q0, &q1)?;
    let v = c.apply_to_vacuum();
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    println!("free {}: |[Q0,Q1] vacuum|^2 = {norm2}", free.kind());

    let bose = BoseFockBasis::new(2, 4)?;
    let x0 = fock::expr_matrix(&OperatorExpr::q(0), &bose)?;
    let x1 = fock::expr_matrix(&OperatorExpr::q(1), &bose)?;
    let cb = fock::commutator(&x0, &x1)?;
    println!(
        "bose {}: max |[X0,X1]| on levels <= {} is {:e}",
        bose.kind(),
        bose.max_level() - 1,
        fock::restricted_max_abs(&cb, &bose, bose.max_level() - 1)
    );

    let word: Vec<OperatorExpr> = [0, 1, 1, 0, 0, 1]
        .iter()
        .map(|&a| OperatorExpr::q(a))
        .collect();
    let report = fock::crosscheck(
        &word,
        &ContractionRule::new(Statistics::Boltzmann, 2),
        &free,
    )?;
    for row in &report.rows {
        println!(
            "first {} factors: matrix {:>4} wick {:>4}",
            row.factors, row.matrix_value, row.wick_value
        );
    }
    println!("max deviation {:e}", report.max_deviation());
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
