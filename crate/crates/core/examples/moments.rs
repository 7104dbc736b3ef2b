// Vacuum moments under the two contraction rules.
//
// Even powers of one field count non-crossing pairings (Catalan numbers)
// under Boltzmann statistics and all pairings under Bose statistics. The
// word Q0 Q1 Q0 Q1 has only a crossing pairing, so it separates the two.
//
//     cargo run --example moments

use nclab::wick::{self, ContractionRule, OperatorExpr, Statistics};

pub fn run_example() -> nclab::Result<()> {
    let free = ContractionRule::new(Statistics::Boltzmann, 2);
    let bose = ContractionRule::new(Statistics::Bose, 2);

    println!("{:>3} {:>10} {:>10}", "2m", "boltzmann", "bose");
    for m in 1..=6 {
        let word = vec![OperatorExpr::q(0); 2 * m];
        let a = wick::expr_moment(&word, &free)?;
        let b = wick::expr_moment(&word, &bose)?;
        println!("{:>3} {:>10} {:>10}", 2 * m, a, b);
    }

    let crossing: Vec<OperatorExpr> = [0, 1, 0, 1].iter().map(|&a| OperatorExpr::q(a)).collect();
    println!(
        "<Q0 Q1 Q0 Q1>: boltzmann {}, bose {}",
        wick::expr_moment(&crossing, &free)?,
        wick::expr_moment(&crossing, &bose)?
    );

    // a creator to the left of its annihilator never contracts
    let ordered = [OperatorExpr::annihilator(0), OperatorExpr::creator(0)];
    let reversed = [OperatorExpr::creator(0), OperatorExpr::annihilator(0)];
    println!(
        "<A0 Ad0> = {}, <Ad0 A0> = {}",
        wick::expr_moment(&ordered, &free)?,
        wick::expr_moment(&reversed, &free)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
