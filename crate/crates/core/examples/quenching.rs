// Quenched fields: the fourth moment does not depend on the number of
// replicas, while a mixed word tells free from Bose statistics.
//
//     cargo run --release --example quenching

use nclab::quench::{self, QuenchingSpec};
use nclab::wick::{ContractionRule, Statistics};
use nclab::wigner::EnsembleConfig;

pub fn run_example() -> nclab::Result<()> {
    for p in 1..=4 {
        let d = QuenchingSpec::uniform(p)?;
        let specs = vec![d; 4];
        let free = quench::quenched_algebraic_moment(
            &specs,
            &ContractionRule::new(Statistics::Boltzmann, p),
        )?;
        let bose =
            quench::quenched_algebraic_moment(&specs, &ContractionRule::new(Statistics::Bose, p))?;
        println!("p = {p}: <(dQ)^4> boltzmann {free}, bose {bose}");
    }

    let (e0, e1) = (QuenchingSpec::axis(2, 0)?, QuenchingSpec::axis(2, 1)?);
    let mixed = vec![e0.clone(), e1.clone(), e0, e1];
    let free =
        quench::quenched_algebraic_moment(&mixed, &ContractionRule::new(Statistics::Boltzmann, 2))?;
    let bose =
        quench::quenched_algebraic_moment(&mixed, &ContractionRule::new(Statistics::Bose, 2))?;
    let est = quench::quenched_trace_moment(&mixed, &EnsembleConfig::new(96, 2, 8, 7)?)?;
    println!(
        "mixed word: boltzmann {free}, bose {bose}, matrices {:.4} +- {:.4}",
        est.value, est.stderr
    );

    // an arbitrary direction rescaled onto sum c^2 = p
    let tilted = QuenchingSpec::from_direction(&[0.8, 0.6])?;
    println!("tilted coefficients {:?}", tilted.coefficients());
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
