// CHSH values for the shipped observable configurations, on the
// truncated Fock space and on the classical Gaussian model.
//
//     cargo run --release --example chsh

use nclab::bell;
use nclab::cli::ChshFileConfig;

const CONFIGS: [(&str, &str); 3] = [
    (
        "disjoint, sign",
        include_str!("configs/chsh_disjoint_sign.json"),
    ),
    (
        "disjoint, clamp",
        include_str!("configs/chsh_disjoint_clamp.json"),
    ),
    ("classical", include_str!("configs/chsh_classical.json")),
];

pub fn run_example() -> nclab::Result<()> {
    for (name, text) in CONFIGS {
        let file = ChshFileConfig::from_json(text)?;
        if file.backend == "classical" {
            let r = bell::chsh_value(&file.to_chsh()?)?;
            println!("{name}: S = {:.4} +- {:.4}", r.s, r.stderr.unwrap_or(0.0));
            continue;
        }
        // the vacuum spectral measure of a truncated field has an atom at
        // zero for even L, which the sign transform sends to +1
        for max_len in 2..=4 {
            let cfg = ChshFileConfig {
                max_len,
                ..file.clone()
            }
            .to_chsh()?;
            let r = bell::chsh_value(&cfg)?;
            let n = r.commutator_norms.expect("fock backend");
            println!(
                "{name}, L = {max_len}: S = {:.4}, |[A1,B1]| = {:.3}, |[A1,A2]| = {:.3}",
                r.s, n.a1_b1, n.a1_a2
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
