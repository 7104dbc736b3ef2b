//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is printed in order and
//! uncaptured. The process fails if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nclab::bell::{self, Backend, ChshConfig, ObservableSpec, Transform};
use nclab::cli::ChshFileConfig;
use nclab::fock::{self, BoseFockBasis, FockBasis, FreeFockBasis};
use nclab::limit::{self, Quadrature, RescalingConfig, SpectralDensity, TestFunction};
use nclab::quench::{self, QuenchingSpec, ReplicaModelConfig};
use nclab::wick::{self, ContractionRule, OperatorExpr, Statistics};
use nclab::wigner::{self, EnsembleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

// Oracles: closed-form integer sequences, computed without the engine.
fn catalan(m: u64) -> u64 {
    // C_m = binom(2m, m) / (m + 1)
    let mut b: u64 = 1;
    for k in 0..m {
        b = b * (2 * m - k) / (k + 1);
    }
    b / (m + 1)
}

fn double_factorial_odd(m: u64) -> u64 {
    (1..=m).map(|k| 2 * k - 1).product()
}

fn qs(pattern: &[usize]) -> Vec<OperatorExpr> {
    pattern.iter().map(|&a| OperatorExpr::q(a)).collect()
}

fn moment_dichotomy() -> nclab::Result<Outcome> {
    let start = Instant::now();
    let mut bad = Vec::new();
    for m in 1..=6u64 {
        let word = qs(&vec![0; 2 * m as usize]);
        let free = wick::expr_moment(&word, &ContractionRule::new(Statistics::Boltzmann, 1))?;
        let bose = wick::expr_moment(&word, &ContractionRule::new(Statistics::Bose, 1))?;
        let free_count = wick::count_pairings(2 * m as usize, Statistics::Boltzmann)?;
        let bose_count = wick::count_pairings(2 * m as usize, Statistics::Bose)?;
        if free != catalan(m) as f64 || free_count != catalan(m) {
            bad.push(format!("boltzmann m={m}: {free} vs {}", catalan(m)));
        }
        if bose != double_factorial_odd(m) as f64 || bose_count != double_factorial_odd(m) {
            bad.push(format!("bose m={m}: {bose} vs {}", double_factorial_odd(m)));
        }
    }
    let t = start.elapsed();
    Ok(check(
        bad.is_empty() && within(t, 10),
        format!(
            "m ≤ 6 exact against Catalan and (2m-1)!!; {} mismatches {bad:?}; {t:.2?}",
            bad.len()
        ),
    ))
}

fn crossing_witness() -> nclab::Result<Outcome> {
    let start = Instant::now();
    let word = qs(&[0, 1, 0, 1]);
    let free = wick::expr_moment(&word, &ContractionRule::new(Statistics::Boltzmann, 2))?;
    let bose = wick::expr_moment(&word, &ContractionRule::new(Statistics::Bose, 2))?;
    let product = word
        .iter()
        .fold(OperatorExpr::identity(), |acc, f| &acc * f);
    let free_basis = FreeFockBasis::new(2, 2)?;
    let bose_basis = BoseFockBasis::new(2, 2)?;
    let free_m = fock::vacuum_expectation(&fock::expr_matrix(&product, &free_basis)?);
    let bose_m = fock::vacuum_expectation(&fock::expr_matrix(&product, &bose_basis)?);
    let t = start.elapsed();
    let pass = free == 0.0
        && bose == 1.0
        && free_m.abs() < 1e-10
        && (bose_m - 1.0).abs() < 1e-10
        && t < Duration::from_secs(1);
    Ok(check(
        pass,
        format!("wick {free}/{bose}, fock L=2 {free_m:e}/{bose_m:e} (boltzmann/bose); {t:.2?}"),
    ))
}

fn commutator_dichotomy() -> nclab::Result<Outcome> {
    let mut details = Vec::new();
    let mut pass = true;
    for l in 2..=4 {
        let basis = FreeFockBasis::new(2, l)?;
        let c = fock::commutator(
            &fock::expr_matrix(&OperatorExpr::q(0), &basis)?,
            &fock::expr_matrix(&OperatorExpr::q(1), &basis)?,
        )?;
        let norm2: f64 = c.apply_to_vacuum().iter().map(|x| x * x).sum();
        pass &= (norm2 - 2.0).abs() < 1e-10;
        details.push(format!("free L={l}: {norm2}"));
    }
    for n_max in 2..=5 {
        let basis = BoseFockBasis::new(2, n_max)?;
        let c = fock::commutator(
            &fock::expr_matrix(&OperatorExpr::q(0), &basis)?,
            &fock::expr_matrix(&OperatorExpr::q(1), &basis)?,
        )?;
        let worst = fock::restricted_max_abs(&c, &basis, basis.max_level() - 1);
        pass &= worst < 1e-10;
        details.push(format!("bose n={n_max}: {worst:e}"));
    }
    Ok(check(
        pass,
        format!(
            "|[Q0,Q1]Ω|² and safe-subspace bose norms: {}",
            details.join(", ")
        ),
    ))
}

fn wigner_convergence() -> nclab::Result<Outcome> {
    let start = Instant::now();
    let config = EnsembleConfig::new(256, 2, 64, 2024)?;
    let x4 = wigner::trace_moment(&[0, 0, 0, 0], &config)?;
    let cross = wigner::trace_moment(&[0, 1, 0, 1], &config)?;
    let report = wigner::freeness_report(6, &config)?;
    let t = start.elapsed();
    let offenders: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.zscore.abs() >= 4.0)
        .map(|r| format!("{:?} z={:.2} est={:.5}", r.pattern, r.zscore, r.estimate))
        .collect();
    let moments_ok = (x4.value - 2.0).abs() < 0.05 && cross.value.abs() < 0.05;
    let pass = moments_ok && offenders.is_empty() && within(t, 120);
    Ok(check(
        pass,
        format!(
            "τ(X⁴)={:.4}, τ(X0X1X0X1)={:.5} (1/N = {:.5}); max |z| {:.2} over {} patterns; |z| ≥ 4: {:?}; {t:.2?}",
            x4.value,
            cross.value,
            1.0 / 256.0,
            report.max_abs_zscore(),
            report.rows.len(),
            offenders
        ),
    ))
}

fn quenching_stability() -> nclab::Result<Outcome> {
    let mut pass = true;
    let mut details = Vec::new();
    for p in 1..=4 {
        let specs = vec![QuenchingSpec::uniform(p)?; 4];
        let free = quench::quenched_algebraic_moment(
            &specs,
            &ContractionRule::new(Statistics::Boltzmann, p),
        )?;
        let bose =
            quench::quenched_algebraic_moment(&specs, &ContractionRule::new(Statistics::Bose, p))?;
        pass &= free == 2.0 && bose == 3.0;
        details.push(format!("p={p}: {free}/{bose}"));
    }
    let (e0, e1) = (QuenchingSpec::axis(2, 0)?, QuenchingSpec::axis(2, 1)?);
    let mixed = vec![e0.clone(), e1.clone(), e0, e1];
    let free =
        quench::quenched_algebraic_moment(&mixed, &ContractionRule::new(Statistics::Boltzmann, 2))?;
    let bose =
        quench::quenched_algebraic_moment(&mixed, &ContractionRule::new(Statistics::Bose, 2))?;
    let mc = quench::quenched_trace_moment(&mixed, &EnsembleConfig::new(256, 2, 64, 2024)?)?;
    pass &= free == 0.0 && bose == 1.0 && mc.value.abs() < 0.05;
    details.push(format!(
        "mixed {free}/{bose}, matrices {:.5} ± {:.5}",
        mc.value, mc.stderr
    ));
    Ok(check(
        pass,
        format!("(ΔQ)⁴ boltzmann/bose {}", details.join(", ")),
    ))
}

fn replica_partition() -> nclab::Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    for n in 1..=8 {
        let model = ReplicaModelConfig::monte_carlo(n, 0.0, 1, 16, 1)?;
        let z = quench::replica_partition(&model, &QuenchingSpec::uniform(1)?)?;
        pass &= z.z == (1u64 << n) as f64;
    }
    let exact = ReplicaModelConfig::quadrature(2, 1.0, 1, 20)?;
    let z2 = quench::replica_partition(&exact, &QuenchingSpec::uniform(1)?)?.z;
    let oracle = 4.0 * 0.25f64.exp();
    pass &= (z2 - oracle).abs() < 1e-3;
    let mut zs = Vec::new();
    for p in [1usize, 2, 4] {
        let model = ReplicaModelConfig::monte_carlo(4, 0.5, p, 100_000, 7000 + p as u64)?;
        let r = quench::replica_partition(&model, &QuenchingSpec::uniform(p)?)?;
        zs.push((p, r.z, r.stderr));
    }
    let mut worst = 0.0f64;
    for i in 0..zs.len() {
        for j in (i + 1)..zs.len() {
            let joint = (zs[i].2.powi(2) + zs[j].2.powi(2)).sqrt();
            worst = worst.max((zs[i].1 - zs[j].1).abs() / joint);
        }
    }
    pass &= worst <= 3.0;
    let t = start.elapsed();
    pass &= within(t, 60);
    let table: Vec<String> = zs
        .iter()
        .map(|(p, z, s)| format!("p={p}: {z:.4}±{s:.4}"))
        .collect();
    Ok(check(
        pass,
        format!(
            "Z(β=0)=2^N for N ≤ 8; N=2 β=1 {z2:.6} vs {oracle:.6}; {}; max pairwise gap {worst:.2} joint stderr; {t:.2?}",
            table.join(", ")
        ),
    ))
}

fn stochastic_limit() -> nclab::Result<Outcome> {
    let start = Instant::now();
    let f = TestFunction::unit(0.0, 1.0)?;
    let rho = SpectralDensity::gaussian(0.0, 1.0)?;
    let config = RescalingConfig::new(vec![0.5, 0.35, 0.25, 0.18], 0.0, Quadrature::default())?;
    let table = limit::convergence_table(&config, &f, &f, &rho)?;
    let t = start.elapsed();
    // 2π ρ(0) ∫ f² with ρ the unit normal density and ∫ f² = 1
    let oracle = 2.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI).sqrt();
    let rel = table
        .rows
        .last()
        .map(|r| r.abs_error)
        .unwrap_or(f64::INFINITY)
        / oracle;
    let pass = (table.limit - oracle).abs() < 1e-12
        && table.errors_strictly_decrease()
        && rel < 0.05
        && within(t, 30);
    let errors: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{:.2e}", r.abs_error))
        .collect();
    Ok(check(
        pass,
        format!(
            "errors [{}], final relative error {rel:.2e}; {t:.2?}",
            errors.join(", ")
        ),
    ))
}

const SHIPPED: [(&str, &str); 2] = [
    (
        "disjoint sign",
        include_str!("../examples/configs/chsh_disjoint_sign.json"),
    ),
    (
        "disjoint clamp",
        include_str!("../examples/configs/chsh_disjoint_clamp.json"),
    ),
];

fn chsh_bound() -> nclab::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for k in 0..50 {
        let transform = if k % 2 == 0 {
            Transform::Sign
        } else {
            Transform::Clamp
        };
        let quenching = rng.random_bool(0.5);
        let mut spec = || {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            ObservableSpec::new(c, quenching, transform)
        };
        let config = ChshConfig {
            a1: spec()?,
            a2: spec()?,
            b1: spec()?,
            b2: spec()?,
            backend: Backend::Classical {
                samples: 10_000,
                seed: 100 + k,
            },
        };
        let r = bell::chsh_value(&config)?;
        let margin = r.s.abs() - (2.0 + 3.0 * r.stderr.unwrap_or(f64::NAN));
        worst = worst.max(margin);
        if margin.is_nan() || margin > 0.0 {
            violations += 1;
        }
    }
    let mut pass = violations == 0;
    let mut details = vec![format!(
        "classical: {violations}/50 over 2 + 3σ (worst margin {worst:.3})"
    )];
    for (name, text) in SHIPPED {
        let file = ChshFileConfig::from_json(text)?;
        let values = (3..=5)
            .map(|max_len| {
                Ok(bell::chsh_value(
                    &ChshFileConfig {
                        max_len,
                        ..file.clone()
                    }
                    .to_chsh()?,
                )?
                .s)
            })
            .collect::<nclab::Result<Vec<f64>>>()?;
        let drift = values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        pass &= drift < 0.02;
        details.push(format!(
            "{name} S(L=3,4,5) = {:.4}, {:.4}, {:.4} (max step {drift:.4})",
            values[0], values[1], values[2]
        ));
    }
    Ok(check(pass, details.join("; ")))
}

fn run_cli(args: &[&str], out: &Path, workers: usize) -> std::io::Result<bool> {
    let status = Command::new(env!("CARGO_BIN_EXE_nclab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg(workers.to_string())
        .stdout(std::process::Stdio::null())
        .status()?;
    Ok(status.success())
}

fn dir_bytes(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)?
        .map(|e| {
            let e = e?;
            Ok((
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path())?,
            ))
        })
        .collect::<std::io::Result<_>>()?;
    files.sort();
    Ok(files)
}

fn cli_determinism() -> nclab::Result<Outcome> {
    let runs: [&[&str]; 8] = [
        &[
            "moments",
            "--pattern",
            "Q0,Q1,Q1,Q0",
            "--statistics",
            "bose",
        ],
        &["fock", "--pattern", "Q0,Q1,Q0,Q1", "--dump-matrix", "true"],
        &[
            "limit",
            "--lambdas",
            "0.5,0.35,0.25",
            "--t-step",
            "0.01",
            "--omega-step",
            "0.01",
        ],
        &[
            "wigner",
            "--n",
            "48",
            "--samples",
            "12",
            "--max-degree",
            "6",
            "--seed",
            "5",
        ],
        &[
            "quench", "--spec", "axis0", "--spec", "axis1", "--spec", "axis0", "--spec", "axis1",
            "--n", "48",
        ],
        &[
            "partition",
            "--n-spins",
            "5",
            "--p",
            "2",
            "--draws",
            "3000",
            "--betas",
            "1,0.5,0",
        ],
        &["chsh", "--backend", "classical", "--samples", "5000"],
        &[
            "chsh-search",
            "--backend",
            "classical",
            "--resolution",
            "4",
            "--samples",
            "2000",
        ],
    ];
    let tmp = tempfile::tempdir()?;
    let mut failures = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let dirs: Vec<_> = [(1, "a"), (1, "b"), (4, "c")]
            .iter()
            .map(|&(w, tag)| (w, tmp.path().join(format!("{i}{tag}"))))
            .collect();
        let mut ok = true;
        for (w, d) in &dirs {
            ok &= run_cli(args, d, *w)?;
        }
        let first = dir_bytes(&dirs[0].1)?;
        ok &= !first.is_empty();
        for (_, d) in &dirs[1..] {
            ok &= dir_bytes(d)? == first;
        }
        if !ok {
            failures.push(args[0]);
        }
    }
    Ok(check(
        failures.is_empty(),
        format!(
            "{} subcommands × (repeat, --workers 1 vs 4) byte-identical; failing: {failures:?}",
            runs.len()
        ),
    ))
}

type Criterion = fn() -> nclab::Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("moment dichotomy", moment_dichotomy),
        ("crossing witness", crossing_witness),
        ("commutator dichotomy", commutator_dichotomy),
        ("wigner convergence", wigner_convergence),
        (
            "quenching stability and discrimination",
            quenching_stability,
        ),
        ("replica partition sum", replica_partition),
        ("stochastic-limit convergence", stochastic_limit),
        ("classical CHSH bound and truncation stability", chsh_bound),
        ("end-to-end determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = f().unwrap_or_else(|e| check(false, format!("error: {e}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {tag}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
