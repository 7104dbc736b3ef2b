//! The `nclab` command-line surface.
//!
//! Every subcommand resolves its parameters from three layers: built-in
//! defaults, an optional JSON config file with flat keys named like the
//! flags, and the flags themselves. The resolved parameters are echoed to
//! `run.json` in the output directory, in a form that can be passed back
//! through `--config` to repeat the run.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 capacity refusal,
//! numerical failure or I/O failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bell::{self, Backend, ChshConfig, ChshSearch, ObservableSpec, Transform};
use crate::error::{Error, Result};
use crate::fock::{self, BoseFockBasis, FockBasis, FreeFockBasis};
use crate::limit::{self, Quadrature, RescalingConfig, SpectralDensity, TestFunction};
use crate::quench::{self, PartitionMethod, QuenchingSpec, ReplicaModelConfig};
use crate::report::{self, fmt_csv};
use crate::wick::{self, ContractionRule, OperatorExpr, Statistics};
use crate::wigner::{self, EnsembleConfig};

pub const OUT_DIR_ENV: &str = "NCLAB_OUT_DIR";
pub const MANIFEST: &str = "run.json";

#[derive(Debug, Parser)]
#[command(
    name = "nclab",
    version,
    about = "Noncommutative probability laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with flat keys named like the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "nclab-out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vacuum moment of an operator word.
    Moments(MomentsFlags),
    /// Truncated Fock matrices checked against the moment engine.
    Fock(FockFlags),
    /// Van Hove convergence table of the rescaled two-point function.
    Limit(LimitFlags),
    /// Freeness report for independent symmetric Gaussian matrices.
    Wigner(WignerFlags),
    /// Quenched correlators, algebraic and matrix.
    Quench(QuenchFlags),
    /// Replica partition sum over a grid of inverse temperatures.
    Partition(PartitionFlags),
    /// CHSH functional for four observables.
    Chsh(ChshFlags),
    /// Grid and descent search for the largest |S|.
    ChshSearch(ChshSearchFlags),
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nclab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let (common, name) = match &cli.command {
        Command::Moments(f) => (&f.common, "moments"),
        Command::Fock(f) => (&f.common, "fock"),
        Command::Limit(f) => (&f.common, "limit"),
        Command::Wigner(f) => (&f.common, "wigner"),
        Command::Quench(f) => (&f.common, "quench"),
        Command::Partition(f) => (&f.common, "partition"),
        Command::Chsh(f) => (&f.common, "chsh"),
        Command::ChshSearch(f) => (&f.common, "chsh-search"),
    };
    let file = common
        .config
        .as_deref()
        .map(|p| load_config(p, name))
        .transpose()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = common.workers {
        if w == 0 {
            return Err(Error::invalid("--workers must be ≥ 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let out = common.out.clone();
    pool.install(|| match &cli.command {
        Command::Moments(f) => moments(&resolve(f, file)?, &out),
        Command::Fock(f) => fock_cmd(&resolve(f, file)?, &out),
        Command::Limit(f) => limit_cmd(&resolve(f, file)?, &out),
        Command::Wigner(f) => wigner_cmd(&resolve(f, file)?, &out),
        Command::Quench(f) => quench_cmd(&resolve(f, file)?, &out),
        Command::Partition(f) => partition_cmd(&resolve(f, file)?, &out),
        Command::Chsh(f) => chsh_cmd(&resolve(f, file)?, &out),
        Command::ChshSearch(f) => chsh_search_cmd(&resolve(f, file)?, &out),
    })
}

// Manifest bookkeeping keys allowed in a config file.
const SUBCOMMAND_KEY: &str = "subcommand";
const VERSION_KEY: &str = "version";

fn load_config(path: &Path, subcommand: &str) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(Error::Config(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };
    if let Some(v) = map.remove(SUBCOMMAND_KEY) {
        if v.as_str() != Some(subcommand) {
            return Err(Error::Config(format!(
                "config {} was written for `{v}`, not `{subcommand}`",
                path.display()
            )));
        }
    }
    map.remove(VERSION_KEY);
    Ok(map)
}

/// Defaults, then the config file, then flags.
fn resolve<F: Serialize, R: DeserializeOwned>(
    flags: &F,
    file: Option<Map<String, Value>>,
) -> Result<R> {
    let mut merged = file.unwrap_or_default();
    let Value::Object(given) = serde_json::to_value(flags)? else {
        unreachable!("flag structs serialize to objects");
    };
    merged.extend(given);
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| Error::Config(format!("bad configuration: {e}")))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create output directory {}: {e}", dir.display()),
        ))
    })
}

#[derive(Serialize)]
struct Manifest<'a, T> {
    subcommand: &'a str,
    version: &'a str,
    #[serde(flatten)]
    config: &'a T,
}

fn write_manifest<T: Serialize>(dir: &Path, subcommand: &str, config: &T) -> Result<()> {
    prepare_out(dir)?;
    report::write_json(
        &dir.join(MANIFEST),
        &Manifest {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            config,
        },
    )
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Parses the operator-word mini-language: comma-separated `Q<i>`, `A<i>`
/// (annihilator) and `Ad<i>` (creator).
pub fn parse_pattern(text: &str) -> Result<Vec<OperatorExpr>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|raw| {
            let tok = raw.trim();
            let (ctor, digits): (fn(usize) -> OperatorExpr, &str) =
                if let Some(d) = tok.strip_prefix("Ad") {
                    (OperatorExpr::creator, d)
                } else if let Some(d) = tok.strip_prefix('A') {
                    (OperatorExpr::annihilator, d)
                } else if let Some(d) = tok.strip_prefix('Q') {
                    (OperatorExpr::q, d)
                } else {
                    return Err(Error::invalid(format!(
                        "unknown token `{tok}`; expected Q<i>, A<i> or Ad<i>"
                    )));
                };
            let mode = digits
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("token `{tok}` needs a mode index")))?;
            Ok(ctor(mode))
        })
        .collect()
}

fn pattern_modes(factors: &[OperatorExpr], modes: Option<usize>) -> Result<usize> {
    let highest = factors.iter().filter_map(OperatorExpr::max_mode).max();
    match (modes, highest) {
        (Some(0), _) => Err(Error::invalid("--modes must be ≥ 1")),
        (Some(m), Some(h)) if h >= m => Err(Error::invalid(format!(
            "mode {h} is out of range for {m} modes (valid 0..={})",
            m - 1
        ))),
        (Some(m), _) => Ok(m),
        (None, h) => Ok(h.map_or(1, |h| h + 1)),
    }
}

fn parse_statistics(text: &str) -> Result<Statistics> {
    text.parse()
}

// ---- moments -------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct MomentsFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Operator word, e.g. `Q0,Q1,Q0,Q1` or `A0,Ad0`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    /// `boltzmann` (alias `free`) or `bose`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    statistics: Option<String>,
    /// Number of modes; defaults to one past the highest index used.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct MomentsConfig {
    pattern: String,
    statistics: String,
    modes: Option<usize>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            pattern: String::new(),
            statistics: "boltzmann".into(),
            modes: None,
        }
    }
}

#[derive(Serialize)]
struct MomentsOutput<'a> {
    pattern: &'a str,
    statistics: Statistics,
    modes: usize,
    value: f64,
}

fn moments(cfg: &MomentsConfig, out: &Path) -> Result<()> {
    let factors = parse_pattern(&cfg.pattern)?;
    let modes = pattern_modes(&factors, cfg.modes)?;
    let statistics = parse_statistics(&cfg.statistics)?;
    let value = wick::expr_moment(&factors, &ContractionRule::new(statistics, modes))?;
    write_manifest(out, "moments", cfg)?;
    report::write_json(
        &out.join("moments.json"),
        &MomentsOutput {
            pattern: &cfg.pattern,
            statistics,
            modes,
            value,
        },
    )?;
    println!("{value:?}");
    Ok(())
}

// ---- fock ----------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct FockFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Operator word in the pattern mini-language.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    /// `boltzmann` for the full Fock basis, `bose` for the symmetric one.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    statistics: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<usize>,
    /// Truncation: maximal word length (free) or total occupation (Bose).
    /// Defaults to the smallest level that is exact for the pattern.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_len: Option<usize>,
    /// Also write the matrix of the whole product as `matrix.csv`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dump_matrix: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct FockConfig {
    pattern: String,
    statistics: String,
    modes: Option<usize>,
    max_len: Option<usize>,
    dump_matrix: bool,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            pattern: "Q0,Q1,Q0,Q1".into(),
            statistics: "boltzmann".into(),
            modes: None,
            max_len: None,
            dump_matrix: false,
        }
    }
}

#[derive(Serialize)]
struct FockOutput {
    basis: fock::BasisKind,
    dim: usize,
    max_deviation: f64,
    rows: Vec<fock::CrosscheckRow>,
}

fn fock_cmd(cfg: &FockConfig, out: &Path) -> Result<()> {
    let factors = parse_pattern(&cfg.pattern)?;
    if factors.is_empty() {
        return Err(Error::invalid("--pattern is required"));
    }
    let modes = pattern_modes(&factors, cfg.modes)?;
    let statistics = parse_statistics(&cfg.statistics)?;
    let level = cfg.max_len.unwrap_or(factors.len().div_ceil(2).max(1));
    let rule = ContractionRule::new(statistics, modes);
    match statistics {
        Statistics::Boltzmann => fock_report(
            &factors,
            &rule,
            &FreeFockBasis::new(modes, level)?,
            cfg,
            out,
        ),
        Statistics::Bose => fock_report(
            &factors,
            &rule,
            &BoseFockBasis::new(modes, level)?,
            cfg,
            out,
        ),
    }
}

fn fock_report<B: FockBasis>(
    factors: &[OperatorExpr],
    rule: &ContractionRule,
    basis: &B,
    cfg: &FockConfig,
    out: &Path,
) -> Result<()> {
    let check = fock::crosscheck(factors, rule, basis)?;
    let product = factors
        .iter()
        .fold(OperatorExpr::identity(), |acc, f| &acc * f);
    let matrix = cfg
        .dump_matrix
        .then(|| fock::expr_matrix(&product, basis))
        .transpose()?;
    write_manifest(out, "fock", cfg)?;
    report::write_json(
        &out.join("fock.json"),
        &FockOutput {
            basis: basis.kind(),
            dim: basis.dim(),
            max_deviation: check.max_deviation(),
            rows: check.rows.clone(),
        },
    )?;
    if let Some(m) = matrix {
        fock::write_matrix_csv(&m, basis, create(out, "matrix.csv")?)?;
    }
    println!(
        "basis {} (dim {}): max deviation {:e}",
        basis.kind(),
        basis.dim(),
        check.max_deviation()
    );
    Ok(())
}

// ---- limit ---------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct LimitFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Couplings, strictly decreasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    f_center: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    f_width: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    g_center: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    g_width: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_center: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_width: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_amplitude: Option<f64>,
    /// Dispersion offsets; the resonance shell sits at `omega0 + eps_pk - eps_p`.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_pk: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_half_width: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_half_width: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct LimitConfig {
    lambdas: Vec<f64>,
    omega0: f64,
    f_center: f64,
    f_width: f64,
    g_center: f64,
    g_width: f64,
    rho_center: f64,
    rho_width: f64,
    rho_amplitude: f64,
    eps_p: f64,
    eps_pk: f64,
    t_step: f64,
    t_half_width: f64,
    omega_step: f64,
    omega_half_width: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        let q = Quadrature::default();
        LimitConfig {
            lambdas: vec![0.5, 0.35, 0.25, 0.18],
            omega0: 0.0,
            f_center: 0.0,
            f_width: 1.0,
            g_center: 0.0,
            g_width: 1.0,
            rho_center: 0.0,
            rho_width: 1.0,
            rho_amplitude: 1.0,
            eps_p: 0.0,
            eps_pk: 0.0,
            t_step: q.t_step,
            t_half_width: q.t_half_width,
            omega_step: q.omega_step,
            omega_half_width: q.omega_half_width,
        }
    }
}

fn limit_cmd(cfg: &LimitConfig, out: &Path) -> Result<()> {
    let quad = Quadrature {
        t_step: cfg.t_step,
        t_half_width: cfg.t_half_width,
        omega_step: cfg.omega_step,
        omega_half_width: cfg.omega_half_width,
    };
    let config = RescalingConfig::new(cfg.lambdas.clone(), cfg.omega0, quad)?;
    let f = TestFunction::unit(cfg.f_center, cfg.f_width)?;
    let g = TestFunction::unit(cfg.g_center, cfg.g_width)?;
    let rho = SpectralDensity::new(cfg.rho_center, cfg.rho_width, cfg.rho_amplitude)?
        .with_dispersion(cfg.eps_p, cfg.eps_pk);
    let table = limit::convergence_table(&config, &f, &g, &rho)?;
    write_manifest(out, "limit", cfg)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_csv(r.lambda),
                fmt_csv(r.re_value),
                fmt_csv(r.im_value),
                fmt_csv(r.abs_error),
            ]
        })
        .collect();
    report::write_csv(
        create(out, "convergence.csv")?,
        &["lambda", "re_value", "im_value", "abs_error"],
        &rows,
    )?;
    report::write_json(&out.join("convergence.json"), &table)?;
    println!(
        "limit {:e}, final relative error {:e}, converged {}",
        table.limit,
        table.final_relative_error(),
        table.converged
    );
    Ok(())
}

// ---- wigner --------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct WignerFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Matrix size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Number of independent replicas.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct WignerConfig {
    n: usize,
    p: usize,
    samples: usize,
    max_degree: usize,
    seed: u64,
}

impl Default for WignerConfig {
    fn default() -> Self {
        WignerConfig {
            n: 256,
            p: 2,
            samples: 64,
            max_degree: 6,
            seed: 2024,
        }
    }
}

fn join_indices(pattern: &[usize]) -> String {
    pattern
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn wigner_cmd(cfg: &WignerConfig, out: &Path) -> Result<()> {
    let ensemble = EnsembleConfig::new(cfg.n, cfg.p, cfg.samples, cfg.seed)?;
    let report = wigner::freeness_report(cfg.max_degree, &ensemble)?;
    write_manifest(out, "wigner", cfg)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                join_indices(&r.pattern),
                fmt_csv(r.estimate),
                fmt_csv(r.stderr),
                fmt_csv(r.prediction),
                fmt_csv(r.zscore),
            ]
        })
        .collect();
    report::write_csv(
        create(out, "freeness.csv")?,
        &["pattern", "estimate", "stderr", "prediction", "zscore"],
        &rows,
    )?;
    report::write_json(&out.join("freeness.json"), &report)?;
    println!(
        "{} patterns, max |z| {:.3}",
        report.rows.len(),
        report.max_abs_zscore()
    );
    Ok(())
}

// ---- quench --------------------------------------------------------------

/// `uniform`, `axis<a>`, or a comma-separated coefficient vector.
fn parse_quenching(text: &str, p: usize) -> Result<QuenchingSpec> {
    let t = text.trim();
    if t == "uniform" {
        QuenchingSpec::uniform(p)
    } else if let Some(a) = t.strip_prefix("axis") {
        let a = a
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("`{t}` needs a replica index")))?;
        QuenchingSpec::axis(p, a)
    } else {
        let coefficients = t
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad coefficient `{c}` in `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if coefficients.len() != p {
            return Err(Error::invalid(format!(
                "quenching `{t}` has {} coefficients, expected p = {p}",
                coefficients.len()
            )));
        }
        QuenchingSpec::new(coefficients)
    }
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct QuenchFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Number of replicas.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    /// One quenching per factor, in order: `uniform`, `axis<a>` or
    /// `c_1,…,c_p`. Repeat the flag for each factor.
    #[arg(long = "spec")]
    #[serde(rename = "spec", skip_serializing_if = "Option::is_none")]
    specs: Option<Vec<String>>,
    /// Matrix size for the Monte Carlo estimate; 0 skips it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct QuenchConfig {
    p: usize,
    spec: Vec<String>,
    n: usize,
    samples: usize,
    seed: u64,
}

impl Default for QuenchConfig {
    fn default() -> Self {
        QuenchConfig {
            p: 2,
            spec: vec!["uniform".into(); 4],
            n: 0,
            samples: 64,
            seed: 2024,
        }
    }
}

#[derive(Serialize)]
struct QuenchOutput {
    p: usize,
    coefficients: Vec<Vec<f64>>,
    boltzmann: f64,
    bose: f64,
    matrix: Option<MatrixEstimate>,
}

#[derive(Serialize)]
struct MatrixEstimate {
    n: usize,
    samples: usize,
    estimate: f64,
    stderr: f64,
}

fn quench_cmd(cfg: &QuenchConfig, out: &Path) -> Result<()> {
    let specs = cfg
        .spec
        .iter()
        .map(|s| parse_quenching(s, cfg.p))
        .collect::<Result<Vec<_>>>()?;
    if specs.is_empty() {
        return Err(Error::invalid("at least one --spec is required"));
    }
    let moment = |st| quench::quenched_algebraic_moment(&specs, &ContractionRule::new(st, cfg.p));
    let boltzmann = moment(Statistics::Boltzmann)?;
    let bose = moment(Statistics::Bose)?;
    let matrix = if cfg.n > 0 {
        let ensemble = EnsembleConfig::new(cfg.n, cfg.p, cfg.samples, cfg.seed)?;
        let est = quench::quenched_trace_moment(&specs, &ensemble)?;
        Some(MatrixEstimate {
            n: cfg.n,
            samples: cfg.samples,
            estimate: est.value,
            stderr: est.stderr,
        })
    } else {
        None
    };
    write_manifest(out, "quench", cfg)?;
    report::write_json(
        &out.join("quench.json"),
        &QuenchOutput {
            p: cfg.p,
            coefficients: specs.iter().map(|s| s.coefficients().to_vec()).collect(),
            boltzmann,
            bose,
            matrix,
        },
    )?;
    println!("boltzmann {boltzmann:?}, bose {bose:?}");
    Ok(())
}

// ---- partition -----------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct PartitionFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_spins: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    /// Inverse temperatures; output rows are sorted ascending.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    betas: Option<Vec<f64>>,
    /// `monte-carlo` or `quadrature`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    /// Gaussian draws for `monte-carlo`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    draws: Option<usize>,
    /// Gauss–Hermite order per coupling for `quadrature`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    /// Quenching: `uniform`, `axis<a>` or `c_1,…,c_p`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct PartitionConfig {
    n_spins: usize,
    p: usize,
    betas: Vec<f64>,
    method: String,
    draws: usize,
    order: usize,
    spec: String,
    seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            n_spins: 4,
            p: 1,
            betas: vec![0.0, 0.25, 0.5, 1.0],
            method: "monte-carlo".into(),
            draws: 100_000,
            order: 8,
            spec: "uniform".into(),
            seed: 2024,
        }
    }
}

#[derive(Serialize)]
struct PartitionRecord {
    beta: f64,
    #[serde(flatten)]
    result: quench::PartitionResult,
}

fn partition_cmd(cfg: &PartitionConfig, out: &Path) -> Result<()> {
    let method: PartitionMethod = serde_json::from_value(Value::String(cfg.method.clone()))
        .map_err(|_| Error::invalid(format!("unknown method `{}`", cfg.method)))?;
    let first = *cfg
        .betas
        .first()
        .ok_or_else(|| Error::invalid("at least one β is required"))?;
    let model = match method {
        PartitionMethod::MonteCarlo => {
            ReplicaModelConfig::monte_carlo(cfg.n_spins, first, cfg.p, cfg.draws, cfg.seed)?
        }
        PartitionMethod::Quadrature => {
            ReplicaModelConfig::quadrature(cfg.n_spins, first, cfg.p, cfg.order)?
        }
    };
    let spec = parse_quenching(&cfg.spec, cfg.p)?;
    let sweep = quench::partition_sweep(&model, &spec, &cfg.betas)?;
    write_manifest(out, "partition", cfg)?;
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|(b, r)| vec![fmt_csv(*b), fmt_csv(r.z), fmt_csv(r.stderr)])
        .collect();
    report::write_csv(
        create(out, "partition.csv")?,
        &["beta", "Z", "stderr"],
        &rows,
    )?;
    let records: Vec<PartitionRecord> = sweep
        .into_iter()
        .map(|(beta, result)| PartitionRecord { beta, result })
        .collect();
    report::write_json(&out.join("partition.json"), &records)?;
    for r in &records {
        println!(
            "beta {:e}: Z {:e} ± {:e}",
            r.beta, r.result.z, r.result.stderr
        );
    }
    Ok(())
}

// ---- chsh ----------------------------------------------------------------

fn parse_backend(kind: &str, max_len: usize, samples: usize, seed: u64) -> Result<Backend> {
    match kind {
        "fock" => Ok(Backend::Fock { max_len }),
        "classical" => Ok(Backend::Classical { samples, seed }),
        other => Err(Error::invalid(format!(
            "unknown backend `{other}`; expected fock or classical"
        ))),
    }
}

fn truncation(backend: Backend) -> Option<usize> {
    match backend {
        Backend::Fock { max_len } => Some(max_len),
        Backend::Classical { .. } => None,
    }
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ChshFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Coefficients of `A1` over the modes, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    b1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    b2: Option<Vec<f64>>,
    /// `sign` or `clamp`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<String>,
    /// Divide each field by `√p`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    quenching: Option<bool>,
    /// `fock` or `classical`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_len: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ChshFileConfig {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub transform: String,
    pub quenching: bool,
    pub backend: String,
    pub max_len: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ChshFileConfig {
    fn default() -> Self {
        let s = std::f64::consts::SQRT_2;
        ChshFileConfig {
            a1: vec![s, 0.0, 0.0, 0.0],
            a2: vec![0.0, s, 0.0, 0.0],
            b1: vec![0.0, 0.0, 1.0, 1.0],
            b2: vec![0.0, 0.0, 1.0, -1.0],
            transform: "sign".into(),
            quenching: true,
            backend: "fock".into(),
            max_len: 3,
            samples: 10_000,
            seed: 2024,
        }
    }
}

impl ChshFileConfig {
    /// Parses a config file in the format accepted by `chsh --config`.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        if let Value::Object(map) = &mut value {
            map.remove(SUBCOMMAND_KEY);
            map.remove(VERSION_KEY);
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("bad configuration: {e}")))
    }

    pub fn to_chsh(&self) -> Result<ChshConfig> {
        let transform: Transform = self.transform.parse()?;
        let spec = |c: &[f64]| ObservableSpec::new(c.to_vec(), self.quenching, transform);
        let config = ChshConfig {
            a1: spec(&self.a1)?,
            a2: spec(&self.a2)?,
            b1: spec(&self.b1)?,
            b2: spec(&self.b2)?,
            backend: parse_backend(&self.backend, self.max_len, self.samples, self.seed)?,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Serialize)]
struct ChshOutput<'a> {
    config: &'a ChshConfig,
    #[serde(rename = "S")]
    s: f64,
    correlators: bell::Correlators,
    raw_correlators: Option<bell::Correlators>,
    commutator_norms: Option<bell::CommutatorNorms>,
    stderr: Option<f64>,
    backend: Backend,
    truncation: Option<usize>,
}

impl<'a> ChshOutput<'a> {
    fn new(config: &'a ChshConfig, r: &bell::ChshResult) -> Self {
        ChshOutput {
            config,
            s: r.s,
            correlators: r.correlators,
            raw_correlators: r.raw_correlators,
            commutator_norms: r.commutator_norms,
            stderr: r.stderr,
            backend: r.backend,
            truncation: truncation(r.backend),
        }
    }
}

fn chsh_cmd(cfg: &ChshFileConfig, out: &Path) -> Result<()> {
    let config = cfg.to_chsh()?;
    let result = bell::chsh_value(&config)?;
    write_manifest(out, "chsh", cfg)?;
    report::write_json(&out.join("chsh.json"), &ChshOutput::new(&config, &result))?;
    match result.stderr {
        Some(se) => println!("S = {:.6} ± {:.6}", result.s, se),
        None => println!("S = {:.6}", result.s),
    }
    Ok(())
}

// ---- chsh-search ---------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ChshSearchFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<usize>,
    /// Modes carrying the A-side observables.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    a_support: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    b_support: Option<Vec<usize>>,
    /// Grid points per angle.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    transform: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    quenching: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_len: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct ChshSearchConfig {
    modes: usize,
    a_support: Vec<usize>,
    b_support: Vec<usize>,
    resolution: usize,
    refinement_steps: usize,
    transform: String,
    quenching: bool,
    backend: String,
    max_len: usize,
    samples: usize,
    seed: u64,
}

impl Default for ChshSearchConfig {
    fn default() -> Self {
        ChshSearchConfig {
            modes: 4,
            a_support: vec![0, 1],
            b_support: vec![2, 3],
            resolution: 8,
            refinement_steps: 12,
            transform: "sign".into(),
            quenching: true,
            backend: "fock".into(),
            max_len: 3,
            samples: 10_000,
            seed: 2024,
        }
    }
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    best_angles: &'a [f64],
    #[serde(rename = "coarse_best_abs_S")]
    coarse_best_abs_s: f64,
    evaluations: usize,
    #[serde(flatten)]
    best: ChshOutput<'a>,
}

fn chsh_search_cmd(cfg: &ChshSearchConfig, out: &Path) -> Result<()> {
    let search = ChshSearch {
        modes: cfg.modes,
        a_support: cfg.a_support.clone(),
        b_support: cfg.b_support.clone(),
        resolution: cfg.resolution,
        refinement_steps: cfg.refinement_steps,
        transform: cfg.transform.parse()?,
        quenching: cfg.quenching,
        backend: parse_backend(&cfg.backend, cfg.max_len, cfg.samples, cfg.seed)?,
    };
    let outcome = bell::maximize_chsh(&search)?;
    write_manifest(out, "chsh-search", cfg)?;
    let rows: Vec<Vec<String>> = outcome
        .trace
        .iter()
        .map(|r| {
            let angles = r
                .angles
                .iter()
                .map(|&a| fmt_csv(a))
                .collect::<Vec<_>>()
                .join(" ");
            let phase = match r.phase {
                bell::SearchPhase::Grid => "grid",
                bell::SearchPhase::Refine => "refine",
            };
            vec![r.index.to_string(), phase.to_string(), angles, fmt_csv(r.s)]
        })
        .collect();
    report::write_csv(
        create(out, "trace.csv")?,
        &["index", "phase", "angles", "S"],
        &rows,
    )?;
    report::write_json(
        &out.join("best.json"),
        &SearchOutput {
            best_angles: &outcome.best_angles,
            coarse_best_abs_s: outcome.coarse_best_abs_s,
            evaluations: outcome.trace.len(),
            best: ChshOutput::new(&outcome.best, &outcome.result),
        },
    )?;
    println!(
        "best S = {:.6} (coarse |S| {:.6}, {} evaluations)",
        outcome.result.s,
        outcome.coarse_best_abs_s,
        outcome.trace.len()
    );
    Ok(())
}
