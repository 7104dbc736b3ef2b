//! Quenching maps and the replica partition sum.
//!
//! A quenching sends one disorder variable to a normalized combination of
//! `p` independent replicas, `J ↦ (1/√p) Σ_a c_a J^(a)` with `Σ c_a² = p`.
//! Equal coefficients give the plain coproduct; any other admissible vector
//! models a different preparation. On the algebra side the same map acts on
//! the free generators, `Q ↦ (1/√p) Σ_a c_a Q_a`.
//!
//! Powers of a single quenched variable cannot tell quenchings apart (the
//! Gaussian and the semicircle are both stable under normalized sums).
//! Products mixing two quenchings can: see [`quenched_algebraic_moment`].

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wick::{self, ContractionRule, OperatorExpr};
use crate::wigner::{self, EnsembleConfig, MomentEstimate, ReplicaSample};

/// Relative tolerance on `Σ c_a² = p`.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-9;
pub const MAX_SPINS: usize = 12;
/// Quadrature is offered while the number of integrated couplings is small.
pub const MAX_QUADRATURE_DIM: usize = 12;
/// Upper bound on quadrature nodes times spin configurations.
pub const MAX_QUADRATURE_WORK: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuenchingSpec {
    coefficients: Vec<f64>,
}

impl QuenchingSpec {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let p = coefficients.len();
        if p == 0 {
            return Err(Error::invalid("a quenching needs at least one replica"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation(
                "quenching coefficients must be finite".into(),
            ));
        }
        let norm2: f64 = coefficients.iter().map(|c| c * c).sum();
        if (norm2 - p as f64).abs() > COEFFICIENT_TOLERANCE * p as f64 {
            return Err(Error::Validation(format!(
                "quenching coefficients must satisfy Σc² = p = {p}, got {norm2}"
            )));
        }
        Ok(QuenchingSpec { coefficients })
    }

    /// Equal weights: the plain coproduct.
    pub fn uniform(p: usize) -> Result<Self> {
        Self::new(vec![1.0; p])
    }

    /// All weight on replica `a`: `c_a = √p`.
    pub fn axis(p: usize, a: usize) -> Result<Self> {
        if a >= p {
            return Err(Error::invalid(format!("axis {a} out of range for p = {p}")));
        }
        let mut c = vec![0.0; p];
        c[a] = (p as f64).sqrt();
        Self::new(c)
    }

    /// Rescales an arbitrary nonzero direction onto `Σ c² = p`.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid(
                "quenching direction must be nonzero and finite",
            ));
        }
        let scale = (direction.len() as f64).sqrt() / norm;
        Self::new(direction.iter().map(|c| c * scale).collect())
    }

    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Normalized weights `c_a/√p`, a unit vector.
    pub fn weights(&self) -> Vec<f64> {
        let s = 1.0 / (self.p() as f64).sqrt();
        self.coefficients.iter().map(|c| c * s).collect()
    }

    /// `(1/√p) Σ_a c_a Q_a`.
    pub fn field(&self) -> OperatorExpr {
        OperatorExpr::linear_field(&self.weights())
    }
}

impl TryFrom<Vec<f64>> for QuenchingSpec {
    type Error = Error;

    fn try_from(c: Vec<f64>) -> Result<Self> {
        QuenchingSpec::new(c)
    }
}

impl From<QuenchingSpec> for Vec<f64> {
    fn from(s: QuenchingSpec) -> Self {
        s.coefficients
    }
}

/// `(1/√p) Σ_a c_a J^(a)`.
pub fn apply_quenching(spec: &QuenchingSpec, sample: &ReplicaSample) -> Result<DMatrix<f64>> {
    if spec.p() != sample.p() {
        return Err(Error::invalid(format!(
            "quenching has p = {}, sample has {} replicas",
            spec.p(),
            sample.p()
        )));
    }
    Ok(quench_matrices(spec, sample.replicas()))
}

fn quench_matrices(spec: &QuenchingSpec, replicas: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = replicas[0].nrows();
    let mut out = DMatrix::zeros(n, n);
    for (w, m) in spec.weights().iter().zip(replicas) {
        if *w != 0.0 {
            out += m * *w;
        }
    }
    out
}

fn common_p(specs: &[QuenchingSpec]) -> Result<usize> {
    let p = specs
        .first()
        .ok_or_else(|| Error::invalid("at least one quenching is required"))?
        .p();
    if let Some(bad) = specs.iter().find(|s| s.p() != p) {
        return Err(Error::invalid(format!(
            "mixed replica counts: {p} and {}",
            bad.p()
        )));
    }
    Ok(p)
}

/// Vacuum moment of the ordered product of quenched generators.
pub fn quenched_algebraic_moment(specs: &[QuenchingSpec], rule: &ContractionRule) -> Result<f64> {
    let p = common_p(specs)?;
    if rule.modes() < p {
        return Err(Error::invalid(format!(
            "contraction rule covers {} modes, quenching needs {p}",
            rule.modes()
        )));
    }
    // Pair kernel ⟨c, W c′⟩/p. A spec paired with itself under the unit
    // table is exactly 1 by the constraint Σc² = p.
    let n = specs.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            kernel[i * n + j] = if rule.is_identity() && specs[i] == specs[j] {
                1.0
            } else {
                let (ci, cj) = (specs[i].coefficients(), specs[j].coefficients());
                let mut acc = 0.0;
                for (a, x) in ci.iter().enumerate() {
                    for (b, y) in cj.iter().enumerate() {
                        acc += x * y * rule.weight(a, b);
                    }
                }
                acc / p as f64
            };
        }
    }
    wick::kernel_moment(n, rule.statistics(), |i, j| kernel[i * n + j])
}

/// Monte Carlo `τ` of the product of quenched matrices, each scaled by
/// `1/√N`.
pub fn quenched_trace_moment(
    specs: &[QuenchingSpec],
    config: &EnsembleConfig,
) -> Result<MomentEstimate> {
    let p = common_p(specs)?;
    config.validate()?;
    if p != config.p {
        return Err(Error::invalid(format!(
            "quenching has p = {p}, ensemble has p = {}",
            config.p
        )));
    }
    // distinct specs are quenched once per draw
    let mut distinct: Vec<&QuenchingSpec> = Vec::new();
    let mut slot = Vec::with_capacity(specs.len());
    for s in specs {
        match distinct.iter().position(|d| *d == s) {
            Some(i) => slot.push(i),
            None => {
                slot.push(distinct.len());
                distinct.push(s);
            }
        }
    }
    let values: Vec<f64> = (0..config.samples as u64)
        .into_par_iter()
        .map(|s| {
            let sample = wigner::sample_replicas_at(config, s)?;
            let quenched: Vec<DMatrix<f64>> = distinct
                .iter()
                .map(|spec| quench_matrices(spec, sample.replicas()))
                .collect();
            let factors: Vec<&DMatrix<f64>> = slot.iter().map(|&i| &quenched[i]).collect();
            Ok(wigner::normalized_trace_product(&factors))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentEstimate::from_values(&values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMethod {
    MonteCarlo,
    Quadrature,
}

/// Spin model and Gaussian integration settings for [`replica_partition`].
///
/// `gauss_samples` is the number of Monte Carlo draws over the couplings, or
/// the Gauss–Hermite order per coupling when `method` is quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaModelConfig {
    pub n_spins: usize,
    pub beta: f64,
    pub p: usize,
    pub gauss_samples: usize,
    pub seed: u64,
    pub method: PartitionMethod,
}

impl ReplicaModelConfig {
    pub fn monte_carlo(
        n_spins: usize,
        beta: f64,
        p: usize,
        draws: usize,
        seed: u64,
    ) -> Result<Self> {
        let c = ReplicaModelConfig {
            n_spins,
            beta,
            p,
            gauss_samples: draws,
            seed,
            method: PartitionMethod::MonteCarlo,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn quadrature(n_spins: usize, beta: f64, p: usize, order: usize) -> Result<Self> {
        let c = ReplicaModelConfig {
            n_spins,
            beta,
            p,
            gauss_samples: order,
            seed: 0,
            method: PartitionMethod::Quadrature,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn couplings(&self) -> usize {
        self.n_spins * self.n_spins.saturating_sub(1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::invalid("at least one spin is required"));
        }
        if self.n_spins > MAX_SPINS {
            return Err(Error::capacity(format!(
                "{} spins exceed the exact-enumeration guard of {MAX_SPINS}",
                self.n_spins
            )));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::invalid(format!(
                "inverse temperature must be finite and ≥ 0, got {}",
                self.beta
            )));
        }
        if self.p == 0 {
            return Err(Error::invalid("replica count p must be ≥ 1"));
        }
        if self.gauss_samples == 0 {
            return Err(Error::invalid("gauss_samples must be ≥ 1"));
        }
        if self.method == PartitionMethod::Quadrature {
            let dim = self.p * self.couplings();
            if dim > MAX_QUADRATURE_DIM {
                return Err(Error::capacity(format!(
                    "quadrature over {dim} Gaussian variables exceeds {MAX_QUADRATURE_DIM}"
                )));
            }
            let work = (self.gauss_samples as u128)
                .checked_pow(dim as u32)
                .and_then(|x| x.checked_mul(1u128 << self.n_spins));
            if work.is_none_or(|w| w > MAX_QUADRATURE_WORK) {
                return Err(Error::capacity(format!(
                    "order {} over {dim} variables with {} spins exceeds the work guard",
                    self.gauss_samples, self.n_spins
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionResult {
    #[serde(rename = "Z")]
    pub z: f64,
    pub stderr: f64,
    pub method: PartitionMethod,
    /// Always `"gaussian-probability-measure"`.
    pub normalization: &'static str,
    /// `ln` of the factor `(2π)^{d/2}` (with `d = p·N(N+1)/2` integrated
    /// entries) that converts to the unnormalized Gaussian weight.
    pub log_unnormalized_factor: f64,
}

/// Precomputed `σ_i σ_j` products for every spin configuration.
struct SpinTable {
    n_spins: usize,
    pairs: Vec<(usize, usize)>,
    // products[config * pairs + e]
    products: Vec<f64>,
}

impl SpinTable {
    fn new(n_spins: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n_spins)
            .flat_map(|i| ((i + 1)..n_spins).map(move |j| (i, j)))
            .collect();
        let configs = 1usize << n_spins;
        let mut products = Vec::with_capacity(configs * pairs.len());
        for sigma in 0..configs {
            let spin = |i: usize| if (sigma >> i) & 1 == 1 { 1.0 } else { -1.0 };
            products.extend(pairs.iter().map(|&(i, j)| spin(i) * spin(j)));
        }
        SpinTable {
            n_spins,
            pairs,
            products,
        }
    }

    /// `Σ_σ exp(β/√N Σ_{i<j} J_ij σ_i σ_j)` for couplings listed pair by pair.
    fn partition_sum(&self, couplings: &[f64], beta: f64) -> f64 {
        let e = self.pairs.len();
        let scale = beta / (self.n_spins as f64).sqrt();
        if e == 0 || beta == 0.0 {
            return (1usize << self.n_spins) as f64;
        }
        self.products
            .chunks_exact(e)
            .map(|row| {
                let field: f64 = row.iter().zip(couplings).map(|(s, j)| s * j).sum();
                (scale * field).exp()
            })
            .sum()
    }
}

/// `E_J Σ_σ exp(-β H[σ, quenched J])` for the Sherrington–Kirkpatrick energy
/// `H = -(1/√N) Σ_{i<j} J_ij σ_i σ_j`, with every replica coupling standard
/// normal. The spin sum is exact.
pub fn replica_partition(
    config: &ReplicaModelConfig,
    spec: &QuenchingSpec,
) -> Result<PartitionResult> {
    Ok(partition_sweep(config, spec, &[config.beta])?.remove(0).1)
}

/// Same couplings for every `β`; rows come back in ascending `β`.
pub fn partition_sweep(
    config: &ReplicaModelConfig,
    spec: &QuenchingSpec,
    betas: &[f64],
) -> Result<Vec<(f64, PartitionResult)>> {
    config.validate()?;
    if spec.p() != config.p {
        return Err(Error::invalid(format!(
            "quenching has p = {}, model has p = {}",
            spec.p(),
            config.p
        )));
    }
    let mut betas = betas.to_vec();
    for &b in &betas {
        ReplicaModelConfig { beta: b, ..*config }.validate()?;
    }
    betas.sort_by(f64::total_cmp);
    let table = SpinTable::new(config.n_spins);
    let weights = spec.weights();
    let edges = table.pairs.len();
    let p = config.p;
    let quench = |raw: &[f64]| -> Vec<f64> {
        (0..edges)
            .map(|e| (0..p).map(|a| weights[a] * raw[a * edges + e]).sum())
            .collect()
    };

    let integrated = p * config.n_spins * (config.n_spins + 1) / 2;
    let log_factor = 0.5 * integrated as f64 * (2.0 * std::f64::consts::PI).ln();
    let result = |z: f64, stderr: f64| PartitionResult {
        z,
        stderr,
        method: config.method,
        normalization: "gaussian-probability-measure",
        log_unnormalized_factor: log_factor,
    };

    match config.method {
        PartitionMethod::MonteCarlo => {
            let per_draw: Vec<Vec<f64>> = (0..config.gauss_samples as u64)
                .into_par_iter()
                .map(|d| {
                    let mut rng = wigner::stream_rng(config.seed, d, 0);
                    let raw: Vec<f64> = (0..p * edges)
                        .map(|_| {
                            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
                        })
                        .collect();
                    let couplings = quench(&raw);
                    betas
                        .iter()
                        .map(|&b| table.partition_sum(&couplings, b))
                        .collect()
                })
                .collect();
            Ok(betas
                .iter()
                .enumerate()
                .map(|(k, &b)| {
                    let values: Vec<f64> = per_draw.iter().map(|v| v[k]).collect();
                    let est = MomentEstimate::from_values(&values);
                    (b, result(est.value, est.stderr))
                })
                .collect())
        }
        PartitionMethod::Quadrature => {
            let (nodes, node_weights) = gauss_hermite(config.gauss_samples)?;
            let dim = p * edges;
            let q = nodes.len();
            let mut sums = vec![0.0; betas.len()];
            let mut total_weight = 0.0;
            let mut index = vec![0usize; dim];
            loop {
                let raw: Vec<f64> = index.iter().map(|&i| nodes[i]).collect();
                let w: f64 = index.iter().map(|&i| node_weights[i]).product();
                let couplings = quench(&raw);
                for (s, &b) in sums.iter_mut().zip(&betas) {
                    *s += w * table.partition_sum(&couplings, b);
                }
                total_weight += w;
                let mut pos = dim;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    index[pos] += 1;
                    if index[pos] < q {
                        break;
                    }
                    index[pos] = 0;
                }
                if pos == 0 && index.iter().all(|&i| i == 0) {
                    break;
                }
            }
            // dividing by the summed weights keeps β = 0 exact
            Ok(betas
                .iter()
                .zip(sums)
                .map(|(&b, s)| (b, result(s / total_weight, 0.0)))
                .collect())
        }
    }
}

/// Gauss–Hermite nodes and weights for the standard normal measure
/// (Golub–Welsch on the probabilists' Hermite recurrence).
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::invalid("quadrature order must be ≥ 1"));
    }
    let mut jacobi = DMatrix::zeros(order, order);
    for k in 1..order {
        let b = (k as f64).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::try_new(jacobi, 1e-15, 10_000).ok_or_else(|| {
        Error::Numerical(format!("Gauss–Hermite eigensolver failed at order {order}"))
    })?;
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::Statistics;

    #[test]
    fn coefficient_constraint() {
        assert!(QuenchingSpec::new(vec![1.0, 1.0]).is_ok());
        assert!(matches!(
            QuenchingSpec::new(vec![1.0, 1.1]),
            Err(Error::Validation(_))
        ));
        assert!(QuenchingSpec::new(vec![]).is_err());
        assert!(QuenchingSpec::new(vec![2f64.sqrt(), 0.0]).is_ok());
        let s = QuenchingSpec::from_direction(&[3.0, 4.0]).unwrap();
        assert!((s.coefficients()[0] - 0.6 * 2f64.sqrt()).abs() < 1e-15);
        assert!(serde_json::from_str::<QuenchingSpec>("[1.0, 2.0]").is_err());
    }

    #[test]
    fn quenching_matrices() {
        let c = EnsembleConfig::new(6, 2, 1, 3).unwrap();
        let sample = wigner::sample_replicas(&c).unwrap();
        let axis = apply_quenching(&QuenchingSpec::axis(2, 0).unwrap(), &sample).unwrap();
        assert!((axis - &sample.replicas()[0]).abs().max() < 1e-14);
        let one = wigner::sample_replicas(&EnsembleConfig { p: 1, ..c }).unwrap();
        let id = apply_quenching(&QuenchingSpec::uniform(1).unwrap(), &one).unwrap();
        assert_eq!(id, one.replicas()[0]);
        let d = apply_quenching(&QuenchingSpec::uniform(2).unwrap(), &sample).unwrap();
        assert_eq!(d, d.transpose());
        assert!(apply_quenching(&QuenchingSpec::uniform(3).unwrap(), &sample).is_err());
    }

    #[test]
    fn algebraic_moments() {
        for p in 1..=4 {
            let delta = QuenchingSpec::uniform(p).unwrap();
            let specs = vec![delta; 4];
            let free = ContractionRule::new(Statistics::Boltzmann, p);
            let bose = ContractionRule::new(Statistics::Bose, p);
            assert_eq!(quenched_algebraic_moment(&specs, &free).unwrap(), 2.0);
            assert_eq!(quenched_algebraic_moment(&specs, &bose).unwrap(), 3.0);
        }
        let x = QuenchingSpec::axis(2, 0).unwrap();
        let y = QuenchingSpec::axis(2, 1).unwrap();
        let mixed = vec![x.clone(), y.clone(), x.clone(), y.clone()];
        let free = ContractionRule::new(Statistics::Boltzmann, 2);
        let bose = ContractionRule::new(Statistics::Bose, 2);
        assert_eq!(quenched_algebraic_moment(&mixed, &free).unwrap(), 0.0);
        assert_eq!(quenched_algebraic_moment(&mixed, &bose).unwrap(), 1.0);
        assert_eq!(quenched_algebraic_moment(&mixed[..3], &free).unwrap(), 0.0);
        let three = QuenchingSpec::uniform(3).unwrap();
        assert!(quenched_algebraic_moment(&[x.clone(), three], &free).is_err());
        assert!(quenched_algebraic_moment(&[], &free).is_err());
    }

    #[test]
    fn algebraic_moment_matches_field_expansion() {
        let specs = vec![
            QuenchingSpec::from_direction(&[0.8, 0.6, 0.0]).unwrap(),
            QuenchingSpec::uniform(3).unwrap(),
            QuenchingSpec::from_direction(&[0.8, 0.6, 0.0]).unwrap(),
            QuenchingSpec::from_direction(&[-0.2, 0.3, 1.0]).unwrap(),
            QuenchingSpec::axis(3, 2).unwrap(),
            QuenchingSpec::uniform(3).unwrap(),
        ];
        let weighted = ContractionRule::with_diagonal(Statistics::Bose, &[1.0, 0.5, 2.0]).unwrap();
        for rule in [
            ContractionRule::new(Statistics::Boltzmann, 3),
            ContractionRule::new(Statistics::Bose, 3),
            weighted,
        ] {
            let fields: Vec<OperatorExpr> = specs.iter().map(QuenchingSpec::field).collect();
            let oracle = wick::expr_moment_by_expansion(&fields, &rule).unwrap();
            let value = quenched_algebraic_moment(&specs, &rule).unwrap();
            assert!((value - oracle).abs() < 1e-12, "{value} vs {oracle}");
        }
    }

    #[test]
    fn gauss_hermite_integrates_polynomials() {
        let (x, w) = gauss_hermite(8).unwrap();
        let moment = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!(moment(1).abs() < 1e-13);
        assert!((moment(2) - 1.0).abs() < 1e-12);
        assert!((moment(4) - 3.0).abs() < 1e-11);
        assert!((moment(6) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn partition_edge_cases() {
        let spec = QuenchingSpec::uniform(2).unwrap();
        for n in 1..=5 {
            let c = ReplicaModelConfig::monte_carlo(n, 0.0, 2, 10, 1).unwrap();
            assert_eq!(replica_partition(&c, &spec).unwrap().z, (1u64 << n) as f64);
        }
        let one_spin = ReplicaModelConfig::monte_carlo(1, 2.0, 2, 10, 1).unwrap();
        assert_eq!(replica_partition(&one_spin, &spec).unwrap().z, 2.0);
        assert!(ReplicaModelConfig::monte_carlo(13, 1.0, 1, 10, 1).is_err());
        assert!(ReplicaModelConfig::monte_carlo(4, -1.0, 1, 10, 1).is_err());
        assert!(ReplicaModelConfig::monte_carlo(4, f64::INFINITY, 1, 10, 1).is_err());
        assert!(matches!(
            ReplicaModelConfig::quadrature(4, 1.0, 3, 4),
            Err(Error::Capacity(_))
        ));
        let c = ReplicaModelConfig::monte_carlo(3, 1.0, 3, 10, 1).unwrap();
        assert!(replica_partition(&c, &spec).is_err());
    }

    #[test]
    fn two_spin_quadrature_closed_form() {
        let c = ReplicaModelConfig::quadrature(2, 1.0, 1, 24).unwrap();
        let r = replica_partition(&c, &QuenchingSpec::uniform(1).unwrap()).unwrap();
        assert!((r.z - 4.0 * 0.25f64.exp()).abs() < 1e-10, "{}", r.z);
        assert_eq!(r.method, PartitionMethod::Quadrature);
        let zero = ReplicaModelConfig::quadrature(3, 0.0, 1, 5).unwrap();
        assert_eq!(
            replica_partition(&zero, &QuenchingSpec::uniform(1).unwrap())
                .unwrap()
                .z,
            8.0
        );
    }

    #[test]
    fn sweep_is_sorted_and_shares_draws() {
        let spec = QuenchingSpec::uniform(2).unwrap();
        let c = ReplicaModelConfig::monte_carlo(3, 0.0, 2, 200, 7).unwrap();
        let rows = partition_sweep(&c, &spec, &[1.0, 0.0, 0.5]).unwrap();
        let betas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        assert_eq!(betas, vec![0.0, 0.5, 1.0]);
        let single = replica_partition(&ReplicaModelConfig { beta: 0.5, ..c }, &spec).unwrap();
        assert_eq!(single, rows[1].1);
    }
}
