//! Replicas of symmetric Gaussian matrices and their mixed moments.
//!
//! Each replica `J^(a)` has i.i.d. standard normal entries on and above the
//! diagonal, mirrored below. With `X_a = J^(a)/√N` and the state
//! `τ(·) = E (1/N) tr(·)`, mixed moments of independent replicas converge to
//! vacuum moments of free semicircular generators `Q_a`, which is what
//! [`freeness_report`] compares against [`crate::wick`].
//!
//! Every `(sample, replica)` pair draws from its own ChaCha stream, so a
//! replica matrix does not depend on which other replicas were drawn, nor on
//! how samples are distributed over threads.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wick::{self, ContractionRule, OperatorExpr, Statistics};

/// Upper bound on `N·N·p` stored matrix entries.
pub const MAX_ENTRIES: usize = 1 << 26;
pub const MAX_REPORT_DEGREE: usize = 8;
const MAX_REPLICAS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub p: usize,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(n: usize, p: usize, samples: usize, seed: u64) -> Result<Self> {
        let config = EnsembleConfig {
            n,
            p,
            samples,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "matrix size N must be ≥ 2, got {}",
                self.n
            )));
        }
        if self.p == 0 || self.p > MAX_REPLICAS {
            return Err(Error::invalid(format!(
                "replica count p must be in 1..={MAX_REPLICAS}"
            )));
        }
        if self.samples == 0 {
            return Err(Error::invalid(
                "at least one Monte Carlo sample is required",
            ));
        }
        let entries = self
            .n
            .checked_mul(self.n)
            .and_then(|x| x.checked_mul(self.p));
        if entries.is_none_or(|e| e > MAX_ENTRIES) {
            return Err(Error::capacity(format!(
                "N·N·p = {}·{}·{} exceeds the memory guard of {MAX_ENTRIES} entries",
                self.n, self.n, self.p
            )));
        }
        Ok(())
    }
}

pub(crate) fn stream_rng(seed: u64, sample: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((sample << 20) | channel);
    rng
}

/// One replica matrix of one Monte Carlo sample.
pub fn sample_replica(
    config: &EnsembleConfig,
    sample: u64,
    replica: usize,
) -> Result<DMatrix<f64>> {
    config.validate()?;
    if replica >= config.p {
        return Err(Error::invalid(format!(
            "replica index {replica} out of range for p = {}",
            config.p
        )));
    }
    Ok(draw_symmetric(
        config.n,
        &mut stream_rng(config.seed, sample, replica as u64),
    ))
}

fn draw_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = StandardNormal.sample(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// The `p` replicas `J^(0..p)` of a single draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaSample {
    matrices: Vec<DMatrix<f64>>,
}

impl ReplicaSample {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        if matrices.is_empty() || matrices.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::invalid(
                "replicas must be a nonempty list of equal square matrices",
            ));
        }
        if matrices.iter().any(|m| *m != m.transpose()) {
            return Err(Error::invalid("replica matrices must be symmetric"));
        }
        Ok(ReplicaSample { matrices })
    }

    pub fn replicas(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn p(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].nrows()
    }
}

/// First draw (sample index 0) of all `p` replicas.
pub fn sample_replicas(config: &EnsembleConfig) -> Result<ReplicaSample> {
    sample_replicas_at(config, 0)
}

pub fn sample_replicas_at(config: &EnsembleConfig, sample: u64) -> Result<ReplicaSample> {
    let matrices = (0..config.p)
        .map(|a| sample_replica(config, sample, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicaSample { matrices })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MomentEstimate {
    /// Sample mean and its standard error (unbiased variance); a single
    /// value has stderr 0.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MomentEstimate {
            value: mean,
            stderr,
            samples: n,
        }
    }

    /// `(value - reference) / stderr`, with ±∞ for a deviation at zero
    /// stderr.
    pub fn zscore(&self, reference: f64) -> f64 {
        let dev = self.value - reference;
        if self.stderr > 0.0 {
            dev / self.stderr
        } else if dev == 0.0 {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        }
    }
}

/// `(1/N) tr(M_1 ⋯ M_k)` scaled by `N^{-k/2}`, i.e. the normalized trace of
/// the product of the `M_i/√N`.
pub fn normalized_trace_product(factors: &[&DMatrix<f64>]) -> f64 {
    let n = factors[0].nrows();
    let k = factors.len();
    let raw = if k == 1 {
        factors[0].trace()
    } else {
        let mut prod = factors[0].clone();
        for m in &factors[1..k - 1] {
            prod = &prod * *m;
        }
        // tr(P M) = Σ P_ij M_ji
        prod.component_mul(&factors[k - 1].transpose()).sum()
    };
    raw / (n as f64).powf(1.0 + k as f64 / 2.0)
}

fn check_pattern(pattern: &[usize], p: usize) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::invalid(
            "pattern must contain at least one replica index",
        ));
    }
    if let Some(&bad) = pattern.iter().find(|&&a| a >= p) {
        return Err(Error::invalid(format!(
            "pattern index {bad} out of range for p = {p}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of `τ(X_{a_1} ⋯ X_{a_k})`.
pub fn trace_moment(pattern: &[usize], config: &EnsembleConfig) -> Result<MomentEstimate> {
    config.validate()?;
    check_pattern(pattern, config.p)?;
    let values = (0..config.samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut cache: HashMap<usize, DMatrix<f64>> = HashMap::new();
            for &a in pattern {
                cache.entry(a).or_insert_with(|| {
                    draw_symmetric(config.n, &mut stream_rng(config.seed, s, a as u64))
                });
            }
            let factors: Vec<&DMatrix<f64>> = pattern.iter().map(|a| &cache[a]).collect();
            normalized_trace_product(&factors)
        })
        .collect::<Vec<_>>();
    Ok(MomentEstimate::from_values(&values))
}

/// Free (vacuum) prediction `⟨Q_{a_1} ⋯ Q_{a_k}⟩` for a replica pattern.
pub fn free_prediction(pattern: &[usize], p: usize) -> Result<f64> {
    check_pattern(pattern, p)?;
    let factors: Vec<OperatorExpr> = pattern.iter().map(|&a| OperatorExpr::q(a)).collect();
    wick::expr_moment(&factors, &ContractionRule::new(Statistics::Boltzmann, p))
}

/// Canonical representative of a pattern under cyclic rotation and replica
/// relabeling: the lexicographically smallest first-occurrence relabeling
/// over all rotations.
pub fn canonical_pattern(pattern: &[usize]) -> Vec<usize> {
    let k = pattern.len();
    (0..k)
        .map(|r| {
            let mut labels: HashMap<usize, usize> = HashMap::new();
            (0..k)
                .map(|i| {
                    let next = labels.len();
                    *labels.entry(pattern[(r + i) % k]).or_insert(next)
                })
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap_or_default()
}

/// Canonical patterns of lengths `1..=max_degree` using at most `p` distinct
/// replicas, ordered by length then lexicographically.
pub fn report_patterns(max_degree: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in 1..=max_degree {
        let labels = p.min(len);
        let mut current = vec![0usize; len];
        loop {
            if canonical_pattern(&current) == current {
                out.push(current.clone());
            }
            // odometer over labels^len, lexicographic
            let mut pos = len;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < labels {
                    break;
                }
                current[pos] = 0;
            }
            if current.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreenessRow {
    pub pattern: Vec<usize>,
    pub estimate: f64,
    pub stderr: f64,
    pub prediction: f64,
    pub zscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreenessReport {
    pub config: EnsembleConfig,
    pub max_degree: usize,
    pub rows: Vec<FreenessRow>,
}

impl FreenessReport {
    pub fn max_abs_zscore(&self) -> f64 {
        self.rows.iter().map(|r| r.zscore.abs()).fold(0.0, f64::max)
    }
}

/// Estimates every canonical pattern up to `max_degree` on the same draws
/// and sets them against the free prediction.
pub fn freeness_report(max_degree: usize, config: &EnsembleConfig) -> Result<FreenessReport> {
    config.validate()?;
    if max_degree == 0 || max_degree > MAX_REPORT_DEGREE {
        return Err(Error::capacity(format!(
            "freeness report degree must be in 1..={MAX_REPORT_DEGREE}, got {max_degree}"
        )));
    }
    let patterns = report_patterns(max_degree, config.p);
    let labels = config.p.min(max_degree);
    let per_sample: Vec<Vec<f64>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|s| {
            let replicas: Vec<DMatrix<f64>> = (0..labels)
                .map(|a| draw_symmetric(config.n, &mut stream_rng(config.seed, s, a as u64)))
                .collect();
            pattern_traces(&patterns, &replicas)
        })
        .collect();
    let mut rows = Vec::with_capacity(patterns.len());
    for (i, pattern) in patterns.into_iter().enumerate() {
        let values: Vec<f64> = per_sample.iter().map(|v| v[i]).collect();
        let est = MomentEstimate::from_values(&values);
        let prediction = free_prediction(&pattern, config.p)?;
        rows.push(FreenessRow {
            zscore: est.zscore(prediction),
            pattern,
            estimate: est.value,
            stderr: est.stderr,
            prediction,
        });
    }
    Ok(FreenessReport {
        config: *config,
        max_degree,
        rows,
    })
}

// Normalized traces of all patterns on one draw, sharing prefix products.
fn pattern_traces(patterns: &[Vec<usize>], replicas: &[DMatrix<f64>]) -> Vec<f64> {
    let n = replicas[0].nrows() as f64;
    let mut prefixes: HashMap<Vec<usize>, DMatrix<f64>> = HashMap::new();
    let mut out = Vec::with_capacity(patterns.len());
    for pattern in patterns {
        let k = pattern.len();
        let raw = if k == 1 {
            replicas[pattern[0]].trace()
        } else {
            let head = prefix_product(&pattern[..k - 1], replicas, &mut prefixes);
            head.component_mul(&replicas[pattern[k - 1]]).sum()
        };
        out.push(raw / n.powf(1.0 + k as f64 / 2.0));
    }
    out
}

fn prefix_product(
    prefix: &[usize],
    replicas: &[DMatrix<f64>],
    memo: &mut HashMap<Vec<usize>, DMatrix<f64>>,
) -> DMatrix<f64> {
    if prefix.len() == 1 {
        return replicas[prefix[0]].clone();
    }
    if let Some(m) = memo.get(prefix) {
        return m.clone();
    }
    let head = prefix_product(&prefix[..prefix.len() - 1], replicas, memo);
    let m = head * &replicas[prefix[prefix.len() - 1]];
    memo.insert(prefix.to_vec(), m.clone());
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::new(1, 1, 1, 0).is_err());
        assert!(EnsembleConfig::new(4, 0, 1, 0).is_err());
        assert!(EnsembleConfig::new(4, 1, 0, 0).is_err());
        assert!(matches!(
            EnsembleConfig::new(10_000, 2, 1, 0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn deterministic_and_symmetric() {
        let c = EnsembleConfig::new(16, 3, 1, 42).unwrap();
        let a = sample_replicas(&c).unwrap();
        let b = sample_replicas(&c).unwrap();
        assert_eq!(a, b);
        for m in a.replicas() {
            assert_eq!(*m, m.transpose());
        }
        assert_ne!(a.replicas()[0], a.replicas()[1]);
        // a replica does not depend on p
        let c5 = EnsembleConfig { p: 5, ..c };
        assert_eq!(sample_replica(&c5, 0, 1).unwrap(), a.replicas()[1]);
        let other = EnsembleConfig { seed: 43, ..c };
        assert_ne!(sample_replicas(&other).unwrap(), a);
    }

    #[test]
    fn pattern_index_out_of_range() {
        let c = EnsembleConfig::new(8, 2, 2, 1).unwrap();
        assert!(matches!(
            trace_moment(&[0, 2], &c),
            Err(Error::InvalidInput(_))
        ));
        assert!(trace_moment(&[], &c).is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_pattern(&[1, 1, 0, 0]), vec![0, 0, 1, 1]);
        assert_eq!(canonical_pattern(&[1, 0, 1, 0]), vec![0, 1, 0, 1]);
        assert_eq!(canonical_pattern(&[2, 0, 0]), vec![0, 0, 1]);
        let pats = report_patterns(4, 2);
        assert!(pats.contains(&vec![0, 1, 0, 1]));
        assert!(pats.contains(&vec![0, 0, 1, 1]));
        assert!(!pats.contains(&vec![1, 1, 0, 0]));
        assert!(!pats.contains(&vec![0, 1, 1, 0]));
        // lengths 1..=4 over two labels: [0] [00] [01] [000] [001] [0000] [0001] [0011] [0101]
        assert_eq!(pats.len(), 9);
    }

    #[test]
    fn predictions() {
        assert_eq!(free_prediction(&[0, 0, 1, 1], 2).unwrap(), 1.0);
        assert_eq!(free_prediction(&[0, 1], 2).unwrap(), 0.0);
        assert_eq!(free_prediction(&[0, 0, 0], 2).unwrap(), 0.0);
        assert_eq!(free_prediction(&[0, 1, 0, 1], 2).unwrap(), 0.0);
    }

    #[test]
    fn normalized_trace_of_small_product() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, -1.0]);
        // tr(AB) = tr([[2,-1],[3,-1]]) = 1, scaled by 2^{-2}
        assert!((normalized_trace_product(&[&a, &b]) - 0.25).abs() < 1e-15);
        // tr(A) = 4, scaled by 2^{-1.5}
        assert!((normalized_trace_product(&[&a]) - 4.0 / 2f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn estimate_statistics() {
        let e = MomentEstimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(MomentEstimate::from_values(&[7.0]).stderr, 0.0);
        assert_eq!(MomentEstimate::from_values(&[7.0]).zscore(7.0), 0.0);
    }

    #[test]
    fn report_reuses_draws_consistently() {
        let c = EnsembleConfig::new(24, 2, 5, 9).unwrap();
        let report = freeness_report(4, &c).unwrap();
        let row = report
            .rows
            .iter()
            .find(|r| r.pattern == vec![0, 1, 0, 1])
            .unwrap();
        let direct = trace_moment(&[0, 1, 0, 1], &c).unwrap();
        assert!((row.estimate - direct.value).abs() < 1e-12);
        assert!((row.stderr - direct.stderr).abs() < 1e-12);
        assert!(matches!(freeness_report(9, &c), Err(Error::Capacity(_))));
    }
}
