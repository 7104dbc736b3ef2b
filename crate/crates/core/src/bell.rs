//! CHSH functionals on quenched observables.
//!
//! An observable is a bounded function of `Y = Σ_a c_a Q_a`. On the free
//! (`fock`) backend `Y` is the truncated full-Fock matrix and the bound is
//! imposed by spectral calculus; correlators are vacuum expectations. On the
//! `classical` backend the `Q_a` are replaced by i.i.d. standard Gaussians,
//! which is the commutative model with the same second moments.
//!
//! `S = ⟨A1B1⟩ + ⟨A1B2⟩ + ⟨A2B1⟩ - ⟨A2B2⟩`. Classical ±1 (or [-1, 1])
//! observables obey `|S| ≤ 2` sample by sample. On the free backend all
//! observables live on one Fock space and the A and B sides need not
//! commute, so the commutator norms are always reported next to `S`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockBasis, FreeFockBasis, OperatorMatrix};
use crate::wick::OperatorExpr;
use crate::wigner::{self, MomentEstimate};

/// Eigenvalues within this distance of zero count as zero for `sign`.
pub const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-10;
pub const MIN_CLASSICAL_SAMPLES: usize = 1000;
pub const MAX_SEARCH_MODES: usize = 6;
pub const MAX_GRID_RESOLUTION: usize = 9;
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// `sign(λ)`, with zero mapped to `+1`.
    Sign,
    /// `clamp(λ, -1, 1)`.
    Clamp,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Sign => {
                if x.abs() <= ZERO_EIGENVALUE_TOLERANCE || x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Transform::Clamp => x.clamp(-1.0, 1.0),
        }
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(Transform::Sign),
            "clamp" => Ok(Transform::Clamp),
            other => Err(Error::invalid(format!("unknown transform `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub coefficients: Vec<f64>,
    /// Divide by `√p` (with `p` the number of coefficients), as for a
    /// quenching `Δ′`.
    #[serde(default)]
    pub quenching: bool,
    pub transform: Transform,
}

impl ObservableSpec {
    pub fn new(coefficients: Vec<f64>, quenching: bool, transform: Transform) -> Result<Self> {
        let spec = ObservableSpec {
            coefficients,
            quenching,
            transform,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("observable coefficients must be finite"));
        }
        if self.coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::invalid(
                "observable coefficient vector must be nonzero",
            ));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficients of `Y` in the `Q_a` basis after the optional `1/√p`.
    pub fn field_coefficients(&self) -> Vec<f64> {
        let scale = if self.quenching {
            1.0 / (self.coefficients.len() as f64).sqrt()
        } else {
            1.0
        };
        self.coefficients.iter().map(|c| c * scale).collect()
    }

    pub fn field(&self) -> OperatorExpr {
        OperatorExpr::linear_field(&self.field_coefficients())
    }

    pub fn with_negated_coefficients(&self) -> Self {
        ObservableSpec {
            coefficients: self.coefficients.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }
}

/// `transform(Y)` on the free Fock basis via a symmetric eigendecomposition.
pub fn bounded_observable(spec: &ObservableSpec, basis: &FreeFockBasis) -> Result<OperatorMatrix> {
    spec.validate()?;
    if spec.modes() != basis.modes() {
        return Err(Error::invalid(format!(
            "observable has {} coefficients, basis has {} modes",
            spec.modes(),
            basis.modes()
        )));
    }
    let y = fock::expr_matrix(&spec.field(), basis)?;
    let matrix = spectral_transform(y.matrix(), spec.transform)?;
    OperatorMatrix::from_matrix(basis, matrix)
}

fn spectral_transform(y: &DMatrix<f64>, transform: Transform) -> Result<DMatrix<f64>> {
    let asym = (y - y.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(Error::Numerical(format!(
            "observable matrix is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    let dim = y.nrows();
    let eig = SymmetricEigen::try_new(y.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric eigensolver did not converge (dimension {dim}, Frobenius norm {:.3e})",
            y.norm()
        ))
    })?;
    let mapped = eig.eigenvalues.map(|l| transform.apply(l));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&mapped) * v.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Fock { max_len: usize },
    Classical { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshConfig {
    pub a1: ObservableSpec,
    pub a2: ObservableSpec,
    pub b1: ObservableSpec,
    pub b2: ObservableSpec,
    pub backend: Backend,
}

impl ChshConfig {
    pub fn specs(&self) -> [&ObservableSpec; 4] {
        [&self.a1, &self.a2, &self.b1, &self.b2]
    }

    pub fn modes(&self) -> usize {
        self.a1.modes()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.modes();
        for s in self.specs() {
            s.validate()?;
            if s.modes() != m {
                return Err(Error::invalid(
                    "all four observables must share one mode count",
                ));
            }
        }
        match self.backend {
            Backend::Classical { samples, .. } if samples < MIN_CLASSICAL_SAMPLES => {
                Err(Error::invalid(format!(
                    "classical backend needs ≥ {MIN_CLASSICAL_SAMPLES} samples, got {samples}"
                )))
            }
            Backend::Fock { max_len: 0 } => Err(Error::invalid("Fock truncation L must be ≥ 1")),
            _ => Ok(()),
        }
    }
}

/// The four correlators in the order `⟨A1B1⟩, ⟨A1B2⟩, ⟨A2B1⟩, ⟨A2B2⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlators {
    pub a1b1: f64,
    pub a1b2: f64,
    pub a2b1: f64,
    pub a2b2: f64,
}

impl Correlators {
    pub fn chsh(&self) -> f64 {
        self.a1b1 + self.a1b2 + self.a2b1 - self.a2b2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorNorms {
    pub a1_a2: f64,
    pub b1_b2: f64,
    pub a1_b1: f64,
    pub a1_b2: f64,
    pub a2_b1: f64,
    pub a2_b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshResult {
    #[serde(rename = "S")]
    pub s: f64,
    /// Symmetrized correlators `½⟨AB + BA⟩`; these define `S`.
    pub correlators: Correlators,
    /// `Re⟨Ω|A B|Ω⟩` without symmetrization (Fock backend).
    pub raw_correlators: Option<Correlators>,
    /// Frobenius norms (Fock backend).
    pub commutator_norms: Option<CommutatorNorms>,
    /// Standard error of `S` (classical backend).
    pub stderr: Option<f64>,
    pub backend: Backend,
}

impl ChshResult {
    fn new(correlators: Correlators, backend: Backend) -> Self {
        ChshResult {
            s: correlators.chsh(),
            correlators,
            raw_correlators: None,
            commutator_norms: None,
            stderr: None,
            backend,
        }
    }
}

pub fn chsh_value(config: &ChshConfig) -> Result<ChshResult> {
    config.validate()?;
    match config.backend {
        Backend::Fock { max_len } => fock_chsh(config, max_len),
        Backend::Classical { samples, seed } => {
            let draws = ClassicalDraws::new(samples, config.modes(), seed);
            let values: Vec<Vec<f64>> = config.specs().iter().map(|s| draws.observe(s)).collect();
            Ok(classical_chsh(&values, config.backend))
        }
    }
}

fn fock_chsh(config: &ChshConfig, max_len: usize) -> Result<ChshResult> {
    let basis = FreeFockBasis::new(config.modes(), max_len)?;
    let ops = config
        .specs()
        .iter()
        .map(|s| bounded_observable(s, &basis))
        .collect::<Result<Vec<_>>>()?;
    let (a1, a2, b1, b2) = (&ops[0], &ops[1], &ops[2], &ops[3]);
    let raw = |x: &OperatorMatrix, y: &OperatorMatrix| -> Result<f64> {
        Ok(fock::vacuum_expectation(&x.mul(y)?))
    };
    let sym = |x: &OperatorMatrix, y: &OperatorMatrix| -> Result<f64> {
        Ok(0.5 * (raw(x, y)? + raw(y, x)?))
    };
    let norm = |x: &OperatorMatrix, y: &OperatorMatrix| -> Result<f64> {
        Ok(fock::commutator(x, y)?.frobenius_norm())
    };
    let correlators = Correlators {
        a1b1: sym(a1, b1)?,
        a1b2: sym(a1, b2)?,
        a2b1: sym(a2, b1)?,
        a2b2: sym(a2, b2)?,
    };
    let mut result = ChshResult::new(correlators, config.backend);
    result.raw_correlators = Some(Correlators {
        a1b1: raw(a1, b1)?,
        a1b2: raw(a1, b2)?,
        a2b1: raw(a2, b1)?,
        a2b2: raw(a2, b2)?,
    });
    result.commutator_norms = Some(CommutatorNorms {
        a1_a2: norm(a1, a2)?,
        b1_b2: norm(b1, b2)?,
        a1_b1: norm(a1, b1)?,
        a1_b2: norm(a1, b2)?,
        a2_b1: norm(a2, b1)?,
        a2_b2: norm(a2, b2)?,
    });
    Ok(result)
}

/// Standard normal draws `g[sample][mode]` shared by every observable of a
/// classical evaluation.
struct ClassicalDraws {
    modes: usize,
    values: Vec<f64>,
}

impl ClassicalDraws {
    fn new(samples: usize, modes: usize, seed: u64) -> Self {
        let mut rng = wigner::stream_rng(seed, 0, 0);
        let values = (0..samples * modes)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        ClassicalDraws { modes, values }
    }

    fn observe(&self, spec: &ObservableSpec) -> Vec<f64> {
        let c = spec.field_coefficients();
        self.values
            .chunks_exact(self.modes)
            .map(|g| {
                spec.transform
                    .apply(g.iter().zip(&c).map(|(g, c)| g * c).sum())
            })
            .collect()
    }
}

fn classical_chsh(values: &[Vec<f64>], backend: Backend) -> ChshResult {
    let (a1, a2, b1, b2) = (&values[0], &values[1], &values[2], &values[3]);
    let n = a1.len() as f64;
    let mean = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| x * y).sum::<f64>() / n;
    let correlators = Correlators {
        a1b1: mean(a1, b1),
        a1b2: mean(a1, b2),
        a2b1: mean(a2, b1),
        a2b2: mean(a2, b2),
    };
    let per_sample: Vec<f64> = (0..a1.len())
        .map(|i| a1[i] * b1[i] + a1[i] * b2[i] + a2[i] * b1[i] - a2[i] * b2[i])
        .collect();
    let mut result = ChshResult::new(correlators, backend);
    result.stderr = Some(MomentEstimate::from_values(&per_sample).stderr);
    result
}

/// Grid-plus-descent search over the four coefficient directions.
///
/// Each A-side direction lives on the unit sphere of the modes in
/// `a_support`, each B-side direction on that of `b_support`, parametrized
/// by hyperspherical angles sampled at `resolution` points in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshSearch {
    pub modes: usize,
    pub a_support: Vec<usize>,
    pub b_support: Vec<usize>,
    pub resolution: usize,
    pub refinement_steps: usize,
    pub transform: Transform,
    pub quenching: bool,
    pub backend: Backend,
}

impl ChshSearch {
    fn validate(&self) -> Result<()> {
        if self.modes == 0 || self.modes > MAX_SEARCH_MODES {
            return Err(Error::capacity(format!(
                "search supports 1..={MAX_SEARCH_MODES} modes, got {}",
                self.modes
            )));
        }
        if self.resolution == 0 || self.resolution > MAX_GRID_RESOLUTION {
            return Err(Error::capacity(format!(
                "grid resolution must be in 1..={MAX_GRID_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        for (name, support) in [("A", &self.a_support), ("B", &self.b_support)] {
            if support.is_empty() {
                return Err(Error::invalid(format!("{name}-side support is empty")));
            }
            if let Some(m) = support.iter().find(|&&m| m >= self.modes) {
                return Err(Error::invalid(format!("{name}-side mode {m} out of range")));
            }
            let mut sorted = support.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != support.len() {
                return Err(Error::invalid(format!(
                    "{name}-side support repeats a mode"
                )));
            }
        }
        if self.grid_points().is_none_or(|g| g > MAX_GRID_POINTS) {
            return Err(Error::capacity(format!(
                "grid exceeds {MAX_GRID_POINTS} points; lower the resolution or the supports"
            )));
        }
        Ok(())
    }

    fn angle_count(&self) -> usize {
        2 * (self.a_support.len() - 1) + 2 * (self.b_support.len() - 1)
    }

    fn grid_points(&self) -> Option<usize> {
        self.resolution.checked_pow(self.angle_count() as u32)
    }

    fn direction(&self, support: &[usize], angles: &[f64]) -> Vec<f64> {
        let unit = sphere_point(angles);
        let scale = if self.quenching {
            (self.modes as f64).sqrt()
        } else {
            1.0
        };
        let mut c = vec![0.0; self.modes];
        for (&m, u) in support.iter().zip(unit) {
            c[m] = u * scale;
        }
        c
    }

    /// Splits a full angle vector into the four per-observable slices.
    fn split<'a>(&self, angles: &'a [f64]) -> [&'a [f64]; 4] {
        let da = self.a_support.len() - 1;
        let db = self.b_support.len() - 1;
        [
            &angles[..da],
            &angles[da..2 * da],
            &angles[2 * da..2 * da + db],
            &angles[2 * da + db..],
        ]
    }

    pub fn config_at(&self, angles: &[f64]) -> Result<ChshConfig> {
        let [a1, a2, b1, b2] = self.split(angles);
        let spec = |support: &[usize], ang: &[f64]| {
            ObservableSpec::new(self.direction(support, ang), self.quenching, self.transform)
        };
        Ok(ChshConfig {
            a1: spec(&self.a_support, a1)?,
            a2: spec(&self.a_support, a2)?,
            b1: spec(&self.b_support, b1)?,
            b2: spec(&self.b_support, b2)?,
            backend: self.backend,
        })
    }
}

/// Unit vector from hyperspherical angles: `(cos φ1, sin φ1 cos φ2, …,
/// sin φ1 ⋯ sin φ_{d-1})`.
pub fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut carry = 1.0;
    for &phi in angles {
        out.push(carry * phi.cos());
        carry *= phi.sin();
    }
    out.push(carry);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchPhase {
    Grid,
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchTraceRow {
    pub index: usize,
    pub phase: SearchPhase,
    pub angles: Vec<f64>,
    #[serde(rename = "S")]
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: ChshConfig,
    pub result: ChshResult,
    pub best_angles: Vec<f64>,
    /// Largest `|S|` on the coarse grid, before refinement.
    pub coarse_best_abs_s: f64,
    pub trace: Vec<SearchTraceRow>,
}

// Vacuum vectors OΩ (Fock) or per-sample values (classical) of one
// observable; correlators are inner products of these.
struct Evaluator<'a> {
    search: &'a ChshSearch,
    basis: Option<FreeFockBasis>,
    draws: Option<ClassicalDraws>,
    cache: HashMap<Vec<u64>, DVector<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(search: &'a ChshSearch) -> Result<Self> {
        let (basis, draws) = match search.backend {
            Backend::Fock { max_len } => (Some(FreeFockBasis::new(search.modes, max_len)?), None),
            Backend::Classical { samples, seed } => {
                if samples < MIN_CLASSICAL_SAMPLES {
                    return Err(Error::invalid(format!(
                        "classical backend needs ≥ {MIN_CLASSICAL_SAMPLES} samples"
                    )));
                }
                (None, Some(ClassicalDraws::new(samples, search.modes, seed)))
            }
        };
        Ok(Evaluator {
            search,
            basis,
            draws,
            cache: HashMap::new(),
        })
    }

    fn vector(&self, coefficients: Vec<f64>) -> Result<DVector<f64>> {
        let spec = ObservableSpec::new(coefficients, self.search.quenching, self.search.transform)?;
        if let Some(basis) = &self.basis {
            let op = bounded_observable(&spec, basis)?;
            Ok(DVector::from_vec(op.apply_to_vacuum()))
        } else {
            let draws = self.draws.as_ref().expect("classical draws");
            let v = draws.observe(&spec);
            let scale = 1.0 / (v.len() as f64).sqrt();
            Ok(DVector::from_vec(v).scale(scale))
        }
    }

    // Candidate observables for one side, keyed by their angle bits.
    fn prepare(&mut self, support: &[usize], candidates: &[Vec<f64>]) -> Result<()> {
        let missing: Vec<&Vec<f64>> = candidates
            .iter()
            .filter(|a| !self.cache.contains_key(&key(support, a)))
            .collect();
        let built = missing
            .par_iter()
            .map(|a| self.vector(self.search.direction(support, a)))
            .collect::<Result<Vec<_>>>()?;
        for (a, v) in missing.into_iter().zip(built) {
            self.cache.insert(key(support, a), v);
        }
        Ok(())
    }

    fn chsh(&self, angles: &[f64]) -> f64 {
        let [a1, a2, b1, b2] = self.search.split(angles);
        let s = &self.search;
        let get = |support: &[usize], a: &[f64]| &self.cache[&key(support, a)];
        let (va1, va2) = (get(&s.a_support, a1), get(&s.a_support, a2));
        let (vb1, vb2) = (get(&s.b_support, b1), get(&s.b_support, b2));
        va1.dot(vb1) + va1.dot(vb2) + va2.dot(vb1) - va2.dot(vb2)
    }

    fn chsh_fresh(&mut self, angles: &[f64]) -> Result<f64> {
        let [a1, a2, b1, b2] = self.search.split(angles);
        let a_support = self.search.a_support.clone();
        let b_support = self.search.b_support.clone();
        self.prepare(&a_support, &[a1.to_vec(), a2.to_vec()])?;
        self.prepare(&b_support, &[b1.to_vec(), b2.to_vec()])?;
        Ok(self.chsh(angles))
    }
}

fn key(support: &[usize], angles: &[f64]) -> Vec<u64> {
    support
        .iter()
        .map(|&m| m as u64)
        .chain(std::iter::once(u64::MAX))
        .chain(angles.iter().map(|a| a.to_bits()))
        .collect()
}

fn grid_angles(resolution: usize, count: usize) -> Vec<Vec<f64>> {
    let step = 2.0 * PI / resolution as f64;
    let total = resolution.pow(count as u32);
    (0..total)
        .map(|mut idx| {
            let mut angles = vec![0.0; count];
            for slot in angles.iter_mut().rev() {
                *slot = (idx % resolution) as f64 * step;
                idx /= resolution;
            }
            angles
        })
        .collect()
}

/// Coarse grid, then coordinate descent from the best grid point; returns
/// the configuration with the largest `|S|` met along the way.
pub fn maximize_chsh(search: &ChshSearch) -> Result<SearchOutcome> {
    search.validate()?;
    let mut eval = Evaluator::new(search)?;
    let da = search.a_support.len() - 1;
    let db = search.b_support.len() - 1;
    eval.prepare(&search.a_support, &grid_angles(search.resolution, da))?;
    eval.prepare(&search.b_support, &grid_angles(search.resolution, db))?;

    let grid = grid_angles(search.resolution, search.angle_count());
    let values: Vec<f64> = grid.par_iter().map(|a| eval.chsh(a)).collect();
    let mut trace: Vec<SearchTraceRow> = grid
        .into_iter()
        .zip(&values)
        .enumerate()
        .map(|(index, (angles, &s))| SearchTraceRow {
            index,
            phase: SearchPhase::Grid,
            angles,
            s,
        })
        .collect();
    // first maximal point in grid order
    let best_index = values.iter().enumerate().fold(0, |best, (i, v)| {
        if v.abs() > values[best].abs() {
            i
        } else {
            best
        }
    });
    let coarse_best_abs_s = values[best_index].abs();
    let mut best_angles = trace[best_index].angles.clone();
    let mut best_abs = coarse_best_abs_s;

    let mut step = PI / search.resolution as f64;
    for _ in 0..search.refinement_steps {
        let mut improved = false;
        for k in 0..best_angles.len() {
            for dir in [1.0, -1.0] {
                let mut trial = best_angles.clone();
                trial[k] += dir * step;
                let s = eval.chsh_fresh(&trial)?;
                trace.push(SearchTraceRow {
                    index: trace.len(),
                    phase: SearchPhase::Refine,
                    angles: trial.clone(),
                    s,
                });
                if s.abs() > best_abs {
                    best_abs = s.abs();
                    best_angles = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let best = search.config_at(&best_angles)?;
    let result = chsh_value(&best)?;
    Ok(SearchOutcome {
        best,
        result,
        best_angles,
        coarse_best_abs_s,
        trace,
    })
}
