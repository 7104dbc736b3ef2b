//! Truncated matrix representations of the free (full Fock) and Bose
//! algebras.
//!
//! Operators act by projection-compression: any transition leaving the
//! truncated basis is dropped. Vacuum expectations of degree-`d` products
//! are exact as long as `d ≤ 2L` (free) or `d ≤ 2·n_max` (Bose), since no
//! contributing path climbs higher than `d/2`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, RowDVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::wick::{self, ContractionRule, Generator, OperatorExpr, Statistics};

/// Largest admissible basis.
pub const MAX_BASIS_DIM: usize = 200_000;
/// Largest basis for which dense matrices are materialised.
pub const MAX_DENSE_DIM: usize = 4096;

/// Identifies a truncated basis so operators built on different bases are
/// never combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisKind {
    Free { modes: usize, max_len: usize },
    Bose { modes: usize, n_max: usize },
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Free { modes, max_len } => write!(f, "free(M={modes}, L={max_len})"),
            BasisKind::Bose { modes, n_max } => write!(f, "bose(M={modes}, n_max={n_max})"),
        }
    }
}

/// Common interface of the two truncated bases. Index 0 is always the vacuum.
pub trait FockBasis {
    fn kind(&self) -> BasisKind;
    fn modes(&self) -> usize;
    fn dim(&self) -> usize;
    /// Image of basis vector `index` under `g`: target index and amplitude,
    /// or `None` when the result is zero or leaves the truncation.
    fn apply(&self, index: usize, g: Generator) -> Option<(usize, f64)>;
    /// Word length (free) or total occupation (Bose) of a basis vector.
    fn level(&self, index: usize) -> usize;
    /// Truncation level `L` or `n_max`.
    fn max_level(&self) -> usize;
    fn label(&self, index: usize) -> String;
    /// Statistics this representation realises.
    fn statistics(&self) -> Statistics;
}

/// All words of length `≤ L` over `M` letters, ordered by length then
/// lexicographically.
#[derive(Debug, Clone)]
pub struct FreeFockBasis {
    modes: usize,
    max_len: usize,
    // offsets[l] = index of the first word of length l; powers[l] = M^l
    offsets: Vec<usize>,
    powers: Vec<usize>,
}

impl FreeFockBasis {
    pub fn new(modes: usize, max_len: usize) -> Result<Self> {
        if modes == 0 || max_len == 0 {
            return Err(Error::invalid("free Fock basis needs M ≥ 1 and L ≥ 1"));
        }
        let mut offsets = Vec::with_capacity(max_len + 2);
        let mut powers = Vec::with_capacity(max_len + 1);
        let mut total = 0usize;
        let mut power = 1usize;
        for _ in 0..=max_len {
            offsets.push(total);
            powers.push(power);
            total = total
                .checked_add(power)
                .filter(|&t| t <= MAX_BASIS_DIM)
                .ok_or_else(|| {
                    Error::capacity(format!(
                        "free Fock basis M={modes}, L={max_len} exceeds {MAX_BASIS_DIM} vectors"
                    ))
                })?;
            power = power.saturating_mul(modes);
        }
        offsets.push(total);
        Ok(FreeFockBasis {
            modes,
            max_len,
            offsets,
            powers,
        })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Letters of the basis word at `index`.
    pub fn word(&self, index: usize) -> Vec<usize> {
        let len = self.level(index);
        let mut rank = index - self.offsets[len];
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = rank % self.modes;
            rank /= self.modes;
        }
        letters
    }

    pub fn index_of(&self, letters: &[usize]) -> Option<usize> {
        if letters.len() > self.max_len || letters.iter().any(|&a| a >= self.modes) {
            return None;
        }
        let rank = letters.iter().fold(0, |acc, &a| acc * self.modes + a);
        Some(self.offsets[letters.len()] + rank)
    }
}

impl FockBasis for FreeFockBasis {
    fn kind(&self) -> BasisKind {
        BasisKind::Free {
            modes: self.modes,
            max_len: self.max_len,
        }
    }

    fn modes(&self) -> usize {
        self.modes
    }

    fn dim(&self) -> usize {
        self.offsets[self.max_len + 1]
    }

    fn apply(&self, index: usize, g: Generator) -> Option<(usize, f64)> {
        let len = self.level(index);
        let rank = index - self.offsets[len];
        if g.dagger {
            // prepend the letter
            if len == self.max_len {
                return None;
            }
            Some((
                self.offsets[len + 1] + g.mode * self.powers[len] + rank,
                1.0,
            ))
        } else {
            // strip a matching first letter
            if len == 0 || rank / self.powers[len - 1] != g.mode {
                return None;
            }
            Some((self.offsets[len - 1] + rank % self.powers[len - 1], 1.0))
        }
    }

    fn level(&self, index: usize) -> usize {
        // offsets is sorted; the word length is the last offset ≤ index
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    fn max_level(&self) -> usize {
        self.max_len
    }

    fn label(&self, index: usize) -> String {
        let letters: Vec<String> = self.word(index).iter().map(|a| a.to_string()).collect();
        format!("[{}]", letters.join(" "))
    }

    fn statistics(&self) -> Statistics {
        Statistics::Boltzmann
    }
}

/// Occupation tuples with total occupation `≤ n_max`, ordered by total then
/// lexicographically.
#[derive(Debug, Clone)]
pub struct BoseFockBasis {
    modes: usize,
    n_max: usize,
    states: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl BoseFockBasis {
    pub fn new(modes: usize, n_max: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("Bose Fock basis needs M ≥ 1"));
        }
        let dim = binomial(n_max + modes, modes);
        if dim.is_none_or(|d| d > MAX_BASIS_DIM as u128) {
            return Err(Error::capacity(format!(
                "Bose Fock basis M={modes}, n_max={n_max} exceeds {MAX_BASIS_DIM} vectors"
            )));
        }
        let mut states = Vec::new();
        for total in 0..=n_max {
            let mut current = vec![0; modes];
            compositions(total, 0, &mut current, &mut states);
        }
        let lookup = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(BoseFockBasis {
            modes,
            n_max,
            states,
            lookup,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn occupations(&self, index: usize) -> &[usize] {
        &self.states[index]
    }

    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        self.lookup.get(occupations).copied()
    }
}

// Lexicographic enumeration of occupation tuples summing to `remaining`.
fn compositions(remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[pos] = n;
        compositions(remaining - n, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

impl FockBasis for BoseFockBasis {
    fn kind(&self) -> BasisKind {
        BasisKind::Bose {
            modes: self.modes,
            n_max: self.n_max,
        }
    }

    fn modes(&self) -> usize {
        self.modes
    }

    fn dim(&self) -> usize {
        self.states.len()
    }

    fn apply(&self, index: usize, g: Generator) -> Option<(usize, f64)> {
        let state = &self.states[index];
        let n = state[g.mode];
        let mut target = state.clone();
        let amplitude = if g.dagger {
            if self.level(index) == self.n_max {
                return None;
            }
            target[g.mode] = n + 1;
            ((n + 1) as f64).sqrt()
        } else {
            if n == 0 {
                return None;
            }
            target[g.mode] = n - 1;
            (n as f64).sqrt()
        };
        Some((self.lookup[&target], amplitude))
    }

    fn level(&self, index: usize) -> usize {
        self.states[index].iter().sum()
    }

    fn max_level(&self) -> usize {
        self.n_max
    }

    fn label(&self, index: usize) -> String {
        let occ: Vec<String> = self.states[index].iter().map(|n| n.to_string()).collect();
        format!("({})", occ.join(" "))
    }

    fn statistics(&self) -> Statistics {
        Statistics::Bose
    }
}

/// Dense real matrix tied to the basis it was built on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    kind: BasisKind,
    matrix: DMatrix<f64>,
}

impl OperatorMatrix {
    /// Wraps a matrix built elsewhere (e.g. by spectral calculus) on `basis`.
    pub fn from_matrix<B: FockBasis>(basis: &B, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, basis {} has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.kind(),
                basis.dim()
            )));
        }
        Ok(OperatorMatrix {
            kind: basis.kind(),
            matrix,
        })
    }

    pub fn identity<B: FockBasis>(basis: &B) -> Result<Self> {
        check_dense(basis)?;
        Ok(OperatorMatrix {
            kind: basis.kind(),
            matrix: DMatrix::identity(basis.dim(), basis.dim()),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn transpose(&self) -> Self {
        OperatorMatrix {
            kind: self.kind,
            matrix: self.matrix.transpose(),
        }
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<Self> {
        same_basis(self, other)?;
        Ok(OperatorMatrix {
            kind: self.kind,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// `A Ω` as a column vector.
    pub fn apply_to_vacuum(&self) -> Vec<f64> {
        self.matrix.column(0).iter().copied().collect()
    }
}

fn same_basis(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<()> {
    if a.kind != b.kind {
        return Err(Error::invalid(format!(
            "basis mismatch: {} vs {}",
            a.kind, b.kind
        )));
    }
    Ok(())
}

fn check_dense<B: FockBasis>(basis: &B) -> Result<()> {
    if basis.dim() > MAX_DENSE_DIM {
        return Err(Error::capacity(format!(
            "basis {} has {} vectors; dense matrices are limited to {MAX_DENSE_DIM}",
            basis.kind(),
            basis.dim()
        )));
    }
    Ok(())
}

fn check_mode<B: FockBasis>(basis: &B, mode: usize) -> Result<()> {
    if mode >= basis.modes() {
        return Err(Error::invalid(format!(
            "mode {mode} out of range for basis {}",
            basis.kind()
        )));
    }
    Ok(())
}

fn generator_matrix<B: FockBasis>(basis: &B, g: Generator) -> Result<OperatorMatrix> {
    check_mode(basis, g.mode)?;
    check_dense(basis)?;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        if let Some((row, amp)) = basis.apply(col, g) {
            m[(row, col)] = amp;
        }
    }
    Ok(OperatorMatrix {
        kind: basis.kind(),
        matrix: m,
    })
}

pub fn creator_matrix<B: FockBasis>(basis: &B, mode: usize) -> Result<OperatorMatrix> {
    generator_matrix(basis, Generator::creator(mode))
}

pub fn annihilator_matrix<B: FockBasis>(basis: &B, mode: usize) -> Result<OperatorMatrix> {
    generator_matrix(basis, Generator::annihilator(mode))
}

/// Matrix of `expr`; in each word the rightmost letter acts first, and each
/// letter is truncated before the next one acts.
pub fn expr_matrix<B: FockBasis>(expr: &OperatorExpr, basis: &B) -> Result<OperatorMatrix> {
    if let Some(m) = expr.max_mode() {
        check_mode(basis, m)?;
    }
    check_dense(basis)?;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for (coef, word) in expr.terms() {
        'column: for col in 0..dim {
            let mut index = col;
            let mut amp = *coef;
            for &g in word.letters().iter().rev() {
                match basis.apply(index, g) {
                    Some((next, a)) => {
                        index = next;
                        amp *= a;
                    }
                    None => continue 'column,
                }
            }
            m[(index, col)] += amp;
        }
    }
    Ok(OperatorMatrix {
        kind: basis.kind(),
        matrix: m,
    })
}

/// `AB − BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    same_basis(a, b)?;
    Ok(OperatorMatrix {
        kind: a.kind,
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
    })
}

/// `⟨Ω| A |Ω⟩`.
pub fn vacuum_expectation(a: &OperatorMatrix) -> f64 {
    a.matrix[(0, 0)]
}

/// Largest absolute entry among the columns whose basis vector sits at a
/// level `≤ max_level`, i.e. the norm of `A` restricted to that subspace.
pub fn restricted_max_abs<B: FockBasis>(a: &OperatorMatrix, basis: &B, max_level: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for col in 0..a.dim() {
        if basis.level(col) <= max_level {
            for v in a.matrix.column(col).iter() {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckRow {
    /// Number of leading factors in this product.
    pub factors: usize,
    pub matrix_value: f64,
    pub wick_value: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub basis: BasisKind,
    pub rows: Vec<CrosscheckRow>,
}

impl CrosscheckReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.deviation).fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_deviation() < tolerance
    }
}

/// Compares matrix vacuum expectations with [`wick::expr_moment`] for each
/// leading product `E_1 ⋯ E_k` of `exprs`.
pub fn crosscheck<B: FockBasis>(
    exprs: &[OperatorExpr],
    rule: &ContractionRule,
    basis: &B,
) -> Result<CrosscheckReport> {
    if rule.statistics() != basis.statistics() {
        return Err(Error::invalid(format!(
            "{} rule cannot be checked against basis {}",
            rule.statistics(),
            basis.kind()
        )));
    }
    if !rule.is_identity() {
        return Err(Error::invalid("crosscheck requires the unit weight table"));
    }
    let degree: usize = exprs.iter().map(OperatorExpr::degree).sum();
    if degree > 2 * basis.max_level() {
        return Err(Error::capacity(format!(
            "total degree {degree} exceeds the truncation-exact bound {} of basis {}",
            2 * basis.max_level(),
            basis.kind()
        )));
    }
    let mut rows = Vec::with_capacity(exprs.len());
    // ⟨Ω| E_1 ⋯ E_k as a row vector
    let mut bra = RowDVector::zeros(basis.dim());
    if !exprs.is_empty() {
        bra[0] = 1.0;
    }
    for (k, expr) in exprs.iter().enumerate() {
        let m = expr_matrix(expr, basis)?;
        bra = &bra * m.matrix();
        let matrix_value = bra[0];
        let wick_value = wick::expr_moment(&exprs[..=k], rule)?;
        rows.push(CrosscheckRow {
            factors: k + 1,
            matrix_value,
            wick_value,
            deviation: (matrix_value - wick_value).abs(),
        });
    }
    Ok(CrosscheckReport {
        basis: basis.kind(),
        rows,
    })
}

/// Row-major CSV dump with basis labels as header and first column.
pub fn write_matrix_csv<B: FockBasis, W: Write>(
    a: &OperatorMatrix,
    basis: &B,
    out: W,
) -> Result<()> {
    if a.kind() != basis.kind() {
        return Err(Error::invalid("matrix was built on a different basis"));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["basis".to_string()];
    header.extend((0..basis.dim()).map(|i| basis.label(i)));
    w.write_record(&header)?;
    for row in 0..a.dim() {
        let mut record = vec![basis.label(row)];
        record.extend(
            a.matrix()
                .row(row)
                .iter()
                .map(|v| crate::report::fmt_csv(*v)),
        );
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
