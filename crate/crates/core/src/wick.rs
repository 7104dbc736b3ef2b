//! Vacuum expectations of creation/annihilation words.
//!
//! A contraction pairs an annihilator with a creator somewhere to its right.
//! Under [`Statistics::Bose`] every complete pairing of that kind contributes;
//! under [`Statistics::Boltzmann`] (free / full Fock statistics) only the
//! non-crossing ones do. Each pair contributes the weight `w[a][b]` of the
//! two modes it joins, so the default identity table reproduces
//! `A_a A_b^† = δ_ab` in the vacuum.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest word length accepted by the pairing engine.
pub const MAX_DEGREE: usize = 24;
/// Bose sums are exponential in the word length; they are capped lower.
pub const MAX_BOSE_DEGREE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Boltzmann,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Bose => f.write_str("bose"),
            Statistics::Boltzmann => f.write_str("boltzmann"),
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bose" => Ok(Statistics::Bose),
            "boltzmann" | "free" => Ok(Statistics::Boltzmann),
            other => Err(Error::invalid(format!("unknown statistics `{other}`"))),
        }
    }
}

/// A single creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub mode: usize,
    pub dagger: bool,
}

impl Generator {
    pub fn annihilator(mode: usize) -> Self {
        Generator {
            mode,
            dagger: false,
        }
    }

    pub fn creator(mode: usize) -> Self {
        Generator { mode, dagger: true }
    }

    pub fn adjoint(self) -> Self {
        Generator {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "Ad{}", self.mode)
        } else {
            write!(f, "A{}", self.mode)
        }
    }
}

/// An ordered product of generators. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(letters: Vec<Generator>) -> Self {
        Word(letters)
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Hermitian adjoint: reverse the order and swap creators/annihilators.
    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().map(|g| g.adjoint()).collect())
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.0.iter().map(|g| g.mode).max()
    }
}

impl From<Vec<Generator>> for Word {
    fn from(letters: Vec<Generator>) -> Self {
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Real linear combination of words, kept in canonical form: terms sorted by
/// word, duplicates merged, exact zeros dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorExpr {
    terms: Vec<(f64, Word)>,
}

impl OperatorExpr {
    pub fn zero() -> Self {
        OperatorExpr { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        OperatorExpr {
            terms: vec![(1.0, Word::identity())],
        }
    }

    pub fn generator(g: Generator) -> Self {
        OperatorExpr {
            terms: vec![(1.0, Word::new(vec![g]))],
        }
    }

    pub fn annihilator(mode: usize) -> Self {
        Self::generator(Generator::annihilator(mode))
    }

    pub fn creator(mode: usize) -> Self {
        Self::generator(Generator::creator(mode))
    }

    /// The field operator `Q_a = A_a + A_a^†`.
    pub fn q(mode: usize) -> Self {
        Self::annihilator(mode) + Self::creator(mode)
    }

    /// `Σ_a c_a Q_a` over the modes `0..coefficients.len()`.
    pub fn linear_field(coefficients: &[f64]) -> Self {
        let terms = coefficients.iter().enumerate().flat_map(|(a, &c)| {
            [
                (c, Word::new(vec![Generator::annihilator(a)])),
                (c, Word::new(vec![Generator::creator(a)])),
            ]
        });
        Self::canonical(terms)
    }

    /// Builds a canonical expression, rejecting non-finite coefficients.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Word)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some((c, w)) = terms.iter().find(|(c, _)| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coefficient {c} on word {w}"
            )));
        }
        Ok(Self::canonical(terms))
    }

    fn canonical<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, Word)>,
    {
        let mut merged: BTreeMap<Word, f64> = BTreeMap::new();
        for (c, w) in terms {
            *merged.entry(w).or_insert(0.0) += c;
        }
        OperatorExpr {
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|(w, c)| (c, w))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(f64, Word)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::canonical(self.terms.iter().map(|(c, w)| (c * factor, w.clone())))
    }

    pub fn product(&self, other: &OperatorExpr) -> Self {
        Self::canonical(self.terms.iter().flat_map(|(c1, w1)| {
            other
                .terms
                .iter()
                .map(move |(c2, w2)| (c1 * c2, w1.concat(w2)))
        }))
    }

    pub fn adjoint(&self) -> Self {
        Self::canonical(self.terms.iter().map(|(c, w)| (*c, w.adjoint())))
    }

    /// True when the expression equals its adjoint term by term.
    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().filter_map(|(_, w)| w.max_mode()).max()
    }

    /// Length of the longest word.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Every term is a single generator.
    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(|(_, w)| w.len() == 1)
    }
}

impl std::ops::Add for OperatorExpr {
    type Output = OperatorExpr;

    fn add(self, rhs: OperatorExpr) -> OperatorExpr {
        OperatorExpr::canonical(self.terms.into_iter().chain(rhs.terms))
    }
}

impl std::ops::Mul for &OperatorExpr {
    type Output = OperatorExpr;

    fn mul(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.product(rhs)
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, w)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}·{w}")?;
        }
        Ok(())
    }
}

/// Statistics selector plus the symmetric contraction-weight table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRule {
    statistics: Statistics,
    modes: usize,
    weights: Vec<f64>,
}

impl ContractionRule {
    /// Identity weights `w[a][b] = δ_ab` over `modes` modes.
    pub fn new(statistics: Statistics, modes: usize) -> Self {
        let mut weights = vec![0.0; modes * modes];
        for a in 0..modes {
            weights[a * modes + a] = 1.0;
        }
        ContractionRule {
            statistics,
            modes,
            weights,
        }
    }

    pub fn with_weights(statistics: Statistics, table: Vec<Vec<f64>>) -> Result<Self> {
        let modes = table.len();
        if table.iter().any(|row| row.len() != modes) {
            return Err(Error::invalid("weight table must be square"));
        }
        for (a, row) in table.iter().enumerate() {
            for (b, &w) in row.iter().enumerate() {
                if !w.is_finite() {
                    return Err(Error::invalid(format!("weight w[{a}][{b}] is not finite")));
                }
                if w != table[b][a] {
                    return Err(Error::invalid(format!(
                        "weight table not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(ContractionRule {
            statistics,
            modes,
            weights: table.into_iter().flatten().collect(),
        })
    }

    /// Diagonal table, e.g. resonance weights of discretized noise cells.
    pub fn with_diagonal(statistics: Statistics, diagonal: &[f64]) -> Result<Self> {
        let modes = diagonal.len();
        let table = (0..modes)
            .map(|a| {
                (0..modes)
                    .map(|b| if a == b { diagonal[a] } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::with_weights(statistics, table)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.modes + b]
    }

    /// Same table, other statistics.
    pub fn with_statistics(&self, statistics: Statistics) -> Self {
        ContractionRule {
            statistics,
            ..self.clone()
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.modes)
            .all(|a| (0..self.modes).all(|b| self.weight(a, b) == if a == b { 1.0 } else { 0.0 }))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::invalid(format!(
                "mode {mode} outside weight table of {} modes",
                self.modes
            )));
        }
        Ok(())
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > MAX_DEGREE {
            return Err(Error::capacity(format!(
                "word length {n} exceeds the enumeration guard {MAX_DEGREE}"
            )));
        }
        if self.statistics == Statistics::Bose && n > MAX_BOSE_DEGREE {
            return Err(Error::capacity(format!(
                "Bose word length {n} exceeds the guard {MAX_BOSE_DEGREE}"
            )));
        }
        Ok(())
    }
}

/// Sum over complete pairings of `0..n` of the product of `kernel(i, j)`
/// (`i < j`) over the pairs. Boltzmann admits only non-crossing pairings.
fn pairing_sum<K>(n: usize, statistics: Statistics, kernel: K) -> f64
where
    K: Fn(usize, usize) -> f64,
{
    if n % 2 == 1 {
        return 0.0;
    }
    if n == 0 {
        return 1.0;
    }
    match statistics {
        Statistics::Boltzmann => non_crossing_sum(n, &kernel),
        Statistics::Bose => all_pairings_sum(n, &kernel),
    }
}

// Interval recursion: position l pairs with some j, splitting the rest into
// [l+1, j) and [j+1, r), which cannot interact without crossing.
fn non_crossing_sum<K: Fn(usize, usize) -> f64>(n: usize, kernel: &K) -> f64 {
    let width = n + 1;
    let mut table = vec![0.0; width * width];
    for l in 0..=n {
        table[l * width + l] = 1.0;
    }
    for len in (2..=n).step_by(2) {
        for l in 0..=(n - len) {
            let r = l + len;
            let mut acc = 0.0;
            for j in (l + 1..r).step_by(2) {
                let k = kernel(l, j);
                if k != 0.0 {
                    acc += k * table[(l + 1) * width + j] * table[(j + 1) * width + r];
                }
            }
            table[l * width + r] = acc;
        }
    }
    table[n]
}

// Memoised over the set of still-unpaired positions; the lowest one is
// always paired first so each pairing is counted once.
fn all_pairings_sum<K: Fn(usize, usize) -> f64>(n: usize, kernel: &K) -> f64 {
    fn go<K: Fn(usize, usize) -> f64>(mask: u32, kernel: &K, memo: &mut [f64]) -> f64 {
        if mask == 0 {
            return 1.0;
        }
        let cached = memo[mask as usize];
        if !cached.is_nan() {
            return cached;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut acc = 0.0;
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let k = kernel(i, j);
            if k != 0.0 {
                acc += k * go(rest & !(1 << j), kernel, memo);
            }
        }
        memo[mask as usize] = acc;
        acc
    }
    let mut memo = vec![f64::NAN; 1 << n];
    go(((1u64 << n) - 1) as u32, kernel, &mut memo)
}

/// Vacuum expectation `⟨Ω| word |Ω⟩` under `rule`.
pub fn vacuum_moment(word: &Word, rule: &ContractionRule) -> Result<f64> {
    for g in word.letters() {
        rule.check_mode(g.mode)?;
    }
    let n = word.len();
    rule.check_degree(n)?;
    let letters = word.letters();
    Ok(pairing_sum(n, rule.statistics, |i, j| {
        let (left, right) = (letters[i], letters[j]);
        if !left.dagger && right.dagger {
            rule.weight(left.mode, right.mode)
        } else {
            0.0
        }
    }))
}

/// Vacuum expectation of the ordered product of `factors`.
///
/// Products of single-generator combinations (such as `Q_a` or `ΔQ`) are
/// summed pairing by pairing with a combined pair kernel, which avoids the
/// `2^n` word expansion; anything else goes through
/// [`expr_moment_by_expansion`].
pub fn expr_moment(factors: &[OperatorExpr], rule: &ContractionRule) -> Result<f64> {
    validate_factors(factors, rule)?;
    if !factors.iter().all(OperatorExpr::is_linear) {
        return expr_moment_by_expansion(factors, rule);
    }
    let n = factors.len();
    rule.check_degree(n)?;
    // kernel[i][j] = Σ over an annihilator term of factor i and a creator
    // term of factor j of c·c'·w.
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for (ci, wi) in factors[i].terms() {
                let gi = wi.letters()[0];
                if gi.dagger {
                    continue;
                }
                for (cj, wj) in factors[j].terms() {
                    let gj = wj.letters()[0];
                    if gj.dagger {
                        acc += ci * cj * rule.weight(gi.mode, gj.mode);
                    }
                }
            }
            kernel[i * n + j] = acc;
        }
    }
    Ok(pairing_sum(n, rule.statistics, |i, j| kernel[i * n + j]))
}

/// Sum over pairings of `0..n` of `Π kernel(i, j)` over the pairs `i < j`,
/// with the same degree guards as the moment functions.
pub fn kernel_moment<K>(n: usize, statistics: Statistics, kernel: K) -> Result<f64>
where
    K: Fn(usize, usize) -> f64,
{
    ContractionRule::new(statistics, 1).check_degree(n)?;
    Ok(pairing_sum(n, statistics, kernel))
}

/// Multilinear expansion: Σ over one term per factor of the coefficient
/// product times the vacuum moment of the concatenated word.
pub fn expr_moment_by_expansion(factors: &[OperatorExpr], rule: &ContractionRule) -> Result<f64> {
    validate_factors(factors, rule)?;
    if factors.iter().any(OperatorExpr::is_zero) {
        return Ok(0.0);
    }
    let mut choice = vec![0usize; factors.len()];
    let mut total = 0.0;
    loop {
        let mut coef = 1.0;
        let mut letters = Vec::new();
        for (f, &k) in factors.iter().zip(&choice) {
            let (c, w) = &f.terms()[k];
            coef *= c;
            letters.extend_from_slice(w.letters());
        }
        if letters.len() % 2 == 0 {
            total += coef * vacuum_moment(&Word::new(letters), rule)?;
        }
        // odometer increment
        let mut pos = factors.len();
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < factors[pos].terms().len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

fn validate_factors(factors: &[OperatorExpr], rule: &ContractionRule) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::invalid("expr_moment needs at least one factor"));
    }
    for f in factors {
        if let Some(m) = f.max_mode() {
            rule.check_mode(m)?;
        }
    }
    Ok(())
}

/// Number of pair partitions of `n` points (Bose) or of non-crossing pair
/// partitions (Boltzmann).
pub fn count_pairings(n: usize, statistics: Statistics) -> Result<u64> {
    if n % 2 == 1 {
        return Err(Error::invalid(format!(
            "cannot pair an odd number ({n}) of points"
        )));
    }
    if n > MAX_DEGREE {
        return Err(Error::capacity(format!(
            "pairing count for n = {n} exceeds the guard {MAX_DEGREE}"
        )));
    }
    let half = n / 2;
    Ok(match statistics {
        // the first point pairs with any of the other n-1
        Statistics::Bose => (1..=half as u64).map(|k| 2 * k - 1).product(),
        Statistics::Boltzmann => {
            let mut counts = vec![0u64; half + 1];
            counts[0] = 1;
            for m in 1..=half {
                counts[m] = (0..m).map(|i| counts[i] * counts[m - 1 - i]).sum();
            }
            counts[half]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(m: usize) -> Generator {
        Generator::annihilator(m)
    }

    fn ad(m: usize) -> Generator {
        Generator::creator(m)
    }

    fn qs(modes: &[usize]) -> Vec<OperatorExpr> {
        modes.iter().map(|&m| OperatorExpr::q(m)).collect()
    }

    #[test]
    fn single_contraction_is_kronecker() {
        for stats in [Statistics::Bose, Statistics::Boltzmann] {
            let rule = ContractionRule::new(stats, 2);
            assert_eq!(
                vacuum_moment(&Word::new(vec![a(0), ad(0)]), &rule).unwrap(),
                1.0
            );
            assert_eq!(
                vacuum_moment(&Word::new(vec![a(0), ad(1)]), &rule).unwrap(),
                0.0
            );
            assert_eq!(
                vacuum_moment(&Word::new(vec![ad(0), a(0)]), &rule).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn odd_words_vanish() {
        let rule = ContractionRule::new(Statistics::Bose, 1);
        assert_eq!(
            vacuum_moment(&Word::new(vec![a(0), ad(0), ad(0)]), &rule).unwrap(),
            0.0
        );
        assert_eq!(expr_moment(&qs(&[0]), &rule).unwrap(), 0.0);
    }

    #[test]
    fn nested_versus_crossing() {
        let w = Word::new(vec![a(0), a(0), ad(0), ad(0)]);
        let free = ContractionRule::new(Statistics::Boltzmann, 1);
        let bose = ContractionRule::new(Statistics::Bose, 1);
        assert_eq!(vacuum_moment(&w, &free).unwrap(), 1.0);
        assert_eq!(vacuum_moment(&w, &bose).unwrap(), 2.0);
    }

    #[test]
    fn empty_word_is_one() {
        let rule = ContractionRule::new(Statistics::Boltzmann, 1);
        assert_eq!(vacuum_moment(&Word::identity(), &rule).unwrap(), 1.0);
        assert_eq!(
            expr_moment(&[OperatorExpr::identity()], &rule).unwrap(),
            1.0
        );
    }

    #[test]
    fn mode_out_of_range() {
        let rule = ContractionRule::new(Statistics::Bose, 2);
        let err = vacuum_moment(&Word::new(vec![a(2), ad(2)]), &rule).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(expr_moment(&qs(&[0, 5]), &rule).is_err());
    }

    #[test]
    fn degree_guards() {
        let free = ContractionRule::new(Statistics::Boltzmann, 1);
        let bose = ContractionRule::new(Statistics::Bose, 1);
        assert_eq!(expr_moment(&qs(&[0; 24]), &free).unwrap(), 208012.0);
        assert!(matches!(
            expr_moment(&qs(&[0; 26]), &free),
            Err(Error::Capacity(_))
        ));
        assert_eq!(expr_moment(&qs(&[0; 16]), &bose).unwrap(), 2027025.0);
        assert!(matches!(
            expr_moment(&qs(&[0; 18]), &bose),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn mixed_moments() {
        let free = ContractionRule::new(Statistics::Boltzmann, 2);
        let bose = ContractionRule::new(Statistics::Bose, 2);
        assert_eq!(expr_moment(&qs(&[0, 0, 0, 0]), &free).unwrap(), 2.0);
        assert_eq!(expr_moment(&qs(&[0, 0, 0, 0]), &bose).unwrap(), 3.0);
        assert_eq!(expr_moment(&qs(&[0; 6]), &free).unwrap(), 5.0);
        assert_eq!(expr_moment(&qs(&[0; 6]), &bose).unwrap(), 15.0);
        assert_eq!(expr_moment(&qs(&[0, 1, 0, 1]), &free).unwrap(), 0.0);
        assert_eq!(expr_moment(&qs(&[0, 1, 0, 1]), &bose).unwrap(), 1.0);
        assert_eq!(expr_moment(&qs(&[0, 0, 1, 1]), &free).unwrap(), 1.0);
    }

    #[test]
    fn count_pairings_examples() {
        assert_eq!(count_pairings(4, Statistics::Boltzmann).unwrap(), 2);
        assert_eq!(count_pairings(6, Statistics::Bose).unwrap(), 15);
        assert_eq!(count_pairings(0, Statistics::Bose).unwrap(), 1);
        assert_eq!(count_pairings(0, Statistics::Boltzmann).unwrap(), 1);
        assert_eq!(
            count_pairings(24, Statistics::Bose).unwrap(),
            316_234_143_225
        );
        assert!(matches!(
            count_pairings(3, Statistics::Bose),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            count_pairings(26, Statistics::Boltzmann),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn canonical_form_merges_terms() {
        let e = OperatorExpr::q(0) + OperatorExpr::q(0) + OperatorExpr::annihilator(0).scale(-2.0);
        assert_eq!(e.terms().len(), 1);
        assert_eq!(e.terms()[0], (2.0, Word::new(vec![ad(0)])));
        assert!(OperatorExpr::q(3).is_self_adjoint());
        assert!(!OperatorExpr::creator(1).is_self_adjoint());
        assert!(OperatorExpr::from_terms([(f64::NAN, Word::identity())]).is_err());
    }

    #[test]
    fn weight_table_validation() {
        assert!(ContractionRule::with_weights(
            Statistics::Bose,
            vec![vec![1.0, 0.5], vec![0.4, 1.0]]
        )
        .is_err());
        assert!(ContractionRule::with_weights(Statistics::Bose, vec![vec![1.0, 0.5]]).is_err());
        let rule = ContractionRule::with_diagonal(Statistics::Boltzmann, &[2.0, 3.0]).unwrap();
        assert_eq!(expr_moment(&qs(&[1, 1]), &rule).unwrap(), 3.0);
        assert!(ContractionRule::new(Statistics::Bose, 3).is_identity());
    }

    #[test]
    fn fast_path_matches_expansion_with_weights() {
        let table = vec![
            vec![0.7, 0.2, 0.0],
            vec![0.2, 1.3, -0.4],
            vec![0.0, -0.4, 0.5],
        ];
        for stats in [Statistics::Bose, Statistics::Boltzmann] {
            let rule = ContractionRule::with_weights(stats, table.clone()).unwrap();
            let factors = vec![
                OperatorExpr::linear_field(&[1.0, -0.5, 0.25]),
                OperatorExpr::q(1),
                OperatorExpr::linear_field(&[0.0, 2.0, 1.0]),
                OperatorExpr::q(0) + OperatorExpr::creator(2),
                OperatorExpr::q(2),
                OperatorExpr::linear_field(&[0.3, 0.3, -1.0]),
            ];
            let fast = expr_moment(&factors, &rule).unwrap();
            let slow = expr_moment_by_expansion(&factors, &rule).unwrap();
            assert!((fast - slow).abs() < 1e-12, "{stats}: {fast} vs {slow}");
        }
    }
}
