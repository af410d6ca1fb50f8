//! Probability vectors, types and information measures.
//!
//! Sequences are slices of symbol indices; [`Alphabet`] maps between indices
//! and printable symbols. Joint types keep integer counts so that every
//! marginalisation identity is exact.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for simplex membership.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// `t ln t` with the `0 ln 0 = 0` convention.
#[inline]
pub fn xlogx(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln()
    } else {
        0.0
    }
}

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    /// Validates `mass` without renormalising it.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_simplex(&mass)?;
        Ok(Self(mass))
    }

    /// Divides nonnegative `weights` by their sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMass(w));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        Self(vec![1.0 / size as f64; size])
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let n: u64 = counts.iter().sum();
        assert!(n > 0, "counts sum to zero");
        Self(counts.iter().map(|&c| c as f64 / n as f64).collect())
    }

    pub fn mass(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.0[symbol]
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;

    fn try_from(mass: Vec<f64>) -> Result<Self> {
        Self::new(mass)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Self {
        p.0
    }
}

pub(crate) fn check_simplex(mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::NotNormalized(0.0));
    }
    if let Some(&m) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
        return Err(Error::InvalidMass(m));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// An ordered list of single-character symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Parse("empty alphabet".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::Parse(format!("duplicate symbol '{s}'")));
            }
            if s.is_whitespace() || *s == '#' {
                return Err(Error::Parse(format!("symbol {s:?} is reserved")));
            }
        }
        Ok(Self { symbols })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Self { symbols: vec!['0', '1'] }
    }

    /// `{a, b, c, d}`, in the canonical column order of the quaternary family.
    pub fn quaternary() -> Self {
        Self { symbols: vec!['a', 'b', 'c', 'd'] }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Result<usize> {
        self.symbols.iter().position(|&s| s == c).ok_or(Error::UnknownSymbol(c))
    }

    pub fn parse(&self, text: &str) -> Result<Vec<usize>> {
        text.chars().map(|c| self.index_of(c)).collect()
    }

    pub fn render(&self, seq: &[usize]) -> String {
        seq.iter().map(|&i| self.symbols[i]).collect()
    }
}

fn check_symbols(seq: &[usize], size: usize) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    match seq.iter().find(|&&s| s >= size) {
        Some(&symbol) => Err(Error::SymbolOutOfAlphabet { symbol, size }),
        None => Ok(()),
    }
}

/// Symbol occurrence counts of `seq` over an alphabet of `size` symbols.
pub fn type_counts(seq: &[usize], size: usize) -> Result<Vec<u64>> {
    check_symbols(seq, size)?;
    let mut counts = vec![0u64; size];
    for &s in seq {
        counts[s] += 1;
    }
    Ok(counts)
}

/// Empirical distribution of `seq`.
pub fn type_of(seq: &[usize], size: usize) -> Result<ProbVec> {
    Ok(ProbVec::from_counts(&type_counts(seq, size)?))
}

/// Empirical joint distribution of two aligned sequences, kept as counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointType {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    n: u64,
}

impl JointType {
    /// Builds a joint type from a row-major count matrix.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != rows * cols {
            return Err(Error::LengthMismatch { left: counts.len(), right: rows * cols });
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Self { rows, cols, counts, n })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Blocklength.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.cols + b]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_counts(&self) -> Vec<u64> {
        self.counts.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_counts(&self) -> Vec<u64> {
        (0..self.cols).map(|b| (0..self.rows).map(|a| self.count(a, b)).sum()).collect()
    }

    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.count(a, b) as f64 / self.n as f64
    }

    /// `I(A;B)` in nats.
    pub fn mutual_information(&self) -> f64 {
        // n I = sum c ln c - sum r ln r - sum k ln k + n ln n. Each sum runs
        // over sorted counts so joint types that agree up to a relabelling
        // produce bit-identical values.
        let n = self.n as f64;
        let joint = sorted_xlogx_sum(self.counts.clone());
        let rows = sorted_xlogx_sum(self.row_counts());
        let cols = sorted_xlogx_sum(self.col_counts());
        ((joint - rows - cols + xlogx(n)) / n).max(0.0)
    }

    /// `H(A|B)` in nats.
    pub fn conditional_entropy_rows_given_cols(&self) -> f64 {
        let n = self.n as f64;
        let joint = sorted_xlogx_sum(self.counts.clone());
        let cols = sorted_xlogx_sum(self.col_counts());
        ((cols - joint) / n).max(0.0)
    }

    /// `H(A)` in nats.
    pub fn row_entropy(&self) -> f64 {
        let n = self.n as f64;
        ((xlogx(n) - sorted_xlogx_sum(self.row_counts())) / n).max(0.0)
    }
}

fn sorted_xlogx_sum(mut counts: Vec<u64>) -> f64 {
    counts.sort_unstable();
    counts.into_iter().map(|c| xlogx(c as f64)).sum()
}

/// Joint type of `a` (alphabet size `size_a`) and `b` (alphabet size `size_b`).
pub fn joint_type(a: &[usize], size_a: usize, b: &[usize], size_b: usize) -> Result<JointType> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    check_symbols(a, size_a)?;
    check_symbols(b, size_b)?;
    let mut counts = vec![0u64; size_a * size_b];
    for (&x, &y) in a.iter().zip(b) {
        counts[x * size_b + y] += 1;
    }
    JointType::from_counts(size_a, size_b, counts)
}

/// Shannon entropy in nats.
pub fn entropy(p: &ProbVec) -> f64 {
    entropy_of(p.mass())
}

pub(crate) fn entropy_of(mass: &[f64]) -> f64 {
    -mass.iter().map(|&m| xlogx(m)).sum::<f64>()
}

pub fn mutual_information(jt: &JointType) -> f64 {
    jt.mutual_information()
}

/// Mutual information of a row-major joint distribution.
pub fn mutual_information_of(rows: usize, cols: usize, mass: &[f64]) -> f64 {
    debug_assert_eq!(mass.len(), rows * cols);
    let row_mass: Vec<f64> = mass.chunks(cols).map(|r| r.iter().sum()).collect();
    let col_mass: Vec<f64> = (0..cols).map(|b| (0..rows).map(|a| mass[a * cols + b]).sum()).collect();
    (entropy_of(&row_mass) + entropy_of(&col_mass) - entropy_of(mass)).max(0.0)
}

/// Binary entropy `h2(t)` in nats.
pub fn binary_entropy(t: f64) -> f64 {
    -xlogx(t) - xlogx(1.0 - t)
}

/// Binary relative entropy `d(p || q)` in nats.
///
/// Returns `f64::INFINITY` when `q` puts zero mass where `p` does not.
pub fn binary_divergence(p: f64, q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
    divergence_term(p, q) + divergence_term(1.0 - p, 1.0 - q)
}

/// `p ln(p/q)` with `0 ln(0/q) = 0` and `p ln(p/0) = +inf` for `p > 0`.
#[inline]
pub(crate) fn divergence_term(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if q <= 0.0 {
        f64::INFINITY
    } else {
        p * (p / q).ln()
    }
}

/// Relative entropy `D(p || q)` between two distributions on the same alphabet.
pub fn divergence(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    Ok(p.mass().iter().zip(q.mass()).map(|(&a, &b)| divergence_term(a, b)).sum())
}

/// A joint distribution of `(X, X_bar, Y)` stored row-major as
/// `mass[(x * n_xbar + xbar) * n_y + y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDist3 {
    dims: [usize; 3],
    mass: Vec<f64>,
}

impl JointDist3 {
    pub fn new(dims: [usize; 3], mass: Vec<f64>) -> Result<Self> {
        if mass.len() != dims.iter().product::<usize>() {
            return Err(Error::LengthMismatch { left: mass.len(), right: dims.iter().product() });
        }
        check_simplex(&mass)?;
        Ok(Self { dims, mass })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, x: usize, xbar: usize, y: usize) -> f64 {
        let [_, nb, ny] = self.dims;
        self.mass[(x * nb + xbar) * ny + y]
    }

    /// `P_{X X_bar}` as a row-major matrix.
    pub fn pair_marginal(&self) -> Vec<f64> {
        self.mass.chunks(self.dims[2]).map(|c| c.iter().sum()).collect()
    }

    /// `P_{X Y}` as a row-major matrix.
    pub fn xy_marginal(&self) -> Vec<f64> {
        let [nx, nb, ny] = self.dims;
        let mut out = vec![0.0; nx * ny];
        for x in 0..nx {
            for b in 0..nb {
                for y in 0..ny {
                    out[x * ny + y] += self.get(x, b, y);
                }
            }
        }
        out
    }

    /// `P_{X_bar Y}` as a row-major matrix.
    pub fn xbar_y_marginal(&self) -> Vec<f64> {
        let [nx, nb, ny] = self.dims;
        let mut out = vec![0.0; nb * ny];
        for x in 0..nx {
            for b in 0..nb {
                for y in 0..ny {
                    out[b * ny + y] += self.get(x, b, y);
                }
            }
        }
        out
    }
}
