//! Discrete memoryless channels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::probkit::{check_simplex, Alphabet};
use crate::{Error, Result};

/// A row-stochastic matrix `W(y|x)` with labelled input and output alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    matrix: Vec<Vec<f64>>,
    inputs: Alphabet,
    outputs: Alphabet,
}

/// Alphabet `0, 1, ..., 9, a, b, ...` truncated to `size`.
fn default_alphabet(size: usize) -> Result<Alphabet> {
    let symbols: Vec<char> = ('0'..='9').chain('a'..='z').take(size).collect();
    if symbols.len() < size {
        return Err(Error::Unsupported(format!("alphabet of {size} symbols needs explicit labels")));
    }
    Alphabet::new(symbols)
}

impl Channel {
    pub fn new(matrix: Vec<Vec<f64>>, inputs: Alphabet, outputs: Alphabet) -> Result<Self> {
        if matrix.len() != inputs.size() {
            return Err(Error::InvalidChannel(format!("{} rows for {} input symbols", matrix.len(), inputs.size())));
        }
        for (x, row) in matrix.iter().enumerate() {
            if row.len() != outputs.size() {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries for {} output symbols",
                    row.len(),
                    outputs.size()
                )));
            }
            check_simplex(row).map_err(|e| Error::InvalidChannel(format!("row {x}: {e}")))?;
        }
        Ok(Self { matrix, inputs, outputs })
    }

    /// Channel with numeric input and output labels.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidChannel("empty matrix".into()));
        }
        Self::new(matrix, default_alphabet(rows)?, default_alphabet(cols)?)
    }

    pub fn num_inputs(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.size()
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x]
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Column `j` of the result is column `perm[j]` of `self`; output labels
    /// stay in place.
    pub fn permute_outputs(&self, perm: &[usize]) -> Result<Self> {
        let k = self.num_outputs();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidChannel(format!("{perm:?} is not a permutation of {k} outputs")));
        }
        let matrix = self.matrix.iter().map(|row| perm.iter().map(|&p| row[p]).collect()).collect();
        Ok(Self { matrix, inputs: self.inputs.clone(), outputs: self.outputs.clone() })
    }

    pub fn swap_outputs(&self, i: usize, j: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..self.num_outputs()).collect();
        if i >= perm.len() || j >= perm.len() {
            return Err(Error::SymbolOutOfAlphabet { symbol: i.max(j), size: perm.len() });
        }
        perm.swap(i, j);
        self.permute_outputs(&perm)
    }

    fn check_pair(&self, x: &[usize], y: &[usize]) -> Result<()> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
        }
        if let Some(&s) = x.iter().find(|&&s| s >= self.num_inputs()) {
            return Err(Error::SymbolOutOfAlphabet { symbol: s, size: self.num_inputs() });
        }
        if let Some(&s) = y.iter().find(|&&s| s >= self.num_outputs()) {
            return Err(Error::SymbolOutOfAlphabet { symbol: s, size: self.num_outputs() });
        }
        Ok(())
    }

    /// `ln W^n(y|x)`; `-inf` when some letter has zero probability.
    pub fn log_product_prob(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.log_product_prob_unchecked(x, y))
    }

    pub(crate) fn log_product_prob_unchecked(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(&a, &b)| self.matrix[a][b].ln()).sum()
    }

    /// `W^n(y|x)`. Multiplied directly up to 32 letters, exponentiated from
    /// the log-domain value beyond that.
    pub fn product_prob(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.product_prob_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn product_prob_unchecked(&self, x: &[usize], y: &[usize]) -> f64 {
        if x.len() <= 32 {
            x.iter().zip(y).map(|(&a, &b)| self.matrix[a][b]).product()
        } else {
            self.log_product_prob_unchecked(x, y).exp()
        }
    }

    /// Bhattacharyya coefficient `sum_y sqrt(W(y|x) W(y|xbar))`.
    pub fn bhattacharyya(&self, x: usize, xbar: usize) -> f64 {
        self.matrix[x].iter().zip(&self.matrix[xbar]).map(|(&a, &b)| (a * b).sqrt()).sum()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// The binary-input quaternary-output channel `W_eps`, outputs ordered `a, b, c, d`:
/// input 0 lands in `{a, b}` and input 1 in `{c, d}` with probability `1 - eps`.
pub fn make_w_eps(eps: f64) -> Result<Channel> {
    check_eps(eps)?;
    let hi = (1.0 - eps) / 2.0;
    let lo = eps / 2.0;
    Channel::new(vec![vec![hi, hi, lo, lo], vec![lo, lo, hi, hi]], Alphabet::binary(), Alphabet::quaternary())
}

/// `W_eps` with output columns `b` and `c` exchanged.
pub fn make_w_hat_eps(eps: f64) -> Result<Channel> {
    check_eps(eps)?;
    let hi = (1.0 - eps) / 2.0;
    let lo = eps / 2.0;
    Channel::new(vec![vec![hi, lo, hi, lo], vec![lo, hi, lo, hi]], Alphabet::binary(), Alphabet::quaternary())
}

/// Binary symmetric channel with crossover probability `eps`.
pub fn make_bsc(eps: f64) -> Result<Channel> {
    check_eps(eps)?;
    Channel::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]], Alphabet::binary(), Alphabet::binary())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    WEps,
    WHatEps,
    Bsc,
}

impl Family {
    pub fn build(self, eps: f64) -> Result<Channel> {
        match self {
            Family::WEps => make_w_eps(eps),
            Family::WHatEps => make_w_hat_eps(eps),
            Family::Bsc => make_bsc(eps),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::WEps => "w_eps",
            Family::WHatEps => "w_hat_eps",
            Family::Bsc => "bsc",
        }
    }
}

/// Channel description as found in a channel specification file.
///
/// ```json
/// {"family": "w_eps", "eps": 0.001}
/// {"matrix": [[0.9, 0.1], [0.2, 0.8]], "inputs": ["0", "1"], "outputs": ["0", "1"]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ChannelSpec {
    Family { family: Family, eps: f64 },
    Matrix { matrix: Vec<Vec<f64>>, inputs: Vec<String>, outputs: Vec<String> },
}

fn labels_to_alphabet(labels: &[String]) -> Result<Alphabet> {
    let symbols = labels
        .iter()
        .map(|l| {
            let mut chars = l.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(Error::Parse(format!("symbol label {l:?} must be a single character"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Alphabet::new(symbols)
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelSpec::Family { family, eps } => family.build(*eps),
            ChannelSpec::Matrix { matrix, inputs, outputs } => {
                Channel::new(matrix.clone(), labels_to_alphabet(inputs)?, labels_to_alphabet(outputs)?)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
