use std::collections::BTreeMap;
use std::path::Path;

use crate::construction::is_complement;
use crate::probkit::{type_counts, Alphabet};
use crate::{Error, Result};

/// An ordered list of `M >= 1` codewords of common length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    codewords: Vec<Vec<usize>>,
    alphabet_size: usize,
}

impl Codebook {
    pub fn new(codewords: Vec<Vec<usize>>, alphabet_size: usize) -> Result<Self> {
        let first = codewords.first().ok_or(Error::EmptyCodebook)?;
        let n = first.len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        for cw in &codewords {
            if cw.len() != n {
                return Err(Error::LengthMismatch { left: n, right: cw.len() });
            }
            if let Some(&s) = cw.iter().find(|&&s| s >= alphabet_size) {
                return Err(Error::SymbolOutOfAlphabet { symbol: s, size: alphabet_size });
            }
        }
        Ok(Self { codewords, alphabet_size })
    }

    /// One codeword per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let codewords = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| alphabet.parse(l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(codewords, alphabet.size())
    }

    pub fn load(path: impl AsRef<Path>, alphabet: &Alphabet) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, alphabet)
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.codewords.iter().map(|c| alphabet.render(c) + "\n").collect()
    }

    /// Three codewords of the balanced binary type (weight `floor(n/2)`):
    /// the first three in lexicographic order that are pairwise not bitwise
    /// complements.
    pub fn demo(n: usize) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::InvalidConfig(format!("demo blocklength {n} out of range")));
        }
        let weight = (n / 2) as u32;
        let mut picked: Vec<Vec<usize>> = Vec::with_capacity(3);
        for v in 0usize..1 << n {
            if v.count_ones() != weight {
                continue;
            }
            let cw: Vec<usize> = (0..n).map(|i| (v >> (n - 1 - i)) & 1).collect();
            if picked.iter().all(|p| !is_complement(p, &cw)) {
                picked.push(cw);
                if picked.len() == 3 {
                    return Self::new(picked, 2);
                }
            }
        }
        Err(Error::InvalidConfig(format!("blocklength {n} has no three same-type codewords without a complement pair")))
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn blocklength(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// `ln(M) / n` nats per channel use.
    pub fn rate(&self) -> f64 {
        (self.len() as f64).ln() / self.blocklength() as f64
    }

    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn type_counts(&self, m: usize) -> Vec<u64> {
        type_counts(&self.codewords[m], self.alphabet_size).expect("validated on construction")
    }

    pub fn is_constant_composition(&self) -> bool {
        let first = self.type_counts(0);
        (1..self.len()).all(|m| self.type_counts(m) == first)
    }

    /// The largest set of codewords sharing one type, in their original
    /// order. Among equally large classes the lexicographically smallest
    /// type (as a count vector) wins.
    pub fn extract_constant_composition(&self) -> Codebook {
        let mut classes: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
        for m in 0..self.len() {
            classes.entry(self.type_counts(m)).or_default().push(m);
        }
        // BTreeMap iterates types in ascending order; keep the first maximum.
        let (_, members) =
            classes
                .into_iter()
                .fold((Vec::new(), Vec::new()), |best, (t, ms)| if ms.len() > best.1.len() { (t, ms) } else { best });
        Codebook {
            codewords: members.into_iter().map(|m| self.codewords[m].clone()).collect(),
            alphabet_size: self.alphabet_size,
        }
    }
}
