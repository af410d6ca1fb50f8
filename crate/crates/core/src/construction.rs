//! Confusable output sequences for pairs of binary codewords.
//!
//! `kappa` maps a pair of input bits to one of the four outputs so that the
//! output sequence `y_kappa(x, xbar)` is a "clean" observation of `x` under
//! `W_eps` and of `xbar` under `W_hat_eps` at the same time. Changing a
//! single symbol of it tips the MMI decoder towards `xbar`.

use serde::{Deserialize, Serialize};

use crate::channels::{make_w_eps, make_w_hat_eps};
use crate::probkit::{joint_type, type_counts};
use crate::{Error, Result};

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;
pub const D: usize = 3;

/// `kappa(0,0) = a`, `kappa(0,1) = b`, `kappa(1,0) = c`, `kappa(1,1) = d`.
#[inline]
pub fn kappa(x: usize, xbar: usize) -> usize {
    assert!(x < 2 && xbar < 2, "kappa takes bits");
    2 * x + xbar
}

/// Inverse of [`kappa`].
#[inline]
pub fn kappa_inverse(y: usize) -> (usize, usize) {
    assert!(y < 4, "kappa_inverse takes a quaternary symbol");
    (y >> 1, y & 1)
}

fn check_binary_pair(x: &[usize], xbar: &[usize]) -> Result<()> {
    if x.len() != xbar.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: xbar.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    if let Some(&s) = x.iter().chain(xbar).find(|&&s| s > 1) {
        return Err(Error::SymbolOutOfAlphabet { symbol: s, size: 2 });
    }
    Ok(())
}

/// Position-wise `kappa`.
pub fn y_kappa(x: &[usize], xbar: &[usize]) -> Result<Vec<usize>> {
    check_binary_pair(x, xbar)?;
    Ok(x.iter().zip(xbar).map(|(&a, &b)| kappa(a, b)).collect())
}

/// Recovers both codewords from a `y_kappa` sequence.
pub fn split_y_kappa(y: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if let Some(&s) = y.iter().find(|&&s| s > 3) {
        return Err(Error::SymbolOutOfAlphabet { symbol: s, size: 4 });
    }
    Ok(y.iter().map(|&s| kappa_inverse(s)).unzip())
}

pub fn is_complement(x: &[usize], xbar: &[usize]) -> bool {
    x.len() == xbar.len() && x.iter().zip(xbar).all(|(a, b)| a != b)
}

fn check_same_type(x: &[usize], xbar: &[usize]) -> Result<()> {
    check_binary_pair(x, xbar)?;
    if type_counts(x, 2)? != type_counts(xbar, 2)? {
        return Err(Error::TypeMismatch);
    }
    Ok(())
}

/// `(I(x_m; y_kappa), I(x_mbar; y_kappa))` for two codewords of one type.
/// Both equal `H(type)` since `y_kappa` determines each codeword.
pub fn mmi_tie_check(x_m: &[usize], x_mbar: &[usize]) -> Result<(f64, f64)> {
    check_same_type(x_m, x_mbar)?;
    let y = y_kappa(x_m, x_mbar)?;
    Ok((joint_type(x_m, 2, &y, 4)?.mutual_information(), joint_type(x_mbar, 2, &y, 4)?.mutual_information()))
}

/// A codeword pair with its confusable output and, once built, the
/// single-symbol modification `y_tilde`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusablePair {
    pub x_m: Vec<usize>,
    pub x_mbar: Vec<usize>,
    pub y_kappa: Vec<usize>,
    pub y_tilde: Option<Vec<usize>>,
    /// Zero-based position where `y_tilde` differs from `y_kappa`.
    pub modified_index: Option<usize>,
}

impl ConfusablePair {
    pub fn new(x_m: Vec<usize>, x_mbar: Vec<usize>) -> Result<Self> {
        let y_kappa = y_kappa(&x_m, &x_mbar)?;
        Ok(Self { x_m, x_mbar, y_kappa, y_tilde: None, modified_index: None })
    }

    /// `(I(x_m; y_tilde), I(x_mbar; y_tilde))`.
    pub fn y_tilde_mutual_informations(&self) -> Result<(f64, f64)> {
        let y = self.y_tilde.as_ref().ok_or(Error::MissingYTilde)?;
        Ok((
            joint_type(&self.x_m, 2, y, 4)?.mutual_information(),
            joint_type(&self.x_mbar, 2, y, 4)?.mutual_information(),
        ))
    }
}

/// Builds `y_tilde` from `y_kappa(x_m, x_mbar)`.
///
/// If the pair has a `(0,0)` position, the first `(1,0)` position is changed
/// from `c` to `a`; otherwise it has a `(1,1)` position and the first `(0,1)`
/// position is changed from `b` to `d`. Either way `y_tilde` still determines
/// `x_mbar` while `x_m` is no longer a function of the output, so
/// `I(x_m; y_tilde) < I(x_mbar; y_tilde)`.
pub fn build_y_tilde(x_m: &[usize], x_mbar: &[usize]) -> Result<ConfusablePair> {
    check_same_type(x_m, x_mbar)?;
    if x_m == x_mbar {
        return Err(Error::IdenticalCodewords);
    }
    if is_complement(x_m, x_mbar) {
        return Err(Error::ComplementPair);
    }
    let mut pair = ConfusablePair::new(x_m.to_vec(), x_mbar.to_vec())?;
    let y = &pair.y_kappa;
    let (target, from, to) = if y.contains(&A) { (C, C, A) } else { (B, B, D) };
    let index =
        y.iter().position(|&s| s == target).expect("same type and distinct implies both off-diagonal pairs occur");
    let mut tilde = y.clone();
    debug_assert_eq!(tilde[index], from);
    tilde[index] = to;
    pair.y_tilde = Some(tilde);
    pair.modified_index = Some(index);
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputChoice {
    YKappa,
    YTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMember {
    W,
    WHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sender {
    M,
    MBar,
}

/// Probability of observing the chosen output of `pair` when the chosen
/// codeword is sent over `W_eps` or `W_hat_eps`.
pub fn confusable_prob(
    eps: f64,
    pair: &ConfusablePair,
    which: OutputChoice,
    under: FamilyMember,
    sent: Sender,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let ch = match under {
        FamilyMember::W => make_w_eps(eps)?,
        FamilyMember::WHat => make_w_hat_eps(eps)?,
    };
    let y = match which {
        OutputChoice::YKappa => &pair.y_kappa,
        OutputChoice::YTilde => pair.y_tilde.as_ref().ok_or(Error::MissingYTilde)?,
    };
    let x = match sent {
        Sender::M => &pair.x_m,
        Sender::MBar => &pair.x_mbar,
    };
    ch.product_prob(x, y)
}

/// `((1 - eps)/2)^n * eps / (1 - eps)`: the probability of `y_tilde` given
/// `x_m` under `W_eps`, a lower bound on every MMI error probability of a
/// constant-composition code with at least three codewords.
pub fn mmi_error_lower_bound(eps: f64, n: usize) -> f64 {
    ((1.0 - eps) / 2.0).powi(n as i32) * eps / (1.0 - eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::Alphabet;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn bin(s: &str) -> Vec<usize> {
        Alphabet::binary().parse(s).unwrap()
    }

    fn quat(s: &[usize]) -> String {
        Alphabet::quaternary().render(s)
    }

    #[test]
    fn kappa_table() {
        assert_eq!(kappa(0, 0), A);
        assert_eq!(kappa(0, 1), B);
        assert_eq!(kappa(1, 0), C);
        assert_eq!(kappa(1, 1), D);
        for x in 0..2 {
            for xb in 0..2 {
                assert_eq!(kappa_inverse(kappa(x, xb)), (x, xb));
            }
        }
    }

    #[test]
    fn y_kappa_examples() {
        assert_eq!(quat(&y_kappa(&bin("0011"), &bin("0101")).unwrap()), "abcd");
        assert_eq!(quat(&y_kappa(&bin("00"), &bin("11")).unwrap()), "bb");
        let (x, xb) = split_y_kappa(&y_kappa(&bin("011010"), &bin("110001")).unwrap()).unwrap();
        assert_eq!((x, xb), (bin("011010"), bin("110001")));
        assert!(matches!(y_kappa(&bin("01"), &bin("011")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn tie_check_examples() {
        let (a, b) = mmi_tie_check(&bin("0011"), &bin("0101")).unwrap();
        assert_abs_diff_eq!(a, LN_2, epsilon = 1e-15);
        assert_eq!(a, b);
        let (a, b) = mmi_tie_check(&bin("01"), &bin("10")).unwrap();
        assert_abs_diff_eq!(a, LN_2, epsilon = 1e-15);
        assert_eq!(a, b);
        let (a, b) = mmi_tie_check(&bin("0001"), &bin("0001")).unwrap();
        let h = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert_abs_diff_eq!(a, h, epsilon = 1e-15);
        assert_eq!(a, b);
        assert!(matches!(mmi_tie_check(&bin("0011"), &bin("0001")), Err(Error::TypeMismatch)));
    }

    #[test]
    fn y_tilde_examples() {
        let pair = build_y_tilde(&bin("0011"), &bin("0101")).unwrap();
        assert_eq!(quat(pair.y_tilde.as_ref().unwrap()), "abad");
        assert_eq!(pair.modified_index, Some(2));
        let (im, imbar) = pair.y_tilde_mutual_informations().unwrap();
        assert_abs_diff_eq!(im, 0.5 * LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(imbar, LN_2, epsilon = 1e-15);

        let pair = build_y_tilde(&bin("1100"), &bin("1010")).unwrap();
        assert_eq!(quat(&pair.y_kappa), "dcba");
        assert_eq!(quat(pair.y_tilde.as_ref().unwrap()), "daba");
        let (im, imbar) = pair.y_tilde_mutual_informations().unwrap();
        assert!(im < imbar);

        // No (0,0) position: the b -> d branch.
        let pair = build_y_tilde(&bin("011"), &bin("101")).unwrap();
        assert_eq!(quat(&pair.y_kappa), "bcd");
        assert_eq!(quat(pair.y_tilde.as_ref().unwrap()), "dcd");
        let (im, imbar) = pair.y_tilde_mutual_informations().unwrap();
        assert!(im < imbar);

        assert!(matches!(build_y_tilde(&bin("01"), &bin("10")), Err(Error::ComplementPair)));
        assert!(matches!(build_y_tilde(&bin("01"), &bin("01")), Err(Error::IdenticalCodewords)));
        assert!(matches!(build_y_tilde(&bin("01"), &bin("11")), Err(Error::TypeMismatch)));
    }

    #[test]
    fn probabilities_of_confusable_outputs() {
        let pair = build_y_tilde(&bin("0011"), &bin("0101")).unwrap();
        let p = confusable_prob(0.001, &pair, OutputChoice::YKappa, FamilyMember::W, Sender::M).unwrap();
        assert_abs_diff_eq!(p, 0.0622503747500625, epsilon = 1e-16);
        let q = confusable_prob(0.001, &pair, OutputChoice::YKappa, FamilyMember::WHat, Sender::MBar).unwrap();
        assert_eq!(p, q);
        let t = confusable_prob(0.001, &pair, OutputChoice::YTilde, FamilyMember::W, Sender::M).unwrap();
        assert_abs_diff_eq!(t, 6.23126874375e-5, epsilon = 1e-17);
        assert_abs_diff_eq!(t, mmi_error_lower_bound(0.001, 4), epsilon = 1e-18);
        let bare = ConfusablePair::new(bin("0011"), bin("0101")).unwrap();
        assert!(matches!(
            confusable_prob(0.001, &bare, OutputChoice::YTilde, FamilyMember::W, Sender::M),
            Err(Error::MissingYTilde)
        ));
        for eps in [0.01, 0.2, 0.45] {
            for (a, b) in [("0110", "1010"), ("001011", "010101")] {
                let pair = ConfusablePair::new(bin(a), bin(b)).unwrap();
                let p = confusable_prob(eps, &pair, OutputChoice::YKappa, FamilyMember::W, Sender::M).unwrap();
                let q = confusable_prob(eps, &pair, OutputChoice::YKappa, FamilyMember::WHat, Sender::MBar).unwrap();
                assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn modification_invariants_small_n() {
        for n in 2..=6 {
            for a in 0..1usize << n {
                for b in 0..1usize << n {
                    let x: Vec<usize> = (0..n).map(|i| (a >> i) & 1).collect();
                    let xb: Vec<usize> = (0..n).map(|i| (b >> i) & 1).collect();
                    if a == b || a.count_ones() != b.count_ones() || is_complement(&x, &xb) {
                        continue;
                    }
                    let pair = build_y_tilde(&x, &xb).unwrap();
                    let tilde = pair.y_tilde.as_ref().unwrap();
                    let diffs: Vec<usize> = (0..n).filter(|&i| tilde[i] != pair.y_kappa[i]).collect();
                    assert_eq!(diffs, vec![pair.modified_index.unwrap()]);
                    let i = diffs[0];
                    assert!((pair.y_kappa[i], tilde[i]) == (C, A) || (pair.y_kappa[i], tilde[i]) == (B, D));
                    let jt = joint_type(&xb, 2, tilde, 4).unwrap();
                    assert_eq!(jt.conditional_entropy_rows_given_cols(), 0.0);
                }
            }
        }
    }
}
