use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Codebook;
use crate::channels::Channel;
use crate::probkit::JointType;
use crate::{Error, Result};

/// A decoding metric `q(x, y) >= 0`, supplied through `ln q`.
///
/// Working in the log domain keeps `exp(n I)`-style metrics finite; a zero
/// metric is `-inf`.
pub trait Metric: Send + Sync {
    fn log_metric(&self, x: &[usize], y: &[usize]) -> f64;
}

impl<F> Metric for F
where
    F: Fn(&[usize], &[usize]) -> f64 + Send + Sync,
{
    fn log_metric(&self, x: &[usize], y: &[usize]) -> f64 {
        self(x, y)
    }
}

/// `q = W^n(y|x)`.
#[derive(Debug, Clone)]
pub struct LikelihoodMetric(pub Channel);

impl Metric for LikelihoodMetric {
    fn log_metric(&self, x: &[usize], y: &[usize]) -> f64 {
        self.0.log_product_prob_unchecked(x, y)
    }
}

/// `q = exp(n I(x; y))` with `I` the empirical mutual information.
#[derive(Debug, Clone, Copy, Default)]
pub struct MiMetric;

impl Metric for MiMetric {
    fn log_metric(&self, x: &[usize], y: &[usize]) -> f64 {
        x.len() as f64 * empirical_mi(x, y)
    }
}

/// Empirical mutual information, sized from the largest symbol present.
/// Unused rows and columns do not change the value.
pub(crate) fn empirical_mi(x: &[usize], y: &[usize]) -> f64 {
    let rows = x.iter().max().map_or(1, |m| m + 1);
    let cols = y.iter().max().map_or(1, |m| m + 1);
    let mut counts = vec![0u64; rows * cols];
    for (&a, &b) in x.iter().zip(y) {
        counts[a * cols + b] += 1;
    }
    JointType::from_counts(rows, cols, counts).map_or(0.0, |jt| jt.mutual_information())
}

/// Metrics selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinMetric {
    Likelihood,
    ExpMi,
}

impl BuiltinMetric {
    /// The likelihood metric needs the channel it scores against.
    pub fn instantiate(self, ch: &Channel) -> Arc<dyn Metric> {
        match self {
            BuiltinMetric::Likelihood => Arc::new(LikelihoodMetric(ch.clone())),
            BuiltinMetric::ExpMi => Arc::new(MiMetric),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMetric::Likelihood => "likelihood",
            BuiltinMetric::ExpMi => "exp-mi",
        }
    }
}

impl FromStr for BuiltinMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "likelihood" => Ok(Self::Likelihood),
            "exp-mi" | "mi" => Ok(Self::ExpMi),
            other => Err(Error::Parse(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone)]
pub enum DecoderKind {
    /// Maximum likelihood for the attached channel.
    Ml(Channel),
    /// Maximum empirical mutual information; needs no channel.
    Mmi,
    MaxMetric(Arc<dyn Metric>),
    /// Picks message `m` with probability proportional to `q(x_m, y)`.
    StochasticMetric(Arc<dyn Metric>),
}

impl fmt::Debug for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderKind::Ml(_) => f.write_str("Ml"),
            DecoderKind::Mmi => f.write_str("Mmi"),
            DecoderKind::MaxMetric(_) => f.write_str("MaxMetric"),
            DecoderKind::StochasticMetric(_) => f.write_str("StochasticMetric"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ties go to the smallest message index.
    #[default]
    LowestIndex,
    /// A tie is reported as such and counted as an error for every message.
    Error,
    /// Uniform choice among the tied messages.
    Random,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest_index" | "lowest-index" => Ok(Self::LowestIndex),
            "error" => Ok(Self::Error),
            "random" => Ok(Self::Random),
            other => Err(Error::Parse(format!("unknown tie policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    pub tie_policy: TiePolicy,
}

impl DecoderSpec {
    pub fn new(kind: DecoderKind, tie_policy: TiePolicy) -> Self {
        Self { kind, tie_policy }
    }

    pub fn ml(ch: Channel) -> Self {
        Self::new(DecoderKind::Ml(ch), TiePolicy::LowestIndex)
    }

    pub fn mmi() -> Self {
        Self::new(DecoderKind::Mmi, TiePolicy::LowestIndex)
    }

    pub fn with_ties(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }
}

/// Output of a decoder for one received sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Message(usize),
    /// Several messages share the best score and the policy refuses to pick.
    Tie(Vec<usize>),
    /// A randomised decision: probability of each message.
    Distribution(Vec<f64>),
}

impl Decision {
    /// Probability that the decision equals `m`.
    pub fn prob_correct(&self, m: usize) -> f64 {
        match self {
            Decision::Message(k) => f64::from(u8::from(*k == m)),
            Decision::Tie(_) => 0.0,
            Decision::Distribution(p) => p.get(m).copied().unwrap_or(0.0),
        }
    }
}

const TIE_RTOL: f64 = 1e-12;

fn is_tied(score: f64, best: f64) -> bool {
    score == best || (score - best).abs() <= TIE_RTOL * best.abs().max(1.0)
}

fn scores(metric: &dyn Metric, cb: &Codebook, y: &[usize]) -> Vec<f64> {
    cb.codewords().iter().map(|x| metric.log_metric(x, y)).collect()
}

fn argmax_decision(scores: &[f64], policy: TiePolicy) -> Result<Decision> {
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("metric"));
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&m| is_tied(scores[m], best)).collect();
    if tied.len() == 1 {
        return Ok(Decision::Message(tied[0]));
    }
    Ok(match policy {
        TiePolicy::LowestIndex => Decision::Message(tied[0]),
        TiePolicy::Error => Decision::Tie(tied),
        TiePolicy::Random => {
            let mut p = vec![0.0; scores.len()];
            let share = 1.0 / tied.len() as f64;
            for m in tied {
                p[m] = share;
            }
            Decision::Distribution(p)
        }
    })
}

fn stochastic_decision(scores: &[f64]) -> Result<Decision> {
    if scores.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
        return Err(Error::NonFinite("metric"));
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::MetricVanishes);
    }
    let w: Vec<f64> = scores.iter().map(|s| (s - best).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(Decision::Distribution(w.into_iter().map(|v| v / total).collect()))
}

/// Decodes `y` without checking it; callers validate once up front.
pub(crate) fn decode_unchecked(spec: &DecoderSpec, cb: &Codebook, y: &[usize]) -> Result<Decision> {
    match &spec.kind {
        DecoderKind::Ml(ch) => {
            let s: Vec<f64> = cb.codewords().iter().map(|x| ch.log_product_prob_unchecked(x, y)).collect();
            argmax_decision(&s, spec.tie_policy)
        }
        DecoderKind::Mmi => argmax_decision(&scores(&MiMetric, cb, y), spec.tie_policy),
        DecoderKind::MaxMetric(q) => argmax_decision(&scores(q.as_ref(), cb, y), spec.tie_policy),
        DecoderKind::StochasticMetric(q) => stochastic_decision(&scores(q.as_ref(), cb, y)),
    }
}

pub(crate) fn check_compatible(spec: &DecoderSpec, cb: &Codebook) -> Result<()> {
    if let DecoderKind::Ml(ch) = &spec.kind {
        if ch.num_inputs() != cb.alphabet_size() {
            return Err(Error::InvalidChannel(format!(
                "channel has {} inputs but the codebook alphabet has {} symbols",
                ch.num_inputs(),
                cb.alphabet_size()
            )));
        }
    }
    Ok(())
}

/// Applies the decoder to a received sequence.
pub fn decode(spec: &DecoderSpec, cb: &Codebook, y: &[usize]) -> Result<Decision> {
    check_compatible(spec, cb)?;
    if y.len() != cb.blocklength() {
        return Err(Error::LengthMismatch { left: cb.blocklength(), right: y.len() });
    }
    if let DecoderKind::Ml(ch) = &spec.kind {
        if let Some(&s) = y.iter().find(|&&s| s >= ch.num_outputs()) {
            return Err(Error::SymbolOutOfAlphabet { symbol: s, size: ch.num_outputs() });
        }
    }
    decode_unchecked(spec, cb, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_bsc, make_w_eps};
    use crate::probkit::Alphabet;

    fn cb(words: &[&str]) -> Codebook {
        Codebook::parse(&words.join("\n"), &Alphabet::binary()).unwrap()
    }

    fn quaternary(s: &str) -> Vec<usize> {
        Alphabet::new("abcd".chars().collect()).unwrap().parse(s).unwrap()
    }

    #[test]
    fn mmi_picks_unique_maximiser() {
        let c = cb(&["0011", "0101", "0110"]);
        let y = quaternary("abad");
        let s = scores(&MiMetric, &c, &y);
        // 0101 determines-from-y and beats 0011 by (1/2) ln 2 per letter scale.
        assert!((s[1] / 4.0 - s[0] / 4.0 - 0.5 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(decode(&DecoderSpec::mmi(), &c, &y).unwrap(), Decision::Message(1));
    }

    #[test]
    fn ml_on_bsc() {
        let c = cb(&["0", "1"]);
        let spec = DecoderSpec::ml(make_bsc(0.1).unwrap());
        assert_eq!(decode(&spec, &c, &[1]).unwrap(), Decision::Message(1));
        assert_eq!(decode(&spec, &c, &[0]).unwrap(), Decision::Message(0));
        assert!(decode(&spec, &c, &[2]).is_err());
        assert!(decode(&spec, &c, &[0, 1]).is_err());
        let ternary = Codebook::new(vec![vec![2]], 3).unwrap();
        assert!(decode(&DecoderSpec::ml(make_w_eps(0.1).unwrap()), &ternary, &[0]).is_err());
    }

    #[test]
    fn complement_pair_ties() {
        let c = cb(&["01", "10"]);
        let y = [0, 1];
        let mi = scores(&MiMetric, &c, &y);
        assert_eq!(mi[0], mi[1]);
        assert!((mi[0] - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let tie = DecoderSpec::mmi().with_ties(TiePolicy::Error);
        assert_eq!(decode(&tie, &c, &y).unwrap(), Decision::Tie(vec![0, 1]));
        assert_eq!(decode(&DecoderSpec::mmi(), &c, &y).unwrap(), Decision::Message(0));
        let rnd = DecoderSpec::mmi().with_ties(TiePolicy::Random);
        assert_eq!(decode(&rnd, &c, &y).unwrap(), Decision::Distribution(vec![0.5, 0.5]));
    }

    #[test]
    fn stochastic_weights_are_normalised_likelihoods() {
        let ch = make_bsc(0.1).unwrap();
        let spec = DecoderSpec::new(
            DecoderKind::StochasticMetric(BuiltinMetric::Likelihood.instantiate(&ch)),
            TiePolicy::LowestIndex,
        );
        let Decision::Distribution(p) = decode(&spec, &cb(&["0", "1"]), &[0]).unwrap() else {
            panic!("stochastic decoder must return a distribution");
        };
        assert!((p[0] - 0.9).abs() < 1e-15 && (p[1] - 0.1).abs() < 1e-15);
        // exp(n I) with n I in the thousands must not overflow.
        let huge = DecoderSpec::new(
            DecoderKind::StochasticMetric(Arc::new(|x: &[usize], _: &[usize]| 5000.0 * x[0] as f64)),
            TiePolicy::LowestIndex,
        );
        let d = decode(&huge, &cb(&["0", "1"]), &[0]).unwrap();
        assert_eq!(d.prob_correct(1), 1.0);
    }

    #[test]
    fn vanishing_metric_is_flagged() {
        let spec = DecoderSpec::new(
            DecoderKind::StochasticMetric(Arc::new(|_: &[usize], _: &[usize]| f64::NEG_INFINITY)),
            TiePolicy::LowestIndex,
        );
        assert!(matches!(decode(&spec, &cb(&["0", "1"]), &[0]), Err(Error::MetricVanishes)));
    }

    #[test]
    fn mmi_is_invariant_to_output_relabelling() {
        let perms: [[usize; 4]; 4] = [[0, 1, 2, 3], [3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1]];
        for n in 2..=5 {
            let c = Codebook::demo(n.max(3)).unwrap();
            let n = c.blocklength();
            for idx in 0..4usize.pow(n as u32) {
                let y: Vec<usize> = (0..n).map(|i| (idx >> (2 * i)) & 3).collect();
                let base = decode(&DecoderSpec::mmi().with_ties(TiePolicy::Error), &c, &y).unwrap();
                for p in &perms {
                    let py: Vec<usize> = y.iter().map(|&s| p[s]).collect();
                    let d = decode(&DecoderSpec::mmi().with_ties(TiePolicy::Error), &c, &py).unwrap();
                    assert_eq!(d, base);
                }
            }
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [BuiltinMetric::Likelihood, BuiltinMetric::ExpMi] {
            assert_eq!(m.name().parse::<BuiltinMetric>().unwrap(), m);
        }
        assert!("nope".parse::<BuiltinMetric>().is_err());
        assert_eq!("error".parse::<TiePolicy>().unwrap(), TiePolicy::Error);
    }
}
