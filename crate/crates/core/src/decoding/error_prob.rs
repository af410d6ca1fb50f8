use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decoder::{check_compatible, decode_unchecked};
use super::{Codebook, Decision, DecoderKind, DecoderSpec, Metric, TiePolicy};
use crate::channels::{make_w_eps, make_w_hat_eps, Channel};
use crate::construction::y_kappa;
use crate::{Error, Result};

/// Largest number of output sequences enumerated by [`exact_error`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub per_message: Vec<f64>,
    pub average: f64,
    pub maximal: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_samples: Option<u64>,
    /// 95% normal-approximation half-width of `average`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_message_half_width: Option<Vec<f64>>,
}

impl ErrorReport {
    fn from_per_message(per_message: Vec<f64>, method: Method) -> Self {
        let per_message: Vec<f64> = per_message.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let average = per_message.iter().sum::<f64>() / per_message.len() as f64;
        let maximal = per_message.iter().copied().fold(0.0, f64::max);
        Self { per_message, average, maximal, method, n_samples: None, half_width: None, per_message_half_width: None }
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// Exact per-message error probabilities with the default budget.
pub fn exact_error(spec: &DecoderSpec, cb: &Codebook, ch: &Channel) -> Result<ErrorReport> {
    exact_error_with_budget(spec, cb, ch, DEFAULT_ENUMERATION_BUDGET)
}

/// Sums `W^n(y|x_m) (1 - P[decision = m | y])` over every output sequence.
///
/// Outputs that no codeword can produce are skipped without being decoded.
/// Chunks of the output space are reduced in index order, so the result
/// does not depend on the thread count.
pub fn exact_error_with_budget(spec: &DecoderSpec, cb: &Codebook, ch: &Channel, budget: u64) -> Result<ErrorReport> {
    check_compatible(spec, cb)?;
    if ch.num_inputs() != cb.alphabet_size() {
        return Err(Error::InvalidChannel(format!(
            "channel has {} inputs but the codebook alphabet has {} symbols",
            ch.num_inputs(),
            cb.alphabet_size()
        )));
    }
    let n = cb.blocklength();
    let k = ch.num_outputs();
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > u128::from(budget) {
        return Err(Error::BudgetExceeded { outputs: total, budget });
    }
    let total = total as u64;
    let m_count = cb.len();

    let chunks: Vec<Vec<Compensated>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut acc = vec![Compensated::default(); m_count];
            // Most significant letter first, so the odometer is lexicographic.
            let mut y = vec![0usize; n];
            let mut rest = start;
            for slot in y.iter_mut().rev() {
                *slot = (rest % k as u64) as usize;
                rest /= k as u64;
            }
            let mut probs = vec![0.0; m_count];
            for _ in start..end {
                for (p, x) in probs.iter_mut().zip(cb.codewords()) {
                    *p = ch.product_prob_unchecked(x, &y);
                }
                if probs.iter().any(|&p| p > 0.0) {
                    let d = decode_unchecked(spec, cb, &y)?;
                    for (m, a) in acc.iter_mut().enumerate() {
                        let miss = 1.0 - d.prob_correct(m);
                        if miss > 0.0 && probs[m] > 0.0 {
                            a.add(probs[m] * miss);
                        }
                    }
                }
                for slot in y.iter_mut().rev() {
                    *slot += 1;
                    if *slot < k {
                        break;
                    }
                    *slot = 0;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut per = vec![Compensated::default(); m_count];
    for chunk in chunks {
        for (p, a) in per.iter_mut().zip(chunk) {
            p.add(a.value());
        }
    }
    Ok(ErrorReport::from_per_message(per.into_iter().map(Compensated::value).collect(), Method::ExactEnumeration))
}

fn sample_output(ch: &Channel, x: &[usize], rng: &mut ChaCha8Rng, y: &mut [usize]) {
    for (slot, &a) in y.iter_mut().zip(x) {
        let u: f64 = rng.random();
        let row = ch.row(a);
        let mut acc = 0.0;
        *slot = row.len() - 1;
        for (b, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                *slot = b;
                break;
            }
        }
        // Guard against landing on a zero-probability tail symbol after rounding.
        while row[*slot] == 0.0 && *slot > 0 {
            *slot -= 1;
        }
    }
}

fn sampled_correct(d: &Decision, m: usize, rng: &mut ChaCha8Rng) -> bool {
    match d {
        Decision::Message(k) => *k == m,
        Decision::Tie(_) => false,
        Decision::Distribution(p) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, &pk) in p.iter().enumerate() {
                acc += pk;
                if u < acc {
                    return k == m;
                }
            }
            p.iter().rposition(|&pk| pk > 0.0) == Some(m)
        }
    }
}

/// Monte Carlo estimate of each per-message error probability.
///
/// Message `m` draws from its own ChaCha8 stream `(seed, m)`, so results do
/// not depend on scheduling.
pub fn monte_carlo_error(
    spec: &DecoderSpec,
    cb: &Codebook,
    ch: &Channel,
    n_samples: u64,
    seed: u64,
) -> Result<ErrorReport> {
    check_compatible(spec, cb)?;
    if n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
    }
    if ch.num_inputs() != cb.alphabet_size() {
        return Err(Error::InvalidChannel("channel inputs do not match the codebook alphabet".into()));
    }
    let errors: Vec<u64> = (0..cb.len())
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            let x = cb.codeword(m);
            let mut y = vec![0usize; x.len()];
            let mut wrong = 0u64;
            for _ in 0..n_samples {
                sample_output(ch, x, &mut rng, &mut y);
                let d = decode_unchecked(spec, cb, &y)?;
                if !sampled_correct(&d, m, &mut rng) {
                    wrong += 1;
                }
            }
            Ok(wrong)
        })
        .collect::<Result<_>>()?;

    let ns = n_samples as f64;
    let per: Vec<f64> = errors.iter().map(|&e| e as f64 / ns).collect();
    let hw: Vec<f64> = per.iter().map(|p| 1.96 * (p * (1.0 - p) / ns).sqrt()).collect();
    let var_sum: f64 = per.iter().map(|p| p * (1.0 - p)).sum();
    let mut report = ErrorReport::from_per_message(per, Method::MonteCarlo);
    report.n_samples = Some(n_samples);
    report.half_width = Some(1.96 * (var_sum / ns).sqrt() / cb.len() as f64);
    report.per_message_half_width = Some(hw);
    Ok(report)
}

/// `-(1/n) ln p` for the average and maximal error probabilities.
/// A zero probability gives `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalExponent {
    pub average: f64,
    pub maximal: f64,
}

impl EmpiricalExponent {
    pub fn is_infinite(&self) -> bool {
        self.average.is_infinite() || self.maximal.is_infinite()
    }
}

pub fn empirical_exponent(report: &ErrorReport, n: usize) -> Result<EmpiricalExponent> {
    if n == 0 {
        return Err(Error::InvalidConfig("blocklength must be positive".into()));
    }
    let e = |p: f64| if p > 0.0 { (-p.ln() / n as f64).max(0.0) } else { f64::INFINITY };
    Ok(EmpiricalExponent { average: e(report.average), maximal: e(report.maximal) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorTwoRecord {
    pub message: usize,
    /// Max-metric decoder, ties counted as errors.
    pub deterministic: f64,
    pub stochastic: f64,
    pub holds: bool,
}

/// Compares the max-metric decoder (ties are errors) with its stochastic
/// companion message by message, checking `p_det <= 2 p_stoch`.
pub fn stochastic_vs_deterministic(
    cb: &Codebook,
    metric: Arc<dyn Metric>,
    ch: &Channel,
) -> Result<Vec<FactorTwoRecord>> {
    let det = exact_error(&DecoderSpec::new(DecoderKind::MaxMetric(metric.clone()), TiePolicy::Error), cb, ch)?;
    let sto = exact_error(&DecoderSpec::new(DecoderKind::StochasticMetric(metric), TiePolicy::LowestIndex), cb, ch)?;
    Ok(det
        .per_message
        .iter()
        .zip(&sto.per_message)
        .enumerate()
        .map(|(message, (&d, &s))| FactorTwoRecord {
            message,
            deterministic: d,
            stochastic: s,
            holds: d <= 2.0 * s + 1e-12,
        })
        .collect())
}

/// One ordered codeword pair in the commitment check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommitmentRecord {
    pub m1: usize,
    pub m2: usize,
    pub y_kappa: Vec<usize>,
    /// Probability that the decoder outputs `m1` on `y_kappa(x_m1, x_m2)`.
    pub commit_prob: f64,
    /// `((1 - eps)/2)^n`.
    pub bound: f64,
    pub p_max_w_hat: f64,
    pub p_m1_w: f64,
    pub p_m2_w_hat: f64,
    pub holds: bool,
}

/// For every ordered pair `(m1, m2)` the output `y = y_kappa(x_m1, x_m2)`
/// has probability `((1-eps)/2)^n` both given `x_m1` under `W_eps` and given
/// `x_m2` under `W_hat_eps`. A decoder committing `y` to `m1` thus errs on
/// `m2` under `W_hat_eps` with at least that probability; otherwise it errs
/// on `m1` under `W_eps`.
pub fn commitment_harness(spec: &DecoderSpec, cb: &Codebook, eps: f64) -> Result<Vec<CommitmentRecord>> {
    let w = make_w_eps(eps)?;
    let w_hat = make_w_hat_eps(eps)?;
    if cb.alphabet_size() != 2 {
        return Err(Error::InvalidConfig("commitment check needs a binary codebook".into()));
    }
    let under_w = exact_error(spec, cb, &w)?;
    let under_w_hat = exact_error(spec, cb, &w_hat)?;
    let bound = ((1.0 - eps) / 2.0).powi(cb.blocklength() as i32);
    let slack = 1e-12 * bound;
    let mut out = Vec::new();
    for m1 in 0..cb.len() {
        for m2 in 0..cb.len() {
            if m1 == m2 || cb.codeword(m1) == cb.codeword(m2) {
                continue;
            }
            let y = y_kappa(cb.codeword(m1), cb.codeword(m2))?;
            let commit = super::decode(spec, cb, &y)?.prob_correct(m1);
            let p_m1_w = under_w.per_message[m1];
            let p_m2_w_hat = under_w_hat.per_message[m2];
            let holds = p_m2_w_hat + slack >= commit * bound && p_m1_w + slack >= (1.0 - commit) * bound;
            out.push(CommitmentRecord {
                m1,
                m2,
                y_kappa: y,
                commit_prob: commit,
                bound,
                p_max_w_hat: under_w_hat.maximal,
                p_m1_w,
                p_m2_w_hat,
                holds,
            });
        }
    }
    Ok(out)
}
