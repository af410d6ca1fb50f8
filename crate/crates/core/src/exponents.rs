//! Expurgated, converse and rate-zero random-coding exponents.
//!
//! Everything is computed in nats. The supremum over `rho >= 1` is searched
//! on `ln rho in [0, ln rho_max]`: a coarse scan followed by golden-section
//! refinement. At rate zero the supremum is approached only as `rho -> inf`,
//! so rate-zero values always come from the closed forms instead.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::optim::{bisect, grid_then_golden_max};
use crate::probkit::ProbVec;
use crate::{Error, Result};

/// Number of points in the coarse `ln rho` scan.
const RHO_SCAN: usize = 64;

/// Simplex grid budget for inputs with more than two symbols.
const MULTI_INPUT_GRID_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v / LN_2,
        }
    }

    pub fn to_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v * LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

impl std::str::FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            other => Err(Error::Parse(format!("unknown unit {other:?} (expected nats or bits)"))),
        }
    }
}

/// Search controls for the exponent suprema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSearchConfig {
    /// Upper end of the `rho` search interval.
    pub rho_max: f64,
    /// Bracket width at which the input-distribution refinement stops.
    pub rel_tol: f64,
    /// Bracket width, in `ln rho`, at which the `rho` search stops.
    pub abs_tol: f64,
    /// Grid cells per simplex dimension for the input-distribution search.
    pub q_grid: usize,
}

impl Default for ExponentSearchConfig {
    fn default() -> Self {
        Self { rho_max: 1e4, rel_tol: 1e-10, abs_tol: 1e-10, q_grid: 200 }
    }
}

impl ExponentSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.rho_max.is_finite() || self.rho_max < 1.0 {
            return Err(Error::InvalidConfig(format!("rho_max = {} must be >= 1", self.rho_max)));
        }
        if self.rel_tol.is_nan() || self.abs_tol.is_nan() || self.rel_tol <= 0.0 || self.abs_tol <= 0.0 {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.q_grid < 2 {
            return Err(Error::InvalidConfig("q_grid must be at least 2".into()));
        }
        Ok(())
    }
}

/// An exponent together with the point where the supremum was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentValue {
    pub value: f64,
    pub rho: f64,
    pub input: ProbVec,
    /// The objective was still increasing at `rho_max`; `value` is the
    /// boundary value and the true supremum may be larger.
    pub rho_at_cap: bool,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate >= 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("rate must be a finite nonnegative number, got {rate}")))
    }
}

fn check_eps_closed(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// `sup_{rho in [1, rho_max]} objective(rho)`.
fn sup_over_rho(objective: impl Fn(f64) -> f64, cfg: &ExponentSearchConfig) -> (f64, f64, bool) {
    let t_max = cfg.rho_max.ln();
    if t_max <= 0.0 {
        return (objective(1.0), 1.0, true);
    }
    let m = grid_then_golden_max(|t| objective(t.exp()), 0.0, t_max, RHO_SCAN, cfg.abs_tol);
    (m.value, m.argmax.exp(), m.at_upper_bound)
}

/// `2 sqrt(eps (1 - eps))`, the Bhattacharyya coefficient between the two
/// inputs of `W_eps`, `W_hat_eps` and `BSC(eps)`.
pub fn family_bhattacharyya(eps: f64) -> f64 {
    2.0 * (eps * (1.0 - eps)).sqrt()
}

/// `-rho ln(1/2 [1 + z^(1/rho)])` with `z = 2 sqrt(eps (1 - eps))`.
pub fn family_ex(eps: f64, rho: f64) -> f64 {
    let z = family_bhattacharyya(eps);
    // 1/2 (1 + z^(1/rho)) = 1 + 1/2 (z^(1/rho) - 1)
    -rho * (0.5 * (z.ln() / rho).exp_m1()).ln_1p()
}

/// The supremand of the family formula: `family_ex(eps, rho) - rho R`.
pub fn family_objective(eps: f64, rho: f64, rate: f64) -> f64 {
    family_ex(eps, rho) - rho * rate
}

/// Expurgated exponent of `W_eps` (equivalently `W_hat_eps` or `BSC(eps)`),
/// with the uniform input.
///
/// At `rate = 0` the supremum is the `rho -> inf` limit, returned with
/// `rho = inf`. For `eps` in `{0, 1}` the two inputs are orthogonal and the
/// supremum is `+inf` whenever `rate < ln 2`.
pub fn expurgated_exponent_family(eps: f64, rate: f64, cfg: &ExponentSearchConfig) -> Result<ExponentValue> {
    check_eps_closed(eps)?;
    check_rate(rate)?;
    cfg.validate()?;
    let input = ProbVec::uniform(2);
    if eps == 0.0 || eps == 1.0 {
        // Objective is rho (ln 2 - R).
        return Ok(if rate < LN_2 {
            ExponentValue { value: f64::INFINITY, rho: f64::INFINITY, input, rho_at_cap: true }
        } else {
            ExponentValue { value: LN_2 - rate, rho: 1.0, input, rho_at_cap: false }
        });
    }
    if rate == 0.0 {
        let value = rate_zero_expurgated(eps)?;
        return Ok(ExponentValue { value, rho: f64::INFINITY, input, rho_at_cap: false });
    }
    let (value, rho, rho_at_cap) = sup_over_rho(|rho| family_objective(eps, rho, rate), cfg);
    Ok(ExponentValue { value, rho, input, rho_at_cap })
}

/// `c[x][xbar] = B(x, xbar)^(1/rho) - 1`.
fn shifted_kernel(bhatt: &[Vec<f64>], rho: f64) -> Vec<Vec<f64>> {
    bhatt.iter().map(|row| row.iter().map(|&b| (b.ln() / rho).exp_m1()).collect()).collect()
}

fn quadratic_form(c: &[Vec<f64>], q: &[f64]) -> f64 {
    c.iter().zip(q).map(|(row, &qx)| qx * row.iter().zip(q).map(|(&v, &qb)| v * qb).sum::<f64>()).sum()
}

/// Minimises `Q^T c Q` over the probability simplex.
///
/// Two inputs: a grid of `q_grid` cells and golden-section refinement.
/// More inputs: the densest simplex grid within a fixed point budget,
/// followed by pairwise mass transfers with halving step. The latter is a
/// coarse search with no optimality guarantee for non-convex forms.
fn minimize_quadratic_form(c: &[Vec<f64>], cfg: &ExponentSearchConfig) -> (Vec<f64>, f64) {
    let k = c.len();
    match k {
        1 => (vec![1.0], c[0][0]),
        2 => {
            let s = |q: f64| quadratic_form(c, &[q, 1.0 - q]);
            let m = grid_then_golden_max(|q| -s(q), 0.0, 1.0, cfg.q_grid, cfg.rel_tol);
            (vec![m.argmax, 1.0 - m.argmax], -m.value)
        }
        _ => {
            let mut density = cfg.q_grid;
            while density > 1 && compositions_count(density, k) > MULTI_INPUT_GRID_POINTS {
                density -= 1;
            }
            let mut best = vec![0.0; k];
            let mut best_v = f64::INFINITY;
            for_each_composition(density, k, &mut |parts| {
                let q: Vec<f64> = parts.iter().map(|&p| p as f64 / density as f64).collect();
                let v = quadratic_form(c, &q);
                if v < best_v {
                    best_v = v;
                    best = q;
                }
            });
            let mut step = 1.0 / density as f64;
            while step > cfg.rel_tol {
                let mut improved = false;
                for i in 0..k {
                    for j in 0..k {
                        if i == j || best[i] < step {
                            continue;
                        }
                        let mut cand = best.clone();
                        cand[i] -= step;
                        cand[j] += step;
                        let v = quadratic_form(c, &cand);
                        if v < best_v {
                            best_v = v;
                            best = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            (best, best_v)
        }
    }
}

fn compositions_count(total: usize, parts: usize) -> usize {
    // C(total + parts - 1, parts - 1), saturating.
    let mut acc: usize = 1;
    for i in 1..parts {
        acc = acc.saturating_mul(total + i) / i;
    }
    acc
}

fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(rem: usize, slot: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = rem;
            f(buf);
            return;
        }
        for v in 0..=rem {
            buf[slot] = v;
            rec(rem - v, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(total, 0, &mut buf, f);
}

fn bhattacharyya_matrix(ch: &Channel) -> Vec<Vec<f64>> {
    let k = ch.num_inputs();
    (0..k).map(|x| (0..k).map(|xb| ch.bhattacharyya(x, xb)).collect()).collect()
}

/// `max_Q -rho ln sum_{x, xbar} Q(x) Q(xbar) B(x, xbar)^(1/rho)`.
fn best_ex(bhatt: &[Vec<f64>], rho: f64, cfg: &ExponentSearchConfig) -> (Vec<f64>, f64) {
    let c = shifted_kernel(bhatt, rho);
    let (q, s) = minimize_quadratic_form(&c, cfg);
    (q, -rho * s.ln_1p())
}

/// Expurgated exponent of an arbitrary channel at `rate` (nats), maximising
/// over input distributions.
///
/// Values are not clamped: above the useful rate range the formula can go
/// negative and is returned as is. At `rate = 0` the `rho -> inf` limit is
/// returned with `rho = inf`.
pub fn expurgated_exponent(ch: &Channel, rate: f64, cfg: &ExponentSearchConfig) -> Result<ExponentValue> {
    check_rate(rate)?;
    cfg.validate()?;
    if rate == 0.0 {
        let (q, value) = rate_zero_general_with(ch, cfg);
        return Ok(ExponentValue { value, rho: f64::INFINITY, input: ProbVec::normalized(q)?, rho_at_cap: false });
    }
    let bhatt = bhattacharyya_matrix(ch);
    let (value, rho, rho_at_cap) = sup_over_rho(|rho| best_ex(&bhatt, rho, cfg).1 - rho * rate, cfg);
    if value.is_nan() {
        return Err(Error::NonFinite("expurgated exponent"));
    }
    let (q, _) = best_ex(&bhatt, rho, cfg);
    Ok(ExponentValue { value, rho, input: ProbVec::normalized(q)?, rho_at_cap })
}

/// `lim_{R -> 0} E_ex(R, W) = max_Q -sum Q(x) Q(xbar) ln B(x, xbar)` for an
/// arbitrary channel. `+inf` when two distinct inputs have disjoint supports.
pub fn rate_zero_expurgated_general(ch: &Channel, cfg: &ExponentSearchConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(rate_zero_general_with(ch, cfg).1)
}

fn rate_zero_general_with(ch: &Channel, cfg: &ExponentSearchConfig) -> (Vec<f64>, f64) {
    let bhatt = bhattacharyya_matrix(ch);
    let k = bhatt.len();
    // Two inputs with disjoint supports: spread mass over the first such pair.
    for x in 0..k {
        for xb in 0..k {
            if x != xb && bhatt[x][xb] == 0.0 {
                let mut q = vec![0.0; k];
                q[x] = 0.5;
                q[xb] = 0.5;
                return (q, f64::INFINITY);
            }
        }
    }
    let c: Vec<Vec<f64>> = bhatt.iter().map(|r| r.iter().map(|&b| b.ln()).collect()).collect();
    let (q, s) = minimize_quadratic_form(&c, cfg);
    (q, -s)
}

/// `-1/2 ln(2 sqrt(eps (1 - eps)))`, the rate-zero expurgated exponent of the
/// family. Diverges at `eps` in `{0, 1}`.
pub fn rate_zero_expurgated(eps: f64) -> Result<f64> {
    check_eps_closed(eps)?;
    if eps == 0.0 || eps == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-0.5 * family_bhattacharyya(eps).ln())
}

/// `-ln((1 - eps) / 2)`: the exponent of the single confusable output.
pub fn converse_exponent(eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::EpsOutOfRange(eps));
    }
    Ok(-((1.0 - eps) / 2.0).ln())
}

/// `-ln(1/2 + sqrt(eps (1 - eps)))`.
pub fn rate_zero_random_coding(eps: f64) -> Result<f64> {
    check_eps_closed(eps)?;
    Ok(-(0.5 + (eps * (1.0 - eps)).sqrt()).ln())
}

/// The crossover `eps*` in `(0, 1/2)` where the converse exponent meets the
/// rate-zero expurgated exponent. Below it the converse is strictly smaller.
pub fn critical_epsilon() -> f64 {
    static CRITICAL: OnceLock<f64> = OnceLock::new();
    *CRITICAL.get_or_init(|| {
        let gap = |e: f64| -((1.0 - e) / 2.0).ln() + 0.5 * family_bhattacharyya(e).ln();
        bisect(gap, 1e-6, 0.1, 1e-13).expect("gap changes sign on (1e-6, 0.1)")
    })
}

/// Whether the converse lies strictly below the rate-zero expurgated exponent.
pub fn separation_holds(eps: f64) -> bool {
    match (converse_exponent(eps), rate_zero_expurgated(eps)) {
        (Ok(c), Ok(e)) => c < e,
        _ => false,
    }
}

fn rate_threshold_objective(eps: f64, rho: f64) -> f64 {
    (((1.0 - eps) / 2.0).ln() + family_ex(eps, rho)) / rho
}

/// The largest rate (nats) at which the family's expurgated exponent still
/// exceeds the converse exponent.
pub fn rate_threshold(eps: f64, cfg: &ExponentSearchConfig) -> Result<f64> {
    cfg.validate()?;
    let critical = critical_epsilon();
    if !(0.0..critical).contains(&eps) {
        return Err(Error::ThresholdNotPositive { eps, critical });
    }
    let (value, _, _) = sup_over_rho(|rho| rate_threshold_objective(eps, rho), cfg);
    if value.is_nan() || value <= 0.0 {
        return Err(Error::ThresholdNotPositive { eps, critical });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbscissaKind {
    Rate,
    Epsilon,
}

/// A sampled exponent curve. Values, and rate abscissas, are expressed in `unit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCurve {
    samples: Vec<(f64, f64)>,
    abscissa_kind: AbscissaKind,
    unit: Unit,
}

impl ExponentCurve {
    pub fn new(samples: Vec<(f64, f64)>, abscissa_kind: AbscissaKind, unit: Unit) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidConfig("abscissas must be strictly increasing".into()));
        }
        Ok(Self { samples, abscissa_kind, unit })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn abscissa_kind(&self) -> AbscissaKind {
        self.abscissa_kind
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Re-expresses values (and rate abscissas) in `unit`.
    pub fn to_unit(&self, unit: Unit) -> Self {
        let conv = |v: f64| unit.from_nats(self.unit.to_nats(v));
        let samples = self
            .samples
            .iter()
            .map(|&(x, y)| match self.abscissa_kind {
                AbscissaKind::Rate => (conv(x), conv(y)),
                AbscissaKind::Epsilon => (x, conv(y)),
            })
            .collect();
        Self { samples, abscissa_kind: self.abscissa_kind, unit }
    }

    /// Two whitespace-separated columns preceded by `#` comment lines and an
    /// `x y` column-name line.
    pub fn to_dat(&self, comments: &[&str]) -> Result<String> {
        use std::fmt::Write;
        if self.samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::NonFinite("curve sample"));
        }
        let mut out = String::new();
        for c in comments {
            writeln!(out, "# {c}").unwrap();
        }
        let kind = match self.abscissa_kind {
            AbscissaKind::Rate => format!("rate ({}/use)", self.unit.name()),
            AbscissaKind::Epsilon => "epsilon".to_string(),
        };
        writeln!(out, "# columns: {kind}, exponent ({})", self.unit.name()).unwrap();
        writeln!(out, "x y").unwrap();
        for (x, y) in &self.samples {
            writeln!(out, "{x:.17e} {y:.17e}").unwrap();
        }
        Ok(out)
    }

    pub fn from_dat(text: &str, abscissa_kind: AbscissaKind, unit: Unit) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "x y" {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = next()?;
            let y = next()?;
            if cols.next().is_some() {
                return Err(Error::Parse(format!("line {}: more than two columns", lineno + 1)));
            }
            samples.push((x, y));
        }
        Self::new(samples, abscissa_kind, unit)
    }

    /// Abscissa of the first sign change of `self - other`, by linear
    /// interpolation. Both curves must share their abscissas.
    pub fn first_crossing(&self, other: &ExponentCurve) -> Option<f64> {
        let diff: Vec<(f64, f64)> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&(x, a), &(x2, b))| {
                debug_assert_eq!(x, x2);
                (x, a - b)
            })
            .collect();
        diff.windows(2).find_map(|w| {
            let ((x0, d0), (x1, d1)) = (w[0], w[1]);
            if d0 == 0.0 {
                Some(x0)
            } else if d0.signum() != d1.signum() {
                Some(x0 + (x1 - x0) * d0 / (d0 - d1))
            } else {
                None
            }
        })
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// The three rate-zero curves as functions of `eps`, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonCurves {
    pub converse: ExponentCurve,
    pub expurgated: ExponentCurve,
    pub random_coding: ExponentCurve,
}

/// Samples the converse, rate-zero expurgated and rate-zero random-coding
/// exponents on `n_points` equispaced `eps` in `[eps_min, eps_max]`.
pub fn curve_fig1(eps_min: f64, eps_max: f64, n_points: usize) -> Result<EpsilonCurves> {
    if !(eps_min >= 0.0 && eps_min < eps_max) || n_points < 2 {
        return Err(Error::EmptyRange(eps_min, eps_max));
    }
    if eps_max > critical_epsilon() {
        return Err(Error::InvalidConfig(format!(
            "eps_max = {eps_max} exceeds the critical epsilon {}",
            critical_epsilon()
        )));
    }
    let grid = linspace(eps_min, eps_max, n_points);
    let sample = |f: fn(f64) -> Result<f64>| -> Result<ExponentCurve> {
        let samples = grid.iter().map(|&e| Ok((e, f(e)?))).collect::<Result<Vec<_>>>()?;
        ExponentCurve::new(samples, AbscissaKind::Epsilon, Unit::Nats)
    };
    Ok(EpsilonCurves {
        converse: sample(converse_exponent)?,
        expurgated: sample(rate_zero_expurgated)?,
        random_coding: sample(rate_zero_random_coding)?,
    })
}

/// The expurgated exponent of `W_eps` against the constant converse line.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurves {
    pub expurgated: ExponentCurve,
    pub converse: ExponentCurve,
}

/// Samples `E_ex(R, W_eps)` and the converse exponent on `n_points`
/// equispaced rates in `[0, rate_max]`. `rate_max` and the output are in `unit`.
pub fn curve_fig2(
    eps: f64,
    rate_max: f64,
    n_points: usize,
    unit: Unit,
    cfg: &ExponentSearchConfig,
) -> Result<RateCurves> {
    let critical = critical_epsilon();
    if !(eps > 0.0 && eps < critical) {
        return Err(Error::ThresholdNotPositive { eps, critical });
    }
    if rate_max.is_nan() || rate_max <= 0.0 || n_points < 2 {
        return Err(Error::EmptyRange(0.0, rate_max));
    }
    let converse = unit.from_nats(converse_exponent(eps)?);
    let grid = linspace(0.0, rate_max, n_points);
    let values = grid
        .par_iter()
        .map(|&r| {
            let value = expurgated_exponent_family(eps, unit.to_nats(r), cfg)?.value;
            Ok((r, unit.from_nats(value)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurves {
        expurgated: ExponentCurve::new(values, AbscissaKind::Rate, unit)?,
        converse: ExponentCurve::new(grid.iter().map(|&r| (r, converse)).collect(), AbscissaKind::Rate, unit)?,
    })
}
