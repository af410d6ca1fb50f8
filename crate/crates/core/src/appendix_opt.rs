//! Rate-zero exponent of a type-dependent decoding metric on binary
//! channels, written as a divergence minimization over joint distributions
//! of `(X, X_bar, Y)` with `P_{X X_bar} = Q x Q`.
//!
//! For a binary-input binary-output channel such a `P` is fixed by four
//! numbers `alpha_{x xbar} = P(y = 0 | x, xbar)`, indexed in the order
//! `(0,0), (0,1), (1,0), (1,1)`. For the MMI metric and uniform `Q` the
//! minimum reduces to the two-parameter symmetric family handled by
//! [`symmetric_objective`] and [`bsc_rate_zero_mmi_exponent`].

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{make_bsc, Channel};
use crate::exponents::rate_zero_expurgated;
use crate::probkit::{binary_divergence, binary_entropy, divergence_term, mutual_information_of, JointDist3, ProbVec};
use crate::{Error, Result};

const FEAS_TOL: f64 = 1e-12;

fn check_unit(v: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{what} = {v} outside [0, 1]")))
    }
}

fn check_open_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// `P(0,0,0) = gamma1/4`, `P(0,1,0) = gamma2/4`, extended to all of
/// `(x, xbar, y)` by the flip symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl SymmetricParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        check_unit(gamma1, "gamma1")?;
        check_unit(gamma2, "gamma2")?;
        Ok(Self { gamma1, gamma2 })
    }

    pub fn is_feasible(&self) -> bool {
        (2.0 * self.gamma1 - 1.0) * (2.0 * self.gamma2 - 1.0) <= 0.0
    }

    pub fn to_alpha(&self) -> AlphaParams {
        AlphaParams { alpha: [self.gamma1, self.gamma2, 1.0 - self.gamma2, 1.0 - self.gamma1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaParams {
    pub alpha: [f64; 4],
}

impl AlphaParams {
    pub fn new(alpha: [f64; 4]) -> Result<Self> {
        for a in alpha {
            check_unit(a, "alpha")?;
        }
        Ok(Self { alpha })
    }

    /// `S = (a1 + a2 + a3 + a4)/4`, the probability of `y = 0`.
    pub fn s(&self) -> f64 {
        self.alpha.iter().sum::<f64>() / 4.0
    }

    pub fn u(&self) -> f64 {
        let [a1, a2, a3, a4] = self.alpha;
        ((a1 + a2) - (a3 + a4)) / 4.0
    }

    pub fn v(&self) -> f64 {
        let [a1, a2, a3, a4] = self.alpha;
        ((a1 + a3) - (a2 + a4)) / 4.0
    }

    /// The induced `P` with uniform `Q`.
    pub fn to_joint(&self) -> JointDist3 {
        let mut mass = Vec::with_capacity(8);
        for a in self.alpha {
            mass.push(a / 4.0);
            mass.push((1.0 - a) / 4.0);
        }
        JointDist3::new([2, 2, 2], mass).expect("alpha in [0,1] gives a distribution")
    }

    /// Reads `alpha` back from a joint distribution with uniform pair marginal.
    pub fn from_joint(p: &JointDist3) -> Result<Self> {
        check_uniform_pairs(p)?;
        Self::new([0, 1, 2, 3].map(|i| (4.0 * p.mass()[2 * i]).clamp(0.0, 1.0)))
    }
}

/// `I(X;Y) <= I(X_bar;Y)` for the MMI metric and uniform `Q`, which reduces
/// to `|u| <= |v|`.
pub fn feasibility_condition(a: &AlphaParams) -> bool {
    a.u().abs() <= a.v().abs()
}

/// The same condition evaluated directly through binary entropies:
/// `h(S+u) + h(S-u) >= h(S+v) + h(S-v)`.
pub fn feasibility_by_entropies(a: &AlphaParams) -> bool {
    let [a1, a2, a3, a4] = a.alpha;
    let lhs = binary_entropy((a1 + a2) / 2.0) + binary_entropy((a3 + a4) / 2.0);
    let rhs = binary_entropy((a1 + a3) / 2.0) + binary_entropy((a2 + a4) / 2.0);
    lhs >= rhs - FEAS_TOL
}

fn check_uniform_pairs(p: &JointDist3) -> Result<()> {
    if p.dims() != [2, 2, 2] {
        return Err(Error::Unsupported("only binary (x, xbar, y) distributions".into()));
    }
    if p.pair_marginal().iter().any(|&m| (m - 0.25).abs() > 1e-12) {
        return Err(Error::MarginalConstraint);
    }
    Ok(())
}

/// `(P + P^s)/2` with `P^s(x, xbar, y) = P(1-x, 1-xbar, 1-y)`.
pub fn symmetrize(p: &JointDist3) -> Result<JointDist3> {
    check_uniform_pairs(p)?;
    let m = p.mass();
    // Flipping all three bits maps flat index i to 7 - i.
    let mass = (0..8).map(|i| 0.5 * (m[i] + m[7 - i])).collect();
    JointDist3::new([2, 2, 2], mass)
}

/// `D(P || Q x Q x W)` in nats.
pub fn divergence_from_reference(p: &JointDist3, q: &ProbVec, ch: &Channel) -> Result<f64> {
    let [nx, nb, ny] = p.dims();
    if nx != q.len() || nb != q.len() || nx != ch.num_inputs() || ny != ch.num_outputs() {
        return Err(Error::LengthMismatch { left: nx * nb * ny, right: q.len() * q.len() * ch.num_outputs() });
    }
    let mut d = 0.0;
    for x in 0..nx {
        for b in 0..nb {
            for y in 0..ny {
                d += divergence_term(p.get(x, b, y), q.get(x) * q.get(b) * ch.prob(x, y));
            }
        }
    }
    Ok(d)
}

/// `[d(gamma1 || 1-eps) + d(gamma2 || 1-eps)] / 2`, the divergence of a
/// symmetric `P` from uniform inputs through `BSC(eps)`.
pub fn symmetric_objective(g: &SymmetricParams, eps: f64) -> f64 {
    0.5 * (binary_divergence(g.gamma1, 1.0 - eps) + binary_divergence(g.gamma2, 1.0 - eps))
}

/// Minimum of [`symmetric_objective`] over the feasible region.
///
/// `d(. || 1-eps)` is convex with its zero at `1-eps`, so over
/// `gamma1 <= 1/2 <= gamma2` each coordinate is minimized by clamping
/// `1-eps` into its half interval; the swapped region gives the same value.
pub fn bsc_rate_zero_mmi_exponent(eps: f64) -> Result<f64> {
    check_open_eps(eps)?;
    let p = 1.0 - eps;
    let g = SymmetricParams::new(p.clamp(0.0, 0.5), p.clamp(0.5, 1.0))?;
    debug_assert!(g.is_feasible());
    Ok(symmetric_objective(&g, eps))
}

/// A metric on the 2x2 joint `P_{XY}` (row-major, `[x][y]`).
pub type JointMetric = dyn Fn(&[f64; 4]) -> f64 + Sync;

/// Empirical mutual information as a metric.
pub fn mi_metric(p: &[f64; 4]) -> f64 {
    mutual_information_of(2, 2, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InputGrid {
    /// `Q = (1/2, 1/2)`.
    Uniform,
    /// `Q(0)` on this many equispaced points of `[0.01, 0.99]`.
    Grid(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceConfig {
    /// Grid intervals per `alpha` axis.
    pub grid_density: usize,
    pub refine_passes: usize,
    pub input: InputGrid,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { grid_density: 30, refine_passes: 1, input: InputGrid::Uniform }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceResult {
    /// Nats.
    pub value: f64,
    pub alpha: [f64; 4],
    pub q0: f64,
}

struct Problem<'a> {
    q: [f64; 2],
    /// `W(y = 0 | x)`.
    w0: [f64; 2],
    metric: &'a JointMetric,
}

impl Problem<'_> {
    fn weight(&self, i: usize) -> f64 {
        self.q[i >> 1] * self.q[i & 1]
    }

    /// Divergence if `alpha` is feasible, `None` otherwise.
    fn evaluate(&self, alpha: &[f64; 4]) -> Option<f64> {
        let mut d = 0.0;
        for (i, &a) in alpha.iter().enumerate() {
            d += self.weight(i) * binary_divergence(a, self.w0[i >> 1]);
        }
        if !d.is_finite() {
            return None;
        }
        let mut pxy = [0.0; 4];
        let mut pby = [0.0; 4];
        for (i, &a) in alpha.iter().enumerate() {
            let w = self.weight(i);
            let (x, b) = (i >> 1, i & 1);
            pxy[2 * x] += w * a;
            pxy[2 * x + 1] += w * (1.0 - a);
            pby[2 * b] += w * a;
            pby[2 * b + 1] += w * (1.0 - a);
        }
        ((self.metric)(&pxy) <= (self.metric)(&pby) + FEAS_TOL).then_some(d)
    }

    /// Minimum over the product grid `axes[0] x ... x axes[3]`. Ties keep
    /// the first point in lexicographic order.
    fn grid_min(&self, axes: &[Vec<f64>; 4]) -> Option<(f64, [f64; 4])> {
        let better = |a: Option<(f64, [usize; 4])>, b: Option<(f64, [usize; 4])>| match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        };
        let best = (0..axes[0].len())
            .into_par_iter()
            .map(|i| {
                let mut best = None;
                for j in 0..axes[1].len() {
                    for k in 0..axes[2].len() {
                        for l in 0..axes[3].len() {
                            let alpha = [axes[0][i], axes[1][j], axes[2][k], axes[3][l]];
                            if let Some(d) = self.evaluate(&alpha) {
                                best = better(best, Some((d, [i, j, k, l])));
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| None, better)?;
        let [i, j, k, l] = best.1;
        Some((best.0, [axes[0][i], axes[1][j], axes[2][k], axes[3][l]]))
    }

    fn minimize(&self, cfg: &BruteForceConfig) -> Option<(f64, [f64; 4])> {
        let d = cfg.grid_density;
        let coarse: Vec<f64> = (0..=d).map(|i| i as f64 / d as f64).collect();
        let mut best = self.grid_min(&[coarse.clone(), coarse.clone(), coarse.clone(), coarse])?;
        let mut half = 1.0 / d as f64;
        for _ in 0..cfg.refine_passes {
            let axes = best.1.map(|c| {
                let (lo, hi) = ((c - half).max(0.0), (c + half).min(1.0));
                (0..=d).map(|i| lo + (hi - lo) * i as f64 / d as f64).collect::<Vec<_>>()
            });
            if let Some(r) = self.grid_min(&axes) {
                if r.0 < best.0 {
                    best = r;
                }
            }
            half = 2.0 * half / d as f64;
        }
        Some(best)
    }
}

/// Rate-zero exponent of a metric decoder by grid search:
/// `max_Q min D(P || Q x Q x W)` over `P` with `P_{X X_bar} = Q x Q` and
/// `q(P_{XY}) <= q(P_{X_bar Y})`.
///
/// The `alpha` grid is refined around the incumbent `refine_passes` times,
/// each pass spanning one step of the previous grid on either side.
pub fn rate_zero_metric_exponent_bruteforce(
    ch: &Channel,
    metric: &JointMetric,
    cfg: &BruteForceConfig,
) -> Result<BruteForceResult> {
    if ch.num_inputs() != 2 || ch.num_outputs() != 2 {
        return Err(Error::Unsupported("brute force handles binary-input binary-output channels".into()));
    }
    if cfg.grid_density < 2 {
        return Err(Error::InvalidConfig("grid_density must be at least 2".into()));
    }
    let q0s: Vec<f64> = match cfg.input {
        InputGrid::Uniform => vec![0.5],
        InputGrid::Grid(k) if k >= 2 => (0..k).map(|i| 0.01 + 0.98 * i as f64 / (k - 1) as f64).collect(),
        InputGrid::Grid(_) => return Err(Error::InvalidConfig("input grid needs at least 2 points".into())),
    };
    let w0 = [ch.prob(0, 0), ch.prob(1, 0)];
    let mut best: Option<BruteForceResult> = None;
    for q0 in q0s {
        let problem = Problem { q: [q0, 1.0 - q0], w0, metric };
        let (value, alpha) = problem.minimize(cfg).ok_or(Error::Infeasible)?;
        if best.is_none_or(|b| value > b.value) {
            best = Some(BruteForceResult { value, alpha, q0 });
        }
    }
    best.ok_or(Error::Infeasible)
}

/// Brute force, symmetric closed form and rate-zero expurgated exponent of
/// `BSC(eps)` side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixReport {
    pub eps: f64,
    pub brute_force: f64,
    pub closed_form: f64,
    pub expurgated: f64,
    pub gap_brute_closed: f64,
    pub gap_brute_expurgated: f64,
    pub gap_closed_expurgated: f64,
}

impl AppendixReport {
    pub fn max_gap(&self) -> f64 {
        self.gap_brute_closed.max(self.gap_brute_expurgated).max(self.gap_closed_expurgated)
    }
}

pub fn appendix_verify(eps: f64, cfg: &BruteForceConfig) -> Result<AppendixReport> {
    check_open_eps(eps)?;
    let ch = make_bsc(eps)?;
    let brute_force = rate_zero_metric_exponent_bruteforce(&ch, &mi_metric, cfg)?.value;
    let closed_form = bsc_rate_zero_mmi_exponent(eps)?;
    let expurgated = rate_zero_expurgated(eps)?;
    Ok(AppendixReport {
        eps,
        brute_force,
        closed_form,
        expurgated,
        gap_brute_closed: (brute_force - closed_form).abs(),
        gap_brute_expurgated: (brute_force - expurgated).abs(),
        gap_closed_expurgated: (closed_form - expurgated).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alpha(a: [f64; 4]) -> AlphaParams {
        AlphaParams::new(a).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let a = alpha([1.0, 0.0, 0.0, 1.0]);
        assert_eq!((a.u(), a.v()), (0.0, 0.0));
        assert!(feasibility_condition(&a));
        let a = alpha([0.9, 0.1, 0.5, 0.5]);
        assert_abs_diff_eq!(a.u(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v(), 0.2, epsilon = 1e-15);
        assert!(feasibility_condition(&a));
        let a = alpha([0.9, 0.5, 0.1, 0.5]);
        assert_abs_diff_eq!(a.u(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.v(), 0.0, epsilon = 1e-15);
        assert!(!feasibility_condition(&a));
        assert!(AlphaParams::new([1.2, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn feasibility_agrees_with_entropy_comparison() {
        let g = 12;
        for i in 0..=g {
            for j in 0..=g {
                for k in 0..=g {
                    for l in 0..=g {
                        let a = alpha([i, j, k, l].map(|t| t as f64 / g as f64));
                        // Away from the boundary the two tests must agree exactly.
                        if (a.u().abs() - a.v().abs()).abs() > 1e-9 {
                            assert_eq!(feasibility_condition(&a), feasibility_by_entropies(&a), "{a:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_feasibility_forms_agree() {
        for i in 0..=100 {
            for j in 0..=100 {
                let g = SymmetricParams::new(i as f64 / 100.0, j as f64 / 100.0).unwrap();
                let alt = (g.gamma1 + g.gamma2 - 1.0).abs() <= (g.gamma1 - g.gamma2).abs() + 1e-15;
                assert_eq!(g.is_feasible(), alt, "{g:?}");
                if i != 50 && j != 50 {
                    assert_eq!(g.is_feasible(), feasibility_condition(&g.to_alpha()), "{g:?}");
                }
            }
        }
    }

    #[test]
    fn symmetric_objective_examples() {
        let eps = 0.1;
        assert_eq!(symmetric_objective(&SymmetricParams::new(0.9, 0.9).unwrap(), eps), 0.0);
        let v = symmetric_objective(&SymmetricParams::new(0.5, 0.9).unwrap(), eps);
        assert_abs_diff_eq!(v, binary_divergence(0.5, 0.9) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.255412811882995, epsilon = 1e-12);
        let v = symmetric_objective(&SymmetricParams::new(0.0, 1.0).unwrap(), eps);
        assert_abs_diff_eq!(v, (10f64.ln() + (10.0f64 / 9.0).ln()) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 1.2039728043259361, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_objective_matches_full_divergence() {
        let ch = make_bsc(0.2).unwrap();
        for (g1, g2) in [(0.1, 0.7), (0.5, 0.5), (0.9, 0.3), (0.0, 1.0)] {
            let g = SymmetricParams::new(g1, g2).unwrap();
            let d = divergence_from_reference(&g.to_alpha().to_joint(), &ProbVec::uniform(2), &ch).unwrap();
            assert_abs_diff_eq!(d, symmetric_objective(&g, 0.2), epsilon = 1e-13);
        }
    }

    #[test]
    fn closed_form_equals_expurgated_rate_zero() {
        assert_abs_diff_eq!(bsc_rate_zero_mmi_exponent(0.1).unwrap(), 0.255412811882995, epsilon = 1e-12);
        assert_abs_diff_eq!(bsc_rate_zero_mmi_exponent(0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            bsc_rate_zero_mmi_exponent(0.9).unwrap(),
            bsc_rate_zero_mmi_exponent(0.1).unwrap(),
            epsilon = 1e-14
        );
        for i in 1..100 {
            let eps = i as f64 / 100.0;
            assert_abs_diff_eq!(
                bsc_rate_zero_mmi_exponent(eps).unwrap(),
                rate_zero_expurgated(eps).unwrap(),
                epsilon = 1e-12
            );
        }
        assert!(bsc_rate_zero_mmi_exponent(0.0).is_err());
    }

    #[test]
    fn clamped_minimum_beats_dense_grid() {
        for eps in [0.05, 0.2, 0.4, 0.7] {
            let best = bsc_rate_zero_mmi_exponent(eps).unwrap();
            for i in 0..=200 {
                for j in 0..=200 {
                    let g = SymmetricParams::new(i as f64 / 200.0, j as f64 / 200.0).unwrap();
                    if g.is_feasible() {
                        assert!(symmetric_objective(&g, eps) >= best - 1e-14);
                    }
                }
            }
        }
    }

    fn random_uniform_pair_joint(rng: &mut ChaCha8Rng) -> JointDist3 {
        alpha([0; 4].map(|_| rng.random::<f64>())).to_joint()
    }

    #[test]
    fn symmetrization_properties() {
        let ch = make_bsc(0.2).unwrap();
        let q = ProbVec::uniform(2);
        let sym = SymmetricParams::new(0.3, 0.8).unwrap().to_alpha().to_joint();
        let again = symmetrize(&sym).unwrap();
        for (a, b) in sym.mass().iter().zip(again.mass()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-16);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let p = random_uniform_pair_joint(&mut rng);
            let s = symmetrize(&p).unwrap();
            for i in 0..8 {
                assert_abs_diff_eq!(s.mass()[i], s.mass()[7 - i], epsilon = 1e-16);
            }
            let dp = divergence_from_reference(&p, &q, &ch).unwrap();
            let ds = divergence_from_reference(&s, &q, &ch).unwrap();
            assert!(ds <= dp + 1e-14);
            let (a, b) = (AlphaParams::from_joint(&p).unwrap(), AlphaParams::from_joint(&s).unwrap());
            assert_abs_diff_eq!(a.u().abs(), b.u().abs(), epsilon = 1e-14);
            assert_abs_diff_eq!(a.v().abs(), b.v().abs(), epsilon = 1e-14);
        }
        let skewed = JointDist3::new([2, 2, 2], vec![0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.25, 0.0]).unwrap();
        assert!(matches!(symmetrize(&skewed), Err(Error::MarginalConstraint)));
    }

    #[test]
    fn brute_force_matches_closed_form() {
        let cfg = BruteForceConfig { grid_density: 50, ..Default::default() };
        let r = rate_zero_metric_exponent_bruteforce(&make_bsc(0.1).unwrap(), &mi_metric, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, 0.255413, epsilon = 2e-3);
        let cfg = BruteForceConfig::default();
        let r = rate_zero_metric_exponent_bruteforce(&make_bsc(0.5).unwrap(), &mi_metric, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
        let r = rate_zero_metric_exponent_bruteforce(&make_bsc(0.01).unwrap(), &mi_metric, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, -0.5 * (2.0 * 0.0099f64.sqrt()).ln(), epsilon = 5e-3);
    }

    #[test]
    fn brute_force_input_grid_prefers_uniform() {
        let cfg = BruteForceConfig { grid_density: 12, refine_passes: 1, input: InputGrid::Grid(5) };
        let r = rate_zero_metric_exponent_bruteforce(&make_bsc(0.2).unwrap(), &mi_metric, &cfg).unwrap();
        assert_eq!(r.q0, 0.5);
    }

    #[test]
    fn brute_force_rejects_other_shapes() {
        let ch = crate::channels::make_w_eps(0.1).unwrap();
        assert!(rate_zero_metric_exponent_bruteforce(&ch, &mi_metric, &BruteForceConfig::default()).is_err());
    }
}
