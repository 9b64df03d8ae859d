//! Kernel-based hypothesis weighting and the model hypothesis updating
//! (MHU) loop.
//!
//! Every hypothesis gets a weight from the kernel density of its
//! residuals relative to its estimated inlier scale; low-quality
//! hypotheses are improved by repeatedly re-fitting from the tail of the
//! top-ranked residual window until the top sets stabilize, keeping the
//! maximum-weight iterate.

use rayon::prelude::*;
use std::sync::OnceLock;

use crate::diag;
use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Hypothesis, ResidualEvaluator};

/// Epanechnikov kernel: `0.75 (1 - x^2)` inside the unit interval, zero
/// outside.
pub fn epanechnikov(lambda: f64) -> f64 {
    if lambda.abs() <= 1.0 {
        0.75 * (1.0 - lambda * lambda)
    } else {
        0.0
    }
}

/// Kernel integrals feeding the bandwidth rule, computed once by
/// quadrature (closed forms: 0.6 and 0.2).
#[derive(Debug, Clone, Copy)]
pub struct KernelConstants {
    /// Integral of EK(x)^2 over [-1, 1].
    pub ek_squared: f64,
    /// Integral of x^2 EK(x) over [-1, 1].
    pub x2_ek: f64,
}

pub fn kernel_constants() -> &'static KernelConstants {
    static CONSTANTS: OnceLock<KernelConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| KernelConstants {
        ek_squared: simpson(|x| epanechnikov(x) * epanechnikov(x), -1.0, 1.0, 4096),
        x2_ek: simpson(|x| x * x * epanechnikov(x), -1.0, 1.0, 4096),
    })
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Standard normal quantile (inverse CDF), Acklam's rational
/// approximation (relative error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must be in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Residuals of one hypothesis over all correspondences together with the
/// permutation sorting them ascending (ties by ascending index).
#[derive(Debug, Clone)]
pub struct RankedResiduals {
    pub residuals: Vec<f64>,
    pub rank: Vec<usize>,
}

impl RankedResiduals {
    pub fn new(residuals: Vec<f64>) -> Self {
        let mut rank: Vec<usize> = (0..residuals.len()).collect();
        rank.sort_by(|&a, &b| residuals[a].total_cmp(&residuals[b]).then(a.cmp(&b)));
        RankedResiduals { residuals, rank }
    }

    pub fn compute(h: &Hypothesis, corrs: &[Correspondence]) -> Result<Self> {
        let eval = ResidualEvaluator::new(h)?;
        Ok(Self::new(corrs.iter().map(|c| eval.eval(c)).collect()))
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Indices of the `k` smallest residuals.
    pub fn top(&self, k: usize) -> &[usize] {
        &self.rank[..k.min(self.rank.len())]
    }
}

/// Floor applied to the estimated scale so all-zero residual sets stay
/// usable.
pub const SCALE_FLOOR: f64 = 1e-9;

/// Validity band (in scales) used when iterating the scale estimate.
const IKOSE_BAND: f64 = 2.5;

/// Inlier noise scale from the kappa-th ordered residual, normalized by
/// the matching standard-normal quantile:
/// `s = r_(kappa) / quantile((1 + kappa/n)/2)`.
///
/// Iterated (IKOSE): `n` starts at the full point count and is replaced
/// by the number of points inside the `2.5 s` validity band until it
/// stabilizes. Without the iteration the quantile treats every point as
/// an inlier draw, which inflates the scale by several times at realistic
/// outlier rates; on all-inlier data the iteration is a no-op.
pub fn estimate_scale(rr: &RankedResiduals, kappa: usize) -> f64 {
    let n = rr.len();
    assert!(kappa >= 1 && kappa <= n, "scale quantile out of range");
    let r_k = rr.residuals[rr.rank[kappa - 1]];
    // The quantile model needs the kappa-th residual strictly inside the
    // valid set; flooring at 2*kappa pins it at the valid median and
    // keeps the normalization well-conditioned when the band is sparse.
    let floor = (2 * kappa).min(n);
    let mut n_eff = n;
    let mut scale = SCALE_FLOOR;
    for _ in 0..100 {
        let p = ((1.0 + kappa as f64 / n_eff as f64) / 2.0).min(1.0 - 1e-12);
        let s = r_k / normal_quantile(p);
        scale = if s.is_finite() { s.max(SCALE_FLOOR) } else { SCALE_FLOOR };
        // rank is sorted by residual, so the band count is a prefix.
        let valid = rr.rank.partition_point(|&j| rr.residuals[j] <= IKOSE_BAND * scale);
        let next = valid.max(floor).min(n_eff);
        if next == n_eff {
            break;
        }
        n_eff = next;
    }
    scale
}

/// Kernel bandwidth for a hypothesis with scale `scale` over `n` points.
pub fn bandwidth(scale: f64, n: usize) -> Result<f64> {
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("bandwidth needs at least one point".into()));
    }
    let k = kernel_constants();
    Ok((243.0 * k.ek_squared / (35.0 * n as f64 * k.x2_ek)).powf(0.2) * scale)
}

/// Weighting value: mean kernel response of the residuals at the
/// hypothesis bandwidth, normalized by scale and bandwidth. Larger for
/// hypotheses with many small residuals.
///
/// Summation runs in ranked (value-sorted) order, so the result is
/// bitwise invariant under any permutation of the correspondence array.
pub fn hypothesis_weight(rr: &RankedResiduals, scale: f64) -> Result<f64> {
    let n = rr.len();
    let b = bandwidth(scale, n)?;
    let sum: f64 = rr.rank.iter().map(|&j| epanechnikov(rr.residuals[j] / b)).sum();
    Ok(sum / (n as f64 * scale * b))
}

/// Configuration for weighting and updating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhuConfig {
    /// Support size n_hat: the assumed minimum inlier count per structure.
    pub support_size: usize,
    /// Overlap fraction that must be exceeded to stop.
    pub epsilon: f64,
    /// Maximum number of residual sweeps.
    pub t_max: usize,
    /// Order statistic used by the scale estimator.
    pub scale_quantile: usize,
}

pub const DEFAULT_EPSILON: f64 = 0.8;
pub const DEFAULT_T_MAX: usize = 50;
pub const DEFAULT_SUPPORT_FRACTION: f64 = 0.10;

impl MhuConfig {
    /// Defaults for `n` data points: support = 10% of n (clamped to
    /// [p+2, n]), scale quantile equal to the support size.
    pub fn for_data(kind: crate::geometry::ModelKind, n: usize) -> Result<Self> {
        Self::with_support_fraction(kind, n, DEFAULT_SUPPORT_FRACTION)
    }

    pub fn with_support_fraction(
        kind: crate::geometry::ModelKind,
        n: usize,
        fraction: f64,
    ) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidArgument("support fraction must be in (0, 1]".into()));
        }
        let min = kind.sample_size();
        if n < min {
            return Err(Error::InsufficientData { needed: min, available: n });
        }
        let support = ((fraction * n as f64).ceil() as usize).clamp(min, n);
        Ok(MhuConfig {
            support_size: support,
            epsilon: DEFAULT_EPSILON,
            t_max: DEFAULT_T_MAX,
            scale_quantile: support,
        })
    }

    pub fn validate(&self, kind: crate::geometry::ModelKind, n: usize) -> Result<()> {
        let min = kind.sample_size();
        if self.support_size < min || self.support_size > n {
            return Err(Error::InvalidArgument(format!(
                "support size {} outside [{min}, {n}]",
                self.support_size
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidArgument("epsilon must be in (0, 1]".into()));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidArgument("t_max must be positive".into()));
        }
        if self.scale_quantile < 1 || self.scale_quantile > n {
            return Err(Error::InvalidArgument("scale quantile outside [1, n]".into()));
        }
        Ok(())
    }
}

/// True when the top-support sets of the current ranking overlap both
/// previous rankings by strictly more than `epsilon`.
pub fn stop_criterion(
    rank_t: &[usize],
    rank_t1: &[usize],
    rank_t2: &[usize],
    support: usize,
    epsilon: f64,
) -> bool {
    let overlap = |a: &[usize], b: &[usize]| {
        let top_a: std::collections::HashSet<usize> = a[..support.min(a.len())].iter().copied().collect();
        b[..support.min(b.len())].iter().filter(|i| top_a.contains(i)).count() as f64
            / support as f64
    };
    overlap(rank_t, rank_t1) > epsilon && overlap(rank_t, rank_t2) > epsilon
}

/// Compute and attach weight and scale to a hypothesis without updating
/// its parameters.
pub fn weigh(h: &mut Hypothesis, corrs: &[Correspondence], cfg: &MhuConfig) -> Result<()> {
    let rr = RankedResiduals::compute(h, corrs)?;
    let scale = estimate_scale(&rr, cfg.scale_quantile);
    h.weight = Some(hypothesis_weight(&rr, scale)?);
    h.scale = Some(scale);
    Ok(())
}

/// One MHU run: sweep residuals, weight, stop once the top-support sets
/// of three consecutive sweeps agree, otherwise refit from the tail of
/// the top-support window. Returns the maximum-weight iterate (earliest
/// on ties) with its weight and scale, and the number of residual sweeps
/// performed.
///
/// The returned hypothesis carries the sampled subset that GENERATED the
/// winning iterate: the group sample when the input iterate wins, the
/// refit window otherwise. Redundancy removal depends on this: a
/// hypothesis pulled onto an already-selected structure was generated
/// from that structure's inliers, so its subset intersects the selected
/// inlier set and the duplicate is discarded.
pub fn mhu_update_detailed(
    h: &Hypothesis,
    corrs: &[Correspondence],
    cfg: &MhuConfig,
) -> Result<(Hypothesis, usize)> {
    cfg.validate(h.kind, corrs.len())?;
    let p = h.kind.minimal_size();
    let support = cfg.support_size;

    let mut current = h.clone();
    let mut best: Option<(Hypothesis, f64, f64)> = None;
    let mut rank_hist: Vec<Vec<usize>> = Vec::new();
    let mut sweeps = 0usize;

    for t in 1..=cfg.t_max {
        let rr = match RankedResiduals::compute(&current, corrs) {
            Ok(rr) => rr,
            // The input iterate must be evaluable; later iterates that
            // degenerate simply end the loop.
            Err(e) if t == 1 => return Err(e),
            Err(_) => break,
        };
        sweeps = t;
        let scale = estimate_scale(&rr, cfg.scale_quantile);
        let w = hypothesis_weight(&rr, scale)?;
        // Strict `>` keeps the earliest iterate on weight ties.
        if best.as_ref().is_none_or(|(_, bw, _)| w > *bw) {
            best = Some((current.clone(), w, scale));
        }

        rank_hist.push(rr.rank.clone());
        if t >= 3
            && stop_criterion(
                &rank_hist[t - 1],
                &rank_hist[t - 2],
                &rank_hist[t - 3],
                support,
                cfg.epsilon,
            )
        {
            break;
        }
        if t == cfg.t_max {
            break;
        }

        // Refit from ranks [support - p - 1, support] (1-based, inclusive):
        // the tail of the top-support window, p + 2 points.
        let window: Vec<usize> = rr.rank[support - p - 2..support].to_vec();
        match Hypothesis::fit(h.kind, corrs, window) {
            Ok(next) => current = next,
            Err(Error::DegenerateInput(msg)) => {
                diag!("mhu refit degenerated at sweep {t}: {msg}");
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let (mut out, w, scale) = best.expect("at least one iterate was weighted");
    out.weight = Some(w);
    out.scale = Some(scale);
    Ok((out, sweeps))
}

pub fn mhu_update(h: &Hypothesis, corrs: &[Correspondence], cfg: &MhuConfig) -> Result<Hypothesis> {
    mhu_update_detailed(h, corrs, cfg).map(|(h, _)| h)
}

/// Run MHU over a whole hypothesis set in parallel. The per-hypothesis
/// computation is independent and results keep the input order, so the
/// output is identical at any thread count. Hypotheses whose residuals
/// cannot be evaluated are dropped with a diagnostic.
pub fn mhu_update_all(
    hypotheses: &[Hypothesis],
    corrs: &[Correspondence],
    cfg: &MhuConfig,
) -> Result<Vec<Hypothesis>> {
    let results: Vec<Result<Hypothesis>> =
        hypotheses.par_iter().map(|h| mhu_update(h, corrs, cfg)).collect();
    let mut out = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(h) => out.push(h),
            Err(Error::SingularModel(msg)) | Err(Error::DegenerateInput(msg)) => {
                diag!("dropping hypothesis {i}: {msg}");
            }
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::NoHypotheses("all hypotheses failed updating".into()));
    }
    Ok(out)
}
