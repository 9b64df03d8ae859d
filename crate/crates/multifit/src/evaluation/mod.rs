//! Evaluation utilities: point labeling, the mislabeling-rate metric, a
//! seeded RANSAC baseline and a synthetic scene generator.

mod ransac;
mod synthetic;

pub use ransac::ransac_baseline;
pub use synthetic::{generate_scene, SceneSpec, SyntheticScene};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Hypothesis, ResidualEvaluator};

/// Per-correspondence labels: 0 marks an outlier, `1..=l` the model index.
pub type Labeling = Vec<usize>;

/// Assign each point to its minimum-residual model when that residual is
/// within `threshold * scale` of the model, else to the outlier label.
/// Residual ties go to the lower model index.
pub fn assign_labels(
    models: &[Hypothesis],
    corrs: &[Correspondence],
    threshold: f64,
) -> Result<Labeling> {
    let evals: Vec<(ResidualEvaluator, f64)> = models
        .iter()
        .map(|m| {
            let scale = m
                .scale
                .ok_or_else(|| Error::InvalidArgument("model has no scale".into()))?;
            Ok((ResidualEvaluator::new(m)?, threshold * scale))
        })
        .collect::<Result<_>>()?;
    Ok(corrs
        .iter()
        .map(|c| {
            let mut best: Option<(usize, f64)> = None;
            for (i, (eval, _)) in evals.iter().enumerate() {
                let r = eval.eval(c);
                if best.is_none_or(|(_, br)| r < br) {
                    best = Some((i, r));
                }
            }
            match best {
                Some((i, r)) if r <= evals[i].1 => i + 1,
                _ => 0,
            }
        })
        .collect())
}

/// Variant with one absolute pixel threshold for all models (used for the
/// RANSAC baseline, whose hypotheses carry no estimated scale).
pub fn assign_labels_px(
    models: &[Hypothesis],
    corrs: &[Correspondence],
    threshold_px: f64,
) -> Result<Labeling> {
    let evals: Vec<ResidualEvaluator> =
        models.iter().map(ResidualEvaluator::new).collect::<Result<_>>()?;
    Ok(corrs
        .iter()
        .map(|c| {
            let mut best: Option<(usize, f64)> = None;
            for (i, eval) in evals.iter().enumerate() {
                let r = eval.eval(c);
                if best.is_none_or(|(_, br)| r < br) {
                    best = Some((i, r));
                }
            }
            match best {
                Some((i, r)) if r <= threshold_px => i + 1,
                _ => 0,
            }
        })
        .collect())
}

/// Percentage of mislabeled points under the best injective mapping from
/// predicted model indices to ground-truth structure indices (the outlier
/// label 0 is fixed). Brute-forced; structure counts stay single-digit.
pub fn fitting_error(pred: &[usize], gt: &[usize]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gt.len() });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let n = pred.len();
    let lp = pred.iter().copied().max().unwrap_or(0);
    let lg = gt.iter().copied().max().unwrap_or(0);

    // Confusion counts: conf[a][b] = points predicted a with truth b.
    let mut conf = vec![vec![0usize; lg + 1]; lp + 1];
    for (&a, &b) in pred.iter().zip(gt.iter()) {
        conf[a][b] += 1;
    }

    // Maximize the number of correct points over injective assignments of
    // predicted labels 1..=lp to ground-truth labels 1..=lg. Surplus
    // predicted labels (only possible when lp > lg) match nothing and
    // collect no credit.
    fn search(a: usize, lp: usize, used: &mut [bool], conf: &[Vec<usize>]) -> usize {
        if a > lp {
            return 0;
        }
        let lg = used.len() - 1;
        let mut best = 0;
        for b in 1..=lg {
            if !used[b] {
                used[b] = true;
                best = best.max(conf[a][b] + search(a + 1, lp, used, conf));
                used[b] = false;
            }
        }
        let free = (1..=lg).filter(|&b| !used[b]).count();
        if free < lp - a + 1 {
            best = best.max(search(a + 1, lp, used, conf));
        }
        best
    }

    let mut used = vec![false; lg + 1];
    let correct = conf[0][0] + search(1, lp, &mut used, &conf);
    Ok((n - correct) as f64 / n as f64 * 100.0)
}
