//! Seeded RANSAC baseline using the conventional fit-and-remove scheme:
//! per structure, sample minimal subsets from the remaining points, keep
//! the hypothesis with the most inliers, then remove its inliers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Hypothesis, ModelKind, ResidualEvaluator};

/// Estimate `structures` models with a fixed iteration budget per
/// structure and an absolute inlier threshold in pixels. Fully
/// reproducible for a given seed.
pub fn ransac_baseline(
    corrs: &[Correspondence],
    kind: ModelKind,
    structures: usize,
    iterations: usize,
    inlier_threshold: f64,
    seed: u64,
) -> Result<Vec<Hypothesis>> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iteration budget must be positive".into()));
    }
    let p = kind.minimal_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: Vec<usize> = (0..corrs.len()).collect();
    let mut out = Vec::with_capacity(structures);

    for _ in 0..structures {
        if remaining.len() < p {
            return Err(Error::InsufficientData { needed: p, available: remaining.len() });
        }
        let mut best: Option<(usize, Hypothesis)> = None;
        for _ in 0..iterations {
            let pick = rand::seq::index::sample(&mut rng, remaining.len(), p);
            let sample: Vec<usize> = pick.iter().map(|i| remaining[i]).collect();
            let Ok(h) = Hypothesis::fit(kind, corrs, sample) else { continue };
            let Ok(eval) = ResidualEvaluator::new(&h) else { continue };
            let count = remaining
                .iter()
                .filter(|&&i| eval.eval(&corrs[i]) <= inlier_threshold)
                .count();
            // Strict `>` keeps the earliest best for reproducibility.
            if best.as_ref().is_none_or(|(c, _)| count > *c) {
                best = Some((count, h));
            }
        }
        let Some((_, h)) = best else {
            return Err(Error::NoHypotheses("every sampled subset was degenerate".into()));
        };
        let eval = ResidualEvaluator::new(&h)?;
        remaining.retain(|&i| eval.eval(&corrs[i]) > inlier_threshold);
        out.push(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{assign_labels_px, fitting_error};
    use crate::geometry::Point2;
    use rand::{Rng, SeedableRng};

    fn clean_homography_scene(n: usize) -> Vec<Correspondence> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        (0..n)
            .map(|_| {
                let x = rng.random_range(0.0..300.0);
                let y = rng.random_range(0.0..300.0);
                Correspondence::new(Point2::new(x, y), Point2::new(x + 12.0, y - 4.0), 1.0)
                    .with_label(1)
            })
            .collect()
    }

    #[test]
    fn noise_free_scene_is_solved_for_every_seed() {
        let corrs = clean_homography_scene(60);
        let gt: Vec<usize> = vec![1; 60];
        for seed in [0, 7, 123] {
            let models =
                ransac_baseline(&corrs, ModelKind::Homography, 1, 100, 2.0, seed).unwrap();
            let labels = assign_labels_px(&models, &corrs, 2.0).unwrap();
            assert_eq!(fitting_error(&labels, &gt).unwrap(), 0.0);
        }
    }

    #[test]
    fn same_seed_is_bitwise_reproducible() {
        let mut corrs = clean_homography_scene(50);
        // Add outliers so sampling actually matters.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            corrs.push(Correspondence::new(
                Point2::new(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)),
                Point2::new(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0)),
                0.5,
            ));
        }
        let a = ransac_baseline(&corrs, ModelKind::Homography, 1, 50, 2.0, 99).unwrap();
        let b = ransac_baseline(&corrs, ModelKind::Homography, 1, 50, 2.0, 99).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.params, y.params);
            assert_eq!(x.sample, y.sample);
        }
    }

    #[test]
    fn insufficient_data_is_reported() {
        let corrs = clean_homography_scene(3);
        assert!(matches!(
            ransac_baseline(&corrs, ModelKind::Homography, 1, 10, 2.0, 0),
            Err(Error::InsufficientData { .. })
        ));
    }
}
