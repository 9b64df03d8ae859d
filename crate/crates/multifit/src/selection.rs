//! Model selection: repeatedly take the highest-weight hypothesis and
//! purge hypotheses made redundant by it.
//!
//! A hypothesis is redundant for a selected model when its sampled subset
//! intersects the selected model's inlier set. Removing hypotheses
//! instead of data points avoids re-generating hypotheses per structure.

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Hypothesis, ResidualEvaluator};

/// Result of running the selection loop.
#[derive(Debug, Clone)]
pub struct SelectionState {
    /// Chosen hypotheses, in selection order.
    pub selected: Vec<Hypothesis>,
    /// Inlier index set of each selected hypothesis (ascending).
    pub inlier_sets: Vec<Vec<usize>>,
    /// True when the hypothesis set was exhausted before reaching the
    /// requested number of structures.
    pub deficit: bool,
}

/// Indices of correspondences whose residual under `h` is at most
/// `threshold * scale(h)`.
pub fn inlier_set(
    h: &Hypothesis,
    corrs: &[Correspondence],
    threshold: f64,
) -> Result<Vec<usize>> {
    let scale = h
        .scale
        .ok_or_else(|| Error::InvalidArgument("hypothesis has no scale".into()))?;
    let eval = ResidualEvaluator::new(h)?;
    let limit = threshold * scale;
    Ok(corrs
        .iter()
        .enumerate()
        .filter(|(_, c)| eval.eval(c) <= limit)
        .map(|(i, _)| i)
        .collect())
}

/// Redundancy test: does the candidate's sampled subset share at least
/// one index with the selected hypothesis's inlier set?
pub fn is_redundant(candidate: &Hypothesis, inliers_of_selected: &[usize]) -> bool {
    candidate.sample.iter().any(|i| inliers_of_selected.binary_search(i).is_ok())
}

/// Pick `count` model instances: each round takes the maximum-weight
/// remaining hypothesis (ties by earliest position), computes its inlier
/// set, and removes it together with all hypotheses redundant for it.
pub fn select_models(
    hypotheses: &[Hypothesis],
    corrs: &[Correspondence],
    count: usize,
    threshold: f64,
) -> Result<SelectionState> {
    if hypotheses.is_empty() {
        return Err(Error::NoHypotheses("selection got an empty hypothesis set".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("structure count must be at least 1".into()));
    }
    for h in hypotheses {
        if h.weight.is_none() || h.scale.is_none() {
            return Err(Error::InvalidArgument("selection needs weighted hypotheses".into()));
        }
    }

    let mut remaining: Vec<(usize, &Hypothesis)> = hypotheses.iter().enumerate().collect();
    let mut state = SelectionState { selected: Vec::new(), inlier_sets: Vec::new(), deficit: false };

    for _ in 0..count {
        if remaining.is_empty() {
            state.deficit = true;
            break;
        }
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, (ia, a)), (_, (ib, b))| {
                a.weight
                    .unwrap()
                    .total_cmp(&b.weight.unwrap())
                    // On equal weights prefer the earlier original index.
                    .then(ib.cmp(ia))
            })
            .map(|(pos, (i, _))| (pos, *i))
            .unwrap();
        let chosen = remaining[pos].1.clone();
        let inliers = inlier_set(&chosen, corrs, threshold)?;
        remaining.remove(pos);
        remaining.retain(|(_, h)| !is_redundant(h, &inliers));
        state.selected.push(chosen);
        state.inlier_sets.push(inliers);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ModelKind, Point2};
    use nalgebra::Matrix3;

    fn hyp_with(params: Matrix3<f64>, sample: Vec<usize>, weight: f64, scale: f64) -> Hypothesis {
        let mut h = Hypothesis::from_params(ModelKind::Homography, params, sample).unwrap();
        h.weight = Some(weight);
        h.scale = Some(scale);
        h
    }

    fn identity_corr(x: f64, y: f64) -> Correspondence {
        Correspondence::new(Point2::new(x, y), Point2::new(x, y), 1.0)
    }

    fn offset_corr(x: f64, y: f64, d: f64) -> Correspondence {
        Correspondence::new(Point2::new(x, y), Point2::new(x + d, y), 1.0)
    }

    #[test]
    fn inlier_set_thresholding() {
        // Identity model, scale 1: points moved by <= T are inliers.
        let corrs = vec![
            identity_corr(0.0, 0.0),
            offset_corr(10.0, 10.0, 1.0),
            offset_corr(20.0, 20.0, 5.0),
        ];
        let h = hyp_with(Matrix3::identity(), vec![0], 1.0, 1.0);
        let set = inlier_set(&h, &corrs, 2.5).unwrap();
        assert_eq!(set, vec![0, 1]);
        // Doubling the threshold never shrinks the set.
        let wider = inlier_set(&h, &corrs, 5.0).unwrap();
        assert!(set.iter().all(|i| wider.contains(i)));
    }

    #[test]
    fn inlier_set_empty_at_floor_scale() {
        let corrs = vec![offset_corr(0.0, 0.0, 1.0)];
        let h = hyp_with(Matrix3::identity(), vec![0], 1.0, 1e-9);
        assert!(inlier_set(&h, &corrs, 2.5).unwrap().is_empty());
    }

    #[test]
    fn redundancy_by_intersection() {
        let mk = |sample: Vec<usize>| hyp_with(Matrix3::identity(), sample, 1.0, 1.0);
        assert!(is_redundant(&mk(vec![3, 9, 10, 11, 12, 13]), &[1, 2, 3]));
        assert!(!is_redundant(&mk(vec![4, 5, 6, 7, 8, 9]), &[1, 2, 3]));
        assert!(!is_redundant(&mk(vec![4, 5, 6]), &[]));
    }

    #[test]
    fn single_selection_takes_global_max() {
        let corrs = vec![identity_corr(0.0, 0.0)];
        let hyps = vec![
            hyp_with(Matrix3::identity(), vec![0], 0.4, 1.0),
            hyp_with(Matrix3::identity(), vec![0], 0.9, 1.0),
            hyp_with(Matrix3::identity(), vec![0], 0.7, 1.0),
        ];
        let state = select_models(&hyps, &corrs, 1, 2.5).unwrap();
        assert_eq!(state.selected.len(), 1);
        assert_eq!(state.selected[0].weight, Some(0.9));
        assert!(!state.deficit);
    }

    #[test]
    fn weight_ties_broken_by_earliest() {
        let corrs = vec![identity_corr(0.0, 0.0)];
        let hyps = vec![
            hyp_with(Matrix3::identity() * 1.0, vec![0], 0.5, 1.0),
            hyp_with(Matrix3::identity(), vec![0], 0.5, 1.0),
        ];
        let state = select_models(&hyps, &corrs, 1, 2.5).unwrap();
        assert_eq!(state.selected[0], hyps[0]);
    }

    #[test]
    fn deficit_flag_on_exhaustion() {
        let corrs: Vec<Correspondence> = (0..4).map(|i| identity_corr(i as f64, 0.0)).collect();
        // Both hypotheses are mutually redundant (samples inside each
        // other's inlier sets), so only one survives.
        let hyps = vec![
            hyp_with(Matrix3::identity(), vec![0, 1], 0.9, 1.0),
            hyp_with(Matrix3::identity(), vec![2, 3], 0.5, 1.0),
        ];
        let state = select_models(&hyps, &corrs, 3, 2.5).unwrap();
        assert_eq!(state.selected.len(), 1);
        assert!(state.deficit);
    }

    #[test]
    fn empty_hypothesis_set_is_error() {
        let corrs = vec![identity_corr(0.0, 0.0)];
        assert!(matches!(
            select_models(&[], &corrs, 1, 2.5),
            Err(Error::NoHypotheses(_))
        ));
    }

    /// Straight-line reimplementation of the selection loop used as an
    /// oracle on small inputs.
    pub(crate) fn brute_force_selection(
        hypotheses: &[Hypothesis],
        corrs: &[Correspondence],
        count: usize,
        threshold: f64,
    ) -> (Vec<usize>, bool) {
        let mut alive: Vec<usize> = (0..hypotheses.len()).collect();
        let mut picked = Vec::new();
        for _ in 0..count {
            if alive.is_empty() {
                return (picked, true);
            }
            let mut best = alive[0];
            for &i in &alive {
                if hypotheses[i].weight.unwrap() > hypotheses[best].weight.unwrap() {
                    best = i;
                }
            }
            picked.push(best);
            let inliers = inlier_set(&hypotheses[best], corrs, threshold).unwrap();
            alive.retain(|&i| {
                i != best && !hypotheses[i].sample.iter().any(|s| inliers.contains(s))
            });
        }
        (picked, false)
    }

    #[test]
    fn matches_brute_force_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for trial in 0..25 {
            let n = 30;
            let corrs: Vec<Correspondence> = (0..n)
                .map(|_| {
                    offset_corr(
                        rng.random_range(0.0..100.0),
                        rng.random_range(0.0..100.0),
                        rng.random_range(0.0..6.0),
                    )
                })
                .collect();
            let hyps: Vec<Hypothesis> = (0..rng.random_range(1..=12))
                .map(|_| {
                    let sample: Vec<usize> =
                        (0..6).map(|_| rng.random_range(0..n)).collect();
                    hyp_with(
                        Matrix3::identity(),
                        sample,
                        rng.random_range(0.0..1.0),
                        rng.random_range(0.5..3.0),
                    )
                })
                .collect();
            let l = rng.random_range(1..4);
            let got = select_models(&hyps, &corrs, l, 2.5).unwrap();
            let (oracle, deficit) = brute_force_selection(&hyps, &corrs, l, 2.5);
            let got_idx: Vec<usize> = got
                .selected
                .iter()
                .map(|s| hyps.iter().position(|h| h == s).unwrap())
                .collect();
            assert_eq!(got_idx, oracle, "trial {trial}");
            assert_eq!(got.deficit, deficit, "trial {trial}");
        }
    }

    /// Inlier set of a ground-truth model on a generated scene: catches
    /// nearly all of the structure and almost nothing else.
    #[test]
    fn inlier_set_recovers_generated_structure() {
        use crate::evaluation::{generate_scene, SceneSpec};
        let spec = SceneSpec {
            structures: 1,
            kind: ModelKind::Homography,
            inliers_per_structure: 150,
            outlier_fraction: 0.4,
            noise_sigma: 1.0,
            width: 480,
            height: 360,
            seed: 31,
        };
        let scene = generate_scene(&spec).unwrap();
        let gt = scene.gt_labels();
        let mut h =
            Hypothesis::from_params(ModelKind::Homography, scene.models[0], vec![]).unwrap();
        // The residual distribution of sigma = 1 noise in both views has
        // scale ~ sqrt(2); use it directly as the known truth.
        h.scale = Some(std::f64::consts::SQRT_2);
        h.weight = Some(1.0);
        let set = inlier_set(&h, &scene.correspondences, 2.5).unwrap();
        let caught = set.iter().filter(|&&i| gt[i] == 1).count();
        let strays = set.len() - caught;
        assert!(caught >= 140, "only {caught}/150 structure members inside the band");
        assert!(strays <= 5, "{strays} outliers leaked into the inlier set");
    }

    #[test]
    fn selected_models_pairwise_non_redundant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let n = 40;
        let corrs: Vec<Correspondence> = (0..n)
            .map(|_| {
                offset_corr(
                    rng.random_range(0.0..100.0),
                    rng.random_range(0.0..100.0),
                    rng.random_range(0.0..8.0),
                )
            })
            .collect();
        let hyps: Vec<Hypothesis> = (0..10)
            .map(|_| {
                let sample: Vec<usize> = (0..6).map(|_| rng.random_range(0..n)).collect();
                hyp_with(Matrix3::identity(), sample, rng.random_range(0.0..1.0), 1.0)
            })
            .collect();
        let state = select_models(&hyps, &corrs, 4, 2.5).unwrap();
        for (i, earlier) in state.inlier_sets.iter().enumerate() {
            for later in state.selected.iter().skip(i + 1) {
                assert!(!is_redundant(later, earlier));
            }
        }
    }
}
