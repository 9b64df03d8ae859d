//! Grouping of correspondences by superpixel support and deterministic
//! initial hypothesis generation.
//!
//! Correspondences whose view-1 points fall in the same superpixel form a
//! group; neighboring groups whose combined superpixel region stays
//! within a 2S x 2S square are merged pairwise; each resulting group is
//! ranked by matching score and its top p+2 members are fitted into one
//! initial hypothesis.

use crate::diag;
use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Hypothesis, ModelKind};
use crate::superpixel::{BBox, SuperpixelMap};

/// A set of correspondences sharing superpixel support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Indices into the correspondence array, ascending, duplicate-free.
    pub members: Vec<usize>,
    /// The one or two superpixels backing this group, ascending.
    pub superpixel_ids: Vec<u32>,
    /// Union bounding box of the constituent superpixels.
    pub bbox: BBox,
}

/// Partition correspondences into per-superpixel groups, ordered by
/// superpixel label. Superpixels without correspondences produce no
/// group.
pub fn assign_groups(corrs: &[Correspondence], map: &SuperpixelMap) -> Result<Vec<Group>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); map.label_count()];
    for (i, c) in corrs.iter().enumerate() {
        let label = map.locate(c.p1)?;
        members[label as usize].push(i);
    }
    Ok(members
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(label, m)| Group {
            members: m,
            superpixel_ids: vec![label as u32],
            bbox: map.bbox(label as u32),
        })
        .collect())
}

/// Combine each group with every adjacent group whose superpixel-union
/// bounding box fits inside a 2S x 2S square. Groups with at least one
/// qualifying neighbor contribute only their combined variants; groups
/// with none pass through unchanged. Unordered pairs are emitted once and
/// the output is ordered by (min label, max label).
pub fn combine_groups(groups: &[Group], map: &SuperpixelMap, s: f64) -> Result<Vec<Group>> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidArgument("grid interval must be positive".into()));
    }
    let limit = 2.0 * s;
    // Superpixel label -> group index, for adjacency lookups.
    let mut by_label: std::collections::HashMap<u32, usize> = Default::default();
    for (gi, g) in groups.iter().enumerate() {
        by_label.insert(g.superpixel_ids[0], gi);
    }

    // Emissions keyed by (min label, max label); solo groups use
    // (label, label) so the two kinds interleave deterministically.
    let mut out: Vec<((u32, u32), Group)> = Vec::new();
    for g in groups {
        let label = g.superpixel_ids[0];
        let mut combined_any = false;
        for &nb in map.neighbors(label) {
            let Some(&nj) = by_label.get(&nb) else { continue };
            let other = &groups[nj];
            let union = g.bbox.union(&other.bbox);
            if union.width() as f64 <= limit && union.height() as f64 <= limit {
                combined_any = true;
                // The nb < label half of each pair is emitted when the
                // neighbor is visited, keeping unordered pairs unique.
                if label < nb {
                    let members = merge_sorted(&g.members, &other.members);
                    out.push((
                        (label, nb),
                        Group { members, superpixel_ids: vec![label, nb], bbox: union },
                    ));
                }
            }
        }
        if !combined_any {
            out.push(((label, label), g.clone()));
        }
    }
    out.sort_by_key(|(key, _)| *key);
    Ok(out.into_iter().map(|(_, g)| g).collect())
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Permutation of the group's members sorted by matching score in
/// non-ascending order, ties broken by ascending correspondence index.
pub fn rank_by_score(group: &Group, corrs: &[Correspondence]) -> Vec<usize> {
    let mut perm = group.members.clone();
    perm.sort_by(|&a, &b| corrs[b].score.total_cmp(&corrs[a].score).then(a.cmp(&b)));
    perm
}

/// Deterministic sampling: group, combine, rank, then fit one hypothesis
/// from the top p+2 members of every group large enough. Groups whose fit
/// is degenerate are skipped with a diagnostic.
pub fn generate_initial_hypotheses(
    corrs: &[Correspondence],
    map: &SuperpixelMap,
    kind: ModelKind,
) -> Result<Vec<Hypothesis>> {
    let groups = assign_groups(corrs, map)?;
    let combined = combine_groups(&groups, map, map.s)?;
    let subset_size = kind.sample_size();

    let mut hypotheses = Vec::new();
    let mut too_small = 0usize;
    let mut degenerate = 0usize;
    for group in &combined {
        if group.members.len() < subset_size {
            too_small += 1;
            continue;
        }
        let ranked = rank_by_score(group, corrs);
        let sample: Vec<usize> = ranked[..subset_size].to_vec();
        match Hypothesis::fit(kind, corrs, sample) {
            Ok(h) => hypotheses.push(h),
            Err(Error::DegenerateInput(msg)) => {
                degenerate += 1;
                diag!("skipping degenerate group (superpixels {:?}): {msg}", group.superpixel_ids);
            }
            Err(e) => return Err(e),
        }
    }
    if hypotheses.is_empty() {
        return Err(Error::NoHypotheses(format!(
            "{} groups: {too_small} below {subset_size} members, {degenerate} degenerate",
            combined.len()
        )));
    }
    Ok(hypotheses)
}
