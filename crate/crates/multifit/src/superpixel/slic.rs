//! SLIC core: labxy k-means with fixed iteration count plus
//! deterministic connectivity enforcement.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::lab::{rgb_to_lab, Lab};
use super::{grid_interval, RgbImage, SuperpixelMap, SLIC_ITERATIONS};

#[derive(Debug, Clone, Copy)]
struct Cluster {
    lab: Lab,
    x: f64,
    y: f64,
}

/// Segment `img` into about `m` superpixels.
///
/// Deterministic by construction: seeds start on the regular S-grid
/// (perturbed to the lowest-gradient pixel in a 3x3 window), pixel
/// assignment breaks distance ties by lower label id, and the center
/// update runs in raster order. The assignment step is parallelized per
/// pixel row; every pixel's result is independent of all others, so the
/// label array is identical at any thread count.
pub fn slic_segment(img: &RgbImage, m: usize, compactness: f64) -> Result<SuperpixelMap> {
    let n = img.pixels();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty image or zero superpixels".into()));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} superpixels for {n} pixels"
        )));
    }
    if !(compactness.is_finite() && compactness > 0.0) {
        return Err(Error::InvalidArgument("compactness must be positive".into()));
    }
    let (w, h) = (img.width, img.height);
    let s = grid_interval(n, m)?;

    let lab: Vec<Lab> =
        (0..n).map(|i| rgb_to_lab(img.rgb(i % w, i / w))).collect::<Vec<_>>();

    let mut clusters = init_seeds(&lab, w, h, s);
    let mut labels = vec![0u32; n];

    for _ in 0..SLIC_ITERATIONS {
        assign(&lab, w, h, s, compactness, &clusters, &mut labels);
        update_centers(&lab, w, &labels, &mut clusters);
    }

    let labels = enforce_connectivity(&labels, w, h, s, m);
    SuperpixelMap::from_dense_labels(w, h, labels, m)
}

/// Seeds on an even grid of roughly `w/s x h/s` cells, each moved to the
/// lowest-gradient pixel in its 3x3 neighborhood.
fn init_seeds(lab: &[Lab], w: usize, h: usize, s: f64) -> Vec<Cluster> {
    let nx = ((w as f64 / s).round() as usize).max(1);
    let ny = ((h as f64 / s).round() as usize).max(1);
    let mut seeds = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let sx = ((i as f64 + 0.5) * w as f64 / nx as f64).floor() as usize;
            let sy = ((j as f64 + 0.5) * h as f64 / ny as f64).floor() as usize;
            let (px, py) = lowest_gradient(lab, w, h, sx.min(w - 1), sy.min(h - 1));
            seeds.push(Cluster { lab: lab[py * w + px], x: px as f64, y: py as f64 });
        }
    }
    seeds
}

/// Squared Lab-gradient magnitude with clamped borders.
fn gradient(lab: &[Lab], w: usize, h: usize, x: usize, y: usize) -> f64 {
    let xm = x.saturating_sub(1);
    let xp = (x + 1).min(w - 1);
    let ym = y.saturating_sub(1);
    let yp = (y + 1).min(h - 1);
    lab[y * w + xp].dist_sq(&lab[y * w + xm]) + lab[yp * w + x].dist_sq(&lab[ym * w + x])
}

fn lowest_gradient(lab: &[Lab], w: usize, h: usize, x: usize, y: usize) -> (usize, usize) {
    let mut best = (x, y);
    let mut best_g = f64::INFINITY;
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let g = gradient(lab, w, h, nx as usize, ny as usize);
            if g < best_g {
                best_g = g;
                best = (nx as usize, ny as usize);
            }
        }
    }
    best
}

/// Assign every pixel to its nearest cluster in the combined labxy
/// distance, searching clusters whose 2S x 2S window covers the pixel.
fn assign(
    lab: &[Lab],
    w: usize,
    h: usize,
    s: f64,
    compactness: f64,
    clusters: &[Cluster],
    labels: &mut [u32],
) {
    // Bin clusters on an S-sized grid; candidates for a pixel live in the
    // 3x3 bin neighborhood.
    let bw = (w as f64 / s).ceil() as usize + 1;
    let bh = (h as f64 / s).ceil() as usize + 1;
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); bw * bh];
    for (k, c) in clusters.iter().enumerate() {
        let bx = ((c.x / s) as usize).min(bw - 1);
        let by = ((c.y / s) as usize).min(bh - 1);
        bins[by * bw + bx].push(k as u32);
    }
    // Ascending ids inside each bin so the scan order is the label order.
    for b in &mut bins {
        b.sort_unstable();
    }

    let inv_s2 = (compactness / s) * (compactness / s);

    labels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let by = ((y as f64 / s) as usize).min(bh - 1);
        for (x, out) in row.iter_mut().enumerate() {
            let bx = ((x as f64 / s) as usize).min(bw - 1);
            let p = &lab[y * w + x];
            let mut best = u32::MAX;
            let mut best_d = f64::INFINITY;
            for nby in by.saturating_sub(1)..=(by + 1).min(bh - 1) {
                for nbx in bx.saturating_sub(1)..=(bx + 1).min(bw - 1) {
                    for &k in &bins[nby * bw + nbx] {
                        let c = &clusters[k as usize];
                        let dx = x as f64 - c.x;
                        let dy = y as f64 - c.y;
                        if dx.abs() > s || dy.abs() > s {
                            continue;
                        }
                        let d = p.dist_sq(&c.lab) + (dx * dx + dy * dy) * inv_s2;
                        // Strict `<` with ascending scan ids keeps the
                        // lowest label on ties.
                        if d < best_d || (d == best_d && k < best) {
                            best_d = d;
                            best = k;
                        }
                    }
                }
            }
            if best == u32::MAX {
                // No cluster window covers this pixel; fall back to a
                // full scan.
                for (k, c) in clusters.iter().enumerate() {
                    let dx = x as f64 - c.x;
                    let dy = y as f64 - c.y;
                    let d = p.dist_sq(&c.lab) + (dx * dx + dy * dy) * inv_s2;
                    if d < best_d {
                        best_d = d;
                        best = k as u32;
                    }
                }
            }
            *out = best;
        }
    });
}

/// Move each cluster to the mean labxy of its pixels (raster-order
/// accumulation). Empty clusters stay where they are.
fn update_centers(lab: &[Lab], w: usize, labels: &[u32], clusters: &mut [Cluster]) {
    let k = clusters.len();
    let mut acc = vec![(0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize); k];
    for (i, &l) in labels.iter().enumerate() {
        let a = &mut acc[l as usize];
        let p = &lab[i];
        a.0 += p.l;
        a.1 += p.a;
        a.2 += p.b;
        a.3 += (i % w) as f64;
        a.4 += (i / w) as f64;
        a.5 += 1;
    }
    for (c, a) in clusters.iter_mut().zip(acc.iter()) {
        if a.5 > 0 {
            let inv = 1.0 / a.5 as f64;
            c.lab = Lab { l: a.0 * inv, a: a.1 * inv, b: a.2 * inv };
            c.x = a.3 * inv;
            c.y = a.4 * inv;
        }
    }
}

/// Connected components of equal label under 4-connectivity, numbered in
/// raster order of their first pixel.
pub(super) struct Components {
    /// Per-pixel component id.
    pub pixel_comp: Vec<usize>,
    pub count: usize,
    pub sizes: Vec<usize>,
    /// Component adjacency as sorted, deduplicated neighbor lists.
    pub adjacency: Vec<Vec<usize>>,
}

pub(super) fn connected_components(labels: &[u32], w: usize, h: usize) -> Components {
    let n = w * h;
    let mut pixel_comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if pixel_comp[start] != usize::MAX {
            continue;
        }
        let comp = sizes.len();
        let label = labels[start];
        let mut size = 0usize;
        pixel_comp[start] = comp;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if pixel_comp[j] == usize::MAX && labels[j] == label {
                    pixel_comp[j] = comp;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        sizes.push(size);
    }
    let count = sizes.len();
    let mut adjacency: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); count];
    for y in 0..h {
        for x in 0..w {
            let c = pixel_comp[y * w + x];
            if x + 1 < w {
                let r = pixel_comp[y * w + x + 1];
                if r != c {
                    adjacency[c].insert(r);
                    adjacency[r].insert(c);
                }
            }
            if y + 1 < h {
                let d = pixel_comp[(y + 1) * w + x];
                if d != c {
                    adjacency[c].insert(d);
                    adjacency[d].insert(c);
                }
            }
        }
    }
    Components {
        pixel_comp,
        count,
        sizes,
        adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
    }
}

/// Merge orphan components smaller than `S^2 / 4` into their largest
/// adjacent component (raster order), then cap the final label count at
/// `2 * m_requested` by absorbing the smallest components.
fn enforce_connectivity(labels: &[u32], w: usize, h: usize, s: f64, m_requested: usize) -> Vec<u32> {
    let comps = connected_components(labels, w, h);
    let count = comps.count;
    let min_size = s * s / 4.0;

    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut size = comps.sizes.clone();
    let mut adj: Vec<std::collections::BTreeSet<usize>> =
        comps.adjacency.iter().map(|v| v.iter().copied().collect()).collect();

    let merge = |parent: &mut Vec<usize>,
                     size: &mut Vec<usize>,
                     adj: &mut Vec<std::collections::BTreeSet<usize>>,
                     from: usize,
                     into: usize| {
        parent[from] = into;
        size[into] += size[from];
        let neighbors = std::mem::take(&mut adj[from]);
        for x in neighbors {
            adj[x].remove(&from);
            if x != into {
                adj[x].insert(into);
                adj[into].insert(x);
            }
        }
        adj[into].remove(&into);
        adj[into].remove(&from);
    };

    // Pass 1: absorb undersized orphans (components are visited in the
    // raster order of their first pixel).
    for c in 0..count {
        let root = find(&mut parent, c);
        if root != c || (size[root] as f64) >= min_size {
            continue;
        }
        let target = adj[root]
            .iter()
            .map(|&x| find(&mut parent, x))
            .filter(|&r| r != root)
            .max_by_key(|&r| (size[r], std::cmp::Reverse(r)));
        if let Some(t) = target {
            merge(&mut parent, &mut size, &mut adj, root, t);
        }
    }

    // Pass 2: keep at most 2 * m_requested labels.
    let cap = 2 * m_requested;
    loop {
        let roots: Vec<usize> = (0..count).filter(|&c| find(&mut parent, c) == c).collect();
        if roots.len() <= cap || roots.len() <= 1 {
            break;
        }
        let smallest = *roots.iter().min_by_key(|&&r| (size[r], r)).unwrap();
        let target = adj[smallest]
            .iter()
            .map(|&x| find(&mut parent, x))
            .filter(|&r| r != smallest)
            .max_by_key(|&r| (size[r], std::cmp::Reverse(r)));
        match target {
            Some(t) => merge(&mut parent, &mut size, &mut adj, smallest, t),
            None => break,
        }
    }

    // Dense relabel in ascending root order.
    let mut dense = vec![u32::MAX; count];
    let mut next = 0u32;
    for (c, slot) in dense.iter_mut().enumerate() {
        if parent[c] == c {
            *slot = next;
            next += 1;
        }
    }
    comps
        .pixel_comp
        .iter()
        .map(|&c| {
            let mut i = c;
            while parent[i] != i {
                i = parent[i];
            }
            dense[i]
        })
        .collect()
}
