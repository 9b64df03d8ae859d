//! Deterministic SLIC superpixel segmentation of view 1.
//!
//! Segmentation provides the grouping substrate for hypothesis sampling:
//! feature points inside one superpixel usually belong to the same
//! structure. The implementation is fully deterministic (fixed iteration
//! count, raster-order tie breaking) so identical images yield identical
//! label arrays at any thread count.

mod lab;
mod slic;

pub use slic::slic_segment;

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Number of k-means iterations; fixed rather than convergence-tested to
/// guarantee determinism and bounded runtime.
pub const SLIC_ITERATIONS: usize = 10;

/// Default compactness (spatial regularity) for SLIC.
pub const DEFAULT_COMPACTNESS: f64 = 10.0;

/// An 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// `3 * width * height` bytes, RGB interleaved.
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("empty image".into()));
        }
        if data.len() != 3 * width * height {
            return Err(Error::InvalidArgument(format!(
                "image buffer has {} bytes, expected {}",
                data.len(),
                3 * width * height
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Expected superpixel side length for `n` pixels and `m` superpixels.
pub fn grid_interval(n: usize, m: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("pixel and superpixel counts must be positive".into()));
    }
    Ok((n as f64 / m as f64).sqrt())
}

/// Axis-aligned pixel bounding box, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BBox {
    /// Width in pixels (inclusive span).
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }
}

/// Per-pixel labeling of view 1 with per-label centroids, bounding boxes
/// and the 4-connected adjacency graph.
#[derive(Debug, Clone)]
pub struct SuperpixelMap {
    pub width: usize,
    pub height: usize,
    /// Dense labels in `0..label_count()`, one per pixel, row-major.
    pub labels: Vec<u32>,
    pub m_requested: usize,
    /// Grid interval `sqrt(N / m_requested)`.
    pub s: f64,
    centers: Vec<(f64, f64)>,
    bboxes: Vec<BBox>,
    adjacency: Vec<Vec<u32>>,
}

impl SuperpixelMap {
    /// Build a map from a finished label array, computing centroids,
    /// bounding boxes and adjacency. Labels must already be dense
    /// (`0..k`) and 4-connected.
    pub(crate) fn from_dense_labels(
        width: usize,
        height: usize,
        labels: Vec<u32>,
        m_requested: usize,
    ) -> Result<Self> {
        let n = width * height;
        if n == 0 || labels.len() != n {
            return Err(Error::InvalidArgument("label array does not match image size".into()));
        }
        let k = labels.iter().copied().max().map(|m| m as usize + 1).unwrap_or(0);
        let mut count = vec![0usize; k];
        let mut sx = vec![0.0f64; k];
        let mut sy = vec![0.0f64; k];
        let mut bboxes = vec![
            BBox { x0: usize::MAX, y0: usize::MAX, x1: 0, y1: 0 };
            k
        ];
        let mut adj: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); k];
        for y in 0..height {
            for x in 0..width {
                let l = labels[y * width + x] as usize;
                count[l] += 1;
                sx[l] += x as f64;
                sy[l] += y as f64;
                let b = &mut bboxes[l];
                b.x0 = b.x0.min(x);
                b.y0 = b.y0.min(y);
                b.x1 = b.x1.max(x);
                b.y1 = b.y1.max(y);
                if x + 1 < width {
                    let r = labels[y * width + x + 1];
                    if r != l as u32 {
                        adj[l].insert(r);
                        adj[r as usize].insert(l as u32);
                    }
                }
                if y + 1 < height {
                    let d = labels[(y + 1) * width + x];
                    if d != l as u32 {
                        adj[l].insert(d);
                        adj[d as usize].insert(l as u32);
                    }
                }
            }
        }
        if count.contains(&0) {
            return Err(Error::InvalidArgument("label array is not dense".into()));
        }
        let centers =
            (0..k).map(|l| (sx[l] / count[l] as f64, sy[l] / count[l] as f64)).collect();
        Ok(SuperpixelMap {
            width,
            height,
            labels,
            m_requested,
            s: grid_interval(n, m_requested)?,
            centers,
            bboxes,
            adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Build a map from an externally produced label array.
    ///
    /// Labels are densified (sorted unique values map to `0..k`) and
    /// disconnected label fragments are split into separate labels so the
    /// 4-connectivity invariant holds. When `m_requested` is absent it is
    /// set to the final label count.
    pub fn from_labels(
        width: usize,
        height: usize,
        raw: &[u32],
        m_requested: Option<usize>,
    ) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(Error::InvalidArgument("empty label map".into()));
        }
        if raw.len() != n {
            return Err(Error::LengthMismatch { left: raw.len(), right: n });
        }
        // Split into 4-connected components; each becomes one label,
        // numbered in raster order of its first pixel.
        let comps = slic::connected_components(raw, width, height);
        let labels = comps.pixel_comp.iter().map(|&c| c as u32).collect::<Vec<_>>();
        let m = m_requested.unwrap_or(comps.count);
        if m == 0 {
            return Err(Error::InvalidArgument("superpixel count must be positive".into()));
        }
        Self::from_dense_labels(width, height, labels, m)
    }

    pub fn label_count(&self) -> usize {
        self.centers.len()
    }

    pub fn center(&self, label: u32) -> (f64, f64) {
        self.centers[label as usize]
    }

    pub fn bbox(&self, label: u32) -> BBox {
        self.bboxes[label as usize]
    }

    /// Labels sharing a 4-connected pixel boundary with `label`,
    /// ascending. Symmetric and irreflexive.
    pub fn neighbors(&self, label: u32) -> &[u32] {
        &self.adjacency[label as usize]
    }

    /// Label of the pixel nearest to `p` (rounded to the pixel grid).
    pub fn locate(&self, p: Point2) -> Result<u32> {
        let x = p.x.round();
        let y = p.y.round();
        if !(x.is_finite() && y.is_finite())
            || x < 0.0
            || y < 0.0
            || x >= self.width as f64
            || y >= self.height as f64
        {
            return Err(Error::OutOfBounds { x: p.x, y: p.y, width: self.width, height: self.height });
        }
        Ok(self.labels[y as usize * self.width + x as usize])
    }
}
