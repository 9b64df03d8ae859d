//! Two-view model parameterizations, solvers and residual functions.
//!
//! Supports plane-induced homographies (3x3, 8 dof) and fundamental
//! matrices (3x3, rank 2). Solvers are normalized DLT / eight-point with
//! least-squares handling of over-determined subsets; residuals are the
//! symmetric transfer distance (homography) and the first-order Sampson
//! distance (fundamental), both in pixels.

mod residual;
mod solve;

pub use residual::{compute_residuals, residual, ResidualEvaluator};
pub use solve::{fit_fundamental, fit_homography, fit_model, hartley_normalize};

use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// A 2D image point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// One keypoint match between the two views, with its matching score and
/// an optional ground-truth label (0 = outlier, 1..=L = structure id).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub p1: Point2,
    pub p2: Point2,
    pub score: f64,
    pub gt_label: Option<usize>,
}

impl Correspondence {
    pub fn new(p1: Point2, p2: Point2, score: f64) -> Self {
        Correspondence { p1, p2, score, gt_label: None }
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.gt_label = Some(label);
        self
    }
}

/// The geometric relation being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Homography,
    Fundamental,
}

impl ModelKind {
    /// Size of a minimal subset: 4 point pairs for a homography,
    /// 8 for a fundamental matrix.
    pub fn minimal_size(self) -> usize {
        match self {
            ModelKind::Homography => 4,
            ModelKind::Fundamental => 8,
        }
    }

    /// Size of a sampled subset: minimal size plus two, which yields a
    /// more stable least-squares hypothesis than an exact minimal fit.
    pub fn sample_size(self) -> usize {
        self.minimal_size() + 2
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Homography => "homography",
            ModelKind::Fundamental => "fundamental",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homography" | "h" => Ok(ModelKind::Homography),
            "fundamental" | "f" => Ok(ModelKind::Fundamental),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind `{other}` (expected homography|fundamental)"
            ))),
        }
    }
}

/// A candidate model: parameters plus the subset it was sampled from,
/// and (once scored) its weighting value and inlier noise scale.
///
/// Parameter matrices are kept in a canonical form: unit Frobenius norm
/// with the first non-negligible entry (row-major) positive, so equal
/// models are byte-comparable. Fundamental matrices additionally have
/// their smallest singular value forced to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub kind: ModelKind,
    pub params: Matrix3<f64>,
    /// Indices into the correspondence array this hypothesis was fitted
    /// from, in selection order.
    pub sample: Vec<usize>,
    pub weight: Option<f64>,
    pub scale: Option<f64>,
}

impl Hypothesis {
    /// Fit a hypothesis from the given correspondence indices.
    pub fn fit(kind: ModelKind, corrs: &[Correspondence], sample: Vec<usize>) -> Result<Self> {
        let subset: Vec<Correspondence> = sample.iter().map(|&i| corrs[i]).collect();
        let params = fit_model(kind, &subset)?;
        Ok(Hypothesis { kind, params, sample, weight: None, scale: None })
    }

    /// Construct directly from parameters, canonicalizing them.
    pub fn from_params(kind: ModelKind, params: Matrix3<f64>, sample: Vec<usize>) -> Result<Self> {
        let params = solve::canonicalize(params)?;
        Ok(Hypothesis { kind, params, sample, weight: None, scale: None })
    }
}
