//! Normalized DLT / eight-point solvers on top of a shared
//! smallest-eigenvector least-squares core.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

use super::{Correspondence, ModelKind, Point2};

/// Ratio of the second-smallest to largest design-matrix singular value
/// below which the system is treated as rank-deficient.
const RANK_TOL: f64 = 1e-8;

/// Similarity transform that moves `points` to centroid (0,0) with mean
/// distance sqrt(2) from the origin. Returns the transform and the
/// normalized points.
pub fn hartley_normalize(points: &[Point2]) -> Result<(Matrix3<f64>, Vec<Point2>)> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "normalization needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if mean_dist <= f64::EPSILON {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    let transform = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let normalized = points
        .iter()
        .map(|p| Point2::new(s * (p.x - cx), s * (p.y - cy)))
        .collect();
    Ok((transform, normalized))
}

/// Solve `A h = 0` in the least-squares sense from the accumulated normal
/// matrix `AᵀA`, returning the unit eigenvector of the smallest eigenvalue.
///
/// Rank deficiency (a nullspace of dimension two or more, meaning a
/// non-unique solution) is detected from the singular-value spectrum.
fn smallest_eigenvector(ata: SMatrix<f64, 9, 9>) -> Result<SVector<f64, 9>> {
    let eig = ata.symmetric_eigen();
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // Eigenvalues of AᵀA are squared singular values of A.
    let sv = |i: usize| eig.eigenvalues[order[i]].max(0.0).sqrt();
    let (second_smallest, largest) = (sv(1), sv(8));
    if largest <= 0.0 || second_smallest <= RANK_TOL * largest {
        return Err(Error::DegenerateInput(
            "rank-deficient design matrix (non-unique solution)".into(),
        ));
    }
    Ok(eig.eigenvectors.column(order[0]).into_owned())
}

/// Scale to unit Frobenius norm and fix the sign so the first
/// non-negligible entry in row-major order is positive.
pub(super) fn canonicalize(m: Matrix3<f64>) -> Result<Matrix3<f64>> {
    let norm = m.norm();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::DegenerateInput("zero or non-finite model matrix".into()));
    }
    let mut out = m / norm;
    for r in 0..3 {
        for c in 0..3 {
            let e = out[(r, c)];
            if e.abs() > 1e-12 {
                if e < 0.0 {
                    out = -out;
                }
                return Ok(out);
            }
        }
    }
    Ok(out)
}

fn check_subset(subset: &[Correspondence], kind: ModelKind) -> Result<()> {
    let p = kind.minimal_size();
    if subset.len() < p {
        return Err(Error::InvalidArgument(format!(
            "{} fit needs at least {p} correspondences, got {}",
            kind.name(),
            subset.len()
        )));
    }
    for c in subset {
        if !c.p1.is_finite() || !c.p2.is_finite() {
            return Err(Error::InvalidArgument("non-finite correspondence".into()));
        }
    }
    Ok(())
}

/// Estimate a homography from >= 4 correspondences (normalized DLT;
/// least squares via the smallest singular vector when over-determined).
pub fn fit_homography(subset: &[Correspondence]) -> Result<Matrix3<f64>> {
    check_subset(subset, ModelKind::Homography)?;
    let p1: Vec<Point2> = subset.iter().map(|c| c.p1).collect();
    let p2: Vec<Point2> = subset.iter().map(|c| c.p2).collect();
    let (t1, n1) = hartley_normalize(&p1)?;
    let (t2, n2) = hartley_normalize(&p2)?;

    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    let mut add_row = |row: [f64; 9]| {
        for i in 0..9 {
            for j in i..9 {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    };
    for (a, b) in n1.iter().zip(n2.iter()) {
        let (x, y) = (a.x, a.y);
        let (u, v) = (b.x, b.y);
        add_row([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
        add_row([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u]);
    }
    for i in 0..9 {
        for j in 0..i {
            ata[(i, j)] = ata[(j, i)];
        }
    }

    let h = smallest_eigenvector(ata)?;
    let h_norm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t2_inv = t2
        .try_inverse()
        .ok_or_else(|| Error::DegenerateInput("non-invertible normalization".into()))?;
    canonicalize(t2_inv * h_norm * t1)
}

/// Estimate a fundamental matrix from >= 8 correspondences (normalized
/// eight-point with rank-2 projection).
pub fn fit_fundamental(subset: &[Correspondence]) -> Result<Matrix3<f64>> {
    check_subset(subset, ModelKind::Fundamental)?;
    let p1: Vec<Point2> = subset.iter().map(|c| c.p1).collect();
    let p2: Vec<Point2> = subset.iter().map(|c| c.p2).collect();
    let (t1, n1) = hartley_normalize(&p1)?;
    let (t2, n2) = hartley_normalize(&p2)?;

    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (a, b) in n1.iter().zip(n2.iter()) {
        let (x, y) = (a.x, a.y);
        let (u, v) = (b.x, b.y);
        let row = [u * x, u * y, u, v * x, v * y, v, x, y, 1.0];
        for i in 0..9 {
            for j in i..9 {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..9 {
        for j in 0..i {
            ata[(i, j)] = ata[(j, i)];
        }
    }

    let f = smallest_eigenvector(ata)?;
    let f_norm = Matrix3::new(f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]);
    let f_rank2 = project_rank2(f_norm)?;
    canonicalize(t2.transpose() * f_rank2 * t1)
}

/// Zero the smallest singular value so the matrix has rank exactly 2.
fn project_rank2(m: Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateInput("svd of candidate matrix failed".into())),
    };
    let mut s = svd.singular_values;
    let min_idx = (0..3)
        .min_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    s[min_idx] = 0.0;
    Ok(u * Matrix3::from_diagonal(&Vector3::new(s[0], s[1], s[2])) * v_t)
}

/// Dispatch on the model kind.
pub fn fit_model(kind: ModelKind, subset: &[Correspondence]) -> Result<Matrix3<f64>> {
    match kind {
        ModelKind::Homography => fit_homography(subset),
        ModelKind::Fundamental => fit_fundamental(subset),
    }
}
