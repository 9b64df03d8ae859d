//! Deterministic superpixel-guided two-view model fitting.
//!
//! Estimates one or more geometric relations (homographies or fundamental
//! matrices) between two views from scored keypoint correspondences,
//! without any random sampling:
//!
//! 1. view 1 is over-segmented into superpixels ([`superpixel`]);
//! 2. correspondences are grouped by superpixel support, neighboring
//!    groups are combined within a bounded region, and each group's
//!    best-scored members seed an initial hypothesis ([`grouping`]);
//! 3. each hypothesis is iteratively re-fitted from the tail of its
//!    top-ranked residual window and scored with a kernel-density weight
//!    ([`quality`]);
//! 4. model instances are selected by repeatedly taking the
//!    highest-weight hypothesis and discarding hypotheses whose sampled
//!    subsets intersect its inlier set ([`selection`]).
//!
//! [`evaluation`] provides the mislabeling-rate metric, a seeded RANSAC
//! baseline and a synthetic scene generator; [`pipeline`] ties the stages
//! together behind the CLI.

pub mod diag;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod grouping;
pub mod io;
pub mod pipeline;
pub mod quality;
pub mod selection;
pub mod superpixel;

pub use error::{Error, Result};
