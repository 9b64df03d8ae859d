//! End-to-end orchestration: segmentation, deterministic sampling,
//! hypothesis updating, model selection and labeling, with per-stage
//! timings and a byte-stable result serialization.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::evaluation::{assign_labels, fitting_error, Labeling};
use crate::geometry::{Correspondence, Hypothesis, ModelKind};
use crate::grouping::generate_initial_hypotheses;
use crate::io::{fmt_f64, json_string};
use crate::quality::{mhu_update_all, MhuConfig};
use crate::selection::select_models;
use crate::superpixel::{slic_segment, RgbImage, SuperpixelMap, DEFAULT_COMPACTNESS};

/// Pipeline parameters. Defaults follow the recommended operating
/// regime: 150 superpixels, support 10% of n, epsilon 0.8, at most 50
/// update sweeps, inlier band 2.5 scales.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub kind: ModelKind,
    pub structures: usize,
    pub superpixels: usize,
    pub compactness: f64,
    pub support_fraction: f64,
    pub epsilon: f64,
    pub t_max: usize,
    pub inlier_threshold: f64,
    /// Worker threads for parallel stages; 0 picks the rayon default.
    pub threads: usize,
}

pub const DEFAULT_SUPERPIXELS: usize = 150;
pub const DEFAULT_INLIER_THRESHOLD: f64 = 2.5;

impl PipelineConfig {
    pub fn new(kind: ModelKind, structures: usize) -> Self {
        PipelineConfig {
            kind,
            structures,
            superpixels: DEFAULT_SUPERPIXELS,
            compactness: DEFAULT_COMPACTNESS,
            support_fraction: crate::quality::DEFAULT_SUPPORT_FRACTION,
            epsilon: crate::quality::DEFAULT_EPSILON,
            t_max: crate::quality::DEFAULT_T_MAX,
            inlier_threshold: DEFAULT_INLIER_THRESHOLD,
            threads: 0,
        }
    }
}

/// View-1 segmentation input: an image to segment, or a precomputed map.
#[derive(Debug, Clone)]
pub enum SegmentationInput {
    Image(RgbImage),
    Labels(SuperpixelMap),
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub segment: f64,
    pub group: f64,
    pub update: f64,
    pub select: f64,
    pub label: f64,
    pub evaluate: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub config: PipelineConfig,
    pub models: Vec<Hypothesis>,
    pub inlier_sets: Vec<Vec<usize>>,
    pub labels: Labeling,
    /// Mislabeling percentage, present when every correspondence carries
    /// a ground-truth label.
    pub error: Option<f64>,
    pub deficit: bool,
    pub timings: StageTimings,
}

/// Run the complete pipeline on `corrs` with view-1 segmentation from
/// `input`. All stages are deterministic for fixed inputs and config,
/// independent of the thread count.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    corrs: &[Correspondence],
    input: SegmentationInput,
) -> Result<FitResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run_pipeline_inner(cfg, corrs, input))
}

fn run_pipeline_inner(
    cfg: &PipelineConfig,
    corrs: &[Correspondence],
    input: SegmentationInput,
) -> Result<FitResult> {
    if corrs.is_empty() {
        return Err(Error::InvalidArgument("no correspondences".into()));
    }
    let t_total = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let map = match input {
        SegmentationInput::Image(img) => slic_segment(&img, cfg.superpixels, cfg.compactness)
            .map_err(|e| e.in_stage("segment"))?,
        SegmentationInput::Labels(map) => map,
    };
    timings.segment = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let initial = generate_initial_hypotheses(corrs, &map, cfg.kind)
        .map_err(|e| e.in_stage("group"))?;
    timings.group = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut mhu = MhuConfig::with_support_fraction(cfg.kind, corrs.len(), cfg.support_fraction)
        .map_err(|e| e.in_stage("update"))?;
    mhu.epsilon = cfg.epsilon;
    mhu.t_max = cfg.t_max;
    mhu.scale_quantile = mhu.support_size;
    let updated = mhu_update_all(&initial, corrs, &mhu).map_err(|e| e.in_stage("update"))?;
    timings.update = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let selection = select_models(&updated, corrs, cfg.structures, cfg.inlier_threshold)
        .map_err(|e| e.in_stage("select"))?;
    timings.select = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let labels = assign_labels(&selection.selected, corrs, cfg.inlier_threshold)
        .map_err(|e| e.in_stage("label"))?;
    timings.label = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let error = if corrs.iter().all(|c| c.gt_label.is_some()) {
        let gt: Vec<usize> = corrs.iter().map(|c| c.gt_label.unwrap()).collect();
        Some(fitting_error(&labels, &gt).map_err(|e| e.in_stage("evaluate"))?)
    } else {
        None
    };
    timings.evaluate = t.elapsed().as_secs_f64();
    timings.total = t_total.elapsed().as_secs_f64();

    Ok(FitResult {
        config: cfg.clone(),
        models: selection.selected,
        inlier_sets: selection.inlier_sets,
        labels,
        error,
        deficit: selection.deficit,
        timings,
    })
}

fn json_usize_list(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

fn json_f64_list(xs: impl Iterator<Item = f64>) -> String {
    let items: Vec<String> = xs.map(fmt_f64).collect();
    format!("[{}]", items.join(","))
}

impl FitResult {
    /// Serialize to JSON with sorted keys and fixed float formatting.
    /// Everything except the `"timings"` line is a deterministic function
    /// of the inputs; that line is last and self-contained so consumers
    /// can strip it for byte comparison.
    pub fn to_json(&self) -> String {
        let c = &self.config;
        let config = format!(
            "{{\"compactness\":{},\"epsilon\":{},\"inlier_threshold\":{},\"kind\":{},\"structures\":{},\"superpixels\":{},\"support_fraction\":{},\"t_max\":{},\"threads\":{}}}",
            fmt_f64(c.compactness),
            fmt_f64(c.epsilon),
            fmt_f64(c.inlier_threshold),
            json_string(c.kind.name()),
            c.structures,
            c.superpixels,
            fmt_f64(c.support_fraction),
            c.t_max,
            c.threads,
        );
        let mut models = String::new();
        for (i, (m, inliers)) in self.models.iter().zip(self.inlier_sets.iter()).enumerate() {
            if i > 0 {
                models.push_str(",\n");
            }
            models.push_str(&format!(
                "    {{\"inliers\":{},\"kind\":{},\"params\":{},\"sample\":{},\"scale\":{},\"weight\":{}}}",
                json_usize_list(inliers),
                json_string(m.kind.name()),
                json_f64_list(m.params.transpose().iter().copied()),
                json_usize_list(&m.sample),
                fmt_f64(m.scale.unwrap_or(f64::NAN)),
                fmt_f64(m.weight.unwrap_or(f64::NAN)),
            ));
        }
        let t = &self.timings;
        let timings = format!(
            "{{\"evaluate\":{},\"group\":{},\"label\":{},\"segment\":{},\"select\":{},\"total\":{},\"update\":{}}}",
            fmt_f64(t.evaluate),
            fmt_f64(t.group),
            fmt_f64(t.label),
            fmt_f64(t.segment),
            fmt_f64(t.select),
            fmt_f64(t.total),
            fmt_f64(t.update),
        );
        format!(
            "{{\n  \"config\": {config},\n  \"deficit\": {},\n  \"error\": {},\n  \"labels\": {},\n  \"models\": [\n{models}\n  ],\n  \"timings\": {timings}\n}}\n",
            self.deficit,
            self.error.map(fmt_f64).unwrap_or_else(|| "null".into()),
            json_usize_list(&self.labels),
        )
    }

    /// The result JSON with the `"timings"` line removed; byte-identical
    /// across reruns and thread counts.
    pub fn to_json_without_timings(&self) -> String {
        self.to_json()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timings\""))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }
}
