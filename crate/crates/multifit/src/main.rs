//! Command-line interface: fit, segment, synth, eval and bench.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use multifit::error::Error;
use multifit::evaluation::{
    assign_labels_px, fitting_error, generate_scene, ransac_baseline, SceneSpec,
};
use multifit::geometry::ModelKind;
use multifit::io;
use multifit::pipeline::{run_pipeline, FitResult, PipelineConfig, SegmentationInput};
use multifit::superpixel::slic_segment;

#[derive(Parser)]
#[command(
    name = "multifit",
    about = "Deterministic superpixel-guided two-view model fitting",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit model instances to a correspondence file.
    Fit(FitArgs),
    /// Segment an image into superpixels (label CSV + JSON sidecar).
    Segment(SegmentArgs),
    /// Generate a synthetic labeled scene.
    Synth(SynthArgs),
    /// Mislabeling percentage between two label files.
    Eval(EvalArgs),
    /// Compare the deterministic pipeline against seeded RANSAC over a
    /// directory of scenes, emitting a CSV of Std./Avg./Time rows.
    Bench(BenchArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Model kind: homography | fundamental.
    #[arg(long, default_value = "homography")]
    model: String,
    /// Correspondence file (x1 y1 x2 y2 score [gt_label] per line).
    #[arg(long)]
    corrs: PathBuf,
    /// View-1 image (.ppm or .png); segmented with SLIC.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Precomputed superpixel label map (.csv or 16-bit .pgm); bypasses SLIC.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Number of model instances to estimate.
    #[arg(long, default_value_t = 1)]
    structures: usize,
    #[arg(long, default_value_t = multifit::pipeline::DEFAULT_SUPERPIXELS)]
    superpixels: usize,
    #[arg(long, default_value_t = multifit::superpixel::DEFAULT_COMPACTNESS)]
    compactness: f64,
    /// Support size as a fraction of the correspondence count.
    #[arg(long = "support-frac", default_value_t = multifit::quality::DEFAULT_SUPPORT_FRACTION)]
    support_frac: f64,
    #[arg(long, default_value_t = multifit::quality::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = multifit::quality::DEFAULT_T_MAX)]
    tmax: usize,
    /// Inlier band half-width in estimated scales.
    #[arg(long = "inlier-t", default_value_t = multifit::pipeline::DEFAULT_INLIER_THRESHOLD)]
    inlier_t: f64,
    /// Worker threads (0 = auto).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Result JSON path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value_t = multifit::pipeline::DEFAULT_SUPERPIXELS)]
    superpixels: usize,
    #[arg(long, default_value_t = multifit::superpixel::DEFAULT_COMPACTNESS)]
    compactness: f64,
    /// Output prefix; writes <prefix>.csv and <prefix>.json.
    #[arg(long, default_value = "segmentation")]
    output: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "homography")]
    model: String,
    #[arg(long, default_value_t = 2)]
    structures: usize,
    /// Inliers per structure.
    #[arg(long, default_value_t = 60)]
    inliers: usize,
    #[arg(long = "outlier-frac", default_value_t = 0.5)]
    outlier_frac: f64,
    /// Per-coordinate noise sigma in pixels.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 480)]
    width: usize,
    #[arg(long, default_value_t = 360)]
    height: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; writes corrs.txt, image.ppm, gt.labels, meta.json.
    #[arg(long = "out-dir", default_value = "scene")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted label file (one label per line).
    pred: PathBuf,
    /// Ground-truth label file.
    gt: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory whose subdirectories are scenes produced by `synth`.
    #[arg(long)]
    dir: PathBuf,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long = "ransac-iters", default_value_t = 500)]
    ransac_iters: usize,
    /// Number of RANSAC seeds.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    #[arg(long = "seed-base", default_value_t = 0)]
    seed_base: u64,
    /// Absolute RANSAC inlier threshold in pixels.
    #[arg(long = "ransac-threshold", default_value_t = 2.5)]
    ransac_threshold: f64,
    /// Repeated runs of the deterministic pipeline per scene.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Segment(args) => cmd_segment(args).map(|()| 0),
        Command::Synth(args) => cmd_synth(args).map(|()| 0),
        Command::Eval(args) => cmd_eval(args).map(|()| 0),
        Command::Bench(args) => cmd_bench(args).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::NoHypotheses(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_fit(args: FitArgs) -> Result<u8, Error> {
    let kind = ModelKind::from_str(&args.model)?;
    let corrs = io::read_correspondences(&args.corrs)?;
    let input = match (&args.image, &args.labels) {
        (Some(img), None) => SegmentationInput::Image(io::load_image(img)?),
        (None, Some(map)) => SegmentationInput::Labels(io::read_labels(map)?),
        _ => {
            return Err(Error::InvalidArgument(
                "exactly one of --image or --labels is required".into(),
            ))
        }
    };
    let cfg = PipelineConfig {
        kind,
        structures: args.structures,
        superpixels: args.superpixels,
        compactness: args.compactness,
        support_fraction: args.support_frac,
        epsilon: args.epsilon,
        t_max: args.tmax,
        inlier_threshold: args.inlier_t,
        threads: args.threads,
    };
    let result = run_pipeline(&cfg, &corrs, input)?;
    write_or_print(args.output.as_deref(), &result.to_json())?;
    Ok(if result.deficit { 2 } else { 0 })
}

fn cmd_segment(args: SegmentArgs) -> Result<(), Error> {
    let image = io::load_image(&args.image)?;
    let map = slic_segment(&image, args.superpixels, args.compactness)?;
    let csv_path = args.output.with_extension("csv");
    let json_path = args.output.with_extension("json");
    io::write_label_csv(&csv_path, &map)?;
    let sidecar = format!(
        "{{\"compactness\":{},\"m_actual\":{},\"m_requested\":{},\"s\":{}}}\n",
        io::fmt_f64(args.compactness),
        map.label_count(),
        map.m_requested,
        io::fmt_f64(map.s),
    );
    std::fs::write(&json_path, sidecar)
        .map_err(|source| Error::Io { path: json_path.clone(), source })?;
    eprintln!(
        "segmented {} into {} superpixels -> {}, {}",
        args.image.display(),
        map.label_count(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let spec = SceneSpec {
        structures: args.structures,
        kind: ModelKind::from_str(&args.model)?,
        inliers_per_structure: args.inliers,
        outlier_fraction: args.outlier_frac,
        noise_sigma: args.noise,
        width: args.width,
        height: args.height,
        seed: args.seed,
    };
    let scene = generate_scene(&spec)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|source| Error::Io { path: args.out_dir.clone(), source })?;
    io::write_correspondences(&args.out_dir.join("corrs.txt"), &scene.correspondences)?;
    io::write_ppm(&args.out_dir.join("image.ppm"), &scene.image)?;
    io::write_labels(&args.out_dir.join("gt.labels"), &scene.gt_labels())?;
    let meta = format!(
        "{{\"height\":{},\"inliers_per_structure\":{},\"kind\":{},\"noise_sigma\":{},\"outlier_fraction\":{},\"seed\":{},\"structures\":{},\"width\":{}}}\n",
        spec.height,
        spec.inliers_per_structure,
        io::json_string(spec.kind.name()),
        io::fmt_f64(spec.noise_sigma),
        io::fmt_f64(spec.outlier_fraction),
        spec.seed,
        spec.structures,
        spec.width,
    );
    let meta_path = args.out_dir.join("meta.json");
    std::fs::write(&meta_path, meta).map_err(|source| Error::Io { path: meta_path, source })?;
    eprintln!(
        "scene with {} correspondences written to {}",
        scene.correspondences.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let pred = io::read_label_file(&args.pred)?;
    let gt = io::read_label_file(&args.gt)?;
    println!("{:.2}", fitting_error(&pred, &gt)?);
    Ok(())
}

struct BenchRow {
    scene: String,
    method: &'static str,
    std: f64,
    avg: f64,
    time: f64,
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let mut scene_dirs: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .map_err(|source| Error::Io { path: args.dir.clone(), source })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("meta.json").is_file())
        .collect();
    scene_dirs.sort();
    if scene_dirs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no scenes (subdirectories with meta.json) under {}",
            args.dir.display()
        )));
    }

    let mut rows = Vec::new();
    for dir in &scene_dirs {
        let name = dir.file_name().unwrap_or_default().to_string_lossy().to_string();
        let meta_path = dir.join("meta.json");
        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(&meta_path)
                .map_err(|source| Error::Io { path: meta_path.clone(), source })?,
        )
        .map_err(|e| Error::Parse { path: meta_path.clone(), line: 0, msg: e.to_string() })?;
        let kind = ModelKind::from_str(meta["kind"].as_str().unwrap_or("homography"))?;
        let structures = meta["structures"].as_u64().unwrap_or(1) as usize;

        let corrs = io::read_correspondences(&dir.join("corrs.txt"))?;
        let image = io::load_image(&dir.join("image.ppm"))?;
        let gt = io::read_label_file(&dir.join("gt.labels"))?;

        // Deterministic pipeline, repeated to expose (zero) variance.
        let cfg = PipelineConfig { threads: args.threads, ..PipelineConfig::new(kind, structures) };
        let mut errors = Vec::new();
        let mut times = Vec::new();
        for _ in 0..args.repeats.max(1) {
            let t = Instant::now();
            let result: FitResult =
                run_pipeline(&cfg, &corrs, SegmentationInput::Image(image.clone()))?;
            times.push(t.elapsed().as_secs_f64());
            errors.push(fitting_error(&result.labels, &gt)?);
        }
        rows.push(BenchRow {
            scene: name.clone(),
            method: "SDF",
            std: sample_std(&errors),
            avg: errors.iter().sum::<f64>() / errors.len() as f64,
            time: times.iter().sum::<f64>() / times.len() as f64,
        });

        let mut errors = Vec::new();
        let mut times = Vec::new();
        for i in 0..args.seeds {
            let t = Instant::now();
            let models = ransac_baseline(
                &corrs,
                kind,
                structures,
                args.ransac_iters,
                args.ransac_threshold,
                args.seed_base + i,
            )?;
            let labels = assign_labels_px(&models, &corrs, args.ransac_threshold)?;
            times.push(t.elapsed().as_secs_f64());
            errors.push(fitting_error(&labels, &gt)?);
        }
        rows.push(BenchRow {
            scene: name,
            method: "RANSAC",
            std: sample_std(&errors),
            avg: errors.iter().sum::<f64>() / errors.len() as f64,
            time: times.iter().sum::<f64>() / times.len() as f64,
        });
    }

    let mut csv = String::from("scene,method,std,avg,time\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.4}\n",
            r.scene, r.method, r.std, r.avg, r.time
        ));
    }
    write_or_print(args.output.as_deref(), &csv)
}
