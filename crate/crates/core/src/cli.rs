//! The `glasstrack` command line: planning, rendering, the attribute study,
//! evaluation, batch mixing and background conversion.
//!
//! Exit codes: 0 on success, 1 when some sequences failed to render, 2 for
//! usage and input errors.

use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{read_json, Error, Result};
use crate::evalkit;
use crate::render::{self, MaskMode, RenderSettings};
use crate::rng::seeded;
use crate::seqplan::{
    build_attribute_study_plan, build_dataset_plan, mix_batches, BackgroundCorpus,
    BackgroundEntry, DatasetPlan, GenerationParams, ObjectCatalog, Resolution,
    SampleIndex,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "GLASSTRACK_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "glasstrack", version, about = "Transparent-object tracking sequence generator and OPE toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset plan from a background corpus and object catalog.
    Plan(PlanArgs),
    /// Render the sequences of a plan.
    Generate(GenerateArgs),
    /// Build and render the attribute difficulty study.
    Study(StudyArgs),
    /// Score tracker results against ground truth.
    Eval(EvalArgs),
    /// Mix transparent and opaque sample indices into training batches.
    Mix(MixArgs),
    /// Convert background videos stored as PNG/JPEG/BMP frames into a corpus.
    ConvertBg(ConvertBgArgs),
}

/// Options shared by every command that reads a JSON run config.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArg {
    /// JSON run config; command-line flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sequences: Option<usize>,
    pub frames: Option<usize>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub vfov: Option<f64>,
    pub spp: Option<u32>,
    pub workers: Option<usize>,
    pub blur_probability: Option<f64>,
    pub occlusion_probability: Option<f64>,
    pub distractor_probability: Option<f64>,
    pub modal_masks: Option<bool>,
}

impl RunConfig {
    fn load(arg: &ConfigArg) -> Result<RunConfig> {
        match &arg.config {
            Some(path) => read_json(path),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplingArgs {
    /// Frames per sequence [default: 51]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Frame width in pixels [default: 320]
    #[arg(long)]
    pub width: Option<u32>,
    /// Frame height in pixels [default: 180]
    #[arg(long)]
    pub height: Option<u32>,
    /// Vertical field of view in degrees [default: 50]
    #[arg(long)]
    pub vfov: Option<f64>,
    #[arg(long)]
    pub blur_probability: Option<f64>,
    #[arg(long)]
    pub occlusion_probability: Option<f64>,
    #[arg(long)]
    pub distractor_probability: Option<f64>,
}

impl SamplingArgs {
    fn params(&self, cfg: &RunConfig) -> Result<GenerationParams> {
        let defaults = GenerationParams::default();
        let resolution = Resolution {
            width: self.width.or(cfg.width).unwrap_or(defaults.resolution.width),
            height: self.height.or(cfg.height).unwrap_or(defaults.resolution.height),
        };
        let mut params = GenerationParams {
            vfov_deg: self.vfov.or(cfg.vfov).unwrap_or(defaults.vfov_deg),
            n_frames: self.frames.or(cfg.frames).unwrap_or(defaults.n_frames),
            blur_probability: self
                .blur_probability
                .or(cfg.blur_probability)
                .unwrap_or(defaults.blur_probability),
            occlusion_probability: self
                .occlusion_probability
                .or(cfg.occlusion_probability)
                .unwrap_or(defaults.occlusion_probability),
            distractor_probability: self
                .distractor_probability
                .or(cfg.distractor_probability)
                .unwrap_or(defaults.distractor_probability),
            ..defaults
        };
        params = params.with_resolution(resolution);
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RenderArgs {
    /// Samples per pixel [default: 4]
    #[arg(long)]
    pub spp: Option<u32>,
    /// Worker threads, 0 for one per core
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Clear mask pixels hidden behind occluder stripes
    #[arg(long)]
    pub modal_masks: bool,
}

impl RenderArgs {
    fn settings(&self, cfg: &RunConfig) -> Result<RenderSettings> {
        let spp = self.spp.or(cfg.spp).unwrap_or(RenderSettings::default().spp);
        if spp == 0 {
            return Err(Error::InvalidArgument("--spp must be at least 1".into()));
        }
        let modal = self.modal_masks || cfg.modal_masks.unwrap_or(false);
        Ok(RenderSettings {
            spp,
            mask_mode: if modal { MaskMode::Modal } else { MaskMode::Amodal },
            ..RenderSettings::default()
        })
    }

    fn workers(&self, cfg: &RunConfig) -> usize {
        self.workers.or(cfg.workers).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Background corpus manifest (corpus.json)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Object catalog manifest (catalog.json)
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Global seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sequences to plan
    #[arg(long)]
    pub sequences: Option<usize>,
    /// Output plan file [default: plan.json]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Plan file written by `plan`
    pub plan: PathBuf,
    /// Output dataset directory [default: dataset]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Half-open range of sequence ordinals, e.g. `0..5`
    #[arg(long, value_parser = parse_range)]
    pub range: Option<Range<usize>>,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; receives `study_plan.json` and one directory per
    /// sequence [default: study]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the plan without rendering
    #[arg(long)]
    pub plan_only: bool,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub render: RenderArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Results tree `<tracker>/<seq_id>.txt`
    #[arg(long)]
    pub results: PathBuf,
    /// Ground-truth tree `<seq_id>/groundtruth.txt`
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory for report.json and report.csv [default: .]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Compute the attribute difficulty table of a study tree
    #[arg(long)]
    pub difficulty: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MixArgs {
    /// Transparent sample index, corpus manifest or plan JSON
    #[arg(long)]
    pub transparent: PathBuf,
    /// Opaque sample index, corpus manifest or plan JSON
    #[arg(long)]
    pub opaque: PathBuf,
    #[arg(long)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSON-lines file
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertBgArgs {
    /// Directory of videos, one subdirectory of image frames per video
    #[arg(long)]
    pub input: PathBuf,
    /// Output corpus directory
    #[arg(long, short)]
    pub out: PathBuf,
    /// Resize frames to WIDTHxHEIGHT
    #[arg(long, value_parser = parse_size)]
    pub size: Option<(u32, u32)>,
}

fn parse_range(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let start = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let end = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if start > end {
        return Err(format!("empty range {s:?}"));
    }
    Ok(start..end)
}

fn parse_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w: u32 = w.parse().map_err(|_| format!("bad width {w:?}"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn require(flag: Option<PathBuf>, cfg: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| cfg.cloned())
        .ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Plan(a) => cmd_plan(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Study(a) => cmd_study(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Mix(a) => cmd_mix(a),
        Command::ConvertBg(a) => cmd_convert_bg(a),
    }
}

fn load_manifests(corpus: &Path, catalog: &Path) -> Result<(BackgroundCorpus, ObjectCatalog)> {
    Ok((BackgroundCorpus::load(corpus)?, ObjectCatalog::load(catalog)?))
}

pub fn cmd_plan(a: PlanArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let corpus_path = require(a.corpus, cfg.corpus.as_ref(), "corpus")?;
    let catalog_path = require(a.catalog, cfg.catalog.as_ref(), "catalog")?;
    let (corpus, catalog) = load_manifests(&corpus_path, &catalog_path)?;
    let params = a.sampling.params(&cfg)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let n = a
        .sequences
        .or(cfg.sequences)
        .ok_or_else(|| Error::InvalidArgument("--sequences is required".into()))?;
    let plan = build_dataset_plan(seed, n, &corpus, &catalog, &params)?;
    let out = a.out.or(cfg.output).unwrap_or_else(|| PathBuf::from("plan.json"));
    plan.save(&out)?;
    println!(
        "planned {} sequences, {} frames in total -> {}",
        plan.sequences.len(),
        plan.total_frames(),
        out.display()
    );
    Ok(EXIT_OK)
}

/// Counts of a batch render.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenderSummary {
    pub rendered: Vec<String>,
    pub skipped: Vec<String>,
    pub failed: Vec<(String, String)>,
}

impl RenderSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }

    fn print(&self) {
        for (id, err) in &self.failed {
            eprintln!("failed {id}: {err}");
        }
        println!(
            "rendered {}, skipped {}, failed {}",
            self.rendered.len(),
            self.skipped.len(),
            self.failed.len()
        );
    }
}

/// Renders `plan.sequences[range]` under `out`, skipping finished ones.
/// Failures are collected per sequence instead of aborting the batch.
pub fn render_plan(
    plan: &DatasetPlan,
    range: Range<usize>,
    out: &Path,
    settings: &RenderSettings,
    workers: usize,
) -> Result<RenderSummary> {
    let corpus_path = plan.manifest.corpus.path.as_ref().ok_or_else(|| {
        Error::InvalidArgument("plan does not record its corpus manifest path".into())
    })?;
    let catalog_path = plan.manifest.catalog.path.as_ref().ok_or_else(|| {
        Error::InvalidArgument("plan does not record its catalog manifest path".into())
    })?;
    let (corpus, catalog) = load_manifests(corpus_path, catalog_path)?;
    if range.end > plan.sequences.len() {
        return Err(Error::InvalidArgument(format!(
            "range {range:?} exceeds the plan's {} sequences",
            plan.sequences.len()
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let configs = &plan.sequences[range];
    let outcomes: Vec<(String, std::result::Result<bool, String>)> = render::with_workers(workers, || {
        configs
            .par_iter()
            .map(|config| {
                let dir = out.join(&config.id);
                if render::is_complete(&dir, config, settings) {
                    return (config.id.clone(), Ok(false));
                }
                let result = render::render_sequence(config, &corpus, &catalog, &dir, settings)
                    .map(|_| true)
                    .map_err(|e| e.to_string());
                (config.id.clone(), result)
            })
            .collect()
    })?;
    let mut summary = RenderSummary::default();
    for (id, outcome) in outcomes {
        match outcome {
            Ok(true) => {
                info!("rendered {id}");
                summary.rendered.push(id)
            }
            Ok(false) => summary.skipped.push(id),
            Err(e) => summary.failed.push((id, e)),
        }
    }
    Ok(summary)
}

pub fn cmd_generate(a: GenerateArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let plan = DatasetPlan::load(&a.plan)?;
    let settings = a.render.settings(&cfg)?;
    let out = a.out.or(cfg.output.clone()).unwrap_or_else(|| PathBuf::from("dataset"));
    let range = a.range.unwrap_or(0..plan.sequences.len());
    let summary = render_plan(&plan, range, &out, &settings, a.render.workers(&cfg))?;
    summary.print();
    Ok(summary.exit_code())
}

pub const STUDY_PLAN_FILE: &str = "study_plan.json";

pub fn cmd_study(a: StudyArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let corpus_path = require(a.corpus, cfg.corpus.as_ref(), "corpus")?;
    let catalog_path = require(a.catalog, cfg.catalog.as_ref(), "catalog")?;
    let (corpus, catalog) = load_manifests(&corpus_path, &catalog_path)?;
    let params = a.sampling.params(&cfg)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let plan = build_attribute_study_plan(seed, &corpus, &catalog, &params)?;
    let out = a.out.or(cfg.output.clone()).unwrap_or_else(|| PathBuf::from("study"));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let plan_path = out.join(STUDY_PLAN_FILE);
    plan.save(&plan_path)?;
    println!(
        "study plan: {} sequences, {} frames -> {}",
        plan.sequences.len(),
        plan.total_frames(),
        plan_path.display()
    );
    if a.plan_only {
        return Ok(EXIT_OK);
    }
    let settings = a.render.settings(&cfg)?;
    let summary = render_plan(
        &plan,
        0..plan.sequences.len(),
        &out,
        &settings,
        a.render.workers(&cfg),
    )?;
    summary.print();
    Ok(summary.exit_code())
}

pub fn cmd_eval(a: EvalArgs) -> Result<i32> {
    let report = if a.difficulty {
        evalkit::attribute_difficulty(&a.results, &a.gt)?
    } else {
        evalkit::ope_evaluate(&a.results, &a.gt)?
    };
    for w in &report.warnings {
        warn!("{w}");
    }
    let out = a.out.unwrap_or_else(|| PathBuf::from("."));
    evalkit::write_report(&report, &out)?;
    for t in &report.trackers {
        println!(
            "{}: AUC {:.4}, precision@20 {:.4} over {} sequences",
            t.tracker, t.overall.success.auc, t.overall.precision.at_20, t.overall.sequences
        );
    }
    if let Some(table) = &report.difficulty {
        for c in &table.cells {
            println!("{} level {}: mean IoU {:.4}", c.attribute, c.level, c.mean_iou);
        }
    }
    Ok(EXIT_OK)
}

/// Loads a sample index from a `SampleIndex`, corpus manifest or plan file.
pub fn load_sample_index(path: &Path) -> Result<SampleIndex> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum AnyIndex {
        Plan(Box<DatasetPlan>),
        Index(SampleIndex),
    }
    Ok(match read_json::<AnyIndex>(path)? {
        AnyIndex::Plan(plan) => SampleIndex::from_plan(&plan),
        AnyIndex::Index(index) => index,
    })
}

pub fn cmd_mix(a: MixArgs) -> Result<i32> {
    if a.batch_size == 0 {
        return Err(Error::InvalidArgument("--batch-size must be at least 1".into()));
    }
    let transparent = load_sample_index(&a.transparent)?;
    let opaque = load_sample_index(&a.opaque)?;
    let batch = mix_batches(&transparent, &opaque, a.batch_size, &mut seeded(a.seed))?;
    std::fs::write(&a.out, batch.to_json_lines()).map_err(|e| Error::io(&a.out, e))?;
    println!(
        "{} entries, transparent fraction {:.4} -> {}",
        batch.entries.len(),
        batch.transparent_fraction(),
        a.out.display()
    );
    Ok(EXIT_OK)
}

const IMAGE_EXTENSIONS: [&str; 5] = ["png", "jpg", "jpeg", "bmp", "ppm"];

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn convert_frame(src: &Path, dst: &Path, size: Option<(u32, u32)>) -> Result<()> {
    let img = image::open(src).map_err(|e| Error::Image {
        path: src.to_path_buf(),
        message: e.to_string(),
    })?;
    let img = match size {
        Some((w, h)) => img.resize_exact(w, h, image::imageops::FilterType::Triangle),
        None => img,
    };
    let rgb = img.to_rgb8();
    let out = crate::pnm::RgbImage {
        width: rgb.width(),
        height: rgb.height(),
        data: rgb.into_raw(),
    };
    crate::pnm::write_ppm(dst, &out)
}

pub fn cmd_convert_bg(a: ConvertBgArgs) -> Result<i32> {
    let mut videos: Vec<PathBuf> = std::fs::read_dir(&a.input)
        .map_err(|e| Error::io(&a.input, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    videos.sort();
    if videos.is_empty() {
        videos.push(a.input.clone());
    }
    let mut sequences = Vec::new();
    for video in &videos {
        let frames = image_files(video)?;
        if frames.is_empty() {
            warn!("{}: no image frames, skipped", video.display());
            continue;
        }
        let id = video
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bg".into());
        let dir = a.out.join(&id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        frames
            .par_iter()
            .enumerate()
            .try_for_each(|(k, src)| convert_frame(src, &dir.join(format!("{k:06}.ppm")), a.size))?;
        sequences.push(BackgroundEntry {
            id: id.clone(),
            path: PathBuf::from(&id),
            frames: frames.len(),
        });
    }
    if sequences.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no image frames found under {}",
            a.input.display()
        )));
    }
    let corpus = BackgroundCorpus {
        version: "converted".into(),
        sequences,
        root: a.out.clone(),
        source: None,
    };
    let manifest = a.out.join("corpus.json");
    corpus.save(&manifest)?;
    println!("{} background videos -> {}", corpus.len(), manifest.display());
    Ok(EXIT_OK)
}
