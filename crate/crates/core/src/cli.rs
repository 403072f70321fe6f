//! Batch command-line front end: `track`, `eval`, `sweep-alpha`, `synth` and `bench`.
//!
//! Sequences are processed in parallel up to `--jobs`; each sequence is
//! tracked on a single thread and outputs are always reported in the order
//! the sequences were given.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::association::TrackRoiSource;
use crate::error::{Error, Result};
use crate::io::{self, DetectionSet, SequenceManifest};
use crate::metrics::{aggregate, evaluate_sequence, metrics_csv, EvalConfig, EvalReport};
use crate::synth::{self, Scenario};
use crate::tracker::{MotionOnly, TrackRecord, Tracker, TrackerConfig, Variant};

#[derive(Debug, Parser)]
#[command(name = "thermot", version, about = "Multi-object tracking for thermal video")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track sequences and write one MOT result file per sequence.
    Track(TrackArgs),
    /// Score result files against ground truth.
    Eval(EvalArgs),
    /// Track and evaluate over a grid of alpha values.
    SweepAlpha(SweepArgs),
    /// Export synthetic sequences.
    Synth(SynthArgs),
    /// Time the tracker on sequences without writing results.
    Bench(BenchArgs),
}

/// Tracker settings. A preset or config file supplies defaults; flags override.
#[derive(Debug, Clone, Default, Args)]
pub struct TrackerOpts {
    /// Named operating point: paper-byte or paper-ocsort.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML file with tracker settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub high_thresh: Option<f64>,
    #[arg(long)]
    pub low_thresh: Option<f64>,
    #[arg(long)]
    pub match_thresh_first: Option<f64>,
    #[arg(long)]
    pub match_thresh_second: Option<f64>,
    #[arg(long)]
    pub recovery_thresh: Option<f64>,
    #[arg(long)]
    pub new_track_thresh: Option<f64>,
    #[arg(long)]
    pub max_lost_frames: Option<u32>,
    #[arg(long)]
    pub min_hits: Option<u32>,
    #[arg(long)]
    pub use_thermal_in_second_stage: Option<bool>,
    #[arg(long)]
    pub hist_bins: Option<usize>,
    /// Where track histograms come from: predicted or last-observation.
    #[arg(long)]
    pub track_roi: Option<TrackRoiSource>,
    #[arg(long)]
    pub std_weight_position: Option<f64>,
    #[arg(long)]
    pub std_weight_velocity: Option<f64>,
    /// Use a tracker built without the thermal cue.
    #[arg(long)]
    pub motion_only: bool,
}

impl TrackerOpts {
    pub fn resolve(&self) -> Result<TrackerConfig> {
        let base = match &self.preset {
            Some(name) => TrackerConfig::preset(name)?,
            None => TrackerConfig::default(),
        };
        let mut cfg = match &self.config {
            Some(path) => overlay_config(base, path)?,
            None => base,
        };
        macro_rules! set {
            ($($field:ident).+ <- $opt:ident) => {
                if let Some(v) = self.$opt {
                    cfg.$($field).+ = v;
                }
            };
        }
        set!(variant <- variant);
        set!(alpha <- alpha);
        set!(high_thresh <- high_thresh);
        set!(low_thresh <- low_thresh);
        set!(match_thresh_first <- match_thresh_first);
        set!(match_thresh_second <- match_thresh_second);
        set!(recovery_thresh <- recovery_thresh);
        set!(new_track_thresh <- new_track_thresh);
        set!(max_lost_frames <- max_lost_frames);
        set!(min_hits <- min_hits);
        set!(use_thermal_in_second_stage <- use_thermal_in_second_stage);
        set!(histogram.track_roi <- track_roi);
        set!(kalman.std_weight_position <- std_weight_position);
        set!(kalman.std_weight_velocity <- std_weight_velocity);
        if self.hist_bins.is_some() {
            cfg.histogram.bins = self.hist_bins;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn overlay_config(base: TrackerConfig, path: &Path) -> Result<TrackerConfig> {
    let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let overlay: toml::Table = text.parse().map_err(|e| bad(&e))?;
    let mut table: toml::Table = toml::to_string(&base)
        .expect("config serializes")
        .parse()
        .expect("serialized config parses");
    merge_tables(&mut table, overlay);
    toml::from_str(&toml::to_string(&table).map_err(|e| bad(&e))?).map_err(|e| bad(&e))
}

fn merge_tables(into: &mut toml::Table, from: toml::Table) {
    for (key, value) in from {
        match (into.get_mut(&key), value) {
            (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => merge_tables(dst, src),
            (_, value) => {
                into.insert(key, value);
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    /// Sequence directories, each holding a seqinfo.ini.
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// Detection files, one per sequence in the same order (default: <seq>/det/det.txt).
    #[arg(long = "det")]
    pub detections: Vec<PathBuf>,
    /// Output directory for <name>.txt result files.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(short, long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub tracker: TrackerOpts,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Sequence directories with gt/gt.txt.
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// Directory holding <name>.txt result files.
    #[arg(short, long)]
    pub results: PathBuf,
    /// Metrics CSV path (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub iou_thresh: f64,
    #[arg(long)]
    pub min_visibility: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    /// Comma-separated alpha values (default 0, 0.1, ..., 1).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Variants to sweep (default: byte,ocsort).
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<Variant>,
    /// Sweep CSV path (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(short, long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub iou_thresh: f64,
    #[command(flatten)]
    pub tracker: TrackerOpts,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Built-in scenario names.
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// Scenario TOML files.
    #[arg(long = "scenario")]
    pub scenarios: Vec<PathBuf>,
    /// Overrides the seed of every scenario (presets default to 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parent directory; each scenario is written to <output>/<name>.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(required = true)]
    pub sequences: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub repeat: u32,
    #[command(flatten)]
    pub tracker: TrackerOpts,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Track(args) => cmd_track(&args),
        Command::Eval(args) => {
            let csv = cmd_eval(&args)?;
            emit(args.output.as_deref(), &csv)
        }
        Command::SweepAlpha(args) => {
            let csv = cmd_sweep_alpha(&args)?;
            emit(args.output.as_deref(), &csv)
        }
        Command::Synth(args) => cmd_synth(&args).map(|_| ()),
        Command::Bench(args) => cmd_bench(&args),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A sequence directory with its detections loaded; frames are read on demand.
#[derive(Debug, Clone)]
pub struct SequenceInput {
    pub manifest: SequenceManifest,
    pub detections: DetectionSet,
}

impl SequenceInput {
    pub fn load(dir: &Path, det_override: Option<&Path>) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Input(format!("sequence directory {} does not exist", dir.display())));
        }
        let manifest = io::load_manifest(dir)?;
        for w in &manifest.warnings {
            log::warn!("{}: {w}", manifest.name);
        }
        let det_path = det_override.map_or_else(|| manifest.det_path(), Path::to_path_buf);
        let detections = io::read_detections(&det_path)?;
        if let Some((&last, _)) = detections.frames.last_key_value() {
            if last.0 >= manifest.frame_count {
                log::warn!(
                    "{}: detections reference frame {} beyond seqLength {}; ignored",
                    manifest.name,
                    last.one_based(),
                    manifest.frame_count
                );
            }
        }
        Ok(Self { manifest, detections })
    }

    /// Runs a tracker over every frame listed in the manifest.
    pub fn track(&self, cfg: &TrackerConfig, motion_only: bool) -> Result<Vec<TrackRecord>> {
        if motion_only {
            self.track_with(Tracker::with_cue(cfg.clone(), MotionOnly)?)
        } else {
            self.track_with(Tracker::new(cfg.clone())?)
        }
    }

    fn track_with<C: crate::tracker::AppearanceCue>(&self, mut tracker: Tracker<C>) -> Result<Vec<TrackRecord>> {
        let m = &self.manifest;
        for frame in m.frames() {
            let path = m.image_path(frame);
            let img = io::load_image(&path, m.bit_depth)?;
            if (img.width(), img.height()) != (m.width, m.height) {
                return Err(Error::Image {
                    path,
                    message: format!(
                        "image is {}x{}, manifest says {}x{}",
                        img.width(),
                        img.height(),
                        m.width,
                        m.height
                    ),
                });
            }
            tracker.step(frame, &img, self.detections.get(frame))?;
        }
        Ok(tracker.finish())
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn load_inputs(sequences: &[PathBuf], detections: &[PathBuf]) -> Result<Vec<SequenceInput>> {
    if !detections.is_empty() && detections.len() != sequences.len() {
        return Err(Error::Config(format!(
            "{} detection files given for {} sequences",
            detections.len(),
            sequences.len()
        )));
    }
    let inputs = sequences
        .iter()
        .enumerate()
        .map(|(i, dir)| SequenceInput::load(dir, detections.get(i).map(PathBuf::as_path)))
        .collect::<Result<Vec<_>>>()?;
    let mut names = BTreeSet::new();
    for input in &inputs {
        if !names.insert(input.manifest.name.as_str()) {
            return Err(Error::Input(format!("sequence name '{}' appears twice", input.manifest.name)));
        }
    }
    Ok(inputs)
}

/// Writes `<output>/<name>.txt` for every sequence. Nothing is left behind
/// if any sequence fails.
pub fn cmd_track(args: &TrackArgs) -> Result<()> {
    let cfg = args.tracker.resolve()?;
    let inputs = load_inputs(&args.sequences, &args.detections)?;
    let results: Vec<Result<Vec<TrackRecord>>> = pool(args.jobs)?.install(|| {
        inputs
            .par_iter()
            .map(|input| input.track(&cfg, args.tracker.motion_only))
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (input, records) in inputs.iter().zip(&results) {
        let path = args.output.join(format!("{}.txt", input.manifest.name));
        let tmp = path.with_extension("txt.partial");
        let outcome = io::write_results(&tmp, records).and_then(|()| fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e)));
        if let Err(e) = outcome {
            let _ = fs::remove_file(&tmp);
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
        let ids: BTreeSet<_> = records.iter().map(|r| r.id).collect();
        println!(
            "{}: {} frames, {} tracks, {} boxes",
            input.manifest.name,
            input.manifest.frame_count,
            ids.len(),
            records.len()
        );
    }
    Ok(())
}

/// Per-sequence rows plus an `OVERALL` row, in the order the sequences were given.
pub fn cmd_eval(args: &EvalArgs) -> Result<String> {
    let eval_cfg = eval_config(args.iou_thresh, args.min_visibility)?;
    let mut manifests = Vec::new();
    for dir in &args.sequences {
        if !dir.is_dir() {
            return Err(Error::Input(format!("sequence directory {} does not exist", dir.display())));
        }
        manifests.push(io::load_manifest(dir)?);
    }
    let available: BTreeSet<String> = fs::read_dir(&args.results)
        .map_err(|e| Error::io(&args.results, e))?
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            if path.extension()? != "txt" {
                return None;
            }
            Some(path.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    let wanted: BTreeSet<String> = manifests.iter().map(|m| m.name.clone()).collect();
    let missing: Vec<&String> = wanted.difference(&available).collect();
    let extra: Vec<&String> = available.difference(&wanted).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let list = |v: &[&String]| v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
        return Err(Error::Input(format!(
            "sequences and result files do not line up; without results: [{}]; results without a sequence: [{}]",
            list(&missing),
            list(&extra)
        )));
    }

    let mut rows = Vec::new();
    for m in &manifests {
        let gt = io::read_ground_truth(&m.gt_path())?;
        let hyp = io::read_results(&args.results.join(format!("{}.txt", m.name)))?;
        rows.push((m.name.clone(), evaluate_sequence(&gt, &hyp, &eval_cfg)?));
    }
    let reports: Vec<EvalReport> = rows.iter().map(|r| r.1.clone()).collect();
    Ok(metrics_csv(&rows, &aggregate(&reports)?))
}

fn eval_config(iou_thresh: f64, min_visibility: Option<f64>) -> Result<EvalConfig> {
    if !(iou_thresh > 0.0 && iou_thresh <= 1.0) {
        return Err(Error::Config(format!("iou threshold {iou_thresh} outside (0, 1]")));
    }
    Ok(EvalConfig {
        iou_thresh,
        min_visibility,
    })
}

pub const SWEEP_HEADER: &str = "variant,kind,alpha,MOTA,IDF1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub variant: Variant,
    pub alpha: f64,
    pub mota: f64,
    pub idf1: f64,
}

pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 10.0).collect()
}

/// Rows are grouped by variant, alpha ascending, followed by the argmax-MOTA,
/// argmax-IDF1 and trade-off (best mean of the two) rows. Ties go to the
/// smaller alpha.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    let mut variants: Vec<Variant> = Vec::new();
    for p in points {
        if !variants.contains(&p.variant) {
            variants.push(p.variant);
        }
    }
    for v in variants {
        let mut rows: Vec<&SweepPoint> = points.iter().filter(|p| p.variant == v).collect();
        rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let line = |out: &mut String, kind: &str, p: &SweepPoint| {
            let _ = writeln!(out, "{},{kind},{},{:.6},{:.6}", v.label(), p.alpha, p.mota, p.idf1);
        };
        for p in &rows {
            line(&mut out, "sweep", p);
        }
        let best = |key: &dyn Fn(&SweepPoint) -> f64| {
            rows.iter()
                .copied()
                .reduce(|best, p| if key(p) > key(best) { p } else { best })
        };
        if let Some(p) = best(&|p| p.mota) {
            line(&mut out, "argmax-MOTA", p);
        }
        if let Some(p) = best(&|p| p.idf1) {
            line(&mut out, "argmax-IDF1", p);
        }
        if let Some(p) = best(&|p| (p.mota + p.idf1) / 2.0) {
            line(&mut out, "tradeoff", p);
        }
    }
    out
}

pub fn cmd_sweep_alpha(args: &SweepArgs) -> Result<String> {
    let alphas = if args.alphas.is_empty() {
        default_alpha_grid()
    } else {
        args.alphas.clone()
    };
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
    }
    let variants = if args.variants.is_empty() {
        vec![Variant::Byte, Variant::OcSort]
    } else {
        args.variants.clone()
    };
    let base = args.tracker.resolve()?;
    let eval_cfg = eval_config(args.iou_thresh, None)?;
    let inputs = load_inputs(&args.sequences, &[])?;
    let gts = inputs
        .iter()
        .map(|i| io::read_ground_truth(&i.manifest.gt_path()))
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    for &variant in &variants {
        for &alpha in &alphas {
            for seq in 0..inputs.len() {
                runs.push((variant, alpha, seq));
            }
        }
    }
    let reports: Vec<Result<EvalReport>> = pool(args.jobs)?.install(|| {
        runs.par_iter()
            .map(|&(variant, alpha, seq)| {
                let cfg = TrackerConfig {
                    variant,
                    alpha,
                    ..base.clone()
                };
                cfg.validate()?;
                let records = inputs[seq].track(&cfg, args.tracker.motion_only)?;
                evaluate_sequence(&gts[seq], &records, &eval_cfg)
            })
            .collect()
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;

    let points = reports
        .chunks(inputs.len())
        .zip(runs.chunks(inputs.len()))
        .map(|(chunk, run)| {
            let overall = aggregate(chunk)?;
            Ok(SweepPoint {
                variant: run[0].0,
                alpha: run[0].1,
                mota: overall.mota,
                idf1: overall.idf1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sweep_csv(&points))
}

/// Exports every requested scenario to `<output>/<name>` and returns the directories.
pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<PathBuf>> {
    if args.presets.is_empty() && args.scenarios.is_empty() {
        return Err(Error::Config(format!(
            "nothing to generate; pass --preset or --scenario (presets: {})",
            synth::PRESETS.join(", ")
        )));
    }
    let mut scenarios = Vec::new();
    for name in &args.presets {
        scenarios.push(synth::preset(name, args.seed.unwrap_or(0))?);
    }
    for path in &args.scenarios {
        let mut scn = Scenario::load(path)?;
        if let Some(seed) = args.seed {
            scn.seed = seed;
        }
        scenarios.push(scn);
    }
    let mut dirs = Vec::new();
    for scn in &scenarios {
        let dir = args.output.join(&scn.name);
        let seq = synth::generate(scn)?;
        synth::export(&seq, &dir)?;
        println!("{}: {} frames -> {}", scn.name, scn.frame_count, dir.display());
        dirs.push(dir);
    }
    Ok(dirs)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.repeat == 0 {
        return Err(Error::Config("--repeat must be at least 1".into()));
    }
    let cfg = args.tracker.resolve()?;
    let inputs = load_inputs(&args.sequences, &[])?;
    for input in &inputs {
        let start = Instant::now();
        for _ in 0..args.repeat {
            input.track(&cfg, args.tracker.motion_only)?;
        }
        let secs = start.elapsed().as_secs_f64();
        let frames = f64::from(input.manifest.frame_count) * f64::from(args.repeat);
        println!(
            "{}: {} frames x {} in {:.3} s ({:.1} frames/s, including image decoding)",
            input.manifest.name,
            input.manifest.frame_count,
            args.repeat,
            secs,
            frames / secs.max(1e-9)
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_preset() {
        let opts = TrackerOpts {
            preset: Some("paper-ocsort".into()),
            high_thresh: Some(0.5),
            ..TrackerOpts::default()
        };
        let cfg = opts.resolve().unwrap();
        assert_eq!(cfg.variant, Variant::OcSort);
        assert_eq!(cfg.alpha, 0.8);
        assert_eq!(cfg.high_thresh, 0.5);
    }

    #[test]
    fn config_file_overlays_nested_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.toml");
        fs::write(&path, "alpha = 0.5\n[histogram]\ntrack_roi = \"last-observation\"\n").unwrap();
        let opts = TrackerOpts {
            preset: Some("paper-ocsort".into()),
            config: Some(path.clone()),
            ..TrackerOpts::default()
        };
        let cfg = opts.resolve().unwrap();
        assert_eq!(cfg.variant, Variant::OcSort);
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.histogram.track_roi, TrackRoiSource::LastObservation);

        fs::write(&path, "alpah = 0.5\n").unwrap();
        assert!(matches!(opts.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn out_of_range_alpha_flag_is_rejected() {
        let opts = TrackerOpts {
            alpha: Some(1.2),
            ..TrackerOpts::default()
        };
        assert!(matches!(opts.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_csv_rows_and_argmax() {
        let p = |variant, alpha, mota, idf1| SweepPoint {
            variant,
            alpha,
            mota,
            idf1,
        };
        let csv = sweep_csv(&[
            p(Variant::Byte, 1.0, 0.9, 0.5),
            p(Variant::Byte, 0.0, 0.8, 0.9),
            p(Variant::Byte, 0.5, 0.9, 0.9),
        ]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1], "byte,sweep,0,0.800000,0.900000");
        assert_eq!(lines[3], "byte,sweep,1,0.900000,0.500000");
        assert_eq!(lines[4], "byte,argmax-MOTA,0.5,0.900000,0.900000");
        assert_eq!(lines[5], "byte,argmax-IDF1,0,0.800000,0.900000");
        assert_eq!(lines[6], "byte,tradeoff,0.5,0.900000,0.900000");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn cli_parses_sweep_grid() {
        let cli = Cli::try_parse_from(["thermot", "sweep-alpha", "s1", "--alphas", "0,0.5,1", "--variants", "byte"]).unwrap();
        match cli.command {
            Command::SweepAlpha(a) => {
                assert_eq!(a.alphas, vec![0.0, 0.5, 1.0]);
                assert_eq!(a.variants, vec![Variant::Byte]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
