//! The `oodkit` command line: synth → train → calibrate → detect → eval,
//! plus TTA, feature extraction and ensembling.
//!
//! Every option can also come from `--config <file>` (`key=value`, keys are
//! the long flag names). Precedence: flag, then config file, then built-in
//! default. The seed additionally falls back to `OODKIT_SEED` before the
//! default of 0.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use oodkit_core::augment::{augment, AugmentSpec};
use oodkit_core::ema::DEFAULT_DECAY;
use oodkit_core::metrics::{evaluate, DEFAULT_TPR};
use oodkit_core::ood::{
    calibrate_tau, decide, energy_score, ensemble_logits, fit_react_threshold, max_softmax_score, rectified_forward,
    ScoreVector, DEFAULT_PERCENTILE, DEFAULT_RETENTION,
};
use oodkit_core::quantile::fraction_above;
use oodkit_core::synth::{axis_means, generate_ood, generate_synthetic, held_out_axis_mean, SyntheticSpec};
use oodkit_core::train::{train_head, TrainConfig};
use oodkit_core::tta::{tta_predict, BlockMeanFeaturizer, Featurizer, TtaConfig, DEFAULT_ITERATIONS};
use oodkit_core::{FeatureMatrix, LinearHead, LogitMatrix};

use crate::calibration_file::CalibrationRecord;
use crate::fvec_file::{read_features, read_head, read_logits, write_fvec, write_head};
use crate::keyvalue::KeyValues;
use crate::manifest::ExportManifest;
use crate::pgm::{read_image, write_image};
use crate::report::{write_report, ThresholdStats};
use crate::tables::{read_labels_csv, write_decisions_csv, write_history_csv, write_labels_csv};

pub const SEED_ENV: &str = "OODKIT_SEED";

/// Bad or missing arguments; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "oodkit", version, about = "ReAct + energy-score OOD detection toolkit")]
pub struct Cli {
    /// key=value file supplying values for any option
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded Gaussian train / held-out / OOD feature splits
    Synth(SynthArgs),
    /// Fit a linear head with gradient descent and EMA smoothing
    Train(TrainArgs),
    /// Fit the ReAct cutoff and the OOD threshold on ID features
    Calibrate(CalibrateArgs),
    /// Score samples and emit ID/OOD decisions
    Detect(DetectArgs),
    /// Accuracy, AUROC and FPR at a TPR target
    Eval(EvalArgs),
    /// Test-time augmentation over images
    Tta(TtaArgs),
    /// Block-mean features of images
    Featurize(FeaturizeArgs),
    /// Mean of several models' logits
    Ensemble(EnsembleArgs),
    /// Write one augmented copy of an image
    Augment(AugmentArgs),
    /// Check an export manifest against the files it references
    Manifest(ManifestArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub classes: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub per_class: Option<u64>,
    /// Distance of each class mean from the origin, in units of --std
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub std: Option<f64>,
    /// OOD sample count (default: classes x per-class)
    #[arg(long)]
    pub ood_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Epochs without loss improvement before halving the learning rate
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub ema_decay: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HeadArgs {
    #[arg(long)]
    pub head_w: Option<PathBuf>,
    #[arg(long)]
    pub head_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub head: HeadArgs,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[arg(long)]
    pub retention: Option<f64>,
    /// Skip ReAct clipping (cutoff = inf)
    #[arg(long)]
    pub no_react: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreKind {
    Energy,
    MaxSoftmax,
}

impl FromStr for ScoreKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub head: HeadArgs,
    /// Precomputed logits instead of features + head
    #[arg(long, conflicts_with = "features")]
    pub logits: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// ReAct cutoff; overrides the calibration file (`inf` disables clipping)
    #[arg(long)]
    pub react_c: Option<f64>,
    /// OOD threshold; overrides the calibration file
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the (rectified) logits as FVEC
    #[arg(long)]
    pub logits_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub id_features: Option<PathBuf>,
    #[arg(long)]
    pub ood_features: Option<PathBuf>,
    #[command(flatten)]
    pub head: HeadArgs,
    #[arg(long, conflicts_with = "id_features")]
    pub id_logits: Option<PathBuf>,
    #[arg(long, conflicts_with = "ood_features")]
    pub ood_logits: Option<PathBuf>,
    #[arg(long)]
    pub id_labels: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub react_c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tpr: Option<f64>,
    #[arg(long, value_enum)]
    pub score: Option<ScoreKind>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub confusion_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorRange(pub f64, pub f64);

impl FromStr for FactorRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
        let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self(p(lo)?, p(hi)?))
    }
}

impl fmt::Display for FactorRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

#[derive(Debug, Args)]
pub struct AugmentFlags {
    /// Maximum absolute rotation in degrees
    #[arg(long)]
    pub max_rotation: Option<f64>,
    #[arg(long)]
    pub no_rotation: bool,
    #[arg(long)]
    pub no_hflip: bool,
    #[arg(long)]
    pub no_vflip: bool,
    /// Brightness factor range `lo,hi`
    #[arg(long)]
    pub brightness: Option<FactorRange>,
    /// Contrast factor range `lo,hi`
    #[arg(long)]
    pub contrast: Option<FactorRange>,
    #[arg(long)]
    pub no_jitter: bool,
    /// Crop side fraction
    #[arg(long)]
    pub crop: Option<f64>,
    #[arg(long)]
    pub no_crop: bool,
    /// Cutout side as a fraction of min(H, W)
    #[arg(long)]
    pub cutout: Option<f64>,
    #[arg(long)]
    pub no_cutout: bool,
}

#[derive(Debug, Args)]
pub struct TtaArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    pub head: HeadArgs,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub react_c: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub iterations: Option<u64>,
    /// Augment every view, including the first
    #[arg(long)]
    pub no_identity: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub aug: AugmentFlags,
    /// Fused logits, one row per image
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decisions CSV; needs a threshold from --calibration or --tau
    #[arg(long)]
    pub decisions_out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub logits: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub aug: AugmentFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    pub path: PathBuf,
}

const DEFAULT_GRID: usize = 4;

/// Resolves option values: flag, then config file, then default.
struct Settings {
    config: Option<KeyValues>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let config = path.map(KeyValues::read).transpose().map_err(|e| usage(e.to_string()))?;
        Ok(Self { config })
    }

    fn opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match &self.config {
            Some(kv) => kv.get(key).map_err(|e| usage(e.to_string())),
            None => Ok(None),
        }
    }

    fn or<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.opt(cli, key)?.unwrap_or(default))
    }

    fn req<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.opt(cli, key)?.ok_or_else(|| usage(format!("missing required option --{key}")))
    }

    fn flag(&self, cli: bool, key: &str) -> Result<bool> {
        Ok(cli || self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    fn seed(&self, cli: Option<u64>) -> Result<u64> {
        if let Some(s) = self.opt(cli, "seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|e| usage(format!("{SEED_ENV}={v:?}: {e}"))),
            Err(_) => Ok(0),
        }
    }

    fn head(&self, h: &HeadArgs) -> Result<LinearHead> {
        let w: PathBuf = self.req(h.head_w.clone(), "head-w")?;
        let b: PathBuf = self.req(h.head_b.clone(), "head-b")?;
        Ok(read_head(&w, &b)?)
    }

    fn augment_spec(&self, a: &AugmentFlags, seed: u64) -> Result<AugmentSpec> {
        let d = AugmentSpec::default();
        let enabled = |off: bool, key: &str| -> Result<bool> { Ok(!self.flag(off, key)?) };
        let range = |r: Option<FactorRange>, key: &str, dflt: Option<(f64, f64)>| -> Result<Option<(f64, f64)>> {
            Ok(self.opt(r, key)?.map(|FactorRange(lo, hi)| (lo, hi)).or(dflt))
        };
        let jitter = enabled(a.no_jitter, "no-jitter")?;
        let spec = AugmentSpec {
            rotation: enabled(a.no_rotation, "no-rotation")?
                .then(|| self.or(a.max_rotation, "max-rotation", d.rotation.unwrap_or(180.0)))
                .transpose()?,
            horizontal_flip: enabled(a.no_hflip, "no-hflip")?,
            vertical_flip: enabled(a.no_vflip, "no-vflip")?,
            brightness: if jitter { range(a.brightness, "brightness", d.brightness)? } else { None },
            contrast: if jitter { range(a.contrast, "contrast", d.contrast)? } else { None },
            crop: enabled(a.no_crop, "no-crop")?.then(|| self.or(a.crop, "crop", 0.875)).transpose()?,
            cutout: enabled(a.no_cutout, "no-cutout")?.then(|| self.or(a.cutout, "cutout", 0.25)).transpose()?,
            seed,
        };
        spec.validate().map_err(|e| usage(e.to_string()))?;
        Ok(spec)
    }
}

/// ReAct cutoff and threshold from an optional calibration file plus overrides.
fn resolve_thresholds(
    s: &Settings,
    calibration: Option<PathBuf>,
    react_c: Option<f64>,
    tau: Option<f64>,
) -> Result<(f64, Option<f64>)> {
    let record = s.opt(calibration, "calibration")?.map(|p: PathBuf| CalibrationRecord::read(&p)).transpose()?;
    let c = s.opt(react_c, "react-c")?.or(record.map(|r| r.cutoff_c)).unwrap_or(f64::INFINITY);
    if c.is_nan() {
        return Err(usage("--react-c must not be NaN"));
    }
    let tau = s.opt(tau, "tau")?.or(record.map(|r| r.tau));
    Ok((c, tau))
}

fn scores(kind: ScoreKind, logits: &LogitMatrix) -> ScoreVector {
    match kind {
        ScoreKind::Energy => energy_score(logits),
        ScoreKind::MaxSoftmax => max_softmax_score(logits),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_synth(s: &Settings, a: SynthArgs) -> Result<()> {
    let classes = s.req(a.classes, "classes")? as usize;
    let dim = s.req(a.dim, "dim")? as usize;
    let per_class = s.req(a.per_class, "per-class")? as usize;
    if classes < 2 || dim == 0 || per_class == 0 {
        return Err(usage("need --classes >= 2, --dim >= 1 and --per-class >= 1"));
    }
    let separation = s.or(a.separation, "separation", 6.0)?;
    let std = s.or(a.std, "std", 1.0)?;
    let ood_count = s.or(a.ood_count, "ood-count", classes * per_class)?;
    let seed = s.seed(a.seed)?;
    let out_dir: PathBuf = s.req(a.out_dir, "out-dir")?;

    let invalid = |e: oodkit_core::Error| usage(e.to_string());
    let means = axis_means(classes, dim, separation * std).map_err(invalid)?;
    let ood_mean = held_out_axis_mean(classes, dim, separation * std).map_err(invalid)?;
    let spec = |seed| SyntheticSpec { means: means.clone(), std, per_class, seed };
    spec(seed).validate().map_err(invalid)?;
    let (train_x, train_y) = generate_synthetic(&spec(seed))?;
    let (test_x, test_y) = generate_synthetic(&spec(seed.wrapping_add(1)))?;
    let ood_x = generate_ood(&ood_mean, std, ood_count, seed.wrapping_add(2))?;

    ensure_dir(&out_dir)?;
    write_fvec(&train_x, &out_dir.join("train_features.fvec"))?;
    write_labels_csv(&train_y, &out_dir.join("train_labels.csv"))?;
    write_fvec(&test_x, &out_dir.join("test_features.fvec"))?;
    write_labels_csv(&test_y, &out_dir.join("test_labels.csv"))?;
    write_fvec(&ood_x, &out_dir.join("ood_features.fvec"))?;
    println!("train={}x{dim} test={}x{dim} ood={}x{dim} seed={seed}", train_x.rows(), test_x.rows(), ood_x.rows());
    Ok(())
}

fn cmd_train(s: &Settings, a: TrainArgs) -> Result<()> {
    let features_path: PathBuf = s.req(a.features, "features")?;
    let labels_path: PathBuf = s.req(a.labels, "labels")?;
    let out_dir: PathBuf = s.req(a.out_dir, "out-dir")?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: s.or(a.lr, "lr", d.learning_rate)?,
        epochs: s.or(a.epochs, "epochs", d.epochs)?,
        lr_halving_patience: s.or(a.patience, "patience", d.lr_halving_patience)?,
        ema_decay: s.or(a.ema_decay, "ema-decay", DEFAULT_DECAY)?,
        seed: s.seed(a.seed)?,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let x = read_features(&features_path)?;
    let y = read_labels_csv(&labels_path)?;
    let out = train_head(&x, &y, &cfg)?;

    ensure_dir(&out_dir)?;
    write_head(&out.final_head, &out_dir.join("head_w.fvec"), &out_dir.join("head_b.fvec"))?;
    write_head(&out.ema_head, &out_dir.join("ema_w.fvec"), &out_dir.join("ema_b.fvec"))?;
    write_history_csv(&out.history, &out_dir.join("history.csv"))?;

    let acc = |h: &LinearHead| -> Result<f64> { Ok(oodkit_core::metrics::accuracy(&h.forward(&x)?.argmax(), &y)?) };
    println!("epochs={}", out.history.len());
    if let Some(last) = out.history.last() {
        println!("final_loss={}", last.loss);
        println!("final_lr={}", last.lr);
    }
    println!("train_accuracy={}", acc(&out.final_head)?);
    println!("ema_train_accuracy={}", acc(&out.ema_head)?);
    Ok(())
}

fn cmd_calibrate(s: &Settings, a: CalibrateArgs) -> Result<()> {
    let features_path: PathBuf = s.req(a.features, "features")?;
    let out: PathBuf = s.req(a.out, "out")?;
    let p = s.or(a.percentile, "percentile", DEFAULT_PERCENTILE)?;
    let q = s.or(a.retention, "retention", DEFAULT_RETENTION)?;
    if !(p > 0.0 && p <= 100.0) {
        return Err(usage(format!("--percentile {p} outside (0, 100]")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(usage(format!("--retention {q} outside (0, 1]")));
    }
    let no_react = s.flag(a.no_react, "no-react")?;
    let head = s.head(&a.head)?;
    let x = read_features(&features_path)?;

    let c = if no_react { f64::INFINITY } else { fit_react_threshold(&x, p)? };
    let logits = rectified_forward(&x, &head, c)?;
    let cal = calibrate_tau(&energy_score(&logits), q)?;
    let record = CalibrationRecord::new(c, p, &cal);
    record.write(&out)?;
    print!("{}", record.to_text());
    if cal.retention_warning() {
        eprintln!(
            "warning: achieved retention {} is below target {}; scores tie at tau",
            cal.achieved_retention, cal.target_retention
        );
    }
    Ok(())
}

/// Logits from either a logits file or features + head, with ReAct applied.
fn load_logits(
    s: &Settings,
    features: Option<PathBuf>,
    features_key: &str,
    logits: Option<PathBuf>,
    logits_key: &str,
    head: &HeadArgs,
    c: f64,
) -> Result<LogitMatrix> {
    if let Some(path) = s.opt::<PathBuf>(logits, logits_key)? {
        if c != f64::INFINITY {
            return Err(usage(format!("--{logits_key} cannot be combined with ReAct clipping")));
        }
        return Ok(read_logits(&path)?);
    }
    let path: PathBuf = s
        .opt(features, features_key)?
        .ok_or_else(|| usage(format!("need --{features_key} or --{logits_key}")))?;
    let head = s.head(head)?;
    let x = read_features(&path)?;
    Ok(rectified_forward(&x, &head, c)?)
}

fn cmd_detect(s: &Settings, a: DetectArgs) -> Result<()> {
    let out: PathBuf = s.req(a.out, "out")?;
    let (c, tau) = resolve_thresholds(s, a.calibration, a.react_c, a.tau)?;
    let tau = tau.ok_or_else(|| usage("need --tau or --calibration"))?;
    let logits = load_logits(s, a.features, "features", a.logits, "logits", &a.head, c)?;
    let decisions = decide(&energy_score(&logits), &logits, tau)?;
    write_decisions_csv(&decisions, &out)?;
    if let Some(p) = s.opt::<PathBuf>(a.logits_out, "logits-out")? {
        write_fvec(&logits, &p)?;
    }
    let n_id = decisions.iter().filter(|d| d.verdict == oodkit_core::ood::Verdict::Id).count();
    println!("samples={} id={} ood={}", decisions.len(), n_id, decisions.len() - n_id);
    Ok(())
}

fn cmd_eval(s: &Settings, a: EvalArgs) -> Result<()> {
    let out: PathBuf = s.req(a.out, "out")?;
    let labels_path: PathBuf = s.req(a.id_labels, "id-labels")?;
    let (c, tau) = resolve_thresholds(s, a.calibration, a.react_c, a.tau)?;
    let tpr = s.or(a.tpr, "tpr", DEFAULT_TPR)?;
    let kind = s.or(a.score, "score", ScoreKind::Energy)?;
    let id = load_logits(s, a.id_features, "id-features", a.id_logits, "id-logits", &a.head, c)?;
    let ood = load_logits(s, a.ood_features, "ood-features", a.ood_logits, "ood-logits", &a.head, c)?;
    if id.cols() != ood.cols() {
        return Err(oodkit_core::Error::Shape(format!("ID logits have {} classes, OOD {}", id.cols(), ood.cols())).into());
    }
    let labels = read_labels_csv(&labels_path)?;
    let (id_s, ood_s) = (scores(kind, &id), scores(kind, &ood));
    let report = evaluate(&id.argmax(), &labels, id.cols(), &id_s, &ood_s, tpr)?;
    let stats = tau.map(|t| ThresholdStats {
        tau: t,
        id_retention: fraction_above(&id_s, t),
        ood_rejection: 1.0 - fraction_above(&ood_s, t),
    });
    let confusion: Option<PathBuf> = s.opt(a.confusion_out, "confusion-out")?;
    write_report(&report, stats.as_ref(), &out, confusion.as_deref())?;
    print!("{}", crate::report::report_text(&report, stats.as_ref()));
    Ok(())
}

fn featurizer(s: &Settings, grid: Option<usize>) -> Result<BlockMeanFeaturizer> {
    let g = s.or(grid, "grid", DEFAULT_GRID)?;
    BlockMeanFeaturizer::new(g).map_err(|e| usage(e.to_string()))
}

fn cmd_tta(s: &Settings, a: TtaArgs) -> Result<()> {
    let out: PathBuf = s.req(a.out, "out")?;
    let f = featurizer(s, a.grid)?;
    let head = s.head(&a.head)?;
    let (c, tau) = resolve_thresholds(s, a.calibration, a.react_c, a.tau)?;
    let seed = s.seed(a.seed)?;
    let iterations = s.or(a.iterations, "iterations", DEFAULT_ITERATIONS as u64)? as usize;
    if iterations == 0 {
        return Err(usage("--iterations must be at least 1"));
    }
    let include_identity = !s.flag(a.no_identity, "no-identity")?;
    let spec = s.augment_spec(&a.aug, seed)?;

    let mut rows = Vec::with_capacity(a.images.len());
    for (i, path) in a.images.iter().enumerate() {
        let img = read_image(path)?;
        let cfg = TtaConfig { iterations, include_identity, seed: seed.wrapping_add(i as u64) };
        let fused = tta_predict(&img, &f, &head, c, &cfg, &spec).with_context(|| path.display().to_string())?;
        rows.push(fused.into_matrix().into_data());
    }
    let logits = LogitMatrix::from_rows(&rows)?;
    write_fvec(&logits, &out)?;
    if let Some(p) = s.opt::<PathBuf>(a.decisions_out, "decisions-out")? {
        let tau = tau.ok_or_else(|| usage("--decisions-out needs --tau or --calibration"))?;
        write_decisions_csv(&decide(&energy_score(&logits), &logits, tau)?, &p)?;
    }
    println!("images={} iterations={iterations} identity={include_identity}", rows.len());
    Ok(())
}

fn cmd_featurize(s: &Settings, a: FeaturizeArgs) -> Result<()> {
    let out: PathBuf = s.req(a.out, "out")?;
    let f = featurizer(s, a.grid)?;
    let mut data = Vec::with_capacity(a.images.len() * f.dim());
    for path in &a.images {
        data.extend(f.featurize(&read_image(path)?).with_context(|| path.display().to_string())?);
    }
    let x = FeatureMatrix::new(a.images.len(), f.dim(), data)?;
    write_fvec(&x, &out)?;
    println!("images={} dim={}", x.rows(), x.cols());
    Ok(())
}

fn cmd_ensemble(s: &Settings, a: EnsembleArgs) -> Result<()> {
    let out: PathBuf = s.req(a.out, "out")?;
    let members = a.logits.iter().map(|p| read_logits(p)).collect::<Result<Vec<_>, _>>()?;
    let fused = ensemble_logits(&members)?;
    write_fvec(&fused, &out)?;
    println!("models={} samples={} classes={}", members.len(), fused.rows(), fused.cols());
    Ok(())
}

fn cmd_augment(s: &Settings, a: AugmentArgs) -> Result<()> {
    let input: PathBuf = s.req(a.image, "image")?;
    let out: PathBuf = s.req(a.out, "out")?;
    let seed = s.seed(a.seed)?;
    let spec = s.augment_spec(&a.aug, seed)?;
    let img = read_image(&input)?;
    let aug = augment(&img, &spec, &mut oodkit_core::seeded_rng(seed))?;
    write_image(&aug, &out)?;
    Ok(())
}

fn cmd_manifest(a: ManifestArgs) -> Result<()> {
    let m = ExportManifest::read(&a.path)?;
    m.load_checked()?;
    println!("model={} feature_dim={} num_classes={} splits={}", m.model, m.feature_dim, m.num_classes, m.splits.len());
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let s = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => cmd_synth(&s, a),
        Command::Train(a) => cmd_train(&s, a),
        Command::Calibrate(a) => cmd_calibrate(&s, a),
        Command::Detect(a) => cmd_detect(&s, a),
        Command::Eval(a) => cmd_eval(&s, a),
        Command::Tta(a) => cmd_tta(&s, a),
        Command::Featurize(a) => cmd_featurize(&s, a),
        Command::Ensemble(a) => cmd_ensemble(&s, a),
        Command::Augment(a) => cmd_augment(&s, a),
        Command::Manifest(a) => cmd_manifest(a),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
