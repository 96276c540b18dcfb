//! Optimization loop: epochs over equation corpora, gradient accumulation,
//! Adam updates, dropout, early stopping on validation accuracy, seeded
//! subsampling, and grid search.
//!
//! One [`train`] call is one run: a seed pins the parameter init, the
//! per-epoch shuffles, and every dropout mask, so rerunning a config
//! reproduces the metrics file byte for byte. Trees in one batch have
//! unequal shapes, so a "batch" is a window of `batch_size` consecutive
//! examples whose gradients are averaged before a single Adam step; the
//! [`BatchMode::ShapeGrouped`] flag executes the same window grouped by
//! tree skeleton with one backward pass per group, which reorders the
//! floating-point accumulation but must reproduce the per-example
//! trajectory to ~1e-8 (covered by tests).

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::cells::{Architecture, DropoutState, ModelConfig};
use crate::expr::{Equation, Label};
use crate::graph::Graph;
use crate::model::{Model, ModelError};
use crate::params::{accumulate_grads, AdamConfig, GradMap, ParamStore};
use crate::rng::{stream, tag};
use crate::vocab::Vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    /// Per-example forward/backward, gradients summed then averaged.
    Accumulate,
    /// Same window grouped by tree skeleton, one backward per group.
    ShapeGrouped,
}

impl Default for BatchMode {
    fn default() -> Self {
        BatchMode::Accumulate
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelConfig,
    #[serde(default = "d_lr")]
    pub lr: f64,
    #[serde(default = "d_beta1")]
    pub beta1: f64,
    #[serde(default = "d_beta2")]
    pub beta2: f64,
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_wd")]
    pub weight_decay: f64,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
    #[serde(default = "d_epochs")]
    pub max_epochs: usize,
    #[serde(default = "d_patience")]
    pub patience: usize,
    /// Fraction of the training file to use, drawn once per seed.
    #[serde(default = "d_one")]
    pub subsample: f64,
    #[serde(default)]
    pub batch_mode: BatchMode,
}

fn d_lr() -> f64 {
    0.001
}
fn d_beta1() -> f64 {
    0.9
}
fn d_beta2() -> f64 {
    0.999
}
fn d_eps() -> f64 {
    1e-8
}
fn d_wd() -> f64 {
    1e-5
}
fn d_batch() -> usize {
    32
}
fn d_epochs() -> usize {
    50
}
fn d_patience() -> usize {
    10
}
fn d_one() -> f64 {
    1.0
}

impl TrainConfig {
    pub fn new(model: ModelConfig) -> TrainConfig {
        TrainConfig {
            model,
            lr: d_lr(),
            beta1: d_beta1(),
            beta2: d_beta2(),
            eps: d_eps(),
            weight_decay: d_wd(),
            batch_size: d_batch(),
            max_epochs: d_epochs(),
            patience: d_patience(),
            subsample: d_one(),
            batch_mode: BatchMode::default(),
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        self.model.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        if self.lr <= 0.0 || self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(TrainError::Config(
                "lr, batch_size, max_epochs, patience must be positive".into(),
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(TrainError::Config(format!(
                "subsample fraction {} outside (0, 1]",
                self.subsample
            )));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    /// Hex digest identifying this configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Grid axes; the cross product (restricted to axes the architecture
/// actually has) is trained per seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    #[serde(default = "d_grid_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "d_grid_dropout")]
    pub dropout: Vec<f64>,
    #[serde(default = "d_grid_stack")]
    pub stack: Vec<usize>,
}

fn d_grid_hidden() -> Vec<usize> {
    vec![50, 55, 60, 80, 100, 120]
}
fn d_grid_dropout() -> Vec<f64> {
    vec![0.0, 0.1, 0.15, 0.2, 0.25]
}
fn d_grid_stack() -> Vec<usize> {
    vec![1, 2, 3, 4, 5, 7, 14]
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { hidden: d_grid_hidden(), dropout: d_grid_dropout(), stack: d_grid_stack() }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.hidden.is_empty() || self.dropout.is_empty() || self.stack.is_empty() {
            return Err(TrainError::Config("grid axes must be non-empty".into()));
        }
        if self.hidden.iter().any(|&h| h == 0) || self.stack.iter().any(|&p| p == 0) {
            return Err(TrainError::Config("grid values must be positive".into()));
        }
        if self.dropout.iter().any(|&d| !(0.0..1.0).contains(&d)) {
            return Err(TrainError::Config("grid dropout values must lie in [0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum TrainError {
    Config(String),
    Model(ModelError),
    Io(std::io::Error),
    /// Loss became non-finite; names the offending equation.
    NanLoss { epoch: usize, equation: String },
    EmptySplit(&'static str),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::Config(m) => write!(f, "train config: {m}"),
            TrainError::Model(e) => write!(f, "{e}"),
            TrainError::Io(e) => write!(f, "io: {e}"),
            TrainError::NanLoss { epoch, equation } => {
                write!(f, "non-finite loss at epoch {epoch} on equation {equation}")
            }
            TrainError::EmptySplit(which) => write!(f, "{which} split is empty"),
        }
    }
}

impl std::error::Error for TrainError {}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(e)
    }
}

impl From<std::io::Error> for TrainError {
    fn from(e: std::io::Error) -> Self {
        TrainError::Io(e)
    }
}

/// Accuracy/precision/recall/loss of one split for one epoch.
/// "Correct" is the positive class; an undefined ratio (no positive
/// predictions, or no positive examples) reads as 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitStats {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub loss: f64,
    pub count: usize,
}

/// Confusion-count accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct StatsAccum {
    tp: usize,
    tn: usize,
    fp: usize,
    fn_: usize,
    loss_sum: f64,
}

impl StatsAccum {
    pub fn push(&mut self, predicted: Label, actual: Label, loss: f64) {
        match (predicted, actual) {
            (Label::Correct, Label::Correct) => self.tp += 1,
            (Label::Correct, Label::Incorrect) => self.fp += 1,
            (Label::Incorrect, Label::Correct) => self.fn_ += 1,
            (Label::Incorrect, Label::Incorrect) => self.tn += 1,
        }
        self.loss_sum += loss;
    }

    pub fn finish(self) -> SplitStats {
        let n = self.tp + self.tn + self.fp + self.fn_;
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        SplitStats {
            accuracy: ratio(self.tp + self.tn, n),
            precision: ratio(self.tp, self.tp + self.fp),
            recall: ratio(self.tp, self.tp + self.fn_),
            loss: if n == 0 { 0.0 } else { self.loss_sum / n as f64 },
            count: n,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train: SplitStats,
    pub validation: SplitStats,
}

/// Everything one run produced.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub epochs: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_validation_accuracy: f64,
    pub checkpoint_path: Option<PathBuf>,
    pub majority: Option<Label>,
}

/// Indices of a seeded uniform subsample; `fraction == 1.0` is the
/// identity. Order is preserved.
pub fn subsample_indices(
    len: usize,
    fraction: f64,
    seed: u64,
) -> Result<Vec<usize>, TrainError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(TrainError::Config(format!("subsample fraction {fraction} outside (0, 1]")));
    }
    if fraction == 1.0 {
        return Ok((0..len).collect());
    }
    let keep = ((len as f64) * fraction).round() as usize;
    let keep = keep.clamp(1, len);
    let mut idx: Vec<usize> = (0..len).collect();
    let mut rng = stream(seed, &[tag::SUBSAMPLE]);
    idx.shuffle(&mut rng);
    let mut chosen: Vec<usize> = idx.into_iter().take(keep).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Leaf-collapsed structural signature; equations with equal skeletons
/// touch the same parameter bundles in the same order.
fn skeleton(eq: &Equation) -> String {
    fn walk(e: &crate::expr::Expr, out: &mut String) {
        match e {
            crate::expr::Expr::Func(f, args) => {
                out.push('(');
                out.push_str(f.name());
                for a in args {
                    out.push(' ');
                    walk(a, out);
                }
                out.push(')');
            }
            _ => out.push('.'),
        }
    }
    let mut s = String::new();
    walk(&eq.lhs, &mut s);
    s.push('=');
    walk(&eq.rhs, &mut s);
    s
}

fn eval_split(model: &Model, store: &ParamStore, data: &[Equation]) -> Result<SplitStats, TrainError> {
    let mut acc = StatsAccum::default();
    for eq in data {
        let p = model.score(store, eq)?;
        let predicted = if p >= 0.5 { Label::Correct } else { Label::Incorrect };
        let y = eq.label.as_int() as f64;
        // BCE from the probability (matches the loss node's value).
        let loss = bce_from_p(p, y);
        acc.push(predicted, eq.label, loss);
    }
    Ok(acc.finish())
}

fn bce_from_p(p: f64, y: f64) -> f64 {
    let eps = 1e-12;
    -(y * (p.max(eps)).ln() + (1.0 - y) * ((1.0 - p).max(eps)).ln())
}

fn write_metrics_csv(path: &Path, epochs: &[EpochMetrics]) -> Result<(), TrainError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "epoch,split,accuracy,precision,recall,loss")?;
    for e in epochs {
        for (name, s) in [("train", &e.train), ("validation", &e.validation)] {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                e.epoch, name, s.accuracy, s.precision, s.recall, s.loss
            )?;
        }
    }
    Ok(())
}

/// Majority run: memorize the most frequent training label (ties go to
/// Correct) and measure it on both splits.
fn train_majority(
    config: &TrainConfig,
    vocab: &Vocab,
    train_data: &[Equation],
    val_data: &[Equation],
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunRecord, TrainError> {
    let correct = train_data.iter().filter(|e| e.label == Label::Correct).count();
    let majority =
        if 2 * correct >= train_data.len() { Label::Correct } else { Label::Incorrect };
    let mut model = Model::new(config.model.clone(), vocab.clone())?;
    model.majority = Some(majority);
    let store = ParamStore::new();
    let measure = |data: &[Equation]| {
        let mut acc = StatsAccum::default();
        for eq in data {
            let p = if majority == Label::Correct { 1.0 } else { 0.0 };
            acc.push(majority, eq.label, bce_from_p(p, eq.label.as_int() as f64));
        }
        acc.finish()
    };
    let epochs = vec![EpochMetrics {
        epoch: 1,
        train: measure(train_data),
        validation: measure(val_data),
    }];
    let mut checkpoint_path = None;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let ckpt = dir.join("best.ckpt");
        model.save(&store, &ckpt)?;
        write_metrics_csv(&dir.join("metrics.csv"), &epochs)?;
        checkpoint_path = Some(ckpt);
    }
    Ok(RunRecord {
        config_hash: config.hash(),
        seed,
        best_validation_accuracy: epochs[0].validation.accuracy,
        best_epoch: 1,
        epochs,
        checkpoint_path,
        majority: Some(majority),
    })
}

/// Run one training job. `out_dir`, when given, receives `metrics.csv`
/// and `best.ckpt` (the epoch with the highest validation accuracy).
pub fn train(
    config: &TrainConfig,
    vocab: &Vocab,
    train_data: &[Equation],
    val_data: &[Equation],
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunRecord, TrainError> {
    config.validate()?;
    if train_data.is_empty() {
        return Err(TrainError::EmptySplit("train"));
    }
    if val_data.is_empty() {
        return Err(TrainError::EmptySplit("validation"));
    }
    if config.model.architecture == Architecture::MajorityClass {
        return train_majority(config, vocab, train_data, val_data, seed, out_dir);
    }

    let sub = subsample_indices(train_data.len(), config.subsample, seed)?;
    let train_data: Vec<Equation> = sub.iter().map(|&i| train_data[i].clone()).collect();

    let model = Model::new(config.model.clone(), vocab.clone())?;
    let mut store = model.init_params(seed);
    let adam = config.adam();

    let mut epochs: Vec<EpochMetrics> = Vec::new();
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut best_snapshot: Option<Vec<u8>> = None;
    let mut stale = 0usize;

    let mut checkpoint_path = None;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    for epoch in 1..=config.max_epochs {
        let mut order: Vec<usize> = (0..train_data.len()).collect();
        order.shuffle(&mut stream(seed, &[tag::SHUFFLE, epoch as u64]));

        let mut train_acc = StatsAccum::default();
        for batch in order.chunks(config.batch_size) {
            let grads = match config.batch_mode {
                BatchMode::Accumulate => batch_accumulate(
                    &model,
                    &store,
                    &train_data,
                    batch,
                    config,
                    seed,
                    epoch,
                    &mut train_acc,
                )?,
                BatchMode::ShapeGrouped => batch_shape_grouped(
                    &model,
                    &store,
                    &train_data,
                    batch,
                    config,
                    seed,
                    epoch,
                    &mut train_acc,
                )?,
            };
            store
                .adam_step(&grads, &adam)
                .map_err(|e| TrainError::Config(e.to_string()))?;
        }

        let train_stats = train_acc.finish();
        let val_stats = eval_split(&model, &store, val_data)?;
        epochs.push(EpochMetrics { epoch, train: train_stats, validation: val_stats });

        if val_stats.accuracy > best_acc {
            best_acc = val_stats.accuracy;
            best_epoch = epoch;
            stale = 0;
            // Snapshot the best parameters in memory as checkpoint bytes.
            best_snapshot = Some(checkpoint_bytes(&model, &store)?);
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    if let (Some(dir), Some(bytes)) = (out_dir, &best_snapshot) {
        let ckpt = dir.join("best.ckpt");
        std::fs::write(&ckpt, bytes)?;
        write_metrics_csv(&dir.join("metrics.csv"), &epochs)?;
        checkpoint_path = Some(ckpt);
    }

    Ok(RunRecord {
        config_hash: config.hash(),
        seed,
        epochs,
        best_epoch,
        best_validation_accuracy: best_acc,
        checkpoint_path,
        majority: None,
    })
}

/// Serialize a (model, store) pair to checkpoint bytes in memory. The
/// checkpoint writer works on paths, so this round-trips through a
/// uniquely named temp file (unique per process AND per call, since
/// parallel tests share a process).
fn checkpoint_bytes(model: &Model, store: &ParamStore) -> Result<Vec<u8>, TrainError> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nonce = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::env::temp_dir()
        .join(format!("treesmu-snap-{}-{nonce}.ckpt", std::process::id()));
    model.save(store, &path)?;
    let bytes = std::fs::read(&path)?;
    let _ = std::fs::remove_file(&path);
    Ok(bytes)
}

/// Per-example dropout stream: independent of execution order so both
/// batch modes draw identical masks.
fn dropout_for(
    config: &TrainConfig,
    seed: u64,
    epoch: usize,
    example: usize,
) -> Option<DropoutState> {
    if config.model.dropout == 0.0 {
        return None;
    }
    Some(DropoutState {
        rng: stream(seed, &[tag::DROPOUT, epoch as u64, example as u64]),
        rate: config.model.dropout,
    })
}

#[allow(clippy::too_many_arguments)]
fn batch_accumulate(
    model: &Model,
    store: &ParamStore,
    data: &[Equation],
    batch: &[usize],
    config: &TrainConfig,
    seed: u64,
    epoch: usize,
    stats: &mut StatsAccum,
) -> Result<GradMap, TrainError> {
    let mut total = GradMap::new();
    for &i in batch {
        let eq = &data[i];
        let mut drop = dropout_for(config, seed, epoch, i);
        let mut g = Graph::new();
        let (logit, loss) = model.equation_loss(&mut g, store, eq, &mut drop)?;
        let loss_v = g.value(loss).item();
        if !loss_v.is_finite() {
            return Err(TrainError::NanLoss { epoch, equation: eq.text() });
        }
        let p = crate::graph::sigmoid(g.value(logit).item());
        let predicted = if p >= 0.5 { Label::Correct } else { Label::Incorrect };
        stats.push(predicted, eq.label, loss_v);
        g.backward(loss).map_err(|e| TrainError::Config(e.to_string()))?;
        accumulate_grads(&mut total, &g.param_grads());
    }
    let scale = 1.0 / batch.len() as f64;
    for t in total.values_mut() {
        t.scale_in_place(scale);
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn batch_shape_grouped(
    model: &Model,
    store: &ParamStore,
    data: &[Equation],
    batch: &[usize],
    config: &TrainConfig,
    seed: u64,
    epoch: usize,
    stats: &mut StatsAccum,
) -> Result<GradMap, TrainError> {
    // Stable grouping by skeleton: first-seen order, original order inside
    // each group.
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for &i in batch {
        let sk = skeleton(&data[i]);
        match groups.iter_mut().find(|(s, _)| *s == sk) {
            Some((_, v)) => v.push(i),
            None => groups.push((sk, vec![i])),
        }
    }
    let mut total = GradMap::new();
    for (_, members) in &groups {
        let mut g = Graph::new();
        let mut group_loss = None;
        for &i in members {
            let eq = &data[i];
            let mut drop = dropout_for(config, seed, epoch, i);
            let (logit, loss) = model.equation_loss(&mut g, store, eq, &mut drop)?;
            let loss_v = g.value(loss).item();
            if !loss_v.is_finite() {
                return Err(TrainError::NanLoss { epoch, equation: eq.text() });
            }
            let p = crate::graph::sigmoid(g.value(logit).item());
            let predicted = if p >= 0.5 { Label::Correct } else { Label::Incorrect };
            stats.push(predicted, eq.label, loss_v);
            group_loss = Some(match group_loss {
                None => loss,
                Some(acc) => g.add(acc, loss).map_err(|e| TrainError::Config(e.to_string()))?,
            });
        }
        let root = group_loss.expect("groups are non-empty");
        g.backward(root).map_err(|e| TrainError::Config(e.to_string()))?;
        accumulate_grads(&mut total, &g.param_grads());
    }
    let scale = 1.0 / batch.len() as f64;
    for t in total.values_mut() {
        t.scale_in_place(scale);
    }
    Ok(total)
}

/// One leaderboard row: a grid point with its per-seed outcomes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LeaderboardEntry {
    pub hidden: usize,
    pub dropout: f64,
    pub stack: usize,
    pub mean_validation_accuracy: f64,
    pub per_seed: Vec<RunRecord>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GridResult {
    pub architecture: Architecture,
    pub entries: Vec<LeaderboardEntry>,
}

impl GridResult {
    pub fn best(&self) -> &LeaderboardEntry {
        &self.entries[0]
    }
}

/// Train every grid point × seed, rank by mean validation accuracy, and
/// (optionally) write `leaderboard.json` plus per-run artifacts under
/// `out_dir/g<index>-s<seed>/`. Stack sizes are only enumerated for
/// architectures that have a stack.
pub fn grid_search(
    base: &TrainConfig,
    grid: &GridSpec,
    seeds: &[u64],
    vocab: &Vocab,
    train_data: &[Equation],
    val_data: &[Equation],
    out_dir: Option<&Path>,
) -> Result<GridResult, TrainError> {
    grid.validate()?;
    if seeds.is_empty() {
        return Err(TrainError::Config("need at least one seed".into()));
    }
    let stacks: Vec<usize> =
        if base.model.architecture.has_stack() { grid.stack.clone() } else { vec![base.model.stack] };
    let mut entries = Vec::new();
    let mut gi = 0usize;
    for &hidden in &grid.hidden {
        for &dropout in &grid.dropout {
            for &stack in &stacks {
                let mut cfg = base.clone();
                cfg.model.hidden = hidden;
                cfg.model.dropout = dropout;
                cfg.model.stack = stack;
                if cfg.model.architecture.has_stack() && cfg.model.top_k > stack {
                    cfg.model.top_k = 1;
                }
                let mut per_seed = Vec::new();
                for &seed in seeds {
                    let run_dir = out_dir.map(|d| d.join(format!("g{gi}-s{seed}")));
                    let rec =
                        train(&cfg, vocab, train_data, val_data, seed, run_dir.as_deref())?;
                    per_seed.push(rec);
                }
                let mean = per_seed
                    .iter()
                    .map(|r| r.best_validation_accuracy)
                    .sum::<f64>()
                    / per_seed.len() as f64;
                entries.push(LeaderboardEntry {
                    hidden,
                    dropout,
                    stack,
                    mean_validation_accuracy: mean,
                    per_seed,
                });
                gi += 1;
            }
        }
    }
    entries.sort_by(|a, b| {
        b.mean_validation_accuracy
            .partial_cmp(&a.mean_validation_accuracy)
            .expect("accuracies are finite")
    });
    let result = GridResult { architecture: base.model.architecture, entries };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&result)
            .map_err(|e| TrainError::Config(e.to_string()))?;
        std::fs::write(dir.join("leaderboard.json"), json)?;
    }
    Ok(result)
}

/// Subsample study entry point: identical to [`train`] with the fraction
/// plugged into the config.
pub fn subsample_train(
    config: &TrainConfig,
    fraction: f64,
    vocab: &Vocab,
    train_data: &[Equation],
    val_data: &[Equation],
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<RunRecord, TrainError> {
    let mut cfg = config.clone();
    cfg.subsample = fraction;
    train(&cfg, vocab, train_data, val_data, seed, out_dir)
}
