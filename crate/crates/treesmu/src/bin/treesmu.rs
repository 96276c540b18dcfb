//! Command-line front end: wires JSON config files to the library's
//! generate / train / grid / eval / complete / probe / embed entry points,
//! stamps every artifact directory with a manifest, and reports failures
//! as a single machine-parsable line on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use treesmu::datagen::{self, DatasetConfig};
use treesmu::eval::{self, CompletionJudge};
use treesmu::expr::read_equations;
use treesmu::manifest::RunManifest;
use treesmu::model::Model;
use treesmu::training::{self, GridSpec, TrainConfig};
use treesmu::vocab::Vocab;

#[derive(Parser)]
#[command(
    name = "treesmu",
    version,
    about = "Equation-verification workbench: dataset generation, tree-model training, evaluation"
)]
struct Cli {
    /// Master seed: overrides the seed(s) in the loaded config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Artifact directory (required by generate/train/grid, optional elsewhere).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled equation dataset: splits, completion items, embedding pool.
    Generate {
        /// JSON dataset config (seed, counts per depth, splits, ...).
        #[arg(long)]
        config: PathBuf,
    },
    /// Train one architecture over one or more seeds.
    Train {
        /// JSON train config: {"train": {...}, "data": {...}, "seeds": [...]}.
        #[arg(long)]
        config: PathBuf,
    },
    /// Grid search over hidden size, dropout, and stack size.
    Grid {
        /// JSON grid config: {"train": {...}, "grid": {...}, "data": {...}, "seeds": [...]}.
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a checkpoint; --mode selects the task.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Equation file (verify/probe), completion file (complete), or
        /// embedding pool (embed).
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalMode::Verify)]
        mode: EvalMode,
        /// Keep only equations at least this deep (verify mode).
        #[arg(long)]
        min_depth: Option<u32>,
        /// Keep only equations at most this deep (verify mode).
        #[arg(long)]
        max_depth: Option<u32>,
    },
    /// Rank candidates for fill-in-the-blank completion items.
    Complete {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Completion items JSONL (from `generate`).
        #[arg(long)]
        items: PathBuf,
        /// Comma-separated K values for top-K accuracy.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 5, 10])]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value_t = JudgeArg::Oracle)]
        judge: JudgeArg,
        /// Candidate pool size cap.
        #[arg(long, default_value_t = 2000)]
        pool_cap: usize,
        /// Numeric-oracle sample count per candidate.
        #[arg(long, default_value_t = 16)]
        oracle_samples: usize,
    },
    /// Average stack rows in use at the root, per equation depth.
    Probe {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Equation file to probe.
        #[arg(long)]
        test: PathBuf,
        /// Row-usage threshold on the L2 norm.
        #[arg(long, default_value_t = eval::DEFAULT_TAU)]
        tau: f64,
    },
    /// Export root embeddings for class-labeled constant expressions.
    Embed {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Embedding pool JSONL (from `generate`).
        #[arg(long)]
        pool: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Verify,
    Complete,
    Probe,
    Embed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JudgeArg {
    Oracle,
    Gold,
}

impl From<JudgeArg> for CompletionJudge {
    fn from(j: JudgeArg) -> Self {
        match j {
            JudgeArg::Oracle => CompletionJudge::Oracle,
            JudgeArg::Gold => CompletionJudge::Gold,
        }
    }
}

/// Train-file schema: optimizer/model settings, data paths, seed list.
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    train: TrainConfig,
    data: DataPaths,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    train: TrainConfig,
    #[serde(default)]
    grid: GridSpec,
    data: DataPaths,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DataPaths {
    train: PathBuf,
    validation: PathBuf,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: jobs: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Errors are rendered as `error: <subcommand>: <detail>` on one line.
fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Generate { ref config } => cmd_generate(&cli, config),
        Command::Train { ref config } => cmd_train(&cli, config),
        Command::Grid { ref config } => cmd_grid(&cli, config),
        Command::Eval { ref checkpoint, ref test, mode, min_depth, max_depth } => match mode {
            EvalMode::Verify => {
                cmd_verify(&cli, checkpoint, test, min_depth, max_depth)
            }
            EvalMode::Complete => cmd_complete(
                &cli,
                checkpoint,
                test,
                &[1, 5, 10],
                CompletionJudge::Oracle,
                2000,
                16,
            ),
            EvalMode::Probe => cmd_probe(&cli, checkpoint, test, eval::DEFAULT_TAU),
            EvalMode::Embed => cmd_embed(&cli, checkpoint, test),
        },
        Command::Complete {
            ref checkpoint,
            ref items,
            ref k,
            judge,
            pool_cap,
            oracle_samples,
        } => cmd_complete(&cli, checkpoint, items, k, judge.into(), pool_cap, oracle_samples),
        Command::Probe { ref checkpoint, ref test, tau } => {
            cmd_probe(&cli, checkpoint, test, tau)
        }
        Command::Embed { ref checkpoint, ref pool } => cmd_embed(&cli, checkpoint, pool),
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{what}: cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{what}: {}: {e}", path.display()))
}

fn require_out(cli: &Cli, sub: &str) -> Result<PathBuf, String> {
    cli.out.clone().ok_or_else(|| format!("{sub}: --out <dir> is required"))
}

fn load_checkpoint(path: &Path, sub: &str) -> Result<(Model, treesmu::params::ParamStore), String> {
    Model::load(path).map_err(|e| format!("{sub}: {}: {e}", path.display()))
}

fn cmd_generate(cli: &Cli, config_path: &Path) -> Result<(), String> {
    const SUB: &str = "generate";
    let mut cfg: DatasetConfig = load_json(config_path, SUB)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.test_seed = None; // re-derive as seed + 1
    }
    let out = require_out(cli, SUB)?;
    std::fs::create_dir_all(&out).map_err(|e| format!("{SUB}: {e}"))?;
    let summary = datagen::build_dataset(&cfg, &out).map_err(|e| format!("{SUB}: {e}"))?;

    let summary_json =
        serde_json::to_string_pretty(&summary).map_err(|e| format!("{SUB}: {e}"))?;
    std::fs::write(out.join("dataset.json"), summary_json).map_err(|e| format!("{SUB}: {e}"))?;

    let mut manifest = RunManifest::new(
        SUB,
        serde_json::to_value(&cfg).map_err(|e| format!("{SUB}: {e}"))?,
        vec![cfg.seed, summary.test_seed],
    );
    manifest.add_input(config_path).map_err(|e| format!("{SUB}: {e}"))?;
    for split in summary.splits.values() {
        manifest.add_output(&out.join(&split.file), &out);
    }
    if summary.completion_items > 0 {
        manifest.add_output(&out.join("completion.jsonl"), &out);
    }
    if summary.embed_pool > 0 {
        manifest.add_output(&out.join("embed_pool.jsonl"), &out);
    }
    manifest.add_output(&out.join("dataset.json"), &out);
    manifest.write(&out).map_err(|e| format!("{SUB}: {e}"))?;

    for (name, s) in &summary.splits {
        println!(
            "{name}: {} equations ({} correct / {} incorrect, balance {:.3}) -> {}",
            s.count, s.correct, s.incorrect, s.balance, s.file
        );
    }
    println!(
        "completion items: {}  embed pool: {}  overlap dropped: {}",
        summary.completion_items, summary.embed_pool, summary.overlap_dropped
    );
    Ok(())
}

fn read_train_val(data: &DataPaths, sub: &str) -> Result<(Vec<treesmu::expr::Equation>, Vec<treesmu::expr::Equation>), String> {
    let train = read_equations(&data.train)
        .map_err(|e| format!("{sub}: {}: {e}", data.train.display()))?;
    let val = read_equations(&data.validation)
        .map_err(|e| format!("{sub}: {}: {e}", data.validation.display()))?;
    Ok((train, val))
}

fn cmd_train(cli: &Cli, config_path: &Path) -> Result<(), String> {
    const SUB: &str = "train";
    let file: TrainFile = load_json(config_path, SUB)?;
    let seeds = cli.seed.map(|s| vec![s]).unwrap_or(file.seeds);
    let out = require_out(cli, SUB)?;
    let (train_data, val_data) = read_train_val(&file.data, SUB)?;
    let vocab = Vocab::canonical();

    let mut records = Vec::new();
    for &seed in &seeds {
        let run_dir = out.join(format!("s{seed}"));
        let rec = training::train(&file.train, &vocab, &train_data, &val_data, seed, Some(&run_dir))
            .map_err(|e| format!("{SUB}: {e}"))?;
        println!(
            "seed {seed}: best epoch {} validation accuracy {:.4} ({} epochs run)",
            rec.best_epoch,
            rec.best_validation_accuracy,
            rec.epochs.len()
        );
        records.push(rec);
    }
    let mean = records.iter().map(|r| r.best_validation_accuracy).sum::<f64>()
        / records.len() as f64;
    println!("mean validation accuracy over {} seed(s): {mean:.4}", records.len());

    let runs_json = serde_json::to_string_pretty(&records).map_err(|e| format!("{SUB}: {e}"))?;
    std::fs::write(out.join("runs.json"), runs_json).map_err(|e| format!("{SUB}: {e}"))?;

    let mut manifest = RunManifest::new(
        SUB,
        serde_json::to_value(&file.train).map_err(|e| format!("{SUB}: {e}"))?,
        seeds.clone(),
    );
    for input in [config_path, file.data.train.as_path(), file.data.validation.as_path()] {
        manifest.add_input(input).map_err(|e| format!("{SUB}: {e}"))?;
    }
    manifest.add_output(&out.join("runs.json"), &out);
    for &seed in &seeds {
        manifest.add_output(&out.join(format!("s{seed}/best.ckpt")), &out);
        manifest.add_output(&out.join(format!("s{seed}/metrics.csv")), &out);
    }
    manifest.write(&out).map_err(|e| format!("{SUB}: {e}"))?;
    Ok(())
}

fn cmd_grid(cli: &Cli, config_path: &Path) -> Result<(), String> {
    const SUB: &str = "grid";
    let file: GridFile = load_json(config_path, SUB)?;
    let seeds = cli.seed.map(|s| vec![s]).unwrap_or(file.seeds);
    let out = require_out(cli, SUB)?;
    let (train_data, val_data) = read_train_val(&file.data, SUB)?;
    let vocab = Vocab::canonical();

    let result = training::grid_search(
        &file.train,
        &file.grid,
        &seeds,
        &vocab,
        &train_data,
        &val_data,
        Some(&out),
    )
    .map_err(|e| format!("{SUB}: {e}"))?;

    println!("architecture: {}", result.architecture);
    println!("rank,hidden,dropout,stack,mean_validation_accuracy");
    for (i, e) in result.entries.iter().enumerate() {
        println!(
            "{},{},{},{},{:.4}",
            i + 1,
            e.hidden,
            e.dropout,
            e.stack,
            e.mean_validation_accuracy
        );
    }

    let mut manifest = RunManifest::new(
        SUB,
        serde_json::json!({
            "train": file.train,
            "grid": file.grid,
        }),
        seeds,
    );
    for input in [config_path, file.data.train.as_path(), file.data.validation.as_path()] {
        manifest.add_input(input).map_err(|e| format!("{SUB}: {e}"))?;
    }
    manifest.add_output(&out.join("leaderboard.json"), &out);
    manifest.write(&out).map_err(|e| format!("{SUB}: {e}"))?;
    Ok(())
}

/// Shared tail for read-only evaluation subcommands: print the table,
/// optionally persist it (plus a manifest) under --out.
fn emit_table(
    cli: &Cli,
    sub: &str,
    file_name: &str,
    table: &str,
    config: serde_json::Value,
    inputs: &[&Path],
) -> Result<(), String> {
    print!("{table}");
    if let Some(out) = &cli.out {
        std::fs::create_dir_all(out).map_err(|e| format!("{sub}: {e}"))?;
        std::fs::write(out.join(file_name), table).map_err(|e| format!("{sub}: {e}"))?;
        let mut manifest = RunManifest::new(sub, config, cli.seed.into_iter().collect());
        for input in inputs {
            manifest.add_input(input).map_err(|e| format!("{sub}: {e}"))?;
        }
        manifest.add_output(&out.join(file_name), out);
        manifest.write(out).map_err(|e| format!("{sub}: {e}"))?;
    }
    Ok(())
}

fn cmd_verify(
    cli: &Cli,
    checkpoint: &Path,
    test: &Path,
    min_depth: Option<u32>,
    max_depth: Option<u32>,
) -> Result<(), String> {
    const SUB: &str = "eval";
    let (model, store) = load_checkpoint(checkpoint, SUB)?;
    let eqs = read_equations(test).map_err(|e| format!("{SUB}: {}: {e}", test.display()))?;
    let range = match (min_depth, max_depth) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(0), hi.unwrap_or(u32::MAX))),
    };
    let metrics = eval::run_verification_test(&model, &store, &eqs, range)
        .map_err(|e| format!("{SUB}: {e}"))?;
    emit_table(
        cli,
        SUB,
        "metrics.csv",
        &metrics.to_csv(),
        serde_json::json!({
            "checkpoint": checkpoint.display().to_string(),
            "mode": "verify",
            "min_depth": min_depth,
            "max_depth": max_depth,
        }),
        &[checkpoint, test],
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_complete(
    cli: &Cli,
    checkpoint: &Path,
    items_path: &Path,
    ks: &[usize],
    judge: CompletionJudge,
    pool_cap: usize,
    oracle_samples: usize,
) -> Result<(), String> {
    const SUB: &str = "complete";
    let (model, store) = load_checkpoint(checkpoint, SUB)?;
    let items = datagen::read_completion_items(items_path)
        .map_err(|e| format!("{SUB}: {}: {e}", items_path.display()))?;
    let pool = eval::candidate_pool(&model.vocab, pool_cap, cli.seed.unwrap_or(0));
    let outcome =
        eval::run_completion(&model, &store, &items, &pool, ks, judge, oracle_samples)
            .map_err(|e| format!("{SUB}: {e}"))?;
    emit_table(
        cli,
        SUB,
        "completion.csv",
        &outcome.to_csv(),
        serde_json::json!({
            "checkpoint": checkpoint.display().to_string(),
            "k": outcome.k_values,
            "judge": judge,
            "pool_size": outcome.pool_size,
            "oracle_samples": oracle_samples,
        }),
        &[checkpoint, items_path],
    )
}

fn cmd_probe(cli: &Cli, checkpoint: &Path, test: &Path, tau: f64) -> Result<(), String> {
    const SUB: &str = "probe";
    let (model, store) = load_checkpoint(checkpoint, SUB)?;
    let eqs = read_equations(test).map_err(|e| format!("{SUB}: {}: {e}", test.display()))?;
    let rows =
        eval::stack_usage_probe(&model, &store, &eqs, tau).map_err(|e| format!("{SUB}: {e}"))?;
    emit_table(
        cli,
        SUB,
        "probe.csv",
        &eval::probe_to_csv(&rows),
        serde_json::json!({
            "checkpoint": checkpoint.display().to_string(),
            "tau": tau,
        }),
        &[checkpoint, test],
    )
}

fn cmd_embed(cli: &Cli, checkpoint: &Path, pool_path: &Path) -> Result<(), String> {
    const SUB: &str = "embed";
    let (model, store) = load_checkpoint(checkpoint, SUB)?;
    let entries = datagen::read_embed_pool(pool_path)
        .map_err(|e| format!("{SUB}: {}: {e}", pool_path.display()))?;
    let csv =
        eval::export_embeddings(&model, &store, &entries).map_err(|e| format!("{SUB}: {e}"))?;
    emit_table(
        cli,
        SUB,
        "embeddings.csv",
        &csv,
        serde_json::json!({
            "checkpoint": checkpoint.display().to_string(),
            "entries": entries.len(),
        }),
        &[checkpoint, pool_path],
    )
}
