//! Productivity: train on shallow equations, test on strictly deeper ones.
//!
//! The question this workbench exists to ask: does a differentiable stack
//! help a recursive network generalize to equation depths it never saw in
//! training? This example runs a scaled-down version of that protocol —
//! train on depths 1–2, test on depths 3–4 — for the tree RNN, tree LSTM,
//! and tree stack memory unit, plus the majority-class floor, and prints
//! mean test accuracy per architecture.
//!
//! The full-size protocol (deeper splits, more seeds, n = 50) lives in the
//! acceptance test suite; expect a couple of minutes here in debug mode, or
//! pass `--release`.
//!
//! ```bash
//! cargo run --release --example productivity_study
//! ```

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::datagen::{generate, majority_stats, GenConfig};
use treesmu::eval::run_verification_test;
use treesmu::expr::Equation;
use treesmu::model::Model;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

fn main() {
    // Shallow pool for training/validation, strictly deeper pool for test.
    let shallow: BTreeMap<u32, usize> = [(1u32, 120), (2, 400)].into();
    let deep: BTreeMap<u32, usize> = [(3u32, 150), (4, 150)].into();
    let train_pool = generate(&GenConfig::new(101, shallow)).expect("shallow pool");
    let test_pool = generate(&GenConfig::new(202, deep)).expect("deep pool");

    let mut train_data: Vec<Equation> = Vec::new();
    let mut val_data: Vec<Equation> = Vec::new();
    for (i, eq) in train_pool.equations.into_iter().enumerate() {
        if i % 6 == 0 {
            val_data.push(eq);
        } else {
            train_data.push(eq);
        }
    }
    let test_data = test_pool.equations;
    println!(
        "train {} (depths 1-2)   validation {}   test {} (depths 3-4)",
        train_data.len(),
        val_data.len(),
        test_data.len()
    );
    let (maj_label, _, maj_frac) = majority_stats(&train_data);
    let maj_test_acc = test_data.iter().filter(|e| e.label == maj_label).count() as f64
        / test_data.len() as f64;
    println!("majority class on train: {maj_label:?} ({:.1}%)\n", 100.0 * maj_frac);

    let seeds = [1u64, 2];
    let vocab = Vocab::canonical();
    let archs =
        [Architecture::TreeRnn, Architecture::TreeLstm, Architecture::TreeSmu];

    println!(
        "{:<10} {:>7} {:>16} {:>16}",
        "model", "seed", "val_acc(shallow)", "test_acc(deep)"
    );
    let mut means: Vec<(Architecture, f64)> = Vec::new();
    for arch in archs {
        let mut accs = Vec::new();
        for &seed in &seeds {
            let model_cfg = ModelConfig {
                hidden: 20,
                stack: 2,
                ..ModelConfig::new(arch)
            };
            let mut cfg = TrainConfig::new(model_cfg.clone());
            cfg.lr = 0.01;
            cfg.max_epochs = 15;
            cfg.patience = 15;
            // Train into a temp dir so the early-stopping checkpoint (best
            // validation epoch, not the last one) can be loaded back.
            let dir = tempfile::tempdir().expect("tempdir");
            let rec = train(&cfg, &vocab, &train_data, &val_data, seed, Some(dir.path()))
                .expect("training succeeds");
            let ckpt = rec.checkpoint_path.expect("checkpoint written");
            let (model, store) = Model::load(&ckpt).expect("checkpoint loads");
            let metrics = run_verification_test(&model, &store, &test_data, None)
                .expect("evaluation succeeds");
            let acc = metrics.overall.accuracy();
            println!(
                "{:<10} {:>7} {:>16.4} {:>16.4}",
                arch.name(),
                seed,
                rec.best_validation_accuracy,
                acc
            );
            accs.push(acc);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        means.push((arch, mean));
    }

    println!("\nmean test accuracy on unseen depths:");
    for (arch, mean) in &means {
        println!("  {:<10} {:.4}", arch.name(), mean);
    }
    println!("  {:<10} {:.4}  (predict train-majority everywhere)", "majority", maj_test_acc);
}
