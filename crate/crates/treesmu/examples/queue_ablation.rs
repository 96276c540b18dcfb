//! Stack order vs queue order: same arithmetic, mirrored memory.
//!
//! The queue ablation runs the stack cell's exact update rules with the
//! write/read ends swapped: new content enters at the back row while the
//! readout watches the front. Two demonstrations:
//!
//! 1. With p = 1 row there is no "order" to differ on — the two cells are
//!    the same function, and their outputs match to machine precision.
//! 2. With p > 1 they diverge. The train-shallow/test-deep protocol below
//!    shows how the two orders are compared; at this toy scale (two seeds,
//!    a few hundred equations) run-to-run noise exceeds the ordering effect,
//!    so treat the table as the shape of the experiment, not its verdict.
//!
//! ```bash
//! cargo run --release --example queue_ablation
//! ```

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::datagen::{generate, GenConfig};
use treesmu::eval::run_verification_test;
use treesmu::expr::{Equation, Label};
use treesmu::model::Model;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

/// Score one equation with both architectures sharing identical parameter
/// values (keys differ only in the `smu/` vs `queue/` prefix).
fn paired_scores(eq: &Equation, stack_rows: usize) -> (f64, f64) {
    let smu_cfg = ModelConfig {
        hidden: 10,
        stack: stack_rows,
        ..ModelConfig::new(Architecture::TreeSmu)
    };
    let queue_cfg = ModelConfig {
        architecture: Architecture::TreeQueue,
        ..smu_cfg.clone()
    };
    let vocab = Vocab::canonical();
    let smu = Model::new(smu_cfg, vocab.clone()).expect("valid");
    let queue = Model::new(queue_cfg, vocab).expect("valid");
    let smu_store = smu.init_params(123);
    let mut queue_store = queue.init_params(123);
    // Same draws land in same-named tensors; rewrite prefixes to mirror them.
    for key in smu_store.keys().map(String::from).collect::<Vec<_>>() {
        if let Some(rest) = key.strip_prefix("smu/") {
            *queue_store.get_mut(&format!("queue/{rest}")).expect("mirrored key") =
                smu_store.get(&key).expect("present").clone();
        }
    }
    let ps = smu.score(&smu_store, eq).expect("scores");
    let pq = queue.score(&queue_store, eq).expect("scores");
    (ps, pq)
}

fn main() {
    let eq = Equation::parse(
        "(= (+ (sin (* 2 x)) (cos y)) (sqrt (+ 1 (tan z))))",
        Label::Correct,
    )
    .expect("parses");

    println!("same parameters, p = 1:");
    let (ps, pq) = paired_scores(&eq, 1);
    println!("  stack p(Correct) = {ps:.15}");
    println!("  queue p(Correct) = {pq:.15}");
    println!("  |difference|     = {:.3e}  (identical by construction)", (ps - pq).abs());
    assert!((ps - pq).abs() < 1e-12);

    println!("\nsame parameters, p = 3:");
    let (ps, pq) = paired_scores(&eq, 3);
    println!("  stack p(Correct) = {ps:.15}");
    println!("  queue p(Correct) = {pq:.15}");
    println!("  |difference|     = {:.3e}  (order now matters)", (ps - pq).abs());
    assert!((ps - pq).abs() > 1e-12);

    // Train both on shallow equations, evaluate on strictly deeper ones.
    let shallow: BTreeMap<u32, usize> = [(1u32, 100), (2, 350)].into();
    let deep: BTreeMap<u32, usize> = [(3u32, 150), (4, 150)].into();
    let train_pool = generate(&GenConfig::new(41, shallow)).expect("shallow pool");
    let test_pool = generate(&GenConfig::new(42, deep)).expect("deep pool");
    let mut train_data: Vec<Equation> = Vec::new();
    let mut val_data: Vec<Equation> = Vec::new();
    for (i, eq) in train_pool.equations.into_iter().enumerate() {
        if i % 6 == 0 {
            val_data.push(eq);
        } else {
            train_data.push(eq);
        }
    }
    println!(
        "\ntrain {} (depths 1-2), test {} (depths 3-4), p = 2, two seeds:",
        train_data.len(),
        test_pool.equations.len()
    );
    println!("{:<11} {:>6} {:>9} {:>9}", "order", "seed", "val_acc", "test_acc");
    let vocab = Vocab::canonical();
    for arch in [Architecture::TreeSmu, Architecture::TreeQueue] {
        let mut accs = Vec::new();
        for seed in [1u64, 2] {
            let mut cfg = TrainConfig::new(ModelConfig {
                hidden: 20,
                stack: 2,
                ..ModelConfig::new(arch)
            });
            cfg.lr = 0.01;
            cfg.max_epochs = 15;
            cfg.patience = 15;
            let dir = tempfile::tempdir().expect("tempdir");
            let rec = train(&cfg, &vocab, &train_data, &val_data, seed, Some(dir.path()))
                .expect("training succeeds");
            let (model, store) =
                Model::load(&rec.checkpoint_path.expect("checkpoint")).expect("loads");
            let metrics = run_verification_test(&model, &store, &test_pool.equations, None)
                .expect("evaluates");
            let acc = metrics.overall.accuracy();
            println!(
                "{:<11} {:>6} {:>9.4} {:>9.4}",
                arch.name(),
                seed,
                rec.best_validation_accuracy,
                acc
            );
            accs.push(acc);
        }
        println!(
            "{:<11} {:>6} {:>9} {:>9.4}  (mean)",
            arch.name(),
            "-",
            "",
            accs.iter().sum::<f64>() / accs.len() as f64
        );
    }
    println!("\n(two seeds on a toy corpus bound the protocol, not the conclusion —");
    println!(" scale the pools and seed count up to measure the ordering effect)");
}
