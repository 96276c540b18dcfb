//! Throwaway timing calibration — not part of the suite.
mod common;

use std::time::Instant;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::eval::run_verification_test;
use treesmu::model::Model;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

fn cfg(arch: Architecture, lr: f64, epochs: usize, patience: usize) -> TrainConfig {
    let model = ModelConfig { hidden: 50, stack: 2, ..ModelConfig::new(arch) };
    let mut c = TrainConfig::new(model);
    c.lr = lr;
    c.max_epochs = epochs;
    c.patience = patience;
    c
}

#[test]
#[ignore]
fn timing() {
    let vocab = Vocab::canonical();
    let (lr, epochs, patience) = (0.003, 60, 12);

    // ── desk protocol at lr 0.003 ──
    let desk_train = common::gen_corpus(900, &[(1, 900), (2, 1500), (3, 1800), (4, 1800)]);
    let desk_test = common::gen_corpus(901, &[(5, 1200), (6, 1000), (7, 800)]);
    let (tr, val) = common::split_stride(desk_train, 10);
    println!("\n=== desk protocol, lr {lr}, max_epochs {epochs}, patience {patience} ===");
    for arch in [Architecture::TreeSmu, Architecture::TreeLstm, Architecture::TreeRnn] {
        let mut accs = Vec::new();
        for seed in [1u64, 2, 3] {
            let dir = tempfile::tempdir().unwrap();
            let t0 = Instant::now();
            let rec = train(&cfg(arch, lr, epochs, patience), &vocab, &tr, &val, seed, Some(dir.path())).unwrap();
            let (model, store) = Model::load(rec.checkpoint_path.as_ref().unwrap()).unwrap();
            let m = run_verification_test(&model, &store, &desk_test, None).unwrap();
            println!(
                "  {} seed {}: val {:.3} test {:.3} ({} epochs, {:.0}s)",
                arch.name(),
                seed,
                rec.best_validation_accuracy,
                m.overall.accuracy(),
                rec.epochs.len(),
                t0.elapsed().as_secs_f64()
            );
            accs.push(m.overall.accuracy());
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        println!("  {} mean test acc: {:.4}", arch.name(), mean);
    }

    // ── localism protocol at lr 0.003 ──
    println!("\n=== localism protocol train d3-6 test d1-2 ===");
    let loc_train = common::gen_corpus(902, &[(3, 1000), (4, 1000), (5, 1000), (6, 1000)]);
    let loc_test = common::gen_corpus(903, &[(1, 400), (2, 600)]);
    let (ltr, lval) = common::split_stride(loc_train, 10);
    for arch in [Architecture::TreeSmu, Architecture::TreeLstm] {
        let mut accs = Vec::new();
        for seed in [1u64, 2, 3] {
            let dir = tempfile::tempdir().unwrap();
            let t0 = Instant::now();
            let rec = train(&cfg(arch, lr, epochs, patience), &vocab, &ltr, &lval, seed, Some(dir.path())).unwrap();
            let (model, store) = Model::load(rec.checkpoint_path.as_ref().unwrap()).unwrap();
            let m = run_verification_test(&model, &store, &loc_test, None).unwrap();
            println!(
                "  {} seed {}: val {:.3} test {:.3} ({} epochs, {:.0}s)",
                arch.name(),
                seed,
                rec.best_validation_accuracy,
                m.overall.accuracy(),
                rec.epochs.len(),
                t0.elapsed().as_secs_f64()
            );
            accs.push(m.overall.accuracy());
        }
        println!("  {} per-seed: {:?}", arch.name(), accs);
    }
}
