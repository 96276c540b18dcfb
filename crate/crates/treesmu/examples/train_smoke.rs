//! A minimal end-to-end training run.
//!
//! Generates a small shallow corpus, trains a tree LSTM with Adam and early
//! stopping, and prints the per-epoch metrics the training loop records.
//! Everything is seeded, so two invocations print identical tables.
//!
//! ```bash
//! cargo run --example train_smoke
//! ```

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::datagen::{generate, GenConfig};
use treesmu::expr::Equation;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

fn main() {
    // ~300 shallow equations, split 80/20 by simple striding.
    let counts: BTreeMap<u32, usize> = [(1u32, 60), (2, 120), (3, 120)].into();
    let corpus = generate(&GenConfig::new(7, counts)).expect("generation succeeds");
    let mut train_data: Vec<Equation> = Vec::new();
    let mut val_data: Vec<Equation> = Vec::new();
    for (i, eq) in corpus.equations.into_iter().enumerate() {
        if i % 5 == 0 {
            val_data.push(eq);
        } else {
            train_data.push(eq);
        }
    }
    println!("train: {} equations, validation: {}\n", train_data.len(), val_data.len());

    let mut config = TrainConfig::new(ModelConfig {
        hidden: 20,
        ..ModelConfig::new(Architecture::TreeLstm)
    });
    config.lr = 0.01;
    config.max_epochs = 12;
    config.patience = 12;

    let record = train(&config, &Vocab::canonical(), &train_data, &val_data, 1, None)
        .expect("training succeeds");

    println!(
        "{:<6} {:>10} {:>10} {:>10} {:>10}",
        "epoch", "train_acc", "train_loss", "val_acc", "val_loss"
    );
    for m in &record.epochs {
        println!(
            "{:<6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            m.epoch, m.train.accuracy, m.train.loss, m.validation.accuracy, m.validation.loss
        );
    }
    println!(
        "\nbest epoch {} with validation accuracy {:.4}",
        record.best_epoch, record.best_validation_accuracy
    );
    let first = record.epochs.first().unwrap().train.loss;
    let last = record.epochs.last().unwrap().train.loss;
    println!("train loss {first:.4} -> {last:.4}");
    assert!(last < first, "loss should fall on a learnable corpus");
}
