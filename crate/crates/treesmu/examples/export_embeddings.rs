//! Export root embeddings of constant expressions and check class geometry.
//!
//! Builds a pool of expressions that are constantly 0 or constantly 1
//! (`(* x 0)`, `(^ 1 y)`, `(cos 0)`, ...), trains a quick verifier, and
//! exports each expression's root hidden state as CSV — the same artifact the
//! `embed` subcommand writes for offline visualization. As a plain-text
//! stand-in for a scatter plot, it then checks whether nearest-centroid
//! classification in embedding space separates the two classes better than
//! chance.
//!
//! ```bash
//! cargo run --release --example export_embeddings
//! ```

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::datagen::{generate, make_embed_pool, GenConfig};
use treesmu::eval::export_embeddings;
use treesmu::expr::Equation;
use treesmu::model::Model;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

fn main() {
    // Train a small verifier so the embeddings are task-shaped.
    let counts: BTreeMap<u32, usize> = [(1u32, 80), (2, 200), (3, 160)].into();
    let corpus = generate(&GenConfig::new(13, counts)).expect("generation succeeds");
    let mut train_data: Vec<Equation> = Vec::new();
    let mut val_data: Vec<Equation> = Vec::new();
    for (i, eq) in corpus.equations.into_iter().enumerate() {
        if i % 6 == 0 {
            val_data.push(eq);
        } else {
            train_data.push(eq);
        }
    }
    let mut cfg = TrainConfig::new(ModelConfig {
        hidden: 16,
        ..ModelConfig::new(Architecture::TreeLstm)
    });
    cfg.lr = 0.01;
    cfg.max_epochs = 10;
    cfg.patience = 10;
    let dir = tempfile::tempdir().expect("tempdir");
    let rec = train(&cfg, &Vocab::canonical(), &train_data, &val_data, 9, Some(dir.path()))
        .expect("training succeeds");
    let (model, store) =
        Model::load(&rec.checkpoint_path.expect("checkpoint")).expect("loads");

    // Pool of oracle-certified constant-0 / constant-1 expressions.
    let pool = make_embed_pool(60, 17, 24);
    let zeros = pool.iter().filter(|e| e.class == 0).count();
    println!("embedding pool: {} expressions ({} class 0, {} class 1)", pool.len(), zeros, pool.len() - zeros);

    let csv = export_embeddings(&model, &store, &pool).expect("export succeeds");
    let mut lines = csv.lines();
    println!("\ncsv header: {}", lines.next().unwrap());
    for line in lines.take(3) {
        let short: String = line.chars().take(100).collect();
        println!("  {short}...");
    }

    // Nearest-centroid sanity check on the exported vectors.
    let rows: Vec<(u8, Vec<f64>)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts = l.split(',');
            let _expr = parts.next().unwrap();
            let class: u8 = parts.next().unwrap().parse().unwrap();
            let h: Vec<f64> = parts.map(|x| x.parse().unwrap()).collect();
            (class, h)
        })
        .collect();
    let dim = rows[0].1.len();
    let mut centroid = [vec![0.0f64; dim], vec![0.0f64; dim]];
    let mut n = [0usize; 2];
    for (c, h) in &rows {
        let c = *c as usize;
        n[c] += 1;
        for (acc, x) in centroid[c].iter_mut().zip(h) {
            *acc += x;
        }
    }
    for c in 0..2 {
        for x in centroid[c].iter_mut() {
            *x /= n[c] as f64;
        }
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let correct = rows
        .iter()
        .filter(|(c, h)| {
            let d0 = dist(h, &centroid[0]);
            let d1 = dist(h, &centroid[1]);
            (*c == 0 && d0 < d1) || (*c == 1 && d1 <= d0)
        })
        .count();
    println!(
        "\nnearest-centroid accuracy in embedding space: {}/{} = {:.2}",
        correct,
        rows.len(),
        correct as f64 / rows.len() as f64
    );
    println!("(chance would be {:.2})", n[0].max(n[1]) as f64 / rows.len() as f64);
}
