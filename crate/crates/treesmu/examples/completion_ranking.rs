//! Equation completion: fill in the blank, rank candidates, score top-K.
//!
//! Takes correct equations, blanks out one subtree (`(= (+ (sin x) _) ...)`),
//! and asks a trained verifier to rank every candidate from a fixed pool by
//! p(Correct) of the filled-in equation. A completion counts at K if any
//! oracle-certified-correct candidate appears in the first K. Prints the
//! ranked list for one item so the mechanics are visible, then the top-K
//! table over all items.
//!
//! ```bash
//! cargo run --release --example completion_ranking
//! ```

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::datagen::{generate, make_completion_items, GenConfig};
use treesmu::eval::{candidate_pool, run_completion, CompletionJudge};
use treesmu::expr::Equation;
use treesmu::model::Model;
use treesmu::training::{train, TrainConfig};
use treesmu::vocab::Vocab;

fn main() {
    // Corpus and a quick model to do the ranking.
    let counts: BTreeMap<u32, usize> = [(1u32, 80), (2, 200), (3, 200)].into();
    let corpus = generate(&GenConfig::new(31, counts)).expect("generation succeeds");
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
        hidden: 20,
        ..ModelConfig::new(Architecture::TreeLstm)
    });
    cfg.lr = 0.01;
    cfg.max_epochs = 10;
    cfg.patience = 10;
    let dir = tempfile::tempdir().expect("tempdir");
    let vocab = Vocab::canonical();
    let rec = train(&cfg, &vocab, &train_data, &val_data, 3, Some(dir.path()))
        .expect("training succeeds");
    let (model, store) =
        Model::load(&rec.checkpoint_path.expect("checkpoint")).expect("loads");
    println!(
        "verifier trained to validation accuracy {:.3}\n",
        rec.best_validation_accuracy
    );

    // Items: correct equations with one depth ≤ 2 subtree blanked out.
    let items = make_completion_items(&val_data, 25, 99);
    let pool = candidate_pool(&vocab, 300, 99);
    println!("{} completion items, candidate pool of {}", items.len(), pool.len());

    // Walk through one item by hand.
    let item = &items[0];
    let blanked = format!("(= {} {})", item.lhs, item.rhs);
    println!("\nitem:  {blanked}");
    println!("gold:  {}", item.gold);
    let mut scored: Vec<(f64, String)> = pool
        .iter()
        .map(|c| {
            let eq = item.filled(c);
            let p = model.score(&store, &eq).expect("scorable");
            (p, c.to_string())
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    println!("top 5 of {} candidates by p(Correct):", scored.len());
    for (p, c) in scored.iter().take(5) {
        println!("  {p:.4}  {c}");
    }

    // The metric over all items, judged by the numeric oracle.
    let ks = [1usize, 5, 10, 25];
    let outcome = run_completion(&model, &store, &items, &pool, &ks, CompletionJudge::Oracle, 16)
        .expect("completion runs");
    print!("\n{}", outcome.to_csv());

    // Top-K accuracy can only grow with K.
    let accs = &outcome.overall;
    assert!(accs.windows(2).all(|w| w[0] <= w[1]), "top-K must be monotone");
    println!("\ntop-K accuracy is non-decreasing in K: {accs:?}");
}
