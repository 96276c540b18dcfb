//! Evaluation harness: verification metrics (overall and per depth),
//! fill-in-the-blank completion with top-K ranking, the stack-usage probe,
//! and embedding export for substitutivity analysis.
//!
//! Everything here is read-only over a checkpoint. The generic `*_with`
//! entry points accept a scoring closure so that metric plumbing can be
//! tested against stub classifiers (a perfect oracle, a random scorer)
//! independently of any trained model.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::datagen::{oracle, random_expr, CompletionItem, EmbedEntry};
use crate::expr::{Equation, Expr, Label};
use crate::model::{Model, ModelError};
use crate::params::ParamStore;
use crate::rng::{stream, tag};
use crate::vocab::Vocab;

#[derive(Debug)]
pub enum EvalError {
    Model(ModelError),
    /// The probe needs a stack; this architecture has none.
    NoStack(String),
    Empty(&'static str),
    /// No test equation fell inside the requested depth range.
    DepthRangeEmpty { lo: u32, hi: u32 },
    Io(std::io::Error),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Model(e) => write!(f, "{e}"),
            EvalError::NoStack(arch) => write!(f, "architecture has no stack: {arch}"),
            EvalError::Empty(what) => write!(f, "{what} is empty"),
            EvalError::DepthRangeEmpty { lo, hi } => {
                write!(f, "no test equations with depth in [{lo}, {hi}]")
            }
            EvalError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for EvalError {}

impl From<ModelError> for EvalError {
    fn from(e: ModelError) -> Self {
        EvalError::Model(e)
    }
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Io(e)
    }
}

// ───────────────────────── verification ─────────────────────────

/// Confusion counts with "Correct" as the positive class.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn push(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Correct, Label::Correct) => self.tp += 1,
            (Label::Correct, Label::Incorrect) => self.fp += 1,
            (Label::Incorrect, Label::Correct) => self.fn_ += 1,
            (Label::Incorrect, Label::Incorrect) => self.tn += 1,
        }
    }

    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.n())
    }

    /// Undefined ratios (no positive predictions / no positive examples)
    /// read as 0.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Verification metrics, overall and bucketed by equation depth. Every
/// equation lands in exactly one depth bucket, so bucket counts sum to the
/// overall count by construction.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Metrics {
    pub overall: Counts,
    pub per_depth: BTreeMap<u32, Counts>,
}

impl Metrics {
    /// CSV table matching the columns the training loop uses:
    /// `depth,count,accuracy,precision,recall` with a final `overall` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,count,accuracy,precision,recall\n");
        for (d, c) in &self.per_depth {
            let _ = writeln!(
                s,
                "{d},{},{},{},{}",
                c.n(),
                c.accuracy(),
                c.precision(),
                c.recall()
            );
        }
        let o = &self.overall;
        let _ = writeln!(
            s,
            "overall,{},{},{},{}",
            o.n(),
            o.accuracy(),
            o.precision(),
            o.recall()
        );
        s
    }
}

/// Generic verification pass: score every equation, threshold at 0.5,
/// bucket by depth. `depth_range` (inclusive) filters the file first.
pub fn verify_with<F>(
    mut scorer: F,
    eqs: &[Equation],
    depth_range: Option<(u32, u32)>,
) -> Result<Metrics, EvalError>
where
    F: FnMut(&Equation) -> Result<f64, EvalError>,
{
    if eqs.is_empty() {
        return Err(EvalError::Empty("test file"));
    }
    let in_range = |e: &&Equation| match depth_range {
        Some((lo, hi)) => (lo..=hi).contains(&e.depth()),
        None => true,
    };
    let selected: Vec<&Equation> = eqs.iter().filter(in_range).collect();
    if selected.is_empty() {
        let (lo, hi) = depth_range.expect("unfiltered selection of a non-empty file");
        return Err(EvalError::DepthRangeEmpty { lo, hi });
    }
    let mut overall = Counts::default();
    let mut per_depth: BTreeMap<u32, Counts> = BTreeMap::new();
    for eq in selected {
        let p = scorer(eq)?;
        let predicted = if p >= 0.5 { Label::Correct } else { Label::Incorrect };
        overall.push(predicted, eq.label);
        per_depth.entry(eq.depth()).or_default().push(predicted, eq.label);
    }
    Ok(Metrics { overall, per_depth })
}

/// Verification with a trained model.
pub fn run_verification_test(
    model: &Model,
    store: &ParamStore,
    eqs: &[Equation],
    depth_range: Option<(u32, u32)>,
) -> Result<Metrics, EvalError> {
    verify_with(|e| Ok(model.score(store, e)?), eqs, depth_range)
}

// ───────────────────────── completion ─────────────────────────

/// How a top-K "correct match" is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionJudge {
    /// Any candidate the numeric oracle certifies counts as a match.
    Oracle,
    /// Only the literal gold subtree counts.
    Gold,
}

/// Candidate pool: all terminals, every depth-1 function application over
/// terminals, and seeded random depth-2 expressions, deduplicated and
/// capped at `cap` by seeded sampling. Sorted by text for a stable order.
pub fn candidate_pool(vocab: &Vocab, cap: usize, seed: u64) -> Vec<Expr> {
    use rand::seq::SliceRandom;
    let mut by_text: BTreeMap<String, Expr> = BTreeMap::new();
    let terminals: Vec<Expr> = crate::vocab::canonical_terminals()
        .iter()
        .filter_map(|t| crate::expr::parse_side(t).ok())
        .collect();
    for t in &terminals {
        by_text.insert(t.to_string(), t.clone());
    }
    for f in vocab.functions() {
        match f.arity() {
            1 => {
                for t in &terminals {
                    let e = Expr::call(*f, vec![t.clone()]);
                    by_text.insert(e.to_string(), e);
                }
            }
            _ => {
                for a in &terminals {
                    for b in &terminals {
                        let e = Expr::call(*f, vec![a.clone(), b.clone()]);
                        by_text.insert(e.to_string(), e);
                    }
                }
            }
        }
    }
    // Top up with random depth-2 candidates (skip if already at cap).
    let mut rng = stream(seed, &[tag::CANDIDATES]);
    let mut attempts = 0usize;
    while by_text.len() < cap && attempts < cap * 20 {
        attempts += 1;
        let e = random_expr(2, &mut rng);
        by_text.insert(e.to_string(), e);
    }
    let mut pool: Vec<Expr> = by_text.into_values().collect();
    if pool.len() > cap {
        // Seeded downsample, then restore the stable text order.
        let mut rng = stream(seed, &[tag::CANDIDATES, 1]);
        pool.shuffle(&mut rng);
        pool.truncate(cap);
        pool.sort_by_key(|e| e.to_string());
    }
    pool
}

/// Top-K accuracies for one K list, overall and per equation depth.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CompletionOutcome {
    pub k_values: Vec<usize>,
    /// Same length as `k_values`: fraction of items with a match in top K.
    pub overall: Vec<f64>,
    pub per_depth: BTreeMap<u32, Vec<f64>>,
    pub per_depth_counts: BTreeMap<u32, usize>,
    pub item_count: usize,
    pub pool_size: usize,
}

impl CompletionOutcome {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,count");
        for k in &self.k_values {
            let _ = write!(s, ",top{k}");
        }
        s.push('\n');
        for (d, accs) in &self.per_depth {
            let _ = write!(s, "{d},{}", self.per_depth_counts[d]);
            for a in accs {
                let _ = write!(s, ",{a}");
            }
            s.push('\n');
        }
        let _ = write!(s, "overall,{}", self.item_count);
        for a in &self.overall {
            let _ = write!(s, ",{a}");
        }
        s.push('\n');
        s
    }
}

/// Generic completion pass. For every item each candidate is substituted
/// for the blank and scored; candidates are ranked by score (ties broken
/// by candidate text so rankings are reproducible); an item is a top-K hit
/// if any of its K best candidates is judged a correct match.
pub fn complete_with<F>(
    mut scorer: F,
    items: &[CompletionItem],
    pool: &[Expr],
    ks: &[usize],
    judge: CompletionJudge,
    oracle_samples: usize,
) -> Result<CompletionOutcome, EvalError>
where
    F: FnMut(&Equation) -> Result<f64, EvalError>,
{
    if items.is_empty() {
        return Err(EvalError::Empty("completion file"));
    }
    if pool.is_empty() {
        return Err(EvalError::Empty("candidate pool"));
    }
    if ks.is_empty() {
        return Err(EvalError::Empty("K list"));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();

    let mut overall_hits = vec![0usize; ks.len()];
    let mut depth_hits: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut depth_counts: BTreeMap<u32, usize> = BTreeMap::new();

    for item in items {
        // The gold subtree always competes, even if the pool missed it.
        let gold_text = item.gold.to_string();
        let mut candidates: Vec<&Expr> = pool.iter().collect();
        if !pool.iter().any(|c| c.to_string() == gold_text) {
            candidates.push(&item.gold);
        }
        let mut scored: Vec<(f64, String, &Expr)> = Vec::with_capacity(candidates.len());
        for c in candidates {
            let eq = item.filled(c);
            let p = scorer(&eq)?;
            scored.push((p, c.to_string(), c));
        }
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0).expect("scores are finite").then_with(|| a.1.cmp(&b.1))
        });

        // Judge each rank lazily; a prefix scan gives every K at once.
        let is_match = |c: &Expr, text: &str| -> bool {
            match judge {
                CompletionJudge::Gold => text == gold_text,
                CompletionJudge::Oracle => {
                    let eq = item.filled(c);
                    oracle::certifies_correct(&eq.lhs, &eq.rhs, oracle_samples, oracle::EVAL_SALT)
                }
            }
        };
        let mut first_match_rank = None;
        for (rank, (_, text, c)) in scored.iter().enumerate() {
            if is_match(c, text) {
                first_match_rank = Some(rank);
                break;
            }
        }
        let counts = depth_hits.entry(item.depth).or_insert_with(|| vec![0; ks.len()]);
        *depth_counts.entry(item.depth).or_insert(0) += 1;
        if let Some(rank) = first_match_rank {
            for (i, &k) in ks.iter().enumerate() {
                if rank < k {
                    overall_hits[i] += 1;
                    counts[i] += 1;
                }
            }
        }
    }

    let n = items.len();
    let overall = overall_hits.iter().map(|&h| h as f64 / n as f64).collect();
    let per_depth = depth_hits
        .iter()
        .map(|(d, hits)| {
            let c = depth_counts[d] as f64;
            (*d, hits.iter().map(|&h| h as f64 / c).collect())
        })
        .collect();
    Ok(CompletionOutcome {
        k_values: ks,
        overall,
        per_depth,
        per_depth_counts: depth_counts,
        item_count: n,
        pool_size: pool.len(),
    })
}

/// Completion with a trained model.
pub fn run_completion(
    model: &Model,
    store: &ParamStore,
    items: &[CompletionItem],
    pool: &[Expr],
    ks: &[usize],
    judge: CompletionJudge,
    oracle_samples: usize,
) -> Result<CompletionOutcome, EvalError> {
    complete_with(|e| Ok(model.score(store, e)?), items, pool, ks, judge, oracle_samples)
}

// ───────────────────────── stack-usage probe ─────────────────────────

/// Average number of stack rows in use at the root, per equation depth.
/// A row is "in use" when its L2 norm exceeds τ; each equation contributes
/// the mean of its two sides.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProbeRow {
    pub depth: u32,
    pub mean_used_rows: f64,
    pub count: usize,
}

pub const DEFAULT_TAU: f64 = 0.001;

pub fn stack_usage_probe(
    model: &Model,
    store: &ParamStore,
    eqs: &[Equation],
    tau: f64,
) -> Result<Vec<ProbeRow>, EvalError> {
    if !model.config.architecture.has_stack() {
        return Err(EvalError::NoStack(model.config.architecture.name().to_string()));
    }
    if eqs.is_empty() {
        return Err(EvalError::Empty("probe file"));
    }
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for eq in eqs {
        let (g, lhs, rhs) = model.root_states(store, eq)?;
        let side_usage = |state: &crate::cells::NodeState| -> f64 {
            let rows = state.stack.as_ref().expect("stack architectures carry stacks");
            rows.iter().filter(|&&r| g.value(r).l2_norm() > tau).count() as f64
        };
        let usage = (side_usage(&lhs) + side_usage(&rhs)) / 2.0;
        let entry = sums.entry(eq.depth()).or_insert((0.0, 0));
        entry.0 += usage;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(depth, (sum, count))| ProbeRow {
            depth,
            mean_used_rows: sum / count as f64,
            count,
        })
        .collect())
}

pub fn probe_to_csv(rows: &[ProbeRow]) -> String {
    let mut s = String::from("depth,count,mean_used_rows\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.depth, r.count, r.mean_used_rows);
    }
    s
}

// ───────────────────────── embedding export ─────────────────────────

/// CSV of root hidden vectors for class-labeled constant expressions:
/// `expression,class,h0..h{n−1}`. Dimensionality reduction (t-SNE etc.)
/// is left to external tooling.
pub fn export_embeddings(
    model: &Model,
    store: &ParamStore,
    entries: &[EmbedEntry],
) -> Result<String, EvalError> {
    if entries.is_empty() {
        return Err(EvalError::Empty("embedding pool"));
    }
    let n = model.config.hidden;
    let mut s = String::from("expression,class");
    for i in 0..n {
        let _ = write!(s, ",h{i}");
    }
    s.push('\n');
    for e in entries {
        let mut g = crate::graph::Graph::new();
        let state = model.encode_side(&mut g, store, &e.expr, &mut None)?;
        let _ = write!(s, "{},{}", e.expr, e.class);
        for v in g.value(state.h).data() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{Architecture, ModelConfig};
    use crate::expr::parse_expr;

    fn eq(text: &str, label: Label) -> Equation {
        match parse_expr(text).unwrap() {
            Expr::Func(crate::expr::Func::Eq, args) => {
                Equation { lhs: args[0].clone(), rhs: args[1].clone(), label }
            }
            _ => panic!("not an equation"),
        }
    }

    /// Six hand-labeled outcomes covering all confusion cells.
    fn six_example_file() -> Vec<Equation> {
        vec![
            eq("(= x x)", Label::Correct),                // score 0.9  → TP
            eq("(= y y)", Label::Correct),                // score 0.6  → TP
            eq("(= (+ x 1) x)", Label::Incorrect),        // score 0.7  → FP
            eq("(= (+ y 1) y)", Label::Incorrect),        // score 0.2  → TN
            eq("(= (* x 1) x)", Label::Correct),          // score 0.3  → FN
            eq("(= (* y 0) y)", Label::Incorrect),        // score 0.1  → TN
        ]
    }

    fn six_example_scores(e: &Equation) -> f64 {
        match e.text().as_str() {
            "(= x x)" => 0.9,
            "(= y y)" => 0.6,
            "(= (+ x 1) x)" => 0.7,
            "(= (+ y 1) y)" => 0.2,
            "(= (* x 1) x)" => 0.3,
            "(= (* y 0) y)" => 0.1,
            other => panic!("unexpected equation {other}"),
        }
    }

    #[test]
    fn metric_identities_on_hand_built_file() {
        let eqs = six_example_file();
        let m = verify_with(|e| Ok(six_example_scores(e)), &eqs, None).unwrap();
        // TP=2 FP=1 TN=2 FN=1 → acc 4/6, prec 2/3, recall 2/3.
        assert_eq!(m.overall.tp, 2);
        assert_eq!(m.overall.fp, 1);
        assert_eq!(m.overall.tn, 2);
        assert_eq!(m.overall.fn_, 1);
        assert!((m.overall.accuracy() - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.overall.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.overall.recall() - 2.0 / 3.0).abs() < 1e-15);
        // Depth partition: bucket counts sum to the overall count.
        let total: usize = m.per_depth.values().map(Counts::n).sum();
        assert_eq!(total, m.overall.n());
    }

    #[test]
    fn perfect_scorer_maxes_all_metrics() {
        let eqs = six_example_file();
        let m = verify_with(
            |e| Ok(if e.label == Label::Correct { 1.0 } else { 0.0 }),
            &eqs,
            None,
        )
        .unwrap();
        assert_eq!(m.overall.accuracy(), 1.0);
        assert_eq!(m.overall.precision(), 1.0);
        assert_eq!(m.overall.recall(), 1.0);
    }

    #[test]
    fn depth_range_filter_and_empty_range_error() {
        let eqs = six_example_file();
        // Depth-1 equations only: (= x x) and (= y y).
        let m = verify_with(|e| Ok(six_example_scores(e)), &eqs, Some((1, 1))).unwrap();
        assert_eq!(m.overall.n(), 2);
        match verify_with(|e| Ok(six_example_scores(e)), &eqs, Some((9, 12))) {
            Err(EvalError::DepthRangeEmpty { lo: 9, hi: 12 }) => {}
            other => panic!("expected DepthRangeEmpty, got {other:?}"),
        }
    }

    #[test]
    fn candidate_pool_is_deterministic_capped_and_dedup() {
        let v = Vocab::canonical();
        let a = candidate_pool(&v, 300, 5);
        let b = candidate_pool(&v, 300, 5);
        assert_eq!(a.len(), 300);
        assert_eq!(
            a.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            b.iter().map(|e| e.to_string()).collect::<Vec<_>>()
        );
        let mut texts: Vec<String> = a.iter().map(|e| e.to_string()).collect();
        let before = texts.len();
        texts.dedup();
        assert_eq!(before, texts.len(), "pool must be duplicate-free");
        // Terminals and both candidate depths are represented.
        assert!(a.iter().any(|e| e.depth() == 0));
        assert!(a.iter().any(|e| e.depth() == 1));
    }

    fn blank_item() -> CompletionItem {
        // sin²θ + _ = 1, gold cos²θ.
        let lhs = crate::expr::parse_side("(+ (^ (sin theta) 2) _)").unwrap();
        let rhs = crate::expr::parse_side("1").unwrap();
        let gold = crate::expr::parse_side("(^ (cos theta) 2)").unwrap();
        CompletionItem { lhs, rhs, gold, depth: 4 }
    }

    #[test]
    fn oracle_accepts_the_pythagorean_blank() {
        let item = blank_item();
        let filled = item.filled(&item.gold);
        assert!(oracle::certifies_correct(
            &filled.lhs,
            &filled.rhs,
            16,
            oracle::EVAL_SALT
        ));
        // A wrong candidate does not pass.
        let wrong = crate::expr::parse_side("(sin theta)").unwrap();
        let bad = item.filled(&wrong);
        assert!(!oracle::certifies_correct(&bad.lhs, &bad.rhs, 16, oracle::EVAL_SALT));
    }

    #[test]
    fn topk_is_monotone_and_exhaustive_k_matches_any_candidate() {
        let item = blank_item();
        let pool: Vec<Expr> = ["x", "y", "0", "(sin theta)", "(^ (cos theta) 2)"]
            .iter()
            .map(|t| crate::expr::parse_side(t).unwrap())
            .collect();
        // A scorer that actively buries the gold candidate at the bottom.
        let scorer = |e: &Equation| {
            Ok(if e.text().contains("cos") { 0.01 } else { 0.9 })
        };
        let ks = vec![1, 2, 5];
        let out = complete_with(scorer, &[item.clone()], &pool, &ks, CompletionJudge::Oracle, 16)
            .unwrap();
        for w in out.overall.windows(2) {
            assert!(w[0] <= w[1], "top-K accuracy must be non-decreasing in K");
        }
        // K = pool size: hit because SOME candidate (the gold) is correct.
        assert_eq!(*out.overall.last().unwrap(), 1.0);
        // K = 1 with the gold buried: no hit.
        assert_eq!(out.overall[0], 0.0);
    }

    #[test]
    fn gold_judge_requires_the_literal_subtree() {
        let item = blank_item();
        // Pool without the gold: it is appended automatically.
        let pool: Vec<Expr> = ["x", "0"]
            .iter()
            .map(|t| crate::expr::parse_side(t).unwrap())
            .collect();
        let favor_gold = |e: &Equation| Ok(if e.text().contains("cos") { 0.99 } else { 0.5 });
        let out = complete_with(
            favor_gold,
            &[item.clone()],
            &pool,
            &[1],
            CompletionJudge::Gold,
            16,
        )
        .unwrap();
        assert_eq!(out.overall[0], 1.0, "gold ranked first must count");
        let bury_gold = |e: &Equation| Ok(if e.text().contains("cos") { 0.01 } else { 0.5 });
        let out = complete_with(bury_gold, &[item], &pool, &[1], CompletionJudge::Gold, 16)
            .unwrap();
        assert_eq!(out.overall[0], 0.0);
    }

    #[test]
    fn completion_rejects_empty_inputs() {
        let pool = vec![crate::expr::parse_side("x").unwrap()];
        assert!(matches!(
            complete_with(|_| Ok(0.5), &[], &pool, &[1], CompletionJudge::Gold, 8),
            Err(EvalError::Empty("completion file"))
        ));
        let item = blank_item();
        assert!(matches!(
            complete_with(|_| Ok(0.5), &[item.clone()], &[], &[1], CompletionJudge::Gold, 8),
            Err(EvalError::Empty("candidate pool"))
        ));
        assert!(matches!(
            complete_with(|_| Ok(0.5), &[item], &pool, &[], CompletionJudge::Gold, 8),
            Err(EvalError::Empty("K list"))
        ));
    }

    #[test]
    fn probe_counts_zero_rows_for_zero_parameters() {
        // All-zero parameters make every stack row zero at any depth.
        let cfg = ModelConfig { hidden: 4, stack: 2, ..ModelConfig::new(Architecture::TreeSmu) };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let mut store = model.init_params(3);
        for k in store.keys().map(str::to_string).collect::<Vec<_>>() {
            store.get_mut(&k).unwrap().fill(0.0);
        }
        let eqs = vec![eq("(= (+ x 1) x)", Label::Incorrect)];
        let rows = stack_usage_probe(&model, &store, &eqs, DEFAULT_TAU).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_used_rows, 0.0);
        assert_eq!(rows[0].count, 1);
    }

    #[test]
    fn probe_rejects_stackless_architectures() {
        let cfg = ModelConfig { hidden: 4, ..ModelConfig::new(Architecture::TreeRnn) };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let store = model.init_params(3);
        let eqs = vec![eq("(= x x)", Label::Correct)];
        match stack_usage_probe(&model, &store, &eqs, DEFAULT_TAU) {
            Err(EvalError::NoStack(a)) => assert_eq!(a, "tree-rnn"),
            other => panic!("expected NoStack, got {other:?}"),
        }
    }

    #[test]
    fn probe_sees_nonzero_usage_with_random_init() {
        let cfg = ModelConfig { hidden: 6, stack: 2, ..ModelConfig::new(Architecture::TreeSmu) };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let store = model.init_params(9);
        let eqs = vec![
            eq("(= (+ x 0) x)", Label::Correct),
            eq("(= (* (+ x 1) (+ y 1)) (+ x y))", Label::Incorrect),
        ];
        let rows = stack_usage_probe(&model, &store, &eqs, DEFAULT_TAU).unwrap();
        assert_eq!(rows.iter().map(|r| r.count).sum::<usize>(), 2);
        assert!(rows.iter().any(|r| r.mean_used_rows > 0.0));
        for r in &rows {
            assert!(r.mean_used_rows <= 2.0, "cannot use more rows than exist");
        }
    }

    #[test]
    fn embeddings_csv_shape_and_classes() {
        let cfg = ModelConfig { hidden: 3, stack: 2, ..ModelConfig::new(Architecture::TreeSmu) };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let store = model.init_params(2);
        let entries = vec![
            EmbedEntry { expr: crate::expr::parse_side("(* 1 (* x 0))").unwrap(), class: 0 },
            EmbedEntry { expr: crate::expr::parse_side("(^ x 0)").unwrap(), class: 1 },
        ];
        let csv = export_embeddings(&model, &store, &entries).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "expression,class,h0,h1,h2");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("(* 1 (* x 0)),0,"));
        assert!(lines[2].starts_with("(^ x 0),1,"));
        // Deterministic: repeated export is identical.
        assert_eq!(csv, export_embeddings(&model, &store, &entries).unwrap());
    }

    #[test]
    fn scoring_is_pure_across_repeated_completion_runs() {
        let cfg = ModelConfig { hidden: 4, stack: 2, ..ModelConfig::new(Architecture::TreeSmu) };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let store = model.init_params(21);
        let item = blank_item();
        let pool = candidate_pool(&Vocab::canonical(), 40, 3);
        let a = run_completion(&model, &store, &[item.clone()], &pool, &[1, 5], CompletionJudge::Oracle, 16)
            .unwrap();
        let b = run_completion(&model, &store, &[item], &pool, &[1, 5], CompletionJudge::Oracle, 16)
            .unwrap();
        assert_eq!(a.overall, b.overall);
        assert_eq!(a.per_depth, b.per_depth);
    }
}
