//! Labeled equation generation at controlled tree depths.
//!
//! Correct equations are built constructively: an axiom schema is
//! instantiated with random terminals, then either side is repeatedly
//! rewritten with identity-preserving rules (and occasional symbol
//! substitutions) until the equality tree hits the exact target depth.
//! Incorrect equations corrupt a correct one — swap a function for an
//! arity-equal sibling, perturb a literal, or replace a subtree with a
//! random same-depth expression — which preserves the depth. Every emitted
//! label, positive or negative, is certified by the numeric oracle; the
//! construction only proposes, the oracle disposes.
//!
//! Generation is sliced into slots (one slot = one requested equation), and
//! each slot derives its own RNG stream from `(seed, slot index)`, so runs
//! are byte-identical no matter how many workers execute them.

pub mod oracle;
pub mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::expr::{Equation, Expr, Func, Label};
use crate::rng::{stream, tag};
use crate::vocab::{LITERALS, SYMBOLS};
use rules::{axioms, instantiate, match_pattern, rewrites, Rule};

/// Hard ceiling on equation depth, matching the deepest corpora this
/// workbench is designed around.
pub const DEPTH_CEILING: u32 = 19;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    /// Requested number of equations at each exact depth.
    pub counts_per_depth: BTreeMap<u32, usize>,
    /// Upper bound on depth keys; ≤ [`DEPTH_CEILING`].
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    /// Probability that a slot is asked to produce a negative.
    #[serde(default = "default_incorrect_fraction")]
    pub incorrect_fraction: f64,
    /// Corruption mix: function-swap, literal-perturb, subtree-swap.
    #[serde(default = "default_corruption_weights")]
    pub corruption_weights: [f64; 3],
    /// Random assignments per oracle verdict.
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
    /// Construction retries per slot before it is skipped.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    /// ≥ 0; larger values steer rewrites toward deeper subterms, which
    /// produces bushier trees (used for test pools that should lean deep).
    #[serde(default)]
    pub depth_bias: f64,
}

fn default_max_depth() -> u32 {
    DEPTH_CEILING
}

fn default_incorrect_fraction() -> f64 {
    0.44
}

fn default_corruption_weights() -> [f64; 3] {
    [0.4, 0.3, 0.3]
}

fn default_oracle_samples() -> usize {
    16
}

fn default_max_attempts() -> usize {
    40
}

impl GenConfig {
    pub fn new(seed: u64, counts_per_depth: BTreeMap<u32, usize>) -> GenConfig {
        GenConfig {
            seed,
            counts_per_depth,
            max_depth: default_max_depth(),
            incorrect_fraction: default_incorrect_fraction(),
            corruption_weights: default_corruption_weights(),
            oracle_samples: default_oracle_samples(),
            max_attempts: default_max_attempts(),
            depth_bias: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.max_depth > DEPTH_CEILING {
            return Err(GenError::InvalidConfig(format!(
                "max_depth {} exceeds ceiling {DEPTH_CEILING}",
                self.max_depth
            )));
        }
        for (&d, _) in &self.counts_per_depth {
            if d == 0 || d > self.max_depth {
                return Err(GenError::InvalidConfig(format!(
                    "depth {d} outside 1..={}",
                    self.max_depth
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.incorrect_fraction) {
            return Err(GenError::InvalidConfig(format!(
                "incorrect_fraction {} outside [0,1]",
                self.incorrect_fraction
            )));
        }
        if self.corruption_weights.iter().any(|w| *w < 0.0)
            || self.corruption_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(GenError::InvalidConfig("corruption weights must be non-negative and sum > 0".into()));
        }
        if self.oracle_samples == 0 {
            return Err(GenError::InvalidConfig("oracle_samples must be positive".into()));
        }
        if self.depth_bias < 0.0 {
            return Err(GenError::InvalidConfig("depth_bias must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum GenError {
    InvalidConfig(String),
    EmptySplit(String),
    UnknownSplitName(String),
    Io(std::io::Error),
    Corpus(crate::expr::CorpusError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InvalidConfig(m) => write!(f, "invalid generation config: {m}"),
            GenError::EmptySplit(name) => {
                write!(f, "split '{name}' is empty after depth filtering")
            }
            GenError::UnknownSplitName(name) => {
                write!(f, "split name '{name}' is not one of train/validation/test")
            }
            GenError::Io(e) => write!(f, "io error: {e}"),
            GenError::Corpus(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for GenError {}

impl From<std::io::Error> for GenError {
    fn from(e: std::io::Error) -> Self {
        GenError::Io(e)
    }
}

impl From<crate::expr::CorpusError> for GenError {
    fn from(e: crate::expr::CorpusError) -> Self {
        GenError::Corpus(e)
    }
}

#[derive(Debug)]
pub struct GenOutput {
    pub equations: Vec<Equation>,
    /// Slots that exhausted their retries (depth unreachable); counted,
    /// not fatal.
    pub skipped: usize,
}

/// Generate the requested corpus. Slot order (by depth, then index) fixes
/// the output order; parallelism cannot change it.
pub fn generate(cfg: &GenConfig) -> Result<GenOutput, GenError> {
    cfg.validate()?;
    let mut slots: Vec<(u32, u64)> = Vec::new();
    let mut slot_id = 0u64;
    for (&depth, &count) in &cfg.counts_per_depth {
        for _ in 0..count {
            slots.push((depth, slot_id));
            slot_id += 1;
        }
    }
    let results: Vec<Option<Equation>> = slots
        .par_iter()
        .map(|&(depth, slot)| generate_slot(depth, slot, cfg))
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let equations = results.into_iter().flatten().collect();
    Ok(GenOutput { equations, skipped })
}

fn generate_slot(depth: u32, slot: u64, cfg: &GenConfig) -> Option<Equation> {
    let mut rng = stream(cfg.seed, &[tag::GEN_SLOT, slot]);
    let want_incorrect = rng.random::<f64>() < cfg.incorrect_fraction;
    for _ in 0..cfg.max_attempts {
        let Some(eq) = try_build_correct(depth, &mut rng, cfg) else {
            continue;
        };
        if !oracle::certifies_correct(&eq.lhs, &eq.rhs, cfg.oracle_samples, oracle::GEN_SALT) {
            continue;
        }
        if want_incorrect {
            if let Some(bad) = corrupt(&eq, &mut rng, cfg) {
                return Some(bad);
            }
        } else {
            return Some(eq);
        }
    }
    None
}

// ───────────────────────── construction ─────────────────────────

/// Node-count guard: keeps pathological rewrite chains (and downstream
/// computation graphs) bounded.
fn max_nodes(depth: u32) -> usize {
    16 + 24 * depth as usize
}

pub fn random_terminal(rng: &mut ChaCha8Rng) -> Expr {
    let roll: f64 = rng.random();
    if roll < 0.45 {
        Expr::sym(*SYMBOLS.choose(rng).unwrap())
    } else if roll < 0.90 {
        Expr::num(*LITERALS.choose(rng).unwrap())
    } else {
        Expr::Pi
    }
}

/// Weighted function table for random expressions: algebra-heavy, with the
/// exotic reciprocal/inverse functions kept rare so random trees usually
/// evaluate somewhere.
const RANDOM_FUNCS: &[(Func, f64)] = &[
    (Func::Add, 0.22),
    (Func::Mul, 0.22),
    (Func::Pow, 0.10),
    (Func::Sin, 0.08),
    (Func::Cos, 0.08),
    (Func::Abs, 0.05),
    (Func::Exp, 0.04),
    (Func::Tan, 0.03),
    (Func::Sqrt, 0.03),
    (Func::Sinh, 0.025),
    (Func::Cosh, 0.025),
    (Func::Tanh, 0.025),
    (Func::Atan, 0.02),
    (Func::Ln, 0.02),
    (Func::Asinh, 0.015),
    (Func::Sec, 0.01),
    (Func::Csc, 0.01),
    (Func::Cot, 0.01),
    (Func::Asin, 0.01),
    (Func::Acos, 0.01),
    (Func::Acot, 0.01),
    (Func::Sech, 0.005),
    (Func::Csch, 0.005),
    (Func::Coth, 0.005),
    (Func::Asec, 0.005),
    (Func::Acsc, 0.005),
    (Func::Acosh, 0.005),
    (Func::Atanh, 0.005),
];

fn weighted_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut roll = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        roll -= w;
        if roll <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Small exponents for random powers; keeps powers mostly defined.
const POW_EXPONENTS: &[f64] = &[-2.0, -1.0, 2.0, 3.0];

/// Random expression of exactly the requested depth.
pub fn random_expr(depth: u32, rng: &mut ChaCha8Rng) -> Expr {
    if depth == 0 {
        return random_terminal(rng);
    }
    let weights: Vec<f64> = RANDOM_FUNCS.iter().map(|(_, w)| *w).collect();
    let f = RANDOM_FUNCS[weighted_index(rng, &weights)].0;
    match f.arity() {
        1 => Expr::call(f, vec![random_expr(depth - 1, rng)]),
        2 if f == Func::Pow => {
            let base = random_expr(depth - 1, rng);
            let e = Expr::num(*POW_EXPONENTS.choose(rng).unwrap());
            Expr::call(f, vec![base, e])
        }
        _ => {
            let deep = random_expr(depth - 1, rng);
            let shallow = random_expr(rng.random_range(0..depth), rng);
            let mut args = vec![deep, shallow];
            if rng.random::<bool>() {
                args.swap(0, 1);
            }
            Expr::call(f, args)
        }
    }
}

/// Depth of a pattern if every variable were a terminal.
fn pattern_depth(pat: &Expr) -> u32 {
    pat.depth()
}

fn axiom_seed_depth(r: &Rule) -> u32 {
    1 + pattern_depth(&r.lhs).max(pattern_depth(&r.rhs))
}

/// Build a correct equation of exactly `target` depth, or give up.
pub fn try_build_correct(target: u32, rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Option<Equation> {
    debug_assert!(target >= 1);
    let axioms = axioms();
    let feasible: Vec<&Rule> = axioms.iter().filter(|r| axiom_seed_depth(r) <= target).collect();
    let seed_rule = feasible.choose(rng)?;

    // Instantiate pattern variables with random terminals.
    let mut binding = BTreeMap::new();
    for v in rules::pattern_vars(&seed_rule.lhs) {
        binding.insert(v, random_terminal(rng));
    }
    let mut lhs = instantiate(&seed_rule.lhs, &binding);
    let mut rhs = instantiate(&seed_rule.rhs, &binding);

    let all_rules = rewrites();
    let node_cap = max_nodes(target);
    let move_limit = 24 + 8 * target as usize;
    for _ in 0..move_limit {
        let depth = 1 + lhs.depth().max(rhs.depth());
        if depth == target {
            return Some(Equation::new(lhs, rhs, Label::Correct));
        }
        let roll: f64 = rng.random();
        let moved = if roll < 0.70 {
            apply_random_rewrite(&mut lhs, &mut rhs, &all_rules, target, node_cap, cfg.depth_bias, rng)
        } else if roll < 0.85 {
            apply_substitution(&mut lhs, &mut rhs, target, node_cap, rng)
        } else {
            false
        };
        if !moved {
            // Liveness fallback: wrapping the deeper side in an identity
            // raises the equation depth by exactly one.
            apply_wrap(&mut lhs, &mut rhs, target, rng);
        }
    }
    let depth = 1 + lhs.depth().max(rhs.depth());
    (depth == target).then(|| Equation::new(lhs, rhs, Label::Correct))
}

/// Identity wrappers that add exactly one level.
fn wrap_once(e: Expr, rng: &mut ChaCha8Rng) -> Expr {
    match rng.random_range(0..4u32) {
        0 => Expr::call(Func::Add, vec![e, Expr::num(0.0)]),
        1 => Expr::call(Func::Mul, vec![e, Expr::num(1.0)]),
        2 => Expr::call(Func::Pow, vec![e, Expr::num(1.0)]),
        _ => Expr::call(Func::Mul, vec![Expr::num(1.0), e]),
    }
}

fn apply_wrap(lhs: &mut Expr, rhs: &mut Expr, target: u32, rng: &mut ChaCha8Rng) {
    let (dl, dr) = (lhs.depth(), rhs.depth());
    let budget = target - 1;
    // Prefer the deeper side (direct progress), else the shallower.
    if dl >= dr && dl + 1 <= budget {
        *lhs = wrap_once(std::mem::replace(lhs, Expr::Pi), rng);
    } else if dr + 1 <= budget {
        *rhs = wrap_once(std::mem::replace(rhs, Expr::Pi), rng);
    } else if dl + 1 <= budget {
        *lhs = wrap_once(std::mem::replace(lhs, Expr::Pi), rng);
    }
}

/// Try one rewrite at a (bias-weighted) random site of a random side, in a
/// random direction; accept the first candidate within depth/size budget.
fn apply_random_rewrite(
    lhs: &mut Expr,
    rhs: &mut Expr,
    all_rules: &[Rule],
    target: u32,
    node_cap: usize,
    depth_bias: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let side_is_lhs = rng.random::<bool>();
    let other_depth = if side_is_lhs { rhs.depth() } else { lhs.depth() };
    let side = if side_is_lhs { &*lhs } else { &*rhs };

    let mut paths = side.paths();
    // Weighted shuffle: deeper sites get weight (1+len)^bias.
    if depth_bias > 0.0 {
        let mut keyed: Vec<(f64, Vec<usize>)> = paths
            .into_iter()
            .map(|p| {
                let w = (1.0 + p.len() as f64).powf(depth_bias);
                let key = rng.random::<f64>().powf(1.0 / w); // weighted sampling keys
                (key, p)
            })
            .collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
        paths = keyed.into_iter().map(|(_, p)| p).collect();
    } else {
        paths.shuffle(rng);
    }

    let mut rule_order: Vec<usize> = (0..all_rules.len()).collect();
    rule_order.shuffle(rng);

    for path in paths.iter().take(8) {
        let subtree = side.subtree(path).expect("paths enumerate existing subtrees");
        for &ri in &rule_order {
            let r = &all_rules[ri];
            let flip = rng.random::<bool>();
            for dir in 0..2 {
                let (pat, rep) = if (dir == 0) == flip {
                    (&r.lhs, &r.rhs)
                } else {
                    (&r.rhs, &r.lhs)
                };
                let mut binding = BTreeMap::new();
                if !match_pattern(pat, subtree, &mut binding) {
                    continue;
                }
                // Reverse applications can expose variables the pattern
                // didn't bind (e.g. 0 → (* ?a 0)); any instantiation keeps
                // the identity, so fill them with random terminals.
                for v in rules::pattern_vars(rep) {
                    binding.entry(v).or_insert_with(|| random_terminal(rng));
                }
                let replacement = instantiate(rep, &binding);
                let candidate = side.with_replaced(path, replacement);
                let new_depth = 1 + candidate.depth().max(other_depth);
                if new_depth <= target && candidate.node_count() <= node_cap {
                    if side_is_lhs {
                        *lhs = candidate;
                    } else {
                        *rhs = candidate;
                    }
                    return true;
                }
            }
        }
    }
    false
}

/// Replace one free symbol (on both sides) with a small random expression.
fn apply_substitution(
    lhs: &mut Expr,
    rhs: &mut Expr,
    target: u32,
    node_cap: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    let symbols: Vec<String> = {
        let mut s = lhs.free_symbols();
        s.extend(rhs.free_symbols());
        s.into_iter().collect()
    };
    let Some(sym) = symbols.choose(rng) else {
        return false;
    };
    let repl_depth = rng.random_range(1..=2u32);
    let replacement = random_expr(repl_depth, rng);
    let new_lhs = lhs.substitute_symbol(sym, &replacement);
    let new_rhs = rhs.substitute_symbol(sym, &replacement);
    let new_depth = 1 + new_lhs.depth().max(new_rhs.depth());
    if new_depth <= target && new_lhs.node_count() + new_rhs.node_count() <= node_cap {
        *lhs = new_lhs;
        *rhs = new_rhs;
        true
    } else {
        false
    }
}

// ───────────────────────── corruption ─────────────────────────

/// Corrupt a certified-correct equation into a certified-incorrect one of
/// the same depth, or give up.
pub fn corrupt(eq: &Equation, rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Option<Equation> {
    let original = eq.text();
    for _ in 0..24 {
        let mode = weighted_index(rng, &cfg.corruption_weights);
        let candidate = match mode {
            0 => function_swap(eq, rng),
            1 => literal_perturb(eq, rng),
            _ => subtree_swap(eq, rng),
        };
        let Some(mut cand) = candidate else { continue };
        cand.label = Label::Incorrect;
        if cand.text() == original {
            continue;
        }
        debug_assert_eq!(cand.depth(), eq.depth(), "corruption must preserve depth");
        if oracle::certifies_incorrect(&cand.lhs, &cand.rhs, cfg.oracle_samples, oracle::GEN_SALT) {
            return Some(cand);
        }
    }
    None
}

/// All (side, path) site pairs; side 0 = lhs.
fn sites(eq: &Equation) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for p in eq.lhs.paths() {
        out.push((0, p));
    }
    for p in eq.rhs.paths() {
        out.push((1, p));
    }
    out
}

fn side(eq: &Equation, idx: usize) -> &Expr {
    if idx == 0 {
        &eq.lhs
    } else {
        &eq.rhs
    }
}

fn with_side_replaced(eq: &Equation, idx: usize, path: &[usize], new: Expr) -> Equation {
    let mut out = eq.clone();
    if idx == 0 {
        out.lhs = out.lhs.with_replaced(path, new);
    } else {
        out.rhs = out.rhs.with_replaced(path, new);
    }
    out
}

fn function_swap(eq: &Equation, rng: &mut ChaCha8Rng) -> Option<Equation> {
    let func_sites: Vec<(usize, Vec<usize>)> = sites(eq)
        .into_iter()
        .filter(|(s, p)| matches!(side(eq, *s).subtree(p), Some(Expr::Func(..))))
        .collect();
    let (s, path) = func_sites.choose(rng)?.clone();
    let Some(Expr::Func(f, args)) = side(eq, s).subtree(&path) else {
        unreachable!()
    };
    let siblings: Vec<Func> = Func::ALL
        .iter()
        .copied()
        .filter(|g| *g != Func::Eq && *g != *f && g.arity() == f.arity())
        .collect();
    let g = *siblings.choose(rng)?;
    let new = Expr::Func(g, args.clone());
    Some(with_side_replaced(eq, s, &path, new))
}

fn literal_perturb(eq: &Equation, rng: &mut ChaCha8Rng) -> Option<Equation> {
    let lit_sites: Vec<(usize, Vec<usize>)> = sites(eq)
        .into_iter()
        .filter(|(s, p)| matches!(side(eq, *s).subtree(p), Some(Expr::Number(_))))
        .collect();
    let (s, path) = lit_sites.choose(rng)?.clone();
    let Some(Expr::Number(old)) = side(eq, s).subtree(&path) else {
        unreachable!()
    };
    let choices: Vec<f64> = LITERALS.iter().copied().filter(|x| x != old).collect();
    let new = *choices.choose(rng)?;
    Some(with_side_replaced(eq, s, &path, Expr::num(new)))
}

fn subtree_swap(eq: &Equation, rng: &mut ChaCha8Rng) -> Option<Equation> {
    let all = sites(eq);
    let (s, path) = all.choose(rng)?.clone();
    let old_depth = side(eq, s).subtree(&path)?.depth();
    let new = random_expr(old_depth, rng);
    Some(with_side_replaced(eq, s, &path, new))
}

// ───────────────────────── splits ─────────────────────────

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    /// One of `train`, `validation`, `test`.
    pub name: String,
    /// Inclusive depth range.
    pub min_depth: u32,
    pub max_depth: u32,
    /// Exactly one of `fraction` / `count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Sampling seed; defaults to the dataset seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if !matches!(self.name.as_str(), "train" | "validation" | "test") {
            return Err(GenError::UnknownSplitName(self.name.clone()));
        }
        if self.min_depth == 0 || self.min_depth > self.max_depth {
            return Err(GenError::InvalidConfig(format!(
                "split '{}': bad depth range {}..={}",
                self.name, self.min_depth, self.max_depth
            )));
        }
        match (self.fraction, self.count) {
            (Some(f), None) if (0.0..=1.0).contains(&f) => Ok(()),
            (None, Some(_)) => Ok(()),
            (Some(f), None) => Err(GenError::InvalidConfig(format!(
                "split '{}': fraction {f} outside [0,1]",
                self.name
            ))),
            _ => Err(GenError::InvalidConfig(format!(
                "split '{}': exactly one of fraction/count required",
                self.name
            ))),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SplitSummary {
    pub file: String,
    pub count: usize,
    pub correct: usize,
    pub incorrect: usize,
    /// Fraction labeled Correct.
    pub balance: f64,
    pub counts_per_depth: BTreeMap<u32, usize>,
}

fn summarize(name: &str, eqs: &[Equation]) -> SplitSummary {
    let correct = eqs.iter().filter(|e| e.label == Label::Correct).count();
    let mut counts_per_depth = BTreeMap::new();
    for e in eqs {
        *counts_per_depth.entry(e.depth()).or_insert(0usize) += 1;
    }
    SplitSummary {
        file: format!("{name}.jsonl"),
        count: eqs.len(),
        correct,
        incorrect: eqs.len() - correct,
        balance: if eqs.is_empty() { 0.0 } else { correct as f64 / eqs.len() as f64 },
        counts_per_depth,
    }
}

/// Carve split files out of two pools: train/validation from `train_pool`,
/// test from `test_pool` (generated with a different seed). No equation
/// text is ever shared between splits; overlaps are dropped from the later
/// split and counted.
pub fn write_splits(
    train_pool: &[Equation],
    test_pool: &[Equation],
    specs: &[SplitSpec],
    default_seed: u64,
    out_dir: &Path,
) -> Result<(BTreeMap<String, SplitSummary>, usize), GenError> {
    for spec in specs {
        spec.validate()?;
    }
    std::fs::create_dir_all(out_dir)?;
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut summaries = BTreeMap::new();
    let mut overlap_dropped = 0usize;
    for (i, spec) in specs.iter().enumerate() {
        let pool = if spec.name == "test" { test_pool } else { train_pool };
        let mut eligible: Vec<&Equation> = pool
            .iter()
            .filter(|e| {
                let d = e.depth();
                d >= spec.min_depth && d <= spec.max_depth
            })
            .collect();
        let before = eligible.len();
        eligible.retain(|e| !used.contains(&e.text()));
        overlap_dropped += before - eligible.len();
        if eligible.is_empty() {
            return Err(GenError::EmptySplit(spec.name.clone()));
        }
        let mut rng = stream(spec.seed.unwrap_or(default_seed), &[tag::SPLIT, i as u64]);
        eligible.shuffle(&mut rng);
        let take = match (spec.fraction, spec.count) {
            (Some(f), None) => ((eligible.len() as f64) * f).round() as usize,
            (None, Some(c)) => c.min(eligible.len()),
            _ => unreachable!("validated"),
        };
        if take == 0 {
            return Err(GenError::EmptySplit(spec.name.clone()));
        }
        let chosen: Vec<Equation> = eligible[..take].iter().map(|e| (*e).clone()).collect();
        for e in &chosen {
            used.insert(e.text());
        }
        crate::expr::write_equations(&out_dir.join(format!("{}.jsonl", spec.name)), &chosen)?;
        summaries.insert(spec.name.clone(), summarize(&spec.name, &chosen));
    }
    Ok((summaries, overlap_dropped))
}

// ───────────────────────── completion items ─────────────────────────

/// One fill-in-the-blank problem: a correct equation with one subtree
/// (depth 1 or 2) replaced by the blank terminal `_`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionItem {
    pub lhs: Expr,
    pub rhs: Expr,
    pub gold: Expr,
    pub depth: u32,
}

pub const BLANK: &str = "_";

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CompletionRecord {
    pub lhs: String,
    pub rhs: String,
    pub gold: String,
    pub depth: u32,
}

impl CompletionItem {
    pub fn to_record(&self) -> CompletionRecord {
        CompletionRecord {
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
            gold: self.gold.to_string(),
            depth: self.depth,
        }
    }

    /// Substitute a candidate for the blank, producing a full equation.
    pub fn filled(&self, candidate: &Expr) -> Equation {
        Equation::new(
            self.lhs.substitute_symbol(BLANK, candidate),
            self.rhs.substitute_symbol(BLANK, candidate),
            Label::Correct,
        )
    }
}

/// Blank out subtrees of depth 1–2 in correct equations.
pub fn make_completion_items(
    pool: &[Equation],
    n: usize,
    seed: u64,
) -> Vec<CompletionItem> {
    let correct: Vec<&Equation> = pool.iter().filter(|e| e.label == Label::Correct).collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut slot = 0u64;
    let budget = n * 30;
    while out.len() < n && (slot as usize) < budget {
        let mut rng = stream(seed, &[tag::COMPLETION, slot]);
        slot += 1;
        let Some(eq) = correct.choose(&mut rng) else { break };
        let candidate_sites: Vec<(usize, Vec<usize>)> = sites(eq)
            .into_iter()
            .filter(|(s, p)| {
                let d = side(eq, *s).subtree(p).map(|t| t.depth()).unwrap_or(0);
                (1..=2).contains(&d)
            })
            .collect();
        let Some((s, path)) = candidate_sites.choose(&mut rng).cloned() else {
            continue;
        };
        let gold = side(eq, s).subtree(&path).unwrap().clone();
        let blanked = with_side_replaced(eq, s, &path, Expr::sym(BLANK));
        let item = CompletionItem {
            lhs: blanked.lhs,
            rhs: blanked.rhs,
            gold,
            depth: eq.depth(),
        };
        let key = format!("(= {} {}) <- {}", item.lhs, item.rhs, item.gold);
        if seen.insert(key) {
            out.push(item);
        }
    }
    out
}

pub fn write_completion_items(path: &Path, items: &[CompletionItem]) -> Result<(), GenError> {
    use std::io::Write as _;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        let line = serde_json::to_string(&item.to_record()).expect("record serializes");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_completion_items(path: &Path) -> Result<Vec<CompletionItem>, GenError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CompletionRecord = serde_json::from_str(line).map_err(|err| {
            GenError::Corpus(crate::expr::CorpusError::Json { line: i + 1, err })
        })?;
        let parse = |t: &str| {
            crate::expr::parse_side(t).map_err(|err| {
                GenError::Corpus(crate::expr::CorpusError::Parse { line: i + 1, err })
            })
        };
        out.push(CompletionItem {
            lhs: parse(&rec.lhs)?,
            rhs: parse(&rec.rhs)?,
            gold: parse(&rec.gold)?,
            depth: rec.depth,
        });
    }
    Ok(out)
}

// ───────────────────────── embedding pool ─────────────────────────

/// An expression certified to equal either 0 or 1 for all assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedEntry {
    pub expr: Expr,
    /// 0 or 1: which constant the expression collapses to.
    pub class: u8,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EmbedRecord {
    pub expr: String,
    pub class: u8,
    pub depth: u32,
}

/// Random expression certified constant-zero or constant-one, depth 1–3.
fn random_constant_expr(class: u8, rng: &mut ChaCha8Rng) -> Expr {
    let sub = |rng: &mut ChaCha8Rng| random_expr(rng.random_range(0..=1), rng);
    if class == 0 {
        match rng.random_range(0..6u32) {
            0 => Expr::call(Func::Mul, vec![sub(rng), Expr::num(0.0)]),
            1 => Expr::call(Func::Mul, vec![Expr::num(0.0), sub(rng)]),
            2 => Expr::call(Func::Sin, vec![Expr::num(0.0)]),
            3 => Expr::call(Func::Ln, vec![Expr::num(1.0)]),
            4 => {
                let inner = Expr::call(Func::Mul, vec![sub(rng), Expr::num(0.0)]);
                Expr::call(Func::Mul, vec![Expr::num(1.0), inner])
            }
            _ => {
                let inner = Expr::call(Func::Mul, vec![Expr::num(0.0), sub(rng)]);
                Expr::call(Func::Abs, vec![inner])
            }
        }
    } else {
        match rng.random_range(0..7u32) {
            0 => Expr::call(Func::Pow, vec![sub(rng), Expr::num(0.0)]),
            1 => Expr::call(Func::Pow, vec![Expr::num(1.0), sub(rng)]),
            2 => Expr::call(Func::Cos, vec![Expr::num(0.0)]),
            3 => Expr::call(Func::Exp, vec![Expr::num(0.0)]),
            4 => Expr::call(Func::Sqrt, vec![Expr::num(1.0)]),
            5 => {
                let inner = Expr::call(Func::Pow, vec![sub(rng), Expr::num(0.0)]);
                Expr::call(Func::Mul, vec![Expr::num(1.0), inner])
            }
            _ => Expr::call(Func::Cosh, vec![Expr::num(0.0)]),
        }
    }
}

/// Build a pool of constant-0 / constant-1 expressions (half each), every
/// entry certified by the oracle.
pub fn make_embed_pool(n: usize, seed: u64, oracle_samples: usize) -> Vec<EmbedEntry> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut slot = 0u64;
    let budget = n * 40;
    while out.len() < n && (slot as usize) < budget {
        let mut rng = stream(seed, &[tag::EMBED_POOL, slot]);
        slot += 1;
        let class = (out.len() % 2) as u8;
        let e = random_constant_expr(class, &mut rng);
        let d = e.depth();
        if !(1..=3).contains(&d) {
            continue;
        }
        if !oracle::is_constant(&e, class as f64, oracle_samples, oracle::EVAL_SALT) {
            continue;
        }
        if seen.insert(e.to_string()) {
            out.push(EmbedEntry { expr: e, class });
        }
    }
    out
}

pub fn write_embed_pool(path: &Path, entries: &[EmbedEntry]) -> Result<(), GenError> {
    use std::io::Write as _;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for e in entries {
        let rec = EmbedRecord {
            expr: e.expr.to_string(),
            class: e.class,
            depth: e.expr.depth(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec).expect("record serializes"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embed_pool(path: &Path) -> Result<Vec<EmbedEntry>, GenError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbedRecord = serde_json::from_str(line).map_err(|err| {
            GenError::Corpus(crate::expr::CorpusError::Json { line: i + 1, err })
        })?;
        let expr = crate::expr::parse_side(&rec.expr).map_err(|err| {
            GenError::Corpus(crate::expr::CorpusError::Parse { line: i + 1, err })
        })?;
        out.push(EmbedEntry { expr, class: rec.class });
    }
    Ok(out)
}

// ───────────────────────── whole-dataset driver ─────────────────────────

/// Config for the `generate` subcommand: two pools (train/validation and
/// test, different seeds), split specs, and the optional auxiliary files.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub seed: u64,
    pub train_counts: BTreeMap<u32, usize>,
    pub test_counts: BTreeMap<u32, usize>,
    /// Defaults to `seed + 1`; must differ from `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_seed: Option<u64>,
    #[serde(default = "default_incorrect_fraction")]
    pub incorrect_fraction: f64,
    #[serde(default = "default_corruption_weights")]
    pub corruption_weights: [f64; 3],
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    /// Depth bias for the train/validation pool.
    #[serde(default)]
    pub depth_bias: f64,
    /// Depth bias for the test pool (deeper-leaning by default).
    #[serde(default = "default_test_depth_bias")]
    pub test_depth_bias: f64,
    pub splits: Vec<SplitSpec>,
    /// Fill-in-the-blank items carved from the test split (0 = skip).
    #[serde(default)]
    pub completion_items: usize,
    /// Constant-0/1 expressions for embedding export (0 = skip).
    #[serde(default)]
    pub embed_pool: usize,
}

fn default_test_depth_bias() -> f64 {
    0.5
}

impl DatasetConfig {
    pub fn train_gen(&self) -> GenConfig {
        GenConfig {
            seed: self.seed,
            counts_per_depth: self.train_counts.clone(),
            max_depth: self.max_depth,
            incorrect_fraction: self.incorrect_fraction,
            corruption_weights: self.corruption_weights,
            oracle_samples: self.oracle_samples,
            max_attempts: self.max_attempts,
            depth_bias: self.depth_bias,
        }
    }

    pub fn test_gen(&self) -> GenConfig {
        GenConfig {
            seed: self.test_seed.unwrap_or(self.seed + 1),
            counts_per_depth: self.test_counts.clone(),
            max_depth: self.max_depth,
            incorrect_fraction: self.incorrect_fraction,
            corruption_weights: self.corruption_weights,
            oracle_samples: self.oracle_samples,
            max_attempts: self.max_attempts,
            depth_bias: self.test_depth_bias,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        self.train_gen().validate()?;
        self.test_gen().validate()?;
        if self.test_gen().seed == self.seed {
            return Err(GenError::InvalidConfig(
                "test_seed must differ from seed (test pool needs an independent stream)".into(),
            ));
        }
        for s in &self.splits {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub test_seed: u64,
    pub skipped_train_slots: usize,
    pub skipped_test_slots: usize,
    pub overlap_dropped: usize,
    pub splits: BTreeMap<String, SplitSummary>,
    pub completion_items: usize,
    pub embed_pool: usize,
}

/// Generate pools, write split files (plus completion/embedding aides), and
/// return the manifest describing everything.
pub fn build_dataset(cfg: &DatasetConfig, out_dir: &Path) -> Result<DatasetManifest, GenError> {
    cfg.validate()?;
    let train_out = generate(&cfg.train_gen())?;
    let test_out = generate(&cfg.test_gen())?;
    let (splits, overlap_dropped) = write_splits(
        &train_out.equations,
        &test_out.equations,
        &cfg.splits,
        cfg.seed,
        out_dir,
    )?;

    let mut n_completion = 0;
    if cfg.completion_items > 0 {
        let source = splits
            .get("test")
            .map(|s| out_dir.join(&s.file))
            .ok_or_else(|| {
                GenError::InvalidConfig("completion_items > 0 requires a test split".into())
            })?;
        let test_eqs = crate::expr::read_equations(&source)?;
        let items = make_completion_items(&test_eqs, cfg.completion_items, cfg.seed);
        write_completion_items(&out_dir.join("completion.jsonl"), &items)?;
        n_completion = items.len();
    }

    let mut n_embed = 0;
    if cfg.embed_pool > 0 {
        let pool = make_embed_pool(cfg.embed_pool, cfg.seed, cfg.oracle_samples);
        write_embed_pool(&out_dir.join("embed_pool.jsonl"), &pool)?;
        n_embed = pool.len();
    }

    Ok(DatasetManifest {
        seed: cfg.seed,
        test_seed: cfg.test_gen().seed,
        skipped_train_slots: train_out.skipped,
        skipped_test_slots: test_out.skipped,
        overlap_dropped,
        splits,
        completion_items: n_completion,
        embed_pool: n_embed,
    })
}

/// Majority-label statistics: the counting oracle for the trivial baseline.
pub fn majority_stats(eqs: &[Equation]) -> (Label, usize, f64) {
    let correct = eqs.iter().filter(|e| e.label == Label::Correct).count();
    let incorrect = eqs.len() - correct;
    if correct >= incorrect {
        (Label::Correct, correct, correct as f64 / eqs.len().max(1) as f64)
    } else {
        (Label::Incorrect, incorrect, incorrect as f64 / eqs.len().max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(seed: u64) -> GenConfig {
        let counts: BTreeMap<u32, usize> = [(1u32, 4), (2, 10), (3, 12), (4, 12)].into();
        GenConfig::new(seed, counts)
    }

    #[test]
    fn generation_hits_exact_depths_and_labels_certify() {
        let out = generate(&small_cfg(11)).unwrap();
        assert!(out.equations.len() >= 30, "only {} produced", out.equations.len());
        for eq in &out.equations {
            assert!(oracle::label_consistent(eq, 16, oracle::VALIDATE_SALT), "{}", eq.text());
        }
        // Exact-depth accounting: produced equations at each depth never
        // exceed requests, and mostly meet them.
        let mut by_depth: BTreeMap<u32, usize> = BTreeMap::new();
        for eq in &out.equations {
            *by_depth.entry(eq.depth()).or_insert(0) += 1;
        }
        for (d, &req) in &small_cfg(11).counts_per_depth {
            let got = by_depth.get(d).copied().unwrap_or(0);
            assert!(got <= req);
            assert!(got * 2 >= req, "depth {d}: {got}/{req} produced");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small_cfg(5)).unwrap();
        let b = generate(&small_cfg(5)).unwrap();
        let texts = |o: &GenOutput| {
            o.equations.iter().map(|e| format!("{} {:?}", e.text(), e.label)).collect::<Vec<_>>()
        };
        assert_eq!(texts(&a), texts(&b));
        let c = generate(&small_cfg(6)).unwrap();
        assert_ne!(texts(&a), texts(&c));
    }

    #[test]
    fn corruption_preserves_depth_and_flips_label() {
        let out = generate(&small_cfg(21)).unwrap();
        let cfg = small_cfg(21);
        let mut rng = stream(99, &[tag::GEN_SLOT]);
        let mut corrupted = 0;
        for eq in out.equations.iter().filter(|e| e.label == Label::Correct).take(10) {
            if let Some(bad) = corrupt(eq, &mut rng, &cfg) {
                assert_eq!(bad.depth(), eq.depth());
                assert_eq!(bad.label, Label::Incorrect);
                assert_ne!(bad.text(), eq.text());
                corrupted += 1;
            }
        }
        assert!(corrupted >= 5, "corruption should usually succeed, got {corrupted}");
    }

    #[test]
    fn random_expr_has_exact_depth() {
        let mut rng = stream(3, &[tag::GEN_SLOT, 7]);
        for d in 0..=5u32 {
            for _ in 0..20 {
                assert_eq!(random_expr(d, &mut rng).depth(), d);
            }
        }
    }

    #[test]
    fn splits_are_disjoint_and_depth_filtered() {
        let counts: BTreeMap<u32, usize> = [(2u32, 30), (3, 30), (4, 20)].into();
        let train_pool = generate(&GenConfig::new(31, counts.clone())).unwrap().equations;
        let test_pool = generate(&GenConfig::new(32, counts)).unwrap().equations;
        let dir = tempfile::tempdir().unwrap();
        let specs = vec![
            SplitSpec {
                name: "train".into(),
                min_depth: 2,
                max_depth: 3,
                fraction: Some(0.8),
                count: None,
                seed: None,
            },
            SplitSpec {
                name: "validation".into(),
                min_depth: 2,
                max_depth: 3,
                fraction: Some(1.0),
                count: None,
                seed: None,
            },
            SplitSpec {
                name: "test".into(),
                min_depth: 4,
                max_depth: 4,
                count: Some(10),
                fraction: None,
                seed: None,
            },
        ];
        let (summaries, _) = write_splits(&train_pool, &test_pool, &specs, 31, dir.path()).unwrap();
        let train = crate::expr::read_equations(&dir.path().join("train.jsonl")).unwrap();
        let val = crate::expr::read_equations(&dir.path().join("validation.jsonl")).unwrap();
        let test = crate::expr::read_equations(&dir.path().join("test.jsonl")).unwrap();
        assert!(!train.is_empty() && !val.is_empty() && !test.is_empty());
        let t: BTreeSet<String> = train.iter().map(|e| e.text()).collect();
        let v: BTreeSet<String> = val.iter().map(|e| e.text()).collect();
        let s: BTreeSet<String> = test.iter().map(|e| e.text()).collect();
        assert!(t.is_disjoint(&v), "train/validation must be disjoint");
        assert!(t.is_disjoint(&s), "train/test must be disjoint");
        assert!(train.iter().all(|e| (2..=3).contains(&e.depth())));
        assert!(test.iter().all(|e| e.depth() == 4));
        assert_eq!(summaries["train"].count, train.len());
        // Validation's fraction 1.0 takes everything train left over.
        assert_eq!(summaries["validation"].count, val.len());
    }

    #[test]
    fn empty_split_is_a_hard_error() {
        let counts: BTreeMap<u32, usize> = [(2u32, 10)].into();
        let pool = generate(&GenConfig::new(41, counts)).unwrap().equations;
        let dir = tempfile::tempdir().unwrap();
        let specs = vec![SplitSpec {
            name: "train".into(),
            min_depth: 9,
            max_depth: 9,
            fraction: Some(1.0),
            count: None,
            seed: None,
        }];
        assert!(matches!(
            write_splits(&pool, &pool, &specs, 41, dir.path()),
            Err(GenError::EmptySplit(_))
        ));
    }

    #[test]
    fn completion_items_blank_a_small_subtree() {
        let counts: BTreeMap<u32, usize> = [(3u32, 20), (4, 20)].into();
        let pool = generate(&GenConfig::new(51, counts)).unwrap().equations;
        let items = make_completion_items(&pool, 10, 51);
        assert!(items.len() >= 8, "got {}", items.len());
        for item in &items {
            let blanks = |e: &Expr| {
                e.free_symbols().contains(BLANK) as usize
            };
            assert_eq!(blanks(&item.lhs) + blanks(&item.rhs), 1, "exactly one side holds the blank");
            assert!((1..=2).contains(&item.gold.depth()), "gold depth {}", item.gold.depth());
            // Filling the gold back in restores a correct equation.
            let filled = item.filled(&item.gold);
            assert!(
                oracle::certifies_correct(&filled.lhs, &filled.rhs, 16, oracle::EVAL_SALT),
                "{}",
                filled.text()
            );
            assert_eq!(filled.depth(), item.depth);
        }
    }

    #[test]
    fn embed_pool_entries_certify_their_class() {
        let pool = make_embed_pool(12, 61, 16);
        assert_eq!(pool.len(), 12);
        let zeros = pool.iter().filter(|e| e.class == 0).count();
        assert_eq!(zeros, 6);
        for e in &pool {
            assert!((1..=3).contains(&e.expr.depth()));
            assert!(oracle::is_constant(&e.expr, e.class as f64, 16, oracle::EVAL_SALT));
        }
    }

    #[test]
    fn majority_stats_counts() {
        let eqs = vec![
            Equation::parse("(= x x)", Label::Correct).unwrap(),
            Equation::parse("(= x x)", Label::Correct).unwrap(),
            Equation::parse("(= x 1)", Label::Incorrect).unwrap(),
        ];
        let (label, count, acc) = majority_stats(&eqs);
        assert_eq!(label, Label::Correct);
        assert_eq!(count, 2);
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn label_balance_is_roughly_as_configured() {
        let counts: BTreeMap<u32, usize> = [(2u32, 60), (3, 60), (4, 60)].into();
        let out = generate(&GenConfig::new(71, counts)).unwrap();
        let correct = out.equations.iter().filter(|e| e.label == Label::Correct).count();
        let frac = correct as f64 / out.equations.len() as f64;
        // Configured 56% correct; binomial noise on ~180 draws.
        assert!((0.42..=0.70).contains(&frac), "correct fraction {frac}");
    }
}
