//! The numeric labeling oracle.
//!
//! An equation's label is decided by evaluating both sides under random
//! assignments of its free symbols and comparing with a mixed
//! absolute/relative tolerance. The oracle seeds its generator from the
//! equation's own text (plus a salt), so a verdict is a pure function of
//! the equation — recomputing it later, elsewhere, or in parallel gives the
//! same answer.
//!
//! Draws that land outside some function's domain (Undefined) are redrawn
//! up to five times; a sample whose redraws are exhausted is abandoned.
//! Equations where most samples are abandoned are reported as undecidable
//! and discarded by the generator rather than guessed at.

use std::collections::BTreeMap;

use crate::expr::{values_match, Expr};
use crate::rng::{fnv1a64, stream, tag};

use super::rules::draw_value;

/// Salt for verdicts used while generating the corpus.
pub const GEN_SALT: u64 = 0x7452_4545_0001;
/// Salt for independent re-validation of an existing corpus.
pub const VALIDATE_SALT: u64 = 0x7452_4545_0002;
/// Salt for scoring completion candidates at evaluation time.
pub const EVAL_SALT: u64 = 0x7452_4545_0003;

/// Per-sample maximum redraws when a draw is Undefined.
pub const MAX_REDRAWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleReport {
    /// Samples that produced a defined value on both sides.
    pub evaluated: usize,
    /// Evaluated samples where the sides agreed within tolerance.
    pub matches: usize,
    /// Samples abandoned after exhausting redraws.
    pub abandoned: usize,
}

impl OracleReport {
    pub fn mismatches(&self) -> usize {
        self.evaluated - self.matches
    }

    /// Decidable means at least half the requested samples evaluated.
    pub fn decidable(&self, requested: usize) -> bool {
        self.evaluated * 2 >= requested
    }
}

/// Evaluate `samples` random assignments of the free symbols of
/// `lhs = rhs`. The verdict stream is keyed by the equation text and the
/// salt, never by caller state.
pub fn probe(lhs: &Expr, rhs: &Expr, samples: usize, salt: u64) -> OracleReport {
    let text = format!("(= {lhs} {rhs})");
    let key = fnv1a64(text.as_bytes());
    let mut rng = stream(key ^ salt, &[tag::ORACLE]);

    let mut symbols: Vec<String> = lhs.free_symbols().into_iter().collect();
    for s in rhs.free_symbols() {
        if !symbols.contains(&s) {
            symbols.push(s);
        }
    }
    symbols.sort();

    let mut report = OracleReport { evaluated: 0, matches: 0, abandoned: 0 };
    for _ in 0..samples {
        let mut done = false;
        for _ in 0..=MAX_REDRAWS {
            let assignment: BTreeMap<String, f64> =
                symbols.iter().map(|s| (s.clone(), draw_value(&mut rng))).collect();
            let lv = lhs.eval(&assignment).expect("oracle inputs are side expressions");
            let rv = rhs.eval(&assignment).expect("oracle inputs are side expressions");
            if let (Some(l), Some(r)) = (lv, rv) {
                report.evaluated += 1;
                if values_match(l, r) {
                    report.matches += 1;
                }
                done = true;
                break;
            }
        }
        if !done {
            report.abandoned += 1;
        }
    }
    report
}

/// Strict acceptance for generated positives: decidable and every evaluated
/// sample agreed.
pub fn certifies_correct(lhs: &Expr, rhs: &Expr, samples: usize, salt: u64) -> bool {
    let r = probe(lhs, rhs, samples, salt);
    r.decidable(samples) && r.evaluated > 0 && r.matches == r.evaluated
}

/// Strict acceptance for generated negatives: decidable and every evaluated
/// sample disagreed.
pub fn certifies_incorrect(lhs: &Expr, rhs: &Expr, samples: usize, salt: u64) -> bool {
    let r = probe(lhs, rhs, samples, salt);
    r.decidable(samples) && r.evaluated > 0 && r.matches == 0
}

/// Post-hoc validation verdict for an existing labeled equation: a Correct
/// label needs every sample to agree; an Incorrect label needs at least 80%
/// of evaluated samples to disagree. Returns false for contradictions.
pub fn label_consistent(eq: &crate::expr::Equation, samples: usize, salt: u64) -> bool {
    let r = probe(&eq.lhs, &eq.rhs, samples, salt);
    if !r.decidable(samples) || r.evaluated == 0 {
        return false;
    }
    match eq.label {
        crate::expr::Label::Correct => r.matches == r.evaluated,
        crate::expr::Label::Incorrect => r.mismatches() * 5 >= r.evaluated * 4,
    }
}

/// Does the expression evaluate to the constant `c` (within tolerance) on
/// every decidable sample? Used to certify the embedding pool classes.
pub fn is_constant(e: &Expr, c: f64, samples: usize, salt: u64) -> bool {
    let text = e.to_string();
    let key = fnv1a64(text.as_bytes());
    let mut rng = stream(key ^ salt, &[tag::ORACLE, 1]);
    let symbols: Vec<String> = e.free_symbols().into_iter().collect();
    let mut evaluated = 0;
    for _ in 0..samples {
        for _ in 0..=MAX_REDRAWS {
            let assignment: BTreeMap<String, f64> =
                symbols.iter().map(|s| (s.clone(), draw_value(&mut rng))).collect();
            if let Some(v) = e.eval(&assignment).expect("pool entries are side expressions") {
                if !values_match(v, c) {
                    return false;
                }
                evaluated += 1;
                break;
            }
        }
    }
    evaluated * 2 >= samples && evaluated > 0
}
