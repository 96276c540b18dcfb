//! Expressions, rewrite rules, and the random-assignment numeric oracle.
//!
//! Everything the dataset generator believes rests on three mechanisms shown
//! here in isolation: (1) prefix expression trees that parse, print, and
//! evaluate; (2) identity-preserving rewrite rules applied by pattern
//! matching; (3) a numeric oracle that labels an equation by evaluating both
//! sides under many random assignments of the free symbols — agreement
//! everywhere certifies `correct`, any disagreement certifies `incorrect`.
//!
//! ```bash
//! cargo run --example symbolic_oracle
//! ```

use std::collections::BTreeMap;

use treesmu::datagen::oracle::{self, probe};
use treesmu::datagen::rules::{axioms, instantiate, match_pattern, rewrites};
use treesmu::expr::{parse_expr, Equation, Label};

fn main() {
    // 1. Parse, print, evaluate.
    let e = parse_expr("(+ (sin (* 2 x)) (^ (cos x) 2))").expect("parses");
    println!("expression: {e}");
    println!("depth {} / {} nodes / free symbols {:?}", e.depth(), e.node_count(), e.free_symbols());
    let mut env = BTreeMap::new();
    env.insert("x".to_string(), 0.5f64);
    println!("value at x = 0.5: {:?}\n", e.eval(&env));

    // 2. The rule tables: axiom schemas seed correct equations, rewrites
    //    grow them without changing meaning.
    println!("{} axiom schemas, e.g.:", axioms().len());
    for r in axioms().iter().take(3) {
        println!("  {:<22} {} = {}", r.name, r.lhs, r.rhs);
    }
    println!("{} rewrite rules, e.g.:", rewrites().len());
    for r in rewrites().iter().take(3) {
        println!("  {:<22} {} -> {}", r.name, r.lhs, r.rhs);
    }

    // Apply one rewrite by hand. Read left-to-right a rule simplifies;
    // the generator runs them right-to-left to grow expressions without
    // changing their value: match the rhs pattern, emit the lhs.
    let rule = rewrites()
        .into_iter()
        .find(|r| r.name == "mul_one")
        .expect("rule table contains mul_one");
    let target = parse_expr("(sin (* 2 x))").expect("parses");
    let mut binding = BTreeMap::new();
    assert!(match_pattern(&rule.rhs, &target, &mut binding), "?a matches anything");
    let grown = instantiate(&rule.lhs, &binding);
    println!("\nrewrite {} in reverse: {} -> {}", rule.name, target, grown);

    // 3. The oracle. Free symbols get random values; both sides evaluate.
    let good = Equation::parse("(= (+ (^ (sin x) 2) (^ (cos x) 2)) 1)", Label::Correct)
        .expect("parses");
    let bad = Equation::parse("(= (+ (^ (sin x) 2) (^ (cos x) 2)) (cos x))", Label::Incorrect)
        .expect("parses");
    for eq in [&good, &bad] {
        let report = probe(&eq.lhs, &eq.rhs, 32, oracle::VALIDATE_SALT);
        println!(
            "\n{}\n  {} of {} assignments matched ({} abandoned as out-of-domain)",
            eq.text(),
            report.matches,
            report.evaluated,
            report.abandoned
        );
        let verdict = if oracle::certifies_correct(&eq.lhs, &eq.rhs, 32, oracle::VALIDATE_SALT) {
            "correct"
        } else if oracle::certifies_incorrect(&eq.lhs, &eq.rhs, 32, oracle::VALIDATE_SALT) {
            "incorrect"
        } else {
            "undecidable"
        };
        println!("  oracle verdict: {verdict}");
    }

    // The oracle is content-addressed: the same equation text always sees
    // the same assignments, so labels can never flicker between runs.
    let r1 = probe(&good.lhs, &good.rhs, 32, oracle::VALIDATE_SALT);
    let r2 = probe(&good.lhs, &good.rhs, 32, oracle::VALIDATE_SALT);
    assert_eq!(r1.matches, r2.matches);
    println!("\nsame text, same verdict, every time — labels are reproducible.");
}
