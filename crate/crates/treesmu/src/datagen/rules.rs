//! Identity schemas: axioms that seed equations and rewrites that grow them.
//!
//! A [`Rule`] is a pair of patterns over pattern variables (`?a`, `?b`, …).
//! Both sides denote equal values for every assignment of the variables
//! (within each function's domain), so instantiating an axiom yields a true
//! equation and rewriting a subterm of a true equation keeps it true.
//! Every rule is numerically validated — see [`validate_rule`] — and the
//! generator additionally re-certifies every finished equation with the
//! oracle, so a rule misapplied outside its domain can only cost a retry,
//! never a wrong label.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{parse_expr, values_match, Expr};

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: &'static str,
    pub lhs: Expr,
    pub rhs: Expr,
}

fn rule(name: &'static str, lhs: &str, rhs: &str) -> Rule {
    let lhs = parse_expr(lhs).unwrap_or_else(|e| panic!("rule {name} lhs: {e}"));
    let rhs = parse_expr(rhs).unwrap_or_else(|e| panic!("rule {name} rhs: {e}"));
    let lv = pattern_vars(&lhs);
    for v in pattern_vars(&rhs) {
        assert!(lv.contains(&v), "rule {name}: rhs variable {v} not bound on lhs");
    }
    Rule { name, lhs, rhs }
}

/// Pattern variables (symbols starting with `?`) of a pattern, sorted.
pub fn pattern_vars(pat: &Expr) -> Vec<String> {
    pat.free_symbols().into_iter().filter(|s| s.starts_with('?')).collect()
}

/// Structural matching: `?v` binds any expression (consistently across
/// repeats); everything else must match exactly.
pub fn match_pattern(pat: &Expr, target: &Expr, binding: &mut BTreeMap<String, Expr>) -> bool {
    match (pat, target) {
        (Expr::Symbol(s), t) if s.starts_with('?') => match binding.get(s) {
            Some(bound) => bound == t,
            None => {
                binding.insert(s.clone(), t.clone());
                true
            }
        },
        (Expr::Func(f, pargs), Expr::Func(g, targs)) => {
            f == g
                && pargs.len() == targs.len()
                && pargs.iter().zip(targs).all(|(p, t)| match_pattern(p, t, binding))
        }
        (a, b) => a == b,
    }
}

/// Instantiate a pattern under a binding. All `?` variables must be bound
/// (guaranteed for rule right-hand sides by the constructor check).
pub fn instantiate(pat: &Expr, binding: &BTreeMap<String, Expr>) -> Expr {
    match pat {
        Expr::Symbol(s) if s.starts_with('?') => binding
            .get(s)
            .unwrap_or_else(|| panic!("unbound pattern variable {s}"))
            .clone(),
        Expr::Func(f, args) => {
            Expr::Func(*f, args.iter().map(|a| instantiate(a, binding)).collect())
        }
        other => other.clone(),
    }
}

/// Axiom schemas: seeds for correct equations. Instantiating the pattern
/// variables with terminals yields a true equation of small depth.
pub fn axioms() -> Vec<Rule> {
    vec![
        rule("refl", "?a", "?a"),
        rule("add_zero", "(+ ?a 0)", "?a"),
        rule("mul_one", "(* ?a 1)", "?a"),
        rule("mul_zero", "(* ?a 0)", "0"),
        rule("pow_one", "(^ ?a 1)", "?a"),
        rule("pow_zero", "(^ ?a 0)", "1"),
        rule("one_pow", "(^ 1 ?a)", "1"),
        rule("add_comm", "(+ ?a ?b)", "(+ ?b ?a)"),
        rule("mul_comm", "(* ?a ?b)", "(* ?b ?a)"),
        rule("pythagorean", "(+ (^ (sin ?a) 2) (^ (cos ?a) 2))", "1"),
        rule("sec_pythagorean", "(+ 1 (^ (tan ?a) 2))", "(^ (cos ?a) -2)"),
        rule("hyperbolic_pythagorean", "(+ (^ (cosh ?a) 2) (* -1 (^ (sinh ?a) 2)))", "1"),
        rule("sin_double", "(sin (* 2 ?a))", "(* 2 (* (sin ?a) (cos ?a)))"),
        rule(
            "cos_double",
            "(cos (* 2 ?a))",
            "(+ (^ (cos ?a) 2) (* -1 (^ (sin ?a) 2)))",
        ),
        rule(
            "sin_sum",
            "(sin (+ ?a ?b))",
            "(+ (* (sin ?a) (cos ?b)) (* (cos ?a) (sin ?b)))",
        ),
        rule(
            "cos_sum",
            "(cos (+ ?a ?b))",
            "(+ (* (cos ?a) (cos ?b)) (* -1 (* (sin ?a) (sin ?b))))",
        ),
        rule("sin_zero", "(sin 0)", "0"),
        rule("cos_zero", "(cos 0)", "1"),
        rule("ln_exp", "(ln (exp ?a))", "?a"),
        rule("exp_sum", "(exp (+ ?a ?b))", "(* (exp ?a) (exp ?b))"),
        rule("sqrt_square", "(sqrt (^ ?a 2))", "(abs ?a)"),
        rule("abs_neg", "(abs (* -1 ?a))", "(abs ?a)"),
        rule("sin_neg", "(sin (* -1 ?a))", "(* -1 (sin ?a))"),
        rule("cos_neg", "(cos (* -1 ?a))", "(cos ?a)"),
        rule("sin_period", "(sin (+ ?a (* 2 pi)))", "(sin ?a)"),
        rule("cos_period", "(cos (+ ?a (* 2 pi)))", "(cos ?a)"),
        rule("cos_as_shifted_sin", "(cos ?a)", "(sin (+ ?a (* pi 0.5)))"),
        rule("tan_quotient", "(tan ?a)", "(* (sin ?a) (^ (cos ?a) -1))"),
        rule("tanh_quotient", "(tanh ?a)", "(* (sinh ?a) (^ (cosh ?a) -1))"),
        rule("sec_reciprocal", "(sec ?a)", "(^ (cos ?a) -1)"),
        rule("csc_reciprocal", "(csc ?a)", "(^ (sin ?a) -1)"),
        rule("cot_reciprocal", "(cot ?a)", "(^ (tan ?a) -1)"),
    ]
}

/// Rewrites used to grow equations: all axioms except the trivial `refl`,
/// plus structural identities and literal expansions. Each may be applied
/// in either direction.
pub fn rewrites() -> Vec<Rule> {
    let mut out: Vec<Rule> = axioms().into_iter().filter(|r| r.name != "refl").collect();
    out.extend(vec![
        rule("add_assoc", "(+ (+ ?a ?b) ?c)", "(+ ?a (+ ?b ?c))"),
        rule("mul_assoc", "(* (* ?a ?b) ?c)", "(* ?a (* ?b ?c))"),
        rule("distribute", "(* ?a (+ ?b ?c))", "(+ (* ?a ?b) (* ?a ?c))"),
        rule("pow_sum", "(^ ?a (+ ?b ?c))", "(* (^ ?a ?b) (^ ?a ?c))"),
        rule("pow_pow", "(^ (^ ?a ?b) ?c)", "(^ ?a (* ?b ?c))"),
        rule("double_negation", "(* -1 (* -1 ?a))", "?a"),
        rule("negate_sum", "(* -1 (+ ?a ?b))", "(+ (* -1 ?a) (* -1 ?b))"),
        rule("abs_idempotent", "(abs (abs ?a))", "(abs ?a)"),
        // Literal expansions: grow depth at numeric leaves.
        rule("two_as_sum", "2", "(+ 1 1)"),
        rule("three_as_sum", "3", "(+ 1 2)"),
        rule("four_as_sum", "4", "(+ 2 2)"),
        rule("four_as_square", "4", "(^ 2 2)"),
        rule("two_as_sqrt", "2", "(sqrt 4)"),
        rule("one_as_square", "1", "(^ -1 2)"),
        rule("one_as_sqrt", "1", "(sqrt 1)"),
        rule("half_as_pow", "0.5", "(^ 2 -1)"),
        rule("neg_half", "-0.5", "(* -1 0.5)"),
        rule("neg_two", "-2", "(* -1 2)"),
        rule("neg_three", "-3", "(* -1 3)"),
        rule("neg_four", "-4", "(* -1 4)"),
    ]);
    out
}

/// Numerically validate a rule: `samples` random assignments of the pattern
/// variables must make both sides defined (redrawing up to 5 times per
/// sample when a draw lands outside a domain) and agreeing within tolerance.
pub fn validate_rule(r: &Rule, rng: &mut ChaCha8Rng, samples: usize) -> Result<(), String> {
    let vars = pattern_vars(&r.lhs);
    let mut checked = 0;
    for s in 0..samples {
        let mut ok = false;
        for _redraw in 0..=5 {
            let binding: BTreeMap<String, f64> = vars
                .iter()
                .map(|v| (v.clone(), draw_value(rng)))
                .collect();
            let assignment = binding.clone();
            let lv = r.lhs.eval(&assignment).map_err(|e| format!("{}: {e}", r.name))?;
            let rv = r.rhs.eval(&assignment).map_err(|e| format!("{}: {e}", r.name))?;
            match (lv, rv) {
                (Some(l), Some(rr)) => {
                    if !values_match(l, rr) {
                        return Err(format!(
                            "{}: sides disagree on sample {s}: {l} vs {rr} with {binding:?}",
                            r.name
                        ));
                    }
                    ok = true;
                    checked += 1;
                    break;
                }
                // Undefined on this draw; redraw.
                _ => continue,
            }
        }
        if !ok && vars.is_empty() {
            // Variable-free rules either always evaluate or never will.
            return Err(format!("{}: sides are Undefined", r.name));
        }
    }
    if checked < samples / 2 {
        return Err(format!(
            "{}: only {checked}/{samples} samples evaluated; domain too thin",
            r.name
        ));
    }
    Ok(())
}

/// Magnitude-bounded draw: uniform over ±[0.1, 2], step values that keep
/// most compositions defined and well away from poles.
pub fn draw_value(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.random_range(0.1..=2.0);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}
