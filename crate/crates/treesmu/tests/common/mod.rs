//! Shared test support: straight-line reference implementations of every
//! cell, written directly from the update equations with plain `Vec<f64>`
//! loops — no tape, no graph nodes — so the autodiff engine's forward pass
//! can be checked against arithmetic that shares none of its code. Plus a
//! central-difference helper and small corpus builders.
#![allow(dead_code)]

use std::collections::BTreeMap;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::expr::{Equation, Expr, Func};
use treesmu::graph::Graph;
use treesmu::params::ParamStore;
use treesmu::tensor::Tensor;
use treesmu::vocab::Vocab;

// ───────────────────── plain-arithmetic building blocks ─────────────────────

pub fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// W·x with index loops; reads the tensor only through `get`.
pub fn mat_vec(w: &Tensor, x: &[f64]) -> Vec<f64> {
    assert_eq!(w.cols(), x.len(), "shape mismatch in reference mat_vec");
    (0..w.rows()).map(|r| (0..w.cols()).map(|c| w.get(r, c) * x[c]).sum()).collect()
}

fn gate(store: &ParamStore, w_key: &str, b_key: &str, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let w = store.get(w_key).unwrap_or_else(|| panic!("missing {w_key}"));
    let b = store.get(b_key).unwrap_or_else(|| panic!("missing {b_key}"));
    mat_vec(w, x).iter().zip(b.data()).map(|(wx, b)| f(wx + b)).collect()
}

fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ───────────────────── reference cells ─────────────────────

/// Mirror of `NodeState` with owned vectors.
#[derive(Debug, Clone)]
pub struct RefState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub stack: Vec<Vec<f64>>,
}

impl RefState {
    fn zero(cfg: &ModelConfig) -> RefState {
        RefState {
            h: vec![0.0; cfg.hidden],
            c: vec![0.0; cfg.hidden],
            stack: vec![vec![0.0; cfg.hidden]; cfg.stack],
        }
    }
}

fn ref_embed(cfg: &ModelConfig, store: &ParamStore, terminal: usize) -> RefState {
    let emb = store.get("embed").expect("embedding table");
    let mut s = RefState::zero(cfg);
    s.h = emb.row(terminal).to_vec();
    s
}

fn ref_rnn(store: &ParamStore, f: Func, l: &RefState, r: &RefState) -> RefState {
    let x: Vec<f64> = l.h.iter().chain(&r.h).copied().collect();
    let name = f.name();
    let h = gate(store, &format!("rnn/{name}/w"), &format!("rnn/{name}/b"), &x, sig);
    RefState { h, c: vec![], stack: vec![] }
}

fn ref_lstm(store: &ParamStore, f: Func, l: &RefState, r: &RefState) -> RefState {
    let x: Vec<f64> = l.h.iter().chain(&r.h).copied().collect();
    let name = f.name();
    let k = |gate_name: &str, suffix: &str| format!("lstm/{name}/{gate_name}.{suffix}");
    let i_g = gate(store, &k("in", "w"), &k("in", "b"), &x, sig);
    let f1 = gate(store, &k("f1", "w"), &k("f1", "b"), &x, sig);
    let f2 = gate(store, &k("f2", "w"), &k("f2", "b"), &x, sig);
    let o = gate(store, &k("out", "w"), &k("out", "b"), &x, sig);
    let u = gate(store, &k("cand", "w"), &k("cand", "b"), &x, f64::tanh);
    let c = add(&add(&hadamard(&i_g, &u), &hadamard(&f1, &l.c)), &hadamard(&f2, &r.c));
    let h = hadamard(&o, &c.iter().map(|v| v.tanh()).collect::<Vec<_>>());
    RefState { h, c, stack: vec![] }
}

/// Stack memory cell (and its queue mirror when `queue_order`), written out
/// as the update equations: combine child stacks row-wise under two forget
/// gates, normalize the action sigmoids per coordinate, then form each new
/// row as a convex mix of the pushed/popped (and optionally kept) sources.
fn ref_stack_cell(
    cfg: &ModelConfig,
    store: &ParamStore,
    f: Func,
    l: &RefState,
    r: &RefState,
    queue_order: bool,
) -> RefState {
    let p = cfg.stack;
    let n = cfg.hidden;
    let prefix = if queue_order { "queue" } else { "smu" };
    let x: Vec<f64> = l.h.iter().chain(&r.h).copied().collect();
    let name = f.name();
    let k = |gate_name: &str, suffix: &str| format!("{prefix}/{name}/{gate_name}.{suffix}");

    let f1 = gate(store, &k("f1", "w"), &k("f1", "b"), &x, sig);
    let f2 = gate(store, &k("f2", "w"), &k("f2", "b"), &x, sig);
    let s_c: Vec<Vec<f64>> = (0..p)
        .map(|i| add(&hadamard(&f1, &l.stack[i]), &hadamard(&f2, &r.stack[i])))
        .collect();

    let push_raw = gate(store, &k("push", "w"), &k("push", "b"), &x, sig);
    let pop_raw = gate(store, &k("pop", "w"), &k("pop", "b"), &x, sig);
    let noop_raw =
        cfg.noop.then(|| gate(store, &k("noop", "w"), &k("noop", "b"), &x, sig));
    let mut a_push = vec![0.0; n];
    let mut a_pop = vec![0.0; n];
    let mut a_noop = vec![0.0; n];
    for i in 0..n {
        let denom =
            push_raw[i] + pop_raw[i] + noop_raw.as_ref().map_or(0.0, |v| v[i]);
        a_push[i] = push_raw[i] / denom;
        a_pop[i] = pop_raw[i] / denom;
        if let Some(v) = &noop_raw {
            a_noop[i] = v[i] / denom;
        }
    }

    let u = gate(store, &k("cand", "w"), &k("cand", "b"), &x, f64::tanh);
    let zero = vec![0.0; n];
    let row = |i: isize| -> &[f64] {
        if (0..p as isize).contains(&i) {
            &s_c[i as usize]
        } else {
            &zero
        }
    };

    let mut s_new: Vec<Vec<f64>> = Vec::with_capacity(p);
    for i in 0..p as isize {
        let (push_src, pop_src): (&[f64], &[f64]) = if queue_order {
            if i == p as isize - 1 {
                (&u, row(i - 1))
            } else {
                (row(i + 1), row(i - 1))
            }
        } else if i == 0 {
            (&u, row(1))
        } else {
            (row(i - 1), row(i + 1))
        };
        let mut new_row = add(&hadamard(&a_push, push_src), &hadamard(&a_pop, pop_src));
        if cfg.noop {
            new_row = add(&new_row, &hadamard(&a_noop, &s_c[i as usize]));
        }
        s_new.push(new_row);
    }

    let o = gate(store, &k("out", "w"), &k("out", "b"), &x, sig);
    let read: Vec<f64> = if cfg.top_k == 1 {
        s_new[0].clone()
    } else {
        let pick = gate(store, &k("pick", "w"), &k("pick", "b"), &x, sig);
        let mut acc = vec![0.0; n];
        for (i, weight) in pick.iter().enumerate().take(cfg.top_k) {
            for (a, s) in acc.iter_mut().zip(&s_new[i]) {
                *a += weight * s;
            }
        }
        acc
    };
    let h = hadamard(&o, &read.iter().map(|v| v.tanh()).collect::<Vec<_>>());
    RefState { h, c: vec![], stack: s_new }
}

fn ref_seq_lstm(cfg: &ModelConfig, store: &ParamStore, tokens: &[usize]) -> Vec<f64> {
    let emb = store.get("embed").expect("embedding table");
    let n = cfg.hidden;
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    for &t in tokens {
        let x = emb.row(t);
        let gate2 = |name: &str, f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let wx = store.get(&format!("seqlstm/{name}.wx")).unwrap();
            let wh = store.get(&format!("seqlstm/{name}.wh")).unwrap();
            let b = store.get(&format!("seqlstm/{name}.b")).unwrap();
            let a = mat_vec(wx, x);
            let bb = mat_vec(wh, &h);
            (0..n).map(|i| f(a[i] + bb[i] + b.data()[i])).collect()
        };
        let i_g = gate2("in", &sig);
        let f_g = gate2("f", &sig);
        let o_g = gate2("out", &sig);
        let cand = gate2("cand", &|v| v.tanh());
        c = add(&hadamard(&f_g, &c), &hadamard(&i_g, &cand));
        h = hadamard(&o_g, &c.iter().map(|v| v.tanh()).collect::<Vec<_>>());
    }
    h
}

/// Recursive reference encoding of one equation side.
pub fn ref_encode(
    cfg: &ModelConfig,
    vocab: &Vocab,
    store: &ParamStore,
    e: &Expr,
) -> RefState {
    match e {
        Expr::Func(f, args) => {
            assert_ne!(*f, Func::Eq, "reference encoder sees only sides");
            let l = ref_encode(cfg, vocab, store, &args[0]);
            let r = match args.get(1) {
                Some(r) => ref_encode(cfg, vocab, store, r),
                None => RefState::zero(cfg),
            };
            match cfg.architecture {
                Architecture::TreeRnn => ref_rnn(store, *f, &l, &r),
                Architecture::TreeLstm => ref_lstm(store, *f, &l, &r),
                Architecture::TreeSmu => ref_stack_cell(cfg, store, *f, &l, &r, false),
                Architecture::TreeQueue => ref_stack_cell(cfg, store, *f, &l, &r, true),
                a => panic!("no reference tree cell for {a}"),
            }
        }
        leaf => ref_embed(cfg, store, vocab.terminal_index(leaf).expect("known terminal")),
    }
}

/// Reference p(Correct): σ(h_lhs · h_rhs), sides encoded by the straight-line
/// cells above (or the sequential reference for the token baseline).
pub fn ref_score(cfg: &ModelConfig, vocab: &Vocab, store: &ParamStore, eq: &Equation) -> f64 {
    let (hl, hr) = match cfg.architecture {
        Architecture::SeqLstm => (
            ref_seq_lstm(cfg, store, &vocab.tokenize_side(&eq.lhs).expect("tokenizable")),
            ref_seq_lstm(cfg, store, &vocab.tokenize_side(&eq.rhs).expect("tokenizable")),
        ),
        _ => (
            ref_encode(cfg, vocab, store, &eq.lhs).h,
            ref_encode(cfg, vocab, store, &eq.rhs).h,
        ),
    };
    sig(dot(&hl, &hr))
}

// ───────────────────── finite differences ─────────────────────

/// Central difference of a tape value along one parameter coordinate.
/// Only forward evaluations are used; the tape re-runs under the perturbed
/// store via `Graph::forward`.
pub fn central_difference(
    store: &mut ParamStore,
    g: &mut Graph,
    loss: treesmu::graph::NodeId,
    key: &str,
    idx: usize,
    eps: f64,
) -> f64 {
    let orig = store.get(key).unwrap().data()[idx];
    store.get_mut(key).unwrap().data_mut()[idx] = orig + eps;
    g.forward(store).unwrap();
    let up = g.value(loss).item();
    store.get_mut(key).unwrap().data_mut()[idx] = orig - eps;
    g.forward(store).unwrap();
    let down = g.value(loss).item();
    store.get_mut(key).unwrap().data_mut()[idx] = orig;
    g.forward(store).unwrap();
    (up - down) / (2.0 * eps)
}

// ───────────────────── corpus helpers ─────────────────────

/// Seeded corpus with the given per-depth slot counts.
pub fn gen_corpus(seed: u64, counts: &[(u32, usize)]) -> Vec<Equation> {
    let counts: BTreeMap<u32, usize> = counts.iter().copied().collect();
    treesmu::datagen::generate(&treesmu::datagen::GenConfig::new(seed, counts))
        .expect("generation succeeds")
        .equations
}

/// Split every i-th element out as validation (i % stride == 0).
pub fn split_stride(eqs: Vec<Equation>, stride: usize) -> (Vec<Equation>, Vec<Equation>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (i, e) in eqs.into_iter().enumerate() {
        if i % stride == 0 {
            val.push(e);
        } else {
            train.push(e);
        }
    }
    (train, val)
}
