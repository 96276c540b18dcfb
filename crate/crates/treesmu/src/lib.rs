//! Tree stack memory units for symbolic equation verification.
//!
//! This crate implements a small research workbench around one idea: a
//! recursive neural network whose per-node memory is a differentiable stack,
//! so that verifying a symbolic equation (is `sin^2 x + cos^2 x = 1` true?)
//! can exploit the recursive structure of the expression trees instead of
//! flattening them into token sequences.
//!
//! The pieces, bottom to top:
//!
//! * [`tensor`] — a rank ≤ 2 dense `f64` tensor, just enough linear algebra
//!   for the cells below.
//! * [`graph`] — a tape-based reverse-mode automatic differentiation engine.
//!   Nodes are appended in construction order (which is already a valid
//!   topological order), values are computed eagerly, and a single reverse
//!   sweep accumulates gradients.
//! * [`params`] — named parameter storage, the Adam optimizer, and a binary
//!   checkpoint format that round-trips optimizer state bit-for-bit.
//! * [`expr`] — symbolic expression trees over a fixed 29-function
//!   trigonometry/algebra alphabet, with a prefix (s-expression) grammar,
//!   canonical printing, and a guarded numeric evaluator.
//! * [`vocab`] — the frozen token alphabet shared by the dataset generator
//!   and the models' embedding tables.
//! * [`datagen`] — a labeled equation generator: axiom schemas are
//!   instantiated and grown by identity-preserving rewrites to hit exact
//!   tree depths, negatives are made by corrupting positives, and every
//!   label is certified by a random-assignment numeric oracle.
//! * [`cells`] — the neural building blocks: tree RNN, binary tree LSTM,
//!   the tree stack memory unit (with optional no-op gate and top-k
//!   readout), a queue ablation, and a sequential LSTM baseline.
//! * [`model`] — glues an equation tree to a computation graph and a
//!   parameter store; handles checkpointing of whole models.
//! * [`training`] — minibatch training with Adam, early stopping, grid
//!   search, and seeded subsampling; emits per-epoch metric CSVs.
//! * [`eval`] — the measurement harness: verification accuracy sliced by
//!   depth, equation completion at top-K, a stack-usage probe, and root
//!   embedding export.
//! * [`manifest`] — small provenance records written next to every
//!   artifact directory.
//!
//! The `treesmu` binary exposes the pipeline as subcommands
//! (`generate`, `train`, `grid`, `eval`, `complete`, `probe`, `embed`);
//! the `examples/` directory shows each capability as a focused program.
//! Start with `cargo run --example autodiff_basics`.

pub mod cells;
pub mod datagen;
pub mod eval;
pub mod expr;
pub mod graph;
pub mod manifest;
pub mod model;
pub mod params;
pub mod rng;
pub mod tensor;
pub mod training;
pub mod vocab;
