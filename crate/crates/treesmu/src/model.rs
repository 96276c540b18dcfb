//! Whole-equation models: recursive encoding of expression trees, the
//! root classifier, scoring, and checkpoint round-trips.
//!
//! A [`Model`] is the immutable shape of a run — architecture config,
//! vocabulary, and (for the majority baseline) the memorized majority
//! label. The learnable numbers live in a [`ParamStore`] so that training,
//! evaluation, and checkpointing stay decoupled.

use std::fmt;
use std::path::Path;

use crate::cells::{
    self, Architecture, CellError, DropoutState, ModelConfig, NodeState,
};
use crate::expr::{Equation, Expr, Label};
use crate::graph::{sigmoid, Graph, NodeId};
use crate::params::{ParamError, ParamStore};
use crate::vocab::{Vocab, VocabError};

#[derive(Debug)]
pub enum ModelError {
    Cell(CellError),
    Vocab(VocabError),
    Param(ParamError),
    Meta(String),
    /// `=` appeared below an equation root.
    EqualityInsideSide,
    /// MajorityClass has no encoder / was asked to score before training.
    MajorityUnsupported(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Cell(e) => write!(f, "{e}"),
            ModelError::Vocab(e) => write!(f, "{e}"),
            ModelError::Param(e) => write!(f, "{e}"),
            ModelError::Meta(m) => write!(f, "checkpoint metadata: {m}"),
            ModelError::EqualityInsideSide => {
                write!(f, "equality node inside an equation side")
            }
            ModelError::MajorityUnsupported(what) => {
                write!(f, "majority baseline does not support {what}")
            }
        }
    }
}

impl std::error::Error for ModelError {}

impl From<CellError> for ModelError {
    fn from(e: CellError) -> Self {
        ModelError::Cell(e)
    }
}

impl From<VocabError> for ModelError {
    fn from(e: VocabError) -> Self {
        ModelError::Vocab(e)
    }
}

impl From<crate::graph::GraphError> for ModelError {
    fn from(e: crate::graph::GraphError) -> Self {
        ModelError::Cell(CellError::Graph(e))
    }
}

impl From<ParamError> for ModelError {
    fn from(e: ParamError) -> Self {
        ModelError::Param(e)
    }
}

/// Checkpoint metadata serialized as JSON next to the tensors.
#[derive(serde::Serialize, serde::Deserialize)]
struct CheckpointMeta {
    config: ModelConfig,
    vocab: Vocab,
    majority: Option<Label>,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocab,
    /// The majority baseline's single learned fact.
    pub majority: Option<Label>,
}

impl Model {
    pub fn new(config: ModelConfig, vocab: Vocab) -> Result<Model, ModelError> {
        config.validate()?;
        Ok(Model { config, vocab, majority: None })
    }

    /// Fresh parameters for this model's shape.
    pub fn init_params(&self, seed: u64) -> ParamStore {
        cells::init_params(&self.config, &self.vocab, seed)
    }

    /// Encode one equation side bottom-up, returning the root state.
    pub fn encode_side(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        expr: &Expr,
        drop: &mut Option<DropoutState>,
    ) -> Result<NodeState, ModelError> {
        match self.config.architecture {
            Architecture::MajorityClass => {
                Err(ModelError::MajorityUnsupported("encoding expressions"))
            }
            Architecture::SeqLstm => {
                let tokens = self.vocab.tokenize_side(expr)?;
                let h = cells::seq_lstm_encode(g, store, &self.config, &tokens, drop)?;
                Ok(NodeState { h, c: None, stack: None })
            }
            _ => self.encode_tree(g, store, expr, drop),
        }
    }

    fn encode_tree(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        expr: &Expr,
        drop: &mut Option<DropoutState>,
    ) -> Result<NodeState, ModelError> {
        match expr {
            Expr::Func(f, args) => {
                if *f == crate::expr::Func::Eq {
                    return Err(ModelError::EqualityInsideSide);
                }
                let left = self.encode_tree(g, store, &args[0], drop)?;
                let right = match args.get(1) {
                    Some(r) => self.encode_tree(g, store, r, drop)?,
                    // Unary functions read a zero state as their right child.
                    None => cells::zero_state(g, &self.config),
                };
                let state = match self.config.architecture {
                    Architecture::TreeRnn => {
                        cells::treernn_node(g, store, *f, &left, &right, drop)?
                    }
                    Architecture::TreeLstm => {
                        cells::treelstm_node(g, store, *f, &left, &right, drop)?
                    }
                    Architecture::TreeSmu => {
                        cells::treesmu_node(g, store, &self.config, *f, &left, &right, drop)?
                    }
                    Architecture::TreeQueue => {
                        cells::treequeue_node(g, store, &self.config, *f, &left, &right, drop)?
                    }
                    _ => unreachable!("handled in encode_side"),
                };
                Ok(state)
            }
            leaf => {
                let idx = self.vocab.terminal_index(leaf)?;
                Ok(cells::embed_leaf(g, store, &self.config, idx)?)
            }
        }
    }

    /// Build the forward pass for one labeled equation and return
    /// (logit, loss) node ids on `g`.
    pub fn equation_loss(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        eq: &Equation,
        drop: &mut Option<DropoutState>,
    ) -> Result<(NodeId, NodeId), ModelError> {
        let lhs = self.encode_side(g, store, &eq.lhs, drop)?;
        let rhs = self.encode_side(g, store, &eq.rhs, drop)?;
        let y = eq.label.as_int() as f64;
        let (logit, loss) = cells::classify_equation(g, lhs.h, rhs.h, Some(y))?;
        Ok((logit, loss.expect("label supplied")))
    }

    /// p(Correct) for one equation, evaluation mode (no dropout).
    pub fn score(&self, store: &ParamStore, eq: &Equation) -> Result<f64, ModelError> {
        if self.config.architecture == Architecture::MajorityClass {
            let m = self
                .majority
                .ok_or(ModelError::MajorityUnsupported("scoring before training"))?;
            return Ok(match m {
                Label::Correct => 1.0,
                Label::Incorrect => 0.0,
            });
        }
        let mut g = Graph::new();
        let lhs = self.encode_side(&mut g, store, &eq.lhs, &mut None)?;
        let rhs = self.encode_side(&mut g, store, &eq.rhs, &mut None)?;
        let (logit, _) = cells::classify_equation(&mut g, lhs.h, rhs.h, None)?;
        Ok(sigmoid(g.value(logit).item()))
    }

    /// Hard decision at threshold p ≥ 0.5.
    pub fn predict(&self, store: &ParamStore, eq: &Equation) -> Result<Label, ModelError> {
        Ok(if self.score(store, eq)? >= 0.5 { Label::Correct } else { Label::Incorrect })
    }

    /// Root states of both sides on a fresh graph, for probes and exports.
    pub fn root_states(
        &self,
        store: &ParamStore,
        eq: &Equation,
    ) -> Result<(Graph, NodeState, NodeState), ModelError> {
        let mut g = Graph::new();
        let lhs = self.encode_side(&mut g, store, &eq.lhs, &mut None)?;
        let rhs = self.encode_side(&mut g, store, &eq.rhs, &mut None)?;
        Ok((g, lhs, rhs))
    }

    /// Write model shape + parameters to one checkpoint file.
    pub fn save(&self, store: &ParamStore, path: &Path) -> Result<(), ModelError> {
        let meta = CheckpointMeta {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            majority: self.majority,
        };
        let meta = serde_json::to_string(&meta).map_err(|e| ModelError::Meta(e.to_string()))?;
        store.save(path, &meta)?;
        Ok(())
    }

    /// Read a checkpoint back into a model and its parameters.
    pub fn load(path: &Path) -> Result<(Model, ParamStore), ModelError> {
        let (meta, store) = ParamStore::load(path)?;
        let meta: CheckpointMeta =
            serde_json::from_str(&meta).map_err(|e| ModelError::Meta(e.to_string()))?;
        meta.config.validate()?;
        let model =
            Model { config: meta.config, vocab: meta.vocab, majority: meta.majority };
        Ok((model, store))
    }
}
