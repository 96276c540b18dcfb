//! The frozen token alphabet shared by the dataset generator and the models.
//!
//! A [`Vocab`] is an ordered list of tokens: terminals first (symbols,
//! numeric literals in canonical form, `pi`), then function names, then the
//! two parentheses used by the sequential baseline. Indices are dense and
//! stable: serialization stores the token list, and the index map is rebuilt
//! on load, so round-trips preserve every id.
//!
//! The dataset generator only ever emits terminals from
//! [`canonical_terminals`], which is why a model trained on one generated
//! corpus can evaluate any other: the embedding table covers the whole
//! closed alphabet. Encountering a token outside the vocabulary is a
//! contract violation and is reported, not guessed around.

use std::collections::HashMap;
use std::fmt;

use crate::expr::{format_number, Expr, Func};

/// Symbols the generator draws from.
pub const SYMBOLS: &[&str] = &["x", "y", "z", "w", "theta"];

/// Numeric literal pool. Canonical text of each is a distinct token.
pub const LITERALS: &[f64] = &[-4.0, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0];

/// Terminal tokens in canonical order: symbols, literals, `pi`.
pub fn canonical_terminals() -> Vec<String> {
    let mut out: Vec<String> = SYMBOLS.iter().map(|s| s.to_string()).collect();
    out.extend(LITERALS.iter().map(|&x| format_number(x)));
    out.push("pi".to_string());
    out
}

/// Functions that occur inside equation sides (everything except equality,
/// which is modeled by the classifier rather than a cell).
pub fn side_functions() -> Vec<Func> {
    Func::ALL.iter().copied().filter(|f| *f != Func::Eq).collect()
}

#[derive(Debug)]
pub enum VocabError {
    UnknownTerminal(String),
    UnknownToken(String),
    UnknownFunction(String),
}

impl fmt::Display for VocabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VocabError::UnknownTerminal(t) => {
                write!(f, "terminal '{t}' is not in the vocabulary")
            }
            VocabError::UnknownToken(t) => write!(f, "token '{t}' is not in the vocabulary"),
            VocabError::UnknownFunction(t) => {
                write!(f, "function '{t}' from a serialized vocabulary is not in the table")
            }
        }
    }
}

impl std::error::Error for VocabError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    functions: Vec<Func>,
    n_terminals: usize,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new(terminals: Vec<String>, functions: Vec<Func>) -> Vocab {
        let mut tokens = terminals.clone();
        tokens.extend(functions.iter().map(|f| f.name().to_string()));
        tokens.push("(".to_string());
        tokens.push(")".to_string());
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect::<HashMap<_, _>>();
        assert_eq!(index.len(), tokens.len(), "vocabulary tokens must be unique");
        Vocab { tokens, functions, n_terminals: terminals.len(), index }
    }

    /// The alphabet every generated corpus draws from.
    pub fn canonical() -> Vocab {
        Vocab::new(canonical_terminals(), side_functions())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn functions(&self) -> &[Func] {
        &self.functions
    }

    pub fn token_index(&self, token: &str) -> Result<usize, VocabError> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| VocabError::UnknownToken(token.to_string()))
    }

    /// Canonical token text of a leaf expression.
    pub fn leaf_token(leaf: &Expr) -> String {
        match leaf {
            Expr::Symbol(s) => s.clone(),
            Expr::Number(x) => format_number(*x),
            Expr::Pi => "pi".to_string(),
            Expr::Func(..) => panic!("leaf_token called on a function application"),
        }
    }

    /// Embedding row for a leaf. Errors name the offending terminal.
    pub fn terminal_index(&self, leaf: &Expr) -> Result<usize, VocabError> {
        let token = Self::leaf_token(leaf);
        match self.index.get(&token) {
            Some(&i) if i < self.n_terminals => Ok(i),
            _ => Err(VocabError::UnknownTerminal(token)),
        }
    }

    /// Token-id stream of one equation side for the sequential baseline:
    /// the prefix form with explicit parentheses, e.g. `(sin x)` becomes
    /// `["(", "sin", "x", ")"]`.
    pub fn tokenize_side(&self, e: &Expr) -> Result<Vec<usize>, VocabError> {
        let mut out = Vec::new();
        self.tokenize_into(e, &mut out)?;
        Ok(out)
    }

    fn tokenize_into(&self, e: &Expr, out: &mut Vec<usize>) -> Result<(), VocabError> {
        match e {
            Expr::Func(f, args) => {
                out.push(self.token_index("(")?);
                out.push(self.token_index(f.name())?);
                for a in args {
                    self.tokenize_into(a, out)?;
                }
                out.push(self.token_index(")")?);
                Ok(())
            }
            leaf => {
                out.push(self.terminal_index(leaf)?);
                Ok(())
            }
        }
    }
}

// Serialize as the ordered token structure; the index is rebuilt on load.
#[derive(serde::Serialize, serde::Deserialize)]
struct VocabWire {
    terminals: Vec<String>,
    functions: Vec<String>,
}

impl serde::Serialize for Vocab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VocabWire {
            terminals: self.tokens[..self.n_terminals].to_vec(),
            functions: self.functions.iter().map(|f| f.name().to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Vocab {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = VocabWire::deserialize(d)?;
        let mut funcs = Vec::with_capacity(wire.functions.len());
        for name in &wire.functions {
            let f = Func::from_name(name).ok_or_else(|| {
                serde::de::Error::custom(VocabError::UnknownFunction(name.clone()))
            })?;
            funcs.push(f);
        }
        Ok(Vocab::new(wire.terminals, funcs))
    }
}
