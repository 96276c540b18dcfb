//! Symbolic expression trees over a fixed trigonometry/algebra alphabet.
//!
//! Expressions are written in prefix (s-expression) form:
//!
//! ```text
//! (+ (^ (sin theta) 2) (^ (cos theta) 2))
//! ```
//!
//! The function alphabet is frozen: 4 binary functions (`=`, `+`, `*`, `^`)
//! and 25 unary ones (square root, exponential, logarithm, absolute value,
//! the six trig functions with their inverses, the six hyperbolic functions,
//! and the three principal inverse hyperbolics). Subtraction and division
//! are accepted as input sugar and normalized at parse time:
//! `(- a b)` becomes `(+ a (* -1 b))` and `(/ a b)` becomes `(* a (^ b -1))`,
//! so every tree downstream of the parser uses only the 29 table entries.
//!
//! Depth convention used everywhere in this crate: leaves have depth 0 and
//! an internal node has depth 1 + max(children). The equality node counts,
//! so `(= x x)` has depth 1.
//!
//! Numeric evaluation is guarded: every partial function returns `None`
//! (Undefined) outside its domain — near poles, for negative bases with
//! fractional exponents, on overflow — instead of producing NaN or ±∞.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Relative/absolute tolerance for deciding two side values agree:
/// |l − r| ≤ max(1e-8, 1e-6·max(|l|, |r|)).
pub fn values_match(l: f64, r: f64) -> bool {
    (l - r).abs() <= 1e-8_f64.max(1e-6 * l.abs().max(r.abs()))
}

/// Guard width for poles: trig reciprocals are Undefined when the
/// denominator is within this of zero.
const POLE_EPS: f64 = 1e-9;

macro_rules! funcs {
    ($(($variant:ident, $name:expr, $arity:expr)),* $(,)?) => {
        /// The frozen function alphabet.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Func {
            $($variant),*
        }

        impl Func {
            pub const ALL: &'static [Func] = &[$(Func::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Func::$variant => $name),* }
            }

            pub fn arity(self) -> usize {
                match self { $(Func::$variant => $arity),* }
            }

            pub fn from_name(name: &str) -> Option<Func> {
                match name {
                    $($name => Some(Func::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

funcs![
    (Eq, "=", 2),
    (Add, "+", 2),
    (Mul, "*", 2),
    (Pow, "^", 2),
    (Sqrt, "sqrt", 1),
    (Exp, "exp", 1),
    (Ln, "ln", 1),
    (Abs, "abs", 1),
    (Sin, "sin", 1),
    (Cos, "cos", 1),
    (Tan, "tan", 1),
    (Sec, "sec", 1),
    (Csc, "csc", 1),
    (Cot, "cot", 1),
    (Asin, "asin", 1),
    (Acos, "acos", 1),
    (Atan, "atan", 1),
    (Asec, "asec", 1),
    (Acsc, "acsc", 1),
    (Acot, "acot", 1),
    (Sinh, "sinh", 1),
    (Cosh, "cosh", 1),
    (Tanh, "tanh", 1),
    (Sech, "sech", 1),
    (Csch, "csch", 1),
    (Coth, "coth", 1),
    (Asinh, "asinh", 1),
    (Acosh, "acosh", 1),
    (Atanh, "atanh", 1),
];

impl Func {
    /// Apply to numeric arguments. `None` means Undefined (domain violation,
    /// pole within [`POLE_EPS`], or non-finite result). Equality is not a
    /// numeric function; applying it is a caller bug and returns `None`.
    pub fn apply(self, args: &[f64]) -> Option<f64> {
        debug_assert_eq!(args.len(), self.arity());
        let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
        match self {
            Func::Eq => None,
            Func::Add => finite(args[0] + args[1]),
            Func::Mul => finite(args[0] * args[1]),
            Func::Pow => {
                let (b, e) = (args[0], args[1]);
                // 0^0 and division by ~zero are Undefined; negative bases
                // only with (exactly representable) integer exponents.
                if b.abs() < POLE_EPS && e <= 0.0 {
                    return None;
                }
                if b < 0.0 && e.fract() != 0.0 {
                    return None;
                }
                finite(b.powf(e))
            }
            Func::Sqrt => (args[0] >= 0.0).then(|| args[0].sqrt()),
            Func::Exp => finite(args[0].exp()),
            Func::Ln => (args[0] > 0.0).then(|| args[0].ln()).and_then(finite),
            Func::Abs => Some(args[0].abs()),
            Func::Sin => Some(args[0].sin()),
            Func::Cos => Some(args[0].cos()),
            Func::Tan => {
                let c = args[0].cos();
                (c.abs() >= POLE_EPS).then(|| args[0].sin() / c)
            }
            Func::Sec => {
                let c = args[0].cos();
                (c.abs() >= POLE_EPS).then(|| 1.0 / c)
            }
            Func::Csc => {
                let s = args[0].sin();
                (s.abs() >= POLE_EPS).then(|| 1.0 / s)
            }
            Func::Cot => {
                let s = args[0].sin();
                (s.abs() >= POLE_EPS).then(|| args[0].cos() / s)
            }
            Func::Asin => (args[0].abs() <= 1.0).then(|| args[0].asin()),
            Func::Acos => (args[0].abs() <= 1.0).then(|| args[0].acos()),
            Func::Atan => Some(args[0].atan()),
            // asec x = acos(1/x), acsc x = asin(1/x), defined for |x| ≥ 1.
            Func::Asec => (args[0].abs() >= 1.0).then(|| (1.0 / args[0]).acos()),
            Func::Acsc => (args[0].abs() >= 1.0).then(|| (1.0 / args[0]).asin()),
            // Continuous branch with range (0, π): acot x = atan2(1, x).
            Func::Acot => Some(1.0_f64.atan2(args[0])),
            Func::Sinh => finite(args[0].sinh()),
            Func::Cosh => finite(args[0].cosh()),
            Func::Tanh => Some(args[0].tanh()),
            Func::Sech => Some(1.0 / args[0].cosh()),
            Func::Csch => {
                let s = args[0].sinh();
                (s.abs() >= POLE_EPS).then(|| 1.0 / s)
            }
            Func::Coth => {
                let t = args[0].tanh();
                (t.abs() >= POLE_EPS).then(|| 1.0 / t)
            }
            Func::Asinh => Some(args[0].asinh()),
            Func::Acosh => (args[0] >= 1.0).then(|| args[0].acosh()),
            Func::Atanh => (args[0].abs() < 1.0).then(|| args[0].atanh()).and_then(finite),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Func(Func, Vec<Expr>),
    Symbol(String),
    Number(f64),
    Pi,
}

/// Canonical rendering of a numeric literal: integers without a decimal
/// point, −0 collapsed to 0, everything else via the shortest-roundtrip
/// float formatter.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Func(func, args) => {
                write!(f, "({}", func.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Expr::Symbol(s) => write!(f, "{s}"),
            Expr::Number(x) => write!(f, "{}", format_number(*x)),
            Expr::Pi => write!(f, "pi"),
        }
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Number(x)
    }

    pub fn sym(s: impl Into<String>) -> Expr {
        Expr::Symbol(s.into())
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), f.arity(), "arity mismatch building {}", f.name());
        Expr::Func(f, args)
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Expr::Func(..))
    }

    /// Leaves have depth 0; a node is 1 + max over children.
    pub fn depth(&self) -> u32 {
        match self {
            Expr::Func(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Func(_, args) => 1 + args.iter().map(Expr::node_count).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Symbol(s) => {
                out.insert(s.clone());
            }
            Expr::Func(_, args) => args.iter().for_each(|a| a.collect_symbols(out)),
            _ => {}
        }
    }

    /// Guarded numeric evaluation. `Ok(None)` = Undefined on this
    /// assignment; `Err` = contract violation (unassigned symbol, or an
    /// equality node inside an expression).
    pub fn eval(&self, assignment: &BTreeMap<String, f64>) -> Result<Option<f64>, EvalError> {
        match self {
            Expr::Number(x) => Ok(Some(*x)),
            Expr::Pi => Ok(Some(std::f64::consts::PI)),
            Expr::Symbol(s) => assignment
                .get(s)
                .map(|&v| Some(v))
                .ok_or_else(|| EvalError::UnassignedSymbol(s.clone())),
            Expr::Func(Func::Eq, _) => Err(EvalError::EqualityNode),
            Expr::Func(f, args) => {
                let mut vals = [0.0; 2];
                for (i, a) in args.iter().enumerate() {
                    match a.eval(assignment)? {
                        Some(v) => vals[i] = v,
                        None => return Ok(None),
                    }
                }
                Ok(f.apply(&vals[..args.len()]))
            }
        }
    }

    /// All paths to subtrees, preorder; the empty path is the root.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![(self, Vec::new())];
        while let Some((e, path)) = stack.pop() {
            out.push(path.clone());
            if let Expr::Func(_, args) = e {
                for (i, a) in args.iter().enumerate().rev() {
                    let mut p = path.clone();
                    p.push(i);
                    stack.push((a, p));
                }
            }
        }
        out
    }

    pub fn subtree(&self, path: &[usize]) -> Option<&Expr> {
        let mut cur = self;
        for &i in path {
            match cur {
                Expr::Func(_, args) => cur = args.get(i)?,
                _ => return None,
            }
        }
        Some(cur)
    }

    /// Copy of self with the subtree at `path` replaced.
    pub fn with_replaced(&self, path: &[usize], new: Expr) -> Expr {
        if path.is_empty() {
            return new;
        }
        match self {
            Expr::Func(f, args) => {
                let mut args = args.clone();
                args[path[0]] = args[path[0]].with_replaced(&path[1..], new);
                Expr::Func(*f, args)
            }
            _ => panic!("path descends through a leaf"),
        }
    }

    /// Copy of self with every occurrence of `symbol` replaced.
    pub fn substitute_symbol(&self, symbol: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Symbol(s) if s == symbol => replacement.clone(),
            Expr::Func(f, args) => Expr::Func(
                *f,
                args.iter().map(|a| a.substitute_symbol(symbol, replacement)).collect(),
            ),
            other => other.clone(),
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum EvalError {
    UnassignedSymbol(String),
    EqualityNode,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnassignedSymbol(s) => write!(f, "symbol {s} has no assigned value"),
            EvalError::EqualityNode => {
                write!(f, "equality is not numerically evaluable; compare sides instead")
            }
        }
    }
}

impl std::error::Error for EvalError {}

// ───────────────────────── parsing ─────────────────────────

#[derive(Debug, PartialEq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, PartialEq)]
pub enum ParseErrorKind {
    UnknownFunction(String),
    WrongArity { func: String, expected: usize, got: usize },
    UnexpectedEnd,
    UnexpectedToken(String),
    TrailingInput,
    InvalidNumber(String),
    InvalidSymbol(String),
    EqualityNotAtRoot,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: ", self.pos)?;
        match &self.kind {
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function '{s}'"),
            ParseErrorKind::WrongArity { func, expected, got } => {
                write!(f, "'{func}' takes {expected} argument(s), got {got}")
            }
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnexpectedToken(s) => write!(f, "unexpected token '{s}'"),
            ParseErrorKind::TrailingInput => write!(f, "trailing input after expression"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number '{s}'"),
            ParseErrorKind::InvalidSymbol(s) => write!(f, "invalid symbol '{s}'"),
            ParseErrorKind::EqualityNotAtRoot => {
                write!(f, "'=' may only appear at the root of an equation")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug)]
enum Token<'a> {
    LParen(usize),
    RParen(usize),
    Atom(usize, &'a str),
}

fn tokenize(text: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push(Token::LParen(i));
                i += 1;
            }
            b')' => {
                out.push(Token::RParen(i));
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b'\n' | b'\r' | b'(' | b')') {
                    i += 1;
                }
                out.push(Token::Atom(start, &text[start..i]));
            }
        }
    }
    Ok(out)
}

fn parse_atom(pos: usize, s: &str) -> Result<Expr, ParseError> {
    let first = s.chars().next().expect("atoms are non-empty");
    let numeric_start = first.is_ascii_digit()
        || ((first == '-' || first == '.' || first == '+') && s.len() > 1
            && s[1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.'));
    if numeric_start {
        return s
            .parse::<f64>()
            .map(Expr::Number)
            .map_err(|_| ParseError { pos, kind: ParseErrorKind::InvalidNumber(s.into()) });
    }
    if s == "pi" || s == "π" {
        return Ok(Expr::Pi);
    }
    // Symbols: letters, digits, underscore; optional leading '?' marks a
    // pattern variable (used by the rewrite rules); 'θ' is accepted as an
    // alias for theta. '_' alone is the completion blank.
    let body = s.strip_prefix('?').unwrap_or(s);
    let body = if body == "θ" { "theta" } else { body };
    let ok = !body.is_empty()
        && body.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && body.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !ok {
        return Err(ParseError { pos, kind: ParseErrorKind::InvalidSymbol(s.into()) });
    }
    let name = if s.starts_with('?') { format!("?{body}") } else { body.to_string() };
    Ok(Expr::Symbol(name))
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn next(&mut self) -> Option<&Token<'a>> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_expr(&mut self, at_root: bool) -> Result<Expr, ParseError> {
        match self.next() {
            None => Err(ParseError { pos: self.len, kind: ParseErrorKind::UnexpectedEnd }),
            Some(Token::RParen(p)) => {
                Err(ParseError { pos: *p, kind: ParseErrorKind::UnexpectedToken(")".into()) })
            }
            Some(Token::Atom(p, s)) => parse_atom(*p, s),
            Some(Token::LParen(_)) => {
                let (fpos, fname) = match self.next() {
                    Some(Token::Atom(fp, s)) => (*fp, *s),
                    Some(Token::LParen(fp)) => {
                        return Err(ParseError {
                            pos: *fp,
                            kind: ParseErrorKind::UnexpectedToken("(".into()),
                        })
                    }
                    Some(Token::RParen(fp)) => {
                        return Err(ParseError {
                            pos: *fp,
                            kind: ParseErrorKind::UnexpectedToken(")".into()),
                        })
                    }
                    None => return Err(ParseError { pos: self.len, kind: ParseErrorKind::UnexpectedEnd }),
                };
                let fname = fname.to_string();
                let mut args = Vec::new();
                loop {
                    match self.tokens.get(self.pos) {
                        Some(Token::RParen(_)) => {
                            self.pos += 1;
                            break;
                        }
                        None => {
                            return Err(ParseError { pos: self.len, kind: ParseErrorKind::UnexpectedEnd })
                        }
                        _ => args.push(self.parse_expr(false)?),
                    }
                }
                build_application(fpos, &fname, args, at_root)
            }
        }
    }
}

fn build_application(
    pos: usize,
    fname: &str,
    mut args: Vec<Expr>,
    at_root: bool,
) -> Result<Expr, ParseError> {
    let arity_check = |expected: usize, args: &[Expr]| {
        if args.len() == expected {
            Ok(())
        } else {
            Err(ParseError {
                pos,
                kind: ParseErrorKind::WrongArity {
                    func: fname.to_string(),
                    expected,
                    got: args.len(),
                },
            })
        }
    };
    match fname {
        // Input sugar, normalized away immediately.
        "-" => {
            arity_check(2, &args)?;
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            let neg_b = Expr::Func(Func::Mul, vec![Expr::Number(-1.0), b]);
            Ok(Expr::Func(Func::Add, vec![a, neg_b]))
        }
        "/" => {
            arity_check(2, &args)?;
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            let inv_b = Expr::Func(Func::Pow, vec![b, Expr::Number(-1.0)]);
            Ok(Expr::Func(Func::Mul, vec![a, inv_b]))
        }
        _ => match Func::from_name(fname) {
            Some(Func::Eq) if !at_root => {
                Err(ParseError { pos, kind: ParseErrorKind::EqualityNotAtRoot })
            }
            Some(f) => {
                arity_check(f.arity(), &args)?;
                Ok(Expr::Func(f, args))
            }
            None => Err(ParseError { pos, kind: ParseErrorKind::UnknownFunction(fname.to_string()) }),
        },
    }
}

/// Parse one expression. `=` is permitted only as the outermost function.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let len = text.len();
    let mut p = Parser { tokens, pos: 0, len };
    let e = p.parse_expr(true)?;
    if p.pos != p.tokens.len() {
        let pos = match &p.tokens[p.pos] {
            Token::LParen(i) | Token::RParen(i) | Token::Atom(i, _) => *i,
        };
        return Err(ParseError { pos, kind: ParseErrorKind::TrailingInput });
    }
    Ok(e)
}

/// Parse a side expression: like [`parse_expr`] but `=` is rejected everywhere.
pub fn parse_side(text: &str) -> Result<Expr, ParseError> {
    let e = parse_expr(text)?;
    if matches!(e, Expr::Func(Func::Eq, _)) {
        return Err(ParseError { pos: 0, kind: ParseErrorKind::EqualityNotAtRoot });
    }
    Ok(e)
}

// ───────────────────────── equations ─────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Incorrect,
    Correct,
}

impl Label {
    pub fn as_int(self) -> u8 {
        match self {
            Label::Incorrect => 0,
            Label::Correct => 1,
        }
    }

    pub fn from_int(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Incorrect),
            1 => Some(Label::Correct),
            _ => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_int() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
    pub label: Label,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr, label: Label) -> Equation {
        Equation { lhs, rhs, label }
    }

    /// Depth of the equality-rooted tree: 1 + max over sides.
    pub fn depth(&self) -> u32 {
        1 + self.lhs.depth().max(self.rhs.depth())
    }

    /// Canonical `(= lhs rhs)` rendering.
    pub fn text(&self) -> String {
        format!("(= {} {})", self.lhs, self.rhs)
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut s = self.lhs.free_symbols();
        s.extend(self.rhs.free_symbols());
        s
    }

    /// Parse `(= lhs rhs)` with an explicit label.
    pub fn parse(text: &str, label: Label) -> Result<Equation, ParseError> {
        match parse_expr(text)? {
            Expr::Func(Func::Eq, mut args) => {
                let rhs = args.pop().unwrap();
                let lhs = args.pop().unwrap();
                Ok(Equation { lhs, rhs, label })
            }
            _ => Err(ParseError { pos: 0, kind: ParseErrorKind::UnexpectedToken("expected (= ...)".into()) }),
        }
    }
}

// ───────────────────────── JSONL records ─────────────────────────

/// On-disk record: one equation per line, sides as prefix strings.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EquationRecord {
    pub lhs: String,
    pub rhs: String,
    pub label: u8,
    pub depth: u32,
}

#[derive(Debug)]
pub enum CorpusError {
    Io(std::io::Error),
    Json { line: usize, err: serde_json::Error },
    Parse { line: usize, err: ParseError },
    BadLabel { line: usize, label: u8 },
    DepthMismatch { line: usize, recorded: u32, actual: u32 },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Io(e) => write!(f, "corpus io error: {e}"),
            CorpusError::Json { line, err } => write!(f, "line {line}: bad json: {err}"),
            CorpusError::Parse { line, err } => write!(f, "line {line}: {err}"),
            CorpusError::BadLabel { line, label } => write!(f, "line {line}: label must be 0 or 1, got {label}"),
            CorpusError::DepthMismatch { line, recorded, actual } => {
                write!(f, "line {line}: recorded depth {recorded} but tree has depth {actual}")
            }
        }
    }
}

impl std::error::Error for CorpusError {}

impl From<std::io::Error> for CorpusError {
    fn from(e: std::io::Error) -> Self {
        CorpusError::Io(e)
    }
}

impl Equation {
    pub fn to_record(&self) -> EquationRecord {
        EquationRecord {
            lhs: self.lhs.to_string(),
            rhs: self.rhs.to_string(),
            label: self.label.as_int(),
            depth: self.depth(),
        }
    }

    pub fn from_record(rec: &EquationRecord, line: usize) -> Result<Equation, CorpusError> {
        let lhs = parse_side(&rec.lhs).map_err(|err| CorpusError::Parse { line, err })?;
        let rhs = parse_side(&rec.rhs).map_err(|err| CorpusError::Parse { line, err })?;
        let label = Label::from_int(rec.label)
            .ok_or(CorpusError::BadLabel { line, label: rec.label })?;
        let eq = Equation { lhs, rhs, label };
        if eq.depth() != rec.depth {
            return Err(CorpusError::DepthMismatch {
                line,
                recorded: rec.depth,
                actual: eq.depth(),
            });
        }
        Ok(eq)
    }
}

/// Read a JSONL equation file, validating labels and recorded depths.
pub fn read_equations(path: &std::path::Path) -> Result<Vec<Equation>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EquationRecord =
            serde_json::from_str(line).map_err(|err| CorpusError::Json { line: i + 1, err })?;
        out.push(Equation::from_record(&rec, i + 1)?);
    }
    Ok(out)
}

/// Write equations as JSONL (one compact record per line, field order fixed).
pub fn write_equations(path: &std::path::Path, eqs: &[Equation]) -> Result<(), CorpusError> {
    use std::io::Write as _;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for eq in eqs {
        let line = serde_json::to_string(&eq.to_record()).expect("record serializes");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
