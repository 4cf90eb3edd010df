//! Expression language for structural equations, model files and cost
//! functions.
//!
//! ```text
//! expr  := cond
//! cond  := "if" expr "then" expr "else" expr | case | or
//! case  := "case" ident "of" (value "->" expr ";")+ "default" "->" expr
//! or    := and ("or" and)*
//! and   := cmp ("and" cmp)*
//! cmp   := add (relop add)?
//! add   := mul (("+"|"-") mul)*
//! mul   := unary (("*"|"/") unary)*
//! unary := "not" unary | "-" unary | atom
//! atom  := number | ident | string | "(" expr ")"
//! ```

mod eval;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use eval::Env;
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },

    #[error("unbound identifier `{0}`")]
    Unbound(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("type error: {0}")]
    Type(String),

    #[error("no case arm matches `{0}`")]
    NoMatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

/// Key of a `case` arm.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseKey {
    Num(f64),
    Sym(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Str(String),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Case {
        subject: String,
        arms: Vec<(CaseKey, Expr)>,
        default: Box<Expr>,
    },
}

impl Expr {
    /// Identifiers referenced anywhere in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Str(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::If(c, a, b) => {
                c.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Case {
                subject,
                arms,
                default,
            } => {
                out.insert(subject.clone());
                for (_, e) in arms {
                    e.collect_vars(out);
                }
                default.collect_vars(out);
            }
        }
    }

    /// Checks that every identifier is among `names`.
    pub fn check_bound<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<(), ExprError> {
        let allowed: BTreeSet<&str> = names.into_iter().collect();
        match self.free_vars().into_iter().find(|v| !allowed.contains(v.as_str())) {
            Some(v) => Err(ExprError::Unbound(v)),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, env: &Env) -> Result<Value, ExprError> {
        eval::evaluate(self, &|name| env.get(name).cloned())
    }

    /// Evaluates with a caller-supplied lookup.
    pub fn evaluate_with(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value, ExprError> {
        eval::evaluate(self, lookup)
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Runtime value. Symbols carry the domain order of their variable when it
/// is ordered, so `'low' < savings` compares positions in that order.
#[derive(Debug, Clone)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Sym {
        label: String,
        order: Option<Arc<[String]>>,
    },
}

impl Value {
    pub fn sym(label: impl Into<String>) -> Value {
        Value::Sym {
            label: label.into(),
            order: None,
        }
    }

    pub fn ordered_sym(label: impl Into<String>, order: Arc<[String]>) -> Value {
        Value::Sym {
            label: label.into(),
            order: Some(order),
        }
    }

    /// Numeric view: booleans become 1/0, symbols whose label parses as a
    /// number become that number.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            Value::Sym { label, .. } => label.trim().parse::<f64>().ok(),
        }
    }

    pub fn truthy(&self) -> Result<bool, ExprError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => other
                .as_number()
                .map(|n| n != 0.0)
                .ok_or_else(|| ExprError::Type(format!("`{other}` is not a condition"))),
        }
    }

    /// Index of this value in `domain`: exact label match first, then
    /// numeric equality.
    pub fn position_in(&self, domain: &[String]) -> Option<usize> {
        if let Value::Sym { label, .. } = self {
            if let Some(i) = domain.iter().position(|d| d == label) {
                return Some(i);
            }
        }
        if let Value::Bool(b) = self {
            let word = if *b { "true" } else { "false" };
            if let Some(i) = domain.iter().position(|d| d == word) {
                return Some(i);
            }
        }
        let n = self.as_number()?;
        domain
            .iter()
            .position(|d| d.trim().parse::<f64>().is_ok_and(|x| (x - n).abs() <= 1e-9))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        eval::values_equal(self, other)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Sym { label, .. } => f.write_str(label),
        }
    }
}

/// Parsed expression paired with its source text, as stored in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceExpr {
    pub source: String,
    pub expr: Expr,
}

impl SourceExpr {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        Ok(SourceExpr {
            source: source.to_string(),
            expr: parse(source)?,
        })
    }
}

impl serde::Serialize for SourceExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> serde::Deserialize<'de> for SourceExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let source = String::deserialize(d)?;
        SourceExpr::parse(&source).map_err(serde::de::Error::custom)
    }
}

/// Convenience for building environments in tests and callers.
pub fn env<I, K>(pairs: I) -> Env
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    pairs
        .into_iter()
        .map(|(k, v)| (k.into(), v))
        .collect::<BTreeMap<_, _>>()
        .into()
}
