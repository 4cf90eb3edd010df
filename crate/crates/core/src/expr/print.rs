//! Pretty-printer. Output re-parses to the same tree.

use std::fmt::{self, Write};

use super::{CaseKey, Expr, UnOp};

const COND: u8 = 0;
const UNARY: u8 = 6;
const ATOM: u8 = 7;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::If(..) | Expr::Case { .. } => COND,
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Unary(..) => UNARY,
        Expr::Num(_) | Expr::Str(_) | Expr::Var(_) => ATOM,
    }
}

fn quote(s: &str, f: &mut impl Write) -> fmt::Result {
    f.write_char('\'')?;
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('\'')
}

/// Writes `e`, parenthesised unless it binds at least as tightly as `min`.
fn write_at(e: &Expr, min: u8, f: &mut impl Write) -> fmt::Result {
    if precedence(e) < min {
        f.write_char('(')?;
        write_expr(e, f)?;
        f.write_char(')')
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut impl Write) -> fmt::Result {
    match e {
        Expr::Num(n) => write!(f, "{n}"),
        Expr::Str(s) => quote(s, f),
        Expr::Var(v) => f.write_str(v),
        Expr::Unary(op, x) => {
            f.write_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "not ",
            })?;
            write_at(x, UNARY, f)
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write_at(a, p + u8::from(p == 3), f)?;
            write!(f, " {} ", op.symbol())?;
            write_at(b, p + 1, f)
        }
        Expr::If(c, a, b) => {
            f.write_str("if ")?;
            write_expr(c, f)?;
            f.write_str(" then ")?;
            write_expr(a, f)?;
            f.write_str(" else ")?;
            write_expr(b, f)
        }
        Expr::Case {
            subject,
            arms,
            default,
        } => {
            write!(f, "case {subject} of ")?;
            for (k, body) in arms {
                match k {
                    CaseKey::Num(n) => write!(f, "{n}")?,
                    CaseKey::Sym(s) => quote(s, f)?,
                }
                f.write_str(" -> ")?;
                write_at(body, 1, f)?;
                f.write_str("; ")?;
            }
            f.write_str("default -> ")?;
            write_at(default, 1, f)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}
