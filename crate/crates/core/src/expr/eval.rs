use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{BinOp, CaseKey, Expr, ExprError, UnOp, Value};

/// Variable bindings for [`Expr::evaluate`].
#[derive(Debug, Clone, Default)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }
}

impl From<BTreeMap<String, Value>> for Env {
    fn from(map: BTreeMap<String, Value>) -> Self {
        Env(map)
    }
}

fn rank(v: &Value, order: &[String]) -> Option<usize> {
    match v {
        Value::Sym { label, .. } => order.iter().position(|d| d == label),
        _ => None,
    }
}

fn order_of(v: &Value) -> Option<&[String]> {
    match v {
        Value::Sym { order: Some(o), .. } => Some(o),
        _ => None,
    }
}

/// Orders two values: by declared domain order when one side is an ordered
/// symbol and the other names a value of that domain, otherwise numerically.
fn compare(a: &Value, b: &Value) -> Option<Ordering> {
    for order in [order_of(a), order_of(b)].into_iter().flatten() {
        if let (Some(x), Some(y)) = (rank(a, order), rank(b, order)) {
            return Some(x.cmp(&y));
        }
    }
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => x.partial_cmp(&y),
        _ => None,
    }
}

pub(super) fn values_equal(a: &Value, b: &Value) -> bool {
    if let (Value::Sym { label: x, .. }, Value::Sym { label: y, .. }) = (a, b) {
        if x == y {
            return true;
        }
    }
    compare(a, b) == Some(Ordering::Equal)
}

fn number(v: &Value) -> Result<f64, ExprError> {
    v.as_number()
        .ok_or_else(|| ExprError::Type(format!("`{v}` is not a number")))
}

fn key_matches(key: &CaseKey, v: &Value) -> bool {
    match key {
        CaseKey::Num(n) => v.as_number() == Some(*n),
        CaseKey::Sym(s) => values_equal(v, &Value::sym(s.clone())),
    }
}

pub(super) fn evaluate(
    e: &Expr,
    lookup: &dyn Fn(&str) -> Option<Value>,
) -> Result<Value, ExprError> {
    let var = |name: &str| lookup(name).ok_or_else(|| ExprError::Unbound(name.to_string()));
    Ok(match e {
        Expr::Num(n) => Value::Num(*n),
        Expr::Str(s) => Value::sym(s.clone()),
        Expr::Var(v) => var(v)?,
        Expr::Unary(UnOp::Neg, x) => Value::Num(-number(&evaluate(x, lookup)?)?),
        Expr::Unary(UnOp::Not, x) => Value::Bool(!evaluate(x, lookup)?.truthy()?),
        Expr::Binary(op, x, y) => {
            let a = evaluate(x, lookup)?;
            let b = evaluate(y, lookup)?;
            match op {
                BinOp::Add => Value::Num(number(&a)? + number(&b)?),
                BinOp::Sub => Value::Num(number(&a)? - number(&b)?),
                BinOp::Mul => Value::Num(number(&a)? * number(&b)?),
                BinOp::Div => {
                    let d = number(&b)?;
                    if d == 0.0 {
                        return Err(ExprError::DivisionByZero);
                    }
                    Value::Num(number(&a)? / d)
                }
                BinOp::And => Value::Bool(a.truthy()? & b.truthy()?),
                BinOp::Or => Value::Bool(a.truthy()? | b.truthy()?),
                BinOp::Eq => Value::Bool(values_equal(&a, &b)),
                BinOp::Ne => Value::Bool(!values_equal(&a, &b)),
                BinOp::Lt | BinOp::Le | BinOp::Ge | BinOp::Gt => {
                    let ord = compare(&a, &b).ok_or_else(|| {
                        ExprError::Type(format!("cannot order `{a}` and `{b}`"))
                    })?;
                    Value::Bool(match op {
                        BinOp::Lt => ord.is_lt(),
                        BinOp::Le => ord.is_le(),
                        BinOp::Ge => ord.is_ge(),
                        _ => ord.is_gt(),
                    })
                }
            }
        }
        Expr::If(c, a, b) => {
            if evaluate(c, lookup)?.truthy()? {
                evaluate(a, lookup)?
            } else {
                evaluate(b, lookup)?
            }
        }
        Expr::Case {
            subject,
            arms,
            default,
        } => {
            let v = var(subject)?;
            match arms.iter().find(|(k, _)| key_matches(k, &v)) {
                Some((_, body)) => evaluate(body, lookup)?,
                None => evaluate(default, lookup)?,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::{env, parse};
    use super::*;

    fn eval(src: &str, env: &Env) -> Result<Value, ExprError> {
        parse(src).unwrap().evaluate(env)
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval("2*3+1", &Env::new()).unwrap().as_number(), Some(7.0));
        assert_eq!(eval("7 - 2 - 1", &Env::new()).unwrap().as_number(), Some(4.0));
        assert_eq!(eval("-2 * -3", &Env::new()).unwrap().as_number(), Some(6.0));
    }

    #[test]
    fn conditional_returns_symbol() {
        let e = env([("x", Value::Num(-1.0))]);
        let v = eval("if x > 0 then 'yes' else 'no'", &e).unwrap();
        assert_eq!(v, Value::sym("no"));
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(eval("1/0", &Env::new()), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn unbound_identifier() {
        assert_eq!(
            eval("y + 1", &Env::new()),
            Err(ExprError::Unbound("y".into()))
        );
    }

    #[test]
    fn booleans_coerce() {
        let e = env([("a", Value::Bool(true)), ("b", Value::Bool(false))]);
        assert_eq!(eval("a + a + b", &e).unwrap().as_number(), Some(2.0));
        assert_eq!(eval("(1 < 2) * 5", &Env::new()).unwrap().as_number(), Some(5.0));
    }

    #[test]
    fn ordered_symbols_compare_by_domain() {
        let order: Arc<[String]> = vec!["low".to_string(), "mid".into(), "high".into()].into();
        let e = env([("s", Value::ordered_sym("mid", order))]);
        assert!(eval("s > 'low'", &e).unwrap().truthy().unwrap());
        assert!(eval("'high' > s", &e).unwrap().truthy().unwrap());
        assert!(eval("s == 'mid'", &e).unwrap().truthy().unwrap());
        assert!(eval("s < 'zzz'", &e).is_err());
    }

    #[test]
    fn numeric_labels_act_as_numbers() {
        let e = env([("savings", Value::sym("2"))]);
        assert!(eval("savings >= 2", &e).unwrap().truthy().unwrap());
        assert_eq!(eval("savings * 2", &e).unwrap().as_number(), Some(4.0));
    }

    #[test]
    fn unordered_symbols_only_test_equality() {
        let e = env([("c", Value::sym("red"))]);
        assert!(eval("c == 'red'", &e).unwrap().truthy().unwrap());
        assert!(eval("c != 'blue'", &e).unwrap().truthy().unwrap());
        assert!(eval("c < 'blue'", &e).is_err());
        assert!(eval("c + 1", &e).is_err());
    }

    #[test]
    fn case_lookup() {
        let src = "case status of 'low' -> 0; 'mid' -> 5; default -> 9";
        for (s, want) in [("low", 0.0), ("mid", 5.0), ("high", 9.0)] {
            let e = env([("status", Value::sym(s))]);
            assert_eq!(eval(src, &e).unwrap().as_number(), Some(want));
        }
        let e = env([("n", Value::sym("3"))]);
        assert_eq!(
            eval("case n of 3 -> 1; default -> 0", &e).unwrap().as_number(),
            Some(1.0)
        );
    }

    #[test]
    fn strict_logic_evaluates_both_sides() {
        assert_eq!(
            eval("0 > 1 and 1/0 > 0", &Env::new()),
            Err(ExprError::DivisionByZero)
        );
    }

    #[test]
    fn position_in_domain() {
        let dom = vec!["0".to_string(), "1".into(), "2".into()];
        assert_eq!(Value::Num(2.0).position_in(&dom), Some(2));
        assert_eq!(Value::Bool(true).position_in(&dom), Some(1));
        assert_eq!(Value::sym("1").position_in(&dom), Some(1));
        assert_eq!(Value::Num(5.0).position_in(&dom), None);
    }
}
