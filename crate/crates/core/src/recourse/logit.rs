use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blackbox::OutcomeSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-8;
/// Ridge strength per unit of total weight. The intercept is not penalized.
pub const RIDGE: f64 = 1e-6;

/// One-hot coefficients of a variable; the first domain value is the
/// reference and has coefficient 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitTerm {
    pub variable: String,
    pub domain: Vec<String>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub intercept: f64,
    pub terms: Vec<LogitTerm>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl LogitModel {
    pub fn term(&self, variable: &str) -> Option<&LogitTerm> {
        self.terms.iter().find(|t| t.variable == variable)
    }

    /// Coefficient of `variable = label` (0 for the reference value).
    pub fn coefficient(&self, variable: &str, label: &str) -> Result<f64> {
        let t = self
            .term(variable)
            .ok_or_else(|| Error::UnknownVariable(variable.to_string()))?;
        let i = t
            .domain
            .iter()
            .position(|d| d == label)
            .ok_or_else(|| Error::UnknownValue {
                variable: variable.to_string(),
                value: label.to_string(),
            })?;
        Ok(t.coefficients[i])
    }

    /// Linear score of an assignment covering every term.
    pub fn score(&self, assignment: &BTreeMap<String, String>) -> Result<f64> {
        let mut s = self.intercept;
        for t in &self.terms {
            let label = assignment
                .get(&t.variable)
                .ok_or_else(|| Error::Query(format!("assignment has no value for `{}`", t.variable)))?;
            s += self.coefficient(&t.variable, label)?;
        }
        Ok(s)
    }

    pub fn probability(&self, assignment: &BTreeMap<String, String>) -> Result<f64> {
        Ok(sigmoid(self.score(assignment)?))
    }
}

/// Maximum-likelihood logistic regression of `O ∈ O^≥` on one-hot
/// indicators of `variables`, by iteratively reweighted least squares with
/// a step-halving safeguard.
pub fn fit_logit<S: Scalar>(
    labeled: &Dataset<S>,
    outcome: &OutcomeSpec,
    variables: &[String],
) -> Result<LogitModel> {
    let schema = labeled.schema();
    let o = schema.id(outcome.name())?;
    let ids: Vec<usize> = variables.iter().map(|v| schema.id(v)).collect::<Result<_>>()?;
    let positive: Vec<bool> = (0..schema.var(o).len())
        .map(|c| outcome.is_positive_code(outcome.variable().code(schema.var(o).label(c)).unwrap_or(0)))
        .collect();

    // Aggregate identical design rows.
    let mut cells: BTreeMap<Vec<u32>, (f64, f64)> = BTreeMap::new();
    for (row, w) in labeled.rows() {
        let w = w.to_f64();
        if w == 0.0 {
            continue;
        }
        let key: Vec<u32> = ids.iter().map(|&i| row[i]).collect();
        let e = cells.entry(key).or_insert((0.0, 0.0));
        e.0 += w;
        if positive[row[o] as usize] {
            e.1 += w;
        }
    }
    let total: f64 = cells.values().map(|c| c.0).sum();
    let pos: f64 = cells.values().map(|c| c.1).sum();
    if pos <= 0.0 || pos >= total {
        return Err(Error::Degenerate(format!(
            "outcome `{}` takes a single class in the data",
            outcome.name()
        )));
    }

    let sizes: Vec<usize> = ids.iter().map(|&i| schema.var(i).len()).collect();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut p = 1;
    for s in &sizes {
        offsets.push(p);
        p += s - 1;
    }
    let rows: Vec<(&Vec<u32>, f64, f64)> = cells.iter().map(|(k, (w, y))| (k, *w, *y)).collect();
    let active = |key: &[u32]| -> Vec<usize> {
        key.iter()
            .zip(&offsets)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &off)| off + c as usize - 1)
            .collect()
    };
    let designs: Vec<Vec<usize>> = rows.iter().map(|(k, _, _)| active(k)).collect();
    let ridge = RIDGE * total;
    let linear = |beta: &DVector<f64>, cols: &[usize]| beta[0] + cols.iter().map(|&j| beta[j]).sum::<f64>();
    let objective = |beta: &DVector<f64>| -> f64 {
        let mut ll = 0.0;
        for ((_, w, y), cols) in rows.iter().zip(&designs) {
            let s = linear(beta, cols);
            // log σ(s) and log(1 − σ(s)) computed stably.
            let log1pexp = |t: f64| if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            ll += y * -log1pexp(-s) + (w - y) * -log1pexp(s);
        }
        let pen: f64 = beta.iter().skip(1).map(|b| b * b).sum();
        ll - 0.5 * ridge * pen
    };

    let mut beta = DVector::<f64>::zeros(p);
    beta[0] = logit(pos / total);
    let mut current = objective(&beta);
    let mut gradient_norm = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let mut h = DMatrix::<f64>::zeros(p, p);
        let mut g = DVector::<f64>::zeros(p);
        for ((_, w, y), cols) in rows.iter().zip(&designs) {
            let mu = sigmoid(linear(&beta, cols));
            let r = y - w * mu;
            let v = w * mu * (1.0 - mu);
            g[0] += r;
            h[(0, 0)] += v;
            for &a in cols {
                g[a] += r;
                h[(0, a)] += v;
                h[(a, 0)] += v;
                for &b in cols {
                    h[(a, b)] += v;
                }
            }
        }
        for j in 1..p {
            g[j] -= ridge * beta[j];
            h[(j, j)] += ridge;
        }
        gradient_norm = g.norm();
        let step = h
            .cholesky()
            .ok_or(Error::NonConvergence {
                iterations: iteration,
                gradient_norm,
            })?
            .solve(&g);
        let mut t = 1.0;
        let mut next = &beta + &step * t;
        let mut value = objective(&next);
        while value < current && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
            value = objective(&next);
        }
        let change = (&next - &beta).amax();
        beta = next;
        current = value.max(current);
        if change < TOLERANCE {
            return Ok(model(&beta, schema, &ids, &offsets, iteration, gradient_norm));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        gradient_norm,
    })
}

fn model(
    beta: &DVector<f64>,
    schema: &crate::schema::Schema,
    ids: &[usize],
    offsets: &[usize],
    iterations: usize,
    gradient_norm: f64,
) -> LogitModel {
    let terms = ids
        .iter()
        .zip(offsets)
        .map(|(&id, &off)| {
            let var = schema.var(id);
            let mut coefficients = vec![0.0];
            coefficients.extend((1..var.len()).map(|c| beta[off + c - 1]));
            LogitTerm {
                variable: var.name().to_string(),
                domain: var.domain().to_vec(),
                coefficients,
            }
        })
        .collect();
    LogitModel {
        intercept: beta[0],
        terms,
        iterations,
        gradient_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Schema, Variable};

    fn data(rows: &[(&str, &str, f64)]) -> (Dataset, OutcomeSpec) {
        let schema = Schema::new(vec![
            Variable::new("x", ["0", "1"], true).unwrap(),
            Variable::new("o", ["0", "1"], true).unwrap(),
        ])
        .unwrap();
        let d = Dataset::from_labels(
            schema.clone(),
            rows.iter().map(|r| vec![r.0, r.1]).collect::<Vec<_>>(),
            Some(rows.iter().map(|r| r.2).collect()),
        )
        .unwrap();
        let o = OutcomeSpec::new(schema.get("o").unwrap().clone(), None, "1").unwrap();
        (d, o)
    }

    #[test]
    fn balanced_independent_outcome() {
        let (d, o) = data(&[("0", "0", 1.0), ("0", "1", 1.0), ("1", "0", 1.0), ("1", "1", 1.0)]);
        let m = fit_logit(&d, &o, &["x".into()]).unwrap();
        assert!(m.intercept.abs() < 1e-6);
        assert!(m.terms[0].coefficients[1].abs() < 1e-6);
    }

    #[test]
    fn saturated_binary_feature() {
        let (d, o) = data(&[("0", "0", 0.8), ("0", "1", 0.2), ("1", "0", 0.2), ("1", "1", 0.8)]);
        let m = fit_logit(&d, &o, &["x".into()]).unwrap();
        let expected = logit(0.8) - logit(0.2);
        assert!((m.terms[0].coefficients[1] - expected).abs() < 1e-3);
        assert!((expected - 2.7726).abs() < 1e-4);
    }

    #[test]
    fn single_class_is_rejected() {
        let (d, o) = data(&[("0", "1", 1.0), ("1", "1", 1.0)]);
        assert!(matches!(fit_logit(&d, &o, &["x".into()]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn separable_data_converges_under_ridge() {
        let (d, o) = data(&[("0", "0", 1.0), ("1", "1", 1.0)]);
        let m = fit_logit(&d, &o, &["x".into()]).unwrap();
        assert!(m.terms[0].coefficients[1] > 10.0);
    }
}
