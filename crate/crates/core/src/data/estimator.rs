use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, EventSpec};
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::scalar::Scalar;
use crate::schema::{Schema, VarId};

/// What to do with an adjustment cell whose treatment slice has no mass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMassPolicy {
    #[default]
    Error,
    /// Drop the cell and renormalize the remaining adjustment weights.
    SkipAndRenormalize,
}

/// Largest adjustment domain enumerated when smoothing is on.
pub const MAX_SMOOTHED_CELLS: usize = 1 << 20;

/// Weighted counting estimator with optional additive smoothing.
#[derive(Debug)]
pub struct Estimator<'a, S = f64> {
    data: &'a Dataset<S>,
    lambda: S,
    policy: ZeroMassPolicy,
    skipped: AtomicUsize,
}

/// Per-variable `(allowed ∩ given, given)` sizes behind the smoothing
/// formula: `(mass(E ∧ G) + λ·m) / (mass(G) + λ·K)`.
fn cell_counts(schema: &Schema, event: &EventSpec, given: &EventSpec) -> Result<(usize, usize)> {
    let (mut m, mut k) = (1usize, 1usize);
    for (name, allowed) in event.iter() {
        let var = schema.get(name)?;
        let admissible: Vec<&String> = match given.get(name) {
            Some(g) => var.domain().iter().filter(|d| g.contains(*d)).collect(),
            None => var.domain().iter().collect(),
        };
        k = k.saturating_mul(admissible.len());
        m = m.saturating_mul(admissible.iter().filter(|d| allowed.contains(**d)).count());
    }
    Ok((m, k))
}

impl<'a, S: Scalar> Estimator<'a, S> {
    pub fn new(data: &'a Dataset<S>) -> Self {
        Estimator {
            data,
            lambda: S::zero(),
            policy: ZeroMassPolicy::Error,
            skipped: AtomicUsize::new(0),
        }
    }

    pub fn with_smoothing(mut self, lambda: S) -> Result<Self> {
        if lambda.is_negative() {
            return Err(Error::Query("smoothing must be non-negative".into()));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: ZeroMassPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn dataset(&self) -> &Dataset<S> {
        self.data
    }

    pub fn schema(&self) -> &Schema {
        self.data.schema()
    }

    pub fn smoothing(&self) -> &S {
        &self.lambda
    }

    pub fn policy(&self) -> ZeroMassPolicy {
        self.policy
    }

    /// Adjustment cells dropped so far under the skip policy.
    pub fn skipped_cells(&self) -> usize {
        self.skipped.load(Ordering::Relaxed)
    }

    /// Unconditional mass of `event` (sum of matching weights).
    pub fn mass(&self, event: &EventSpec) -> Result<S> {
        Ok(self.data.mass(&event.compile(self.schema())?))
    }

    /// Smoothed conditional probability of `event` given `given`.
    pub fn prob(&self, event: &EventSpec, given: &EventSpec) -> Result<S> {
        let schema = self.schema();
        let joint = event.and(given).compile(schema)?;
        let cond = given.compile(schema)?;
        let (mut num, mut den) = (S::zero(), S::zero());
        for (row, w) in self.data.rows() {
            if cond.matches(row) {
                den = den + w.clone();
                if joint.matches(row) {
                    num = num + w.clone();
                }
            }
        }
        if self.lambda.is_zero() {
            if den.is_zero() {
                return Err(Error::ConditioningOnNull {
                    event: given.to_string(),
                });
            }
            return Ok(num / den);
        }
        let (m, k) = cell_counts(schema, event, given)?;
        let l = self.lambda.clone();
        let den = den + l.clone() * S::from_usize(k);
        if den.is_zero() {
            return Err(Error::ConditioningOnNull {
                event: given.to_string(),
            });
        }
        Ok((num + l * S::from_usize(m)) / den)
    }

    /// `Σ_c Pr(outcome | c, treatment, context) · Pr(c | weight_given)` over
    /// the cells `c` of `adj`. With `weight_given = context` this is the
    /// backdoor adjustment formula.
    pub fn adjusted_prob(
        &self,
        outcome: &EventSpec,
        treatment: &EventSpec,
        adj: &[String],
        weight_given: &EventSpec,
        context: &EventSpec,
    ) -> Result<S> {
        let schema = self.schema();
        let cond = treatment.and(context);
        if adj.is_empty() {
            return self.prob(outcome, &cond);
        }
        for a in adj {
            for (what, ev) in [
                ("outcome", outcome),
                ("treatment", treatment),
                ("context", context),
                ("weighting event", weight_given),
            ] {
                if ev.contains_var(a) {
                    return Err(Error::NotDisjoint(format!(
                        "adjustment variable `{a}` also appears in the {what}"
                    )));
                }
            }
        }
        let ids: Vec<VarId> = adj.iter().map(|a| schema.id(a)).collect::<Result<_>>()?;
        let key = |row: &[u32]| ids.iter().map(|&i| row[i]).collect::<Vec<u32>>();

        let cond_c = cond.compile(schema)?;
        let joint_c = outcome.and(&cond).compile(schema)?;
        let weight_c = weight_given.compile(schema)?;
        // cell -> (mass(t, k, c), mass(o, t, k, c), mass(c, weight_given))
        let mut cells: BTreeMap<Vec<u32>, (S, S, S)> = BTreeMap::new();
        let mut total_w = S::zero();
        let zero = || (S::zero(), S::zero(), S::zero());
        for (row, w) in self.data.rows() {
            let in_cond = cond_c.matches(row);
            let in_weight = weight_c.matches(row);
            if !in_cond && !in_weight {
                continue;
            }
            let entry = cells.entry(key(row)).or_insert_with(zero);
            if in_cond {
                entry.0 = entry.0.clone() + w.clone();
                if joint_c.matches(row) {
                    entry.1 = entry.1.clone() + w.clone();
                }
            }
            if in_weight {
                entry.2 = entry.2.clone() + w.clone();
                total_w = total_w + w.clone();
            }
        }

        if self.lambda.is_zero() {
            if total_w.is_zero() {
                return Err(Error::ConditioningOnNull {
                    event: weight_given.to_string(),
                });
            }
            let mut acc = S::zero();
            let mut kept = S::zero();
            for (c, (t, ot, wc)) in &cells {
                if wc.is_zero() {
                    continue;
                }
                if t.is_zero() {
                    match self.policy {
                        ZeroMassPolicy::Error => {
                            return Err(Error::ConditioningOnNull {
                                event: self.cell_event(adj, &ids, c).and(&cond).to_string(),
                            })
                        }
                        ZeroMassPolicy::SkipAndRenormalize => {
                            self.skipped.fetch_add(1, Ordering::Relaxed);
                            continue;
                        }
                    }
                }
                acc = acc + ot.clone() / t.clone() * wc.clone();
                kept = kept + wc.clone();
            }
            if kept.is_zero() {
                return Err(Error::ConditioningOnNull {
                    event: cond.to_string(),
                });
            }
            return Ok(acc / kept);
        }

        let sizes: Vec<usize> = ids.iter().map(|&i| schema.var(i).len()).collect();
        let n_cells = sizes
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .filter(|&n| n <= MAX_SMOOTHED_CELLS)
            .ok_or_else(|| {
                Error::Limit(format!(
                    "adjustment domain exceeds {MAX_SMOOTHED_CELLS} cells under smoothing"
                ))
            })?;
        let (m, k) = cell_counts(schema, outcome, &cond)?;
        let l = self.lambda.clone();
        let lm = l.clone() * S::from_usize(m);
        let lk = l.clone() * S::from_usize(k);
        let w_den = total_w + l.clone() * S::from_usize(n_cells);
        let mut acc = S::zero();
        let mut c = vec![0u32; ids.len()];
        loop {
            let (t, ot, wc) = cells.get(&c).cloned().unwrap_or_else(zero);
            let p = (ot + lm.clone()) / (t + lk.clone());
            acc = acc + p * ((wc + l.clone()) / w_den.clone());
            // Odometer over the adjustment domain, last variable fastest.
            let mut i = ids.len();
            loop {
                if i == 0 {
                    return Ok(acc);
                }
                i -= 1;
                c[i] += 1;
                if (c[i] as usize) < sizes[i] {
                    break;
                }
                c[i] = 0;
            }
        }
    }

    fn cell_event(&self, adj: &[String], ids: &[VarId], codes: &[u32]) -> EventSpec {
        adj.iter().zip(ids).zip(codes).fold(EventSpec::new(), |ev, ((name, &id), &c)| {
            ev.with(name.clone(), self.schema().var(id).label(c as usize))
        })
    }

    /// Interventional probability `Pr(outcome | do(treatment), context)` via
    /// backdoor adjustment over `adj`, after checking that `adj ∪ context`
    /// is admissible in `graph`.
    pub fn do_prob(
        &self,
        graph: &CausalGraph,
        outcome: &EventSpec,
        treatment: &EventSpec,
        context: &EventSpec,
        adj: &[String],
    ) -> Result<S> {
        check_identified(graph, outcome, treatment, context, adj)?;
        self.adjusted_prob(outcome, treatment, adj, context, context)
    }
}

/// Verifies that `context` contains no descendant of the treatment and
/// that `adj ∪ context` blocks every backdoor path.
pub fn check_identified(
    graph: &CausalGraph,
    outcome: &EventSpec,
    treatment: &EventSpec,
    context: &EventSpec,
    adj: &[String],
) -> Result<()> {
    let t: Vec<&str> = treatment.vars().collect();
    let o: Vec<&str> = outcome.vars().collect();
    let desc = graph.descendants(t.iter().copied())?;
    if let Some(v) = context.vars().find(|v| desc.contains(*v) && !t.contains(v)) {
        return Err(Error::NotIdentifiable {
            reason: format!("context variable `{v}` is a descendant of the treatment"),
            path: vec![v.to_string()],
        });
    }
    let mut z: Vec<&str> = adj.iter().map(String::as_str).collect();
    z.extend(context.vars().filter(|v| !adj.iter().any(|a| a == v)));
    if let Some((reason, path)) = graph.backdoor_violation(t, o, z)? {
        return Err(Error::NotIdentifiable { reason, path });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::schema::Variable;

    fn small() -> Dataset {
        let schema = Schema::new(vec![
            Variable::new("x", ["0", "1", "2"], false).unwrap(),
            Variable::new("o", ["0", "1"], false).unwrap(),
        ])
        .unwrap();
        Dataset::from_labels(
            schema,
            vec![vec!["1", "1"], vec!["1", "0"], vec!["0", "0"]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn direct_count() {
        let d = small();
        let est = Estimator::new(&d);
        let p = est
            .prob(&EventSpec::new().with("o", "1"), &EventSpec::new().with("x", "1"))
            .unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn null_conditioning() {
        let d = small();
        let err = Estimator::new(&d)
            .prob(&EventSpec::new().with("o", "1"), &EventSpec::new().with("x", "2"))
            .unwrap_err();
        assert!(matches!(err, Error::ConditioningOnNull { .. }));
    }

    #[test]
    fn smoothing_formula() {
        let d = small();
        let est = Estimator::new(&d).with_smoothing(1.0).unwrap();
        let p = est
            .prob(&EventSpec::new().with("o", "1"), &EventSpec::new().with("x", "0"))
            .unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_with_empty_given() {
        let d = small();
        let p = Estimator::new(&d)
            .prob(&EventSpec::new().with("x", "1"), &EventSpec::new())
            .unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_with_rationals() {
        let d = small().map_weights(|w| BigRational::from_f64(*w));
        let p = Estimator::new(&d)
            .prob(&EventSpec::new().with("x", "1"), &EventSpec::new())
            .unwrap();
        assert_eq!(
            p,
            BigRational::new(2.into(), 3.into())
        );
    }

    #[test]
    fn empty_adjustment_is_conditional() {
        let d = small();
        let est = Estimator::new(&d);
        let o = EventSpec::new().with("o", "1");
        let x = EventSpec::new().with("x", "1");
        let a = est.adjusted_prob(&o, &x, &[], &EventSpec::new(), &EventSpec::new()).unwrap();
        assert_eq!(a, est.prob(&o, &x).unwrap());
    }
}
