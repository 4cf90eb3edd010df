use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate::{random_scm, RandomScmConfig};
use super::Scm;
use crate::blackbox::OutcomeSpec;
use crate::data::{Estimator, EventSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scores::{default_adjustment, score_bounds, ContrastQuery, QuerySpec, ScoreKind};

/// Random single-attribute query on `scm`: an attribute other than the
/// outcome, a pair `x > x'` of its values, a random threshold, and a
/// context drawn from the attribute's non-descendants.
pub fn random_query(scm: &Scm, outcome: &str, rng: &mut ChaCha8Rng) -> Result<ContrastQuery> {
    let schema = scm.schema();
    let o_var = schema.get(outcome)?.clone();
    let candidates: Vec<&str> = schema.names().filter(|n| *n != outcome).collect();
    let x_var = *candidates
        .choose(rng)
        .ok_or_else(|| Error::Query("model has no attribute besides the outcome".into()))?;
    let var = schema.get(x_var)?;
    let hi = rng.gen_range(1..var.len());
    let lo = rng.gen_range(0..hi);
    let mut context = EventSpec::new();
    for v in scm.graph().non_descendants([x_var])? {
        if v != outcome && rng.gen_bool(0.3) {
            let d = schema.get(&v)?;
            context = context.with(v.clone(), d.label(rng.gen_range(0..d.len())));
        }
    }
    let threshold = o_var.label(rng.gen_range(1..o_var.len())).to_string();
    let outcome = OutcomeSpec::new(o_var, None, &threshold)?;
    ContrastQuery::single(x_var, var.label(hi), var.label(lo), context, outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessViolation {
    pub trial: usize,
    pub query: QuerySpec,
    pub score: ScoreKind,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub trials: usize,
    /// Trials whose query had a zero-probability conditioning event.
    pub skipped: usize,
    pub checked: usize,
    pub violations: Vec<HarnessViolation>,
}

/// Checks that exact ground-truth scores lie within the bounds computed on
/// the exhaustive joint distribution, in exact arithmetic. With `scm` the
/// trials draw random queries on that model; without it every trial draws
/// a fresh random model from `cfg`.
pub fn bounds_harness(
    scm: Option<&Scm>,
    outcome: &str,
    cfg: &RandomScmConfig,
    trials: usize,
    seed: u64,
    slack: f64,
) -> Result<HarnessReport> {
    let slack = BigRational::from_f64(slack);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed = match scm {
        Some(m) => Some((m.clone(), m.exhaustive_joint::<BigRational>()?)),
        None => None,
    };
    let mut report = HarnessReport {
        trials,
        skipped: 0,
        checked: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        let generated;
        let (model, joint) = match &fixed {
            Some((m, j)) => (m, j),
            None => {
                let m = random_scm(cfg, rng.gen())?;
                let j = m.exhaustive_joint::<BigRational>()?;
                generated = (m, j);
                (&generated.0, &generated.1)
            }
        };
        let q = random_query(model, outcome, &mut rng)?;
        let est = Estimator::new(joint);
        let adj = default_adjustment(model.graph(), &q)?;
        let bounds = match score_bounds(&est, model.graph(), &q, &adj) {
            Ok(b) => b,
            Err(Error::ConditioningOnNull { .. }) => {
                report.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let truth = match model.ground_truth_scores::<BigRational>(&q) {
            Ok(t) => t,
            Err(Error::ConditioningOnNull { .. }) => {
                report.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.checked += 1;
        for kind in ScoreKind::ALL {
            let iv = bounds.get(kind);
            let value = truth.get(kind);
            if !iv.contains(value, &slack) {
                report.violations.push(HarnessViolation {
                    trial,
                    query: q.spec(),
                    score: kind,
                    value: value.to_f64(),
                    lower: iv.lower.to_f64(),
                    upper: iv.upper.to_f64(),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::generate::f1;

    #[test]
    fn f1_has_no_violations() {
        let r = bounds_harness(Some(&f1()), "O", &RandomScmConfig::default(), 20, 7, 1e-9).unwrap();
        assert_eq!(r.violations, vec![]);
        assert!(r.checked > 0);
    }
}
