//! Seeded recourse instances with a known logistic outcome.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sigmoid, RecourseConfig};
use crate::blackbox::OutcomeSpec;
use crate::data::Dataset;
use crate::error::Result;
use crate::graph::CausalGraph;
use crate::oracle::generate::{choose_sorted, random_dist};
use crate::oracle::{Exogenous, Scm, MAX_EXOGENOUS_CELLS};
use crate::schema::{Schema, Variable};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Model with binary context roots `K0, K1`, actionable attributes
/// `A0..` whose mechanisms depend on `K0`, and a binary outcome
/// `O := U_O <= s(A, K)` for an integer score `s`. `U_O` is a discretized
/// logistic variable, so `Pr(O = 1 | a, k) = σ(s(a, k))` exactly.
#[derive(Debug, Clone)]
pub struct RecourseInstance {
    pub scm: Scm,
    pub outcome: OutcomeSpec,
    pub individual: BTreeMap<String, String>,
    pub config: RecourseConfig,
}

/// Draws an instance with one to `max_actionable` actionable attributes of
/// two to `max_domain` values. Draws whose exogenous space exceeds the
/// oracle's enumeration limit are redrawn from the same stream.
pub fn random_instance(seed: u64, max_actionable: usize, max_domain: usize, alpha: f64) -> Result<RecourseInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_a = rng.gen_range(1..=max_actionable.max(1));
        let sizes: Vec<usize> = (0..n_a).map(|_| rng.gen_range(2..=max_domain.max(2))).collect();
        let coef: Vec<i64> = (0..n_a).map(|_| rng.gen_range(-1..=2)).collect();
        let kcoef: Vec<i64> = (0..2).map(|_| rng.gen_range(-1..=1)).collect();
        let span = |c: &[i64], s: &dyn Fn(usize) -> i64| -> (i64, i64) {
            c.iter().enumerate().fold((0, 0), |(lo, hi), (i, &w)| {
                let r = w * s(i);
                (lo + r.min(0), hi + r.max(0))
            })
        };
        let (alo, ahi) = span(&coef, &|i| sizes[i] as i64 - 1);
        let (klo, khi) = span(&kcoef, &|_| 1);
        let bias = -((alo + ahi + klo + khi) / 2) - rng.gen_range(0..=2);
        let (lo, hi) = (bias + alo + klo, bias + ahi + khi);
        let grid = (hi - lo + 2) as usize;
        let a_cells: usize = sizes.iter().product();
        if a_cells * 4 * grid > MAX_EXOGENOUS_CELLS {
            continue;
        }

        let mut vars = vec![
            Variable::new("K0", labels(2), true)?,
            Variable::new("K1", labels(2), true)?,
        ];
        let mut exogenous = vec![
            Exogenous::new("U_K0", random_dist(&mut rng, 2))?,
            Exogenous::new("U_K1", random_dist(&mut rng, 2))?,
        ];
        let mut equations = BTreeMap::new();
        equations.insert("K0".to_string(), "U_K0".to_string());
        equations.insert("K1".to_string(), "U_K1".to_string());
        let mut edges = Vec::new();
        let mut score = bias.to_string();
        for (i, &n) in sizes.iter().enumerate() {
            let name = format!("A{i}");
            let u = format!("U_{name}");
            vars.push(Variable::new(name.clone(), labels(n), true)?);
            exogenous.push(Exogenous::new(u.clone(), random_dist(&mut rng, n))?);
            // Under K0 = 1 the value shifts up by one, wrapping around.
            let mut shifted = format!("case {u} of ");
            for v in 0..n - 1 {
                let _ = write!(shifted, "{v} -> {}; ", v + 1);
            }
            shifted.push_str("default -> 0");
            equations.insert(name.clone(), format!("if K0 == 1 then ({shifted}) else {u}"));
            edges.push(("K0".to_string(), name.clone()));
            edges.push((name.clone(), "O".to_string()));
            if coef[i] != 0 {
                let _ = write!(score, " + {} * {name}", coef[i]);
            }
        }
        for (k, &w) in kcoef.iter().enumerate() {
            edges.push((format!("K{k}"), "O".to_string()));
            if w != 0 {
                let _ = write!(score, " + {w} * K{k}");
            }
        }
        // U_O = j with probability σ(j) − σ(j − 1) for lo < j <= hi, the
        // lower tail at lo and the upper tail at hi + 1.
        let mut dist = Vec::with_capacity(grid);
        for j in lo..=hi + 1 {
            let p = if j == lo {
                sigmoid(lo as f64)
            } else if j == hi + 1 {
                1.0 - sigmoid(hi as f64)
            } else {
                sigmoid(j as f64) - sigmoid(j as f64 - 1.0)
            };
            dist.push((j.to_string(), p));
        }
        exogenous.push(Exogenous::new("U_O", dist)?);
        equations.insert("O".to_string(), format!("if U_O <= {score} then 1 else 0"));
        vars.push(Variable::new("O", labels(2), true)?);
        let graph = CausalGraph::new(Schema::new(vars)?, &edges)?;
        let scm = Scm::new(graph, exogenous, &equations)?;

        let mut individual = BTreeMap::new();
        for k in ["K0", "K1"] {
            individual.insert(k.to_string(), rng.gen_range(0..2).to_string());
        }
        for (i, &n) in sizes.iter().enumerate() {
            individual.insert(format!("A{i}"), rng.gen_range(0..n).to_string());
        }
        let outcome = OutcomeSpec::new(scm.schema().get("O")?.clone(), None, "1")?;
        let config = RecourseConfig::new((0..n_a).map(|i| format!("A{i}")), alpha);
        return Ok(RecourseInstance {
            scm,
            outcome,
            individual,
            config,
        });
    }
}

/// Sampled data over independent root features `X0..` and a logistic
/// outcome `O` of all of them.
#[derive(Debug, Clone)]
pub struct LinearInstance {
    pub graph: CausalGraph,
    pub data: Dataset,
    pub outcome: OutcomeSpec,
    pub individual: BTreeMap<String, String>,
    pub config: RecourseConfig,
}

/// `n_features` ternary roots with coefficients increasing in the value
/// index; `n_actionable` of them, chosen at random, are actionable. The
/// individual sits at the middle value of every feature, where the
/// outcome has log-odds −1.
pub fn linear_instance(
    n_features: usize,
    n_actionable: usize,
    n_rows: usize,
    alpha: f64,
    seed: u64,
) -> Result<LinearInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n_features).map(|i| format!("X{i}")).collect();
    let mut vars: Vec<Variable> = names
        .iter()
        .map(|n| Variable::new(n.clone(), labels(3), true))
        .collect::<Result<_>>()?;
    vars.push(Variable::new("O", labels(2), true)?);
    let schema = Schema::new(vars)?;
    let edges: Vec<(String, String)> = names.iter().map(|n| (n.clone(), "O".to_string())).collect();
    let graph = CausalGraph::new(schema.clone(), &edges)?;

    let step: Vec<f64> = (0..n_features).map(|_| rng.gen_range(0.3..0.9)).collect();
    let bias = -1.0 - step.iter().sum::<f64>();
    let mut codes = Vec::with_capacity(n_rows * (n_features + 1));
    for _ in 0..n_rows {
        let mut s = bias;
        for w in &step {
            let c: u32 = rng.gen_range(0..3);
            s += w * f64::from(c);
            codes.push(c);
        }
        codes.push(u32::from(rng.gen_bool(sigmoid(s))));
    }
    let data = Dataset::from_codes(std::sync::Arc::new(schema.clone()), codes, None)?;

    let individual: BTreeMap<String, String> = names.iter().map(|n| (n.clone(), "1".to_string())).collect();
    let chosen = choose_sorted(&mut rng, n_features, n_actionable.min(n_features));
    let config = RecourseConfig::new(chosen.iter().map(|&i| names[i].clone()), alpha);
    let outcome = OutcomeSpec::new(schema.get("O")?.clone(), None, "1")?;
    Ok(LinearInstance {
        graph,
        data,
        outcome,
        individual,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Estimator, EventSpec};

    #[test]
    fn outcome_is_logistic_in_the_score() {
        let inst = random_instance(3, 2, 3, 0.9).unwrap();
        let joint: Dataset = inst.scm.exhaustive_joint().unwrap();
        let est = Estimator::new(&joint);
        let given = inst
            .individual
            .iter()
            .fold(EventSpec::new(), |e, (k, v)| e.with(k.clone(), v.clone()));
        let p = est.prob(&EventSpec::new().with("O", "1"), &given).unwrap();
        // The conditional probability is σ of an integer.
        let s = super::super::logit(p);
        assert!((s - s.round()).abs() < 1e-9, "{s}");
    }

    #[test]
    fn instances_are_deterministic() {
        let a = random_instance(11, 6, 5, 0.9).unwrap();
        let b = random_instance(11, 6, 5, 0.9).unwrap();
        assert_eq!(a.individual, b.individual);
        assert_eq!(a.config, b.config);
    }

    #[test]
    fn linear_instance_shape() {
        let l = linear_instance(10, 3, 200, 0.9, 1).unwrap();
        assert_eq!(l.data.len(), 200);
        assert_eq!(l.config.actionable.len(), 3);
        assert_eq!(l.graph.schema().len(), 11);
    }
}
