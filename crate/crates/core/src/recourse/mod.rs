//! Minimum-cost actionable recourse under a sufficiency constraint.

mod generate;
mod logit;
mod solver;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use generate::{linear_instance, random_instance, LinearInstance, RecourseInstance};
pub use logit::{fit_logit, logit, sigmoid, LogitModel, LogitTerm};
pub use solver::{brute_force, solve, BRUTE_FORCE_LIMIT, DEFAULT_NODE_LIMIT};

use crate::blackbox::OutcomeSpec;
use crate::data::{Estimator, EventSpec};
use crate::error::{Error, Result};
use crate::expr::{env, SourceExpr, Value};
use crate::graph::CausalGraph;
use crate::oracle::{CfQuery, CfTarget, Scm};
use crate::scalar::Scalar;
use crate::schema::Schema;

/// Labels a batch of individuals.
pub type Predictor<'a> = dyn FnMut(&[BTreeMap<String, String>]) -> Result<Vec<String>> + 'a;

/// Recourse request file: actionable attributes, the sufficiency level
/// `alpha` and optional per-attribute cost expressions over `a` (current
/// value), `a_hat` (proposed value), `a_pos`/`a_hat_pos` (their domain
/// positions) and `inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecourseConfig {
    pub actionable: Vec<String>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub costs: BTreeMap<String, SourceExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

impl RecourseConfig {
    pub fn new(actionable: impl IntoIterator<Item = impl Into<String>>, alpha: f64) -> Self {
        RecourseConfig {
            actionable: actionable.into_iter().map(Into::into).collect(),
            alpha,
            costs: BTreeMap::new(),
            node_limit: None,
            timeout_ms: None,
        }
    }

    pub fn with_cost(mut self, attribute: impl Into<String>, expr: &str) -> Result<Self> {
        self.costs.insert(attribute.into(), SourceExpr::parse(expr)?);
        Ok(self)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            node_limit: self.node_limit.unwrap_or(DEFAULT_NODE_LIMIT),
            timeout: self.timeout_ms.map(Duration::from_millis),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub node_limit: usize,
    pub timeout: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_limit: DEFAULT_NODE_LIMIT,
            timeout: None,
        }
    }
}

/// One actionable attribute of a problem. `costs[j]` is the cost of moving
/// from `current` to the `j`-th domain value; infinite entries are
/// forbidden moves.
#[derive(Debug, Clone, PartialEq)]
pub struct Actionable {
    pub name: String,
    pub domain: Vec<String>,
    pub current: usize,
    pub costs: Vec<f64>,
}

/// Recourse problem for one individual.
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseProblem {
    pub individual: BTreeMap<String, String>,
    /// In schema order.
    pub actionable: Vec<Actionable>,
    pub alpha: f64,
    /// The individual's values on the non-descendants of the actionable
    /// attributes.
    pub context: EventSpec,
}

fn cost_env(var: &crate::schema::Variable, a: usize, a_hat: usize) -> crate::expr::Env {
    let sym = |c: usize| {
        if var.ordered() {
            Value::ordered_sym(var.label(c), Arc::from(var.domain().to_vec()))
        } else {
            Value::sym(var.label(c))
        }
    };
    env([
        ("a", sym(a)),
        ("a_hat", sym(a_hat)),
        ("a_pos", Value::Num(a as f64)),
        ("a_hat_pos", Value::Num(a_hat as f64)),
        ("inf", Value::Num(f64::INFINITY)),
    ])
}

/// Full cost matrix `cost(a, a_hat)` of an attribute. The default cost is
/// the number of domain steps. Costs must be non-negative and vanish on the
/// diagonal.
pub fn cost_matrix(var: &crate::schema::Variable, expr: Option<&SourceExpr>) -> Result<Vec<Vec<f64>>> {
    let n = var.len();
    let mut m = vec![vec![0.0; n]; n];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let c = match expr {
                None => a.abs_diff(b) as f64,
                Some(e) => {
                    let v = e.expr.evaluate(&cost_env(var, a, b))?;
                    v.as_number().ok_or_else(|| {
                        Error::Query(format!("cost of `{}` evaluates to non-number `{v}`", var.name()))
                    })?
                }
            };
            if c.is_nan() || c < 0.0 {
                return Err(Error::Query(format!(
                    "cost of `{}` from `{}` to `{}` is {c}; costs must be non-negative",
                    var.name(),
                    var.label(a),
                    var.label(b)
                )));
            }
            if a == b && c != 0.0 {
                return Err(Error::Query(format!(
                    "cost of keeping `{}` at `{}` is {c}, expected 0",
                    var.name(),
                    var.label(a)
                )));
            }
            *cell = c;
        }
    }
    Ok(m)
}

impl RecourseProblem {
    /// `individual` must assign every variable of `graph` except the
    /// outcome (extra entries for the outcome are ignored).
    pub fn new(
        graph: &CausalGraph,
        outcome: &OutcomeSpec,
        individual: &BTreeMap<String, String>,
        config: &RecourseConfig,
    ) -> Result<Self> {
        let schema = graph.schema();
        if !(config.alpha > 0.0 && config.alpha <= 1.0) {
            return Err(Error::Query(format!("alpha must lie in (0, 1], got {}", config.alpha)));
        }
        if config.actionable.is_empty() {
            return Err(Error::Query("no actionable attributes".into()));
        }
        for name in schema.names() {
            if name == outcome.name() {
                continue;
            }
            let label = individual
                .get(name)
                .ok_or_else(|| Error::Query(format!("individual has no value for `{name}`")))?;
            schema.get(name)?.code(label)?;
        }
        for name in individual.keys() {
            schema.id(name)?;
        }
        for name in config.costs.keys() {
            if !config.actionable.contains(name) {
                return Err(Error::Query(format!("cost given for non-actionable `{name}`")));
            }
        }
        let mut ids = Vec::new();
        for name in &config.actionable {
            if name == outcome.name() {
                return Err(Error::NotDisjoint(format!("outcome `{name}` cannot be actionable")));
            }
            let id = schema.id(name)?;
            if ids.contains(&id) {
                return Err(Error::Query(format!("`{name}` is listed twice as actionable")));
            }
            ids.push(id);
        }
        ids.sort_unstable();
        let mut actionable = Vec::with_capacity(ids.len());
        for id in ids {
            let var = schema.var(id);
            let current = var.code(&individual[var.name()])?;
            let m = cost_matrix(var, config.costs.get(var.name()))?;
            actionable.push(Actionable {
                name: var.name().to_string(),
                domain: var.domain().to_vec(),
                current,
                costs: m[current].clone(),
            });
        }
        let names: Vec<&str> = actionable.iter().map(|a| a.name.as_str()).collect();
        let mut context = EventSpec::new();
        for v in graph.non_descendants(names.iter().copied())? {
            if v != outcome.name() {
                context = context.with(v.clone(), individual[&v].clone());
            }
        }
        Ok(RecourseProblem {
            individual: individual.clone(),
            actionable,
            alpha: config.alpha,
            context,
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.actionable.iter().map(|a| a.name.clone()).collect()
    }

    /// Regressors of the surrogate model: actionable attributes followed by
    /// the context variables.
    pub fn model_variables(&self) -> Vec<String> {
        let mut v = self.names();
        v.extend(self.context.vars().map(String::from));
        v
    }

    /// Current values of the actionable attributes.
    pub fn current_event(&self) -> EventSpec {
        self.actionable
            .iter()
            .fold(EventSpec::new(), |e, a| e.with(a.name.clone(), a.domain[a.current].clone()))
    }

    fn assignment(&self, choice: &[usize]) -> BTreeMap<String, String> {
        let mut m = self.individual.clone();
        for (a, &c) in self.actionable.iter().zip(choice) {
            m.insert(a.name.clone(), a.domain[c].clone());
        }
        m
    }

    /// Number of constraints of the integer program: one choice constraint
    /// per attribute plus the sufficiency constraint.
    pub fn constraint_count(&self) -> usize {
        self.actionable.len() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    /// `Pr(o | a, k)` estimated from the labeled data.
    Empirical,
    /// The data has no mass at `(a, k)`; the surrogate model's prediction
    /// stands in.
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintStatus {
    Active,
    /// The threshold is at most 0: every plan qualifies.
    Vacuous,
    /// The threshold reaches 1: no plan qualifies.
    Infeasible,
}

/// Linearized sufficiency constraint `base + Σ gain·δ ≥ rhs`, where `δ`
/// selects a new value per attribute, `base` is the surrogate score at the
/// current values and `gains[i][j]` is the score change from moving
/// attribute `i` to its `j`-th value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyConstraint {
    /// `Pr(o | a, k)` at the current values.
    pub current_probability: f64,
    /// `T = Pr(o | a, k) + alpha · Pr(o' | a, k)`.
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
    pub status: ConstraintStatus,
    pub rhs: f64,
    pub base: f64,
    pub gains: Vec<Vec<f64>>,
}

impl SufficiencyConstraint {
    pub fn score(&self, choice: &[usize]) -> f64 {
        let mut s = self.base;
        for (g, &c) in self.gains.iter().zip(choice) {
            s += g[c];
        }
        s
    }

    pub fn satisfied(&self, choice: &[usize]) -> bool {
        match self.status {
            ConstraintStatus::Vacuous => true,
            ConstraintStatus::Infeasible => false,
            ConstraintStatus::Active => self.score(choice) >= self.rhs,
        }
    }

    /// Surrogate sufficiency `(σ(score) − p) / (1 − p)` of a plan.
    pub fn sufficiency(&self, choice: &[usize]) -> f64 {
        let p = self.current_probability;
        if p >= 1.0 {
            return 0.0;
        }
        (sigmoid(self.score(choice)) - p) / (1.0 - p)
    }
}

/// Builds the sufficiency constraint for `problem` from the surrogate
/// `model` and the labeled data behind `est`.
pub fn sufficiency_constraint<S: Scalar>(
    problem: &RecourseProblem,
    model: &LogitModel,
    est: &Estimator<'_, S>,
    outcome: &OutcomeSpec,
) -> Result<SufficiencyConstraint> {
    let current: Vec<usize> = problem.actionable.iter().map(|a| a.current).collect();
    let base = model.score(&problem.assignment(&current))?;
    let mut gains = Vec::with_capacity(problem.actionable.len());
    for a in &problem.actionable {
        let now = model.coefficient(&a.name, &a.domain[a.current])?;
        let row = a
            .domain
            .iter()
            .map(|v| Ok(model.coefficient(&a.name, v)? - now))
            .collect::<Result<Vec<f64>>>()?;
        gains.push(row);
    }
    let given = problem.current_event().and(&problem.context);
    let (p, source) = match est.prob(&outcome.positive_event(), &given) {
        Ok(p) => (p.to_f64(), ThresholdSource::Empirical),
        Err(Error::ConditioningOnNull { .. }) => (sigmoid(base), ThresholdSource::Model),
        Err(e) => return Err(e),
    };
    let t = p + problem.alpha * (1.0 - p);
    let (status, rhs) = if t >= 1.0 {
        (ConstraintStatus::Infeasible, f64::INFINITY)
    } else if t <= 0.0 {
        (ConstraintStatus::Vacuous, f64::NEG_INFINITY)
    } else {
        (ConstraintStatus::Active, logit(t))
    };
    Ok(SufficiencyConstraint {
        current_probability: p,
        threshold: t,
        threshold_source: source,
        status,
        rhs,
        base,
        gains,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Change {
    pub attribute: String,
    pub from: String,
    pub to: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoursePlan {
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    pub changes: Vec<Change>,
    /// Values of every actionable attribute under the plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
    /// Surrogate `Pr(o | a_hat, k)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    /// Surrogate sufficiency of the plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sufficiency: Option<f64>,
    pub alpha: f64,
    pub context: EventSpec,
    pub constraint: SufficiencyConstraint,
    pub constraint_count: usize,
    pub nodes_explored: usize,
}

impl RecoursePlan {
    pub(crate) fn build(
        problem: &RecourseProblem,
        constraint: &SufficiencyConstraint,
        choice: Option<&[usize]>,
        nodes_explored: usize,
    ) -> Self {
        let (feasible, cost, changes, assignment, probability, sufficiency) = match choice {
            None => (false, None, Vec::new(), None, None, None),
            Some(choice) => {
                let mut cost = 0.0;
                let mut changes = Vec::new();
                let mut assignment = BTreeMap::new();
                for (a, &c) in problem.actionable.iter().zip(choice) {
                    cost += a.costs[c];
                    assignment.insert(a.name.clone(), a.domain[c].clone());
                    if c != a.current {
                        changes.push(Change {
                            attribute: a.name.clone(),
                            from: a.domain[a.current].clone(),
                            to: a.domain[c].clone(),
                            cost: a.costs[c],
                        });
                    }
                }
                (
                    true,
                    Some(cost),
                    changes,
                    Some(assignment),
                    Some(sigmoid(constraint.score(choice))),
                    Some(constraint.sufficiency(choice)),
                )
            }
        };
        RecoursePlan {
            feasible,
            cost,
            changes,
            assignment,
            probability,
            sufficiency,
            alpha: problem.alpha,
            context: problem.context.clone(),
            constraint: constraint.clone(),
            constraint_count: problem.constraint_count(),
            nodes_explored,
        }
    }

    /// Attribute values as domain indices, in the problem's order.
    pub fn choice(&self, problem: &RecourseProblem) -> Option<Vec<usize>> {
        let a = self.assignment.as_ref()?;
        problem
            .actionable
            .iter()
            .map(|x| x.domain.iter().position(|d| *d == a[&x.name]))
            .collect()
    }
}

/// Fitted pieces of a recourse computation.
#[derive(Debug, Clone)]
pub struct Recourse {
    pub problem: RecourseProblem,
    pub model: LogitModel,
    pub constraint: SufficiencyConstraint,
    pub plan: RecoursePlan,
}

/// Fits the surrogate on the labeled data, builds the constraint and solves
/// the integer program.
pub fn recourse<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    individual: &BTreeMap<String, String>,
    config: &RecourseConfig,
) -> Result<Recourse> {
    let problem = RecourseProblem::new(graph, outcome, individual, config)?;
    let model = fit_logit(est.dataset(), outcome, &problem.model_variables())?;
    let constraint = sufficiency_constraint(&problem, &model, est, outcome)?;
    let plan = solve(&problem, &constraint, &config.solve_options())?;
    Ok(Recourse {
        problem,
        model,
        constraint,
        plan,
    })
}

/// `Pr(O_{A←a_hat} ∈ O^≥ | A = a, O ∈ O^<, K = k)` on a model whose
/// outcome mechanism is part of `scm`.
pub fn validate_plan(
    plan: &RecoursePlan,
    problem: &RecourseProblem,
    scm: &Scm,
    outcome: &OutcomeSpec,
) -> Result<f64> {
    let assignment = plan
        .assignment
        .as_ref()
        .ok_or_else(|| Error::Query("plan is infeasible".into()))?;
    let intervention = assignment
        .iter()
        .fold(EventSpec::new(), |e, (k, v)| e.with(k.clone(), v.clone()));
    let evidence = problem
        .current_event()
        .and(&problem.context)
        .and(&outcome.negative_event());
    scm.counterfactual_prob::<f64>(&CfQuery {
        targets: vec![CfTarget {
            intervention,
            event: outcome.positive_event(),
        }],
        evidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub original: BTreeMap<String, String>,
    pub modified: BTreeMap<String, String>,
    pub prediction: String,
    pub original_prediction: String,
    /// Surrogate sufficiency of the modified values for the overridden
    /// attributes, relative to the individual's values.
    pub sufficiency: Option<f64>,
    pub original_sufficiency: Option<f64>,
    pub sufficiency_delta: f64,
}

/// Applies `overrides` to `individual`, predicts both versions with
/// `predict` and compares their surrogate sufficiency for the overridden
/// attributes.
pub fn what_if<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    individual: &BTreeMap<String, String>,
    overrides: &BTreeMap<String, String>,
    predict: &mut Predictor<'_>,
) -> Result<WhatIf> {
    let schema: &Schema = graph.schema();
    let mut modified = individual.clone();
    for (k, v) in overrides {
        if k == outcome.name() {
            return Err(Error::NotDisjoint(format!("cannot override the outcome `{k}`")));
        }
        schema.get(k)?.code(v)?;
        modified.insert(k.clone(), v.clone());
    }
    let preds = predict(&[individual.clone(), modified.clone()])?;
    let (mut sufficiency, mut original_sufficiency) = (None, None);
    if !overrides.is_empty() {
        let config = RecourseConfig::new(overrides.keys().cloned(), 1.0);
        let problem = RecourseProblem::new(graph, outcome, individual, &config)?;
        let model = fit_logit(est.dataset(), outcome, &problem.model_variables())?;
        let c = sufficiency_constraint(&problem, &model, est, outcome)?;
        let idx = |m: &BTreeMap<String, String>| -> Vec<usize> {
            problem
                .actionable
                .iter()
                .map(|a| a.domain.iter().position(|d| *d == m[&a.name]).unwrap_or(a.current))
                .collect()
        };
        sufficiency = Some(c.sufficiency(&idx(&modified)));
        original_sufficiency = Some(c.sufficiency(&idx(individual)));
    }
    let delta = match (sufficiency, original_sufficiency) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    };
    Ok(WhatIf {
        original: individual.clone(),
        modified,
        prediction: preds[1].clone(),
        original_prediction: preds[0].clone(),
        sufficiency,
        original_sufficiency,
        sufficiency_delta: delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Variable;

    fn var() -> Variable {
        Variable::new("x", ["lo", "mid", "hi"], true).unwrap()
    }

    #[test]
    fn default_cost_counts_steps() {
        let m = cost_matrix(&var(), None).unwrap();
        assert_eq!(m[0], vec![0.0, 1.0, 2.0]);
        assert_eq!(m[2], vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn cost_expressions_see_values_and_positions() {
        let e = SourceExpr::parse("if a_hat < a then inf else 3 * (a_hat_pos - a_pos)").unwrap();
        let m = cost_matrix(&var(), Some(&e)).unwrap();
        assert_eq!(m[0], vec![0.0, 3.0, 6.0]);
        assert!(m[2][0].is_infinite());
    }

    #[test]
    fn nonzero_diagonal_is_rejected() {
        let e = SourceExpr::parse("1").unwrap();
        assert!(cost_matrix(&var(), Some(&e)).is_err());
        let e = SourceExpr::parse("a_pos - a_hat_pos").unwrap();
        assert!(cost_matrix(&var(), Some(&e)).is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let ok: RecourseConfig =
            serde_json::from_str(r#"{"actionable":["x"],"alpha":0.9,"costs":{"x":"a_hat_pos"}}"#).unwrap();
        assert_eq!(ok.actionable, vec!["x"]);
        assert!(serde_json::from_str::<RecourseConfig>(r#"{"actionable":[],"alpha":1,"beta":2}"#).is_err());
    }
}
