//! Global, contextual and local explanations built from pairwise scores.

mod table;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blackbox::{infer_value_order, OutcomeSpec};
use crate::data::{Estimator, EventSpec};
use crate::error::{Error, Result};
use crate::graph::{AdjustmentSet, CausalGraph};
use crate::scalar::Scalar;
use crate::scores::{
    naive_score, point_score, score_bound, ContrastQuery, EstimatorConfig,
    Interval, ScoreKind, ScoreMode,
};

pub use table::render_table;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// Rank values by their interventional effect on a positive outcome.
    #[default]
    Infer,
    /// Later domain values are better.
    Declared,
    /// Declared order for variables flagged `ordered`, inference otherwise.
    DeclaredIfOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSource {
    Inferred,
    Declared,
    Override,
    /// Inference hit a zero-mass value; the declared order was used.
    DeclaredFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainOptions {
    #[serde(default = "default_score")]
    pub score: ScoreKind,
    #[serde(default)]
    pub mode: ScoreMode,
    #[serde(default)]
    pub order: OrderPolicy,
    /// Per-attribute value orders, best first, that bypass inference.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Vec<String>>,
}

fn default_score() -> ScoreKind {
    ScoreKind::Nesuf
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions {
            score: default_score(),
            mode: ScoreMode::Point,
            order: OrderPolicy::Infer,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Global,
    Contextual,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        ErrorInfo {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub x: String,
    pub x_prime: String,
    pub reason: ErrorInfo,
}

/// Local contributions of the individual's value of one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub positive: f64,
    /// Alternative value attaining `positive`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_against: Option<String>,
    pub negative: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_against: Option<String>,
    /// The value is the best (`top`) or worst (`bottom`) of its order, so
    /// one of the ranges is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extreme: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeEntry {
    pub attribute: String,
    /// Requested score of the best pair; the lower bound in bounds mode.
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_prime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Interval<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contributions: Option<Contributions>,
    /// Values best first.
    pub order: Vec<String>,
    pub order_source: OrderSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<EventSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment_set: Option<AdjustmentSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_pairs: Vec<SkippedPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    /// Schema position, the ranking tie-break.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub level: Level,
    pub score: ScoreKind,
    pub mode: ScoreMode,
    pub outcome: String,
    pub positive: Vec<String>,
    #[serde(default, skip_serializing_if = "EventSpec::is_empty")]
    pub context: EventSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub individual: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<String>,
    pub entries: Vec<AttributeEntry>,
    pub estimator: EstimatorConfig,
}

/// Attribute names by descending score, ties in schema order.
pub fn rank_attributes(report: &ExplanationReport) -> Vec<String> {
    let mut entries: Vec<&AttributeEntry> = report.entries.iter().collect();
    entries.sort_by(|a, b| rank_order(a, b));
    entries.into_iter().map(|e| e.attribute.clone()).collect()
}

fn rank_order(a: &AttributeEntry, b: &AttributeEntry) -> std::cmp::Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.position.cmp(&b.position))
}

struct PairValue<S> {
    value: S,
    raw: Option<S>,
    bounds: Option<Interval<S>>,
}

struct Ctx<'e, 'a, S> {
    est: &'e Estimator<'a, S>,
    graph: &'e CausalGraph,
    outcome: &'e OutcomeSpec,
    opts: &'e ExplainOptions,
}

impl<S: Scalar> Ctx<'_, '_, S> {
    fn order(&self, var: &str) -> Result<(Vec<String>, OrderSource)> {
        let v = self.est.schema().get(var)?;
        let declared: Vec<String> = v.domain().iter().rev().cloned().collect();
        if let Some(o) = self.opts.overrides.get(var) {
            let mut sorted = o.clone();
            sorted.sort();
            let mut dom = declared.clone();
            dom.sort();
            if sorted != dom {
                return Err(Error::Query(format!(
                    "order override for `{var}` must list every value once"
                )));
            }
            return Ok((o.clone(), OrderSource::Override));
        }
        match self.opts.order {
            OrderPolicy::Declared => Ok((declared, OrderSource::Declared)),
            OrderPolicy::DeclaredIfOrdered if v.ordered() => Ok((declared, OrderSource::Declared)),
            OrderPolicy::Infer | OrderPolicy::DeclaredIfOrdered => {
                match infer_value_order(self.est, self.graph, self.outcome, var, &EventSpec::new()) {
                    Ok(o) => Ok((o, OrderSource::Inferred)),
                    Err(Error::ConditioningOnNull { .. }) => {
                        Ok((declared, OrderSource::DeclaredFallback))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    fn query(&self, var: &str, x: &str, x_prime: &str, context: &EventSpec) -> Result<ContrastQuery> {
        ContrastQuery::single(var, x, x_prime, context.clone(), self.outcome.clone())
    }

    fn pair(
        &self,
        q: &ContrastQuery,
        adj: Option<&AdjustmentSet>,
        kind: ScoreKind,
    ) -> Result<PairValue<S>> {
        match (self.opts.mode, adj) {
            (ScoreMode::Naive, _) => {
                let (value, raw) = naive_score(self.est, q, kind)?;
                Ok(PairValue {
                    value,
                    raw: Some(raw),
                    bounds: None,
                })
            }
            (ScoreMode::Point, Some(adj)) => {
                let (value, raw) = point_score(self.est, self.graph, q, adj, kind)?;
                Ok(PairValue {
                    value,
                    raw: Some(raw),
                    bounds: None,
                })
            }
            (ScoreMode::Bounds, Some(adj)) => {
                let iv = score_bound(self.est, self.graph, q, adj, kind)?;
                Ok(PairValue {
                    value: iv.lower.clone(),
                    raw: None,
                    bounds: Some(iv),
                })
            }
            (_, None) => unreachable!("adjustment set resolved before scoring"),
        }
    }

    fn adjustment(&self, var: &str, context: &EventSpec) -> Result<Option<AdjustmentSet>> {
        if self.opts.mode == ScoreMode::Naive {
            return Ok(None);
        }
        let ctx: Vec<String> = context.vars().map(String::from).collect();
        self.graph
            .default_adjustment_set(&[var.to_string()], &[self.outcome.name().to_string()], &ctx)
            .map(Some)
    }

    /// Best pair over `pairs` (scanned in order; first maximum wins).
    fn best_of(
        &self,
        var: &str,
        pairs: &[(String, String)],
        context: &EventSpec,
        adj: Option<&AdjustmentSet>,
        kind: ScoreKind,
        skipped: &mut Vec<SkippedPair>,
    ) -> Result<Option<(String, String, PairValue<S>)>> {
        let mut best: Option<(String, String, PairValue<S>)> = None;
        for (x, xp) in pairs {
            let q = self.query(var, x, xp, context)?;
            match self.pair(&q, adj, kind) {
                Ok(v) => {
                    if best.as_ref().is_none_or(|b| v.value > b.2.value) {
                        best = Some((x.clone(), xp.clone(), v));
                    }
                }
                Err(e @ Error::ConditioningOnNull { .. }) => skipped.push(SkippedPair {
                    x: x.clone(),
                    x_prime: xp.clone(),
                    reason: ErrorInfo::from(&e),
                }),
                Err(e) => return Err(e),
            }
        }
        Ok(best)
    }

    fn empty_entry(&self, var: &str, position: usize) -> AttributeEntry {
        AttributeEntry {
            attribute: var.to_string(),
            score: 0.0,
            x: None,
            x_prime: None,
            raw: None,
            bounds: None,
            contributions: None,
            order: Vec::new(),
            order_source: OrderSource::Declared,
            context: None,
            adjustment_set: None,
            skipped_pairs: Vec::new(),
            error: None,
            position,
        }
    }

    fn contextual_entry(&self, var: &str, position: usize, context: &EventSpec) -> AttributeEntry {
        let mut entry = self.empty_entry(var, position);
        if let Err(e) = self.fill_contextual(&mut entry, context) {
            entry.error = Some(ErrorInfo::from(&e));
        }
        entry
    }

    fn fill_contextual(&self, entry: &mut AttributeEntry, context: &EventSpec) -> Result<()> {
        let var = entry.attribute.clone();
        let (order, source) = self.order(&var)?;
        entry.order = order.clone();
        entry.order_source = source;
        let adj = self.adjustment(&var, context)?;
        entry.adjustment_set = adj.clone();
        let pairs: Vec<(String, String)> = (0..order.len())
            .flat_map(|i| (i + 1..order.len()).map(move |j| (i, j)))
            .map(|(i, j)| (order[i].clone(), order[j].clone()))
            .collect();
        let best = self.best_of(&var, &pairs, context, adj.as_ref(), self.opts.score, &mut entry.skipped_pairs)?;
        if let Some((x, xp, v)) = best {
            entry.score = v.value.to_f64();
            entry.raw = v.raw.map(|r| r.to_f64());
            entry.bounds = v.bounds.map(|b| Interval {
                lower: b.lower.to_f64(),
                upper: b.upper.to_f64(),
            });
            entry.x = Some(x);
            entry.x_prime = Some(xp);
        }
        Ok(())
    }

    fn local_entry(
        &self,
        var: &str,
        position: usize,
        individual: &BTreeMap<String, String>,
        positive: bool,
    ) -> AttributeEntry {
        let mut entry = self.empty_entry(var, position);
        if let Err(e) = self.fill_local(&mut entry, individual, positive) {
            entry.error = Some(ErrorInfo::from(&e));
        }
        entry
    }

    fn fill_local(
        &self,
        entry: &mut AttributeEntry,
        individual: &BTreeMap<String, String>,
        positive: bool,
    ) -> Result<()> {
        let var = entry.attribute.clone();
        let current = individual
            .get(&var)
            .ok_or_else(|| Error::Query(format!("individual has no value for `{var}`")))?
            .clone();
        let (order, source) = self.order(&var)?;
        entry.order = order.clone();
        entry.order_source = source;
        let at = order
            .iter()
            .position(|v| *v == current)
            .ok_or_else(|| Error::UnknownValue {
                variable: var.clone(),
                value: current.clone(),
            })?;
        let mut context = EventSpec::new();
        for nd in self.graph.non_descendants([var.as_str()])? {
            if nd != self.outcome.name() {
                if let Some(v) = individual.get(&nd) {
                    context = context.with(nd.clone(), v.clone());
                }
            }
        }
        entry.context = Some(context.clone());
        let adj = self.adjustment(&var, &context)?;
        entry.adjustment_set = adj.clone();

        // Better values x > x' and worse values x'' < x'.
        let better: Vec<(String, String)> =
            order[..at].iter().map(|x| (x.clone(), current.clone())).collect();
        let worse: Vec<(String, String)> =
            order[at + 1..].iter().map(|x| (current.clone(), x.clone())).collect();
        let kind = if positive { ScoreKind::Nec } else { ScoreKind::Suf };
        let neg = self.best_of(&var, &better, &context, adj.as_ref(), kind, &mut entry.skipped_pairs)?;
        let pos = self.best_of(&var, &worse, &context, adj.as_ref(), kind, &mut entry.skipped_pairs)?;
        let value = |b: &Option<(String, String, PairValue<S>)>| b.as_ref().map_or(0.0, |b| b.2.value.to_f64());
        let extreme = if at == 0 {
            Some("top".to_string())
        } else if at + 1 == order.len() {
            Some("bottom".to_string())
        } else {
            None
        };
        let c = Contributions {
            positive: value(&pos),
            positive_against: pos.as_ref().map(|b| b.1.clone()),
            negative: value(&neg),
            negative_against: neg.as_ref().map(|b| b.0.clone()),
            extreme,
        };
        entry.score = c.positive.max(c.negative);
        entry.contributions = Some(c);
        Ok(())
    }
}

fn finish(mut entries: Vec<AttributeEntry>) -> Vec<AttributeEntry> {
    entries.sort_by(rank_order);
    entries
}

/// Runs `f` for every attribute on its own thread and collects the
/// results in attribute order.
fn per_attribute<T: Send>(attrs: &[(usize, String)], f: impl Fn(usize, &str) -> T + Sync) -> Vec<T> {
    std::thread::scope(|s| {
        let handles: Vec<_> = attrs
            .iter()
            .map(|(pos, name)| {
                let f = &f;
                s.spawn(move || f(*pos, name))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("explanation worker panicked"))
            .collect()
    })
}

fn attributes(graph: &CausalGraph, outcome: &OutcomeSpec, exclude: &EventSpec) -> Vec<(usize, String)> {
    graph
        .schema()
        .names()
        .enumerate()
        .filter(|(_, n)| *n != outcome.name() && !exclude.contains_var(n))
        .map(|(i, n)| (i, n.to_string()))
        .collect()
}

fn report_base<S: Scalar>(
    est: &Estimator<'_, S>,
    outcome: &OutcomeSpec,
    opts: &ExplainOptions,
    level: Level,
) -> ExplanationReport {
    ExplanationReport {
        level,
        score: opts.score,
        mode: opts.mode,
        outcome: outcome.name().to_string(),
        positive: outcome.positive().into_iter().map(String::from).collect(),
        context: EventSpec::new(),
        individual: None,
        prediction: None,
        entries: Vec::new(),
        estimator: EstimatorConfig::of(est, 0),
    }
}

/// For every attribute, the maximum score over pairs `x > x'` in the whole
/// population. `graph` must contain the outcome.
pub fn global_explanations<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    opts: &ExplainOptions,
) -> Result<ExplanationReport> {
    let mut r = contextual_explanation(est, graph, outcome, None, &EventSpec::new(), opts)?;
    r.level = Level::Global;
    Ok(r)
}

/// As [`global_explanations`] within the sub-population `context`, for one
/// attribute or (with `x_var = None`) every attribute outside the context.
pub fn contextual_explanation<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    x_var: Option<&str>,
    context: &EventSpec,
    opts: &ExplainOptions,
) -> Result<ExplanationReport> {
    let skipped_before = est.skipped_cells();
    if !context.is_empty() {
        let mass = est.mass(context)?;
        if mass.is_zero() {
            return Err(Error::ConditioningOnNull {
                event: context.to_string(),
            });
        }
    }
    let attrs = match x_var {
        Some(v) => {
            let pos = graph.schema().id(v)?;
            if v == outcome.name() {
                return Err(Error::Query("the outcome cannot be explained by itself".into()));
            }
            vec![(pos, v.to_string())]
        }
        None => attributes(graph, outcome, context),
    };
    let ctx = Ctx {
        est,
        graph,
        outcome,
        opts,
    };
    let entries = per_attribute(&attrs, |pos, name| ctx.contextual_entry(name, pos, context));
    let mut r = report_base(est, outcome, opts, Level::Contextual);
    r.context = context.clone();
    r.entries = finish(entries);
    r.estimator = EstimatorConfig::of(est, est.skipped_cells().saturating_sub(skipped_before));
    Ok(r)
}

/// Positive and negative contributions of each of the individual's values.
/// `prediction` is the algorithm's output for the individual.
pub fn local_explanation<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    individual: &BTreeMap<String, String>,
    prediction: &str,
    opts: &ExplainOptions,
) -> Result<ExplanationReport> {
    let skipped_before = est.skipped_cells();
    for (k, v) in individual {
        if k != outcome.name() {
            est.schema().get(k)?.code(v)?;
        }
    }
    let code = outcome.variable().code(prediction)?;
    let positive = outcome.is_positive_code(code);
    let attrs: Vec<(usize, String)> = attributes(graph, outcome, &EventSpec::new());
    if let Some((_, missing)) = attrs.iter().find(|(_, n)| !individual.contains_key(n)) {
        return Err(Error::Query(format!("individual has no value for `{missing}`")));
    }
    let ctx = Ctx {
        est,
        graph,
        outcome,
        opts,
    };
    let entries = per_attribute(&attrs, |pos, name| ctx.local_entry(name, pos, individual, positive));
    let mut r = report_base(est, outcome, opts, Level::Local);
    r.individual = Some(
        individual
            .iter()
            .filter(|(k, _)| *k != outcome.name())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    );
    r.prediction = Some(prediction.to_string());
    r.entries = finish(entries);
    r.estimator = EstimatorConfig::of(est, est.skipped_cells().saturating_sub(skipped_before));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::oracle::generate::f1;
    use crate::oracle::{CfQuery, CfTarget};
    use crate::scalar::Scalar;

    fn f1_setup() -> (crate::oracle::Scm, OutcomeSpec) {
        let scm = f1();
        let o = OutcomeSpec::new(scm.schema().get("O").unwrap().clone(), None, "1").unwrap();
        (scm, o)
    }

    #[test]
    fn constant_predictor_scores_zero() {
        let (scm, o) = f1_setup();
        let joint = scm.exhaustive_joint::<f64>().unwrap();
        let n = joint.len();
        let labeled = joint.with_column(o.variable().clone(), &vec![1; n]).unwrap();
        let graph = scm.graph();
        let est = Estimator::new(&labeled);
        for score in ScoreKind::ALL {
            let opts = ExplainOptions {
                score,
                ..Default::default()
            };
            let r = global_explanations(&est, graph, &o, &opts).unwrap();
            assert!(r.entries.iter().all(|e| e.score == 0.0), "{score:?}");
        }
    }

    #[test]
    fn empty_context_matches_global() {
        let (scm, o) = f1_setup();
        let joint = scm.exhaustive_joint::<f64>().unwrap();
        let est = Estimator::new(&joint);
        let opts = ExplainOptions {
            score: ScoreKind::Nec,
            ..Default::default()
        };
        let g = global_explanations(&est, scm.graph(), &o, &opts).unwrap();
        let c = contextual_explanation(&est, scm.graph(), &o, Some("X"), &EventSpec::new(), &opts).unwrap();
        let gx = g.entries.iter().find(|e| e.attribute == "X").unwrap();
        assert_eq!(&c.entries[0], gx);
    }

    #[test]
    fn descendant_context_is_not_identifiable() {
        let (scm, o) = f1_setup();
        let joint = scm.exhaustive_joint::<f64>().unwrap();
        let est = Estimator::new(&joint);
        let r = contextual_explanation(
            &est,
            scm.graph(),
            &o,
            Some("Z"),
            &EventSpec::new().with("X", "1"),
            &ExplainOptions::default(),
        )
        .unwrap();
        assert_eq!(r.entries[0].error.as_ref().unwrap().code, "NOT_IDENTIFIABLE");
    }

    #[test]
    fn f1_local_contributions_match_oracle() {
        let (scm, o) = f1_setup();
        let joint = scm.exhaustive_joint::<BigRational>().unwrap();
        let est = Estimator::new(&joint);
        let individual: BTreeMap<String, String> =
            [("Z", "1"), ("X", "0")].into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let opts = ExplainOptions {
            order: OrderPolicy::Declared,
            ..Default::default()
        };
        let r = local_explanation(&est, scm.graph(), &o, &individual, "0", &opts).unwrap();
        let x = r.entries.iter().find(|e| e.attribute == "X").unwrap();
        let c = x.contributions.as_ref().unwrap();
        // Negative outcome, x' = 0: the negative contribution is Suf of
        // X = 1 against 0 within Z = 1.
        let truth: BigRational = scm
            .counterfactual_prob(&CfQuery {
                targets: vec![CfTarget {
                    intervention: EventSpec::new().with("X", "1"),
                    event: EventSpec::new().with("O", "1"),
                }],
                evidence: EventSpec::new().with("X", "0").with("O", "0").with("Z", "1"),
            })
            .unwrap();
        assert_eq!(c.negative, truth.to_f64());
        assert_eq!(c.positive, 0.0);
        assert_eq!(c.extreme.as_deref(), Some("bottom"));
    }

    #[test]
    fn ranking_ties_follow_schema_order() {
        let (scm, o) = f1_setup();
        let joint = scm.exhaustive_joint::<f64>().unwrap();
        let est = Estimator::new(&joint);
        let mut r = global_explanations(&est, scm.graph(), &o, &ExplainOptions::default()).unwrap();
        for e in &mut r.entries {
            e.score = 0.0;
        }
        let names: Vec<String> = scm.schema().names().filter(|n| *n != "O").map(String::from).collect();
        assert_eq!(rank_attributes(&r), names);
    }
}
