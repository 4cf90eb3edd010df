//! Requests shared by the CLI and the HTTP API.

use std::collections::BTreeMap;

use causal_explain::explain::{
    contextual_explanation, global_explanations, local_explanation, Level, OrderPolicy,
};
use causal_explain::recourse::{recourse as solve_recourse, what_if as compare, WhatIf};
use causal_explain::schema::Label;
use causal_explain::scores::{score_report, QuerySpec, ScoreReport};
use causal_explain::{
    AdjustmentSet, EventSpec, ExplainOptions, ExplanationReport, RecourseConfig, RecoursePlan, ScoreKind,
    ScoreMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::session::Session;

/// Attribute values by name; numbers are accepted for numeric labels.
pub type Individual = BTreeMap<String, Label>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoresRequest {
    pub query: QuerySpec,
    #[serde(default)]
    pub mode: ScoreMode,
    /// Overrides the default adjustment set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<AdjustmentSet>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainRequest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScoreMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderPolicy>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Vec<Label>>,
    /// Contextual level only.
    #[serde(skip_serializing_if = "EventSpec::is_empty")]
    pub context: EventSpec,
    /// Contextual level only; all attributes outside the context when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    /// Local level only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub individual: Option<Individual>,
}

impl ExplainRequest {
    pub fn options(&self) -> ExplainOptions {
        let d = ExplainOptions::default();
        ExplainOptions {
            score: self.score.unwrap_or(d.score),
            mode: self.mode.unwrap_or(d.mode),
            order: self.order.unwrap_or(d.order),
            overrides: self
                .overrides
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(Label::to_string).collect()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecourseRequest {
    pub individual: Individual,
    pub config: RecourseConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub individual: Individual,
    #[serde(default)]
    pub overrides: Individual,
}

pub fn parse_level(s: &str) -> Result<Level> {
    match s {
        "global" => Ok(Level::Global),
        "contextual" => Ok(Level::Contextual),
        "local" => Ok(Level::Local),
        other => Err(ServiceError::BadRequest(format!(
            "unknown explanation level `{other}` (expected global, contextual or local)"
        ))),
    }
}

fn strings(m: &Individual) -> BTreeMap<String, String> {
    m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

/// Feature values of `individual`; a value for the outcome is dropped.
fn features(s: &Session, individual: &Individual) -> BTreeMap<String, String> {
    let mut out = strings(individual);
    out.remove(s.outcome().name());
    out
}

pub fn scores(s: &Session, r: &ScoresRequest) -> Result<ScoreReport> {
    let est = s.estimator()?;
    let q = r.query.resolve(s.outcome())?;
    q.validate(s.graph.schema())?;
    Ok(score_report(&est, &s.graph, &q, r.mode, r.adjustment.as_ref(), s.input_proxy)?)
}

pub fn explain(s: &Session, level: Level, r: &ExplainRequest) -> Result<ExplanationReport> {
    let est = s.estimator()?;
    let opts = r.options();
    let misplaced = |field: &str| {
        Err(ServiceError::BadRequest(format!("`{field}` does not apply to {level:?} explanations")))
    };
    match level {
        Level::Global => {
            if !r.context.is_empty() {
                return misplaced("context");
            }
            if r.attribute.is_some() {
                return misplaced("attribute");
            }
            if r.individual.is_some() {
                return misplaced("individual");
            }
            Ok(global_explanations(&est, &s.graph, s.outcome(), &opts)?)
        }
        Level::Contextual => {
            if r.individual.is_some() {
                return misplaced("individual");
            }
            Ok(contextual_explanation(
                &est,
                &s.graph,
                s.outcome(),
                r.attribute.as_deref(),
                &r.context,
                &opts,
            )?)
        }
        Level::Local => {
            if !r.context.is_empty() {
                return misplaced("context");
            }
            if r.attribute.is_some() {
                return misplaced("attribute");
            }
            let individual = r
                .individual
                .as_ref()
                .ok_or_else(|| ServiceError::BadRequest("local explanations need an `individual`".into()))?;
            let individual = features(s, individual);
            let prediction = s.predict(&individual)?;
            Ok(local_explanation(&est, &s.graph, s.outcome(), &individual, &prediction, &opts)?)
        }
    }
}

/// The plan, or [`ServiceError::Infeasible`] carrying it.
pub fn recourse(s: &Session, r: &RecourseRequest) -> Result<RecoursePlan> {
    let est = s.estimator()?;
    let individual = features(s, &r.individual);
    let plan = solve_recourse(&est, &s.graph, s.outcome(), &individual, &r.config)?.plan;
    if plan.feasible {
        Ok(plan)
    } else {
        Err(ServiceError::Infeasible(Box::new(plan)))
    }
}

pub fn what_if(s: &Session, r: &WhatIfRequest) -> Result<WhatIf> {
    let est = s.estimator()?;
    let individual = features(s, &r.individual);
    let mut predict = |rows: &[BTreeMap<String, String>]| s.blackbox.predict(rows);
    Ok(compare(&est, &s.graph, s.outcome(), &individual, &strings(&r.overrides), &mut predict)?)
}
