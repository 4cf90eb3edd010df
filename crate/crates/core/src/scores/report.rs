use serde::{Deserialize, Serialize};

use super::{
    default_adjustment, naive_scores, point_scores, score_bounds, ContrastQuery, QuerySpec,
    ScoreBounds, ScoreKind, ScoreTriple,
};
use crate::data::{Estimator, ZeroMassPolicy};
use crate::error::Result;
use crate::graph::{AdjustmentSet, CausalGraph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    #[default]
    Point,
    Bounds,
    Naive,
}

impl std::str::FromStr for ScoreMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(ScoreMode::Point),
            "bounds" => Ok(ScoreMode::Bounds),
            "naive" => Ok(ScoreMode::Naive),
            other => Err(crate::error::Error::Query(format!(
                "unknown mode `{other}` (expected point, bounds or naive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub smoothing: f64,
    pub zero_mass_policy: ZeroMassPolicy,
    /// Adjustment cells dropped under `skip_and_renormalize`.
    pub skipped_cells: usize,
}

impl EstimatorConfig {
    pub fn of<S: Scalar>(est: &Estimator<'_, S>, skipped_cells: usize) -> Self {
        EstimatorConfig {
            smoothing: est.smoothing().to_f64(),
            zero_mass_policy: est.policy(),
            skipped_cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Formula values before clamping to `[0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<ScoreTriple<f64>>,
    #[serde(default)]
    pub clamped: Vec<ScoreKind>,
    /// `None` for naive scores, which adjust for nothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment_set: Option<AdjustmentSet>,
    pub estimator: EstimatorConfig,
    /// Set when the algorithm's inputs are unknown and every variable
    /// stands in for them.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub input_proxy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub query: QuerySpec,
    pub outcome: String,
    pub positive: Vec<String>,
    pub mode: ScoreMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreTriple<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<ScoreBounds<f64>>,
    pub diagnostics: Diagnostics,
}

/// Computes one query in the requested mode. Without `adj` the default
/// adjustment set for the query is used.
pub fn score_report<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    q: &ContrastQuery,
    mode: ScoreMode,
    adj: Option<&AdjustmentSet>,
    input_proxy: bool,
) -> Result<ScoreReport> {
    let skipped_before = est.skipped_cells();
    let adj = match (mode, adj) {
        (ScoreMode::Naive, _) => None,
        (_, Some(a)) => Some(a.clone()),
        (_, None) => Some(default_adjustment(graph, q)?),
    };
    let (scores, bounds, raw, clamped) = match mode {
        ScoreMode::Point => {
            let p = point_scores(est, graph, q, adj.as_ref().unwrap())?;
            (Some(p.scores.to_f64()), None, Some(p.raw.to_f64()), p.clamped())
        }
        ScoreMode::Naive => {
            let p = naive_scores(est, q)?;
            (Some(p.scores.to_f64()), None, Some(p.raw.to_f64()), p.clamped())
        }
        ScoreMode::Bounds => {
            let b = score_bounds(est, graph, q, adj.as_ref().unwrap())?;
            (None, Some(b.to_f64()), None, Vec::new())
        }
    };
    Ok(ScoreReport {
        query: q.spec(),
        outcome: q.outcome().name().to_string(),
        positive: q.outcome().positive().into_iter().map(String::from).collect(),
        mode,
        scores,
        bounds,
        diagnostics: Diagnostics {
            raw,
            clamped,
            adjustment_set: adj,
            estimator: EstimatorConfig::of(est, est.skipped_cells().saturating_sub(skipped_before)),
            input_proxy,
        },
    })
}
