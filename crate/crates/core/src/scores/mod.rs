//! Necessity and sufficiency scores: point identification under
//! monotonicity, bounds without it, and the no-confounding shortcut.
//!
//! Every formula runs on the binarized outcome `O^≥` / `O^<` of the query's
//! [`OutcomeSpec`].

mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blackbox::OutcomeSpec;
use crate::data::{check_identified, Estimator, EventSpec};
use crate::error::{Error, Result};
use crate::graph::{AdjustmentSet, CausalGraph};
use crate::scalar::Scalar;
use crate::schema::{Label, Schema};

pub use report::{score_report, Diagnostics, EstimatorConfig, ScoreMode, ScoreReport};

/// The influence of `X = x` relative to the baseline `X = x'` on the
/// outcome, within the sub-population `context`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastQuery {
    x: BTreeMap<String, String>,
    x_prime: BTreeMap<String, String>,
    context: EventSpec,
    outcome: OutcomeSpec,
}

impl ContrastQuery {
    pub fn new(
        x: BTreeMap<String, String>,
        x_prime: BTreeMap<String, String>,
        context: EventSpec,
        outcome: OutcomeSpec,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Query("attribute set is empty".into()));
        }
        if !x.keys().eq(x_prime.keys()) {
            return Err(Error::Query("x and x' must assign the same attributes".into()));
        }
        if x == x_prime {
            return Err(Error::Query("x and x' are identical".into()));
        }
        if x.contains_key(outcome.name()) {
            return Err(Error::Query("the outcome cannot be an attribute".into()));
        }
        if let Some(v) = context
            .vars()
            .find(|v| x.contains_key(*v) || *v == outcome.name())
        {
            return Err(Error::NotDisjoint(format!(
                "context variable `{v}` overlaps the attributes or the outcome"
            )));
        }
        Ok(ContrastQuery {
            x,
            x_prime,
            context,
            outcome,
        })
    }

    /// Single-attribute query.
    pub fn single(
        var: &str,
        x: &str,
        x_prime: &str,
        context: EventSpec,
        outcome: OutcomeSpec,
    ) -> Result<Self> {
        ContrastQuery::new(
            BTreeMap::from([(var.to_string(), x.to_string())]),
            BTreeMap::from([(var.to_string(), x_prime.to_string())]),
            context,
            outcome,
        )
    }

    pub fn x(&self) -> &BTreeMap<String, String> {
        &self.x
    }

    pub fn x_prime(&self) -> &BTreeMap<String, String> {
        &self.x_prime
    }

    pub fn context(&self) -> &EventSpec {
        &self.context
    }

    pub fn outcome(&self) -> &OutcomeSpec {
        &self.outcome
    }

    pub fn x_vars(&self) -> Vec<String> {
        self.x.keys().cloned().collect()
    }

    pub fn x_event(&self) -> EventSpec {
        assignment_event(&self.x)
    }

    pub fn x_prime_event(&self) -> EventSpec {
        assignment_event(&self.x_prime)
    }

    /// Same attributes and context against another outcome threshold.
    pub fn with_outcome(&self, outcome: OutcomeSpec) -> Result<Self> {
        ContrastQuery::new(self.x.clone(), self.x_prime.clone(), self.context.clone(), outcome)
    }

    /// Checks every label against `schema`.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        for (var, label) in self.x.iter().chain(&self.x_prime) {
            schema.get(var)?.code(label)?;
        }
        self.context.compile(schema)?;
        let o = schema.get(self.outcome.name())?;
        if o.domain() != self.outcome.variable().domain() {
            return Err(Error::Schema(format!(
                "domain of outcome `{}` differs from the data",
                o.name()
            )));
        }
        Ok(())
    }

    pub fn spec(&self) -> QuerySpec {
        let labels = |m: &BTreeMap<String, String>| {
            m.iter()
                .map(|(k, v)| (k.clone(), Label::Text(v.clone())))
                .collect()
        };
        QuerySpec {
            x: labels(&self.x),
            x_prime: labels(&self.x_prime),
            context: self.context.clone(),
            threshold: Some(Label::Text(self.outcome.threshold_label().to_string())),
        }
    }
}

fn assignment_event(a: &BTreeMap<String, String>) -> EventSpec {
    a.iter()
        .fold(EventSpec::new(), |ev, (k, v)| ev.with(k.clone(), v.clone()))
}

/// Query as written in request and config files; the outcome comes from
/// the black box, optionally with another threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub x: BTreeMap<String, Label>,
    pub x_prime: BTreeMap<String, Label>,
    #[serde(default, skip_serializing_if = "EventSpec::is_empty")]
    pub context: EventSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Label>,
}

impl QuerySpec {
    pub fn resolve(&self, outcome: &OutcomeSpec) -> Result<ContrastQuery> {
        let outcome = match &self.threshold {
            Some(t) => outcome.with_threshold(&t.to_string())?,
            None => outcome.clone(),
        };
        let strings = |m: &BTreeMap<String, Label>| {
            m.iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect()
        };
        ContrastQuery::new(
            strings(&self.x),
            strings(&self.x_prime),
            self.context.clone(),
            outcome,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple<S = f64> {
    pub nec: S,
    pub suf: S,
    pub nesuf: S,
}

impl<S: Scalar> ScoreTriple<S> {
    pub fn to_f64(&self) -> ScoreTriple<f64> {
        ScoreTriple {
            nec: self.nec.to_f64(),
            suf: self.suf.to_f64(),
            nesuf: self.nesuf.to_f64(),
        }
    }

    pub fn get(&self, kind: ScoreKind) -> &S {
        match kind {
            ScoreKind::Nec => &self.nec,
            ScoreKind::Suf => &self.suf,
            ScoreKind::Nesuf => &self.nesuf,
        }
    }

    fn clamped(&self) -> ScoreTriple<S> {
        ScoreTriple {
            nec: self.nec.clone().clamp_unit(),
            suf: self.suf.clone().clamp_unit(),
            nesuf: self.nesuf.clone().clamp_unit(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Nec,
    Suf,
    Nesuf,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [ScoreKind::Nec, ScoreKind::Suf, ScoreKind::Nesuf];

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::Nec => "nec",
            ScoreKind::Suf => "suf",
            ScoreKind::Nesuf => "nesuf",
        }
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nec" => Ok(ScoreKind::Nec),
            "suf" => Ok(ScoreKind::Suf),
            "nesuf" => Ok(ScoreKind::Nesuf),
            other => Err(Error::Query(format!(
                "unknown score `{other}` (expected nec, suf or nesuf)"
            ))),
        }
    }
}

/// Scores clamped to `[0, 1]` alongside the raw formula values.
#[derive(Debug, Clone, PartialEq)]
pub struct PointScores<S = f64> {
    pub scores: ScoreTriple<S>,
    pub raw: ScoreTriple<S>,
}

impl<S: Scalar> PointScores<S> {
    /// Names of the scores whose raw value fell outside `[0, 1]`.
    pub fn clamped(&self) -> Vec<ScoreKind> {
        ScoreKind::ALL
            .into_iter()
            .filter(|&k| self.raw.get(k) != self.scores.get(k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval<S = f64> {
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> Interval<S> {
    pub fn contains(&self, value: &S, slack: &S) -> bool {
        self.lower.clone() - slack.clone() <= *value && *value <= self.upper.clone() + slack.clone()
    }

    pub fn width(&self) -> S {
        self.upper.clone() - self.lower.clone()
    }

    fn to_f64(&self) -> Interval<f64> {
        Interval {
            lower: self.lower.to_f64(),
            upper: self.upper.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBounds<S = f64> {
    pub nec: Interval<S>,
    pub suf: Interval<S>,
    pub nesuf: Interval<S>,
}

impl<S: Scalar> ScoreBounds<S> {
    pub fn get(&self, kind: ScoreKind) -> &Interval<S> {
        match kind {
            ScoreKind::Nec => &self.nec,
            ScoreKind::Suf => &self.suf,
            ScoreKind::Nesuf => &self.nesuf,
        }
    }

    pub fn to_f64(&self) -> ScoreBounds<f64> {
        ScoreBounds {
            nec: self.nec.to_f64(),
            suf: self.suf.to_f64(),
            nesuf: self.nesuf.to_f64(),
        }
    }

    /// True when each score of `triple` lies in its interval.
    pub fn contains(&self, triple: &ScoreTriple<S>, slack: &S) -> bool {
        ScoreKind::ALL
            .into_iter()
            .all(|k| self.get(k).contains(triple.get(k), slack))
    }
}

struct Events {
    o: EventSpec,
    o_neg: EventSpec,
    x: EventSpec,
    x_prime: EventSpec,
}

impl Events {
    fn of(q: &ContrastQuery) -> Self {
        Events {
            o: q.outcome.positive_event(),
            o_neg: q.outcome.negative_event(),
            x: q.x_event(),
            x_prime: q.x_prime_event(),
        }
    }
}

fn nonzero<S: Scalar>(value: S, event: impl FnOnce() -> EventSpec) -> Result<S> {
    if value.is_zero() {
        Err(Error::ConditioningOnNull {
            event: event().to_string(),
        })
    } else {
        Ok(value)
    }
}

/// `Pr(event | given)` where `given` must carry mass.
fn cond<S: Scalar>(est: &Estimator<'_, S>, event: &EventSpec, given: &EventSpec) -> Result<S> {
    est.prob(event, given)
}

fn check_query<S: Scalar>(est: &Estimator<'_, S>, graph: &CausalGraph, q: &ContrastQuery, adj: &[String]) -> Result<()> {
    q.validate(est.schema())?;
    let ev = Events::of(q);
    check_identified(graph, &ev.o, &ev.x, &q.context, adj)
}

fn raw_score<S: Scalar>(
    est: &Estimator<'_, S>,
    q: &ContrastQuery,
    adj: &[String],
    kind: ScoreKind,
) -> Result<S> {
    let ev = Events::of(q);
    let k = &q.context;
    match kind {
        ScoreKind::Nec => {
            let xk = ev.x.and(k);
            let p_o_xk = nonzero(cond(est, &ev.o, &xk)?, || ev.o.and(&xk))?;
            let adjusted = est.adjusted_prob(&ev.o_neg, &ev.x_prime, adj, &xk, k)?;
            Ok((adjusted - cond(est, &ev.o_neg, &xk)?) / p_o_xk)
        }
        ScoreKind::Suf => {
            let xpk = ev.x_prime.and(k);
            let p_on_xpk = nonzero(cond(est, &ev.o_neg, &xpk)?, || ev.o_neg.and(&xpk))?;
            let adjusted = est.adjusted_prob(&ev.o, &ev.x, adj, &xpk, k)?;
            Ok((adjusted - cond(est, &ev.o, &xpk)?) / p_on_xpk)
        }
        ScoreKind::Nesuf => Ok(est.adjusted_prob(&ev.o, &ev.x, adj, k, k)?
            - est.adjusted_prob(&ev.o, &ev.x_prime, adj, k, k)?),
    }
}

fn raw_point<S: Scalar>(est: &Estimator<'_, S>, q: &ContrastQuery, adj: &[String]) -> Result<ScoreTriple<S>> {
    Ok(ScoreTriple {
        nec: raw_score(est, q, adj, ScoreKind::Nec)?,
        suf: raw_score(est, q, adj, ScoreKind::Suf)?,
        nesuf: raw_score(est, q, adj, ScoreKind::Nesuf)?,
    })
}

/// One identified score as `(clamped, raw)`; see [`point_scores`].
pub fn point_score<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    q: &ContrastQuery,
    adj: &AdjustmentSet,
    kind: ScoreKind,
) -> Result<(S, S)> {
    let adj: Vec<String> = adj.iter().map(String::from).collect();
    check_query(est, graph, q, &adj)?;
    let raw = raw_score(est, q, &adj, kind)?;
    Ok((raw.clone().clamp_unit(), raw))
}

/// Identified scores under monotonicity via backdoor adjustment over `adj`
/// (with the context added to the conditioning set). `graph` must contain
/// the outcome as a child of the algorithm's inputs.
pub fn point_scores<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    q: &ContrastQuery,
    adj: &AdjustmentSet,
) -> Result<PointScores<S>> {
    let adj: Vec<String> = adj.iter().map(String::from).collect();
    check_query(est, graph, q, &adj)?;
    let raw = raw_point(est, q, &adj)?;
    Ok(PointScores {
        scores: raw.clamped(),
        raw,
    })
}

/// Scores assuming no confounding: every interventional term is replaced by
/// plain conditioning.
pub fn naive_scores<S: Scalar>(est: &Estimator<'_, S>, q: &ContrastQuery) -> Result<PointScores<S>> {
    q.validate(est.schema())?;
    let raw = raw_point(est, q, &[])?;
    Ok(PointScores {
        scores: raw.clamped(),
        raw,
    })
}

fn bound_for<S: Scalar>(
    est: &Estimator<'_, S>,
    q: &ContrastQuery,
    adj: &[String],
    kind: ScoreKind,
) -> Result<Interval<S>> {
    let ev = Events::of(q);
    let k = &q.context;
    let joint = |o: &EventSpec, x: &EventSpec| cond(est, &o.and(x), k);
    let doi = |o: &EventSpec, x: &EventSpec| est.adjusted_prob(o, x, adj, k, k);
    let interval = |lower: S, upper: S| {
        let upper = upper.clamp_unit();
        let lower = S::min_of(lower.clamp_unit(), upper.clone());
        Interval { lower, upper }
    };
    match kind {
        ScoreKind::Nec => {
            let p_o_x = joint(&ev.o, &ev.x)?;
            let d = nonzero(p_o_x.clone(), || ev.o.and(&ev.x).and(k))?;
            let p_o_xp = joint(&ev.o, &ev.x_prime)?;
            let p_on_xp = joint(&ev.o_neg, &ev.x_prime)?;
            let do_o_xp = doi(&ev.o, &ev.x_prime)?;
            let do_on_xp = doi(&ev.o_neg, &ev.x_prime)?;
            Ok(interval(
                S::max_of(S::zero(), (p_o_x + p_o_xp - do_o_xp) / d.clone()),
                S::min_of((do_on_xp - p_on_xp) / d, S::one()),
            ))
        }
        ScoreKind::Suf => {
            let p_on_xp = joint(&ev.o_neg, &ev.x_prime)?;
            let d = nonzero(p_on_xp.clone(), || ev.o_neg.and(&ev.x_prime).and(k))?;
            let p_on_x = joint(&ev.o_neg, &ev.x)?;
            let p_o_x = joint(&ev.o, &ev.x)?;
            let do_on_x = doi(&ev.o_neg, &ev.x)?;
            let do_o_x = doi(&ev.o, &ev.x)?;
            Ok(interval(
                S::max_of(S::zero(), (p_on_x + p_on_xp - do_on_x) / d.clone()),
                S::min_of((do_o_x - p_o_x) / d, S::one()),
            ))
        }
        ScoreKind::Nesuf => {
            let do_o_x = doi(&ev.o, &ev.x)?;
            let do_o_xp = doi(&ev.o, &ev.x_prime)?;
            let do_on_xp = doi(&ev.o_neg, &ev.x_prime)?;
            Ok(interval(
                S::max_of(S::zero(), do_o_x.clone() - do_o_xp),
                S::min_of(do_o_x, do_on_xp),
            ))
        }
    }
}

/// One naive score as `(clamped, raw)`; see [`naive_scores`].
pub fn naive_score<S: Scalar>(est: &Estimator<'_, S>, q: &ContrastQuery, kind: ScoreKind) -> Result<(S, S)> {
    q.validate(est.schema())?;
    let raw = raw_score(est, q, &[], kind)?;
    Ok((raw.clone().clamp_unit(), raw))
}

/// Bounds that hold without monotonicity. Interventional terms are
/// computed by backdoor adjustment over `adj`.
pub fn score_bounds<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    q: &ContrastQuery,
    adj: &AdjustmentSet,
) -> Result<ScoreBounds<S>> {
    let adj: Vec<String> = adj.iter().map(String::from).collect();
    check_query(est, graph, q, &adj)?;
    Ok(ScoreBounds {
        nec: bound_for(est, q, &adj, ScoreKind::Nec)?,
        suf: bound_for(est, q, &adj, ScoreKind::Suf)?,
        nesuf: bound_for(est, q, &adj, ScoreKind::Nesuf)?,
    })
}

/// Bounds on one score; see [`score_bounds`].
pub fn score_bound<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    q: &ContrastQuery,
    adj: &AdjustmentSet,
    kind: ScoreKind,
) -> Result<Interval<S>> {
    let adj: Vec<String> = adj.iter().map(String::from).collect();
    check_query(est, graph, q, &adj)?;
    bound_for(est, q, &adj, kind)
}

/// Slack in the inequality linking the three scores:
/// `Pr(o,x|k)·Nec + Pr(o',x'|k)·Suf + 1 − Pr(x|k) − Pr(x'|k) − NeSuf`.
/// Zero for a two-valued attribute, non-negative otherwise.
pub fn nesuf_relation_gap<S: Scalar>(
    triple: &ScoreTriple<S>,
    est: &Estimator<'_, S>,
    q: &ContrastQuery,
) -> Result<S> {
    let ev = Events::of(q);
    let k = &q.context;
    let p_o_x = est.prob(&ev.o.and(&ev.x), k)?;
    let p_on_xp = est.prob(&ev.o_neg.and(&ev.x_prime), k)?;
    let p_x = est.prob(&ev.x, k)?;
    let p_xp = est.prob(&ev.x_prime, k)?;
    Ok(p_o_x * triple.nec.clone() + p_on_xp * triple.suf.clone() + S::one()
        - p_x
        - p_xp
        - triple.nesuf.clone())
}

/// Adjustment set used when the caller gives none: chosen for the
/// attributes against the outcome, with the context already conditioned on.
pub fn default_adjustment(graph: &CausalGraph, q: &ContrastQuery) -> Result<AdjustmentSet> {
    let ctx: Vec<String> = q.context.vars().map(String::from).collect();
    graph.default_adjustment_set(&q.x_vars(), &[q.outcome.name().to_string()], &ctx)
}
