//! Output formatting. JSON bodies are produced here for both the CLI and
//! the HTTP API, so identical requests give identical bytes.

use std::fmt::Write;

use causal_explain::recourse::WhatIf;
use causal_explain::scores::ScoreReport;
use causal_explain::{RecoursePlan, ScoreKind};
use serde::Serialize;

/// Pretty-printed JSON with a trailing newline.
pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("payloads serialize");
    s.push('\n');
    s
}

pub fn score_table(r: &ScoreReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "outcome {} in {{{}}}, mode {:?}", r.outcome, r.positive.join(","), r.mode);
    let _ = writeln!(out, "{:<6} {:>10} {:>10}", "score", "lower", "upper");
    for kind in ScoreKind::ALL {
        match (&r.scores, &r.bounds) {
            (Some(s), _) => {
                let v = s.get(kind);
                let _ = writeln!(out, "{:<6} {:>10.6} {:>10.6}", kind.name(), v, v);
            }
            (None, Some(b)) => {
                let i = b.get(kind);
                let _ = writeln!(out, "{:<6} {:>10.6} {:>10.6}", kind.name(), i.lower, i.upper);
            }
            (None, None) => {}
        }
    }
    if let Some(adj) = &r.diagnostics.adjustment_set {
        let names: Vec<&str> = adj.iter().collect();
        let _ = writeln!(out, "adjustment: {{{}}}", names.join(","));
    }
    out
}

pub fn plan_table(p: &RecoursePlan) -> String {
    let mut out = String::new();
    if !p.feasible {
        let _ = writeln!(out, "infeasible at alpha {} ({:?} constraint)", p.alpha, p.constraint.status);
        return out;
    }
    let _ = writeln!(
        out,
        "cost {} at alpha {}, sufficiency {:.6}",
        p.cost.unwrap_or(0.0),
        p.alpha,
        p.sufficiency.unwrap_or(0.0)
    );
    if p.changes.is_empty() {
        let _ = writeln!(out, "no change needed");
    }
    for c in &p.changes {
        let _ = writeln!(out, "[ ] {}: {} -> {} (cost {})", c.attribute, c.from, c.to, c.cost);
    }
    out
}

pub fn whatif_table(w: &WhatIf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "prediction {} (was {})", w.prediction, w.original_prediction);
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(
        out,
        "sufficiency {} (was {}, delta {:+.6})",
        fmt(w.sufficiency),
        fmt(w.original_sufficiency),
        w.sufficiency_delta
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_ends_with_newline() {
        assert_eq!(json(&serde_json::json!({"a": 1})), "{\n  \"a\": 1\n}\n");
    }
}
