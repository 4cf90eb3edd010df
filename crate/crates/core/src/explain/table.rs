use std::fmt::Write;

use super::{ExplanationReport, Level};

const BAR: usize = 20;

fn bar(value: f64) -> String {
    let n = (value.clamp(0.0, 1.0) * BAR as f64).round() as usize;
    "#".repeat(n)
}

/// Plain-text rendering: one row per attribute with a bar for the score
/// (global, contextual) or diverging bars for the contributions (local).
pub fn render_table(report: &ExplanationReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:?} explanation, score {}, mode {:?}", report.level, report.score.name(), report.mode);
    let _ = writeln!(out, ", outcome {} in {{{}}}", report.outcome, report.positive.join(","));
    if !report.context.is_empty() {
        let _ = writeln!(out, "context: {}", report.context);
    }
    if let Some(p) = &report.prediction {
        let _ = writeln!(out, "prediction: {p}");
    }
    let width = report
        .entries
        .iter()
        .map(|e| e.attribute.chars().count())
        .max()
        .unwrap_or(0)
        .max(9);
    for e in &report.entries {
        let name = format!("{:<width$}", e.attribute);
        if let Some(err) = &e.error {
            let _ = writeln!(out, "{name}  error {}: {}", err.code, err.message);
            continue;
        }
        match (report.level, &e.contributions) {
            (Level::Local, Some(c)) => {
                let _ = writeln!(
                    out,
                    "{name}  {:>BAR$}|{:<BAR$}  -{:.4} +{:.4}",
                    bar(c.negative),
                    bar(c.positive),
                    c.negative,
                    c.positive
                );
            }
            _ => {
                let pair = match (&e.x, &e.x_prime) {
                    (Some(x), Some(xp)) => format!("{x} vs {xp}"),
                    _ => "-".to_string(),
                };
                let _ = write!(out, "{name}  {:<BAR$}  {:.4}  {pair}", bar(e.score), e.score);
                if let Some(b) = &e.bounds {
                    let _ = write!(out, "  [{:.4}, {:.4}]", b.lower, b.upper);
                }
                out.push('\n');
            }
        }
    }
    out
}
