//! Fixture models and seeded random model generators.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::CausalGraph;
use crate::oracle::{Exogenous, Scm};
use crate::schema::{Schema, Variable};

const F1: &str = include_str!("../../fixtures/f1.json");

/// Confounded monotone fixture: `Z→X`, `Z→O`, `X→O` with three fair coins.
pub fn f1() -> Scm {
    Scm::from_json(F1).expect("bundled fixture is valid")
}

/// F1 with the `Z→O` edge removed (`O := X or U_O`).
pub fn f1_unconfounded() -> Scm {
    let mut file: crate::oracle::ScmFile = serde_json::from_str(F1).expect("bundled fixture");
    file.graph.edges.retain(|(p, c)| !(p == "Z" && c == "O"));
    file.equations
        .insert("O".into(), "if X == 1 or U_O == 1 then 1 else 0".into());
    Scm::from_file(file).expect("valid variant")
}

pub fn f1_json() -> &'static str {
    F1
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Random distribution over `n` values with weights in `1..=8`.
pub(crate) fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<(String, f64)> {
    let w: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(1u32..=8))).collect();
    let total: f64 = w.iter().sum();
    labels(n).into_iter().zip(w.into_iter().map(|x| x / total)).collect()
}

/// Settings for [`random_scm`].
#[derive(Debug, Clone)]
pub struct RandomScmConfig {
    /// Endogenous variables other than the outcome `O`.
    pub n_features: usize,
    pub edge_prob: f64,
    /// Largest feature domain; the outcome is always binary.
    pub max_domain: usize,
    /// Mechanisms non-decreasing in every parent for each exogenous value.
    pub monotone: bool,
    /// Adds a feature `N` that is a child of other features but no
    /// ancestor of `O`.
    pub with_null_feature: bool,
}

impl Default for RandomScmConfig {
    fn default() -> Self {
        RandomScmConfig {
            n_features: 4,
            edge_prob: 0.5,
            max_domain: 2,
            monotone: false,
            with_null_feature: false,
        }
    }
}

/// Nested `case` expression for a table indexed by the parents' codes.
fn table_expr(parents: &[(String, usize)], leaf: &mut dyn FnMut() -> usize) -> String {
    match parents.split_first() {
        None => leaf().to_string(),
        Some(((name, size), rest)) => {
            let mut s = format!("case {name} of ");
            for v in 0..size - 1 {
                let _ = write!(s, "{v} -> ({}); ", table_expr(rest, leaf));
            }
            let _ = write!(s, "default -> ({})", table_expr(rest, leaf));
            s
        }
    }
}

/// `min(size-1, floor(score / step))` as nested conditionals.
fn staircase(score: &str, size: usize, step: usize) -> String {
    let mut s = String::from("0");
    for v in 1..size {
        s = format!("if {score} >= {} then {v} else ({s})", v * step);
    }
    s
}

/// Random model over features `V0..` and a binary outcome `O` that is the
/// last variable in topological order. Features are numbered in a
/// topological order. Each variable `V` has its own exogenous `U_V`.
pub fn random_scm(cfg: &RandomScmConfig, seed: u64) -> Result<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names: Vec<String> = (0..cfg.n_features).map(|i| format!("V{i}")).collect();
    let mut sizes: Vec<usize> = (0..cfg.n_features)
        .map(|_| rng.gen_range(2..=cfg.max_domain.max(2)))
        .collect();
    names.push("O".into());
    sizes.push(2);
    let o = cfg.n_features;
    let mut edges = Vec::new();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    for j in 0..names.len() {
        for i in 0..j {
            // Keep tables small: at most four parents.
            if parents[j].len() < 4 && rng.gen_bool(cfg.edge_prob) {
                parents[j].push(i);
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    if parents[o].is_empty() && cfg.n_features > 0 {
        let p = rng.gen_range(0..cfg.n_features);
        parents[o].push(p);
        edges.push((names[p].clone(), "O".into()));
    }
    if cfg.with_null_feature && cfg.n_features > 0 {
        let n = names.len();
        names.push("N".into());
        sizes.push(2);
        let mut ps: Vec<usize> = (0..cfg.n_features).filter(|_| rng.gen_bool(0.5)).collect();
        ps.truncate(3);
        for &p in &ps {
            edges.push((names[p].clone(), "N".into()));
        }
        parents.push(ps);
        debug_assert_eq!(parents.len(), n + 1);
    }

    let mut exogenous = Vec::new();
    let mut equations = BTreeMap::new();
    for (v, name) in names.iter().enumerate() {
        let u = format!("U_{name}");
        let size = sizes[v];
        let pa: Vec<(String, usize)> = parents[v]
            .iter()
            .map(|&p| (names[p].clone(), sizes[p]))
            .collect();
        let eq = if cfg.monotone {
            let weights: Vec<usize> = pa.iter().map(|_| rng.gen_range(0..=2)).collect();
            let max_score: usize = pa.iter().zip(&weights).map(|((_, s), w)| (s - 1) * w).sum();
            let step = rng.gen_range(1..=2);
            let n_u = (size - 1) * step + 1 + max_score.min(3);
            exogenous.push(Exogenous::new(u.clone(), random_dist(&mut rng, n_u))?);
            let mut score = u.clone();
            for ((p, _), w) in pa.iter().zip(&weights) {
                if *w > 0 {
                    let _ = write!(score, " + {w} * {p}");
                }
            }
            staircase(&format!("({score})"), size, step)
        } else {
            let n_u = rng.gen_range(2..=4);
            exogenous.push(Exogenous::new(u.clone(), random_dist(&mut rng, n_u))?);
            let mut s = format!("case {u} of ");
            for k in 0..n_u {
                let body = table_expr(&pa, &mut || rng.gen_range(0..size));
                if k + 1 < n_u {
                    let _ = write!(s, "{k} -> ({body}); ");
                } else {
                    let _ = write!(s, "default -> ({body})");
                }
            }
            s
        };
        equations.insert(name.clone(), eq);
    }
    let vars = names
        .iter()
        .zip(&sizes)
        .map(|(n, &s)| Variable::new(n.clone(), labels(s), true))
        .collect::<Result<Vec<_>>>()?;
    let graph = CausalGraph::new(Schema::new(vars)?, &edges)?;
    Scm::new(graph, exogenous, &equations)
}

/// Settings for the six-feature credit model.
#[derive(Debug, Clone)]
pub struct GermanSynConfig {
    /// Probability that the effect of `Age` on `Status` is reversed for an
    /// individual.
    pub violation: f64,
}

impl Default for GermanSynConfig {
    fn default() -> Self {
        GermanSynConfig { violation: 0.0 }
    }
}

/// Features `Age, Sex, Status, Savings, Housing, Duration` and a five-level
/// credit score `O` computed by a deterministic decision rule over
/// `Status, Savings, Housing, Duration`.
pub struct GermanSyn {
    pub scm: Scm,
    /// Black-box inputs.
    pub inputs: Vec<String>,
    /// Expression over `inputs` computing the credit score.
    pub decision: String,
    /// Score levels, ascending.
    pub levels: Vec<String>,
    /// Smallest positive level.
    pub threshold: String,
}

pub const GERMAN_DECISION: &str = "case Status of \
     0 -> (if 2 * Savings + Housing + Duration >= 4 then 0.5 else (if 2 * Savings + Housing >= 2 then 0.25 else 0)); \
     1 -> (if 2 * Savings + Housing + Duration >= 4 then 0.75 else (if Savings + Housing + Duration >= 2 then 0.5 else 0.25)); \
     default -> (if Savings + Housing >= 2 then 1 else (if Savings + Housing + Duration >= 1 then 0.75 else 0.5))";

/// Probability that a mediated feature ignores its parents and takes a
/// uniformly drawn value, so every value occurs in every parent stratum.
pub const GERMAN_RESET: f64 = 0.15;

/// Reset variable over `0..size` plus a final "keep" label.
fn reset(size: usize) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = (0..size).map(|v| (v.to_string(), GERMAN_RESET / size as f64)).collect();
    out.push((size.to_string(), 1.0 - GERMAN_RESET));
    out
}

fn with_reset(r: &str, size: usize, mechanism: &str) -> String {
    format!("if {r} < {size} then {r} else ({mechanism})")
}

pub fn german_syn(cfg: &GermanSynConfig) -> Result<GermanSyn> {
    let v = cfg.violation;
    if !(0.0..=1.0).contains(&v) {
        return Err(crate::error::Error::Model(
            "violation probability must lie in [0, 1]".into(),
        ));
    }
    let d = |pairs: &[(&str, f64)]| -> Vec<(String, f64)> {
        pairs.iter().map(|(k, p)| (k.to_string(), *p)).collect()
    };
    let exogenous = vec![
        Exogenous::new("U_Age", d(&[("0", 0.68), ("1", 0.23), ("2", 0.09)]))?,
        Exogenous::new("U_Sex", d(&[("0", 0.5), ("1", 0.5)]))?,
        Exogenous::new("U_Status", d(&[("0", 0.44), ("1", 0.24), ("2", 0.26), ("3", 0.06)]))?,
        Exogenous::new("U_Flip", d(&[("0", 1.0 - v), ("1", v)]))?,
        Exogenous::new("U_Savings", d(&[("0", 0.31), ("1", 0.42), ("2", 0.27)]))?,
        Exogenous::new("U_Housing", d(&[("0", 0.52), ("1", 0.27), ("2", 0.21)]))?,
        Exogenous::new("U_Duration", d(&[("0", 0.09), ("1", 0.91)]))?,
        Exogenous::new("R_Status", reset(3))?,
        Exogenous::new("R_Savings", reset(3))?,
        Exogenous::new("R_Housing", reset(2))?,
    ];
    let mut equations = BTreeMap::new();
    equations.insert("Age".to_string(), "U_Age".to_string());
    equations.insert("Sex".to_string(), "U_Sex".to_string());
    equations.insert(
        "Status".to_string(),
        with_reset(
            "R_Status",
            3,
            &staircase("((if U_Flip == 1 then 2 - Age else Age) + Sex + U_Status)", 3, 2),
        ),
    );
    equations.insert(
        "Savings".to_string(),
        with_reset("R_Savings", 3, &staircase("(Age + U_Savings)", 3, 1)),
    );
    equations.insert(
        "Housing".to_string(),
        with_reset("R_Housing", 2, "if Status + U_Housing >= 3 then 1 else 0"),
    );
    equations.insert("Duration".to_string(), "U_Duration".to_string());
    equations.insert("O".to_string(), GERMAN_DECISION.to_string());

    let levels: Vec<String> = ["0", "0.25", "0.5", "0.75", "1"].iter().map(|s| s.to_string()).collect();
    let vars = vec![
        Variable::new("Age", labels(3), true)?,
        Variable::new("Sex", labels(2), true)?,
        Variable::new("Status", labels(3), true)?,
        Variable::new("Savings", labels(3), true)?,
        Variable::new("Housing", labels(2), true)?,
        Variable::new("Duration", labels(2), true)?,
        Variable::new("O", levels.clone(), true)?,
    ];
    let inputs: Vec<String> = ["Status", "Savings", "Housing", "Duration"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut edges: Vec<(String, String)> = [
        ("Age", "Status"),
        ("Sex", "Status"),
        ("Age", "Savings"),
        ("Status", "Housing"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    for i in &inputs {
        edges.push((i.clone(), "O".into()));
    }
    let graph = CausalGraph::new(Schema::new(vars)?, &edges)?;
    Ok(GermanSyn {
        scm: Scm::new(graph, exogenous, &equations)?,
        inputs,
        decision: GERMAN_DECISION.to_string(),
        levels,
        threshold: "0.5".into(),
    })
}

/// Picks `k` distinct items from `0..n` in increasing order.
pub(crate) fn choose_sorted(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut out: Vec<usize> = all.into_iter().take(k).collect();
    out.sort_unstable();
    out
}
