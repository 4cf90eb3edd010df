//! Decision algorithms seen only through their predictions.

mod outcome;
mod process;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::data::{Dataset, Estimator, EventSpec};
use crate::error::{Error, Result};
use crate::expr::{self, Expr, Value};
use crate::graph::CausalGraph;
use crate::oracle::{CfQuery, CfTarget, Scm};
use crate::scalar::Scalar;
use crate::schema::{Schema, Variable};

pub use outcome::{OutcomeDecl, OutcomeSpec};
pub use process::{label_to_json, ProcessBackend, DEFAULT_TIMEOUT};

/// Logistic weight: one coefficient times the numeric value (or index) of
/// the label, or one coefficient per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Linear(f64),
    PerValue(BTreeMap<String, f64>),
}

fn default_cutoff() -> f64 {
    0.5
}

/// Model file. `inputs` lists the variables the algorithm reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    /// Expression over the inputs returning an outcome value.
    Expr {
        inputs: Vec<String>,
        outcome: OutcomeDecl,
        expr: String,
    },
    /// Positive (the threshold value) iff `σ(intercept + Σ w·x) ≥ cutoff`,
    /// otherwise the most desirable negative value.
    Logistic {
        inputs: Vec<String>,
        outcome: OutcomeDecl,
        #[serde(default)]
        intercept: f64,
        weights: BTreeMap<String, Weight>,
        #[serde(default = "default_cutoff")]
        cutoff: f64,
    },
    /// External program speaking the NDJSON protocol.
    Process {
        inputs: Vec<String>,
        outcome: OutcomeDecl,
        command: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timeout_secs: Option<f64>,
    },
    /// Predictions stored in the dataset's outcome column.
    Column {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<Vec<String>>,
        outcome: OutcomeDecl,
    },
}

impl ModelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn outcome(&self) -> &OutcomeDecl {
        match self {
            ModelFile::Expr { outcome, .. }
            | ModelFile::Logistic { outcome, .. }
            | ModelFile::Process { outcome, .. }
            | ModelFile::Column { outcome, .. } => outcome,
        }
    }
}

enum Backend {
    /// Lookup built from a labeled dataset; `None` marks conflicting rows.
    Column(Option<HashMap<Vec<u32>, Option<u32>>>),
    Expr(Expr),
    Logistic {
        intercept: f64,
        /// Per input, contribution of each code.
        terms: Vec<Vec<f64>>,
        cutoff: f64,
    },
    Process(ProcessBackend),
}

/// A bound decision algorithm with a session-scoped prediction cache.
pub struct BlackBox {
    inputs: Vec<Variable>,
    outcome: OutcomeSpec,
    backend: Backend,
    cache: Mutex<HashMap<Vec<u32>, u32>>,
    file: ModelFile,
}

impl std::fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlackBox")
            .field("inputs", &self.input_names())
            .field("outcome", &self.outcome.name())
            .field("file", &self.file)
            .finish()
    }
}

fn numeric_or_index(label: &str, code: usize) -> f64 {
    label.trim().parse::<f64>().unwrap_or(code as f64)
}

impl BlackBox {
    /// Resolves a model file against the features' schema.
    pub fn bind(file: ModelFile, schema: &Schema) -> Result<Self> {
        let outcome = OutcomeSpec::from_decl(file.outcome(), Some(schema))?;
        let input_names: Vec<String> = match &file {
            ModelFile::Expr { inputs, .. }
            | ModelFile::Logistic { inputs, .. }
            | ModelFile::Process { inputs, .. } => inputs.clone(),
            ModelFile::Column { inputs, .. } => match inputs {
                Some(i) => i.clone(),
                None => schema
                    .names()
                    .filter(|n| *n != outcome.name())
                    .map(String::from)
                    .collect(),
            },
        };
        if input_names.is_empty() {
            return Err(Error::Model("black box needs at least one input".into()));
        }
        let mut inputs = Vec::with_capacity(input_names.len());
        for name in &input_names {
            if name == outcome.name() {
                return Err(Error::Model(format!("outcome `{name}` cannot be an input")));
            }
            if inputs.iter().any(|v: &Variable| v.name() == name) {
                return Err(Error::Model(format!("input `{name}` listed twice")));
            }
            inputs.push(schema.get(name)?.clone());
        }
        let backend = match &file {
            ModelFile::Expr { expr: src, .. } => {
                let e = expr::parse(src)?;
                e.check_bound(input_names.iter().map(String::as_str))?;
                Backend::Expr(e)
            }
            ModelFile::Logistic {
                intercept,
                weights,
                cutoff,
                ..
            } => {
                if !(0.0..=1.0).contains(cutoff) {
                    return Err(Error::Model("cutoff must lie in [0, 1]".into()));
                }
                for name in weights.keys() {
                    if !input_names.contains(name) {
                        return Err(Error::Model(format!("weight for non-input `{name}`")));
                    }
                }
                let terms = inputs
                    .iter()
                    .map(|v| match weights.get(v.name()) {
                        None => Ok(vec![0.0; v.len()]),
                        Some(Weight::Linear(w)) => Ok(v
                            .domain()
                            .iter()
                            .enumerate()
                            .map(|(c, l)| w * numeric_or_index(l, c))
                            .collect()),
                        Some(Weight::PerValue(m)) => {
                            for l in m.keys() {
                                v.code(l)?;
                            }
                            Ok(v.domain().iter().map(|l| m.get(l).copied().unwrap_or(0.0)).collect())
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Backend::Logistic {
                    intercept: *intercept,
                    terms,
                    cutoff: *cutoff,
                }
            }
            ModelFile::Process {
                command,
                timeout_secs,
                ..
            } => {
                let timeout = match timeout_secs {
                    Some(s) if s.is_finite() && *s > 0.0 => Duration::from_secs_f64(*s),
                    Some(_) => return Err(Error::Model("timeout must be positive".into())),
                    None => DEFAULT_TIMEOUT,
                };
                Backend::Process(ProcessBackend::new(command.clone(), timeout)?)
            }
            ModelFile::Column { .. } => Backend::Column(None),
        };
        Ok(BlackBox {
            inputs,
            outcome,
            backend,
            cache: Mutex::new(HashMap::new()),
            file,
        })
    }

    pub fn model_file(&self) -> &ModelFile {
        &self.file
    }

    pub fn inputs(&self) -> &[Variable] {
        &self.inputs
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|v| v.name().to_string()).collect()
    }

    pub fn outcome(&self) -> &OutcomeSpec {
        &self.outcome
    }

    pub fn is_column(&self) -> bool {
        matches!(self.backend, Backend::Column(_))
    }

    /// For the column backend: records the stored predictions so that new
    /// feature vectors seen in `data` can be answered.
    pub fn attach_column<S: Scalar>(&mut self, data: &Dataset<S>) -> Result<()> {
        if !self.is_column() {
            return Ok(());
        }
        let o = data.schema().id(self.outcome.name())?;
        let map = self.input_maps(data.schema())?;
        let mut table: HashMap<Vec<u32>, Option<u32>> = HashMap::new();
        let o_map = code_map(data.schema().var(o), self.outcome.variable())?;
        for (row, _) in data.rows() {
            let key: Vec<u32> = map.iter().map(|(id, m)| m[row[*id] as usize]).collect();
            let value = o_map[row[o] as usize];
            table
                .entry(key)
                .and_modify(|e| {
                    if *e != Some(value) {
                        *e = None;
                    }
                })
                .or_insert(Some(value));
        }
        self.backend = Backend::Column(Some(table));
        Ok(())
    }

    fn input_maps(&self, schema: &Schema) -> Result<Vec<(usize, Vec<u32>)>> {
        self.inputs
            .iter()
            .map(|v| {
                let id = schema.id(v.name())?;
                Ok((id, code_map(schema.var(id), v)?))
            })
            .collect()
    }

    fn expr_value(&self, i: usize, code: u32) -> Value {
        let v = &self.inputs[i];
        let label = v.label(code as usize);
        if v.ordered() {
            Value::ordered_sym(label, Arc::from(v.domain().to_vec()))
        } else {
            Value::sym(label)
        }
    }

    fn compute(&self, misses: &[Vec<u32>]) -> Result<Vec<u32>> {
        let outcome = self.outcome.variable();
        match &self.backend {
            Backend::Column(table) => misses
                .iter()
                .enumerate()
                .map(|(row, key)| match table.as_ref().and_then(|t| t.get(key)) {
                    Some(Some(c)) => Ok(*c),
                    Some(None) => Err(Error::BlackBox {
                        row,
                        message: "stored predictions disagree for this feature vector".into(),
                    }),
                    None => Err(Error::BlackBox {
                        row,
                        message: "feature vector has no stored prediction".into(),
                    }),
                })
                .collect(),
            Backend::Expr(e) => misses
                .iter()
                .enumerate()
                .map(|(row, key)| {
                    let lookup = |name: &str| {
                        let i = self.inputs.iter().position(|v| v.name() == name)?;
                        Some(self.expr_value(i, key[i]))
                    };
                    let v = e.evaluate_with(&lookup).map_err(|err| Error::BlackBox {
                        row,
                        message: err.to_string(),
                    })?;
                    v.position_in(outcome.domain())
                        .map(|c| c as u32)
                        .ok_or_else(|| Error::BlackBox {
                            row,
                            message: format!("output `{v}` is not a value of `{}`", outcome.name()),
                        })
                })
                .collect(),
            Backend::Logistic {
                intercept,
                terms,
                cutoff,
            } => Ok(misses
                .iter()
                .map(|key| {
                    let s = key
                        .iter()
                        .zip(terms)
                        .fold(*intercept, |acc, (&c, t)| acc + t[c as usize]);
                    let p = 1.0 / (1.0 + (-s).exp());
                    if p >= *cutoff {
                        self.outcome.threshold_code() as u32
                    } else {
                        self.outcome.best_negative_code() as u32
                    }
                })
                .collect()),
            Backend::Process(proc) => {
                let batch: Vec<Map<String, Json>> = misses
                    .iter()
                    .map(|key| {
                        self.inputs
                            .iter()
                            .zip(key)
                            .map(|(v, &c)| (v.name().to_string(), label_to_json(v.label(c as usize))))
                            .collect()
                    })
                    .collect();
                let outputs = proc.call(&batch)?;
                outputs
                    .into_iter()
                    .enumerate()
                    .map(|(row, out)| {
                        let label = match &out {
                            Json::String(s) => Some(Value::sym(s.clone())),
                            Json::Number(n) => n.as_f64().map(Value::Num),
                            Json::Bool(b) => Some(Value::Bool(*b)),
                            _ => None,
                        };
                        label
                            .and_then(|v| v.position_in(outcome.domain()))
                            .map(|c| c as u32)
                            .ok_or_else(|| Error::BlackBox {
                                row,
                                message: format!(
                                    "output {out} is not a value of `{}`",
                                    outcome.name()
                                ),
                            })
                    })
                    .collect()
            }
        }
    }

    /// Predicts outcome codes for rows of input codes (in `inputs` order).
    /// Errors name the first row with the failing feature vector.
    pub fn predict_codes(&self, rows: &[Vec<u32>]) -> Result<Vec<u32>> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != self.inputs.len()
                || row.iter().zip(&self.inputs).any(|(&c, v)| c as usize >= v.len())
            {
                return Err(Error::BlackBox {
                    row: r,
                    message: "feature vector does not match the inputs".into(),
                });
            }
        }
        let mut misses: Vec<Vec<u32>> = Vec::new();
        let mut first_row: Vec<usize> = Vec::new();
        {
            let cache = self.cache.lock().unwrap_or_else(|p| p.into_inner());
            let mut seen = HashMap::new();
            for (r, row) in rows.iter().enumerate() {
                if !cache.contains_key(row) && !seen.contains_key(row) {
                    seen.insert(row.clone(), ());
                    misses.push(row.clone());
                    first_row.push(r);
                }
            }
        }
        if !misses.is_empty() {
            let computed = self.compute(&misses).map_err(|e| match e {
                Error::BlackBox { row, message } => Error::BlackBox {
                    row: first_row.get(row).copied().unwrap_or(row),
                    message,
                },
                other => other,
            })?;
            let mut cache = self.cache.lock().unwrap_or_else(|p| p.into_inner());
            for (k, v) in misses.into_iter().zip(computed) {
                cache.insert(k, v);
            }
        }
        let cache = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        Ok(rows.iter().map(|r| cache[r]).collect())
    }

    /// Predicts labels for feature assignments given by name.
    pub fn predict(&self, rows: &[BTreeMap<String, String>]) -> Result<Vec<String>> {
        let codes = rows
            .iter()
            .enumerate()
            .map(|(r, a)| {
                self.inputs
                    .iter()
                    .map(|v| {
                        let label = a.get(v.name()).ok_or_else(|| Error::BlackBox {
                            row: r,
                            message: format!("missing feature `{}`", v.name()),
                        })?;
                        v.code(label).map(|c| c as u32)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .predict_codes(&codes)?
            .into_iter()
            .map(|c| self.outcome.variable().label(c as usize).to_string())
            .collect())
    }

    /// Copy of `data` whose outcome column holds this algorithm's
    /// predictions; weights are kept.
    pub fn label_dataset<S: Scalar>(&self, data: &Dataset<S>) -> Result<Dataset<S>> {
        if self.is_column() {
            let id = data.schema().id(self.outcome.name()).map_err(|_| {
                Error::Dataset(format!(
                    "prediction column `{}` missing from dataset",
                    self.outcome.name()
                ))
            })?;
            code_map(data.schema().var(id), self.outcome.variable())?;
            return Ok(data.clone());
        }
        let map = self.input_maps(data.schema())?;
        let keys: Vec<Vec<u32>> = data
            .rows()
            .map(|(row, _)| map.iter().map(|(id, m)| m[row[*id] as usize]).collect())
            .collect();
        let column = self.predict_codes(&keys)?;
        data.with_column(self.outcome.variable().clone(), &column)
    }

    /// Graph with the outcome added as a child of the inputs.
    pub fn graph_with_outcome(&self, graph: &CausalGraph) -> Result<CausalGraph> {
        graph.with_outcome(self.outcome.variable().clone(), &self.input_names())
    }

    /// Model in which the outcome is replaced by this algorithm applied to
    /// the model's own variables.
    pub fn compose(&self, scm: &Scm) -> Result<Scm> {
        let map = self.input_maps(scm.schema())?;
        let names = self.input_names();
        // Fill the cache in one batch before the table is built.
        let sizes: Vec<usize> = map.iter().map(|(id, _)| scm.schema().var(*id).len()).collect();
        let total: usize = sizes.iter().product();
        if total <= crate::oracle::MAX_TABLE_ENTRIES {
            let mut all = Vec::with_capacity(total);
            let mut codes = vec![0u32; sizes.len()];
            for _ in 0..total {
                all.push(codes.iter().zip(&map).map(|(&c, (_, m))| m[c as usize]).collect());
                for i in (0..codes.len()).rev() {
                    codes[i] += 1;
                    if (codes[i] as usize) < sizes[i] {
                        break;
                    }
                    codes[i] = 0;
                }
            }
            self.predict_codes(&all)?;
        }
        let mut f = |codes: &[u32]| -> Result<u32> {
            let key: Vec<u32> = codes.iter().zip(&map).map(|(&c, (_, m))| m[c as usize]).collect();
            Ok(self.predict_codes(&[key])?[0])
        };
        scm.compose(self.outcome.variable().clone(), &names, &mut f)
    }
}

impl OutcomeSpec {
    pub(crate) fn threshold_code(&self) -> usize {
        self.variable().code(self.threshold_label()).expect("threshold in domain")
    }
}

/// Translates codes of `from` into codes of `to` by label.
fn code_map(from: &Variable, to: &Variable) -> Result<Vec<u32>> {
    from.domain()
        .iter()
        .map(|l| to.code(l).map(|c| c as u32))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| {
            Error::Schema(format!(
                "domain of `{}` in the data does not match the model",
                from.name()
            ))
        })
}

/// Values of `x_var`, best first, ranked by
/// `Pr(O ∈ O^≥ | do(x_var = v), context)` under the default adjustment
/// set. Ties keep the declared order (later values first).
pub fn infer_value_order<S: Scalar>(
    est: &Estimator<'_, S>,
    graph: &CausalGraph,
    outcome: &OutcomeSpec,
    x_var: &str,
    context: &EventSpec,
) -> Result<Vec<String>> {
    let var = est.schema().get(x_var)?.clone();
    let ctx: Vec<String> = context.vars().map(String::from).collect();
    let adj = graph.default_adjustment_set(&[x_var.to_string()], &[outcome.name().to_string()], &ctx)?;
    let adj: Vec<String> = adj.0.into_iter().collect();
    let pos = outcome.positive_event();
    let mut scored = Vec::with_capacity(var.len());
    for (code, label) in var.domain().iter().enumerate() {
        let t = EventSpec::new().with(x_var, label.clone());
        let p = est.do_prob(graph, &pos, &t, context, &adj)?;
        scored.push((p, code, label.clone()));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.1.cmp(&a.1))
    });
    Ok(scored.into_iter().map(|(_, _, l)| l).collect())
}

/// Declared order of `x_var`, best first.
pub fn declared_order(schema: &Schema, x_var: &str) -> Result<Vec<String>> {
    Ok(schema.get(x_var)?.domain().iter().rev().cloned().collect())
}

/// `Pr(O_{X←x} ∈ O^< | O ∈ O^≥, X = x', context)` in `scm` with the outcome
/// replaced by `bb`.
pub fn monotonicity_violation(
    bb: &BlackBox,
    scm: &Scm,
    x_var: &str,
    x: &str,
    x_prime: &str,
    context: &EventSpec,
) -> Result<f64> {
    let composed = bb.compose(scm)?;
    let o = bb.outcome();
    composed.counterfactual_prob::<f64>(&CfQuery {
        targets: vec![CfTarget {
            intervention: EventSpec::new().with(x_var, x),
            event: o.negative_event(),
        }],
        evidence: o
            .positive_event()
            .and(&EventSpec::new().with(x_var, x_prime))
            .and(context),
    })
}
