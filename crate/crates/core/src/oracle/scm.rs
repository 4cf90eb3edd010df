use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{CompiledEvent, Dataset, EventSpec};
use crate::error::{Error, Result};
use crate::expr::{self, Expr, Value};
use crate::graph::{CausalGraph, GraphFile};
use crate::scalar::Scalar;
use crate::schema::{Schema, VarId, Variable};

/// Largest exogenous joint enumerated exactly.
pub const MAX_EXOGENOUS_CELLS: usize = 1 << 20;

/// Largest mechanism table (product of input domain sizes).
pub const MAX_TABLE_ENTRIES: usize = 1 << 22;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousDecl {
    pub name: String,
    pub dist: BTreeMap<String, f64>,
}

/// On-disk SCM document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScmFile {
    pub graph: GraphFile,
    pub exogenous: Vec<ExogenousDecl>,
    pub equations: BTreeMap<String, String>,
}

/// Discrete exogenous variable.
#[derive(Debug, Clone)]
pub struct Exogenous {
    name: String,
    values: Vec<String>,
    probs: Vec<f64>,
}

impl Exogenous {
    pub fn new(name: impl Into<String>, dist: Vec<(String, f64)>) -> Result<Self> {
        let name = name.into();
        if dist.is_empty() {
            return Err(Error::Model(format!("exogenous `{name}` has an empty distribution")));
        }
        let mut seen = BTreeSet::new();
        for (v, p) in &dist {
            if !seen.insert(v.clone()) {
                return Err(Error::Model(format!("value `{v}` repeated in `{name}`")));
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Model(format!(
                    "probability of `{name}={v}` must be finite and non-negative"
                )));
            }
        }
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!(
                "distribution of `{name}` sums to {total}, not 1"
            )));
        }
        let (values, probs) = dist.into_iter().unzip();
        Ok(Exogenous { name, values, probs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Input {
    Endo(VarId),
    Exo(usize),
}

/// Structural equation compiled to a lookup table over its inputs.
#[derive(Debug, Clone)]
struct Mechanism {
    inputs: Vec<Input>,
    strides: Vec<usize>,
    table: Vec<u32>,
}

impl Mechanism {
    #[inline]
    fn eval(&self, endo: &[u32], exo: &[u32]) -> u32 {
        let mut idx = 0;
        for (inp, s) in self.inputs.iter().zip(&self.strides) {
            let c = match *inp {
                Input::Endo(v) => endo[v],
                Input::Exo(e) => exo[e],
            };
            idx += c as usize * s;
        }
        self.table[idx]
    }
}

/// Counterfactual target: an event that must hold in the model where
/// `intervention` (a full assignment to its variables) is enforced. An
/// empty intervention denotes the factual world.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfTarget {
    #[serde(default)]
    pub intervention: EventSpec,
    pub event: EventSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfQuery {
    pub targets: Vec<CfTarget>,
    #[serde(default)]
    pub evidence: EventSpec,
}

struct Enumeration {
    /// Factual endogenous codes, one row per exogenous cell.
    factual: Vec<u32>,
}

/// Fully specified causal model over finite domains.
pub struct Scm {
    graph: CausalGraph,
    exogenous: Vec<Exogenous>,
    mechanisms: Vec<Mechanism>,
    sources: Vec<Option<String>>,
    orders: Vec<Option<Arc<[String]>>>,
    n_cells: Option<usize>,
    enumeration: OnceLock<Arc<Enumeration>>,
}

impl std::fmt::Debug for Scm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scm")
            .field("graph", &self.graph.to_string())
            .field("exogenous", &self.exogenous)
            .field("sources", &self.sources)
            .finish()
    }
}

impl Clone for Scm {
    fn clone(&self) -> Self {
        Scm {
            graph: self.graph.clone(),
            exogenous: self.exogenous.clone(),
            mechanisms: self.mechanisms.clone(),
            sources: self.sources.clone(),
            orders: self.orders.clone(),
            n_cells: self.n_cells,
            enumeration: OnceLock::new(),
        }
    }
}

fn exo_cells(exo: &[Exogenous]) -> Option<usize> {
    exo.iter()
        .try_fold(1usize, |acc, e| acc.checked_mul(e.values.len()))
        .filter(|&n| n <= MAX_EXOGENOUS_CELLS)
}

fn var_orders(schema: &Schema) -> Vec<Option<Arc<[String]>>> {
    schema
        .variables()
        .iter()
        .map(|v| v.ordered().then(|| Arc::from(v.domain().to_vec())))
        .collect()
}

fn build_table(
    var: &Variable,
    inputs: &[Input],
    size: &dyn Fn(Input) -> usize,
    f: &mut dyn FnMut(&[u32]) -> Result<u32>,
) -> Result<(Vec<usize>, Vec<u32>)> {
    let sizes: Vec<usize> = inputs.iter().map(|&i| size(i)).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&n| n <= MAX_TABLE_ENTRIES)
        .ok_or_else(|| {
            Error::Limit(format!(
                "mechanism of `{}` has more than {MAX_TABLE_ENTRIES} input combinations",
                var.name()
            ))
        })?;
    let mut strides = vec![1usize; inputs.len()];
    for i in (0..inputs.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    let mut table = Vec::with_capacity(total);
    let mut codes = vec![0u32; inputs.len()];
    for _ in 0..total {
        table.push(f(&codes)?);
        for i in (0..codes.len()).rev() {
            codes[i] += 1;
            if (codes[i] as usize) < sizes[i] {
                break;
            }
            codes[i] = 0;
        }
    }
    Ok((strides, table))
}

impl Scm {
    /// Builds a model whose equations are expression sources.
    pub fn new(
        graph: CausalGraph,
        exogenous: Vec<Exogenous>,
        equations: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let schema = graph.schema().clone();
        let mut exo_index = BTreeMap::new();
        for (i, e) in exogenous.iter().enumerate() {
            if schema.contains(&e.name) || exo_index.insert(e.name.clone(), i).is_some() {
                return Err(Error::Model(format!("exogenous name `{}` is not unique", e.name)));
            }
        }
        for name in equations.keys() {
            schema.id(name)?;
        }
        let orders = var_orders(&schema);
        let mut mechanisms = Vec::with_capacity(schema.len());
        let mut sources = Vec::with_capacity(schema.len());
        for (id, var) in schema.variables().iter().enumerate() {
            let src = equations
                .get(var.name())
                .ok_or_else(|| Error::Model(format!("no equation for `{}`", var.name())))?;
            let e: Expr = expr::parse(src)?;
            let mut inputs = Vec::new();
            for name in e.free_vars() {
                if let Some(&x) = exo_index.get(&name) {
                    inputs.push(Input::Exo(x));
                } else if let Ok(p) = schema.id(&name) {
                    if !graph.parents_of(id).contains(&p) {
                        return Err(Error::Model(format!(
                            "equation for `{}` references `{name}`, which is not a parent",
                            var.name()
                        )));
                    }
                    inputs.push(Input::Endo(p));
                } else {
                    return Err(Error::Model(format!(
                        "equation for `{}`: {}",
                        var.name(),
                        expr::ExprError::Unbound(name)
                    )));
                }
            }
            let names: Vec<&str> = inputs
                .iter()
                .map(|i| match *i {
                    Input::Endo(v) => schema.var(v).name(),
                    Input::Exo(x) => exogenous[x].name.as_str(),
                })
                .collect();
            let size = |i: Input| match i {
                Input::Endo(v) => schema.var(v).len(),
                Input::Exo(x) => exogenous[x].values.len(),
            };
            let mut eval = |codes: &[u32]| -> Result<u32> {
                let lookup = |name: &str| -> Option<Value> {
                    let k = names.iter().position(|n| *n == name)?;
                    let c = codes[k] as usize;
                    Some(match inputs[k] {
                        Input::Endo(v) => {
                            let label = schema.var(v).label(c);
                            match &orders[v] {
                                Some(o) => Value::ordered_sym(label, Arc::clone(o)),
                                None => Value::sym(label),
                            }
                        }
                        Input::Exo(x) => Value::sym(exogenous[x].values[c].clone()),
                    })
                };
                let v = e.evaluate_with(&lookup)?;
                v.position_in(var.domain()).map(|c| c as u32).ok_or_else(|| {
                    Error::Model(format!(
                        "equation for `{}` yields `{v}`, outside its domain",
                        var.name()
                    ))
                })
            };
            let (strides, table) = build_table(var, &inputs, &size, &mut eval)?;
            mechanisms.push(Mechanism {
                inputs,
                strides,
                table,
            });
            sources.push(Some(src.clone()));
        }
        let n_cells = exo_cells(&exogenous);
        Ok(Scm {
            graph,
            exogenous,
            mechanisms,
            sources,
            orders,
            n_cells,
            enumeration: OnceLock::new(),
        })
    }

    pub fn from_file(file: ScmFile) -> Result<Self> {
        let graph = CausalGraph::from_file(file.graph)?;
        let exo = file
            .exogenous
            .into_iter()
            .map(|d| Exogenous::new(d.name, d.dist.into_iter().collect()))
            .collect::<Result<Vec<_>>>()?;
        Scm::new(graph, exo, &file.equations)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Scm::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Scm::from_json(&std::fs::read_to_string(path)?)
    }

    /// Serializable form; fails for models with composed mechanisms.
    pub fn to_file(&self) -> Result<ScmFile> {
        let mut equations = BTreeMap::new();
        for (id, src) in self.sources.iter().enumerate() {
            let src = src.as_ref().ok_or_else(|| {
                Error::Model(format!(
                    "mechanism of `{}` has no expression source",
                    self.graph.name(id)
                ))
            })?;
            equations.insert(self.graph.name(id).to_string(), src.clone());
        }
        Ok(ScmFile {
            graph: self.graph.to_file(),
            exogenous: self
                .exogenous
                .iter()
                .map(|e| ExogenousDecl {
                    name: e.name.clone(),
                    dist: e.values.iter().cloned().zip(e.probs.iter().copied()).collect(),
                })
                .collect(),
            equations,
        })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn schema(&self) -> &Schema {
        self.graph.schema()
    }

    pub fn exogenous(&self) -> &[Exogenous] {
        &self.exogenous
    }

    /// Adds (or replaces) `outcome` as a deterministic function of `inputs`.
    /// `f` receives the input codes in the order given.
    pub fn compose(
        &self,
        outcome: Variable,
        inputs: &[String],
        f: &mut dyn FnMut(&[u32]) -> Result<u32>,
    ) -> Result<Scm> {
        let graph = self.graph.with_outcome(outcome.clone(), inputs)?;
        let schema = graph.schema();
        let id = schema.id(outcome.name())?;
        let ins: Vec<Input> = inputs
            .iter()
            .map(|n| schema.id(n).map(Input::Endo))
            .collect::<Result<_>>()?;
        let size = |i: Input| match i {
            Input::Endo(v) => schema.var(v).len(),
            Input::Exo(_) => unreachable!(),
        };
        let mut checked = |codes: &[u32]| -> Result<u32> {
            let c = f(codes)?;
            if c as usize >= outcome.len() {
                return Err(Error::Model(format!(
                    "composed mechanism for `{}` returned code {c}",
                    outcome.name()
                )));
            }
            Ok(c)
        };
        let (strides, table) = build_table(&outcome, &ins, &size, &mut checked)?;
        let mech = Mechanism {
            inputs: ins,
            strides,
            table,
        };
        let mut mechanisms = self.mechanisms.clone();
        let mut sources = self.sources.clone();
        if id < mechanisms.len() {
            mechanisms[id] = mech;
            sources[id] = None;
        } else {
            mechanisms.push(mech);
            sources.push(None);
        }
        Ok(Scm {
            orders: var_orders(schema),
            graph,
            exogenous: self.exogenous.clone(),
            mechanisms,
            sources,
            n_cells: self.n_cells,
            enumeration: OnceLock::new(),
        })
    }

    /// Number of exogenous cells, if within [`MAX_EXOGENOUS_CELLS`].
    pub fn exogenous_cells(&self) -> Option<usize> {
        self.n_cells
    }

    fn require_cells(&self) -> Result<usize> {
        self.n_cells.ok_or_else(|| {
            Error::Limit(format!(
                "exogenous joint exceeds {MAX_EXOGENOUS_CELLS} cells"
            ))
        })
    }

    fn exo_codes(&self, mut cell: usize, out: &mut [u32]) {
        for i in (0..self.exogenous.len()).rev() {
            let n = self.exogenous[i].values.len();
            out[i] = (cell % n) as u32;
            cell /= n;
        }
    }

    fn cell_prob<S: Scalar>(&self, exo: &[u32]) -> S {
        self.exogenous
            .iter()
            .zip(exo)
            .fold(S::one(), |acc, (e, &c)| acc * S::from_f64(e.probs[c as usize]))
    }

    fn solve(&self, exo: &[u32], out: &mut [u32]) {
        for &v in self.graph.topological_order() {
            out[v] = self.mechanisms[v].eval(out, exo);
        }
    }

    fn enumeration(&self) -> Result<Arc<Enumeration>> {
        let n = self.require_cells()?;
        Ok(Arc::clone(self.enumeration.get_or_init(|| {
            let width = self.schema().len();
            let mut factual = vec![0u32; n * width];
            let mut exo = vec![0u32; self.exogenous.len()];
            for (cell, row) in factual.chunks_mut(width).enumerate() {
                self.exo_codes(cell, &mut exo);
                self.solve(&exo, row);
            }
            Arc::new(Enumeration { factual })
        })))
    }

    /// One row per exogenous cell, weighted by its probability.
    pub fn exhaustive_joint<S: Scalar>(&self) -> Result<Dataset<S>> {
        let n = self.require_cells()?;
        let en = self.enumeration()?;
        let mut exo = vec![0u32; self.exogenous.len()];
        let weights = (0..n)
            .map(|cell| {
                self.exo_codes(cell, &mut exo);
                self.cell_prob::<S>(&exo)
            })
            .collect();
        let mut d = Dataset::from_codes(self.graph.shared_schema(), en.factual.clone(), Some(weights))?;
        d.provenance = Some("exhaustive joint".into());
        Ok(d)
    }

    fn draw_exogenous(&self, rng: &mut ChaCha8Rng, out: &mut [u32]) {
        for (i, e) in self.exogenous.iter().enumerate() {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = e.probs.len() - 1;
            for (j, p) in e.probs.iter().enumerate() {
                acc += p;
                if r < acc {
                    pick = j;
                    break;
                }
            }
            out[i] = pick as u32;
        }
    }

    /// `n` i.i.d. rows. The generator is ChaCha8 seeded with `seed`; each row
    /// draws one uniform `f64` per exogenous variable in declaration order and
    /// inverts its CDF.
    pub fn sample_dataset(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::Dataset("sample size must be at least 1".into()));
        }
        let width = self.schema().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exo = vec![0u32; self.exogenous.len()];
        let mut codes = vec![0u32; n * width];
        for row in codes.chunks_mut(width) {
            self.draw_exogenous(&mut rng, &mut exo);
            self.solve(&exo, row);
        }
        let mut d = Dataset::from_codes(self.graph.shared_schema(), codes, None)?;
        d.provenance = Some(format!("sampled n={n} seed={seed}"));
        Ok(d)
    }

    fn compile_target(&self, t: &CfTarget) -> Result<CompiledTarget> {
        let schema = self.schema();
        let mut fixed = Vec::new();
        for (name, values) in t.intervention.iter() {
            if values.len() != 1 {
                return Err(Error::Query(format!(
                    "intervention must set `{name}` to exactly one value"
                )));
            }
            let id = schema.id(name)?;
            let code = schema.var(id).code(values.iter().next().unwrap())?;
            fixed.push((id, code as u32));
        }
        let ids: Vec<VarId> = fixed.iter().map(|(v, _)| *v).collect();
        let desc = self.graph.descendant_mask(&ids);
        let recompute = self
            .graph
            .topological_order()
            .iter()
            .copied()
            .filter(|&v| desc[v] && !ids.contains(&v))
            .collect();
        Ok(CompiledTarget {
            fixed,
            recompute,
            event: t.event.compile(schema)?,
        })
    }

    fn holds(&self, t: &CompiledTarget, exo: &[u32], factual: &[u32], scratch: &mut [u32]) -> bool {
        if t.fixed.is_empty() {
            return t.event.matches(factual);
        }
        scratch.copy_from_slice(factual);
        for &(v, c) in &t.fixed {
            scratch[v] = c;
        }
        for &v in &t.recompute {
            scratch[v] = self.mechanisms[v].eval(scratch, exo);
        }
        t.event.matches(scratch)
    }

    /// Exact abduction-action-prediction by enumerating exogenous cells.
    pub fn counterfactual_prob<S: Scalar>(&self, q: &CfQuery) -> Result<S> {
        let n = self.require_cells()?;
        let en = self.enumeration()?;
        let evidence = q.evidence.compile(self.schema())?;
        let targets: Vec<CompiledTarget> =
            q.targets.iter().map(|t| self.compile_target(t)).collect::<Result<_>>()?;
        let width = self.schema().len();
        let mut exo = vec![0u32; self.exogenous.len()];
        let mut scratch = vec![0u32; width];
        let (mut num, mut den) = (S::zero(), S::zero());
        for cell in 0..n {
            let factual = &en.factual[cell * width..(cell + 1) * width];
            if !evidence.matches(factual) {
                continue;
            }
            self.exo_codes(cell, &mut exo);
            let p: S = self.cell_prob(&exo);
            if p.is_zero() {
                continue;
            }
            den = den + p.clone();
            if targets
                .iter()
                .all(|t| self.holds(t, &exo, factual, &mut scratch))
            {
                num = num + p;
            }
        }
        if den.is_zero() {
            return Err(Error::ConditioningOnNull {
                event: q.evidence.to_string(),
            });
        }
        Ok(num / den)
    }

    /// Monte-Carlo version of [`Scm::counterfactual_prob`]: samples `n`
    /// exogenous draws and conditions by rejection. Returns the estimate and
    /// the number of accepted draws.
    pub fn counterfactual_prob_mc(&self, q: &CfQuery, n: usize, seed: u64) -> Result<(f64, usize)> {
        let evidence = q.evidence.compile(self.schema())?;
        let targets: Vec<CompiledTarget> =
            q.targets.iter().map(|t| self.compile_target(t)).collect::<Result<_>>()?;
        let width = self.schema().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exo = vec![0u32; self.exogenous.len()];
        let mut factual = vec![0u32; width];
        let mut scratch = vec![0u32; width];
        let (mut hits, mut kept) = (0usize, 0usize);
        for _ in 0..n {
            self.draw_exogenous(&mut rng, &mut exo);
            self.solve(&exo, &mut factual);
            if !evidence.matches(&factual) {
                continue;
            }
            kept += 1;
            if targets
                .iter()
                .all(|t| self.holds(t, &exo, &factual, &mut scratch))
            {
                hits += 1;
            }
        }
        if kept == 0 {
            return Err(Error::ConditioningOnNull {
                event: q.evidence.to_string(),
            });
        }
        Ok((hits as f64 / kept as f64, kept))
    }

    /// `Pr(outcome_{do(treatment)} | context)`.
    pub fn interventional_prob<S: Scalar>(
        &self,
        outcome: &EventSpec,
        treatment: &EventSpec,
        context: &EventSpec,
    ) -> Result<S> {
        self.counterfactual_prob(&CfQuery {
            targets: vec![CfTarget {
                intervention: treatment.clone(),
                event: outcome.clone(),
            }],
            evidence: context.clone(),
        })
    }
}

struct CompiledTarget {
    fixed: Vec<(VarId, u32)>,
    recompute: Vec<VarId>,
    event: CompiledEvent,
}
