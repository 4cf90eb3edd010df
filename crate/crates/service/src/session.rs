//! Loaded graph, dataset and black-box bundles.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use causal_explain::blackbox::OutcomeDecl;
use causal_explain::data::CsvOptions;
use causal_explain::graph::GraphFile;
use causal_explain::schema::VariableDecl;
use causal_explain::{BlackBox, CausalGraph, Dataset, Estimator, ModelFile, OutcomeSpec, ZeroMassPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    /// Additive smoothing applied to every estimate.
    pub smoothing: f64,
    pub zero_mass_policy: ZeroMassPolicy,
    /// Cut points per continuous CSV column.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub binning: BTreeMap<String, Vec<f64>>,
}

/// Everything a session is built from, with file references resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub graph: GraphFile,
    /// CSV text.
    pub dataset: String,
    pub blackbox: ModelFile,
    #[serde(default)]
    pub config: SessionConfig,
}

impl Bundle {
    pub fn from_paths(graph: &Path, data: &Path, blackbox: &Path, config: SessionConfig) -> Result<Self> {
        let read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| ServiceError::BadRequest(format!("cannot read {}: {e}", p.display())))
        };
        Ok(Bundle {
            graph: serde_json::from_str(&read(graph)?)?,
            dataset: read(data)?,
            blackbox: serde_json::from_str(&read(blackbox)?)?,
            config,
        })
    }
}

/// On-disk form of a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub created_at: u64,
    pub bundle: Bundle,
}

/// Immutable once loaded.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub bundle: Bundle,
    /// Graph including the outcome as a child of the black-box inputs.
    pub graph: CausalGraph,
    /// Dataset with the outcome column holding the black box's predictions,
    /// columns in graph order.
    pub data: Dataset,
    pub blackbox: BlackBox,
    /// The black box declares no inputs; every variable stands in.
    pub input_proxy: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemaPayload {
    pub id: String,
    pub created_at: u64,
    pub variables: Vec<VariableDecl>,
    pub edges: Vec<(String, String)>,
    pub outcome: OutcomeDecl,
    pub positive: Vec<String>,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub input_proxy: bool,
    pub rows: usize,
    pub total_weight: f64,
    pub config: SessionConfig,
}

fn csv_header(text: &str) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| ServiceError::Core(causal_explain::Error::Csv(e)))?;
    Ok(header.iter().map(|h| h.trim().to_string()).collect())
}

/// Same rows with columns permuted to `graph`'s variable order.
fn in_graph_order(data: &Dataset, graph: &CausalGraph) -> Result<Dataset> {
    let schema = graph.schema();
    let order: Vec<usize> = schema
        .names()
        .map(|n| data.schema().id(n))
        .collect::<causal_explain::Result<_>>()?;
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return Ok(data.clone());
    }
    let mut codes = Vec::with_capacity(data.len() * order.len());
    for r in 0..data.len() {
        let row = data.row(r);
        codes.extend(order.iter().map(|&j| row[j]));
    }
    Ok(Dataset::from_codes(graph.shared_schema(), codes, Some(data.weights().to_vec()))?)
}

impl Session {
    /// Binds the black box to the graph's variables, reads the CSV (an
    /// outcome column, or `__prediction`, is optional unless the black box
    /// is the column itself), labels the data and adds the outcome to the
    /// graph.
    pub fn load(id: String, created_at: u64, bundle: Bundle) -> Result<Self> {
        let base = CausalGraph::from_file(bundle.graph.clone())?;
        let mut blackbox = BlackBox::bind(bundle.blackbox.clone(), base.schema())?;
        let outcome = blackbox.outcome().clone();
        let features = base
            .schema()
            .select(base.schema().names().filter(|n| *n != outcome.name()))?;

        let header = csv_header(&bundle.dataset)?;
        let defaults = CsvOptions::default();
        let prediction_column = if header.iter().any(|h| h == outcome.name()) {
            outcome.name().to_string()
        } else {
            defaults.prediction_column.clone()
        };
        let opts = CsvOptions {
            prediction_column,
            outcome: Some(outcome.variable().clone()),
            binning: bundle.config.binning.clone(),
            ..defaults
        };
        let raw = Dataset::read_csv(bundle.dataset.as_bytes(), &features, &opts)?;
        if raw.is_empty() {
            return Err(ServiceError::BadRequest("dataset has no rows".into()));
        }
        let labeled = blackbox.label_dataset(&raw)?;
        blackbox.attach_column(&labeled)?;
        let graph = blackbox.graph_with_outcome(&base)?;
        let data = in_graph_order(&labeled, &graph)?;
        let input_proxy = matches!(bundle.blackbox, ModelFile::Column { inputs: None, .. });
        let session = Session {
            id,
            created_at,
            bundle,
            graph,
            data,
            blackbox,
            input_proxy,
        };
        session.estimator()?;
        Ok(session)
    }

    pub fn from_bundle(bundle: Bundle) -> Result<Arc<Self>> {
        let created_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let id = uuid::Uuid::new_v4().simple().to_string();
        Ok(Arc::new(Session::load(id, created_at, bundle)?))
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            id: self.id.clone(),
            created_at: self.created_at,
            bundle: self.bundle.clone(),
        }
    }

    pub fn outcome(&self) -> &OutcomeSpec {
        self.blackbox.outcome()
    }

    /// A fresh estimator over the labeled data.
    pub fn estimator(&self) -> Result<Estimator<'_>> {
        let cfg = &self.bundle.config;
        Ok(Estimator::new(&self.data)
            .with_smoothing(cfg.smoothing)?
            .with_policy(cfg.zero_mass_policy))
    }

    pub fn predict(&self, individual: &BTreeMap<String, String>) -> Result<String> {
        let mut out = self.blackbox.predict(std::slice::from_ref(individual))?;
        Ok(out.remove(0))
    }

    pub fn schema(&self) -> SchemaPayload {
        let file = self.graph.to_file();
        SchemaPayload {
            id: self.id.clone(),
            created_at: self.created_at,
            variables: file.variables,
            edges: file.edges,
            outcome: self.outcome().to_decl(),
            positive: self.outcome().positive().into_iter().map(String::from).collect(),
            inputs: self.blackbox.input_names(),
            input_proxy: self.input_proxy,
            rows: self.data.len(),
            total_weight: self.data.total_weight(),
            config: self.bundle.config.clone(),
        }
    }
}
