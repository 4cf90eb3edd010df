//! Causal necessity and sufficiency scores for black-box decisions over
//! tabular data, with identification through a causal graph, bounds under
//! partial knowledge, explanation reports, actionable recourse and an exact
//! structural-model oracle.
//!
//! Probability computations are generic over [`Scalar`]; the aliases below
//! fix the common instantiations.

pub mod blackbox;
pub mod data;
pub mod error;
pub mod explain;
pub mod expr;
pub mod graph;
pub mod oracle;
pub mod recourse;
pub mod scalar;
pub mod schema;
pub mod scores;

pub use blackbox::{BlackBox, ModelFile, OutcomeSpec};
pub use data::{Dataset, Estimator, EventSpec, ZeroMassPolicy};
pub use error::{Error, Result};
pub use explain::{ExplainOptions, ExplanationReport};
pub use graph::{AdjustmentSet, CausalGraph};
pub use oracle::Scm;
pub use recourse::{RecourseConfig, RecoursePlan};
pub use scalar::Scalar;
pub use schema::{Schema, Variable};
pub use scores::{ContrastQuery, ScoreBounds, ScoreKind, ScoreMode, ScoreTriple};

/// Exact rational arithmetic.
pub type Rational = num_rational::BigRational;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ExactDataset = Dataset<Rational>;
pub type Scores64 = ScoreTriple<f64>;
pub type ExactScores = ScoreTriple<Rational>;
pub type Bounds64 = ScoreBounds<f64>;
pub type ExactBounds = ScoreBounds<Rational>;
