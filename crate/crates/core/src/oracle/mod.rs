//! Ground-truth structural causal models.
//!
//! Exogenous variables are finite, so abduction is exact: every query
//! enumerates the exogenous cells in a fixed order, keeps those consistent
//! with the evidence, and re-solves the intervened descendants.

pub mod generate;
mod harness;
mod scm;
mod truth;

pub use harness::{bounds_harness, random_query, HarnessReport, HarnessViolation};
pub use scm::{
    CfQuery, CfTarget, Exogenous, ExogenousDecl, Scm, ScmFile, MAX_EXOGENOUS_CELLS,
    MAX_TABLE_ENTRIES,
};
