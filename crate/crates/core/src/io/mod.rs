//! File formats: PFU-JSON networks, queries and answers, DIMACS-family CNF
//! files, UAI Bayesian networks and JSON instances for CSPs, influence
//! diagrams and MDPs.

mod cnf;
mod instances;
mod json;
mod source;
mod uai;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::encoders::EncodeError;
use crate::network::NetworkError;
use crate::query::QueryError;

pub use cnf::{parse_cnf, write_cnf, CnfDialect};
pub use instances::{csp_from_json, csp_to_json, id_from_json, id_to_json, mdp_from_json, mdp_to_json, MdpFile};
pub use json::{
    answer_from_json, answer_to_json, network_from_json, network_to_json, query_from_json, query_to_json,
    structure_from_json, structure_to_json,
};
pub use source::{encode_source, EncodeOptions, SourceFormat};
pub use uai::{parse_uai, parse_uai_evidence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e.to_string())
    }
}

fn schema<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Schema(msg.into()))
}
