//! Reductions of SAT, CSP, Bayesian network, influence diagram and MDP
//! instances to PFU networks and queries.

mod bn;
mod cnf;
mod csp;
mod id;
mod mdp;

use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, Value};
use crate::network::NetworkError;
use crate::query::{BoundedQuery, Query, QueryError};

pub use bn::{encode_bn, BnInstance, BnNode, BnTask, Evidence};
pub use cnf::{encode_cnf, CnfInstance};
pub use csp::{encode_csp, Constraint, CspFlavor, CspInstance, CspTask, CspVariable};
pub use id::{encode_id, IdInstance, IdNode, IdNodeKind};
pub use mdp::{encode_mdp, encode_pomdp, MdpFlavor, MdpInstance, PomdpObservations};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("normalization fails: {0}")]
    Normalization(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// ∃, ∀ or ℜ (uniformly random boolean).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
    Random,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
            Quantifier::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Quantifier> {
        match s {
            "exists" | "e" => Some(Quantifier::Exists),
            "forall" | "a" => Some(Quantifier::Forall),
            "random" | "r" => Some(Quantifier::Random),
            _ => None,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An encoded instance: a plain query, or a query with a threshold.
#[derive(Clone, Debug)]
pub enum Encoded {
    Query(Query),
    Bounded(BoundedQuery),
}

impl Encoded {
    pub fn query(&self) -> &Query {
        match self {
            Encoded::Query(q) => q,
            Encoded::Bounded(b) => &b.query,
        }
    }

    pub fn threshold(&self) -> Option<&Value> {
        match self {
            Encoded::Query(_) => None,
            Encoded::Bounded(b) => Some(&b.threshold),
        }
    }

    pub fn into_query(self) -> Query {
        match self {
            Encoded::Query(q) => q,
            Encoded::Bounded(b) => b.query,
        }
    }
}

fn check_valid(n: &crate::network::PfuNetwork) -> Result<(), EncodeError> {
    let r = crate::network::validate_network(n);
    if r.is_valid() {
        Ok(())
    } else {
        Err(EncodeError::Normalization(r.to_string()))
    }
}

/// Boolean domain with index 0 = f and index 1 = t.
const BOOL_DOMAIN: [&str; 2] = ["f", "t"];
