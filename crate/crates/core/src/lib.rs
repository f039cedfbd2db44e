//! Plausibility-feasibility-utility networks: algebraic structures, network
//! and query validation, exact solvers and encoders from classical
//! formalisms.

pub mod algebra;
pub mod encoders;
pub mod network;
pub mod query;
pub mod solvers;
pub mod fixtures;
pub mod io;
pub mod random;
