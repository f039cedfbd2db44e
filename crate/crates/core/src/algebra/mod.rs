//! Values, expected-utility structures and their catalog.

mod axioms;
mod catalog;
mod structure;
mod value;

use thiserror::Error;

pub use axioms::{check_axioms, AxiomCheck, AxiomReport};
pub use catalog::{builtin_structure, product_structure, vcsp_structure, CatalogId, StructureSpec, Valuation};
pub use structure::{
    cond_div, truncate, uniform, Carrier, Conditioning, ExpectedUtilityStructure, Operator, Order,
    PlausibilityStructure, UtilityStructure,
};
pub use value::{Num, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown structure `{0}`")]
    UnknownStructure(String),
    #[error("invalid value literal `{0}`")]
    Literal(String),
    #[error("structure `{0}` is not conditionable")]
    NotConditionable(String),
    #[error("conditioning on a zero plausibility is undefined")]
    UndefinedConditioning,
    #[error("domain error: {0}")]
    Domain(String),
}
