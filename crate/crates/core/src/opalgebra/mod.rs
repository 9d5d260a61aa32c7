//! Shift operators with polynomial coefficients: products, commutators,
//! goodness, the walk transfer operator, application to tables, and
//! certification through commutator reduction chains.

mod apply;
mod chain;
mod operator;

use thiserror::Error;

use crate::walks::WalkError;

pub use apply::{
    apply, apply_resolvable, boundary_points, origin_points, region_points, Residual,
    ResidualReport,
};
pub use chain::{
    certify, certify_table, reduction_chain, CertDomain, Certificate, ChainEntry, ReductionChain,
};
pub use operator::{walk_symbols, OperatorJson, OperatorTermJson, ShiftOperator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("{0}")]
    Usage(String),
    #[error("evaluating at {point:?} needs cell {cell:?}, which the table does not determine")]
    Unresolved { point: Vec<i64>, cell: Vec<i64> },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
}
