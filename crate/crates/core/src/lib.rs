//! Exact inference for discrete belief networks whose conditional probabilities
//! carry context-specific structure.
//!
//! Three interchangeable engines share one table algebra:
//! [`ve`] eliminates over dense tables, [`cve`] eliminates over contextual
//! factors with absorption, and [`tve`] follows the dense schedule while
//! holding every factor as a set of contextual factors. [`oracle`] enumerates
//! the joint for differential testing.

pub mod campaign;
pub mod compress;
pub mod confactor;
pub mod context;
pub mod counters;
pub mod cve;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod network;
pub mod oracle;
pub mod order;
pub mod posterior;
pub mod rng;
pub mod table;
pub mod tve;
pub mod ve;

pub use confactor::{count_split_pieces, Confactor, ConfactorSet};
pub use context::{Context, DomainCatalog, VariableId};
pub use counters::CostCounters;
pub use cve::{cve_query, CveMode, CveOptions, CveRun};
pub use error::{Error, Result};
pub use network::{ContextualBeliefNetwork, Family, Observation, ParentSkeleton};
pub use oracle::enum_query;
pub use order::EliminationOrder;
pub use posterior::Posterior;
pub use table::Table;
pub use tve::{tve_query, GroupedFactor, TveRun};
pub use ve::{multiply_factors, ve_query, MultPolicy, VeRun};
