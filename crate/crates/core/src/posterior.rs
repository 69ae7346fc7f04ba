use crate::context::VariableId;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::table::Table;

/// Normalized distribution over the query variables, laid out in query order.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub table: Table,
}

impl Posterior {
    /// Extends `unnormalized` to cover every query variable, reorders, and normalizes.
    pub fn from_unnormalized(
        net: &ContextualBeliefNetwork,
        query: &[VariableId],
        unnormalized: Table,
    ) -> Result<Self> {
        let mut t = unnormalized;
        let missing: Vec<VariableId> = query.iter().copied().filter(|v| !t.contains(*v)).collect();
        if !missing.is_empty() {
            let ones = Table::filled(missing.clone(), net.catalog.cards(&missing), 1.0);
            let mut scratch = Default::default();
            t = t.product(&ones, &mut scratch);
        }
        if t.vars().len() != query.len() {
            return Err(Error::Invariant(
                "answer mentions variables outside the query".into(),
            ));
        }
        Ok(Posterior {
            table: t.reorder(query)?.normalized()?,
        })
    }

    pub fn vars(&self) -> &[VariableId] {
        self.table.vars()
    }

    pub fn probabilities(&self) -> &[f64] {
        self.table.values()
    }

    pub fn max_abs_diff(&self, other: &Posterior) -> f64 {
        self.table.max_abs_diff(&other.table).unwrap_or(f64::INFINITY)
    }
}

/// Query must be non-empty, duplicate-free, known, and disjoint from the observation.
pub fn check_query(net: &ContextualBeliefNetwork, query: &[VariableId], obs: &Observation) -> Result<()> {
    if query.is_empty() {
        return Err(Error::Config("query is empty".into()));
    }
    for (i, v) in query.iter().enumerate() {
        if !net.catalog.contains(*v) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        if query[..i].contains(v) {
            return Err(Error::Config(format!(
                "query lists '{}' twice",
                net.catalog.name(*v)
            )));
        }
        if obs.context().assigns(*v) {
            return Err(Error::Config(format!(
                "query variable '{}' is observed",
                net.catalog.name(*v)
            )));
        }
    }
    obs.context().check(&net.catalog)
}
