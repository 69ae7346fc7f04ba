//! Elimination orderings and the min-size heuristic.

use std::collections::BTreeSet;

use crate::context::VariableId;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder(pub Vec<VariableId>);

/// Variables that are neither queried nor observed, ascending.
pub fn hidden_variables(
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
) -> Vec<VariableId> {
    net.catalog
        .ids()
        .filter(|v| !query.contains(v) && !obs.context().assigns(*v))
        .collect()
}

impl EliminationOrder {
    /// Checks that `vars` lists every hidden variable exactly once.
    pub fn given(
        net: &ContextualBeliefNetwork,
        vars: Vec<VariableId>,
        query: &[VariableId],
        obs: &Observation,
    ) -> Result<Self> {
        let want: BTreeSet<VariableId> = hidden_variables(net, query, obs).into_iter().collect();
        let have: BTreeSet<VariableId> = vars.iter().copied().collect();
        if have.len() != vars.len() {
            return Err(Error::Config("elimination order repeats a variable".into()));
        }
        if have != want {
            let missing: Vec<&str> = want.difference(&have).map(|v| net.catalog.name(*v)).collect();
            let extra: Vec<&str> = have.difference(&want).map(|v| net.catalog.name(*v)).collect();
            return Err(Error::Config(format!(
                "elimination order must list exactly the hidden variables (missing: [{}], not allowed: [{}])",
                missing.join(","),
                extra.join(",")
            )));
        }
        Ok(EliminationOrder(vars))
    }

    /// Greedy order: smallest union-of-involved-scopes first, ties to the lower id.
    pub fn min_size(net: &ContextualBeliefNetwork, query: &[VariableId], obs: &Observation) -> Self {
        let cat = &net.catalog;
        let mut scopes: Vec<BTreeSet<VariableId>> = cat
            .ids()
            .map(|x| {
                net.family_scope(x)
                    .into_iter()
                    .filter(|v| !obs.context().assigns(*v))
                    .collect::<BTreeSet<_>>()
            })
            .filter(|s| !s.is_empty())
            .collect();
        let mut left = hidden_variables(net, query, obs);
        let mut order = Vec::with_capacity(left.len());
        while !left.is_empty() {
            let mut best: Option<(u128, usize)> = None;
            for (i, &y) in left.iter().enumerate() {
                let mut union = BTreeSet::new();
                for s in scopes.iter().filter(|s| s.contains(&y)) {
                    union.extend(s.iter().copied());
                }
                let cost: u128 = union.iter().map(|v| cat.card(*v) as u128).product();
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, i));
                }
            }
            let (_, i) = best.expect("non-empty candidate list");
            let y = left.remove(i);
            let (with, without): (Vec<_>, Vec<_>) = scopes.into_iter().partition(|s| s.contains(&y));
            scopes = without;
            let mut merged: BTreeSet<VariableId> = with.into_iter().flatten().collect();
            merged.remove(&y);
            if !merged.is_empty() {
                scopes.push(merged);
            }
            order.push(y);
        }
        EliminationOrder(order)
    }
}
