//! Brute-force posterior by summing the factorized joint over all completions.

use std::collections::BTreeSet;

use crate::context::VariableId;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::posterior::{check_query, Posterior};
use crate::table::{for_each_assignment, Table};

pub const DEFAULT_STATE_CAP: u128 = 1 << 22;

/// Query and evidence variables plus all their predecessors through family scopes.
pub fn relevant_variables(net: &ContextualBeliefNetwork, seeds: &[VariableId]) -> Vec<VariableId> {
    let mut keep: BTreeSet<VariableId> = seeds.iter().copied().collect();
    for x in net.catalog.ids().rev() {
        if keep.contains(&x) {
            keep.extend(net.family_scope(x));
        }
    }
    keep.into_iter().collect()
}

/// Value of the applicable confactor of `child`'s family under a full assignment.
fn family_value(net: &ContextualBeliefNetwork, child: VariableId, vals: &[usize]) -> f64 {
    for r in &net.family(child).confactors {
        if r.body.iter().all(|(v, x)| vals[v.0] == x) {
            let mut off = 0;
            for (v, s) in r.table.vars().iter().zip(r.table.strides()) {
                off += vals[v.0] * s;
            }
            return r.table.values()[off];
        }
    }
    0.0
}

pub fn enum_query(
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
    cap: u128,
) -> Result<Posterior> {
    check_query(net, query, obs)?;
    let mut seeds: Vec<VariableId> = query.to_vec();
    seeds.extend(obs.context().vars());
    let relevant = relevant_variables(net, &seeds);
    let free: Vec<VariableId> = relevant
        .iter()
        .copied()
        .filter(|v| !obs.context().assigns(*v))
        .collect();
    let size: u128 = free.iter().map(|v| net.catalog.card(*v) as u128).product();
    if size > cap {
        return Err(Error::StateSpaceTooLarge { size, cap });
    }
    let mut vals = vec![0usize; net.var_count()];
    for (v, x) in obs.context().iter() {
        vals[v.0] = x;
    }
    let qcards = net.catalog.cards(query);
    let mut acc = Table::filled(query.to_vec(), qcards, 0.0);
    let qstrides = acc.strides();
    let mut sums = vec![0.0; acc.len()];
    let cards = net.catalog.cards(&free);
    for_each_assignment(&cards, |idx| {
        for (v, &x) in free.iter().zip(idx) {
            vals[v.0] = x;
        }
        let mut p = 1.0;
        for &x in &relevant {
            p *= family_value(net, x, &vals);
            if p == 0.0 {
                return;
            }
        }
        let k: usize = query.iter().zip(&qstrides).map(|(v, s)| vals[v.0] * s).sum();
        sums[k] += p;
    });
    acc = Table::new(query.to_vec(), net.catalog.cards(query), sums)?;
    Posterior::from_unnormalized(net, query, acc)
}

/// Unnormalized marginal over `keep` with the evidence fixed, by full enumeration.
pub fn evidence_marginal(
    net: &ContextualBeliefNetwork,
    keep: &[VariableId],
    obs: &Observation,
    cap: u128,
) -> Result<Table> {
    let free: Vec<VariableId> = net
        .catalog
        .ids()
        .filter(|v| !obs.context().assigns(*v))
        .collect();
    let size: u128 = free.iter().map(|v| net.catalog.card(*v) as u128).product();
    if size > cap {
        return Err(Error::StateSpaceTooLarge { size, cap });
    }
    let mut vals = vec![0usize; net.var_count()];
    for (v, x) in obs.context().iter() {
        vals[v.0] = x;
    }
    let kcards = net.catalog.cards(keep);
    let shape = Table::filled(keep.to_vec(), kcards.clone(), 0.0);
    let kstrides = shape.strides();
    let mut sums = vec![0.0; shape.len()];
    let cards = net.catalog.cards(&free);
    for_each_assignment(&cards, |idx| {
        for (v, &x) in free.iter().zip(idx) {
            vals[v.0] = x;
        }
        let mut p = 1.0;
        for x in net.catalog.ids() {
            p *= family_value(net, x, &vals);
            if p == 0.0 {
                return;
            }
        }
        let k: usize = keep.iter().zip(&kstrides).map(|(v, s)| vals[v.0] * s).sum();
        sums[k] += p;
    });
    Table::new(keep.to_vec(), kcards, sums)
}
