//! Test-only oracles that share no code paths with the engines.

#![allow(dead_code)]

use cbn_core::{ContextualBeliefNetwork, Observation, VariableId};

/// Joint probability of a full assignment, read directly from the confactor tables.
pub fn joint(net: &ContextualBeliefNetwork, vals: &[usize]) -> f64 {
    let mut p = 1.0;
    for fam in net.families() {
        let r = fam
            .confactors
            .iter()
            .find(|r| r.body.iter().all(|(v, x)| vals[v.0] == x))
            .expect("families are exhaustive");
        let mut off = 0;
        let mut stride = 1;
        for (k, v) in r.table.vars().iter().enumerate().rev() {
            off += vals[v.0] * stride;
            stride *= r.table.cards()[k];
        }
        p *= r.table.values()[off];
    }
    p
}

/// Normalized posterior of one query variable by summing the joint over every state.
pub fn brute_posterior(net: &ContextualBeliefNetwork, q: VariableId, obs: &Observation) -> Vec<f64> {
    let cards: Vec<usize> = net.catalog.ids().map(|v| net.catalog.card(v)).collect();
    let mut acc = vec![0.0; cards[q.0]];
    let mut vals = vec![0usize; cards.len()];
    loop {
        if obs.context().iter().all(|(v, x)| vals[v.0] == x) {
            acc[vals[q.0]] += joint(net, &vals);
        }
        let mut k = cards.len();
        loop {
            if k == 0 {
                let z: f64 = acc.iter().sum();
                return acc.into_iter().map(|a| a / z).collect();
            }
            k -= 1;
            vals[k] += 1;
            if vals[k] < cards[k] {
                break;
            }
            vals[k] = 0;
        }
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
