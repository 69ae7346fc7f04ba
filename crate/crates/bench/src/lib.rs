//! Workloads shared by the criterion benchmarks.

use cbn_core::fixtures::tree_structured_network;
use cbn_core::generate::{generate_biased_cbn, GenConfig};
use cbn_core::{ContextualBeliefNetwork, EliminationOrder, Observation, VariableId};

/// A prepared query: network, query variable, evidence and elimination order.
pub struct Workload {
    pub name: String,
    pub net: ContextualBeliefNetwork,
    pub query: Vec<VariableId>,
    pub obs: Observation,
    pub order: EliminationOrder,
}

impl Workload {
    fn new(name: String, net: ContextualBeliefNetwork, query: VariableId) -> Self {
        let obs = Observation::none();
        let order = EliminationOrder::min_size(&net, &[query], &obs);
        Workload { name, net, query: vec![query], obs, order }
    }
}

/// The seven-variable tree-structured network queried on its last variable.
pub fn tree_workload() -> Workload {
    let (net, v) = tree_structured_network();
    Workload::new("tree".into(), net, v.e)
}

/// A biased random network queried on its last variable.
pub fn generated_workload(n: usize, s: usize, p: f64, seed: u64) -> Workload {
    let net = generate_biased_cbn(&GenConfig::new(n, s, p, seed)).expect("valid generator config");
    let q = VariableId(n - 1);
    Workload::new(format!("gen-n{n}-s{s}-seed{seed}"), net, q)
}
