//! Random contextual networks built by growing one decision tree per variable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::confactor::Confactor;
use crate::context::{Context, DomainCatalog, VariableId};
use crate::error::{Error, Result};
use crate::network::ContextualBeliefNetwork;
use crate::rng::SplitMix64;
use crate::table::{for_each_assignment, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of binary variables.
    pub n: usize,
    /// Number of leaf splits beyond one leaf per variable.
    pub s: usize,
    /// Probability that an eligible predecessor joins a leaf's table.
    pub p: f64,
    pub seed: u64,
    /// Prefer split variables already used in another leaf's context.
    pub biased: bool,
}

impl GenConfig {
    pub fn new(n: usize, s: usize, p: f64, seed: u64) -> Self {
        GenConfig { n, s, p, seed, biased: false }
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!("p = {} is not a probability", self.p)));
        }
        // Variable i (0-based) has i predecessors, so its tree holds at most 2^i leaves.
        let capacity = (0..self.n).fold(0usize, |acc, i| {
            let leaves = if i >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << i };
            acc.saturating_add(leaves - 1)
        });
        if self.s > capacity {
            return Err(Error::Config(format!(
                "{} splits requested but at most {capacity} are possible with {} variables",
                self.s, self.n
            )));
        }
        Ok(())
    }
}

/// Table over `vars` with uniform random entries, normalized over `child`.
pub fn random_conditional(
    rng: &mut SplitMix64,
    vars: Vec<VariableId>,
    cards: Vec<usize>,
    child: VariableId,
) -> Table {
    let raw = Table::from_fn(vars, cards, |_| 1.0 - rng.next_f64()).expect("shape matches");
    normalize_over(&raw, child)
}

/// Rescales every slice along `child` to sum to one; zero slices become uniform.
pub fn normalize_over(t: &Table, child: VariableId) -> Table {
    let p = t.position(child).expect("child is in the table");
    let strides = t.strides();
    let card = t.cards()[p];
    let others: Vec<usize> = (0..t.vars().len()).filter(|&k| k != p).collect();
    let other_cards: Vec<usize> = others.iter().map(|&k| t.cards()[k]).collect();
    let mut values = t.values().to_vec();
    for_each_assignment(&other_cards, |idx| {
        let base: usize = others.iter().zip(idx).map(|(&k, &i)| i * strides[k]).sum();
        let s: f64 = (0..card).map(|j| values[base + j * strides[p]]).sum();
        for j in 0..card {
            let v = &mut values[base + j * strides[p]];
            *v = if s > 0.0 { *v / s } else { 1.0 / card as f64 };
        }
    });
    Table::new(t.vars().to_vec(), t.cards().to_vec(), values).expect("shape unchanged")
}

struct Leaf {
    var: usize,
    body: Context,
}

fn used_elsewhere(leaves: &[Leaf], skip: usize, k: usize) -> bool {
    leaves
        .iter()
        .enumerate()
        .any(|(i, l)| i != skip && l.body.assigns(VariableId(k)))
}

pub fn generate_random_cbn(cfg: &GenConfig) -> Result<ContextualBeliefNetwork> {
    cfg.check()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut cat = DomainCatalog::new();
    for i in 0..cfg.n {
        cat.add_binary(&format!("X{}", i + 1))?;
    }
    let mut leaves: Vec<Leaf> = (0..cfg.n).map(|var| Leaf { var, body: Context::empty() }).collect();
    while leaves.len() < cfg.n + cfg.s {
        let li = rng.below(leaves.len());
        let j = rng.below(cfg.n - 1);
        let i = leaves[li].var;
        if j >= i || leaves[li].body.assigns(VariableId(j)) {
            continue;
        }
        let mut split = j;
        if cfg.biased {
            let candidates: Vec<usize> = (0..i)
                .filter(|&k| !leaves[li].body.assigns(VariableId(k)) && used_elsewhere(&leaves, li, k))
                .collect();
            if !candidates.is_empty() {
                split = candidates[rng.below(candidates.len())];
            }
        }
        let body = leaves[li].body.clone();
        leaves[li].body = body.with(VariableId(split), 0)?;
        leaves.insert(li + 1, Leaf { var: i, body: body.with(VariableId(split), 1)? });
    }

    let mut per_var: Vec<Vec<Confactor>> = vec![Vec::new(); cfg.n];
    for leaf in &leaves {
        let mut vars: Vec<VariableId> = (0..leaf.var)
            .filter(|&j| !leaf.body.assigns(VariableId(j)))
            .filter(|_| cfg.p > 0.0 && rng.bernoulli(cfg.p))
            .map(VariableId)
            .collect();
        vars.push(VariableId(leaf.var));
        let cards = cat.cards(&vars);
        let t = random_conditional(&mut rng, vars, cards, VariableId(leaf.var));
        per_var[leaf.var].push(Confactor::new(leaf.body.clone(), t)?);
    }
    let mut net = ContextualBeliefNetwork::new(cat);
    for (i, confs) in per_var.into_iter().enumerate() {
        net.set_family(VariableId(i), confs);
    }
    Ok(net)
}

pub fn generate_biased_cbn(cfg: &GenConfig) -> Result<ContextualBeliefNetwork> {
    generate_random_cbn(&GenConfig { biased: true, ..cfg.clone() })
}

/// Distinct variables appearing in any body.
pub fn context_variables(net: &ContextualBeliefNetwork) -> BTreeSet<VariableId> {
    net.confactors().flat_map(|c| c.body.vars()).collect()
}
