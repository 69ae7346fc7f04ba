//! Discovers contextual structure in dense conditional tables by greedy tree growth.

use serde::{Deserialize, Serialize};

use crate::confactor::{total_size, Confactor, ConfactorSet};
use crate::context::{Context, VariableId};
use crate::error::{Error, Result};
use crate::generate::normalize_over;
use crate::network::ContextualBeliefNetwork;
use crate::table::{for_each_assignment, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    /// Entries closer than this (strictly) may be merged.
    pub threshold: f64,
    /// The contextual form is adopted only below this fraction of the tabular size.
    pub accept_ratio: f64,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        CompressionConfig {
            threshold: 0.05,
            accept_ratio: 0.51,
        }
    }
}

impl CompressionConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold {} is outside (0,1)", self.threshold)));
        }
        if !(self.accept_ratio > 0.0 && self.accept_ratio <= 1.0) {
            return Err(Error::Config(format!("accept ratio {} is outside (0,1]", self.accept_ratio)));
        }
        Ok(())
    }
}

/// Per-family outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub child: String,
    pub original_size: usize,
    pub compressed_size: usize,
    pub accepted: bool,
    /// Largest |merged − original| before renormalization.
    pub max_merge_error: f64,
    /// Largest deviation of a leaf's child sums from one before renormalization.
    pub max_normalization_residual: f64,
}

/// Midpoint table over the variables of `t` not in `drop`, and the largest block spread.
fn collapse(t: &Table, drop: &[VariableId]) -> (Table, f64) {
    let keep: Vec<usize> = (0..t.vars().len()).filter(|&k| !drop.contains(&t.vars()[k])).collect();
    let vars: Vec<VariableId> = keep.iter().map(|&k| t.vars()[k]).collect();
    let cards: Vec<usize> = keep.iter().map(|&k| t.cards()[k]).collect();
    let n: usize = cards.iter().product();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut flat = 0;
    for_each_assignment(t.cards(), |idx| {
        let out = keep.iter().fold(0, |acc, &k| acc * t.cards()[k] + idx[k]);
        let x = t.values()[flat];
        lo[out] = lo[out].min(x);
        hi[out] = hi[out].max(x);
        flat += 1;
    });
    let spread = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let mid = lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect();
    (Table::new(vars, cards, mid).expect("shape matches"), spread)
}

/// Parents whose values never move an entry by `threshold` or more, one parent at a time.
pub fn redundant_variables(table: &Table, x: VariableId, cfg: &CompressionConfig) -> Vec<VariableId> {
    let mut out: Vec<VariableId> = table
        .vars()
        .iter()
        .copied()
        .filter(|&y| y != x && collapse(table, &[y]).1 < cfg.threshold)
        .collect();
    out.sort();
    out
}

/// Greedy subset of the individually redundant parents whose joint blocks stay within the threshold.
fn removable(table: &Table, x: VariableId, cfg: &CompressionConfig) -> Vec<VariableId> {
    let mut drop = Vec::new();
    for y in redundant_variables(table, x, cfg) {
        drop.push(y);
        if collapse(table, &drop).1 >= cfg.threshold {
            drop.pop();
        }
    }
    drop
}

/// Unordered pairs of entries with equal child value that lie strictly within the threshold.
fn close_pairs(t: &Table, x: VariableId, threshold: f64) -> usize {
    let p = t.position(x).expect("child stays in every slice");
    let card = t.cards()[p];
    (0..card)
        .map(|v| {
            let slice = t.set(&Context::single(x, v));
            let vals = slice.values();
            let mut n = 0;
            for i in 0..vals.len() {
                for j in (i + 1)..vals.len() {
                    if (vals[i] - vals[j]).abs() < threshold {
                        n += 1;
                    }
                }
            }
            n
        })
        .sum()
}

enum Node {
    Leaf(Table),
    Split(VariableId, Vec<Node>),
}

impl Node {
    fn size(&self) -> usize {
        match self {
            Node::Leaf(t) => t.len(),
            Node::Split(_, kids) => kids.iter().map(Node::size).sum(),
        }
    }
}

/// `t` holds original entries so every merge stays within half the threshold of them.
fn grow(t: &Table, x: VariableId, cfg: &CompressionConfig) -> Node {
    let drop = removable(t, x, cfg);
    let (leaf, _) = collapse(t, &drop);
    let candidates: Vec<VariableId> = {
        let mut v: Vec<VariableId> = leaf.vars().iter().copied().filter(|&y| y != x).collect();
        v.sort();
        v
    };
    let best = candidates
        .iter()
        .map(|&y| {
            let card = leaf.card_of(y).expect("candidate is in the table");
            let score: usize = (0..card)
                .map(|v| close_pairs(&leaf.set(&Context::single(y, v)), x, cfg.threshold))
                .sum();
            (y, score)
        })
        .fold(None::<(VariableId, usize)>, |acc, (y, s)| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((y, s)),
        });
    let Some((y, _)) = best else {
        return Node::Leaf(leaf);
    };
    let card = leaf.card_of(y).expect("candidate is in the table");
    let kids: Vec<Node> = (0..card)
        .map(|v| grow(&t.set(&Context::single(y, v)), x, cfg))
        .collect();
    let split = Node::Split(y, kids);
    if split.size() < leaf.len() {
        split
    } else {
        Node::Leaf(leaf)
    }
}

fn emit(node: Node, body: Context, out: &mut Vec<(Context, Table)>) {
    match node {
        Node::Leaf(t) => out.push((body, t)),
        Node::Split(y, kids) => {
            for (v, k) in kids.into_iter().enumerate() {
                emit(k, body.with(y, v).expect("split variable is fresh"), out);
            }
        }
    }
}

/// Compresses the dense table of `x` given `parents`; falls back to the tabular family.
pub fn compress_family(
    x: VariableId,
    parents: &[VariableId],
    table: &Table,
    cfg: &CompressionConfig,
) -> Result<(ConfactorSet, FamilyReport)> {
    cfg.check()?;
    let mut expect: Vec<VariableId> = parents.iter().copied().chain([x]).collect();
    expect.sort();
    let mut have = table.vars().to_vec();
    have.sort();
    if expect != have {
        return Err(Error::Config("table must cover exactly the parents and the child".into()));
    }
    let mut leaves = Vec::new();
    emit(grow(table, x, cfg), Context::empty(), &mut leaves);

    let mut merge_err: f64 = 0.0;
    let mut norm_residual: f64 = 0.0;
    for (body, t) in &leaves {
        let orig = table.set(body);
        for_each_assignment(orig.cards(), |idx| {
            let c = Context::from_pairs(orig.vars().iter().copied().zip(idx.iter().copied())).unwrap();
            let merged = t.value_in(&c).unwrap_or(f64::NAN);
            merge_err = merge_err.max((merged - orig.get(idx)).abs());
        });
        let sums = t.sum_out(x, &mut Default::default())?;
        norm_residual = sums.values().iter().fold(norm_residual, |m, s| m.max((s - 1.0).abs()));
    }

    let original_size = table.len();
    let confs: ConfactorSet = leaves
        .into_iter()
        .map(|(b, t)| Ok(Confactor::new(b, normalize_over(&t, x))?.for_variable(x)))
        .collect::<Result<_>>()?;
    let compressed_size = total_size(&confs);
    let accepted = (compressed_size as f64) < cfg.accept_ratio * original_size as f64;
    let report = FamilyReport {
        child: String::new(),
        original_size,
        compressed_size,
        accepted,
        max_merge_error: merge_err,
        max_normalization_residual: norm_residual,
    };
    if accepted {
        Ok((confs, report))
    } else {
        let tabular = Confactor::new(Context::empty(), table.clone())?.for_variable(x);
        Ok((vec![tabular], report))
    }
}

/// Compresses every family of `net` after expanding it to a dense table.
pub fn compress_network(
    net: &ContextualBeliefNetwork,
    cfg: &CompressionConfig,
) -> Result<(ContextualBeliefNetwork, Vec<FamilyReport>)> {
    let mut out = ContextualBeliefNetwork::new(net.catalog.clone());
    let mut reports = Vec::new();
    for x in net.catalog.ids() {
        let dense = net.family_table(x)?;
        let parents: Vec<VariableId> = dense.vars().iter().copied().filter(|&v| v != x).collect();
        let (confs, mut rep) = compress_family(x, &parents, &dense, cfg)?;
        rep.child = net.catalog.name(x).to_string();
        out.set_family(x, confs);
        reports.push(rep);
    }
    Ok((out, reports))
}

/// Plain-text report, one line per family.
pub fn format_report(reports: &[FamilyReport]) -> String {
    let mut s = String::from("family\toriginal\tcompressed\taccepted\tmax_merge_error\tmax_normalization_residual\n");
    for r in reports {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\n",
            r.child, r.original_size, r.compressed_size, r.accepted, r.max_merge_error, r.max_normalization_residual
        ));
    }
    let before: usize = reports.iter().map(|r| r.original_size).sum();
    let after: usize = reports
        .iter()
        .map(|r| if r.accepted { r.compressed_size } else { r.original_size })
        .sum();
    s.push_str(&format!("total\t{before}\t{after}\n"));
    s
}
