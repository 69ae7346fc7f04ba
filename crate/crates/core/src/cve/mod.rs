//! Contextual variable elimination over a working multiset of confactors.

mod audit;
mod pairwise;
mod pending;

use std::collections::BTreeSet;

use crate::confactor::{Confactor, ConfactorSet};
use crate::context::{Context, DomainCatalog, VariableId};
use crate::counters::CostCounters;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::order::EliminationOrder;
use crate::posterior::{check_query, Posterior};
use crate::table::{for_each_assignment, Table};

use pending::{absorb_pending, Pending};

/// Which elimination procedure runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CveMode {
    /// Absorption into the confactors for the eliminated variable.
    #[default]
    Absorption,
    /// Pairwise splitting of every compatible pair; kept for differential testing.
    PairwiseSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CveOptions {
    pub mode: CveMode,
    /// Checks the program invariant and completeness after every elimination.
    pub audit: bool,
}

/// Per-elimination sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CveStep {
    pub var: VariableId,
    /// Total entries of the confactors the elimination produced.
    pub created_size: usize,
    /// Total entries of the confactor multisets for every variable the new confactors are for.
    pub family_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub id: u64,
    pub conf: Confactor,
}

/// Working multiset for one query.
pub struct CveRun<'a> {
    net: &'a ContextualBeliefNetwork,
    obs: Observation,
    base: Vec<Entry>,
    next_id: u64,
    options: CveOptions,
    eliminated: Vec<VariableId>,
    pub counts: CostCounters,
    pub trace: Vec<CveStep>,
}

/// Drops incompatible bodies, erases satisfied terms, sets tables, and drops positive variable-free members.
pub fn incorporate_evidence(base: ConfactorSet, obs: &Observation) -> ConfactorSet {
    let e = obs.context();
    base.into_iter()
        .filter(|r| r.body.compatible(e))
        .map(|r| Confactor {
            body: r.body.restrict(|v| !e.assigns(v)),
            table: r.table.set(e),
            pure_for: r.pure_for.into_iter().filter(|v| !e.assigns(*v)).collect(),
            provenance: r.provenance,
        })
        .filter(|r| !is_positive_constant(r))
        .collect()
}

/// A zero constant is kept so that zero-mass evidence reaches normalization.
fn is_positive_constant(r: &Confactor) -> bool {
    r.body.is_empty() && r.table.is_scalar() && r.table.values()[0] > 0.0
}

/// Absorbs `r` into the complete multiset `seed` of confactors for `y`.
pub fn absorb(
    seed: ConfactorSet,
    r: &Confactor,
    y: VariableId,
    catalog: &DomainCatalog,
    counts: &mut CostCounters,
) -> Result<ConfactorSet> {
    let pending: Vec<Pending> = seed.into_iter().map(Pending::from_confactor).collect();
    absorb_pending(pending, r, y, catalog, counts)?
        .into_iter()
        .map(|p| p.materialize(counts))
        .collect()
}

/// Sums `y` out of every table containing it; members pure for `y` are deleted instead.
pub fn sum_out_table_occurrences(
    base: ConfactorSet,
    y: VariableId,
    counts: &mut CostCounters,
) -> Result<ConfactorSet> {
    for (i, r) in base.iter().enumerate() {
        if !r.table.contains(y) {
            continue;
        }
        let clash = base
            .iter()
            .enumerate()
            .any(|(j, s)| j != i && s.involves(y) && s.body.compatible(&r.body));
        if clash {
            return Err(Error::Invariant(format!(
                "another confactor containing {y} applies with {}",
                r.body
            )));
        }
    }
    let mut out = Vec::with_capacity(base.len());
    for r in base {
        if !r.table.contains(y) {
            out.push(r);
        } else if !r.pure_for.contains(&y) {
            out.push(sum_table(r, y, counts)?);
        }
    }
    Ok(out)
}

fn sum_table(r: Confactor, y: VariableId, counts: &mut CostCounters) -> Result<Confactor> {
    Ok(Confactor {
        table: r.table.sum_out(y, counts)?,
        body: r.body,
        provenance: r.provenance,
        pure_for: r.pure_for,
    })
}

/// Pairwise sum of two complete multisets over compatible bodies.
pub fn add_groups(
    g1: &[Confactor],
    g2: &[Confactor],
    counts: &mut CostCounters,
) -> Result<ConfactorSet> {
    let mut out = Vec::new();
    for a in g1 {
        for b in g2 {
            if !a.body.compatible(&b.body) {
                continue;
            }
            let table = a.table.set(&b.body).add(&b.table.set(&a.body), counts);
            out.push(Confactor {
                body: a.body.union(&b.body)?,
                table,
                provenance: a.provenance.union(&b.provenance).copied().collect(),
                pure_for: a.pure_for.intersection(&b.pure_for).copied().collect(),
            });
        }
    }
    Ok(out)
}

/// Left fold of [`add_groups`] across the per-value groups of the eliminated variable.
pub fn sum_out_body_occurrences(
    groups: Vec<ConfactorSet>,
    counts: &mut CostCounters,
) -> Result<ConfactorSet> {
    let non_empty = groups.iter().filter(|g| !g.is_empty()).count();
    if non_empty == 0 {
        return Ok(Vec::new());
    }
    if non_empty != groups.len() {
        return Err(Error::Invariant(
            "a value of the eliminated variable has no confactors".into(),
        ));
    }
    let mut it = groups.into_iter();
    let mut acc = it.next().expect("at least one group");
    for g in it {
        acc = add_groups(&acc, &g, counts)?;
    }
    Ok(acc)
}

impl<'a> CveRun<'a> {
    pub fn new(net: &'a ContextualBeliefNetwork, obs: &Observation, options: CveOptions) -> Result<Self> {
        obs.context().check(&net.catalog)?;
        let initial: ConfactorSet = net.confactors().cloned().collect();
        let base: Vec<Entry> = incorporate_evidence(initial, obs)
            .into_iter()
            .enumerate()
            .map(|(i, conf)| Entry { id: i as u64, conf })
            .collect();
        let next_id = base.len() as u64;
        let run = CveRun {
            net,
            obs: obs.clone(),
            base,
            next_id,
            options,
            eliminated: Vec::new(),
            counts: CostCounters::default(),
            trace: Vec::new(),
        };
        if options.audit {
            run.audit()?;
        }
        Ok(run)
    }

    pub fn base(&self) -> impl Iterator<Item = &Confactor> {
        self.base.iter().map(|e| &e.conf)
    }

    pub fn base_set(&self) -> ConfactorSet {
        self.base().cloned().collect()
    }

    pub fn network(&self) -> &ContextualBeliefNetwork {
        self.net
    }

    pub(crate) fn push(&mut self, conf: Confactor) {
        self.base.push(Entry { id: self.next_id, conf });
        self.next_id += 1;
    }

    pub fn eliminate(&mut self, y: VariableId) -> Result<()> {
        if self.obs.context().assigns(y) || self.eliminated.contains(&y) {
            return Err(Error::Config(format!(
                "'{}' cannot be eliminated",
                self.net.catalog.name(y)
            )));
        }
        let before: BTreeSet<u64> = self.base.iter().map(|e| e.id).collect();
        match self.options.mode {
            CveMode::Absorption => self.eliminate_absorbing(y)?,
            CveMode::PairwiseSplit => self.eliminate_pairwise(y)?,
        }
        for e in &mut self.base {
            e.conf.provenance.remove(&y);
            e.conf.pure_for.remove(&y);
        }
        self.base
            .retain(|e| !is_positive_constant(&e.conf));
        self.eliminated.push(y);
        self.record_step(y, &before);
        if self.options.audit {
            self.audit()?;
        }
        Ok(())
    }

    fn record_step(&mut self, y: VariableId, before: &BTreeSet<u64>) {
        let created: Vec<&Entry> = self.base.iter().filter(|e| !before.contains(&e.id)).collect();
        let created_size: usize = created.iter().map(|e| e.conf.size()).sum();
        let touched: BTreeSet<VariableId> = created
            .iter()
            .flat_map(|e| e.conf.provenance.iter().copied())
            .collect();
        let family_size: usize = self
            .base
            .iter()
            .filter(|e| !before.contains(&e.id) || e.conf.provenance.iter().any(|v| touched.contains(v)))
            .map(|e| e.conf.size())
            .sum();
        self.counts.note_elimination(family_size);
        self.trace.push(CveStep {
            var: y,
            created_size,
            family_size,
        });
    }

    fn eliminate_absorbing(&mut self, y: VariableId) -> Result<()> {
        let mut rest = Vec::new();
        let mut seed = Vec::new();
        let mut others = Vec::new();
        for e in std::mem::take(&mut self.base) {
            if !e.conf.involves(y) {
                rest.push(e);
            } else if e.conf.is_for(y) {
                seed.push(e);
            } else {
                others.push(e);
            }
        }
        self.base = rest;
        if seed.is_empty() {
            if others.is_empty() {
                return Ok(());
            }
            return Err(Error::Invariant(format!("no confactors for {y}")));
        }
        others.sort_by_key(|e| (e.conf.body.len(), e.id));
        let net = self.net;
        let catalog = &net.catalog;
        let mut pending: Vec<Pending> = seed.into_iter().map(|e| Pending::from_confactor(e.conf)).collect();
        for r in &others {
            pending = absorb_pending(pending, &r.conf, y, catalog, &mut self.counts)?;
        }
        let card = catalog.card(y);
        let mut groups: Vec<ConfactorSet> = vec![Vec::new(); card];
        let mut created = Vec::new();
        for p in pending {
            if let Some(v) = p.body.get(y) {
                let mut c = p.materialize(&mut self.counts)?;
                c.body = c.body.without(y);
                groups[v].push(c);
            } else if !p.in_table(y) {
                return Err(Error::Invariant(format!("absorbed confactor lost {y}")));
            } else if !p.pure_for.contains(&y) {
                let c = p.materialize(&mut self.counts)?;
                created.push(sum_table(c, y, &mut self.counts)?);
            }
        }
        created.extend(sum_out_body_occurrences(groups, &mut self.counts)?);
        for c in created {
            self.push(c);
        }
        Ok(())
    }

    /// Multiplies the remaining confactors for each query assignment and normalizes.
    pub fn finish(mut self, query: &[VariableId]) -> Result<(Posterior, CostCounters)> {
        let cat = &self.net.catalog;
        for e in &self.base {
            if let Some(v) = e
                .conf
                .body
                .vars()
                .chain(e.conf.table.vars().iter().copied())
                .find(|v| !query.contains(v))
            {
                return Err(Error::Invariant(format!(
                    "'{}' was not eliminated",
                    cat.name(v)
                )));
            }
        }
        let cards = cat.cards(query);
        let mut values = Vec::with_capacity(cards.iter().product());
        for_each_assignment(&cards, |idx| {
            let q = Context::from_pairs(query.iter().copied().zip(idx.iter().copied())).unwrap();
            let mut p = 1.0;
            let mut n = 0u64;
            for e in &self.base {
                if e.conf.applicable(&q) {
                    p *= e.conf.table.value_in(&q).unwrap_or(0.0);
                    n += 1;
                }
            }
            self.counts.multiplications += n.saturating_sub(1);
            values.push(p);
        });
        let t = Table::new(query.to_vec(), cards, values)?;
        let post = Posterior::from_unnormalized(self.net, query, t)?;
        Ok((post, self.counts))
    }
}

pub fn cve_query(
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
    order: &EliminationOrder,
    options: CveOptions,
) -> Result<(Posterior, CostCounters)> {
    check_query(net, query, obs)?;
    let mut run = CveRun::new(net, obs, options)?;
    for &y in &order.0 {
        run.eliminate(y)?;
    }
    run.finish(query)
}
