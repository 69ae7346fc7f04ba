//! Tree-based elimination: VE's schedule with each factor held as a complete confactor multiset.

use std::collections::BTreeSet;

use crate::confactor::{total_size, Confactor, ConfactorSet};
use crate::context::{Context, DomainCatalog, VariableId};
use crate::counters::CostCounters;
use crate::cve::sum_out_body_occurrences;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::order::EliminationOrder;
use crate::posterior::{check_query, Posterior};
use crate::table::{for_each_assignment, Table};
use crate::ve::{size_key, EliminationStep};

/// One factor of the VE derivation, represented by mutually exclusive, covering confactors.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedFactor {
    /// Identifiers of the initial families merged into this factor.
    pub ids: BTreeSet<usize>,
    /// Variables of the corresponding VE factor, ascending.
    pub scope: Vec<VariableId>,
    pub members: ConfactorSet,
}

impl GroupedFactor {
    pub fn ve_size(&self, cat: &DomainCatalog) -> usize {
        self.scope.iter().map(|v| cat.card(*v)).product()
    }

    pub fn total_size(&self) -> usize {
        total_size(&self.members)
    }

    /// Dense table over the scope.
    pub fn expand(&self, cat: &DomainCatalog) -> Result<Table> {
        let cards = cat.cards(&self.scope);
        let mut err = None;
        let t = Table::from_fn(self.scope.clone(), cards, |idx| {
            let c = Context::from_pairs(self.scope.iter().copied().zip(idx.iter().copied())).unwrap();
            match self.members.iter().find(|m| m.applicable(&c)) {
                Some(m) => m.table.value_in(&c).unwrap_or(0.0),
                None => {
                    err = Some(Error::Invariant(format!("grouped factor does not cover {c}")));
                    0.0
                }
            }
        })?;
        err.map_or(Ok(t), Err)
    }
}

/// Multiplies every compatible pair of members; the result's total never exceeds the VE size.
pub fn tve_multiply(
    g1: &GroupedFactor,
    g2: &GroupedFactor,
    cat: &DomainCatalog,
    counts: &mut CostCounters,
) -> Result<GroupedFactor> {
    let mut order1: Vec<&Confactor> = g1.members.iter().collect();
    let mut order2: Vec<&Confactor> = g2.members.iter().collect();
    order1.sort_by_key(|m| m.body.len());
    order2.sort_by_key(|m| m.body.len());
    let mut members = Vec::new();
    for a in &order1 {
        for b in &order2 {
            if !a.body.compatible(&b.body) {
                continue;
            }
            let table = a.table.set(&b.body).product(&b.table.set(&a.body), counts);
            members.push(Confactor {
                body: a.body.union(&b.body)?,
                table,
                provenance: a.provenance.union(&b.provenance).copied().collect(),
                pure_for: BTreeSet::new(),
            });
        }
    }
    let mut scope: Vec<VariableId> = g1.scope.iter().chain(&g2.scope).copied().collect();
    scope.sort();
    scope.dedup();
    let g = GroupedFactor {
        ids: g1.ids.union(&g2.ids).copied().collect(),
        scope,
        members,
    };
    if g.total_size() > g.ve_size(cat) {
        return Err(Error::Invariant(format!(
            "grouped product of size {} exceeds tabular size {}",
            g.total_size(),
            g.ve_size(cat)
        )));
    }
    Ok(g)
}

fn sum_out_group(
    g: GroupedFactor,
    y: VariableId,
    cat: &DomainCatalog,
    counts: &mut CostCounters,
) -> Result<GroupedFactor> {
    let card = cat.card(y);
    let mut groups: Vec<ConfactorSet> = vec![Vec::new(); card];
    let mut members = Vec::new();
    for m in g.members {
        if let Some(v) = m.body.get(y) {
            groups[v].push(Confactor {
                body: m.body.without(y),
                ..m
            });
        } else if m.table.contains(y) {
            members.push(Confactor {
                table: m.table.sum_out(y, counts)?,
                ..m
            });
        } else {
            counts.additions += ((card - 1) * m.table.len()) as u64;
            members.push(Confactor {
                table: m.table.map(|x| x * card as f64),
                ..m
            });
        }
    }
    members.extend(sum_out_body_occurrences(groups, counts)?);
    let scope = g.scope.into_iter().filter(|v| *v != y).collect();
    Ok(GroupedFactor {
        ids: g.ids,
        scope,
        members,
    })
}

pub struct TveRun<'a> {
    net: &'a ContextualBeliefNetwork,
    groups: Vec<GroupedFactor>,
    /// Set when a dropped variable-free group was zero.
    zero_mass: bool,
    pub counts: CostCounters,
    pub trace: Vec<EliminationStep>,
}

impl<'a> TveRun<'a> {
    pub fn new(net: &'a ContextualBeliefNetwork, obs: &Observation) -> Result<Self> {
        let e = obs.context();
        e.check(&net.catalog)?;
        let mut groups = Vec::new();
        let mut zero_mass = false;
        for fam in net.families() {
            let scope: Vec<VariableId> = net
                .family_scope(fam.child)
                .into_iter()
                .filter(|v| !e.assigns(*v))
                .collect();
            if scope.is_empty() {
                zero_mass |= fam
                    .confactors
                    .iter()
                    .any(|r| r.body.compatible(e) && r.table.set(e).values()[0] <= 0.0);
                continue;
            }
            let members = fam
                .confactors
                .iter()
                .filter(|r| r.body.compatible(e))
                .map(|r| Confactor {
                    body: r.body.restrict(|v| !e.assigns(v)),
                    table: r.table.set(e),
                    provenance: r.provenance.clone(),
                    pure_for: BTreeSet::new(),
                })
                .collect();
            groups.push(GroupedFactor {
                ids: BTreeSet::from([fam.child.0]),
                scope,
                members,
            });
        }
        Ok(TveRun {
            net,
            groups,
            zero_mass,
            counts: CostCounters::default(),
            trace: Vec::new(),
        })
    }

    pub fn groups(&self) -> &[GroupedFactor] {
        &self.groups
    }

    fn multiply_all(&mut self, mut gs: Vec<GroupedFactor>) -> Result<GroupedFactor> {
        let cat = &self.net.catalog;
        gs.sort_by_cached_key(|g| size_key(&g.scope, g.ve_size(cat)));
        let mut it = gs.into_iter();
        let mut acc = it.next().ok_or_else(|| Error::Config("nothing to multiply".into()))?;
        for g in it {
            acc = tve_multiply(&acc, &g, cat, &mut self.counts)?;
        }
        Ok(acc)
    }

    pub fn eliminate(&mut self, y: VariableId) -> Result<()> {
        let (with, without): (Vec<_>, Vec<_>) =
            std::mem::take(&mut self.groups).into_iter().partition(|g| g.scope.contains(&y));
        self.groups = without;
        if with.is_empty() {
            self.trace.push(EliminationStep { var: y, result_size: 0 });
            return Ok(());
        }
        let prod = self.multiply_all(with)?;
        let summed = sum_out_group(prod, y, &self.net.catalog, &mut self.counts)?;
        let size = summed.total_size();
        self.counts.note_elimination(size);
        self.trace.push(EliminationStep { var: y, result_size: size });
        if !summed.scope.is_empty() {
            self.groups.push(summed);
        } else if summed.members.iter().any(|m| m.table.values()[0] <= 0.0) {
            self.zero_mass = true;
        }
        Ok(())
    }

    pub fn finish(mut self, query: &[VariableId]) -> Result<(Posterior, CostCounters)> {
        if self.zero_mass {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let net = self.net;
        let cat = &net.catalog;
        let unnormalized = if self.groups.is_empty() {
            Table::scalar(1.0)
        } else {
            let gs = std::mem::take(&mut self.groups);
            let g = self.multiply_all(gs)?;
            let cards = cat.cards(query);
            let mut values = Vec::new();
            let mut err = None;
            for_each_assignment(&cards, |idx| {
                let c = Context::from_pairs(query.iter().copied().zip(idx.iter().copied())).unwrap();
                match g.members.iter().find(|m| m.applicable(&c)) {
                    Some(m) => values.push(m.table.value_in(&c).unwrap_or(0.0)),
                    None => {
                        err = Some(Error::Invariant(format!("no member applies at {c}")));
                        values.push(0.0);
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            Table::new(query.to_vec(), cards, values)?
        };
        let post = Posterior::from_unnormalized(self.net, query, unnormalized)?;
        Ok((post, self.counts))
    }
}

pub fn tve_query(
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
    order: &EliminationOrder,
) -> Result<(Posterior, CostCounters)> {
    check_query(net, query, obs)?;
    let mut run = TveRun::new(net, obs)?;
    for &y in &order.0 {
        run.eliminate(y)?;
    }
    run.finish(query)
}
