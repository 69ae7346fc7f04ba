//! Contextual factors and the context-aware primitives on them.

use std::collections::BTreeSet;

use crate::context::{Context, DomainCatalog, VariableId};
use crate::counters::CostCounters;
use crate::error::{Error, Result};
use crate::table::Table;

/// A body context paired with a table over variables the body does not assign.
#[derive(Debug, Clone, PartialEq)]
pub struct Confactor {
    pub body: Context,
    pub table: Table,
    /// Variables this confactor is a confactor for.
    pub provenance: BTreeSet<VariableId>,
    /// Subset of `provenance` whose sum-out is known to be all ones.
    pub pure_for: BTreeSet<VariableId>,
}

/// Multiset of confactors; order is insertion order and duplicates are kept.
pub type ConfactorSet = Vec<Confactor>;

impl Confactor {
    pub fn new(body: Context, table: Table) -> Result<Self> {
        if table.vars().iter().any(|v| body.assigns(*v)) {
            return Err(Error::Invariant(
                "confactor body and table share a variable".into(),
            ));
        }
        Ok(Confactor {
            body,
            table,
            provenance: BTreeSet::new(),
            pure_for: BTreeSet::new(),
        })
    }

    /// Marks this confactor as defining the conditional probability of `x`.
    pub fn for_variable(mut self, x: VariableId) -> Self {
        self.provenance.insert(x);
        self.pure_for.insert(x);
        self
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    /// True iff `v` appears in the body or the table.
    pub fn involves(&self, v: VariableId) -> bool {
        self.body.assigns(v) || self.table.contains(v)
    }

    pub fn is_for(&self, v: VariableId) -> bool {
        self.provenance.contains(&v)
    }

    pub fn applicable(&self, c: &Context) -> bool {
        self.body.compatible(c)
    }

    /// Table entry selected by `c`; `c` must be compatible and assign every table variable.
    pub fn value_at(&self, c: &Context) -> Result<f64> {
        if !self.applicable(c) {
            return Err(Error::IncompatibleContexts);
        }
        self.table.value_in(c)
    }

    /// One piece per value of `y`; a table occurrence of `y` is set away.
    pub fn split_on_variable(
        &self,
        y: VariableId,
        catalog: &DomainCatalog,
        counts: &mut CostCounters,
    ) -> Result<ConfactorSet> {
        if self.body.assigns(y) {
            return Err(Error::SplitOnAssignedVariable);
        }
        let card = catalog.card(y);
        let in_table = self.table.contains(y);
        let mut out = Vec::with_capacity(card);
        for x in 0..card {
            let body = self.body.with(y, x)?;
            let table = if in_table {
                self.table.set(&Context::single(y, x))
            } else {
                self.table.clone()
            };
            let mut pure_for = self.pure_for.clone();
            if in_table {
                pure_for.remove(&y);
            }
            out.push(Confactor {
                body,
                table,
                provenance: self.provenance.clone(),
                pure_for,
            });
        }
        counts.splits += (card - 1) as u64;
        Ok(out)
    }

    /// Variables of `c` not assigned in the body, table variables first, then ascending id.
    pub fn split_order(&self, c: &Context) -> Vec<VariableId> {
        let mut in_table: Vec<VariableId> = c
            .vars()
            .filter(|v| !self.body.assigns(*v) && self.table.contains(*v))
            .collect();
        let rest: Vec<VariableId> = c
            .vars()
            .filter(|v| !self.body.assigns(*v) && !self.table.contains(*v))
            .collect();
        in_table.sort();
        in_table.extend(rest);
        in_table
    }

    /// Splits on `c` following `order`; returns the residual pieces and the kept piece.
    pub fn split_along(
        &self,
        c: &Context,
        order: &[VariableId],
        catalog: &DomainCatalog,
        counts: &mut CostCounters,
    ) -> Result<(ConfactorSet, Confactor)> {
        if !self.body.compatible(c) {
            return Err(Error::IncompatibleContexts);
        }
        let mut residual = Vec::new();
        let mut current = self.clone();
        for &v in order {
            let target = c
                .get(v)
                .ok_or_else(|| Error::Invariant(format!("split order names {v} outside context")))?;
            if current.body.assigns(v) {
                continue;
            }
            for piece in current.split_on_variable(v, catalog, counts)? {
                if piece.body.get(v) == Some(target) {
                    current = piece;
                } else {
                    residual.push(piece);
                }
            }
        }
        if !c.is_subset_of(&current.body) {
            return Err(Error::Invariant("split order does not cover context".into()));
        }
        Ok((residual, current))
    }

    /// Pieces incompatible with `c` left over from splitting on it.
    pub fn residual(
        &self,
        c: &Context,
        catalog: &DomainCatalog,
        counts: &mut CostCounters,
    ) -> Result<ConfactorSet> {
        let order = self.split_order(c);
        Ok(self.split_along(c, &order, catalog, counts)?.0)
    }

    /// The piece compatible with `c`: body extended by `c`, table set on `c`.
    pub fn split_keep(&self, c: &Context) -> Result<Confactor> {
        let body = self.body.union(c)?;
        Ok(Confactor {
            body,
            table: self.table.set(c),
            provenance: self.provenance.clone(),
            pure_for: self
                .pure_for
                .iter()
                .copied()
                .filter(|v| !(c.assigns(*v) && self.table.contains(*v)))
                .collect(),
        })
    }
}

/// Number of residual pieces from splitting `r` on `c`: sum of (|dom|-1) over new variables.
pub fn count_split_pieces(r: &Confactor, c: &Context, catalog: &DomainCatalog) -> usize {
    c.vars()
        .filter(|v| !r.body.assigns(*v))
        .map(|v| catalog.card(v) - 1)
        .sum()
}

/// Total table entries across a multiset.
pub fn total_size(set: &[Confactor]) -> usize {
    set.iter().map(Confactor::size).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> DomainCatalog {
        let mut c = DomainCatalog::new();
        for n in ["A", "B", "C", "D", "E"] {
            c.add_binary(n).unwrap();
        }
        c
    }

    fn v(i: usize) -> VariableId {
        VariableId(i)
    }

    fn ctx(p: &[(usize, usize)]) -> Context {
        Context::from_pairs(p.iter().map(|&(a, x)| (v(a), x))).unwrap()
    }

    #[test]
    fn body_and_table_disjoint() {
        let t = Table::filled(vec![v(0)], vec![2], 0.5);
        assert!(Confactor::new(ctx(&[(0, 0)]), t).is_err());
    }

    #[test]
    fn residual_splits_table_variables_first() {
        let cat = setup();
        let mut k = CostCounters::default();
        let t1 = Table::new(vec![v(2), v(3)], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let r = Confactor::new(ctx(&[(0, 0), (1, 0)]), t1).unwrap();
        let c = ctx(&[(2, 0), (4, 0)]);
        let res = r.residual(&c, &cat, &mut k).unwrap();
        assert_eq!(res.len(), 2);
        assert_eq!(res[0].body, ctx(&[(0, 0), (1, 0), (2, 1)]));
        assert_eq!(res[0].table.vars(), &[v(3)]);
        assert_eq!(res[1].body, ctx(&[(0, 0), (1, 0), (2, 0), (4, 1)]));
        let keep = r.split_keep(&c).unwrap();
        assert_eq!(keep.body, ctx(&[(0, 0), (1, 0), (2, 0), (4, 0)]));
        assert_eq!(keep.table.values(), &[0.1, 0.2]);
        assert_eq!(k.splits, 2);
        assert_eq!(count_split_pieces(&r, &c, &cat), 2);
    }

    #[test]
    fn splitting_assigned_variable_fails() {
        let cat = setup();
        let r = Confactor::new(ctx(&[(0, 0)]), Table::scalar(1.0)).unwrap();
        let mut k = CostCounters::default();
        assert_eq!(
            r.split_on_variable(v(0), &cat, &mut k),
            Err(Error::SplitOnAssignedVariable)
        );
    }

    #[test]
    fn value_at_needs_table_variables() {
        let t = Table::new(vec![v(1), v(4)], vec![2, 2], vec![0.55, 0.45, 0.3, 0.7]).unwrap();
        let r = Confactor::new(ctx(&[(0, 0)]), t).unwrap();
        assert_eq!(r.value_at(&ctx(&[(0, 0), (1, 0), (4, 0)])).unwrap(), 0.55);
        assert_eq!(
            r.value_at(&ctx(&[(0, 0), (1, 0)])),
            Err(Error::ContextDoesNotDetermineTable)
        );
    }

    #[test]
    fn split_on_own_table_variable_drops_purity() {
        let cat = setup();
        let t = Table::new(vec![v(1)], vec![2], vec![0.3, 0.7]).unwrap();
        let r = Confactor::new(Context::empty(), t).unwrap().for_variable(v(1));
        let mut k = CostCounters::default();
        let pieces = r.split_on_variable(v(1), &cat, &mut k).unwrap();
        assert!(pieces.iter().all(|p| p.is_for(v(1)) && p.pure_for.is_empty()));
        let pieces = r.split_on_variable(v(0), &cat, &mut k).unwrap();
        assert!(pieces.iter().all(|p| p.pure_for.contains(&v(1))));
    }
}
