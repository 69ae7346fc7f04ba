//! Confactors whose table is an unevaluated product, used while absorbing.

use std::collections::BTreeSet;

use crate::confactor::Confactor;
use crate::context::{Context, DomainCatalog, VariableId};
use crate::counters::CostCounters;
use crate::error::{Error, Result};
use crate::table::Table;
use crate::ve::{multiply_counted, MultPolicy};

#[derive(Debug, Clone)]
pub(crate) struct Pending {
    pub body: Context,
    /// Factors whose product is the table; never empty.
    pub factors: Vec<Table>,
    pub provenance: BTreeSet<VariableId>,
    pub pure_for: BTreeSet<VariableId>,
}

impl Pending {
    pub fn from_confactor(r: Confactor) -> Self {
        Pending {
            body: r.body,
            factors: vec![r.table],
            provenance: r.provenance,
            pure_for: r.pure_for,
        }
    }

    pub fn in_table(&self, v: VariableId) -> bool {
        self.factors.iter().any(|t| t.contains(v))
    }

    fn set_on(&self, c: &Context) -> Vec<Table> {
        self.factors.iter().map(|t| t.set(c)).collect()
    }

    /// Splits on every variable of `c` the body leaves open: other table variables first,
    /// then body-only variables, then `last`, so residuals keep their purity for `last`.
    /// Returns the residual pieces and the piece compatible with `c`.
    pub fn split(
        self,
        c: &Context,
        last: VariableId,
        catalog: &DomainCatalog,
        counts: &mut CostCounters,
    ) -> Result<(Vec<Pending>, Pending)> {
        if !self.body.compatible(c) {
            return Err(Error::IncompatibleContexts);
        }
        let open = |v: &VariableId| !self.body.assigns(*v) && *v != last;
        let mut order: Vec<VariableId> = c.vars().filter(|v| open(v) && self.in_table(*v)).collect();
        order.extend(c.vars().filter(|v| open(v) && !self.in_table(*v)));
        if c.assigns(last) && !self.body.assigns(last) {
            order.push(last);
        }
        let mut residual = Vec::new();
        let mut current = self;
        for v in order {
            let target = c.get(v).expect("split variable comes from the context");
            let in_table = current.in_table(v);
            let card = catalog.card(v);
            counts.splits += (card - 1) as u64;
            let mut pure_for = current.pure_for.clone();
            if in_table {
                pure_for.remove(&v);
            }
            for x in (0..card).filter(|&x| x != target) {
                let sel = Context::single(v, x);
                residual.push(Pending {
                    body: current.body.with(v, x)?,
                    factors: if in_table { current.set_on(&sel) } else { current.factors.clone() },
                    provenance: current.provenance.clone(),
                    pure_for: pure_for.clone(),
                });
            }
            let sel = Context::single(v, target);
            current = Pending {
                body: current.body.with(v, target)?,
                factors: if in_table { current.set_on(&sel) } else { current.factors },
                provenance: current.provenance,
                pure_for,
            };
        }
        Ok((residual, current))
    }

    /// Evaluates the product in ascending-size order.
    pub fn materialize(self, counts: &mut CostCounters) -> Result<Confactor> {
        let table = if self.factors.len() == 1 {
            self.factors.into_iter().next().expect("one factor")
        } else {
            multiply_counted(&self.factors, &MultPolicy::AscendingSize, counts)?
        };
        Ok(Confactor {
            body: self.body,
            table,
            provenance: self.provenance,
            pure_for: self.pure_for,
        })
    }
}

/// Multiplies `r` into the complete multiset `seed` without splitting `r`.
///
/// `eliminating` is the variable whose confactors form `seed`; it decides purity.
pub(crate) fn absorb_pending(
    seed: Vec<Pending>,
    r: &Confactor,
    eliminating: VariableId,
    catalog: &DomainCatalog,
    counts: &mut CostCounters,
) -> Result<Vec<Pending>> {
    let mut out = Vec::with_capacity(seed.len() + 2);
    for m in seed {
        if !m.body.compatible(&r.body) {
            out.push(m);
            continue;
        }
        let seed_pure = m.pure_for.contains(&eliminating);
        let seed_body = m.body.clone();
        let (residual, keep) = m.split(&r.body, eliminating, catalog, counts)?;
        out.extend(residual);
        let mut factors = Vec::with_capacity(keep.factors.len() + 1);
        factors.push(r.table.set(&seed_body));
        factors.extend(keep.factors);
        let mut provenance = keep.provenance;
        provenance.extend(r.provenance.iter().copied());
        out.push(Pending {
            body: keep.body,
            factors,
            provenance,
            pure_for: if seed_pure { r.pure_for.clone() } else { BTreeSet::new() },
        });
    }
    Ok(out)
}
