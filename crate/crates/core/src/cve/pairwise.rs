//! Elimination by splitting compatible pairs, without absorption or ones pruning.

use crate::confactor::Confactor;
use crate::context::VariableId;
use crate::error::{Error, Result};

use super::{CveRun, Entry};

const ITERATION_LIMIT: usize = 1_000_000;

impl CveRun<'_> {
    pub(super) fn eliminate_pairwise(&mut self, y: VariableId) -> Result<()> {
        let (mut work, rest): (Vec<Entry>, Vec<Entry>) =
            std::mem::take(&mut self.base).into_iter().partition(|e| e.conf.involves(y));
        self.base = rest;
        let net = self.net;
        let catalog = &net.catalog;

        let mut steps = 0;
        while let Some((i, j)) = first_compatible_pair(&work, |a, b| a.body.compatible(&b.body)) {
            steps += 1;
            if steps > ITERATION_LIMIT {
                return Err(Error::Invariant("pairwise multiplication did not terminate".into()));
            }
            let b = work.remove(j).conf;
            let a = work.remove(i).conf;
            let (ra, ka) = a.split_along(&b.body, &a.split_order(&b.body), catalog, &mut self.counts)?;
            let (rb, kb) = b.split_along(&a.body, &b.split_order(&a.body), catalog, &mut self.counts)?;
            let table = ka.table.product(&kb.table, &mut self.counts);
            let product = Confactor {
                body: ka.body,
                table,
                provenance: ka.provenance.union(&kb.provenance).copied().collect(),
                pure_for: Default::default(),
            };
            for c in ra.into_iter().chain(rb).chain(std::iter::once(product)) {
                work.push(self.entry(c));
            }
        }

        let mut body_side = Vec::new();
        for e in work {
            if e.conf.table.contains(y) {
                let conf = e.conf;
                let table = conf.table.sum_out(y, &mut self.counts)?;
                let summed = Confactor { table, ..conf };
                self.push(summed);
            } else {
                body_side.push(e);
            }
        }

        steps = 0;
        let card = catalog.card(y);
        while !body_side.is_empty() {
            steps += 1;
            if steps > ITERATION_LIMIT {
                return Err(Error::Invariant("pairwise addition did not terminate".into()));
            }
            if let Some(members) = sibling_set(&body_side, y, card) {
                let mut picked: Vec<Confactor> = Vec::with_capacity(card);
                for &k in members.iter().rev() {
                    picked.push(body_side.remove(k).conf);
                }
                picked.reverse();
                let mut table = picked[0].table.clone();
                for p in &picked[1..] {
                    table = table.add(&p.table, &mut self.counts);
                }
                let mut provenance = picked[0].provenance.clone();
                for p in &picked[1..] {
                    provenance.extend(p.provenance.iter().copied());
                }
                self.push(Confactor {
                    body: picked[0].body.without(y),
                    table,
                    provenance,
                    pure_for: Default::default(),
                });
                continue;
            }
            let pair = first_compatible_pair(&body_side, |a, b| {
                let (ba, bb) = (a.body.without(y), b.body.without(y));
                ba != bb && ba.compatible(&bb)
            });
            let Some((i, j)) = pair else {
                return Err(Error::Invariant(format!(
                    "confactors with {y} in the body cannot be combined"
                )));
            };
            let b = body_side.remove(j).conf;
            let a = body_side.remove(i).conf;
            let (ba, bb) = (a.body.without(y), b.body.without(y));
            let (ra, ka) = a.split_along(&bb, &a.split_order(&bb), catalog, &mut self.counts)?;
            let (rb, kb) = b.split_along(&ba, &b.split_order(&ba), catalog, &mut self.counts)?;
            for c in ra.into_iter().chain(rb).chain([ka, kb]) {
                body_side.push(self.entry(c));
            }
        }
        Ok(())
    }

    fn entry(&mut self, conf: Confactor) -> Entry {
        let id = self.next_id;
        self.next_id += 1;
        Entry { id, conf }
    }
}

/// Lowest-id pair satisfying `ok`, as positions with `i < j`.
fn first_compatible_pair<F: Fn(&Confactor, &Confactor) -> bool>(
    work: &[Entry],
    ok: F,
) -> Option<(usize, usize)> {
    let mut idx: Vec<usize> = (0..work.len()).collect();
    idx.sort_by_key(|&k| work[k].id);
    for (n, &i) in idx.iter().enumerate() {
        for &j in &idx[n + 1..] {
            if ok(&work[i].conf, &work[j].conf) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// Positions of one confactor per value of `y` sharing the same remaining body, ascending.
fn sibling_set(work: &[Entry], y: VariableId, card: usize) -> Option<Vec<usize>> {
    for e in work {
        let b = e.conf.body.without(y);
        let mut slots: Vec<Option<usize>> = vec![None; card];
        for (k, f) in work.iter().enumerate() {
            if let Some(v) = f.conf.body.get(y) {
                if slots[v].is_none() && f.conf.body.without(y) == b {
                    slots[v] = Some(k);
                }
            }
        }
        if slots.iter().all(Option::is_some) {
            let mut found: Vec<usize> = slots.into_iter().flatten().collect();
            found.sort();
            return Some(found);
        }
    }
    None
}
