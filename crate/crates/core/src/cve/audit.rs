//! Debug checks of the program invariant and of completeness.

use crate::context::{Context, VariableId};
use crate::error::{Error, Result};
use crate::network::covers;
use crate::oracle::evidence_marginal;
use crate::table::for_each_assignment;

use super::CveRun;

const AUDIT_STATE_CAP: u128 = 1 << 20;
const AUDIT_TOLERANCE: f64 = 1e-9;

impl CveRun<'_> {
    /// Variables neither eliminated nor observed.
    pub fn remaining(&self) -> Vec<VariableId> {
        self.net
            .catalog
            .ids()
            .filter(|v| !self.eliminated.contains(v) && !self.obs.context().assigns(*v))
            .collect()
    }

    pub fn audit(&self) -> Result<()> {
        let cat = &self.net.catalog;
        let remaining = self.remaining();
        for &x in &remaining {
            let fam: Vec<&Context> = self
                .base
                .iter()
                .filter(|e| e.conf.is_for(x))
                .map(|e| &e.conf.body)
                .collect();
            for i in 0..fam.len() {
                for j in (i + 1)..fam.len() {
                    if fam[i].compatible(fam[j]) {
                        return Err(Error::Invariant(format!(
                            "confactors for '{}' overlap: {} and {}",
                            cat.name(x),
                            fam[i],
                            fam[j]
                        )));
                    }
                }
            }
            if !fam.is_empty() && !covers(fam.iter().copied(), cat) {
                return Err(Error::Invariant(format!(
                    "confactors for '{}' do not cover",
                    cat.name(x)
                )));
            }
        }

        let marginal = evidence_marginal(self.net, &remaining, &self.obs, AUDIT_STATE_CAP)?;
        let z_oracle = marginal.total();
        let cards = cat.cards(&remaining);
        let mut products = Vec::with_capacity(marginal.len());
        let mut failure = None;
        for_each_assignment(&cards, |idx| {
            let c = Context::from_pairs(remaining.iter().copied().zip(idx.iter().copied())).unwrap();
            let mut p = 1.0;
            for e in &self.base {
                if e.conf.applicable(&c) {
                    p *= e.conf.table.value_in(&c).unwrap_or(f64::NAN);
                }
            }
            if failure.is_none() {
                if let Some(v) = remaining.iter().find(|v| {
                    !self
                        .base
                        .iter()
                        .any(|e| e.conf.involves(**v) && e.conf.applicable(&c))
                }) {
                    failure = Some(format!(
                        "no applicable confactor contains '{}' at {}",
                        cat.name(*v),
                        cat.describe(&c)
                    ));
                }
            }
            products.push(p);
        });
        if let Some(f) = failure {
            return Err(Error::Invariant(f));
        }
        let z_base: f64 = products.iter().sum();
        if z_oracle <= 0.0 {
            return Ok(());
        }
        for (k, (&p, &q)) in products.iter().zip(marginal.values()).enumerate() {
            let (p, q) = (p / z_base, q / z_oracle);
            if !(p - q).abs().le(&AUDIT_TOLERANCE) {
                return Err(Error::Invariant(format!(
                    "program invariant fails at entry {k}: {p} vs {q}"
                )));
            }
        }
        Ok(())
    }
}
