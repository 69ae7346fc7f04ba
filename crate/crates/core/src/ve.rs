//! Tabular variable elimination.

use crate::context::VariableId;
use crate::counters::CostCounters;
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::order::EliminationOrder;
use crate::posterior::{check_query, Posterior};
use crate::table::Table;

/// How a list of tables is multiplied together.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MultPolicy {
    /// Ascending size (ties by variable set), then left fold.
    #[default]
    AscendingSize,
    /// ((f1 f2) f3) ... in list order.
    LeftFold,
    /// f1 (f2 (f3 ...)) in list order.
    RightFold,
    /// Left fold in the given index order.
    Permutation(Vec<usize>),
    /// No intermediate tables: every result entry costs k-1 multiplications.
    Recompute,
}

/// Sort key shared by every engine so equal schedules multiply in equal order.
pub(crate) fn size_key(vars: &[VariableId], size: usize) -> (usize, Vec<VariableId>) {
    let mut v = vars.to_vec();
    v.sort();
    (size, v)
}

/// Product of `fs` under `policy`, with the number of multiplications performed.
pub fn multiply_factors(fs: &[Table], policy: &MultPolicy) -> Result<(Table, u64)> {
    let mut counts = CostCounters::default();
    let t = multiply_counted(fs, policy, &mut counts)?;
    Ok((t, counts.multiplications))
}

pub(crate) fn multiply_counted(
    fs: &[Table],
    policy: &MultPolicy,
    counts: &mut CostCounters,
) -> Result<Table> {
    if fs.is_empty() {
        return Err(Error::Config("nothing to multiply".into()));
    }
    let seq: Vec<&Table> = match policy {
        MultPolicy::AscendingSize => {
            let mut s: Vec<&Table> = fs.iter().collect();
            s.sort_by_cached_key(|t| size_key(t.vars(), t.len()));
            s
        }
        MultPolicy::Permutation(p) => {
            let mut seen = vec![false; fs.len()];
            if p.len() != fs.len() || p.iter().any(|&i| i >= fs.len() || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::Config("multiplication order is not a permutation".into()));
            }
            p.iter().map(|&i| &fs[i]).collect()
        }
        _ => fs.iter().collect(),
    };
    match policy {
        MultPolicy::RightFold => {
            let mut acc = seq[seq.len() - 1].clone();
            for t in seq[..seq.len() - 1].iter().rev() {
                acc = t.product(&acc, counts);
            }
            Ok(acc)
        }
        MultPolicy::Recompute => {
            let mut scratch = CostCounters::default();
            let mut acc = seq[0].clone();
            for t in &seq[1..] {
                acc = acc.product(t, &mut scratch);
            }
            counts.multiplications += ((seq.len() - 1) * acc.len()) as u64;
            counts.note_table(acc.len());
            Ok(acc)
        }
        _ => {
            let mut acc = seq[0].clone();
            for t in &seq[1..] {
                acc = acc.product(t, counts);
            }
            Ok(acc)
        }
    }
}

/// Per-elimination record: the variable and the size of what the step produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EliminationStep {
    pub var: VariableId,
    pub result_size: usize,
}

/// Working state of one tabular query.
pub struct VeRun<'a> {
    net: &'a ContextualBeliefNetwork,
    factors: Vec<Table>,
    policy: MultPolicy,
    /// Set when a dropped variable-free factor was zero.
    zero_mass: bool,
    pub counts: CostCounters,
    pub trace: Vec<EliminationStep>,
}

impl<'a> VeRun<'a> {
    /// Expands every family, sets the evidence, and drops variable-free factors.
    pub fn new(net: &'a ContextualBeliefNetwork, obs: &Observation, policy: MultPolicy) -> Result<Self> {
        let mut factors = Vec::new();
        let mut zero_mass = false;
        for x in net.catalog.ids() {
            let t = net.family_table_given(x, obs.context())?;
            if !t.is_scalar() {
                factors.push(t);
            } else if t.values()[0] <= 0.0 {
                zero_mass = true;
            }
        }
        Ok(VeRun {
            net,
            factors,
            policy,
            zero_mass,
            counts: CostCounters::default(),
            trace: Vec::new(),
        })
    }

    pub fn factors(&self) -> &[Table] {
        &self.factors
    }

    pub fn eliminate(&mut self, y: VariableId) -> Result<()> {
        let (with, without): (Vec<Table>, Vec<Table>) =
            std::mem::take(&mut self.factors).into_iter().partition(|t| t.contains(y));
        self.factors = without;
        if with.is_empty() {
            self.trace.push(EliminationStep { var: y, result_size: 0 });
            return Ok(());
        }
        let prod = multiply_counted(&with, &self.policy, &mut self.counts)?;
        let summed = prod.sum_out(y, &mut self.counts)?;
        self.counts.note_elimination(summed.len());
        self.trace.push(EliminationStep {
            var: y,
            result_size: summed.len(),
        });
        if !summed.is_scalar() {
            self.factors.push(summed);
        } else if summed.values()[0] <= 0.0 {
            self.zero_mass = true;
        }
        Ok(())
    }

    /// Multiplies what remains and normalizes over the query.
    pub fn finish(mut self, query: &[VariableId]) -> Result<(Posterior, CostCounters)> {
        if self.zero_mass {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let prod = if self.factors.is_empty() {
            Table::scalar(1.0)
        } else {
            multiply_counted(&self.factors, &self.policy, &mut self.counts)?
        };
        let post = Posterior::from_unnormalized(self.net, query, prod)?;
        Ok((post, self.counts))
    }
}

pub fn ve_query(
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
    order: &EliminationOrder,
    policy: MultPolicy,
) -> Result<(Posterior, CostCounters)> {
    check_query(net, query, obs)?;
    let mut run = VeRun::new(net, obs, policy)?;
    for &y in &order.0 {
        run.eliminate(y)?;
    }
    run.finish(query)
}
