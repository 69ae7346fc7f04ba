//! Contextual belief networks: families of confactors, validation, and construction.

mod io;

pub use io::{from_json_str, load, load_unchecked, save, to_json_string};

use crate::confactor::Confactor;
use crate::context::{Context, DomainCatalog, VariableId};
use crate::error::{Error, Result};
use crate::table::{for_each_assignment, walk, Table};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// The confactors representing P(child | predecessors).
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub child: VariableId,
    pub confactors: Vec<Confactor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualBeliefNetwork {
    pub catalog: DomainCatalog,
    families: Vec<Family>,
}

/// Observed assignments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Observation(pub Context);

impl Observation {
    pub fn none() -> Self {
        Observation(Context::empty())
    }

    pub fn new(net: &ContextualBeliefNetwork, c: Context) -> Result<Self> {
        c.check(&net.catalog)?;
        Ok(Observation(c))
    }

    pub fn context(&self) -> &Context {
        &self.0
    }
}

/// Context and table-variable pairs describing one variable's parent contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentSkeleton {
    pub child: VariableId,
    pub pairs: Vec<(Context, Vec<VariableId>)>,
}

impl ContextualBeliefNetwork {
    /// A network with one empty family per catalog variable.
    pub fn new(catalog: DomainCatalog) -> Self {
        let families = catalog
            .ids()
            .map(|child| Family {
                child,
                confactors: Vec::new(),
            })
            .collect();
        ContextualBeliefNetwork { catalog, families }
    }

    pub fn set_family(&mut self, child: VariableId, confactors: Vec<Confactor>) {
        self.families[child.0].confactors = confactors
            .into_iter()
            .map(|c| {
                let mut c = c;
                c.provenance.insert(child);
                c.pure_for.insert(child);
                c
            })
            .collect();
    }

    pub fn family(&self, child: VariableId) -> &Family {
        &self.families[child.0]
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn var_count(&self) -> usize {
        self.catalog.len()
    }

    /// All confactors in family order.
    pub fn confactors(&self) -> impl Iterator<Item = &Confactor> {
        self.families.iter().flat_map(|f| f.confactors.iter())
    }

    pub fn total_confactor_size(&self) -> usize {
        self.confactors().map(Confactor::size).sum()
    }

    /// Variables mentioned by the family of `child`, ascending; `child` is last.
    pub fn family_scope(&self, child: VariableId) -> Vec<VariableId> {
        let mut vars: Vec<VariableId> = self.families[child.0]
            .confactors
            .iter()
            .flat_map(|c| c.body.vars().chain(c.table.vars().iter().copied()))
            .collect();
        vars.push(child);
        vars.sort();
        vars.dedup();
        vars
    }

    /// Size of the equivalent tabular CPT.
    pub fn tabular_size(&self) -> usize {
        self.catalog
            .ids()
            .map(|x| {
                self.family_scope(x)
                    .iter()
                    .map(|v| self.catalog.card(*v))
                    .product::<usize>()
            })
            .sum()
    }

    /// The family of `child` expanded to a dense table over its scope.
    pub fn family_table(&self, child: VariableId) -> Result<Table> {
        self.family_table_given(child, &Context::empty())
    }

    /// The family of `child` restricted to `e`, dense over the unobserved part of its scope.
    pub fn family_table_given(&self, child: VariableId, e: &Context) -> Result<Table> {
        let vars: Vec<VariableId> = self.family_scope(child).into_iter().filter(|v| !e.assigns(*v)).collect();
        let cards = self.catalog.cards(&vars);
        let n: usize = cards.iter().product();
        let dense_strides = {
            let mut s = vec![1usize; vars.len()];
            for k in (0..vars.len().saturating_sub(1)).rev() {
                s[k] = s[k + 1] * cards[k + 1];
            }
            s
        };
        let mut values = vec![f64::NAN; n];
        let mut filled = 0usize;
        for r in self.families[child.0].confactors.iter().filter(|r| r.body.compatible(e)) {
            let t = r.table.set(e);
            let t_strides = t.strides();
            let mut base = 0;
            let mut free_cards = Vec::new();
            let mut free_dense = Vec::new();
            let mut free_table = Vec::new();
            for (k, v) in vars.iter().enumerate() {
                match r.body.get(*v) {
                    Some(x) => base += x * dense_strides[k],
                    None => {
                        free_cards.push(cards[k]);
                        free_dense.push(dense_strides[k]);
                        free_table.push(t.position(*v).map_or(0, |p| t_strides[p]));
                    }
                }
            }
            walk(&free_cards, &[&free_dense, &free_table], &mut [base, 0], |o| {
                if values[o[0]].is_nan() {
                    filled += 1;
                }
                values[o[0]] = t.values()[o[1]];
            });
        }
        if filled != n {
            return Err(Error::Invariant(format!(
                "family of '{}' does not cover {} of {n} parent assignments",
                self.catalog.name(child),
                n - filled
            )));
        }
        Table::new(vars, cards, values)
    }

    /// Product over families of the applicable confactor's value at a full assignment.
    pub fn joint_probability(&self, full: &Context) -> Result<f64> {
        let mut p = 1.0;
        for fam in &self.families {
            let r = fam
                .confactors
                .iter()
                .find(|r| r.applicable(full))
                .ok_or_else(|| Error::Invariant("no applicable confactor".into()))?;
            p *= r.table.value_in(full)?;
            if p == 0.0 {
                break;
            }
        }
        Ok(p)
    }

    /// Every violated structural or numeric condition, described in words.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cat = &self.catalog;
        for fam in &self.families {
            let x = fam.child;
            let xn = cat.name(x);
            if fam.confactors.is_empty() {
                out.push(format!("family of '{xn}' is empty"));
                continue;
            }
            for (i, r) in fam.confactors.iter().enumerate() {
                if !r.table.contains(x) {
                    out.push(format!("confactor {i} of '{xn}' does not contain the child"));
                }
                for v in r.body.vars().chain(r.table.vars().iter().copied()) {
                    if !cat.contains(v) {
                        out.push(format!("confactor {i} of '{xn}' names unknown {v}"));
                    } else if v > x || (v == x && r.body.assigns(x)) {
                        out.push(format!(
                            "confactor {i} of '{xn}' mentions '{}', which is not a predecessor",
                            cat.name(v)
                        ));
                    }
                }
                for (v, card) in r.table.vars().iter().zip(r.table.cards()) {
                    if cat.contains(*v) && cat.card(*v) != *card {
                        out.push(format!(
                            "confactor {i} of '{xn}' has wrong domain size for '{}'",
                            cat.name(*v)
                        ));
                    }
                }
                if r.body.check(cat).is_err() {
                    out.push(format!("confactor {i} of '{xn}' has an out-of-range body value"));
                }
            }
            if !out.is_empty() {
                continue;
            }
            for i in 0..fam.confactors.len() {
                for j in (i + 1)..fam.confactors.len() {
                    if fam.confactors[i].body.compatible(&fam.confactors[j].body) {
                        out.push(format!(
                            "confactors {i} and {j} of '{xn}' have overlapping bodies"
                        ));
                    }
                }
            }
            if !covers(fam.confactors.iter().map(|r| &r.body), cat) {
                out.push(format!("bodies of '{xn}' are not exhaustive"));
            }
            for (i, r) in fam.confactors.iter().enumerate() {
                if let Some(dev) = normalization_gap(&r.table, x) {
                    if dev > NORMALIZATION_TOLERANCE {
                        out.push(format!(
                            "confactor {i} of '{xn}' is not normalized (off by {dev:.3e})"
                        ));
                    }
                }
            }
        }
        out
    }

    /// Builds and validates a single-family network helper: a tabular CPT family.
    pub fn from_tabular_cpt(
        &self,
        x: VariableId,
        parents: &[VariableId],
        table: Table,
    ) -> Result<Vec<Confactor>> {
        let mut expect: Vec<VariableId> = parents.to_vec();
        expect.push(x);
        expect.sort();
        let mut have = table.vars().to_vec();
        have.sort();
        if expect != have {
            return Err(Error::Config(format!(
                "table for '{}' must cover exactly its parents and itself",
                self.catalog.name(x)
            )));
        }
        check_normalized(&table, x, &self.catalog)?;
        Ok(vec![Confactor::new(Context::empty(), table)?.for_variable(x)])
    }

    /// One confactor per skeletal pair, with the given table for each pair.
    pub fn from_skeleton(&self, sk: &ParentSkeleton, tables: Vec<Table>) -> Result<Vec<Confactor>> {
        let x = sk.child;
        if sk.pairs.len() != tables.len() {
            return Err(Error::Shape {
                expected: sk.pairs.len(),
                found: tables.len(),
            });
        }
        for i in 0..sk.pairs.len() {
            for j in (i + 1)..sk.pairs.len() {
                if sk.pairs[i].0.compatible(&sk.pairs[j].0) {
                    return Err(Error::Config("skeleton contexts overlap".into()));
                }
            }
        }
        if !covers(sk.pairs.iter().map(|p| &p.0), &self.catalog) {
            return Err(Error::Config("skeleton contexts are not exhaustive".into()));
        }
        let mut out = Vec::new();
        for ((c, vs), t) in sk.pairs.iter().zip(tables) {
            let mut expect: Vec<VariableId> = vs.clone();
            expect.push(x);
            expect.sort();
            let mut have = t.vars().to_vec();
            have.sort();
            if expect != have || c.vars().chain(vs.iter().copied()).any(|v| v >= x) {
                return Err(Error::Config(format!(
                    "skeleton pair {c} for '{}' has a mismatched table",
                    self.catalog.name(x)
                )));
            }
            check_normalized(&t, x, &self.catalog)?;
            out.push(Confactor::new(c.clone(), t)?.for_variable(x));
        }
        Ok(out)
    }
}

/// Largest deviation from 1 of the sums over `x`, per assignment of the other variables.
fn normalization_gap(t: &Table, x: VariableId) -> Option<f64> {
    let p = t.position(x)?;
    let strides = t.strides();
    let others: Vec<usize> = (0..t.vars().len()).filter(|&k| k != p).collect();
    let cards: Vec<usize> = others.iter().map(|&k| t.cards()[k]).collect();
    let mut worst: f64 = 0.0;
    for_each_assignment(&cards, |idx| {
        let base: usize = others.iter().zip(idx).map(|(&k, &i)| i * strides[k]).sum();
        let s: f64 = (0..t.cards()[p]).map(|j| t.values()[base + j * strides[p]]).sum();
        worst = worst.max((s - 1.0).abs());
    });
    Some(worst)
}

fn check_normalized(t: &Table, x: VariableId, cat: &DomainCatalog) -> Result<()> {
    match normalization_gap(t, x) {
        Some(d) if d <= NORMALIZATION_TOLERANCE => Ok(()),
        _ => Err(Error::Config(format!(
            "table for '{}' is not normalized over the child",
            cat.name(x)
        ))),
    }
}

/// Exact covering count over the variables the bodies mention.
pub(crate) fn covers<'a, I: Iterator<Item = &'a Context> + Clone>(bodies: I, cat: &DomainCatalog) -> bool {
    let mut mentioned: Vec<VariableId> = bodies.clone().flat_map(|b| b.vars()).collect();
    mentioned.sort();
    mentioned.dedup();
    let full: u128 = mentioned.iter().map(|v| cat.card(*v) as u128).product();
    let sum: u128 = bodies
        .map(|b| {
            mentioned
                .iter()
                .filter(|v| !b.assigns(**v))
                .map(|v| cat.card(*v) as u128)
                .product::<u128>()
        })
        .sum();
    sum == full
}
