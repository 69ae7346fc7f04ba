//! Variables, their domains, and partial assignments.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a variable in the network's total ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VariableId(pub usize);

impl VariableId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableInfo {
    pub name: String,
    pub values: Vec<String>,
}

/// Named variables with ordered value labels; declaration order is the total ordering.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainCatalog {
    vars: Vec<VariableInfo>,
}

impl DomainCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a variable; names and value labels must be unique and the domain non-empty.
    pub fn add(&mut self, name: &str, values: &[&str]) -> Result<VariableId> {
        let owned: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.add_owned(name.to_string(), owned)
    }

    pub fn add_owned(&mut self, name: String, values: Vec<String>) -> Result<VariableId> {
        if self.vars.iter().any(|v| v.name == name) {
            return Err(Error::Duplicate { what: "variable", name });
        }
        if values.is_empty() {
            return Err(Error::Config(format!("variable '{name}' has an empty domain")));
        }
        let mut seen = HashSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(Error::Duplicate {
                    what: "value",
                    name: format!("{name}={v}"),
                });
            }
        }
        self.vars.push(VariableInfo { name, values });
        Ok(VariableId(self.vars.len() - 1))
    }

    /// Appends a two-valued variable with labels `true` and `false`.
    pub fn add_binary(&mut self, name: &str) -> Result<VariableId> {
        self.add(name, &["true", "false"])
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = VariableId> + ExactSizeIterator + use<> {
        (0..self.vars.len()).map(VariableId)
    }

    pub fn info(&self, v: VariableId) -> &VariableInfo {
        &self.vars[v.0]
    }

    pub fn name(&self, v: VariableId) -> &str {
        &self.vars[v.0].name
    }

    pub fn card(&self, v: VariableId) -> usize {
        self.vars[v.0].values.len()
    }

    pub fn cards(&self, vars: &[VariableId]) -> Vec<usize> {
        vars.iter().map(|&v| self.card(v)).collect()
    }

    pub fn value_label(&self, v: VariableId, value: usize) -> &str {
        &self.vars[v.0].values[value]
    }

    pub fn lookup(&self, name: &str) -> Result<VariableId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(VariableId)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn value_index(&self, v: VariableId, label: &str) -> Result<usize> {
        self.vars[v.0]
            .values
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownValue {
                variable: self.vars[v.0].name.clone(),
                value: label.to_string(),
            })
    }

    pub fn contains(&self, v: VariableId) -> bool {
        v.0 < self.vars.len()
    }

    /// Parses `A=val,B=val` into a context.
    pub fn parse_assignments(&self, text: &str) -> Result<Context> {
        let mut pairs = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected VAR=value, found '{part}'")))?;
            let var = self.lookup(name.trim())?;
            pairs.push((var, self.value_index(var, value.trim())?));
        }
        Context::from_pairs(pairs)
    }

    /// Renders a context with variable names and value labels.
    pub fn describe(&self, c: &Context) -> String {
        if c.is_empty() {
            return "true".to_string();
        }
        c.iter()
            .map(|(v, x)| format!("{}={}", self.name(v), self.value_label(v, x)))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

/// A partial assignment, kept sorted by variable. The empty context is "true".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Context {
    pairs: Vec<(VariableId, usize)>,
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a context; a variable listed twice must carry the same value.
    pub fn from_pairs<I: IntoIterator<Item = (VariableId, usize)>>(pairs: I) -> Result<Self> {
        let mut out = Context::empty();
        for (v, x) in pairs {
            out.assign(v, x)?;
        }
        Ok(out)
    }

    pub fn single(v: VariableId, x: usize) -> Self {
        Context { pairs: vec![(v, x)] }
    }

    /// Checks that every value index is within its variable's domain.
    pub fn check(&self, catalog: &DomainCatalog) -> Result<()> {
        for &(v, x) in &self.pairs {
            if !catalog.contains(v) {
                return Err(Error::UnknownVariable(v.to_string()));
            }
            if x >= catalog.card(v) {
                return Err(Error::UnknownValue {
                    variable: catalog.name(v).to_string(),
                    value: x.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn assign(&mut self, v: VariableId, x: usize) -> Result<()> {
        match self.pairs.binary_search_by_key(&v, |p| p.0) {
            Ok(i) if self.pairs[i].1 == x => Ok(()),
            Ok(_) => Err(Error::IncompatibleContexts),
            Err(i) => {
                self.pairs.insert(i, (v, x));
                Ok(())
            }
        }
    }

    pub fn with(&self, v: VariableId, x: usize) -> Result<Self> {
        let mut c = self.clone();
        c.assign(v, x)?;
        Ok(c)
    }

    pub fn get(&self, v: VariableId) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&v, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn assigns(&self, v: VariableId) -> bool {
        self.get(v).is_some()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VariableId, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = VariableId> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    /// False iff some variable takes different values in the two contexts.
    pub fn compatible(&self, other: &Context) -> bool {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.pairs, &other.pairs);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    pub fn union(&self, other: &Context) -> Result<Context> {
        if !self.compatible(other) {
            return Err(Error::IncompatibleContexts);
        }
        let mut pairs = self.pairs.clone();
        for &(v, x) in &other.pairs {
            if let Err(i) = pairs.binary_search_by_key(&v, |p| p.0) {
                pairs.insert(i, (v, x));
            }
        }
        Ok(Context { pairs })
    }

    /// True iff every assignment of `self` also appears in `other`.
    pub fn is_subset_of(&self, other: &Context) -> bool {
        self.pairs.iter().all(|&(v, x)| other.get(v) == Some(x))
    }

    pub fn without(&self, v: VariableId) -> Context {
        Context {
            pairs: self.pairs.iter().copied().filter(|p| p.0 != v).collect(),
        }
    }

    /// Keeps only the assignments whose variable satisfies `keep`.
    pub fn restrict<F: Fn(VariableId) -> bool>(&self, keep: F) -> Context {
        Context {
            pairs: self.pairs.iter().copied().filter(|p| keep(p.0)).collect(),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self.pairs.iter().map(|(v, x)| format!("{v}={x}")).collect();
        write!(f, "{}", parts.join("&"))
    }
}
