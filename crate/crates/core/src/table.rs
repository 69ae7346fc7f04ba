//! Dense tables over ordered variable lists, last variable fastest.

use serde::{Deserialize, Serialize};

use crate::context::{Context, VariableId};
use crate::counters::CostCounters;
use crate::error::{Error, Result};

/// A dense non-negative table. An empty variable list is a scalar with one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    vars: Vec<VariableId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

/// Visits every index tuple of `cards` in layout order.
pub fn for_each_assignment<F: FnMut(&[usize])>(cards: &[usize], mut f: F) {
    if cards.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; cards.len()];
    loop {
        f(&idx);
        let mut k = cards.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cards[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn strides_of(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}

impl Table {
    pub fn new(vars: Vec<VariableId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if vars.len() != cards.len() {
            return Err(Error::Shape {
                expected: vars.len(),
                found: cards.len(),
            });
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Duplicate {
                    what: "table variable",
                    name: v.to_string(),
                });
            }
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidValue(bad));
        }
        Ok(Table { vars, cards, values })
    }

    /// Builds a table by evaluating `f` on every index tuple.
    pub fn from_fn<F: FnMut(&[usize]) -> f64>(
        vars: Vec<VariableId>,
        cards: Vec<usize>,
        mut f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(cards.iter().product());
        for_each_assignment(&cards, |idx| values.push(f(idx)));
        Table::new(vars, cards, values)
    }

    pub fn scalar(value: f64) -> Self {
        Table {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn filled(vars: Vec<VariableId>, cards: Vec<usize>, value: f64) -> Self {
        let n = cards.iter().product();
        Table {
            vars,
            cards,
            values: vec![value; n],
        }
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: VariableId) -> bool {
        self.vars.contains(&v)
    }

    pub fn position(&self, v: VariableId) -> Option<usize> {
        self.vars.iter().position(|&u| u == v)
    }

    pub fn card_of(&self, v: VariableId) -> Option<usize> {
        self.position(v).map(|p| self.cards[p])
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.cards)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entry selected by `c`, which must assign every table variable.
    pub fn value_in(&self, c: &Context) -> Result<f64> {
        let mut off = 0;
        for (v, s) in self.vars.iter().zip(self.strides()) {
            let x = c.get(*v).ok_or(Error::ContextDoesNotDetermineTable)?;
            off += x * s;
        }
        Ok(self.values[off])
    }

    /// Restricts the table to the assignments of `c`; unmentioned variables stay.
    pub fn set(&self, c: &Context) -> Table {
        if !self.vars.iter().any(|v| c.assigns(*v)) {
            return self.clone();
        }
        let strides = self.strides();
        let mut base = 0;
        let mut keep_vars = Vec::new();
        let mut keep_cards = Vec::new();
        let mut keep_strides = Vec::new();
        for (k, v) in self.vars.iter().enumerate() {
            match c.get(*v) {
                Some(x) => base += x * strides[k],
                None => {
                    keep_vars.push(*v);
                    keep_cards.push(self.cards[k]);
                    keep_strides.push(strides[k]);
                }
            }
        }
        let mut values = Vec::with_capacity(keep_cards.iter().product());
        walk(&keep_cards, &[&keep_strides], &mut [base], |offs| {
            values.push(self.values[offs[0]])
        });
        Table {
            vars: keep_vars,
            cards: keep_cards,
            values,
        }
    }

    /// Strides of `self` expressed in the coordinates of `target`; 0 where absent.
    fn broadcast_strides(&self, target: &[VariableId]) -> Vec<usize> {
        let own = self.strides();
        target
            .iter()
            .map(|v| self.position(*v).map_or(0, |p| own[p]))
            .collect()
    }

    fn union_layout(&self, other: &Table) -> (Vec<VariableId>, Vec<usize>) {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        (vars, cards)
    }

    fn combine<F: Fn(f64, f64) -> f64>(&self, other: &Table, op: F) -> Table {
        let (vars, cards) = self.union_layout(other);
        let sa = self.broadcast_strides(&vars);
        let sb = other.broadcast_strides(&vars);
        let mut values = Vec::with_capacity(cards.iter().product());
        walk(&cards, &[&sa, &sb], &mut [0, 0], |o| {
            values.push(op(self.values[o[0]], other.values[o[1]]))
        });
        Table { vars, cards, values }
    }

    /// Pointwise product over the union of variables; counts one multiplication per entry.
    pub fn product(&self, other: &Table, counts: &mut CostCounters) -> Table {
        let t = self.combine(other, |a, b| a * b);
        counts.multiplications += t.len() as u64;
        counts.note_table(t.len());
        t
    }

    /// Pointwise sum over the union of variables; counts one addition per entry.
    pub fn add(&self, other: &Table, counts: &mut CostCounters) -> Table {
        let t = self.combine(other, |a, b| a + b);
        counts.additions += t.len() as u64;
        counts.note_table(t.len());
        t
    }

    /// Sums `y` out; counts (|dom(y)|-1) additions per result entry.
    pub fn sum_out(&self, y: VariableId, counts: &mut CostCounters) -> Result<Table> {
        let p = self.position(y).ok_or(Error::VariableNotInTable)?;
        let strides = self.strides();
        let (sy, cy) = (strides[p], self.cards[p]);
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        let mut rest = strides.clone();
        vars.remove(p);
        cards.remove(p);
        rest.remove(p);
        let mut values = Vec::with_capacity(cards.iter().product());
        walk(&cards, &[&rest], &mut [0], |o| {
            let mut acc = 0.0;
            for j in 0..cy {
                acc += self.values[o[0] + j * sy];
            }
            values.push(acc);
        });
        counts.additions += ((cy - 1) * values.len()) as u64;
        counts.note_table(values.len());
        Ok(Table { vars, cards, values })
    }

    /// Same entries laid out over a permutation of the variables.
    pub fn reorder(&self, vars: &[VariableId]) -> Result<Table> {
        if vars.len() != self.vars.len() || vars.iter().any(|v| !self.contains(*v)) {
            return Err(Error::Shape {
                expected: self.vars.len(),
                found: vars.len(),
            });
        }
        let cards: Vec<usize> = vars.iter().map(|v| self.card_of(*v).unwrap()).collect();
        let s = self.broadcast_strides(vars);
        let mut values = Vec::with_capacity(self.len());
        walk(&cards, &[&s], &mut [0], |o| values.push(self.values[o[0]]));
        Ok(Table {
            vars: vars.to_vec(),
            cards,
            values,
        })
    }

    /// Divides by the total; a zero total is an error.
    pub fn normalized(&self) -> Result<Table> {
        let z = self.total();
        if z <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let mut t = self.clone();
        t.values.iter_mut().for_each(|x| *x /= z);
        Ok(t)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Table {
        Table {
            vars: self.vars.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Max absolute entry difference after aligning variable order; `None` if variable sets differ.
    pub fn max_abs_diff(&self, other: &Table) -> Option<f64> {
        let aligned = other.reorder(&self.vars).ok()?;
        if aligned.cards != self.cards {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&aligned.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &Table, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }
}

/// Odometer over `cards`, advancing one offset per stride vector.
/// Odometer over `cards` that advances each offset by its own strides.
pub(crate) fn walk<F: FnMut(&[usize])>(cards: &[usize], strides: &[&[usize]], offs: &mut [usize], mut f: F) {
    if cards.contains(&0) {
        return;
    }
    let n = cards.len();
    let mut idx = vec![0usize; n];
    loop {
        f(offs);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            for (o, s) in offs.iter_mut().zip(strides) {
                *o += s[k];
            }
            if idx[k] < cards[k] {
                break;
            }
            for (o, s) in offs.iter_mut().zip(strides) {
                *o -= s[k] * cards[k];
            }
            idx[k] = 0;
        }
    }
}
