use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ContextualBeliefNetwork;
use crate::confactor::Confactor;
use crate::context::{Context, DomainCatalog};
use crate::error::{Error, Result};
use crate::table::Table;

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    variables: Vec<VariableDoc>,
    families: Vec<FamilyDoc>,
}

#[derive(Serialize, Deserialize)]
struct VariableDoc {
    name: String,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    child: String,
    confactors: Vec<ConfactorDoc>,
}

#[derive(Serialize, Deserialize)]
struct ConfactorDoc {
    context: Map<String, Value>,
    vars: Vec<String>,
    table: Vec<f64>,
}

pub fn to_json_string(net: &ContextualBeliefNetwork) -> String {
    let cat = &net.catalog;
    let doc = NetworkDoc {
        variables: cat
            .ids()
            .map(|v| VariableDoc {
                name: cat.name(v).to_string(),
                values: cat.info(v).values.clone(),
            })
            .collect(),
        families: net
            .families()
            .iter()
            .map(|f| FamilyDoc {
                child: cat.name(f.child).to_string(),
                confactors: f
                    .confactors
                    .iter()
                    .map(|r| ConfactorDoc {
                        context: r
                            .body
                            .iter()
                            .map(|(v, x)| {
                                (cat.name(v).to_string(), Value::String(cat.value_label(v, x).into()))
                            })
                            .collect(),
                        vars: r.table.vars().iter().map(|v| cat.name(*v).to_string()).collect(),
                        table: r.table.values().to_vec(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("network document serializes")
}

/// Parses a document; validation runs unless `force` is set.
pub fn from_json_str(text: &str, force: bool) -> Result<ContextualBeliefNetwork> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut cat = DomainCatalog::new();
    for v in doc.variables {
        cat.add_owned(v.name, v.values)?;
    }
    let mut net = ContextualBeliefNetwork::new(cat);
    let mut seen = vec![false; net.var_count()];
    for fam in doc.families {
        let child = net.catalog.lookup(&fam.child)?;
        if std::mem::replace(&mut seen[child.0], true) {
            return Err(Error::Duplicate {
                what: "family",
                name: fam.child,
            });
        }
        let mut members = Vec::new();
        for r in fam.confactors {
            let mut body = Context::empty();
            for (name, value) in &r.context {
                let var = net.catalog.lookup(name)?;
                let label = value.as_str().ok_or_else(|| Error::UnknownValue {
                    variable: name.clone(),
                    value: value.to_string(),
                })?;
                let x = net.catalog.value_index(var, label)?;
                body.assign(var, x)?;
            }
            let vars = r
                .vars
                .iter()
                .map(|n| net.catalog.lookup(n))
                .collect::<Result<Vec<_>>>()?;
            let cards = net.catalog.cards(&vars);
            members.push(Confactor::new(body, Table::new(vars, cards, r.table)?)?);
        }
        net.set_family(child, members);
    }
    if !force {
        let violations = net.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
    }
    Ok(net)
}

pub fn load(path: &Path) -> Result<ContextualBeliefNetwork> {
    from_json_str(&std::fs::read_to_string(path)?, false)
}

pub fn load_unchecked(path: &Path) -> Result<ContextualBeliefNetwork> {
    from_json_str(&std::fs::read_to_string(path)?, true)
}

pub fn save(net: &ContextualBeliefNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(net) + "\n")?;
    Ok(())
}
