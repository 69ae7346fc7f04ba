//! Small reference networks used by tests, benchmarks, and the CLI demos.

use crate::confactor::Confactor;
use crate::context::{Context, DomainCatalog, VariableId};
use crate::generate::random_conditional;
use crate::network::ContextualBeliefNetwork;
use crate::rng::SplitMix64;
use crate::table::Table;

const T: usize = 0;
const F: usize = 1;

fn table(cat: &DomainCatalog, vars: &[VariableId], values: &[f64]) -> Table {
    Table::new(vars.to_vec(), cat.cards(vars), values.to_vec()).expect("fixture table is well formed")
}

fn ctx(pairs: &[(VariableId, usize)]) -> Context {
    Context::from_pairs(pairs.iter().copied()).expect("fixture context is consistent")
}

fn conf(body: Context, t: Table) -> Confactor {
    Confactor::new(body, t).expect("fixture confactor is well formed")
}

/// Handles for [`tree_structured_network`].
#[derive(Debug, Clone, Copy)]
pub struct TreeVars {
    pub y: VariableId,
    pub z: VariableId,
    pub a: VariableId,
    pub b: VariableId,
    pub c: VariableId,
    pub d: VariableId,
    pub e: VariableId,
}

/// Seven binary variables; E depends on A,B,C,D through a decision tree and
/// B, D depend on Y, Z contextually. Priors on Y, Z and the CPTs of A, C are fixed seeds.
pub fn tree_structured_network() -> (ContextualBeliefNetwork, TreeVars) {
    let mut cat = DomainCatalog::new();
    let v = TreeVars {
        y: cat.add_binary("Y").unwrap(),
        z: cat.add_binary("Z").unwrap(),
        a: cat.add_binary("A").unwrap(),
        b: cat.add_binary("B").unwrap(),
        c: cat.add_binary("C").unwrap(),
        d: cat.add_binary("D").unwrap(),
        e: cat.add_binary("E").unwrap(),
    };
    let mut net = ContextualBeliefNetwork::new(cat.clone());
    net.set_family(v.y, vec![conf(Context::empty(), table(&cat, &[v.y], &[0.4, 0.6]))]);
    net.set_family(v.z, vec![conf(Context::empty(), table(&cat, &[v.z], &[0.65, 0.35]))]);
    net.set_family(
        v.a,
        vec![conf(
            Context::empty(),
            table(&cat, &[v.y, v.z, v.a], &[0.7, 0.3, 0.2, 0.8, 0.45, 0.55, 0.9, 0.1]),
        )],
    );
    net.set_family(
        v.c,
        vec![conf(
            Context::empty(),
            table(&cat, &[v.y, v.z, v.c], &[0.35, 0.65, 0.8, 0.2, 0.15, 0.85, 0.6, 0.4]),
        )],
    );
    net.set_family(
        v.b,
        vec![
            conf(ctx(&[(v.y, T)]), table(&cat, &[v.b, v.z], &[0.77, 0.17, 0.23, 0.83])),
            conf(ctx(&[(v.y, F)]), table(&cat, &[v.b], &[0.27, 0.73])),
        ],
    );
    net.set_family(
        v.d,
        vec![
            conf(ctx(&[(v.z, T)]), table(&cat, &[v.d], &[0.29, 0.71])),
            conf(ctx(&[(v.z, F)]), table(&cat, &[v.d, v.y], &[0.79, 0.59, 0.21, 0.41])),
        ],
    );
    net.set_family(
        v.e,
        vec![
            conf(ctx(&[(v.a, T)]), table(&cat, &[v.b, v.e], &[0.55, 0.45, 0.3, 0.7])),
            conf(ctx(&[(v.a, F), (v.c, T)]), table(&cat, &[v.e], &[0.08, 0.92])),
            conf(
                ctx(&[(v.a, F), (v.c, F), (v.d, T)]),
                table(&cat, &[v.b, v.e], &[0.025, 0.975, 0.85, 0.15]),
            ),
            conf(ctx(&[(v.a, F), (v.c, F), (v.d, F)]), table(&cat, &[v.e], &[0.5, 0.5])),
        ],
    );
    (net, v)
}

/// P(E=true | A,B,C,D) rows, A slowest, matching the decision tree of [`tree_structured_network`].
pub const E_TRUE_ROWS: [f64; 16] = [
    0.55, 0.55, 0.55, 0.55, 0.3, 0.3, 0.3, 0.3, 0.08, 0.08, 0.025, 0.5, 0.08, 0.08, 0.85, 0.5,
];

/// Dense P(E | A,B,C,D) over [A,B,C,D,E].
pub fn tabular_e_table(cat: &DomainCatalog, v: &TreeVars) -> Table {
    let values: Vec<f64> = E_TRUE_ROWS.iter().flat_map(|&p| [p, 1.0 - p]).collect();
    table(cat, &[v.a, v.b, v.c, v.d, v.e], &values)
}

/// Handles for [`two_house_network`].
#[derive(Debug, Clone, Copy)]
pub struct HouseVars {
    pub s: VariableId,
    pub fb: VariableId,
    pub ft: VariableId,
    pub mb: VariableId,
    pub mt: VariableId,
    pub ot: VariableId,
    pub fh: VariableId,
    pub mh: VariableId,
}

/// Two houses share the outside temperature; each house's heat depends on it only when
/// its air conditioner is broken, and on the thermostat otherwise.
pub fn two_house_network() -> (ContextualBeliefNetwork, HouseVars) {
    let mut cat = DomainCatalog::new();
    let v = HouseVars {
        s: cat.add_binary("S").unwrap(),
        fb: cat.add_binary("FB").unwrap(),
        ft: cat.add_binary("FT").unwrap(),
        mb: cat.add_binary("MB").unwrap(),
        mt: cat.add_binary("MT").unwrap(),
        ot: cat.add_binary("OT").unwrap(),
        fh: cat.add_binary("FH").unwrap(),
        mh: cat.add_binary("MH").unwrap(),
    };
    let p = [0.9, 0.2, 0.85, 0.15, 0.8, 0.3, 0.75, 0.25, 0.7, 0.1];
    let mut net = ContextualBeliefNetwork::new(cat.clone());
    for (x, q) in [(v.s, 0.5), (v.fb, 0.1), (v.ft, 0.6), (v.mb, 0.2), (v.mt, 0.4)] {
        net.set_family(x, vec![conf(Context::empty(), table(&cat, &[x], &[q, 1.0 - q]))]);
    }
    let cond = |a: f64, b: f64| [a, b, 1.0 - a, 1.0 - b];
    net.set_family(
        v.ot,
        vec![conf(Context::empty(), table(&cat, &[v.ot, v.s], &cond(p[8], p[9])))],
    );
    net.set_family(
        v.fh,
        vec![
            conf(ctx(&[(v.fb, T)]), table(&cat, &[v.fh, v.ot], &cond(p[0], p[1]))),
            conf(ctx(&[(v.fb, F)]), table(&cat, &[v.fh, v.ft], &cond(p[2], p[3]))),
        ],
    );
    net.set_family(
        v.mh,
        vec![
            conf(ctx(&[(v.mb, T)]), table(&cat, &[v.mh, v.ot], &cond(p[4], p[5]))),
            conf(ctx(&[(v.mb, F)]), table(&cat, &[v.mh, v.mt], &cond(p[6], p[7]))),
        ],
    );
    (net, v)
}

/// Handles for [`wide_parent_network`].
#[derive(Debug, Clone, Copy)]
pub struct WideVars {
    pub w: VariableId,
    pub x: VariableId,
    pub a: VariableId,
    pub b: VariableId,
    pub c: VariableId,
    pub s: VariableId,
    pub t: VariableId,
}

/// W has `w_card` values and is the only parent of B; S and T depend on A, B, C
/// when X holds and on fewer variables otherwise. Numbers come from `seed`.
pub fn wide_parent_network(w_card: usize, seed: u64) -> (ContextualBeliefNetwork, WideVars) {
    let mut cat = DomainCatalog::new();
    let labels: Vec<String> = (0..w_card).map(|i| format!("w{i}")).collect();
    let v = WideVars {
        w: cat.add_owned("W".into(), labels).unwrap(),
        x: cat.add_binary("X").unwrap(),
        a: cat.add_binary("A").unwrap(),
        b: cat.add_binary("B").unwrap(),
        c: cat.add_binary("C").unwrap(),
        s: cat.add_binary("S").unwrap(),
        t: cat.add_binary("T").unwrap(),
    };
    let mut rng = SplitMix64::new(seed);
    let mut rc = |vars: &[VariableId], child: VariableId| {
        random_conditional(&mut rng, vars.to_vec(), cat.cards(vars), child)
    };
    let fams = vec![
        (v.w, vec![(Context::empty(), rc(&[v.w], v.w))]),
        (v.x, vec![(Context::empty(), rc(&[v.x], v.x))]),
        (v.a, vec![(Context::empty(), rc(&[v.a], v.a))]),
        (v.b, vec![(Context::empty(), rc(&[v.w, v.b], v.b))]),
        (v.c, vec![(Context::empty(), rc(&[v.b, v.c], v.c))]),
        (
            v.s,
            vec![
                (ctx(&[(v.x, T)]), rc(&[v.a, v.b, v.c, v.s], v.s)),
                (ctx(&[(v.x, F)]), rc(&[v.b, v.c, v.s], v.s)),
            ],
        ),
        (
            v.t,
            vec![
                (ctx(&[(v.x, T)]), rc(&[v.a, v.b, v.c, v.t], v.t)),
                (ctx(&[(v.x, F)]), rc(&[v.c, v.t], v.t)),
            ],
        ),
    ];
    let mut net = ContextualBeliefNetwork::new(cat);
    for (child, members) in fams {
        net.set_family(child, members.into_iter().map(|(b, t)| conf(b, t)).collect());
    }
    (net, v)
}

/// P(B|A), P(C|B), P(D|B) with |dom(A)| = `a_card` and B, C, D binary.
pub fn fan_out_factors(a_card: usize) -> (DomainCatalog, Vec<Table>) {
    let mut cat = DomainCatalog::new();
    let labels: Vec<String> = (0..a_card).map(|i| format!("a{i}")).collect();
    let a = cat.add_owned("A".into(), labels).unwrap();
    let b = cat.add_binary("B").unwrap();
    let c = cat.add_binary("C").unwrap();
    let d = cat.add_binary("D").unwrap();
    let mut rng = SplitMix64::new(25);
    let fs = vec![
        random_conditional(&mut rng, vec![a, b], cat.cards(&[a, b]), b),
        random_conditional(&mut rng, vec![b, c], cat.cards(&[b, c]), c),
        random_conditional(&mut rng, vec![b, d], cat.cards(&[b, d]), d),
    ];
    (cat, fs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        assert!(tree_structured_network().0.validate().is_empty());
        assert!(two_house_network().0.validate().is_empty());
        assert!(wide_parent_network(10, 1).0.validate().is_empty());
    }

    #[test]
    fn tree_family_expands_to_dense_table() {
        let (net, v) = tree_structured_network();
        let dense = tabular_e_table(&net.catalog, &v);
        let expanded = net.family_table(v.e).unwrap();
        assert!(expanded.approx_eq(&dense, 1e-12));
    }
}
