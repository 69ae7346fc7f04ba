mod common;

use cbn_core::generate::{generate_random_cbn, GenConfig};
use cbn_core::order::hidden_variables;
use cbn_core::rng::SplitMix64;
use cbn_core::{
    count_split_pieces, cve_query, tve_query, ve_query, Confactor, Context, CostCounters, CveMode, CveOptions,
    DomainCatalog, EliminationOrder, MultPolicy, Observation, Table, VariableId,
};
use common::{brute_posterior, max_diff};
use proptest::prelude::*;

/// Catalog of `cards.len()` variables, and a table over a chosen subset with given entries.
fn catalog(cards: &[usize]) -> (DomainCatalog, Vec<VariableId>) {
    let mut cat = DomainCatalog::new();
    let vars = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| cat.add_owned(format!("V{i}"), (0..c).map(|k| format!("v{k}")).collect()).unwrap())
        .collect();
    (cat, vars)
}

fn table_over(cat: &DomainCatalog, vars: &[VariableId], seed: u64) -> Table {
    let mut rng = SplitMix64::new(seed);
    Table::from_fn(vars.to_vec(), cat.cards(vars), |_| rng.next_f64()).unwrap()
}

/// Entry of `t` at a full assignment given as one value per catalog variable.
fn entry(t: &Table, vals: &[usize]) -> f64 {
    let c = Context::from_pairs(t.vars().iter().map(|v| (*v, vals[v.0]))).unwrap();
    t.value_in(&c).unwrap()
}

fn all_assignments(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|p| (0..c).map(move |x| p.iter().copied().chain([x]).collect()))
            .collect();
    }
    out
}

fn subset(vars: &[VariableId], mask: u32) -> Vec<VariableId> {
    vars.iter().copied().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| v).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_and_sum_match_pointwise_definition(
        cards in prop::collection::vec(2usize..4, 1..5),
        ma in 0u32..32, mb in 0u32..32, seed in any::<u64>(),
    ) {
        let (cat, vars) = catalog(&cards);
        let (a, b) = (table_over(&cat, &subset(&vars, ma), seed), table_over(&cat, &subset(&vars, mb), seed ^ 1));
        let mut counts = CostCounters::default();
        let p = a.product(&b, &mut counts);
        prop_assert_eq!(counts.multiplications as usize, p.len());
        for vals in all_assignments(&cards) {
            prop_assert!((entry(&p, &vals) - entry(&a, &vals) * entry(&b, &vals)).abs() < 1e-12);
        }
        if let Some(&y) = p.vars().first() {
            let s = p.sum_out(y, &mut counts).unwrap();
            for vals in all_assignments(&cards) {
                let want: f64 = (0..cat.card(y)).map(|x| {
                    let mut w = vals.clone();
                    w[y.0] = x;
                    entry(&p, &w)
                }).sum();
                prop_assert!((entry(&s, &vals) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn splitting_partitions_the_body(
        cards in prop::collection::vec(2usize..5, 2..5),
        table_mask in 0u32..16, split_var in 0usize..4, seed in any::<u64>(),
    ) {
        let (cat, vars) = catalog(&cards);
        let y = vars[split_var % vars.len()];
        let t = table_over(&cat, &subset(&vars, table_mask), seed);
        let r = Confactor::new(Context::empty(), t).unwrap();
        let pieces = r.split_on_variable(y, &cat, &mut CostCounters::default()).unwrap();
        prop_assert_eq!(pieces.len(), cat.card(y));
        for vals in all_assignments(&cards) {
            let full = Context::from_pairs(vars.iter().copied().zip(vals.iter().copied())).unwrap();
            let applicable: Vec<&Confactor> = pieces.iter().filter(|p| p.applicable(&full)).collect();
            prop_assert_eq!(applicable.len(), 1);
            prop_assert_eq!(applicable[0].value_at(&full).unwrap(), r.value_at(&full).unwrap());
        }
    }

    #[test]
    fn residual_size_is_order_independent(
        cards in prop::collection::vec(2usize..5, 1..6),
        body_mask in 0u32..64, ctx_mask in 1u32..64, seed in any::<u64>(),
    ) {
        let (cat, vars) = catalog(&cards);
        let mut rng = SplitMix64::new(seed);
        let body = Context::from_pairs(subset(&vars, body_mask).into_iter().map(|v| (v, 0))).unwrap();
        let c = Context::from_pairs(subset(&vars, ctx_mask).into_iter().map(|v| (v, body.get(v).unwrap_or(rng.below(cat.card(v)))))).unwrap();
        let table_vars: Vec<VariableId> = vars.iter().copied().filter(|v| !body.assigns(*v) && rng.bernoulli(0.5)).collect();
        let r = Confactor::new(body.clone(), Table::filled(table_vars.clone(), cat.cards(&table_vars), 1.0)).unwrap();
        let mut order: Vec<VariableId> = c.vars().filter(|v| !body.assigns(*v)).collect();
        rng.shuffle(&mut order);
        let (residual, _) = r.split_along(&c, &order, &cat, &mut CostCounters::default()).unwrap();
        prop_assert_eq!(residual.len(), count_split_pieces(&r, &c, &cat));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn engines_agree_with_enumeration(
        n in 3usize..9, s in 0usize..6, p in prop::sample::select(vec![0.2, 0.5]),
        seed in any::<u64>(), biased in any::<bool>(), k in 0usize..3,
    ) {
        let cfg = GenConfig { n, s, p, seed, biased };
        prop_assume!(cfg.check().is_ok());
        let net = generate_random_cbn(&cfg).unwrap();
        let mut rng = SplitMix64::new(seed ^ 0xabcd);
        let picks = rng.sample_indices(n, (k + 1).min(n));
        let q = VariableId(picks[0]);
        let e = Context::from_pairs(picks[1..].iter().map(|&i| (VariableId(i), rng.below(2)))).unwrap();
        let obs = Observation::new(&net, e).unwrap();
        let truth = brute_posterior(&net, q, &obs);
        let mut hidden = hidden_variables(&net, &[q], &obs);
        rng.shuffle(&mut hidden);
        let order = EliminationOrder(hidden);
        let ve = ve_query(&net, &[q], &obs, &order, MultPolicy::default()).unwrap();
        let tve = tve_query(&net, &[q], &obs, &order).unwrap();
        let cve = cve_query(&net, &[q], &obs, &order, CveOptions { audit: true, ..Default::default() }).unwrap();
        let pairwise = cve_query(&net, &[q], &obs, &order, CveOptions { mode: CveMode::PairwiseSplit, audit: true }).unwrap();
        for post in [&ve.0, &tve.0, &cve.0, &pairwise.0] {
            prop_assert!(max_diff(post.probabilities(), &truth) < 1e-9);
        }
        prop_assert!(tve.1.multiplications <= ve.1.multiplications);
    }
}

#[test]
fn tabular_networks_cost_the_same_under_ve_and_cve() {
    for seed in 0..20 {
        // With p = 1 and no splits every family is one full tabular confactor.
        let net = generate_random_cbn(&GenConfig::new(6, 0, 1.0, seed)).unwrap();
        let q = VariableId(5);
        let obs = Observation::none();
        let order = EliminationOrder::min_size(&net, &[q], &obs);
        let (pv, cv) = ve_query(&net, &[q], &obs, &order, MultPolicy::default()).unwrap();
        let (pc, cc) = cve_query(&net, &[q], &obs, &order, CveOptions::default()).unwrap();
        assert!(pv.max_abs_diff(&pc) < 1e-12);
        assert_eq!(cv.multiplications, cc.multiplications, "seed {seed}");
        assert_eq!(cv.additions, cc.additions, "seed {seed}");
    }
}

#[test]
fn zero_mass_evidence_is_reported_by_every_engine() {
    // D and C form a component disconnected from the query B, so its zero mass is a constant.
    let doc = r#"{
      "variables": [
        {"name": "A", "values": ["on", "off"]}, {"name": "B", "values": ["on", "off"]},
        {"name": "D", "values": ["on", "off"]}, {"name": "C", "values": ["on", "off"]}
      ],
      "families": [
        {"child": "A", "confactors": [{"context": {}, "vars": ["A"], "table": [1.0, 0.0]}]},
        {"child": "B", "confactors": [{"context": {}, "vars": ["A", "B"], "table": [0.25, 0.75, 0.5, 0.5]}]},
        {"child": "D", "confactors": [{"context": {}, "vars": ["D"], "table": [0.3, 0.7]}]},
        {"child": "C", "confactors": [
          {"context": {"D": "on"}, "vars": ["C"], "table": [1.0, 0.0]},
          {"context": {"D": "off"}, "vars": ["C"], "table": [1.0, 0.0]}
        ]}
      ]
    }"#;
    let net = cbn_core::network::from_json_str(doc, false).unwrap();
    let cat = &net.catalog;
    let b = cat.lookup("B").unwrap();
    for evidence in ["A=off", "C=off", "A=on,C=off"] {
        let obs = Observation::new(&net, cat.parse_assignments(evidence).unwrap()).unwrap();
        let order = EliminationOrder::min_size(&net, &[b], &obs);
        let audit = |mode| CveOptions { mode, audit: true };
        let results = [
            ve_query(&net, &[b], &obs, &order, MultPolicy::default()).map(|_| ()),
            tve_query(&net, &[b], &obs, &order).map(|_| ()),
            cve_query(&net, &[b], &obs, &order, audit(CveMode::Absorption)).map(|_| ()),
            cve_query(&net, &[b], &obs, &order, audit(CveMode::PairwiseSplit)).map(|_| ()),
            cbn_core::enum_query(&net, &[b], &obs, 1 << 20).map(|_| ()),
        ];
        for (i, r) in results.into_iter().enumerate() {
            assert_eq!(r, Err(cbn_core::Error::ZeroProbabilityEvidence), "engine {i}, evidence {evidence}");
        }
    }
}
