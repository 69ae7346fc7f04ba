//! Benchmark campaigns: seeded random queries run through every engine with cost counters.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::context::{Context, VariableId};
use crate::counters::CostCounters;
use crate::cve::{cve_query, CveOptions};
use crate::error::{Error, Result};
use crate::network::{ContextualBeliefNetwork, Observation};
use crate::oracle::{enum_query, DEFAULT_STATE_CAP};
use crate::order::EliminationOrder;
use crate::posterior::Posterior;
use crate::rng::SplitMix64;
use crate::tve::tve_query;
use crate::ve::{ve_query, MultPolicy};

pub const CSV_HEADER: &str =
    "network,query,evidence,engine,time_ms,mults,adds,splits,max_table,max_elim,total_size";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Ve,
    Cve,
    Tve,
    Enum,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Ve, Engine::Cve, Engine::Tve, Engine::Enum];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ve => "ve",
            Engine::Cve => "cve",
            Engine::Tve => "tve",
            Engine::Enum => "enum",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown engine '{s}' (expected ve, cve, tve or enum)")))
    }
}

/// Runs one query on one engine. `order` is ignored by the enumeration oracle.
pub fn run_engine(
    engine: Engine,
    net: &ContextualBeliefNetwork,
    query: &[VariableId],
    obs: &Observation,
    order: &EliminationOrder,
    cve: CveOptions,
) -> Result<(Posterior, CostCounters)> {
    match engine {
        Engine::Ve => ve_query(net, query, obs, order, MultPolicy::default()),
        Engine::Cve => cve_query(net, query, obs, order, cve),
        Engine::Tve => tve_query(net, query, obs, order),
        Engine::Enum => Ok((enum_query(net, query, obs, DEFAULT_STATE_CAP)?, CostCounters::default())),
    }
}

/// Size of the representation an engine starts from.
pub fn input_size(engine: Engine, net: &ContextualBeliefNetwork) -> usize {
    match engine {
        Engine::Cve | Engine::Tve => net.total_confactor_size(),
        Engine::Ve | Engine::Enum => net.tabular_size(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub network: String,
    pub query: String,
    /// `name=value` pairs joined by `;`.
    pub evidence: String,
    pub engine: Engine,
    pub time_ms: f64,
    pub counts: CostCounters,
    pub total_size: usize,
    /// Posterior over the query's domain; absent on error rows.
    pub posterior: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl BenchRecord {
    /// One CSV line; error rows carry `error` in every measured column.
    pub fn csv_line(&self, with_time: bool) -> String {
        let head = format!("{},{},{},{}", self.network, self.query, self.evidence, self.engine);
        if self.error.is_some() {
            return format!("{head},error,error,error,error,error,error,{}", self.total_size);
        }
        let time = if with_time { format!("{:.3}", self.time_ms) } else { String::new() };
        let c = &self.counts;
        format!(
            "{head},{time},{},{},{},{},{},{}",
            c.multiplications, c.additions, c.splits, c.max_table_size, c.max_elim_size, self.total_size
        )
    }
}

pub fn to_csv(records: &[BenchRecord], with_time: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_line(with_time));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub queries_per_net: usize,
    pub observation_counts: Vec<usize>,
    pub seed: u64,
    pub engines: Vec<Engine>,
    /// Timed repetitions per row; the minimum is reported.
    pub replicates: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            queries_per_net: 1,
            observation_counts: vec![0, 5, 10],
            seed: 0,
            engines: vec![Engine::Ve, Engine::Cve, Engine::Tve],
            replicates: 3,
        }
    }
}

fn sample_query(
    net: &ContextualBeliefNetwork,
    k: usize,
    rng: &mut SplitMix64,
) -> Result<(VariableId, Context)> {
    let n = net.var_count();
    let picks = rng.sample_indices(n, k + 1);
    let q = VariableId(picks[0]);
    let mut e = Context::empty();
    for &i in &picks[1..] {
        let v = VariableId(i);
        e.assign(v, rng.below(net.catalog.card(v)))?;
    }
    Ok((q, e))
}

/// Evaluates every sampled query on every engine; failures become error rows.
pub fn run_campaign(nets: &[(String, ContextualBeliefNetwork)], cfg: &CampaignConfig) -> Result<Vec<BenchRecord>> {
    let mut rng = SplitMix64::new(cfg.seed);
    let mut out = Vec::new();
    for (name, net) in nets {
        for &k in &cfg.observation_counts {
            if k + 1 > net.var_count() {
                return Err(Error::Config(format!(
                    "network '{name}' has too few variables for {k} observations"
                )));
            }
            for _ in 0..cfg.queries_per_net {
                let (q, e) = sample_query(net, k, &mut rng)?;
                let query = [q];
                let obs = Observation::new(net, e)?;
                let order = EliminationOrder::min_size(net, &query, &obs);
                let evidence = obs
                    .context()
                    .iter()
                    .map(|(v, x)| format!("{}={}", net.catalog.name(v), net.catalog.value_label(v, x)))
                    .collect::<Vec<_>>()
                    .join(";");
                for &engine in &cfg.engines {
                    let mut best: Option<(f64, Result<(Posterior, CostCounters)>)> = None;
                    for _ in 0..cfg.replicates.max(1) {
                        let start = Instant::now();
                        let res = run_engine(engine, net, &query, &obs, &order, CveOptions::default());
                        let ms = start.elapsed().as_secs_f64() * 1e3;
                        let failed = res.is_err();
                        if best.as_ref().is_none_or(|(t, _)| ms < *t) {
                            best = Some((ms, res));
                        }
                        if failed {
                            break;
                        }
                    }
                    let (time_ms, res) = best.expect("at least one replicate");
                    let mut rec = BenchRecord {
                        network: name.clone(),
                        query: net.catalog.name(q).to_string(),
                        evidence: evidence.clone(),
                        engine,
                        time_ms,
                        counts: CostCounters::default(),
                        total_size: input_size(engine, net),
                        posterior: None,
                        error: None,
                    };
                    match res {
                        Ok((post, counts)) => {
                            rec.counts = counts;
                            rec.posterior = Some(post.probabilities().to_vec());
                        }
                        Err(err) => rec.error = Some(err.to_string()),
                    }
                    out.push(rec);
                }
            }
        }
    }
    Ok(out)
}

/// Disagreements above `tol` between engines, and rows where TVE multiplied more than VE.
pub fn check_records(records: &[BenchRecord], tol: f64) -> Vec<String> {
    let mut problems = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let key = |r: &BenchRecord| (r.network.clone(), r.query.clone(), r.evidence.clone());
        let mut j = i;
        while j < records.len() && key(&records[j]) == key(&records[i]) {
            j += 1;
        }
        let group = &records[i..j];
        let ok: Vec<&BenchRecord> = group.iter().filter(|r| r.posterior.is_some()).collect();
        for a in &ok {
            for b in &ok {
                if a.engine >= b.engine {
                    continue;
                }
                let (pa, pb) = (a.posterior.as_ref().unwrap(), b.posterior.as_ref().unwrap());
                let d = pa.iter().zip(pb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if d > tol || pa.len() != pb.len() {
                    problems.push(format!(
                        "{} {} [{}]: {} and {} differ by {d:e}",
                        a.network, a.query, a.evidence, a.engine, b.engine
                    ));
                }
            }
        }
        let mults = |e: Engine| ok.iter().find(|r| r.engine == e).map(|r| r.counts.multiplications);
        if let (Some(t), Some(v)) = (mults(Engine::Tve), mults(Engine::Ve)) {
            if t > v {
                let r = &group[0];
                problems.push(format!(
                    "{} {} [{}]: tve used {t} multiplications, ve {v}",
                    r.network, r.query, r.evidence
                ));
            }
        }
        i = j;
    }
    problems
}
