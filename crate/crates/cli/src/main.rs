use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cbn_core::campaign::{check_records, run_campaign, run_engine, to_csv, CampaignConfig, Engine};
use cbn_core::compress::{compress_network, format_report, CompressionConfig};
use cbn_core::generate::{generate_random_cbn, GenConfig};
use cbn_core::network::{load, load_unchecked, save, to_json_string};
use cbn_core::{ContextualBeliefNetwork, CveOptions, EliminationOrder, Error, Observation, VariableId};

#[derive(Parser)]
#[command(name = "cbn", version, about = "Exact inference on contextual belief networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network file and print its sizes.
    Validate {
        network: PathBuf,
    },
    /// Compute a posterior.
    Infer(InferArgs),
    /// Generate a random network.
    Gen(GenArgs),
    /// Replace dense families by smaller contextual ones where the sizes allow it.
    Compress(CompressArgs),
    /// Run a seeded query campaign and print CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InferArgs {
    network: PathBuf,
    /// Query variables, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    query: Vec<String>,
    /// Observations as VAR=value pairs, comma separated.
    #[arg(long, default_value = "")]
    evidence: String,
    #[arg(long, default_value = "cve")]
    engine: Engine,
    /// Explicit elimination order listing every hidden variable.
    #[arg(long, value_delimiter = ',', conflicts_with = "heuristic")]
    order: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "min-size")]
    heuristic: Heuristic,
    /// Print operation counts to stderr.
    #[arg(long)]
    stats: bool,
    /// Check engine invariants after every elimination.
    #[arg(long)]
    audit: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Heuristic {
    MinSize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    biased: bool,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompressArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 0.51)]
    accept_ratio: f64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-family size report; stderr when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Network files to include.
    networks: Vec<PathBuf>,
    /// Also generate this many networks from --n, --s, --p and --gen-seed.
    #[arg(long, default_value_t = 0)]
    generate: usize,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 15)]
    s: usize,
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    #[arg(long)]
    biased: bool,
    #[arg(long, default_value_t = 1)]
    queries: usize,
    /// Observation counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10")]
    observations: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ve,cve,tve")]
    engines: Vec<Engine>,
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    /// Leave the time column empty so output is reproducible.
    #[arg(long)]
    no_time: bool,
    /// Fail if engines disagree beyond this tolerance.
    #[arg(long)]
    check: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Failures split by exit code: bad input is 1, failed inference is 2.
enum Failure {
    Usage(String),
    Inference(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroProbabilityEvidence | Error::StateSpaceTooLarge { .. } | Error::Invariant(_) => {
                Failure::Inference(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Validate { network } => validate(&network),
        Command::Infer(a) => infer(a),
        Command::Gen(a) => gen(a),
        Command::Compress(a) => compress(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Inference(m)) => {
            eprintln!("inference failed: {m}");
            ExitCode::from(2)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(path: &Path) -> Outcome {
    let net = load_unchecked(path)?;
    let problems = net.validate();
    if !problems.is_empty() {
        for p in &problems {
            println!("{p}");
        }
        return Err(Failure::Usage(format!("{} problem(s) found", problems.len())));
    }
    println!(
        "ok: {} variables, {} confactors, contextual size {}, tabular size {}",
        net.var_count(),
        net.confactors().count(),
        net.total_confactor_size(),
        net.tabular_size()
    );
    Ok(())
}

/// `x` with ten significant digits.
fn significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn lookup_all(net: &ContextualBeliefNetwork, names: &[String]) -> Result<Vec<VariableId>, Failure> {
    names
        .iter()
        .map(|n| net.catalog.lookup(n.trim()).map_err(Failure::from))
        .collect()
}

fn infer(a: InferArgs) -> Outcome {
    let net = load(&a.network)?;
    let query = lookup_all(&net, &a.query)?;
    let obs = Observation::new(&net, net.catalog.parse_assignments(&a.evidence)?)?;
    cbn_core::posterior::check_query(&net, &query, &obs)?;
    let order = match &a.order {
        Some(names) => EliminationOrder::given(&net, lookup_all(&net, names)?, &query, &obs)?,
        None => match a.heuristic {
            Heuristic::MinSize => EliminationOrder::min_size(&net, &query, &obs),
        },
    };
    let options = CveOptions { audit: a.audit, ..Default::default() };
    let start = Instant::now();
    let (posterior, counts) = run_engine(a.engine, &net, &query, &obs, &order, options)?;
    let elapsed = start.elapsed();

    let cat = &net.catalog;
    let cards = cat.cards(&query);
    let mut idx = vec![0usize; query.len()];
    for &p in posterior.probabilities() {
        let label: Vec<&str> = query.iter().zip(&idx).map(|(&v, &x)| cat.value_label(v, x)).collect();
        println!("{}\t{}", label.join(","), significant(p));
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < cards[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    if a.stats {
        let names: Vec<&str> = order.0.iter().map(|&v| cat.name(v)).collect();
        eprintln!("engine\t{}", a.engine);
        eprintln!("order\t{}", names.join(","));
        eprintln!("multiplications\t{}", counts.multiplications);
        eprintln!("additions\t{}", counts.additions);
        eprintln!("splits\t{}", counts.splits);
        eprintln!("max_table_size\t{}", counts.max_table_size);
        eprintln!("max_elim_size\t{}", counts.max_elim_size);
        eprintln!("time_ms\t{:.3}", elapsed.as_secs_f64() * 1e3);
    }
    Ok(())
}

fn gen(a: GenArgs) -> Outcome {
    let cfg = GenConfig { n: a.n, s: a.s, p: a.p, seed: a.seed, biased: a.biased };
    let net = generate_random_cbn(&cfg)?;
    match &a.output {
        Some(p) => save(&net, p)?,
        None => println!("{}", to_json_string(&net)),
    }
    Ok(())
}

fn compress(a: CompressArgs) -> Outcome {
    let cfg = CompressionConfig { threshold: a.threshold, accept_ratio: a.accept_ratio };
    cfg.check()?;
    let net = load(&a.input)?;
    let (out, reports) = compress_network(&net, &cfg)?;
    let report = format_report(&reports);
    match &a.report {
        Some(p) => write_out(Some(p), &report)?,
        None => eprint!("{report}"),
    }
    match &a.output {
        Some(p) => save(&out, p)?,
        None => println!("{}", to_json_string(&out)),
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Outcome {
    let mut nets = Vec::new();
    for path in &a.networks {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        nets.push((name, load(path)?));
    }
    for k in 0..a.generate {
        let seed = a.gen_seed.wrapping_add(k as u64);
        let cfg = GenConfig { n: a.n, s: a.s, p: a.p, seed, biased: a.biased };
        nets.push((format!("gen-{seed}"), generate_random_cbn(&cfg)?));
    }
    if nets.is_empty() {
        return Err(Failure::Usage("no networks given (pass files or --generate)".into()));
    }
    let cfg = CampaignConfig {
        queries_per_net: a.queries,
        observation_counts: a.observations,
        seed: a.seed,
        engines: a.engines,
        replicates: a.replicates,
    };
    let records = run_campaign(&nets, &cfg)?;
    write_out(a.output.as_deref(), &to_csv(&records, !a.no_time))?;
    if let Some(tol) = a.check {
        let problems = check_records(&records, tol);
        for p in &problems {
            eprintln!("{p}");
        }
        if !problems.is_empty() {
            return Err(Failure::Inference(format!("{} check(s) failed", problems.len())));
        }
    }
    Ok(())
}
