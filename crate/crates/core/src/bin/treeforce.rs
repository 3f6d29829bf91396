//! Command-line front end.
//!
//! Exit codes: 0 verified complete, 2 unresolved, 3 hypothesis violated,
//! 1 any error.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use tree_forcing::cohesive::cohesive_construction;
use tree_forcing::driver::check_trace;
use tree_forcing::ptree::cross_trees;
use tree_forcing::trace::{read_trace, write_trace};
use tree_forcing::{run_construction, BitString, Error, GroundSets, Pair, PartitionTree, Registry, Result, Schedule};

#[derive(Parser)]
#[command(name = "treeforce", version, about = "Partition-tree Mathias forcing at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full construction and check the extracted set.
    Run(RunArgs),
    /// Build a set cohesive for a sequence of sets.
    Cohesive(CohesiveArgs),
    /// Re-verify a trace file.
    Check {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Cross two or more partition trees and print the result.
    Cross {
        #[arg(long, num_args = 2.., required = true)]
        trees: Vec<PathBuf>,
    },
}

#[derive(Args, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    universe: Option<usize>,
    /// Bits of A, or `random:SEED`.
    #[arg(long)]
    a: Option<String>,
    /// Bits of C, or `random:SEED`.
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Number of scheduled requirements (Q and R alternating).
    #[arg(long)]
    stages: Option<usize>,
    /// Leading positions given their own tree cell.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long)]
    domain_bound: Option<usize>,
    /// Functional pairs as `e,i;e,i;…`; replaces the Cantor-ordered pairs.
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn merged(self) -> Result<RunArgs> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = fs::read_to_string(path)?;
        let file: RunArgs = toml::from_str(&text).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(RunArgs {
            config: None,
            universe: self.universe.or(file.universe),
            a: self.a.or(file.a),
            c: self.c.or(file.c),
            registry: self.registry.or(file.registry),
            stages: self.stages.or(file.stages),
            depth: self.depth.or(file.depth),
            threshold: self.threshold.or(file.threshold),
            domain_bound: self.domain_bound.or(file.domain_bound),
            pairs: self.pairs.or(file.pairs),
            trace: self.trace.or(file.trace),
        })
    }
}

#[derive(Args)]
struct CohesiveArgs {
    /// One bit string per line.
    #[arg(long)]
    sets: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    /// Bits of C, or `random:SEED`; defaults to all zeros.
    #[arg(long)]
    c: Option<String>,
    #[arg(long, default_value_t = 3)]
    domain_bound: usize,
}

fn bits_or_random(arg: &str, n: usize) -> Result<BitString> {
    if let Some(seed) = arg.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|e| Error::Parse {
            line: 0,
            msg: format!("seed {seed:?}: {e}"),
        })?;
        return Ok(BitString::random(n, &mut ChaCha8Rng::seed_from_u64(seed)));
    }
    let b: BitString = arg.parse()?;
    if b.len() != n {
        return Err(Error::Length(format!("expected {n} bits, got {}", b.len())));
    }
    Ok(b)
}

fn parse_pairs(list: &str) -> Result<Vec<Pair>> {
    list.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let bad = || Error::Parse {
                line: 0,
                msg: format!("bad pair {p:?}"),
            };
            let (e, i) = p.split_once(',').ok_or_else(bad)?;
            Ok(Pair::new(
                e.trim().parse().map_err(|_| bad())?,
                i.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn read_registry(path: &Path, universe: usize) -> Result<Registry> {
    Registry::parse(&fs::read_to_string(path)?, universe)
}

fn run(args: RunArgs) -> Result<i32> {
    let args = args.merged()?;
    let n = args.universe.unwrap_or(64);
    let a = bits_or_random(args.a.as_deref().unwrap_or("random:0"), n)?;
    let c = bits_or_random(args.c.as_deref().unwrap_or("random:1"), n)?;
    let grounds = GroundSets::new(a, c)?;
    let reg_path = args
        .registry
        .ok_or_else(|| Error::Io("--registry is required (flag or config)".into()))?;
    let registry = read_registry(&reg_path, n)?;
    let bound = args
        .domain_bound
        .unwrap_or_else(|| registry.diagonal.halts.keys().max().copied().unwrap_or(1));
    let depth = args.depth.unwrap_or(4);
    let mut schedule = match &args.pairs {
        Some(list) => {
            let pairs = parse_pairs(list)?;
            let mut s = Schedule::alternating(&pairs, pairs.len(), depth, bound);
            if let Some(k) = args.stages {
                s.requirements.truncate(k);
            }
            s
        }
        None => Schedule::standard(args.stages.unwrap_or(7), &registry, depth, bound),
    };
    schedule.threshold = args.threshold;
    let trace = run_construction(&grounds, &registry, &schedule)?;
    for rec in &trace.stages {
        println!(
            "stage {:>3} {:<10} {:<18} k {} -> {}",
            rec.stage,
            rec.requirement.to_string(),
            format!("{:?}", rec.tag),
            rec.k_before,
            rec.k_after
        );
    }
    if let Some(path) = &args.trace {
        write_trace(&trace, BufWriter::new(fs::File::create(path)?))?;
    }
    println!("outcome: {:?}", trace.outcome);
    if let (Some(ex), Some(report)) = (&trace.extraction, &trace.report) {
        println!("G = {}", ex.g);
        for chk in &report.checks {
            let detail = match (&chk.counts, &chk.witness) {
                (Some((x, y)), _) => format!("|G∩A| = {x}, |G∩Ā| = {y}"),
                (_, Some(w)) => format!("{w:?}"),
                _ => "no witness".into(),
            };
            println!("  {:<10} {} {detail}", chk.requirement.to_string(), if chk.satisfied { "ok  " } else { "FAIL" });
        }
        if !report.all_satisfied() {
            return Err(Error::Verification {
                stage: trace.stages.len(),
                what: "extracted set fails a requirement".into(),
            });
        }
    }
    Ok(trace.outcome.exit_code())
}

fn cohesive(args: CohesiveArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.sets)?;
    let sets: Vec<BitString> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect::<Result<_>>()?;
    let n = sets.first().map_or(0, BitString::len);
    let c = match &args.c {
        Some(arg) => bits_or_random(arg, n)?,
        None => BitString::zeros(n),
    };
    let grounds = GroundSets::new(BitString::zeros(n), c)?;
    let registry = read_registry(&args.registry, n)?;
    let out = cohesive_construction(&sets, &grounds, &registry, args.domain_bound)?;
    for (s, (z, rho)) in out.zs.iter().zip(&out.stems).enumerate() {
        println!("stage {s}: |Z| = {}, |ρ| = {}", z.count_ones(), rho.len());
    }
    for h in &out.hits {
        println!("hit: stage {} functional {} input {} value {}", h.stage, h.functional, h.n, u8::from(h.value));
    }
    println!("G = {}", out.g);
    Ok(0)
}

fn check(path: &Path) -> Result<i32> {
    let trace = read_trace(BufReader::new(fs::File::open(path)?))?;
    check_trace(&trace)?;
    println!("verified {} stages; outcome {:?}", trace.stages.len(), trace.outcome);
    Ok(trace.outcome.exit_code())
}

fn cross(paths: &[PathBuf]) -> Result<i32> {
    let trees = paths
        .iter()
        .map(|p| PartitionTree::from_text(&fs::read_to_string(p)?))
        .collect::<Result<Vec<_>>>()?;
    print!("{}", cross_trees(&trees)?.to_text());
    Ok(0)
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with every other error; 2 means unresolved
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Cohesive(args) => cohesive(args),
        Command::Check { trace } => check(&trace),
        Command::Cross { trees } => cross(&trees),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
