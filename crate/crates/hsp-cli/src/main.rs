//! `hsp`: command-line front end for the toolkit. Seeded reproducible
//! runs, JSON reports on stdout, CSV parameter sweeps, wall-clock on
//! stderr so report bytes stay deterministic.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 when a run
//! violates an asserted bound (the report is still printed).

mod commands;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "hsp", version, about = "Hidden-subgroup toolkit front end")]
struct Cli {
    /// Also write the report to this file (joined with $HSP_OUT_DIR when
    /// relative).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fourier-transform circuit checks
    Qft {
        #[command(subcommand)]
        sub: QftCmd,
    },
    /// Approximate transform for an odd modulus, with its bound report
    #[command(name = "odd-qft")]
    OddQft(OddQftArgs),
    /// Hidden-subgroup recovery over a finite abelian group
    Hsp(HspArgs),
    /// Cyclic hidden-subgroup recovery via the GCD of quantum samples
    #[command(name = "cyclic-hsp")]
    CyclicHsp(CyclicHspArgs),
    /// XOR-mask hidden-shift recovery over Z2^n
    Simon(SimonArgs),
    /// Factor an odd composite through order finding
    Shor(ShorArgs),
    /// Coset-state measurement cascade on a small non-abelian group
    Ehk(EhkArgs),
    /// Graph-automorphism reductions
    Graph {
        #[command(subcommand)]
        sub: GraphCmd,
    },
    /// Monte-Carlo and sieve checks of the probability bounds
    Bounds {
        #[command(subcommand)]
        sub: BoundsCmd,
    },
    /// Cartesian parameter sweep from a config file, CSV out
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum QftCmd {
    /// Compare the exact circuit against the dense matrix on all basis states
    Verify {
        #[arg(long)]
        n: usize,
    },
    /// Measure truncated-circuit error against the dense transform
    Afft {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        /// Random input states to measure
        #[arg(long, default_value_t = 100)]
        states: usize,
    },
}

#[derive(Args)]
struct OddQftArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    eps: f64,
    /// Input state: basisK, uniform, or random
    #[arg(long, default_value = "random")]
    u: String,
    #[arg(long)]
    seed: u64,
    /// Override the planned smoothing length (requires --M)
    #[arg(long = "L")]
    l: Option<u64>,
    /// Override the planned working modulus (requires --L)
    #[arg(long = "M")]
    m: Option<u64>,
}

#[derive(Args)]
struct HspArgs {
    /// Group descriptor, e.g. Z4 or Z2xZ4xZ5
    #[arg(long)]
    group: String,
    /// Hidden subgroup as a generator list, e.g. "[(2)]"
    #[arg(long)]
    hidden: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
}

#[derive(Args)]
struct CyclicHspArgs {
    #[arg(long = "N")]
    n: u64,
    /// Generator of the hidden subgroup (must divide N)
    #[arg(long)]
    d: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
}

#[derive(Args)]
struct SimonArgs {
    #[arg(long)]
    n: usize,
    /// Hidden mask; drawn from the seed when omitted
    #[arg(long)]
    s: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
}

#[derive(Args)]
struct ShorArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct EhkArgs {
    /// Bundled table name: Z2..Z8, Z2xZ2, S3, D4, Q8
    #[arg(long)]
    group: String,
    /// Hidden subgroup as comma-separated element indices, e.g. 0,2
    #[arg(long)]
    hidden: String,
    /// Coset-state copies
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Count automorphisms of a graph file
    Acount {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Decide isomorphism of two graph files
    Iso {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = IsoVia::Direct)]
        via: IsoVia,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IsoVia {
    /// Individualization search returning an explicit map
    Direct,
    /// Automorphism-count comparison on the disjoint union
    Acount,
    /// Generator crossing test on the disjoint union
    Agen,
    /// Orbit-partition crossing test on the disjoint union
    Apart,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Majority-vote failure rate against the exponential bound
    Chernoff {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Probability that k uniform draws from {0..d-1} have gcd 1
    Gcd {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Probability that t + log|G| uniform elements generate G
    Gen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        t: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Totient-sum deviation from 3n^2/pi^2
    Totient {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
}

/// A rendered report plus whether any asserted bound was violated.
pub struct Outcome {
    pub report: String,
    pub violation: bool,
}

impl Outcome {
    fn json(value: serde_json::Value, violation: bool) -> Self {
        let mut report = serde_json::to_string_pretty(&value).expect("report serializes");
        report.push('\n');
        Outcome { report, violation }
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    match &cli.cmd {
        Cmd::Qft { sub } => match sub {
            QftCmd::Verify { n } => commands::qft_verify(*n),
            QftCmd::Afft { n, m, seed, states } => commands::qft_afft(*n, *m, *seed, *states),
        },
        Cmd::OddQft(a) => commands::odd_qft(a.n, a.eps, &a.u, a.seed, a.l, a.m),
        Cmd::Hsp(a) => commands::hsp(&a.group, &a.hidden, a.seed, a.repetitions),
        Cmd::CyclicHsp(a) => commands::cyclic_hsp(a.n, a.d, a.samples, a.seed, a.repetitions),
        Cmd::Simon(a) => commands::simon(a.n, a.s, a.seed, a.repetitions),
        Cmd::Shor(a) => commands::shor(a.n, a.seed),
        Cmd::Ehk(a) => commands::ehk(&a.group, &a.hidden, a.m, a.seed, a.repetitions),
        Cmd::Graph { sub } => match sub {
            GraphCmd::Acount { input } => commands::graph_acount(input),
            GraphCmd::Iso { a, b, via } => commands::graph_iso(a, b, *via),
        },
        Cmd::Bounds { sub } => match sub {
            BoundsCmd::Chernoff { eps, n, trials, seed } => {
                commands::bounds_chernoff(*eps, *n, *trials, *seed)
            }
            BoundsCmd::Gcd { d, k, trials, seed } => {
                commands::bounds_gcd(*d, *k, *trials, *seed)
            }
            BoundsCmd::Gen { group, t, trials, seed } => {
                commands::bounds_gen(group, *t, *trials, *seed)
            }
            BoundsCmd::Totient { n } => commands::bounds_totient(*n),
        },
        Cmd::Sweep(a) => sweep::run_sweep_file(&a.config),
    }
}

fn resolve_out(path: &PathBuf) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("HSP_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.clone()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            if let Some(out) = &cli.out {
                let path = resolve_out(out);
                if let Err(e) = std::fs::write(&path, &outcome.report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            eprintln!("wall_clock_ms={}", start.elapsed().as_millis());
            if outcome.violation {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
