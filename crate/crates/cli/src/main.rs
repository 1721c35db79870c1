mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use fibpow::arbreal::CertifiedReal;
use fibpow::error::FibpowError;
use fibpow::linforms::{bravo_luca_gap_bound, bravo_luca_n_bound, BOUND_BITS};
use fibpow::pipeline::{global_reduction, prove_theorem, solve_y, CascadeOptions, ProveOptions, SolveOptions, Verdict};
use fibpow::quadfield::{log_int, zeckendorf};
use fibpow::reduction::{
    baker_davenport, build_kappa_list, continued_fraction_with, lattice_distance_lower_bound,
    lll_reduce, IntegerLattice,
};

const EXIT_REFUTED: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "fibpow", version, about = "Certified solver for F_n + F_m = y^a")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All solutions for one y.
    Solve {
        y: BigInt,
        /// Search only n below this instead of the certified bound.
        #[arg(long)]
        n_cap: Option<BigInt>,
    },
    /// Runs the global bounds and every instance up to --n1-max.
    Prove(ProveArgs),
    /// Zeckendorf representation of N.
    Zeckendorf { n: BigInt },
    /// Single-solution bounds for y.
    Bounds { y: BigInt },
    /// The global cascade of bounds only.
    Cascade {
        #[arg(long, default_value_t = 3)]
        passes: usize,
    },
    /// One reduction primitive on explicit inputs.
    #[command(subcommand)]
    Reduce(ReduceCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long, default_value_t = 470)]
    n1_max: u64,
    #[arg(long, default_value = "cert.json")]
    out: PathBuf,
    /// Continue from the checkpoint next to --out.
    #[arg(long)]
    resume: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Working precision for the convergent lists.
    #[arg(long, default_value_t = 3072)]
    precision_bits: u32,
    /// Start each instance from its own single-solution bound and skip the
    /// global cascade.
    #[arg(long)]
    skip_cascade: bool,
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// Convergents of a real number.
    Cf {
        #[arg(long)]
        mu: String,
        /// Print up to this index.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// LLL on a basis given as rows, one row per line (file or stdin).
    Lll {
        /// File with one basis vector per line; `-` for stdin.
        #[arg(long, default_value = "-")]
        basis: String,
        /// Target vector for the distance bound, comma separated.
        #[arg(long)]
        target: Option<String>,
    },
    /// Baker-Davenport on |n mu + tau - x| < c1 exp(-c2 H) with n <= N.
    Bakdav {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        n_bound: BigInt,
        #[arg(long)]
        c1: String,
        #[arg(long)]
        c2: String,
        #[arg(long, default_value_t = 250)]
        count: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("--jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

enum Failure {
    Usage(String),
    Numeric(FibpowError),
}

impl From<FibpowError> for Failure {
    fn from(e: FibpowError) -> Self {
        match e {
            FibpowError::InvalidArgument(m) => Failure::Usage(m),
            e => Failure::Numeric(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(e.into())
    }
}

fn parse_expr(s: &str) -> Result<expr::Expr, Failure> {
    expr::parse(s).map_err(|e| Failure::Usage(format!("{s:?}: {e}")))
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Solve { y, n_cap } => {
            if y < BigInt::from(2) {
                return Err(Failure::Usage("y must be at least 2".into()));
            }
            let capped = n_cap.is_some();
            let s = solve_y(&y, &SolveOptions { n_cap, ..Default::default() })?;
            eprintln!("n <= {}, a <= {}{}", s.n2_final, s.a_final, if capped { " (capped search)" } else { "" });
            let list: Vec<String> = s.solutions.iter().map(|t| t.to_string()).collect();
            println!("{}", list.join(", "));
            Ok(0)
        }
        Command::Zeckendorf { n } => {
            if n < BigInt::from(1) {
                return Err(Failure::Usage("N must be positive".into()));
            }
            let terms: Vec<String> = zeckendorf(&n).iter().rev().map(|i| format!("F{i}")).collect();
            println!("{}", terms.join(" + "));
            Ok(0)
        }
        Command::Bounds { y } => {
            if y < BigInt::from(2) {
                return Err(Failure::Usage("y must be at least 2".into()));
            }
            let n = bravo_luca_n_bound(&y)?;
            let gap = bravo_luca_gap_bound(&log_int(&y, BOUND_BITS), &n)?;
            println!("n < {n}");
            println!("n - m < {}", gap.ceil_upper());
            Ok(0)
        }
        Command::Cascade { passes } => {
            let st = global_reduction(&CascadeOptions { passes, ..Default::default() })?;
            for e in &st.trail {
                println!("{:<28} {:<24} {}", e.stage, e.value, e.note);
            }
            Ok(0)
        }
        Command::Prove(args) => prove(args),
        Command::Reduce(r) => reduce(r),
    }
}

fn prove(args: ProveArgs) -> Result<u8, Failure> {
    if args.n1_max < 3 {
        return Err(Failure::Usage("--n1-max must be at least 3".into()));
    }
    if args.precision_bits < 256 {
        return Err(Failure::Usage("--precision-bits must be at least 256".into()));
    }
    let bounds = if args.skip_cascade {
        None
    } else {
        eprintln!("running the global cascade");
        Some(global_reduction(&CascadeOptions::default())?)
    };
    let checkpoint = args.out.with_extension("partial.jsonl");
    let opts = ProveOptions {
        n1_max: args.n1_max,
        solve: SolveOptions { kappa_bits: args.precision_bits, ..Default::default() },
        checkpoint: Some(checkpoint),
        resume: args.resume,
        progress: true,
    };
    let cert = prove_theorem(bounds.as_ref(), &opts)?;
    let body = match args.format {
        Format::Json => serde_json::to_string_pretty(&cert).map_err(|e| Failure::Numeric(FibpowError::Format(e.to_string())))?,
        Format::Csv => cert.to_csv(),
        Format::Text => cert.to_text(),
    };
    std::fs::write(&args.out, body)?;
    eprint!("{}", cert.to_text());
    Ok(match cert.verdict() {
        Verdict::Confirmed => 0,
        Verdict::Refuted => EXIT_REFUTED,
        Verdict::Failed => EXIT_NUMERIC,
    })
}

fn read_basis(src: &str) -> Result<IntegerLattice, Failure> {
    let text = if src == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(src)?
    };
    IntegerLattice::parse_text(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn reduce(cmd: ReduceCmd) -> Result<u8, Failure> {
    match cmd {
        ReduceCmd::Cf { mu, count } => {
            let e = parse_expr(&mu)?;
            let t = continued_fraction_with(512, |b| e.real(b), |l, _| l >= count)?;
            for l in 0..t.len() {
                println!("{l} a={} q={}", t.partial_quotients[l], t.q(l));
            }
            let last = t.len() - 1;
            println!("max partial quotient up to {last}: {}", t.max_partial_quotient(last));
            Ok(0)
        }
        ReduceCmd::Lll { basis, target } => {
            let lat = read_basis(&basis)?;
            let red = lll_reduce(&lat)?;
            print!("{red}");
            if let Some(t) = target {
                let y: Vec<BigInt> = t
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Failure::Usage("bad target vector".into()))?;
                if y.len() != red.dim() {
                    return Err(Failure::Usage("target has the wrong length".into()));
                }
                let c1 = lattice_distance_lower_bound(&red, &y)?;
                println!("distance >= {}", c1.to_sci(8));
            }
            Ok(0)
        }
        ReduceCmd::Bakdav { mu, tau, n_bound, c1, c2, count } => {
            let (mu, tau, c1, c2) = (parse_expr(&mu)?, parse_expr(&tau)?, parse_expr(&c1)?, parse_expr(&c2)?);
            let pairs = build_kappa_list(|b| mu.real(b), &n_bound, count)?;
            let c1: CertifiedReal = c1.real(BOUND_BITS);
            let c2: CertifiedReal = c2.real(BOUND_BITS);
            match baker_davenport(&|b| tau.real(b), &c1, &c2, &pairs)? {
                Some(r) => {
                    println!("H <= {} (pair {}, q = {})", r.h, r.pair, pairs[r.pair].q);
                    Ok(0)
                }
                None => {
                    println!("no pair qualifies among {}", pairs.len());
                    Ok(EXIT_NUMERIC)
                }
            }
        }
    }
}
