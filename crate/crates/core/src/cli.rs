//! Command-line front end and the brute-force oracles.
//!
//! Payload goes to the output writer and is deterministic; timings go to the
//! diagnostic writer. Exit codes: 0 success, 1 invalid certificate,
//! 2 unresolved proof, 3 usage or input error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::certcheck::{parse, serialize, verify, Verdict};
use crate::hensel::eights_counterexample;
use crate::natarith::{is_perfect_square, triangular, Block, Digit, Natural, Problem};
use crate::pell::{enumerate_solutions, families, fundamental_unit, PellEquation};
use crate::prover::{prove_block, prove_digit, Proof, SearchBudget, Unresolved};
use crate::residue::orbit;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNRESOLVED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// A triangular number `T_k` equal to the `i`-fold repetition of `unit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub k: Natural,
    pub triangular: Natural,
    pub unit: u8,
    pub i: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub bound: u64,
    pub hits: Vec<SearchHit>,
    pub elapsed: Duration,
}

impl SearchReport {
    pub fn values(&self) -> Vec<Natural> {
        self.hits.iter().map(|h| h.triangular.clone()).collect()
    }
}

/// `T_k` for `k = 1..=k_max` whose decimal digits are all equal.
pub fn brute_force_digits(k_max: u64) -> SearchReport {
    let start = Instant::now();
    let mut hits = Vec::new();
    let mut t: u128 = 0;
    for k in 1..=k_max {
        t += k as u128;
        let s = t.to_string();
        let first = s.as_bytes()[0];
        if s.bytes().all(|b| b == first) {
            hits.push(SearchHit {
                k: k.into(),
                triangular: t.into(),
                unit: first - b'0',
                i: s.len() as u64,
            });
        }
    }
    SearchReport { bound: k_max, hits, elapsed: start.elapsed() }
}

/// `T_k` for `k = 1..=k_max` made of one repeated two-digit block.
pub fn brute_force_blocks(k_max: u64) -> SearchReport {
    let start = Instant::now();
    let mut hits = Vec::new();
    let mut t: u128 = 0;
    for k in 1..=k_max {
        t += k as u128;
        let s = t.to_string();
        let b = s.as_bytes();
        if b.len().is_multiple_of(2) && b.chunks(2).all(|c| c == &b[..2]) {
            hits.push(SearchHit {
                k: k.into(),
                triangular: t.into(),
                unit: (b[0] - b'0') * 10 + (b[1] - b'0'),
                i: b.len() as u64 / 2,
            });
        }
    }
    SearchReport { bound: k_max, hits, elapsed: start.elapsed() }
}

/// Tests `1 + 8 R_i` for squareness for `i = 1..=i_max`.
pub fn square_test_scan(digit: Option<Digit>, i_max: u64) -> SearchReport {
    let start = Instant::now();
    let digits: Vec<Digit> = match digit {
        Some(d) => vec![d],
        None => Digit::all().collect(),
    };
    let mut hits: Vec<SearchHit> = digits
        .par_iter()
        .flat_map_iter(|&d| {
            let problem = Problem::Digit(d);
            (1..=i_max).filter_map(move |i| {
                let disc = problem.discriminant(i).ok()?;
                let root = is_perfect_square(&disc)?;
                let k: Natural = (root - 1u32) >> 1;
                let t = triangular(&k).ok()?;
                Some(SearchHit { k, triangular: t, unit: d.get(), i })
            })
        })
        .collect();
    hits.sort_by(|a, b| a.triangular.cmp(&b.triangular));
    SearchReport { bound: i_max, hits, elapsed: start.elapsed() }
}

#[derive(Debug, Parser)]
#[command(name = "trirep", about = "Triangular numbers with repeated digits or blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Brute-force search for repdigit triangular numbers.
    Search {
        #[arg(long, default_value_t = 1_000_000)]
        max_k: u64,
    },
    /// Brute-force search for triangular numbers with a repeated two-digit block.
    SearchBlocks {
        #[arg(long, default_value_t = 1_000_000)]
        max_k: u64,
    },
    /// Test 1 + 8 * repdigit for squareness digit count by digit count.
    Scan {
        #[arg(long, default_value_t = 1000)]
        max_i: u64,
        #[arg(long)]
        digit: Option<u8>,
    },
    /// Prove the result for one digit or one block.
    Prove {
        #[arg(long, conflicts_with = "block", required_unless_present = "block")]
        digit: Option<u8>,
        #[arg(long)]
        block: Option<u8>,
        /// Write the certificate here.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Largest modulus tried by the obstruction search; also caps the
        /// prime powers paired into composite moduli.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Prove every digit 1..9.
    ProveAll {
        #[arg(long)]
        emit_dir: Option<PathBuf>,
    },
    /// Verify a certificate file.
    Check { path: PathBuf },
    /// Solutions of x^2 - D y^2 = N.
    Pell {
        #[arg(long)]
        d: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 10_000)]
        y_limit: u64,
    },
    /// Smallest square ending in K eights and a nine.
    Hensel {
        #[arg(long)]
        eights: u64,
    },
    /// Residues of the d = 1, even-length chain modulo 5 and 7.
    Table1,
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let start = Instant::now();
    let code = match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    };
    let _ = writeln!(err, "elapsed: {:.3}s", start.elapsed().as_secs_f64());
    code
}

type Outcome = Result<i32, String>;

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Search { max_k } => {
            positive(max_k, "--max-k")?;
            report(out, &brute_force_digits(max_k), "digit")
        }
        Command::SearchBlocks { max_k } => {
            positive(max_k, "--max-k")?;
            report(out, &brute_force_blocks(max_k), "block")
        }
        Command::Scan { max_i, digit } => {
            positive(max_i, "--max-i")?;
            let digit = digit.map(Digit::new).transpose().map_err(|e| e.to_string())?;
            report(out, &square_test_scan(digit, max_i), "digit")
        }
        Command::Prove { digit, block, emit, budget } => {
            let result = match (digit, block) {
                (Some(d), _) => prove_digit(Digit::new(d).map_err(|e| e.to_string())?),
                (None, Some(c)) => {
                    let budget = SearchBudget {
                        max_modulus: budget.max(2),
                        pair_pool: budget.clamp(2, SearchBudget::default().pair_pool),
                        ..SearchBudget::default()
                    };
                    prove_block(Block::new(c).map_err(|e| e.to_string())?, budget)
                }
                (None, None) => return Err("one of --digit or --block is required".into()),
            };
            match result {
                Ok(proof) => emit_proof(out, &proof, emit.as_deref()),
                Err(u) => {
                    unresolved(out, &u)?;
                    Ok(EXIT_UNRESOLVED)
                }
            }
        }
        Command::ProveAll { emit_dir } => prove_all(out, emit_dir.as_deref()),
        Command::Check { path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let verdict = match parse(&text) {
                Ok(doc) => verify(&doc),
                Err(e) => Verdict::Invalid(format!("parse error: {e}")),
            };
            w(out, format_args!("{verdict}\n"))?;
            Ok(if verdict.is_valid() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Pell { d, n, y_limit } => pell(out, d, n, y_limit),
        Command::Hensel { eights } => {
            let witness = eights_counterexample(eights).map_err(|e| e.to_string())?;
            let square = &witness.z * &witness.z;
            w(out, format_args!("eights: {eights}\nz: {}\nz^2: {square}\ntrailing: {}\n", witness.z, witness.trailing))?;
            let ok = witness.verified();
            w(out, format_args!("verified: {ok}\n"))?;
            Ok(if ok { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Table1 => {
            w(out, format_args!("{}", table1()?))?;
            Ok(EXIT_OK)
        }
    }
}

fn w(out: &mut dyn Write, args: std::fmt::Arguments<'_>) -> Result<(), String> {
    out.write_fmt(args).map_err(|e| e.to_string())
}

fn positive(v: u64, flag: &str) -> Result<(), String> {
    if v == 0 {
        Err(format!("{flag} must be at least 1"))
    } else {
        Ok(())
    }
}

fn report(out: &mut dyn Write, r: &SearchReport, kind: &str) -> Outcome {
    for h in &r.hits {
        w(out, format_args!("k={} T={} {kind}={} i={}\n", h.k, h.triangular, h.unit, h.i))?;
    }
    w(out, format_args!("bound: {}\nhits: {}\n", r.bound, r.hits.len()))?;
    Ok(EXIT_OK)
}

fn join(values: &[Natural]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Re-checks the proof before reporting it.
fn emit_proof(out: &mut dyn Write, proof: &Proof, emit: Option<&Path>) -> Outcome {
    let text = serialize(proof);
    let verdict = parse(&text).map(|doc| verify(&doc)).unwrap_or_else(|e| Verdict::Invalid(e.to_string()));
    if let Some(path) = emit {
        std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    w(out, format_args!("{}: {}\nsolutions: {}\nsteps: {}\ncertificate: {verdict}\n", proof.problem, if verdict.is_valid() { "proven" } else { "failed" }, join(&proof.solutions), proof.steps.len()))?;
    Ok(if verdict.is_valid() { EXIT_OK } else { EXIT_INVALID })
}

fn unresolved(out: &mut dyn Write, u: &Unresolved) -> Result<(), String> {
    w(out, format_args!("{u}\n"))?;
    for a in &u.attempts {
        w(out, format_args!("attempted: {a}\n"))?;
    }
    w(out, format_args!("direct check clear for i <= {}; solutions found: {}\n", u.clearance, join(&u.direct_solutions)))
}

fn prove_all(out: &mut dyn Write, emit_dir: Option<&Path>) -> Outcome {
    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let digits: Vec<Digit> = Digit::all().collect();
    // each task buffers its own output; results are printed in digit order
    let results: Vec<(Vec<u8>, i32, Vec<Natural>)> = digits
        .par_iter()
        .map(|&d| {
            let mut buf = Vec::new();
            let path = emit_dir.map(|dir| dir.join(format!("digit-{d}.cert")));
            let (code, sols) = match prove_digit(d) {
                Ok(proof) => (emit_proof(&mut buf, &proof, path.as_deref()), proof.solutions.clone()),
                Err(u) => (unresolved(&mut buf, &u).map(|_| EXIT_UNRESOLVED), Vec::new()),
            };
            (buf, code.unwrap_or(EXIT_USAGE), sols)
        })
        .collect();
    let mut worst = EXIT_OK;
    let mut all = Vec::new();
    for (buf, code, sols) in results {
        out.write_all(&buf).map_err(|e| e.to_string())?;
        worst = worst.max(code);
        all.extend(sols);
    }
    all.sort();
    w(out, format_args!("all solutions: {}\n", join(&all)))?;
    Ok(worst)
}

fn pell(out: &mut dyn Write, d: u64, n: i64, y_limit: u64) -> Outcome {
    let eq = PellEquation::new(d, n).map_err(|e| e.to_string())?;
    let unit = fundamental_unit(d).map_err(|e| e.to_string())?;
    w(out, format_args!("equation: {eq}\nunit: ({}, {})\n", unit.u, unit.v))?;
    for (idx, fam) in families(&eq).map_err(|e| e.to_string())?.iter().enumerate() {
        let (x, y) = fam.base();
        w(out, format_args!("family {idx}: ({x}, {y})\n"))?;
    }
    let sols = enumerate_solutions(&eq, &Natural::from(y_limit)).map_err(|e| e.to_string())?;
    for s in &sols {
        w(out, format_args!("({}, {}) family {} step {}\n", s.x, s.y, s.family_index, s.step))?;
    }
    w(out, format_args!("solutions with y <= {y_limit}: {}\n", sols.len()))?;
    Ok(EXIT_OK)
}

/// Rows `n = 0..=6` of `(x_n, y_n)` modulo 5 and 7 for `x^2 - 2 y^2 = 1`
/// started at `(3, 2)`.
pub fn table1() -> Result<String, String> {
    let eq = PellEquation::new(2, 1).map_err(|e| e.to_string())?;
    let fam = families(&eq).map_err(|e| e.to_string())?;
    let unit = fundamental_unit(2).map_err(|e| e.to_string())?;
    // the chain through (3, 2) is the chain of (1, 0) shifted by one step
    let start = crate::pell::SolutionFamily::new(eq, unit, 3.into(), 2u32.into()).map_err(|e| e.to_string())?;
    debug_assert_eq!(fam.len(), 1);
    let o5 = orbit(&start, 5).map_err(|e| e.to_string())?;
    let o7 = orbit(&start, 7).map_err(|e| e.to_string())?;
    let mut text = String::from("n\tx_n mod 5\ty_n mod 5\tx_n mod 7\ty_n mod 7\n");
    for n in 0..=6usize {
        let (x5, y5) = o5.pairs()[n % o5.pairs().len()];
        let (x7, y7) = o7.pairs()[n % o7.pairs().len()];
        text.push_str(&format!("{n}\t{x5}\t{y5}\t{x7}\t{y7}\n"));
    }
    Ok(text)
}
