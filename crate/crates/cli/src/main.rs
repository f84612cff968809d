//! `qadic`: verification suites, parameter tables, rounding scans, benchmarks
//! and one-off products from the command line.

mod bench;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadic::cmm::{
    compress_cols, compress_rows, cmm_multiply, full_cmm, left_cmm, right_cmm, CmmConfig, DigitOrder, ModMatrix,
};
use qadic::fdiv::scan::{exhaustive_check_with, MAX_SCAN_BETA};
use qadic::fdiv::CASES;
use qadic::par::Exec;
use qadic::params::{cmm_params_with, compression_table, full_cmm_params_with, middle_product_params, RadixBound};
use qadic::polymul::{default_fqt_params, polymul_delayed, polymul_fqt_with, FqtAlgo, FqtConfig, ModPoly};

#[derive(Parser)]
#[command(name = "qadic", version, about = "Packed arithmetic over small prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oracle suites; exits 1 on any mismatch.
    Verify {
        /// One suite, or all of them when omitted.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::SUITES))]
        suite: Option<String>,
        /// Restrict modulus-indexed checks to this prime.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reduced sample counts.
        #[arg(long)]
        quick: bool,
    },
    /// Time the product variants and print CSV rows.
    Bench {
        #[arg(long, value_enum, default_value_t = BenchCommand::All)]
        command: BenchCommand,
        /// Restrict to one variant name.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Square matrix dimension.
        #[arg(long, default_value_t = 256)]
        dim: usize,
        /// Polynomial degree.
        #[arg(long, default_value_t = 1000)]
        deg: usize,
        /// FQT packing degree.
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 5)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
        exec: ExecArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compression factor per radix for a modulus.
    ParamsTable {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 53)]
        beta: u32,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive rounding-mode scan, one CSV row per (beta, case).
    FdivScan {
        /// Mantissa widths to scan (repeatable); defaults to 4 through 10.
        #[arg(long, value_parser = clap::value_parser!(u32).range(4..=MAX_SCAN_BETA as i64))]
        beta: Vec<u32>,
        /// Case number 1 to 9; all cases when omitted.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        case: Option<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiply two matrices read from files or drawn at random.
    Matmul {
        #[arg(long, value_enum, default_value_t = MatmulVariant::Right)]
        variant: MatmulVariant,
        /// Left operand file (`p rows cols` header, then residues).
        #[arg(long, requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Radix bound for the right, left and full variants.
        #[arg(long, value_enum, default_value_t = Bound::Strict)]
        bound: Bound,
        /// Compare against the plain product; exits 1 on mismatch.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiply two polynomials read from files or drawn at random.
    Polymul {
        #[arg(long, value_enum, default_value_t = PolyAlgo::Karatsuba)]
        algo: PolyAlgo,
        /// Left operand file (`p len` header, then coefficients lowest first).
        #[arg(long, requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 10)]
        deg_a: usize,
        #[arg(long, default_value_t = 10)]
        deg_b: usize,
        /// FQT packing degree.
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare against the schoolbook product; exits 1 on mismatch.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchCommand {
    All,
    Matmul,
    Polymul,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Exec {
    fn from(e: ExecArg) -> Exec {
        match e {
            ExecArg::Sequential => Exec::Sequential,
            ExecArg::Parallel => Exec::Parallel,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatmulVariant {
    Plain,
    Cmm,
    Right,
    Left,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    Inclusive,
    Strict,
}

impl From<Bound> for RadixBound {
    fn from(b: Bound) -> RadixBound {
        match b {
            Bound::Inclusive => RadixBound::Inclusive,
            Bound::Strict => RadixBound::Strict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyAlgo {
    Delayed,
    Classical,
    Karatsuba,
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Arguments that parse but describe an impossible request: exit 2.
    Usage(anyhow::Error),
    /// A verification mismatch or I/O failure: exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

/// Writes to `--out` when given, else stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Verify { suite, p, seed, quick } => run_verify(suite, p, seed, quick),
        Command::Bench { command, variant, p, dim, deg, d, reps, seed, exec, out } => {
            let args = bench::BenchArgs { p, dim, deg, d, reps, seed, exec: exec.into() };
            let mut text = format!("{}\n", bench::HEADER);
            let wanted = |v: &str| variant.as_deref().is_none_or(|w| w == v);
            if let Some(v) = &variant {
                if !bench::MATMUL_VARIANTS.contains(&v.as_str()) && !bench::POLYMUL_VARIANTS.contains(&v.as_str()) {
                    return Err(usage(anyhow::anyhow!("unknown variant {v}")));
                }
            }
            if command != BenchCommand::Polymul {
                for v in bench::MATMUL_VARIANTS.into_iter().filter(|v| wanted(v)) {
                    text += &bench::matmul(&args, v).map_err(usage)?.csv();
                    text.push('\n');
                }
            }
            if command != BenchCommand::Matmul {
                for v in bench::POLYMUL_VARIANTS.into_iter().filter(|v| wanted(v)) {
                    text += &bench::polymul(&args, v).map_err(usage)?.csv();
                    text.push('\n');
                }
            }
            emit(out.as_deref(), &text)
        }
        Command::ParamsTable { p, beta, format, out } => {
            let table = compression_table(p, beta).map_err(usage)?;
            let mut text = String::new();
            match format {
                Format::Csv => {
                    text += "q_exp,dim_lo,dim_hi,e_lo,e_hi\n";
                    for c in &table {
                        text += &format!("{},{},{},{},{}\n", c.t, c.dim_lo, c.dim_hi, c.e_lo, c.e_hi);
                    }
                }
                Format::Plain => {
                    text += &format!("p = {p}, beta = {beta}\n");
                    text += &format!("{:>6}  {:>21}  {:>11}\n", "Q", "inner dimension", "compression");
                    for c in &table {
                        let e = if c.e_lo == c.e_hi { c.e_lo.to_string() } else { format!("{}..{}", c.e_lo, c.e_hi) };
                        text += &format!("{:>6}  {:>21}  {:>11}\n", format!("2^{}", c.t), format!("{}..{}", c.dim_lo, c.dim_hi), e);
                    }
                }
            }
            emit(out.as_deref(), &text)
        }
        Command::FdivScan { beta, case, out } => {
            let betas = if beta.is_empty() { (4..=10).collect() } else { beta };
            let cases: Vec<u8> = match case {
                Some(c) => vec![c],
                None => CASES.iter().map(|c| c.case_id).collect(),
            };
            let mut text = String::from(
                "beta,case_id,mode1,mode2,pairs_checked,range_violations,bound_violations,k_minus_1_witness,k_plus_1_witness,first_overflow_r\n",
            );
            let pair = |w: Option<(u64, u64)>| w.map_or(String::new(), |(r, p)| format!("{r}/{p}"));
            for &b in &betas {
                for &c in &cases {
                    let rep = exhaustive_check_with(b, c, Exec::default()).map_err(usage)?;
                    text += &format!(
                        "{},{},{},{},{},{},{},{},{},{}\n",
                        b,
                        rep.case_id,
                        rep.mode1.name(),
                        rep.mode2.name(),
                        rep.pairs_checked,
                        rep.range_violation_count,
                        rep.bound_violation_count,
                        pair(rep.k_minus_1_witness),
                        pair(rep.k_plus_1_witness),
                        rep.first_overflow_r.map_or(String::new(), |r| r.to_string())
                    );
                }
            }
            emit(out.as_deref(), &text)
        }
        Command::Matmul { variant, a, b, p, m, k, n, seed, bound, check, out } => {
            let (a, b) = match (a, b) {
                (Some(fa), Some(fb)) => (read_matrix(&fa)?, read_matrix(&fb)?),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    if p < 2 {
                        return Err(usage(anyhow::anyhow!("modulus must be at least 2")));
                    }
                    let mut draw = |r: usize, c: usize| {
                        ModMatrix::new(p, r, c, (0..r * c).map(|_| rng.gen_range(0..p)).collect())
                    };
                    (draw(m, k).map_err(usage)?, draw(k, n).map_err(usage)?)
                }
            };
            let c = multiply(variant, &a, &b, bound.into()).map_err(usage)?;
            if check {
                let plain = a.mul_plain(&b, Exec::default()).map_err(usage)?;
                if plain != c {
                    return Err(Failure::Runtime(anyhow::anyhow!("product differs from the plain product")));
                }
                eprintln!("check: product matches the plain product");
            }
            emit(out.as_deref(), &c.to_text())
        }
        Command::Polymul { algo, a, b, p, deg_a, deg_b, d, seed, check, out } => {
            let (a, b) = match (a, b) {
                (Some(fa), Some(fb)) => (read_poly(&fa)?, read_poly(&fb)?),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    if p < 2 {
                        return Err(usage(anyhow::anyhow!("modulus must be at least 2")));
                    }
                    let mut draw = |deg: usize| ModPoly::new(p, (0..=deg).map(|_| rng.gen_range(0..p)).collect());
                    (draw(deg_a).map_err(usage)?, draw(deg_b).map_err(usage)?)
                }
            };
            if a.p != b.p {
                return Err(usage(anyhow::anyhow!("moduli differ: {} vs {}", a.p, b.p)));
            }
            let mut c = match algo {
                PolyAlgo::Delayed => polymul_delayed(&a, &b).map_err(usage)?,
                PolyAlgo::Classical | PolyAlgo::Karatsuba => {
                    let params = default_fqt_params(a.p, d).map_err(usage)?;
                    let algo = if matches!(algo, PolyAlgo::Classical) { FqtAlgo::Classical } else { FqtAlgo::Karatsuba };
                    let cfg = FqtConfig { algo, ..FqtConfig::default() };
                    polymul_fqt_with(&a, &b, &params, &cfg).map_err(usage)?.0
                }
            };
            let len = if a.is_empty() || b.is_empty() { 0 } else { a.len() + b.len() - 1 };
            c.coeffs.resize(len, 0);
            if check {
                let want = verify::schoolbook(&a.coeffs, &b.coeffs, a.p);
                if c.coeffs != want {
                    return Err(Failure::Runtime(anyhow::anyhow!("product differs from the schoolbook product")));
                }
                eprintln!("check: product matches the schoolbook product");
            }
            emit(out.as_deref(), &poly_text(&c))
        }
    }
}

fn run_verify(suite: Option<String>, p: Option<u64>, seed: u64, quick: bool) -> Result<(), Failure> {
    let opts = verify::Options { p, seed, quick };
    let suites: Vec<&str> = match &suite {
        Some(s) => vec![s.as_str()],
        None => verify::SUITES.to_vec(),
    };
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    let mut total = 0;
    for s in suites {
        for check in verify::run_suite(s, &opts) {
            writeln!(out, "{}", check.line())?;
            total += 1;
            if !check.passed() {
                failed += 1;
            }
        }
    }
    writeln!(out, "{} of {total} checks passed", total - failed)?;
    if failed > 0 {
        return Err(Failure::Runtime(anyhow::anyhow!("{failed} checks failed")));
    }
    Ok(())
}

fn multiply(variant: MatmulVariant, a: &ModMatrix, b: &ModMatrix, bound: RadixBound) -> anyhow::Result<ModMatrix> {
    let cfg = CmmConfig::default();
    let k = a.cols.max(1) as u64;
    if a.cols != b.rows || a.p != b.p {
        anyhow::bail!("cannot multiply {}x{} mod {} by {}x{} mod {}", a.rows, a.cols, a.p, b.rows, b.cols, b.p);
    }
    Ok(match variant {
        MatmulVariant::Plain => a.mul_plain(b, Exec::default())?,
        MatmulVariant::Cmm => {
            let params = middle_product_params(a.p, k, 53)?;
            cmm_multiply(
                &compress_rows(a, &params, DigitOrder::Reversed)?,
                &compress_cols(b, &params, DigitOrder::Forward)?,
                &cfg,
            )?
        }
        MatmulVariant::Right => {
            let params = cmm_params_with(a.p, k, 53, bound)?;
            right_cmm(a, &compress_rows(b, &params, DigitOrder::Forward)?, &cfg)?
        }
        MatmulVariant::Left => {
            let params = cmm_params_with(a.p, k, 53, bound)?;
            left_cmm(&compress_cols(a, &params, DigitOrder::Forward)?, b, &cfg)?
        }
        MatmulVariant::Full => full_cmm(a, b, &full_cmm_params_with(a.p, k, 53, bound)?, &cfg)?,
    })
}

fn read_matrix(path: &Path) -> Result<ModMatrix, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ModMatrix::from_text(&text).with_context(|| format!("parsing {}", path.display())).map_err(usage)
}

fn read_poly(path: &Path) -> Result<ModPoly, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let nums: Vec<u64> = text
        .split_whitespace()
        .map(|w| w.parse::<u64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)?;
    match nums.as_slice() {
        [p, len, coeffs @ ..] if coeffs.len() as u64 == *len => {
            ModPoly::new(*p, coeffs.to_vec()).with_context(|| format!("parsing {}", path.display())).map_err(usage)
        }
        _ => Err(usage(anyhow::anyhow!("{}: expected `p len` then len coefficients", path.display()))),
    }
}

fn poly_text(c: &ModPoly) -> String {
    let body: Vec<String> = c.coeffs.iter().map(u64::to_string).collect();
    format!("{} {}\n{}\n", c.p, c.coeffs.len(), body.join(" "))
}
