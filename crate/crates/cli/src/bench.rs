//! Informational timings for `qadic bench`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadic::cmm::{compress_cols, compress_rows, cmm_multiply, full_cmm, left_cmm, right_cmm, CmmConfig, DigitOrder, ModMatrix};
use qadic::par::Exec;
use qadic::params::{cmm_params_with, full_cmm_params_with, middle_product_params, RadixBound};
use qadic::polymul::{default_fqt_params, polymul_delayed, polymul_fqt_with, FqtAlgo, FqtConfig, ModPoly};

pub const HEADER: &str = "command,variant,p,d,q_exp,dim_or_deg,seed,repetitions,ns_per_op";

pub const MATMUL_VARIANTS: [&str; 5] = ["plain", "cmm", "right", "left", "full"];
pub const POLYMUL_VARIANTS: [&str; 3] = ["delayed", "fqt-classical", "fqt-karatsuba"];

pub struct BenchArgs {
    pub p: u64,
    pub dim: usize,
    pub deg: usize,
    pub d: usize,
    pub reps: u32,
    pub seed: u64,
    pub exec: Exec,
}

pub struct Row {
    pub command: &'static str,
    pub variant: String,
    pub p: u64,
    pub d: usize,
    pub q_exp: u32,
    pub dim_or_deg: usize,
    pub seed: u64,
    pub reps: u32,
    pub ns_per_op: u128,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.command, self.variant, self.p, self.d, self.q_exp, self.dim_or_deg, self.seed, self.reps, self.ns_per_op
        )
    }
}

/// Mean wall time of `reps` runs after one warm-up.
fn time<R>(reps: u32, mut f: impl FnMut() -> R) -> u128 {
    std::hint::black_box(f());
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(f());
    }
    start.elapsed().as_nanos() / reps.max(1) as u128
}

fn random_matrix(rng: &mut ChaCha8Rng, p: u64, rows: usize, cols: usize) -> ModMatrix {
    ModMatrix::new(p, rows, cols, (0..rows * cols).map(|_| rng.gen_range(0..p)).collect()).unwrap()
}

pub fn matmul(args: &BenchArgs, variant: &str) -> anyhow::Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (p, n) = (args.p, args.dim);
    let a = random_matrix(&mut rng, p, n, n);
    let b = random_matrix(&mut rng, p, n, n);
    let cfg = CmmConfig { exec: args.exec, ..CmmConfig::default() };
    let k = n as u64;
    let (d, q_exp, ns) = match variant {
        "plain" => (0, 0, time(args.reps, || a.mul_plain(&b, args.exec).unwrap())),
        "cmm" => {
            let params = middle_product_params(p, k, 53)?;
            let ca = compress_rows(&a, &params, DigitOrder::Reversed)?;
            let cb = compress_cols(&b, &params, DigitOrder::Forward)?;
            (params.d, params.t, time(args.reps, || cmm_multiply(&ca, &cb, &cfg).unwrap()))
        }
        "right" => {
            let params = cmm_params_with(p, k, 53, RadixBound::Strict)?;
            let cb = compress_rows(&b, &params, DigitOrder::Forward)?;
            (params.d, params.t, time(args.reps, || right_cmm(&a, &cb, &cfg).unwrap()))
        }
        "left" => {
            let params = cmm_params_with(p, k, 53, RadixBound::Strict)?;
            let ca = compress_cols(&a, &params, DigitOrder::Forward)?;
            (params.d, params.t, time(args.reps, || left_cmm(&ca, &b, &cfg).unwrap()))
        }
        "full" => {
            let params = full_cmm_params_with(p, k, 53, RadixBound::Strict)?;
            (params.compression() - 1, params.t, time(args.reps, || full_cmm(&a, &b, &params, &cfg).unwrap()))
        }
        other => anyhow::bail!("unknown matmul variant {other}"),
    };
    Ok(Row {
        command: "matmul",
        variant: variant.to_string(),
        p,
        d,
        q_exp,
        dim_or_deg: n,
        seed: args.seed,
        reps: args.reps,
        ns_per_op: ns,
    })
}

pub fn polymul(args: &BenchArgs, variant: &str) -> anyhow::Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let p = args.p;
    let mut poly = || ModPoly::new(p, (0..=args.deg).map(|_| rng.gen_range(0..p)).collect()).unwrap();
    let (a, b) = (poly(), poly());
    let (d, q_exp, ns) = match variant {
        "delayed" => (0, 0, time(args.reps, || polymul_delayed(&a, &b).unwrap())),
        "fqt-classical" | "fqt-karatsuba" => {
            let params = default_fqt_params(p, args.d)?;
            let algo = if variant == "fqt-classical" { FqtAlgo::Classical } else { FqtAlgo::Karatsuba };
            let cfg = FqtConfig { algo, exec: args.exec, ..FqtConfig::default() };
            (params.d, params.t, time(args.reps, || polymul_fqt_with(&a, &b, &params, &cfg).unwrap()))
        }
        other => anyhow::bail!("unknown polymul variant {other}"),
    };
    Ok(Row {
        command: "polymul",
        variant: variant.to_string(),
        p,
        d,
        q_exp,
        dim_or_deg: args.deg,
        seed: args.seed,
        reps: args.reps,
        ns_per_op: ns,
    })
}
