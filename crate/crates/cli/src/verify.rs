//! Oracle suites behind `qadic verify`.
//!
//! Every check compares a packed code path against an independent reference:
//! big-integer radix conversion, schoolbook products, polynomial arithmetic
//! modulo the defining polynomial, or exact integer division.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadic::cmm::{
    compress_cols, compress_rows, cmm_multiply, full_cmm, left_cmm, right_cmm, uncompress, CmmConfig, DigitOrder,
    ModMatrix,
};
use qadic::dqt;
use qadic::fdiv::{applied_fdiv, exhaustive_check, precompute_inverses, NativeDouble, RoundingMode, Sim};
use qadic::gfext::{build_field, gfq_matmul, GFqElem, GFqField};
use qadic::par::Exec;
use qadic::params::{
    cmm_params, cmm_params_with, compression_table, dqt_params, full_cmm_params_with, middle_product_params,
    polymul_cost, polymul_cost_with, PackingParams, PolyStrategy, RadixBound, RadixModel,
};
use qadic::polymul::{default_fqt_params, polymul_delayed, polymul_fqt, FqtAlgo, ModPoly};
use qadic::redq::{
    build_correction_table, compress_big, correct, CompressedDigits, Indexing, Redq, RedqConfig, DEFAULT_TABLE_BUDGET,
};

pub const SUITES: [&str; 7] = ["params", "dqt", "redq", "fdiv", "polymul", "gfext", "cmm"];

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Restricts prime-indexed checks to one modulus.
    pub p: Option<u64>,
    pub seed: u64,
    /// Smaller sample counts and scans for a fast smoke run.
    pub quick: bool,
}

impl Options {
    fn count(&self, full: u64) -> u64 {
        if self.quick {
            (full / 100).max(1)
        } else {
            full
        }
    }

    fn primes(&self, default: &[u64]) -> Vec<u64> {
        match self.p {
            Some(p) => vec![p],
            None => default.to_vec(),
        }
    }

    fn wants(&self, p: u64) -> bool {
        self.p.is_none_or(|q| q == p)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub result: Result<String, String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }

    pub fn line(&self) -> String {
        match &self.result {
            Ok(d) => format!("PASS {}/{}: {d}", self.suite, self.name),
            Err(d) => format!("FAIL {}/{}: {d}", self.suite, self.name),
        }
    }
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run_suite(suite: &str, opts: &Options) -> Vec<Check> {
    let checks: Vec<(&str, Box<dyn Fn(&Options) -> Outcome>)> = match suite {
        "params" => vec![("table", Box::new(params_table)), ("cost-model", Box::new(cost_model))],
        "dqt" => vec![("round-trip", Box::new(dqt_round_trip)), ("dot", Box::new(dqt_dot))],
        "redq" => vec![
            ("fixtures", Box::new(redq_fixtures)),
            ("oracle", Box::new(redq_oracle)),
            ("op-count", Box::new(redq_op_count)),
            ("tables", Box::new(redq_tables)),
            ("nested-flooring", Box::new(nested_flooring)),
        ],
        "fdiv" => vec![("scan", Box::new(fdiv_scan)), ("applied", Box::new(fdiv_applied))],
        "polymul" => vec![("fixture", Box::new(poly_fixture)), ("agreement", Box::new(poly_agreement))],
        "gfext" => vec![("fgdp", Box::new(gf_fgdp)), ("matmul", Box::new(gf_matmul))],
        "cmm" => vec![
            ("round-trip", Box::new(cmm_round_trip)),
            ("variants", Box::new(cmm_variants)),
            ("large", Box::new(cmm_large)),
        ],
        _ => Vec::new(),
    };
    let suite: &'static str = SUITES.iter().find(|s| **s == suite).copied().unwrap_or("unknown");
    checks
        .into_iter()
        .map(|(name, f)| Check { suite, name: name.to_string(), result: f(opts) })
        .collect()
}

/// Base-`q` digits of `r`, each reduced mod `p`.
pub fn radix_digits_mod(r: &BigUint, q: &BigUint, count: usize, p: u64) -> Vec<u64> {
    let mut rest = r.clone();
    let pb = BigUint::from(p);
    (0..count)
        .map(|_| {
            let d = (&rest % q % &pb).to_u64().unwrap();
            rest /= q;
            d
        })
        .collect()
}

/// Matrix product through big-integer dot products.
pub fn matmul_oracle(a: &ModMatrix, b: &ModMatrix) -> Vec<u64> {
    let p = BigUint::from(a.p);
    let mut out = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let s = (0..a.cols).fold(BigUint::zero(), |acc, l| acc + BigUint::from(a.get(i, l) * b.get(l, j)));
            out.push((s % &p).to_u64().unwrap());
        }
    }
    out
}

pub fn schoolbook(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            c[i + j] += x as u128 * y as u128;
        }
    }
    c.into_iter().map(|x| (x % p as u128) as u64).collect()
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize, p: u64) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..p)).collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, p: u64, rows: usize, cols: usize) -> ModMatrix {
    ModMatrix::new(p, rows, cols, random_vec(rng, rows * cols, p)).unwrap()
}

fn params_table(opts: &Options) -> Outcome {
    let table = compression_table(3, 53).map_err(e2s)?;
    let got: Vec<(u32, u64)> = table.iter().map(|c| (c.t, c.dim_hi)).collect();
    for (t, dim) in [(3, 2), (6, 16), (7, 32), (8, 64), (10, 256), (13, 2048), (17, 32768)] {
        ensure!(got.contains(&(t, dim)), "p=3: no column Q=2^{t} up to dimension {dim}");
    }
    let ranges: Vec<(usize, usize)> = table.iter().take(3).map(|c| (c.e_lo, c.e_hi)).collect();
    ensure!(ranges == [(2, 2), (3, 4), (5, 8)], "p=3: small-dimension ranges {ranges:?}");
    let flip = (
        cmm_params(3, 2048, 53).map_err(e2s)?.k(),
        cmm_params(3, 2049, 53).map_err(e2s)?.k(),
    );
    ensure!(flip == (4, 3), "p=3: compression at 2048/2049 is {flip:?}");
    let _ = opts;
    Ok("p=3 radices, thresholds and the 2048/2049 flip".into())
}

fn cost_model(_: &Options) -> Outcome {
    let d = polymul_cost(3, 500, 3, 53, PolyStrategy::Delayed).map_err(e2s)?;
    ensure!(
        (d.mul_add_count, d.reduction_count) == (1_002_001, 1001),
        "delayed cost {}/{}",
        d.mul_add_count,
        d.reduction_count
    );
    let mut parts = vec![format!("delayed {}/{}", d.mul_add_count, d.reduction_count)];
    for model in [RadixModel::PowerOfTwo, RadixModel::RealExponent] {
        let f = polymul_cost_with(3, 500, 3, 53, PolyStrategy::Fqt, model).map_err(e2s)?;
        let (total, reds) = (f.total_mul_add() as f64, f.reduction_count as f64);
        ensure!((43_000.0..=172_000.0).contains(&total), "{model:?} total {total}");
        ensure!((2_850.0..=11_400.0).contains(&reds), "{model:?} reductions {reds}");
        parts.push(format!("{model:?} {}/{}", f.total_mul_add(), f.reduction_count));
    }
    Ok(parts.join(", "))
}

fn dqt_round_trip(opts: &Options) -> Outcome {
    let mut rng = opts.rng(1);
    let n = opts.count(10_000);
    let primes = opts.primes(&[2, 3, 5, 7, 23, 65521]);
    for _ in 0..n {
        let p = primes[rng.gen_range(0..primes.len())];
        let t = rng.gen_range(p.ilog2() + 1..=16.max(p.ilog2() + 1));
        let d = rng.gen_range(0..=(63 / t as usize - 1).min(5));
        let params = PackingParams::new(p, t, d, 63, 1).map_err(e2s)?;
        let coeffs = random_vec(&mut rng, d + 1, p);
        let w = dqt::pack(&coeffs, &params).map_err(e2s)?;
        ensure!(dqt::unpack(w, d + 1, &params) == coeffs, "p={p} t={t} {coeffs:?}");
        let horner = coeffs.iter().rev().fold(BigUint::zero(), |acc, &c| acc * params.q() + c);
        ensure!(BigUint::from(w) == horner, "p={p} t={t}: packed word is not the evaluation at q");
    }
    Ok(format!("{n} vectors"))
}

fn dqt_dot(opts: &Options) -> Outcome {
    let mut rng = opts.rng(2);
    let mut done = 0;
    for p in opts.primes(&[2, 3, 5, 7, 23]) {
        for k in 1..=3usize {
            let n = 10u64;
            let Ok(params) = dqt_params(p, n, k, 53) else { continue };
            for _ in 0..opts.count(500) {
                let v1: Vec<Vec<u64>> = (0..n).map(|_| random_vec(&mut rng, k, p)).collect();
                let v2: Vec<Vec<u64>> = (0..n).map(|_| random_vec(&mut rng, k, p)).collect();
                let got = dqt::dot_dqt(&v1, &v2, &params).map_err(e2s)?;
                let mut want = vec![0u64; 2 * k - 1];
                for (a, b) in v1.iter().zip(&v2) {
                    for (i, c) in schoolbook(a, b, p).into_iter().enumerate() {
                        want[i] = (want[i] + c) % p;
                    }
                }
                ensure!(got == want, "p={p} k={k}: {got:?} vs {want:?}");
                done += 1;
            }
        }
    }
    Ok(format!("{done} packed dot products"))
}

fn redq_fixtures(opts: &Options) -> Outcome {
    let mut done = Vec::new();
    if opts.wants(5) {
        let q = BigUint::from(10_000u32);
        let r: BigUint = "40013002800270018".parse().unwrap();
        let u = compress_big(&r, 5, &q, 4);
        ensure!(u.u == [3, 2, 3, 3, 4], "p=5: compressed {:?}", u.u);
        ensure!(correct(&u, 5, 0) == u.u, "p=5: correction changed the digits");
        done.push("p=5 u=[3,2,3,3,4]");
    }
    if opts.wants(23) {
        let q = BigUint::from(1_000_000u32);
        let r: BigUint = "1234005678009123004567".parse().unwrap();
        let u = compress_big(&r, 23, &q, 3);
        ensure!(u.u == [15, 8, 18, 15], "p=23: compressed {:?}", u.u);
        let mu = correct(&u, 23, 1_000_000 % 23);
        ensure!(mu == [13, 15, 20, 15], "p=23: corrected {mu:?}");
        ensure!(mu == radix_digits_mod(&r, &q, 4, 23), "p=23: disagrees with radix conversion");
        done.push("p=23 mu=[13,15,20,15]");
    }
    if done.is_empty() {
        return Ok("no fixture for this modulus".into());
    }
    Ok(done.join(", "))
}

fn redq_oracle(opts: &Options) -> Outcome {
    let mut rng = opts.rng(3);
    let mut done = 0u64;
    for p in opts.primes(&[2, 3, 5, 7, 23]) {
        let params = dqt_params(p, 100, 2, 53).or_else(|_| dqt_params(p, 1, 2, 53)).map_err(e2s)?;
        let digits = 2 * params.k() - 1;
        let top = params.t * digits as u32;
        let q = BigUint::from(params.q());
        let mut configs = vec![RedqConfig::default(), RedqConfig { division: qadic::redq::Division::Float, ..RedqConfig::default() }];
        if p < 100 {
            configs.push(RedqConfig::tabulated(2));
        }
        let redqs = configs
            .iter()
            .map(|c| Redq::new(p, params.t, digits, c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e2s)?;
        let mut out = vec![0; digits];
        for i in 0..opts.count(100_000) {
            let r = rng.gen_range(0..1u64 << top);
            redqs[i as usize % redqs.len()].reduce_into(r, &mut out);
            let want = radix_digits_mod(&BigUint::from(r), &q, digits, p);
            ensure!(out == want, "p={p} r={r}: {out:?} vs {want:?}");
            done += 1;
        }
    }
    Ok(format!("{done} accumulators"))
}

fn redq_op_count(opts: &Options) -> Outcome {
    let mut rng = opts.rng(4);
    for k in 2..=8usize {
        for p in opts.primes(&[3, 5, 7, 23]) {
            let t = 64 / k as u32 - 1;
            if p >= 1u64 << t {
                continue;
            }
            let redq = Redq::new(p, t, k, &RedqConfig::default()).map_err(e2s)?;
            for _ in 0..opts.count(1000) {
                let r = rng.gen_range(0..1u64 << (t as usize * k));
                let (_, ops) = redq.compress_counted(r);
                ensure!(ops.axpy == (k + 1).div_ceil(2), "k={k} p={p}: {} operations", ops.axpy);
            }
        }
    }
    Ok("ceil((k+1)/2) for k in 2..=8".into())
}

fn redq_tables(opts: &Options) -> Outcome {
    let mut done = 0u64;
    for p in [2u64, 3, 5, 7].into_iter().filter(|&p| opts.wants(p)) {
        for qm in 0..p {
            for j in 1..=2 {
                for indexing in [Indexing::BaseP, Indexing::BinaryBlocks] {
                    let table = build_correction_table(p, qm, j, indexing, DEFAULT_TABLE_BUDGET).map_err(e2s)?;
                    for len in 1..=5u32 {
                        for code in 0..p.pow(len) {
                            let u: Vec<u64> = (0..len).map(|i| code / p.pow(i) % p).collect();
                            let mut want = u.clone();
                            for i in 0..u.len() - 1 {
                                want[i] = (u[i] + (p - qm) * u[i + 1]) % p;
                            }
                            let (got, _) = table.correct(&CompressedDigits { u });
                            ensure!(got == want, "p={p} q={qm} j={j}: {got:?} vs {want:?}");
                            done += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{done} digit vectors"))
}

fn nested_flooring(opts: &Options) -> Outcome {
    let mut rng = opts.rng(5);
    let n = opts.count(1_000_000);
    for _ in 0..n {
        let r: u64 = rng.gen();
        let (sa, sb) = (rng.gen_range(0..64), rng.gen_range(0..64));
        let a = rng.gen_range(1..=u64::MAX >> sa);
        let b = rng.gen_range(1..=u64::MAX >> sb);
        let direct = BigUint::from(r) / (BigUint::from(a) * BigUint::from(b));
        ensure!(BigUint::from(r / a / b) == direct, "r={r} a={a} b={b}");
    }
    Ok(format!("{n} triples"))
}

fn fdiv_scan(opts: &Options) -> Outcome {
    let betas: &[u32] = if opts.quick { &[6, 8] } else { &[6, 8, 10] };
    for &beta in betas {
        for case in 1..=9u8 {
            let rep = exhaustive_check(beta, case).map_err(e2s)?;
            ensure!(rep.range_violations.is_empty(), "beta={beta} case {case}: {:?}", rep.range_violations);
            ensure!(rep.bound_violations.is_empty(), "beta={beta} case {case}: {:?}", rep.bound_violations);
            ensure!(rep.endpoints_attained(), "beta={beta} case {case}: endpoint not attained");
        }
    }
    Ok(format!("9 cases clean at beta {betas:?}"))
}

fn fdiv_applied(opts: &Options) -> Outcome {
    let beta = if opts.quick { 8 } else { 10 };
    let sim = Sim { beta };
    for p in 1..1u64 << beta {
        let inv = precompute_inverses(&sim, p);
        for r in 0..1u64 << beta {
            for active in RoundingMode::ALL {
                let got = applied_fdiv(&sim, r, p, active, &inv);
                ensure!(got == r / p, "beta={beta} r={r} p={p} {active:?}: {got}");
            }
        }
    }
    let mut rng = opts.rng(6);
    let n = opts.count(10_000_000 / 3 + 1);
    for _ in 0..n {
        let bits = rng.gen_range(1..=53u32);
        let p = rng.gen_range(1..=(u64::MAX >> (64 - bits)));
        let r = rng.gen_range(0..1u64 << 53);
        let inv = precompute_inverses(&NativeDouble, p);
        for active in RoundingMode::ALL {
            let got = applied_fdiv(&NativeDouble, r, p, active, &inv);
            ensure!(got == r / p, "native r={r} p={p} {active:?}: {got}");
        }
    }
    Ok(format!("exhaustive at beta={beta}, {} native divisions", 3 * n))
}

fn poly_fixture(opts: &Options) -> Outcome {
    if !opts.wants(3) {
        return Ok("no fixture for this modulus".into());
    }
    let a = ModPoly::new(3, vec![1, 1]).map_err(e2s)?;
    let b = ModPoly::new(3, vec![2, 1]).map_err(e2s)?;
    ensure!(polymul_delayed(&a, &b).map_err(e2s)?.coeffs == [2, 0, 1], "delayed (X+1)(X+2)");
    let params = default_fqt_params(3, 1).map_err(e2s)?;
    for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
        ensure!(polymul_fqt(&a, &b, &params, algo).map_err(e2s)?.coeffs == [2, 0, 1], "{algo:?} (X+1)(X+2)");
    }
    Ok("(X+1)(X+2) = X^2+2 mod 3".into())
}

fn poly_agreement(opts: &Options) -> Outcome {
    let mut rng = opts.rng(7);
    let primes = opts.primes(&[2, 3, 5, 7, 11]);
    let n = opts.count(1000);
    for inst in 0..n {
        let p = primes[rng.gen_range(0..primes.len())];
        let (la, lb) = (rng.gen_range(1..=601), rng.gen_range(1..=601));
        let a = ModPoly::new(p, random_vec(&mut rng, la, p)).map_err(e2s)?;
        let b = ModPoly::new(p, random_vec(&mut rng, lb, p)).map_err(e2s)?;
        let want = schoolbook(&a.coeffs, &b.coeffs, p);
        let delayed = polymul_delayed(&a, &b).map_err(e2s)?;
        ensure!(delayed.coeffs[..want.len()] == want[..], "instance {inst}: delayed (p={p})");
        let d = rng.gen_range(1..=3);
        let params = default_fqt_params(p, d).or_else(|_| default_fqt_params(p, 1)).map_err(e2s)?;
        for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
            let got = polymul_fqt(&a, &b, &params, algo).map_err(e2s)?;
            ensure!(got.coeffs == delayed.coeffs, "instance {inst}: {algo:?} (p={p}, d={})", params.d);
        }
    }
    Ok(format!("{n} instances"))
}

fn gf_poly(f: &GFqField, a: GFqElem) -> Vec<u64> {
    let mut v = f.to_poly(a);
    v.resize(f.k(), 0);
    v
}

/// Dot product by schoolbook polynomial products reduced by the defining polynomial.
fn gf_dot_oracle(f: &GFqField, v1: &[GFqElem], v2: &[GFqElem]) -> Vec<u64> {
    let (p, k, m) = (f.p(), f.k(), f.irreducible());
    let mut acc = vec![0u64; 2 * k - 1];
    for (&a, &b) in v1.iter().zip(v2) {
        for (i, c) in schoolbook(&gf_poly(f, a), &gf_poly(f, b), p).into_iter().enumerate() {
            acc[i] = (acc[i] + c) % p;
        }
    }
    for i in (k..acc.len()).rev() {
        let lead = acc[i];
        for (j, &mj) in m.iter().enumerate() {
            acc[i - k + j] = (acc[i - k + j] + (p - lead) * mj) % p;
        }
    }
    acc.truncate(k);
    acc
}

fn gf_fgdp(opts: &Options) -> Outcome {
    let mut done = 0u64;
    for (p, k) in [(2u64, 2usize), (3, 2)].into_iter().filter(|&(p, _)| opts.wants(p)) {
        let f = build_field(p, k, None).map_err(e2s)?;
        let all: Vec<GFqElem> = f.elements().collect();
        for &a in &all {
            for &b in &all {
                ensure!(gf_poly(&f, f.fgdp(&[a], &[b]).map_err(e2s)?) == gf_dot_oracle(&f, &[a], &[b]), "GF({p}^{k})");
                for &c in &all {
                    for &d in &all {
                        let got = f.fgdp(&[a, c], &[b, d]).map_err(e2s)?;
                        ensure!(gf_poly(&f, got) == gf_dot_oracle(&f, &[a, c], &[b, d]), "GF({p}^{k}) length 2");
                        done += 1;
                    }
                }
            }
        }
    }
    let mut rng = opts.rng(8);
    for (p, k) in [(5u64, 2usize), (3, 3)].into_iter().filter(|&(p, _)| opts.wants(p)) {
        let f = build_field(p, k, None).map_err(e2s)?;
        let order = f.order() as u32;
        for _ in 0..opts.count(10_000) {
            let v1: Vec<GFqElem> = (0..20).map(|_| GFqElem(rng.gen_range(0..order))).collect();
            let v2: Vec<GFqElem> = (0..20).map(|_| GFqElem(rng.gen_range(0..order))).collect();
            let got = f.fgdp(&v1, &v2).map_err(e2s)?;
            ensure!(gf_poly(&f, got) == gf_dot_oracle(&f, &v1, &v2), "GF({p}^{k}) length 20");
            done += 1;
        }
    }
    Ok(format!("{done} dot products"))
}

fn gf_matmul(opts: &Options) -> Outcome {
    let mut rng = opts.rng(9);
    let mut done = Vec::new();
    for (p, k, dim) in [(3u64, 2usize, 8usize), (11, 1, 64)].into_iter().filter(|&(p, _, _)| opts.wants(p)) {
        let f = build_field(p, k, None).map_err(e2s)?;
        let order = f.order() as u32;
        let a: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
        let b: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
        let c = gfq_matmul(&f, &a, &b, dim, dim, dim, Exec::default()).map_err(e2s)?;
        for i in 0..dim {
            for j in 0..dim {
                let col: Vec<GFqElem> = (0..dim).map(|l| b[l * dim + j]).collect();
                let want = gf_dot_oracle(&f, &a[i * dim..(i + 1) * dim], &col);
                ensure!(gf_poly(&f, c[i * dim + j]) == want, "GF({p}^{k}) {dim}x{dim} at ({i},{j})");
            }
        }
        done.push(format!("{dim}x{dim} GF({p}^{k})"));
    }
    Ok(done.join(", "))
}

fn cmm_round_trip(opts: &Options) -> Outcome {
    let mut rng = opts.rng(10);
    let primes = opts.primes(&[2, 3, 5, 7]);
    for _ in 0..opts.count(1000) {
        let p = primes[rng.gen_range(0..primes.len())];
        let (rows, cols, k) = (rng.gen_range(1..40), rng.gen_range(1..40), rng.gen_range(1..300));
        let m = random_matrix(&mut rng, p, rows, cols);
        let params = cmm_params(p, k, 53).map_err(e2s)?;
        for order in [DigitOrder::Forward, DigitOrder::Reversed] {
            ensure!(uncompress(&compress_rows(&m, &params, order).map_err(e2s)?) == m, "row packing p={p}");
            ensure!(uncompress(&compress_cols(&m, &params, order).map_err(e2s)?) == m, "column packing p={p}");
        }
        ensure!(ModMatrix::from_text(&m.to_text()).map_err(e2s)? == m, "text round trip p={p}");
    }
    Ok("packing and text round trips".into())
}

fn cmm_variants(opts: &Options) -> Outcome {
    let mut rng = opts.rng(11);
    let primes = opts.primes(&[2, 3, 5, 7]);
    let cfg = CmmConfig::default();
    let n = opts.count(500);
    for inst in 0..n {
        let p = primes[rng.gen_range(0..primes.len())];
        let (m, k, nn) = (rng.gen_range(1..=128), rng.gen_range(1..=128), rng.gen_range(1..=128));
        let a = random_matrix(&mut rng, p, m, k);
        let b = random_matrix(&mut rng, p, k, nn);
        let want = matmul_oracle(&a, &b);
        let tag = format!("instance {inst} (p={p}, {m}x{k}x{nn})");

        let mp = middle_product_params(p, k as u64, 53).map_err(e2s)?;
        let ca = compress_rows(&a, &mp, DigitOrder::Reversed).map_err(e2s)?;
        let cb = compress_cols(&b, &mp, DigitOrder::Forward).map_err(e2s)?;
        ensure!(cmm_multiply(&ca, &cb, &cfg).map_err(e2s)?.data == want, "{tag}: CMM");

        let params = cmm_params_with(p, k as u64, 53, RadixBound::Strict).map_err(e2s)?;
        let cb = compress_rows(&b, &params, DigitOrder::Forward).map_err(e2s)?;
        ensure!(right_cmm(&a, &cb, &cfg).map_err(e2s)?.data == want, "{tag}: Right");
        let ca = compress_cols(&a, &params, DigitOrder::Forward).map_err(e2s)?;
        ensure!(left_cmm(&ca, &b, &cfg).map_err(e2s)?.data == want, "{tag}: Left");

        let fp = full_cmm_params_with(p, k as u64, 53, RadixBound::Strict).map_err(e2s)?;
        ensure!(full_cmm(&a, &b, &fp, &cfg).map_err(e2s)?.data == want, "{tag}: Full");
    }
    Ok(format!("{n} instances, four variants"))
}

fn cmm_large(opts: &Options) -> Outcome {
    if !opts.wants(3) {
        return Ok("runs for p=3 only".into());
    }
    let mut rng = opts.rng(12);
    let dims: &[usize] = if opts.quick { &[256] } else { &[256, 2048] };
    let cfg = CmmConfig::default();
    for &dim in dims {
        let a = random_matrix(&mut rng, 3, dim, dim);
        let b = random_matrix(&mut rng, 3, dim, dim);
        let params = cmm_params(3, dim as u64, 53).map_err(e2s)?;
        let cb = compress_rows(&b, &params, DigitOrder::Forward).map_err(e2s)?;
        let got = right_cmm(&a, &cb, &cfg).map_err(e2s)?;
        ensure!(got == a.mul_plain(&b, Exec::default()).map_err(e2s)?, "Right at dim {dim}");
        // Spot-check the plain product itself against the big-integer oracle.
        for _ in 0..64 {
            let (i, j) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
            let s = (0..dim).fold(BigUint::zero(), |acc, l| acc + a.get(i, l) * b.get(l, j));
            ensure!(BigUint::from(got.get(i, j)) == s % 3u32, "Right at dim {dim}, entry ({i},{j})");
        }
    }
    Ok(format!("Right at dims {dims:?}"))
}
