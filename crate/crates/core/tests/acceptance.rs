//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;

use qadic::cmm::{
    compress_cols, compress_rows, cmm_multiply, full_cmm, left_cmm, right_cmm, uncompress, CmmConfig, DigitOrder,
    ModMatrix,
};
use qadic::dqt;
use qadic::fdiv::{applied_fdiv, exhaustive_check, precompute_inverses, NativeDouble, RoundingMode, Sim};
use qadic::gfext::{build_field, gfq_matmul, GFqElem, GFqField};
use qadic::par::Exec;
use qadic::params::{
    cmm_params, cmm_params_with, compression_table, dqt_params, full_cmm_params, full_cmm_params_with,
    middle_product_params, polymul_cost, polymul_cost_with, PackingParams, PolyStrategy, RadixBound, RadixModel,
};
use qadic::polymul::{default_fqt_params, polymul_delayed, polymul_fqt, FqtAlgo, ModPoly};
use qadic::redq::{
    build_correction_table, compress_big, correct, CompressedDigits, Indexing, Redq, RedqConfig,
    DEFAULT_TABLE_BUDGET,
};

use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn criterion_1() -> Outcome {
    let q = BigUint::from(10_000u32);
    let r = big_from_decimal("40013002800270018");
    let u = compress_big(&r, 5, &q, 4);
    ensure!(u.u == vec![3, 2, 3, 3, 4], "p=5 compression gave {:?}", u.u);
    ensure!(correct(&u, 5, 0) == u.u, "p=5 correction changed digits");

    let q = BigUint::from(1_000_000u32);
    let r = big_from_decimal("1234005678009123004567");
    let u = compress_big(&r, 23, &q, 3);
    ensure!(u.u == vec![15, 8, 18, 15], "p=23 compression gave {:?}", u.u);
    let mu = correct(&u, 23, 1_000_000 % 23);
    ensure!(mu == vec![13, 15, 20, 15], "p=23 correction gave {mu:?}");
    ensure!(mu == radix_digits_mod(&r, &q, 4, 23), "p=23 disagrees with radix conversion");

    let a = ModPoly::new(3, vec![1, 1]).unwrap();
    let b = ModPoly::new(3, vec![2, 1]).unwrap();
    let want = vec![2, 0, 1];
    ensure!(polymul_delayed(&a, &b).unwrap().coeffs == want, "delayed (X+1)(X+2)");
    for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
        let params = default_fqt_params(3, 1).unwrap();
        ensure!(polymul_fqt(&a, &b, &params, algo).unwrap().coeffs == want, "{algo:?} (X+1)(X+2)");
    }
    Ok("fixtures exact".into())
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let mut checked = 0u64;
    for p in [2u64, 3, 5, 7, 23] {
        let params = dqt_params(p, 100, 2, 53).map_err(|e| e.to_string())?;
        let digits = 2 * params.k() - 1;
        let top = params.t * digits as u32;
        let q = BigUint::from(params.q());
        let configs = [
            RedqConfig::default(),
            RedqConfig { division: qadic::redq::Division::Float, ..RedqConfig::default() },
            RedqConfig::tabulated(2),
        ];
        let redqs: Vec<Redq> = configs
            .iter()
            .map(|c| Redq::new(p, params.t, digits, c))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mut out = vec![0u64; digits];
        for i in 0..100_000 {
            let r = rng.gen_range(0..1u64 << top);
            let want = radix_digits_mod(&BigUint::from(r), &q, digits, p);
            let redq = &redqs[i % redqs.len()];
            redq.reduce_into(r, &mut out);
            ensure!(out == want, "p={p} t={} r={r}: {out:?} vs {want:?}", params.t);
            checked += 1;
        }
    }
    Ok(format!("{checked} accumulators, zero mismatches"))
}

fn criterion_3() -> Outcome {
    let mut rng = rng(3);
    for k in 2..=8usize {
        for p in [3u64, 5, 7, 23] {
            let t = 6;
            let redq = Redq::new(p, t, k, &RedqConfig::default()).map_err(|e| e.to_string())?;
            for _ in 0..200 {
                let r = rng.gen_range(0..1u64 << (t as usize * k));
                let (u, ops) = redq.compress_counted(r);
                let want = (k + 1).div_ceil(2);
                ensure!(ops.axpy == want, "k={k} p={p}: {} operations, want {want}", ops.axpy);
                ensure!(ops.divisions == 1, "k={k}: {} divisions", ops.divisions);
                let digits: Vec<u64> = (0..k).map(|i| (r >> (i * t as usize)) % p).collect();
                ensure!(u.u == digits, "k={k} p={p} r={r}: compressed {:?}", u.u);
            }
        }
    }
    Ok("ceil((k+1)/2) for k in 2..=8".into())
}

fn criterion_4() -> Outcome {
    let mut scans = 0;
    for beta in [6u32, 8, 10] {
        for case in 1..=9u8 {
            let rep = exhaustive_check(beta, case).map_err(|e| e.to_string())?;
            ensure!(
                rep.range_violations.is_empty(),
                "beta={beta} case {case}: range violation {:?}",
                rep.range_violations[0]
            );
            ensure!(
                rep.bound_violations.is_empty(),
                "beta={beta} case {case}: bound violation {:?}",
                rep.bound_violations[0]
            );
            ensure!(rep.endpoints_attained(), "beta={beta} case {case}: range endpoint not attained");
            scans += 1;
        }
    }

    let sim = Sim { beta: 10 };
    let mut exhaustive = 0u64;
    for p in 1..1u64 << 10 {
        let inv = precompute_inverses(&sim, p);
        for r in 0..1u64 << 10 {
            for active in RoundingMode::ALL {
                let got = applied_fdiv(&sim, r, p, active, &inv);
                ensure!(got == r / p, "beta=10 r={r} p={p} {active:?}: {got}");
                exhaustive += 1;
            }
        }
    }

    let mut rng = rng(4);
    let native = NativeDouble;
    let mut random = 0u64;
    for _ in 0..10_000_000 / 3 + 1 {
        let bits = rng.gen_range(1..=53u32);
        let p = rng.gen_range(1..=(u64::MAX >> (64 - bits)));
        let r = rng.gen_range(0..1u64 << 53);
        let inv = precompute_inverses(&native, p);
        for active in RoundingMode::ALL {
            let got = applied_fdiv(&native, r, p, active, &inv);
            ensure!(got == r / p, "native r={r} p={p} {active:?}: {got}");
            random += 1;
        }
    }
    Ok(format!("{scans} scans clean, {exhaustive} exhaustive and {random} native divisions exact"))
}

fn criterion_5() -> Outcome {
    let table = compression_table(3, 53).map_err(|e| e.to_string())?;
    let want = [
        (3u32, 2u64, 8usize, 8usize),
        (6, 16, 8, 8),
        (7, 32, 7, 7),
        (8, 64, 6, 6),
        (10, 256, 5, 5),
        (13, 2048, 4, 4),
        (17, 32768, 3, 3),
    ];
    for (t, dim, e_lo, e_hi) in want {
        let col = table
            .iter()
            .find(|c| c.t == t)
            .ok_or_else(|| format!("no column with Q = 2^{t}"))?;
        ensure!(col.dim_hi == dim, "Q=2^{t}: threshold {} want {dim}", col.dim_hi);
        let e = cmm_params(3, dim, 53).map_err(|e| e.to_string())?;
        ensure!(e.t == t, "cmm_params(3, {dim}) has t={}", e.t);
        if t >= 6 {
            ensure!((col.e_lo, col.e_hi) == (e_lo, e_hi), "Q=2^{t}: compression {}..{}", col.e_lo, col.e_hi);
        }
    }
    // The small radices give ranges once the compression is capped by the dimension.
    let ranges: Vec<(usize, usize)> = table.iter().take(3).map(|c| (c.e_lo, c.e_hi)).collect();
    ensure!(ranges == vec![(2, 2), (3, 4), (5, 8)], "small-dimension ranges {ranges:?}");
    let e2048 = cmm_params(3, 2048, 53).map_err(|e| e.to_string())?.k();
    let e2049 = cmm_params(3, 2049, 53).map_err(|e| e.to_string())?.k();
    ensure!((e2048, e2049) == (4, 3), "boundary flip gave {e2048} -> {e2049}");
    Ok("radices, thresholds, compressions and the 2048/2049 flip".into())
}

fn random_matrix(rng: &mut rand_chacha::ChaCha8Rng, p: u64, rows: usize, cols: usize) -> ModMatrix {
    ModMatrix::new(p, rows, cols, random_vec(rng, rows * cols, p)).unwrap()
}

fn criterion_6() -> Outcome {
    let mut rng = rng(6);
    let cfg = CmmConfig::default();
    let mut counts = [0u32; 4];
    for inst in 0..500 {
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let (m, k, n) = (rng.gen_range(1..=128), rng.gen_range(1..=128), rng.gen_range(1..=128));
        let a = random_matrix(&mut rng, p, m, k);
        let b = random_matrix(&mut rng, p, k, n);
        let want = matmul(&a.data, &b.data, m, k, n, p);
        let err = |v: &str, e: qadic::Error| format!("instance {inst} ({v}, p={p}, {m}x{k}x{n}): {e}");

        let mp = middle_product_params(p, k as u64, 53).map_err(|e| err("cmm params", e))?;
        let ca = compress_rows(&a, &mp, DigitOrder::Reversed).map_err(|e| err("cmm", e))?;
        let cb = compress_cols(&b, &mp, DigitOrder::Forward).map_err(|e| err("cmm", e))?;
        let c = cmm_multiply(&ca, &cb, &cfg).map_err(|e| err("cmm", e))?;
        ensure!(c.data == want, "instance {inst}: CMM mismatch (p={p}, {m}x{k}x{n})");
        counts[0] += 1;

        let params = cmm_params_with(p, k as u64, 53, RadixBound::Strict).map_err(|e| err("params", e))?;
        let cb = compress_rows(&b, &params, DigitOrder::Forward).map_err(|e| err("right", e))?;
        ensure!(uncompress(&cb) == b, "instance {inst}: row compression round trip");
        let c = right_cmm(&a, &cb, &cfg).map_err(|e| err("right", e))?;
        ensure!(c.data == want, "instance {inst}: Right mismatch (p={p}, {m}x{k}x{n})");
        counts[1] += 1;

        let ca = compress_cols(&a, &params, DigitOrder::Forward).map_err(|e| err("left", e))?;
        ensure!(uncompress(&ca) == a, "instance {inst}: column compression round trip");
        let c = left_cmm(&ca, &b, &cfg).map_err(|e| err("left", e))?;
        ensure!(c.data == want, "instance {inst}: Left mismatch (p={p}, {m}x{k}x{n})");
        counts[2] += 1;

        let fp = full_cmm_params_with(p, k as u64, 53, RadixBound::Strict).map_err(|e| err("full params", e))?;
        let c = full_cmm(&a, &b, &fp, &cfg).map_err(|e| err("full", e))?;
        ensure!(c.data == want, "instance {inst}: Full mismatch (p={p}, {m}x{k}x{n})");
        counts[3] += 1;
    }

    for dim in [256usize, 2048] {
        let a = random_matrix(&mut rng, 3, dim, dim);
        let b = random_matrix(&mut rng, 3, dim, dim);
        let params = cmm_params(3, dim as u64, 53).map_err(|e| e.to_string())?;
        let cb = compress_rows(&b, &params, DigitOrder::Forward).map_err(|e| e.to_string())?;
        let c = right_cmm(&a, &cb, &cfg).map_err(|e| e.to_string())?;
        ensure!(c.data == matmul_u64(&a.data, &b.data, dim, dim, dim, 3), "Right mismatch at dim {dim}");
        // Every digit sum equals Q exactly: the worst case of the inclusive radix.
        let a = ModMatrix::new(3, 8, dim, vec![2; 8 * dim]).unwrap();
        let b = ModMatrix::new(3, dim, 8, vec![2; 8 * dim]).unwrap();
        let cb = compress_rows(&b, &params, DigitOrder::Forward).map_err(|e| e.to_string())?;
        let c = right_cmm(&a, &cb, &cfg).map_err(|e| e.to_string())?;
        ensure!(c.data == matmul_u64(&a.data, &b.data, 8, dim, 8, 3), "Right mismatch on all-2 at dim {dim}");
        let fp = full_cmm_params(3, dim as u64, 53).map_err(|e| e.to_string())?;
        let c = full_cmm(&a, &b, &fp, &cfg).map_err(|e| e.to_string())?;
        ensure!(c.data == matmul_u64(&a.data, &b.data, 8, dim, 8, 3), "Full mismatch on all-2 at dim {dim}");
    }
    Ok(format!("{:?} instances per variant plus Right at 256 and 2048", counts[0]))
}

fn criterion_7() -> Outcome {
    let mut rng = rng(7);
    for inst in 0..1000 {
        let p = [2u64, 3, 5, 7, 11][rng.gen_range(0..5)];
        let da = rng.gen_range(0..=600usize);
        let db = rng.gen_range(0..=600usize);
        let a = ModPoly::new(p, random_vec(&mut rng, da + 1, p)).unwrap();
        let b = ModPoly::new(p, random_vec(&mut rng, db + 1, p)).unwrap();
        let want = schoolbook(&a.coeffs, &b.coeffs, p);
        let delayed = polymul_delayed(&a, &b).map_err(|e| e.to_string())?;
        ensure!(delayed.coeffs[..want.len()] == want[..], "instance {inst}: Delayed mismatch (p={p})");
        ensure!(delayed.coeffs[want.len()..].iter().all(|&c| c == 0), "instance {inst}: Delayed tail");
        let d = rng.gen_range(1..=3usize);
        let params = default_fqt_params(p, d).or_else(|_| default_fqt_params(p, 1)).map_err(|e| e.to_string())?;
        for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
            let got = polymul_fqt(&a, &b, &params, algo).map_err(|e| e.to_string())?;
            ensure!(got.coeffs == delayed.coeffs, "instance {inst}: {algo:?} disagrees (p={p}, d={})", params.d);
        }
    }

    let delayed = polymul_cost(3, 500, 3, 53, PolyStrategy::Delayed).map_err(|e| e.to_string())?;
    ensure!(delayed.mul_add_count == 1_002_001, "Delayed mul_add {}", delayed.mul_add_count);
    ensure!(delayed.reduction_count == 1001, "Delayed reductions {}", delayed.reduction_count);
    let mut notes = Vec::new();
    for model in [RadixModel::PowerOfTwo, RadixModel::RealExponent] {
        let fqt = polymul_cost_with(3, 500, 3, 53, PolyStrategy::Fqt, model).map_err(|e| e.to_string())?;
        let total = fqt.total_mul_add() as f64;
        let reds = fqt.reduction_count as f64;
        ensure!((43_000.0..=172_000.0).contains(&total), "{model:?} FQT total {total} outside 8.6e4 x/ 2");
        ensure!((2_850.0..=11_400.0).contains(&reds), "{model:?} FQT reductions {reds} outside 5.7e3 x/ 2");
        notes.push(format!("{model:?} {}/{}", fqt.total_mul_add(), fqt.reduction_count));
    }
    Ok(format!("1000 instances agree; Delayed 1002001/1001; FQT {}", notes.join(", ")))
}

/// Naive dot product through polynomial arithmetic modulo the field's defining polynomial.
fn oracle_dot(f: &GFqField, v1: &[GFqElem], v2: &[GFqElem]) -> Vec<u64> {
    let m = f.irreducible().to_vec();
    let k = f.k();
    let mut acc = vec![0u64; k];
    for (&a, &b) in v1.iter().zip(v2) {
        let prod = poly_mulmod(&padded(f, a), &padded(f, b), &m, f.p());
        acc = poly_add(&acc, &prod, f.p());
    }
    acc
}

fn padded(f: &GFqField, a: GFqElem) -> Vec<u64> {
    let mut v = f.to_poly(a);
    v.resize(f.k(), 0);
    v
}

fn criterion_8() -> Outcome {
    let mut checked = 0u64;
    for (p, k) in [(2u64, 2usize), (3, 2)] {
        let f = build_field(p, k, None).map_err(|e| e.to_string())?;
        let all: Vec<GFqElem> = f.elements().collect();
        for &a in &all {
            for &b in &all {
                let got = f.fgdp(&[a], &[b]).map_err(|e| e.to_string())?;
                ensure!(padded(&f, got) == oracle_dot(&f, &[a], &[b]), "GF({p}^{k}) length 1");
                checked += 1;
                for &c in &all {
                    for &d in &all {
                        let (v1, v2) = ([a, c], [b, d]);
                        let got = f.fgdp(&v1, &v2).map_err(|e| e.to_string())?;
                        ensure!(padded(&f, got) == oracle_dot(&f, &v1, &v2), "GF({p}^{k}) length 2");
                        checked += 1;
                    }
                }
            }
        }
    }
    let mut rng = rng(8);
    for (p, k) in [(5u64, 2usize), (3, 3)] {
        let f = build_field(p, k, None).map_err(|e| e.to_string())?;
        let order = f.order() as u32;
        for _ in 0..10_000 {
            let v1: Vec<GFqElem> = (0..20).map(|_| GFqElem(rng.gen_range(0..order))).collect();
            let v2: Vec<GFqElem> = (0..20).map(|_| GFqElem(rng.gen_range(0..order))).collect();
            let got = f.fgdp(&v1, &v2).map_err(|e| e.to_string())?;
            ensure!(padded(&f, got) == oracle_dot(&f, &v1, &v2), "GF({p}^{k}) length 20");
            checked += 1;
        }
    }
    for (p, k, dim) in [(3u64, 2usize, 8usize), (11, 1, 64)] {
        let f = build_field(p, k, None).map_err(|e| e.to_string())?;
        let order = f.order() as u32;
        let a: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
        let b: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
        let c = gfq_matmul(&f, &a, &b, dim, dim, dim, Exec::default()).map_err(|e| e.to_string())?;
        for i in 0..dim {
            for j in 0..dim {
                let row: Vec<GFqElem> = a[i * dim..(i + 1) * dim].to_vec();
                let col: Vec<GFqElem> = (0..dim).map(|l| b[l * dim + j]).collect();
                ensure!(padded(&f, c[i * dim + j]) == oracle_dot(&f, &row, &col), "GF({p}^{k}) matmul ({i},{j})");
            }
        }
        checked += (dim * dim) as u64;
    }
    Ok(format!("{checked} dot products and matrix entries agree"))
}

fn criterion_9() -> Outcome {
    let mut rng = rng(9);
    for _ in 0..1_000_000 {
        let r: u64 = rng.gen();
        let (sa, sb) = (rng.gen_range(0..64), rng.gen_range(0..64));
        let a = rng.gen_range(1..=u64::MAX >> sa);
        let b = rng.gen_range(1..=u64::MAX >> sb);
        let direct = (r as u128 / (a as u128 * b as u128)) as u64;
        ensure!(r / a / b == direct, "floor(floor({r}/{a})/{b})");
    }

    for _ in 0..10_000 {
        let p = [2u64, 3, 5, 7, 23, 65521][rng.gen_range(0..6)];
        let t = rng.gen_range(p.ilog2() + 1..=16);
        let d = rng.gen_range(0..=(63 / t as usize - 1).min(5));
        let params = PackingParams::new(p, t, d, 63, 1).map_err(|e| e.to_string())?;
        let coeffs = random_vec(&mut rng, d + 1, p);
        let w = dqt::pack(&coeffs, &params).map_err(|e| e.to_string())?;
        ensure!(dqt::unpack(w, d + 1, &params) == coeffs, "pack/unpack p={p} t={t}");
    }
    for _ in 0..300 {
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let (rows, cols) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let m = random_matrix(&mut rng, p, rows, cols);
        let params = cmm_params(p, rng.gen_range(1..300), 53).map_err(|e| e.to_string())?;
        for order in [DigitOrder::Forward, DigitOrder::Reversed] {
            ensure!(uncompress(&compress_rows(&m, &params, order).unwrap()) == m, "row round trip");
            ensure!(uncompress(&compress_cols(&m, &params, order).unwrap()) == m, "column round trip");
        }
    }

    let mut inputs = 0u64;
    for p in [2u64, 3, 5, 7] {
        for qm in 0..p {
            for j in 1..=2 {
                for indexing in [Indexing::BaseP, Indexing::BinaryBlocks] {
                    let table = build_correction_table(p, qm, j, indexing, DEFAULT_TABLE_BUDGET)
                        .map_err(|e| e.to_string())?;
                    for len in 1..=5u32 {
                        for code in 0..p.pow(len) {
                            let u: Vec<u64> = (0..len).map(|i| code / p.pow(i) % p).collect();
                            let mut want = u.clone();
                            for i in 0..u.len() - 1 {
                                want[i] = (u[i] + (p - qm) * u[i + 1]) % p;
                            }
                            let (got, _) = table.correct(&CompressedDigits { u });
                            ensure!(got == want, "p={p} q mod p={qm} j={j} {indexing:?}: {got:?} vs {want:?}");
                            inputs += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("1e6 flooring triples, round trips, {inputs} table corrections"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("worked-example fixtures", criterion_1, Duration::from_secs(1)),
        ("REDQ oracle equivalence", criterion_2, Duration::from_secs(30)),
        ("REDQ operation count", criterion_3, Duration::MAX),
        ("rounding-case certification", criterion_4, Duration::from_secs(300)),
        ("compression table", criterion_5, Duration::MAX),
        ("matmul equivalence", criterion_6, Duration::from_secs(120)),
        ("polynomial multiplication", criterion_7, Duration::from_secs(60)),
        ("extension fields", criterion_8, Duration::from_secs(60)),
        ("property suites", criterion_9, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({elapsed:.2?}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
