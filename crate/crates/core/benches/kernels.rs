//! Sequential against parallel execution of the main kernels.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadic::cmm::{compress_cols, compress_rows, cmm_multiply, right_cmm, CmmConfig, DigitOrder, ModMatrix};
use qadic::fdiv::scan::exhaustive_check_with;
use qadic::gfext::{build_field, gfq_matmul, GFqElem};
use qadic::kernel::gemm_wrapping;
use qadic::par::Exec;
use qadic::params::{cmm_params, middle_product_params};
use qadic::polymul::{default_fqt_params, polymul_fqt_with, FqtAlgo, FqtConfig, ModPoly};

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random(rng: &mut ChaCha8Rng, p: u64, len: usize) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..p)).collect()
}

fn matrices(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, dim) = (3u64, 256usize);
    let a = ModMatrix::new(p, dim, dim, random(&mut rng, p, dim * dim)).unwrap();
    let b = ModMatrix::new(p, dim, dim, random(&mut rng, p, dim * dim)).unwrap();
    let params = cmm_params(p, dim as u64, 53).unwrap();
    let cb_right = compress_rows(&b, &params, DigitOrder::Forward).unwrap();
    let mp = middle_product_params(p, dim as u64, 53).unwrap();
    let ca_mid = compress_rows(&a, &mp, DigitOrder::Reversed).unwrap();
    let cb_mid = compress_cols(&b, &mp, DigitOrder::Forward).unwrap();

    let mut group = c.benchmark_group("matmul_256_p3");
    for (name, exec) in EXECS {
        let cfg = CmmConfig { exec, ..CmmConfig::default() };
        group.bench_function(BenchmarkId::new("gemm_wrapping", name), |bch| {
            bch.iter(|| gemm_wrapping(black_box(&a.data), black_box(&b.data), dim, dim, dim, exec))
        });
        group.bench_function(BenchmarkId::new("plain", name), |bch| {
            bch.iter(|| black_box(&a).mul_plain(black_box(&b), exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("right", name), |bch| {
            bch.iter(|| right_cmm(black_box(&a), black_box(&cb_right), &cfg).unwrap())
        });
        group.bench_function(BenchmarkId::new("middle_product", name), |bch| {
            bch.iter(|| cmm_multiply(black_box(&ca_mid), black_box(&cb_mid), &cfg).unwrap())
        });
    }
    group.finish();
}

fn polynomials(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = 3u64;
    let a = ModPoly::new(p, random(&mut rng, p, 4000)).unwrap();
    let b = ModPoly::new(p, random(&mut rng, p, 4000)).unwrap();
    let params = default_fqt_params(p, 3).unwrap();
    let mut group = c.benchmark_group("polymul_4000_p3");
    for (name, exec) in EXECS {
        for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
            let cfg = FqtConfig { algo, exec, ..FqtConfig::default() };
            group.bench_function(BenchmarkId::new(format!("{algo:?}"), name), |bch| {
                bch.iter(|| polymul_fqt_with(black_box(&a), black_box(&b), &params, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn fields(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = build_field(3, 3, None).unwrap();
    let dim = 64;
    let order = f.order() as u32;
    let a: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
    let b: Vec<GFqElem> = (0..dim * dim).map(|_| GFqElem(rng.gen_range(0..order))).collect();
    let mut group = c.benchmark_group("gfq_matmul_64_gf27");
    for (name, exec) in EXECS {
        group.bench_function(name, |bch| {
            bch.iter(|| gfq_matmul(&f, black_box(&a), black_box(&b), dim, dim, dim, exec).unwrap())
        });
    }
    group.finish();
}

fn scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("fdiv_scan_beta8");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(name, |bch| bch.iter(|| exhaustive_check_with(black_box(8), 9, exec).unwrap()));
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(2)).warm_up_time(Duration::from_millis(500));
    targets = matrices, polynomials, fields, scans
}
criterion_main!(benches);
