mod common;

use num_bigint::BigUint;
use proptest::prelude::*;

use qadic::cmm::{compress_cols, compress_rows, cmm_multiply, left_cmm, right_cmm, CmmConfig, DigitOrder, ExtractMode, ModMatrix};
use qadic::dqt;
use qadic::fdiv::{fdiv, sim_div, NativeDouble, RoundingMode, Sim};
use qadic::gfext::{build_field, GFqElem};
use qadic::par::Exec;
use qadic::params::{cmm_params_with, dqt_params, middle_product_params, RadixBound};
use qadic::polymul::{default_fqt_params, polymul_fqt_with, FqtAlgo, FqtConfig, ModPoly};
use qadic::redq::{Redq, RedqConfig};

use common::*;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 23, 251, 65521])
}

fn mode() -> impl Strategy<Value = RoundingMode> {
    prop::sample::select(RoundingMode::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn redq_matches_radix_conversion(p in prime(), k in 1usize..=4, seed in any::<u64>(), table in any::<bool>()) {
        let Ok(params) = dqt_params(p, 1, k, 53) else { return Ok(()) };
        let digits = 2 * k - 1;
        let config = if table && p < 100 { RedqConfig::tabulated(1) } else { RedqConfig::default() };
        let redq = Redq::new(p, params.t, digits, &config).unwrap();
        let top = params.t as usize * digits;
        let r = if top >= 64 { seed } else { seed & ((1u64 << top) - 1) };
        let mut got = vec![0; digits];
        redq.reduce_into(r, &mut got);
        let want = radix_digits_mod(&BigUint::from(r), &BigUint::from(params.q()), digits, p);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn reference_dot_matches_schoolbook(
        p in prop::sample::select(vec![3u64, 5, 7]),
        q in 1000u64..100_000,
        pairs in prop::collection::vec((prop::collection::vec(0u64..3, 3), prop::collection::vec(0u64..3, 3)), 1..5),
    ) {
        let (v1, v2): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let got = dqt::reference::dot_dqt(&v1, &v2, p, &BigUint::from(q), 3).unwrap();
        let mut want = vec![0u64; 5];
        for (a, b) in v1.iter().zip(&v2) {
            for (i, c) in schoolbook(a, b, p).into_iter().enumerate() {
                want[i] = (want[i] + c) % p;
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn sim_division_brackets_quotient(beta in 8u32..=53, r in any::<u64>(), p in 1u64..1 << 26, m in mode()) {
        let r = r >> (64 - beta);
        let x = sim_div(r, p, m, beta);
        let (num, exp) = x.to_dyadic();
        // x = num 2^exp; compare with r / p exactly.
        let lhs = num * p as u128;
        let (lhs, rhs) = if exp >= 0 { (lhs << exp, r as u128) } else { (lhs, (r as u128) << -exp) };
        match m {
            RoundingMode::Up => prop_assert!(lhs >= rhs),
            RoundingMode::Down => prop_assert!(lhs <= rhs),
            RoundingMode::NearestEven => {}
        }
        prop_assert!(x.floor().abs_diff(r / p) <= 1);
    }

    #[test]
    fn native_fdiv_is_close(r in 0u64..1 << 53, p in 1u64..1 << 40, m1 in mode(), m2 in mode()) {
        let native = fdiv(&NativeDouble, r, p, m1, m2);
        prop_assert!(native.abs_diff(r / p) <= 1);
        let sim = fdiv(&Sim { beta: 53 }, r, p, m1, m2);
        prop_assert_eq!(native, sim);
    }

    #[test]
    fn fqt_matches_schoolbook(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        d in 1usize..=3,
        threshold in 1usize..=20,
        a_seed in any::<u64>(),
        la in 1usize..200,
        lb in 1usize..200,
    ) {
        let Ok(params) = default_fqt_params(p, d) else { return Ok(()) };
        let mut rng = rng(a_seed);
        let a = ModPoly::new(p, random_vec(&mut rng, la, p)).unwrap();
        let b = ModPoly::new(p, random_vec(&mut rng, lb, p)).unwrap();
        let want = schoolbook(&a.coeffs, &b.coeffs, p);
        for algo in [FqtAlgo::Classical, FqtAlgo::Karatsuba] {
            let config = FqtConfig { algo, karatsuba_threshold: threshold, ..FqtConfig::default() };
            let (got, stats) = polymul_fqt_with(&a, &b, &params, &config).unwrap();
            prop_assert_eq!(&got.coeffs[..want.len()], &want[..]);
            prop_assert!(got.coeffs[want.len()..].iter().all(|&c| c == 0));
            prop_assert!(stats.reductions > 0);
        }
    }

    #[test]
    fn compressed_products_match(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 251]),
        m in 1usize..24, k in 1usize..60, n in 1usize..24,
        seed in any::<u64>(),
        add_shift in any::<bool>(),
    ) {
        let mut rng = rng(seed);
        let a = ModMatrix::new(p, m, k, random_vec(&mut rng, m * k, p)).unwrap();
        let b = ModMatrix::new(p, k, n, random_vec(&mut rng, k * n, p)).unwrap();
        let want = matmul(&a.data, &b.data, m, k, n, p);
        let extract = if add_shift { ExtractMode::AddShift } else { ExtractMode::InverseMul };
        let cfg = CmmConfig { extract, exec: Exec::Sequential, ..CmmConfig::default() };
        if let Ok(mp) = middle_product_params(p, k as u64, 53) {
            let ca = compress_rows(&a, &mp, DigitOrder::Reversed).unwrap();
            let cb = compress_cols(&b, &mp, DigitOrder::Forward).unwrap();
            prop_assert_eq!(&cmm_multiply(&ca, &cb, &cfg).unwrap().data, &want);
        }
        if let Ok(params) = cmm_params_with(p, k as u64, 53, RadixBound::Strict) {
            let cb = compress_rows(&b, &params, DigitOrder::Forward).unwrap();
            prop_assert_eq!(&right_cmm(&a, &cb, &cfg).unwrap().data, &want);
            let ca = compress_cols(&a, &params, DigitOrder::Forward).unwrap();
            prop_assert_eq!(&left_cmm(&ca, &b, &cfg).unwrap().data, &want);
        }
    }

    #[test]
    fn matrix_text_round_trip(p in prime(), rows in 0usize..10, cols in 0usize..10, seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = ModMatrix::new(p, rows, cols, random_vec(&mut rng, rows * cols, p)).unwrap();
        prop_assert_eq!(ModMatrix::from_text(&m.to_text()).unwrap(), m);
    }
}

#[test]
fn field_axioms_gf27() {
    let f = build_field(3, 3, None).unwrap();
    let m = f.irreducible().to_vec();
    let all: Vec<GFqElem> = f.elements().collect();
    assert_eq!(all.len(), 27);
    let pad = |a: GFqElem| {
        let mut v = f.to_poly(a);
        v.resize(3, 0);
        v
    };
    for &a in &all {
        for &b in &all {
            assert_eq!(pad(f.mul(a, b)), poly_mulmod(&pad(a), &pad(b), &m, 3));
            assert_eq!(pad(f.add(a, b)), poly_add(&pad(a), &pad(b), 3));
        }
        if !a.is_zero() {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), GFqElem::ONE);
        }
        assert_eq!(f.add(a, f.neg(a)), GFqElem::ZERO);
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let mut rng = rng(11);
    let p = 7;
    let a = ModMatrix::new(p, 150, 130, random_vec(&mut rng, 150 * 130, p)).unwrap();
    let b = ModMatrix::new(p, 130, 170, random_vec(&mut rng, 130 * 170, p)).unwrap();
    let params = cmm_params_with(p, 130, 53, RadixBound::Strict).unwrap();
    let cb = compress_rows(&b, &params, DigitOrder::Forward).unwrap();
    let run = |exec| right_cmm(&a, &cb, &CmmConfig { exec, ..CmmConfig::default() }).unwrap();
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
    assert_eq!(a.mul_plain(&b, Exec::Sequential).unwrap(), a.mul_plain(&b, Exec::Parallel).unwrap());

    let x = ModPoly::new(p, random_vec(&mut rng, 900, p)).unwrap();
    let y = ModPoly::new(p, random_vec(&mut rng, 700, p)).unwrap();
    let fp = default_fqt_params(p, 2).unwrap();
    let run = |exec| polymul_fqt_with(&x, &y, &fp, &FqtConfig { exec, algo: FqtAlgo::Karatsuba, ..FqtConfig::default() }).unwrap();
    assert_eq!(run(Exec::Sequential), run(Exec::Parallel));
}
