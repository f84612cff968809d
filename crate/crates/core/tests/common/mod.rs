//! Independent oracles shared by the integration tests. Nothing here calls
//! into the packed code paths.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Base-`q` digits of `r`, each reduced mod `p`.
pub fn radix_digits_mod(r: &BigUint, q: &BigUint, count: usize, p: u64) -> Vec<u64> {
    let mut rest = r.clone();
    let p = BigUint::from(p);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(((&rest % q) % &p).to_u64().unwrap());
        rest /= q;
    }
    out
}

pub fn big_from_decimal(s: &str) -> BigUint {
    s.bytes().fold(BigUint::zero(), |acc, b| acc * 10u32 + (b - b'0') as u32)
}

/// Row-major `m x k` times `k x n` with one reduction per entry.
pub fn matmul(a: &[u64], b: &[u64], m: usize, k: usize, n: usize, p: u64) -> Vec<u64> {
    let mut c = vec![0u128; m * n];
    for i in 0..m {
        for l in 0..k {
            let x = a[i * k + l] as u128;
            if x == 0 {
                continue;
            }
            let row = &b[l * n..(l + 1) * n];
            for (acc, &y) in c[i * n..(i + 1) * n].iter_mut().zip(row) {
                *acc += x * y as u128;
            }
        }
    }
    c.into_iter().map(|x| (x % p as u128) as u64).collect()
}

/// Same as [`matmul`] with `u64` accumulators; valid while `k (p-1)^2 < 2^64`.
pub fn matmul_u64(a: &[u64], b: &[u64], m: usize, k: usize, n: usize, p: u64) -> Vec<u64> {
    let mut c = vec![0u64; m * n];
    for i in 0..m {
        let out = &mut c[i * n..(i + 1) * n];
        for l in 0..k {
            let x = a[i * k + l];
            let row = &b[l * n..(l + 1) * n];
            for (acc, &y) in out.iter_mut().zip(row) {
                *acc += x * y;
            }
        }
    }
    c.into_iter().map(|x| x % p).collect()
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

/// Product in `GF(p)[X] / (m)`, `m` monic, coefficients lowest first.
pub fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let k = m.len() - 1;
    let mut c = schoolbook(a, b, p);
    for i in (k..c.len()).rev() {
        let lead = c[i];
        if lead == 0 {
            continue;
        }
        for (j, &mj) in m.iter().enumerate() {
            let idx = i - k + j;
            c[idx] = (c[idx] + (p - lead) * mj) % p;
        }
    }
    c.resize(k, 0);
    c
}

pub fn poly_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize, p: u64) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..p)).collect()
}
