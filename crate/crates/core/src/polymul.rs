//! Polynomial multiplication over `GF(p)`.
//!
//! [`polymul_delayed`] is the schoolbook product that reduces each output
//! coefficient once (or once per `n_d` terms). [`polymul_fqt`] views a
//! polynomial as a polynomial in `Y = X^(d+1)` whose coefficients are packed
//! words: a word product is a small polynomial product, sums of up to `n_q`
//! of them stay digit-exact, and REDQ recovers all `2d+1` coefficients of an
//! output word at once. The Karatsuba variant recurses on the word sequence
//! and combines sub-products on reduced coefficients.

use crate::params::{delayed_bound, fqt_params, PackingParams, DEFAULT_BETA};
use crate::par::Exec;
use crate::redq::{residue_bits, table_slots, Indexing, Redq, RedqConfig};
use crate::{Error, Result};

/// Polynomial with coefficients in `[0, p)`; index `i` is the coefficient of `X^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl ModPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("modulus {p} below 2")));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidInput(format!("coefficient {c} not reduced mod {p}")));
        }
        Ok(Self { p, coeffs })
    }

    pub fn zero(p: u64, len: usize) -> Self {
        Self { p, coeffs: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

fn product_len(a: &ModPoly, b: &ModPoly) -> Result<usize> {
    if a.p != b.p {
        return Err(Error::InvalidInput(format!("moduli differ: {} vs {}", a.p, b.p)));
    }
    Ok((2 * a.len().max(b.len())).saturating_sub(1))
}

/// Schoolbook product with delayed reduction.
pub fn polymul_delayed(a: &ModPoly, b: &ModPoly) -> Result<ModPoly> {
    let out_len = product_len(a, b)?;
    let p = a.p;
    // Residues are stored unsigned, so the non-centered bound applies.
    let n_d = delayed_bound(p, DEFAULT_BETA, false).max(1);
    let mut out = vec![0u64; out_len];
    for (s, slot) in out.iter_mut().enumerate() {
        let lo = s.saturating_sub(b.len().saturating_sub(1));
        let hi = s.min(a.len().saturating_sub(1));
        let mut acc = 0u64;
        let mut terms = 0u64;
        let mut total = 0u64;
        for i in lo..=hi {
            if i >= a.len() || s - i >= b.len() {
                continue;
            }
            acc += a.coeffs[i] * b.coeffs[s - i];
            terms += 1;
            if terms == n_d {
                total = (total + acc % p) % p;
                acc = 0;
                terms = 0;
            }
        }
        *slot = (total + acc % p) % p;
    }
    Ok(ModPoly { p, coeffs: out })
}

/// A polynomial as a sequence of packed words in `Y = X^(d+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqtPoly {
    pub words: Vec<u64>,
    pub params: PackingParams,
    pub logical_len: usize,
}

/// Packs `d + 1` consecutive coefficients per word, zero-padding the last.
pub fn fqt_pack_poly(poly: &ModPoly, params: &PackingParams) -> Result<FqtPoly> {
    if poly.p != params.p {
        return Err(Error::InvalidInput(format!("poly mod {} with params for {}", poly.p, params.p)));
    }
    let words = poly
        .coeffs
        .chunks(params.k())
        .map(|chunk| crate::dqt::pack(chunk, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(FqtPoly { words, params: *params, logical_len: poly.len() })
}

pub fn fqt_unpack_poly(f: &FqtPoly) -> ModPoly {
    let k = f.params.k();
    let mut coeffs: Vec<u64> = f
        .words
        .iter()
        .flat_map(|&w| crate::dqt::unpack(w, k, &f.params))
        .collect();
    coeffs.truncate(f.logical_len);
    ModPoly { p: f.params.p, coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FqtAlgo {
    #[default]
    Classical,
    Karatsuba,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FqtConfig {
    pub algo: FqtAlgo,
    /// Word count below which Karatsuba falls back to the classical product.
    pub karatsuba_threshold: usize,
    /// Correction table width; `None` picks one that fits in a small budget.
    pub table_width: Option<usize>,
    pub exec: Exec,
}

impl Default for FqtConfig {
    fn default() -> Self {
        Self { algo: FqtAlgo::Classical, karatsuba_threshold: 16, table_width: None, exec: Exec::default() }
    }
}

/// Operations spent by an FQT product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FqtStats {
    pub word_mul_adds: u64,
    pub reductions: u64,
    pub reduction_axpy: u64,
    pub table_accesses: u64,
}

impl std::ops::AddAssign for FqtStats {
    fn add_assign(&mut self, o: Self) {
        self.word_mul_adds += o.word_mul_adds;
        self.reductions += o.reductions;
        self.reduction_axpy += o.reduction_axpy;
        self.table_accesses += o.table_accesses;
    }
}

const AUTO_TABLE_SLOTS: u128 = 1 << 16;

fn auto_table_width(p: u64) -> Option<usize> {
    (1..=3usize)
        .rev()
        .find(|&j| table_slots(p, j, Indexing::BaseP) <= AUTO_TABLE_SLOTS && residue_bits(p) as usize * j <= 64)
}

struct Ctx {
    params: PackingParams,
    redq: Redq,
    n_q: u64,
}

/// Packed product with the default configuration.
pub fn polymul_fqt(a: &ModPoly, b: &ModPoly, params: &PackingParams, algo: FqtAlgo) -> Result<ModPoly> {
    let config = FqtConfig { algo, ..FqtConfig::default() };
    Ok(polymul_fqt_with(a, b, params, &config)?.0)
}

/// Packed product; `params` must leave room for a `2d+1`-digit word product
/// and `n_max` is the number of word products summed per REDQ.
pub fn polymul_fqt_with(
    a: &ModPoly,
    b: &ModPoly,
    params: &PackingParams,
    config: &FqtConfig,
) -> Result<(ModPoly, FqtStats)> {
    let out_len = product_len(a, b)?;
    let digits = 2 * params.k() - 1;
    if digits as u64 * params.t as u64 > params.beta as u64 {
        return Err(Error::ParamsViolation(format!(
            "word product of {digits} digits of {} bits exceeds beta={}",
            params.t, params.beta
        )));
    }
    let safe = crate::params::fqt_products_per_reduction(params.p, params.d, params.t);
    let n_q = params.n_max.min(safe);
    if n_q == 0 {
        return Err(Error::ParamsViolation(format!(
            "p={}, d={}: radix 2^{} cannot hold one word product",
            params.p, params.d, params.t
        )));
    }
    let table_width = if params.needs_correction() {
        config.table_width.or_else(|| auto_table_width(params.p))
    } else {
        None
    };
    let redq_config = RedqConfig { table_width, ..RedqConfig::default() };
    let ctx = Ctx {
        params: *params,
        redq: Redq::new(params.p, params.t, digits, &redq_config)?,
        n_q,
    };
    let len = a.len().max(b.len());
    let pad = |x: &ModPoly| {
        let mut c = x.coeffs.clone();
        c.resize(len, 0);
        fqt_pack_poly(&ModPoly { p: x.p, coeffs: c }, params)
    };
    let wa = pad(a)?.words;
    let wb = pad(b)?.words;
    let (mut coeffs, stats) = match config.algo {
        FqtAlgo::Classical => {
            let mut stats = FqtStats::default();
            (classical(&ctx, &wa, &wb, config.exec, &mut stats), stats)
        }
        FqtAlgo::Karatsuba => karatsuba(&ctx, &wa, &wb, config.karatsuba_threshold.max(1), config.exec),
    };
    coeffs.resize(out_len.max(coeffs.len()), 0);
    debug_assert!(coeffs[out_len..].iter().all(|&c| c == 0));
    coeffs.truncate(out_len);
    Ok((ModPoly { p: params.p, coeffs }, stats))
}

/// Word-level classical product; returns `(na + nb)(d+1) - 1` reduced coefficients.
fn classical(ctx: &Ctx, wa: &[u64], wb: &[u64], exec: Exec, stats: &mut FqtStats) -> Vec<u64> {
    let (na, nb) = (wa.len(), wb.len());
    if na == 0 || nb == 0 {
        return Vec::new();
    }
    let k = ctx.params.k();
    let digits = 2 * k - 1;
    let p = ctx.params.p;
    let per_word = exec.map(na + nb - 1, |s| {
        let lo = s.saturating_sub(nb - 1);
        let hi = s.min(na - 1);
        let mut res = vec![0u64; digits];
        let mut buf = vec![0u64; digits];
        let mut st = FqtStats::default();
        let mut acc = 0u64;
        let mut terms = 0u64;
        let flush = |acc: u64, st: &mut FqtStats, res: &mut [u64], buf: &mut [u64]| {
            let ops = ctx.redq.reduce_into(acc, buf);
            st.reductions += 1;
            st.reduction_axpy += ops.axpy as u64;
            st.table_accesses += ops.table_accesses as u64;
            for (r, &x) in res.iter_mut().zip(buf.iter()) {
                *r = add_mod(*r, x, p);
            }
        };
        for i in lo..=hi {
            acc += wa[i] * wb[s - i];
            terms += 1;
            st.word_mul_adds += 1;
            if terms == ctx.n_q {
                flush(acc, &mut st, &mut res, &mut buf);
                acc = 0;
                terms = 0;
            }
        }
        if terms > 0 {
            flush(acc, &mut st, &mut res, &mut buf);
        }
        (res, st)
    });
    let mut out = vec![0u64; (na + nb) * k - 1];
    for (s, (res, st)) in per_word.into_iter().enumerate() {
        *stats += st;
        for (j, x) in res.into_iter().enumerate() {
            let c = &mut out[s * k + j];
            *c = add_mod(*c, x, p);
        }
    }
    out
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

/// Digit-wise `(x + y) mod p` of two reduced words.
fn add_words(ctx: &Ctx, x: u64, y: u64) -> u64 {
    let t = ctx.params.t;
    let mask = ctx.params.digit_mask();
    let p = ctx.params.p;
    (0..ctx.params.k() as u32).fold(0u64, |w, i| {
        let a = (x >> (i * t)) & mask;
        let b = (y >> (i * t)) & mask;
        w | add_mod(a, b, p) << (i * t)
    })
}

fn karatsuba(ctx: &Ctx, wa: &[u64], wb: &[u64], threshold: usize, exec: Exec) -> (Vec<u64>, FqtStats) {
    let m = wa.len();
    debug_assert_eq!(m, wb.len());
    if m <= threshold || m < 2 {
        let mut stats = FqtStats::default();
        let out = classical(ctx, wa, wb, exec, &mut stats);
        return (out, stats);
    }
    let k = ctx.params.k();
    let p = ctx.params.p;
    let h = m.div_ceil(2);
    let (a0, a1) = wa.split_at(h);
    let (b0, b1) = wb.split_at(h);
    let sum = |lo: &[u64], hi: &[u64]| -> Vec<u64> {
        (0..h)
            .map(|i| add_words(ctx, lo[i], hi.get(i).copied().unwrap_or(0)))
            .collect()
    };
    let (sa, sb) = (sum(a0, a1), sum(b0, b1));
    let operands: [(&[u64], &[u64]); 3] = [(a0, b0), (a1, b1), (&sa, &sb)];
    // Split the three sub-products across threads near the top only; the
    // leaves are too small to amortize scheduling.
    let (outer, inner) = if m > 8 * threshold { (exec, exec) } else { (Exec::Sequential, Exec::Sequential) };
    let mut parts = outer.map(3, |i| karatsuba(ctx, operands[i].0, operands[i].1, threshold, inner));
    let (z1, s1) = parts.pop().unwrap();
    let (z2, s2) = parts.pop().unwrap();
    let (z0, mut stats) = parts.pop().unwrap();
    stats += s1;
    stats += s2;
    let mut out = vec![0u64; 2 * m * k - 1];
    let shift = h * k;
    for (i, &c) in z0.iter().enumerate() {
        out[i] = add_mod(out[i], c, p);
    }
    for (i, &c) in z2.iter().enumerate() {
        out[i + 2 * shift] = add_mod(out[i + 2 * shift], c, p);
    }
    for (i, &c) in z1.iter().enumerate() {
        let lo = z0.get(i).copied().unwrap_or(0);
        let hi = z2.get(i).copied().unwrap_or(0);
        let mid = (c + 2 * p - lo - hi) % p;
        out[i + shift] = add_mod(out[i + shift], mid, p);
    }
    (out, stats)
}

/// Default FQT parameters for degree-`d` packing in double precision.
pub fn default_fqt_params(p: u64, d: usize) -> Result<PackingParams> {
    fqt_params(p, d, DEFAULT_BETA)
}
