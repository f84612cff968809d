//! Simultaneous reduction of every base-`q` digit of a word modulo `p`.
//!
//! Compression spends one division by `p`: with `s = floor(r / p)`, each
//! `u_i = floor(r / q^i) - p floor(s / q^i)` lies in `[0, p)` and is congruent
//! to `sum_{j >= i} mu_j q^(j-i)`. Correction then recovers the digit
//! residues `mu_i = u_i - q u_{i+1} mod p`, either directly or through a
//! lookup table over overlapping blocks of `u`. When `p | q` correction is
//! the identity.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::fdiv::{applied_fdiv, precompute_inverses, InversePack, NativeDouble, RoundingMode};
use crate::params::PackingParams;
use crate::{Error, Result};

/// Output of compression: `u[i]` in `[0, p)` for digits `0..=d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedDigits {
    pub u: Vec<u64>,
}

impl CompressedDigits {
    /// Index of the top digit.
    pub fn d(&self) -> usize {
        self.u.len() - 1
    }
}

/// Compression over big integers with an arbitrary radix.
pub fn compress_big(r: &BigUint, p: u64, q: &BigUint, d: usize) -> CompressedDigits {
    let pb = BigUint::from(p);
    let mut tr = r.clone();
    let mut ts = r / &pb;
    let mut u = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        let ui = &tr - &pb * &ts;
        u.push(ui.to_u64().expect("compressed digit below p"));
        tr /= q;
        ts /= q;
    }
    CompressedDigits { u }
}

/// Compression of a word with radix `2^t`, one digit at a time.
pub fn compress_word(r: u64, p: u64, t: u32, d: usize) -> CompressedDigits {
    let s = r / p;
    let u = (0..=d as u32)
        .map(|i| {
            let sh = i * t;
            shr(r, sh) - p * shr(s, sh)
        })
        .collect();
    CompressedDigits { u }
}

fn shr(x: u64, by: u32) -> u64 {
    x.checked_shr(by).unwrap_or(0)
}

/// Direct correction: `mu_d = u_d`, `mu_i = (u_i - q u_{i+1}) mod p`.
pub fn correct(u: &CompressedDigits, p: u64, q_mod_p: u64) -> Vec<u64> {
    let mut out = u.u.clone();
    correct_in_place(&mut out, p, q_mod_p);
    out
}

fn correct_in_place(u: &mut [u64], p: u64, q_mod_p: u64) {
    if q_mod_p == 0 {
        return;
    }
    let neg_q = p - q_mod_p;
    for i in 0..u.len().saturating_sub(1) {
        u[i] = ((u[i] as u128 + neg_q as u128 * u[i + 1] as u128) % p as u128) as u64;
    }
}

/// The `(k+1) x (k+1)` upper-bidiagonal matrix with unit diagonal and
/// `-q mod p` on the superdiagonal; correction is multiplication by it.
pub fn correction_matrix(p: u64, q_mod_p: u64, k: usize) -> Vec<Vec<u64>> {
    let off = (p - q_mod_p % p) % p;
    (0..=k)
        .map(|i| {
            let mut row = vec![0; k + 1];
            row[i] = 1;
            if i < k {
                row[i + 1] = off;
            }
            row
        })
        .collect()
}

/// How a block tuple `(u_0, ..., u_j)` addresses a [`CorrectionTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    /// `sum u_i p^i`, dense: `p^(j+1)` slots.
    #[default]
    BaseP,
    /// `sum u_i 2^(b i)` with `b = ceil(log2 p)`: `2^(b (j+1))` slots, no
    /// multiplications to form the index.
    BinaryBlocks,
}

/// Default cap on the number of table slots.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 24;

/// Lookup table mapping `(u_0, ..., u_j)` to the `j` corrected residues
/// `(u_i - q u_{i+1}) mod p`, `i < j`, packed `bits` bits each.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    p: u64,
    j: usize,
    indexing: Indexing,
    bits: u32,
    entries: Vec<u64>,
}

/// Bits needed to store a residue, `ceil(log2 p)`.
pub fn residue_bits(p: u64) -> u32 {
    64 - (p - 1).leading_zeros().min(63)
}

pub fn table_slots(p: u64, j: usize, indexing: Indexing) -> u128 {
    match indexing {
        Indexing::BaseP => (p as u128).checked_pow(j as u32 + 1).unwrap_or(u128::MAX),
        Indexing::BinaryBlocks => {
            let exp = residue_bits(p) * (j as u32 + 1);
            1u128.checked_shl(exp).filter(|_| exp < 128).unwrap_or(u128::MAX)
        }
    }
}

pub fn build_correction_table(
    p: u64,
    q_mod_p: u64,
    j: usize,
    indexing: Indexing,
    budget: u64,
) -> Result<CorrectionTable> {
    if j == 0 {
        return Err(Error::InvalidInput("table width must be at least 1".into()));
    }
    let bits = residue_bits(p);
    if bits as usize * j > 64 {
        return Err(Error::InvalidInput(format!("{j} residues of {bits} bits do not fit a word")));
    }
    let slots = table_slots(p, j, indexing);
    if slots > budget as u128 {
        return Err(Error::MemoryBudgetExceeded { slots, budget });
    }
    let mut entries = vec![0u64; slots as usize];
    let mut tuple = vec![0u64; j + 1];
    let mut table = CorrectionTable { p, j, indexing, bits, entries: Vec::new() };
    let neg_q = (p - q_mod_p % p) % p;
    loop {
        let mut payload = 0u64;
        for i in 0..j {
            let mu = (tuple[i] + neg_q * tuple[i + 1]) % p;
            payload |= mu << (i as u32 * bits);
        }
        entries[table.index(&tuple)] = payload;
        // Odometer over [0, p)^(j+1).
        let mut pos = 0;
        while pos <= j {
            tuple[pos] += 1;
            if tuple[pos] < p {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
        if pos > j {
            break;
        }
    }
    table.entries = entries;
    Ok(table)
}

impl CorrectionTable {
    pub fn width(&self) -> usize {
        self.j
    }

    pub fn indexing(&self) -> Indexing {
        self.indexing
    }

    pub fn slots(&self) -> usize {
        self.entries.len()
    }

    fn index(&self, tuple: &[u64]) -> usize {
        match self.indexing {
            Indexing::BaseP => tuple.iter().rev().fold(0usize, |acc, &u| acc * self.p as usize + u as usize),
            Indexing::BinaryBlocks => tuple
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &u)| acc | (u as usize) << (i as u32 * self.bits)),
        }
    }

    /// Corrected residues `mu_0 .. mu_{j-1}` for one block tuple.
    pub fn lookup(&self, tuple: &[u64]) -> Vec<u64> {
        let payload = self.entries[self.index(tuple)];
        let mask = (1u64 << self.bits) - 1;
        (0..self.j).map(|i| (payload >> (i as u32 * self.bits)) & mask).collect()
    }

    /// Tabulated correction; returns the residues and the number of lookups,
    /// `ceil(d / j)`.
    pub fn correct(&self, u: &CompressedDigits) -> (Vec<u64>, usize) {
        let mut out = u.u.clone();
        let n = self.correct_in_place(&mut out);
        (out, n)
    }

    fn correct_in_place(&self, u: &mut [u64]) -> usize {
        let d = u.len() - 1;
        let j = self.j;
        let mask = (1u64 << self.bits) - 1;
        let mut tuple = vec![0u64; j + 1];
        let mut lookups = 0;
        let mut start = 0;
        // Blocks overlap in one digit; the block is read before it is
        // overwritten, and the overlap digit is only written by the next block.
        while start < d {
            for (i, slot) in tuple.iter_mut().enumerate() {
                *slot = u.get(start + i).copied().unwrap_or(0);
            }
            let payload = self.entries[self.index(&tuple)];
            lookups += 1;
            for i in 0..j {
                if start + i < d {
                    u[start + i] = (payload >> (i as u32 * self.bits)) & mask;
                }
            }
            start += j;
        }
        lookups
    }
}

/// How the single division by `p` is carried out on the word path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Division {
    #[default]
    Integer,
    /// Reciprocal multiplication in double precision with one correction
    /// test; requires accumulators below `2^53`.
    Float,
}

/// Correction strategy and resource limits for [`Redq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedqConfig {
    pub division: Division,
    /// Block width of the correction table; `None` corrects digit by digit.
    pub table_width: Option<usize>,
    pub indexing: Indexing,
    pub memory_budget: u64,
}

impl Default for RedqConfig {
    fn default() -> Self {
        Self {
            division: Division::Integer,
            table_width: None,
            indexing: Indexing::BaseP,
            memory_budget: DEFAULT_TABLE_BUDGET,
        }
    }
}

impl RedqConfig {
    pub fn tabulated(j: usize) -> Self {
        Self { table_width: Some(j), ..Self::default() }
    }
}

/// Operations spent by one reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub divisions: usize,
    /// Wide multiply-subtracts in compression.
    pub axpy: usize,
    pub table_accesses: usize,
}

/// Word-level REDQ for a fixed modulus, radix `2^t` and digit count.
#[derive(Debug, Clone)]
pub struct Redq {
    p: u64,
    t: u32,
    digits: usize,
    q_mod_p: u64,
    inverses: Option<InversePack<f64>>,
    table: Option<Arc<CorrectionTable>>,
}

impl Redq {
    pub fn new(p: u64, t: u32, digits: usize, config: &RedqConfig) -> Result<Self> {
        if digits == 0 || t == 0 || digits as u64 * t as u64 > 64 {
            return Err(Error::InvalidInput(format!("{digits} digits of {t} bits do not fit a word")));
        }
        if p < 2 {
            return Err(Error::InvalidInput(format!("modulus {p} below 2")));
        }
        let q_mod_p = if t >= 64 { 0 } else { ((1u128 << t) % p as u128) as u64 };
        let inverses = match config.division {
            Division::Integer => None,
            Division::Float => Some(precompute_inverses(&NativeDouble, p)),
        };
        let table = match config.table_width {
            Some(j) if q_mod_p != 0 && digits > 1 => Some(Arc::new(build_correction_table(
                p,
                q_mod_p,
                j,
                config.indexing,
                config.memory_budget,
            )?)),
            _ => None,
        };
        Ok(Self { p, t, digits, q_mod_p, inverses, table })
    }

    /// REDQ over the `d + 1` digits of `params`.
    pub fn for_params(params: &PackingParams, config: &RedqConfig) -> Result<Self> {
        Self::new(params.p, params.t, params.k(), config)
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn divide(&self, r: u64) -> u64 {
        match &self.inverses {
            None => r / self.p,
            Some(inv) => {
                debug_assert!(r < 1 << 53, "float division needs r < 2^53");
                applied_fdiv(&NativeDouble, r, self.p, RoundingMode::NearestEven, inv)
            }
        }
    }

    /// Compression into `out[..digits]`; returns the number of wide
    /// multiply-subtracts.
    ///
    /// When `r < 2^(k t)` digits `i` and `k - i` share one word: the low field
    /// holds `u_i` (`(k-i) t` bits) and the high field `u_{k-i}`, and since
    /// `u_i >= 0` the subtraction never borrows across fields. A larger `r`
    /// (top digit carrying overflow) falls back to one operation per digit.
    pub fn compress_into(&self, r: u64, out: &mut [u64]) -> usize {
        let k = self.digits;
        let t = self.t;
        let p = self.p;
        let s = self.divide(r);
        let kt = k as u32 * t;
        out[0] = r.wrapping_sub(p.wrapping_mul(s));
        if shr(r, kt) != 0 {
            for i in 1..k {
                let sh = i as u32 * t;
                out[i] = shr(r, sh) - p * shr(s, sh);
            }
            return k;
        }
        let mut ops = 1;
        let mut i = 1;
        while i < k - i {
            let lo_bits = (k - i) as u32 * t;
            let x = shr(r, i as u32 * t) | (shr(r, lo_bits) << lo_bits);
            let y = shr(s, i as u32 * t) | (shr(s, lo_bits) << lo_bits);
            let z = x.wrapping_sub(p.wrapping_mul(y));
            out[i] = z & low_mask(lo_bits);
            out[k - i] = z >> lo_bits;
            ops += 1;
            i += 1;
        }
        if 2 * i == k {
            let sh = i as u32 * t;
            out[i] = shr(r, sh) - p * shr(s, sh);
            ops += 1;
        }
        ops
    }

    pub fn compress(&self, r: u64) -> CompressedDigits {
        self.compress_counted(r).0
    }

    pub fn compress_counted(&self, r: u64) -> (CompressedDigits, OpCount) {
        let mut u = vec![0; self.digits];
        let axpy = self.compress_into(r, &mut u);
        (CompressedDigits { u }, OpCount { divisions: 1, axpy, table_accesses: 0 })
    }

    /// In-place correction; returns the number of table lookups.
    pub fn correct_into(&self, u: &mut [u64]) -> usize {
        match &self.table {
            Some(table) => table.correct_in_place(u),
            None => {
                correct_in_place(u, self.p, self.q_mod_p);
                0
            }
        }
    }

    pub fn correct(&self, u: &CompressedDigits) -> Vec<u64> {
        let mut out = u.u.clone();
        self.correct_into(&mut out);
        out
    }

    /// Full reduction: `out[i] = (digit i of r) mod p`, the top digit
    /// including anything above `2^(k t)`.
    pub fn reduce_into(&self, r: u64, out: &mut [u64]) -> OpCount {
        let axpy = self.compress_into(r, out);
        let table_accesses = self.correct_into(&mut out[..self.digits]);
        OpCount { divisions: 1, axpy, table_accesses }
    }

    /// Full reduction repacked into a word with digits below `p`.
    pub fn reduce(&self, r: u64) -> u64 {
        let mut out = vec![0; self.digits];
        self.reduce_into(r, &mut out);
        out.iter()
            .enumerate()
            .fold(0u64, |w, (i, &m)| w | m << (i as u32 * self.t))
    }
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
