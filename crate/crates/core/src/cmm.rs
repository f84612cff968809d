//! Compressed matrix multiplication over `GF(p)`.
//!
//! Several residues of a matrix are packed into one word with radix
//! `Q = 2^t`. Four variants share one word-level kernel:
//!
//! - middle product ([`cmm_multiply`]): rows of `A` packed with reversed
//!   digits, columns of `B` forward; the wanted dot product is digit `d` of
//!   each word product;
//! - right ([`right_cmm`]) and left ([`left_cmm`]): only one operand is
//!   packed, every digit of an output word is live and one REDQ recovers them;
//! - full ([`full_cmm`]): columns of `A` packed in `Q` and rows of `B` in
//!   `Theta = Q^(d_q+1)`, so one word product is a whole output tile.
//!
//! A digit sum equal to `Q` would carry into the next digit, so the inner
//! dimension is processed in blocks with `block (p-1)^2 < Q`; with the
//! inclusive radix choice of [`crate::params::cmm_params`] this only adds a
//! second block exactly at the boundary dimensions.

use std::fmt::Write as _;

use crate::kernel::gemm_wrapping;
use crate::par::Exec;
use crate::params::{delayed_sum_fits, FullCompressionParams, PackingParams};
use crate::redq::{Redq, RedqConfig};
use crate::{Error, Result};

/// Dense row-major matrix of residues mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl ModMatrix {
    pub fn new(p: u64, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("modulus {p} below 2")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix with {} entries",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|&&x| x >= p) {
            return Err(Error::InvalidInput(format!("entry {x} not reduced mod {p}")));
        }
        Ok(Self { p, rows, cols, data })
    }

    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        Self { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Product by the blocked word kernel with one reduction per entry.
    pub fn mul_plain(&self, other: &ModMatrix, exec: Exec) -> Result<ModMatrix> {
        check_product(self, other)?;
        let p = self.p;
        let block = inner_block(p, u64::MAX as u128 + 1);
        let out = blocked_product(self.rows, self.cols, other.cols, block, p, exec, |lo, hi| {
            let a = sub_cols(&self.data, self.rows, self.cols, lo, hi);
            let b = &other.data[lo * other.cols..hi * other.cols];
            gemm_wrapping(&a, b, self.rows, hi - lo, other.cols, exec)
                .into_iter()
                .map(|x| x % p)
                .collect()
        });
        Ok(ModMatrix { p, rows: self.rows, cols: other.cols, data: out })
    }

    /// Text form: a `p rows cols` header, then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.p, self.rows, self.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                write!(s, "{x}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut nums = text.split_whitespace().map(|w| {
            w.parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("not a nonnegative integer: {w:?}")))
        });
        let mut header = || nums.next().unwrap_or_else(|| Err(Error::InvalidInput("truncated header".into())));
        let p = header()?;
        let rows = header()? as usize;
        let cols = header()? as usize;
        let data = nums.collect::<Result<Vec<_>>>()?;
        Self::new(p, rows, cols, data)
    }
}

fn check_product(a: &ModMatrix, b: &ModMatrix) -> Result<()> {
    if a.p != b.p {
        return Err(Error::InvalidInput(format!("moduli differ: {} vs {}", a.p, b.p)));
    }
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// Number of products of residues whose sum stays strictly below `bound`.
fn inner_block(p: u64, bound: u128) -> usize {
    let sq = ((p - 1) as u128).pow(2).max(1);
    ((bound - 1) / sq).min(usize::MAX as u128) as usize
}

/// Columns `lo..hi` of a row-major `rows x cols` array.
fn sub_cols(data: &[u64], rows: usize, cols: usize, lo: usize, hi: usize) -> Vec<u64> {
    if lo == 0 && hi == cols {
        return data.to_vec();
    }
    let mut out = Vec::with_capacity(rows * (hi - lo));
    for i in 0..rows {
        out.extend_from_slice(&data[i * cols + lo..i * cols + hi]);
    }
    out
}

/// Splits the inner dimension `k` into blocks of at most `block`, evaluates
/// `f(lo, hi)` (an `m x n` array of residues) per block and sums mod `p`.
fn blocked_product<F>(m: usize, k: usize, n: usize, block: usize, p: u64, exec: Exec, f: F) -> Vec<u64>
where
    F: Fn(usize, usize) -> Vec<u64>,
{
    let _ = exec;
    let mut acc = vec![0u64; m * n];
    let mut lo = 0;
    loop {
        let hi = (lo + block).min(k);
        let part = f(lo, hi);
        for (a, x) in acc.iter_mut().zip(part) {
            *a = (*a + x) % p;
        }
        lo = hi;
        if lo >= k {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Consecutive entries of a row share a word.
    RowPacked,
    /// Consecutive entries of a column share a word.
    ColPacked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitOrder {
    /// Entry `j` of a group sits at digit `j`.
    Forward,
    /// Entry `j` of a group sits at digit `d - j`; a short last group is
    /// thereby multiplied by a power of `Q`.
    Reversed,
}

/// A matrix with `d + 1` entries per word along rows or columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedMatrix {
    pub orientation: Orientation,
    pub digit_order: DigitOrder,
    pub rows: usize,
    pub cols: usize,
    pub packed_rows: usize,
    pub packed_cols: usize,
    pub words: Vec<u64>,
    pub params: PackingParams,
}

fn check_packing(m: &ModMatrix, params: &PackingParams) -> Result<()> {
    if m.p != params.p {
        return Err(Error::InvalidInput(format!("matrix mod {} with params for {}", m.p, params.p)));
    }
    if params.k() as u64 * params.t as u64 > 64 {
        return Err(Error::ParamsViolation(format!("{} digits of {} bits exceed a word", params.k(), params.t)));
    }
    Ok(())
}

fn digit_pos(j: usize, d: usize, order: DigitOrder) -> u32 {
    match order {
        DigitOrder::Forward => j as u32,
        DigitOrder::Reversed => (d - j) as u32,
    }
}

pub fn compress_rows(m: &ModMatrix, params: &PackingParams, order: DigitOrder) -> Result<CompressedMatrix> {
    check_packing(m, params)?;
    let e = params.k();
    let pc = m.cols.div_ceil(e);
    let mut words = vec![0u64; m.rows * pc];
    for i in 0..m.rows {
        for c in 0..m.cols {
            let shift = digit_pos(c % e, params.d, order) * params.t;
            words[i * pc + c / e] |= m.get(i, c) << shift;
        }
    }
    Ok(CompressedMatrix {
        orientation: Orientation::RowPacked,
        digit_order: order,
        rows: m.rows,
        cols: m.cols,
        packed_rows: m.rows,
        packed_cols: pc,
        words,
        params: *params,
    })
}

pub fn compress_cols(m: &ModMatrix, params: &PackingParams, order: DigitOrder) -> Result<CompressedMatrix> {
    check_packing(m, params)?;
    let e = params.k();
    let pr = m.rows.div_ceil(e);
    let mut words = vec![0u64; pr * m.cols];
    for r in 0..m.rows {
        let shift = digit_pos(r % e, params.d, order) * params.t;
        for j in 0..m.cols {
            words[(r / e) * m.cols + j] |= m.get(r, j) << shift;
        }
    }
    Ok(CompressedMatrix {
        orientation: Orientation::ColPacked,
        digit_order: order,
        rows: m.rows,
        cols: m.cols,
        packed_rows: pr,
        packed_cols: m.cols,
        words,
        params: *params,
    })
}

pub fn uncompress(cm: &CompressedMatrix) -> ModMatrix {
    let params = &cm.params;
    let e = params.k();
    let mask = params.digit_mask();
    let mut out = ModMatrix::zeros(params.p, cm.rows, cm.cols);
    for i in 0..cm.rows {
        for j in 0..cm.cols {
            let (word, slot) = match cm.orientation {
                Orientation::RowPacked => (cm.words[i * cm.packed_cols + j / e], j % e),
                Orientation::ColPacked => (cm.words[(i / e) * cm.packed_cols + j], i % e),
            };
            let shift = digit_pos(slot, params.d, cm.digit_order) * params.t;
            out.data[i * cm.cols + j] = (word >> shift) & mask;
        }
    }
    out
}

/// How the middle digit is read from a middle-product accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractMode {
    /// Low `t (d+1)` bits as a double, times the exact `2^(-t d)`, floored.
    #[default]
    InverseMul,
    /// Add `Q^(2d+1)`, shift right by `t d`, keep one digit.
    AddShift,
}

/// `(digit d of word) mod p`.
pub fn extract_middle(word: u64, params: &PackingParams, mode: ExtractMode) -> u64 {
    let t = params.t;
    let d = params.d as u32;
    let digit = match mode {
        ExtractMode::InverseMul => {
            let low = word & low_mask(t * (d + 1));
            let scaled = low as f64 * 2f64.powi(-((t * d) as i32));
            scaled.floor() as u64 & params.digit_mask()
        }
        ExtractMode::AddShift => {
            let bias = 1u64.checked_shl(t * (2 * d + 1)).unwrap_or(0);
            (word.wrapping_add(bias) >> (t * d)) & params.digit_mask()
        }
    };
    digit % params.p
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CmmConfig {
    pub extract: ExtractMode,
    /// Correction table width for REDQ extraction; `None` corrects directly.
    pub table_width: Option<usize>,
    pub exec: Exec,
}

fn check_budget(params: &PackingParams, digits: usize) -> Result<()> {
    if digits as u64 * params.t as u64 > params.beta as u64 {
        return Err(Error::ParamsViolation(format!(
            "{digits} digits of {} bits exceed beta={}",
            params.t, params.beta
        )));
    }
    Ok(())
}

fn block_or_violation(p: u64, q: u64, per: usize) -> Result<usize> {
    let block = inner_block(p, q as u128) / per;
    if block == 0 {
        return Err(Error::ParamsViolation(format!(
            "radix {q} cannot hold {per} products mod {p} in one digit"
        )));
    }
    Ok(block)
}

/// Middle product of a reversed row-packed `A` and a forward column-packed `B`.
pub fn cmm_multiply(ca: &CompressedMatrix, cb: &CompressedMatrix, config: &CmmConfig) -> Result<ModMatrix> {
    let params = &ca.params;
    if ca.orientation != Orientation::RowPacked || ca.digit_order != DigitOrder::Reversed {
        return Err(Error::InvalidInput("left operand must be row-packed with reversed digits".into()));
    }
    if cb.orientation != Orientation::ColPacked || cb.digit_order != DigitOrder::Forward {
        return Err(Error::InvalidInput("right operand must be column-packed with forward digits".into()));
    }
    if cb.params != *params {
        return Err(Error::InvalidInput("operands packed with different parameters".into()));
    }
    if ca.cols != cb.rows {
        return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", ca.rows, ca.cols, cb.rows, cb.cols)));
    }
    check_budget(params, params.k())?;
    let e = params.k();
    // The middle digit of a block of `w` words sums at most `min(w e, k)` products.
    let fit = inner_block(params.p, params.q() as u128);
    let block = if ca.cols <= fit { ca.packed_cols.max(1) } else { block_or_violation(params.p, params.q(), e)? };
    let k_block = (block * e).min(ca.cols.max(1)) as u64;
    if !delayed_sum_fits(params, k_block) {
        return Err(Error::ParamsViolation(format!(
            "delayed sum for {k_block} products exceeds 2^{}",
            params.beta
        )));
    }
    let (m, kw, n) = (ca.rows, ca.packed_cols, cb.cols);
    let exec = config.exec;
    let data = blocked_product(m, kw, n, block, params.p, exec, |lo, hi| {
        let a = sub_cols(&ca.words, m, kw, lo, hi);
        let b = &cb.words[lo * n..hi * n];
        let acc = gemm_wrapping(&a, b, m, hi - lo, n, exec);
        let mut out = vec![0u64; m * n];
        exec.for_each_chunk_mut(&mut out, n.max(1), |i, row| {
            for (j, x) in row.iter_mut().enumerate() {
                *x = extract_middle(acc[i * n + j], params, config.extract);
            }
        });
        out
    });
    Ok(ModMatrix { p: params.p, rows: m, cols: n, data })
}

fn make_redq(p: u64, t: u32, digits: usize, config: &CmmConfig) -> Result<Redq> {
    let rc = RedqConfig { table_width: config.table_width, ..RedqConfig::default() };
    Redq::new(p, t, digits, &rc)
}

/// Word matrix times residues (or residues times words) accumulated in
/// blocks along the inner dimension; every word is reduced digitwise and
/// the per-block residues are summed. Returns reduced words.
#[allow(clippy::too_many_arguments)]
fn packed_product(
    left: &[u64],
    right: &[u64],
    m: usize,
    k: usize,
    n: usize,
    p: u64,
    q: u64,
    redq: &Redq,
    t: u32,
    exec: Exec,
) -> Result<Vec<u64>> {
    let block = block_or_violation(p, q, 1)?;
    let digits = redq.digits();
    let words = blocked_words(m, k, n, block, exec, |lo, hi| {
        let a = sub_cols(left, m, k, lo, hi);
        let b = &right[lo * n..hi * n];
        gemm_wrapping(&a, b, m, hi - lo, n, exec)
    });
    // Blocks are summed as reduced residues.
    let mut out = vec![0u64; m * n];
    exec.for_each_chunk_mut(&mut out, n.max(1), |i, row| {
        let mut buf = vec![0u64; digits];
        let mut sum = vec![0u64; digits];
        for (j, slot) in row.iter_mut().enumerate() {
            sum.iter_mut().for_each(|s| *s = 0);
            for part in &words {
                redq.reduce_into(part[i * n + j], &mut buf);
                for (s, &x) in sum.iter_mut().zip(&buf) {
                    *s = (*s + x) % p;
                }
            }
            *slot = sum.iter().enumerate().fold(0u64, |w, (d, &x)| w | x << (d as u32 * t));
        }
    });
    Ok(out)
}

fn blocked_words<F>(m: usize, k: usize, n: usize, block: usize, exec: Exec, f: F) -> Vec<Vec<u64>>
where
    F: Fn(usize, usize) -> Vec<u64>,
{
    let _ = (m, n, exec);
    let mut parts = Vec::new();
    let mut lo = 0;
    loop {
        let hi = (lo + block).min(k);
        parts.push(f(lo, hi));
        lo = hi;
        if lo >= k {
            break;
        }
    }
    parts
}

/// `A` times a forward row-packed `B`, output left packed (digits reduced).
pub fn right_cmm_packed(a: &ModMatrix, cb: &CompressedMatrix, config: &CmmConfig) -> Result<CompressedMatrix> {
    let params = &cb.params;
    if cb.orientation != Orientation::RowPacked || cb.digit_order != DigitOrder::Forward {
        return Err(Error::InvalidInput("right operand must be row-packed with forward digits".into()));
    }
    if a.p != params.p || a.cols != cb.rows {
        return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", a.rows, a.cols, cb.rows, cb.cols)));
    }
    check_budget(params, params.k())?;
    let redq = make_redq(params.p, params.t, params.k(), config)?;
    let words = packed_product(
        &a.data,
        &cb.words,
        a.rows,
        a.cols,
        cb.packed_cols,
        params.p,
        params.q(),
        &redq,
        params.t,
        config.exec,
    )?;
    Ok(CompressedMatrix {
        orientation: Orientation::RowPacked,
        digit_order: DigitOrder::Forward,
        rows: a.rows,
        cols: cb.cols,
        packed_rows: a.rows,
        packed_cols: cb.packed_cols,
        words,
        params: *params,
    })
}

pub fn right_cmm(a: &ModMatrix, cb: &CompressedMatrix, config: &CmmConfig) -> Result<ModMatrix> {
    Ok(uncompress(&right_cmm_packed(a, cb, config)?))
}

/// A forward column-packed `A` times `B`, output left packed.
pub fn left_cmm_packed(ca: &CompressedMatrix, b: &ModMatrix, config: &CmmConfig) -> Result<CompressedMatrix> {
    let params = &ca.params;
    if ca.orientation != Orientation::ColPacked || ca.digit_order != DigitOrder::Forward {
        return Err(Error::InvalidInput("left operand must be column-packed with forward digits".into()));
    }
    if b.p != params.p || ca.cols != b.rows {
        return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", ca.rows, ca.cols, b.rows, b.cols)));
    }
    check_budget(params, params.k())?;
    let redq = make_redq(params.p, params.t, params.k(), config)?;
    let words = packed_product(
        &ca.words,
        &b.data,
        ca.packed_rows,
        ca.cols,
        b.cols,
        params.p,
        params.q(),
        &redq,
        params.t,
        config.exec,
    )?;
    Ok(CompressedMatrix {
        orientation: Orientation::ColPacked,
        digit_order: DigitOrder::Forward,
        rows: ca.rows,
        cols: b.cols,
        packed_rows: ca.packed_rows,
        packed_cols: b.cols,
        words,
        params: *params,
    })
}

pub fn left_cmm(ca: &CompressedMatrix, b: &ModMatrix, config: &CmmConfig) -> Result<ModMatrix> {
    Ok(uncompress(&left_cmm_packed(ca, b, config)?))
}

/// Both operands of a fully compressed product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullCompressedPair {
    /// Columns of `A` packed in `Q`, `d_q + 1` rows per word.
    pub left: CompressedMatrix,
    /// Rows of `B` packed in `Theta`, `d_theta + 1` columns per word.
    pub right: CompressedMatrix,
    pub params: FullCompressionParams,
}

fn check_full(params: &FullCompressionParams) -> Result<()> {
    if params.theta_exp % params.t != 0 || !params.satisfies_theta_bound() {
        return Err(Error::ParamsViolation(format!(
            "Theta = 2^{} must be a power of Q = 2^{} at least Q^{}",
            params.theta_exp,
            params.t,
            params.d_q + 1
        )));
    }
    let digits = full_digits(params);
    if digits as u64 * params.t as u64 > params.beta.min(64) as u64 {
        return Err(Error::ParamsViolation(format!(
            "{digits} digits of {} bits exceed beta={}",
            params.t, params.beta
        )));
    }
    Ok(())
}

/// Digits of radix `Q` spanned by a tile word.
fn full_digits(params: &FullCompressionParams) -> usize {
    let stride = (params.theta_exp / params.t) as usize;
    params.d_theta * stride + params.d_q + 1
}

pub fn full_compress(a: &ModMatrix, b: &ModMatrix, params: &FullCompressionParams) -> Result<FullCompressedPair> {
    check_product(a, b)?;
    check_full(params)?;
    let pq = PackingParams::new(params.p, params.t, params.d_q, params.beta, a.cols as u64)?;
    let pt = PackingParams {
        p: params.p,
        t: params.theta_exp,
        d: params.d_theta,
        beta: params.beta,
        n_max: a.cols as u64,
    };
    if pt.k() as u64 * pt.t as u64 > 64 {
        return Err(Error::ParamsViolation("Theta digits exceed a word".into()));
    }
    Ok(FullCompressedPair {
        left: compress_cols(a, &pq, DigitOrder::Forward)?,
        right: compress_rows(b, &pt, DigitOrder::Forward)?,
        params: *params,
    })
}

/// Product through `(d_q+1) x (d_theta+1)` output tiles, one word each.
pub fn full_cmm(a: &ModMatrix, b: &ModMatrix, params: &FullCompressionParams, config: &CmmConfig) -> Result<ModMatrix> {
    let pair = full_compress(a, b, params)?;
    full_cmm_packed(&pair, config)
}

pub fn full_cmm_packed(pair: &FullCompressedPair, config: &CmmConfig) -> Result<ModMatrix> {
    let params = &pair.params;
    check_full(params)?;
    let (left, right) = (&pair.left, &pair.right);
    let digits = full_digits(params);
    let redq = make_redq(params.p, params.t, digits, config)?;
    let q = 1u64 << params.t;
    let tiles = packed_product(
        &left.words,
        &right.words,
        left.packed_rows,
        left.cols,
        right.packed_cols,
        params.p,
        q,
        &redq,
        params.t,
        config.exec,
    )?;
    let (m, n) = (left.rows, right.cols);
    let (eq, et) = (params.d_q + 1, params.d_theta + 1);
    let stride = (params.theta_exp / params.t) as usize;
    let mask = q - 1;
    let mut out = ModMatrix::zeros(params.p, m, n);
    for i in 0..m {
        for j in 0..n {
            let word = tiles[(i / eq) * right.packed_cols + j / et];
            let digit = i % eq + (j % et) * stride;
            out.data[i * n + j] = (word >> (digit as u32 * params.t)) & mask;
        }
    }
    Ok(out)
}
