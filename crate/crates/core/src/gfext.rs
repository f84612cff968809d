//! Small extension fields `GF(p^k)` in discrete-logarithm representation,
//! with tabulated packing and a fast dot product.
//!
//! An element is a handle: `0` is zero and `i > 0` stands for `g^(i-1)` for a
//! fixed generator `g`. Multiplication adds exponents, addition goes through
//! a Zech logarithm table. For dot products each element is mapped by table
//! to the packed word `sum c_i q^i` of its polynomial; the word products are
//! accumulated, compressed by REDQ, and two tables indexed by the low and high
//! halves of the compressed digits return the corrected and already reduced
//! polynomial parts, which one field addition combines.

use crate::kernel::gemm_wrapping;
use crate::par::Exec;
use crate::params::{dqt_params, is_prime, PackingParams, DEFAULT_BETA};
use crate::redq::{Redq, RedqConfig};
use crate::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

/// Field element handle: `0` is zero, `i > 0` is `g^(i-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GFqElem(pub u32);

impl GFqElem {
    pub const ZERO: GFqElem = GFqElem(0);
    pub const ONE: GFqElem = GFqElem(1);

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

/// Operation counts of one instrumented dot product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FgdpCounts {
    pub word_mul_adds: u64,
    /// Lookups converting elements to packed words.
    pub pack_lookups: u64,
    /// Multiply-subtracts in REDQ compression.
    pub axpy: u64,
    /// Lookups converting the accumulator back (low, high and Zech tables).
    pub table_accesses: u64,
    pub field_reductions: u64,
}

#[derive(Debug, Clone)]
pub struct GFqField {
    p: u64,
    k: usize,
    order: u64,
    /// Monic, `k + 1` coefficients, lowest first.
    irreducible: Vec<u64>,
    generator: Vec<u64>,
    /// Exponent `e` to polynomial code of `g^e`.
    exp: Vec<u32>,
    /// Polynomial code to handle.
    handle_of: Vec<u32>,
    /// Exponent `e` to the handle of `1 + g^e`.
    zech: Vec<u32>,
    pack_table: Vec<u64>,
    l_table: Vec<u32>,
    h_table: Vec<u32>,
    params: PackingParams,
    redq: Redq,
}

/// Options for [`build_field_with`].
#[derive(Debug, Clone, Default)]
pub struct FieldOptions {
    /// Monic irreducible polynomial, `k + 1` coefficients lowest first.
    pub irreducible: Option<Vec<u64>>,
    /// Longest dot product to support; defaults to the largest the radix allows.
    pub dot_length: Option<u64>,
    pub beta: Option<u32>,
}

pub fn build_field(p: u64, k: usize, irreducible: Option<Vec<u64>>) -> Result<GFqField> {
    build_field_with(p, k, &FieldOptions { irreducible, ..FieldOptions::default() })
}

// Dense polynomials over GF(p), lowest coefficient first.

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` modulo the monic `m`.
fn poly_rem_monic(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * c) % p;
            }
        }
        r.pop();
    }
    poly_trim(&mut r);
    r
}

fn code_of(poly: &[u64], p: u64) -> u64 {
    poly.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn poly_of(mut code: u64, p: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(code % p);
        code /= p;
    }
    out
}

/// Monic polynomial of degree `deg` from the code of its lower coefficients.
fn monic(code: u64, p: u64, deg: usize) -> Vec<u64> {
    let mut m = poly_of(code, p, deg);
    m.push(1);
    m
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    if deg == 0 || m[deg] != 1 {
        return false;
    }
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            if poly_rem_monic(m, &monic(code, p, d), p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Multiplicative order of `x` modulo `m`, walking powers up to `limit`.
fn order_of(x: &[u64], m: &[u64], p: u64, limit: u64) -> Option<u64> {
    let x = poly_rem_monic(x, m, p);
    if x.is_empty() {
        return None;
    }
    let mut cur = x.clone();
    for e in 1..=limit {
        if cur == [1] {
            return Some(e);
        }
        cur = poly_rem_monic(&poly_mul(&cur, &x, p), m, p);
    }
    None
}

pub fn build_field_with(p: u64, k: usize, opts: &FieldOptions) -> Result<GFqField> {
    if !is_prime(p) || k == 0 {
        return Err(Error::InvalidInput(format!("GF({p}^{k}) needs a prime p and k >= 1")));
    }
    let order = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if order > MAX_FIELD_ORDER as u128 {
        return Err(Error::TooLarge { p, k });
    }
    let order = order as u64;
    let group = order - 1;
    let is_generator = |g: &[u64], m: &[u64]| order_of(g, m, p, group) == Some(group);
    let linear = |c: u64| -> Vec<u64> {
        let mut g = vec![c, 1];
        poly_trim(&mut g);
        g
    };
    let (irreducible, generator) = match &opts.irreducible {
        Some(m) => {
            if m.len() != k + 1 || m.iter().any(|&c| c >= p) || !is_irreducible(m, p) {
                return Err(Error::NotIrreducible(code_of(m, p)));
            }
            let from_linear = (0..p).map(linear).find(|g| is_generator(g, m));
            let g = from_linear
                .or_else(|| (1..order).map(|c| poly_of(c, p, k)).find(|g| is_generator(g, m)))
                .ok_or(Error::NoGeneratorFound { p, k })?;
            (m.clone(), g)
        }
        None => {
            let mut found = None;
            for code in 0..p.pow(k as u32) {
                let m = monic(code, p, k);
                if !is_irreducible(&m, p) {
                    continue;
                }
                if let Some(g) = (0..p).map(linear).find(|g| is_generator(g, &m)) {
                    found = Some((m, g));
                    break;
                }
            }
            found.ok_or(Error::NoGeneratorFound { p, k })?
        }
    };
    let generator = poly_rem_monic(&generator, &irreducible, p);

    let mut exp = Vec::with_capacity(group as usize);
    let mut handle_of = vec![0u32; order as usize];
    let mut cur = vec![1u64];
    for e in 0..group {
        let code = code_of(&cur, p);
        exp.push(code as u32);
        handle_of[code as usize] = e as u32 + 1;
        cur = poly_rem_monic(&poly_mul(&cur, &generator, p), &irreducible, p);
    }
    let zech = exp
        .iter()
        .map(|&code| {
            let mut c = poly_of(code as u64, p, k);
            c[0] = (c[0] + 1) % p;
            handle_of[code_of(&c, p) as usize]
        })
        .collect();

    let beta = opts.beta.unwrap_or(DEFAULT_BETA);
    let t_max = beta / (2 * k as u32 - 1);
    let per = k as u128 * ((p - 1) as u128).pow(2);
    let n_default = if t_max == 0 || t_max >= 64 {
        0
    } else {
        (((1u128 << t_max) - 1) / per).min(u64::MAX as u128) as u64
    };
    let n = opts.dot_length.unwrap_or(n_default);
    let params = dqt_params(p, n.max(1), k, beta)?;
    if n == 0 {
        return Err(Error::Infeasible(format!("GF({p}^{k}): no dot product fits {beta} bits")));
    }
    let redq = Redq::new(p, params.t, 2 * k - 1, &RedqConfig::default())?;

    let mut field = GFqField {
        p,
        k,
        order,
        irreducible,
        generator,
        exp,
        handle_of,
        zech,
        pack_table: Vec::new(),
        l_table: Vec::new(),
        h_table: Vec::new(),
        params,
        redq,
    };
    field.pack_table = (0..order)
        .map(|h| {
            let poly = field.to_poly(GFqElem(h as u32));
            crate::dqt::pack(&poly, &params).expect("digits below q")
        })
        .collect();
    field.build_conversion_tables();
    Ok(field)
}

impl GFqField {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn irreducible(&self) -> &[u64] {
        &self.irreducible
    }

    /// The generator as a polynomial, lowest coefficient first.
    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    pub fn params(&self) -> &PackingParams {
        &self.params
    }

    /// Total table entries held by the field.
    pub fn table_entries(&self) -> usize {
        self.exp.len()
            + self.handle_of.len()
            + self.zech.len()
            + self.pack_table.len()
            + self.l_table.len()
            + self.h_table.len()
    }

    /// Entry budget `4 p^k + 2^(1 + k ceil(log2 p))`.
    pub fn table_budget(&self) -> u128 {
        let b = crate::redq::residue_bits(self.p);
        4 * self.order as u128 + (1u128 << (1 + self.k as u32 * b))
    }

    pub fn elements(&self) -> impl Iterator<Item = GFqElem> {
        (0..self.order as u32).map(GFqElem)
    }

    /// Polynomial of an element, `k` coefficients lowest first.
    pub fn to_poly(&self, a: GFqElem) -> Vec<u64> {
        if a.is_zero() {
            vec![0; self.k]
        } else {
            poly_of(self.exp[a.0 as usize - 1] as u64, self.p, self.k)
        }
    }

    /// Element of a polynomial of any degree, reduced modulo the irreducible.
    pub fn from_poly(&self, poly: &[u64]) -> GFqElem {
        let reduced: Vec<u64> = poly.iter().map(|&c| c % self.p).collect();
        let r = poly_rem_monic(&reduced, &self.irreducible, self.p);
        GFqElem(self.handle_of[code_of(&r, self.p) as usize])
    }

    /// The element `c` of the prime subfield.
    pub fn from_int(&self, c: u64) -> GFqElem {
        self.from_poly(&[c % self.p])
    }

    pub fn packed(&self, a: GFqElem) -> u64 {
        self.pack_table[a.0 as usize]
    }

    fn group(&self) -> u64 {
        self.order - 1
    }

    pub fn mul(&self, a: GFqElem, b: GFqElem) -> GFqElem {
        if a.is_zero() || b.is_zero() {
            return GFqElem::ZERO;
        }
        let e = (a.0 as u64 - 1 + b.0 as u64 - 1) % self.group();
        GFqElem(e as u32 + 1)
    }

    pub fn add(&self, a: GFqElem, b: GFqElem) -> GFqElem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        // g^x + g^y = g^x (1 + g^(y-x))
        let (x, y) = (a.0 as u64 - 1, b.0 as u64 - 1);
        let diff = (y + self.group() - x) % self.group();
        self.mul(a, GFqElem(self.zech[diff as usize]))
    }

    pub fn neg(&self, a: GFqElem) -> GFqElem {
        if a.is_zero() || self.p == 2 {
            return a;
        }
        // -1 = g^((p^k - 1) / 2)
        self.mul(a, GFqElem((self.group() / 2) as u32 + 1))
    }

    pub fn sub(&self, a: GFqElem, b: GFqElem) -> GFqElem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: GFqElem) -> Result<GFqElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let e = (self.group() - (a.0 as u64 - 1)) % self.group();
        Ok(GFqElem(e as u32 + 1))
    }

    pub fn pow(&self, a: GFqElem, n: u64) -> GFqElem {
        if n == 0 {
            return GFqElem::ONE;
        }
        if a.is_zero() {
            return a;
        }
        let e = ((a.0 as u128 - 1) * n as u128 % self.group() as u128) as u32;
        GFqElem(e + 1)
    }

    fn q_mod_p(&self) -> u64 {
        self.params.q_mod_p()
    }

    fn build_conversion_tables(&mut self) {
        let (p, k) = (self.p, self.k);
        let neg_q = (p - self.q_mod_p()) % p;
        let size = self.order as usize;
        let mut l_table = vec![0u32; size];
        let mut h_table = vec![0u32; size];
        for idx in 0..size {
            let u = poly_of(idx as u64, p, k);
            // Low part: corrected digits 0..k-2 from (u_0, ..., u_{k-1}).
            let mut low = vec![0u64; k];
            for i in 0..k.saturating_sub(1) {
                low[i] = (u[i] + neg_q * u[i + 1]) % p;
            }
            l_table[idx] = self.from_poly(&low).0;
            // High part: digits k-1..2k-2 from (u_{k-1}, ..., u_{2k-2}).
            let mut high = vec![0u64; 2 * k - 1];
            for i in 0..k - 1 {
                high[k - 1 + i] = (u[i] + neg_q * u[i + 1]) % p;
            }
            high[2 * k - 2] = u[k - 1];
            h_table[idx] = self.from_poly(&high).0;
        }
        self.l_table = l_table;
        self.h_table = h_table;
    }

    fn tuple_index(&self, u: &[u64]) -> usize {
        u.iter().rev().fold(0usize, |acc, &x| acc * self.p as usize + x as usize)
    }

    /// Maps a packed accumulator `sum pack(a_j) pack(b_j)` to its field value.
    pub fn reduce_accumulator(&self, acc: u64) -> GFqElem {
        self.reduce_accumulator_counted(acc).0
    }

    pub fn reduce_accumulator_counted(&self, acc: u64) -> (GFqElem, FgdpCounts) {
        let k = self.k;
        let mut u = [0u64; 64];
        let u = &mut u[..2 * k - 1];
        let axpy = self.redq.compress_into(acc, u);
        let lo = GFqElem(self.l_table[self.tuple_index(&u[..k])]);
        let hi = GFqElem(self.h_table[self.tuple_index(&u[k - 1..])]);
        let zech = (!lo.is_zero() && !hi.is_zero()) as u64;
        let counts = FgdpCounts {
            word_mul_adds: 0,
            pack_lookups: 0,
            axpy: axpy as u64,
            table_accesses: 2 + zech,
            field_reductions: 1,
        };
        (self.add(lo, hi), counts)
    }

    /// Reference path: radix conversion, per-coefficient reduction, then
    /// reduction by the irreducible polynomial.
    pub fn reduce_accumulator_reference(&self, acc: u64) -> GFqElem {
        let digits = crate::dqt::unpack_radix(acc, 2 * self.k - 1, self.params.t);
        let top = acc.checked_shr((2 * self.k as u32 - 2) * self.params.t).unwrap_or(0);
        let mut poly: Vec<u64> = digits.iter().map(|&d| d % self.p).collect();
        *poly.last_mut().unwrap() = top % self.p;
        self.from_poly(&poly)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n as u64 > self.params.n_max {
            return Err(Error::ParamsViolation(format!(
                "dot length {n} exceeds n_max={}",
                self.params.n_max
            )));
        }
        Ok(())
    }

    /// Fast dot product `sum v1[j] v2[j]`.
    pub fn fgdp(&self, v1: &[GFqElem], v2: &[GFqElem]) -> Result<GFqElem> {
        Ok(self.fgdp_counted(v1, v2)?.0)
    }

    pub fn fgdp_counted(&self, v1: &[GFqElem], v2: &[GFqElem]) -> Result<(GFqElem, FgdpCounts)> {
        if v1.len() != v2.len() {
            return Err(Error::DimensionMismatch(format!("{} vs {} entries", v1.len(), v2.len())));
        }
        self.check_len(v1.len())?;
        let acc = v1
            .iter()
            .zip(v2)
            .fold(0u64, |acc, (&a, &b)| acc + self.packed(a) * self.packed(b));
        let (r, mut counts) = self.reduce_accumulator_counted(acc);
        counts.word_mul_adds = v1.len() as u64;
        counts.pack_lookups = 2 * v1.len() as u64;
        Ok((r, counts))
    }

    /// Dot product by repeated field multiplication and addition.
    pub fn dot_naive(&self, v1: &[GFqElem], v2: &[GFqElem]) -> GFqElem {
        v1.iter()
            .zip(v2)
            .fold(GFqElem::ZERO, |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }
}

/// `m x k` by `k x n` product over the field, row-major.
pub fn gfq_matmul(
    field: &GFqField,
    a: &[GFqElem],
    b: &[GFqElem],
    m: usize,
    k: usize,
    n: usize,
    exec: Exec,
) -> Result<Vec<GFqElem>> {
    if a.len() != m * k || b.len() != k * n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{} need {} and {} entries, got {} and {}",
            m,
            k,
            k,
            n,
            m * k,
            k * n,
            a.len(),
            b.len()
        )));
    }
    field.check_len(k)?;
    let pa: Vec<u64> = a.iter().map(|&x| field.packed(x)).collect();
    let pb: Vec<u64> = b.iter().map(|&x| field.packed(x)).collect();
    let acc = gemm_wrapping(&pa, &pb, m, k, n, exec);
    let mut out = vec![GFqElem::ZERO; m * n];
    let width = n.max(1);
    exec.for_each_chunk_mut(&mut out, width, |row, chunk| {
        for (j, slot) in chunk.iter_mut().enumerate() {
            *slot = field.reduce_accumulator(acc[row * width + j]);
        }
    });
    Ok(out)
}

/// Reference product with field operations only.
pub fn gfq_matmul_naive(field: &GFqField, a: &[GFqElem], b: &[GFqElem], m: usize, k: usize, n: usize) -> Vec<GFqElem> {
    let mut out = vec![GFqElem::ZERO; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut acc = GFqElem::ZERO;
            for l in 0..k {
                acc = field.add(acc, field.mul(a[i * k + l], b[l * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
    out
}
