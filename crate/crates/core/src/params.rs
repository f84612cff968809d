//! Packing bounds, parameter selection and operation-count models.
//!
//! Three families of constraints govern a packed word with radix `q = 2^t`
//! holding `d + 1` digits inside a `beta`-bit budget:
//!
//! - dot products of packed polynomials of degree `< k` over length `n`
//!   need `q > n k (p-1)^2` and `(2k-1) t <= beta`;
//! - compressed matrix products over a common dimension `k` need
//!   `k (p-1)^2 <= q` (inclusive, see [`cmm_params`]) and `t (d+1) <= beta`;
//! - full two-radix compression additionally needs `Theta >= Q^(d_q+1)` and
//!   `Q^((d_q+1)(d_theta+1))` inside the budget.
//!
//! All arithmetic on the bounds is exact (`u128`), never floating point.

use crate::{Error, Result};

/// Mantissa budget of an IEEE double, the default everywhere.
pub const DEFAULT_BETA: u32 = 53;
/// Widest budget accepted on the integer path.
pub const MAX_BETA: u32 = 63;
/// Exclusive upper bound on the modulus.
pub const MAX_MODULUS: u64 = 1 << 26;

/// Radix, degree and budget of a packed word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PackingParams {
    /// Modulus of the residues.
    pub p: u64,
    /// Radix exponent, `q = 2^t`.
    pub t: u32,
    /// Packing degree; a word holds `d + 1` digits.
    pub d: usize,
    /// Bit budget for packed values.
    pub beta: u32,
    /// Longest accumulation the parameters were built for.
    pub n_max: u64,
}

impl PackingParams {
    pub fn new(p: u64, t: u32, d: usize, beta: u32, n_max: u64) -> Result<Self> {
        check_modulus(p)?;
        check_beta(beta)?;
        if t == 0 || t > 63 {
            return Err(Error::InvalidInput(format!("radix exponent {t} out of range 1..=63")));
        }
        if (d as u64 + 1) * t as u64 > 64 {
            return Err(Error::InvalidInput(format!(
                "{} digits of {t} bits do not fit a 64-bit word",
                d + 1
            )));
        }
        Ok(Self { p, t, d, beta, n_max })
    }

    pub fn q(&self) -> u64 {
        1u64 << self.t
    }

    /// Digits per word, `d + 1`.
    pub fn k(&self) -> usize {
        self.d + 1
    }

    pub fn digit_mask(&self) -> u64 {
        self.q() - 1
    }

    pub fn q_mod_p(&self) -> u64 {
        self.q() % self.p
    }

    /// False exactly when `p | q`, in which case REDQ correction is the identity.
    pub fn needs_correction(&self) -> bool {
        self.q_mod_p() != 0
    }

    /// Compression factor `e = d + 1`.
    pub fn compression(&self) -> usize {
        self.d + 1
    }

    /// Both dot-product conditions for polynomials of degree `<= d`.
    pub fn satisfies_dot_bounds(&self) -> bool {
        let k = self.k() as u128;
        let need = self.n_max as u128 * k * sq(self.p);
        (self.q() as u128) > need && (2 * k - 1) * (self.t as u128) <= self.beta as u128
    }

    /// Compressed-matmul conditions with the inclusive lower bound on `Q`.
    pub fn satisfies_cmm_bounds(&self) -> bool {
        let need = self.n_max as u128 * sq(self.p);
        need <= self.q() as u128 && (self.k() as u64) * (self.t as u64) <= self.beta as u64
    }
}

/// Two-radix parameters: rows packed in `Q = 2^t`, columns in `Theta = 2^theta_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FullCompressionParams {
    pub p: u64,
    pub beta: u32,
    pub t: u32,
    pub d_q: usize,
    pub d_theta: usize,
    pub theta_exp: u32,
}

impl FullCompressionParams {
    /// Residues per word, `(d_q + 1)(d_theta + 1)`.
    pub fn compression(&self) -> usize {
        (self.d_q + 1) * (self.d_theta + 1)
    }

    /// `Q^(d_q+1) <= Theta`.
    pub fn satisfies_theta_bound(&self) -> bool {
        self.t as u64 * (self.d_q as u64 + 1) <= self.theta_exp as u64
    }

    /// `Q^((d_q+1)(d_theta+1))` within the budget (inclusive, like [`cmm_params`]).
    pub fn satisfies_degree_bound(&self) -> bool {
        self.t as u64 * self.compression() as u64 <= self.beta as u64
    }

    /// The equivalent single-radix view used for packing and REDQ.
    pub fn as_packing(&self, n_max: u64) -> PackingParams {
        PackingParams {
            p: self.p,
            t: self.t,
            d: self.compression() - 1,
            beta: self.beta,
            n_max,
        }
    }
}

fn check_modulus(p: u64) -> Result<()> {
    if !(2..MAX_MODULUS).contains(&p) {
        return Err(Error::InvalidInput(format!("modulus {p} outside 2..2^26")));
    }
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("modulus {p} is not prime")));
    }
    Ok(())
}

pub(crate) fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn check_beta(beta: u32) -> Result<()> {
    if !(2..=MAX_BETA).contains(&beta) {
        return Err(Error::InvalidInput(format!("beta {beta} outside 2..=63")));
    }
    Ok(())
}

/// `(p - 1)^2`.
pub(crate) fn sq(p: u64) -> u128 {
    let m = (p - 1) as u128;
    m * m
}

/// Smallest `t` with `2^t > x`.
fn bits_above(x: u128) -> u32 {
    128 - x.leading_zeros()
}

/// Smallest `t >= 1` with `x <= 2^t`.
fn bits_at_least(x: u128) -> u32 {
    if x <= 2 {
        1
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Parameters for the packed dot product of `n` pairs of polynomials with
/// `k` coefficients each: the minimal `t` with `2^t > n k (p-1)^2`, provided
/// `(2k-1) t <= beta`.
pub fn dqt_params(p: u64, n: u64, k: usize, beta: u32) -> Result<PackingParams> {
    check_modulus(p)?;
    check_beta(beta)?;
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("dot length and degree count must be positive".into()));
    }
    let need = (n as u128)
        .checked_mul(k as u128)
        .and_then(|x| x.checked_mul(sq(p)))
        .ok_or_else(|| Error::Infeasible("digit bound overflows".into()))?;
    let t = bits_above(need);
    if (2 * k as u128 - 1) * t as u128 > beta as u128 {
        return Err(Error::Infeasible(format!(
            "p={p}, n={n}, k={k}: radix needs {t} bits but {} digits exceed beta={beta}",
            2 * k - 1
        )));
    }
    PackingParams::new(p, t, k - 1, beta, n)
}

/// Largest number of products of residues that can be accumulated exactly.
///
/// Centered residues (in `[-(p-1)/2, (p-1)/2]`) allow `n (p-1)^2 < 2^(beta+1)`;
/// residues stored in `[0, p-1]` lose the sign bit and allow only
/// `n (p-1)^2 < 2^beta`.
pub fn delayed_bound(p: u64, beta: u32, centered: bool) -> u64 {
    assert!(p >= 2, "modulus must be at least 2");
    let exp = if centered { beta + 1 } else { beta };
    let limit = if exp >= 128 { u128::MAX } else { (1u128 << exp) - 1 };
    let n = limit / sq(p);
    n.min(u64::MAX as u128) as u64
}

/// Compression parameters for a matrix product with common dimension `k_dim`.
///
/// `t` is the smallest exponent with `k_dim (p-1)^2 <= 2^t` and the
/// compression is `e = min(floor(beta / t), k_dim)`, so `d = e - 1`.
pub fn cmm_params(p: u64, k_dim: u64, beta: u32) -> Result<PackingParams> {
    cmm_params_with(p, k_dim, beta, RadixBound::Inclusive)
}

/// Whether the radix may equal the largest possible digit sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadixBound {
    /// `k (p-1)^2 <= Q`, the reading behind the published compression table.
    #[default]
    Inclusive,
    /// `k (p-1)^2 < Q`: every dot product is a proper digit.
    Strict,
}

impl RadixBound {
    fn exponent(self, x: u128) -> u32 {
        match self {
            RadixBound::Inclusive => bits_at_least(x),
            RadixBound::Strict => bits_above(x),
        }
    }
}

/// [`cmm_params`] with a choice of radix bound.
///
/// At the inclusive boundary a digit sum can reach `Q` and carry. The
/// products in [`crate::cmm`] then split the inner dimension, and reject the
/// parameters outright when a single product `(p-1)^2` already equals `Q`.
pub fn cmm_params_with(p: u64, k_dim: u64, beta: u32, bound: RadixBound) -> Result<PackingParams> {
    check_modulus(p)?;
    check_beta(beta)?;
    if k_dim == 0 {
        return Err(Error::InvalidInput("common dimension must be positive".into()));
    }
    let t = bound.exponent(k_dim as u128 * sq(p));
    compression_for(p, k_dim, beta, t)
}

/// Like [`cmm_params`] but with the strict bound `k_dim (p-1)^2 < 2^t`.
///
/// With the strict bound a whole dot product fits one digit, so the middle
/// product needs a single accumulation block. Also checks the delayed-sum condition
/// `sum_i (k/(d+1)) (i+1) (p-1)^2 Q^(d-i) < 2^beta`.
pub fn middle_product_params(p: u64, k_dim: u64, beta: u32) -> Result<PackingParams> {
    check_modulus(p)?;
    check_beta(beta)?;
    if k_dim == 0 {
        return Err(Error::InvalidInput("common dimension must be positive".into()));
    }
    let params = cmm_params_with(p, k_dim, beta, RadixBound::Strict)?;
    if !delayed_sum_fits(&params, k_dim) {
        return Err(Error::Infeasible(format!(
            "delayed middle-product sum exceeds 2^{beta} for k={k_dim}"
        )));
    }
    Ok(params)
}

fn compression_for(p: u64, k_dim: u64, beta: u32, t: u32) -> Result<PackingParams> {
    let per_word = beta / t;
    if per_word < 2 {
        return Err(Error::Infeasible(format!(
            "p={p}, k={k_dim}: radix 2^{t} leaves no room for two digits in {beta} bits"
        )));
    }
    let e = (per_word as u64).min(k_dim) as usize;
    PackingParams::new(p, t, e - 1, beta, k_dim)
}

/// Exact evaluation of `sum_{i=0}^{d} (k/(d+1)) (i+1) (p-1)^2 Q^(d-i) < 2^beta`,
/// scaled by `d + 1` to stay in integers.
pub fn delayed_sum_fits(params: &PackingParams, k_dim: u64) -> bool {
    let d = params.d as u32;
    let mut total: u128 = 0;
    for i in 0..=d {
        let term = (k_dim as u128)
            .checked_mul(i as u128 + 1)
            .and_then(|x| x.checked_mul(sq(params.p)))
            .and_then(|x| x.checked_mul(1u128.checked_shl(params.t * (d - i))?))
            .and_then(|x| total.checked_add(x));
        match term {
            Some(v) if params.t * (d - i) < 128 => total = v,
            _ => return false,
        }
    }
    let rhs = (d as u128 + 1).checked_mul(1u128 << params.beta);
    matches!(rhs, Some(r) if total < r)
}

/// Two-radix parameters with equal degrees `d_q = d_theta = d`, the largest
/// `d` such that `t (d+1)^2 <= beta`, and `Theta = Q^(d+1)`.
pub fn full_cmm_params(p: u64, k_dim: u64, beta: u32) -> Result<FullCompressionParams> {
    full_cmm_params_with(p, k_dim, beta, RadixBound::Inclusive)
}

/// [`full_cmm_params`] with a choice of radix bound.
pub fn full_cmm_params_with(p: u64, k_dim: u64, beta: u32, bound: RadixBound) -> Result<FullCompressionParams> {
    check_modulus(p)?;
    check_beta(beta)?;
    if k_dim == 0 {
        return Err(Error::InvalidInput("common dimension must be positive".into()));
    }
    let t = bound.exponent(k_dim as u128 * sq(p));
    let mut d = 0usize;
    while t as u64 * ((d + 2) as u64).pow(2) <= beta as u64 {
        d += 1;
    }
    if d == 0 {
        return Err(Error::Infeasible(format!(
            "p={p}, k={k_dim}: radix 2^{t} admits no 2x2 tile in {beta} bits"
        )));
    }
    Ok(FullCompressionParams {
        p,
        beta,
        t,
        d_q: d,
        d_theta: d,
        theta_exp: t * (d as u32 + 1),
    })
}

/// One column of a compression table: the largest radix achieving a given
/// compression over a range of common dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionRange {
    pub t: u32,
    pub dim_lo: u64,
    pub dim_hi: u64,
    pub e_lo: usize,
    pub e_hi: usize,
}

/// Enumerates the compression factors [`cmm_params`] yields as the common
/// dimension grows, merging radices that give the same compression.
pub fn compression_table(p: u64, beta: u32) -> Result<Vec<CompressionRange>> {
    check_modulus(p)?;
    check_beta(beta)?;
    let mut out: Vec<CompressionRange> = Vec::new();
    let mut prev_hi = 0u64;
    for t in 1..=beta {
        let per_word = (beta / t) as u64;
        if per_word < 2 {
            break;
        }
        let hi = ((1u128 << t) / sq(p)).min(u64::MAX as u128) as u64;
        if hi <= prev_hi {
            continue;
        }
        let lo = prev_hi + 1;
        prev_hi = hi;
        let e_lo = per_word.min(lo) as usize;
        let e_hi = per_word.min(hi) as usize;
        if e_hi < 2 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.e_lo == last.e_hi && e_lo == e_hi && last.e_hi == e_lo => {
                last.t = t;
                last.dim_hi = hi;
            }
            _ => out.push(CompressionRange { t, dim_lo: lo, dim_hi: hi, e_lo, e_hi }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    /// Single-residue reduction (division, reciprocal or Montgomery step).
    Redc,
    /// Simultaneous reduction of the given number of residues.
    Redq(usize),
}

/// Operation counts for one algorithm instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    /// Word multiply-adds of the main product.
    pub mul_add_count: u64,
    pub reduction_count: u64,
    pub reduction_kind: ReductionKind,
    /// Multiply-adds spent inside the reductions themselves.
    pub reduction_axpy_count: u64,
    pub conversion_count: u64,
    pub table_access_count: u64,
}

impl CostReport {
    pub fn total_mul_add(&self) -> u64 {
        self.mul_add_count + self.reduction_axpy_count
    }
}

/// Largest `n` with `n (d+1) (p-1)^2 < 2^t`: word products of degree-`d`
/// packed polynomials that can be summed before some digit reaches `q`.
pub fn fqt_products_per_reduction(p: u64, d: usize, t: u32) -> u64 {
    let per = (d as u128 + 1) * sq(p);
    if t >= 127 {
        return u64::MAX;
    }
    (((1u128 << t) - 1) / per).min(u64::MAX as u128) as u64
}

/// Parameters for packed polynomial multiplication with degree-`d` words:
/// `t = floor(beta / (2d+1))` so a word product fits the budget, and
/// `n_max` set to [`fqt_products_per_reduction`].
pub fn fqt_params(p: u64, d: usize, beta: u32) -> Result<PackingParams> {
    check_modulus(p)?;
    check_beta(beta)?;
    let t = beta / (2 * d as u32 + 1);
    if t == 0 {
        return Err(Error::ParamsViolation(format!("no radix fits {} digits in {beta} bits", 2 * d + 1)));
    }
    let n_q = fqt_products_per_reduction(p, d, t);
    if n_q == 0 {
        return Err(Error::ParamsViolation(format!(
            "p={p}, d={d}: radix 2^{t} cannot hold one word product"
        )));
    }
    PackingParams::new(p, t, d, beta, n_q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyStrategy {
    Delayed,
    Fqt,
}

/// How the FQT radix is instantiated in the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadixModel {
    /// `q = 2^floor(beta / (2d+1))`, what the implementation uses.
    #[default]
    PowerOfTwo,
    /// `q = 2^(beta / (2d+1))` with a fractional exponent.
    RealExponent,
}

fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Multiply-adds of one REDQ compression over `k` digits: `ceil((k+1)/2)`.
pub fn redq_axpy_count(k: usize) -> u64 {
    (k as u64 + 2) / 2
}

/// Operation counts of a product of two degree-`n_deg` polynomials.
///
/// Delayed: `(2N+1)^2` multiply-adds and `(2N+1) ceil((2N+1)/n_d)`
/// single reductions. FQT with degree-`d` packing: with
/// `D_q = ceil((N+1)/(d+1)) - 1` and `n_q` the largest count with
/// `n_q (d+1) (p-1)^2 < q` (see [`fqt_params`]),
/// `(2D_q+1)^2` word multiply-adds and `(2D_q+1) ceil((2D_q+1)/n_q)`
/// REDQ over `2d+1` digits, each costing `d+1` further multiply-adds.
pub fn polymul_cost(p: u64, n_deg: u64, d: usize, beta: u32, strategy: PolyStrategy) -> Result<CostReport> {
    polymul_cost_with(p, n_deg, d, beta, strategy, RadixModel::PowerOfTwo)
}

pub fn polymul_cost_with(
    p: u64,
    n_deg: u64,
    d: usize,
    beta: u32,
    strategy: PolyStrategy,
    radix: RadixModel,
) -> Result<CostReport> {
    check_modulus(p)?;
    check_beta(beta)?;
    match strategy {
        PolyStrategy::Delayed => {
            let len = 2 * n_deg + 1;
            let n_d = delayed_bound(p, beta, true);
            let reductions = len * div_ceil(len, n_d);
            Ok(CostReport {
                mul_add_count: len * len,
                reduction_count: reductions,
                reduction_kind: ReductionKind::Redc,
                reduction_axpy_count: reductions,
                conversion_count: 0,
                table_access_count: 0,
            })
        }
        PolyStrategy::Fqt => {
            let words = div_ceil(n_deg + 1, d as u64 + 1) - 1;
            let len = 2 * words + 1;
            let per_digit = (d as u128 + 1) * sq(p);
            let n_q = match radix {
                RadixModel::PowerOfTwo => {
                    let t = beta / (2 * d as u32 + 1);
                    fqt_products_per_reduction(p, d, t)
                }
                RadixModel::RealExponent => {
                    let q = 2f64.powf(beta as f64 / (2 * d + 1) as f64);
                    ((q / per_digit as f64).ceil() as u64).saturating_sub(1)
                }
            };
            if n_q == 0 {
                return Err(Error::Infeasible(format!(
                    "p={p}, d={d}: radix cannot hold even one word product"
                )));
            }
            let reductions = len * div_ceil(len, n_q);
            let digits = 2 * d + 1;
            Ok(CostReport {
                mul_add_count: len * len,
                reduction_count: reductions,
                reduction_kind: ReductionKind::Redq(digits),
                reduction_axpy_count: reductions * redq_axpy_count(digits),
                conversion_count: 2 * (words + 1),
                table_access_count: reductions,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmmVariant {
    /// Middle product, both operands packed.
    Cmm,
    Right,
    Left,
    Full,
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Operation counts of an `m x k` by `k x n` product with compression `e`.
///
/// For `omega = 3` the counts are the classical triple-loop ones with ceiling
/// divisions for partial groups. For `omega < 3` only the asymptotic families
/// are meaningful; their leading terms are evaluated with unit constants.
/// For [`CmmVariant::Full`], `e` is the number of residues per word and each
/// side packs `floor(sqrt(e))` of them.
pub fn cmm_cost(m: u64, n: u64, k: u64, e: u64, omega: f64, variant: CmmVariant) -> Result<CostReport> {
    if e == 0 {
        return Err(Error::InvalidInput("compression must be positive".into()));
    }
    if !(omega > 2.0 && omega <= 3.0) {
        return Err(Error::InvalidInput(format!("omega {omega} outside (2, 3]")));
    }
    let classical = omega == 3.0;
    let side = isqrt(e);
    let real = |base: f64, x: f64, pow: f64| (base * x.powf(pow)).round() as u64;
    let (ops, reductions, kind) = match variant {
        CmmVariant::Cmm => {
            let ops = if classical {
                m * n * div_ceil(k, e)
            } else {
                real((m * n) as f64, k as f64 / e as f64, omega - 2.0)
            };
            (ops, m * n, ReductionKind::Redc)
        }
        CmmVariant::Right => {
            let ops = if classical {
                m * k * div_ceil(n, e)
            } else {
                real((m * k) as f64, n as f64 / e as f64, omega - 2.0)
            };
            (ops, m * div_ceil(n, e), ReductionKind::Redq(e as usize))
        }
        CmmVariant::Left => {
            let ops = if classical {
                n * k * div_ceil(m, e)
            } else {
                real((n * k) as f64, m as f64 / e as f64, omega - 2.0)
            };
            (ops, div_ceil(m, e) * n, ReductionKind::Redq(e as usize))
        }
        CmmVariant::Full => {
            let tiles = div_ceil(m, side) * div_ceil(n, side);
            let ops = if classical {
                k * tiles
            } else {
                real(k as f64, (m * n) as f64 / e as f64, (omega - 1.0) / 2.0)
            };
            (ops, tiles, ReductionKind::Redq(e as usize))
        }
    };
    Ok(CostReport {
        mul_add_count: ops,
        reduction_count: reductions,
        reduction_kind: kind,
        reduction_axpy_count: match kind {
            ReductionKind::Redc => reductions,
            ReductionKind::Redq(k) => reductions * redq_axpy_count(k),
        },
        conversion_count: div_ceil(m * n, e),
        table_access_count: 0,
    })
}
