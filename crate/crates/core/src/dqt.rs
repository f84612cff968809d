//! Kronecker substitution: packing residue vectors into one integer.
//!
//! A coefficient vector `[a_0, ..., a_d]` maps to `sum a_i q^i`. On the fast
//! path `q = 2^t` and the coefficient of `X^i` occupies bits `[i t, (i+1) t)`
//! of a `u64`. The [`reference`] submodule handles an arbitrary radix with
//! big integers.

use crate::params::PackingParams;
use crate::redq::{Redq, RedqConfig};
use crate::{Error, Result};

/// Packs `coeffs` into a word, coefficient `i` at bit offset `i t`.
pub fn pack(coeffs: &[u64], params: &PackingParams) -> Result<u64> {
    if coeffs.len() > params.k() {
        return Err(Error::InvalidInput(format!(
            "{} coefficients exceed the {} digits of a word",
            coeffs.len(),
            params.k()
        )));
    }
    let q = params.q();
    let mut w: u128 = 0;
    for (i, &c) in coeffs.iter().enumerate() {
        if c >= q {
            return Err(Error::InvalidInput(format!("coefficient {c} is not a digit below 2^{}", params.t)));
        }
        w |= (c as u128) << (i as u32 * params.t);
    }
    if w >> params.beta != 0 {
        return Err(Error::Overflow { beta: params.beta });
    }
    Ok(w as u64)
}

/// The low `count` base-`2^t` digits of `w`.
pub fn unpack(w: u64, count: usize, params: &PackingParams) -> Vec<u64> {
    unpack_radix(w, count, params.t)
}

pub(crate) fn unpack_radix(w: u64, count: usize, t: u32) -> Vec<u64> {
    let mask = if t >= 64 { u64::MAX } else { (1u64 << t) - 1 };
    (0..count)
        .map(|i| w.checked_shr(i as u32 * t).unwrap_or(0) & mask)
        .collect()
}

/// Dot product of two sequences of polynomials with at most `d + 1`
/// coefficients each, through one packed accumulator.
///
/// Returns the `2d + 1` coefficients of `sum v1[j] v2[j]` reduced mod `p`.
pub fn dot_dqt(v1: &[Vec<u64>], v2: &[Vec<u64>], params: &PackingParams) -> Result<Vec<u64>> {
    if v1.len() != v2.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} polynomials", v1.len(), v2.len())));
    }
    if v1.len() as u64 > params.n_max {
        return Err(Error::ParamsViolation(format!(
            "dot length {} exceeds n_max={}",
            v1.len(),
            params.n_max
        )));
    }
    let digits = 2 * params.k() - 1;
    if digits as u64 * params.t as u64 > params.beta as u64 {
        return Err(Error::ParamsViolation(format!(
            "{digits} product digits of {} bits exceed beta={}",
            params.t, params.beta
        )));
    }
    let mut acc: u64 = 0;
    for (a, b) in v1.iter().zip(v2) {
        let wa = pack(a, params)?;
        let wb = pack(b, params)?;
        acc += wa * wb;
    }
    let redq = Redq::new(params.p, params.t, digits, &RedqConfig::default())?;
    let mut out = vec![0; digits];
    redq.reduce_into(acc, &mut out);
    Ok(out)
}

/// Arbitrary-radix packing over big integers, used for decimal examples and
/// as an oracle for the fast path.
pub mod reference {
    use num_bigint::BigUint;
    use num_traits::{ToPrimitive, Zero};

    use crate::redq::{compress_big, correct};
    use crate::{Error, Result};

    /// Horner evaluation of `coeffs` at `q`.
    pub fn pack(coeffs: &[u64], q: &BigUint) -> BigUint {
        coeffs
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &c| acc * q + BigUint::from(c))
    }

    /// The low `count` base-`q` digits of `w`.
    pub fn unpack(w: &BigUint, q: &BigUint, count: usize) -> Vec<BigUint> {
        let mut rest = w.clone();
        (0..count)
            .map(|_| {
                let digit = &rest % q;
                rest = &rest / q;
                digit
            })
            .collect()
    }

    /// Unpacks and reduces each digit mod `p`: the oracle for REDQ.
    pub fn digits_mod(w: &BigUint, q: &BigUint, count: usize, p: u64) -> Vec<u64> {
        let p = BigUint::from(p);
        unpack(w, q, count)
            .iter()
            .map(|d| (d % &p).to_u64().unwrap())
            .collect()
    }

    /// Dot product of polynomials with `k` coefficients each over radix `q`,
    /// reduced by REDQ on the big-integer accumulator.
    pub fn dot_dqt(v1: &[Vec<u64>], v2: &[Vec<u64>], p: u64, q: &BigUint, k: usize) -> Result<Vec<u64>> {
        if v1.len() != v2.len() {
            return Err(Error::DimensionMismatch(format!("{} vs {} polynomials", v1.len(), v2.len())));
        }
        if v1.iter().chain(v2).any(|c| c.len() > k) {
            return Err(Error::InvalidInput(format!("polynomial with more than {k} coefficients")));
        }
        let acc = v1
            .iter()
            .zip(v2)
            .fold(BigUint::zero(), |acc, (a, b)| acc + pack(a, q) * pack(b, q));
        let u = compress_big(&acc, p, q, 2 * k - 2);
        let q_mod_p = (q % p).to_u64().unwrap();
        Ok(correct(&u, p, q_mod_p))
    }
}
