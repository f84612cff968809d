//! Nonnegative binary floating-point numbers with a configurable mantissa.
//!
//! Every operation computes the exact rational result and rounds it once,
//! so a `SimFloat` with `beta = 53` behaves like an IEEE double on the
//! values that FDIV produces (no subnormals, no overflow).

use super::RoundingMode;

/// Largest mantissa width supported; exact intermediates must fit `u128`.
pub const MAX_SIM_BETA: u32 = 53;

/// `mantissa * 2^exponent` with `mantissa` in `[2^(beta-1), 2^beta)`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimFloat {
    pub mantissa: u64,
    pub exponent: i32,
    pub beta: u32,
}

fn bitlen(x: u128) -> i32 {
    128 - x.leading_zeros() as i32
}

impl SimFloat {
    pub fn zero(beta: u32) -> Self {
        Self { mantissa: 0, exponent: 0, beta }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// Correctly rounded `num / den * 2^exp2`.
    pub fn from_ratio(num: u128, den: u128, exp2: i32, mode: RoundingMode, beta: u32) -> Self {
        assert!((2..=MAX_SIM_BETA).contains(&beta), "mantissa width {beta} unsupported");
        assert!(den > 0, "zero denominator");
        if num == 0 {
            return Self::zero(beta);
        }
        // Shift s such that floor(num 2^s / den) lands in [2^(beta-1), 2^beta).
        let mut s = beta as i32 - 1 - (bitlen(num) - bitlen(den));
        let (mut q, mut rem, mut d) = scaled_div(num, den, s);
        if q < 1u128 << (beta - 1) {
            s += 1;
            (q, rem, d) = scaled_div(num, den, s);
        }
        debug_assert!(q >= 1u128 << (beta - 1) && q < 1u128 << beta);
        let round_up = match mode {
            RoundingMode::Down => false,
            RoundingMode::Up => rem > 0,
            RoundingMode::NearestEven => {
                let twice = 2 * rem;
                twice > d || (twice == d && q & 1 == 1)
            }
        };
        let mut exponent = exp2 - s;
        if round_up {
            q += 1;
            if q == 1u128 << beta {
                q >>= 1;
                exponent += 1;
            }
        }
        Self { mantissa: q as u64, exponent, beta }
    }

    /// Exact conversion of an integer below `2^beta`.
    pub fn from_int(r: u64, beta: u32) -> Self {
        assert!(r < 1u64 << beta, "{r} is not representable with {beta} bits");
        Self::from_ratio(r as u128, 1, 0, RoundingMode::Down, beta)
    }

    /// Correctly rounded product.
    pub fn mul(&self, other: &Self, mode: RoundingMode) -> Self {
        debug_assert_eq!(self.beta, other.beta);
        Self::from_ratio(
            self.mantissa as u128 * other.mantissa as u128,
            1,
            self.exponent + other.exponent,
            mode,
            self.beta,
        )
    }

    /// `floor(self)`; the value must be below `2^64`.
    pub fn floor(&self) -> u64 {
        if self.exponent >= 0 {
            self.mantissa << self.exponent
        } else if self.exponent <= -64 {
            0
        } else {
            self.mantissa >> -self.exponent
        }
    }

    /// The exact value as `(mantissa, exponent)`, meaning `mantissa * 2^exponent`.
    pub fn to_dyadic(&self) -> (u128, i32) {
        (self.mantissa as u128, self.exponent)
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 * 2f64.powi(self.exponent)
    }
}

fn scaled_div(num: u128, den: u128, s: i32) -> (u128, u128, u128) {
    let (n, d) = if s >= 0 {
        (num.checked_shl(s as u32).filter(|v| v >> s == num).expect("simulator overflow"), den)
    } else {
        (num, den.checked_shl((-s) as u32).filter(|v| v >> -s == den).expect("simulator overflow"))
    };
    (n / d, n % d, d)
}

/// `mode`-rounded `r / p` with a `beta`-bit mantissa.
pub fn sim_div(r: u64, p: u64, mode: RoundingMode, beta: u32) -> SimFloat {
    SimFloat::from_ratio(r as u128, p as u128, 0, mode, beta)
}
