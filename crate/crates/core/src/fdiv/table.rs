//! Result ranges and overflow bounds for the nine rounding-mode pairs.

use super::RoundingMode::{self, Down, NearestEven, Up};

/// Nonnegative rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    /// `r < num / den`, by cross-multiplication.
    pub fn exceeds(&self, r: u64) -> bool {
        (r as u128) * self.den < self.num
    }

    pub fn ceil(&self) -> u128 {
        self.num.div_ceil(self.den)
    }
}

/// Shape of the overflow bound, as a function of `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `2^beta / (4 + 2^(2-beta))`
    Quarter,
    /// `2^beta / (3 + 2^(1-beta))`
    Third,
    /// `2^(beta-1)`
    Half,
    /// `2^(beta-1) / (1 + 2^(-1-beta))`
    HalfNearest,
}

impl BoundKind {
    /// Exact value with numerator and denominator scaled to integers.
    pub fn ratio(&self, beta: u32) -> Ratio {
        let b = beta;
        match self {
            BoundKind::Quarter => Ratio { num: 1u128 << (2 * b - 2), den: (1u128 << b) + 1 },
            BoundKind::Third => Ratio { num: 1u128 << (2 * b - 1), den: 3 * (1u128 << (b - 1)) + 1 },
            BoundKind::Half => Ratio { num: 1u128 << (b - 1), den: 1 },
            BoundKind::HalfNearest => Ratio { num: 1u128 << (2 * b), den: (1u128 << (b + 1)) + 1 },
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            BoundKind::Quarter => "2^b/(4+2^(2-b))",
            BoundKind::Third => "2^b/(3+2^(1-b))",
            BoundKind::Half => "2^(b-1)",
            BoundKind::HalfNearest => "2^(b-1)/(1+2^(-1-b))",
        }
    }
}

/// One mode pair: `range_lo <= floor(x) - k <= range_hi`, and
/// `floor(x) <= k` whenever `r` is below the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseSpec {
    pub case_id: u8,
    pub mode1: RoundingMode,
    pub mode2: RoundingMode,
    pub range_lo: i8,
    pub range_hi: i8,
    pub bound: Option<BoundKind>,
    pub lost_bits: u8,
}

impl CaseSpec {
    pub fn bound_on_r(&self, beta: u32) -> Option<Ratio> {
        self.bound.map(|b| b.ratio(beta))
    }
}

const fn case(
    case_id: u8,
    mode1: RoundingMode,
    mode2: RoundingMode,
    range_lo: i8,
    range_hi: i8,
    bound: Option<BoundKind>,
    lost_bits: u8,
) -> CaseSpec {
    CaseSpec { case_id, mode1, mode2, range_lo, range_hi, bound, lost_bits }
}

pub const CASES: [CaseSpec; 9] = [
    case(1, Up, Up, 0, 1, Some(BoundKind::Quarter), 3),
    case(2, Up, NearestEven, 0, 1, Some(BoundKind::Third), 2),
    case(3, Up, Down, 0, 1, Some(BoundKind::Half), 1),
    case(4, NearestEven, Up, 0, 1, Some(BoundKind::Third), 2),
    case(5, NearestEven, NearestEven, -1, 1, Some(BoundKind::HalfNearest), 2),
    case(6, NearestEven, Down, -1, 0, None, 0),
    case(7, Down, Up, -1, 1, Some(BoundKind::Half), 1),
    case(8, Down, NearestEven, -1, 0, None, 0),
    case(9, Down, Down, -1, 0, None, 0),
];

pub fn case_spec(mode1: RoundingMode, mode2: RoundingMode) -> CaseSpec {
    *CASES
        .iter()
        .find(|c| c.mode1 == mode1 && c.mode2 == mode2)
        .expect("all nine pairs are listed")
}

pub fn case_spec_by_id(case_id: u8) -> Option<CaseSpec> {
    CASES.iter().find(|c| c.case_id == case_id).copied()
}
