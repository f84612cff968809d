//! Exhaustive certification of a rounding-mode case at small `beta`.

use super::table::case_spec_by_id;
use super::{FloatBackend, RoundingMode, Sim};
use crate::par::Exec;
use crate::{Error, Result};

/// A pair `(r, p)`.
pub type Pair = (u64, u64);

/// Findings of a scan over all `0 <= r < 2^beta`, `1 <= p < 2^beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub case_id: u8,
    pub beta: u32,
    pub mode1: RoundingMode,
    pub mode2: RoundingMode,
    pub pairs_checked: u64,
    /// Pairs whose result falls outside the case range (first few).
    pub range_violations: Vec<Pair>,
    /// Pairs below the overflow bound whose result still exceeds `k` (first few).
    pub bound_violations: Vec<Pair>,
    pub range_violation_count: u64,
    pub bound_violation_count: u64,
    /// First pair (by `p`, then `r`) with result `k - 1`.
    pub k_minus_1_witness: Option<Pair>,
    /// First pair (by `p`, then `r`) with result `k + 1`.
    pub k_plus_1_witness: Option<Pair>,
    /// Smallest `r` with result above `k`: the empirical overflow bound.
    pub first_overflow_r: Option<u64>,
}

/// Largest `beta` accepted by [`exhaustive_check`].
pub const MAX_SCAN_BETA: u32 = 16;
const MAX_SAMPLES: usize = 16;

#[derive(Default)]
struct Partial {
    range: Vec<Pair>,
    bound: Vec<Pair>,
    range_count: u64,
    bound_count: u64,
    minus: Option<Pair>,
    plus: Option<Pair>,
    overflow: Option<u64>,
}

pub fn exhaustive_check(beta: u32, case_id: u8) -> Result<ScanReport> {
    exhaustive_check_with(beta, case_id, Exec::default())
}

pub fn exhaustive_check_with(beta: u32, case_id: u8, exec: Exec) -> Result<ScanReport> {
    if !(4..=MAX_SCAN_BETA).contains(&beta) {
        return Err(Error::InvalidInput(format!("scan beta {beta} outside 4..=16")));
    }
    let spec = case_spec_by_id(case_id)
        .ok_or_else(|| Error::InvalidInput(format!("case {case_id} outside 1..=9")))?;
    let sim = Sim { beta };
    let bound = spec.bound_on_r(beta);
    let top = 1u64 << beta;
    let parts = exec.map((top - 1) as usize, |i| {
        let p = i as u64 + 1;
        let invp = sim.recip(p, spec.mode1);
        let mut part = Partial::default();
        for r in 0..top {
            let x = sim.floor(sim.mul(sim.from_int(r), invp, spec.mode2));
            let k = r / p;
            let diff = x as i64 - k as i64;
            if diff < spec.range_lo as i64 || diff > spec.range_hi as i64 {
                part.range_count += 1;
                if part.range.len() < MAX_SAMPLES {
                    part.range.push((r, p));
                }
            }
            if diff > 0 {
                if let Some(b) = bound {
                    if b.exceeds(r) {
                        part.bound_count += 1;
                        if part.bound.len() < MAX_SAMPLES {
                            part.bound.push((r, p));
                        }
                    }
                }
                part.overflow = Some(part.overflow.map_or(r, |o: u64| o.min(r)));
            }
            if diff == -1 && part.minus.is_none() {
                part.minus = Some((r, p));
            }
            if diff == 1 && part.plus.is_none() {
                part.plus = Some((r, p));
            }
        }
        part
    });
    let mut report = ScanReport {
        case_id,
        beta,
        mode1: spec.mode1,
        mode2: spec.mode2,
        pairs_checked: top * (top - 1),
        range_violations: Vec::new(),
        bound_violations: Vec::new(),
        range_violation_count: 0,
        bound_violation_count: 0,
        k_minus_1_witness: None,
        k_plus_1_witness: None,
        first_overflow_r: None,
    };
    for part in parts {
        report.range_violation_count += part.range_count;
        report.bound_violation_count += part.bound_count;
        extend_capped(&mut report.range_violations, part.range);
        extend_capped(&mut report.bound_violations, part.bound);
        report.k_minus_1_witness = report.k_minus_1_witness.or(part.minus);
        report.k_plus_1_witness = report.k_plus_1_witness.or(part.plus);
        report.first_overflow_r = match (report.first_overflow_r, part.overflow) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    Ok(report)
}

fn extend_capped(dst: &mut Vec<Pair>, src: Vec<Pair>) {
    let room = MAX_SAMPLES.saturating_sub(dst.len());
    dst.extend(src.into_iter().take(room));
}

impl ScanReport {
    pub fn is_clean(&self) -> bool {
        self.range_violation_count == 0 && self.bound_violation_count == 0
    }

    /// Every nonzero endpoint of the case range was observed.
    pub fn endpoints_attained(&self) -> bool {
        let spec = case_spec_by_id(self.case_id).expect("valid case");
        (spec.range_lo == 0 || self.k_minus_1_witness.is_some())
            && (spec.range_hi == 0 || self.k_plus_1_witness.is_some())
    }
}
