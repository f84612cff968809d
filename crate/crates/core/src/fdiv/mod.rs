//! Euclidean division by a reciprocal multiplication in floating point.
//!
//! `fdiv` computes `floor(o2(r * o1(1/p)))` for rounding modes `o1`, `o2`;
//! the result is within one of `k = floor(r / p)` and the exact range per
//! mode pair is listed in [`table`]. `applied_fdiv` picks the reciprocal
//! rounding that keeps the result at or above `k` for the active
//! multiplication mode, so one multiply-back test suffices and can be
//! skipped below a precomputed bound.
//!
//! Two backends: [`Sim`], an exact small-mantissa simulator, and
//! [`NativeDouble`], which gets directed rounding from FMA residuals instead
//! of switching the FPU mode.

pub mod scan;
pub mod sim;
pub mod table;

pub use scan::{exhaustive_check, ScanReport};
pub use sim::{sim_div, SimFloat};
pub use table::{case_spec, case_spec_by_id, CaseSpec, Ratio, CASES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoundingMode {
    Up,
    Down,
    NearestEven,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 3] = [RoundingMode::Up, RoundingMode::NearestEven, RoundingMode::Down];

    pub fn name(&self) -> &'static str {
        match self {
            RoundingMode::Up => "up",
            RoundingMode::Down => "down",
            RoundingMode::NearestEven => "nearest",
        }
    }

    fn slot(&self) -> usize {
        match self {
            RoundingMode::Up => 0,
            RoundingMode::NearestEven => 1,
            RoundingMode::Down => 2,
        }
    }
}

/// Floating-point arithmetic with a selectable rounding per operation.
pub trait FloatBackend {
    type Value: Copy + std::fmt::Debug;

    fn beta(&self) -> u32;
    /// Exact conversion of `r < 2^beta`.
    fn from_int(&self, r: u64) -> Self::Value;
    fn recip(&self, p: u64, mode: RoundingMode) -> Self::Value;
    fn mul(&self, a: Self::Value, b: Self::Value, mode: RoundingMode) -> Self::Value;
    fn floor(&self, x: Self::Value) -> u64;
}

/// Exact simulation with a `beta`-bit mantissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sim {
    pub beta: u32,
}

impl FloatBackend for Sim {
    type Value = SimFloat;

    fn beta(&self) -> u32 {
        self.beta
    }

    fn from_int(&self, r: u64) -> SimFloat {
        SimFloat::from_int(r, self.beta)
    }

    fn recip(&self, p: u64, mode: RoundingMode) -> SimFloat {
        SimFloat::from_ratio(1, p as u128, 0, mode, self.beta)
    }

    fn mul(&self, a: SimFloat, b: SimFloat, mode: RoundingMode) -> SimFloat {
        a.mul(&b, mode)
    }

    fn floor(&self, x: SimFloat) -> u64 {
        x.floor()
    }
}

/// Hardware `f64` in round-to-nearest mode.
///
/// Directed results are derived from the nearest one: the FMA residual
/// `fma(x, p, -1)` (or `fma(a, b, -a*b)` for products) is exact, and its sign
/// tells on which side of the exact value the nearest result fell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NativeDouble;

fn direct(nearest: f64, residual: f64, mode: RoundingMode) -> f64 {
    match mode {
        RoundingMode::NearestEven => nearest,
        // residual = computed - exact
        RoundingMode::Up if residual < 0.0 => nearest.next_up(),
        RoundingMode::Down if residual > 0.0 => nearest.next_down(),
        _ => nearest,
    }
}

impl FloatBackend for NativeDouble {
    type Value = f64;

    fn beta(&self) -> u32 {
        53
    }

    fn from_int(&self, r: u64) -> f64 {
        debug_assert!(r < 1 << 53);
        r as f64
    }

    fn recip(&self, p: u64, mode: RoundingMode) -> f64 {
        let pf = p as f64;
        let x = 1.0 / pf;
        // x p - 1 has the sign of x - 1/p.
        direct(x, x.mul_add(pf, -1.0), mode)
    }

    fn mul(&self, a: f64, b: f64, mode: RoundingMode) -> f64 {
        let y = a * b;
        // Exact: y - a b.
        direct(y, -a.mul_add(b, -y), mode)
    }

    fn floor(&self, x: f64) -> u64 {
        x.floor() as u64
    }
}

/// Runtime choice of backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sim(u32),
    NativeDouble,
}

/// `floor(o2(r * o1(1/p)))`.
pub fn fdiv<B: FloatBackend>(backend: &B, r: u64, p: u64, mode1: RoundingMode, mode2: RoundingMode) -> u64 {
    let invp = backend.recip(p, mode1);
    let x = backend.mul(backend.from_int(r), invp, mode2);
    backend.floor(x)
}

/// [`fdiv`] with the backend chosen at run time.
pub fn fdiv_dyn(backend: Backend, r: u64, p: u64, mode1: RoundingMode, mode2: RoundingMode) -> u64 {
    match backend {
        Backend::Sim(beta) => fdiv(&Sim { beta }, r, p, mode1, mode2),
        Backend::NativeDouble => fdiv(&NativeDouble, r, p, mode1, mode2),
    }
}

/// Reciprocals and correction thresholds per active multiplication mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversePack<V> {
    /// Reciprocal to use when multiplications round in the indexed mode.
    pub invp: [V; 3],
    /// Smallest `r` for which the result may exceed `floor(r / p)`.
    pub bound: [u64; 3],
}

impl<V: Copy> InversePack<V> {
    pub fn invp(&self, active: RoundingMode) -> V {
        self.invp[active.slot()]
    }

    pub fn bound(&self, active: RoundingMode) -> u64 {
        self.bound[active.slot()]
    }
}

/// Reciprocal rounding paired with each multiplication mode so that the
/// quotient never falls below `k`: nearest under up, up under nearest, up
/// under down.
pub fn paired_mode(active: RoundingMode) -> RoundingMode {
    match active {
        RoundingMode::Up => RoundingMode::NearestEven,
        RoundingMode::NearestEven | RoundingMode::Down => RoundingMode::Up,
    }
}

pub fn precompute_inverses<B: FloatBackend>(backend: &B, p: u64) -> InversePack<B::Value> {
    let beta = backend.beta();
    let mut invp = [backend.recip(p, RoundingMode::Up); 3];
    let mut bound = [0u64; 3];
    for active in RoundingMode::ALL {
        let spec = case_spec(paired_mode(active), active);
        invp[active.slot()] = backend.recip(p, spec.mode1);
        bound[active.slot()] = spec
            .bound_on_r(beta)
            .expect("paired cases carry a bound")
            .ceil()
            .min(u64::MAX as u128) as u64;
    }
    InversePack { invp, bound }
}

/// Exact `floor(r / p)` with at most one multiply-back correction, skipped
/// when `r` is below the bound for the active mode.
pub fn applied_fdiv<B: FloatBackend>(
    backend: &B,
    r: u64,
    p: u64,
    active: RoundingMode,
    inv: &InversePack<B::Value>,
) -> u64 {
    let x = backend.mul(backend.from_int(r), inv.invp(active), active);
    let y = backend.floor(x);
    if r >= inv.bound(active) && p as u128 * y as u128 > r as u128 {
        y - 1
    } else {
        y
    }
}
