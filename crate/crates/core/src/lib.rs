//! Packed arithmetic over small prime fields.
//!
//! Several residues modulo a small prime `p` are stored in one machine word by
//! evaluating their polynomial at `q = 2^t` (Kronecker substitution). Ring
//! operations then run directly on the packed words, with reductions delayed
//! for as long as the digit bounds allow, and all residues of a word are
//! recovered together by REDQ: one division by `p` followed by a cheap
//! digit-coupling correction.
//!
//! Module map:
//!
//! - [`params`]: every packing bound, parameter selection and cost model.
//! - [`dqt`]: the packing codec and the packed dot product.
//! - [`redq`]: simultaneous reduction (compression, correction, tables).
//! - [`fdiv`]: exact Euclidean division through floating-point reciprocals,
//!   with a small-mantissa simulator covering all rounding-mode pairs.
//! - [`polymul`]: polynomial multiplication, delayed and packed (FQT).
//! - [`gfext`]: small extension fields with tabulated packing and the fast
//!   dot product.
//! - [`cmm`]: compressed matrix multiplication in its four variants.
//!
//! Data-parallel loops go through [`par::Exec`]; with the default `parallel`
//! feature they run on rayon, otherwise sequentially.

pub mod cmm;
pub mod dqt;
mod error;
pub mod fdiv;
pub mod gfext;
pub mod kernel;
pub mod par;
pub mod params;
pub mod polymul;
pub mod redq;

pub use error::{Error, Result};
