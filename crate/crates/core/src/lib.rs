//! Flat C3 geometries over `(R, H)` and `(C, O)`: octonion arithmetic, sharp
//! morphisms, incidence, replayable path homotopies and the line invariant.

use std::sync::atomic::{AtomicU64, Ordering};

pub mod algebra;
pub mod canonical;
pub mod error;
pub mod geometry;
pub mod homotopy;
pub mod io;
pub mod linalg;
pub mod morphism;
pub mod par;
pub mod rng;
pub mod suite;

pub use algebra::{AlgElement, AlgebraTag, Field, PureVector, Scalar, Variant};
pub use error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Process-wide default absolute tolerance.
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

pub fn set_tolerance(tol: f64) {
    assert!(tol > 0.0 && tol.is_finite());
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

#[cfg(test)]
mod tests {
    #[test]
    fn default_tolerance() {
        assert_eq!(super::tolerance(), super::DEFAULT_TOL);
    }
}
