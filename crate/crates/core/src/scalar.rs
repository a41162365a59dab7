//! Scalar abstraction for the numeric core.
//!
//! Every formula in this crate is generic over a floating-point scalar so
//! the same code runs in `f32` or `f64`. [`Real`] bundles the `num-traits`
//! capabilities the math actually uses and adds two conversion helpers that
//! keep generic code readable: `F::of(0.5)` instead of a chain of
//! `from(...)` calls, and `x.as_f64()` at reporting boundaries.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Implemented for `f32` and `f64` via the blanket impl; anything that
/// satisfies the bounds (a `Float` with constants, primitive conversions,
/// and thread-safety) picks it up automatically.
pub trait Real:
    Float + FloatConst + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable in the scalar type")
    }

    /// Converts a `usize` count into this scalar.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize count must be representable in the scalar type")
    }

    /// Widens (or round-trips) into `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must widen into f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_round_trips_for_both_widths() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25_f32);
        assert_eq!(f64::of_usize(41), 41.0);
        assert_eq!(0.5_f32.as_f64(), 0.5);
    }

    fn generic_norm<F: Real>(x: F, y: F) -> F {
        (x * x + y * y).sqrt()
    }

    #[test]
    fn generic_code_compiles_and_agrees_across_widths() {
        let wide = generic_norm(3.0_f64, 4.0_f64);
        let narrow = generic_norm(3.0_f32, 4.0_f32);
        assert_eq!(wide, 5.0);
        assert_eq!(narrow, 5.0_f32);
    }
}
