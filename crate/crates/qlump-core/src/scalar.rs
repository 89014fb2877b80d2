//! Scalar abstraction and the global tolerance policy.
//!
//! All numerical code in this crate is generic over the real scalar type
//! through the [`Real`] trait (satisfied by `f32` and `f64`); amplitudes
//! are `num_complex::Complex` over that scalar. Concrete aliases for the
//! common `f64` instantiation live at the crate root.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

use crate::error::{Error, Result};

/// Real scalar type underlying all amplitudes.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for literals and tolerances.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must convert into the scalar type")
    }

    /// Exact bit pattern, used for exact-match operation-cache keys.
    fn key_bits(self) -> u64 {
        // f32 -> f64 is lossless, so both supported scalars round-trip.
        self.to_f64().expect("scalar must convert to f64").to_bits()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over the scalar `T`.
pub type C<T> = Complex<T>;

/// `a ≈ b` under the amplitude tolerance: `|a - b| <= eps`.
pub fn amp_approx_eq<T: Real>(a: C<T>, b: C<T>, eps: T) -> bool {
    (a - b).norm_sqr() <= eps * eps
}

/// Comparison tolerances used across the whole pipeline.
///
/// * `eps_amp` — scalar (amplitude) equality and decision-diagram
///   node-merging grid.
/// * `eps_norm` — normalization and orthonormality checks.
/// * `eps_rank` — linear-dependence cutoff in Gram-Schmidt and in the
///   rank oracle.
/// * `eps_unitary` — allowed residual of `M†M - I` for reduced maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy<T> {
    pub eps_amp: T,
    pub eps_norm: T,
    pub eps_rank: T,
    pub eps_unitary: T,
}

impl<T: Real> Default for TolerancePolicy<T> {
    fn default() -> Self {
        // Defaults are tuned for f64; double-precision Krylov iterations
        // lose roughly three digits over ~1e3 steps, hence the 1e-9 group.
        TolerancePolicy {
            eps_amp: T::of(1e-12),
            eps_norm: T::of(1e-9),
            eps_rank: T::of(1e-9),
            eps_unitary: T::of(1e-9),
        }
    }
}

impl<T: Real> TolerancePolicy<T> {
    /// Validated constructor: all tolerances strictly positive and
    /// `eps_rank >= eps_amp`.
    pub fn new(eps_amp: T, eps_norm: T, eps_rank: T, eps_unitary: T) -> Result<Self> {
        let pol = TolerancePolicy {
            eps_amp,
            eps_norm,
            eps_rank,
            eps_unitary,
        };
        pol.validate()?;
        Ok(pol)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_amp > T::zero()
            && self.eps_norm > T::zero()
            && self.eps_rank > T::zero()
            && self.eps_unitary > T::zero();
        if !ok {
            return Err(Error::domain("tolerances must be strictly positive"));
        }
        if self.eps_rank < self.eps_amp {
            return Err(Error::domain("eps_rank must be at least eps_amp"));
        }
        Ok(())
    }

    /// Replace the rank cutoff (CLI `--tol-rank`).
    pub fn with_eps_rank(mut self, eps_rank: T) -> Result<Self> {
        self.eps_rank = eps_rank;
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_policy_is_valid() {
        TolerancePolicy::<f64>::default().validate().unwrap();
        TolerancePolicy::<f32>::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_and_inverted_tolerances() {
        assert!(TolerancePolicy::new(0.0, 1e-9, 1e-9, 1e-9).is_err());
        assert!(TolerancePolicy::new(1e-6, 1e-9, 1e-9, 1e-9).is_err());
        assert!(TolerancePolicy::new(1e-12, 1e-9, 1e-9, 1e-9).is_ok());
    }

    #[test]
    fn amp_comparison_uses_modulus() {
        let eps = 1e-12;
        let a = C::new(1.0, 0.0);
        assert!(amp_approx_eq(a, C::new(1.0 + 0.9e-12, 0.0), eps));
        assert!(!amp_approx_eq(a, C::new(1.0 + 2e-12, 0.0), eps));
    }
}
