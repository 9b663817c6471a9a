//! Floating-point scalar abstraction.
//!
//! Every dense routine in the crate is generic over [`Real`]. Each precision
//! carries its own tolerance policy so that the same algorithm can be run in
//! `f32` for speed checks and in `f64` for certification.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar usable as the component type of the dense complex matrices.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Relative singular-value cutoff for numerical rank. The absolute
    /// threshold is `max(rows, cols) * sigma_max * rank_eps()`.
    fn rank_eps() -> Self;

    /// Tolerance for structural identities (orthonormality, Hermiticity,
    /// trace preservation).
    fn structure_tol() -> Self;

    /// Default tolerance on the Knill-Laflamme residual and on the
    /// reference/environment product deviation.
    fn correctability_tol() -> Self;

    /// Tolerance for reconstruction and state-normalization checks.
    fn reconstruction_tol() -> Self;

    /// Converts an `f64` literal. Panics only for values not representable
    /// at all, which never happens for the literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target precision")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn rank_eps() -> Self {
        1e-10
    }
    fn structure_tol() -> Self {
        1e-10
    }
    fn correctability_tol() -> Self {
        1e-8
    }
    fn reconstruction_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn rank_eps() -> Self {
        1e-5
    }
    fn structure_tol() -> Self {
        1e-4
    }
    fn correctability_tol() -> Self {
        1e-3
    }
    fn reconstruction_tol() -> Self {
        1e-4
    }
}

/// Complex number over a [`Real`] component.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `i^k` for `k` taken mod 4.
#[inline]
pub(crate) fn i_pow<T: Real>(k: u8) -> Complex<T> {
    match k & 3 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}
