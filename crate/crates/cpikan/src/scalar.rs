//! Scalar abstraction shared by the plain-`f64` and tape-recorded evaluation paths.
//!
//! Network forward passes, Chebyshev recurrences, and PDE residual operators are
//! written once, generic over [`Scalar`]. Instantiated with `f64` they evaluate
//! values (and, through [`crate::jet::Jet`], exact input derivatives); instantiated
//! with [`crate::tape::Var`] the same code records the computation on a gradient
//! tape so that parameter gradients come out of a single reverse sweep.

use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Current numeric value (first batch entry for vector-valued tape nodes).
    fn value(self) -> f64;

    /// Multiply by a compile-time-known constant.
    fn scale(self, c: f64) -> Self;

    /// Add a compile-time-known constant.
    fn shift(self, c: f64) -> Self;

    fn tanh(self) -> Self;

    /// Dot product `sum_i coeffs[i] * vals[i]`, fused into a single tape node
    /// for the recorded path. Both slices must have equal, nonzero length.
    fn dot(coeffs: &[Self], vals: &[Self]) -> Self;

    /// Sum of the given terms in slice order. Must not be called on an empty slice.
    fn sum(terms: &[Self]) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }

    #[inline]
    fn shift(self, c: f64) -> Self {
        self + c
    }

    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }

    #[inline]
    fn dot(coeffs: &[Self], vals: &[Self]) -> Self {
        debug_assert_eq!(coeffs.len(), vals.len());
        coeffs.iter().zip(vals).map(|(c, v)| c * v).sum()
    }

    #[inline]
    fn sum(terms: &[Self]) -> Self {
        terms.iter().sum()
    }
}
