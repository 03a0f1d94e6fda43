//! Scalar abstraction shared by the plain `f64` kernels and the reverse-mode
//! tape, so every hyperbolic operation is written once and can be evaluated
//! either directly or while recording gradients.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Lower clamp applied to the `arcosh` argument when taking its derivative.
pub const ACOSH_DERIV_FLOOR: f64 = 1.0 + 1e-12;

pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Primal value.
    fn value(self) -> f64;

    /// A constant living in the same evaluation context as `self`.
    fn constant(self, c: f64) -> Self;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
    /// `arcosh(max(x, 1))`.
    fn acosh(self) -> Self;
    fn asinh(self) -> Self;
    fn sigmoid(self) -> Self;
    /// `ln(1 + e^x)`.
    fn softplus(self) -> Self;
    fn relu(self) -> Self;
    fn leaky_relu(self, slope: f64) -> Self;
    fn max(self, other: Self) -> Self;
    fn clamp(self, lo: f64, hi: f64) -> Self;

    /// Sum of a non-empty slice.
    fn sum(xs: &[Self]) -> Self;
    /// Inner product of two non-empty slices of equal length.
    fn dot(a: &[Self], b: &[Self]) -> Self;
}

pub(crate) fn softplus_f64(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Real for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn constant(self, c: f64) -> Self {
        c
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn acosh(self) -> Self {
        f64::acosh(self.max(1.0))
    }
    #[inline]
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid_f64(self)
    }
    #[inline]
    fn softplus(self) -> Self {
        softplus_f64(self)
    }
    #[inline]
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    #[inline]
    fn leaky_relu(self, slope: f64) -> Self {
        if self > 0.0 {
            self
        } else {
            slope * self
        }
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    #[inline]
    fn clamp(self, lo: f64, hi: f64) -> Self {
        f64::clamp(self, lo, hi)
    }
    fn sum(xs: &[Self]) -> Self {
        xs.iter().sum()
    }
    fn dot(a: &[Self], b: &[Self]) -> Self {
        assert_eq!(a.len(), b.len(), "dot: length mismatch");
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}
