//! Floating point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the whole crate is generic over: `f32` or `f64`.
///
/// The FFT-based norms need [`rustfft::FftNum`], which is only implemented
/// for the two primitive floats, so the trait is sealed to those.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + private::Sealed
    + 'static
{
    /// Converts an `f64` literal. Never fails for the sealed impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar to f64")
    }

    /// Relative tolerance that is meaningful at this precision.
    fn tolerance() -> Self;
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

mod private {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Raises a nonnegative value to `p`, treating `p = 1` and `p = 2` exactly.
#[inline]
pub fn pow_abs<T: Scalar>(x: T, p: T) -> T {
    let a = x.abs();
    if p == T::one() {
        a
    } else if p == T::lit(2.0) {
        a * a
    } else {
        a.powf(p)
    }
}

/// Inverse of [`pow_abs`] for nonnegative inputs.
#[inline]
pub fn root<T: Scalar>(x: T, p: T) -> T {
    if p == T::one() {
        x
    } else if p == T::lit(2.0) {
        x.sqrt()
    } else {
        x.powf(p.recip())
    }
}

/// Binomial coefficient as a scalar.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    T::lit(c.round())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_for_small_inputs() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        let naive: f64 = v.iter().sum();
        assert_eq!(pairwise_sum(&v), naive);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial::<f64>(3, 0), 1.0);
        assert_eq!(binomial::<f64>(3, 1), 3.0);
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f32>(5, 5), 1.0);
    }

    #[test]
    fn pow_and_root_invert() {
        for &p in &[0.5, 1.0, 2.0, 3.5] {
            let x = 1.7_f64;
            assert!((root(pow_abs(x, p), p) - x).abs() < 1e-14);
        }
    }
}
