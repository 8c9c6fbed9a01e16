//! Polynomial smoothsteps and the standard mollifier.

use crate::scalar::{binomial, Scalar};

/// Smoothstep of order `n`: a polynomial ramp from 0 at `t <= 0` to 1 at
/// `t >= 1` whose first `n` derivatives vanish at both ends (class C^n).
///
/// Order 2 is the quintic `6t^5 - 15t^4 + 10t^3`.
pub fn smoothstep<T: Scalar>(order: usize, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let n = order;
    let mut acc = T::zero();
    let mut pow = T::one();
    for k in 0..=n {
        let c: T = binomial::<T>(n + k, k) * binomial::<T>(2 * n + 1, n - k);
        acc = acc + c * pow;
        pow = pow * (-t);
    }
    acc * t.powi(n as i32 + 1)
}

/// Derivative of [`smoothstep`] in `t`: `(2n+1) C(2n, n) t^n (1-t)^n`.
pub fn smoothstep_deriv<T: Scalar>(order: usize, t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let n = order;
    let c = T::from_usize_lossy(2 * n + 1) * binomial::<T>(2 * n, n);
    c * (t * (T::one() - t)).powi(n as i32)
}

/// Antiderivative of [`smoothstep`] vanishing at `t = 0`; linear past 1.
pub fn smoothstep_integral<T: Scalar>(order: usize, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let n = order;
    let eval = |t: T| {
        let mut acc = T::zero();
        for k in 0..=n {
            let c: T = binomial::<T>(n + k, k) * binomial::<T>(2 * n + 1, n - k);
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            acc = acc + sign * c * t.powi((n + 2 + k) as i32) / T::from_usize_lossy(n + 2 + k);
        }
        acc
    };
    if t >= T::one() {
        eval(T::one()) + (t - T::one())
    } else {
        eval(t)
    }
}

/// `exp(-1 / (1 - t^2))` on `|t| < 1`, zero elsewhere.
pub fn mollifier<T: Scalar>(t: T) -> T {
    let one = T::one();
    let u = one - t * t;
    if u <= T::zero() {
        T::zero()
    } else {
        (-(one / u)).exp()
    }
}

pub fn mollifier_deriv<T: Scalar>(t: T) -> T {
    let one = T::one();
    let u = one - t * t;
    if u <= T::zero() {
        T::zero()
    } else {
        let two = T::lit(2.0);
        -(two * t / (u * u)) * (-(one / u)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_matches_closed_form() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let q = 6.0 * t.powi(5) - 15.0 * t.powi(4) + 10.0 * t.powi(3);
            assert!((smoothstep(2, t) - q).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for order in 1..6 {
            for i in 1..20 {
                let t = i as f64 / 20.0;
                let h = 1e-6;
                let fd = (smoothstep(order, t + h) - smoothstep(order, t - h)) / (2.0 * h);
                assert!((fd - smoothstep_deriv(order, t)).abs() < 1e-6, "order {order} t={t}");
            }
        }
    }

    #[test]
    fn integral_of_quintic() {
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let exact = t.powi(6) - 3.0 * t.powi(5) + 2.5 * t.powi(4);
            assert!((smoothstep_integral(2, t) - exact).abs() < 1e-14);
        }
        // Symmetry about t = 1/2 puts half the unit area under the ramp.
        for order in 1..6 {
            assert!((smoothstep_integral(order, 1.0_f64) - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn smoothstep_is_symmetric() {
        for order in 1..6 {
            for i in 0..=10 {
                let t = i as f64 / 10.0;
                let s = smoothstep(order, t) + smoothstep(order, 1.0 - t);
                assert!((s - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mollifier_peak_and_support() {
        assert!((mollifier(0.0_f64) - (-1.0_f64).exp()).abs() < 1e-16);
        assert_eq!(mollifier(1.0_f64), 0.0);
        assert_eq!(mollifier(-1.5_f64), 0.0);
        let h = 1e-6;
        let fd = (mollifier(0.3 + h) - mollifier(0.3 - h)) / (2.0 * h);
        assert!((fd - mollifier_deriv(0.3f64)).abs() < 1e-8);
    }
}
