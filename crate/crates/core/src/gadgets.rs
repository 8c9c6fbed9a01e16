//! Witness functions used by the boundedness arguments: a unit plateau bump,
//! the ramp function `eta_eps`, a linear cutoff with identity core, and the
//! zigzag whose derivative alternates between `+1` and `-1` plateaus.
//!
//! The textbook versions are C^inf; here transitions are polynomial
//! smoothsteps. Bumps and cutoffs use order [`GADGET_SMOOTHNESS`] (C^4, enough
//! for every difference order up to 3 used in the norms); the zigzag uses the
//! quintic (C^2) smoothstep of width `m/2`.

use serde::{Deserialize, Serialize};

use crate::catalog::FunctionSpec;
use crate::error::{LabError, Result};
use crate::grid::{sample_on, Grid, GridFunction};
use crate::scalar::Scalar;
use crate::smooth::{smoothstep, smoothstep_deriv, smoothstep_integral};

pub const GADGET_SMOOTHNESS: usize = 4;
const ZIGZAG_SMOOTHNESS: usize = 2;

/// Shape of the two ramps of `eta_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// Straight ramps: the weak derivative is exactly
    /// `(chi_[-1-eps,-1] - chi_[1,1+eps]) / eps`.
    Linear,
    /// Smoothstep ramps of the same width and unit area under the derivative.
    #[default]
    Smooth,
}

/// Gadget kinds with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GadgetSpec {
    UnitBump { a: f64 },
    EtaEps { eps: f64, ramp: Ramp },
    LinearCutoff { a: f64, r: f64 },
    Zigzag { m: usize },
}

impl GadgetSpec {
    pub fn realize<T: Scalar>(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        match *self {
            GadgetSpec::UnitBump { a } => unit_bump(grid, T::lit(a)),
            GadgetSpec::EtaEps { eps, ramp } => eta_eps(grid, T::lit(eps), ramp),
            GadgetSpec::LinearCutoff { a, r } => linear_cutoff(grid, T::lit(a), T::lit(r)),
            GadgetSpec::Zigzag { m } => zigzag_g(grid, m).map(|z| z.g),
        }
    }
}

// ---------------------------------------------------------------------------
// Analytic definitions

/// Plateau `1` on `[a, a+1]`, support `[a-1, a+2]`.
pub fn unit_bump_value<T: Scalar>(a: T, x: T) -> T {
    let u = x - a;
    let one = T::one();
    if u <= -one || u >= T::lit(2.0) {
        T::zero()
    } else if u < T::zero() {
        smoothstep(GADGET_SMOOTHNESS, u + one)
    } else if u <= one {
        one
    } else {
        one - smoothstep(GADGET_SMOOTHNESS, u - one)
    }
}

pub fn unit_bump_deriv<T: Scalar>(a: T, x: T) -> T {
    let u = x - a;
    let one = T::one();
    if u > -one && u < T::zero() {
        smoothstep_deriv(GADGET_SMOOTHNESS, u + one)
    } else if u > one && u < T::lit(2.0) {
        -smoothstep_deriv(GADGET_SMOOTHNESS, u - one)
    } else {
        T::zero()
    }
}

/// `1` on `[-1, 1]`, ramps of width `eps` down to `0` at `+-(1 + eps)`.
pub fn eta_value<T: Scalar>(eps: T, ramp: Ramp, x: T) -> T {
    let one = T::one();
    let d = x.abs() - one;
    if d <= T::zero() {
        return one;
    }
    if d >= eps {
        return T::zero();
    }
    let t = d / eps;
    match ramp {
        Ramp::Linear => one - t,
        Ramp::Smooth => one - smoothstep(GADGET_SMOOTHNESS, t),
    }
}

pub fn eta_deriv<T: Scalar>(eps: T, ramp: Ramp, x: T) -> T {
    let one = T::one();
    let d = x.abs() - one;
    if d <= T::zero() || d >= eps {
        return T::zero();
    }
    let sign = if x > T::zero() { -one } else { one };
    match ramp {
        Ramp::Linear => sign / eps,
        Ramp::Smooth => sign * smoothstep_deriv(GADGET_SMOOTHNESS, d / eps) / eps,
    }
}

/// `x - a` on `[a-r, a+r]`, smoothly cut to zero over unit-width collars.
pub fn linear_cutoff_value<T: Scalar>(a: T, r: T, x: T) -> T {
    let u = x - a;
    let au = u.abs();
    if au <= r {
        u
    } else if au < r + T::one() {
        u * (T::one() - smoothstep(GADGET_SMOOTHNESS, au - r))
    } else {
        T::zero()
    }
}

pub fn linear_cutoff_deriv<T: Scalar>(a: T, r: T, x: T) -> T {
    let u = x - a;
    let au = u.abs();
    if au <= r {
        T::one()
    } else if au < r + T::one() {
        let t = au - r;
        (T::one() - smoothstep(GADGET_SMOOTHNESS, t)) - au * smoothstep_deriv(GADGET_SMOOTHNESS, t)
    } else {
        T::zero()
    }
}

/// Splits `x` into the nearest plateau index `k` and offset `d` in
/// `[-4m, 4m]` from the plateau center `8km`.
fn zigzag_frame<T: Scalar>(m: T, x: T) -> (i64, T) {
    let period = T::lit(8.0) * m;
    let k = (x / period).round();
    (k.to_i64().unwrap_or(0), x - k * period)
}

fn parity_sign<T: Scalar>(k: i64) -> T {
    if k.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `g'` for the zigzag: `(-1)^k` on `[2(4k-1)m, 2(4k+1)m]`, with a quintic
/// transition of width `m/2` centered between consecutive plateaus.
pub fn zigzag_deriv<T: Scalar>(m: T, x: T) -> T {
    let (k, d) = zigzag_frame(m, x);
    let sigma: T = parity_sign(k);
    let w = m / T::lit(2.0);
    let edge = T::lit(4.0) * m - w / T::lit(2.0);
    let ad = d.abs();
    if ad <= edge {
        sigma
    } else {
        let t = (ad - edge) / w;
        sigma * (T::one() - T::lit(2.0) * smoothstep(ZIGZAG_SMOOTHNESS, t))
    }
}

/// The zigzag `g` itself, `g(0) = 0`; bounded by `4m`.
pub fn zigzag_value<T: Scalar>(m: T, x: T) -> T {
    let (k, d) = zigzag_frame(m, x);
    let sigma: T = parity_sign(k);
    let w = m / T::lit(2.0);
    let edge = T::lit(4.0) * m - w / T::lit(2.0);
    let ad = d.abs();
    let h = if ad <= edge {
        ad
    } else {
        let tau = ad - edge;
        edge + tau - T::lit(2.0) * w * smoothstep_integral(ZIGZAG_SMOOTHNESS, tau / w)
    };
    sigma * d.signum() * h
}

// ---------------------------------------------------------------------------
// Grid constructors

fn require_inside<T: Scalar>(grid: &Grid<T>, lo: T, hi: T, what: &str) -> Result<()> {
    let (a, b) = grid.window();
    if lo < a || hi > b {
        return Err(LabError::OutOfWindow(format!("{what} needs [{lo}, {hi}] inside the window [{a}, {b}]")));
    }
    Ok(())
}

/// Smooth `f_a` with `f_a = 1` on `[a, a+1]` and support `[a-1, a+2]`.
pub fn unit_bump<T: Scalar>(grid: &Grid<T>, a: T) -> Result<GridFunction<T>> {
    require_inside(grid, a - T::one(), a + T::lit(2.0), "unit_bump")?;
    sample_on(&FunctionSpec::UnitBump { a: a.to_f64_lossy() }, grid)
}

/// `eta_eps`: 1 on `[-1, 1]`, support `[-1-eps, 1+eps]`.
pub fn eta_eps<T: Scalar>(grid: &Grid<T>, eps: T, ramp: Ramp) -> Result<GridFunction<T>> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(LabError::BelowResolution(format!("eps = {eps} must lie in (0, 1]")));
    }
    if eps < T::lit(2.0) * grid.spacing {
        return Err(LabError::BelowResolution(format!("eps = {eps} below twice the grid spacing {}", grid.spacing)));
    }
    require_inside(grid, -T::one() - eps, T::one() + eps, "eta_eps")?;
    sample_on(&FunctionSpec::eta(eps.to_f64_lossy(), ramp), grid)
}

/// `f_a(x) = x - a` on `[a-R, a+R]`, support `[a-R-1, a+R+1]`.
pub fn linear_cutoff<T: Scalar>(grid: &Grid<T>, a: T, r: T) -> Result<GridFunction<T>> {
    if !(r > T::zero()) {
        return Err(LabError::OutOfWindow(format!("R = {r} must be positive")));
    }
    require_inside(grid, a - r - T::one(), a + r + T::one(), "linear_cutoff")?;
    sample_on(&FunctionSpec::LinearCutoff { a: a.to_f64_lossy(), r: r.to_f64_lossy() }, grid)
}

/// The zigzag witness together with its index sets.
#[derive(Debug, Clone)]
pub struct Zigzag<T> {
    pub m: usize,
    pub g: GridFunction<T>,
}

impl<T: Scalar> Zigzag<T> {
    /// Whether `x` lies in `I_m + 2 l m`, where
    /// `I_m = U_k [2(4k-1)m + m, 2(4k+1)m - m]`.
    pub fn in_index_set(&self, shift: usize, x: T) -> bool {
        let m = T::from_usize_lossy(self.m);
        let y = x - T::from_usize_lossy(2 * shift) * m;
        let (_, d) = zigzag_frame(m, y);
        d.abs() <= m
    }

    /// The connected components of `I_m + 2 l m` meeting `[lo, hi]`.
    pub fn index_components(&self, shift: usize, lo: T, hi: T) -> Vec<(T, T)> {
        let m = T::from_usize_lossy(self.m);
        let off = T::from_usize_lossy(2 * shift) * m;
        let period = T::lit(8.0) * m;
        let k0 = ((lo - off - m) / period).floor().to_i64().unwrap_or(0);
        let k1 = ((hi - off + m) / period).ceil().to_i64().unwrap_or(0);
        (k0..=k1)
            .map(|k| {
                let c = T::from_i64(k).unwrap() * period + off;
                (c - m, c + m)
            })
            .filter(|&(a, b)| b >= lo && a <= hi)
            .collect()
    }
}

/// The zigzag `g` on `grid`; the window must hold two full periods `16m`.
pub fn zigzag_g<T: Scalar>(grid: &Grid<T>, m: usize) -> Result<Zigzag<T>> {
    if m == 0 {
        return Err(LabError::OutOfWindow("zigzag needs m >= 1".into()));
    }
    let need = T::lit(16.0 * m as f64);
    if grid.length() < need {
        return Err(LabError::OutOfWindow(format!(
            "zigzag with m = {m} needs a window of length {need}, have {}",
            grid.length()
        )));
    }
    let g = sample_on(&FunctionSpec::Zigzag { m, shift: 0.0 }, grid)?;
    Ok(Zigzag { m, g })
}
