//! Besov norms by differences and by Littlewood-Paley bands, Sobolev norms
//! by Fourier multiplier and by differences.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{lp_norm, lp_of_samples, Extension, GridFunction};
use crate::scalar::{binomial, pairwise_sum, pow_abs, root, Scalar};
use crate::smooth::smoothstep;

/// `(s, p, q, m)`: smoothness, integrability, fine index, difference order.
/// `p` and `q` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub s: f64,
    #[serde(with = "crate::serde_inf")]
    pub p: f64,
    #[serde(with = "crate::serde_inf")]
    pub q: f64,
    pub m: usize,
}

impl SpaceParams {
    pub fn new(s: f64, p: f64, q: f64, m: usize) -> Result<Self> {
        let sp = Self { s, p, q, m };
        sp.validate()?;
        Ok(sp)
    }

    /// Difference order defaults to `floor(s) + 1`.
    pub fn with_default_order(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, s.max(0.0).floor() as usize + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidSpace(m));
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return bad(format!("p = {}, q = {} must be positive", self.p, self.q));
        }
        if !self.s.is_finite() {
            return bad("s must be finite".into());
        }
        if !((self.m as f64) > self.s) {
            return bad(format!("m > s required (m = {}, s = {})", self.m, self.s));
        }
        let floor = (1.0 / self.p - 1.0).max(0.0);
        if !(self.s > floor) {
            return bad(format!("s > max(0, 1/p - 1) = {floor} required (s = {})", self.s));
        }
        Ok(())
    }

    /// Parses `s=1.5,p=2,q=2,m=2`; `p`, `q` default to 2 and accept `inf`.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut s, mut p, mut q, mut m) = (None, 2.0, 2.0, None);
        for part in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) =
                part.split_once('=').ok_or_else(|| LabError::Config(format!("space: `{part}` is not key=value")))?;
            let num = || -> Result<f64> {
                match v.trim() {
                    "inf" | "infinity" => Ok(f64::INFINITY),
                    t => t.parse::<f64>().map_err(|e| LabError::Config(format!("space.{k}: {e}"))),
                }
            };
            match k.trim() {
                "s" => s = Some(num()?),
                "p" => p = num()?,
                "q" => q = num()?,
                "m" => {
                    let v = num()?;
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(LabError::Config(format!("space.m = {v} is not a nonnegative integer")));
                    }
                    m = Some(v as usize)
                }
                other => return Err(LabError::Config(format!("space: unknown key `{other}`"))),
            }
        }
        let s = s.ok_or_else(|| LabError::Config("space: missing s".into()))?;
        match m {
            Some(m) => Self::new(s, p, q, m),
            None => Self::with_default_order(s, p, q),
        }
    }
}

/// Signed dyadic nodes for the `dh/|h|` integral over `0 < |h| <= 1`.
///
/// Level `k` covers `|h|` in `[2^-(k+1), 2^-k]`; its nodes sit at the
/// log-midpoints of equal sub-blocks, so each node carries the same
/// `dh/|h|` weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicHGrid {
    pub levels: usize,
    /// Signed nodes per level; half on each side of zero.
    pub nodes_per_level: usize,
}

impl Default for DyadicHGrid {
    fn default() -> Self {
        Self { levels: 10, nodes_per_level: 8 }
    }
}

/// One node of a [`DyadicHGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HNode {
    pub level: usize,
    pub h: f64,
    /// Weight under `dh/|h|`.
    pub weight: f64,
}

impl DyadicHGrid {
    pub fn new(levels: usize, nodes_per_level: usize) -> Result<Self> {
        if levels == 0 || nodes_per_level < 2 || !nodes_per_level.is_multiple_of(2) {
            return Err(LabError::Config(format!(
                "dyadic grid needs levels >= 1 and an even node count >= 2 (got {levels}, {nodes_per_level})"
            )));
        }
        Ok(Self { levels, nodes_per_level })
    }

    fn half(&self) -> usize {
        self.nodes_per_level / 2
    }

    /// Positive node magnitudes of one level, largest first.
    pub fn magnitudes(&self, level: usize) -> Vec<f64> {
        let n = self.half() as f64;
        (0..self.half()).map(|i| 2f64.powf(-(level as f64) - (i as f64 + 0.5) / n)).collect()
    }

    pub fn node_weight(&self) -> f64 {
        LN_2 / self.half() as f64
    }

    pub fn nodes(&self) -> Vec<HNode> {
        let w = self.node_weight();
        let mut out = Vec::with_capacity(self.levels * self.nodes_per_level);
        for level in 0..self.levels {
            for h in self.magnitudes(level) {
                out.push(HNode { level, h, weight: w });
                out.push(HNode { level, h: -h, weight: w });
            }
        }
        out
    }

    /// Number of leading levels whose smallest `|h|` is at least `floor`.
    pub fn resolved_levels(&self, floor: f64) -> usize {
        (0..self.levels).take_while(|&k| 2f64.powi(-(k as i32) - 1) >= floor * (1.0 - 1e-12)).count()
    }
}

/// Per-level contributions of a dyadic integral and how the unresolved
/// levels were filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBreakdown {
    /// Computed level sums (or level maxima for a sup), largest `|h|` first.
    pub levels: Vec<f64>,
    /// Estimated contribution of all levels below the resolved ones.
    pub tail: f64,
    /// `L_last / L_{last-1}`, if at least two levels were computed.
    pub ratio: Option<f64>,
    pub value: f64,
}

/// Sum of computed levels plus a power-law tail from the last two.
///
/// With decay ratio `rho < 1` the geometric series is summed to zero;
/// otherwise only the missing levels up to `total` are filled at the same
/// ratio.
fn extrapolate_sum(levels: &[f64], total: usize) -> (f64, Option<f64>) {
    let n = levels.len();
    if n < 2 {
        return (0.0, None);
    }
    let (a, b) = (levels[n - 2], levels[n - 1]);
    if a <= 0.0 || b <= 0.0 {
        return (0.0, None);
    }
    let rho = b / a;
    if rho < 1.0 {
        (b * rho / (1.0 - rho), Some(rho))
    } else {
        let mut tail = 0.0;
        let mut cur = b;
        for _ in n..total {
            cur *= rho;
            tail += cur;
        }
        (tail, Some(rho))
    }
}

/// Same as [`extrapolate_sum`] for a sup over levels.
fn extrapolate_max(levels: &[f64], total: usize) -> (f64, Option<f64>) {
    let n = levels.len();
    if n < 2 || levels[n - 2] <= 0.0 || levels[n - 1] <= 0.0 {
        return (0.0, None);
    }
    let rho = levels[n - 1] / levels[n - 2];
    if rho <= 1.0 {
        (0.0, Some(rho))
    } else {
        (levels[n - 1] * rho.powi((total - n) as i32), Some(rho))
    }
}

/// Index range `[lo, hi]` of lattice points at which `Delta^m_h f` is
/// evaluated. Zero extension: every point whose stencil meets the window.
/// Constant extension: only stencils lying fully inside the window.
/// `pad` widens the stencil by the interpolation reach for off-lattice `h`.
fn stencil_range(n: usize, reach: f64, extension: Extension, pad: i64) -> Option<(i64, i64)> {
    let last = n as i64 - 1;
    let r = reach.abs().ceil() as i64;
    let (lo, hi) = match extension {
        Extension::Zero => {
            if reach >= 0.0 {
                (-r - pad, last + pad)
            } else {
                (-pad, last + r + pad)
            }
        }
        Extension::Constant => {
            if reach >= 0.0 {
                (pad, last - r - pad)
            } else {
                (r + pad, last - pad)
            }
        }
    };
    (lo <= hi).then_some((lo, hi))
}

/// Stencil offsets `(integer part, fraction, coefficient)` for `Delta^m_h`
/// with `h` measured in grid steps.
fn stencil<T: Scalar>(m: usize, steps: f64) -> Vec<(i64, T, T)> {
    (0..=m)
        .map(|j| {
            let u = j as f64 * steps;
            let a = u.floor();
            let mut w = u - a;
            if w < 1e-12 {
                w = 0.0;
            }
            let sign = if (m - j).is_multiple_of(2) { T::one() } else { -T::one() };
            (a as i64, T::lit(w), sign * binomial::<T>(m, j))
        })
        .collect()
}

/// Whether any stencil point falls between lattice points.
fn off_lattice<T: Scalar>(st: &[(i64, T, T)]) -> bool {
    st.iter().any(|&(_, w, _)| w != T::zero())
}

/// Cubic Lagrange weights on offsets `-1, 0, 1, 2` at fraction `w`.
#[inline]
fn cubic_weights<T: Scalar>(w: T) -> [T; 4] {
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    [
        -w * (w - one) * (w - two) / six,
        (w + one) * (w - one) * (w - two) / two,
        -(w + one) * w * (w - two) / two,
        (w + one) * w * (w - one) / six,
    ]
}

#[inline]
fn apply_stencil<T: Scalar>(f: &GridFunction<T>, st: &[(i64, T, T)], i: i64) -> T {
    let mut acc = T::zero();
    for &(a, w, c) in st {
        let v = if w == T::zero() {
            f.at_index(i + a)
        } else {
            let lw = cubic_weights(w);
            let b = i + a;
            f.at_index(b - 1) * lw[0] + f.at_index(b) * lw[1] + f.at_index(b + 1) * lw[2] + f.at_index(b + 2) * lw[3]
        };
        acc = acc + c * v;
    }
    acc
}

/// `Delta^m_h f` on `f`'s own grid. Off-lattice shifts use cubic
/// interpolation; points beyond the window use the extension policy.
/// The result keeps `f`'s extension kind.
pub fn difference<T: Scalar>(f: &GridFunction<T>, m: i64, h: T) -> Result<GridFunction<T>> {
    if m < 0 {
        return Err(LabError::NegativeOrder(m));
    }
    if m == 0 {
        return Ok(f.clone());
    }
    let steps = (h / f.spacing()).to_f64_lossy();
    let st = stencil::<T>(m as usize, steps);
    let samples = (0..f.len() as i64).map(|i| apply_stencil(f, &st, i)).collect();
    let ext = match f.extension() {
        Extension::Zero => Extension::Zero,
        // Constants are annihilated, so the far field of the difference is 0.
        Extension::Constant => Extension::Zero,
    };
    GridFunction::new(samples, f.spacing(), f.origin(), ext)
}

/// `||Delta^m_h f||_p` over the lattice points from [`stencil_range`].
pub fn difference_lp<T: Scalar>(f: &GridFunction<T>, m: usize, h: T, p: T) -> T {
    let steps = (h / f.spacing()).to_f64_lossy();
    let st = stencil::<T>(m, steps);
    let pad = if off_lattice(&st) { 1 } else { 0 };
    let Some((lo, hi)) = stencil_range(f.len(), steps * m as f64, f.extension(), pad) else {
        return T::zero();
    };
    let values: Vec<T> = (lo..=hi).map(|i| apply_stencil(f, &st, i)).collect();
    lp_of_samples(&values, f.spacing(), p)
}

/// Level-by-level evaluation of the difference seminorm.
pub fn besov_seminorm_levels<T: Scalar>(
    f: &GridFunction<T>,
    sp: &SpaceParams,
    hg: &DyadicHGrid,
) -> Result<LevelBreakdown> {
    sp.validate()?;
    let dx = f.spacing().to_f64_lossy();
    let resolved = hg.resolved_levels(dx / 2.0);
    if resolved == 0 {
        return Err(LabError::BelowResolution(format!("grid spacing {dx} leaves no resolved level of |h| <= 1")));
    }
    let p = T::lit(sp.p);
    let nodes: Vec<HNode> = hg.nodes().into_iter().filter(|n| n.level < resolved).collect();
    let per_node: Vec<(usize, f64)> = nodes
        .par_iter()
        .map(|node| {
            let d = difference_lp(f, sp.m, T::lit(node.h), p).to_f64_lossy();
            let scaled = d * node.h.abs().powf(-sp.s);
            let term = if sp.q.is_infinite() { scaled } else { node.weight * scaled.powf(sp.q) };
            (node.level, term)
        })
        .collect();
    let mut levels = Vec::with_capacity(resolved);
    for k in 0..resolved {
        let terms: Vec<f64> = per_node.iter().filter(|t| t.0 == k).map(|t| t.1).collect();
        levels.push(if sp.q.is_infinite() {
            terms.iter().fold(0.0, |m: f64, v| m.max(*v))
        } else {
            pairwise_sum(&terms)
        });
    }
    let (tail, ratio, value) = if sp.q.is_infinite() {
        let (tail, ratio) = extrapolate_max(&levels, hg.levels);
        let sup = levels.iter().fold(tail, |m: f64, v| m.max(*v));
        (tail, ratio, sup)
    } else {
        let (tail, ratio) = extrapolate_sum(&levels, hg.levels);
        let total = pairwise_sum(&levels) + tail;
        (tail, ratio, total.powf(1.0 / sp.q))
    };
    Ok(LevelBreakdown { levels, tail, ratio, value })
}

/// `(int_{|h|<=1} |h|^{-sq} ||Delta^m_h f||_p^q dh/|h|)^{1/q}` on the
/// dyadic grid; a sup over nodes when `q = inf`.
pub fn besov_seminorm_diff<T: Scalar>(f: &GridFunction<T>, sp: &SpaceParams, hg: &DyadicHGrid) -> Result<T> {
    Ok(T::lit(besov_seminorm_levels(f, sp, hg)?.value))
}

/// `||f||_p + |f|_{B^s_{p,q}}`.
pub fn besov_norm_diff<T: Scalar>(f: &GridFunction<T>, sp: &SpaceParams, hg: &DyadicHGrid) -> Result<T> {
    let semi = besov_seminorm_diff(f, sp, hg)?;
    Ok(lp_norm(f, T::lit(sp.p))? + semi)
}

/// Dyadic frequency partition built from a smoothstep cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPFilterBank {
    /// Smoothstep order of the cutoff ramp on `1 <= |xi| <= 2`; 2 gives the
    /// C^2 quintic.
    pub cutoff_order: usize,
    /// Highest band index; `None` uses the smallest `J` covering Nyquist.
    pub bands: Option<usize>,
}

impl Default for LPFilterBank {
    fn default() -> Self {
        Self { cutoff_order: 2, bands: None }
    }
}

impl LPFilterBank {
    /// Base cutoff: 1 on `|xi| <= 1`, 0 on `|xi| >= 2`.
    pub fn phi0(&self, xi: f64) -> f64 {
        1.0 - smoothstep(self.cutoff_order, xi.abs() - 1.0)
    }

    /// `phi_0` for `j = 0`, else `phi0(2^-j xi) - phi0(2^-(j-1) xi)`.
    pub fn band(&self, j: usize, xi: f64) -> f64 {
        if j == 0 {
            self.phi0(xi)
        } else {
            let s = 2f64.powi(-(j as i32));
            self.phi0(s * xi) - self.phi0(2.0 * s * xi)
        }
    }

    /// Highest band needed for angular frequencies up to `xi_max`.
    pub fn band_count(&self, xi_max: f64) -> usize {
        self.bands.unwrap_or_else(|| xi_max.max(1.0).log2().ceil().max(0.0) as usize)
    }
}

/// Periodized spectrum of `f`: the last sample is dropped and the window
/// is treated as one period.
struct Spectrum<T: Scalar> {
    coeffs: Vec<Complex<T>>,
    /// Angular frequency of each coefficient.
    xi: Vec<f64>,
    inverse: Arc<dyn Fft<T>>,
    dx: T,
}

impl<T: Scalar> Spectrum<T> {
    fn new(f: &GridFunction<T>) -> Result<Self> {
        if f.extension() != Extension::Zero {
            return Err(LabError::NeedsZeroExtension);
        }
        let n = f.len() - 1;
        if n < 2 {
            return Err(LabError::InvalidGrid("Fourier path needs at least three samples".into()));
        }
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut coeffs: Vec<Complex<T>> = f.samples()[..n].iter().map(|&v| Complex::new(v, T::zero())).collect();
        forward.process(&mut coeffs);
        let period = n as f64 * f.spacing().to_f64_lossy();
        let xi = (0..n)
            .map(|k| {
                let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                2.0 * std::f64::consts::PI * k / period
            })
            .collect();
        Ok(Self { coeffs, xi, inverse, dx: f.spacing() })
    }

    fn xi_max(&self) -> f64 {
        self.xi.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `||F^-1[mult * F f]||_p`.
    fn filtered_lp(&self, mult: impl Fn(f64) -> f64, p: T) -> T {
        let mut buf: Vec<Complex<T>> = self.coeffs.iter().zip(&self.xi).map(|(c, &xi)| *c * T::lit(mult(xi))).collect();
        self.inverse.process(&mut buf);
        let scale = T::one() / T::from_usize_lossy(buf.len());
        let values: Vec<T> = buf.iter().map(|c| c.re * scale).collect();
        lp_of_samples(&values, self.dx, p)
    }
}

/// Per-band `2^{js} ||F^-1[phi_j F f]||_p`, band 0 first.
pub fn littlewood_paley_bands<T: Scalar>(f: &GridFunction<T>, sp: &SpaceParams, bank: &LPFilterBank) -> Result<Vec<T>> {
    sp.validate()?;
    let spec = Spectrum::new(f)?;
    let top = bank.band_count(spec.xi_max());
    let p = T::lit(sp.p);
    Ok((0..=top)
        .into_par_iter()
        .map(|j| {
            let v = spec.filtered_lp(|xi| bank.band(j, xi), p);
            v * T::lit(2f64.powf(j as f64 * sp.s))
        })
        .collect())
}

/// `(sum_j 2^{jsq} ||F^-1[phi_j F f]||_p^q)^{1/q}`; sup over bands if
/// `q = inf`.
pub fn littlewood_paley_norm<T: Scalar>(f: &GridFunction<T>, sp: &SpaceParams, bank: &LPFilterBank) -> Result<T> {
    let bands = littlewood_paley_bands(f, sp, bank)?;
    if sp.q.is_infinite() {
        return Ok(bands.iter().fold(T::zero(), |m, v| m.max(*v)));
    }
    let q = T::lit(sp.q);
    let powered: Vec<T> = bands.iter().map(|&v| pow_abs(v, q)).collect();
    Ok(root(pairwise_sum(&powered), q))
}

fn check_sobolev_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(LabError::InvalidSpace(format!("Sobolev index p = {p} must lie in (1, inf)")));
    }
    Ok(())
}

/// `||F^-1[(1 + xi^2)^{s/2} F f]||_p` on the periodized window.
pub fn sobolev_norm_fourier<T: Scalar>(f: &GridFunction<T>, s: f64, p: f64) -> Result<T> {
    check_sobolev_p(p)?;
    let spec = Spectrum::new(f)?;
    Ok(spec.filtered_lp(|xi| (1.0 + xi * xi).powf(s / 2.0), T::lit(p)))
}

/// Difference form of the Sobolev seminorm:
/// `|| (int_0^1 t^{-2s} (t^{-1} int_{|h|<=t} |Delta^m_h f(x)| dh)^2 dt/t)^{1/2} ||_p`.
///
/// Shifts are the lattice multiples `h = j dx`; the inner integral is a
/// rectangle rule with a partial last cell. The `t` integral uses the
/// positive nodes of `hg`, down to `t >= dx`, with a power-law tail.
pub fn sobolev_seminorm_diff<T: Scalar>(f: &GridFunction<T>, s: f64, p: f64, m: usize, hg: &DyadicHGrid) -> Result<T> {
    check_sobolev_p(p)?;
    if !((m as f64) > s) {
        return Err(LabError::InvalidSpace(format!("m > s required (m = {m}, s = {s})")));
    }
    let dx = f.spacing().to_f64_lossy();
    let resolved = hg.resolved_levels(dx);
    if resolved == 0 {
        return Err(LabError::BelowResolution(format!("grid spacing {dx} leaves no resolved t level")));
    }
    let jmax = (1.0 / dx).ceil() as i64 + 1;
    let reach = m as i64 * jmax;
    let n = f.len() as i64;
    let (lo, hi) = match f.extension() {
        Extension::Zero => (-reach, n - 1 + reach),
        Extension::Constant => (reach, n - 1 - reach),
    };
    if lo > hi {
        return Err(LabError::BelowResolution("window shorter than the difference stencil".into()));
    }
    let ts: Vec<(usize, f64)> = (0..resolved).flat_map(|k| hg.magnitudes(k).into_iter().map(move |t| (k, t))).collect();
    let w = hg.node_weight();
    let coeffs: Vec<f64> = (0..=m)
        .map(|j| {
            let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial::<f64>(m, j)
        })
        .collect();

    // Per point: level sums of t^{-2s} A(x, t)^2 w.
    let per_point: Vec<Vec<f64>> = (lo..=hi)
        .into_par_iter()
        .map(|i| {
            let delta = |step: i64| -> f64 {
                let mut acc = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    acc += c * f.at_index(i + j as i64 * step).to_f64_lossy();
                }
                acc.abs()
            };
            // cum[j] = sum_{1 <= k <= j} (|D_k| + |D_-k|)
            let mut cum = vec![0.0; jmax as usize + 1];
            for j in 1..=jmax as usize {
                cum[j] = cum[j - 1] + delta(j as i64) + delta(-(j as i64));
            }
            let mut levels = vec![0.0; resolved];
            for &(k, t) in &ts {
                let u = t / dx;
                let a = (u - 0.5).floor().max(0.0) as usize;
                let full = cum[a];
                let partial = (cum[a + 1] - cum[a]) * (u - a as f64 - 0.5).max(0.0);
                let avg = (full + partial) * dx / t;
                levels[k] += w * t.powf(-2.0 * s) * avg * avg;
            }
            levels
        })
        .collect();

    // Power-law tail with one global ratio from the last two levels.
    let totals: Vec<f64> = (0..resolved).map(|k| per_point.iter().map(|l| l[k]).sum()).collect();
    let (_, ratio) = extrapolate_sum(&totals, hg.levels);
    let tail_factor = match ratio {
        Some(rho) if rho < 1.0 => rho / (1.0 - rho),
        Some(rho) => (1..=hg.levels.saturating_sub(resolved)).map(|i| rho.powi(i as i32)).sum(),
        None => 0.0,
    };
    let values: Vec<T> = per_point
        .iter()
        .map(|l| {
            let total = pairwise_sum(l) + l[resolved - 1] * tail_factor;
            T::lit(total.sqrt())
        })
        .collect();
    Ok(lp_of_samples(&values, f.spacing(), T::lit(p)))
}

/// `||f||_p` plus [`sobolev_seminorm_diff`].
pub fn sobolev_norm_diff<T: Scalar>(f: &GridFunction<T>, s: f64, p: f64, m: usize, hg: &DyadicHGrid) -> Result<T> {
    let semi = sobolev_seminorm_diff(f, s, p, m, hg)?;
    Ok(lp_norm(f, T::lit(p))? + semi)
}

/// `(sum_j ||f||_{L^inf([j, j+1])}^p)^{1/p}` over the integer cells that
/// meet the window; `p = inf` gives the max.
///
/// Each cell takes the max over samples strictly inside `(j, j+1)`: the
/// essential sup ignores the shared endpoints.
pub fn embedding_lhs<T: Scalar>(f: &GridFunction<T>, p: f64) -> Result<T> {
    if !(p > 0.0) {
        return Err(LabError::InvalidSpace(format!("p = {p} must be positive")));
    }
    let (lo, hi) = f.window();
    let j0 = lo.floor().to_i64().unwrap_or(0);
    let j1 = hi.ceil().to_i64().unwrap_or(0);
    let mut cells = vec![T::zero(); (j1 - j0).max(0) as usize];
    for (i, v) in f.samples().iter().enumerate() {
        let x = f.x(i);
        let j = x.floor();
        if j == x {
            continue;
        }
        let k = (j.to_i64().unwrap_or(j0) - j0) as usize;
        if let Some(c) = cells.get_mut(k) {
            *c = c.max(v.abs());
        }
    }
    let (el, er) = f.extension_values();
    if let Some(c) = cells.first_mut() {
        if lo > T::lit(j0 as f64) {
            *c = c.max(el.abs());
        }
    }
    if let Some(c) = cells.last_mut() {
        if hi < T::lit(j1 as f64) {
            *c = c.max(er.abs());
        }
    }
    if p.is_infinite() {
        return Ok(cells.iter().fold(T::zero(), |m, v| m.max(*v)));
    }
    let pt = T::lit(p);
    let powered: Vec<T> = cells.iter().map(|&v| pow_abs(v, pt)).collect();
    Ok(root(pairwise_sum(&powered), pt))
}
