//! Sampled functions on a uniform grid over a finite window.
//!
//! The real line is replaced by a window; the [`Extension`] policy says what
//! a function is outside it. All L^p integrals use the rectangle rule
//! `sum |f_i|^p dx`, so indicator functions integrate exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::catalog::FunctionSpec;
use crate::error::{LabError, Result};
use crate::scalar::{pairwise_sum, pow_abs, root, Scalar};

/// Default window standing in for the real line.
pub const DEFAULT_WINDOW: (f64, f64) = (-16.0, 16.0);
/// Default sample count, `2^13 + 1`.
pub const DEFAULT_COUNT: usize = (1 << 13) + 1;

/// What a [`GridFunction`] equals outside its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// Zero outside the window.
    Zero,
    /// Holds the nearest edge sample (left edge value to the left, right
    /// edge value to the right).
    Constant,
}

/// A uniform grid: `x_i = origin + i * spacing`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub origin: T,
    pub spacing: T,
    pub count: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(origin: T, spacing: T, count: usize) -> Result<Self> {
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(LabError::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if count < 2 {
            return Err(LabError::InvalidGrid(format!("count {count} < 2")));
        }
        if !origin.is_finite() {
            return Err(LabError::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self { origin, spacing, count })
    }

    /// `count` points spanning the closed window `[lo, hi]`.
    pub fn over(lo: T, hi: T, count: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(LabError::DegenerateWindow(lo.to_f64_lossy(), hi.to_f64_lossy()));
        }
        if count < 2 {
            return Err(LabError::InvalidGrid(format!("count {count} < 2")));
        }
        Self::new(lo, (hi - lo) / T::from_usize_lossy(count - 1), count)
    }

    pub fn default_grid() -> Self {
        Self::over(T::lit(DEFAULT_WINDOW.0), T::lit(DEFAULT_WINDOW.1), DEFAULT_COUNT).expect("default grid")
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.origin + T::from_usize_lossy(i) * self.spacing
    }

    /// Coordinate of a possibly negative or out-of-range index.
    #[inline]
    pub fn x_signed(&self, i: i64) -> T {
        self.origin + T::from_i64(i).expect("index") * self.spacing
    }

    pub fn window(&self) -> (T, T) {
        (self.origin, self.x(self.count - 1))
    }

    pub fn length(&self) -> T {
        T::from_usize_lossy(self.count - 1) * self.spacing
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.spacing == other.spacing && self.origin == other.origin
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(move |i| self.x(i))
    }
}

/// A real function sampled on a [`Grid`], with an extension policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T> {
    samples: Vec<T>,
    spacing: T,
    origin: T,
    extension: Extension,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(samples: Vec<T>, spacing: T, origin: T, extension: Extension) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::InvalidGrid("no samples".into()));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(LabError::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        Ok(Self { samples, spacing, origin, extension })
    }

    pub fn from_fn(grid: &Grid<T>, extension: Extension, f: impl Fn(T) -> T) -> Self {
        let samples = grid.points().map(f).collect();
        Self { samples, spacing: grid.spacing, origin: grid.origin, extension }
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self::from_fn(grid, Extension::Zero, |_| T::zero())
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> Grid<T> {
        Grid { origin: self.origin, spacing: self.spacing, count: self.samples.len() }
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.origin + T::from_usize_lossy(i) * self.spacing
    }

    pub fn window(&self) -> (T, T) {
        (self.origin, self.x(self.samples.len() - 1))
    }

    /// Value the extension policy assigns left/right of the window.
    pub fn extension_values(&self) -> (T, T) {
        match self.extension {
            Extension::Zero => (T::zero(), T::zero()),
            Extension::Constant => (self.samples[0], *self.samples.last().unwrap()),
        }
    }

    /// Value at grid index `i` (any integer), honoring the extension.
    #[inline]
    pub fn at_index(&self, i: i64) -> T {
        if i < 0 {
            self.extension_values().0
        } else if (i as usize) >= self.samples.len() {
            self.extension_values().1
        } else {
            self.samples[i as usize]
        }
    }

    /// Point evaluation: linear interpolation inside the window, the
    /// extension policy outside.
    pub fn eval(&self, x: T) -> T {
        let n = self.samples.len();
        let u = (x - self.origin) / self.spacing;
        let last = T::from_usize_lossy(n - 1);
        let slack = T::lit(1e-9);
        if u < T::zero() {
            return if u > -slack { self.samples[0] } else { self.extension_values().0 };
        }
        if u > last {
            return if u < last + slack { self.samples[n - 1] } else { self.extension_values().1 };
        }
        let i = u.floor();
        let w = u - i;
        let i = i.to_usize().unwrap_or(0).min(n - 1);
        if i + 1 >= n || w == T::zero() {
            return self.samples[i];
        }
        self.samples[i] * (T::one() - w) + self.samples[i + 1] * w
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        let samples: Vec<T> = self.samples.iter().map(|&v| f(v)).collect();
        let extension = match self.extension {
            Extension::Zero if f(T::zero()) != T::zero() => Extension::Constant,
            e => e,
        };
        Self { samples, spacing: self.spacing, origin: self.origin, extension }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| c * v)
    }

    fn check_combinable(&self, other: &Self) -> Result<()> {
        if self.spacing != other.spacing || self.origin != other.origin || self.samples.len() != other.samples.len() {
            return Err(LabError::GridMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(T, T) -> T, ext: Extension) -> Result<Self> {
        self.check_combinable(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { samples, spacing: self.spacing, origin: self.origin, extension: ext })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let ext = if self.extension == Extension::Zero && other.extension == Extension::Zero {
            Extension::Zero
        } else {
            Extension::Constant
        };
        self.zip_with(other, |a, b| a + b, ext)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let ext = if self.extension == Extension::Zero && other.extension == Extension::Zero {
            Extension::Zero
        } else {
            Extension::Constant
        };
        self.zip_with(other, |a, b| a - b, ext)
    }

    /// Pointwise product; zero outside the window if either factor is.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let ext = if self.extension == Extension::Zero || other.extension == Extension::Zero {
            Extension::Zero
        } else {
            Extension::Constant
        };
        self.zip_with(other, |a, b| a * b, ext)
    }

    /// Drops leading/trailing zero samples of a zero-extended function,
    /// keeping the lattice (the origin moves by whole grid steps).
    pub fn trim_zeros(&self) -> Self {
        if self.extension != Extension::Zero {
            return self.clone();
        }
        let first = self.samples.iter().position(|v| *v != T::zero());
        let Some(first) = first else {
            return Self {
                samples: vec![T::zero()],
                spacing: self.spacing,
                origin: self.origin,
                extension: Extension::Zero,
            };
        };
        let last = self.samples.iter().rposition(|v| *v != T::zero()).unwrap();
        Self {
            samples: self.samples[first..=last].to_vec(),
            spacing: self.spacing,
            origin: self.x(first),
            extension: Extension::Zero,
        }
    }

    /// Maximum absolute sample.
    pub fn sup_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Central-difference derivative on the grid: fourth order in the
    /// interior, second order one step from the edges, one-sided at the
    /// edges.
    pub fn derivative(&self) -> Self {
        let n = self.samples.len();
        let f = &self.samples;
        let h = self.spacing;
        let two = T::lit(2.0);
        let mut d = vec![T::zero(); n];
        if n >= 2 {
            d[0] = (f[1] - f[0]) / h;
            d[n - 1] = (f[n - 1] - f[n - 2]) / h;
        }
        for i in 1..n.saturating_sub(1) {
            d[i] = if i >= 2 && i + 2 < n {
                (f[i - 2] - T::lit(8.0) * f[i - 1] + T::lit(8.0) * f[i + 1] - f[i + 2]) / (T::lit(12.0) * h)
            } else {
                (f[i + 1] - f[i - 1]) / (two * h)
            };
        }
        Self { samples: d, spacing: self.spacing, origin: self.origin, extension: Extension::Zero }
    }

    /// Writes the two-column CSV form (`x,value` header).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,value")?;
        for (i, v) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", self.x(i), v)?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`GridFunction::write_csv`]. The abscissae
    /// must be uniformly spaced.
    pub fn read_csv<R: BufRead>(r: R, extension: Extension) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| LabError::Config(e.to_string()))?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| LabError::Config(format!("line {}: missing column", lineno + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| LabError::Config(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(parse(parts.next())?);
            vs.push(T::lit(parse(parts.next())?));
        }
        if xs.len() < 2 {
            return Err(LabError::InvalidGrid("CSV needs at least two rows".into()));
        }
        let spacing = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (i, x) in xs.iter().enumerate() {
            if (xs[0] + i as f64 * spacing - x).abs() > 1e-9 * spacing.max(1.0) {
                return Err(LabError::InvalidGrid(format!("row {} is off the uniform lattice", i + 2)));
            }
        }
        Self::new(vs, T::lit(spacing), T::lit(xs[0]), extension)
    }
}

/// Samples a catalog descriptor on `count` points of the closed window.
///
/// The extension is `Zero` when the descriptor is compactly supported inside
/// the window or has decayed below `1e-12` at both edges, `Constant`
/// otherwise.
pub fn sample<T: Scalar>(spec: &FunctionSpec, window: (T, T), count: usize) -> Result<GridFunction<T>> {
    let grid = Grid::over(window.0, window.1, count)?;
    sample_on(spec, &grid)
}

pub fn sample_on<T: Scalar>(spec: &FunctionSpec, grid: &Grid<T>) -> Result<GridFunction<T>> {
    spec.validate()?;
    let ext = spec.extension_for(grid.window());
    Ok(GridFunction::from_fn(grid, ext, |x| spec.eval(x)))
}

/// Rectangle-rule L^p norm, `p` in `(0, inf]`.
pub fn lp_norm<T: Scalar>(f: &GridFunction<T>, p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(LabError::InvalidSpace(format!("p = {p} must be positive")));
    }
    if p.is_infinite() {
        return Ok(f.sup_abs());
    }
    if f.extension == Extension::Constant {
        let (l, r) = f.extension_values();
        if l != T::zero() || r != T::zero() {
            return Err(LabError::InfiniteMass(p.to_f64_lossy()));
        }
    }
    Ok(lp_of_samples(&f.samples, f.spacing, p))
}

/// `(sum |v_i|^p dx)^(1/p)`, or `max |v_i|` for `p = inf`.
pub fn lp_of_samples<T: Scalar>(values: &[T], dx: T, p: T) -> T {
    if p.is_infinite() {
        return values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    }
    let powered: Vec<T> = values.iter().map(|&v| pow_abs(v, p)).collect();
    root(pairwise_sum(&powered) * dx, p)
}

/// `max |f|` over the closed interval, including extension values where the
/// interval leaves the window.
pub fn linf_on_interval<T: Scalar>(f: &GridFunction<T>, interval: (T, T)) -> T {
    let (a, b) = if interval.0 <= interval.1 { interval } else { (interval.1, interval.0) };
    let (lo, hi) = f.window();
    let mut m = f.eval(a).abs().max(f.eval(b).abs());
    if a < lo {
        m = m.max(f.extension_values().0.abs());
    }
    if b > hi {
        m = m.max(f.extension_values().1.abs());
    }
    let n = f.len() as i64;
    let i0 = ((a - f.origin) / f.spacing).ceil().to_i64().unwrap_or(0).max(0);
    let i1 = ((b - f.origin) / f.spacing).floor().to_i64().unwrap_or(-1).min(n - 1);
    for i in i0..=i1 {
        m = m.max(f.samples[i as usize].abs());
    }
    m
}
