//! Fixed catalog of symbolic functions that can be sampled onto grids.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::gadgets::{self, Ramp};
use crate::grid::Extension;
use crate::scalar::Scalar;
use crate::smooth::{mollifier, mollifier_deriv};

/// Decay threshold below which a non-compact function counts as zero at the
/// window edges.
pub const DECAY_THRESHOLD: f64 = 1e-12;

/// A catalog entry. Every entry has an analytic value and derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero,
    Const {
        c: f64,
    },
    /// Ascending coefficients `c0 + c1 x + c2 x^2 + ...`.
    Poly {
        coeffs: Vec<f64>,
    },
    /// `exp(-((x - center) / width)^2)`.
    Gaussian {
        center: f64,
        width: f64,
    },
    /// `x exp(-x^2)`.
    XGauss,
    /// `cos(freq x) exp(-(x / width)^2)`.
    ModGauss {
        freq: f64,
        width: f64,
    },
    /// `sin(freq x) exp(-(x / width)^2)`.
    SinGauss {
        freq: f64,
        width: f64,
    },
    /// Mollifier `e * exp(-1 / (1 - t^2))`, `t = (x - center) / radius`; peak 1.
    Bump {
        center: f64,
        radius: f64,
    },
    /// `amp sin(freq x)`.
    Sine {
        freq: f64,
        amp: f64,
    },
    /// Indicator of `[a, b]`.
    Indicator {
        a: f64,
        b: f64,
    },
    /// Piecewise-linear interpolation of a user table, zero outside.
    Table {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    UnitBump {
        a: f64,
    },
    /// `eta_eps((x - center) / scale)`.
    EtaEps {
        eps: f64,
        center: f64,
        scale: f64,
        ramp: Ramp,
    },
    LinearCutoff {
        a: f64,
        r: f64,
    },
    /// Zigzag translated right by `shift`.
    Zigzag {
        m: usize,
        shift: f64,
    },
}

impl FunctionSpec {
    pub fn gaussian() -> Self {
        FunctionSpec::Gaussian { center: 0.0, width: 1.0 }
    }

    pub fn linear() -> Self {
        FunctionSpec::Poly { coeffs: vec![0.0, 1.0] }
    }

    pub fn eta(eps: f64, ramp: Ramp) -> Self {
        FunctionSpec::EtaEps { eps, center: 0.0, scale: 1.0, ramp }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        match self {
            FunctionSpec::Gaussian { width, .. }
            | FunctionSpec::ModGauss { width, .. }
            | FunctionSpec::SinGauss { width, .. }
                if !(*width > 0.0) =>
            {
                bad(format!("width {width} must be positive"))
            }
            FunctionSpec::Bump { radius, .. } if !(*radius > 0.0) => bad(format!("radius {radius} must be positive")),
            FunctionSpec::Indicator { a, b } if !(b >= a) => bad(format!("indicator [{a}, {b}] is empty")),
            FunctionSpec::Table { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return bad("table needs matching xs/ys with at least two rows".into());
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table xs must increase strictly".into());
                }
                Ok(())
            }
            FunctionSpec::EtaEps { eps, scale, .. } if !(*eps > 0.0 && *scale > 0.0) => {
                bad("eta_eps needs eps > 0 and scale > 0".into())
            }
            FunctionSpec::LinearCutoff { r, .. } if !(*r > 0.0) => bad(format!("R = {r} must be positive")),
            FunctionSpec::Zigzag { m, .. } if *m == 0 => bad("zigzag needs m >= 1".into()),
            _ => Ok(()),
        }
    }

    /// Closed support when compact; `None` for functions defined by decay or
    /// not decaying at all.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            FunctionSpec::Zero => Some((0.0, 0.0)),
            FunctionSpec::Const { c: 0.0 } => Some((0.0, 0.0)),
            FunctionSpec::Bump { center, radius } => Some((center - radius, center + radius)),
            FunctionSpec::Indicator { a, b } => Some((a, b)),
            FunctionSpec::Table { ref xs, .. } => Some((xs[0], *xs.last().unwrap())),
            FunctionSpec::UnitBump { a } => Some((a - 1.0, a + 2.0)),
            FunctionSpec::EtaEps { eps, center, scale, .. } => {
                let half = scale * (1.0 + eps);
                Some((center - half, center + half))
            }
            FunctionSpec::LinearCutoff { a, r } => Some((a - r - 1.0, a + r + 1.0)),
            _ => None,
        }
    }

    /// Extension policy when sampled on `window`.
    pub fn extension_for<T: Scalar>(&self, window: (T, T)) -> Extension {
        let (lo, hi) = (window.0.to_f64_lossy(), window.1.to_f64_lossy());
        if let Some((a, b)) = self.support() {
            if a >= lo && b <= hi {
                return Extension::Zero;
            }
        }
        let decays = matches!(
            self,
            FunctionSpec::Gaussian { .. }
                | FunctionSpec::XGauss
                | FunctionSpec::ModGauss { .. }
                | FunctionSpec::SinGauss { .. }
        );
        if decays && self.eval(lo).abs() < DECAY_THRESHOLD && self.eval(hi).abs() < DECAY_THRESHOLD {
            return Extension::Zero;
        }
        Extension::Constant
    }

    pub fn eval<T: Scalar>(&self, x: T) -> T {
        let l = T::lit;
        match self {
            FunctionSpec::Zero => T::zero(),
            FunctionSpec::Const { c } => l(*c),
            FunctionSpec::Poly { coeffs } => coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + l(c)),
            FunctionSpec::Gaussian { center, width } => {
                let u = (x - l(*center)) / l(*width);
                (-(u * u)).exp()
            }
            FunctionSpec::XGauss => x * (-(x * x)).exp(),
            FunctionSpec::ModGauss { freq, width } => {
                let u = x / l(*width);
                (l(*freq) * x).cos() * (-(u * u)).exp()
            }
            FunctionSpec::SinGauss { freq, width } => {
                let u = x / l(*width);
                (l(*freq) * x).sin() * (-(u * u)).exp()
            }
            FunctionSpec::Bump { center, radius } => T::E() * mollifier((x - l(*center)) / l(*radius)),
            FunctionSpec::Sine { freq, amp } => l(*amp) * (l(*freq) * x).sin(),
            FunctionSpec::Indicator { a, b } => {
                if x >= l(*a) && x <= l(*b) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FunctionSpec::Table { xs, ys } => table_eval(xs, ys, x.to_f64_lossy()).0.map_or(T::zero(), l),
            FunctionSpec::UnitBump { a } => gadgets::unit_bump_value(l(*a), x),
            FunctionSpec::EtaEps { eps, center, scale, ramp } => {
                gadgets::eta_value(l(*eps), *ramp, (x - l(*center)) / l(*scale))
            }
            FunctionSpec::LinearCutoff { a, r } => gadgets::linear_cutoff_value(l(*a), l(*r), x),
            FunctionSpec::Zigzag { m, shift } => gadgets::zigzag_value(T::from_usize_lossy(*m), x - l(*shift)),
        }
    }

    /// Analytic derivative (one-sided/weak where the function has kinks).
    pub fn deriv<T: Scalar>(&self, x: T) -> T {
        let l = T::lit;
        let two = l(2.0);
        match self {
            FunctionSpec::Zero | FunctionSpec::Const { .. } | FunctionSpec::Indicator { .. } => T::zero(),
            FunctionSpec::Poly { coeffs } => {
                coeffs.iter().enumerate().skip(1).rev().fold(T::zero(), |acc, (k, &c)| acc * x + l(c * k as f64))
            }
            FunctionSpec::Gaussian { center, width } => {
                let w = l(*width);
                let u = (x - l(*center)) / w;
                -two * u / w * (-(u * u)).exp()
            }
            FunctionSpec::XGauss => (T::one() - two * x * x) * (-(x * x)).exp(),
            FunctionSpec::ModGauss { freq, width } => {
                let (k, w) = (l(*freq), l(*width));
                let e = (-(x * x) / (w * w)).exp();
                (-k * (k * x).sin() - two * x / (w * w) * (k * x).cos()) * e
            }
            FunctionSpec::SinGauss { freq, width } => {
                let (k, w) = (l(*freq), l(*width));
                let e = (-(x * x) / (w * w)).exp();
                (k * (k * x).cos() - two * x / (w * w) * (k * x).sin()) * e
            }
            FunctionSpec::Bump { center, radius } => {
                let r = l(*radius);
                T::E() * mollifier_deriv((x - l(*center)) / r) / r
            }
            FunctionSpec::Sine { freq, amp } => l(*amp) * l(*freq) * (l(*freq) * x).cos(),
            FunctionSpec::Table { xs, ys } => table_eval(xs, ys, x.to_f64_lossy()).1.map_or(T::zero(), l),
            FunctionSpec::UnitBump { a } => gadgets::unit_bump_deriv(l(*a), x),
            FunctionSpec::EtaEps { eps, center, scale, ramp } => {
                gadgets::eta_deriv(l(*eps), *ramp, (x - l(*center)) / l(*scale)) / l(*scale)
            }
            FunctionSpec::LinearCutoff { a, r } => gadgets::linear_cutoff_deriv(l(*a), l(*r), x),
            FunctionSpec::Zigzag { m, shift } => gadgets::zigzag_deriv(T::from_usize_lossy(*m), x - l(*shift)),
        }
    }

    /// Parses `name` or `name:key=value,key=value`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (text, ""),
        };
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| LabError::Config(format!("`{part}` is not key=value")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            match kv.get(key) {
                None => Ok(default),
                Some(v) => v.parse::<f64>().map_err(|e| LabError::Config(format!("{name}.{key}: {e}"))),
            }
        };
        let spec = match name {
            "zero" => FunctionSpec::Zero,
            "const" => FunctionSpec::Const { c: num("c", 1.0)? },
            "linear" => FunctionSpec::linear(),
            "poly" => {
                let raw = kv.get("coeffs").cloned().unwrap_or_else(|| "0;1".into());
                let coeffs = raw
                    .split(';')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| LabError::Config(format!("poly.coeffs: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                FunctionSpec::Poly { coeffs }
            }
            "gaussian" => FunctionSpec::Gaussian { center: num("center", 0.0)?, width: num("width", 1.0)? },
            "xgauss" => FunctionSpec::XGauss,
            "modgauss" => FunctionSpec::ModGauss { freq: num("freq", 3.0)?, width: num("width", 1.0)? },
            "singauss" => FunctionSpec::SinGauss { freq: num("freq", 2.0)?, width: num("width", 2f64.sqrt())? },
            "bump" => FunctionSpec::Bump { center: num("center", 0.0)?, radius: num("radius", 1.0)? },
            "sine" => FunctionSpec::Sine { freq: num("freq", 1.0)?, amp: num("amp", 1.0)? },
            "indicator" => FunctionSpec::Indicator { a: num("a", 0.0)?, b: num("b", 1.0)? },
            "unit_bump" => FunctionSpec::UnitBump { a: num("a", 0.0)? },
            "eta_eps" => {
                let ramp = match kv.get("ramp").map(String::as_str) {
                    None | Some("smooth") => Ramp::Smooth,
                    Some("linear") => Ramp::Linear,
                    Some(other) => return Err(LabError::Config(format!("unknown ramp `{other}`"))),
                };
                FunctionSpec::EtaEps {
                    eps: num("eps", 0.1)?,
                    center: num("center", 0.0)?,
                    scale: num("scale", 1.0)?,
                    ramp,
                }
            }
            "linear_cutoff" => FunctionSpec::LinearCutoff { a: num("a", 0.0)?, r: num("r", 1.0)? },
            "zigzag" => FunctionSpec::Zigzag { m: num("m", 1.0)? as usize, shift: num("shift", 0.0)? },
            other => return Err(LabError::UnknownDescriptor(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Zero => write!(f, "zero"),
            FunctionSpec::Const { c } => write!(f, "const:c={c}"),
            FunctionSpec::Poly { coeffs } => {
                let cs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:coeffs={}", cs.join(";"))
            }
            FunctionSpec::Gaussian { center, width } => write!(f, "gaussian:center={center},width={width}"),
            FunctionSpec::XGauss => write!(f, "xgauss"),
            FunctionSpec::ModGauss { freq, width } => write!(f, "modgauss:freq={freq},width={width}"),
            FunctionSpec::SinGauss { freq, width } => write!(f, "singauss:freq={freq},width={width}"),
            FunctionSpec::Bump { center, radius } => write!(f, "bump:center={center},radius={radius}"),
            FunctionSpec::Sine { freq, amp } => write!(f, "sine:freq={freq},amp={amp}"),
            FunctionSpec::Indicator { a, b } => write!(f, "indicator:a={a},b={b}"),
            FunctionSpec::Table { xs, .. } => write!(f, "table:rows={}", xs.len()),
            FunctionSpec::UnitBump { a } => write!(f, "unit_bump:a={a}"),
            FunctionSpec::EtaEps { eps, center, scale, ramp } => {
                let r = match ramp {
                    Ramp::Linear => "linear",
                    Ramp::Smooth => "smooth",
                };
                write!(f, "eta_eps:eps={eps},center={center},scale={scale},ramp={r}")
            }
            FunctionSpec::LinearCutoff { a, r } => write!(f, "linear_cutoff:a={a},r={r}"),
            FunctionSpec::Zigzag { m, shift } => write!(f, "zigzag:m={m},shift={shift}"),
        }
    }
}

/// Value and slope of the piecewise-linear table at `x`; `None` outside.
fn table_eval(xs: &[f64], ys: &[f64], x: f64) -> (Option<f64>, Option<f64>) {
    if x < xs[0] || x > *xs.last().unwrap() {
        return (None, None);
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
    let slope = (y1 - y0) / (x1 - x0);
    (Some(y0 + slope * (x - x0)), Some(slope))
}

/// The ten-function family used for characterization comparisons. Every
/// member is smooth and zero-extended on windows containing `[-12, 12]`.
pub fn catalog_family() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::gaussian(),
        FunctionSpec::Gaussian { center: 0.0, width: 2.0 },
        FunctionSpec::Gaussian { center: 0.0, width: 0.5 },
        FunctionSpec::Gaussian { center: 2.0, width: 1.0 },
        FunctionSpec::XGauss,
        FunctionSpec::ModGauss { freq: 3.0, width: 1.0 },
        FunctionSpec::SinGauss { freq: 2.0, width: 2f64.sqrt() },
        FunctionSpec::Bump { center: 0.0, radius: 1.0 },
        FunctionSpec::Bump { center: -1.0, radius: 3.0 },
        FunctionSpec::UnitBump { a: 0.0 },
    ]
}
