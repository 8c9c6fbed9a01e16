//! Piecewise-cubic maps of the line with affine tails, and their geometric
//! functionals: Lipschitz constant, preimage decompositions, `U`, `M` and
//! the maximal preimage count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Extension, Grid, GridFunction, DEFAULT_WINDOW};
use crate::scalar::Scalar;

/// Continuity tolerance at breakpoints (relative to `max(1, |value|)`).
pub const CONTINUITY_TOL: f64 = 1e-12;
/// Largest derivative jump tolerated when the C^1 flag is set.
pub const C1_TOL: f64 = 1e-9;

/// One polynomial piece; `coeffs` are ascending in the local variable
/// `x - interval.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: [f64; 2],
    pub coeffs: Vec<f64>,
}

impl Piece {
    fn eval(&self, x: f64) -> f64 {
        let t = x - self.interval[0];
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn deriv(&self, x: f64) -> f64 {
        let t = x - self.interval[0];
        self.coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * t + c * k as f64)
    }

    fn second(&self, x: f64) -> f64 {
        let t = x - self.interval[0];
        self.coeffs.iter().enumerate().skip(2).rev().fold(0.0, |acc, (k, c)| acc * t + c * (k * (k - 1)) as f64)
    }

    fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Zeros of the derivative strictly inside the piece, ascending.
    fn critical_points(&self) -> Vec<f64> {
        let (b, c, d) = (self.coeff(1), 2.0 * self.coeff(2), 3.0 * self.coeff(3));
        let len = self.interval[1] - self.interval[0];
        let mut roots = Vec::new();
        if d == 0.0 {
            if c != 0.0 {
                roots.push(-b / c);
            }
        } else {
            let disc = c * c - 4.0 * d * b;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let qq = -0.5 * (c + c.signum() * sq);
                if qq != 0.0 {
                    roots.push(qq / d);
                    roots.push(b / qq);
                } else {
                    roots.push(0.0);
                }
            }
        }
        let mut out: Vec<f64> =
            roots.into_iter().filter(|t| *t > 0.0 && *t < len).map(|t| self.interval[0] + t).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Slopes of the affine continuation outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub left_slope: f64,
    pub right_slope: f64,
}

#[derive(Deserialize, Serialize)]
struct RawLineMap {
    pieces: Vec<Piece>,
    tails: Tails,
    #[serde(default)]
    c1: bool,
}

/// A monotone stretch `[u, v]` of one piece.
#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    u: f64,
    v: f64,
    fu: f64,
    fv: f64,
}

impl Segment {
    fn range(&self) -> (f64, f64) {
        (self.fu.min(self.fv), self.fu.max(self.fv))
    }
}

/// A map of the line: cubic pieces covering a window, affine outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLineMap", into = "RawLineMap")]
pub struct LineMap {
    pieces: Vec<Piece>,
    tails: Tails,
    c1: bool,
    #[serde(skip)]
    segments: Vec<Segment>,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.piece == other.piece && self.u == other.u && self.v == other.v
    }
}

impl TryFrom<RawLineMap> for LineMap {
    type Error = LabError;

    fn try_from(raw: RawLineMap) -> Result<Self> {
        LineMap::new(raw.pieces, raw.tails, raw.c1)
    }
}

impl From<LineMap> for RawLineMap {
    fn from(m: LineMap) -> Self {
        RawLineMap { pieces: m.pieces, tails: m.tails, c1: m.c1 }
    }
}

/// A finite ordered union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<[f64; 2]>,
}

impl IntervalSet {
    /// Sorts and merges overlapping or touching intervals.
    pub fn from_unsorted(mut raw: Vec<[f64; 2]>) -> Self {
        raw.retain(|iv| iv[1] >= iv[0]);
        raw.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(raw.len());
        for iv in raw {
            match out.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|iv| iv[1] - iv[0]).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv[0] <= x && x <= iv[1])
    }
}

/// Supremum found by a search, with the interval `[c, c + w]` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: [f64; 2],
}

/// Result of the `M` search: the per-width ladder and the divergence flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MEstimate {
    /// `(width, sup over left endpoints of |phi^-1(I)| / |I|)`, widest first.
    pub ladder: Vec<(f64, f64)>,
    /// Set when the ladder still grows at the finest width and exceeds ten
    /// times the width-1 value.
    pub infinite: bool,
}

impl MEstimate {
    /// Largest ladder value, or `None` when flagged infinite.
    pub fn value(&self) -> Option<f64> {
        (!self.infinite).then(|| self.ladder.iter().fold(0.0, |m: f64, v| m.max(v.1)))
    }
}

/// Parameters of the `U`/`M` searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Left-endpoint step as a fraction of the essential range width.
    pub step_fraction: f64,
    /// Widths `2^k` for `k` from `-finest` to `widest`.
    pub finest: u32,
    pub widest: u32,
    /// Divergence threshold relative to the width-1 value.
    pub blowup: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { step_fraction: 1e-3, finest: 20, widest: 6, blowup: 10.0 }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

impl LineMap {
    pub fn new(pieces: Vec<Piece>, tails: Tails, c1: bool) -> Result<Self> {
        let bad = |m: String| Err(LabError::InvalidMap(m));
        if pieces.is_empty() {
            return bad("no pieces".into());
        }
        if !tails.left_slope.is_finite() || !tails.right_slope.is_finite() {
            return bad("tail slopes must be finite".into());
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.interval[1] > p.interval[0]) || !p.interval.iter().all(|v| v.is_finite()) {
                return bad(format!("piece {i}: empty interval {:?}", p.interval));
            }
            if p.coeffs.is_empty() || p.coeffs.len() > 4 {
                return bad(format!("piece {i}: expected 1 to 4 coefficients, got {}", p.coeffs.len()));
            }
            if !p.coeffs.iter().all(|c| c.is_finite()) {
                return bad(format!("piece {i}: non-finite coefficient"));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            let x = w[0].interval[1];
            if !close(x, w[1].interval[0], CONTINUITY_TOL) {
                return bad(format!("gap between pieces {i} and {} at {x}", i + 1));
            }
            let (l, r) = (w[0].eval(x), w[1].eval(w[1].interval[0]));
            if !close(l, r, CONTINUITY_TOL) {
                return bad(format!("discontinuity {:e} at breakpoint {x}", (l - r).abs()));
            }
            if c1 {
                let jump = (w[0].deriv(x) - w[1].deriv(w[1].interval[0])).abs();
                if jump > C1_TOL {
                    return Err(LabError::NotC1 { at: x, jump });
                }
            }
        }
        let mut map = Self { pieces, tails, c1, segments: Vec::new() };
        map.segments = map.build_segments();
        Ok(map)
    }

    fn build_segments(&self) -> Vec<Segment> {
        let mut segs = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let mut cuts = vec![p.interval[0]];
            cuts.extend(p.critical_points());
            cuts.push(p.interval[1]);
            for w in cuts.windows(2) {
                segs.push(Segment { piece: k, u: w[0], v: w[1], fu: p.eval(w[0]), fv: p.eval(w[1]) });
            }
        }
        segs
    }

    /// `x -> slope x + intercept` on `window`, same slope outside.
    pub fn affine(slope: f64, intercept: f64, window: (f64, f64)) -> Result<Self> {
        let (l, r) = window;
        let piece = Piece { interval: [l, r], coeffs: vec![slope * l + intercept, slope] };
        Self::new(vec![piece], Tails { left_slope: slope, right_slope: slope }, true)
    }

    /// Identity on the default window.
    pub fn identity() -> Self {
        Self::affine(1.0, 0.0, DEFAULT_WINDOW).expect("valid identity")
    }

    /// Global polynomial (ascending coefficients, degree at most 3) on the
    /// window with tangent tails.
    pub fn polynomial(coeffs: &[f64], window: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 4 {
            return Err(LabError::InvalidMap("polynomial degree must be at most 3".into()));
        }
        // Taylor shift to the local variable x - l.
        let l = window.0;
        let n = coeffs.len();
        let mut local = vec![0.0; n];
        for (k, &c) in coeffs.iter().enumerate() {
            for (j, slot) in local.iter_mut().enumerate().take(k + 1) {
                *slot += c * binom(k, j) * l.powi((k - j) as i32);
            }
        }
        let piece = Piece { interval: [window.0, window.1], coeffs: local };
        let tails = Tails { left_slope: piece.deriv(window.0), right_slope: piece.deriv(window.1) };
        Self::new(vec![piece], tails, true)
    }

    /// Cubic Hermite interpolant of `f` with exact slopes `df` on `count`
    /// uniform nodes; tails continue with the end slopes (C^1).
    pub fn hermite(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, window: (f64, f64), count: usize) -> Result<Self> {
        if count < 2 {
            return Err(LabError::InvalidMap("Hermite spline needs at least two nodes".into()));
        }
        let h = (window.1 - window.0) / (count - 1) as f64;
        let xs: Vec<f64> =
            (0..count).map(|i| if i + 1 == count { window.1 } else { window.0 + i as f64 * h }).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        Self::hermite_nodes(&xs, &ys, &ds, Tails { left_slope: ds[0], right_slope: ds[count - 1] }, true)
    }

    /// Cubic Hermite interpolant through `(xs, ys)` with slopes `ds`.
    pub fn hermite_nodes(xs: &[f64], ys: &[f64], ds: &[f64], tails: Tails, c1: bool) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(LabError::InvalidMap("Hermite nodes need matching lengths >= 2".into()));
        }
        let pieces = (0..xs.len() - 1)
            .map(|i| {
                let h = xs[i + 1] - xs[i];
                let secant = (ys[i + 1] - ys[i]) / h;
                let c2 = (3.0 * secant - 2.0 * ds[i] - ds[i + 1]) / h;
                let c3 = (ds[i] + ds[i + 1] - 2.0 * secant) / (h * h);
                Piece { interval: [xs[i], xs[i + 1]], coeffs: vec![ys[i], ds[i], c2, c3] }
            })
            .collect();
        Self::new(pieces, tails, c1)
    }

    /// Piecewise-affine interpolant of `(xs, ys)`.
    pub fn piecewise_affine(xs: &[f64], ys: &[f64], tails: Tails) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(LabError::InvalidMap("need at least two matching nodes".into()));
        }
        let pieces = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| Piece { interval: [x[0], x[1]], coeffs: vec![y[0], (y[1] - y[0]) / (x[1] - x[0])] })
            .collect();
        Self::new(pieces, tails, false)
    }

    /// Inverse of a strictly monotone map with nonvanishing derivative, as a
    /// Hermite spline on the images of `count` uniform nodes.
    pub fn inverse(&self, count: usize) -> Result<Self> {
        let (lo, hi) = self.window();
        let h = (hi - lo) / (count.max(2) - 1) as f64;
        let xs: Vec<f64> = (0..count.max(2)).map(|i| lo + i as f64 * h).collect();
        let mut ys: Vec<f64> = xs.iter().map(|&x| self.eval(x)).collect();
        let mut ds: Vec<f64> = Vec::with_capacity(xs.len());
        for &x in &xs {
            let d = self.deriv(x);
            if d == 0.0 {
                return Err(LabError::InvalidMap(format!("derivative vanishes at {x}; no C^1 inverse")));
            }
            ds.push(d);
        }
        let increasing = ds[0] > 0.0;
        if ds.iter().any(|d| (*d > 0.0) != increasing) || self.segments.iter().any(|s| (s.fv > s.fu) != increasing) {
            return Err(LabError::InvalidMap("map is not strictly monotone".into()));
        }
        let (ls, rs) = (self.tails.left_slope, self.tails.right_slope);
        if (ls > 0.0) != increasing || (rs > 0.0) != increasing || ls == 0.0 || rs == 0.0 {
            return Err(LabError::InvalidMap("tails do not continue the monotone direction".into()));
        }
        let mut inv_x = std::mem::take(&mut ys);
        let mut inv_y = xs;
        let mut inv_d: Vec<f64> = ds.iter().map(|d| 1.0 / d).collect();
        let mut tails = Tails { left_slope: 1.0 / ls, right_slope: 1.0 / rs };
        if !increasing {
            inv_x.reverse();
            inv_y.reverse();
            inv_d.reverse();
            tails = Tails { left_slope: 1.0 / rs, right_slope: 1.0 / ls };
        }
        Self::hermite_nodes(&inv_x, &inv_y, &inv_d, tails, self.c1)
    }

    /// `phi + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut coeffs = p.coeffs.clone();
                coeffs[0] += c;
                Piece { interval: p.interval, coeffs }
            })
            .collect();
        Self::new(pieces, self.tails, self.c1).expect("shift preserves validity")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tails(&self) -> Tails {
        self.tails
    }

    pub fn is_c1(&self) -> bool {
        self.c1
    }

    pub fn window(&self) -> (f64, f64) {
        (self.pieces[0].interval[0], self.pieces[self.pieces.len() - 1].interval[1])
    }

    fn locate(&self, x: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.interval[1] <= x);
        i.min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x < lo {
            return self.pieces[0].eval(lo) + self.tails.left_slope * (x - lo);
        }
        if x > hi {
            let last = &self.pieces[self.pieces.len() - 1];
            return last.eval(hi) + self.tails.right_slope * (x - hi);
        }
        self.pieces[self.locate(x)].eval(x)
    }

    /// Exact derivative; right-sided at breakpoints.
    pub fn deriv(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x < lo {
            self.tails.left_slope
        } else if x > hi {
            self.tails.right_slope
        } else {
            self.pieces[self.locate(x)].deriv(x)
        }
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x < lo || x > hi {
            0.0
        } else {
            self.pieces[self.locate(x)].second(x)
        }
    }

    /// Piecewise-quadratic derivative view.
    pub fn derivative(&self) -> DerivativeView<'_> {
        DerivativeView { map: self }
    }

    /// `sup |phi'|` and a point attaining it; `x = +-inf` marks a tail.
    pub fn lipschitz_argmax(&self) -> (f64, f64) {
        let mut best = (self.tails.left_slope.abs(), f64::NEG_INFINITY);
        if self.tails.right_slope.abs() > best.0 {
            best = (self.tails.right_slope.abs(), f64::INFINITY);
        }
        for p in &self.pieces {
            let mut cands = vec![p.interval[0], p.interval[1]];
            if p.coeff(3) != 0.0 {
                let t = -p.coeff(2) / (3.0 * p.coeff(3));
                let x = p.interval[0] + t;
                if x > p.interval[0] && x < p.interval[1] {
                    cands.push(x);
                }
            }
            for x in cands {
                let v = p.deriv(x).abs();
                if v > best.0 {
                    best = (v, x);
                }
            }
        }
        (best.1, best.0)
    }

    /// `sup |phi'|` over the line.
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz_argmax().1
    }

    /// Values at breakpoints and interior critical points, ascending.
    /// Values closer than the continuity tolerance are merged.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().flat_map(|s| [s.fu, s.fv]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|b, a| close(*a, *b, 1e3 * CONTINUITY_TOL));
        v
    }

    /// `[min, max]` of `phi` over the window.
    pub fn window_range(&self) -> (f64, f64) {
        self.segments.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            let (a, b) = s.range();
            (lo.min(a), hi.max(b))
        })
    }

    /// Point of `[u, v]` where the monotone segment reaches `y`.
    fn solve(&self, seg: &Segment, y: f64) -> f64 {
        let p = &self.pieces[seg.piece];
        if p.coeff(2) == 0.0 && p.coeff(3) == 0.0 && p.coeff(1) != 0.0 {
            let x = p.interval[0] + (y - p.coeffs[0]) / p.coeffs[1];
            return x.clamp(seg.u, seg.v);
        }
        let increasing = seg.fv >= seg.fu;
        let (mut a, mut b) = (seg.u, seg.v);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let below = p.eval(mid) < y;
            if below == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// `phi^{-1}([a, b])` with touching components merged.
    pub fn preimage_intervals(&self, target: (f64, f64)) -> Result<IntervalSet> {
        let (a, b) = if target.0 <= target.1 { target } else { (target.1, target.0) };
        let mut raw: Vec<[f64; 2]> = Vec::new();
        for seg in &self.segments {
            let (lo, hi) = seg.range();
            if hi < a || lo > b {
                continue;
            }
            if seg.fu == seg.fv {
                raw.push([seg.u, seg.v]);
                continue;
            }
            let (start, end) = if seg.fv > seg.fu {
                let start = if seg.fu >= a { seg.u } else { self.solve(seg, a) };
                let end = if seg.fv <= b { seg.v } else { self.solve(seg, b) };
                (start, end)
            } else {
                let start = if seg.fu <= b { seg.u } else { self.solve(seg, b) };
                let end = if seg.fv >= a { seg.v } else { self.solve(seg, a) };
                (start, end)
            };
            raw.push([start, end.max(start)]);
        }
        let (wl, wr) = self.window();
        let (vl, vr) = (self.pieces[0].eval(wl), self.pieces[self.pieces.len() - 1].eval(wr));
        // Tails: phi(x) = v + s (x - edge) beyond each window edge.
        for (side, v, s, edge) in [(-1.0, vl, self.tails.left_slope, wl), (1.0, vr, self.tails.right_slope, wr)] {
            if s == 0.0 {
                if a <= v && v <= b {
                    return Err(LabError::UnboundedPreimage(v));
                }
                continue;
            }
            let xa = edge + (a - v) / s;
            let xb = edge + (b - v) / s;
            let (mut l, mut r) = (xa.min(xb), xa.max(xb));
            if side < 0.0 {
                r = r.min(edge);
            } else {
                l = l.max(edge);
            }
            if l <= r {
                raw.push([l, r]);
            }
        }
        Ok(IntervalSet::from_unsorted(raw))
    }

    /// Number of solutions of `phi(x) = y`; exact for `y` that is not a
    /// critical value.
    pub fn preimage_count(&self, y: f64) -> usize {
        let mut n = self
            .segments
            .iter()
            .filter(|s| {
                let (lo, hi) = s.range();
                lo < y && y < hi
            })
            .count();
        // Solutions at segment endpoints (only possible at critical values).
        let (wl, wr) = self.window();
        let (vl, vr) = (self.eval(wl), self.eval(wr));
        if (y - vl) * self.tails.left_slope < 0.0 {
            n += 1;
        }
        if (y - vr) * self.tails.right_slope > 0.0 {
            n += 1;
        }
        n
    }

    /// `sup_y #phi^{-1}(y)` over regular values: one test value between
    /// each pair of consecutive critical values and one beyond each end.
    pub fn max_preimage_count(&self) -> usize {
        let cv = self.critical_values();
        let mut tests = vec![cv[0] - 1.0, cv[cv.len() - 1] + 1.0];
        tests.extend(cv.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        tests.into_iter().map(|y| self.preimage_count(y)).max().unwrap_or(0)
    }

    /// Left endpoints searched for intervals of width `w`.
    fn endpoint_candidates(&self, w: f64, params: &SearchParams) -> Vec<f64> {
        let (lo, hi) = self.window_range();
        let span = (hi - lo).max(1.0);
        let step = params.step_fraction * span;
        let start = lo - w - step;
        let stop = hi + step;
        let n = ((stop - start) / step).ceil() as usize;
        let mut cands: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
        for v in self.critical_values() {
            cands.push(v);
            cands.push(v - w);
            cands.push(v - 0.5 * w);
        }
        cands
    }

    fn sup_over(&self, w: f64, params: &SearchParams) -> Result<SupEstimate> {
        let cands = self.endpoint_candidates(w, params);
        let values: Vec<Result<(f64, f64)>> =
            cands.par_iter().map(|&c| Ok((self.preimage_intervals((c, c + w))?.total_length(), c))).collect();
        let mut best = SupEstimate { value: 0.0, argmax: [cands[0], cands[0] + w] };
        for v in values {
            let (len, c) = v?;
            if len > best.value {
                best = SupEstimate { value: len, argmax: [c, c + w] };
            }
        }
        Ok(best)
    }

    /// `U(phi) = sup |phi^{-1}(I)|` over unit intervals. A flat tail makes
    /// this an [`LabError::UnboundedPreimage`] error, i.e. `U = inf`.
    pub fn u_functional(&self) -> Result<SupEstimate> {
        self.u_functional_with(&SearchParams::default())
    }

    pub fn u_functional_with(&self, params: &SearchParams) -> Result<SupEstimate> {
        self.sup_over(1.0, params)
    }

    /// `U(phi)`, with infinity for flat tails.
    pub fn u_value(&self) -> f64 {
        match self.u_functional() {
            Ok(e) => e.value,
            Err(_) => f64::INFINITY,
        }
    }

    /// `M(phi) = sup |phi^{-1}(I)| / |I|` searched on widths `2^k`.
    pub fn m_functional(&self) -> Result<MEstimate> {
        self.m_functional_with(&SearchParams::default())
    }

    pub fn m_functional_with(&self, params: &SearchParams) -> Result<MEstimate> {
        let mut ladder = Vec::new();
        for k in (-(params.finest as i32)..=params.widest as i32).rev() {
            let w = 2f64.powi(k);
            ladder.push((w, self.sup_over(w, params)?.value / w));
        }
        let unit = ladder.iter().find(|(w, _)| *w == 1.0).map(|x| x.1).unwrap_or(0.0);
        let n = ladder.len();
        let growing = n >= 2 && ladder[n - 1].1 > ladder[n - 2].1 * (1.0 + 1e-9);
        let infinite = growing && ladder[n - 1].1 > params.blowup * unit;
        Ok(MEstimate { ladder, infinite })
    }

    /// Samples `phi` on a grid (Constant extension).
    pub fn sample<T: Scalar>(&self, grid: &Grid<T>) -> GridFunction<T> {
        GridFunction::from_fn(grid, Extension::Constant, |x| T::lit(self.eval(x.to_f64_lossy())))
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}

/// The derivative of a [`LineMap`]: piecewise quadratic, constant on the
/// tails.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeView<'a> {
    map: &'a LineMap,
}

impl DerivativeView<'_> {
    pub fn eval(&self, x: f64) -> f64 {
        self.map.deriv(x)
    }

    /// Derivative jumps `(breakpoint, |jump|)` that exceed [`C1_TOL`],
    /// including the window ends against the tail slopes.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let m = self.map;
        let mut out = Vec::new();
        let (wl, wr) = m.window();
        let first = &m.pieces[0];
        let last = &m.pieces[m.pieces.len() - 1];
        let mut check = |x: f64, a: f64, b: f64| {
            let j = (a - b).abs();
            if j > C1_TOL {
                out.push((x, j));
            }
        };
        check(wl, m.tails.left_slope, first.deriv(wl));
        for w in m.pieces.windows(2) {
            let x = w[0].interval[1];
            check(x, w[0].deriv(x), w[1].deriv(w[1].interval[0]));
        }
        check(wr, last.deriv(wr), m.tails.right_slope);
        out
    }

    /// Errors with [`LabError::NotC1`] at the first jump.
    pub fn require_c1(&self) -> Result<()> {
        match self.jumps().first() {
            Some(&(at, jump)) => Err(LabError::NotC1 { at, jump }),
            None => Ok(()),
        }
    }

    /// Samples `phi'` (Constant extension: the tails have constant slope).
    pub fn sample<T: Scalar>(&self, grid: &Grid<T>) -> GridFunction<T> {
        GridFunction::from_fn(grid, Extension::Constant, |x| T::lit(self.eval(x.to_f64_lossy())))
    }
}

/// `C_phi f` on `f`'s grid: `f(phi(x_i))` with `f` linearly interpolated.
/// The result is zero-extended when `f` is and both edge values vanish.
pub fn compose<T: Scalar>(f: &GridFunction<T>, phi: &LineMap) -> GridFunction<T> {
    let samples: Vec<T> = (0..f.len()).map(|i| f.eval(T::lit(phi.eval(f.x(i).to_f64_lossy())))).collect();
    let zero_edges = samples[0] == T::zero() && samples[samples.len() - 1] == T::zero();
    let ext = if f.extension() == Extension::Zero && zero_edges { Extension::Zero } else { Extension::Constant };
    GridFunction::new(samples, f.spacing(), f.origin(), ext).expect("same lattice as f")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn sine_map() -> LineMap {
        let xs: Vec<f64> = (0..=400).map(|i| -10.0 + i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let ds: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        LineMap::hermite_nodes(&xs, &ys, &ds, Tails { left_slope: -1.0, right_slope: -1.0 }, false).unwrap()
    }

    fn wobble() -> LineMap {
        LineMap::hermite(|x| x + 0.5 * x.sin(), |x| 1.0 + 0.5 * x.cos(), (-4.0 * PI, 4.0 * PI), 503).unwrap()
    }

    #[test]
    fn affine_maps() {
        let phi = LineMap::affine(2.0, 0.0, (-16.0, 16.0)).unwrap();
        assert_eq!(phi.lipschitz_constant(), 2.0);
        assert_eq!(phi.derivative().eval(3.3), 2.0);
        assert_eq!(phi.max_preimage_count(), 1);
        assert!((phi.u_functional().unwrap().value - 0.5).abs() < 1e-12);
        let half = LineMap::affine(0.5, 0.0, (-16.0, 16.0)).unwrap();
        assert!((half.u_functional().unwrap().value - 2.0).abs() < 1e-12);
        let id = LineMap::identity();
        assert!((id.u_functional().unwrap().value - 1.0).abs() < 1e-12);
        let m = id.m_functional().unwrap();
        assert!(!m.infinite);
        assert!((m.value().unwrap() - 1.0).abs() < 1e-6);
        let m2 = phi.m_functional().unwrap();
        assert!((m2.value().unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn piecewise_affine_slopes() {
        let phi = LineMap::piecewise_affine(
            &[0.0, 1.0, 2.0, 3.0],
            &[0.0, 0.5, -2.5, -1.5],
            Tails { left_slope: 0.5, right_slope: 1.0 },
        )
        .unwrap();
        assert_eq!(phi.lipschitz_constant(), 3.0);
        assert_eq!(phi.deriv(0.5), 0.5);
        assert_eq!(phi.deriv(1.5), -3.0);
        assert_eq!(phi.deriv(2.5), 1.0);
        assert!(!phi.derivative().jumps().is_empty());
    }

    #[test]
    fn preimage_examples() {
        let id = LineMap::identity();
        assert_eq!(id.preimage_intervals((0.0, 1.0)).unwrap().intervals(), &[[0.0, 1.0]]);
        let sq = LineMap::polynomial(&[0.0, 0.0, 1.0], (-4.0, 4.0)).unwrap();
        let pre = sq.preimage_intervals((0.0, 1.0)).unwrap();
        assert_eq!(pre.count(), 1);
        let [l, r] = pre.intervals()[0];
        assert!((l + 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        assert_eq!(sq.max_preimage_count(), 2);
        let u = sq.u_functional().unwrap();
        assert!((u.value - 2.0).abs() < 1e-9, "{u:?}");
    }

    #[test]
    fn sine_map_has_seven_components() {
        let phi = sine_map();
        let pre = phi.preimage_intervals((-0.5, 0.5)).unwrap();
        assert_eq!(pre.count(), 7, "{:?}", pre);
        for (k, iv) in pre.intervals().iter().enumerate() {
            let c = (k as f64 - 3.0) * PI;
            assert!(iv[0] < c && c < iv[1]);
        }
        assert_eq!(phi.max_preimage_count(), 7);
    }

    #[test]
    fn wobble_derivative_and_lipschitz() {
        let phi = wobble();
        for i in 0..1000 {
            let x = -12.0 + 0.024 * i as f64;
            assert!((phi.deriv(x) - (1.0 + 0.5 * x.cos())).abs() < 1e-4);
        }
        assert!((phi.lipschitz_constant() - 1.5).abs() < 1e-4);
        assert!(phi.derivative().require_c1().is_ok());
    }

    #[test]
    fn x_squared_m_diverges() {
        let sq = LineMap::polynomial(&[0.0, 0.0, 1.0], (-4.0, 4.0)).unwrap();
        let m = sq.m_functional().unwrap();
        assert!(m.infinite);
        for &(w, v) in &m.ladder {
            if w <= 1.0 {
                let exact = 2.0 / w.sqrt();
                assert!((v / exact - 1.0).abs() < 0.05, "w={w}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn flat_tail_is_unbounded() {
        let phi =
            LineMap::piecewise_affine(&[0.0, 1.0], &[0.0, 1.0], Tails { left_slope: 0.0, right_slope: 1.0 }).unwrap();
        assert_eq!(phi.preimage_intervals((-0.5, 0.5)), Err(LabError::UnboundedPreimage(0.0)));
        assert!(phi.preimage_intervals((0.5, 2.0)).is_ok());
        assert_eq!(phi.u_value(), f64::INFINITY);
    }

    #[test]
    fn c1_flag_rejects_kinks() {
        let pieces = vec![
            Piece { interval: [0.0, 1.0], coeffs: vec![0.0, 1.0] },
            Piece { interval: [1.0, 2.0], coeffs: vec![1.0, 2.0] },
        ];
        let tails = Tails { left_slope: 1.0, right_slope: 2.0 };
        assert!(matches!(LineMap::new(pieces.clone(), tails, true), Err(LabError::NotC1 { .. })));
        assert!(LineMap::new(pieces, tails, false).is_ok());
    }

    #[test]
    fn json_schema_round_trip() {
        let phi = sine_map();
        let text = serde_json::to_string(&phi).unwrap();
        let back: LineMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back.pieces(), phi.pieces());
        let raw = r#"{"pieces":[{"interval":[0,1],"coeffs":[0,1]},{"interval":[1,2],"coeffs":[2,1]}],"tails":{"left_slope":1,"right_slope":1}}"#;
        assert!(serde_json::from_str::<LineMap>(raw).is_err());
        let set = IntervalSet::from_unsorted(vec![[2.0, 3.0], [0.0, 1.0], [1.0, 1.5]]);
        assert_eq!(serde_json::to_string(&set).unwrap(), "[[0.0,1.5],[2.0,3.0]]");
    }

    #[test]
    fn inverse_of_wobble() {
        let phi = wobble();
        let inv = phi.inverse(801).unwrap();
        for i in 0..200 {
            let x = -10.0 + 0.1 * i as f64;
            assert!((inv.eval(phi.eval(x)) - x).abs() < 1e-6);
        }
        assert!(sine_map().inverse(100).is_err());
    }

    #[test]
    fn shift_invariance() {
        let phi = sine_map();
        let shifted = phi.shifted(0.75);
        assert_eq!(phi.max_preimage_count(), shifted.max_preimage_count());
        let a = phi.u_functional().unwrap().value;
        let b = shifted.u_functional().unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
