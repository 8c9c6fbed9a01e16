//! Numerical checks of the boundedness criteria for `C_phi f = f(phi)`.
//!
//! Operator norms are only ever bounded from below, by ratios over explicit
//! witness families. Verdicts say "consistent with" and never more.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{
    besov_norm_diff, besov_seminorm_diff, sobolev_norm_diff, sobolev_seminorm_diff, DyadicHGrid, SpaceParams,
};
use crate::catalog::{catalog_family, FunctionSpec, DECAY_THRESHOLD};
use crate::error::{LabError, Result};
use crate::gadgets::{zigzag_g, Ramp};
use crate::grid::{lp_norm, sample_on, Extension, Grid, GridFunction, DEFAULT_COUNT, DEFAULT_WINDOW};
use crate::line_map::LineMap;
use crate::multipliers::{make_psi, msq_norm_lower, multiplier_norm_lower, unif_norm, MsqSearch, Profile};
use crate::splitting::{IntervalFamily, Partition};

pub const SCHEMA_VERSION: u32 = 1;

/// The target space of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case")]
pub enum Space {
    Besov(SpaceParams),
    /// Bessel potential space `H^s_p`; `m` is the difference order.
    Sobolev {
        s: f64,
        p: f64,
        m: usize,
    },
}

impl Space {
    pub fn besov(s: f64, p: f64, q: f64) -> Result<Self> {
        Ok(Space::Besov(SpaceParams::with_default_order(s, p, q)?))
    }

    pub fn sobolev(s: f64, p: f64) -> Result<Self> {
        let sp = Space::Sobolev { s, p, m: s.floor() as usize + 1 };
        sp.validate()?;
        Ok(sp)
    }

    pub fn s(&self) -> f64 {
        match self {
            Space::Besov(sp) => sp.s,
            Space::Sobolev { s, .. } => *s,
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            Space::Besov(sp) => sp.p,
            Space::Sobolev { p, .. } => *p,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Space::Besov(sp) => sp.m,
            Space::Sobolev { m, .. } => *m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Space::Besov(sp) => sp.validate(),
            Space::Sobolev { s, p, m } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(LabError::InvalidSpace(format!("H^s_p needs 1 < p < inf, got p = {p}")));
                }
                if !(*s >= 0.0) || (*m as f64) <= *s {
                    return Err(LabError::InvalidSpace(format!("m > s >= 0 required (m = {m}, s = {s})")));
                }
                Ok(())
            }
        }
    }

    /// Same space with smoothness `s - 1`, same difference order.
    pub fn lowered(&self) -> Result<Self> {
        let out = match self {
            Space::Besov(sp) => Space::Besov(SpaceParams::new(sp.s - 1.0, sp.p, sp.q, sp.m)?),
            Space::Sobolev { s, p, m } => Space::Sobolev { s: s - 1.0, p: *p, m: *m },
        };
        out.validate()?;
        Ok(out)
    }

    pub fn norm(&self, f: &GridFunction<f64>, hg: &DyadicHGrid) -> Result<f64> {
        match self {
            Space::Besov(sp) => besov_norm_diff(f, sp, hg),
            Space::Sobolev { s, p, m } => sobolev_norm_diff(f, *s, *p, *m, hg),
        }
    }

    pub fn seminorm(&self, f: &GridFunction<f64>, hg: &DyadicHGrid) -> Result<f64> {
        match self {
            Space::Besov(sp) => besov_seminorm_diff(f, sp, hg),
            Space::Sobolev { s, p, m } => sobolev_seminorm_diff(f, *s, *p, *m, hg),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Besov(sp) => write!(f, "B(s={},p={},q={},m={})", sp.s, sp.p, sp.q, sp.m),
            Space::Sobolev { s, p, m } => write!(f, "H(s={s},p={p},m={m})"),
        }
    }
}

/// Grids, sweeps and tolerances shared by every check. Echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub window: (f64, f64),
    pub count: usize,
    pub hgrid: DyadicHGrid,
    /// Centers `a` of the unit-bump and cutoff sweeps.
    pub a_range: (f64, f64),
    pub a_step: f64,
    pub eps_sweep: Vec<f64>,
    /// Half-width and sample count of the fine grid for the steepness check.
    pub fine_half_width: f64,
    pub fine_count: usize,
    /// Ramps resolved by fewer grid cells than this are skipped.
    pub min_ramp_cells: f64,
    /// Scale `r` of the ramp witness.
    pub ramp_scale: f64,
    /// Relative slack on the necessity inequalities.
    pub rel_tol: f64,
    /// Accepted ratio between implied and measured Lipschitz constants.
    pub lip_factor: f64,
    pub chain_tol: f64,
    pub psi: Profile,
    pub msq: MsqSearch,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            count: DEFAULT_COUNT,
            hgrid: DyadicHGrid::default(),
            a_range: (-4.0, 4.0),
            a_step: 0.25,
            eps_sweep: vec![0.2, 0.1, 0.05],
            fine_half_width: 4.0,
            fine_count: (1 << 14) + 1,
            min_ramp_cells: 32.0,
            ramp_scale: 0.5,
            rel_tol: 0.1,
            lip_factor: 2.0,
            chain_tol: 1e-4,
            psi: Profile::default(),
            msq: MsqSearch::default(),
        }
    }
}

impl LabConfig {
    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::over(self.window.0, self.window.1, self.count)
    }

    fn a_values(&self) -> Vec<f64> {
        let n = ((self.a_range.1 - self.a_range.0) / self.a_step).round() as usize;
        (0..=n).map(|k| self.a_range.0 + k as f64 * self.a_step).collect()
    }
}

// ---------------------------------------------------------------------------
// Witness families and operator-norm lower bounds

/// `f(phi(x_i))` with `f` evaluated exactly. Zero-extended when `f` vanishes
/// at infinity and both edge samples are below the decay threshold.
pub fn compose_spec(spec: &FunctionSpec, phi: &LineMap, grid: &Grid<f64>) -> GridFunction<f64> {
    let samples: Vec<f64> = grid.points().map(|x| spec.eval(phi.eval(x))).collect();
    let vanishes = spec.support().is_some()
        || matches!(
            spec,
            FunctionSpec::Gaussian { .. }
                | FunctionSpec::XGauss
                | FunctionSpec::ModGauss { .. }
                | FunctionSpec::SinGauss { .. }
        );
    let edges = samples[0].abs().max(samples[samples.len() - 1].abs());
    let ext = if vanishes && edges < DECAY_THRESHOLD { Extension::Zero } else { Extension::Constant };
    let samples = if ext == Extension::Zero {
        samples.into_iter().map(|v| if v.abs() < DECAY_THRESHOLD * 1e-3 { 0.0 } else { v }).collect()
    } else {
        samples
    };
    GridFunction::new(samples, grid.spacing, grid.origin, ext).expect("grid is valid")
}

/// A labelled witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub spec: FunctionSpec,
}

/// Catalog plus unit-bump, ramp and linear-cutoff sweeps; zigzag translates
/// are added for `p = inf`.
pub fn default_family(space: &Space, cfg: &LabConfig) -> Vec<Witness> {
    let mut out: Vec<Witness> = catalog_family()
        .into_iter()
        .enumerate()
        .map(|(i, spec)| Witness { label: format!("catalog#{i}"), spec })
        .collect();
    for a in cfg.a_values() {
        out.push(Witness { label: format!("unit_bump a={a}"), spec: FunctionSpec::UnitBump { a } });
    }
    for &eps in &cfg.eps_sweep {
        out.push(Witness {
            label: format!("eta eps={eps}"),
            spec: FunctionSpec::EtaEps { eps, center: 0.0, scale: 1.0, ramp: Ramp::Smooth },
        });
    }
    for a in cfg.a_values() {
        out.push(Witness { label: format!("linear_cutoff a={a}"), spec: FunctionSpec::LinearCutoff { a, r: 0.5 } });
    }
    if space.p().is_infinite() {
        for l in 0..4 {
            let shift = 2.0 * l as f64;
            out.push(Witness { label: format!("zigzag shift={shift}"), spec: FunctionSpec::Zigzag { m: 1, shift } });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormEstimate {
    pub value: f64,
    pub argmax: String,
    pub used: usize,
    pub skipped: Vec<String>,
}

/// `max ||C_phi f|| / ||f||` over witnesses, composed exactly. Witnesses
/// whose composition does not vanish at the window edges are skipped when
/// `p < inf`, as are witnesses of zero norm.
pub fn opnorm_lower(phi: &LineMap, space: &Space, family: &[Witness], cfg: &LabConfig) -> Result<OpnormEstimate> {
    space.validate()?;
    if family.is_empty() {
        return Err(LabError::DegenerateFamily("no witnesses".into()));
    }
    let grid = cfg.grid()?;
    let finite_p = space.p().is_finite();
    let ratios = family
        .par_iter()
        .map(|w| -> Result<Option<f64>> {
            let f = sample_on(&w.spec, &grid)?;
            let c = compose_spec(&w.spec, phi, &grid);
            if finite_p && (f.extension() != Extension::Zero || c.extension() != Extension::Zero) {
                return Ok(None);
            }
            let denom = space.norm(&f.trim_zeros(), &cfg.hgrid)?;
            if !(denom > 0.0) {
                return Ok(None);
            }
            Ok(Some(space.norm(&c.trim_zeros(), &cfg.hgrid)? / denom))
        })
        .collect::<Result<Vec<_>>>()?;
    best_ratio(family.iter().map(|w| w.label.clone()).collect(), ratios)
}

/// [`opnorm_lower`] for sampled witnesses, composed by interpolation.
pub fn opnorm_lower_sampled(
    phi: &LineMap,
    space: &Space,
    family: &[GridFunction<f64>],
    cfg: &LabConfig,
) -> Result<OpnormEstimate> {
    space.validate()?;
    if family.is_empty() {
        return Err(LabError::DegenerateFamily("no witnesses".into()));
    }
    let ratios = family
        .par_iter()
        .map(|f| -> Result<Option<f64>> {
            let c = crate::line_map::compose(f, phi);
            if space.p().is_finite() && c.extension() != Extension::Zero {
                return Ok(None);
            }
            let denom = space.norm(f, &cfg.hgrid)?;
            if !(denom > 0.0) {
                return Ok(None);
            }
            Ok(Some(space.norm(&c, &cfg.hgrid)? / denom))
        })
        .collect::<Result<Vec<_>>>()?;
    best_ratio((0..family.len()).map(|i| format!("member#{i}")).collect(), ratios)
}

fn best_ratio(labels: Vec<String>, ratios: Vec<Option<f64>>) -> Result<OpnormEstimate> {
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = Vec::new();
    let mut used = 0;
    for (i, r) in ratios.into_iter().enumerate() {
        match r {
            Some(v) => {
                used += 1;
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, i));
                }
            }
            None => skipped.push(labels[i].clone()),
        }
    }
    match best {
        Some((value, i)) => Ok(OpnormEstimate { value, argmax: labels[i].clone(), used, skipped }),
        None => Err(LabError::DegenerateFamily("every witness was skipped".into())),
    }
}

// ---------------------------------------------------------------------------
// Fragments

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Passed because the hypothesis is void (e.g. a flat map).
    Vacuous,
    /// Could not be evaluated on the configured grids.
    Skipped,
}

/// Outcome of one check, with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub name: String,
    pub status: Status,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Fragment {
    fn new(name: &str) -> Self {
        Self { name: name.into(), status: Status::Pass, values: BTreeMap::new(), notes: Vec::new() }
    }

    fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    fn fail(&mut self, note: String) {
        self.status = Status::Fail;
        self.notes.push(note);
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Unit-bump witnesses: `||C_phi f_a||_p^p >= |phi^{-1}([a, a+1])|` for
/// every swept `a`, then `U^{1/p} <= opnorm ||f_0|| (1 + tol)`.
pub fn check_nec_u(phi: &LineMap, space: &Space, opnorm: f64, cfg: &LabConfig) -> Result<Fragment> {
    let p = space.p();
    let s = space.s();
    if !p.is_finite() {
        return Err(LabError::RangeRefused("the unit-interval functional is necessary only for p < inf".into()));
    }
    if !(s > (1.0 / p - 1.0).max(0.0)) {
        return Err(LabError::RangeRefused(format!("s = {s} must exceed max(0, 1/p - 1)")));
    }
    let mut frag = Fragment::new("nec_u");
    let grid = cfg.grid()?;
    let dx = grid.spacing;
    let results = cfg
        .a_values()
        .par_iter()
        .map(|&a| -> Result<Option<(f64, f64, usize)>> {
            let spec = FunctionSpec::UnitBump { a };
            let c = compose_spec(&spec, phi, &grid);
            if c.extension() != Extension::Zero {
                return Ok(None);
            }
            let pre = phi.preimage_intervals((a, a + 1.0))?;
            let w = lp_norm(&c, p)?;
            Ok(Some((w.powf(p), pre.total_length(), pre.count())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst_gap: f64 = 0.0;
    let mut max_len: f64 = 0.0;
    let mut used = 0;
    for (k, r) in results.into_iter().enumerate() {
        let Some((wp, len, comps)) = r else { continue };
        used += 1;
        max_len = max_len.max(len);
        // Rectangle rule may lose up to one cell per component end.
        let slack = 2.0 * comps as f64 * dx + 1e-9;
        worst_gap = worst_gap.max(len - wp - slack);
        if wp < len - slack {
            frag.fail(format!("a = {}: ||C f_a||^p = {wp:.6} < |preimage| = {len:.6}", cfg.a_values()[k]));
        }
    }
    frag.set("witnesses", used as f64);
    frag.set("max_preimage_length", max_len);
    if used == 0 {
        frag.status = Status::Skipped;
        frag.notes.push("no unit bump composition fits in the window".into());
    }

    let u = phi.u_value();
    frag.set("u", u);
    if !u.is_finite() {
        frag.fail("U is infinite (flat tail)".into());
        return Ok(frag);
    }
    let ub = space.norm(&sample_on(&FunctionSpec::UnitBump { a: 0.0 }, &grid)?.trim_zeros(), &cfg.hgrid)?;
    let lhs = u.powf(1.0 / p);
    let rhs = opnorm * ub;
    frag.set("unit_bump_norm", ub);
    frag.set("lhs", lhs);
    frag.set("rhs", rhs);
    frag.set("kappa", lhs / rhs);
    if lhs > rhs * (1.0 + cfg.rel_tol) {
        frag.fail(format!("U^(1/p) = {lhs:.6} exceeds opnorm * ||f_0|| = {rhs:.6}"));
    }
    Ok(frag)
}

/// `(int_delta^{min(1, delta+P)} (h - delta)^{q/p} h^{-sq} dh/h)^{1/q}`:
/// the seminorm of a function equal to 1 on a plateau of length `P` that
/// drops to 0 over a ramp of length `delta` is at least this.
pub fn ramp_lower_bound(delta: f64, plateau: f64, s: f64, p: f64, q: f64) -> f64 {
    let hi = 1f64.min(delta + plateau);
    if hi <= delta {
        return 0.0;
    }
    let g = |h: f64| {
        let meas = if p.is_infinite() { 1.0 } else { (h - delta).powf(1.0 / p) };
        meas * h.powf(-s)
    };
    if q.is_infinite() {
        let n = 4000;
        return (1..=n).map(|k| g(delta + (hi - delta) * k as f64 / n as f64)).fold(0.0, f64::max);
    }
    // Composite Simpson in u = h - delta, which is smooth away from 0.
    let n = 4000;
    let step = (hi - delta) / n as f64;
    let f = |u: f64| {
        let h = delta + u;
        g(h).powf(q) / h
    };
    let mut acc = f(0.0) + f(hi - delta);
    for k in 1..n {
        acc += f(k as f64 * step) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (acc * step / 3.0).powf(1.0 / q)
}

/// Steepest point of `phi` on the fine grid: ties go to the point nearest
/// the grid center.
fn steepest_point(phi: &LineMap, grid: &Grid<f64>) -> (f64, f64) {
    let center = 0.5 * (grid.window().0 + grid.window().1);
    let mut best = (center, phi.deriv(center).abs());
    for x in grid.points() {
        let v = phi.deriv(x).abs();
        let tie = (v - best.1).abs() <= 1e-12 * best.1.max(1.0);
        if (v > best.1 && !tie) || (tie && (x - center).abs() < (best.0 - center).abs()) {
            best = (x, v);
        }
    }
    best
}

/// Ramp witness at the steepest point: checks the plateau/ramp lower bound
/// on the composition and compares the slope implied by
/// `|C_phi f| / |f| ~ Lip^{s - 1/p}` with the Lipschitz constant.
pub fn check_nec_lipschitz(phi: &LineMap, space: &Space, cfg: &LabConfig) -> Result<Fragment> {
    let (s, p) = (space.s(), space.p());
    let q = match space {
        Space::Besov(sp) => sp.q,
        Space::Sobolev { .. } => 2.0,
    };
    let mut frag = Fragment::new("nec_lipschitz");
    let lip = phi.lipschitz_constant();
    frag.set("lipschitz", lip);
    if lip == 0.0 {
        frag.status = Status::Vacuous;
        frag.notes.push("phi is flat".into());
        return Ok(frag);
    }

    let hw = cfg.fine_half_width;
    let probe = Grid::over(-hw, hw, cfg.fine_count)?;
    let (x0, slope) = steepest_point(phi, &probe);
    frag.set("x_star", x0);
    frag.set("local_slope", slope);
    if slope == 0.0 {
        frag.status = Status::Vacuous;
        frag.notes.push("phi is flat on the witness region".into());
        return Ok(frag);
    }
    let xgrid = Grid::over(x0 - hw, x0 + hw, cfg.fine_count)?;
    let dx = xgrid.spacing;
    let r = cfg.ramp_scale;
    let y_top = phi.eval(x0);
    // Decreasing maps are handled by ramping on the other side.
    let sign = if phi.deriv(x0) >= 0.0 { 1.0 } else { -1.0 };
    let center = y_top - sign * r;
    let ygrid = Grid::over(center - hw, center + hw, cfg.fine_count)?;

    let mut implied_last = None;
    for &eps in &cfg.eps_sweep {
        let ramp_y = eps * r;
        let ramp_x = ramp_y / slope;
        if ramp_x < cfg.min_ramp_cells * dx {
            frag.notes.push(format!("eps = {eps}: ramp spans fewer than {} grid cells, skipped", cfg.min_ramp_cells));
            continue;
        }
        let spec = FunctionSpec::EtaEps { eps, center, scale: r, ramp: Ramp::Smooth };
        let c = compose_spec(&spec, phi, &xgrid);
        if c.extension() != Extension::Zero {
            frag.notes.push(format!("eps = {eps}: composition leaves the fine window, skipped"));
            continue;
        }
        let f = sample_on(&spec, &ygrid)?;
        let sem_c = space.seminorm(&c.trim_zeros(), &cfg.hgrid)?;
        let sem_f = space.seminorm(&f.trim_zeros(), &cfg.hgrid)?;
        let ramp_edge = if sign > 0.0 { (y_top, y_top + ramp_y) } else { (y_top - ramp_y, y_top) };
        let delta =
            phi.preimage_intervals(ramp_edge)?.intervals().iter().map(|iv| iv[1] - iv[0]).fold(f64::INFINITY, f64::min);
        let plateau_set = phi.preimage_intervals((center - r, center + r))?;
        let plateau = plateau_set.intervals().iter().map(|iv| iv[1] - iv[0]).fold(0.0, f64::max);
        let lb = ramp_lower_bound(delta, plateau, s, p, q);
        let implied = (sem_c / sem_f).powf(1.0 / (s - 1.0 / p));
        frag.set(&format!("eps={eps}:seminorm_composed"), sem_c);
        frag.set(&format!("eps={eps}:seminorm_witness"), sem_f);
        frag.set(&format!("eps={eps}:ramp_preimage"), delta);
        frag.set(&format!("eps={eps}:lower_bound"), lb);
        frag.set(&format!("eps={eps}:implied_slope"), implied);
        if sem_c < lb * (1.0 - cfg.rel_tol) {
            frag.fail(format!("eps = {eps}: seminorm {sem_c:.6e} below the ramp lower bound {lb:.6e}"));
        }
        implied_last = Some(implied);
    }
    match implied_last {
        None => {
            frag.status = Status::Skipped;
            frag.notes.push("no admissible eps on the fine grid".into());
        }
        Some(implied) => {
            frag.set("implied_slope", implied);
            if implied > cfg.lip_factor * slope || implied * cfg.lip_factor < slope {
                frag.fail(format!("implied slope {implied:.4} not within a factor {} of {slope:.4}", cfg.lip_factor));
            }
        }
    }
    Ok(frag)
}

/// Chain rule on the grid: `(f o phi)'` by differentiation of the samples
/// against `phi' . f'(phi)`, then the norm comparison
/// `||C_phi f||_s` against `||C_phi f||_p + ||phi' . f'(phi)||_{s-1}`.
pub fn check_sufficiency_chain(phi: &LineMap, f: &FunctionSpec, space: &Space, cfg: &LabConfig) -> Result<Fragment> {
    let (s, p) = (space.s(), space.p());
    if !(s > 1f64.max(1.0 / p)) {
        return Err(LabError::RangeRefused(format!("chain-rule estimate needs s > max(1, 1/p), got s = {s}")));
    }
    phi.derivative().require_c1()?;
    let mut frag = Fragment::new("chain_rule");
    let grid = cfg.grid()?;
    let c = compose_spec(f, phi, &grid);
    let grid_deriv = c.derivative();
    let analytic = GridFunction::from_fn(&grid, c.extension(), |x| phi.deriv(x) * f.deriv(phi.eval(x)));
    let n = grid.count;
    let residual = (3..n - 3).map(|i| (grid_deriv.samples()[i] - analytic.samples()[i]).abs()).fold(0.0, f64::max);
    frag.set("residual", residual);
    if !(residual < cfg.chain_tol) {
        frag.fail(format!("chain-rule residual {residual:.3e} exceeds {:.1e}", cfg.chain_tol));
    }
    if p.is_finite() && c.extension() != Extension::Zero {
        frag.notes.push("composition does not vanish at the window edges; norms skipped".into());
        return Ok(frag);
    }
    let lower = space.lowered()?;
    let lhs = space.norm(&c, &cfg.hgrid)?;
    let lp = lp_norm(&c, p)?;
    let rest = lower.norm(&analytic, &cfg.hgrid)?;
    frag.set("lhs", lhs);
    frag.set("lp", lp);
    frag.set("derivative_norm", rest);
    if lp + rest > 0.0 {
        frag.set("ratio", lhs / (lp + rest));
    }
    Ok(frag)
}

/// `p = inf` witnesses: linear cutoffs reconstruct `sup |phi'|`, and the
/// zigzag bounds `|phi'|_{s-1} <= 4^{1/q} opnorm ||g||`.
pub fn check_infinity_witness(phi: &LineMap, sp: &SpaceParams, opnorm: f64, cfg: &LabConfig) -> Result<Fragment> {
    if !sp.p.is_infinite() || !(sp.s > 1.0) {
        return Err(LabError::RangeRefused(format!("needs p = inf and s > 1, got p = {}, s = {}", sp.p, sp.s)));
    }
    let mut frag = Fragment::new("infinity_witness");
    let grid = cfg.grid()?;
    let zig = zigzag_g(&grid, 1)?;

    let sups = cfg
        .a_values()
        .par_iter()
        .map(|&a| -> Result<Option<f64>> {
            let spec = FunctionSpec::LinearCutoff { a: a + 0.5, r: 0.5 };
            let d = compose_spec(&spec, phi, &grid).derivative();
            let pre = phi.preimage_intervals((a, a + 1.0))?;
            let mut best: Option<f64> = None;
            for (i, x) in grid.points().enumerate() {
                if i < 3 || i + 3 >= grid.count || !pre.contains(x) {
                    continue;
                }
                best = Some(best.unwrap_or(0.0).max(d.samples()[i].abs()));
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let recon = sups.iter().flatten().fold(0.0, |m: f64, &v| m.max(v));
    frag.set("reconstructed_lipschitz", recon);
    frag.set("lipschitz", phi.lipschitz_constant());

    let lower = SpaceParams::new(sp.s - 1.0, sp.p, sp.q, sp.m)?;
    let dphi = phi.derivative().sample(&grid);
    let direct = besov_seminorm_diff(&dphi, &lower, &cfg.hgrid)?;
    let gnorm = besov_norm_diff(&zig.g, sp, &cfg.hgrid)?;
    let bound = 4f64.powf(1.0 / sp.q) * opnorm * gnorm;
    frag.set("direct_seminorm", direct);
    frag.set("zigzag_norm", gnorm);
    frag.set("bound", bound);
    frag.set("direct_norm", direct + dphi.sup_abs());
    if direct > bound * (1.0 + cfg.rel_tol) {
        frag.fail(format!("|phi'|_(s-1) = {direct:.6} exceeds the zigzag bound {bound:.6}"));
    }
    Ok(frag)
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConsistentBounded,
    ConsistentUnbounded,
    Inconclusive,
}

/// Which characterization applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `1 < p < inf`, `s > 1 + 1/p`.
    BesovFinite,
    /// `p = inf`, `s > 1`.
    BesovInfinity,
    /// `H^s_p`, `1 < p < inf`, `s > 1 + 1/p`, `phi` a homeomorphism.
    Sobolev,
}

/// Strictly monotone with nonzero tails of one sign.
pub fn is_homeomorphism(phi: &LineMap) -> bool {
    let t = phi.tails();
    t.left_slope * t.right_slope > 0.0 && phi.max_preimage_count() == 1
}

/// The range gate. Errors name the gap the parameters fall in.
pub fn regime(phi: &LineMap, space: &Space) -> Result<Regime> {
    space.validate()?;
    let (s, p) = (space.s(), space.p());
    if p <= 1.0 {
        return Err(LabError::RangeRefused(format!(
            "p = {p}: for 0 < p <= 1 only necessary conditions are known, no characterization applies"
        )));
    }
    if p.is_infinite() {
        return match space {
            Space::Besov(_) if s > 1.0 => Ok(Regime::BesovInfinity),
            Space::Besov(_) => Err(LabError::RangeRefused(format!("p = inf needs s > 1, got s = {s}"))),
            Space::Sobolev { .. } => Err(LabError::RangeRefused("H^s_p needs p < inf".into())),
        };
    }
    let edge = 1.0 + 1.0 / p;
    if (1.0..=edge).contains(&s) {
        return Err(LabError::RangeRefused(format!("the case 1 <= s <= 1 + 1/p is open (s = {s}, 1 + 1/p = {edge})")));
    }
    if s < 1.0 {
        return Err(LabError::RangeRefused(format!("s = {s} < 1 lies outside the characterized range s > 1 + 1/p")));
    }
    match space {
        Space::Besov(_) => Ok(Regime::BesovFinite),
        Space::Sobolev { .. } if is_homeomorphism(phi) => Ok(Regime::Sobolev),
        Space::Sobolev { .. } => {
            Err(LabError::RangeRefused("the H^s_p characterization is stated for homeomorphisms only".into()))
        }
    }
}

/// Everything `classify` measured about the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Computed {
    pub u: f64,
    pub m_infinite: bool,
    pub lipschitz: f64,
    pub max_preimage: usize,
    pub opnorm_lower: OpnormEstimate,
    pub mult_lower: Option<f64>,
    pub unif: Option<f64>,
    pub msq_lower: Option<f64>,
    pub derivative_jumps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub runtime_ms: u128,
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub map: String,
    pub space: Space,
    pub regime: Regime,
    pub computed: Computed,
    pub fragments: Vec<Fragment>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
    pub config: LabConfig,
    /// Wall-clock data; excluded from reproducibility comparisons.
    pub metadata: Metadata,
}

impl CheckReport {
    pub fn any_failed(&self) -> bool {
        self.fragments.iter().any(Fragment::failed)
    }

    pub fn fragment(&self, name: &str) -> Option<&Fragment> {
        self.fragments.iter().find(|f| f.name == name)
    }

    /// The report with metadata zeroed, for byte comparisons.
    pub fn without_metadata(&self) -> Self {
        let mut out = self.clone();
        out.metadata = Metadata { runtime_ms: 0, timestamp_unix: 0 };
        out
    }
}

/// Testers for the multiplier estimate of `phi'`.
fn multiplier_testers(grid: &Grid<f64>, cfg: &LabConfig) -> Result<Vec<GridFunction<f64>>> {
    let psi = make_psi(cfg.psi)?;
    let mut out: Vec<GridFunction<f64>> = [-2, 0, 2].iter().map(|&z| psi.translate_on(grid, z)).collect();
    for spec in
        [FunctionSpec::gaussian(), FunctionSpec::ModGauss { freq: 3.0, width: 1.0 }, FunctionSpec::UnitBump { a: 0.0 }]
    {
        out.push(sample_on(&spec, grid)?);
    }
    Ok(out)
}

fn ratio_max(f: &GridFunction<f64>, space: &Space, testers: &[GridFunction<f64>], hg: &DyadicHGrid) -> Result<f64> {
    let ratios = testers
        .par_iter()
        .map(|g| -> Result<Option<f64>> {
            let d = space.norm(&g.trim_zeros(), hg)?;
            if !(d > 0.0) {
                return Ok(None);
            }
            Ok(Some(space.norm(&f.mul(g)?.trim_zeros(), hg)? / d))
        })
        .collect::<Result<Vec<_>>>()?;
    ratios
        .into_iter()
        .flatten()
        .reduce(f64::max)
        .ok_or_else(|| LabError::DegenerateFamily("every tester has zero norm".into()))
}

/// `sup |phi'|` is attained at a window edge while `|phi'|` is still
/// growing there: the window, not the map, set the Lipschitz constant.
fn window_limited(phi: &LineMap) -> Option<String> {
    let (wl, wr) = phi.window();
    let lip = phi.lipschitz_constant();
    let inside = |x: f64| x.clamp(wl, wr);
    for (x, outward) in [(wl, -1.0), (wr, 1.0)] {
        let d = phi.deriv(inside(x));
        let dd = phi.second_deriv(inside(x));
        if d.abs() >= lip * (1.0 - 1e-9) && d * dd * outward > 1e-3 * lip.max(1.0) {
            return Some(format!(
                "window-limited: sup |phi'| = {lip} is attained at the window edge x = {x} where |phi'| is still growing"
            ));
        }
    }
    None
}

/// Runs every applicable check and combines them into a verdict.
pub fn classify(label: &str, phi: &LineMap, space: &Space, cfg: &LabConfig) -> Result<CheckReport> {
    let start = std::time::Instant::now();
    let regime = regime(phi, space)?;
    let grid = cfg.grid()?;
    let p = space.p();

    let family = default_family(space, cfg);
    let opnorm = opnorm_lower(phi, space, &family, cfg)?;
    let jumps = phi.derivative().jumps();
    let c1 = jumps.is_empty();

    let ((nec_u, nec_lip), (chain, extra)) = rayon::join(
        || {
            rayon::join(
                || if p.is_finite() { Some(check_nec_u(phi, space, opnorm.value, cfg)) } else { None },
                || check_nec_lipschitz(phi, space, cfg),
            )
        },
        || {
            rayon::join(
                || if c1 { Some(check_sufficiency_chain(phi, &FunctionSpec::gaussian(), space, cfg)) } else { None },
                || match space {
                    Space::Besov(sp) if p.is_infinite() => Some(check_infinity_witness(phi, sp, opnorm.value, cfg)),
                    _ => None,
                },
            )
        },
    );
    let mut fragments = Vec::new();
    if let Some(f) = nec_u {
        fragments.push(f?);
    }
    fragments.push(nec_lip?);
    if let Some(f) = chain {
        fragments.push(f?);
    }
    if let Some(f) = extra {
        fragments.push(f?);
    }

    // Multiplier estimates of phi' in the space one order down.
    let lower = space.lowered()?;
    let dphi = phi.derivative().sample(&grid);
    let testers = multiplier_testers(&grid, cfg)?;
    let (mult, unif, msq) = match &lower {
        Space::Besov(sp) => {
            let psi = make_psi(cfg.psi)?;
            let mult = multiplier_norm_lower(&dphi, sp, &testers, &cfg.hgrid)?.value;
            let unif = unif_norm(&dphi, sp, &psi, &cfg.hgrid)?.value;
            let msq = if sp.p.is_finite() {
                Some(msq_norm_lower(&dphi, sp, &psi, &cfg.hgrid, &cfg.msq)?.value)
            } else {
                None
            };
            (mult, Some(unif), msq)
        }
        Space::Sobolev { .. } => (ratio_max(&dphi, &lower, &testers, &cfg.hgrid)?, None, None),
    };

    let u = phi.u_value();
    let m_infinite = phi.m_functional().map(|m| m.infinite).unwrap_or(true);
    let computed = Computed {
        u,
        m_infinite,
        lipschitz: phi.lipschitz_constant(),
        max_preimage: phi.max_preimage_count(),
        opnorm_lower: opnorm,
        mult_lower: Some(mult),
        unif,
        msq_lower: msq,
        derivative_jumps: jumps.clone(),
    };

    let mut diagnostics = Vec::new();
    let verdict = if let Some(&(at, jump)) = jumps.first() {
        diagnostics.push(format!(
            "phi' jumps by {jump:.3e} at x = {at}; the derivative space embeds into continuous functions"
        ));
        Verdict::ConsistentUnbounded
    } else if p.is_finite() && !u.is_finite() {
        diagnostics.push("U is infinite: some unit interval has a preimage of infinite length".into());
        Verdict::ConsistentUnbounded
    } else if let Some(msg) = window_limited(phi) {
        diagnostics.push(msg);
        Verdict::Inconclusive
    } else if fragments.iter().any(|f| f.status == Status::Fail || f.status == Status::Skipped) {
        for f in &fragments {
            for n in &f.notes {
                if f.status != Status::Pass {
                    diagnostics.push(format!("{}: {n}", f.name));
                }
            }
        }
        Verdict::Inconclusive
    } else {
        Verdict::ConsistentBounded
    };
    if m_infinite {
        diagnostics.push("M ladder diverges at fine widths".into());
    }

    let metadata = Metadata {
        runtime_ms: start.elapsed().as_millis(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        map: label.into(),
        space: space.clone(),
        regime,
        computed,
        fragments,
        verdict,
        diagnostics,
        config: cfg.clone(),
        metadata,
    })
}

/// Components of `phi^{-1}([z, z+1])` for integers `z` in `range`, and the
/// greedy disjoint partition of that family.
pub fn preimage_cover_partition(phi: &LineMap, range: (i64, i64)) -> Result<(IntervalFamily, Partition)> {
    let mut items = Vec::new();
    for z in range.0..=range.1 {
        let z = z as f64;
        items.extend_from_slice(phi.preimage_intervals((z, z + 1.0))?.intervals());
    }
    let fam = IntervalFamily::new(items)?;
    let part = fam.split_partition();
    Ok((fam, part))
}
