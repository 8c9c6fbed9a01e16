//! Partition of unity by integer translates of a bump, and lower-bound
//! estimators for the uniform, coefficient and pointwise multiplier norms.
//!
//! Nothing here computes a multiplier norm exactly. Every estimator is a
//! maximum over an explicit candidate set and reports which candidate won.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm_diff, DyadicHGrid, SpaceParams};
use crate::error::{LabError, Result};
use crate::grid::{lp_norm, Extension, Grid, GridFunction};
use crate::scalar::{pow_abs, Scalar};
use crate::smooth::mollifier;

/// Shape of the bump `B` that is normalized into `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-1/(1-(x/r)^2))` on `|x| < r`.
    Mollifier { radius: f64 },
    /// `(1 - |x|/r)_+`. Only C^0; meant for exact partition tests.
    Tent { radius: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Mollifier { radius: 1.0 }
    }
}

impl Profile {
    fn radius(&self) -> f64 {
        match *self {
            Profile::Mollifier { radius } | Profile::Tent { radius } => radius,
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Profile::Mollifier { radius } => mollifier(x / radius),
            Profile::Tent { radius } => (1.0 - x.abs() / radius).max(0.0),
        }
    }
}

/// `psi(x) = B(x) / sum_z B(x - z)`: supported in `[-1, 1]` and its
/// integer translates sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiBump {
    pub profile: Profile,
    /// Worst `|sum_z psi(x - z) - 1|` over the check grid.
    pub residual: f64,
}

/// Check grid for the partition residual: `[-4, 4]`, spacing `2^-9`.
const CHECK_WINDOW: (f64, f64) = (-4.0, 4.0);
const CHECK_COUNT: usize = (1 << 12) + 1;

pub fn make_psi(profile: Profile) -> Result<PsiBump> {
    let r = profile.radius();
    if !(r.is_finite() && r > 0.0) {
        return Err(LabError::InvalidProfile(format!("radius {r} must be positive")));
    }
    if r <= 0.5 {
        return Err(LabError::InvalidProfile(format!(
            "support [-{r}, {r}] leaves gaps between integer translates (no cover at x = 0.5)"
        )));
    }
    if r > 1.0 {
        return Err(LabError::InvalidProfile(format!("support [-{r}, {r}] exceeds [-1, 1]")));
    }
    let mut psi = PsiBump { profile, residual: 0.0 };
    let grid = Grid::over(CHECK_WINDOW.0, CHECK_WINDOW.1, CHECK_COUNT)?;
    psi.residual = psi.partition_residual(&grid);
    Ok(psi)
}

impl PsiBump {
    pub fn value(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let b = self.profile.value(x);
        if b == 0.0 {
            return 0.0;
        }
        // The radius is at most 1, so only neighbours within 2 can overlap.
        let total: f64 = (-2..=2).map(|z| self.profile.value(x - z as f64)).sum();
        b / total
    }

    /// `psi(x - z)` on `grid`, zero outside.
    pub fn translate_on<T: Scalar>(&self, grid: &Grid<T>, z: i64) -> GridFunction<T> {
        GridFunction::from_fn(grid, Extension::Zero, |x| T::lit(self.value(x.to_f64_lossy() - z as f64)))
    }

    /// `sum_z c_z psi(x - z)` on `grid`.
    pub fn combination_on<T: Scalar>(&self, grid: &Grid<T>, coeffs: &[(i64, f64)]) -> GridFunction<T> {
        GridFunction::from_fn(grid, Extension::Zero, |x| {
            let x = x.to_f64_lossy();
            let v: f64 = coeffs.iter().map(|&(z, c)| c * self.value(x - z as f64)).sum();
            T::lit(v)
        })
    }

    /// `max_i |sum_z psi(x_i - z) - 1|`.
    pub fn partition_residual<T: Scalar>(&self, grid: &Grid<T>) -> f64 {
        grid.points()
            .map(|x| {
                let x = x.to_f64_lossy();
                let base = x.floor() as i64;
                let total: f64 = (base - 2..=base + 2).map(|z| self.value(x - z as f64)).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Integers `z` with `[z - 1, z + 1]` inside the window.
pub fn window_translates<T: Scalar>(f: &GridFunction<T>) -> Vec<i64> {
    let (lo, hi) = f.window();
    let lo = (lo.to_f64_lossy() + 1.0).ceil() as i64;
    let hi = (hi.to_f64_lossy() - 1.0).floor() as i64;
    (lo..=hi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Unif,
    Msq,
    Mult,
}

/// A lower-bound estimate and the candidate that attained it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimate {
    pub estimator: Estimator,
    pub value: f64,
    pub argmax: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

/// First index of the largest value, so ties resolve the same way on every run.
fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

fn localized_norm<T: Scalar>(
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    sp: &SpaceParams,
    hg: &DyadicHGrid,
) -> Result<f64> {
    let prod = f.mul(g)?.trim_zeros();
    Ok(besov_norm_diff(&prod, sp, hg)?.to_f64_lossy())
}

/// `sup_z ||f psi(. - z)||` over translates whose support fits in the window.
pub fn unif_norm<T: Scalar>(
    f: &GridFunction<T>,
    sp: &SpaceParams,
    psi: &PsiBump,
    hg: &DyadicHGrid,
) -> Result<MultiplierEstimate> {
    let (zs, values) = coordinate_values(f, sp, psi, hg)?;
    let i = argmax(&values).unwrap();
    Ok(MultiplierEstimate { estimator: Estimator::Unif, value: values[i], argmax: format!("z={}", zs[i]), seed: None })
}

fn coordinate_values<T: Scalar>(
    f: &GridFunction<T>,
    sp: &SpaceParams,
    psi: &PsiBump,
    hg: &DyadicHGrid,
) -> Result<(Vec<i64>, Vec<f64>)> {
    sp.validate()?;
    let zs = window_translates(f);
    if zs.is_empty() {
        return Err(LabError::OutOfWindow("no translate of psi fits in the window".into()));
    }
    let grid = f.grid();
    let values =
        zs.par_iter().map(|&z| localized_norm(f, &psi.translate_on(&grid, z), sp, hg)).collect::<Result<Vec<_>>>()?;
    Ok((zs, values))
}

/// Candidate sets for [`msq_norm_lower`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsqSearch {
    pub random_sequences: usize,
    pub seed: u64,
    pub block_lengths: Vec<usize>,
}

impl Default for MsqSearch {
    fn default() -> Self {
        Self { random_sequences: 64, seed: 0x5eed, block_lengths: vec![2, 4, 8, 16] }
    }
}

/// Lower bound for the coefficient norm `sup ||f sum_z c_z psi_z||` over
/// `||c||_{l^p} <= 1`. Candidates: every coordinate sequence, seeded random
/// sign sequences and block-constant sequences, all of unit l^p norm.
pub fn msq_norm_lower<T: Scalar>(
    f: &GridFunction<T>,
    sp: &SpaceParams,
    psi: &PsiBump,
    hg: &DyadicHGrid,
    search: &MsqSearch,
) -> Result<MultiplierEstimate> {
    if sp.p.is_infinite() {
        return Err(LabError::InvalidSpace("coefficient norm is defined for p < infinity only".into()));
    }
    let (zs, coord) = coordinate_values(f, sp, psi, hg)?;
    let n = zs.len();

    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut candidates: Vec<(String, Vec<(i64, f64)>)> = Vec::new();
    let random_scale = (n as f64).powf(-1.0 / sp.p);
    for k in 0..search.random_sequences {
        let c = zs.iter().map(|&z| (z, if rng.random_bool(0.5) { random_scale } else { -random_scale })).collect();
        candidates.push((format!("random#{k}"), c));
    }
    for &b in &search.block_lengths {
        if b < 2 || b > n {
            continue;
        }
        let scale = (b as f64).powf(-1.0 / sp.p);
        for start in (0..=n - b).step_by(b) {
            let c = zs[start..start + b].iter().map(|&z| (z, scale)).collect();
            candidates.push((format!("block{b}@z={}", zs[start]), c));
        }
    }

    let grid = f.grid();
    let values = candidates
        .par_iter()
        .map(|(_, c)| localized_norm(f, &psi.combination_on(&grid, c), sp, hg))
        .collect::<Result<Vec<_>>>()?;

    let mut best = (coord[0], format!("coord z={}", zs[0]));
    for (i, &v) in coord.iter().enumerate() {
        if v > best.0 {
            best = (v, format!("coord z={}", zs[i]));
        }
    }
    for (i, &v) in values.iter().enumerate() {
        if v > best.0 {
            best = (v, candidates[i].0.clone());
        }
    }
    Ok(MultiplierEstimate { estimator: Estimator::Msq, value: best.0, argmax: best.1, seed: Some(search.seed) })
}

/// `max_g ||f g|| / ||g||` over the testers. Testers of zero norm are skipped.
pub fn multiplier_norm_lower<T: Scalar>(
    f: &GridFunction<T>,
    sp: &SpaceParams,
    testers: &[GridFunction<T>],
    hg: &DyadicHGrid,
) -> Result<MultiplierEstimate> {
    sp.validate()?;
    let ratios = testers
        .par_iter()
        .map(|g| -> Result<Option<f64>> {
            let denom = besov_norm_diff(g, sp, hg)?.to_f64_lossy();
            if !(denom > 0.0) {
                return Ok(None);
            }
            let num = besov_norm_diff(&f.mul(g)?, sp, hg)?.to_f64_lossy();
            Ok(Some(num / denom))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(ratios.len());
    let mut index = Vec::with_capacity(ratios.len());
    for (i, r) in ratios.into_iter().enumerate() {
        match r {
            Some(v) => {
                values.push(v);
                index.push(i);
            }
            None => log::warn!("multiplier tester #{i} has zero norm; skipped"),
        }
    }
    let Some(k) = argmax(&values) else {
        return Err(LabError::DegenerateFamily("every tester has zero norm".into()));
    };
    Ok(MultiplierEstimate {
        estimator: Estimator::Mult,
        value: values[k],
        argmax: format!("tester#{}", index[k]),
        seed: None,
    })
}

/// Both sides of `||sum c_z psi_z||_p^p = sum |c_z|^p ||psi||_p^p`, which
/// holds when the translates have disjoint supports.
pub fn disjoint_translate_identity<T: Scalar>(
    psi: &PsiBump,
    grid: &Grid<T>,
    coeffs: &[(i64, f64)],
    p: f64,
) -> Result<(f64, f64)> {
    let pt = T::lit(p);
    let sum = psi.combination_on(grid, coeffs);
    let lhs = pow_abs(lp_norm(&sum, pt)?, pt).to_f64_lossy();
    let base = pow_abs(lp_norm(&psi.translate_on(grid, 0), pt)?, pt).to_f64_lossy();
    let rhs = coeffs.iter().map(|&(_, c)| c.abs().powf(p)).sum::<f64>() * base;
    Ok((lhs, rhs))
}

/// Number of residue classes mod `N` that keep the `Delta^m_h` stencils of
/// same-class translates apart (`|h| <= 1`): `N = m + 3`.
pub fn support_classes(m: usize) -> usize {
    m + 3
}
