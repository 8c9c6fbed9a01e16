//! Run configuration, map descriptors and the flat record formats shared by
//! the command-line front end and the regression suite.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::besov::{
    besov_norm_diff, littlewood_paley_norm, sobolev_norm_diff, sobolev_norm_fourier, DyadicHGrid, LPFilterBank,
    SpaceParams,
};
use crate::catalog::FunctionSpec;
use crate::error::{LabError, Result};
use crate::grid::{sample, DEFAULT_COUNT, DEFAULT_WINDOW};
use crate::lab::{classify, preimage_cover_partition, CheckReport, LabConfig, Space, Verdict, SCHEMA_VERSION};
use crate::line_map::{IntervalSet, LineMap, Tails};
use crate::splitting::{IntervalFamily, Partition};

/// A line map by construction recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// Global polynomial on `window`, tangent tails.
    Polynomial {
        coeffs: Vec<f64>,
        window: (f64, f64),
    },
    /// `x + amplitude sin x` on `[-half_width, half_width]`.
    Wobble {
        amplitude: f64,
        half_width: f64,
        nodes: usize,
    },
    /// `sin x` on `[-half_width, half_width]` with both tails of slope -1.
    SineFold {
        half_width: f64,
        step: f64,
    },
    PiecewiseAffine {
        xs: Vec<f64>,
        ys: Vec<f64>,
        tails: Tails,
    },
    /// Spline inverse of a monotone map.
    Inverse {
        of: Box<MapSpec>,
        nodes: usize,
    },
    Explicit {
        map: LineMap,
    },
}

impl MapSpec {
    pub fn wobble() -> Self {
        MapSpec::Wobble { amplitude: 0.5, half_width: 4.0 * PI, nodes: 503 }
    }

    pub fn sine_fold() -> Self {
        MapSpec::SineFold { half_width: 10.0, step: 0.05 }
    }

    pub fn build(&self) -> Result<LineMap> {
        match self {
            MapSpec::Identity => Ok(LineMap::identity()),
            MapSpec::Affine { slope, intercept } => LineMap::affine(*slope, *intercept, DEFAULT_WINDOW),
            MapSpec::Polynomial { coeffs, window } => LineMap::polynomial(coeffs, *window),
            MapSpec::Wobble { amplitude, half_width, nodes } => {
                let a = *amplitude;
                LineMap::hermite(|x| x + a * x.sin(), |x| 1.0 + a * x.cos(), (-half_width, *half_width), *nodes)
            }
            MapSpec::SineFold { half_width, step } => {
                if !(*step > 0.0 && *half_width > 0.0) {
                    return Err(LabError::Config("sine_fold needs positive half_width and step".into()));
                }
                let n = (2.0 * half_width / step).round() as usize;
                let xs: Vec<f64> = (0..=n).map(|i| -half_width + i as f64 * step).collect();
                let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
                let ds: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
                LineMap::hermite_nodes(&xs, &ys, &ds, Tails { left_slope: -1.0, right_slope: -1.0 }, false)
            }
            MapSpec::PiecewiseAffine { xs, ys, tails } => LineMap::piecewise_affine(xs, ys, *tails),
            MapSpec::Inverse { of, nodes } => of.build()?.inverse(*nodes),
            MapSpec::Explicit { map } => Ok(map.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub label: String,
    pub map: MapSpec,
}

/// The eight-map regression suite.
pub fn default_suite() -> Vec<SuiteEntry> {
    let e = |label: &str, map: MapSpec| SuiteEntry { label: label.into(), map };
    vec![
        e("identity", MapSpec::Identity),
        e("shift", MapSpec::Affine { slope: 1.0, intercept: 0.3 }),
        e("half", MapSpec::Affine { slope: 0.5, intercept: 0.0 }),
        e("double", MapSpec::Affine { slope: 2.0, intercept: 0.0 }),
        e("wobble", MapSpec::wobble()),
        e("wobble_inverse", MapSpec::Inverse { of: Box::new(MapSpec::wobble()), nodes: 1001 }),
        e("square", MapSpec::Polynomial { coeffs: vec![0.0, 0.0, 1.0], window: (-4.0, 4.0) }),
        e(
            "kink",
            MapSpec::PiecewiseAffine {
                xs: vec![-4.0, 0.0, 4.0],
                ys: vec![-4.0, 0.0, 8.0],
                tails: Tails { left_slope: 1.0, right_slope: 2.0 },
            },
        ),
    ]
}

/// Everything a run needs; serialized back into the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub spaces: Vec<Space>,
    pub suite: Vec<SuiteEntry>,
    pub lab: LabConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: LabConfig::default().msq.seed,
            spaces: vec![Space::Besov(SpaceParams { s: 2.1, p: 2.0, q: 2.0, m: 3 })],
            suite: default_suite(),
            lab: LabConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| LabError::Config(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    /// The lab configuration with the run seed applied.
    pub fn lab_config(&self) -> LabConfig {
        let mut lab = self.lab.clone();
        lab.msq.seed = self.seed;
        lab
    }
}

/// One classify attempt: a report or the refusal message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub key: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refused: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub records: usize,
    pub consistent_bounded: usize,
    pub consistent_unbounded: usize,
    pub inconclusive: usize,
    pub refused: usize,
    pub failed_checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub schema_version: u32,
    pub config: RunConfig,
    pub records: Vec<SuiteRecord>,
    pub summary: SuiteSummary,
}

impl SuiteOutput {
    /// JSON with every metadata block zeroed; equal runs give equal bytes.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.records {
            if let Some(rep) = &mut r.report {
                *rep = rep.without_metadata();
            }
        }
        serde_json::to_string_pretty(&copy).expect("suite output serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            if let Some(rep) = &r.report {
                out.push_str(&csv_row(rep));
                out.push('\n');
            }
        }
        out
    }
}

/// Classifies every (map, space) pair. Output is sorted by record key, so
/// completion order never shows.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteOutput> {
    let lab = cfg.lab_config();
    let mut jobs = Vec::new();
    for entry in &cfg.suite {
        for space in &cfg.spaces {
            jobs.push((entry, space));
        }
    }
    let mut records = jobs
        .par_iter()
        .map(|(entry, space)| -> Result<SuiteRecord> {
            let key = format!("{}|{}", entry.label, space);
            let map = entry.map.build()?;
            match classify(&entry.label, &map, space, &lab) {
                Ok(report) => Ok(SuiteRecord { key, report: Some(report), refused: None }),
                Err(LabError::RangeRefused(msg)) => Ok(SuiteRecord { key, report: None, refused: Some(msg) }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.key.cmp(&b.key));

    let count = |v: Verdict| records.iter().filter(|r| r.report.as_ref().is_some_and(|x| x.verdict == v)).count();
    let summary = SuiteSummary {
        records: records.len(),
        consistent_bounded: count(Verdict::ConsistentBounded),
        consistent_unbounded: count(Verdict::ConsistentUnbounded),
        inconclusive: count(Verdict::Inconclusive),
        refused: records.iter().filter(|r| r.refused.is_some()).count(),
        failed_checks: records.iter().filter(|r| r.report.as_ref().is_some_and(CheckReport::any_failed)).count(),
    };
    Ok(SuiteOutput { schema_version: SCHEMA_VERSION, config: cfg.clone(), records, summary })
}

pub const CSV_HEADER: &str = "schema_version,map,space,regime,verdict,u,m_infinite,lipschitz,max_preimage,opnorm_lower,opnorm_argmax,mult_lower,unif,msq_lower,failed_fragments";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One flat CSV row for a report; columns as in [`CSV_HEADER`].
pub fn csv_row(r: &CheckReport) -> String {
    let c = &r.computed;
    let failed: Vec<&str> = r.fragments.iter().filter(|f| f.failed()).map(|f| f.name.as_str()).collect();
    let regime = serde_json::to_value(r.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut row = String::new();
    let _ = write!(
        row,
        "{},{},\"{}\",{},{:?},{:e},{},{:e},{},{:e},\"{}\",{},{},{},{}",
        r.schema_version,
        r.map,
        r.space,
        regime,
        r.verdict,
        c.u,
        c.m_infinite,
        c.lipschitz,
        c.max_preimage,
        c.opnorm_lower.value,
        c.opnorm_lower.argmax,
        opt(c.mult_lower),
        opt(c.unif),
        opt(c.msq_lower),
        failed.join(";"),
    );
    row
}

// ---------------------------------------------------------------------------
// norm records

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Difference characterization of `B^s_{p,q}`.
    Diff,
    /// Littlewood-Paley characterization of `B^s_{p,q}`.
    Lp,
    /// `H^s_p` through the Fourier multiplier.
    SobolevFourier,
    /// `H^s_p` through differences.
    SobolevDiff,
}

impl NormMethod {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "diff" => Ok(NormMethod::Diff),
            "lp" => Ok(NormMethod::Lp),
            "sobolev_fourier" | "hs_fourier" => Ok(NormMethod::SobolevFourier),
            "sobolev_diff" | "hs_diff" => Ok(NormMethod::SobolevDiff),
            other => Err(LabError::Config(format!("unknown norm method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub schema_version: u32,
    pub function: String,
    pub space: SpaceParams,
    pub method: NormMethod,
    pub window: (f64, f64),
    pub count: usize,
    pub value: f64,
}

/// One record per (function, method), in input order.
pub fn norm_records(
    functions: &[FunctionSpec],
    space: &SpaceParams,
    methods: &[NormMethod],
    window: Option<(f64, f64)>,
    count: Option<usize>,
) -> Result<Vec<NormRecord>> {
    space.validate()?;
    let window = window.unwrap_or(DEFAULT_WINDOW);
    let count = count.unwrap_or(DEFAULT_COUNT);
    let hg = DyadicHGrid::default();
    let mut jobs = Vec::new();
    for f in functions {
        for &m in methods {
            jobs.push((f, m));
        }
    }
    jobs.par_iter()
        .map(|&(spec, method)| {
            let f = sample::<f64>(spec, window, count)?;
            let value = match method {
                NormMethod::Diff => besov_norm_diff(&f, space, &hg)?,
                NormMethod::Lp => littlewood_paley_norm(&f, space, &LPFilterBank::default())?,
                NormMethod::SobolevFourier => sobolev_norm_fourier(&f, space.s, space.p)?,
                NormMethod::SobolevDiff => sobolev_norm_diff(&f, space.s, space.p, space.m, &hg)?,
            };
            Ok(NormRecord {
                schema_version: SCHEMA_VERSION,
                function: spec.to_string(),
                space: *space,
                method,
                window,
                count,
                value,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// map and split records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageRecord {
    pub target: (f64, f64),
    pub intervals: IntervalSet,
    pub total_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub schema_version: u32,
    /// `U`, or `null` when infinite.
    pub u: Option<f64>,
    /// Largest `M` ladder value, or `null` when the ladder diverges.
    pub m: Option<f64>,
    pub m_infinite: bool,
    pub lipschitz: f64,
    pub count: usize,
    pub preimages: Vec<PreimageRecord>,
    pub cover: Option<SplitRecord>,
}

pub fn map_record(phi: &LineMap, targets: &[(f64, f64)], cover: Option<(i64, i64)>) -> Result<MapRecord> {
    let u = phi.u_value();
    let m = phi.m_functional().ok();
    let preimages = targets
        .iter()
        .map(|&t| {
            let intervals = phi.preimage_intervals(t)?;
            let total_length = intervals.total_length();
            Ok(PreimageRecord { target: t, intervals, total_length })
        })
        .collect::<Result<Vec<_>>>()?;
    let cover = match cover {
        Some(range) => {
            let (fam, part) = preimage_cover_partition(phi, range)?;
            Some(split_record(&fam, &part))
        }
        None => None,
    };
    Ok(MapRecord {
        schema_version: SCHEMA_VERSION,
        u: u.is_finite().then_some(u),
        m: m.as_ref().and_then(|m| if m.infinite { None } else { m.value() }),
        m_infinite: m.as_ref().is_none_or(|m| m.infinite),
        lipschitz: phi.lipschitz_constant(),
        count: phi.max_preimage_count(),
        preimages,
        cover,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub schema_version: u32,
    pub family: IntervalFamily,
    pub degree: usize,
    pub classes: Vec<Vec<usize>>,
    pub class_count: usize,
    /// `class_count <= degree + 1`.
    pub bound_ok: bool,
    pub disjoint: bool,
}

pub fn split_record(fam: &IntervalFamily, part: &Partition) -> SplitRecord {
    let degree = fam.intersection_degree();
    SplitRecord {
        schema_version: SCHEMA_VERSION,
        family: fam.clone(),
        degree,
        classes: part.classes.clone(),
        class_count: part.class_count(),
        bound_ok: part.class_count() <= degree + 1,
        disjoint: part.classes_disjoint(fam),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_specs_build() {
        for e in default_suite() {
            e.map.build().unwrap_or_else(|err| panic!("{}: {err}", e.label));
        }
        assert_eq!(MapSpec::sine_fold().build().unwrap().max_preimage_count(), 7);
    }

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        let partial = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.lab_config().msq.seed, 7);
        assert_eq!(partial.suite.len(), 8);
        let bad = RunConfig::from_json("{\n \"seed\": \"x\"}").unwrap_err();
        assert!(bad.to_string().contains("line 2"), "{bad}");
    }

    #[test]
    fn identity_map_record() {
        let r = map_record(&LineMap::identity(), &[(0.0, 1.0)], Some((-2, 2))).unwrap();
        assert_eq!(r.u, Some(1.0));
        assert!((r.m.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(r.lipschitz, 1.0);
        assert_eq!(r.count, 1);
        assert_eq!(r.preimages[0].total_length, 1.0);
        assert!(r.cover.unwrap().bound_ok);
    }

    #[test]
    fn zero_norm_records() {
        let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
        let recs =
            norm_records(&[FunctionSpec::Zero], &sp, &[NormMethod::Diff, NormMethod::Lp], None, Some(1025)).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.value == 0.0));
    }
}
