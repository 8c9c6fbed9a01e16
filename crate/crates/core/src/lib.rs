//! Numerical tools for composition operators `f -> f(phi)` on Besov and
//! Sobolev spaces of the real line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod catalog;
pub mod error;
pub mod gadgets;
pub mod grid;
pub mod lab;
pub mod line_map;
pub mod multipliers;
pub mod runner;
pub mod scalar;
mod serde_inf;
pub mod smooth;
pub mod splitting;

pub use besov::{DyadicHGrid, LPFilterBank, SpaceParams};
pub use catalog::FunctionSpec;
pub use error::{LabError, Result};
pub use grid::{Extension, Grid, GridFunction};
pub use lab::{classify, CheckReport, LabConfig, Space, Verdict};
pub use line_map::{IntervalSet, LineMap, Tails};
pub use multipliers::{make_psi, Profile, PsiBump};
pub use runner::{MapSpec, RunConfig};
pub use scalar::Scalar;
pub use splitting::{IntervalFamily, Partition};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
