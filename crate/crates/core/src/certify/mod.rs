//! Outward-rounded interval arithmetic, bisection certificates for the
//! analytic inequality, and floating-point grid checks behind the figures.

mod analytic;
mod grid;
pub mod hexfloat;
mod interval;

pub use analytic::{
    analytic_point, certify_analytic, certify_analytic_scaled, enclose_constant_c, enclose_constant_c_sieved,
    Certificate, Leaf, Replay, Verdict, ANALYTIC_ID, DEFAULT_C_CUTOFF, DEFAULT_MAX_DEPTH,
};
pub use grid::{grid_check, GridId, GridReport, GridSpec, GRID_TOL, GRID_TRUNCATION};
pub use interval::Interval;
