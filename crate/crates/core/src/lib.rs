//! Semi-discrete active flux solver for the one-dimensional Euler equations.
//!
//! Two solution representations are evolved side by side: conservative cell
//! averages on a primary grid and primitive cell averages on a staggered grid
//! shifted by half a cell. The discrepancy between them drives a smoothness
//! indicator that separates smooth regions, where it decays like `dx^2`, from
//! discontinuities, where it stays of order one.
//!
//! The numerical core is generic over the floating point type ([`Real`]);
//! `f64` aliases are provided at the crate root.

// validation relies on `!(x > y)` also rejecting NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod bench;
pub mod error;
pub mod euler;
pub mod grid;
pub mod indicator;
pub mod integrator;
pub mod postprocess;
pub mod riemann;
pub mod scalar;
pub mod scheme;

pub use error::{Error, Result};
pub use euler::{cons_flux, cons_to_prim, char_speeds, prim_flux_split, prim_to_cons, StateVector};
pub use grid::{apply_bc, Boundary};
pub use indicator::{si_classify, si_decay_rate, si_filter, si_raw, smoothness_indicator, AlphaSelector};
pub use integrator::{compute_dt, ssprk3_step};
pub use postprocess::{apply_postprocess, Gate};
pub use scalar::Real;
pub use scheme::compute_rhs;

pub type ConsState = euler::ConsState<f64>;
pub type PrimState = euler::PrimState<f64>;
pub type GasModel = euler::GasModel<f64>;
pub type OverlapGrid = grid::OverlapGrid<f64>;
pub type DualSolution = grid::DualSolution<f64>;
pub type SiField = indicator::SiField<f64>;
pub type CouplingConfig = postprocess::CouplingConfig<f64>;
pub type StepControl = integrator::StepControl<f64>;

pub type ConsState32 = euler::ConsState<f32>;
pub type PrimState32 = euler::PrimState<f32>;
pub type DualSolution32 = grid::DualSolution<f32>;
