//! Benchmark problems, the run driver, refinement studies, and output.

pub mod config;
pub mod driver;
pub mod output;
pub mod problems;
pub mod studies;

pub use driver::{initial_solution, run, run_generic, CellRow, Phase, RunOptions, RunRecord};
pub use output::{write_csv, write_si_csv};
pub use problems::{registry_lookup, ExactSolution, ProblemSpec, PROBLEM_NAMES};
pub use studies::{convergence_study, si_study, ConvergenceRow, SiStudy};

use crate::error::Result;
use crate::euler::ConsState;
use crate::riemann::{llf_solve, LLF_CFL};

/// First-order single-grid reference solution of a registered problem at its
/// final time.
pub fn llf_reference_solve(spec: &ProblemSpec, n: usize) -> Result<Vec<ConsState<f64>>> {
    let grid = spec.grid(n)?;
    let (ubar, _) = spec.initial_averages(&grid)?;
    llf_solve(&ubar, &grid, &spec.gas()?, spec.t_end, LLF_CFL)
}
