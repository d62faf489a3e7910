//! Mesh-refinement studies: solution convergence and indicator decay.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler::ConsState;
use crate::indicator::si_decay_rate;

use super::driver::{run, RunOptions, RunRecord};
use super::problems::ProblemSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dx: f64,
    pub l1_error: f64,
    /// Observed order against the previous row; `None` on the first row.
    pub order: Option<f64>,
    /// Set when the error grew under refinement.
    pub non_monotone: bool,
}

/// `dx * sum |rho_i - rho_ref_i|`.
pub fn l1_density_error(rho: &[f64], reference: &[ConsState<f64>], dx: f64) -> f64 {
    rho.iter().zip(reference).map(|(r, w)| (r - w.rho).abs()).sum::<f64>() * dx
}

/// Fills in observed orders between consecutive rows.
pub fn convergence_table(errors: &[(usize, f64, f64)]) -> Vec<ConvergenceRow> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &(n, dx, err))| {
            let prev = i.checked_sub(1).map(|j| errors[j]);
            ConvergenceRow {
                n,
                dx,
                l1_error: err,
                order: prev.map(|(_, pdx, perr)| (perr / err).ln() / (pdx / dx).ln()),
                non_monotone: prev.is_some_and(|(_, _, perr)| err > perr),
            }
        })
        .collect()
}

/// L1 density error of the final conservative averages against the exact
/// solution, or against a four-times finer run when there is none.
pub fn convergence_study(spec: &ProblemSpec, n_list: &[usize], opts: &RunOptions) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Ok(Vec::new());
    }
    let t_end = opts.t_end.unwrap_or(spec.t_end);
    let reference_run = if spec.exact.is_none() {
        let n_ref = 4 * n_list.iter().max().unwrap();
        Some(run(spec, &RunOptions { n: n_ref, ..opts.clone() })?)
    } else {
        None
    };
    let errors = n_list
        .par_iter()
        .map(|&n| {
            let rec = run(spec, &RunOptions { n, ..opts.clone() })?;
            let reference = match &reference_run {
                Some(fine) => coarsen(&fine.density(), n)?,
                None => spec.exact_cell_averages(&spec.grid(n)?, t_end).expect("exact solution present"),
            };
            Ok((n, rec.dx, l1_density_error(&rec.density(), &reference, rec.dx)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(convergence_table(&errors))
}

fn coarsen(fine: &[f64], n: usize) -> Result<Vec<ConsState<f64>>> {
    if !fine.len().is_multiple_of(n) {
        return Err(Error::InvalidParameter(format!("cannot coarsen {} cells to {n}", fine.len())));
    }
    let r = fine.len() / n;
    Ok(fine
        .chunks(r)
        .map(|c| ConsState::new(c.iter().sum::<f64>() / r as f64, 0.0, 0.0))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiStudy {
    pub runs: Vec<RunRecord>,
    /// Decay order over the smooth window between consecutive runs; `None`
    /// where it is undefined (vanishing indicator or no declared window).
    pub rates: Vec<Option<f64>>,
    pub window: Option<(f64, f64)>,
}

/// Runs the problem on every mesh and measures how the filtered indicator
/// decays over the problem's smooth window.
pub fn si_study(spec: &ProblemSpec, n_list: &[usize], opts: &RunOptions) -> Result<SiStudy> {
    let runs = n_list
        .par_iter()
        .map(|&n| run(spec, &RunOptions { n, ..opts.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let rates = runs
        .windows(2)
        .map(|w| spec.smooth_window.and_then(|win| si_decay_rate(&w[0].eps_hat(), &w[1].eps_hat(), win)))
        .collect();
    Ok(SiStudy {
        runs,
        rates,
        window: spec.smooth_window,
    })
}
