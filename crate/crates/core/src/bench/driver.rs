//! Time-marching driver: advance, evaluate the indicator, post-process.

use crate::error::{Error, Result};
use crate::euler::{cons_to_prim, ConsState, GasModel, PrimState, StateVector};
use crate::grid::{DualSolution, OverlapGrid};
use crate::indicator::{smoothness_indicator, AlphaSelector, SiField};
use crate::integrator::{compute_dt, ssprk3_step, StepControl, DEFAULT_CFL};
use crate::postprocess::{postprocess_with_report, CouplingConfig, Gate, DEFAULT_BETA};
use crate::scalar::Real;
use crate::scheme::DEFAULT_THETA;

use super::problems::ProblemSpec;

/// Run parameters; `None` fields fall back to the problem's defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub n: usize,
    pub t_end: Option<f64>,
    pub cfl: f64,
    pub theta: f64,
    pub k: Option<f64>,
    pub alpha: Option<AlphaSelector>,
    pub beta: f64,
    pub gate: Gate,
    pub max_steps: usize,
    /// Clamp density and pressure at the default floor instead of failing.
    pub floor: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            n: 200,
            t_end: None,
            cfl: DEFAULT_CFL,
            theta: DEFAULT_THETA,
            k: None,
            alpha: None,
            beta: DEFAULT_BETA,
            gate: Gate::Everywhere,
            max_steps: 10_000_000,
            floor: false,
        }
    }
}

impl RunOptions {
    pub fn with_n(n: usize) -> Self {
        Self { n, ..Self::default() }
    }
}

/// Stages of one time step, reported to instrumentation hooks in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Advance,
    Indicator,
    PostProcess,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRow {
    pub x: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    pub energy: f64,
    pub eps: f64,
    pub eps_hat: f64,
    pub flag: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub dx: f64,
    pub time: f64,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative change of each conserved total after accounting for the
    /// boundary inflow: mass, momentum, energy.
    pub drift: [f64; 3],
    pub slope_fallbacks: usize,
    /// Primary cells restored by the post-processing positivity repair.
    pub positivity_repairs: usize,
    pub k: f64,
    pub c_ref: f64,
    pub eps_ave: f64,
    pub rows: Vec<CellRow>,
    /// Staggered primitive averages at the final time.
    pub staggered: Vec<PrimState<f64>>,
}

impl RunRecord {
    pub fn mass_drift(&self) -> f64 {
        self.drift[0]
    }

    pub fn flags(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.flag).collect()
    }

    pub fn eps_hat(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eps_hat).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rho).collect()
    }

    /// `k * eps_ave` for the final indicator.
    pub fn threshold(&self) -> f64 {
        self.k * self.eps_ave
    }

    /// `c_ref * dx^2`.
    pub fn reference_level(&self) -> f64 {
        self.c_ref * self.dx * self.dx
    }
}

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Initial dual solution of a problem on an `n`-cell grid.
pub fn initial_solution<T: Real>(spec: &ProblemSpec, n: usize) -> Result<(OverlapGrid<T>, DualSolution<T>)> {
    let grid64 = spec.grid(n)?;
    let (ubar, vbar) = spec.initial_averages(&grid64)?;
    let grid = OverlapGrid::new(n, lit(spec.x_min), lit(spec.x_max), spec.bc)?;
    let sol = DualSolution::new(
        ubar.iter().map(|w| ConsState::new(lit(w.rho), lit(w.mom), lit(w.energy))).collect(),
        vbar.iter().map(|v| PrimState::new(lit(v.rho), lit(v.u), lit(v.p))).collect(),
        T::zero(),
    )?;
    Ok((grid, sol))
}

/// Runs a problem to its final time in double precision.
pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<RunRecord> {
    run_generic::<f64>(spec, opts, &mut |_, _| {})
}

/// Runs a problem in the given precision, reporting every phase to `hook`.
pub fn run_generic<T: Real>(
    spec: &ProblemSpec,
    opts: &RunOptions,
    hook: &mut dyn FnMut(Phase, &DualSolution<T>),
) -> Result<RunRecord> {
    if opts.n < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 cells, got {}", opts.n)));
    }
    let t_end = opts.t_end.unwrap_or(spec.t_end);
    let control = StepControl::new(lit::<T>(opts.cfl), lit(t_end), opts.max_steps)?;
    let mut g = GasModel::<T>::new(lit(spec.gamma))?;
    if opts.floor {
        g = g.with_floor(GasModel::<T>::default_floor());
    }
    let coupling = CouplingConfig::<T>::new(lit(opts.beta), opts.gate)?;
    let theta = lit::<T>(opts.theta);
    if !(opts.theta >= 1.0 && opts.theta <= 2.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in [1, 2], got {}", opts.theta)));
    }
    let k = opts.k.unwrap_or(spec.k);
    let alpha = opts.alpha.unwrap_or(spec.alpha);

    let (grid, mut sol) = initial_solution::<T>(spec, opts.n)?;
    let initial_totals = totals_f64(&sol, grid.dx);
    let initial_scale = abs_totals_f64(&sol, grid.dx);
    let mut inflow = [0.0f64; 3];
    let mut si: Option<SiField<T>> = None;
    let (mut steps, mut dt_min, mut dt_max, mut fallbacks, mut repairs) = (0usize, f64::INFINITY, 0.0f64, 0usize, 0usize);

    while sol.time < control.t_end {
        if steps >= control.max_steps {
            return Err(Error::StepLimit(control.max_steps));
        }
        let wrap = |e: Error, time: T| Error::Step {
            step: steps,
            time: time.as_f64(),
            source: Box::new(e),
        };
        let dt = compute_dt(&sol, &grid, &g, control.cfl, control.t_end).map_err(|e| wrap(e, sol.time))?;
        if !(dt > T::zero()) {
            break;
        }
        let (advanced, diag) = ssprk3_step(&sol, &grid, &g, theta, dt).map_err(|e| wrap(e, sol.time))?;
        hook(Phase::Advance, &advanced);
        let field = smoothness_indicator(&advanced, alpha, &g, lit(k)).map_err(|e| wrap(e, advanced.time))?;
        hook(Phase::Indicator, &advanced);
        let (mut next, step_repairs) = postprocess_with_report(&advanced, &grid, &g, &coupling, theta, Some(&field.flags))
            .map_err(|e| wrap(e, advanced.time))?;
        repairs += step_repairs;
        // the end time is hit exactly by the final clipped step
        if advanced.time >= control.t_end {
            next.time = control.t_end;
        }
        hook(Phase::PostProcess, &next);

        for (acc, x) in inflow.iter_mut().zip(diag.boundary_inflow.to_array()) {
            *acc += x.as_f64();
        }
        fallbacks += diag.slope_fallbacks;
        dt_min = dt_min.min(dt.as_f64());
        dt_max = dt_max.max(dt.as_f64());
        steps += 1;
        si = Some(field);
        sol = next;
    }

    let si = match si {
        Some(si) => si,
        None => smoothness_indicator(&sol, alpha, &g, lit(k))?,
    };
    let final_totals = totals_f64(&sol, grid.dx);
    let mut drift = [0.0; 3];
    for c in 0..3 {
        let scale = initial_totals[c].abs().max(initial_scale[c]).max(f64::MIN_POSITIVE);
        drift[c] = (final_totals[c] - initial_totals[c] - inflow[c]).abs() / scale;
    }

    let mut rows = Vec::with_capacity(grid.n_cells);
    for (i, w) in sol.ubar.iter().enumerate() {
        let v = cons_to_prim(w, &g)?;
        rows.push(CellRow {
            x: grid.center(i).as_f64(),
            rho: v.rho.as_f64(),
            u: v.u.as_f64(),
            p: v.p.as_f64(),
            energy: w.energy.as_f64(),
            eps: si.eps[i].as_f64(),
            eps_hat: si.eps_hat[i].as_f64(),
            flag: si.flags[i],
        });
    }
    Ok(RunRecord {
        problem: spec.name.to_string(),
        n: grid.n_cells,
        dx: grid.dx.as_f64(),
        time: sol.time.as_f64(),
        steps,
        dt_min: if steps > 0 { dt_min } else { 0.0 },
        dt_max,
        drift,
        slope_fallbacks: fallbacks,
        positivity_repairs: repairs,
        k,
        c_ref: spec.c_ref,
        eps_ave: si.eps_ave.as_f64(),
        rows,
        staggered: sol
            .vbar
            .iter()
            .map(|v| PrimState::new(v.rho.as_f64(), v.u.as_f64(), v.p.as_f64()))
            .collect(),
    })
}

fn totals_f64<T: Real>(sol: &DualSolution<T>, dx: T) -> [f64; 3] {
    let mut acc = [0.0f64; 3];
    for w in &sol.ubar {
        for (a, x) in acc.iter_mut().zip(w.to_array()) {
            *a += x.as_f64();
        }
    }
    acc.map(|a| a * dx.as_f64())
}

/// Magnitude of each conserved total; momentum is measured against
/// `sqrt(rho E)`, the momentum scale a state can carry.
fn abs_totals_f64<T: Real>(sol: &DualSolution<T>, dx: T) -> [f64; 3] {
    let mut acc = [0.0f64; 3];
    for w in &sol.ubar {
        let (rho, mom, energy) = (w.rho.as_f64(), w.mom.as_f64(), w.energy.as_f64());
        acc[0] += rho.abs();
        acc[1] += mom.abs().max((rho * energy).abs().sqrt());
        acc[2] += energy.abs();
    }
    acc.map(|a| a * dx.as_f64())
}
