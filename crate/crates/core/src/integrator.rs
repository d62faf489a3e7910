//! Three-stage third-order SSP Runge-Kutta time stepping.

use crate::error::{Error, Result};
use crate::euler::{ConsState, GasModel, StateVector};
use crate::grid::{DualSolution, OverlapGrid};
use crate::scalar::Real;
use crate::scheme::{compute_rhs, max_wave_speed, DualRhs};

pub const DEFAULT_CFL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl<T> {
    pub cfl: T,
    pub t_end: T,
    pub max_steps: usize,
}

impl<T: Real> StepControl<T> {
    pub fn new(cfl: T, t_end: T, max_steps: usize) -> Result<Self> {
        if !(cfl > T::zero() && cfl <= T::one()) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if !(t_end > T::zero()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
        }
        Ok(Self { cfl, t_end, max_steps })
    }
}

/// State that can be advanced by an explicit Runge-Kutta stage.
pub trait RkState<T: Real>: Sized {
    type Rate;

    /// `self + dt * rate`
    fn advance(&self, dt: T, rate: &Self::Rate) -> Self;

    /// `a * x + b * y`
    fn blend(a: T, x: &Self, b: T, y: &Self) -> Self;
}

impl<T: Real> RkState<T> for T {
    type Rate = T;

    fn advance(&self, dt: T, rate: &T) -> T {
        *self + dt * *rate
    }

    fn blend(a: T, x: &T, b: T, y: &T) -> T {
        a * *x + b * *y
    }
}

fn axpy<T: Real, S: StateVector<T>>(x: &[S], dt: T, r: &[S]) -> Vec<S> {
    x.iter().zip(r).map(|(x, r)| *x + *r * dt).collect()
}

fn lincomb<T: Real, S: StateVector<T>>(a: T, x: &[S], b: T, y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(x, y)| *x * a + *y * b).collect()
}

impl<T: Real> RkState<T> for DualSolution<T> {
    type Rate = DualRhs<T>;

    fn advance(&self, dt: T, rate: &DualRhs<T>) -> Self {
        DualSolution {
            ubar: axpy(&self.ubar, dt, &rate.d_ubar),
            vbar: axpy(&self.vbar, dt, &rate.d_vbar),
            time: self.time + dt,
        }
    }

    fn blend(a: T, x: &Self, b: T, y: &Self) -> Self {
        DualSolution {
            ubar: lincomb(a, &x.ubar, b, &y.ubar),
            vbar: lincomb(a, &x.vbar, b, &y.vbar),
            time: a * x.time + b * y.time,
        }
    }
}

/// Shu-Osher form of SSP-RK3. `rhs` receives the stage index (1-based).
pub fn ssprk3<T, S, E>(s: &S, dt: T, mut rhs: impl FnMut(usize, &S) -> Result<S::Rate, E>) -> Result<S, E>
where
    T: Real,
    S: RkState<T>,
{
    let s1 = s.advance(dt, &rhs(1, s)?);
    let s2 = S::blend(T::lit(0.75), s, T::lit(0.25), &s1.advance(dt, &rhs(2, &s1)?));
    let third = T::one() / T::lit(3.0);
    Ok(S::blend(third, s, T::one() - third, &s2.advance(dt, &rhs(3, &s2)?)))
}

/// Stable step `cfl * dx / max(|u| + c)`, clipped to land on `t_end`.
pub fn compute_dt<T: Real>(sol: &DualSolution<T>, grid: &OverlapGrid<T>, g: &GasModel<T>, cfl: T, t_end: T) -> Result<T> {
    let s = max_wave_speed(sol, g)?;
    Ok(clip_dt(cfl * grid.dx / s, sol.time, t_end))
}

#[inline]
pub fn clip_dt<T: Real>(dt: T, time: T, t_end: T) -> T {
    if time + dt >= t_end {
        (t_end - time).max(T::zero())
    } else {
        dt
    }
}

/// Per-step bookkeeping returned alongside the advanced solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics<T> {
    /// Time integral over the step of the net boundary inflow of each
    /// conserved quantity, as weighted by the Runge-Kutta stages.
    pub boundary_inflow: ConsState<T>,
    pub slope_fallbacks: usize,
}

/// One SSP-RK3 step of the dual system. Post-processing is not applied.
pub fn ssprk3_step<T: Real>(
    sol: &DualSolution<T>,
    grid: &OverlapGrid<T>,
    g: &GasModel<T>,
    theta: T,
    dt: T,
) -> Result<(DualSolution<T>, StepDiagnostics<T>)> {
    let mut inflow = [ConsState::zero(); 3];
    let mut fallbacks = 0;
    let mut next = ssprk3(sol, dt, |stage, s: &DualSolution<T>| {
        let rhs = compute_rhs(s, grid, g, theta).map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })?;
        inflow[stage - 1] = rhs.boundary_flux;
        fallbacks += rhs.slope_fallbacks;
        Ok::<_, Error>(rhs)
    })?;
    next.time = sol.time + dt;
    // effective stage weights of the Shu-Osher form: 1/6, 1/6, 2/3
    let sixth = T::one() / T::lit(6.0);
    let boundary_inflow = (inflow[0] * sixth + inflow[1] * sixth + inflow[2] * (T::lit(4.0) * sixth)) * dt;
    Ok((
        next,
        StepDiagnostics {
            boundary_inflow,
            slope_fallbacks: fallbacks,
        },
    ))
}
