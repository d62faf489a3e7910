//! Registered benchmark problems.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::euler::{cons_to_prim, prim_to_cons, ConsState, GasModel, PrimState, StateVector};
use crate::grid::{Boundary, OverlapGrid};
use crate::indicator::AlphaSelector;
use crate::riemann::{RiemannProblem, RiemannSolution};

pub type InitialData = Arc<dyn Fn(f64) -> PrimState<f64> + Send + Sync>;

/// Closed-form reference solution, where one exists.
#[derive(Clone)]
pub enum ExactSolution {
    /// Density profile advected at constant velocity and pressure on a
    /// periodic domain.
    Advected { velocity: f64 },
    Riemann(RiemannSolution),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub x_min: f64,
    pub x_max: f64,
    pub bc: Boundary,
    pub gamma: f64,
    pub t_end: f64,
    /// Indicator threshold constant.
    pub k: f64,
    /// Coefficient of the `c_ref * dx^2` reference line.
    pub c_ref: f64,
    pub alpha: AlphaSelector,
    pub initial: InitialData,
    /// Points where the initial data is discontinuous.
    pub breakpoints: Vec<f64>,
    pub exact: Option<ExactSolution>,
    /// Fraction-of-domain window known to be smooth at `t_end`.
    pub smooth_window: Option<(f64, f64)>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &(self.x_min, self.x_max))
            .field("bc", &self.bc)
            .field("gamma", &self.gamma)
            .field("t_end", &self.t_end)
            .field("k", &self.k)
            .field("c_ref", &self.c_ref)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

pub const PROBLEM_NAMES: [&str; 5] = ["shock-entropy", "shock-density", "blast", "sod", "smooth-wave"];

/// Looks up a registered problem by name.
pub fn registry_lookup(name: &str) -> Result<ProblemSpec> {
    match name {
        "shock-entropy" => Ok(shock_entropy()),
        "shock-density" => Ok(shock_density()),
        "blast" => Ok(blast()),
        "sod" => Ok(sod()),
        "smooth-wave" => Ok(smooth_wave()),
        _ => Err(Error::UnknownProblem {
            name: name.to_string(),
            valid: PROBLEM_NAMES.join(", "),
        }),
    }
}

/// Shu-Osher shock / entropy-wave interaction.
pub fn shock_entropy() -> ProblemSpec {
    ProblemSpec {
        name: "shock-entropy",
        x_min: -5.0,
        x_max: 5.0,
        bc: Boundary::Outflow,
        gamma: 1.4,
        t_end: 1.8,
        k: 1.0,
        c_ref: 0.01,
        alpha: AlphaSelector::Momentum,
        initial: Arc::new(|x| {
            if x < -4.0 {
                PrimState::new(3.857143, 2.629369, 10.33333)
            } else {
                PrimState::new(1.0 + 0.2 * (5.0 * x).sin(), 0.0, 1.0)
            }
        }),
        breakpoints: vec![-4.0],
        exact: None,
        smooth_window: None,
    }
}

/// Titarev-Toro shock / high-frequency density-wave interaction.
pub fn shock_density() -> ProblemSpec {
    ProblemSpec {
        name: "shock-density",
        x_min: -5.0,
        x_max: 5.0,
        bc: Boundary::Outflow,
        gamma: 1.4,
        t_end: 5.0,
        k: 6.0,
        c_ref: 0.2,
        alpha: AlphaSelector::Momentum,
        initial: Arc::new(|x| {
            if x < -4.5 {
                PrimState::new(1.515695, 0.523346, 1.805)
            } else {
                PrimState::new(1.0 + 0.1 * (20.0 * std::f64::consts::PI * x).sin(), 0.0, 1.0)
            }
        }),
        breakpoints: vec![-4.5],
        exact: None,
        smooth_window: None,
    }
}

/// Woodward-Colella interacting blast waves.
pub fn blast() -> ProblemSpec {
    ProblemSpec {
        name: "blast",
        x_min: 0.0,
        x_max: 1.0,
        bc: Boundary::Reflective,
        gamma: 1.4,
        t_end: 0.038,
        k: 1.2,
        c_ref: 200.0,
        alpha: AlphaSelector::Momentum,
        initial: Arc::new(|x| {
            let p = if x < 0.1 {
                1000.0
            } else if x < 0.9 {
                0.01
            } else {
                100.0
            };
            PrimState::new(1.0, 0.0, p)
        }),
        breakpoints: vec![0.1, 0.9],
        exact: None,
        smooth_window: None,
    }
}

pub fn sod_riemann() -> RiemannProblem {
    RiemannProblem {
        left: PrimState::new(1.0, 0.0, 1.0),
        right: PrimState::new(0.125, 0.0, 0.1),
        gamma: 1.4,
        diaphragm: 0.5,
    }
}

/// Sod shock tube.
pub fn sod() -> ProblemSpec {
    let rp = sod_riemann();
    ProblemSpec {
        name: "sod",
        x_min: 0.0,
        x_max: 1.0,
        bc: Boundary::Outflow,
        gamma: 1.4,
        t_end: 0.2,
        k: 1.0,
        c_ref: 1.0,
        alpha: AlphaSelector::Momentum,
        initial: Arc::new(move |x| if x < rp.diaphragm { rp.left } else { rp.right }),
        breakpoints: vec![rp.diaphragm],
        exact: Some(ExactSolution::Riemann(rp.solve().expect("Sod data is solvable"))),
        // interior of the rarefaction fan at t = 0.2
        smooth_window: Some((0.30, 0.45)),
    }
}

/// Smooth density wave advected through one period.
pub fn smooth_wave() -> ProblemSpec {
    ProblemSpec {
        name: "smooth-wave",
        x_min: 0.0,
        x_max: 2.0,
        bc: Boundary::Periodic,
        gamma: 1.4,
        t_end: 2.0,
        k: 1.0,
        c_ref: 1.0,
        alpha: AlphaSelector::Momentum,
        initial: Arc::new(|x| PrimState::new(1.0 + 0.2 * (std::f64::consts::PI * x).sin(), 1.0, 1.0)),
        breakpoints: Vec::new(),
        exact: Some(ExactSolution::Advected { velocity: 1.0 }),
        smooth_window: Some((0.0, 1.0)),
    }
}

impl ProblemSpec {
    pub fn gas(&self) -> Result<GasModel<f64>> {
        GasModel::new(self.gamma)
    }

    pub fn grid(&self, n: usize) -> Result<OverlapGrid<f64>> {
        OverlapGrid::new(n, self.x_min, self.x_max, self.bc)
    }

    /// Initial data extended outside the domain by the boundary policy.
    pub fn initial_extended(&self, x: f64) -> PrimState<f64> {
        let len = self.x_max - self.x_min;
        match self.bc {
            Boundary::Periodic => (self.initial)(self.x_min + (x - self.x_min).rem_euclid(len)),
            Boundary::Outflow => (self.initial)(x),
            Boundary::Reflective => {
                if x < self.x_min {
                    (self.initial)(2.0 * self.x_min - x).mirrored()
                } else if x > self.x_max {
                    (self.initial)(2.0 * self.x_max - x).mirrored()
                } else {
                    (self.initial)(x)
                }
            }
        }
    }

    /// Exact solution at `(x, t)` if the problem has one.
    pub fn exact_at(&self, x: f64, t: f64) -> Option<PrimState<f64>> {
        match self.exact.as_ref()? {
            ExactSolution::Advected { velocity } => Some(self.initial_extended(x - velocity * t)),
            ExactSolution::Riemann(sol) => Some(if t > 0.0 { sol.at(x, t) } else { (self.initial)(x) }),
        }
    }

    fn exact_breakpoints(&self, t: f64) -> Vec<f64> {
        match &self.exact {
            Some(ExactSolution::Riemann(sol)) if t > 0.0 => sol.breakpoints(t),
            _ => Vec::new(),
        }
    }

    /// Conservative cell averages of the exact solution at time `t`.
    pub fn exact_cell_averages(&self, grid: &OverlapGrid<f64>, t: f64) -> Option<Vec<ConsState<f64>>> {
        self.exact.as_ref()?;
        let g = self.gas().ok()?;
        let breaks = self.exact_breakpoints(t);
        Some(
            (0..grid.n_cells)
                .map(|i| {
                    let a = grid.center(i) - 0.5 * grid.dx;
                    cell_average(a, a + grid.dx, &breaks, |x| {
                        prim_to_cons(&self.exact_at(x, t).unwrap(), &g).unwrap()
                    })
                })
                .collect(),
        )
    }

    /// Conservative averages over the primary cells and primitive averages
    /// over the staggered cells of the initial data.
    pub fn initial_averages(&self, grid: &OverlapGrid<f64>) -> Result<(Vec<ConsState<f64>>, Vec<PrimState<f64>>)> {
        let g = self.gas()?;
        let mut breaks = self.breakpoints.clone();
        if self.bc == Boundary::Reflective || self.bc == Boundary::Periodic {
            breaks.extend([self.x_min, self.x_max]);
        }
        let cons = |x: f64| prim_to_cons(&self.initial_extended(x), &g).unwrap_or_default();
        let ubar: Vec<_> = (0..grid.n_cells)
            .map(|i| {
                let a = grid.center(i) - 0.5 * grid.dx;
                cell_average(a, a + grid.dx, &breaks, cons)
            })
            .collect();
        let vbar: Vec<_> = (0..=grid.n_cells)
            .map(|k| {
                let a = grid.staggered_center(k) - 0.5 * grid.dx;
                cell_average(a, a + grid.dx, &breaks, |x| self.initial_extended(x))
            })
            .collect();
        for (i, w) in ubar.iter().enumerate() {
            cons_to_prim(w, &g).map_err(|e| e.at("initial primary cell", i))?;
        }
        for (k, v) in vbar.iter().enumerate() {
            prim_to_cons(v, &g).map_err(|e| e.at("initial staggered cell", k))?;
        }
        Ok((ubar, vbar))
    }
}

/// Three-point Gauss-Legendre average over `[a, b]`, split at any breakpoints
/// inside the interval.
pub fn cell_average<S: StateVector<f64>>(a: f64, b: f64, breaks: &[f64], f: impl Fn(f64) -> S) -> S {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut acc = S::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (t, wt) in nodes.iter().zip(weights) {
            acc = acc + f(mid + half * t) * (wt * half);
        }
    }
    acc * (1.0 / (b - a))
}
