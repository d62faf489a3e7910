//! Verification oracles: the exact Riemann solver for the ideal-gas Euler
//! equations and a first-order local Lax-Friedrichs finite-volume solver.

use crate::error::{Error, Result};
use crate::euler::{cons_flux, cons_to_prim, prim_to_cons, ConsState, GasModel, PrimState, StateVector};
use crate::grid::{pad, OverlapGrid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannProblem {
    pub left: PrimState<f64>,
    pub right: PrimState<f64>,
    pub gamma: f64,
    pub diaphragm: f64,
}

/// Star-region values and the wave fan bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarState {
    pub p: f64,
    pub u: f64,
    pub rho_left: f64,
    pub rho_right: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Wave {
    Shock { speed: f64 },
    Rarefaction { head: f64, tail: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiemannSolution {
    pub problem: RiemannProblem,
    pub star: StarState,
    pub left_wave: Wave,
    pub right_wave: Wave,
    /// Newton residual after convergence; exposed for consistency checks.
    pub residual: f64,
}

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 100;

/// Pressure function of one side and its derivative.
fn side_function(p: f64, s: &PrimState<f64>, gamma: f64) -> (f64, f64) {
    let c = (gamma * s.p / s.rho).sqrt();
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let ratio = p / s.p;
        let e = (gamma - 1.0) / (2.0 * gamma);
        (
            2.0 * c / (gamma - 1.0) * (ratio.powf(e) - 1.0),
            ratio.powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c),
        )
    }
}

impl RiemannProblem {
    pub fn new(left: PrimState<f64>, right: PrimState<f64>, gamma: f64, diaphragm: f64) -> Result<Self> {
        let g = GasModel::new(gamma)?;
        prim_to_cons(&left, &g)?;
        prim_to_cons(&right, &g)?;
        Ok(Self {
            left,
            right,
            gamma,
            diaphragm,
        })
    }

    /// Solves for the star state with a bisection-safeguarded Newton iteration.
    pub fn solve(&self) -> Result<RiemannSolution> {
        let (l, r, gamma) = (&self.left, &self.right, self.gamma);
        let cl = (gamma * l.p / l.rho).sqrt();
        let cr = (gamma * r.p / r.rho).sqrt();
        let du = r.u - l.u;
        if 2.0 * (cl + cr) / (gamma - 1.0) <= du {
            return Err(Error::Vacuum);
        }
        let f = |p: f64| {
            let (fl, dl) = side_function(p, l, gamma);
            let (fr, dr) = side_function(p, r, gamma);
            (fl + fr + du, dl + dr)
        };

        // two-rarefaction guess
        let z = (gamma - 1.0) / (2.0 * gamma);
        let guess = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / l.p.powf(z) + cr / r.p.powf(z))).powf(1.0 / z);
        let (mut lo, mut hi) = (1e-14, 10.0 * l.p.max(r.p));
        // the pressure function is increasing; widen the bracket for strong compressions
        while f(hi).0 < 0.0 {
            hi *= 10.0;
            if !hi.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    residual: f(hi).0,
                });
            }
        }
        if f(lo).0 > 0.0 {
            return Err(Error::Vacuum);
        }
        let mut p = guess.clamp(lo, hi);
        if !p.is_finite() {
            p = 0.5 * (lo + hi);
        }
        for iter in 0..MAX_ITER {
            let (val, der) = f(p);
            if val < 0.0 {
                lo = p;
            } else {
                hi = p;
            }
            let mut next = p - val / der;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let change = (next - p).abs() / (0.5 * (next + p));
            p = next;
            if change < TOL {
                let (fl, _) = side_function(p, l, gamma);
                let (fr, _) = side_function(p, r, gamma);
                let u = 0.5 * (l.u + r.u) + 0.5 * (fr - fl);
                let residual = f(p).0;
                return Ok(self.assemble(p, u, residual));
            }
            if iter + 1 == MAX_ITER {
                return Err(Error::NoConvergence {
                    iterations: MAX_ITER,
                    residual: val,
                });
            }
        }
        unreachable!()
    }

    fn assemble(&self, p: f64, u: f64, residual: f64) -> RiemannSolution {
        let gamma = self.gamma;
        let gm = (gamma - 1.0) / (gamma + 1.0);
        let side = |s: &PrimState<f64>, sign: f64| -> (f64, Wave) {
            let c = (gamma * s.p / s.rho).sqrt();
            if p > s.p {
                let ratio = p / s.p;
                let rho = s.rho * (ratio + gm) / (gm * ratio + 1.0);
                let speed = s.u + sign * c * ((gamma + 1.0) / (2.0 * gamma) * ratio + (gamma - 1.0) / (2.0 * gamma)).sqrt();
                (rho, Wave::Shock { speed })
            } else {
                let rho = s.rho * (p / s.p).powf(1.0 / gamma);
                let c_star = c * (p / s.p).powf((gamma - 1.0) / (2.0 * gamma));
                (
                    rho,
                    Wave::Rarefaction {
                        head: s.u + sign * c,
                        tail: u + sign * c_star,
                    },
                )
            }
        };
        let (rho_left, left_wave) = side(&self.left, -1.0);
        let (rho_right, right_wave) = side(&self.right, 1.0);
        RiemannSolution {
            problem: *self,
            star: StarState {
                p,
                u,
                rho_left,
                rho_right,
            },
            left_wave,
            right_wave,
            residual,
        }
    }
}

impl RiemannSolution {
    /// Self-similar solution at `xi = (x - x0) / t`.
    pub fn sample(&self, xi: f64) -> PrimState<f64> {
        let gamma = self.problem.gamma;
        let star = &self.star;
        if xi <= star.u {
            let l = &self.problem.left;
            match self.left_wave {
                Wave::Shock { speed } => {
                    if xi < speed {
                        *l
                    } else {
                        PrimState::new(star.rho_left, star.u, star.p)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi < head {
                        *l
                    } else if xi > tail {
                        PrimState::new(star.rho_left, star.u, star.p)
                    } else {
                        let c = (gamma * l.p / l.rho).sqrt();
                        let f = 2.0 / (gamma + 1.0) + (gamma - 1.0) / ((gamma + 1.0) * c) * (l.u - xi);
                        let rho = l.rho * f.powf(2.0 / (gamma - 1.0));
                        let u = 2.0 / (gamma + 1.0) * (c + 0.5 * (gamma - 1.0) * l.u + xi);
                        PrimState::new(rho, u, l.p * f.powf(2.0 * gamma / (gamma - 1.0)))
                    }
                }
            }
        } else {
            let r = &self.problem.right;
            match self.right_wave {
                Wave::Shock { speed } => {
                    if xi > speed {
                        *r
                    } else {
                        PrimState::new(star.rho_right, star.u, star.p)
                    }
                }
                Wave::Rarefaction { head, tail } => {
                    if xi > head {
                        *r
                    } else if xi < tail {
                        PrimState::new(star.rho_right, star.u, star.p)
                    } else {
                        let c = (gamma * r.p / r.rho).sqrt();
                        let f = 2.0 / (gamma + 1.0) - (gamma - 1.0) / ((gamma + 1.0) * c) * (r.u - xi);
                        let rho = r.rho * f.powf(2.0 / (gamma - 1.0));
                        let u = 2.0 / (gamma + 1.0) * (-c + 0.5 * (gamma - 1.0) * r.u + xi);
                        PrimState::new(rho, u, r.p * f.powf(2.0 * gamma / (gamma - 1.0)))
                    }
                }
            }
        }
    }

    /// Solution at position `x` and time `t > 0`.
    pub fn at(&self, x: f64, t: f64) -> PrimState<f64> {
        self.sample((x - self.problem.diaphragm) / t)
    }

    /// Positions at time `t` where the solution is discontinuous or has a kink.
    pub fn breakpoints(&self, t: f64) -> Vec<f64> {
        let x0 = self.problem.diaphragm;
        let mut out = Vec::new();
        for w in [self.left_wave, self.right_wave] {
            match w {
                Wave::Shock { speed } => out.push(x0 + speed * t),
                Wave::Rarefaction { head, tail } => {
                    out.push(x0 + head * t);
                    out.push(x0 + tail * t);
                }
            }
        }
        out.push(x0 + self.star.u * t);
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Samples the exact solution at each `x / t` value.
pub fn exact_riemann(rp: &RiemannProblem, x_over_t: &[f64]) -> Result<Vec<PrimState<f64>>> {
    let sol = rp.solve()?;
    Ok(x_over_t.iter().map(|&xi| sol.sample(xi)).collect())
}

/// First-order local Lax-Friedrichs solve of the conservative system on a
/// single grid with forward Euler stepping at the given CFL number.
///
/// `initial` holds the conservative cell averages at `t = 0`.
pub fn llf_solve(
    initial: &[ConsState<f64>],
    grid: &OverlapGrid<f64>,
    g: &GasModel<f64>,
    t_end: f64,
    cfl: f64,
) -> Result<Vec<ConsState<f64>>> {
    let n = grid.n_cells;
    let mut u = initial.to_vec();
    let mut t = 0.0;
    let mut step = 0usize;
    let mut fluxes = vec![ConsState::zero(); n + 1];
    while t < t_end {
        let padded = pad(&u, grid.bc, n, false);
        let o = crate::grid::GHOSTS;
        let mut smax: f64 = 0.0;
        let mut prims = Vec::with_capacity(n + 2);
        for (m, w) in padded[o - 1..o + n + 1].iter().enumerate() {
            let v = cons_to_prim(w, g).map_err(|e| Error::Step {
                step,
                time: t,
                source: Box::new(e.at("cell", m)),
            })?;
            smax = smax.max(v.u.abs() + g.sound_speed(&v));
            prims.push((v, cons_flux(w, g)?));
        }
        let dt = crate::integrator::clip_dt(cfl * grid.dx / smax, t, t_end);
        for j in 0..=n {
            let (vl, fl) = prims[j];
            let (vr, fr) = prims[j + 1];
            let a = (vl.u.abs() + g.sound_speed(&vl)).max(vr.u.abs() + g.sound_speed(&vr));
            fluxes[j] = (fl + fr) * 0.5 - (padded[o + j] - padded[o + j - 1]) * (0.5 * a);
        }
        let r = dt / grid.dx;
        for i in 0..n {
            u[i] = u[i] - (fluxes[i + 1] - fluxes[i]) * r;
        }
        t += dt;
        step += 1;
    }
    Ok(u)
}

/// Default CFL number of the reference solver.
pub const LLF_CFL: f64 = 0.4;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn sod() -> RiemannProblem {
        RiemannProblem::new(PrimState::new(1.0, 0.0, 1.0), PrimState::new(0.125, 0.0, 0.1), 1.4, 0.5).unwrap()
    }

    #[test]
    fn sod_star_state() {
        let s = sod().solve().unwrap();
        assert!((s.star.p - 0.30313).abs() < 1e-5, "{}", s.star.p);
        assert!((s.star.u - 0.92745).abs() < 1e-5, "{}", s.star.u);
        assert!(s.residual.abs() < 1e-10);
        assert!(matches!(s.left_wave, Wave::Rarefaction { .. }));
        assert!(matches!(s.right_wave, Wave::Shock { .. }));
    }

    #[test]
    fn star_region_is_continuous() {
        let s = sod().solve().unwrap();
        let eps = 1e-9;
        let l = s.sample(s.star.u - eps);
        let r = s.sample(s.star.u + eps);
        assert!((l.p - r.p).abs() < 1e-10);
        assert!((l.u - r.u).abs() < 1e-10);
        assert!((l.rho - r.rho).abs() > 0.1);
    }

    #[test]
    fn identical_states_have_no_waves() {
        let v = PrimState::new(1.3, 0.4, 0.7);
        let rp = RiemannProblem::new(v, v, 1.4, 0.0).unwrap();
        for s in exact_riemann(&rp, &[-3.0, -0.5, 0.0, 0.4, 0.5, 2.0]).unwrap() {
            assert!((s - v).max_abs() < 1e-12);
        }
    }

    #[test]
    fn colliding_flows_stop() {
        let rp = RiemannProblem::new(PrimState::new(1.0, 2.0, 1.0), PrimState::new(1.0, -2.0, 1.0), 1.4, 0.0).unwrap();
        let s = rp.solve().unwrap();
        assert_eq!(s.star.u, 0.0);
        assert!(matches!(s.left_wave, Wave::Shock { .. }));
    }

    #[test]
    fn blast_side_states_converge() {
        let rp = RiemannProblem::new(PrimState::new(1.0, 0.0, 1000.0), PrimState::new(1.0, 0.0, 0.01), 1.4, 0.1).unwrap();
        let s = rp.solve().unwrap();
        // reference values for the left half of the Woodward-Colella blast
        assert!((s.star.p - 460.894).abs() < 1e-2, "{}", s.star.p);
        assert!((s.star.u - 19.5975).abs() < 1e-3, "{}", s.star.u);
    }

    #[test]
    fn vacuum_is_reported() {
        let rp = RiemannProblem::new(PrimState::new(1.0, -20.0, 1.0), PrimState::new(1.0, 20.0, 1.0), 1.4, 0.0).unwrap();
        assert!(matches!(rp.solve(), Err(Error::Vacuum)));
    }

    #[test]
    fn llf_keeps_constants_and_mass() {
        let g = GasModel::new(1.4).unwrap();
        let grid = OverlapGrid::new(50, 0.0, 1.0, Boundary::Periodic).unwrap();
        let c = prim_to_cons(&PrimState::new(1.0, 0.5, 1.0), &g).unwrap();
        let out = llf_solve(&vec![c; 50], &grid, &g, 0.3, LLF_CFL).unwrap();
        assert!(out.iter().all(|w| (*w - c).max_abs() < 1e-14));

        let init: Vec<_> = (0..50)
            .map(|i| {
                let x = grid.center(i);
                prim_to_cons(&PrimState::new(1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin(), 1.0, 1.0), &g).unwrap()
            })
            .collect();
        let m0: f64 = init.iter().map(|w| w.rho).sum();
        let out = llf_solve(&init, &grid, &g, 0.5, LLF_CFL).unwrap();
        let m1: f64 = out.iter().map(|w| w.rho).sum();
        assert!(((m1 - m0) / m0).abs() < 1e-12);
    }
}
