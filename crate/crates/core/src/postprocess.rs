//! Conservative coupling of the two fields after each completed time step.
//!
//! Two sub-steps run in order:
//!
//! 1. The staggered primitive averages are pulled toward the conservative
//!    solution. The target is the second-order projection of the primary
//!    averages onto the staggered grid; the residual `Vbar - target` is kept
//!    only where it is smooth (three-point minmod), so shocks in `V` are
//!    relocated to where the conservative field puts them.
//! 2. The primary averages are corrected in flux form with interface terms
//!    built from the updated primitive field, so every conserved total is
//!    unchanged.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euler::{admissible_prim, cons_to_prim, prim_to_cons, validate_prim, ConsState, GasModel, PrimState, StateVector};
use crate::grid::{pad, project_pair, DualSolution, OverlapGrid, GHOSTS};
use crate::scalar::{minmod3, Real};
use crate::scheme::minmod_slope;

pub const DEFAULT_BETA: f64 = 0.5;

/// Where the coupling is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Gate {
    #[default]
    Everywhere,
    /// Only in rough cells and their immediate neighbors.
    Flagged,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::Everywhere => "everywhere",
            Gate::Flagged => "flagged",
        })
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "everywhere" => Ok(Gate::Everywhere),
            "flagged" => Ok(Gate::Flagged),
            _ => Err(Error::Config(format!("unknown gate `{s}` (expected everywhere or flagged)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingConfig<T> {
    pub beta: T,
    pub gate: Gate,
}

impl<T: Real> CouplingConfig<T> {
    pub fn new(beta: T, gate: Gate) -> Result<Self> {
        if !(beta >= T::zero() && beta <= T::one()) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1], got {beta}")));
        }
        Ok(Self { beta, gate })
    }
}

impl<T: Real> Default for CouplingConfig<T> {
    fn default() -> Self {
        Self {
            beta: T::lit(DEFAULT_BETA),
            gate: Gate::Everywhere,
        }
    }
}

/// Staggered cells touching an active primary cell. `active` has one entry per
/// primary cell; staggered cell `k` touches primary cells `k - 1` and `k`.
fn staggered_mask(active: &[bool], bc: crate::grid::Boundary) -> Vec<bool> {
    let n = active.len();
    (0..=n)
        .map(|k| {
            let left = if k > 0 {
                active[k - 1]
            } else {
                bc == crate::grid::Boundary::Periodic && active[n - 1]
            };
            let right = if k < n {
                active[k]
            } else {
                bc == crate::grid::Boundary::Periodic && active[0]
            };
            left || right
        })
        .collect()
}

/// Rough cells dilated by one neighbor on each side.
pub fn dilate(flags: &[bool], periodic: bool) -> Vec<bool> {
    let n = flags.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { flags[i - 1] } else { periodic && flags[n - 1] };
            let r = if i + 1 < n { flags[i + 1] } else { periodic && flags[0] };
            flags[i] || l || r
        })
        .collect()
}

/// `rho > 0` and `p > 0`, with the pressure test multiplied through by
/// `2 rho / (gamma - 1)` to avoid the division.
#[inline]
fn positive<T: Real>(w: &ConsState<T>) -> bool {
    (w.rho > T::zero()) & (T::two() * w.rho * w.energy > w.mom * w.mom)
}

/// Conservative target for each staggered cell: the projection of the limited
/// piecewise-linear primary solution, in primitive variables.
pub fn staggered_targets<T: Real>(ubar: &[ConsState<T>], grid: &OverlapGrid<T>, g: &GasModel<T>, theta: T) -> Result<Vec<PrimState<T>>> {
    let n = grid.n_cells;
    let dx = grid.dx;
    let padded = pad(ubar, grid.bc, n, false);
    let quarter = dx * T::lit(0.25);
    // the projection averages the half cells `U -+ s dx/4`; fall back to a
    // flat piece where either half would be inadmissible
    let slope = |l: usize| {
        if l == 0 || l + 1 == padded.len() {
            return ConsState::zero();
        }
        let w = padded[l];
        let s = minmod_slope(padded[l - 1], w, padded[l + 1], theta, dx);
        let d = s * quarter;
        if positive(&(w + d)) & positive(&(w - d)) {
            s
        } else {
            ConsState::zero()
        }
    };
    let gm1 = g.gamma - T::one();
    let mut projected = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(n + 1);
    let mut ok = true;
    let mut s_left = slope(GHOSTS - 1);
    for k in 0..=n {
        // staggered k lies between primary k - 1 and k
        let l = k + GHOSTS - 1;
        let s_right = slope(l + 1);
        let w = project_pair(padded[l], padded[l + 1], s_left, s_right, dx);
        let u = w.mom / w.rho;
        let v = PrimState::new(w.rho, u, gm1 * (w.energy - T::half() * w.mom * u));
        ok &= admissible_prim(&v);
        projected.push(w);
        targets.push(v);
        s_left = s_right;
    }
    if ok {
        return Ok(targets);
    }
    projected
        .iter()
        .enumerate()
        .map(|(k, w)| cons_to_prim(w, g).map_err(|e| e.at("staggered target", k)))
        .collect()
}

/// Slaves the staggered primitive averages to the conservative field.
///
/// `mask`, when given, restricts the update to the marked staggered cells.
pub fn couple_v_to_u<T: Real>(
    sol: &DualSolution<T>,
    grid: &OverlapGrid<T>,
    g: &GasModel<T>,
    theta: T,
    mask: Option<&[bool]>,
) -> Result<Vec<PrimState<T>>> {
    let targets = staggered_targets(&sol.ubar, grid, g, theta)?;
    let residual: Vec<PrimState<T>> = sol.vbar.iter().zip(&targets).map(|(v, t)| *v - *t).collect();
    let r = pad(&residual, grid.bc, grid.n_cells, true);
    let o = GHOSTS;
    let mut ok = true;
    let out: Vec<PrimState<T>> = (0..=grid.n_cells)
        .map(|k| {
            if mask.is_some_and(|m| !m[k]) {
                return sol.vbar[k];
            }
            let kept = PrimState::zip3(r[k + o - 1], r[k + o], r[k + o + 1], minmod3);
            let v = targets[k] + kept;
            ok &= admissible_prim(&v);
            v
        })
        .collect();
    if ok {
        return Ok(out);
    }
    // clamps only if the gas model has a floor
    out.iter()
        .enumerate()
        .map(|(k, v)| validate_prim(v, g).map_err(|e| e.at("coupled staggered cell", k)))
        .collect()
}

/// Largest `t` in `[0, 1]` (to bisection accuracy) keeping `w + t d` above
/// `margin` times the density and pressure of `w`. Both constraints are
/// concave in `t`, so the admissible set is an interval starting at zero.
fn admissible_scale<T: Real>(w: &ConsState<T>, d: &ConsState<T>, g: &GasModel<T>, margin: T) -> T {
    // `p(x) >= margin p(w)` multiplied through by `2 rho_x rho_w / (gamma - 1)`
    let q = |x: &ConsState<T>| T::two() * x.rho * x.energy - x.mom * x.mom;
    let q0 = q(w);
    let full = *w + *d;
    if full.rho >= margin * w.rho && q(&full) * w.rho >= margin * q0 * full.rho {
        return T::one();
    }
    let p0 = pressure(w, g);
    let ok = |t: T| {
        let x = *w + *d * t;
        x.rho >= margin * w.rho && pressure(&x, g) >= margin * p0
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..40 {
        let mid = (lo + hi) * T::half();
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn pressure<T: Real>(w: &ConsState<T>, g: &GasModel<T>) -> T {
    (g.gamma - T::one()) * (w.energy - T::half() * w.mom * w.mom / w.rho)
}

/// Conservative smoothing of the primary averages: interface `k` carries
/// `-beta/4` times the part of the primary jump that the staggered field does
/// not reproduce. Each interface term is scaled back where needed so that
/// both half-updates it contributes stay admissible; boundary interfaces
/// carry no correction, so totals are exact.
pub fn smooth_u_conservatively<T: Real>(
    sol: &DualSolution<T>,
    grid: &OverlapGrid<T>,
    g: &GasModel<T>,
    beta: T,
    mask: Option<&[bool]>,
) -> Result<Vec<ConsState<T>>> {
    let n = grid.n_cells;
    let mut corr = vec![ConsState::zero(); n + 1];
    if beta > T::zero() {
        let w = sol
            .vbar
            .iter()
            .enumerate()
            .map(|(k, v)| prim_to_cons(v, g).map_err(|e| e.at("staggered cell", k)))
            .collect::<Result<Vec<_>>>()?;
        let c = beta * T::lit(0.25);
        let margin = T::lit(0.1);
        for k in 1..n {
            if mask.is_some_and(|m| !m[k]) {
                continue;
            }
            let (left, right) = (sol.ubar[k - 1], sol.ubar[k]);
            let excess = (right - left) - (w[k + 1] - w[k - 1]) * T::half();
            let f = -(excess * c);
            let t = admissible_scale(&left, &(-f * T::two()), g, margin)
                .min(admissible_scale(&right, &(f * T::two()), g, margin));
            corr[k] = f * t;
        }
    }
    let out: Vec<ConsState<T>> = (0..n).map(|i| sol.ubar[i] - (corr[i + 1] - corr[i])).collect();
    if g.floor.is_none() && out.iter().fold(true, |ok, w| ok & positive(w) & w.is_finite()) {
        return Ok(out);
    }
    out.iter()
        .enumerate()
        .map(|(i, w)| {
            let v = cons_to_prim(w, g).map_err(|e| e.at("smoothed primary cell", i))?;
            Ok(match g.floor {
                Some(_) => prim_to_cons(&v, g)?,
                None => *w,
            })
        })
        .collect()
}

/// Number of mixing sweeps [`repair_positivity`] attempts before giving up.
pub const REPAIR_SWEEPS: usize = 16;

/// Conservatively restores admissibility of the primary averages.
///
/// The unlimited conservative update can leave isolated cells with negative
/// density or pressure next to strong shocks. Every interface touching such a
/// cell exchanges half of the jump across it, which replaces the cell by a
/// convex combination of itself and its neighbors; repeated until all cells
/// are admissible. Returns the number of cell repairs performed.
pub fn repair_positivity<T: Real>(ubar: &mut [ConsState<T>], g: &GasModel<T>) -> Result<usize> {
    let n = ubar.len();
    let bad = |w: &ConsState<T>| !positive(w);
    if ubar.iter().fold(true, |ok, w| ok & positive(w)) {
        return Ok(0);
    }
    let mut repairs = 0;
    for _ in 0..REPAIR_SWEEPS {
        let troubled: Vec<bool> = ubar.iter().map(bad).collect();
        let count = troubled.iter().filter(|t| **t).count();
        if count == 0 {
            return Ok(repairs);
        }
        repairs += count;
        let mut flux = vec![ConsState::zero(); n + 1];
        for k in 1..n {
            if troubled[k - 1] || troubled[k] {
                flux[k] = (ubar[k - 1] - ubar[k]) * T::half();
            }
        }
        for (i, w) in ubar.iter_mut().enumerate() {
            *w = *w - (flux[i + 1] - flux[i]);
        }
    }
    match ubar.iter().position(bad) {
        None => Ok(repairs),
        Some(i) => Err(Error::InvalidState {
            rho: ubar[i].rho.as_f64(),
            p: pressure(&ubar[i], g).as_f64(),
        }
        .at("repaired primary cell", i)),
    }
}

/// Runs the V-coupling and then the conservative U-correction.
pub fn apply_postprocess<T: Real>(
    sol: &DualSolution<T>,
    grid: &OverlapGrid<T>,
    g: &GasModel<T>,
    cfg: &CouplingConfig<T>,
    theta: T,
    flags: Option<&[bool]>,
) -> Result<DualSolution<T>> {
    postprocess_with_report(sol, grid, g, cfg, theta, flags).map(|(s, _)| s)
}

/// [`apply_postprocess`] that also reports how many primary cells needed
/// [`repair_positivity`] first.
pub fn postprocess_with_report<T: Real>(
    sol: &DualSolution<T>,
    grid: &OverlapGrid<T>,
    g: &GasModel<T>,
    cfg: &CouplingConfig<T>,
    theta: T,
    flags: Option<&[bool]>,
) -> Result<(DualSolution<T>, usize)> {
    let mut repaired = sol.clone();
    let repairs = repair_positivity(&mut repaired.ubar, g)?;
    let (v_mask, u_mask) = match cfg.gate {
        Gate::Everywhere => (None, None),
        Gate::Flagged => {
            let flags = flags.ok_or_else(|| Error::InvalidParameter("flag-gated coupling needs indicator flags".into()))?;
            if flags.len() != grid.n_cells {
                return Err(Error::InvalidParameter(format!(
                    "{} flags for {} cells",
                    flags.len(),
                    grid.n_cells
                )));
            }
            if !flags.iter().any(|f| *f) {
                return Ok((repaired, repairs));
            }
            let active = dilate(flags, grid.bc == crate::grid::Boundary::Periodic);
            let m = staggered_mask(&active, grid.bc);
            (Some(m.clone()), Some(m))
        }
    };
    let vbar = couple_v_to_u(&repaired, grid, g, theta, v_mask.as_deref())?;
    let coupled = DualSolution {
        ubar: repaired.ubar,
        vbar,
        time: sol.time,
    };
    let ubar = smooth_u_conservatively(&coupled, grid, g, cfg.beta, u_mask.as_deref())?;
    Ok((
        DualSolution {
            ubar,
            vbar: coupled.vbar,
            time: sol.time,
        },
        repairs,
    ))
}
