//! Spatial operator of the dual semi-discrete system.
//!
//! Conservative averages on the primary grid are advanced with the unlimited
//! fluxes `F(U(Vbar_k))` taken at the staggered averages that sit on each
//! primary interface. Primitive averages on the staggered grid are advanced
//! with a path-conservative central-upwind (PCCU) discretization of the split
//! primitive system, using minmod-limited linear reconstruction.
//!
//! Point `m` (zero-based, `m = 0..=N + 1`) is the center of primary cell
//! `m - 1`, with `m = 0` and `m = N + 1` the ghost centers outside the domain.
//! Staggered cell `k` is bounded by points `k` and `k + 1`.

use crate::error::{Error, Result};
use crate::euler::{
    admissible_prim, cons_flux_prim, cons_flux_prim_unchecked, max_signal_speed, prim_flux_unchecked, ConsState, GasModel,
    PrimState, SplitMatrix, StateVector,
};
use crate::grid::{apply_bc, pad, DualSolution, OverlapGrid};
use crate::scalar::{fmax, fmin, minmod3, Real};

/// Default generalized-minmod parameter.
pub const DEFAULT_THETA: f64 = 1.3;

/// Reconstructed data at one point `x_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PccuPointData<T> {
    /// Right end of the staggered cell to the left of the point.
    pub v_minus: PrimState<T>,
    /// Left end of the staggered cell to the right of the point.
    pub v_plus: PrimState<T>,
    pub a_plus: T,
    pub a_minus: T,
    pub ftilde: PrimState<T>,
    pub b_psi: PrimState<T>,
}

/// Time derivatives of both fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DualRhs<T> {
    pub d_ubar: Vec<ConsState<T>>,
    pub d_vbar: Vec<PrimState<T>>,
    /// `F_{1/2} - F_{N+1/2}`: the net conservative inflow through the domain
    /// ends, so that `sum(d_ubar) * dx` equals it exactly.
    pub boundary_flux: ConsState<T>,
    /// Cells whose slope was zeroed because the reconstruction lost positivity.
    pub slope_fallbacks: usize,
}

/// Componentwise generalized minmod slope (per unit length).
pub fn minmod_slope<T: Real, S: StateVector<T>>(w_left: S, w_center: S, w_right: S, theta: T, dx: T) -> S {
    let inv = T::one() / dx;
    S::zip3(w_left, w_center, w_right, |l, c, r| {
        minmod3(theta * (c - l) * inv, (r - l) * T::half() * inv, theta * (r - c) * inv)
    })
}

/// Limited slopes for every entry of a padded array except the outermost one
/// on each side, which gets a zero slope.
pub fn limited_slopes<T: Real, S: StateVector<T>>(padded: &[S], theta: T, dx: T) -> Vec<S> {
    let n = padded.len();
    let mut out = vec![S::zero(); n];
    for m in 1..n - 1 {
        out[m] = minmod_slope(padded[m - 1], padded[m], padded[m + 1], theta, dx);
    }
    out
}

fn is_admissible<T: Real>(v: &PrimState<T>) -> bool {
    v.rho > T::zero() && v.p > T::zero() && v.is_finite()
}

/// Point values `(v_minus, v_plus)` at the `N + 2` points `x_0..=x_{N+1}`.
///
/// `vbar_padded` holds the `N + 1` staggered averages plus [`GHOSTS`] entries
/// per side. Returns the point values and the number of cells whose slope was
/// cut to zero to keep the reconstruction positive.
pub fn reconstruct_point_values<T: Real>(
    vbar_padded: &[PrimState<T>],
    theta: T,
    dx: T,
) -> (Vec<(PrimState<T>, PrimState<T>)>, usize) {
    let half_dx = T::half() * dx;
    let mut fallbacks = 0;
    // left and right edge values of staggered cells -1..=N+1 (padded 1..len-1)
    let edges: Vec<(PrimState<T>, PrimState<T>)> = (1..vbar_padded.len() - 1)
        .map(|m| {
            let c = vbar_padded[m];
            let s = minmod_slope(vbar_padded[m - 1], c, vbar_padded[m + 1], theta, dx);
            let (lo, hi) = (c - s * half_dx, c + s * half_dx);
            if is_admissible(&lo) && is_admissible(&hi) {
                (lo, hi)
            } else {
                fallbacks += 1;
                (c, c)
            }
        })
        .collect();
    // point m sits between staggered m - 1 (edges[m]) and m (edges[m + 1])
    let points = (0..edges.len() - 1).map(|m| (edges[m].1, edges[m + 1].0)).collect();
    (points, fallbacks)
}

/// One-sided local speeds `(a_plus, a_minus)` with `a_plus >= 0 >= a_minus`.
pub fn local_speeds<T: Real>(v_minus: &PrimState<T>, v_plus: &PrimState<T>, g: &GasModel<T>) -> Result<(T, T)> {
    let (lm, hm) = crate::euler::char_speeds(v_minus, g)?;
    let (lp, hp) = crate::euler::char_speeds(v_plus, g)?;
    let zero = T::zero();
    Ok((hm.max(hp).max(zero), lm.min(lp).min(zero)))
}

/// Central-upwind flux `ftilde` and linear-path jump term `b_psi` at a point.
///
/// When `a_plus - a_minus` falls below `1e-12 * speed_scale` the averaged flux
/// is returned with a zero jump term.
pub fn pccu_point_flux<T: Real>(
    v_minus: &PrimState<T>,
    v_plus: &PrimState<T>,
    a_plus: T,
    a_minus: T,
    speed_scale: T,
    g: &GasModel<T>,
) -> (PrimState<T>, PrimState<T>) {
    let f_minus = prim_flux_unchecked(v_minus);
    let f_plus = prim_flux_unchecked(v_plus);
    let width = a_plus - a_minus;
    if width < T::lit(1e-12) * speed_scale || width <= T::zero() {
        return ((f_minus + f_plus) * T::half(), PrimState::zero());
    }
    let jump = *v_plus - *v_minus;
    let inv = T::one() / width;
    let ftilde = (f_minus * a_plus - f_plus * a_minus) * inv + jump * (a_plus * a_minus * inv);
    let mid = (*v_minus + *v_plus) * T::half();
    let b_psi = SplitMatrix::at(&mid, g).apply(jump);
    (ftilde, b_psi)
}

/// Unlimited conservative flux at a primary interface, evaluated at the
/// staggered average centered there.
pub fn conservative_interface_flux<T: Real>(vbar: &PrimState<T>, g: &GasModel<T>) -> Result<ConsState<T>> {
    cons_flux_prim(vbar, g)
}

/// Full PCCU point data for a solution (mainly for diagnostics and tests).
pub fn point_data<T: Real>(sol: &DualSolution<T>, grid: &OverlapGrid<T>, g: &GasModel<T>, theta: T) -> Result<Vec<PccuPointData<T>>> {
    let padded = apply_bc(sol, grid);
    let (points, _) = reconstruct_point_values(&padded.vbar, theta, grid.dx);
    let speeds = points
        .iter()
        .enumerate()
        .map(|(m, (vm, vp))| local_speeds(vm, vp, g).map_err(|e| e.at("point", m)))
        .collect::<Result<Vec<_>>>()?;
    let scale = speeds.iter().fold(T::zero(), |s, (ap, am)| s.max(*ap).max(-*am));
    Ok(points
        .iter()
        .zip(&speeds)
        .map(|((vm, vp), &(ap, am))| {
            let (ftilde, b_psi) = pccu_point_flux(vm, vp, ap, am, scale, g);
            PccuPointData {
                v_minus: *vm,
                v_plus: *vp,
                a_plus: ap,
                a_minus: am,
                ftilde,
                b_psi,
            }
        })
        .collect())
}

/// Right-hand side of the dual semi-discrete system.
pub fn compute_rhs<T: Real>(sol: &DualSolution<T>, grid: &OverlapGrid<T>, g: &GasModel<T>, theta: T) -> Result<DualRhs<T>> {
    let n = grid.n_cells;
    let dx = grid.dx;
    let zero = T::zero();
    let inv_dx = T::one() / dx;
    let half_dx = T::half() * dx;

    // validates every staggered average; ghosts are copies or mirrors of them
    let fluxes: Vec<ConsState<T>> = if sol.vbar.iter().fold(true, |ok, v| ok & admissible_prim(v)) {
        sol.vbar.iter().map(|v| cons_flux_prim_unchecked(v, g)).collect()
    } else {
        sol.vbar
            .iter()
            .enumerate()
            .map(|(k, v)| conservative_interface_flux(v, g).map_err(|e| e.at("staggered cell", k)))
            .collect::<Result<_>>()?
    };
    let d_ubar = fluxes.windows(2).map(|f| (f[0] - f[1]) * inv_dx).collect();
    let boundary_flux = fluxes[0] - fluxes[n];

    let vpad = pad(&sol.vbar, grid.bc, n, true);
    let mut slope_fallbacks = 0;
    // edges of the padded staggered cell `j`, for j = 1..len - 1
    let mut edges = |j: usize| {
        let c = vpad[j];
        let s = minmod_slope(vpad[j - 1], c, vpad[j + 1], theta, dx) * half_dx;
        let (lo, hi) = (c - s, c + s);
        if (lo.rho > zero) & (lo.p > zero) & (hi.rho > zero) & (hi.p > zero) {
            (lo, hi)
        } else {
            slope_fallbacks += 1;
            (c, c)
        }
    };
    let mut points = Vec::with_capacity(n + 2);
    let mut scale = zero;
    let mut left = edges(1);
    for m in 0..n + 2 {
        let right = edges(m + 2);
        let (vm, vp) = (left.1, right.0);
        let (cm, cp) = (g.sound_speed(&vm), g.sound_speed(&vp));
        let ap = fmax(fmax(vm.u + cm, vp.u + cp), zero);
        let am = fmin(fmin(vm.u - cm, vp.u - cp), zero);
        scale = fmax(scale, fmax(ap, -am));
        points.push((vm, vp, ap, am));
        left = right;
    }

    let threshold = T::lit(1e-12) * scale;
    let gm1 = g.gamma - T::one();
    // `(ftilde, b_psi a+ / width, b_psi a- / width)` at point `m`
    let term = |m: usize| {
        let (vm, vp, ap, am) = points[m];
        let f_minus = prim_flux_unchecked(&vm);
        let f_plus = prim_flux_unchecked(&vp);
        let width = ap - am;
        if width < threshold || width <= zero {
            return ((f_minus + f_plus) * T::half(), PrimState::zero(), PrimState::zero());
        }
        let jump = vp - vm;
        let inv = T::one() / width;
        let ftilde = (f_minus * ap - f_plus * am) * inv + jump * (ap * am * inv);
        let b_psi = PrimState {
            rho: zero,
            u: -T::two() / (vm.rho + vp.rho) * jump.p,
            p: -gm1 * (vm.p + vp.p) * T::half() * jump.u,
        };
        (ftilde, b_psi * (ap * inv), b_psi * (am * inv))
    };
    let mut d_vbar = Vec::with_capacity(n + 1);
    let mut t_left = term(0);
    for k in 0..=n {
        let t_right = term(k + 1);
        let (f_l, psi_plus_l, _) = t_left;
        let (f_r, _, psi_minus_r) = t_right;
        let b_cell = SplitMatrix::at(&sol.vbar[k], g).apply(points[k + 1].0 - points[k].1);
        d_vbar.push((f_r - f_l - b_cell - psi_plus_l + psi_minus_r) * (-inv_dx));
        t_left = t_right;
    }

    Ok(DualRhs {
        d_ubar,
        d_vbar,
        boundary_flux,
        slope_fallbacks,
    })
}

/// Largest `|u| + c` over both fields.
pub fn max_wave_speed<T: Real>(sol: &DualSolution<T>, g: &GasModel<T>) -> Result<T> {
    let mut s = T::zero();
    for (i, w) in sol.ubar.iter().enumerate() {
        let v = crate::euler::cons_to_prim(w, g).map_err(|e| e.at("primary cell", i))?;
        s = s.max(max_signal_speed(&v, g)?);
    }
    for (k, v) in sol.vbar.iter().enumerate() {
        s = s.max(max_signal_speed(v, g).map_err(|e| e.at("staggered cell", k))?);
    }
    if !(s > T::zero()) {
        return Err(Error::InvalidParameter("zero maximum wave speed".into()));
    }
    Ok(s)
}
