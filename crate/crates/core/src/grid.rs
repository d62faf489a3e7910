//! Overlapping uniform grids and the dual solution container.
//!
//! Primary cells (zero-based `i = 0..N`) have centers `x_min + (i + 1/2) dx`.
//! Staggered cells (zero-based `k = 0..=N`) span the centers of primary cells
//! `k - 1` and `k`, so staggered cell `k` is centered on the primary interface
//! `x_min + k dx`. The first and last staggered cells straddle the domain ends.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euler::{ConsState, PrimState, StateVector};
use crate::scalar::Real;

/// Ghost layers on each side of both padded arrays.
pub const GHOSTS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Outflow,
    Reflective,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Outflow => "outflow",
            Boundary::Reflective => "reflective",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "outflow" => Ok(Boundary::Outflow),
            "reflective" => Ok(Boundary::Reflective),
            _ => Err(Error::Config(format!("unknown boundary `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapGrid<T> {
    pub n_cells: usize,
    pub x_min: T,
    pub x_max: T,
    pub dx: T,
    pub bc: Boundary,
}

impl<T: Real> OverlapGrid<T> {
    pub fn new(n_cells: usize, x_min: T, x_max: T, bc: Boundary) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n_cells}")));
        }
        if !(x_max > x_min) {
            return Err(Error::InvalidGrid(format!("empty domain [{x_min}, {x_max}]")));
        }
        let dx = (x_max - x_min) / T::from_usize(n_cells).unwrap();
        Ok(Self {
            n_cells,
            x_min,
            x_max,
            dx,
            bc,
        })
    }

    /// Center of primary cell `i` (zero-based).
    pub fn center(&self, i: usize) -> T {
        self.x_min + (T::from_usize(i).unwrap() + T::half()) * self.dx
    }

    /// Center of staggered cell `k`, which is the primary interface `x_min + k dx`.
    pub fn staggered_center(&self, k: usize) -> T {
        self.x_min + T::from_usize(k).unwrap() * self.dx
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

/// Conservative averages on the primary grid and primitive averages on the
/// staggered grid at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution<T> {
    pub ubar: Vec<ConsState<T>>,
    pub vbar: Vec<PrimState<T>>,
    pub time: T,
}

impl<T: Real> DualSolution<T> {
    pub fn new(ubar: Vec<ConsState<T>>, vbar: Vec<PrimState<T>>, time: T) -> Result<Self> {
        if vbar.len() != ubar.len() + 1 {
            return Err(Error::InvalidGrid(format!(
                "{} primary averages need {} staggered averages, got {}",
                ubar.len(),
                ubar.len() + 1,
                vbar.len()
            )));
        }
        Ok(Self { ubar, vbar, time })
    }

    pub fn n_cells(&self) -> usize {
        self.ubar.len()
    }

    /// Componentwise sum of the conservative averages times `dx`.
    pub fn totals(&self, dx: T) -> ConsState<T> {
        self.ubar.iter().fold(ConsState::zero(), |acc, u| acc + *u) * dx
    }
}

/// Both fields extended by [`GHOSTS`] entries per side.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostPadded<T> {
    pub ubar: Vec<ConsState<T>>,
    pub vbar: Vec<PrimState<T>>,
}

impl<T: Real> GhostPadded<T> {
    /// Primary average at signed index `i`, where `0..N` is the interior.
    #[inline]
    pub fn u(&self, i: isize) -> ConsState<T> {
        self.ubar[(i + GHOSTS as isize) as usize]
    }

    /// Staggered average at signed index `k`, where `0..=N` is the interior.
    #[inline]
    pub fn v(&self, k: isize) -> PrimState<T> {
        self.vbar[(k + GHOSTS as isize) as usize]
    }
}

/// Extends `interior` by [`GHOSTS`] entries per side.
///
/// `period` is the number of distinct cells under periodic wrapping: `N` for
/// the primary grid and also `N` for the staggered grid, whose first and last
/// entries describe the same physical cell. `wall_centered` marks arrays whose
/// end entries are centered on the boundary (the staggered grid); their
/// mirror images skip the end entry itself.
pub fn pad<T: Real, S: StateVector<T>>(interior: &[S], bc: Boundary, period: usize, wall_centered: bool) -> Vec<S> {
    let n = interior.len();
    let g = GHOSTS;
    let shift = usize::from(wall_centered);
    let mut out = Vec::with_capacity(n + 2 * g);
    for l in (1..=g).rev() {
        out.push(match bc {
            Boundary::Periodic => interior[(period * g + period - l) % period],
            Boundary::Outflow => interior[0],
            Boundary::Reflective => interior[l - 1 + shift].mirrored(),
        });
    }
    out.extend_from_slice(interior);
    for l in 1..=g {
        out.push(match bc {
            Boundary::Periodic => interior[(n - 1 + l) % period],
            Boundary::Outflow => interior[n - 1],
            Boundary::Reflective => interior[n - l - shift].mirrored(),
        });
    }
    out
}

/// Fills ghost entries of both fields according to the grid's boundary policy.
pub fn apply_bc<T: Real>(sol: &DualSolution<T>, grid: &OverlapGrid<T>) -> GhostPadded<T> {
    let n = grid.n_cells;
    GhostPadded {
        ubar: pad(&sol.ubar, grid.bc, n, false),
        vbar: pad(&sol.vbar, grid.bc, n, true),
    }
}

/// Average over the staggered cell `[x_j, x_{j+1}]` of the two linear pieces
/// `left + s_left (x - x_j)` and `right + s_right (x - x_{j+1})`; slopes are
/// per unit length.
#[inline]
pub fn project_pair<T: Real, S: StateVector<T>>(left: S, right: S, s_left: S, s_right: S, dx: T) -> S {
    (left + right) * T::half() + (s_left - s_right) * (dx / T::lit(8.0))
}

/// Projects padded primary averages with matching padded slopes onto all
/// `N + 1` staggered cells. Both inputs carry [`GHOSTS`] entries per side.
pub fn project_primary_to_staggered<T: Real>(
    ubar_padded: &[ConsState<T>],
    slopes_padded: &[ConsState<T>],
    dx: T,
) -> Vec<ConsState<T>> {
    assert_eq!(ubar_padded.len(), slopes_padded.len());
    let n = ubar_padded.len() - 2 * GHOSTS;
    (0..=n)
        .map(|k| {
            // staggered k lies between primary k - 1 and k
            let l = k + GHOSTS - 1;
            project_pair(ubar_padded[l], ubar_padded[l + 1], slopes_padded[l], slopes_padded[l + 1], dx)
        })
        .collect()
}
