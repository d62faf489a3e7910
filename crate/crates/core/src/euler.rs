//! Ideal-gas Euler equations in conservative and primitive form.
//!
//! The conservative system is `U_t + F(U)_x = 0` with `U = (rho, rho u, E)`.
//! The primitive variables `V = (rho, u, p)` obey the split form
//! `V_t + Ftilde(V)_x = B(V) V_x` with
//!
//! ```text
//! Ftilde(V) = (rho u, u^2 / 2, p u)
//! B(V) V_x  = (0, -p_x / rho, -(gamma - 1) p u_x)
//! ```
//!
//! so that `dFtilde/dV - B` is the usual primitive quasilinear matrix with
//! eigenvalues `u - c`, `u`, `u + c`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ratio of specific heats plus the optional positivity floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel<T> {
    pub gamma: T,
    /// When set, conversions clamp density and pressure from below instead of
    /// failing.
    pub floor: Option<T>,
}

impl<T: Real> GasModel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(Error::InvalidGamma(gamma.as_f64()));
        }
        Ok(Self { gamma, floor: None })
    }

    pub fn with_floor(mut self, floor: T) -> Self {
        self.floor = Some(floor);
        self
    }

    /// Floor value used by robustness experiments.
    pub fn default_floor() -> T {
        T::lit(1e-10)
    }

    fn admit(&self, rho: T, p: T) -> Result<(T, T)> {
        let zero = T::zero();
        if rho > zero && p > zero && rho.is_finite() && p.is_finite() {
            return Ok((rho, p));
        }
        match self.floor {
            Some(f) if !rho.is_nan() && !p.is_nan() && rho.is_finite() && p.is_finite() => {
                Ok((rho.max(f), p.max(f)))
            }
            _ => Err(Error::InvalidState {
                rho: rho.as_f64(),
                p: p.as_f64(),
            }),
        }
    }

    /// Sound speed `sqrt(gamma p / rho)`.
    pub fn sound_speed(&self, v: &PrimState<T>) -> T {
        (self.gamma * v.p / v.rho).sqrt()
    }
}

impl Default for GasModel<f64> {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            floor: None,
        }
    }
}

/// Conservative state: density, momentum density, total energy density.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConsState<T> {
    pub rho: T,
    pub mom: T,
    pub energy: T,
}

/// Primitive state: density, velocity, pressure.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrimState<T> {
    pub rho: T,
    pub u: T,
    pub p: T,
}

/// Fixed-size vector view shared by both state types, so componentwise
/// operations (limiters, mirrors, norms) can be written once.
pub trait StateVector<T: Real>: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn to_array(self) -> [T; 3];
    fn from_array(a: [T; 3]) -> Self;

    /// Applies `f` to matching components of three states.
    #[inline]
    fn zip3(a: Self, b: Self, c: Self, f: impl Fn(T, T, T) -> T) -> Self {
        let (a, b, c) = (a.to_array(), b.to_array(), c.to_array());
        Self::from_array([f(a[0], b[0], c[0]), f(a[1], b[1], c[1]), f(a[2], b[2], c[2])])
    }

    #[inline]
    fn zero() -> Self {
        Self::from_array([T::zero(); 3])
    }

    /// Mirror image across a reflecting wall: the velocity-like component
    /// changes sign.
    fn mirrored(self) -> Self {
        let mut a = self.to_array();
        a[1] = -a[1];
        Self::from_array(a)
    }

    fn max_abs(self) -> T {
        self.to_array().iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    fn is_finite(self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

macro_rules! state_vector {
    ($ty:ident, $a:ident, $b:ident, $c:ident) => {
        impl<T: Real> $ty<T> {
            pub fn new($a: T, $b: T, $c: T) -> Self {
                Self { $a, $b, $c }
            }
        }

        impl<T: Real> StateVector<T> for $ty<T> {
            #[inline]
            fn to_array(self) -> [T; 3] {
                [self.$a, self.$b, self.$c]
            }
            #[inline]
            fn from_array(a: [T; 3]) -> Self {
                Self { $a: a[0], $b: a[1], $c: a[2] }
            }
        }

        impl<T: Real> Add for $ty<T> {
            type Output = Self;
            #[inline]
            fn add(self, o: Self) -> Self {
                Self { $a: self.$a + o.$a, $b: self.$b + o.$b, $c: self.$c + o.$c }
            }
        }

        impl<T: Real> Sub for $ty<T> {
            type Output = Self;
            #[inline]
            fn sub(self, o: Self) -> Self {
                Self { $a: self.$a - o.$a, $b: self.$b - o.$b, $c: self.$c - o.$c }
            }
        }

        impl<T: Real> Mul<T> for $ty<T> {
            type Output = Self;
            #[inline]
            fn mul(self, s: T) -> Self {
                Self { $a: self.$a * s, $b: self.$b * s, $c: self.$c * s }
            }
        }

        impl<T: Real> Neg for $ty<T> {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                Self { $a: -self.$a, $b: -self.$b, $c: -self.$c }
            }
        }
    };
}

state_vector!(ConsState, rho, mom, energy);
state_vector!(PrimState, rho, u, p);

/// The nonzero entries of the coefficient matrix `B(V)` of the split
/// primitive system: `B[1][2] = -1/rho`, `B[2][1] = -(gamma - 1) p`
/// (zero-based row, column).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitMatrix<T> {
    pub b_u_p: T,
    pub b_p_u: T,
}

impl<T: Real> SplitMatrix<T> {
    pub fn at(v: &PrimState<T>, g: &GasModel<T>) -> Self {
        Self {
            b_u_p: -T::one() / v.rho,
            b_p_u: -(g.gamma - T::one()) * v.p,
        }
    }

    /// `B * dv`.
    #[inline]
    pub fn apply(&self, dv: PrimState<T>) -> PrimState<T> {
        PrimState {
            rho: T::zero(),
            u: self.b_u_p * dv.p,
            p: self.b_p_u * dv.u,
        }
    }

    pub fn to_matrix(&self) -> [[T; 3]; 3] {
        let z = T::zero();
        [[z, z, z], [z, z, self.b_u_p], [z, self.b_p_u, z]]
    }
}

pub(crate) fn validate_prim<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<PrimState<T>> {
    if !v.u.is_finite() {
        return Err(Error::InvalidState {
            rho: v.rho.as_f64(),
            p: v.p.as_f64(),
        });
    }
    let (rho, p) = g.admit(v.rho, v.p)?;
    Ok(PrimState { rho, u: v.u, p })
}

pub fn cons_to_prim<T: Real>(w: &ConsState<T>, g: &GasModel<T>) -> Result<PrimState<T>> {
    let rho = w.rho;
    if !(rho > T::zero()) && g.floor.is_none() {
        return Err(Error::InvalidState {
            rho: rho.as_f64(),
            p: f64::NAN,
        });
    }
    let (rho_safe, _) = g.admit(rho, T::one())?;
    let u = w.mom / rho_safe;
    let p = (g.gamma - T::one()) * (w.energy - T::half() * w.mom * u);
    validate_prim(&PrimState { rho: rho_safe, u, p }, g)
}

pub fn prim_to_cons<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<ConsState<T>> {
    let v = validate_prim(v, g)?;
    Ok(ConsState {
        rho: v.rho,
        mom: v.rho * v.u,
        energy: v.p / (g.gamma - T::one()) + T::half() * v.rho * v.u * v.u,
    })
}

/// Physical flux `(rho u, rho u^2 + p, u (E + p))` of the conservative system.
pub fn cons_flux<T: Real>(w: &ConsState<T>, g: &GasModel<T>) -> Result<ConsState<T>> {
    let v = cons_to_prim(w, g)?;
    Ok(ConsState {
        rho: w.mom,
        mom: w.mom * v.u + v.p,
        energy: v.u * (w.energy + v.p),
    })
}

/// Conservative flux evaluated from a primitive state.
pub fn cons_flux_prim<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<ConsState<T>> {
    let w = prim_to_cons(v, g)?;
    let v = validate_prim(v, g)?;
    Ok(flux_from_parts(&v, w.energy))
}

#[inline]
fn flux_from_parts<T: Real>(v: &PrimState<T>, energy: T) -> ConsState<T> {
    let mom = v.rho * v.u;
    ConsState {
        rho: mom,
        mom: mom * v.u + v.p,
        energy: v.u * (energy + v.p),
    }
}

/// [`cons_flux_prim`] for a state already known to be admissible.
#[inline]
pub(crate) fn cons_flux_prim_unchecked<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> ConsState<T> {
    let energy = v.p / (g.gamma - T::one()) + T::half() * v.rho * v.u * v.u;
    flux_from_parts(v, energy)
}

/// Positive, finite density and pressure and a finite velocity. Evaluated
/// without short-circuiting so it stays branch free in hot loops.
#[inline]
pub(crate) fn admissible_prim<T: Real>(v: &PrimState<T>) -> bool {
    let zero = T::zero();
    (v.rho > zero) & (v.p > zero) & v.rho.is_finite() & v.u.is_finite() & v.p.is_finite()
}

/// Flux part of the split primitive system, without validation.
#[inline]
pub(crate) fn prim_flux_unchecked<T: Real>(v: &PrimState<T>) -> PrimState<T> {
    PrimState {
        rho: v.rho * v.u,
        u: T::half() * v.u * v.u,
        p: v.p * v.u,
    }
}

/// `Ftilde(V)` and `B(V)` of the split primitive system.
pub fn prim_flux_split<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<(PrimState<T>, SplitMatrix<T>)> {
    let v = validate_prim(v, g)?;
    Ok((prim_flux_unchecked(&v), SplitMatrix::at(&v, g)))
}

/// Smallest and largest characteristic speeds `u - c`, `u + c`.
pub fn char_speeds<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<(T, T)> {
    let v = validate_prim(v, g)?;
    let c = g.sound_speed(&v);
    Ok((v.u - c, v.u + c))
}

/// `|u| + c`, the fastest signal speed of a state.
pub fn max_signal_speed<T: Real>(v: &PrimState<T>, g: &GasModel<T>) -> Result<T> {
    let v = validate_prim(v, g)?;
    Ok(v.u.abs() + g.sound_speed(&v))
}
