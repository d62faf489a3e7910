//! Smoothness indicator built from the two co-evolved solutions.
//!
//! For each primary cell the conserved state is compared with the one
//! recovered from the mean of the two flanking staggered primitive averages:
//!
//! ```text
//! eps_j     = | alpha(Ubar_j) - alpha(U((Vbar_{j-1/2} + Vbar_{j+1/2}) / 2)) |
//! eps_hat_j = (eps_{j-1} + 4 eps_j + eps_{j+1}) / 6
//! ```
//!
//! A cell is rough when `eps_hat_j >= k * mean(eps_hat)`. On smooth data the
//! discrepancy scales with the square of the mesh size; across discontinuities
//! it stays of order one.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euler::{cons_to_prim, prim_to_cons, ConsState, GasModel};
use crate::grid::DualSolution;
use crate::scalar::Real;

/// Scalar functional of the conserved state compared by the indicator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AlphaSelector {
    Density,
    #[default]
    Momentum,
    Energy,
    Pressure,
}

impl AlphaSelector {
    pub fn eval<T: Real>(self, w: &ConsState<T>, g: &GasModel<T>) -> Result<T> {
        Ok(match self {
            AlphaSelector::Density => w.rho,
            AlphaSelector::Momentum => w.mom,
            AlphaSelector::Energy => w.energy,
            AlphaSelector::Pressure => cons_to_prim(w, g)?.p,
        })
    }
}

impl fmt::Display for AlphaSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaSelector::Density => "density",
            AlphaSelector::Momentum => "momentum",
            AlphaSelector::Energy => "energy",
            AlphaSelector::Pressure => "pressure",
        })
    }
}

impl FromStr for AlphaSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(AlphaSelector::Density),
            "momentum" => Ok(AlphaSelector::Momentum),
            "energy" => Ok(AlphaSelector::Energy),
            "pressure" => Ok(AlphaSelector::Pressure),
            _ => Err(Error::Config(format!(
                "unknown alpha `{s}` (expected density, momentum, energy or pressure)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiField<T> {
    pub eps: Vec<T>,
    pub eps_hat: Vec<T>,
    pub eps_ave: T,
    /// `true` marks a rough cell.
    pub flags: Vec<bool>,
    pub k: T,
}

impl<T: Real> SiField<T> {
    pub fn rough_count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// The classification threshold `k * eps_ave`.
    pub fn threshold(&self) -> T {
        self.k * self.eps_ave
    }
}

/// Raw per-cell discrepancy between the two solutions.
pub fn si_raw<T: Real>(sol: &DualSolution<T>, alpha: AlphaSelector, g: &GasModel<T>) -> Result<Vec<T>> {
    sol.ubar
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mid = (sol.vbar[i] + sol.vbar[i + 1]) * T::half();
            let from_v = prim_to_cons(&mid, g).map_err(|e| e.at("primary cell", i))?;
            let a = alpha.eval(w, g).map_err(|e| e.at("primary cell", i))?;
            let b = alpha.eval(&from_v, g).map_err(|e| e.at("primary cell", i))?;
            Ok((a - b).abs())
        })
        .collect()
}

/// 1-4-1 noise filter; the ends reuse the nearest interior value.
pub fn si_filter<T: Real>(eps: &[T]) -> Vec<T> {
    let n = eps.len();
    if n == 0 {
        return Vec::new();
    }
    let sixth = T::one() / T::lit(6.0);
    let four = T::lit(4.0);
    (0..n)
        .map(|j| {
            let l = eps[j.saturating_sub(1)];
            let r = eps[(j + 1).min(n - 1)];
            (l + four * eps[j] + r) * sixth
        })
        .collect()
}

/// Threshold classification. A zero mean classifies every cell as smooth.
pub fn si_classify<T: Real>(eps_hat: &[T], k: T) -> (T, Vec<bool>) {
    let n = eps_hat.len();
    if n == 0 {
        return (T::zero(), Vec::new());
    }
    let ave = eps_hat.iter().copied().sum::<T>() / T::from_usize(n).unwrap();
    if ave == T::zero() {
        return (ave, vec![false; n]);
    }
    let threshold = k * ave;
    (ave, eps_hat.iter().map(|e| *e >= threshold).collect())
}

/// Raw values, filtered values, and classification in one pass.
pub fn smoothness_indicator<T: Real>(sol: &DualSolution<T>, alpha: AlphaSelector, g: &GasModel<T>, k: T) -> Result<SiField<T>> {
    if !(k > T::zero()) {
        return Err(Error::InvalidParameter(format!("threshold constant must be positive, got {k}")));
    }
    let eps = si_raw(sol, alpha, g)?;
    let eps_hat = si_filter(&eps);
    let (eps_ave, flags) = si_classify(&eps_hat, k);
    Ok(SiField {
        eps,
        eps_hat,
        eps_ave,
        flags,
        k,
    })
}

/// Cells of an `n`-cell grid whose centers fall in the fractional window
/// `[lo, hi]` of the domain.
pub fn window_indices(n: usize, lo: f64, hi: f64) -> Range<usize> {
    let start = (lo * n as f64 - 0.5).ceil().max(0.0) as usize;
    let end = ((hi * n as f64 - 0.5).floor() as usize + 1).min(n);
    start..end.max(start)
}

fn window_max<T: Real>(eps_hat: &[T], window: (f64, f64)) -> T {
    eps_hat[window_indices(eps_hat.len(), window.0, window.1)]
        .iter()
        .fold(T::zero(), |m, e| m.max(*e))
}

/// Observed decay order of the indicator over a smooth window between a coarse
/// and a finer run: `log(max_coarse / max_fine) / log(n_fine / n_coarse)`.
///
/// The window is given as fractions of the domain. Returns `None` when either
/// maximum vanishes.
pub fn si_decay_rate<T: Real>(eps_hat_coarse: &[T], eps_hat_fine: &[T], window: (f64, f64)) -> Option<f64> {
    let coarse = window_max(eps_hat_coarse, window).as_f64();
    let fine = window_max(eps_hat_fine, window).as_f64();
    if !(coarse > 0.0 && fine > 0.0) || eps_hat_fine.len() <= eps_hat_coarse.len() {
        return None;
    }
    let refinement = eps_hat_fine.len() as f64 / eps_hat_coarse.len() as f64;
    Some((coarse / fine).ln() / refinement.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::PrimState;
    use proptest::prelude::*;

    fn gas() -> GasModel<f64> {
        GasModel::new(1.4).unwrap()
    }

    #[test]
    fn alpha_parses() {
        assert_eq!("momentum".parse::<AlphaSelector>().unwrap(), AlphaSelector::Momentum);
        assert!("speed".parse::<AlphaSelector>().is_err());
        assert_eq!(AlphaSelector::default(), AlphaSelector::Momentum);
    }

    #[test]
    fn raw_examples() {
        let g = gas();
        // consistent fields
        let v = PrimState::new(1.2, 0.4, 0.9);
        let sol = DualSolution::new(vec![prim_to_cons(&v, &g).unwrap(); 3], vec![v; 4], 0.0).unwrap();
        assert!(si_raw(&sol, AlphaSelector::Momentum, &g).unwrap().iter().all(|e| *e == 0.0));

        let sol = DualSolution::new(
            vec![ConsState::new(1.0, 1.0, 2.5)],
            vec![PrimState::new(1.0, 0.9, 1.0); 2],
            0.0,
        )
        .unwrap();
        let eps = si_raw(&sol, AlphaSelector::Momentum, &g).unwrap();
        assert!((eps[0] - 0.1).abs() < 1e-15);

        let sol = DualSolution::new(
            vec![ConsState::new(1.0, 0.0, 2.5)],
            vec![PrimState::new(0.8, 0.0, 1.0), PrimState::new(1.2, 0.0, 1.0)],
            0.0,
        )
        .unwrap();
        assert_eq!(si_raw(&sol, AlphaSelector::Density, &g).unwrap()[0], 0.0);
        // the pressure functional averages primitives before converting
        assert!(si_raw(&sol, AlphaSelector::Pressure, &g).unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn filter_examples() {
        assert_eq!(si_filter(&[0.3; 5]), [0.3; 5].iter().map(|x| (x + 4.0 * x + x) / 6.0).collect::<Vec<_>>());
        assert!((si_filter::<f64>(&[0.0, 1.0, 0.0])[1] - 4.0 / 6.0).abs() < 1e-15);
        let f = si_filter::<f64>(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let expected = [5.0 / 6.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 5.0 / 6.0];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(si_filter(&[2.0]), vec![2.0]);
        assert!(si_filter::<f64>(&[]).is_empty());
    }

    #[test]
    fn classify_examples() {
        let (ave, flags) = si_classify(&[0.0; 4], 3.0);
        assert_eq!(ave, 0.0);
        assert!(flags.iter().all(|f| !f));
        let (_, flags) = si_classify(&[1.0; 4], 1.0);
        assert!(flags.iter().all(|f| *f));
        let (ave, flags) = si_classify(&[0.0, 0.0, 0.0, 10.0], 2.0);
        assert_eq!(ave, 2.5);
        assert_eq!(flags, vec![false, false, false, true]);
    }

    #[test]
    fn decay_rate_examples() {
        let coarse = vec![4e-4; 10];
        let fine = vec![1e-4; 20];
        assert!((si_decay_rate(&coarse, &fine, (0.0, 1.0)).unwrap() - 2.0).abs() < 1e-12);
        let rate = si_decay_rate(&[1e-3; 10], &[2.8e-4; 20], (0.0, 1.0)).unwrap();
        assert!((rate - (1.0f64 / 0.28).log2()).abs() < 1e-12);
        assert!((rate - 1.836).abs() < 1e-3);
        assert_eq!(si_decay_rate(&[0.5; 10], &[0.5; 20], (0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(si_decay_rate(&[0.5; 10], &[0.0; 20], (0.0, 1.0)), None);
    }

    #[test]
    fn window_indices_cover_centers() {
        assert_eq!(window_indices(10, 0.0, 1.0), 0..10);
        assert_eq!(window_indices(10, 0.2, 0.5), 2..5);
        assert_eq!(window_indices(10, 0.9, 0.9), 9..9);
    }

    fn eps_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 1..60)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn filter_is_convex(eps in eps_strategy()) {
            let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = eps.iter().cloned().fold(0.0, f64::max);
            for e in si_filter(&eps) {
                prop_assert!(e >= lo * (1.0 - 1e-15) && e <= hi * (1.0 + 1e-15));
            }
        }

        #[test]
        fn flags_are_scale_invariant(eps in eps_strategy(), lambda in 1e-3f64..1e3, k in 0.1f64..5.0) {
            let hat = si_filter(&eps);
            let scaled: Vec<_> = eps.iter().map(|e| e * lambda).collect();
            let hat_scaled = si_filter(&scaled);
            for (a, b) in hat.iter().zip(&hat_scaled) {
                prop_assert!((a * lambda - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
            let (ave, flags) = si_classify(&hat, k);
            let (ave_s, flags_s) = si_classify(&hat_scaled, k);
            prop_assert!((ave * lambda - ave_s).abs() <= 1e-12 * ave_s.abs().max(1e-300));
            // ties at the threshold can flip under rounding; compare away from them
            for j in 0..hat.len() {
                let margin = (hat[j] - k * ave).abs();
                if margin > 1e-9 * hat[j].max(k * ave) {
                    prop_assert_eq!(flags[j], flags_s[j]);
                }
            }
        }

        #[test]
        fn rough_set_shrinks_with_k(eps in eps_strategy(), k1 in 0.1f64..5.0, dk in 0.0f64..5.0) {
            let hat = si_filter(&eps);
            let (_, f1) = si_classify(&hat, k1);
            let (_, f2) = si_classify(&hat, k1 + dk);
            for (a, b) in f1.iter().zip(&f2) {
                prop_assert!(!*b || *a);
            }
        }

        #[test]
        fn consistent_fields_have_no_rough_cells(
            vals in prop::collection::vec((0.1f64..10.0, -5.0f64..5.0, 0.1f64..10.0), 2..40),
            k in 0.1f64..5.0,
        ) {
            let g = gas();
            let vbar: Vec<_> = vals.iter().map(|&(r, u, p)| PrimState::new(r, u, p)).collect();
            let ubar: Vec<_> = vbar.windows(2)
                .map(|w| prim_to_cons(&((w[0] + w[1]) * 0.5), &g).unwrap())
                .collect();
            let sol = DualSolution::new(ubar, vbar, 0.0).unwrap();
            let si = smoothness_indicator(&sol, AlphaSelector::Momentum, &g, k).unwrap();
            prop_assert!(si.eps.iter().all(|e| *e == 0.0));
            prop_assert_eq!(si.rough_count(), 0);
        }
    }
}
