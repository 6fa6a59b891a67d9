//! The compound-Poisson transform of a law: for input `d` the output is
//! `Σ_{n≥0} e^{-1}/n! · d^{*n}`, the law of a sum of `N ~ Poisson(1)`
//! independent copies of `d`. Equivalently, on characteristic functions,
//! `φ ↦ exp(φ - 1)`.
//!
//! The series is truncated at `n_max` with the dropped weight recorded as
//! deficit, so the output is a genuine sub-probability law and every
//! downstream quantity can pick its reading of the missing mass.

use crate::dist::DiscreteLaw;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, Kahan};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Truncation settings for the transform series.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KruglovConfig {
    n_max: usize,
    tail_tol: f64,
    pub prune_tol: f64,
}

/// Hard cap on the series length; the dropped weight at this point is far
/// below any representable tolerance.
const N_MAX_CAP: usize = 170;

impl KruglovConfig {
    /// Builds a config with at least `n_max` terms, raised until the dropped
    /// series weight is at most `tail_tol`.
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must lie in (0, 0.5], got {tail_tol}"
            )));
        }
        let mut n = n_max.max(1);
        while n <= N_MAX_CAP && series_tail(n) > tail_tol {
            n += 1;
        }
        if series_tail(n) > tail_tol {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance {tail_tol} unreachable within {N_MAX_CAP} terms"
            )));
        }
        Ok(Self {
            n_max: n,
            tail_tol,
            prune_tol: crate::dist::DEFAULT_PRUNE_TOL,
        })
    }

    pub fn from_tail_tol(tail_tol: f64) -> Result<Self> {
        Self::new(1, tail_tol)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }
}

impl Default for KruglovConfig {
    fn default() -> Self {
        Self::from_tail_tol(1e-12).expect("default tolerance is reachable")
    }
}

/// Poisson(1) weight `e^{-1}/n!`.
pub fn poisson_weight(n: usize) -> f64 {
    (-1.0 - ln_factorial(n as u64)).exp()
}

/// `Σ_{n > n_max} e^{-1}/n!`, summed directly (smallest terms last are
/// negligible; the sum is dominated by its first term).
fn series_tail(n_max: usize) -> f64 {
    let mut acc = Kahan::new();
    for n in (n_max + 1)..(n_max + 60) {
        let w = poisson_weight(n);
        acc.add(w);
        if w < 1e-300 {
            break;
        }
    }
    acc.value()
}

/// The transform itself: mixture of convolution powers of `d` with
/// Poisson(1) weights, truncated per `cfg`. The input must carry no
/// meaningful deficit; the output deficit is the dropped series weight plus
/// any mass pruned inside the convolutions.
pub fn transform(d: &DiscreteLaw, cfg: &KruglovConfig) -> Result<DiscreteLaw> {
    if d.deficit() > 1e-12 {
        return Err(Error::InvalidLaw(format!(
            "transform input must have no deficit, got {}",
            d.deficit()
        )));
    }
    let mut powers: Vec<DiscreteLaw> = Vec::with_capacity(cfg.n_max + 1);
    powers.push(DiscreteLaw::delta(0.0));
    for _ in 1..=cfg.n_max {
        let prev = powers.last().unwrap();
        powers.push(prev.convolve_with(d, cfg.prune_tol));
    }
    let parts: Vec<(f64, &DiscreteLaw)> = powers
        .iter()
        .enumerate()
        .map(|(n, law)| (poisson_weight(n), law))
        .collect();
    DiscreteLaw::mixture(&parts)
}

/// Transform of the law of a nonnegative step function on `[0,1]`, returned
/// as the decreasing rearrangement of the output.
pub fn apply_to_step(f: &crate::stepfn::StepFunction, cfg: &KruglovConfig) -> Result<crate::stepfn::StepFunction> {
    let law = DiscreteLaw::from_step(f)?;
    Ok(transform(&law, cfg)?.quantile_step())
}

/// Law of the sum of `n` independent copies of `d` thinned by `1/n`:
/// each copy keeps its value with probability `1/n` and is zero otherwise.
/// Converges weakly to the transform of `d` as `n` grows. Computed exactly
/// (no pruning).
pub fn finite_poissonization(d: &DiscreteLaw, n: u64) -> Result<DiscreteLaw> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "poissonization depth must be at least 1".into(),
        ));
    }
    let keep = 1.0 / n as f64;
    let zero = DiscreteLaw::delta(0.0);
    let thinned = DiscreteLaw::mixture(&[(1.0 - keep, &zero), (keep, d)])?;
    Ok(thinned.convolve_power(n, 0.0))
}

/// Largest deviation over `ts` between the characteristic function of the
/// transform output and `exp(φ_d - 1)`.
pub fn charfn_identity_residual(d: &DiscreteLaw, ts: &[f64], cfg: &KruglovConfig) -> Result<f64> {
    let kd = transform(d, cfg)?;
    let mut worst = 0.0_f64;
    for &t in ts {
        let lhs = kd.charfn(t);
        let rhs = (d.charfn(t) - Complex64::new(1.0, 0.0)).exp();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Evenly spaced characteristic-function grid on `[lo, hi]`.
pub fn char_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::numeric::linspace(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::E;

    #[test]
    fn config_auto_raises_to_match_tolerance() {
        let cfg = KruglovConfig::new(3, 1e-12).unwrap();
        // The dropped weight must cross the tolerance exactly at n_max.
        assert!(series_tail(cfg.n_max()) <= 1e-12);
        assert!(series_tail(cfg.n_max() - 1) > 1e-12);
        let explicit = KruglovConfig::new(40, 1e-12).unwrap();
        assert_eq!(explicit.n_max(), 40);
        assert!(KruglovConfig::new(1, 0.0).is_err());
    }

    #[test]
    fn transform_of_unit_point_mass_is_truncated_poisson() {
        let cfg = KruglovConfig::default();
        let k = transform(&DiscreteLaw::delta(1.0), &cfg).unwrap();
        assert_relative_eq!(k.mass_at(0.0), 1.0 / E, max_relative = 1e-14);
        assert_relative_eq!(k.mass_at(1.0), 1.0 / E, max_relative = 1e-14);
        assert_relative_eq!(k.mass_at(2.0), 0.5 / E, max_relative = 1e-14);
        assert!(k.deficit() <= 1e-12);
    }

    #[test]
    fn zero_mass_is_at_least_one_over_e() {
        let cfg = KruglovConfig::default();
        for d in [
            DiscreteLaw::delta(1.0),
            DiscreteLaw::indicator_law(0.5).unwrap(),
            DiscreteLaw::symmetric_pair(2.0, 0.4).unwrap(),
            DiscreteLaw::from_pairs(vec![(-1.0, 0.6), (1.5, 0.4)]).unwrap(),
        ] {
            let k = transform(&d, &cfg).unwrap();
            assert!(k.mass_at(0.0) >= 1.0 / E - 1e-12);
        }
    }

    #[test]
    fn transform_mass_at_zero_of_indicator() {
        // P(sum = 0) = Σ e^{-1}/n! (1/2)^n = e^{-1/2}.
        let cfg = KruglovConfig::default();
        let k = transform(&DiscreteLaw::indicator_law(0.5).unwrap(), &cfg).unwrap();
        assert_abs_diff_eq!(k.mass_at(0.0), (-0.5_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn transform_preserves_first_absolute_moment_of_nonnegative_laws() {
        let cfg = KruglovConfig::default();
        for u in [0.25, 0.5, 1.0] {
            let d = DiscreteLaw::indicator_law(u).unwrap();
            let k = transform(&d, &cfg).unwrap();
            assert_abs_diff_eq!(
                k.quantile_step().integral(),
                d.abs_moment(1.0),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn poissonization_depth_one_is_the_law_itself() {
        let d = DiscreteLaw::from_pairs(vec![(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        let h1 = finite_poissonization(&d, 1).unwrap();
        assert_eq!(h1.atoms().len(), d.atoms().len());
        for (a, b) in h1.atoms().iter().zip(d.atoms()) {
            assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
            assert_relative_eq!(a.mass, b.mass, max_relative = 1e-14);
        }
    }

    #[test]
    fn poissonization_charfn_is_thinned_power() {
        let d = DiscreteLaw::from_pairs(vec![(0.0, 0.3), (1.0, 0.5), (2.0, 0.2)]).unwrap();
        for n in [2_u64, 5, 8] {
            let h = finite_poissonization(&d, n).unwrap();
            for t in [0.0, 0.5, 1.7, -3.2] {
                let base =
                    Complex64::new(1.0, 0.0) + (d.charfn(t) - Complex64::new(1.0, 0.0)) / n as f64;
                let expected = base.powu(n as u32);
                assert!((h.charfn(t) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn charfn_identity_residual_is_truncation_small() {
        let cfg = KruglovConfig::default();
        let grid = char_grid(-10.0, 10.0, 64);
        for d in [
            DiscreteLaw::delta(1.0),
            DiscreteLaw::indicator_law(0.25).unwrap(),
            DiscreteLaw::symmetric_pair(1.0, 0.5).unwrap(),
        ] {
            let r = charfn_identity_residual(&d, &grid, &cfg).unwrap();
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn transform_rejects_deficient_input() {
        let d = DiscreteLaw::from_pairs_deficit(vec![(1.0, 0.9)], 0.1).unwrap();
        assert!(transform(&d, &KruglovConfig::default()).is_err());
    }
}
