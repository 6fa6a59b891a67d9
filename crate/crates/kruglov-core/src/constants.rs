//! Closed-form bounds on the operator norm of the transform between
//! rearrangeable spaces, the extremal binomial family, and empirical norm
//! estimation.
//!
//! All series are summed in the log domain so large exponents stay finite,
//! with compensated accumulation of the rescaled terms.

use crate::error::{Error, Result};
use crate::kruglov::{self, KruglovConfig};
use crate::numeric::{ln_factorial, Kahan};
use crate::spaces::SpaceSpec;
use crate::stepfn::StepFunction;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

/// Universal lower bound for the transform's norm between any of the spaces
/// handled here: the output keeps mass at least `1/e` in place.
pub const UNIVERSAL_LOWER: f64 = 1.0 / E;

/// Value of a series bound together with its analytic cap.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesBound {
    pub value: f64,
    /// `e·p/ln p` for `p ≥ 2`, `2e` below.
    pub cap: f64,
}

/// Value of a discrete sup together with the index attaining it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WitnessBound {
    pub value: f64,
    pub witness: u64,
}

/// Value of a one-dimensional sup together with its argmax.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridBound {
    pub value: f64,
    pub argmax: f64,
}

/// Lower bound for the `ℓ_q`-valued norm rate: the bare sup, the index
/// attaining it, and the sup scaled by the constant prefactor
/// `1/(√(2π)·e)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailRateBound {
    pub value: f64,
    pub bare_sup: f64,
    pub witness: u64,
}

/// `(Σ_{n≥1} n^p e^{-1}/n!)^{1/p}`: the norm of the transform of the unit
/// indicator in `L_p`, and the sharp upper-bound series for `L_p → L_p`.
pub fn upper_bound_lp(p: f64) -> Result<SeriesBound> {
    check_p(p)?;
    let ln_terms = |n: u64| p * (n as f64).ln() - 1.0 - ln_factorial(n);
    let ln_sum = log_sum_unimodal(ln_terms);
    let value = (ln_sum / p).exp();
    let cap = if p >= 2.0 { E * p / p.ln() } else { 2.0 * E };
    Ok(SeriesBound { value, cap })
}

/// `(1/e) · sup_{k≥1} k / (k!)^{1/p}`: witness lower bound for the norm on
/// `L_p`, and on any same-`p` pair of the spaces handled here.
pub fn lower_bound_lp(p: f64) -> Result<WitnessBound> {
    check_p(p)?;
    let k_hi = (4.0 * p).ceil() as u64 + 4;
    let mut best = f64::NEG_INFINITY;
    let mut witness = 1;
    for k in 1..=k_hi {
        let ln_term = (k as f64).ln() - ln_factorial(k) / p;
        if ln_term > best {
            best = ln_term;
            witness = k;
        }
    }
    Ok(WitnessBound {
        value: (best - 1.0).exp(),
        witness,
    })
}

/// `2 · sup_{0<u≤1} u^{-1/p} Σ_{k≥1} (u^k/k!)^{1/p}`: upper bound for the
/// norm on the Lorentz space with fundamental function `t^{1/p}`. The sup
/// is located on a log grid and sharpened by golden-section refinement.
pub fn lorentz_upper_bound(p: f64) -> Result<GridBound> {
    check_p(p)?;
    let g = |u: f64| -> f64 {
        let mut acc = Kahan::new();
        let mut lnfac = 0.0;
        for k in 1..400 {
            lnfac += (k as f64).ln();
            let term = (((k - 1) as f64 * u.ln() - lnfac) / p).exp();
            acc.add(term);
            if term < 1e-18 * acc.value() {
                break;
            }
        }
        acc.value()
    };
    let grid: Vec<f64> = (0..512)
        .map(|i| 10f64.powf(-6.0 * (1.0 - i as f64 / 511.0)))
        .collect();
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &u) in grid.iter().enumerate() {
        let v = g(u);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (mut a, mut b) = (lo, hi);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while b - a > 1e-10 * b {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
    }
    let refined = 0.5 * (a + b);
    let (value, argmax) = if g(refined) > best {
        (g(refined), refined)
    } else {
        (best, grid[best_i])
    };
    Ok(GridBound {
        value: 2.0 * value,
        argmax,
    })
}

/// The reference growth rate `p / ln(p+1)`.
pub fn reference_rate(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(p / (p + 1.0).ln())
}

/// `sup_{n≥1} n^{1/q} / (n^{2n})^{1/p}`, reported bare and scaled by
/// `1/(√(2π)·e)`.
pub fn lq_lower_bound(p: f64, q: f64) -> Result<TailRateBound> {
    check_p(p)?;
    check_p(q)?;
    let n_hi = (10.0 * p).ceil() as u64 + 10;
    let mut best = f64::NEG_INFINITY;
    let mut witness = 1;
    for n in 1..=n_hi {
        let ln_n = (n as f64).ln();
        let ln_term = ln_n / q - 2.0 * n as f64 * ln_n / p;
        if ln_term > best {
            best = ln_term;
            witness = n;
        }
    }
    let bare_sup = best.exp();
    Ok(TailRateBound {
        value: bare_sup / ((2.0 * PI).sqrt() * E),
        bare_sup,
        witness,
    })
}

/// Closed-form two-sided bracket together with an empirical estimate of the
/// transform's norm from input space to output space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub input_space: String,
    pub output_space: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub estimate: Option<f64>,
    pub witness: Option<String>,
}

/// Estimates `sup_f ‖Kf‖_out / ‖f‖_in` over the given family of step
/// functions and brackets it with the closed-form bounds available for the
/// space pair. The estimate reads unresolved transform mass at 0, so each
/// ratio is a certified underestimate of its true value.
pub fn estimate_operator_norm(
    input: &SpaceSpec,
    output: &SpaceSpec,
    family: &[StepFunction],
    cfg: &KruglovConfig,
) -> Result<BoundReport> {
    let mut estimate: Option<f64> = None;
    let mut witness = None;
    for f in family {
        let in_norm = input.norm(f)?;
        if in_norm <= 0.0 {
            return Err(Error::InvalidParameter(
                "family member with zero input norm".into(),
            ));
        }
        let kf = kruglov::apply_to_step(f, cfg)?;
        let ratio = output.norm(&kf)? / in_norm;
        if estimate.map_or(true, |e| ratio > e) {
            estimate = Some(ratio);
            witness = Some(format!("step{:?}", f.to_pairs()));
        }
    }
    let (lower, upper) = closed_form_bracket(input, output)?;
    Ok(BoundReport {
        input_space: input.to_string(),
        output_space: output.to_string(),
        lower,
        upper,
        estimate,
        witness,
    })
}

/// Closed-form norm bracket for a space pair, where one is known.
fn closed_form_bracket(input: &SpaceSpec, output: &SpaceSpec) -> Result<(Option<f64>, Option<f64>)> {
    use SpaceSpec::*;
    let same_p = |a: f64, b: f64| (a - b).abs() < 1e-12;
    Ok(match (input, output) {
        (Lp { p }, Lp { p: p2 }) if same_p(*p, *p2) => {
            let lower = if *p > 1.0 {
                lower_bound_lp(*p)?.value.max(UNIVERSAL_LOWER)
            } else {
                // On L_1 the transform preserves the norm of nonnegative
                // functions, so the sup over the family is exactly 1.
                1.0
            };
            (Some(lower), Some(upper_bound_lp(*p)?.value))
        }
        (Lorentz { p }, Lorentz { p: p2 }) if same_p(*p, *p2) => (
            Some(lower_bound_lp(*p)?.value.max(UNIVERSAL_LOWER)),
            Some(lorentz_upper_bound(*p)?.value),
        ),
        (Lorentz { p }, Marcinkiewicz { p: p2 }) if same_p(*p, *p2) => (
            Some(lower_bound_lp(*p)?.value.max(UNIVERSAL_LOWER)),
            Some(upper_bound_lp(*p)?.value.min(lorentz_upper_bound(*p)?.value)),
        ),
        (Lp { p }, Marcinkiewicz { p: p2 }) if same_p(*p, *p2) => (
            Some(lower_bound_lp(*p)?.value.max(UNIVERSAL_LOWER)),
            Some(upper_bound_lp(*p)?.value),
        ),
        (Marcinkiewicz { p }, Marcinkiewicz { p: p2 }) if same_p(*p, *p2) => (
            Some(lower_bound_lp(*p)?.value.max(UNIVERSAL_LOWER)),
            None,
        ),
        _ => (Some(UNIVERSAL_LOWER), None),
    })
}

/// Upper tails and extremal profile of `Binomial(n, u/n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinomialExtremal {
    /// `tails[k-1] = P(X ≥ k)` for `k = 1..=n`, strictly decreasing.
    pub tails: Vec<f64>,
    /// Step function with value `k` on `[tails[k], tails[k-1])`.
    pub profile: StepFunction,
}

/// Tails of `Binomial(n, u/n)` with the profile they carve out. Tail sums
/// accumulate probabilities from the smallest term (`i = n` downward) so
/// nearby tails stay accurate.
pub fn binomial_extremal(n: u32, u: f64) -> Result<BinomialExtremal> {
    let pmf = binomial_pmf(n, u)?;
    let mut tails = vec![0.0_f64; n as usize + 1];
    for k in (1..=n as usize).rev() {
        tails[k] = tails.get(k + 1).copied().unwrap_or(0.0) + pmf[k];
    }
    tails.remove(0);
    let mut pairs = Vec::with_capacity(n as usize);
    let mut upper = 0.0;
    for k in (1..=n as usize).rev() {
        let tau = tails[k - 1];
        let len = tau - upper;
        if len > 0.0 {
            pairs.push((len, k as f64));
        }
        upper = tau;
    }
    pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(BinomialExtremal {
        tails,
        profile: StepFunction::new(pairs)?,
    })
}

/// Same plateaus as the extremal profile, carrying values `k^{1/q}`.
pub fn lq_profile(n: u32, u: f64, q: f64) -> Result<StepFunction> {
    check_p(q)?;
    let be = binomial_extremal(n, u)?;
    StepFunction::new(
        be.profile
            .to_pairs()
            .into_iter()
            .map(|(len, k)| (len, k.powf(1.0 / q)))
            .collect(),
    )
}

/// Probability mass function of `Binomial(n, u/n)` in the log domain.
fn binomial_pmf(n: u32, u: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("binomial needs n >= 1".into()));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "binomial parameter must lie in (0, 1], got {u}"
        )));
    }
    let prob = u / n as f64;
    if prob >= 1.0 {
        // Only n = 1, u = 1: the deterministic single success.
        let mut pmf = vec![0.0; n as usize + 1];
        pmf[n as usize] = 1.0;
        return Ok(pmf);
    }
    let ln_p = prob.ln();
    let ln_1p = (-prob).ln_1p();
    let ln_n_fact = ln_factorial(n as u64);
    let pmf = (0..=n as usize)
        .map(|i| {
            let ln_choose =
                ln_n_fact - ln_factorial(i as u64) - ln_factorial((n as usize - i) as u64);
            (ln_choose + i as f64 * ln_p + (n as usize - i) as f64 * ln_1p).exp()
        })
        .collect();
    Ok(pmf)
}

/// Lower bound on the Marcinkiewicz norm of the extremal profile:
/// `sup_k k^{1/q} · tails[k-1]^{1/p}` evaluated through the indicator below
/// each plateau.
pub fn extremal_marcinkiewicz_floor(n: u32, u: f64, p: f64, q: f64) -> Result<f64> {
    check_p(p)?;
    check_p(q)?;
    let be = binomial_extremal(n, u)?;
    let mut best = 0.0_f64;
    for (k, tau) in be.tails.iter().enumerate() {
        best = best.max(((k + 1) as f64).powf(1.0 / q) * tau.powf(1.0 / p));
    }
    Ok(best)
}

/// Transform of the scaled indicator family `χ_[0,u]` over a log grid of
/// `u`, the default probe family for norm estimation.
pub fn indicator_family(count: usize) -> Result<Vec<StepFunction>> {
    if count == 0 {
        return Err(Error::InvalidParameter("family must be nonempty".into()));
    }
    (0..count)
        .map(|i| {
            let u = if count == 1 {
                1.0
            } else {
                10f64.powf(-3.0 * (1.0 - i as f64 / (count - 1) as f64))
            };
            StepFunction::indicator(u)
        })
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "exponent must be finite and at least 1, got {p}"
        )));
    }
    Ok(())
}

/// Log-domain sum of a unimodal positive series given by its log terms:
/// scans from `n = 1`, tracks the max, and stops once terms fall 60 nats
/// behind it.
fn log_sum_unimodal(ln_term: impl Fn(u64) -> f64) -> f64 {
    let mut terms = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut n = 1_u64;
    loop {
        let lt = ln_term(n);
        if lt > best {
            best = lt;
        }
        terms.push(lt);
        if lt < best - 60.0 && n > 1 {
            break;
        }
        n += 1;
        assert!(n < 100_000, "series failed to converge");
    }
    let mut acc = Kahan::new();
    for lt in terms {
        acc.add((lt - best).exp());
    }
    best + acc.value().ln()
}
