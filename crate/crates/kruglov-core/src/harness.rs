//! Checkers for the sum/rearrangement inequalities: exact enumeration on
//! small ensembles, seeded Monte Carlo on larger ones, every verdict
//! reported with its worst-case margin.
//!
//! An ensemble is an ordered list of independent laws `f_1..f_n`. Derived
//! objects: the exact law of `S = Σ f_k`, the disjoint profile `F*`
//! (decreasing rearrangement of the functions laid out on disjoint unit
//! blocks), and the pooled law sharing the same rearrangement when the
//! total support mass stays within 1.

use crate::dist::DiscreteLaw;
use crate::error::{Error, Result};
use crate::kruglov::{self, KruglovConfig};
use crate::numeric::Kahan;
use crate::spaces::{check_assumption, SpaceSpec, TailMode};
use crate::stepfn::StepFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Margin below which a check is declared failed.
pub const PASS_TOL: f64 = 1e-9;

/// Default cap on intermediate atom-count products in exact enumeration.
pub const DEFAULT_ATOM_BUDGET: usize = 1_000_000;

/// Tolerance used for the symmetry and zero-mean structural flags.
pub const FLAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ensemble {
    pub laws: Vec<DiscreteLaw>,
    pub name: Option<String>,
}

/// Structural flags, recomputed from the laws on demand.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnsembleFlags {
    pub symmetric: bool,
    pub mean_zero: bool,
    pub support_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailNorm {
    /// `∫_1^∞ F*`.
    L1,
    /// `(∫_1^∞ (F*)^2)^{1/2}`.
    L2,
    /// `(Σ_{k≥1} F*(k)^2)^{1/2}`.
    Discrete2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenteringMode {
    /// Subtract the mean everywhere.
    Global,
    /// Subtract `mean/P(f ≠ 0)` on the support only, keeping zeros zero.
    Support,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    #[serde(rename = "monte_carlo")]
    MonteCarlo {
        trials: usize,
        seed: u64,
        ci_halfwidth: f64,
    },
}

/// One inequality verdict: `lhs ≤ constant_used · rhs` up to `PASS_TOL`,
/// with `margin = constant_used · rhs - lhs` at the worst evaluation point.
/// Two-sided checks fold both slacks into `margin`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub margin: f64,
    pub pass: bool,
    pub mode: CheckMode,
}

impl CheckReport {
    fn exact(name: &str, lhs: f64, rhs: f64, constant_used: f64, margin: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            constant_used,
            margin,
            pass: margin >= -PASS_TOL,
            mode: CheckMode::Exact,
        }
    }
}

impl Ensemble {
    pub fn new(laws: Vec<DiscreteLaw>, name: Option<String>) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::InvalidParameter("ensemble must be nonempty".into()));
        }
        for d in &laws {
            if d.deficit() > 1e-12 {
                return Err(Error::InvalidLaw(
                    "ensemble laws must carry no deficit".into(),
                ));
            }
        }
        Ok(Self { laws, name })
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn flags(&self) -> EnsembleFlags {
        let symmetric = self.laws.iter().all(law_is_symmetric);
        let mean_zero = self.laws.iter().all(|d| d.mean().abs() <= FLAG_TOL);
        let (support_sum, _) = check_assumption(&self.laws);
        EnsembleFlags {
            symmetric,
            mean_zero,
            support_sum,
        }
    }

    /// Exact law of `Σ f_k`, guarded by an atom budget on every
    /// intermediate product.
    pub fn exact_sum_law(&self, budget: usize) -> Result<DiscreteLaw> {
        let mut acc = DiscreteLaw::delta(0.0);
        for d in &self.laws {
            let needed = acc.atoms().len() * d.atoms().len();
            if needed > budget {
                return Err(Error::Budget { needed, budget });
            }
            acc = acc.convolve(d);
        }
        Ok(acc)
    }

    /// Disjoint profile `F*`: decreasing rearrangement of the functions
    /// laid out on disjoint unit blocks. Support measure is the total
    /// support mass of the ensemble.
    pub fn disjoint_profile(&self) -> Result<StepFunction> {
        let steps: Vec<StepFunction> = self.laws.iter().map(|d| d.quantile_step()).collect();
        Ok(StepFunction::disjointify(&steps)?.rearrange())
    }

    /// Pooled signed law: one variable carrying every nonzero atom of every
    /// law, remaining mass at 0. Defined when the total support mass is at
    /// most 1; its `|·|`-rearrangement equals the disjoint profile.
    pub fn pooled_law(&self) -> Result<DiscreteLaw> {
        let flags = self.flags();
        if flags.support_sum > 1.0 + 1e-12 {
            return Err(Error::FlagMismatch(format!(
                "pooled law needs total support mass at most 1, got {}",
                flags.support_sum
            )));
        }
        let mut pairs: Vec<(f64, f64)> = vec![(0.0, (1.0 - flags.support_sum).max(0.0))];
        for d in &self.laws {
            for a in d.atoms() {
                if a.value != 0.0 {
                    pairs.push((a.value, a.mass));
                }
            }
        }
        DiscreteLaw::from_pairs(pairs)
    }

    /// Centered copy of the ensemble.
    pub fn centering(&self, mode: CenteringMode) -> Result<Ensemble> {
        let mut out = Vec::with_capacity(self.laws.len());
        for d in self.laws.iter() {
            let mean = d.mean();
            let pairs: Vec<(f64, f64)> = match mode {
                CenteringMode::Global => d
                    .atoms()
                    .iter()
                    .map(|a| (a.value - mean, a.mass))
                    .collect(),
                CenteringMode::Support => {
                    let p = d.prob_nonzero();
                    if p == 0.0 {
                        d.atoms().iter().map(|a| (a.value, a.mass)).collect()
                    } else {
                        let shift = mean / p;
                        d.atoms()
                            .iter()
                            .map(|a| {
                                if a.value == 0.0 {
                                    (0.0, a.mass)
                                } else {
                                    (a.value - shift, a.mass)
                                }
                            })
                            .collect()
                    }
                }
            };
            out.push(DiscreteLaw::from_pairs(pairs)?);
        }
        Ensemble::new(out, self.name.clone())
    }
}

fn law_is_symmetric(d: &DiscreteLaw) -> bool {
    for a in d.atoms() {
        if a.value == 0.0 {
            continue;
        }
        let mirrored = d
            .atoms()
            .iter()
            .find(|b| (b.value + a.value).abs() <= FLAG_TOL * a.value.abs().max(1.0));
        match mirrored {
            Some(b) if (b.mass - a.mass).abs() <= FLAG_TOL => {}
            _ => return false,
        }
    }
    true
}

/// `‖S‖_X ≤ constant · (‖F*χ_[0,1]‖_X + tail)` with the chosen tail norm.
/// The quadratic tails require a zero-mean ensemble.
pub fn rosenthal_check(
    ens: &Ensemble,
    x: &SpaceSpec,
    tail: TailNorm,
    constant: f64,
    budget: usize,
) -> Result<CheckReport> {
    if !x.on_unit_interval() {
        return Err(Error::InvalidParameter(
            "the head space must live on [0,1]".into(),
        ));
    }
    if matches!(tail, TailNorm::L2 | TailNorm::Discrete2) && !ens.flags().mean_zero {
        return Err(Error::FlagMismatch(
            "quadratic tail norms require a zero-mean ensemble".into(),
        ));
    }
    let s = ens.exact_sum_law(budget)?;
    let lhs = x.norm_of_law(&s)?;
    let rhs = rosenthal_rhs(ens, x, tail)?;
    let name = match tail {
        TailNorm::L1 => "rosenthal_l1",
        TailNorm::L2 => "rosenthal_l2",
        TailNorm::Discrete2 => "rosenthal_discrete2",
    };
    Ok(CheckReport::exact(
        name,
        lhs,
        rhs,
        constant,
        constant * rhs - lhs,
    ))
}

fn rosenthal_rhs(ens: &Ensemble, x: &SpaceSpec, tail: TailNorm) -> Result<f64> {
    let profile = ens.disjoint_profile()?;
    let tail_mode = match tail {
        TailNorm::L1 => TailMode::Power(1.0),
        TailNorm::L2 => TailMode::Power(2.0),
        TailNorm::Discrete2 => TailMode::Discrete(2.0),
    };
    SpaceSpec::zx(x.clone(), tail_mode)?.norm(&profile)
}

/// Nudges a positive threshold down so that an atom cluster spread over a
/// few ulps around it lands on the same side of every comparison. The
/// inequalities under test hold for every positive threshold, so a
/// perturbed evaluation point is just as valid.
fn nudge_down(tau: f64) -> f64 {
    (tau - 1e-9 * tau.max(1.0)).max(tau * 0.5)
}

/// `P(|S| ≥ x) ≤ 8 P(|T| ≥ x/2)` for all `x > 0`, where `T` is the
/// transform of the pooled law. Requires a symmetric ensemble with total
/// support mass at most 1. The right side under-counts by at most the
/// transform deficit, which only makes the check stricter.
pub fn prohorov_check(
    ens: &Ensemble,
    grid: &[f64],
    cfg: &KruglovConfig,
    budget: usize,
) -> Result<CheckReport> {
    if !ens.flags().symmetric {
        return Err(Error::FlagMismatch(
            "this tail comparison requires a symmetric ensemble".into(),
        ));
    }
    let s = ens.exact_sum_law(budget)?.abs_law();
    let t = kruglov::transform(&ens.pooled_law()?, cfg)?.abs_law();
    let mut candidates: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.0).collect();
    candidates.extend(s.atoms().iter().map(|a| a.value).filter(|&v| v > 0.0));
    candidates.extend(t.atoms().iter().map(|a| 2.0 * a.value).filter(|&v| v > 0.0));
    let mut worst: Option<(f64, f64, f64)> = None;
    for &raw in &candidates {
        let x = nudge_down(raw);
        let left = s.survival_geq(x);
        let right = t.survival_geq(x / 2.0);
        let margin = 8.0 * right - left;
        if worst.map_or(true, |w| margin < w.0) {
            worst = Some((margin, left, right));
        }
    }
    let (margin, lhs, rhs) = worst.unwrap_or((8.0, 1.0, 1.0));
    Ok(CheckReport::exact("prohorov", lhs, rhs, 8.0, margin))
}

/// Two-sided comparison of the sup and the disjoint profile:
/// `½ λ{F* > τ} ≤ P(sup_k |f_k| > τ) ≤ λ{F* > τ}` for `τ ≥ 0`, given total
/// support mass at most 1. Both slacks fold into the margin.
pub fn sup_vs_disjoint_check(ens: &Ensemble) -> Result<CheckReport> {
    let flags = ens.flags();
    if flags.support_sum > 1.0 + 1e-12 {
        return Err(Error::FlagMismatch(format!(
            "this comparison requires total support mass at most 1, got {}",
            flags.support_sum
        )));
    }
    let mut candidates: Vec<f64> = vec![0.0];
    for d in &ens.laws {
        candidates.extend(d.atoms().iter().map(|a| a.value.abs()).filter(|&v| v > 0.0));
    }
    let mut worst: Option<(f64, f64, f64)> = None;
    for &tau in &candidates {
        let disjoint: f64 = {
            let mut acc = Kahan::new();
            for d in &ens.laws {
                acc.add(d.abs_law().survival_gt(tau));
            }
            acc.value()
        };
        let sup = {
            let mut keep = 1.0;
            for d in &ens.laws {
                keep *= 1.0 - d.abs_law().survival_gt(tau);
            }
            1.0 - keep
        };
        let margin = (sup - 0.5 * disjoint).min(disjoint - sup);
        if worst.map_or(true, |w| margin < w.0) {
            worst = Some((margin, sup, disjoint));
        }
    }
    let (margin, lhs, rhs) = worst.unwrap();
    Ok(CheckReport::exact("sup_vs_disjoint", lhs, rhs, 1.0, margin))
}

/// Reflection bound for symmetric partial sums:
/// `P(max_k |S_k| ≥ τ) ≤ 2 P(|S_n| ≥ τ)` for `τ > 0`, by exact path
/// enumeration.
pub fn levy_check(ens: &Ensemble, budget: usize) -> Result<CheckReport> {
    if !ens.flags().symmetric {
        return Err(Error::FlagMismatch(
            "the reflection bound requires a symmetric ensemble".into(),
        ));
    }
    let (sup_law, sum_law) = enumerate_paths(ens, budget)?;
    let abs_sum = sum_law.abs_law();
    let mut candidates: Vec<f64> = sup_law
        .atoms()
        .iter()
        .chain(abs_sum.atoms())
        .map(|a| a.value)
        .filter(|&v| v > 0.0)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst: Option<(f64, f64, f64)> = None;
    for &raw in &candidates {
        let tau = nudge_down(raw);
        let left = sup_law.survival_geq(tau);
        let right = abs_sum.survival_geq(tau);
        let margin = 2.0 * right - left;
        if worst.map_or(true, |w| margin < w.0) {
            worst = Some((margin, left, right));
        }
    }
    let (margin, lhs, rhs) = worst.unwrap_or((2.0, 1.0, 1.0));
    Ok(CheckReport::exact("levy", lhs, rhs, 2.0, margin))
}

/// Joint laws of `max_k |S_k|` and `S_n` by exact path enumeration.
fn enumerate_paths(ens: &Ensemble, budget: usize) -> Result<(DiscreteLaw, DiscreteLaw)> {
    let counts: Vec<usize> = ens.laws.iter().map(|d| d.atoms().len()).collect();
    let total: usize = counts.iter().try_fold(1_usize, |acc, &c| {
        acc.checked_mul(c).filter(|&t| t <= budget)
    }).ok_or(Error::Budget {
        needed: usize::MAX,
        budget,
    })?;
    let mut sup_pairs = Vec::with_capacity(total);
    let mut sum_pairs = Vec::with_capacity(total);
    let mut idx = vec![0_usize; ens.laws.len()];
    loop {
        let mut prob = 1.0;
        let mut partial = 0.0;
        let mut sup = 0.0_f64;
        for (k, d) in ens.laws.iter().enumerate() {
            let a = d.atoms()[idx[k]];
            prob *= a.mass;
            partial += a.value;
            sup = sup.max(partial.abs());
        }
        sup_pairs.push((sup, prob));
        sum_pairs.push((partial, prob));
        // Odometer increment over atom indices.
        let mut k = 0;
        loop {
            if k == idx.len() {
                let sup_law = DiscreteLaw::from_pairs(sup_pairs)?;
                let sum_law = DiscreteLaw::from_pairs(sum_pairs)?;
                return Ok((sup_law, sum_law));
            }
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Settings for the maximal-function checks.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaximalConfig {
    /// Constant multiplying the norm value in the sum bound.
    pub beta: f64,
    /// Constant multiplying the norm value in the sup upper bound.
    pub alpha: f64,
    /// Operator-norm value inserted into both upper bounds.
    pub knorm: f64,
    /// Monte-Carlo paths when exact enumeration exceeds the budget.
    pub trials: usize,
    pub seed: u64,
    /// Exact enumeration budget on the product of atom counts.
    pub exact_budget: usize,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self {
            beta: 2.0,
            alpha: 2.0,
            knorm: 0.0,
            trials: 100_000,
            seed: 1,
            exact_budget: DEFAULT_ATOM_BUDGET,
        }
    }
}

/// Number of contiguous stream batches used for Monte-Carlo confidence
/// halfwidths.
const MC_BATCHES: usize = 20;

/// Maximal-function checks for `S_n = Σ f_k` and `U_n = max_k |S_k|`:
///   1. `‖S_n‖_X ≤ β·knorm·(‖F*χ_[0,1]‖_X + ‖S_n‖_1)`
///   2. `(1/5)(‖F*χ_[0,1]‖_X + ‖U_n‖_1) ≤ ‖U_n‖_X ≤ α·knorm·(same)`,
///      with both slacks folded into the margin.
/// Note the bases differ: each side carries the first moment of its own
/// statistic. Runs exactly when the path product fits the budget,
/// otherwise by seeded Monte Carlo.
pub fn maximal_check(
    ens: &Ensemble,
    x: &SpaceSpec,
    mcfg: &MaximalConfig,
) -> Result<(CheckReport, CheckReport)> {
    if mcfg.knorm <= 0.0 {
        return Err(Error::InvalidParameter(
            "maximal checks need a positive norm value".into(),
        ));
    }
    let product: Option<usize> = ens.laws.iter().try_fold(1_usize, |acc, d| {
        acc.checked_mul(d.atoms().len())
            .filter(|&t| t <= mcfg.exact_budget)
    });
    let profile = ens.disjoint_profile()?;
    // Only the [0,1] head of the profile enters; the tail role is played
    // by the first moment of the statistic on each side.
    let head_norm = x.norm(&profile.truncate(0.0, 1.0)?)?;
    let (sup_law, sum_law, mode) = match product {
        Some(_) => {
            let (sup_law, sum_law) = enumerate_paths(ens, mcfg.exact_budget)?;
            (sup_law, sum_law, CheckMode::Exact)
        }
        None => {
            let mc = sample_paths(ens, mcfg.seed, mcfg.trials)?;
            let ci = batch_ci(&mc.batch_sum_norms(x)?);
            let mode = CheckMode::MonteCarlo {
                trials: mcfg.trials,
                seed: mcfg.seed,
                ci_halfwidth: ci,
            };
            (mc.sup_law, mc.sum_law, mode)
        }
    };
    let s_norm = x.norm_of_law(&sum_law)?;
    let u_norm = x.norm_of_law(&sup_law)?;
    let base_sum = head_norm + sum_law.abs_moment(1.0);
    let base_sup = head_norm + sup_law.abs_moment(1.0);
    let margin1 = mcfg.beta * mcfg.knorm * base_sum - s_norm;
    let r1 = CheckReport {
        name: "maximal_sum".into(),
        lhs: s_norm,
        rhs: base_sum,
        constant_used: mcfg.beta * mcfg.knorm,
        margin: margin1,
        pass: margin1 >= -PASS_TOL,
        mode,
    };
    let upper_slack = mcfg.alpha * mcfg.knorm * base_sup - u_norm;
    let lower_slack = u_norm - base_sup / 5.0;
    let r2 = CheckReport {
        name: "maximal_sup".into(),
        lhs: u_norm,
        rhs: base_sup,
        constant_used: mcfg.alpha * mcfg.knorm,
        margin: upper_slack.min(lower_slack),
        pass: upper_slack.min(lower_slack) >= -PASS_TOL,
        mode,
    };
    Ok((r1, r2))
}

/// Monte-Carlo path samples, kept per batch for confidence estimation.
struct PathSamples {
    sum_law: DiscreteLaw,
    sup_law: DiscreteLaw,
    /// `|S_n|` samples per contiguous stream batch.
    batch_abs_sums: Vec<Vec<f64>>,
}

impl PathSamples {
    fn batch_sum_norms(&self, x: &SpaceSpec) -> Result<Vec<f64>> {
        self.batch_abs_sums
            .iter()
            .map(|batch| {
                let w = 1.0 / batch.len() as f64;
                let law =
                    DiscreteLaw::from_pairs(batch.iter().map(|&v| (v, w)).collect())?;
                x.norm_of_law(&law)
            })
            .collect()
    }
}

/// Draws `trials` paths, one reproducible stream per trial.
fn sample_paths(ens: &Ensemble, seed: u64, trials: usize) -> Result<PathSamples> {
    if trials < MC_BATCHES * 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} trials",
            MC_BATCHES * 2
        )));
    }
    let w = 1.0 / trials as f64;
    let mut sum_pairs = Vec::with_capacity(trials);
    let mut sup_pairs = Vec::with_capacity(trials);
    let batch_size = trials.div_ceil(MC_BATCHES);
    let mut batch_abs_sums: Vec<Vec<f64>> = vec![Vec::new(); MC_BATCHES];
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut partial = 0.0;
        let mut sup = 0.0_f64;
        for d in &ens.laws {
            partial += d.draw(&mut rng);
            sup = sup.max(partial.abs());
        }
        sum_pairs.push((partial, w));
        sup_pairs.push((sup, w));
        batch_abs_sums[t / batch_size].push(partial.abs());
    }
    Ok(PathSamples {
        sum_law: DiscreteLaw::from_pairs(sum_pairs)?,
        sup_law: DiscreteLaw::from_pairs(sup_pairs)?,
        batch_abs_sums,
    })
}

/// `1.96 · sd / √B` over batch estimates.
fn batch_ci(batch_values: &[f64]) -> f64 {
    let b = batch_values.len() as f64;
    let mean = batch_values.iter().sum::<f64>() / b;
    let var = batch_values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (b - 1.0);
    1.96 * var.sqrt() / b.sqrt()
}

/// `‖(Σ_k |f_k|^q)^{1/q}‖_{L_p} ≤ α · rate^{1/q} · (‖F*χ_[0,1]‖_{L_p} +
/// (Σ_{k≥1} F*(k)^q)^{1/q})` with `rate = p/ln(p+1)`, by seeded Monte
/// Carlo on the left side.
pub fn lq_norm_check(
    ens: &Ensemble,
    q: f64,
    p: f64,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let lp = SpaceSpec::lp(p)?;
    if trials < MC_BATCHES * 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} trials",
            MC_BATCHES * 2
        )));
    }
    let w = 1.0 / trials as f64;
    let mut pairs = Vec::with_capacity(trials);
    let batch_size = trials.div_ceil(MC_BATCHES);
    let mut batches: Vec<Vec<f64>> = vec![Vec::new(); MC_BATCHES];
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut acc = 0.0;
        for d in &ens.laws {
            let v = d.draw(&mut rng).abs();
            if v > 0.0 {
                acc += v.powf(q);
            }
        }
        let val = acc.powf(1.0 / q);
        pairs.push((val, w));
        batches[t / batch_size].push(val);
    }
    let lhs = lp.norm_of_law(&DiscreteLaw::from_pairs(pairs)?)?;
    let profile = ens.disjoint_profile()?;
    let rhs = SpaceSpec::zx(lp.clone(), TailMode::Discrete(q))?.norm(&profile)?;
    let constant = alpha * crate::constants::reference_rate(p)?.powf(1.0 / q);
    let batch_norms: Result<Vec<f64>> = batches
        .iter()
        .map(|batch| {
            let bw = 1.0 / batch.len() as f64;
            lp.norm_of_law(&DiscreteLaw::from_pairs(
                batch.iter().map(|&v| (v, bw)).collect(),
            )?)
        })
        .collect();
    let margin = constant * rhs - lhs;
    Ok(CheckReport {
        name: "lq_norm".into(),
        lhs,
        rhs,
        constant_used: constant,
        margin,
        pass: margin >= -PASS_TOL,
        mode: CheckMode::MonteCarlo {
            trials,
            seed,
            ci_halfwidth: batch_ci(&batch_norms?),
        },
    })
}

/// Seeded random symmetric lattice ensemble: up to 6 laws on a shared
/// scale, total support mass in `[0.3, 1]`. Lattice values keep exact
/// convolutions small.
pub fn seeded_lattice_ensemble(seed: u64) -> Ensemble {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX); // keep clear of trial streams
    let n = rng.gen_range(1..=6);
    let scale: f64 = 0.05 + 1.95 * rng.gen::<f64>();
    let total: f64 = 0.3 + 0.7 * rng.gen::<f64>();
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + 0.9 * rng.gen::<f64>()).collect();
    let raw_sum: f64 = raw.iter().sum();
    let laws = raw
        .iter()
        .map(|r| {
            let mass = (r / raw_sum * total).min(1.0);
            let j = rng.gen_range(1..=4) as f64;
            DiscreteLaw::symmetric_pair(scale * j, mass).expect("valid lattice law")
        })
        .collect();
    Ensemble::new(laws, Some(format!("lattice_{seed}"))).expect("nonempty by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn law(pairs: &[(f64, f64)]) -> DiscreteLaw {
        DiscreteLaw::from_pairs(pairs.to_vec()).unwrap()
    }

    fn small_symmetric() -> Ensemble {
        Ensemble::new(
            vec![
                DiscreteLaw::symmetric_pair(0.5, 0.3).unwrap(),
                DiscreteLaw::symmetric_pair(1.0, 0.2).unwrap(),
                DiscreteLaw::symmetric_pair(0.25, 0.4).unwrap(),
            ],
            Some("small_symmetric".into()),
        )
        .unwrap()
    }

    #[test]
    fn flags_detect_structure() {
        let f = small_symmetric().flags();
        assert!(f.symmetric);
        assert!(f.mean_zero);
        assert_relative_eq!(f.support_sum, 0.9);
        let skew = Ensemble::new(vec![law(&[(0.0, 0.5), (1.0, 0.5)])], None).unwrap();
        let sf = skew.flags();
        assert!(!sf.symmetric);
        assert!(!sf.mean_zero);
    }

    #[test]
    fn exact_sum_law_budget() {
        let ens = small_symmetric();
        let s = ens.exact_sum_law(DEFAULT_ATOM_BUDGET).unwrap();
        assert_abs_diff_eq!(s.mean(), 0.0, epsilon = 1e-12);
        assert!(ens.exact_sum_law(2).is_err());
    }

    #[test]
    fn disjoint_profile_concatenates_quantiles() {
        let ens = Ensemble::new(
            vec![
                law(&[(0.0, 0.5), (2.0, 0.5)]),
                law(&[(0.0, 0.7), (1.0, 0.3)]),
            ],
            None,
        )
        .unwrap();
        let f = ens.disjoint_profile().unwrap();
        assert_eq!(f.to_pairs(), vec![(0.5, 2.0), (0.3, 1.0)]);
    }

    #[test]
    fn pooled_law_matches_disjoint_profile() {
        let ens = small_symmetric();
        let pooled = ens.pooled_law().unwrap();
        assert_eq!(
            pooled.quantile_step().to_pairs(),
            ens.disjoint_profile().unwrap().to_pairs()
        );
        // Pooled convolution of characteristic increments: transform of the
        // pooled law has the same characteristic function as the product of
        // per-law transforms.
        let cfg = KruglovConfig::default();
        let t_pooled = kruglov::transform(&pooled, &cfg).unwrap();
        let mut t_product = DiscreteLaw::delta(0.0);
        for d in &ens.laws {
            let shifted = kruglov::transform(
                &ens_single_pool(d),
                &cfg,
            )
            .unwrap();
            t_product = t_product.convolve(&shifted);
        }
        for t in [0.5, 1.5, -2.5] {
            let a = t_pooled.charfn(t);
            let b = t_product.charfn(t);
            assert!((a - b).norm() < 1e-9, "mismatch at {t}");
        }
    }

    fn ens_single_pool(d: &DiscreteLaw) -> DiscreteLaw {
        // A single law pooled alone: nonzero atoms plus mass at 0.
        let mut pairs: Vec<(f64, f64)> = d
            .atoms()
            .iter()
            .filter(|a| a.value != 0.0)
            .map(|a| (a.value, a.mass))
            .collect();
        pairs.push((0.0, 1.0 - d.prob_nonzero()));
        DiscreteLaw::from_pairs(pairs).unwrap()
    }

    #[test]
    fn sup_vs_disjoint_passes_on_small_ensembles() {
        for ens in [
            small_symmetric(),
            Ensemble::new(vec![law(&[(0.0, 0.5), (1.0, 0.5)])], None).unwrap(),
        ] {
            let r = sup_vs_disjoint_check(&ens).unwrap();
            assert!(r.pass, "margin {}", r.margin);
        }
        let too_wide = Ensemble::new(
            vec![
                law(&[(-1.0, 0.5), (1.0, 0.5)]),
                law(&[(-1.0, 0.5), (1.0, 0.5)]),
            ],
            None,
        )
        .unwrap();
        assert!(sup_vs_disjoint_check(&too_wide).is_err());
    }

    #[test]
    fn prohorov_holds_on_symmetric_ensembles() {
        let r = prohorov_check(
            &small_symmetric(),
            &[0.25, 0.5, 1.0, 2.0],
            &KruglovConfig::default(),
            DEFAULT_ATOM_BUDGET,
        )
        .unwrap();
        assert!(r.pass, "margin {}", r.margin);
        let skew = Ensemble::new(vec![law(&[(0.0, 0.5), (1.0, 0.5)])], None).unwrap();
        assert!(prohorov_check(&skew, &[], &KruglovConfig::default(), 1000).is_err());
    }

    #[test]
    fn levy_reflection_exact() {
        let ens = Ensemble::new(
            vec![
                DiscreteLaw::symmetric_pair(1.0, 1.0).unwrap(),
                DiscreteLaw::symmetric_pair(1.0, 1.0).unwrap(),
            ],
            None,
        )
        .unwrap();
        let r = levy_check(&ens, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(r.pass);
        // Two fair signs make the bound tight: P(U ≥ 1) = 1 = 2P(|S| ≥ 1).
        assert_abs_diff_eq!(r.margin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rosenthal_l1_on_indicators() {
        let ens = Ensemble::new(
            vec![DiscreteLaw::indicator_law(0.2).unwrap(); 4],
            Some("indicators".into()),
        )
        .unwrap();
        let x = SpaceSpec::lp(2.0).unwrap();
        let r = rosenthal_check(&ens, &x, TailNorm::L1, 2.6, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(r.pass, "margin {}", r.margin);
        // The quadratic tail requires zero mean.
        assert!(rosenthal_check(&ens, &x, TailNorm::L2, 2.6, DEFAULT_ATOM_BUDGET).is_err());
        let r_fail =
            rosenthal_check(&ens, &x, TailNorm::L1, 0.01, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(!r_fail.pass);
    }

    #[test]
    fn maximal_exact_small_ensemble() {
        let ens = small_symmetric();
        let x = SpaceSpec::lp(2.0).unwrap();
        let mcfg = MaximalConfig {
            knorm: crate::constants::upper_bound_lp(2.0).unwrap().value,
            ..MaximalConfig::default()
        };
        let (r1, r2) = maximal_check(&ens, &x, &mcfg).unwrap();
        assert!(matches!(r1.mode, CheckMode::Exact));
        assert!(r1.pass, "sum margin {}", r1.margin);
        assert!(r2.pass, "sup margin {}", r2.margin);
        // U dominates |S| pointwise.
        assert!(r2.lhs >= r1.lhs - 1e-12);
    }

    #[test]
    fn maximal_monte_carlo_is_reproducible() {
        let laws = vec![DiscreteLaw::symmetric_pair(1.0, 0.125).unwrap(); 8];
        let ens = Ensemble::new(laws, None).unwrap();
        let x = SpaceSpec::lp(2.0).unwrap();
        let mcfg = MaximalConfig {
            knorm: crate::constants::upper_bound_lp(2.0).unwrap().value,
            trials: 2000,
            exact_budget: 100, // force Monte Carlo
            ..MaximalConfig::default()
        };
        let (a1, a2) = maximal_check(&ens, &x, &mcfg).unwrap();
        let (b1, b2) = maximal_check(&ens, &x, &mcfg).unwrap();
        assert_eq!(a1.lhs, b1.lhs);
        assert_eq!(a2.lhs, b2.lhs);
        assert!(matches!(a1.mode, CheckMode::MonteCarlo { .. }));
        if let CheckMode::MonteCarlo { ci_halfwidth, .. } = a1.mode {
            assert!(ci_halfwidth > 0.0 && ci_halfwidth < 0.5);
        }
    }

    #[test]
    fn centering_modes() {
        let d = law(&[(0.0, 0.5), (1.0, 0.3), (2.0, 0.2)]);
        let ens = Ensemble::new(vec![d], None).unwrap();
        let global = ens.centering(CenteringMode::Global).unwrap();
        assert_abs_diff_eq!(global.laws[0].mean(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(global.laws[0].prob_nonzero(), 1.0);
        let support = ens.centering(CenteringMode::Support).unwrap();
        assert_abs_diff_eq!(support.laws[0].mean(), 0.0, epsilon = 1e-15);
        // Support centering keeps the zeros: only the support moved.
        assert_relative_eq!(support.laws[0].mass_at(0.0), 0.5);
        // Indicator support-centering degenerates to the point mass at 0.
        let ind = Ensemble::new(vec![DiscreteLaw::indicator_law(0.5).unwrap()], None).unwrap();
        let c = ind.centering(CenteringMode::Support).unwrap();
        assert_relative_eq!(c.laws[0].mass_at(0.0), 1.0);
    }

    #[test]
    fn lq_norm_check_runs() {
        let ens = small_symmetric();
        let r = lq_norm_check(&ens, 1.0, 4.0, 2.0, 2000, 3).unwrap();
        assert!(r.pass, "margin {}", r.margin);
        assert!(matches!(r.mode, CheckMode::MonteCarlo { .. }));
    }

    #[test]
    fn lattice_ensembles_are_reproducible_and_well_formed() {
        for seed in 0..50 {
            let a = seeded_lattice_ensemble(seed);
            let b = seeded_lattice_ensemble(seed);
            assert_eq!(a.laws.len(), b.laws.len());
            let flags = a.flags();
            assert!(flags.symmetric);
            assert!(flags.support_sum <= 1.0 + 1e-12);
            assert!(!a.laws.is_empty() && a.laws.len() <= 6);
        }
    }

    #[test]
    fn serde_round_trip() {
        let ens = small_symmetric();
        let json = serde_json::to_string(&ens).unwrap();
        let back: Ensemble = serde_json::from_str(&json).unwrap();
        assert_eq!(back.laws.len(), ens.laws.len());
        assert_eq!(back.name.as_deref(), Some("small_symmetric"));
    }
}
