//! Finite discrete laws on the real line with an explicit mass deficit.
//!
//! Atoms are sorted with strictly increasing values; values closer than
//! `MERGE_REL_TOL` (relative) are merged on construction. `deficit` records
//! probability mass dropped by a truncation. It is carried along and never
//! renormalized away; whenever a distributional quantity needs the full unit
//! mass (CDF, quantile, moments, characteristic function) the deficit is
//! treated as mass sitting at 0, which under-reports tails and so keeps
//! truncated quantities on the conservative side.

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use crate::stepfn::StepFunction;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative tolerance under which two atom values are considered equal.
pub const MERGE_REL_TOL: f64 = 1e-12;

/// Absolute threshold under which a merged value snaps to exactly 0.
const ZERO_SNAP: f64 = 1e-12;

/// Mass below which convolution atoms are dropped into the deficit.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-15;

/// Slack allowed on "masses plus deficit sum to 1".
const MASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<Atom>,
    deficit: f64,
}

impl DiscreteLaw {
    /// Builds a law from `(value, mass)` pairs with zero deficit.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_pairs_deficit(pairs, 0.0)
    }

    /// Builds a law from `(value, mass)` pairs plus an explicit deficit.
    /// Pairs may arrive in any order; equal values are combined.
    pub fn from_pairs_deficit(pairs: Vec<(f64, f64)>, deficit: f64) -> Result<Self> {
        if !(0.0..1.0 + MASS_TOL).contains(&deficit) {
            return Err(Error::InvalidLaw(format!(
                "deficit must lie in [0, 1], got {deficit}"
            )));
        }
        for &(value, mass) in &pairs {
            if !value.is_finite() {
                return Err(Error::InvalidLaw(format!("non-finite atom value {value}")));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidLaw(format!(
                    "atom mass must be nonnegative and finite, got {mass}"
                )));
            }
        }
        let atoms = merge_pairs(pairs);
        let total: f64 = {
            let mut acc = Kahan::new();
            for a in &atoms {
                acc.add(a.mass);
            }
            acc.add(deficit);
            acc.value()
        };
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidLaw(format!(
                "masses plus deficit must sum to 1, got {total}"
            )));
        }
        Ok(Self { atoms, deficit })
    }

    /// Point mass at `v`.
    pub fn delta(v: f64) -> Self {
        Self {
            atoms: vec![Atom { value: v, mass: 1.0 }],
            deficit: 0.0,
        }
    }

    /// Law of `χ_[0,u]` under Lebesgue measure on `[0,1]`: value 1 with
    /// probability `u`, value 0 otherwise.
    pub fn indicator_law(u: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!(
                "indicator probability must lie in [0,1], got {u}"
            )));
        }
        Self::from_pairs(vec![(0.0, 1.0 - u), (1.0, u)])
    }

    /// Symmetric law taking `±v` with probability `m/2` each.
    pub fn symmetric_pair(v: f64, m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidParameter(format!(
                "total mass must lie in [0,1], got {m}"
            )));
        }
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "atom value must be positive, got {v}"
            )));
        }
        Self::from_pairs(vec![(-v, m / 2.0), (0.0, 1.0 - m), (v, m / 2.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Mass of the atom at exactly `v`, 0 when absent.
    pub fn mass_at(&self, v: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.value == v)
            .map_or(0.0, |a| a.mass)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.atoms.iter().map(|a| a.value.abs()).fold(0.0, f64::max)
    }

    /// `P(X ≠ 0)`, the support mass. Deficit counts as mass at 0.
    pub fn prob_nonzero(&self) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            if a.value != 0.0 {
                acc.add(a.mass);
            }
        }
        acc.value()
    }

    pub fn mean(&self) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            acc.add(a.value * a.mass);
        }
        acc.value()
    }

    /// `E |X|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            if a.value != 0.0 {
                acc.add(a.value.abs().powf(p) * a.mass);
            }
        }
        acc.value()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut acc = Kahan::new();
        for a in &self.atoms {
            acc.add((a.value - m) * (a.value - m) * a.mass);
        }
        // Deficit mass sits at 0 and contributes (0 - m)^2.
        acc.add(self.deficit * m * m);
        acc.value()
    }

    /// Law of `|X|`.
    pub fn abs_law(&self) -> Self {
        let pairs = self
            .atoms
            .iter()
            .map(|a| (a.value.abs(), a.mass))
            .collect();
        Self {
            atoms: merge_pairs(pairs),
            deficit: self.deficit,
        }
    }

    /// Convolution (law of the sum of independent draws) with the default
    /// pruning threshold.
    pub fn convolve(&self, other: &Self) -> Self {
        self.convolve_with(other, DEFAULT_PRUNE_TOL)
    }

    /// Convolution, dropping product atoms with mass below `prune_tol` into
    /// the deficit. Deficits compose multiplicatively:
    /// kept mass `(1-d1)(1-d2)`.
    pub fn convolve_with(&self, other: &Self, prune_tol: f64) -> Self {
        let mut pairs = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                pairs.push((a.value + b.value, a.mass * b.mass));
            }
        }
        let mut atoms = merge_pairs(pairs);
        let mut pruned = Kahan::new();
        if prune_tol > 0.0 {
            atoms.retain(|a| {
                if a.mass < prune_tol {
                    pruned.add(a.mass);
                    false
                } else {
                    true
                }
            });
        }
        let deficit =
            (1.0 - (1.0 - self.deficit) * (1.0 - other.deficit) + pruned.value()).clamp(0.0, 1.0);
        Self { atoms, deficit }
    }

    /// `n`-fold convolution power by binary squaring. `n = 0` is the point
    /// mass at 0.
    pub fn convolve_power(&self, n: u64, prune_tol: f64) -> Self {
        let mut result = Self::delta(0.0);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.convolve_with(&base, prune_tol);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve_with(&base, prune_tol);
            }
        }
        result
    }

    /// Mixture `Σ w_j d_j`. Weights must be nonnegative with sum at most 1;
    /// any missing weight becomes deficit, as does weighted input deficit.
    pub fn mixture(parts: &[(f64, &DiscreteLaw)]) -> Result<Self> {
        let mut wsum = Kahan::new();
        for &(w, _) in parts {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "mixture weight must be nonnegative, got {w}"
                )));
            }
            wsum.add(w);
        }
        if wsum.value() > 1.0 + MASS_TOL {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must sum to at most 1, got {}",
                wsum.value()
            )));
        }
        let mut pairs = Vec::new();
        let mut kept = Kahan::new();
        for &(w, d) in parts {
            if w == 0.0 {
                continue;
            }
            for a in &d.atoms {
                pairs.push((a.value, w * a.mass));
            }
            kept.add(w * (1.0 - d.deficit));
        }
        let deficit = (1.0 - kept.value()).clamp(0.0, 1.0);
        let atoms = merge_pairs(pairs);
        Ok(Self { atoms, deficit })
    }

    /// Moves the deficit onto the largest atom value. Turns the default
    /// "deficit at 0" reading into one that over-reports tails, giving a
    /// certified upper variant for norms of truncated laws.
    pub fn deficit_to_max(&self) -> Self {
        if self.deficit == 0.0 || self.atoms.is_empty() {
            return self.clone();
        }
        let mut atoms = self.atoms.clone();
        atoms.last_mut().unwrap().mass += self.deficit;
        Self {
            atoms,
            deficit: 0.0,
        }
    }

    /// Decreasing rearrangement of `|X|` as a step function on `[0,1]`:
    /// plateau lengths are masses, ordered by decreasing `|value|`. The mass
    /// at 0 and the deficit both land in the trailing zero region.
    pub fn quantile_step(&self) -> StepFunction {
        let abs = self.abs_law();
        let mut pairs: Vec<(f64, f64)> = abs
            .atoms
            .iter()
            .filter(|a| a.value > 0.0)
            .map(|a| (a.mass, a.value))
            .collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        StepFunction::new(pairs).expect("masses and values are valid segments")
    }

    /// Law of a nonnegative step function supported in `[0,1]` under
    /// Lebesgue measure: atom at each value with mass its level-set measure,
    /// remaining mass at 0.
    pub fn from_step(f: &StepFunction) -> Result<Self> {
        let support = f.total_length();
        if support > 1.0 + crate::stepfn::SUPPORT_TOL {
            return Err(Error::InvalidStep(
                "law of a step function requires support in [0,1]".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = f
            .segments()
            .iter()
            .filter(|s| s.value > 0.0)
            .map(|s| (s.value, s.len))
            .collect();
        let zero_mass = (1.0 - pairs.iter().map(|p| p.1).sum::<f64>()).max(0.0);
        pairs.push((0.0, zero_mass));
        Self::from_pairs(pairs)
    }

    /// Characteristic function `E e^{itX}`, with the deficit read as mass
    /// at 0 (adding `deficit · 1`).
    pub fn charfn(&self, t: f64) -> Complex64 {
        let mut re = Kahan::new();
        let mut im = Kahan::new();
        for a in &self.atoms {
            let (s, c) = (t * a.value).sin_cos();
            re.add(a.mass * c);
            im.add(a.mass * s);
        }
        re.add(self.deficit);
        Complex64::new(re.value(), im.value())
    }

    /// `P(X ≤ x)`, deficit counted at 0.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            if a.value <= x {
                acc.add(a.mass);
            }
        }
        if x >= 0.0 {
            acc.add(self.deficit);
        }
        acc.value()
    }

    /// `P(X ≥ x)`, deficit counted at 0.
    pub fn survival_geq(&self, x: f64) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            if a.value >= x {
                acc.add(a.mass);
            }
        }
        if x <= 0.0 {
            acc.add(self.deficit);
        }
        acc.value()
    }

    /// `P(X > x)`, deficit counted at 0.
    pub fn survival_gt(&self, x: f64) -> f64 {
        let mut acc = Kahan::new();
        for a in &self.atoms {
            if a.value > x {
                acc.add(a.mass);
            }
        }
        if x < 0.0 {
            acc.add(self.deficit);
        }
        acc.value()
    }

    /// Kolmogorov (sup-CDF) distance. The sup over the line is attained at
    /// an atom of either law, or at 0 where a deficit sits.
    pub fn kolmogorov_distance(a: &Self, b: &Self) -> f64 {
        let mut candidates: Vec<f64> = a
            .atoms
            .iter()
            .chain(b.atoms.iter())
            .map(|at| at.value)
            .collect();
        candidates.push(0.0);
        let mut worst = 0.0_f64;
        for &x in &candidates {
            worst = worst.max((a.cdf(x) - b.cdf(x)).abs());
        }
        worst
    }

    /// `n` independent draws from the reproducible stream `(seed, stream)`.
    /// Rejects laws with non-negligible deficit: there is nothing to draw
    /// for the missing mass.
    pub fn sample(&self, seed: u64, stream: u64, n: usize) -> Result<Vec<f64>> {
        if self.deficit > MASS_TOL {
            return Err(Error::InvalidLaw(format!(
                "cannot sample a law with deficit {}",
                self.deficit
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.draw(&mut rng));
        }
        Ok(out)
    }

    /// One draw by inverse CDF.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass;
            if u < acc {
                return a.value;
            }
        }
        // Rounding residue at the top of the CDF.
        self.atoms.last().map_or(0.0, |a| a.value)
    }
}

/// Sorts pairs by value and merges values within `MERGE_REL_TOL` (relative,
/// with an absolute floor of 1). The merged value is the mass-weighted mean,
/// snapped to exactly 0 when below `ZERO_SNAP`; zero-mass pairs are dropped.
fn merge_pairs(mut pairs: Vec<(f64, f64)>) -> Vec<Atom> {
    pairs.retain(|p| p.1 > 0.0);
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<Atom> = Vec::with_capacity(pairs.len());
    for (value, mass) in pairs {
        match out.last_mut() {
            Some(last)
                if (value - last.value).abs()
                    <= MERGE_REL_TOL * last.value.abs().max(value.abs()).max(1.0) =>
            {
                let total = last.mass + mass;
                // Bitwise-equal values stay put: the weighted mean would
                // re-round them and shift lattice atoms by an ulp.
                let mut merged = if value == last.value {
                    value
                } else {
                    (last.value * last.mass + value * mass) / total
                };
                if merged.abs() < ZERO_SNAP {
                    merged = 0.0;
                }
                last.value = merged;
                last.mass = total;
            }
            _ => out.push(Atom { value, mass }),
        }
    }
    out
}

impl Serialize for DiscreteLaw {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DiscreteLaw", 2)?;
        let pairs: Vec<[f64; 2]> = self.atoms.iter().map(|a| [a.value, a.mass]).collect();
        st.serialize_field("atoms", &pairs)?;
        st.serialize_field("deficit", &self.deficit)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DiscreteLaw {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LawVisitor;
        impl<'de> Visitor<'de> for LawVisitor {
            type Value = DiscreteLaw;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map with atoms and optional deficit")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut atoms: Option<Vec<[f64; 2]>> = None;
                let mut deficit = 0.0_f64;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "atoms" => atoms = Some(map.next_value()?),
                        "deficit" => deficit = map.next_value()?,
                        other => {
                            return Err(serde::de::Error::unknown_field(
                                other,
                                &["atoms", "deficit"],
                            ))
                        }
                    }
                }
                let atoms = atoms.ok_or_else(|| serde::de::Error::missing_field("atoms"))?;
                DiscreteLaw::from_pairs_deficit(
                    atoms.into_iter().map(|[v, m]| (v, m)).collect(),
                    deficit,
                )
                .map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_map(LawVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn law(pairs: &[(f64, f64)]) -> DiscreteLaw {
        DiscreteLaw::from_pairs(pairs.to_vec()).unwrap()
    }

    #[test]
    fn construction_sorts_merges_and_validates() {
        let d = law(&[(1.0, 0.25), (-1.0, 0.25), (0.0, 0.5)]);
        let values: Vec<f64> = d.atoms().iter().map(|a| a.value).collect();
        assert_eq!(values, vec![-1.0, 0.0, 1.0]);
        assert!(DiscreteLaw::from_pairs(vec![(0.0, 0.5)]).is_err());
        assert!(DiscreteLaw::from_pairs(vec![(0.0, 1.2)]).is_err());
        let merged = law(&[(1.0, 0.5), (1.0 + 1e-15, 0.25), (0.0, 0.25)]);
        assert_eq!(merged.atoms().len(), 2);
    }

    #[test]
    fn convolve_fair_coins() {
        let coin = law(&[(0.0, 0.5), (1.0, 0.5)]);
        let two = coin.convolve(&coin);
        assert_eq!(two.atoms().len(), 3);
        assert_abs_diff_eq!(two.mass_at(0.0), 0.25);
        assert_abs_diff_eq!(two.mass_at(1.0), 0.5);
        assert_abs_diff_eq!(two.mass_at(2.0), 0.25);
        assert_eq!(two.deficit(), 0.0);

        let pm = law(&[(-1.0, 0.5), (1.0, 0.5)]);
        let sq = pm.convolve(&pm);
        assert_abs_diff_eq!(sq.mass_at(0.0), 0.5);
        assert_abs_diff_eq!(sq.mass_at(-2.0), 0.25);
    }

    #[test]
    fn convolve_power_matches_iterated() {
        let d = law(&[(0.0, 0.4), (0.5, 0.4), (2.0, 0.2)]);
        let direct = d.convolve(&d).convolve(&d);
        let power = d.convolve_power(3, DEFAULT_PRUNE_TOL);
        assert_eq!(direct.atoms().len(), power.atoms().len());
        for (a, b) in direct.atoms().iter().zip(power.atoms()) {
            assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
            assert_relative_eq!(a.mass, b.mass, max_relative = 1e-12);
        }
        assert_eq!(
            d.convolve_power(0, 0.0).atoms(),
            DiscreteLaw::delta(0.0).atoms()
        );
    }

    #[test]
    fn mixture_tracks_missing_weight_as_deficit() {
        let d0 = DiscreteLaw::delta(0.0);
        let w = 1.0 / std::f64::consts::E;
        let m = DiscreteLaw::mixture(&[(w, &d0)]).unwrap();
        assert_relative_eq!(m.deficit(), 1.0 - w, max_relative = 1e-14);
        assert!(DiscreteLaw::mixture(&[(1.5, &d0)]).is_err());
    }

    #[test]
    fn pruning_moves_mass_into_deficit() {
        let d = law(&[(0.0, 0.5), (1.0, 0.5)]);
        let tiny = law(&[(0.0, 1.0 - 1e-16), (5.0, 1e-16)]);
        let c = d.convolve_with(&tiny, 1e-12);
        assert!(c.deficit() > 0.0 && c.deficit() < 1e-12);
        assert_eq!(c.atoms().len(), 2);
    }

    #[test]
    fn quantile_step_orders_absolute_values() {
        let d = law(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]);
        assert_eq!(d.quantile_step().to_pairs(), vec![(0.5, 1.0)]);
        let e = law(&[(0.0, 0.5), (1.0, 0.3), (2.0, 0.2)]);
        assert_eq!(
            e.quantile_step().to_pairs(),
            vec![(0.2, 2.0), (0.3, 1.0)]
        );
    }

    #[test]
    fn step_law_round_trip() {
        let e = law(&[(0.0, 0.5), (1.0, 0.3), (2.0, 0.2)]);
        let back = DiscreteLaw::from_step(&e.quantile_step()).unwrap();
        assert_eq!(back.atoms().len(), e.atoms().len());
        for (a, b) in back.atoms().iter().zip(e.atoms()) {
            assert_relative_eq!(a.value, b.value, max_relative = 1e-14);
            assert_relative_eq!(a.mass, b.mass, max_relative = 1e-14);
        }
    }

    #[test]
    fn charfn_of_point_mass_is_a_phase() {
        let d = DiscreteLaw::delta(1.0);
        let z = d.charfn(0.7);
        assert_relative_eq!(z.re, 0.7_f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(z.im, 0.7_f64.sin(), max_relative = 1e-15);
        assert_relative_eq!(d.charfn(0.0).re, 1.0);
    }

    #[test]
    fn kolmogorov_distance_on_known_pairs() {
        let d0 = DiscreteLaw::delta(0.0);
        let d1 = DiscreteLaw::delta(1.0);
        let coin = law(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(DiscreteLaw::kolmogorov_distance(&d0, &d1), 1.0);
        assert_eq!(DiscreteLaw::kolmogorov_distance(&coin, &d0), 0.5);
        assert_eq!(DiscreteLaw::kolmogorov_distance(&coin, &coin), 0.0);
    }

    #[test]
    fn moments_and_flags() {
        let d = law(&[(-1.0, 0.6), (1.5, 0.4)]);
        assert_abs_diff_eq!(d.mean(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(d.abs_moment(2.0), 0.6 + 2.25 * 0.4);
        assert_relative_eq!(d.prob_nonzero(), 1.0);
        let e = law(&[(0.0, 0.5), (2.0, 0.5)]);
        assert_relative_eq!(e.prob_nonzero(), 0.5);
    }

    #[test]
    fn sampling_is_reproducible_and_unbiased() {
        let d = law(&[(0.0, 0.25), (1.0, 0.5), (3.0, 0.25)]);
        let a = d.sample(7, 0, 1000).unwrap();
        let b = d.sample(7, 0, 1000).unwrap();
        assert_eq!(a, b);
        let c = d.sample(7, 1, 1000).unwrap();
        assert_ne!(a, c);
        let big = d.sample(11, 0, 200_000).unwrap();
        let mean = big.iter().sum::<f64>() / big.len() as f64;
        assert_abs_diff_eq!(mean, d.mean(), epsilon = 0.02);
    }

    #[test]
    fn serde_round_trip_and_default_deficit() {
        let d = law(&[(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            "{\"atoms\":[[-1.0,0.25],[0.0,0.5],[1.0,0.25]],\"deficit\":0.0}"
        );
        let back: DiscreteLaw = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let lenient: DiscreteLaw =
            serde_json::from_str("{\"atoms\":[[0.0,0.5],[1.0,0.5]]}").unwrap();
        assert_eq!(lenient.deficit(), 0.0);
    }

    #[test]
    fn deficit_to_max_moves_mass_upward() {
        let d = DiscreteLaw::from_pairs_deficit(vec![(0.0, 0.6), (2.0, 0.3)], 0.1).unwrap();
        let up = d.deficit_to_max();
        assert_eq!(up.deficit(), 0.0);
        assert_relative_eq!(up.mass_at(2.0), 0.4);
        assert_relative_eq!(d.survival_geq(1.0), 0.3);
        assert_relative_eq!(up.survival_geq(1.0), 0.4);
    }
}
