//! Exact-rational mirror of the law and step-function calculus.
//!
//! This is the independent oracle used by tests to pin down the float path:
//! small instances only, every operation exact. Laws here carry no deficit;
//! masses must sum to exactly 1.

use crate::dist::DiscreteLaw;
use crate::error::{Error, Result};
use crate::stepfn::StepFunction;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Convenience constructor for `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Finite law with exact rational values and masses, atoms sorted with
/// strictly increasing values, masses summing to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactLaw {
    atoms: Vec<(BigRational, BigRational)>,
}

impl ExactLaw {
    pub fn from_pairs(pairs: Vec<(BigRational, BigRational)>) -> Result<Self> {
        let mut pairs: Vec<(BigRational, BigRational)> = pairs
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .collect();
        for (_, m) in &pairs {
            if m.is_negative() {
                return Err(Error::InvalidLaw("negative exact mass".into()));
            }
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut atoms: Vec<(BigRational, BigRational)> = Vec::with_capacity(pairs.len());
        for (v, m) in pairs {
            match atoms.last_mut() {
                Some(last) if last.0 == v => last.1 += m,
                _ => atoms.push((v, m)),
            }
        }
        let total: BigRational = atoms.iter().map(|(_, m)| m.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidLaw(format!(
                "exact masses must sum to 1, got {total}"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn delta(v: BigRational) -> Self {
        Self {
            atoms: vec![(v, BigRational::one())],
        }
    }

    pub fn atoms(&self) -> &[(BigRational, BigRational)] {
        &self.atoms
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut pairs = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for (va, ma) in &self.atoms {
            for (vb, mb) in &other.atoms {
                pairs.push((va + vb, ma * mb));
            }
        }
        Self::from_pairs(pairs).expect("convolution of exact laws is an exact law")
    }

    pub fn convolve_power(&self, n: u64) -> Self {
        let mut result = Self::delta(BigRational::zero());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.convolve(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        result
    }

    /// Mixture with exact weights summing to exactly 1.
    pub fn mixture(parts: &[(BigRational, &ExactLaw)]) -> Result<Self> {
        let total: BigRational = parts.iter().map(|(w, _)| w.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(
                "exact mixture weights must sum to 1".into(),
            ));
        }
        let mut pairs = Vec::new();
        for (w, d) in parts {
            if w.is_negative() {
                return Err(Error::InvalidParameter("negative mixture weight".into()));
            }
            for (v, m) in &d.atoms {
                pairs.push((v.clone(), w * m));
            }
        }
        Self::from_pairs(pairs)
    }

    /// Law of `Binomial(n, u/n)`: the sum of `n` coins that keep a unit atom
    /// with probability `u/n` each.
    pub fn binomial(n: u32, u: BigRational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("binomial needs n >= 1".into()));
        }
        let q = u / BigRational::from(BigInt::from(n));
        if q.is_negative() || q > BigRational::one() {
            return Err(Error::InvalidParameter(
                "binomial success probability must lie in [0,1]".into(),
            ));
        }
        let coin = Self::from_pairs(vec![
            (BigRational::zero(), BigRational::one() - q.clone()),
            (BigRational::one(), q),
        ])?;
        Ok(coin.convolve_power(n as u64))
    }

    /// Upper tails of `Binomial(n, u/n)`: entry `k-1` is `P(X >= k)` for
    /// `k = 1..=n`.
    pub fn binomial_tails(n: u32, u: BigRational) -> Result<Vec<BigRational>> {
        let law = Self::binomial(n, u)?;
        let mut tails = Vec::with_capacity(n as usize);
        for k in 1..=n {
            let kr = BigRational::from(BigInt::from(k));
            let t: BigRational = law
                .atoms
                .iter()
                .filter(|(v, _)| *v >= kr)
                .map(|(_, m)| m.clone())
                .sum();
            tails.push(t);
        }
        Ok(tails)
    }

    /// Decreasing rearrangement of `|X|` with exact plateau lengths.
    pub fn quantile_step(&self) -> ExactStep {
        let mut pairs: Vec<(BigRational, BigRational)> = Vec::new();
        for (v, m) in &self.atoms {
            let av = v.abs();
            if av.is_zero() {
                continue;
            }
            pairs.push((av, m.clone()));
        }
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        let mut segs: Vec<(BigRational, BigRational)> = Vec::new();
        for (value, mass) in pairs {
            match segs.last_mut() {
                Some(last) if last.1 == value => last.0 += mass,
                _ => segs.push((mass, value)),
            }
        }
        ExactStep { segs }
    }

    pub fn to_float(&self) -> Result<DiscreteLaw> {
        DiscreteLaw::from_pairs(
            self.atoms
                .iter()
                .map(|(v, m)| {
                    (
                        v.to_f64().expect("rational fits in f64"),
                        m.to_f64().expect("rational fits in f64"),
                    )
                })
                .collect(),
        )
    }
}

/// Step function with exact rational segment lengths and values, decreasing
/// or not depending on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactStep {
    /// `(length, value)` pairs laid out from 0.
    segs: Vec<(BigRational, BigRational)>,
}

impl ExactStep {
    pub fn from_pairs(segs: Vec<(BigRational, BigRational)>) -> Self {
        Self {
            segs: segs.into_iter().filter(|(l, _)| !l.is_zero()).collect(),
        }
    }

    pub fn pairs(&self) -> &[(BigRational, BigRational)] {
        &self.segs
    }

    /// `Σ value^p · length` for integer `p`: the `p`-th power of the `L_p`
    /// norm, exactly.
    pub fn lp_pow(&self, p: u32) -> BigRational {
        let mut acc = BigRational::zero();
        for (len, value) in &self.segs {
            let mut vp = BigRational::one();
            for _ in 0..p {
                vp *= value;
            }
            acc += vp * len;
        }
        acc
    }

    pub fn to_float(&self) -> Result<StepFunction> {
        StepFunction::new(
            self.segs
                .iter()
                .map(|(l, v)| {
                    (
                        l.to_f64().expect("rational fits in f64"),
                        v.to_f64().expect("rational fits in f64"),
                    )
                })
                .collect(),
        )
    }
}

/// Extremal profile of the binomial family: value `k` on
/// `[τ_{k+1}, τ_k)` where `τ` are the upper tails of `Binomial(n, u/n)`.
pub fn extremal_profile(n: u32, u: BigRational) -> Result<ExactStep> {
    let tails = ExactLaw::binomial_tails(n, u)?;
    let mut segs = Vec::with_capacity(n as usize);
    let mut upper = BigRational::zero();
    for k in (1..=n).rev() {
        let tau = tails[(k - 1) as usize].clone();
        let len = &tau - &upper;
        segs.push((len, BigRational::from(BigInt::from(k))));
        upper = tau;
    }
    segs.reverse();
    // Segments were built from the top value down; re-order so the largest
    // value comes first, as a decreasing step function.
    segs.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(ExactStep::from_pairs(segs))
}
