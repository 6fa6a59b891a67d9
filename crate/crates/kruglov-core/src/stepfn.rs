//! Nonnegative step functions on `[0, ∞)`.
//!
//! A function is a finite list of constant segments laid end to end from 0,
//! with value 0 past the last segment. Segment lists are kept canonical:
//! strictly positive lengths, adjacent segments with equal values merged,
//! trailing zero-value segments dropped. Two functions are equal as values
//! iff their canonical segment lists are equal.
//!
//! Functions are right-continuous: the value at a breakpoint is the value of
//! the segment that starts there.

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Slack used when validating support bounds such as "supported in `[0,1]`".
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub len: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    segments: Vec<Segment>,
}

impl StepFunction {
    /// Builds a function from `(length, value)` pairs laid out from 0.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(len, value) in &pairs {
            if !len.is_finite() || len <= 0.0 {
                return Err(Error::InvalidStep(format!(
                    "segment length must be positive and finite, got {len}"
                )));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidStep(format!(
                    "segment value must be nonnegative and finite, got {value}"
                )));
            }
        }
        let segments = pairs
            .into_iter()
            .map(|(len, value)| Segment { len, value })
            .collect();
        Ok(Self {
            segments: canonical(segments),
        })
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self { segments: vec![] }
    }

    /// Indicator of `[0, u]`.
    pub fn indicator(u: f64) -> Result<Self> {
        Self::scaled_indicator(u, 1.0)
    }

    /// `c · χ_[0,u]`.
    pub fn scaled_indicator(u: f64, c: f64) -> Result<Self> {
        if !u.is_finite() || u <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "indicator length must be positive, got {u}"
            )));
        }
        if c == 0.0 {
            return Ok(Self::zero());
        }
        Self::new(vec![(u, c)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_zero(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.segments.iter().map(|s| (s.len, s.value)).collect()
    }

    /// End of the last stored segment (0 for the zero function).
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.len).sum()
    }

    /// Measure of `{f > 0}`.
    pub fn support_measure(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.value > 0.0)
            .map(|s| s.len)
            .sum()
    }

    /// Value at `t ≥ 0`; 0 past the last segment.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let mut end = 0.0;
        for s in &self.segments {
            end += s.len;
            if t < end {
                return s.value;
            }
        }
        0.0
    }

    pub fn max_value(&self) -> f64 {
        self.segments.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    /// `∫ f` (the `L_1` norm, since values are nonnegative).
    pub fn integral(&self) -> f64 {
        let mut acc = Kahan::new();
        for s in &self.segments {
            acc.add(s.len * s.value);
        }
        acc.value()
    }

    /// Measure of `{f > lambda}`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let mut acc = Kahan::new();
        for s in &self.segments {
            if s.value > lambda {
                acc.add(s.len);
            }
        }
        acc.value()
    }

    /// True when segment values are non-increasing left to right.
    pub fn is_decreasing(&self) -> bool {
        self.segments.windows(2).all(|w| w[0].value >= w[1].value)
    }

    /// Decreasing rearrangement: same value distribution, sorted decreasing.
    pub fn rearrange(&self) -> StepFunction {
        let mut segs: Vec<Segment> = self
            .segments
            .iter()
            .filter(|s| s.value > 0.0)
            .copied()
            .collect();
        segs.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
        StepFunction {
            segments: canonical(segs),
        }
    }

    /// Multiplies all values by `c ≥ 0`.
    pub fn scale(&self, c: f64) -> Result<StepFunction> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be nonnegative and finite, got {c}"
            )));
        }
        StepFunction::new(self.to_pairs().into_iter().map(|(l, v)| (l, c * v)).collect())
    }

    /// Dilation `σ_τ f (s) = f(s/τ)` for `s ≤ min(1, τ)`, 0 beyond, as an
    /// operator on functions supported in `[0,1]`.
    pub fn dilate(&self, tau: f64) -> Result<StepFunction> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive, got {tau}"
            )));
        }
        if self.total_length() > 1.0 + SUPPORT_TOL {
            return Err(Error::InvalidStep(
                "dilation requires a function supported in [0,1]".into(),
            ));
        }
        let scaled = self
            .segments
            .iter()
            .map(|s| Segment {
                len: s.len * tau,
                value: s.value,
            })
            .collect();
        Ok(StepFunction {
            segments: clip_to(scaled, 1.0),
        })
    }

    /// Restriction of a decreasing function to `[a, b)`, re-anchored at 0.
    /// `b` may be infinite.
    pub fn truncate(&self, a: f64, b: f64) -> Result<StepFunction> {
        if !(a >= 0.0) || a.is_nan() || b.is_nan() || b < a {
            return Err(Error::InvalidParameter(format!(
                "truncation window must satisfy 0 <= a <= b, got [{a}, {b})"
            )));
        }
        if !self.is_decreasing() {
            return Err(Error::InvalidStep(
                "truncation is defined for decreasing functions".into(),
            ));
        }
        let mut out = Vec::new();
        let mut start = 0.0;
        for s in &self.segments {
            let end = start + s.len;
            let lo = start.max(a);
            let hi = end.min(b);
            if hi > lo {
                out.push(Segment {
                    len: hi - lo,
                    value: s.value,
                });
            }
            start = end;
            if start >= b {
                break;
            }
        }
        Ok(StepFunction {
            segments: canonical(out),
        })
    }

    /// Disjoint sum: copy `k` occupies `[k-1, k)`, so the result on `[0, n)`
    /// carries each input on its own unit block. Inputs must be supported in
    /// `[0,1]`.
    pub fn disjointify(fs: &[StepFunction]) -> Result<StepFunction> {
        let mut out: Vec<Segment> = Vec::new();
        for f in fs {
            let len = f.total_length();
            if len > 1.0 + SUPPORT_TOL {
                return Err(Error::InvalidStep(
                    "disjoint sum requires functions supported in [0,1]".into(),
                ));
            }
            out.extend(f.segments.iter().copied());
            let pad = 1.0 - len;
            if pad > 0.0 {
                out.push(Segment {
                    len: pad,
                    value: 0.0,
                });
            }
        }
        Ok(StepFunction {
            segments: canonical(out),
        })
    }

    /// Pointwise sup-distance, evaluated over the union of breakpoints.
    pub fn sup_abs_diff(&self, other: &StepFunction) -> f64 {
        let mut cuts: Vec<f64> = vec![0.0];
        for f in [self, other] {
            let mut end = 0.0;
            for s in &f.segments {
                end += s.len;
                cuts.push(end);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst = 0.0_f64;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            worst = worst.max((self.value_at(mid) - other.value_at(mid)).abs());
            worst = worst.max((self.value_at(w[0]) - other.value_at(w[0])).abs());
        }
        let end = cuts.last().copied().unwrap_or(0.0);
        worst.max((self.value_at(end) - other.value_at(end)).abs())
    }
}

/// Merges adjacent equal values, drops non-positive lengths and trailing zeros.
fn canonical(segments: Vec<Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    for s in segments {
        if s.len <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.value == s.value => last.len += s.len,
            _ => out.push(s),
        }
    }
    while matches!(out.last(), Some(s) if s.value == 0.0) {
        out.pop();
    }
    out
}

/// Truncates a segment list at total length `limit`.
fn clip_to(segments: Vec<Segment>, limit: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut used = 0.0;
    for s in segments {
        if used >= limit {
            break;
        }
        let len = s.len.min(limit - used);
        used += len;
        out.push(Segment { len, value: s.value });
    }
    canonical(out)
}

impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.segments.len()))?;
        for s in &self.segments {
            seq.serialize_element(&[s.len, s.value])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PairsVisitor;
        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = Vec<(f64, f64)>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an array of [length, value] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some([len, value]) = seq.next_element::<[f64; 2]>()? {
                    pairs.push((len, value));
                }
                Ok(pairs)
            }
        }
        let pairs = deserializer.deserialize_seq(PairsVisitor)?;
        StepFunction::new(pairs).map_err(serde::de::Error::custom)
    }
}
