//! Norms of rearrangeable spaces on `[0,1]`, plus the head-plus-tail spaces
//! on `[0, ∞)` built from them.
//!
//! Every norm is evaluated on the decreasing rearrangement, so all norms
//! here are rearrangement-invariant by construction. Spaces on `[0,1]`
//! reject functions whose support measure exceeds 1.
//!
//! Supported spaces, with their textual forms:
//!   - `lp:p`            `(∫ (f*)^p)^{1/p}`
//!   - `lorentz:p`       `∫ f* dψ` with `ψ(t) = t^{1/p}`
//!   - `marc:p`          `sup_{0<t≤1} t^{1/p - 1} ∫_0^t f*`
//!   - `orlicz:q`        Luxemburg norm for `N_q(t) = t^{t^q} - 1`
//!   - `zx:<base>,tail=T` `‖f*χ_[0,1]‖_base + tail norm of f* on [1,∞)`,
//!     where `T` is a power (`tail=2`), `inf`, or `discreteP` for the
//!     sampled tail `(Σ_{k≥1} f*(k)^P)^{1/P}`.

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use crate::stepfn::{StepFunction, SUPPORT_TOL};
use crate::DiscreteLaw;
use std::fmt;
use std::str::FromStr;

/// Relative tolerance of the Luxemburg-norm bisection.
const LUXEMBURG_TOL: f64 = 1e-12;

/// Guard band for accepting an interior stationary point of the
/// Marcinkiewicz objective against its segment boundaries.
const STATIONARY_BAND: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailMode {
    /// `L_p` norm on `[1, ∞)`.
    Power(f64),
    /// Essential sup on `[1, ∞)`, i.e. `f*(1)`.
    Sup,
    /// `(Σ_{k≥1} f*(k)^p)^{1/p}` over integer sample points.
    Discrete(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Lp { p: f64 },
    Lorentz { p: f64 },
    Marcinkiewicz { p: f64 },
    Orlicz { q: f64 },
    ZXp { base: Box<SpaceSpec>, tail: TailMode },
}

impl SpaceSpec {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(SpaceSpec::Lp { p })
    }

    pub fn lorentz(p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(SpaceSpec::Lorentz { p })
    }

    pub fn marcinkiewicz(p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(SpaceSpec::Marcinkiewicz { p })
    }

    pub fn orlicz(q: f64) -> Result<Self> {
        check_exponent("q", q)?;
        Ok(SpaceSpec::Orlicz { q })
    }

    pub fn zx(base: SpaceSpec, tail: TailMode) -> Result<Self> {
        if !base.on_unit_interval() {
            return Err(Error::InvalidParameter(
                "head space of a head-plus-tail space must live on [0,1]".into(),
            ));
        }
        match tail {
            TailMode::Power(p) | TailMode::Discrete(p) => check_exponent("tail exponent", p)?,
            TailMode::Sup => {}
        }
        Ok(SpaceSpec::ZXp {
            base: Box::new(base),
            tail,
        })
    }

    /// True for spaces whose functions live on `[0,1]`.
    pub fn on_unit_interval(&self) -> bool {
        !matches!(self, SpaceSpec::ZXp { .. })
    }

    /// Norm of `f`, computed on its decreasing rearrangement.
    pub fn norm(&self, f: &StepFunction) -> Result<f64> {
        let star = f.rearrange();
        if self.on_unit_interval() && star.total_length() > 1.0 + SUPPORT_TOL {
            return Err(Error::NotAdmissible(format!(
                "support measure {} exceeds 1",
                star.total_length()
            )));
        }
        Ok(self.norm_decreasing(&star))
    }

    /// Norm of the decreasing rearrangement of `|X|` for a law.
    pub fn norm_of_law(&self, d: &DiscreteLaw) -> Result<f64> {
        self.norm(&d.quantile_step())
    }

    /// Norm of `χ_[0,t]` for `t ∈ (0, 1]`.
    pub fn fundamental_function(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fundamental function argument must lie in (0,1], got {t}"
            )));
        }
        self.norm(&StepFunction::indicator(t)?)
    }

    fn norm_decreasing(&self, star: &StepFunction) -> f64 {
        if star.is_zero() {
            return 0.0;
        }
        match self {
            SpaceSpec::Lp { p } => lp_norm(star, *p),
            SpaceSpec::Lorentz { p } => lorentz_norm(star, *p),
            SpaceSpec::Marcinkiewicz { p } => marcinkiewicz_norm(star, *p),
            SpaceSpec::Orlicz { q } => luxemburg_norm(star, *q),
            SpaceSpec::ZXp { base, tail } => {
                let head = star.truncate(0.0, 1.0).expect("rearrangement is decreasing");
                let tail_part = star.truncate(1.0, f64::INFINITY).expect("decreasing");
                let head_norm = base.norm_decreasing(&head);
                let tail_norm = match tail {
                    TailMode::Power(p) => lp_norm(&tail_part, *p),
                    TailMode::Sup => star.value_at(1.0),
                    TailMode::Discrete(p) => discrete_tail_norm(star, *p),
                };
                head_norm + tail_norm
            }
        }
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} must be finite and at least 1, got {p}"
        )));
    }
    Ok(())
}

/// `(Σ v^p len)^{1/p}`, with the largest value factored out for stable
/// powers at large `p`.
fn lp_norm(f: &StepFunction, p: f64) -> f64 {
    let m = f.max_value();
    if m == 0.0 {
        return 0.0;
    }
    let mut acc = Kahan::new();
    for s in f.segments() {
        if s.value > 0.0 {
            acc.add((s.value / m).powf(p) * s.len);
        }
    }
    m * acc.value().powf(1.0 / p)
}

/// `Σ v_j (t_j^{1/p} - t_{j-1}^{1/p})` over the segments of a decreasing
/// function, `t_j` the cumulative endpoints.
fn lorentz_norm(f: &StepFunction, p: f64) -> f64 {
    let a = 1.0 / p;
    let mut acc = Kahan::new();
    let mut t_prev = 0.0_f64;
    for s in f.segments() {
        let t = t_prev + s.len;
        acc.add(s.value * (t.powf(a) - t_prev.powf(a)));
        t_prev = t;
    }
    acc.value()
}

/// `sup_{0<t≤1} t^{1/p-1} ∫_0^t f*`. On each segment the objective has at
/// most one interior stationary point, so the sup is attained at a segment
/// endpoint, at that stationary point, or at 1.
fn marcinkiewicz_norm(f: &StepFunction, p: f64) -> f64 {
    let a = 1.0 / p;
    let h = |t: f64, integral: f64| -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            t.powf(a - 1.0) * integral
        }
    };
    let mut best = 0.0_f64;
    let mut t_prev = 0.0_f64;
    let mut integral_prev = 0.0_f64;
    for s in f.segments() {
        let t_end = t_prev + s.len;
        let c = integral_prev - s.value * t_prev;
        // d/dt [t^{a-1} (v t + c)] = t^{a-2} (a v t + (a-1) c).
        if s.value > 0.0 && c != 0.0 {
            let t_star = (1.0 - a) * c / (a * s.value);
            if t_star > t_prev - STATIONARY_BAND && t_star < t_end + STATIONARY_BAND {
                let t_c = t_star.clamp(t_prev, t_end.min(1.0));
                if t_c > 0.0 && t_c <= 1.0 {
                    best = best.max(h(t_c, s.value * t_c + c));
                }
            }
        }
        let t_c = t_end.min(1.0);
        best = best.max(h(t_c, s.value * t_c + c));
        integral_prev += s.value * s.len;
        t_prev = t_end;
        if t_prev >= 1.0 {
            break;
        }
    }
    // Past the support the average only decays, but evaluate at 1 anyway
    // when the support ends earlier.
    if t_prev < 1.0 {
        best = best.max(integral_prev);
    }
    best
}

/// `N_q(t) = t^{t^q} - 1`, the Orlicz function: zero at 0 and 1, negative
/// between, doubly exponential past 1.
pub fn orlicz_nq(t: f64, q: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (t.powf(q) * t.ln()).exp_m1()
    }
}

/// `∫_0^1 N_q(f/λ)`; the zero region contributes nothing.
fn orlicz_modular(f: &StepFunction, q: f64, lambda: f64) -> f64 {
    let mut acc = Kahan::new();
    for s in f.segments() {
        acc.add(s.len * orlicz_nq(s.value / lambda, q));
    }
    acc.value()
}

/// Luxemburg norm `inf {λ > 0 : ∫_0^1 N_q(f/λ) ≤ 1}` by bracketed
/// bisection. At `λ = max f` every ratio is at most 1, so the modular is
/// nonpositive; halving from there finds the other side of the bracket
/// because the modular blows up as `λ → 0` for nonzero `f`.
fn luxemburg_norm(f: &StepFunction, q: f64) -> f64 {
    let mut hi = f.max_value();
    if hi == 0.0 {
        return 0.0;
    }
    let mut lo = hi;
    let mut halvings = 0;
    loop {
        lo /= 2.0;
        if orlicz_modular(f, q, lo) > 1.0 {
            break;
        }
        hi = lo;
        halvings += 1;
        assert!(
            halvings < 2200,
            "Luxemburg bracket search failed to find a lower endpoint"
        );
    }
    for _ in 0..200 {
        if (hi - lo) <= LUXEMBURG_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if orlicz_modular(f, q, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(Σ_{k≥1} f*(k)^p)^{1/p}` over integer sample points of the tail.
fn discrete_tail_norm(star: &StepFunction, p: f64) -> f64 {
    let mut acc = Kahan::new();
    let mut m = 0.0_f64;
    let end = star.total_length();
    let mut k = 1.0;
    while k < end {
        m = m.max(star.value_at(k));
        k += 1.0;
    }
    if m == 0.0 {
        return 0.0;
    }
    let mut k = 1.0;
    while k < end {
        let v = star.value_at(k);
        if v > 0.0 {
            acc.add((v / m).powf(p));
        }
        k += 1.0;
    }
    m * acc.value().powf(1.0 / p)
}

/// Total support mass `Σ_k P(f_k ≠ 0)` of a family of laws, and whether it
/// satisfies the bounded-overlap assumption `Σ ≤ 1`.
pub fn check_assumption(laws: &[DiscreteLaw]) -> (f64, bool) {
    let mut acc = Kahan::new();
    for d in laws {
        acc.add(d.prob_nonzero());
    }
    let sum = acc.value();
    (sum, sum <= 1.0 + SUPPORT_TOL)
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            SpaceSpec::Lp { p } => write!(f, "lp:{}", fmt_num(*p)),
            SpaceSpec::Lorentz { p } => write!(f, "lorentz:{}", fmt_num(*p)),
            SpaceSpec::Marcinkiewicz { p } => write!(f, "marc:{}", fmt_num(*p)),
            SpaceSpec::Orlicz { q } => write!(f, "orlicz:{}", fmt_num(*q)),
            SpaceSpec::ZXp { base, tail } => match tail {
                TailMode::Power(p) => write!(f, "zx:{base},tail={}", fmt_num(*p)),
                TailMode::Sup => write!(f, "zx:{base},tail=inf"),
                TailMode::Discrete(p) => write!(f, "zx:{base},tail=discrete{}", fmt_num(*p)),
            },
        }
    }
}

fn fmt_num(p: f64) -> String {
    if p == p.trunc() && p.abs() < 1e15 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("space {s:?}: {why}"));
        if let Some(rest) = s.strip_prefix("zx:") {
            let (base_str, tail_str) = rest
                .rsplit_once(",tail=")
                .ok_or_else(|| bad("expected zx:<base>,tail=<mode>"))?;
            let base: SpaceSpec = base_str.parse()?;
            let tail = if tail_str == "inf" {
                TailMode::Sup
            } else if let Some(ps) = tail_str.strip_prefix("discrete") {
                TailMode::Discrete(
                    ps.parse()
                        .map_err(|_| bad("bad discrete tail exponent"))?,
                )
            } else {
                TailMode::Power(tail_str.parse().map_err(|_| bad("bad tail exponent"))?)
            };
            return SpaceSpec::zx(base, tail);
        }
        let (kind, num) = s.split_once(':').ok_or_else(|| bad("expected kind:number"))?;
        let value: f64 = num.parse().map_err(|_| bad("bad exponent"))?;
        match kind {
            "lp" => SpaceSpec::lp(value),
            "lorentz" => SpaceSpec::lorentz(value),
            "marc" => SpaceSpec::marcinkiewicz(value),
            "orlicz" => SpaceSpec::orlicz(value),
            other => Err(bad(&format!("unknown space kind {other:?}"))),
        }
    }
}

impl serde::Serialize for SpaceSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for SpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
