//! Target-gap densities and their annealing schedules.
//!
//! Every dynamics variant draws a target gap `D` from a piecewise-exponential
//! density and then flips the spin whose cost best matches the draw. The
//! density is either one-sided (all mass on `x <= 0`),
//!
//! ```text
//! f(x) = lambda * exp(lambda * x),   x <= 0
//! ```
//!
//! or two-sided with exponential lobes on both half-lines,
//!
//! ```text
//! f(x) = w- * ln * exp(ln * x)        for x <= 0
//! f(x) = w+ * lp * exp(-lp * x)       for x >  0,   w- + w+ = 1.
//! ```
//!
//! Annealing multiplies the positive rate by `1/k` per accepted flip, which
//! simultaneously shrinks the positive weight geometrically:
//! `lp(t) = lp(0)/k^t` and `w+(t) = w+(0) * k^t`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// The four dynamics variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// One-sided density with a fixed rate; pure descent.
    Alg0,
    /// Two-sided annealed density; stops at the first stable configuration.
    Alg1,
    /// Two-sided annealed density with a weight-ratio switch to one-sided
    /// descent and a tail-probability stop rule.
    Alg2,
    /// Like `Alg2` but with unit-prefactor lobes tied by
    /// `1/lambda1 + 1/lambda2 = 1`, so both rates move together.
    Alg3,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Alg0, Variant::Alg1, Variant::Alg2, Variant::Alg3];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Alg0 => "alg0",
            Variant::Alg1 => "alg1",
            Variant::Alg2 => "alg2",
            Variant::Alg3 => "alg3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg0" => Ok(Variant::Alg0),
            "alg1" => Ok(Variant::Alg1),
            "alg2" => Ok(Variant::Alg2),
            "alg3" => Ok(Variant::Alg3),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm `{other}` (expected alg0, alg1, alg2 or alg3)"
            ))),
        }
    }
}

/// Which side of zero a density currently puts mass on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    TwoSided,
    OneSided,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::TwoSided => "two_sided",
            Regime::OneSided => "one_sided",
        })
    }
}

/// Half-line selector for conditional draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Negative,
    Positive,
}

/// A concrete piecewise-exponential density at one instant of the schedule.
///
/// For one-sided densities `lambda_pos` is `None` and `weight_neg` is 1.
/// `lambda_pos` may be `+inf` when a long schedule has pushed the positive
/// lobe below floating-point range; the positive side then carries no mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub lambda_neg: f64,
    pub lambda_pos: Option<f64>,
    pub weight_neg: f64,
}

impl DensitySpec {
    pub fn one_sided(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::param("rate", "must be positive and finite"));
        }
        Ok(DensitySpec {
            lambda_neg: rate,
            lambda_pos: None,
            weight_neg: 1.0,
        })
    }

    pub fn two_sided(lambda_neg: f64, lambda_pos: f64, weight_neg: f64) -> Result<Self> {
        if !(lambda_neg.is_finite() && lambda_neg > 0.0) {
            return Err(Error::param("lambda_neg", "must be positive and finite"));
        }
        if !(lambda_pos > 0.0) {
            return Err(Error::param("lambda_pos", "must be positive"));
        }
        if !(0.0..=1.0).contains(&weight_neg) {
            return Err(Error::param("weight_neg", "must lie in [0, 1]"));
        }
        Ok(DensitySpec {
            lambda_neg,
            lambda_pos: Some(lambda_pos),
            weight_neg,
        })
    }

    pub fn is_one_sided(&self) -> bool {
        self.lambda_pos.is_none()
    }

    /// Probability density at `x`. Zero on the positive half-line for
    /// one-sided densities (and for fully decayed positive lobes).
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.weight_neg * self.lambda_neg * (self.lambda_neg * x).exp()
        } else {
            match self.lambda_pos {
                None => 0.0,
                Some(lp) => {
                    let w = 1.0 - self.weight_neg;
                    if w == 0.0 || !lp.is_finite() {
                        0.0
                    } else {
                        w * lp * (-lp * x).exp()
                    }
                }
            }
        }
    }

    /// `P(D >= x)` for strictly positive `x`.
    pub fn tail_probability(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tail probability requires a strictly positive threshold, got {x}"
            )));
        }
        match self.lambda_pos {
            None => Ok(0.0),
            Some(lp) => Ok((1.0 - self.weight_neg) * (-lp * x).exp()),
        }
    }

    /// Draws a target gap, consuming exactly two uniforms: one for the side,
    /// one for the magnitude.
    pub fn sample(&self, stream: &mut Stream) -> f64 {
        let side = stream.uniform();
        if side < self.weight_neg {
            -stream.exponential(self.lambda_neg)
        } else {
            // Unreachable for one-sided densities: weight_neg is exactly 1
            // and uniforms live in [0, 1).
            stream.exponential(self.lambda_pos.expect("positive draw from one-sided density"))
        }
    }

    /// Draws from one half-line, consuming exactly one uniform.
    pub fn conditional_sample(&self, side: Side, stream: &mut Stream) -> Result<f64> {
        match side {
            Side::Negative => Ok(-stream.exponential(self.lambda_neg)),
            Side::Positive => match self.lambda_pos {
                Some(lp) => Ok(stream.exponential(lp)),
                None => Err(Error::InvalidArgument(
                    "cannot sample the positive side of a one-sided density".into(),
                )),
            },
        }
    }
}

/// Schedule parameters plus the current annealing position for one variant.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    variant: Variant,
    t: u64,
    k: f64,
    m: f64,
    lambda1_0: f64,
    lambda2_0: f64,
    weight_pos_0: f64,
    regime: Regime,
    frozen_rate: Option<f64>,
    switched_at: Option<u64>,
}

impl ScheduleState {
    /// Validates parameters and positions the schedule at `t = 0`.
    ///
    /// `lambda1_0` is the initial negative-side rate (`> 1` required for
    /// `Alg3`, where it also fixes `lambda2_0 = lambda1_0/(lambda1_0 - 1)`),
    /// `k` the per-flip annealing factor, and `m` the weight-ratio threshold
    /// for the switch to one-sided descent.
    pub fn init(variant: Variant, lambda1_0: f64, k: f64, m: f64) -> Result<Self> {
        if !(lambda1_0.is_finite() && lambda1_0 > 0.0) {
            return Err(Error::param("lambda1_0", "must be positive and finite"));
        }
        if variant == Variant::Alg3 && lambda1_0 <= 1.0 {
            return Err(Error::param(
                "lambda1_0",
                "must exceed 1 for alg3 so that both rates stay positive",
            ));
        }
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(Error::param("k", "must lie strictly between 0 and 1"));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("m", "must be positive and finite"));
        }
        let (lambda2_0, weight_pos_0, regime, frozen_rate) = match variant {
            Variant::Alg0 => (lambda1_0, 0.0, Regime::OneSided, Some(lambda1_0)),
            Variant::Alg1 | Variant::Alg2 => (lambda1_0, 0.5, Regime::TwoSided, None),
            Variant::Alg3 => {
                let l2 = lambda1_0 / (lambda1_0 - 1.0);
                (l2, 1.0 / l2, Regime::TwoSided, None)
            }
        };
        Ok(ScheduleState {
            variant,
            t: 0,
            k,
            m,
            lambda1_0,
            lambda2_0,
            weight_pos_0,
            regime,
            frozen_rate,
            switched_at: None,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of schedule steps taken; frozen once the regime turns one-sided.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// The fixed descent rate, available once the regime is one-sided.
    pub fn frozen_rate(&self) -> Option<f64> {
        self.frozen_rate
    }

    /// The step at which an annealed schedule switched to one-sided descent.
    pub fn switched_at(&self) -> Option<u64> {
        self.switched_at
    }

    fn k_pow_t(&self) -> f64 {
        if self.t > i32::MAX as u64 {
            0.0
        } else {
            self.k.powi(self.t as i32)
        }
    }

    fn lambda_pos_now(&self) -> f64 {
        self.lambda2_0 / self.k_pow_t()
    }

    fn lambda_neg_now(&self) -> f64 {
        match self.variant {
            Variant::Alg0 | Variant::Alg1 | Variant::Alg2 => self.lambda1_0,
            Variant::Alg3 => {
                let l2 = self.lambda_pos_now();
                if l2.is_finite() {
                    l2 / (l2 - 1.0)
                } else {
                    1.0
                }
            }
        }
    }

    fn weight_pos_now(&self) -> f64 {
        self.weight_pos_0 * self.k_pow_t()
    }

    /// The positive-side rate at the current step, if the regime is still
    /// two-sided.
    pub fn lambda_pos(&self) -> Option<f64> {
        match self.regime {
            Regime::TwoSided => Some(self.lambda_pos_now()),
            Regime::OneSided => None,
        }
    }

    /// The density in force at the current step.
    pub fn density(&self) -> DensitySpec {
        match self.regime {
            Regime::OneSided => DensitySpec {
                lambda_neg: self.frozen_rate.expect("one-sided regime without a frozen rate"),
                lambda_pos: None,
                weight_neg: 1.0,
            },
            Regime::TwoSided => DensitySpec {
                lambda_neg: self.lambda_neg_now(),
                lambda_pos: Some(self.lambda_pos_now()),
                weight_neg: 1.0 - self.weight_pos_now(),
            },
        }
    }

    /// Advances the schedule by one accepted flip.
    ///
    /// A no-op in the one-sided regime. For `Alg2` and `Alg3` the advance
    /// checks the weight ratio and switches to one-sided descent once the
    /// negative weight strictly exceeds `m` times the positive weight; `Alg2`
    /// keeps its fixed negative rate, `Alg3` freezes the rate in force at the
    /// switch step.
    pub fn advance(&mut self) {
        if self.regime == Regime::OneSided {
            return;
        }
        self.t += 1;
        if matches!(self.variant, Variant::Alg2 | Variant::Alg3) {
            let w_pos = self.weight_pos_now();
            if 1.0 - w_pos > self.m * w_pos {
                self.regime = Regime::OneSided;
                self.frozen_rate = Some(self.lambda_neg_now());
                self.switched_at = Some(self.t);
            }
        }
    }

    /// Convenience: a schedule advanced `t` times from its initial state.
    pub fn at_step(variant: Variant, lambda1_0: f64, k: f64, m: f64, t: u64) -> Result<Self> {
        let mut state = ScheduleState::init(variant, lambda1_0, k, m)?;
        for _ in 0..t {
            if state.regime == Regime::OneSided {
                break;
            }
            state.advance();
        }
        Ok(state)
    }
}
