//! Single-trajectory execution of the four annealed single-flip dynamics.
//!
//! One iteration: compute the flip-cost spectrum, check the variant's stop
//! rule, draw a target gap `D`, flip the eligible spin whose cost lies
//! closest to `D`, and advance the annealing schedule. Randomness enters only
//! through the draw of `D`, so a trajectory is a deterministic function of
//! `(J, sigma0, params, stream seed)`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{CouplingMatrix, EnergyState, SpinConfiguration};
use crate::rng::Stream;
use crate::schedule::{Regime, ScheduleState, Side, Variant};

/// Which spectrum entries are eligible for a given draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    /// Only strictly negative costs, regardless of the draw's sign.
    NegativeOnly,
    /// Costs sharing the draw's strict sign.
    SameSign,
}

/// Outcome of a site selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteSelection {
    Site(usize),
    /// No spectrum entry was eligible for the draw.
    EmptyClass,
}

/// Picks the eligible site whose cost is closest to the draw.
///
/// Ties go to the lowest index. Zero entries are never eligible, and a draw
/// of exactly zero matches nothing under `SameSign`.
pub fn select_site(spectrum: &[f64], draw: f64, rule: SelectionRule) -> SiteSelection {
    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in spectrum.iter().enumerate() {
        let eligible = match rule {
            SelectionRule::NegativeOnly => d < 0.0,
            SelectionRule::SameSign => d * draw > 0.0,
        };
        if eligible {
            let dist = (d - draw).abs();
            if best.map_or(true, |(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
    }
    match best {
        Some((i, _)) => SiteSelection::Site(i),
        None => SiteSelection::EmptyClass,
    }
}

/// How much per-step detail a trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordMode {
    /// Every step plus every visited minimum.
    Full,
    /// Only the visited minima.
    MinimaOnly,
    /// Scalars only; both lists stay empty.
    Summary,
}

/// Why a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached a one-flip-stable configuration under a rule that stops there.
    StableStop,
    /// Stable, and the probability of drawing past the smallest positive
    /// cost fell below epsilon.
    TailStop,
    /// The step safeguard fired.
    StepLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::StableStop => "stable_stop",
            Termination::TailStop => "tail_stop",
            Termination::StepLimit => "step_limit",
        })
    }
}

fn default_m() -> f64 {
    1000.0
}

fn default_epsilon() -> f64 {
    1e-4
}

fn default_max_steps() -> u64 {
    1_000_000
}

fn default_record_mode() -> RecordMode {
    RecordMode::Summary
}

/// Everything that defines one dynamics run apart from the instance and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    pub variant: Variant,
    pub lambda1_0: f64,
    pub k: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_record_mode")]
    pub record_mode: RecordMode,
}

impl TrajectoryParams {
    /// Parameters with the standard defaults `m = 1000`, `epsilon = 1e-4`,
    /// `max_steps = 10^6`, summary recording.
    pub fn new(variant: Variant, lambda1_0: f64, k: f64) -> Self {
        TrajectoryParams {
            variant,
            lambda1_0,
            k,
            m: default_m(),
            epsilon: default_epsilon(),
            max_steps: default_max_steps(),
            record_mode: default_record_mode(),
        }
    }

    pub fn with_record_mode(mut self, mode: RecordMode) -> Self {
        self.record_mode = mode;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ScheduleState::init(self.variant, self.lambda1_0, self.k, self.m)?;
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be positive and finite"));
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// One recorded flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// Step counter before the flip (0-based).
    pub t: u64,
    /// Site that was flipped.
    pub site: usize,
    /// The drawn target gap `D`, on the per-spin scale (the site selected
    /// is the one whose raw cost lies closest to `D * sqrt(N)`).
    pub draw: f64,
    /// Flip cost of the chosen site, raw (unnormalized) convention.
    pub delta: f64,
    /// Energy after the flip.
    pub energy: f64,
    /// Density regime in force when the draw was made.
    pub regime: Regime,
}

/// Result of one dynamics run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Per-step records; populated only in `RecordMode::Full`.
    pub steps: Vec<Step>,
    /// `(t, energy)` for each one-flip-stable configuration encountered;
    /// populated in `Full` and `MinimaOnly` modes.
    pub visited_minima: Vec<(u64, f64)>,
    /// Energy of the configuration the run ended in.
    pub final_energy: f64,
    /// Lowest energy over all visited minima, tracked in every record mode.
    /// `None` when the run hit the step limit before any minimum.
    pub best_minimum_energy: Option<f64>,
    pub termination: Termination,
    /// Number of flips performed.
    pub flips: u64,
    /// Configuration the run ended in.
    pub final_config: SpinConfiguration,
}

/// Runs one trajectory of the configured variant.
///
/// Per iteration: (a) compute the spectrum and record stability, (b) apply
/// the variant's stop rule, (c) draw `D` — conditionally on the only
/// populated sign class when one class is empty, (d) select and flip the
/// matching site, (e) advance the schedule by one accepted flip. A draw of
/// exactly zero matches no site and is simply redrawn.
///
/// Draws live on the per-spin energy scale: a draw `D` targets the flip
/// whose cost is closest to `D * sqrt(N)` on the raw spectrum. Raw costs
/// grow like `sqrt(N)`, so this is what keeps a fixed rate meaning the same
/// thing at every size — `lambda = 1` chases order-one normalized drops
/// (greedy) while `lambda = 100` hugs the smallest ones (reluctant).
///
/// The tail stop, by contrast, evaluates the draw density's upper tail at
/// the raw smallest positive cost. Stable raw gaps sit at an order-one
/// level at every size, so a fixed `epsilon` ends the exploration phase
/// after a size-independent number of schedule steps; the annealing rate
/// `k` alone sets that horizon.
pub fn run_trajectory(
    j: &CouplingMatrix,
    sigma0: &SpinConfiguration,
    p: &TrajectoryParams,
    stream: &mut Stream,
) -> Result<Trajectory> {
    p.validate()?;
    let n = j.n();
    if sigma0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sigma0.len(),
        });
    }
    let mut state = EnergyState::new(j, sigma0.clone())?;
    let mut sched = ScheduleState::init(p.variant, p.lambda1_0, p.k, p.m)?;
    let rule = if p.variant == Variant::Alg0 {
        SelectionRule::NegativeOnly
    } else {
        SelectionRule::SameSign
    };
    let record_steps = p.record_mode == RecordMode::Full;
    let record_minima = matches!(p.record_mode, RecordMode::Full | RecordMode::MinimaOnly);

    let mut steps = Vec::new();
    let mut visited_minima: Vec<(u64, f64)> = Vec::new();
    let mut best_minimum: Option<f64> = None;
    let mut last_minimum_at: Option<u64> = None;
    let mut spectrum = vec![0.0; n];
    let sqrt_n = (n as f64).sqrt();

    let termination = loop {
        let t = state.flips();
        let mut has_neg = false;
        let mut has_pos = false;
        let mut min_pos = f64::INFINITY;
        for (i, slot) in spectrum.iter_mut().enumerate() {
            let d = state.delta(i);
            *slot = d;
            if d < 0.0 {
                has_neg = true;
            } else if d > 0.0 {
                has_pos = true;
                if d < min_pos {
                    min_pos = d;
                }
            }
        }

        if !has_neg && last_minimum_at != Some(t) {
            last_minimum_at = Some(t);
            let e = state.energy();
            if record_minima {
                visited_minima.push((t, e));
            }
            best_minimum = Some(best_minimum.map_or(e, |b| b.min(e)));
        }

        if !has_neg {
            match p.variant {
                Variant::Alg0 | Variant::Alg1 => break Termination::StableStop,
                Variant::Alg2 | Variant::Alg3 => {
                    if sched.regime() == Regime::OneSided || !has_pos {
                        break Termination::StableStop;
                    }
                    let tail = sched.density().tail_probability(min_pos)?;
                    if tail < p.epsilon {
                        break Termination::TailStop;
                    }
                }
            }
        }

        if t >= p.max_steps {
            break Termination::StepLimit;
        }

        let density = sched.density();
        let draw = match (has_neg, has_pos) {
            (true, true) => density.sample(stream),
            (true, false) => density.conditional_sample(Side::Negative, stream)?,
            (false, true) => density.conditional_sample(Side::Positive, stream)?,
            (false, false) => break Termination::StableStop,
        };

        let site = match select_site(&spectrum, draw * sqrt_n, rule) {
            SiteSelection::Site(i) => i,
            SiteSelection::EmptyClass => continue,
        };
        let delta = spectrum[site];
        let regime = sched.regime();
        state.apply_flip(j, site);
        if record_steps {
            steps.push(Step {
                t,
                site,
                draw,
                delta,
                energy: state.energy(),
                regime,
            });
        }
        if p.variant != Variant::Alg0 {
            sched.advance();
        }
    };

    Ok(Trajectory {
        steps,
        visited_minima,
        final_energy: state.energy(),
        best_minimum_energy: best_minimum,
        termination,
        flips: state.flips(),
        final_config: state.into_config(),
    })
}

/// Rough label for where a parameter point sits on the greedy/reluctant axis.
///
/// Purely descriptive: small rates chase large downhill gaps, large rates
/// hug the smallest ones.
pub fn greedy_reluctant_character(p: &TrajectoryParams) -> &'static str {
    if p.lambda1_0 <= 3.0 {
        "greedy-like"
    } else if p.lambda1_0 >= 30.0 {
        "reluctant-like"
    } else {
        "intermediate"
    }
}
