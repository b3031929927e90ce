//! Model of the heralded single-photon experiment.
//!
//! A run opens the detectors for a window `tau`. The number of trigger
//! photons in the window is Poisson with mean `lambda * tau`; only windows
//! with exactly one trigger count. In an accepted window the protocol photon
//! is detected with probability `eta` and the answer is the measurement
//! outcome; otherwise the answering party guesses with a fair coin.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{self, check_visibility};
use crate::sampler::{self, RandomStream};
use crate::stats::{self, SuccessStats};
use crate::task::{self, InputTuple, Sign, TaskId};

/// Trigger rate quoted for the source, per second.
pub const PRESET_TRIGGER_RATE: f64 = 5000.0;
/// Collection window used in the experiment, seconds.
pub const PRESET_WINDOW: f64 = 200e-6;
pub const PRESET_PARTIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub task: TaskId,
    pub parties: usize,
    /// Trigger events per second.
    pub trigger_rate: f64,
    /// Collection window in seconds.
    pub window: f64,
    /// Heralding efficiency (coincidence/single ratio).
    pub eta: f64,
    pub visibility: f64,
    /// Number of accepted runs to collect.
    pub n_target: u64,
}

impl ExperimentParams {
    /// Reference settings for `task`: `(eta, gamma, n)` = `(0.452, 0.966, 6692)` for
    /// A and `(0.471, 0.858, 18169)` for B, five parties, 5000 triggers/s,
    /// 200 us window.
    pub fn preset(task: TaskId) -> Self {
        let (eta, gamma, n_target) = match task {
            TaskId::A => (0.452, 0.966, 6692),
            TaskId::B => (0.471, 0.858, 18169),
        };
        ExperimentParams {
            task,
            parties: PRESET_PARTIES,
            trigger_rate: PRESET_TRIGGER_RATE,
            window: PRESET_WINDOW,
            eta,
            visibility: visibility_from_gamma(task, gamma)
                .expect("preset gamma lies in the attainable range"),
            n_target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.parties == 0 {
            return Err(Error::NoParties);
        }
        positive("trigger_rate", self.trigger_rate)?;
        positive("window", self.window)?;
        probability("eta", self.eta)?;
        check_visibility(self.visibility)?;
        if self.n_target == 0 {
            return Err(Error::InvalidParameter {
                name: "n_target",
                value: 0.0,
                reason: "at least one accepted run is required",
            });
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        gamma_from_visibility(self.task, self.visibility)
            .expect("validated visibility maps to a gamma")
    }

    /// Mean trigger count per window.
    pub fn mean_triggers(&self) -> f64 {
        self.trigger_rate * self.window
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

fn probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowChoice {
    pub window: f64,
    pub accept_prob: f64,
}

/// The window maximizing `P(exactly one) = mu e^-mu`, `mu = lambda tau`,
/// is `tau = 1 / lambda`, accepted with probability `1/e`.
pub fn optimize_window(trigger_rate: f64) -> Result<WindowChoice> {
    positive("trigger_rate", trigger_rate)?;
    Ok(WindowChoice {
        window: 1.0 / trigger_rate,
        accept_prob: (-1.0f64).exp(),
    })
}

/// Probability of exactly one trigger in a window with mean `mu`.
pub fn single_trigger_prob(mu: f64) -> f64 {
    mu * (-mu).exp()
}

/// Largest conditional correctness reachable at `V = 1`.
pub fn max_gamma(task: TaskId) -> f64 {
    match task {
        TaskId::A => 1.0,
        TaskId::B => (1.0 + PI / 4.0) / 2.0,
    }
}

/// Conditional correctness given detection, averaged over the task's input
/// distribution, when the measurement bias is `V cos(sum phi)`.
pub fn gamma_from_visibility(task: TaskId, visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(match task {
        TaskId::A => (1.0 + visibility) / 2.0,
        TaskId::B => (1.0 + visibility * PI / 4.0) / 2.0,
    })
}

pub fn visibility_from_gamma(task: TaskId, gamma: f64) -> Result<f64> {
    let max = max_gamma(task);
    if !(0.5..=max).contains(&gamma) {
        return Err(Error::GammaUnattainable { task, gamma, max });
    }
    Ok(match task {
        TaskId::A => 2.0 * gamma - 1.0,
        TaskId::B => ((2.0 * gamma - 1.0) / (PI / 4.0)).min(1.0),
    })
}

/// `P_exp = eta gamma + (1 - eta) / 2`.
pub fn predicted_success(eta: f64, gamma: f64) -> Result<f64> {
    probability("eta", eta)?;
    probability("gamma", gamma)?;
    Ok(eta * gamma + (1.0 - eta) * 0.5)
}

/// `F_exp = eta (2 gamma - 1)`.
pub fn experimental_fidelity(eta: f64, gamma: f64) -> Result<f64> {
    probability("eta", eta)?;
    probability("gamma", gamma)?;
    Ok(eta * (2.0 * gamma - 1.0))
}

/// One collection window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub stream: u64,
    pub input: InputTuple,
    pub trigger_count: u64,
    pub accepted: bool,
    pub detected: bool,
    pub answer: Sign,
    pub truth: Sign,
    pub guessed: bool,
}

impl RunRecord {
    pub fn correct(&self) -> bool {
        self.answer == self.truth
    }
}

fn sample_input(task: TaskId, n: usize, rng: &mut RandomStream) -> Result<(InputTuple, Sign)> {
    loop {
        let x: InputTuple = match task {
            TaskId::A => sampler::sample_a(n, rng)?.into(),
            TaskId::B => sampler::sample_b(n, rng)?.into(),
        };
        match task::task_value(&x) {
            Ok(t) => return Ok((x, t)),
            Err(Error::CosineTie { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Simulate one window. Draw order per window is fixed: input, trigger
/// count, detection, outcome.
pub fn simulate_run(params: &ExperimentParams, rng: &mut RandomStream) -> Result<RunRecord> {
    params.validate()?;
    let poisson = Poisson::new(params.mean_triggers()).map_err(|_| Error::InvalidParameter {
        name: "trigger_rate * window",
        value: params.mean_triggers(),
        reason: "not a valid Poisson mean",
    })?;
    simulate_window(params, &poisson, rng)
}

fn simulate_window(
    params: &ExperimentParams,
    poisson: &Poisson<f64>,
    rng: &mut RandomStream,
) -> Result<RunRecord> {
    let (input, truth) = sample_input(params.task, params.parties, rng)?;
    let trigger_count = poisson.sample(rng) as u64;
    let accepted = trigger_count == 1;
    let detected = accepted && rng.random::<f64>() < params.eta;
    let answer = if detected {
        quantum::run_quantum(&input, params.visibility, rng)?
    } else {
        Sign::from_bool(rng.random())
    };
    Ok(RunRecord {
        seed: rng.seed(),
        stream: rng.stream_id(),
        input,
        trigger_count,
        accepted,
        detected,
        answer,
        truth,
        guessed: !detected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    /// Every window, accepted or not, in stream order.
    pub records: Vec<RunRecord>,
    /// Statistics over accepted windows only.
    pub stats: SuccessStats,
}

impl ExperimentOutcome {
    pub fn accepted(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.accepted)
    }
}

/// Collect `n_target` accepted windows on a single stream.
pub fn simulate_experiment(
    params: &ExperimentParams,
    rng: &mut RandomStream,
) -> Result<ExperimentOutcome> {
    let records = collect(params, params.n_target, rng)?;
    let stats = stats::success_stats(records.iter().filter(|r| r.accepted))?;
    Ok(ExperimentOutcome { records, stats })
}

/// Like [`simulate_experiment`], split over `streams` parallel streams with
/// ids `0..streams`. Stream `s` collects `n_target / streams` accepted
/// windows, plus one for the first `n_target % streams` streams; results
/// are concatenated in stream order, so the outcome does not depend on
/// thread scheduling.
pub fn simulate_experiment_parallel(
    params: &ExperimentParams,
    seed: u64,
    streams: u64,
) -> Result<ExperimentOutcome> {
    params.validate()?;
    if streams == 0 {
        return Err(Error::InvalidParameter {
            name: "streams",
            value: 0.0,
            reason: "at least one stream is required",
        });
    }
    let per = params.n_target / streams;
    let extra = params.n_target % streams;
    let chunks = (0..streams)
        .into_par_iter()
        .map(|s| {
            let quota = per + u64::from(s < extra);
            collect(params, quota, &mut RandomStream::new(seed, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<RunRecord> = chunks.into_iter().flatten().collect();
    let stats = stats::success_stats(records.iter().filter(|r| r.accepted))?;
    Ok(ExperimentOutcome { records, stats })
}

fn collect(
    params: &ExperimentParams,
    quota: u64,
    rng: &mut RandomStream,
) -> Result<Vec<RunRecord>> {
    params.validate()?;
    let poisson = Poisson::new(params.mean_triggers()).map_err(|_| Error::InvalidParameter {
        name: "trigger_rate * window",
        value: params.mean_triggers(),
        reason: "not a valid Poisson mean",
    })?;
    let mut records = Vec::new();
    let mut accepted = 0;
    while accepted < quota {
        let r = simulate_window(params, &poisson, rng)?;
        accepted += u64::from(r.accepted);
        records.push(r);
    }
    Ok(records)
}
