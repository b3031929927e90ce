//! Sequential single-qubit protocols.
//!
//! The qubit starts in `(|0> + |1>)/sqrt 2`, each party applies the phase gate
//! `|0><0| + e^{i phi_k}|1><1|` for its input, and the last party measures in
//! the `(|0> +- |1>)/sqrt 2` basis. Nothing is ever entangled, so two
//! amplitudes are the whole state.
//!
//! Task A phases are quarter turns and are tracked as an integer mod 4
//! ([`PhaseZ4`]); that path never touches floating point, so the
//! always-correct result for task A is an integer identity.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::RandomStream;
use crate::task::{InputTuple, Sign, TaskId};

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub amp0: Complex64,
    pub amp1: Complex64,
}

impl QubitState {
    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    fn check_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL || !norm_sqr.is_finite() {
            return Err(Error::Unnormalized { norm_sqr });
        }
        Ok(())
    }

    /// `amp1 *= e^{i phase}`.
    pub fn apply_phase(&mut self, phase: f64) {
        self.amp1 *= Complex64::from_polar(1.0, phase);
    }

    /// `amp1 *= i^q`, exact.
    pub fn apply_quarter_turns(&mut self, q: PhaseZ4) {
        let a = self.amp1;
        self.amp1 = match q.0 {
            0 => a,
            1 => Complex64::new(-a.im, a.re),
            2 => -a,
            _ => Complex64::new(a.im, -a.re),
        };
    }
}

/// `(|0> + |1>) / sqrt 2`.
pub fn initial_state() -> QubitState {
    QubitState {
        amp0: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp1: Complex64::new(FRAC_1_SQRT_2, 0.0),
    }
}

/// A phase of `q * pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PhaseZ4(u8);

impl PhaseZ4 {
    pub fn new(quarter_turns: u64) -> Self {
        PhaseZ4((quarter_turns % 4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    /// `cos(q pi/2)` as an exact integer.
    pub fn cos(self) -> i8 {
        match self.0 {
            0 => 1,
            2 => -1,
            _ => 0,
        }
    }

    /// `(P(+), P(-))` for `(|0> + i^q |1>)/sqrt 2`, exact.
    pub fn probabilities(self) -> (f64, f64) {
        match self.cos() {
            1 => (1.0, 0.0),
            -1 => (0.0, 1.0),
            _ => (0.5, 0.5),
        }
    }

    pub fn to_state(self) -> QubitState {
        let mut s = initial_state();
        s.apply_quarter_turns(self);
        s
    }
}

impl std::ops::Add for PhaseZ4 {
    type Output = PhaseZ4;

    fn add(self, other: PhaseZ4) -> PhaseZ4 {
        PhaseZ4((self.0 + other.0) % 4)
    }
}

/// Apply one party's phase gate.
pub fn phase_encode(state: QubitState, task: TaskId, input: f64) -> Result<QubitState> {
    let mut s = state;
    match task {
        TaskId::A => {
            if !(input == 0.0 || input == 1.0 || input == 2.0 || input == 3.0) {
                return Err(Error::InvalidParameter {
                    name: "X_k",
                    value: input,
                    reason: "task A inputs are the digits 0..=3",
                });
            }
            s.apply_quarter_turns(PhaseZ4::new(input as u64));
        }
        TaskId::B => {
            if !(0.0..2.0 * PI).contains(&input) {
                return Err(Error::AngleOutOfRange {
                    party: 0,
                    value: input,
                });
            }
            s.apply_phase(input);
        }
    }
    Ok(s)
}

/// `P(+-) = |<+-|psi>|^2 = |amp0 +- amp1|^2 / 2`.
pub fn measure_probabilities(state: &QubitState) -> Result<(f64, f64)> {
    state.check_normalized()?;
    let plus = (state.amp0 + state.amp1).norm_sqr() / 2.0;
    let minus = (state.amp0 - state.amp1).norm_sqr() / 2.0;
    Ok((plus, minus))
}

/// Bookkeeping of one pass of the qubit through all parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transcript {
    /// `(P(+), P(-))` before the final measurement.
    pub probabilities: (f64, f64),
    /// `cos` of the accumulated phase, i.e. `P(+) - P(-)`.
    pub expectation: f64,
    pub phase_encodings: usize,
    /// Times the qubit changes hands: `N - 1`.
    pub transmissions: usize,
    pub measurements: usize,
}

/// Task A pipeline on the quarter-turn register.
pub fn accumulate_a(digits: &[u8]) -> PhaseZ4 {
    digits.iter().fold(PhaseZ4::default(), |acc, &d| {
        acc + PhaseZ4::new(u64::from(d))
    })
}

/// Run every party's encoding and stop just before the measurement.
pub fn run_pipeline(input: &InputTuple) -> Result<Transcript> {
    let n = input.parties();
    let (probabilities, expectation) = match input {
        InputTuple::A(x) => {
            let phase = accumulate_a(x.digits());
            (phase.probabilities(), f64::from(phase.cos()))
        }
        InputTuple::B(x) => {
            let state = x
                .angles()
                .iter()
                .try_fold(initial_state(), |s, &v| phase_encode(s, TaskId::B, v))?;
            let (plus, minus) = measure_probabilities(&state)?;
            ((plus, minus), plus - minus)
        }
    };
    Ok(Transcript {
        probabilities,
        expectation,
        phase_encodings: n,
        transmissions: n - 1,
        measurements: 1,
    })
}

/// One noisy run: outcome `+1` with probability `(1 + V cos(sum phi)) / 2`.
pub fn run_quantum(input: &InputTuple, visibility: f64, rng: &mut RandomStream) -> Result<Sign> {
    check_visibility(visibility)?;
    let t = run_pipeline(input)?;
    let p_plus = if visibility == 1.0 {
        t.probabilities.0
    } else {
        (1.0 + visibility * t.expectation) / 2.0
    };
    Ok(Sign::from_bool(rng.random::<f64>() < p_plus))
}

pub(crate) fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter {
            name: "visibility",
            value: v,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// Ideal fidelity: 1 for A, `pi/4` for B, for any `N`.
pub fn quantum_fidelity(task: TaskId, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoParties);
    }
    Ok(match task {
        TaskId::A => 1.0,
        TaskId::B => PI / 4.0,
    })
}

/// Success probability `(1 + F) / 2` of the ideal protocol.
pub fn quantum_success(task: TaskId, n: usize) -> Result<f64> {
    quantum_fidelity(task, n).map(|f| (1.0 + f) / 2.0)
}
