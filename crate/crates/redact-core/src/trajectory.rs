//! Realized chain paths and their sampling.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::chain::{ProbabilityVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::uniform_unit;

/// A realized path `X_0, X_1, ..., X_N` of state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    states: Vec<usize>,
}

impl Trajectory {
    pub fn new(states: Vec<usize>, n: usize) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        for &s in &states {
            if s >= n {
                return Err(Error::StateOutOfRange { state: s, n });
            }
        }
        Ok(Trajectory { states })
    }

    /// Number of steps; the path has `horizon + 1` entries.
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    #[inline]
    pub fn state(&self, t: usize) -> usize {
        self.states[t]
    }

    pub fn start(&self) -> usize {
        self.states[0]
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }
}

/// Initial condition for trajectory sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Fixed(usize),
    Random(ProbabilityVector),
}

/// Draw an index from `weights` with a single uniform variate.
pub(crate) fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave acc a hair under 1; land on the last viable state.
    last_positive
}

/// Sample `X_0` from `start` and then `X_{t+1}` from row `X_t`, consuming
/// one uniform per draw in time order. Deterministic given the RNG state.
pub fn sample_trajectory(
    chain: &TransitionMatrix,
    start: &Start,
    horizon: usize,
    rng: &mut impl RngCore,
) -> Result<Trajectory> {
    let n = chain.n();
    let first = match start {
        Start::Fixed(s) => {
            if *s >= n {
                return Err(Error::StateOutOfRange { state: *s, n });
            }
            *s
        }
        Start::Random(pv) => {
            if pv.len() != n {
                return Err(Error::LengthMismatch {
                    left: pv.len(),
                    right: n,
                });
            }
            sample_index(pv.weights(), uniform_unit(rng))
        }
    };
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(first);
    for _ in 0..horizon {
        let cur = *states.last().expect("non-empty");
        let next = sample_index(chain.row(cur), uniform_unit(rng));
        states.push(next);
    }
    Ok(Trajectory { states })
}
