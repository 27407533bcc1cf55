//! Redaction up to a strong stationary time.
//!
//! The stopping rule is the classical optimal construction from separation
//! values: with `a_t = min_x P^t(x0, x) / pi(x)`, stop at the first `t >= 1`
//! whose uniform variate falls below the hazard
//! `(a_t - a_{t-1}) / (P^t(x0, X_t) / pi(X_t) - a_{t-1})`. Stopping at `t`
//! in state `y` then has probability exactly `pi(y) (a_t - a_{t-1})`, so the
//! stopped state is stationary and independent of the stopping time. The
//! mechanism erases the prefix `[0, tau)` and releases the rest; its privacy
//! rests on the separation values not depending on the start state.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::chain::{POSITIVE_MASS_FLOOR, ProbabilityVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::uniform_unit;
use crate::smr::{RedactedTrajectory, StopTimeLaw};
use crate::trajectory::Trajectory;

const MONOTONE_TOLERANCE: f64 = 1e-9;
const HAZARD_SLACK: f64 = 1e-9;

/// Separation values `a[x0][t] = min_x P^t(x0, x) / pi(x)` for `t = 0..=N`,
/// kept together with the ratio matrices that drive the stopping hazards.
///
/// Each row is nondecreasing in `t`, starts at 0 (for two or more states),
/// and is capped at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationTable {
    a: Vec<Vec<f64>>,
    ratios: Vec<Matrix>,
    pi: ProbabilityVector,
    horizon: usize,
}

/// Build the separation table for `chain` under stationary distribution `pi`.
pub fn separation_table(
    chain: &TransitionMatrix,
    pi: &ProbabilityVector,
    horizon: usize,
) -> Result<SeparationTable> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::DegenerateStateSpace);
    }
    if pi.len() != n {
        return Err(Error::LengthMismatch {
            left: pi.len(),
            right: n,
        });
    }
    for x in 0..n {
        if pi.weight(x) <= POSITIVE_MASS_FLOOR {
            return Err(Error::ZeroStationaryMass {
                state: String::from(chain.states().label(x)),
            });
        }
    }
    let mut a = vec![Vec::with_capacity(horizon + 1); n];
    let mut ratios = Vec::with_capacity(horizon + 1);
    let mut power = Matrix::identity(n);
    for t in 0..=horizon {
        let mut ratio = Matrix::zeros(n);
        for x0 in 0..n {
            for y in 0..n {
                ratio.set(x0, y, power.get(x0, y) / pi.weight(y));
            }
        }
        for (x0, row) in a.iter_mut().enumerate() {
            let mut value = ratio.row_min(x0);
            if let Some(&prev) = row.last()
                && value < prev
            {
                let drop = prev - value;
                if drop > MONOTONE_TOLERANCE {
                    return Err(Error::NonMonotoneTable { time: t, drop });
                }
                value = prev;
            }
            if value > 1.0 {
                if value > 1.0 + MONOTONE_TOLERANCE {
                    return Err(Error::TableOutOfRange { time: t, value });
                }
                value = 1.0;
            }
            row.push(value);
        }
        ratios.push(ratio);
        if t < horizon {
            power = power.matmul(chain.matrix());
        }
    }
    Ok(SeparationTable {
        a,
        ratios,
        pi: pi.clone(),
        horizon,
    })
}

impl SeparationTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn value(&self, x0: usize, t: usize) -> f64 {
        self.a[x0][t]
    }

    pub fn stationary(&self) -> &ProbabilityVector {
        &self.pi
    }

    /// Largest spread `max_x0 a[x0][t] - min_x0 a[x0][t]` over the horizon:
    /// zero spread means the stopping law cannot depend on the start state.
    pub fn spread(&self) -> f64 {
        let mut worst = 0.0f64;
        for t in 0..=self.horizon {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for row in &self.a {
                lo = lo.min(row[t]);
                hi = hi.max(row[t]);
            }
            worst = worst.max(hi - lo);
        }
        worst
    }

    /// Stopping hazard at time `t >= 1` for a trajectory started at `x0` and
    /// currently in `y`. The construction keeps this in [0, 1]; 0/0 (no
    /// stopping mass left at `t`) is defined as 0.
    pub fn hazard(&self, t: usize, x0: usize, y: usize) -> Result<f64> {
        if t == 0 || t > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                available: self.horizon,
            });
        }
        let prev = self.a[x0][t - 1];
        let numerator = self.a[x0][t] - prev;
        let denominator = self.ratios[t].get(x0, y) - prev;
        if denominator <= 1e-15 {
            if numerator <= 1e-12 {
                return Ok(0.0);
            }
            return Err(Error::HazardOutOfRange {
                time: t,
                value: numerator / denominator,
            });
        }
        let hazard = numerator / denominator;
        if !(-HAZARD_SLACK..=1.0 + HAZARD_SLACK).contains(&hazard) {
            return Err(Error::HazardOutOfRange {
                time: t,
                value: hazard,
            });
        }
        Ok(hazard.clamp(0.0, 1.0))
    }
}

/// Outcome of the applicability checks for the stationary-time mechanism.
///
/// The operative check is what the privacy argument actually needs: the
/// separation values must not depend on the start state. The structural
/// check (doubly stochastic with uniform stationary distribution) is a
/// necessary consequence of transitive invariance and is reported alongside,
/// but the verdict follows the operative check alone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SstApplicability {
    pub doubly_stochastic: bool,
    pub uniform_stationary: bool,
    pub structural: bool,
    pub max_spread: f64,
    pub operative: bool,
    pub applicable: bool,
    pub tolerance: f64,
}

/// Run both applicability checks up to `horizon` at tolerance `tol`.
pub fn check_sst_applicability(
    chain: &TransitionMatrix,
    horizon: usize,
    tol: f64,
) -> Result<SstApplicability> {
    let n = chain.n();
    let pi = chain.stationary_distribution()?.distribution;
    let table = separation_table(chain, &pi, horizon)?;
    let doubly_stochastic = (0..n).all(|j| {
        let s: f64 = (0..n).map(|i| chain.entry(i, j)).sum();
        (s - 1.0).abs() <= tol
    });
    let uniform = 1.0 / n as f64;
    let uniform_stationary = (0..n).all(|i| (pi.weight(i) - uniform).abs() <= tol);
    let max_spread = table.spread();
    let operative = max_spread <= tol;
    Ok(SstApplicability {
        doubly_stochastic,
        uniform_stationary,
        structural: doubly_stochastic && uniform_stationary,
        max_spread,
        operative,
        applicable: operative,
        tolerance: tol,
    })
}

/// A redacted trajectory together with the realized stopping time
/// `tau` in `[1, N + 1]`, where `N + 1` encodes "not stopped within the
/// horizon" (everything erased).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SstRedaction {
    pub released: RedactedTrajectory,
    pub tau: usize,
}

/// Sample the stopping time along `x` and erase the prefix `[0, tau)`.
/// Uniform variates are consumed strictly in time order, one per step until
/// the stop, so `(trajectory, tau)` pairs are reproducible under one seed.
pub fn sample_sst_redaction(
    x: &Trajectory,
    table: &SeparationTable,
    rng: &mut impl RngCore,
) -> Result<SstRedaction> {
    let horizon = x.horizon();
    if horizon > table.horizon() {
        return Err(Error::HorizonExceeded {
            requested: horizon,
            available: table.horizon(),
        });
    }
    let x0 = x.start();
    let mut tau = horizon + 1;
    for t in 1..=horizon {
        let hazard = table.hazard(t, x0, x.state(t))?;
        if uniform_unit(rng) < hazard {
            tau = t;
            break;
        }
    }
    Ok(SstRedaction {
        released: RedactedTrajectory::from_window(x, tau),
        tau,
    })
}

/// Exact conditional stopping law along a realized trajectory:
/// `P(tau = t | x) = prod_{s<t} (1 - r_s(x_s)) * r_t(x_t)`, with the
/// `N + 1` atom absorbing the remainder.
pub fn sst_stop_law(x: &Trajectory, table: &SeparationTable) -> Result<StopTimeLaw> {
    let horizon = x.horizon();
    if horizon > table.horizon() {
        return Err(Error::HorizonExceeded {
            requested: horizon,
            available: table.horizon(),
        });
    }
    let x0 = x.start();
    let mut probs = vec![0.0; horizon + 1];
    let mut survival = 1.0f64;
    for t in 1..=horizon {
        if survival <= 0.0 {
            break;
        }
        let hazard = table.hazard(t, x0, x.state(t))?;
        probs[t - 1] = survival * hazard;
        survival *= 1.0 - hazard;
    }
    probs[horizon] = survival.max(0.0);
    Ok(StopTimeLaw::from_probs(probs, horizon))
}

/// Expected Hamming distortion of the stationary-time mechanism started at
/// `x0`, truncated at horizon `N`:
/// `sum_{t=0}^{N} (1 - |X| min_x P^t(x0, x))`.
pub fn sst_distortion(chain: &TransitionMatrix, x0: usize, horizon: usize) -> Result<f64> {
    let n = chain.n();
    if x0 >= n {
        return Err(Error::StateOutOfRange { state: x0, n });
    }
    let pi = chain.stationary_distribution()?.distribution;
    if !pi.strictly_positive() {
        let x = (0..n)
            .find(|&i| pi.weight(i) <= POSITIVE_MASS_FLOOR)
            .expect("some mass is zero");
        return Err(Error::ZeroStationaryMass {
            state: String::from(chain.states().label(x)),
        });
    }
    let mut total = 0.0;
    let mut power = Matrix::identity(n);
    for t in 0..=horizon {
        total += 1.0 - n as f64 * power.row_min(x0);
        if t < horizon {
            power = power.matmul(chain.matrix());
        }
    }
    Ok(total)
}
