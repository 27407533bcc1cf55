//! Sequential Markov redaction: release each sample only with the
//! probability that keeps the posterior of the protected initial state flat,
//! which turns out to erase a random prefix of the trajectory.
//!
//! The mechanism is driven by the overlap table
//! `alpha_t = sum_v min_u P^t(u, v)`; the erased-prefix length `T` has law
//! `P(T = t) = alpha_t - alpha_{t-1}` for `t <= N`, with the `N + 1` atom
//! `1 - alpha_N` covering "nothing released within the horizon". The
//! per-step release probabilities come from the conditional kernels
//! `C_t(u, v) = P(X_t = v | X_0 = u, first t outputs erased)`, built by the
//! recursion `C_{t+1} = ((C_t - 1 m_t^T) P) / (1 - s_t)` with
//! `m_t(v) = min_u C_t(u, v)` and `s_t = sum_v m_t(v)`.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::uniform_unit;
use crate::trajectory::Trajectory;

/// Tables may dip below monotone by at most this much before it is an error.
const MONOTONE_TOLERANCE: f64 = 1e-9;

/// `1 - s_t` at or below this terminates the kernel recursion.
const TERMINATION_FLOOR: f64 = 1e-12;

/// One released symbol: a state index or the erasure marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputSymbol {
    Erased,
    State(usize),
}

impl OutputSymbol {
    pub fn is_erased(&self) -> bool {
        matches!(self, OutputSymbol::Erased)
    }
}

/// A released trajectory whose erasures form exactly the prefix
/// `[0, window)`; all other symbols match the source trajectory.
/// `window == 0` is the identity (unredacted) case used by negative-control
/// mechanisms only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactedTrajectory {
    symbols: Vec<OutputSymbol>,
    window: usize,
}

impl RedactedTrajectory {
    /// Erase the prefix `[0, window)` of `x`; `window` is capped at `N + 1`.
    pub fn from_window(x: &Trajectory, window: usize) -> Self {
        let len = x.horizon() + 1;
        let window = window.min(len);
        let symbols = (0..len)
            .map(|t| {
                if t < window {
                    OutputSymbol::Erased
                } else {
                    OutputSymbol::State(x.state(t))
                }
            })
            .collect();
        RedactedTrajectory { symbols, window }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn symbols(&self) -> &[OutputSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of erased positions; equals the window length by the prefix
    /// invariant.
    pub fn erasure_count(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_erased()).count()
    }
}

/// Distribution of a prefix-erasure stop time over `{1, ..., N + 1}`, where
/// the `N + 1` atom absorbs "not stopped within the horizon".
#[derive(Debug, Clone, PartialEq)]
pub struct StopTimeLaw {
    probs: Vec<f64>,
    horizon: usize,
}

impl StopTimeLaw {
    pub(crate) fn from_probs(probs: Vec<f64>, horizon: usize) -> Self {
        debug_assert_eq!(probs.len(), horizon + 1);
        StopTimeLaw { probs, horizon }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `P(T = t)` for `t` in `1..=horizon + 1`; zero elsewhere.
    pub fn prob(&self, t: usize) -> f64 {
        if t >= 1 && t <= self.horizon + 1 {
            self.probs[t - 1]
        } else {
            0.0
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `E[min(T, N + 1)]`.
    pub fn mean_capped(&self) -> f64 {
        self.atoms().map(|(t, p)| t as f64 * p).sum()
    }
}

/// Overlap table `alpha_t = sum_v min_u P^t(u, v)` for `t = 0..=N`.
///
/// Nondecreasing in `t` and zero at `t = 0` for chains with at least two
/// states; fully determined by the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    alpha: Vec<f64>,
    horizon: usize,
}

/// Build the overlap table up to `horizon`.
pub fn alpha_table(chain: &TransitionMatrix, horizon: usize) -> Result<AlphaTable> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::DegenerateStateSpace);
    }
    let mut alpha = Vec::with_capacity(horizon + 1);
    let mut power = Matrix::identity(n);
    for t in 0..=horizon {
        let mut a: f64 = (0..n).map(|v| power.column_min(v)).sum();
        if let Some(&prev) = alpha.last()
            && a < prev
        {
            let drop = prev - a;
            if drop > MONOTONE_TOLERANCE {
                return Err(Error::NonMonotoneTable { time: t, drop });
            }
            a = prev;
        }
        if a > 1.0 {
            if a > 1.0 + MONOTONE_TOLERANCE {
                return Err(Error::TableOutOfRange { time: t, value: a });
            }
            a = 1.0;
        }
        alpha.push(a);
        if t < horizon {
            power = power.matmul(chain.matrix());
        }
    }
    Ok(AlphaTable { alpha, horizon })
}

impl AlphaTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn value(&self, t: usize) -> f64 {
        self.alpha[t]
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    /// Marginal law of the window length: `P(T = t) = alpha_t - alpha_{t-1}`
    /// for `t <= N`, completed by `P(T = N + 1) = 1 - alpha_N`.
    pub fn window_distribution(&self) -> StopTimeLaw {
        let mut probs = Vec::with_capacity(self.horizon + 1);
        for t in 1..=self.horizon {
            probs.push((self.alpha[t] - self.alpha[t - 1]).max(0.0));
        }
        probs.push((1.0 - self.alpha[self.horizon]).max(0.0));
        StopTimeLaw::from_probs(probs, self.horizon)
    }

    /// Survival ratio `P(Y_t = * | Y_{t-1} = *) = (1 - alpha_t) / (1 - alpha_{t-1})`.
    pub fn hazard_ratio(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                available: self.horizon,
            });
        }
        let denom = 1.0 - self.alpha[t - 1];
        if denom <= TERMINATION_FLOOR {
            return Err(Error::UndefinedConditioning { time: t });
        }
        Ok(((1.0 - self.alpha[t]) / denom).clamp(0.0, 1.0))
    }

    /// Exact expected erasure count through the horizon: `sum_t (1 - alpha_t)`.
    pub fn distortion(&self) -> f64 {
        self.alpha.iter().map(|a| 1.0 - a).sum()
    }
}

/// Window-length law determined by the chain alone (no trajectory needed).
pub fn window_distribution(chain: &TransitionMatrix, horizon: usize) -> Result<StopTimeLaw> {
    Ok(alpha_table(chain, horizon)?.window_distribution())
}

/// Survival ratio at time `t`, from a fresh overlap table.
pub fn hazard_ratio(chain: &TransitionMatrix, t: usize) -> Result<f64> {
    alpha_table(chain, t)?.hazard_ratio(t)
}

/// Exact expected Hamming distortion of the sequential mechanism through
/// horizon `N`: `sum_{t=0}^{N} (1 - alpha_t)`.
pub fn smr_distortion(chain: &TransitionMatrix, horizon: usize) -> Result<f64> {
    Ok(alpha_table(chain, horizon)?.distortion())
}

/// Conditional kernels `C_t(u, v) = P(X_t = v | X_0 = u, Y_{[0:t-1]} = all *)`
/// together with their overlap masses `s_t = sum_v min_u C_t(u, v)`.
///
/// The recursion stops early at the first `t` with `s_t = 1` (equivalently
/// `alpha_t = 1`): from that point every reachable sample is released with
/// probability one, so later all-erased conditionings have probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernelSequence {
    kernels: Vec<Matrix>,
    s: Vec<f64>,
    horizon: usize,
}

/// Build the kernel sequence up to `horizon` (or the termination point).
///
/// Each step is cross-checked against the closed form
/// `C_t(u, w) = (P^t(u, w) - sum_v P(v, w) m_{t-1}(v)) / (1 - alpha_{t-1})`
/// with `m_{t-1}(v) = min_u P^{t-1}(u, v)`, which pins the recursion to the
/// unconditional matrix powers.
pub fn conditional_kernels(
    chain: &TransitionMatrix,
    horizon: usize,
) -> Result<ConditionalKernelSequence> {
    let n = chain.n();
    if n < 2 {
        return Err(Error::DegenerateStateSpace);
    }
    let mut kernels = vec![Matrix::identity(n)];
    let mut s = Vec::new();
    let mut power = Matrix::identity(n); // P^t alongside kernels[t]
    loop {
        let t = kernels.len() - 1;
        let current = &kernels[t];
        let mins: Vec<f64> = (0..n).map(|v| current.column_min(v)).collect();
        let st: f64 = mins.iter().sum();
        s.push(st);
        if t == horizon || 1.0 - st <= TERMINATION_FLOOR {
            break;
        }
        let mut next = Matrix::zeros(n);
        for u in 0..n {
            for w in 0..n {
                let mut acc = 0.0;
                for v in 0..n {
                    acc += (current.get(u, v) - mins[v]) * chain.entry(v, w);
                }
                next.set(u, w, acc / (1.0 - st));
            }
        }
        // The division by 1 - s_t amplifies rounding by 1 / (1 - alpha_t),
        // the reciprocal of the remaining survival mass. Check the row sums
        // in un-amplified units and renormalize to keep the kernel exactly
        // stochastic for the release-probability ratios.
        let power_mins: Vec<f64> = (0..n).map(|v| power.column_min(v)).collect();
        let alpha_t: f64 = power_mins.iter().sum::<f64>().min(1.0);
        for u in 0..n {
            let sum: f64 = next.row(u).iter().sum();
            let drift = (sum - 1.0).abs() * (1.0 - alpha_t);
            if drift > 1e-12 {
                return Err(Error::CrossCheckFailed {
                    what: "kernel row stochasticity",
                    deviation: drift,
                });
            }
            for w in 0..n {
                next.set(u, w, next.get(u, w) / sum);
            }
        }
        // Closed-form check against unconditional powers:
        // (1 - alpha_t) C_{t+1}(u, w) = P^{t+1}(u, w) - sum_v P(v, w) m_t(v)
        // with m_t(v) = min_u P^t(u, v) and alpha_t = sum_v m_t(v). Compared
        // in this proportional form so a small 1 - alpha_t cannot amplify
        // rounding.
        let next_power = power.matmul(chain.matrix());
        let mut deviation = 0.0f64;
        for u in 0..n {
            for w in 0..n {
                let conv: f64 = (0..n).map(|v| chain.entry(v, w) * power_mins[v]).sum();
                let direct = next_power.get(u, w) - conv;
                let d = (next.get(u, w) * (1.0 - alpha_t) - direct).abs();
                if d > deviation {
                    deviation = d;
                }
            }
        }
        if deviation > 1e-10 {
            return Err(Error::CrossCheckFailed {
                what: "kernel closed form",
                deviation,
            });
        }
        power = next_power;
        kernels.push(next);
    }
    Ok(ConditionalKernelSequence {
        kernels,
        s,
        horizon,
    })
}

impl ConditionalKernelSequence {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of computed kernels (`horizon + 1`, or less after termination).
    pub fn computed_len(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernel(&self, t: usize) -> Option<&Matrix> {
        self.kernels.get(t)
    }

    pub fn s_value(&self, t: usize) -> Option<f64> {
        self.s.get(t).copied()
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s
    }

    /// Index of the first deterministic-release step, if the recursion
    /// terminated within the horizon.
    pub fn terminated_at(&self) -> Option<usize> {
        let last = *self.s.last().expect("at least one kernel");
        (1.0 - last <= TERMINATION_FLOOR).then_some(self.kernels.len() - 1)
    }

    /// Release probability `q_t = min_u C_t(u, x_t) / C_t(x0, x_t)` under an
    /// all-erased history (the only conditioning this mechanism can reach
    /// before its first release). `q_0 = 0`; at the termination step the
    /// release is deterministic and the value is exactly 1.
    pub fn release_probability(&self, t: usize, x0: usize, xt: usize) -> Result<f64> {
        let n = self.kernels[0].n();
        if x0 >= n {
            return Err(Error::StateOutOfRange { state: x0, n });
        }
        if xt >= n {
            return Err(Error::StateOutOfRange { state: xt, n });
        }
        if t > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: t,
                available: self.horizon,
            });
        }
        if t == 0 {
            return if xt == x0 {
                Ok(0.0)
            } else {
                Err(Error::ImpossiblePath { time: 0, state: xt })
            };
        }
        if t >= self.kernels.len() {
            return Err(Error::UnreachableConditioning { time: t });
        }
        let kernel = &self.kernels[t];
        let denom = kernel.get(x0, xt);
        if denom <= 1e-15 {
            return Err(Error::ImpossiblePath { time: t, state: xt });
        }
        if 1.0 - self.s[t] <= TERMINATION_FLOOR {
            return Ok(1.0);
        }
        Ok((kernel.column_min(xt) / denom).clamp(0.0, 1.0))
    }

    /// Exact window law conditional on a realized trajectory:
    /// `P(T = t | x) = prod_{k<t} (1 - q_k) * q_t`, with the `N + 1` atom
    /// absorbing the leftover survival mass.
    pub fn window_law_conditional(&self, x: &Trajectory) -> Result<StopTimeLaw> {
        let horizon = x.horizon();
        if horizon > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: horizon,
                available: self.horizon,
            });
        }
        let mut probs = vec![0.0; horizon + 1];
        let mut survival = 1.0f64;
        for t in 1..=horizon {
            if survival <= 0.0 {
                break;
            }
            let q = self.release_probability(t, x.start(), x.state(t))?;
            probs[t - 1] = survival * q;
            survival *= 1.0 - q;
        }
        probs[horizon] = survival.max(0.0);
        Ok(StopTimeLaw::from_probs(probs, horizon))
    }
}

/// Run the sequential mechanism on a trajectory: while the history is all
/// erased, release `X_t` with probability `q_t`; the first release fixes the
/// window and everything after it is released verbatim. One uniform variate
/// is consumed per step until the first release (`t = 0` never releases and
/// consumes none).
pub fn run_smr(
    x: &Trajectory,
    kernels: &ConditionalKernelSequence,
    rng: &mut impl RngCore,
) -> Result<RedactedTrajectory> {
    let horizon = x.horizon();
    if horizon > kernels.horizon() {
        return Err(Error::HorizonExceeded {
            requested: horizon,
            available: kernels.horizon(),
        });
    }
    let mut window = horizon + 1;
    for t in 1..=horizon {
        let q = kernels.release_probability(t, x.start(), x.state(t))?;
        if uniform_unit(rng) < q {
            window = t;
            break;
        }
    }
    Ok(RedactedTrajectory::from_window(x, window))
}
