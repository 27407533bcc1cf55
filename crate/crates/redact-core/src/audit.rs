//! Exact, enumeration-based privacy audits: build the full output channel of
//! a mechanism, measure mutual information with the protected initial state,
//! and compare conditional output laws across start states.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

// Inherent float math is std-only; route through the trait in no_std builds.
#[allow(unused_imports)]
use num_traits::Float;

use rand_core::RngCore;

use crate::chain::{ProbabilityVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::{RngStream, uniform_unit};
use crate::smr::{
    ConditionalKernelSequence, OutputSymbol, RedactedTrajectory, conditional_kernels, run_smr,
};
use crate::sst::{SeparationTable, sample_sst_redaction, separation_table};
use crate::trajectory::{Start, Trajectory, sample_index, sample_trajectory};

/// Exact enumeration refuses to visit more than this many weighted atoms.
pub const ENUMERATION_GUARD: f64 = 1e7;

/// Default pass thresholds for the audit verdict.
pub const DEFAULT_MI_TOLERANCE_BITS: f64 = 1e-10;
pub const DEFAULT_TV_TOLERANCE: f64 = 1e-10;

const MC_TRIALS_FLOOR: usize = 1_000;

/// Mechanism under audit. `FixedWindow(k)` deterministically erases the
/// prefix `[0, k)` and exists as a negative control; `FixedWindow(0)` is the
/// identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    Sst,
    Smr,
    FixedWindow(usize),
}

impl Mechanism {
    pub fn id(&self) -> String {
        match self {
            Mechanism::Sst => String::from("sst"),
            Mechanism::Smr => String::from("smr"),
            Mechanism::FixedWindow(k) => format!("fixed-window({k})"),
        }
    }
}

impl core::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.id())
    }
}

/// An output string: one symbol per time step.
pub type OutputString = Vec<OutputSymbol>;

// Compensated accumulator so that enumeration order cannot leak into the
// aggregated channel beyond 1e-15.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Exact map from each start state to its distribution over released output
/// strings.
#[derive(Debug, Clone)]
pub struct OutputChannel {
    per_start: Vec<BTreeMap<OutputString, f64>>,
    horizon: usize,
    mechanism: Mechanism,
}

/// Enumerate every trajectory from every start state, weight it by its path
/// probability, mix in the mechanism's exact per-trajectory stop law, and
/// aggregate by output string. Guarded by [`ENUMERATION_GUARD`] on
/// `n^(N+1)`.
pub fn exact_output_channel(
    mechanism: Mechanism,
    chain: &TransitionMatrix,
    horizon: usize,
) -> Result<OutputChannel> {
    let n = chain.n();
    let atoms = (n as f64).powi(horizon as i32 + 1);
    if atoms > ENUMERATION_GUARD {
        return Err(Error::EnumerationTooLarge {
            atoms,
            limit: ENUMERATION_GUARD,
        });
    }
    let driver = MechanismDriver::prepare(mechanism, chain, horizon)?;
    let mut per_start = Vec::with_capacity(n);
    for x0 in 0..n {
        let mut acc: BTreeMap<OutputString, Kahan> = BTreeMap::new();
        let mut path = vec![x0];
        visit_paths(chain, &mut path, 1.0, horizon, &mut |states, weight| {
            driver.for_each_window(states, |window, mass| {
                if mass > 0.0 {
                    let key = output_string(states, window);
                    acc.entry(key).or_default().add(weight * mass);
                }
            })
        })?;
        let conditional: BTreeMap<OutputString, f64> =
            acc.into_iter().map(|(k, v)| (k, v.sum)).collect();
        let total: f64 = conditional.values().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::CrossCheckFailed {
                what: "channel normalization",
                deviation: (total - 1.0).abs(),
            });
        }
        per_start.push(conditional);
    }
    Ok(OutputChannel {
        per_start,
        horizon,
        mechanism,
    })
}

fn output_string(states: &[usize], window: usize) -> OutputString {
    states
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            if t < window {
                OutputSymbol::Erased
            } else {
                OutputSymbol::State(s)
            }
        })
        .collect()
}

fn visit_paths(
    chain: &TransitionMatrix,
    path: &mut Vec<usize>,
    weight: f64,
    horizon: usize,
    f: &mut impl FnMut(&[usize], f64) -> Result<()>,
) -> Result<()> {
    if path.len() == horizon + 1 {
        return f(path, weight);
    }
    let cur = *path.last().expect("path starts non-empty");
    for v in 0..chain.n() {
        let step = chain.entry(cur, v);
        if step > 0.0 {
            path.push(v);
            visit_paths(chain, path, weight * step, horizon, f)?;
            path.pop();
        }
    }
    Ok(())
}

/// A mechanism with its tables prebuilt for one chain at a fixed horizon,
/// ready to redact sampled trajectories.
#[derive(Debug, Clone)]
pub struct MechanismSampler {
    driver: MechanismDriver,
}

impl MechanismSampler {
    pub fn prepare(mechanism: Mechanism, chain: &TransitionMatrix, horizon: usize) -> Result<Self> {
        Ok(MechanismSampler {
            driver: MechanismDriver::prepare(mechanism, chain, horizon)?,
        })
    }

    pub fn run(&self, x: &Trajectory, rng: &mut impl RngCore) -> Result<RedactedTrajectory> {
        self.driver.run(x, rng)
    }
}

#[derive(Debug, Clone)]
enum MechanismDriver {
    Sst(SeparationTable),
    Smr(ConditionalKernelSequence),
    FixedWindow(usize),
}

impl MechanismDriver {
    fn prepare(mechanism: Mechanism, chain: &TransitionMatrix, horizon: usize) -> Result<Self> {
        Ok(match mechanism {
            Mechanism::Sst => {
                let pi = chain.stationary_distribution()?.distribution;
                MechanismDriver::Sst(separation_table(chain, &pi, horizon)?)
            }
            Mechanism::Smr => MechanismDriver::Smr(conditional_kernels(chain, horizon)?),
            Mechanism::FixedWindow(k) => MechanismDriver::FixedWindow(k.min(horizon + 1)),
        })
    }

    /// Feed `(window, probability)` atoms of the stop law along `states` to
    /// `f`.
    fn for_each_window(&self, states: &[usize], mut f: impl FnMut(usize, f64)) -> Result<()> {
        let horizon = states.len() - 1;
        match self {
            MechanismDriver::FixedWindow(k) => {
                f((*k).min(horizon + 1), 1.0);
                Ok(())
            }
            MechanismDriver::Sst(table) => {
                let x0 = states[0];
                let mut survival = 1.0f64;
                for t in 1..=horizon {
                    if survival <= 0.0 {
                        break;
                    }
                    let hazard = table.hazard(t, x0, states[t])?;
                    f(t, survival * hazard);
                    survival *= 1.0 - hazard;
                }
                f(horizon + 1, survival.max(0.0));
                Ok(())
            }
            MechanismDriver::Smr(kernels) => {
                let x0 = states[0];
                let mut survival = 1.0f64;
                for t in 1..=horizon {
                    if survival <= 0.0 {
                        break;
                    }
                    let q = kernels.release_probability(t, x0, states[t])?;
                    f(t, survival * q);
                    survival *= 1.0 - q;
                }
                f(horizon + 1, survival.max(0.0));
                Ok(())
            }
        }
    }

    fn run(&self, x: &Trajectory, rng: &mut impl RngCore) -> Result<RedactedTrajectory> {
        match self {
            MechanismDriver::Sst(table) => Ok(sample_sst_redaction(x, table, rng)?.released),
            MechanismDriver::Smr(kernels) => run_smr(x, kernels, rng),
            MechanismDriver::FixedWindow(k) => Ok(RedactedTrajectory::from_window(x, *k)),
        }
    }
}

impl OutputChannel {
    pub fn n(&self) -> usize {
        self.per_start.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn mechanism(&self) -> Mechanism {
        self.mechanism
    }

    pub fn conditional(&self, x0: usize) -> &BTreeMap<OutputString, f64> {
        &self.per_start[x0]
    }

    /// Plug-in mutual information `I(X0; Y)` in bits under `prior`, with the
    /// `0 log 0 = 0` convention. The prior must give positive weight to
    /// every state.
    pub fn mutual_information(&self, prior: &ProbabilityVector) -> Result<f64> {
        let n = self.n();
        if prior.len() != n {
            return Err(Error::LengthMismatch {
                left: prior.len(),
                right: n,
            });
        }
        if let Some(x0) = (0..n).find(|&i| prior.weight(i) <= 0.0) {
            return Err(Error::PriorSupport { state: x0 });
        }
        let mut mixture: BTreeMap<&OutputString, f64> = BTreeMap::new();
        for x0 in 0..n {
            for (y, p) in &self.per_start[x0] {
                *mixture.entry(y).or_insert(0.0) += prior.weight(x0) * p;
            }
        }
        let mut bits = 0.0f64;
        for x0 in 0..n {
            let px = prior.weight(x0);
            for (y, p) in &self.per_start[x0] {
                if *p > 0.0 {
                    let joint = px * p;
                    bits += joint * (joint / (px * mixture[y])).log2();
                }
            }
        }
        // The plug-in value is nonnegative; wash out rounding noise only.
        if bits < 0.0 {
            if bits < -1e-12 {
                return Err(Error::CrossCheckFailed {
                    what: "mutual information nonnegativity",
                    deviation: -bits,
                });
            }
            bits = 0.0;
        }
        Ok(bits)
    }

    /// Largest total-variation distance between the conditional output laws
    /// of any two start states. Prior-free leakage measure.
    pub fn max_pairwise_tv(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let mut acc = 0.0;
                for (y, p) in &self.per_start[i] {
                    acc += (p - self.per_start[j].get(y).unwrap_or(&0.0)).abs();
                }
                for (y, p) in &self.per_start[j] {
                    if !self.per_start[i].contains_key(y) {
                        acc += p.abs();
                    }
                }
                worst = worst.max(0.5 * acc);
            }
        }
        worst.min(1.0)
    }

    /// Coarsen each output to its erased-prefix length. Data processing:
    /// the coarsened channel can never leak more than the full one.
    pub fn coarsen_to_prefix_length(&self) -> OutputChannel {
        let per_start = self
            .per_start
            .iter()
            .map(|cond| {
                let mut out: BTreeMap<OutputString, f64> = BTreeMap::new();
                for (y, p) in cond {
                    let t = y.iter().take_while(|s| s.is_erased()).count();
                    *out.entry(vec![OutputSymbol::Erased; t]).or_insert(0.0) += p;
                }
                out
            })
            .collect();
        OutputChannel {
            per_start,
            horizon: self.horizon,
            mechanism: self.mechanism,
        }
    }
}

/// Verdict record for one exact audit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AuditReport {
    pub mechanism_id: String,
    pub horizon: usize,
    pub prior_used: ProbabilityVector,
    pub mutual_information_bits: f64,
    pub max_pairwise_tv: f64,
    pub tol_mi: f64,
    pub tol_tv: f64,
    pub pass: bool,
}

/// Exact audit: the verdict passes only when both the mutual information and
/// the worst pairwise total variation sit below their tolerances.
pub fn audit_privacy(
    mechanism: Mechanism,
    chain: &TransitionMatrix,
    horizon: usize,
    prior: &ProbabilityVector,
    tol_mi: f64,
    tol_tv: f64,
) -> Result<AuditReport> {
    let channel = exact_output_channel(mechanism, chain, horizon)?;
    let mutual_information_bits = channel.mutual_information(prior)?;
    let max_pairwise_tv = channel.max_pairwise_tv();
    Ok(AuditReport {
        mechanism_id: mechanism.id(),
        horizon,
        prior_used: prior.clone(),
        mutual_information_bits,
        max_pairwise_tv,
        tol_mi,
        tol_tv,
        pass: mutual_information_bits <= tol_mi && max_pairwise_tv <= tol_tv,
    })
}

/// Mutual information between the start state and the stopped pair
/// `(tau, X_tau)`, next to the full-channel value it must equal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StopPairAudit {
    pub stop_pair_bits: f64,
    pub channel_bits: f64,
}

impl StopPairAudit {
    pub fn gap(&self) -> f64 {
        (self.stop_pair_bits - self.channel_bits).abs()
    }
}

/// Exact `I(X0; (tau, X_tau))` from the forward mixture of the stopping
/// hazards over the path law, plus the full-channel `I(X0; Y)` for the
/// equivalence comparison. The two agree because the erased prefix encodes
/// exactly `tau` and the post-stop suffix is conditionally independent of
/// the start state.
pub fn audit_stop_pair(
    chain: &TransitionMatrix,
    horizon: usize,
    table: &SeparationTable,
    prior: &ProbabilityVector,
) -> Result<StopPairAudit> {
    let n = chain.n();
    if table.horizon() < horizon {
        return Err(Error::HorizonExceeded {
            requested: horizon,
            available: table.horizon(),
        });
    }
    // Atom layout per start state: (t, y) for t = 1..=N, then the tau = N+1
    // remainder.
    let mut atoms: Vec<Vec<f64>> = Vec::with_capacity(n);
    for x0 in 0..n {
        let mut unstopped = vec![0.0; n];
        unstopped[x0] = 1.0;
        let mut row = vec![0.0; horizon * n + 1];
        for t in 1..=horizon {
            let mut reached = vec![0.0; n];
            for (z, mass) in unstopped.iter().enumerate() {
                if *mass > 0.0 {
                    for y in 0..n {
                        reached[y] += mass * chain.entry(z, y);
                    }
                }
            }
            for y in 0..n {
                let hazard = table.hazard(t, x0, y)?;
                row[(t - 1) * n + y] = reached[y] * hazard;
                unstopped[y] = reached[y] * (1.0 - hazard);
            }
        }
        row[horizon * n] = unstopped.iter().sum();
        atoms.push(row);
    }
    let stop_pair_bits = mutual_information_of_rows(&atoms, prior)?;
    let channel = exact_output_channel(Mechanism::Sst, chain, horizon)?;
    let channel_bits = channel.mutual_information(prior)?;
    Ok(StopPairAudit {
        stop_pair_bits,
        channel_bits,
    })
}

fn mutual_information_of_rows(rows: &[Vec<f64>], prior: &ProbabilityVector) -> Result<f64> {
    let n = rows.len();
    if prior.len() != n {
        return Err(Error::LengthMismatch {
            left: prior.len(),
            right: n,
        });
    }
    let width = rows[0].len();
    let mut mixture = vec![0.0; width];
    for (x0, row) in rows.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            mixture[j] += prior.weight(x0) * p;
        }
    }
    let mut bits = 0.0;
    for (x0, row) in rows.iter().enumerate() {
        let px = prior.weight(x0);
        if px <= 0.0 {
            continue;
        }
        for (j, p) in row.iter().enumerate() {
            let joint = px * p;
            if joint > 0.0 {
                bits += joint * (joint / (px * mixture[j])).log2();
            }
        }
    }
    Ok(bits.max(0.0))
}

/// Monte-Carlo mutual-information estimate with a jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct McMiEstimate {
    /// Plug-in estimate in bits; biased upward for finite samples.
    pub bits: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Sanity estimator: sample `(X0, Y)` pairs, form the plug-in mutual
/// information of the empirical joint, and attach a delete-one jackknife
/// standard error. Never a substitute for the exact audit.
pub fn mc_mi_estimate(
    mechanism: Mechanism,
    chain: &TransitionMatrix,
    horizon: usize,
    prior: &ProbabilityVector,
    trials: usize,
    stream: &RngStream,
) -> Result<McMiEstimate> {
    if trials < MC_TRIALS_FLOOR {
        return Err(Error::TooFewTrials {
            trials,
            minimum: MC_TRIALS_FLOOR,
        });
    }
    let n = chain.n();
    if prior.len() != n {
        return Err(Error::LengthMismatch {
            left: prior.len(),
            right: n,
        });
    }
    let driver = MechanismDriver::prepare(mechanism, chain, horizon)?;
    let mut counts: BTreeMap<(usize, OutputString), u64> = BTreeMap::new();
    for i in 0..trials {
        let mut rng = stream.substream(i as u64).rng();
        let x0 = sample_index(prior.weights(), uniform_unit(&mut rng));
        let x = sample_trajectory(chain, &Start::Fixed(x0), horizon, &mut rng)?;
        let released = driver.run(&x, &mut rng)?;
        *counts.entry((x0, released.symbols().to_vec())).or_insert(0) += 1;
    }
    let bits = plug_in_mi_from_counts(&counts, trials as f64, None);
    // Delete-one jackknife, grouped by distinct (x0, y) cell.
    let total = trials as f64;
    let mut weighted_sum = 0.0;
    let mut cell_values: Vec<(u64, f64)> = Vec::with_capacity(counts.len());
    for cell in counts.keys() {
        let value = plug_in_mi_from_counts(&counts, total - 1.0, Some(cell));
        let c = counts[cell];
        weighted_sum += c as f64 * value;
        cell_values.push((c, value));
    }
    let mean = weighted_sum / total;
    let mut var = 0.0;
    for (c, value) in cell_values {
        var += c as f64 * (value - mean) * (value - mean);
    }
    let std_error = ((total - 1.0) / total * var).sqrt();
    Ok(McMiEstimate {
        bits,
        std_error,
        trials,
    })
}

/// Plug-in MI of the empirical joint, with `leave_out` dropping one sample
/// of the given cell.
fn plug_in_mi_from_counts(
    counts: &BTreeMap<(usize, OutputString), u64>,
    total: f64,
    leave_out: Option<&(usize, OutputString)>,
) -> f64 {
    let mut x_marginal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut y_marginal: BTreeMap<&OutputString, f64> = BTreeMap::new();
    let mut cells: Vec<(usize, &OutputString, f64)> = Vec::with_capacity(counts.len());
    for ((x0, y), c) in counts {
        let mut c = *c as f64;
        if let Some((lx, ly)) = leave_out
            && lx == x0
            && ly == y
        {
            c -= 1.0;
        }
        if c <= 0.0 {
            continue;
        }
        let p = c / total;
        *x_marginal.entry(*x0).or_insert(0.0) += p;
        *y_marginal.entry(y).or_insert(0.0) += p;
        cells.push((*x0, y, p));
    }
    let mut bits = 0.0;
    for (x0, y, p) in cells {
        bits += p * (p / (x_marginal[&x0] * y_marginal[y])).log2();
    }
    bits.max(0.0)
}
