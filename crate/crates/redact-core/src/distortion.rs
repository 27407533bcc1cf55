//! Exact distortion curves, Monte-Carlo confirmation, and the spectral
//! upper bound `|X| / (2 sqrt(pi_min) (1 - sqrt(lambda)))` that shows the
//! expected number of erasures stays bounded as the horizon grows.

use alloc::string::String;
use alloc::vec::Vec;

// Inherent float math is std-only; route through the trait in no_std builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::audit::{Mechanism, MechanismSampler};
use crate::chain::{ProbabilityVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::{RngStream, uniform_unit};
use crate::smr::alpha_table;
use crate::sst::sst_distortion;
use crate::trajectory::{Start, sample_index, sample_trajectory};

/// Two-sided 99% normal quantile.
const Z_99: f64 = 2.5758293035489004;

const MC_TRIALS_FLOOR: usize = 1_000;

/// Spectral distortion bound together with the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectralBound {
    pub bound: f64,
    /// Second-largest eigenvalue of the multiplicative reversiblization.
    pub lambda: f64,
    pub pi_min: f64,
}

/// `|X| / (2 sqrt(pi_min) (1 - sqrt(lambda)))` for an ergodic chain.
pub fn spectral_bound(chain: &TransitionMatrix) -> Result<SpectralBound> {
    if !chain.is_ergodic() {
        return Err(Error::BoundUndefined);
    }
    let pi = chain.stationary_distribution()?.distribution;
    let pi_min = pi.min_weight();
    let lambda = chain.second_eigenvalue_of_reversiblization()?;
    let denom = 1.0 - lambda.sqrt();
    if denom <= 1e-12 {
        return Err(Error::BoundUndefined);
    }
    let bound = chain.n() as f64 / (2.0 * pi_min.sqrt() * denom);
    Ok(SpectralBound {
        bound,
        lambda,
        pi_min,
    })
}

/// Per-time comparison of the exact redaction mass `1 - alpha_t` against the
/// geometric envelope `(|X| / (2 sqrt(pi_min))) (sqrt(lambda))^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TermwiseMargin {
    pub t: usize,
    pub one_minus_alpha: f64,
    pub envelope: f64,
}

/// Check the decay bound term by term (not just in aggregate) so numerical
/// failures localize to a time step.
pub fn termwise_decay_margins(
    chain: &TransitionMatrix,
    horizon: usize,
) -> Result<Vec<TermwiseMargin>> {
    let sb = spectral_bound(chain)?;
    let alpha = alpha_table(chain, horizon)?;
    let scale = chain.n() as f64 / (2.0 * sb.pi_min.sqrt());
    let root = sb.lambda.sqrt();
    let mut envelope = scale;
    let mut out = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        out.push(TermwiseMargin {
            t,
            one_minus_alpha: 1.0 - alpha.value(t),
            envelope,
        });
        envelope *= root;
    }
    Ok(out)
}

/// Monte-Carlo mean erasure count with a 99% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub trials: usize,
}

/// Sample the mechanism `trials` times (one derived stream per trial) and
/// average the erasure counts.
pub fn empirical_distortion(
    chain: &TransitionMatrix,
    mechanism: Mechanism,
    horizon: usize,
    trials: usize,
    prior: &ProbabilityVector,
    stream: &RngStream,
) -> Result<Estimate> {
    if trials < MC_TRIALS_FLOOR {
        return Err(Error::TooFewTrials {
            trials,
            minimum: MC_TRIALS_FLOOR,
        });
    }
    if prior.len() != chain.n() {
        return Err(Error::LengthMismatch {
            left: prior.len(),
            right: chain.n(),
        });
    }
    let sampler = MechanismSampler::prepare(mechanism, chain, horizon)?;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for i in 0..trials {
        let mut rng = stream.substream(i as u64).rng();
        let x0 = sample_index(prior.weights(), uniform_unit(&mut rng));
        let x = sample_trajectory(chain, &Start::Fixed(x0), horizon, &mut rng)?;
        let released = sampler.run(&x, &mut rng)?;
        let d = released.erasure_count() as f64;
        sum += d;
        sum_sq += d * d;
    }
    let nf = trials as f64;
    let mean = sum / nf;
    let variance = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(Estimate {
        mean,
        half_width: Z_99 * (variance / nf).sqrt(),
        trials,
    })
}

/// Monte-Carlo settings for [`distortion_sweep`].
#[derive(Debug, Clone)]
pub struct McConfig {
    pub mechanism: Mechanism,
    pub trials: usize,
    pub prior: ProbabilityVector,
    pub stream: RngStream,
}

/// Exact distortion curves over a horizon grid, with the spectral bound, the
/// saturation gap `exact(N_max) - exact(N_max / 2)`, and optional
/// Monte-Carlo confirmation per grid point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DistortionReport {
    pub grid: Vec<usize>,
    pub exact_smr: Vec<f64>,
    /// Stationary-time mechanism curve (evaluated from start state 0, on
    /// which it does not depend for the chains the mechanism applies to);
    /// absent when the stationary distribution has zero mass somewhere.
    pub exact_sst: Option<Vec<f64>>,
    pub empirical: Option<Vec<Estimate>>,
    pub empirical_mechanism: Option<String>,
    pub spectral: Option<SpectralBound>,
    pub saturation_gap: f64,
    pub gap_horizons: (usize, usize),
}

pub fn distortion_sweep(
    chain: &TransitionMatrix,
    grid: &[usize],
    mc: Option<&McConfig>,
) -> Result<DistortionReport> {
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        grid.push(0);
    }
    let n_max = *grid.last().expect("non-empty grid");
    let alpha = alpha_table(chain, n_max)?;
    // Prefix sums of (1 - alpha_t) give every grid point in one pass.
    let mut prefix = Vec::with_capacity(n_max + 2);
    prefix.push(0.0);
    for t in 0..=n_max {
        prefix.push(prefix[t] + (1.0 - alpha.value(t)));
    }
    let exact_smr: Vec<f64> = grid.iter().map(|&n| prefix[n + 1]).collect();
    let exact_sst = match sst_distortion(chain, 0, n_max) {
        Ok(_) => Some(
            grid.iter()
                .map(|&n| sst_distortion(chain, 0, n))
                .collect::<Result<Vec<_>>>()?,
        ),
        Err(Error::ZeroStationaryMass { .. }) | Err(Error::SingularSystem) => None,
        Err(e) => return Err(e),
    };
    let spectral = match spectral_bound(chain) {
        Ok(sb) => Some(sb),
        Err(Error::BoundUndefined) => None,
        Err(e) => return Err(e),
    };
    let half = n_max / 2;
    let saturation_gap = prefix[n_max + 1] - prefix[half + 1];
    let (empirical, empirical_mechanism) = match mc {
        Some(cfg) => {
            let mut estimates = Vec::with_capacity(grid.len());
            for (j, &n) in grid.iter().enumerate() {
                let stream = cfg.stream.substream((j * cfg.trials) as u64);
                estimates.push(empirical_distortion(
                    chain,
                    cfg.mechanism,
                    n,
                    cfg.trials,
                    &cfg.prior,
                    &stream,
                )?);
            }
            (Some(estimates), Some(cfg.mechanism.id()))
        }
        None => (None, None),
    };
    Ok(DistortionReport {
        grid,
        exact_smr,
        exact_sst,
        empirical,
        empirical_mechanism,
        spectral,
        saturation_gap,
        gap_horizons: (half, n_max),
    })
}

impl DistortionReport {
    /// Exact curves must be nondecreasing in the horizon and dominated by
    /// the spectral bound when one exists.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.exact_smr.windows(2) {
            if w[1] + 1e-12 < w[0] {
                return Err(Error::CrossCheckFailed {
                    what: "monotone distortion curve",
                    deviation: w[0] - w[1],
                });
            }
        }
        if let Some(sb) = &self.spectral {
            for &v in &self.exact_smr {
                if v > sb.bound + 1e-12 {
                    return Err(Error::CrossCheckFailed {
                        what: "spectral bound domination",
                        deviation: v - sb.bound,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(p: f64) -> TransitionMatrix {
        TransitionMatrix::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    #[test]
    fn bound_closed_form_two_state() {
        let sb = spectral_bound(&two_state(0.25)).unwrap();
        assert!((sb.lambda - 0.25).abs() < 1e-12);
        assert!((sb.pi_min - 0.5).abs() < 1e-12);
        assert!((sb.bound - 2.8284271247461903).abs() < 1e-10);
        // The exact limit is 2, safely below.
        assert!(crate::smr::smr_distortion(&two_state(0.25), 60).unwrap() < sb.bound);
    }

    #[test]
    fn bound_rank_one() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let sb = spectral_bound(&chain).unwrap();
        assert!(sb.lambda.abs() < 1e-12);
        assert!((sb.bound - 2.0f64.sqrt()).abs() < 1e-10);
        assert!(crate::smr::smr_distortion(&chain, 40).unwrap() <= sb.bound);
    }

    #[test]
    fn bound_requires_ergodicity() {
        let absorbing = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(spectral_bound(&absorbing), Err(Error::BoundUndefined));
        let periodic = TransitionMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(spectral_bound(&periodic), Err(Error::BoundUndefined));
    }

    #[test]
    fn termwise_margins_hold() {
        for chain in [two_state(0.25), two_state(0.4)] {
            for m in termwise_decay_margins(&chain, 40).unwrap() {
                assert!(
                    m.one_minus_alpha <= m.envelope + 1e-12,
                    "t = {}: {} > {}",
                    m.t,
                    m.one_minus_alpha,
                    m.envelope
                );
            }
        }
    }

    #[test]
    fn sweep_matches_partial_sums() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let report = distortion_sweep(&chain, &[3, 10, 50], None).unwrap();
        assert!((report.exact_smr[0] - 1.875).abs() < 1e-12);
        assert!((report.exact_smr[1] - 1.9990234375).abs() < 1e-12);
        assert!((report.exact_smr[2] - 2.0).abs() < 1e-10);
        assert!(report.exact_sst.is_none(), "zero stationary mass");
        assert!(report.spectral.is_none(), "not ergodic");
        report.check_invariants().unwrap();
    }

    #[test]
    fn sweep_saturation_gap_two_state() {
        let report = distortion_sweep(&two_state(0.25), &[100], None).unwrap();
        assert_eq!(report.gap_horizons, (50, 100));
        assert!(
            report.saturation_gap <= 1e-12,
            "gap = {}",
            report.saturation_gap
        );
        report.check_invariants().unwrap();
    }

    #[test]
    fn empirical_agrees_with_exact() {
        let chain = two_state(0.25);
        let est = empirical_distortion(
            &chain,
            Mechanism::Smr,
            10,
            20_000,
            &ProbabilityVector::uniform(2),
            &RngStream::new(31, 0),
        )
        .unwrap();
        assert!(
            (est.mean - 1.9990234375).abs() <= est.half_width,
            "mean = {}, hw = {}",
            est.mean,
            est.half_width
        );
    }

    #[test]
    fn rank_one_empirical_is_exact_with_zero_variance() {
        let chain = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let est = empirical_distortion(
            &chain,
            Mechanism::Smr,
            5,
            1_000,
            &ProbabilityVector::uniform(2),
            &RngStream::new(8, 0),
        )
        .unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.half_width, 0.0);
    }
}
