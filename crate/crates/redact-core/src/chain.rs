//! Finite time-homogeneous Markov chains: labelled state spaces,
//! row-stochastic transition matrices, structural diagnostics, stationary
//! distributions, time reversal, and the second eigenvalue of the
//! multiplicative reversiblization.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

// Inherent float math is std-only; route through the trait in no_std builds.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Row sums may deviate from 1 by at most this much at load time; within it
/// the row is renormalized once, beyond it validation fails.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Stationary masses at or below this floor count as zero.
pub const POSITIVE_MASS_FLOOR: f64 = 1e-12;

/// Ordered set of distinct state labels; indices are stable for the lifetime
/// of the value.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(StateSpace { labels })
    }

    /// State space with labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        StateSpace::new((0..n).map(|i| format!("{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Probability vector: nonnegative weights summing to 1.
///
/// Constructors renormalize once when the sum is within [`ROW_SUM_TOLERANCE`]
/// of 1 and reject anything further off.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, w) in weights.iter().enumerate() {
            if *w < -POSITIVE_MASS_FLOOR {
                return Err(Error::NegativeWeight {
                    index: i,
                    value: *w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::WeightSum { sum });
        }
        let weights = weights.into_iter().map(|w| w.max(0.0) / sum).collect();
        Ok(ProbabilityVector { weights })
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, state: usize) -> Result<Self> {
        if state >= n {
            return Err(Error::StateOutOfRange { state, n });
        }
        let mut weights = vec![0.0; n];
        weights[state] = 1.0;
        Ok(ProbabilityVector { weights })
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        ProbabilityVector { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when every mass is strictly positive (above [`POSITIVE_MASS_FLOOR`]).
    pub fn strictly_positive(&self) -> bool {
        self.min_weight() > POSITIVE_MASS_FLOOR
    }
}

/// Structural flags reported by [`TransitionMatrix::diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainDiagnostics {
    pub row_stochastic: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of the strongly connected component of state 0; for reducible
    /// chains this is reported for that component only.
    pub period: usize,
    pub doubly_stochastic: bool,
    /// Whether the stationary solve succeeded with every mass strictly
    /// positive.
    pub stationary_support_full: bool,
}

/// Stationary distribution plus a uniqueness flag (false for reducible
/// chains, where other stationary distributions may exist).
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolve {
    pub distribution: ProbabilityVector,
    pub unique: bool,
}

/// Row-stochastic transition matrix over a labelled state space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: Matrix,
    states: StateSpace,
}

impl TransitionMatrix {
    /// Validate and build a chain. Rows are renormalized once when their sum
    /// is within [`ROW_SUM_TOLERANCE`] of 1; entries below `-1e-12` or row
    /// sums further off are rejected, naming the offending row.
    pub fn new(states: StateSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut matrix = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RowLength {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if *v < -POSITIVE_MASS_FLOOR {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: *v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum { row: i, sum });
            }
            for (j, v) in row.iter().enumerate() {
                matrix.set(i, j, v.max(0.0) / sum);
            }
        }
        Ok(TransitionMatrix { matrix, states })
    }

    /// Build with labels `"0"`, `"1"`, ...
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let states = StateSpace::indexed(rows.len())?;
        TransitionMatrix::new(states, rows)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.matrix.get(from, to)
    }

    pub fn row(&self, from: usize) -> &[f64] {
        self.matrix.row(from)
    }

    /// `P^t` by iterated multiplication; `P^0` is the identity. Use
    /// [`PowerCache`] when several powers of the same chain are needed.
    pub fn power(&self, t: usize) -> Matrix {
        let mut acc = Matrix::identity(self.n());
        for _ in 0..t {
            acc = acc.matmul(&self.matrix);
        }
        acc
    }

    /// Memoized powers of this chain, keyed by exponent.
    pub fn powers(&self) -> PowerCache<'_> {
        PowerCache {
            chain: self,
            computed: vec![Matrix::identity(self.n())],
        }
    }

    /// Structural diagnostics: reachability, period, double stochasticity,
    /// and stationary support. Never fails; chains that lack a unique
    /// stationary distribution simply report `stationary_support_full: false`.
    pub fn diagnostics(&self) -> ChainDiagnostics {
        let n = self.n();
        let row_stochastic = (0..n).all(|i| {
            let s: f64 = self.matrix.row(i).iter().sum();
            (s - 1.0).abs() <= 1e-12
        });
        let forward = self.reachable(false);
        let backward = self.reachable(true);
        let irreducible = forward.iter().all(|&r| r) && backward.iter().all(|&r| r);
        let period = self.period_of_component(&forward, &backward);
        let doubly_stochastic = (0..n).all(|j| {
            let s: f64 = (0..n).map(|i| self.matrix.get(i, j)).sum();
            (s - 1.0).abs() <= ROW_SUM_TOLERANCE
        });
        let stationary_support_full = match self.stationary_distribution() {
            Ok(sol) => sol.distribution.strictly_positive(),
            Err(_) => false,
        };
        ChainDiagnostics {
            row_stochastic,
            irreducible,
            aperiodic: period == 1,
            period,
            doubly_stochastic,
            stationary_support_full,
        }
    }

    /// Irreducible and aperiodic.
    pub fn is_ergodic(&self) -> bool {
        let d = self.diagnostics();
        d.irreducible && d.aperiodic
    }

    /// Solve `pi P = pi`, `sum pi = 1` directly (transposed system with the
    /// last equation replaced by the normalization constraint). The row
    /// replacement loses no rank because the rows of `P^T - I` always sum to
    /// zero, so the solve succeeds exactly when the stationary distribution
    /// is unique.
    pub fn stationary_distribution(&self) -> Result<StationarySolve> {
        let n = self.n();
        if n == 1 {
            return Ok(StationarySolve {
                distribution: ProbabilityVector::from_normalized(vec![1.0]),
                unique: true,
            });
        }
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix.get(j, i) - if i == j { 1.0 } else { 0.0 };
                a.set(i, j, v);
            }
        }
        for j in 0..n {
            a.set(n - 1, j, 1.0);
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let mut x = linalg::solve_linear(a, b)?;
        for v in &mut x {
            if *v < 0.0 {
                if *v < -ROW_SUM_TOLERANCE {
                    return Err(Error::SingularSystem);
                }
                *v = 0.0;
            }
        }
        let sum: f64 = x.iter().sum();
        for v in &mut x {
            *v /= sum;
        }
        let forward = self.reachable(false);
        let backward = self.reachable(true);
        let unique = forward.iter().all(|&r| r) && backward.iter().all(|&r| r);
        Ok(StationarySolve {
            distribution: ProbabilityVector::from_normalized(x),
            unique,
        })
    }

    /// Time reversal `P^(x,y) = pi(y) P(y,x) / pi(x)`. Requires strictly
    /// positive `pi`; the result is validated as row-stochastic, which holds
    /// whenever `pi` is genuinely stationary for this chain.
    pub fn time_reversal(&self, pi: &ProbabilityVector) -> Result<TransitionMatrix> {
        let n = self.n();
        if pi.len() != n {
            return Err(Error::LengthMismatch {
                left: pi.len(),
                right: n,
            });
        }
        for x in 0..n {
            if pi.weight(x) <= POSITIVE_MASS_FLOOR {
                return Err(Error::ZeroStationaryMass {
                    state: String::from(self.states.label(x)),
                });
            }
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| pi.weight(y) * self.matrix.get(y, x) / pi.weight(x))
                    .collect()
            })
            .collect();
        TransitionMatrix::new(self.states.clone(), rows)
    }

    /// Second-largest eigenvalue of the multiplicative reversiblization
    /// `M = P P^`. `M` is reversible with respect to `pi`, so
    /// `D^(1/2) M D^(-1/2)` is symmetric and a dense symmetric eigensolve
    /// applies; the result lies in [0, 1].
    pub fn second_eigenvalue_of_reversiblization(&self) -> Result<f64> {
        let n = self.n();
        if n == 1 {
            return Ok(0.0);
        }
        let pi = self.stationary_distribution()?.distribution;
        for x in 0..n {
            if pi.weight(x) <= POSITIVE_MASS_FLOOR {
                return Err(Error::ZeroStationaryMass {
                    state: String::from(self.states.label(x)),
                });
            }
        }
        let reversal = self.time_reversal(&pi)?;
        let m = self.matrix.matmul(reversal.matrix());
        let mut s = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = (pi.weight(i) / pi.weight(j)).sqrt() * m.get(i, j);
                s.set(i, j, v);
            }
        }
        // Kill the floating-point asymmetry before the symmetric solve.
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (s.get(i, j) + s.get(j, i));
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        let ev = linalg::symmetric_eigenvalues(s)?;
        let lambda = ev[1];
        if !(-1e-9..=1.0 + 1e-9).contains(&lambda) {
            return Err(Error::EigenvalueRange { value: lambda });
        }
        Ok(lambda.clamp(0.0, 1.0))
    }

    /// Reachability from state 0 along positive transitions (`reverse` flips
    /// the edges).
    fn reachable(&self, reverse: bool) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if reverse {
                    self.matrix.get(v, u)
                } else {
                    self.matrix.get(u, v)
                };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Period as the gcd of cycle lengths inside the strongly connected
    /// component of state 0, via BFS levels. A cycle-free singleton
    /// component reports period 1.
    fn period_of_component(&self, forward: &[bool], backward: &[bool]) -> usize {
        let n = self.n();
        let in_scc: Vec<bool> = (0..n).map(|i| forward[i] && backward[i]).collect();
        let mut level = vec![i64::MIN; n];
        level[0] = 0;
        let mut queue = vec![0usize];
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for v in 0..n {
                if in_scc[v] && self.matrix.get(u, v) > 0.0 && level[v] == i64::MIN {
                    level[v] = level[u] + 1;
                    queue.push(v);
                }
            }
        }
        let mut g: u64 = 0;
        for u in 0..n {
            if !in_scc[u] || level[u] == i64::MIN {
                continue;
            }
            for v in 0..n {
                if in_scc[v] && self.matrix.get(u, v) > 0.0 && level[v] != i64::MIN {
                    g = gcd(g, (level[u] + 1 - level[v]).unsigned_abs());
                }
            }
        }
        if g == 0 { 1 } else { g as usize }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Memoized matrix powers of a single chain, filled incrementally.
#[derive(Debug)]
pub struct PowerCache<'a> {
    chain: &'a TransitionMatrix,
    computed: Vec<Matrix>,
}

impl PowerCache<'_> {
    pub fn power(&mut self, t: usize) -> &Matrix {
        while self.computed.len() <= t {
            let next = self
                .computed
                .last()
                .expect("cache starts with P^0")
                .matmul(self.chain.matrix());
            self.computed.push(next);
        }
        &self.computed[t]
    }
}

/// Total variation distance `0.5 * sum |mu - nu|`, in [0, 1].
pub fn total_variation(mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::LengthMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..mu.len() {
        acc += (mu.weight(i) - nu.weight(i)).abs();
    }
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(p: f64) -> TransitionMatrix {
        TransitionMatrix::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
    }

    fn example2() -> TransitionMatrix {
        TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn diagnostics_symmetric_chain() {
        let d = two_state(0.25).diagnostics();
        assert!(d.row_stochastic && d.irreducible && d.aperiodic && d.doubly_stochastic);
        assert!(d.stationary_support_full);
        assert_eq!(d.period, 1);
    }

    #[test]
    fn diagnostics_absorbing_chain() {
        let d = example2().diagnostics();
        assert!(!d.irreducible);
        assert!(d.aperiodic);
        assert!(!d.doubly_stochastic);
        assert!(!d.stationary_support_full);
    }

    #[test]
    fn diagnostics_two_cycle() {
        let p = TransitionMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = p.diagnostics();
        assert!(d.irreducible);
        assert_eq!(d.period, 2);
        assert!(!d.aperiodic);
    }

    #[test]
    fn validation_names_bad_row() {
        let err = TransitionMatrix::from_rows(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert_eq!(err, Error::RowSum { row: 0, sum: 0.9 });
        let err = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![-0.1, 1.1]]).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { row: 1, col: 0, .. }));
    }

    #[test]
    fn row_within_tolerance_is_renormalized() {
        let p =
            TransitionMatrix::from_rows(vec![vec![0.5 + 2e-10, 0.5], vec![0.25, 0.75]]).unwrap();
        let sum: f64 = p.row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_matches_hand_computation() {
        let p = example2().power(2);
        assert!((p.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((p.get(0, 1) - 0.75).abs() < 1e-15);
        assert!((p.get(1, 0) - 0.0).abs() < 1e-15);
        let q = two_state(0.25).power(2);
        assert!((q.get(0, 0) - 0.625).abs() < 1e-15);
        assert!((q.get(0, 1) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn power_zero_is_identity() {
        let p = two_state(0.3).power(0);
        assert_eq!(p, Matrix::identity(2));
    }

    #[test]
    fn power_cache_matches_direct() {
        let p = two_state(0.25);
        let mut cache = p.powers();
        for t in [0usize, 3, 1, 5] {
            let direct = p.power(t);
            assert_eq!(cache.power(t), &direct);
        }
    }

    #[test]
    fn stationary_symmetric_and_absorbing() {
        let s = two_state(0.25).stationary_distribution().unwrap();
        assert!(s.unique);
        assert!((s.distribution.weight(0) - 0.5).abs() < 1e-12);

        let s = example2().stationary_distribution().unwrap();
        assert!(!s.unique);
        assert!((s.distribution.weight(0) - 0.0).abs() < 1e-12);
        assert!((s.distribution.weight(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_asymmetric() {
        let p = TransitionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let s = p.stationary_distribution().unwrap();
        assert!((s.distribution.weight(0) - 5.0 / 6.0).abs() < 1e-12);
        assert!((s.distribution.weight(1) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn reversal_of_reversible_chain_is_itself() {
        let p = TransitionMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let pi = p.stationary_distribution().unwrap().distribution;
        let rev = p.time_reversal(&pi).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rev.entry(i, j) - p.entry(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reversal_rejects_zero_mass() {
        let p = example2();
        let pi = p.stationary_distribution().unwrap().distribution;
        let err = p.time_reversal(&pi).unwrap_err();
        assert_eq!(err, Error::ZeroStationaryMass { state: "0".into() });
    }

    #[test]
    fn second_eigenvalue_examples() {
        let lam = two_state(0.25)
            .second_eigenvalue_of_reversiblization()
            .unwrap();
        assert!((lam - 0.25).abs() < 1e-12);

        let rank_one = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let lam = rank_one.second_eigenvalue_of_reversiblization().unwrap();
        assert!(lam.abs() < 1e-12);
    }

    #[test]
    fn total_variation_examples() {
        let a = ProbabilityVector::new(vec![0.75, 0.25]).unwrap();
        let b = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        assert!((total_variation(&a, &a).unwrap()).abs() < 1e-15);
        assert!((total_variation(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let c = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        let d = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();
        assert!((total_variation(&c, &d).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn state_space_rejects_duplicates() {
        let err = StateSpace::new(vec!["a".into(), "a".into()]).unwrap_err();
        assert_eq!(err, Error::DuplicateLabel("a".into()));
    }
}
