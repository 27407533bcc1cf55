//! Brute-force oracles for the conditional-kernel recursion and the window
//! mixture. The oracle builds everything from first principles — joint
//! enumeration of paths and erasure survival — and never touches the
//! recursion it checks.

use std::collections::HashMap;

use redact_core::{
    ProbabilityVector, Trajectory, TransitionMatrix, conditional_kernels, window_distribution,
};

fn fixtures() -> Vec<(&'static str, TransitionMatrix)> {
    vec![
        (
            "absorbing",
            TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap(),
        ),
        (
            "two_state",
            TransitionMatrix::from_rows(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap(),
        ),
        (
            "circulant3",
            TransitionMatrix::from_rows(vec![
                vec![0.5, 0.5, 0.0],
                vec![0.0, 0.5, 0.5],
                vec![0.5, 0.0, 0.5],
            ])
            .unwrap(),
        ),
        (
            "spread3",
            TransitionMatrix::from_rows(vec![
                vec![0.70, 0.20, 0.10],
                vec![0.10, 0.60, 0.30],
                vec![0.20, 0.20, 0.60],
            ])
            .unwrap(),
        ),
        (
            "dense4",
            TransitionMatrix::from_rows(vec![
                vec![0.40, 0.30, 0.20, 0.10],
                vec![0.05, 0.55, 0.25, 0.15],
                vec![0.25, 0.10, 0.45, 0.20],
                vec![0.10, 0.20, 0.30, 0.40],
            ])
            .unwrap(),
        ),
    ]
}

/// Kernels and release probabilities straight from the mechanism definition:
/// track the joint weight of every path together with the probability that
/// everything so far was erased, then condition.
struct BruteForce {
    /// kernels[t][u][v] = P(X_t = v | X_0 = u, first t outputs erased)
    kernels: Vec<Vec<Vec<f64>>>,
    /// q[t][x0][v], with q[0] all zero
    q: Vec<Vec<Vec<f64>>>,
}

fn brute_force(chain: &TransitionMatrix, horizon: usize) -> BruteForce {
    let n = chain.n();
    let identity: Vec<Vec<f64>> = (0..n)
        .map(|u| (0..n).map(|v| f64::from(u == v)).collect())
        .collect();
    let mut kernels = vec![identity];
    let mut q = vec![vec![vec![0.0; n]; n]];
    // joints[x0]: path -> P(path, all erased so far | x0)
    let mut joints: Vec<HashMap<Vec<usize>, f64>> =
        (0..n).map(|x0| HashMap::from([(vec![x0], 1.0)])).collect();
    for t in 1..=horizon {
        let mut kernel = vec![vec![0.0; n]; n];
        for (x0, paths) in joints.iter_mut().enumerate() {
            let mut extended: HashMap<Vec<usize>, f64> = HashMap::new();
            for (path, weight) in paths.iter() {
                let last = *path.last().unwrap();
                let survive = weight * (1.0 - q[t - 1][x0][last]);
                if survive <= 0.0 {
                    continue;
                }
                for v in 0..n {
                    let step = chain.entry(last, v);
                    if step > 0.0 {
                        let mut next = path.clone();
                        next.push(v);
                        *extended.entry(next).or_insert(0.0) += survive * step;
                    }
                }
            }
            let total: f64 = extended.values().sum();
            for (path, weight) in &extended {
                kernel[x0][*path.last().unwrap()] += weight / total;
            }
            *paths = extended;
        }
        let mut qt = vec![vec![0.0; n]; n];
        for x0 in 0..n {
            for v in 0..n {
                if kernel[x0][v] > 1e-300 {
                    let m = (0..n).map(|u| kernel[u][v]).fold(f64::INFINITY, f64::min);
                    qt[x0][v] = m / kernel[x0][v];
                }
            }
        }
        kernels.push(kernel);
        q.push(qt);
    }
    BruteForce { kernels, q }
}

#[test]
fn recursion_matches_brute_force_conditioning() {
    for (name, chain) in fixtures() {
        let horizon = 6;
        let oracle = brute_force(&chain, horizon);
        let seq = conditional_kernels(&chain, horizon).unwrap();
        for t in 0..seq.computed_len() {
            let k = seq.kernel(t).unwrap();
            for u in 0..chain.n() {
                for v in 0..chain.n() {
                    let diff = (k.get(u, v) - oracle.kernels[t][u][v]).abs();
                    assert!(diff <= 1e-10, "{name}: C_{t}({u},{v}) off by {diff:e}");
                }
            }
        }
    }
}

#[test]
fn release_probabilities_match_brute_force() {
    for (name, chain) in fixtures() {
        let horizon = 6;
        let oracle = brute_force(&chain, horizon);
        let seq = conditional_kernels(&chain, horizon).unwrap();
        for t in 1..seq.computed_len() {
            for x0 in 0..chain.n() {
                for v in 0..chain.n() {
                    if oracle.kernels[t][x0][v] > 1e-12 {
                        let q = seq.release_probability(t, x0, v).unwrap();
                        let diff = (q - oracle.q[t][x0][v]).abs();
                        assert!(diff <= 1e-10, "{name}: q_{t}({x0},{v}) off by {diff:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn window_mixture_is_identical_across_start_states() {
    // For every start state, mixing the per-trajectory window law over the
    // path law gives the same distribution, and it equals the marginal law
    // alpha_t - alpha_{t-1}.
    for (name, chain) in fixtures() {
        let horizon = 5;
        let n = chain.n();
        let seq = conditional_kernels(&chain, horizon).unwrap();
        let marginal = window_distribution(&chain, horizon).unwrap();
        let mut per_start: Vec<Vec<f64>> = Vec::new();
        for x0 in 0..n {
            let mut mixed = vec![0.0; horizon + 1];
            let mut stack = vec![(vec![x0], 1.0f64)];
            while let Some((path, weight)) = stack.pop() {
                if path.len() == horizon + 1 {
                    let x = Trajectory::new(path, n).unwrap();
                    let law = seq.window_law_conditional(&x).unwrap();
                    for (t, p) in law.atoms() {
                        mixed[t - 1] += weight * p;
                    }
                    continue;
                }
                let cur = *path.last().unwrap();
                for v in 0..n {
                    if chain.entry(cur, v) > 0.0 {
                        let mut next = path.clone();
                        next.push(v);
                        stack.push((next, weight * chain.entry(cur, v)));
                    }
                }
            }
            for (t, expected) in marginal.atoms() {
                assert!(
                    (mixed[t - 1] - expected).abs() <= 1e-12,
                    "{name}: x0 = {x0}, t = {t}: {} vs {expected}",
                    mixed[t - 1]
                );
            }
            per_start.push(mixed);
        }
        for x0 in 1..n {
            for t in 0..=horizon {
                assert!(
                    (per_start[x0][t] - per_start[0][t]).abs() <= 1e-12,
                    "{name}: law depends on start state at t = {}",
                    t + 1
                );
            }
        }
    }
}

#[test]
fn empirical_survival_matches_hazard_ratio() {
    // P(Y_t = * | Y_{t-1} = *) among sampled runs tracks
    // (1 - alpha_t) / (1 - alpha_{t-1}) within 3 sigma.
    use redact_core::{RngStream, Start, alpha_table, run_smr, sample_trajectory};
    let chain = TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
    let horizon = 5;
    let seq = conditional_kernels(&chain, horizon).unwrap();
    let alpha = alpha_table(&chain, horizon).unwrap();
    let trials = 100_000usize;
    let base = RngStream::new(424_242, 0);
    let mut windows = vec![0usize; horizon + 2];
    for i in 0..trials {
        let mut rng = base.substream(i as u64).rng();
        let x = sample_trajectory(
            &chain,
            &Start::Random(ProbabilityVector::uniform(2)),
            horizon,
            &mut rng,
        )
        .unwrap();
        let y = run_smr(&x, &seq, &mut rng).unwrap();
        windows[y.window()] += 1;
    }
    // still erased at time t  <=>  window > t
    let still_erased = |t: usize| -> usize { windows.iter().skip(t + 1).sum() };
    for t in 1..=4usize {
        let survivors_before = still_erased(t - 1);
        let survivors_now = still_erased(t);
        let expected = alpha.hazard_ratio(t).unwrap();
        let phat = survivors_now as f64 / survivors_before as f64;
        let sigma = (expected * (1.0 - expected) / survivors_before as f64).sqrt();
        assert!(
            (phat - expected).abs() <= 3.0 * sigma,
            "t = {t}: {phat} vs {expected} ({survivors_before} survivors)"
        );
    }
}
