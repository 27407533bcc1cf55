//! Property suites over randomly generated chains.

use proptest::prelude::*;

use redact_core::{
    Mechanism, ProbabilityVector, RngStream, Start, TransitionMatrix, alpha_table,
    check_sst_applicability, conditional_kernels, exact_output_channel, run_smr,
    sample_sst_redaction, sample_trajectory, separation_table, smr_distortion, total_variation,
    window_distribution,
};

fn stochastic_matrix(n: usize) -> impl Strategy<Value = TransitionMatrix> {
    proptest::collection::vec(0.05..1.0f64, n * n).prop_map(move |raw| {
        let rows: Vec<Vec<f64>> = raw
            .chunks(n)
            .map(|row| {
                let sum: f64 = row.iter().sum();
                row.iter().map(|v| v / sum).collect()
            })
            .collect();
        TransitionMatrix::from_rows(rows).expect("normalized rows")
    })
}

fn any_chain() -> impl Strategy<Value = TransitionMatrix> {
    (2usize..=4).prop_flat_map(stochastic_matrix)
}

fn probability_vector(n: usize) -> impl Strategy<Value = ProbabilityVector> {
    proptest::collection::vec(0.01..1.0f64, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        ProbabilityVector::new(raw.iter().map(|v| v / sum).collect()).expect("normalized")
    })
}

/// Reversible chain from symmetric positive weights: P(i,j) = w_ij / sum_j w_ij.
fn reversible_chain(n: usize) -> impl Strategy<Value = TransitionMatrix> {
    proptest::collection::vec(0.05..1.0f64, n * (n + 1) / 2).prop_map(move |upper| {
        let mut w = vec![vec![0.0; n]; n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().expect("enough weights");
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        let rows: Vec<Vec<f64>> = w
            .iter()
            .map(|row| {
                let sum: f64 = row.iter().sum();
                row.iter().map(|v| v / sum).collect()
            })
            .collect();
        TransitionMatrix::from_rows(rows).expect("normalized rows")
    })
}

proptest! {
    #[test]
    fn power_rows_stay_stochastic(chain in any_chain(), t in 0usize..40) {
        let power = chain.power(t);
        for i in 0..chain.n() {
            let sum: f64 = power.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-10 * (t.max(1) as f64));
        }
    }

    #[test]
    fn stationary_is_a_fixed_point(chain in any_chain()) {
        let pi = chain.stationary_distribution().unwrap().distribution;
        for j in 0..chain.n() {
            let image: f64 = (0..chain.n()).map(|i| pi.weight(i) * chain.entry(i, j)).sum();
            prop_assert!((image - pi.weight(j)).abs() <= 1e-10);
        }
    }

    #[test]
    fn reversal_is_an_involution_on_reversible_chains(chain in (2usize..=5).prop_flat_map(reversible_chain)) {
        let pi = chain.stationary_distribution().unwrap().distribution;
        let once = chain.time_reversal(&pi).unwrap();
        let twice = once.time_reversal(&pi).unwrap();
        for i in 0..chain.n() {
            for j in 0..chain.n() {
                prop_assert!((twice.entry(i, j) - chain.entry(i, j)).abs() <= 1e-10);
                // Reversible chains are their own reversal.
                prop_assert!((once.entry(i, j) - chain.entry(i, j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn tv_is_a_symmetric_metric((a, b, c) in (2usize..=5).prop_flat_map(|n| {
        (probability_vector(n), probability_vector(n), probability_vector(n))
    })) {
        let ab = total_variation(&a, &b).unwrap();
        let ba = total_variation(&b, &a).unwrap();
        let ac = total_variation(&a, &c).unwrap();
        let cb = total_variation(&c, &b).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-15);
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn reversiblization_eigenvalue_in_unit_interval(chain in any_chain()) {
        let lambda = chain.second_eigenvalue_of_reversiblization().unwrap();
        prop_assert!((0.0..=1.0).contains(&lambda));
        // Ergodicity (all entries positive here) forces a spectral gap.
        prop_assert!(lambda < 1.0);
    }

    #[test]
    fn tables_are_monotone_and_bounded(chain in any_chain()) {
        let horizon = 12;
        let alpha = alpha_table(&chain, horizon).unwrap();
        let pi = chain.stationary_distribution().unwrap().distribution;
        let table = separation_table(&chain, &pi, horizon).unwrap();
        for t in 1..=horizon {
            prop_assert!(alpha.value(t) >= alpha.value(t - 1));
            prop_assert!(alpha.value(t) <= 1.0);
            for x0 in 0..chain.n() {
                prop_assert!(table.value(x0, t) >= table.value(x0, t - 1));
                prop_assert!(table.value(x0, t) <= 1.0);
            }
        }
        prop_assert_eq!(alpha.value(0), 0.0);
        for x0 in 0..chain.n() {
            prop_assert_eq!(table.value(x0, 0), 0.0);
        }
    }

    #[test]
    fn window_law_normalizes_and_matches_distortion(chain in any_chain(), horizon in 1usize..10) {
        let law = window_distribution(&chain, horizon).unwrap();
        prop_assert!((law.total() - 1.0).abs() <= 1e-12);
        let exact = smr_distortion(&chain, horizon).unwrap();
        prop_assert!((law.mean_capped() - exact).abs() <= 1e-10);
    }

    #[test]
    fn s_values_follow_the_alpha_ratio(chain in any_chain()) {
        let horizon = 8;
        let kernels = conditional_kernels(&chain, horizon).unwrap();
        let alpha = alpha_table(&chain, horizon).unwrap();
        for t in 1..kernels.computed_len() {
            let denom = 1.0 - alpha.value(t - 1);
            // The kernel entries carry rounding amplified by 1/denom, so the
            // identity is only numerically meaningful while survival mass
            // remains well above rounding scale.
            if denom > 1e-5 {
                let expected = (alpha.value(t) - alpha.value(t - 1)) / denom;
                prop_assert!((kernels.s_value(t).unwrap() - expected).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn kernels_stay_row_stochastic(chain in any_chain()) {
        let kernels = conditional_kernels(&chain, 8).unwrap();
        for t in 0..kernels.computed_len() {
            let k = kernels.kernel(t).unwrap();
            for u in 0..chain.n() {
                let sum: f64 = k.row(u).iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sampled_outputs_erase_exactly_a_prefix(chain in any_chain(), seed in 0u64..1000) {
        let horizon = 9;
        let kernels = conditional_kernels(&chain, horizon).unwrap();
        let pi = chain.stationary_distribution().unwrap().distribution;
        let table = separation_table(&chain, &pi, horizon).unwrap();
        let mut rng = RngStream::new(seed, 0).rng();
        let start = Start::Random(ProbabilityVector::uniform(chain.n()));
        for _ in 0..16 {
            let x = sample_trajectory(&chain, &start, horizon, &mut rng).unwrap();
            let y = run_smr(&x, &kernels, &mut rng).unwrap();
            prop_assert_eq!(y.erasure_count(), y.window());
            prop_assert!(y.symbols().iter().take(y.window()).all(|s| s.is_erased()));
            prop_assert!(y.symbols().iter().skip(y.window()).all(|s| !s.is_erased()));
            prop_assert!(y.window() >= 1);

            let red = sample_sst_redaction(&x, &table, &mut rng).unwrap();
            prop_assert!(red.tau >= 1 && red.tau <= horizon + 1);
            prop_assert_eq!(red.released.erasure_count(), red.tau.min(horizon + 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mutual_information_is_bounded_by_entropy(chain in any_chain(), k in 0usize..4) {
        let horizon = 3;
        let channel = exact_output_channel(Mechanism::FixedWindow(k), &chain, horizon).unwrap();
        let bits = channel.mutual_information(&ProbabilityVector::uniform(chain.n())).unwrap();
        prop_assert!(bits >= 0.0);
        prop_assert!(bits <= (chain.n() as f64).log2() + 1e-12);
    }

    #[test]
    fn operative_check_implies_private_sst_channel(
        (k, raw) in (3usize..=4).prop_flat_map(|k| {
            (Just(k), proptest::collection::vec(0.05..1.0f64, k))
        }),
    ) {
        // Random circulant chains pass the start-independence check and the
        // stationary-time mechanism's exact channel leaks nothing on them.
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|v| v / sum).collect();
        let rows: Vec<Vec<f64>> =
            (0..k).map(|i| (0..k).map(|j| weights[(j + k - i) % k]).collect()).collect();
        let chain = TransitionMatrix::from_rows(rows).expect("circulant rows");
        let horizon = 4;
        let verdict = check_sst_applicability(&chain, horizon, 1e-9).unwrap();
        prop_assert!(verdict.applicable, "spread = {}", verdict.max_spread);
        let channel = exact_output_channel(Mechanism::Sst, &chain, horizon).unwrap();
        prop_assert!(channel.mutual_information(&ProbabilityVector::uniform(k)).unwrap() <= 1e-10);
        prop_assert!(channel.max_pairwise_tv() <= 1e-10);
    }

    #[test]
    fn channel_tv_zero_means_mi_zero_for_any_prior(
        chain in any_chain(),
        priors in (2usize..=4).prop_flat_map(|n| proptest::collection::vec(probability_vector(n), 5)),
    ) {
        // Channel-level independence implies source-level independence: when
        // the conditional laws coincide, every full-support prior sees zero
        // mutual information.
        let channel = exact_output_channel(Mechanism::Smr, &chain, 4).unwrap();
        prop_assume!(channel.max_pairwise_tv() <= 1e-10);
        for prior in priors.iter().filter(|p| p.len() == chain.n()) {
            prop_assert!(channel.mutual_information(prior).unwrap() <= 1e-10);
        }
    }
}
