//! Named chain generators for experiments and tests.
//!
//! A fixture spec is `name` or `name(arg, arg, ...)`:
//!
//! - `two_state(p)` — symmetric flip chain `[[1-p, p], [p, 1-p]]`, `0 < p < 1`
//! - `example2` — absorbing chain `[[0.5, 0.5], [0, 1]]`
//! - `circulant(k)` or `circulant(k, w0, .., w_{k-1})` — cyclic-shift
//!   invariant chain; the default weights are `[0.5, 0.5, 0, ..]`
//! - `hypercube(d, laziness)` — lazy coordinate-flip walk on `{0,1}^d`
//! - `rank_one` or `rank_one(w0, .., w_{n-1})` — all rows equal; defaults to
//!   the uniform two-state row
//! - `random_ergodic(n, seed)` — seeded dense positive rows, `2 <= n <= 12`
//! - `three_state_negative_control` — frozen doubly stochastic chain whose
//!   separation values depend on the start state (fails the operative
//!   stationary-time check while passing the structural one)

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use redact_core::{StateSpace, TransitionMatrix};

use crate::error::CliError;

/// Frozen negative control: doubly stochastic, ergodic, uniform stationary
/// distribution, separation-value spread 0.3 at horizon 4.
pub const NEGATIVE_CONTROL_ROWS: [[f64; 3]; 3] =
    [[0.70, 0.20, 0.10], [0.10, 0.60, 0.30], [0.20, 0.20, 0.60]];

/// Build a fixture chain from its spec string, e.g. `two_state(0.25)`.
pub fn build_fixture(spec: &str) -> Result<TransitionMatrix, CliError> {
    let (name, args) = split_spec(spec)?;
    match name.as_str() {
        "two_state" => {
            let p = one_float(&name, &args)?;
            if !(0.0 < p && p < 1.0) {
                return Err(bad_param(&name, "p must lie strictly between 0 and 1"));
            }
            chain(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
        }
        "example2" => {
            no_args(&name, &args)?;
            chain(vec![vec![0.5, 0.5], vec![0.0, 1.0]])
        }
        "circulant" => {
            if args.is_empty() {
                return Err(bad_param(
                    &name,
                    "expected circulant(k) or circulant(k, w0, ..)",
                ));
            }
            let k = parse_usize(&name, &args[0])?;
            if k < 2 {
                return Err(bad_param(&name, "k must be at least 2"));
            }
            let weights: Vec<f64> = if args.len() == 1 {
                let mut w = vec![0.0; k];
                w[0] = 0.5;
                w[1] = 0.5;
                w
            } else {
                if args.len() != k + 1 {
                    return Err(bad_param(&name, "need exactly k weights"));
                }
                args[1..]
                    .iter()
                    .map(|a| parse_float(&name, a))
                    .collect::<Result<_, _>>()?
            };
            if weights.iter().any(|w| *w < 0.0) {
                return Err(bad_param(&name, "weights must be nonnegative"));
            }
            let rows = (0..k)
                .map(|i| (0..k).map(|j| weights[(j + k - i) % k]).collect())
                .collect();
            chain(rows)
        }
        "hypercube" => {
            if args.len() != 2 {
                return Err(bad_param(&name, "expected hypercube(d, laziness)"));
            }
            let d = parse_usize(&name, &args[0])?;
            let lazy = parse_float(&name, &args[1])?;
            if !(1..=10).contains(&d) {
                return Err(bad_param(&name, "d must lie in 1..=10"));
            }
            if !(0.0..1.0).contains(&lazy) {
                return Err(bad_param(&name, "laziness must lie in [0, 1)"));
            }
            let n = 1usize << d;
            let mut rows = vec![vec![0.0; n]; n];
            for (x, row) in rows.iter_mut().enumerate() {
                row[x] = lazy;
                for i in 0..d {
                    row[x ^ (1 << i)] += (1.0 - lazy) / d as f64;
                }
            }
            let labels = (0..n).map(|x| format!("{x:0width$b}", width = d)).collect();
            let states = StateSpace::new(labels).map_err(internal)?;
            TransitionMatrix::new(states, rows).map_err(internal)
        }
        "rank_one" => {
            let weights: Vec<f64> = if args.is_empty() {
                vec![0.5, 0.5]
            } else {
                args.iter()
                    .map(|a| parse_float(&name, a))
                    .collect::<Result<_, _>>()?
            };
            if weights.len() < 2 {
                return Err(bad_param(&name, "need at least two weights"));
            }
            if weights.iter().any(|w| *w <= 0.0) {
                return Err(bad_param(&name, "weights must be strictly positive"));
            }
            let n = weights.len();
            chain(vec![weights; n])
        }
        "random_ergodic" => {
            if args.len() != 2 {
                return Err(bad_param(&name, "expected random_ergodic(n, seed)"));
            }
            let n = parse_usize(&name, &args[0])?;
            let seed = parse_u64(&name, &args[1])?;
            if !(2..=12).contains(&n) {
                return Err(bad_param(&name, "n must lie in 2..=12"));
            }
            chain(random_positive_rows(n, seed))
        }
        "three_state_negative_control" => {
            no_args(&name, &args)?;
            chain(NEGATIVE_CONTROL_ROWS.iter().map(|r| r.to_vec()).collect())
        }
        other => Err(CliError::Input(format!("unknown fixture {other:?}"))),
    }
}

/// Dense rows with entries in [0.1, 1.1) before normalization, so every
/// transition is positive and the chain is ergodic. Deterministic in
/// `(n, seed)`.
fn random_positive_rows(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n)
                .map(|_| 0.1 + (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
                .collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|v| v / sum).collect()
        })
        .collect()
}

fn chain(rows: Vec<Vec<f64>>) -> Result<TransitionMatrix, CliError> {
    TransitionMatrix::from_rows(rows).map_err(internal)
}

fn internal(e: redact_core::Error) -> CliError {
    CliError::Internal(format!("fixture construction failed: {e}"))
}

fn bad_param(name: &str, msg: &str) -> CliError {
    CliError::Input(format!("fixture {name}: {msg}"))
}

fn no_args(name: &str, args: &[String]) -> Result<(), CliError> {
    if args.is_empty() {
        Ok(())
    } else {
        Err(bad_param(name, "takes no parameters"))
    }
}

fn one_float(name: &str, args: &[String]) -> Result<f64, CliError> {
    if args.len() != 1 {
        return Err(bad_param(name, "expected exactly one parameter"));
    }
    parse_float(name, &args[0])
}

fn parse_float(name: &str, token: &str) -> Result<f64, CliError> {
    token
        .parse::<f64>()
        .map_err(|_| bad_param(name, &format!("bad numeral {token:?}")))
}

fn parse_usize(name: &str, token: &str) -> Result<usize, CliError> {
    token
        .parse::<usize>()
        .map_err(|_| bad_param(name, &format!("bad integer {token:?}")))
}

fn parse_u64(name: &str, token: &str) -> Result<u64, CliError> {
    token
        .parse::<u64>()
        .map_err(|_| bad_param(name, &format!("bad integer {token:?}")))
}

fn split_spec(spec: &str) -> Result<(String, Vec<String>), CliError> {
    let spec = spec.trim();
    match spec.split_once('(') {
        None => Ok((spec.to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| CliError::Input(format!("missing ')' in fixture {spec:?}")))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.trim().to_string()).collect()
            };
            Ok((name.trim().to_string(), args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use redact_core::check_sst_applicability;

    #[test]
    fn two_state_matches_definition() {
        let p = build_fixture("two_state(0.25)").unwrap();
        assert_eq!(p.row(0), &[0.75, 0.25]);
        assert_eq!(p.row(1), &[0.25, 0.75]);
    }

    #[test]
    fn example2_matches_definition() {
        let p = build_fixture("example2").unwrap();
        assert_eq!(p.row(0), &[0.5, 0.5]);
        assert_eq!(p.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn circulant_default_weights() {
        let p = build_fixture("circulant(3)").unwrap();
        assert_eq!(p.row(0), &[0.5, 0.5, 0.0]);
        assert_eq!(p.row(1), &[0.0, 0.5, 0.5]);
        assert_eq!(p.row(2), &[0.5, 0.0, 0.5]);
        assert!(check_sst_applicability(&p, 5, 1e-9).unwrap().applicable);
    }

    #[test]
    fn hypercube_is_doubly_stochastic_and_applicable() {
        let p = build_fixture("hypercube(3, 0.5)").unwrap();
        assert_eq!(p.n(), 8);
        let d = p.diagnostics();
        assert!(d.doubly_stochastic && d.irreducible && d.aperiodic);
        assert!(check_sst_applicability(&p, 5, 1e-9).unwrap().applicable);
        assert_eq!(p.states().label(5), "101");
    }

    #[test]
    fn negative_control_fails_operative_check_only() {
        let p = build_fixture("three_state_negative_control").unwrap();
        let v = check_sst_applicability(&p, 4, 1e-9).unwrap();
        assert!(!v.applicable && !v.operative);
        assert!(v.structural);
        let d = p.diagnostics();
        assert!(d.irreducible && d.aperiodic && d.doubly_stochastic);
    }

    #[test]
    fn random_ergodic_is_deterministic_and_ergodic() {
        let a = build_fixture("random_ergodic(4, 17)").unwrap();
        let b = build_fixture("random_ergodic(4, 17)").unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(a.is_ergodic());
        let c = build_fixture("random_ergodic(4, 18)").unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn every_catalog_fixture_validates() {
        for spec in [
            "two_state(0.25)",
            "example2",
            "circulant(3)",
            "circulant(4, 0.25, 0.25, 0.25, 0.25)",
            "hypercube(3, 0.5)",
            "rank_one",
            "rank_one(0.2, 0.3, 0.5)",
            "random_ergodic(3, 7)",
            "three_state_negative_control",
        ] {
            let chain = build_fixture(spec).unwrap_or_else(|e| panic!("{spec}: {e:?}"));
            assert!(chain.diagnostics().row_stochastic, "{spec}");
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(build_fixture("two_state(1.5)").is_err());
        assert!(build_fixture("two_state").is_err());
        assert!(build_fixture("no_such_fixture").is_err());
        assert!(build_fixture("circulant(3, 0.5)").is_err());
        assert!(build_fixture("hypercube(0, 0.5)").is_err());
        assert!(build_fixture("two_state(0.25").is_err());
    }
}
