//! Subcommand implementations. Each returns the process exit status:
//! 0 success, 2 validation failure, 3 failed audit verdict (internal errors
//! surface as `CliError` and map to 1).

use rand::RngCore;
use serde_json::{Value, json};

use redact_core::{
    Mechanism, MechanismSampler, RngStream, Start, TransitionMatrix, audit_privacy,
    distortion_sweep, empirical_distortion, mc_mi_estimate, sample_trajectory, smr_distortion,
    spectral_bound, sst_distortion,
};

use crate::chainfile::{load_chain, load_prior};
use crate::cli::{
    AuditArgs, BoundArgs, ChainSource, DistortionArgs, Format, MechanismArg, MechanismArgs,
    OutputArgs, SweepArgs, ValidateArgs,
};
use crate::config::RunConfig;
use crate::error::{CliError, from_core};
use crate::fixtures::build_fixture;
use crate::report::{emit_json, emit_text, sweep_csv, symbol_label};

fn load_source(source: &ChainSource) -> Result<(TransitionMatrix, String), CliError> {
    match (&source.fixture, &source.file) {
        (Some(spec), None) => Ok((build_fixture(spec)?, format!("fixture:{spec}"))),
        (None, Some(path)) => Ok((load_chain(path)?, format!("file:{}", path.display()))),
        _ => Err(CliError::Usage(
            "give exactly one of --fixture or --file".into(),
        )),
    }
}

/// Fixed-window needs `--k`; `none` is the identity control.
fn resolve_mechanism(arg: MechanismArg, k: Option<usize>) -> Result<(Mechanism, String), CliError> {
    match arg {
        MechanismArg::Sst => Ok((Mechanism::Sst, "sst".into())),
        MechanismArg::Smr => Ok((Mechanism::Smr, "smr".into())),
        MechanismArg::FixedWindow => {
            let k =
                k.ok_or_else(|| CliError::Usage("--mechanism fixed-window requires --k".into()))?;
            Ok((Mechanism::FixedWindow(k), format!("fixed-window({k})")))
        }
        MechanismArg::None => Ok((Mechanism::FixedWindow(0), "none".into())),
    }
}

/// Seeds are never defaulted silently: when omitted, one is drawn and
/// printed so the run stays reproducible.
fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s = rand::rng().next_u64();
            eprintln!("note: no --seed given; drew seed {s}");
            s
        }
    }
}

fn require_report_format(output: &OutputArgs) -> Result<(), CliError> {
    if output.format == Format::Csv {
        return Err(CliError::Usage(
            "--format csv is available for sweep only".into(),
        ));
    }
    Ok(())
}

fn out_string(output: &OutputArgs) -> Option<String> {
    output.out.as_ref().map(|p| p.display().to_string())
}

fn states_json(chain: &TransitionMatrix) -> Value {
    json!(chain.states().labels())
}

pub fn run_validate(args: &ValidateArgs) -> Result<u8, CliError> {
    require_report_format(&args.output)?;
    let (chain, desc) = load_source(&args.chain)?;
    let config = RunConfig::new(
        "validate",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    let diagnostics = chain.diagnostics();
    let stationary = match chain.stationary_distribution() {
        Ok(sol) => json!({"weights": sol.distribution.weights(), "unique": sol.unique}),
        Err(e) => json!({"error": e.to_string()}),
    };
    let doc = json!({
        "config": config,
        "states": states_json(&chain),
        "diagnostics": diagnostics,
        "stationary": stationary,
    });
    emit_json(&doc, &args.output.out)?;
    Ok(0)
}

pub fn run_mechanism(args: &MechanismArgs) -> Result<u8, CliError> {
    require_report_format(&args.output)?;
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let (chain, desc) = load_source(&args.chain)?;
    let (mechanism, mechanism_id) = resolve_mechanism(args.mechanism, args.k)?;
    let prior = load_prior(&args.prior, chain.n())?;
    let seed = resolve_seed(args.seed);
    let mut config = RunConfig::new(
        "mechanism",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    config.horizon = Some(args.horizon);
    config.mechanism = Some(mechanism_id);
    config.trials = Some(args.trials);
    config.seed = Some(seed);
    config.prior = Some(args.prior.clone());

    let sampler = MechanismSampler::prepare(mechanism, &chain, args.horizon).map_err(from_core)?;
    let base = RngStream::new(seed, 0);
    let mut runs = Vec::with_capacity(args.trials);
    let mut total_erasures = 0usize;
    for i in 0..args.trials {
        let mut rng = base.substream(i as u64).rng();
        let x = sample_trajectory(
            &chain,
            &Start::Random(prior.clone()),
            args.horizon,
            &mut rng,
        )
        .map_err(from_core)?;
        let released = sampler.run(&x, &mut rng).map_err(from_core)?;
        total_erasures += released.erasure_count();
        runs.push(json!({
            "trajectory": x.states().iter().map(|&s| chain.states().label(s)).collect::<Vec<_>>(),
            "released": released.symbols().iter().map(|&s| symbol_label(&chain, s)).collect::<Vec<_>>(),
            "window": released.window(),
        }));
    }
    let doc = json!({
        "config": config,
        "states": states_json(&chain),
        "runs": runs,
        "mean_erasures": total_erasures as f64 / args.trials as f64,
    });
    emit_json(&doc, &args.output.out)?;
    Ok(0)
}

pub fn run_audit(args: &AuditArgs) -> Result<u8, CliError> {
    require_report_format(&args.output)?;
    if args.tol_mi <= 0.0 || args.tol_tv <= 0.0 {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let (chain, desc) = load_source(&args.chain)?;
    let (mechanism, mechanism_id) = resolve_mechanism(args.mechanism, args.k)?;
    let prior = load_prior(&args.prior, chain.n())?;
    let mut config = RunConfig::new(
        "audit",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    config.horizon = Some(args.horizon);
    config.mechanism = Some(mechanism_id);
    config.prior = Some(args.prior.clone());
    config.tol_mi = Some(args.tol_mi);
    config.tol_tv = Some(args.tol_tv);

    if args.mc {
        let seed = resolve_seed(args.seed);
        config.seed = Some(seed);
        config.trials = Some(args.trials);
        let estimate = mc_mi_estimate(
            mechanism,
            &chain,
            args.horizon,
            &prior,
            args.trials,
            &RngStream::new(seed, 0),
        )
        .map_err(from_core)?;
        let doc = json!({
            "config": config,
            "states": states_json(&chain),
            "banner": "NOT A PROOF: Monte-Carlo estimate of the mutual information; \
                       the plug-in value is biased upward for finite samples. \
                       Use the exact audit for a verdict.",
            "estimate": estimate,
        });
        emit_json(&doc, &args.output.out)?;
        return Ok(0);
    }

    let report = audit_privacy(
        mechanism,
        &chain,
        args.horizon,
        &prior,
        args.tol_mi,
        args.tol_tv,
    )
    .map_err(|e| match e {
        redact_core::Error::EnumerationTooLarge { .. } => CliError::Input(format!(
            "{e}; rerun with --mc --trials N for a Monte-Carlo estimate (not a proof)"
        )),
        other => from_core(other),
    })?;
    let pass = report.pass;
    let doc = json!({
        "config": config,
        "states": states_json(&chain),
        "report": report,
        "verdict": if pass { "pass" } else { "fail" },
    });
    emit_json(&doc, &args.output.out)?;
    Ok(if pass { 0 } else { 3 })
}

pub fn run_distortion(args: &DistortionArgs) -> Result<u8, CliError> {
    require_report_format(&args.output)?;
    let (mechanism, mechanism_id) = match args.mechanism {
        MechanismArg::Sst => (Mechanism::Sst, "sst"),
        MechanismArg::Smr => (Mechanism::Smr, "smr"),
        _ => {
            return Err(CliError::Usage(
                "distortion supports --mechanism sst or smr".into(),
            ));
        }
    };
    let (chain, desc) = load_source(&args.chain)?;
    let prior = load_prior(&args.prior, chain.n())?;
    let seed = resolve_seed(args.seed);
    let mut config = RunConfig::new(
        "distortion",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    config.horizon = Some(args.horizon);
    config.mechanism = Some(mechanism_id.into());
    config.trials = Some(args.trials);
    config.seed = Some(seed);
    config.prior = Some(args.prior.clone());

    let exact_smr = smr_distortion(&chain, args.horizon).map_err(from_core)?;
    let exact_sst = match sst_distortion(&chain, 0, args.horizon) {
        Ok(v) => Some(v),
        Err(redact_core::Error::ZeroStationaryMass { .. })
        | Err(redact_core::Error::SingularSystem) => {
            if mechanism == Mechanism::Sst {
                return Err(CliError::Input(
                    "the stationary-time mechanism needs a strictly positive stationary distribution"
                        .into(),
                ));
            }
            None
        }
        Err(e) => return Err(from_core(e)),
    };
    let empirical = empirical_distortion(
        &chain,
        mechanism,
        args.horizon,
        args.trials,
        &prior,
        &RngStream::new(seed, 0),
    )
    .map_err(from_core)?;
    let spectral = match spectral_bound(&chain) {
        Ok(sb) => Some(sb),
        Err(redact_core::Error::BoundUndefined) => None,
        Err(e) => return Err(from_core(e)),
    };
    let doc = json!({
        "config": config,
        "states": states_json(&chain),
        "exact": {"smr": exact_smr, "sst": exact_sst},
        "empirical": empirical,
        "spectral": spectral,
    });
    emit_json(&doc, &args.output.out)?;
    Ok(0)
}

pub fn run_bound(args: &BoundArgs) -> Result<u8, CliError> {
    require_report_format(&args.output)?;
    let (chain, desc) = load_source(&args.chain)?;
    let config = RunConfig::new(
        "bound",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    let sb = spectral_bound(&chain).map_err(from_core)?;
    let doc = json!({
        "config": config,
        "states": states_json(&chain),
        "bound": sb,
    });
    emit_json(&doc, &args.output.out)?;
    Ok(0)
}

pub fn run_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    let (chain, desc) = load_source(&args.chain)?;
    let mut config = RunConfig::new(
        "sweep",
        desc,
        args.output.format.id(),
        out_string(&args.output),
    );
    config.horizon = Some(args.horizon);
    config.prior = Some(args.prior.clone());

    let mc = match args.trials {
        None => None,
        Some(trials) => {
            let mechanism = match args.mechanism {
                Some(MechanismArg::Sst) => Mechanism::Sst,
                Some(MechanismArg::Smr) => Mechanism::Smr,
                Some(_) => {
                    return Err(CliError::Usage(
                        "sweep sampling supports --mechanism sst or smr".into(),
                    ));
                }
                None => {
                    return Err(CliError::Usage(
                        "--trials needs --mechanism sst or smr".into(),
                    ));
                }
            };
            let prior = load_prior(&args.prior, chain.n())?;
            let seed = resolve_seed(args.seed);
            config.seed = Some(seed);
            config.trials = Some(trials);
            config.mechanism = Some(
                if mechanism == Mechanism::Sst {
                    "sst"
                } else {
                    "smr"
                }
                .into(),
            );
            Some(redact_core::McConfig {
                mechanism,
                trials,
                prior,
                stream: RngStream::new(seed, 0),
            })
        }
    };
    let grid: Vec<usize> = (0..=args.horizon).collect();
    let report = distortion_sweep(&chain, &grid, mc.as_ref()).map_err(from_core)?;
    report.check_invariants().map_err(from_core)?;
    match args.output.format {
        Format::Csv => emit_text(&sweep_csv(&report), &args.output.out)?,
        Format::Report => {
            let doc = json!({
                "config": config,
                "states": states_json(&chain),
                "sweep": report,
            });
            emit_json(&doc, &args.output.out)?;
        }
    }
    Ok(0)
}
