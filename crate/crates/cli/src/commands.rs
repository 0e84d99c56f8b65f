//! Subcommand implementations.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use permadde::asymptotics::{
    default_verify_tolerance, seeded_histories, tail_extrema, verify_gas, verify_permanence_with,
    verify_sandwich, SandwichVerdict,
};
use permadde::bounds::{bounds_report_with, build_envelopes, BoundsReport, TailSampling};
use permadde::error::IntegrateError;
use permadde::integrate::{integrate, SolverConfig, Trajectory};
use permadde::model::{HistorySpec, ModelSpec};

use crate::input::{load_model, parse_history, parse_range, set_param};
use crate::{BoundsArgs, CliError, SimulateArgs, SweepArgs, VerifyArgs};

/// Node-wise tolerance for envelope sandwich checks.
const SANDWICH_TOLERANCE: f64 = 1e-6;

fn integrate_err(e: IntegrateError) -> CliError {
    match e {
        IntegrateError::NonFiniteValue { .. } | IntegrateError::PositivityLoss { .. } => {
            CliError::integrator(e.to_string())
        }
        other => CliError::input(other.to_string()),
    }
}

fn writer_for(out: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

fn emit_json(out: Option<&PathBuf>, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = writer_for(out)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::input(format!("cannot write output: {e}")))?;
    writeln!(w).map_err(|e| CliError::input(format!("cannot write output: {e}")))?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let model = load_model(args.model.model.as_deref(), args.model.preset.as_deref())?;
    let history = parse_history(&args.history)?;
    let cfg = args.solver.config()?;
    for w in cfg.warnings(model.tau_max) {
        eprintln!("warning: {w}");
    }
    let traj = integrate(&model, &history, &cfg).map_err(integrate_err)?;
    let mut w = writer_for(args.out.as_ref())?;
    traj.write_csv(&mut w, false)
        .map_err(|e| CliError::input(format!("cannot write trajectory: {e}")))?;
    Ok(0)
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<i32, CliError> {
    let model = load_model(args.model.model.as_deref(), args.model.preset.as_deref())?;
    let report = bounds_report_with(&model, &TailSampling::default(), crate::check_horizon()?)
        .map_err(|e| CliError::input(e.to_string()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit_json(
        args.out.as_ref(),
        &serde_json::to_value(&report).expect("report serializes"),
    )?;
    eprintln!(
        "family {}, permanent: {}, certified: {:?}",
        report.family, report.permanent, report.certified
    );
    Ok(if report.permanent { 0 } else { 2 })
}

fn load_report(path: &Path) -> Result<BoundsReport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))
}

fn ensemble(
    model: &ModelSpec,
    histories: &[HistorySpec],
    cfg: &SolverConfig,
) -> Result<Vec<Trajectory>, CliError> {
    histories
        .par_iter()
        .map(|h| integrate(model, h, cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(integrate_err)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    if args.ensemble == 0 {
        return Err(CliError::input("--N must be at least 1"));
    }
    let model = load_model(args.model.model.as_deref(), args.model.preset.as_deref())?;
    let cfg = args.solver.config()?;
    for w in cfg.warnings(model.tau_max) {
        eprintln!("warning: {w}");
    }
    let report = match &args.bounds {
        Some(path) => load_report(path)?,
        None => bounds_report_with(&model, &TailSampling::default(), crate::check_horizon()?)
            .map_err(|e| CliError::input(e.to_string()))?,
    };

    let k_ref = report
        .certified
        .map(|(_, hi)| hi)
        .or(report.k_u)
        .filter(|v| *v > 0.0)
        .unwrap_or(1.0);
    let histories = seeded_histories(args.seed, args.ensemble, k_ref);
    let trajs = ensemble(&model, &histories, &cfg)?;

    let sandwich = if args.envelopes {
        let pair = build_envelopes(&model).map_err(|e| CliError::input(e.to_string()))?;
        // the capped minorant of a humped Ricker term only undercuts it on
        // the eventual range, so the node-wise lower comparison is not a
        // theorem there; check the upper side alone
        let has_humped = model
            .recruitment
            .iter()
            .any(|t| t.kind == permadde::model::RecruitmentKind::Ricker);
        let lows = if has_humped {
            eprintln!(
                "warning: humped recruitment present; envelope check covers the upper side only"
            );
            None
        } else {
            Some(ensemble(&pair.lower, &histories, &cfg)?)
        };
        let highs = ensemble(&pair.upper, &histories, &cfg)?;
        let mut worst: Option<SandwichVerdict> = None;
        for i in 0..trajs.len() {
            let lower = lows.as_ref().map_or(&trajs[i], |v| &v[i]);
            let v = verify_sandwich(&trajs[i], lower, &highs[i], SANDWICH_TOLERANCE)
                .map_err(|e| CliError::input(e.to_string()))?;
            let replace = worst
                .as_ref()
                .is_none_or(|w| v.max_violation > w.max_violation);
            if replace {
                worst = Some(v);
            }
        }
        worst
    } else {
        None
    };
    let sandwich_pass = sandwich.as_ref().is_none_or(|s| s.pass);

    if report.permanent {
        let tol = args
            .tol
            .unwrap_or_else(|| default_verify_tolerance(&report));
        let verdict = verify_permanence_with(&trajs, &report, tol, args.tail_fraction)
            .map_err(|e| CliError::input(e.to_string()))?;
        let pass = verdict.pass && sandwich_pass;
        emit_json(
            args.out.as_ref(),
            &serde_json::json!({
                "mode": "permanence",
                "tolerance": tol,
                "permanence": verdict,
                "sandwich": sandwich,
            }),
        )?;
        Ok(if pass { 0 } else { 2 })
    } else if report.k_u == Some(0.0) {
        // even the upper envelope has zero as its unique equilibrium, so
        // extinction is certified; verify attraction to zero
        let tol = args.tol.unwrap_or(1e-4);
        let pass = verify_gas(&trajs, 0.0, tol) && sandwich_pass;
        emit_json(
            args.out.as_ref(),
            &serde_json::json!({
                "mode": "gas-zero",
                "tolerance": tol,
                "gas_pass": pass,
                "sandwich": sandwich,
            }),
        )?;
        Ok(if pass { 0 } else { 2 })
    } else {
        Err(CliError::input(
            "bounds report certifies neither permanence nor extinction; nothing to verify",
        ))
    }
}

struct SweepRow {
    value: f64,
    permanent: bool,
    m0: Option<f64>,
    big_m0: Option<f64>,
    k_l: Option<f64>,
    k_u: Option<f64>,
    tail: Option<(f64, f64)>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32, CliError> {
    let base = load_model(args.model.model.as_deref(), args.model.preset.as_deref())?;
    let (lo, hi, count) = parse_range(&args.range)?;
    {
        // surface a bad parameter path before fanning out
        let mut probe = base.clone();
        set_param(&mut probe, &args.param, lo)?;
    }
    let cfg = args.solver.config()?;
    let check_horizon = crate::check_horizon()?;

    let rows: Vec<SweepRow> = (0..count)
        .into_par_iter()
        .map(|i| {
            let value = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let mut model = base.clone();
            let report = set_param(&mut model, &args.param, value)
                .ok()
                .and_then(|_| {
                    bounds_report_with(&model, &TailSampling::default(), check_horizon).ok()
                });
            let k_ref = report
                .as_ref()
                .and_then(|r| r.certified.map(|(_, hi)| hi).or(r.k_u))
                .filter(|v| *v > 0.0)
                .unwrap_or(1.0);
            let history = seeded_histories(args.seed, 1, k_ref).pop().unwrap();
            let tail = integrate(&model, &history, &cfg)
                .ok()
                .and_then(|traj| tail_extrema(&traj, args.tail_fraction, false).ok())
                .map(|t| (t.liminf_est, t.limsup_est));
            SweepRow {
                value,
                permanent: report.as_ref().is_some_and(|r| r.permanent),
                m0: report.as_ref().and_then(|r| r.m0),
                big_m0: report.as_ref().and_then(|r| r.big_m0),
                k_l: report.as_ref().and_then(|r| r.k_l),
                k_u: report.as_ref().and_then(|r| r.k_u),
                tail,
            }
        })
        .collect();

    let mut w = writer_for(args.out.as_ref())?;
    let io_err = |e: std::io::Error| CliError::input(format!("cannot write sweep: {e}"));
    writeln!(w, "value,permanent,m0,M0,K_l,K_u,tail_liminf,tail_limsup").map_err(io_err)?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.value,
            row.permanent,
            opt(row.m0),
            opt(row.big_m0),
            opt(row.k_l),
            opt(row.k_u),
            opt(row.tail.map(|t| t.0)),
            opt(row.tail.map(|t| t.1)),
        )
        .map_err(io_err)?;
    }
    Ok(0)
}
