use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use double_lambda::checks::{verify_alpha, CheckOutcome, Status, VerifyConfig};
use double_lambda::efficiency::{closed_form, optimal_efficiency_closed};
use double_lambda::pmp_search::{optimize_piecewise_with, SearchResult, SearchSettings};
use double_lambda::propagation::{propagate_reduced, FieldState, IntegratorOptions};
use double_lambda::protocols::{controls_from_theta, Protocol, ProtocolSpec};
use double_lambda::table::{format_profile_table, parse_profile_table};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{EfficiencyArgs, Method, ProfileArgs, ProtocolKind, SearchArgs, SimulateArgs, VerifyArgs};
use crate::error::{CliError, CliResult};

pub enum Outcome {
    Success,
    ChecksFailed,
}

pub struct Output {
    pub path: Option<PathBuf>,
}

impl Output {
    fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.path {
            Some(p) => write_file(p, bytes),
            None => std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Io("<stdout>".into(), e)),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

fn json_bytes(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(parse_profile_table(&text)?)
}

fn build_protocol(kind: ProtocolKind, alpha: f64, args: &ProfileArgs) -> CliResult<Protocol> {
    Ok(match kind {
        ProtocolKind::Optimal => Protocol::Optimal,
        ProtocolKind::Constant => Protocol::Constant,
        ProtocolKind::Adiabatic => Protocol::Adiabatic {
            zeta0: args.zeta0.unwrap_or(alpha / 2.0),
            zbar: args.zbar.unwrap_or(alpha / 20.0),
        },
        ProtocolKind::Custom => {
            let path = args
                .profile_file
                .as_deref()
                .ok_or_else(|| CliError::Usage("--protocol custom needs --profile-file".into()))?;
            let (zeta, theta) = read_table(path)?;
            Protocol::Custom { zeta, theta }
        }
    })
}

pub fn simulate(args: &SimulateArgs, opts: &IntegratorOptions, out: &Output) -> CliResult<Outcome> {
    let alpha = match (args.alpha, args.protocol) {
        (Some(a), _) => a,
        (None, ProtocolKind::Custom) => {
            let path = args
                .profile
                .profile_file
                .as_deref()
                .ok_or_else(|| CliError::Usage("--protocol custom needs --profile-file".into()))?;
            *read_table(path)?.0.last().expect("table has rows")
        }
        (None, _) => 100.0,
    };
    let spec = ProtocolSpec::new(alpha, build_protocol(args.protocol, alpha, &args.profile)?);
    let traj = propagate_reduced(&spec.profile()?, alpha, FieldState::INCIDENT_PROBE, opts)?;
    let rows = traj.zeta.iter().zip(&traj.theta).zip(&traj.states).map(|((z, t), s)| {
        let (c, d) = controls_from_theta(*t);
        vec![
            num(*z),
            num(*t),
            num(c),
            num(d),
            num(s.omega_p),
            num(s.omega_s),
            num(s.omega_p * s.omega_p),
            num(s.omega_s * s.omega_s),
            num(s.norm_sqr()),
        ]
    });
    let header = [
        "zeta",
        "theta",
        "omega_c",
        "omega_d",
        "omega_p",
        "omega_s",
        "intensity_p",
        "intensity_s",
        "norm",
    ];
    out.write(&csv_bytes(&header, rows)?)?;
    Ok(Outcome::Success)
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn alpha_grid(min: f64, max: f64, steps: usize) -> CliResult<Vec<f64>> {
    if steps == 0 {
        return Err(CliError::Usage("--alpha-steps must be at least 1".into()));
    }
    if !(min > 0.0 && max >= min && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "alpha range must satisfy 0 < alpha-min <= alpha-max, got [{min}, {max}]"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|k| {
            if k == steps - 1 {
                max
            } else {
                min + (max - min) * k as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

pub fn efficiency(args: &EfficiencyArgs, opts: &IntegratorOptions, out: &Output) -> CliResult<Outcome> {
    let min = args.alpha_min.unwrap_or(args.alpha_max / args.alpha_steps.max(1) as f64);
    let alphas = alpha_grid(min, args.alpha_max, args.alpha_steps)?;
    let mut kinds = args.protocol.clone();
    kinds.sort_by_key(|k| format!("{k:?}").to_lowercase());
    kinds.dedup();
    if kinds.contains(&ProtocolKind::Custom) {
        return Err(CliError::Usage(
            "a custom profile has a fixed length; use `simulate --protocol custom` instead".into(),
        ));
    }
    let mut jobs = Vec::new();
    for &kind in &kinds {
        for &alpha in &alphas {
            jobs.push(ProtocolSpec::new(alpha, build_protocol(kind, alpha, &args.profile)?));
        }
    }
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|spec| {
            let closed = match args.method {
                Method::Numeric => None,
                _ => closed_form(spec)?,
            };
            let numeric = match args.method {
                Method::Closed => None,
                _ => {
                    let profile = spec.profile()?;
                    let traj = propagate_reduced(&profile, spec.alpha, FieldState::INCIDENT_PROBE, opts)?;
                    Some(traj.conversion_efficiency())
                }
            };
            Ok(vec![
                num(spec.alpha),
                spec.protocol.name().to_string(),
                closed.map(num).unwrap_or_default(),
                numeric.map(num).unwrap_or_default(),
            ])
        })
        .collect::<CliResult<_>>()?;
    out.write(&csv_bytes(&["alpha", "protocol", "eta_closed", "eta_numeric"], rows)?)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    warnings: usize,
    failures: usize,
    steps_per_unit: f64,
    seed: u64,
    checks: Vec<CheckOutcome>,
}

pub fn verify(args: &VerifyArgs, opts: &IntegratorOptions, out: &Output) -> CliResult<Outcome> {
    let config = VerifyConfig {
        integrator: *opts,
        dominance_samples: args.samples,
        seed: args.seed,
    };
    let per_alpha: Vec<Vec<CheckOutcome>> = args
        .alpha
        .par_iter()
        .map(|&alpha| verify_alpha(alpha, &config))
        .collect::<Result<_, _>>()?;
    let checks: Vec<CheckOutcome> = per_alpha.into_iter().flatten().collect();
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let report = VerifyReport {
        passed: count(Status::Fail) == 0,
        warnings: count(Status::Warn),
        failures: count(Status::Fail),
        steps_per_unit: opts.steps_per_unit,
        seed: args.seed,
        checks,
    };
    out.write(&json_bytes(&report)?)?;
    for c in report.checks.iter().filter(|c| c.status != Status::Pass) {
        eprintln!("{:?}: {} at alpha={} measured {} ({})", c.status, c.name, c.alpha, c.measured, c.threshold);
    }
    Ok(if report.passed { Outcome::Success } else { Outcome::ChecksFailed })
}

#[derive(Serialize)]
struct SearchReport<'a> {
    #[serde(flatten)]
    result: &'a SearchResult,
    optimal_bound: f64,
    gap_to_bound: f64,
    slope: f64,
    max_deviation_from_line: f64,
    profile_file: Option<String>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.profile.txt"))
}

pub fn search(args: &SearchArgs, opts: &IntegratorOptions, out: &Output) -> CliResult<Outcome> {
    let settings = SearchSettings {
        integrator: *opts,
        ..SearchSettings::new(args.alpha, args.segments, args.seed, args.budget)
    };
    let result = optimize_piecewise_with(&settings)?;
    let bound = optimal_efficiency_closed(args.alpha)?;
    let profile_path = args.profile_out.clone().or_else(|| out.path.as_deref().map(sidecar_path));
    if let Some(p) = &profile_path {
        let header = format!(
            "best profile: alpha={} segments={} seed={} efficiency={}",
            result.alpha, result.n_segments, result.seed, result.efficiency
        );
        write_file(p, format_profile_table(&result.zeta, &result.theta, &header).as_bytes())?;
    }
    let (slope, _) = result.linear_fit();
    let report = SearchReport {
        result: &result,
        optimal_bound: bound,
        gap_to_bound: bound - result.efficiency,
        slope,
        max_deviation_from_line: result.max_deviation_from_line(),
        profile_file: profile_path.map(|p| p.display().to_string()),
    };
    out.write(&json_bytes(&report)?)?;
    Ok(Outcome::Success)
}
