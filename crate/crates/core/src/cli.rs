//! Command-line sweeps emitting CSV.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::baselines::{kaplan_shamai_bound, tse_viswanath_bound};
use crate::error::OutageError;
use crate::exponents::{
    calibrate_lambda, calibrated_outage, high_rate_bounds, low_snr_outage, lower_exponent_ld, upper_exponent,
    ExponentBound,
};
use crate::largedev::{ChannelSpec, RatePoint};
use crate::metrics::{
    asymptotic_dmt, awgn_capacity, finite_snr_dmt, outage_capacity_bound, r0_curve, r0_minimum, regime_select,
    saddle_point_dmt, RegimeVariant,
};
use crate::montecarlo::{capacity_search_default, outage_mc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const METHODS: [&str; 9] = [
    "mc",
    "upper_ld",
    "lower_ld",
    "high_upper",
    "high_lower",
    "high_calibrated",
    "low_snr",
    "kaplan_shamai",
    "tse_viswanath",
];

pub const THREADS_ENV: &str = "OUTAGE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "outage-lab", version, about = "Outage probability sweeps for parallel Rayleigh fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outage probability per method over an SNR grid.
    Outage(SweepArgs),
    /// Normalized ε-outage capacity, simulated and from the saddle-point bound.
    Capacity(SweepArgs),
    /// Finite-SNR, empirical and asymptotic diversity.
    Dmt(DmtArgs),
    /// The r₀(γ) threshold curve and its minimum.
    R0(SweepArgs),
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    /// Number of subchannels.
    #[arg(long = "L", default_value_t = 4)]
    l: usize,
    /// Average multiplexing gain r̄.
    #[arg(long)]
    rbar: Option<f64>,
    /// Target outage probability for capacity runs.
    #[arg(long)]
    eps: Option<f64>,
    /// SNR grid in dB as start:stop:step.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Comma-separated method list.
    #[arg(long, value_delimiter = ',', default_value = "mc")]
    methods: Vec<String>,
    /// Monte Carlo trials per estimate (accepts forms such as 1e6).
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct DmtArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Source of d_finite: the calibrated high-rate curve or the saddle-point upper bound.
    #[arg(long, value_enum, default_value_t = DmtTheory::Calibrated)]
    theory: DmtTheory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DmtTheory {
    Calibrated,
    Saddle,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("'{s}' is not a nonnegative integer"))
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl From<OutageError> for CliError {
    fn from(e: OutageError) -> Self {
        match e {
            OutageError::Config(m) => CliError::Config(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `start:stop:step` into grid points `start + i·step ≤ stop`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("SNR grid must be start:stop:step, got '{spec}'"));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}' in SNR grid")))
        .collect::<Result<Vec<_>, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err("SNR grid values must be finite".into());
    }
    if !(step > 0.0) || start > stop {
        return Err(format!("SNR grid needs step > 0 and start <= stop, got '{spec}'"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Decimal text with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

fn gamma(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn point(l: usize, db: f64, rbar: f64) -> CliResult<(ChannelSpec, RatePoint)> {
    let c = ChannelSpec::new(l, gamma(db))?;
    let r = RatePoint::from_avg_multiplexing_gain(rbar, &c)?;
    Ok((c, r))
}

fn regime_flag(c: &ChannelSpec, r: &RatePoint) -> CliResult<String> {
    let tag = regime_select(c, r)?;
    Ok(match tag.variant {
        RegimeVariant::LowRate => "regime=low_rate",
        RegimeVariant::HighRate => "regime=high_rate",
        RegimeVariant::Boundary => "regime=boundary",
    }
    .into())
}

struct Row {
    value: Option<f64>,
    stderr: Option<f64>,
    flags: Vec<String>,
}

impl Row {
    fn bound(b: ExponentBound) -> Row {
        Row {
            value: Some(b.probability),
            stderr: None,
            flags: b.flag.into_iter().collect(),
        }
    }

    fn value(v: f64) -> Row {
        Row {
            value: Some(v),
            stderr: None,
            flags: vec![],
        }
    }

    fn missing(flag: &str) -> Row {
        Row {
            value: None,
            stderr: None,
            flags: vec![flag.into()],
        }
    }
}

/// Regime violations become empty rows; anything else aborts the sweep.
fn soften<T>(r: crate::Result<T>, f: impl FnOnce(T) -> Row) -> CliResult<Row> {
    match r {
        Ok(v) => Ok(f(v)),
        Err(OutageError::Regime(_)) => Ok(Row::missing("regime_violation")),
        Err(OutageError::Range(_)) => Ok(Row::missing("out_of_range")),
        Err(e) => Err(e.into()),
    }
}

struct Calibration {
    lambda: f64,
    flag: Option<&'static str>,
}

/// λ from a Monte Carlo anchor at 0 dB; `λ = 0` when no trials are requested.
fn calibration(l: usize, rbar: f64, trials: u64, seed: u64) -> CliResult<Calibration> {
    if trials == 0 {
        return Ok(Calibration { lambda: 0.0, flag: Some("uncalibrated") });
    }
    let (c, r) = point(l, 0.0, rbar)?;
    let anchor = outage_mc(&c, &r, trials, seed)?;
    let cal = calibrate_lambda(&c, &r, &anchor)?;
    // keep λ inside [0, L)
    let lambda = cal.lambda.min(l as f64 * (1.0 - f64::EPSILON));
    Ok(Calibration {
        lambda,
        flag: cal.clamped.then_some("lambda_clamped"),
    })
}

fn require_rbar(a: &SweepArgs) -> CliResult<f64> {
    match a.rbar {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(CliError::Config(format!("--rbar must be positive, got {v}"))),
        None => Err(CliError::Config("--rbar is required".into())),
    }
}

fn check_l(a: &SweepArgs) -> CliResult<()> {
    if a.l < 1 || a.l > crate::specialfn::product::DEFAULT_DEPTH_LIMIT {
        return Err(CliError::Config(format!(
            "--L must lie in 1..={}, got {}",
            crate::specialfn::product::DEFAULT_DEPTH_LIMIT,
            a.l
        )));
    }
    Ok(())
}

fn grid(a: &SweepArgs, default: &str) -> CliResult<Vec<f64>> {
    parse_grid(a.snr_db.as_deref().unwrap_or(default)).map_err(CliError::Config)
}

fn outage_row(method: &str, a: &SweepArgs, db: f64, rbar: f64, cal: Option<&Calibration>) -> CliResult<Row> {
    let (c, r) = point(a.l, db, rbar)?;
    let mut row = match method {
        "mc" => {
            let e = outage_mc(&c, &r, a.trials, a.seed)?;
            Row {
                value: Some(e.p_hat),
                stderr: Some(e.stderr),
                flags: if e.unresolved() { vec!["unresolved".into()] } else { vec![] },
            }
        }
        "upper_ld" => soften(upper_exponent(&c, &r), Row::bound)?,
        "lower_ld" => soften(lower_exponent_ld(&c, &r), |(b, _)| Row::bound(b))?,
        "high_upper" => soften(high_rate_bounds(&c, &r), |(u, _)| Row::bound(u))?,
        "high_lower" => soften(high_rate_bounds(&c, &r), |(_, l)| Row::bound(l))?,
        "high_calibrated" => {
            let cal = cal.expect("calibration prepared for high_calibrated");
            let mut row = soften(calibrated_outage(&c, &r, cal.lambda), Row::bound)?;
            row.flags.extend(cal.flag.map(String::from));
            row
        }
        "low_snr" => Row::value(low_snr_outage(&c, &r)?),
        "kaplan_shamai" => soften(kaplan_shamai_bound(&c, &r), Row::bound)?,
        "tse_viswanath" => Row::bound(tse_viswanath_bound(&c, &r)?),
        other => return Err(CliError::Config(format!("unknown method '{other}'"))),
    };
    row.flags.insert(0, regime_flag(&c, &r)?);
    Ok(row)
}

fn cmd_outage(a: &SweepArgs) -> CliResult<String> {
    check_l(a)?;
    let rbar = require_rbar(a)?;
    let grid = grid(a, "0:20:5")?;
    let mut methods: Vec<String> = a.methods.iter().map(|m| m.trim().to_string()).collect();
    if methods.is_empty() {
        return Err(CliError::Config("--methods must not be empty".into()));
    }
    if let Some(bad) = methods.iter().find(|m| !METHODS.contains(&m.as_str())) {
        return Err(CliError::Config(format!("unknown method '{bad}'; known: {}", METHODS.join(","))));
    }
    if methods.iter().any(|m| m == "mc") && a.trials == 0 {
        return Err(CliError::Config("method mc needs --trials >= 1".into()));
    }
    methods.sort();
    methods.dedup();
    let cal = if methods.iter().any(|m| m == "high_calibrated") {
        Some(calibration(a.l, rbar, a.trials, a.seed)?)
    } else {
        None
    };
    let mut out = String::from("snr_db,method,L,rbar,value,stderr,flag\n");
    for m in &methods {
        let rows = grid
            .par_iter()
            .map(|&db| outage_row(m, a, db, rbar, cal.as_ref()))
            .collect::<CliResult<Vec<_>>>()?;
        for (db, row) in grid.iter().zip(rows) {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt12(*db),
                m,
                a.l,
                fmt12(rbar),
                fmt_opt(row.value),
                fmt_opt(row.stderr),
                row.flags.join(";")
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn cmd_capacity(a: &SweepArgs) -> CliResult<String> {
    check_l(a)?;
    let eps = match a.eps {
        Some(e) if e > 0.0 && e < 1.0 => e,
        Some(e) => return Err(CliError::Config(format!("--eps must lie in (0, 1), got {e}"))),
        None => return Err(CliError::Config("--eps is required".into())),
    };
    let grid = grid(a, "10:40:5")?;
    let rows = grid
        .par_iter()
        .map(|&db| -> CliResult<(Option<f64>, Option<f64>)> {
            let c = ChannelSpec::new(a.l, gamma(db))?;
            let sim = if a.trials > 0 {
                Some(capacity_search_default(&c, eps, a.trials, a.seed)?.c_norm)
            } else {
                None
            };
            let theory = match outage_capacity_bound(&c, eps) {
                Ok(v) => Some(v / awgn_capacity(c.snr)),
                Err(OutageError::Regime(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Ok((sim, theory))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::from("snr_db,eps,L,c_norm_sim,c_norm_theory\n");
    for (db, (sim, theory)) in grid.iter().zip(rows) {
        writeln!(out, "{},{},{},{},{}", fmt12(*db), fmt12(eps), a.l, fmt_opt(sim), fmt_opt(theory)).unwrap();
    }
    Ok(out)
}

fn cmd_dmt(d: &DmtArgs) -> CliResult<String> {
    let a = &d.sweep;
    check_l(a)?;
    let rbar = require_rbar(a)?;
    if rbar >= 1.0 {
        return Err(CliError::Config(format!("--rbar must lie in (0, 1) for dmt, got {rbar}")));
    }
    let spec = a.snr_db.as_deref().unwrap_or("10:60:5");
    let grid = parse_grid(spec).map_err(CliError::Config)?;
    let step: f64 = spec.rsplit(':').next().and_then(|s| s.trim().parse().ok()).unwrap_or(1.0);
    let lambda = match d.theory {
        DmtTheory::Calibrated => calibration(a.l, rbar, a.trials, a.seed)?.lambda,
        DmtTheory::Saddle => 0.0,
    };
    let d_asym = asymptotic_dmt(a.l, rbar * a.l as f64)?;
    let rows = grid
        .par_iter()
        .map(|&db| -> CliResult<(Option<f64>, Option<f64>)> {
            let (c, r) = point(a.l, db, rbar)?;
            let d_f = match d.theory {
                DmtTheory::Calibrated => finite_snr_dmt(&c, &r, lambda),
                DmtTheory::Saddle => saddle_point_dmt(&c, &r),
            };
            let d_f = match d_f {
                Ok(v) => Some(v),
                Err(OutageError::Range(_) | OutageError::Regime(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let d_emp = if a.trials > 0 {
                let (lo_db, hi_db) = (db - 0.5 * step, db + 0.5 * step);
                let (c1, r1) = point(a.l, lo_db, rbar)?;
                let (c2, r2) = point(a.l, hi_db, rbar)?;
                let p1 = outage_mc(&c1, &r1, a.trials, a.seed)?.p_hat;
                let p2 = outage_mc(&c2, &r2, a.trials, a.seed)?.p_hat;
                (p1 > 0.0 && p2 > 0.0).then(|| -(p2.ln() - p1.ln()) / (c2.snr.ln() - c1.snr.ln()))
            } else {
                None
            };
            Ok((d_f, d_emp))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::from("snr_db,L,rbar,d_finite,d_empirical,d_asymptotic\n");
    for (db, (d_f, d_emp)) in grid.iter().zip(rows) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt12(*db),
            a.l,
            fmt12(rbar),
            fmt_opt(d_f),
            fmt_opt(d_emp),
            fmt12(d_asym)
        )
        .unwrap();
    }
    Ok(out)
}

fn cmd_r0(a: &SweepArgs) -> CliResult<String> {
    let grid = grid(a, "-20:40:0.5")?;
    let vals = grid
        .par_iter()
        .map(|&db| r0_curve(gamma(db)))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut out = String::from("snr_db,r0\n");
    for (db, v) in grid.iter().zip(vals) {
        writeln!(out, "{},{}", fmt12(*db), fmt12(v)).unwrap();
    }
    let (g, r) = r0_minimum()?;
    writeln!(out, "# min: gamma_db={}, r0={}", fmt12(10.0 * g.log10()), fmt12(r)).unwrap();
    Ok(out)
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| {
        let (args, text) = match &cli.command {
            Command::Outage(a) => (a, cmd_outage(a)),
            Command::Capacity(a) => (a, cmd_capacity(a)),
            Command::Dmt(a) => (&a.sweep, cmd_dmt(a)),
            Command::R0(a) => (a, cmd_r0(a)),
        };
        let text = text?;
        match &args.out {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            EXIT_CONFIG
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            EXIT_NUMERICAL
        }
    }
}
