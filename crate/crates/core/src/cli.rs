//! Command-line front end.
//!
//! Times are given and reported in femtoseconds, frequencies in rad/s and
//! phases in radians. With `--two-pole` and no `--omega0` the response is
//! normalized: `ω₀ = 1`, time flags and time columns are in units of
//! `1/ω₀`, and frequencies in units of `ω₀`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::fidelity::{self, Direction, GateGeometry};
use crate::phasenoise::{self, NoiseSpectrum};
use crate::pulse::PulseShape;
use crate::response::{self, ResponseModel, TwoPoleParams};
use crate::sweep::{self, Axis, BoundSelector, DelayRule, PulseKind, Spacing, SweepSpec};

const FS: f64 = 1e-15;
/// `ω₀` used in normalized mode, so that one time unit is `1/ω₀`.
const NORMALIZED_OMEGA0: f64 = 1e15;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "xpm-fidelity", version, about = "Phase-noise fidelity bounds for cross-phase-modulation gates")]
#[command(after_help = "Units: times in fs, frequencies in rad/s, phases in rad. \
With --two-pole and no --omega0, everything is in units of omega0 (times in 1/omega0).")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Response metrics: t_h, integral of |Im H|, and F_max.
    Metrics {
        #[command(flatten)]
        response: ResponseArgs,
    },
    /// F_max of the normalized two-pole family versus damping.
    FmaxSweep {
        #[arg(long, default_value_t = 0.05)]
        gamma_min: f64,
        #[arg(long, default_value_t = 20.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        /// Log-spaced damping values.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Heat map of the F1 bound over phase and walk-off time.
    Heatmap {
        #[command(flatten)]
        response: ResponseArgs,
        #[command(flatten)]
        pulse: PulseArgs,
        #[arg(long, default_value_t = 0.0)]
        phi_min: f64,
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        phi_max: f64,
        #[arg(long, default_value_t = 256)]
        phi_points: usize,
        #[arg(long, default_value_t = 1.0)]
        walkoff_min_fs: f64,
        #[arg(long, default_value_t = 200.0)]
        walkoff_max_fs: f64,
        #[arg(long, default_value_t = 256)]
        walkoff_points: usize,
        /// Linear walk-off axis (default is log).
        #[arg(long)]
        walkoff_linear: bool,
        /// Fixed delay in fs (default: half the walk-off time).
        #[arg(long)]
        delay_fs: Option<f64>,
        #[arg(long, value_enum, default_value_t = BoundArg::F1)]
        bound: BoundArg,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Skip the local refinement of the peak.
        #[arg(long)]
        no_refine: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Induced phase profile seen by one pulse.
    PhaseProfile {
        #[command(flatten)]
        response: ResponseArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        pulse: PulseArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::ASeesB)]
        direction: DirectionArg,
        #[arg(long)]
        t_min_fs: Option<f64>,
        #[arg(long)]
        t_max_fs: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cascaded XPM+PMP bound versus the number of cells.
    Pmp {
        #[command(flatten)]
        response: ResponseArgs,
        #[command(flatten)]
        pulse: PulseArgs,
        /// Total phase shared equally among the cells.
        #[arg(long, default_value_t = std::f64::consts::PI)]
        total_phi: f64,
        /// Cell counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
        cells: Vec<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of <exp(i xi)> against the analytic value.
    McValidate {
        #[command(flatten)]
        response: ResponseArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 100_000)]
        realizations: usize,
        /// Time-grid points per realization (power of two).
        #[arg(long, default_value_t = 256)]
        n_time: usize,
        /// Grid spacing in fs (default: the largest alias-free spacing).
        #[arg(long)]
        dt_fs: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the first realizations to this CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        dump_rows: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct ResponseArgs {
    /// Use the two-pole response.
    #[arg(long, conflicts_with = "response_file")]
    two_pole: bool,
    /// Resonance frequency (rad/s).
    #[arg(long, requires = "two_pole")]
    omega0: Option<f64>,
    /// Damping rate (rad/s).
    #[arg(long, requires = "omega0", conflicts_with = "gamma_norm")]
    gamma: Option<f64>,
    /// Normalized damping gamma/omega0.
    #[arg(long, requires = "two_pole")]
    gamma_norm: Option<f64>,
    /// Tabulated response CSV with header `t_fs,h`.
    #[arg(long)]
    response_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GeometryArgs {
    /// Uniform phase eta*u (rad).
    #[arg(long, conflicts_with = "eta")]
    phi: Option<f64>,
    /// Walk-off time L/u (fs).
    #[arg(long, conflicts_with = "length_m")]
    walkoff_fs: Option<f64>,
    /// Delay of the fast pulse (fs); default half the walk-off time.
    #[arg(long)]
    delay_fs: Option<f64>,
    /// Nonlinearity (rad s/m).
    #[arg(long, requires_all = ["length_m", "va", "vb"])]
    eta: Option<f64>,
    /// Medium length (m).
    #[arg(long, requires = "eta")]
    length_m: Option<f64>,
    /// Group velocity of the slow pulse A (m/s).
    #[arg(long, requires = "eta")]
    va: Option<f64>,
    /// Group velocity of the fast pulse B (m/s).
    #[arg(long, requires = "eta")]
    vb: Option<f64>,
    /// Reservoir temperature (K).
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
}

#[derive(Args, Debug, Clone)]
struct PulseArgs {
    #[arg(long, value_enum, default_value_t = PulseArg::Dirac)]
    pulse: PulseArg,
    /// RMS duration of Gaussian pulses (fs).
    #[arg(long)]
    t_psi_fs: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file (default named after the subcommand).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PulseArg {
    Dirac,
    Gaussian,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BoundArg {
    F1,
    F0,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum DirectionArg {
    ASeesB,
    BSeesA,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Lib(e) => match e {
                Error::InvalidParameter { .. } | Error::Config(_) => EXIT_USAGE,
                Error::Parse { .. } | Error::Validation { .. } => EXIT_DATA,
                Error::Accuracy { .. } | Error::Consistency { .. } => EXIT_CONVERGENCE,
                _ => EXIT_OTHER,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name), run, and return the exit
/// code. The JSON summary goes to standard output, errors to standard
/// error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(CliError::Usage(format!("--threads: {e}"))),
        },
        None => execute(&cli.command),
    };
    match outcome {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(out, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> CliResult<Value> {
    let start = Instant::now();
    let (name, inputs, results) = match command {
        Command::Metrics { response } => ("metrics", inputs_of(response), metrics(response)?),
        Command::FmaxSweep {
            gamma_min,
            gamma_max,
            points,
            log,
            output,
        } => (
            "fmax-sweep",
            json!({"gamma_min": gamma_min, "gamma_max": gamma_max, "points": points, "log": log}),
            fmax_sweep(*gamma_min, *gamma_max, *points, *log, output)?,
        ),
        Command::Heatmap {
            response,
            pulse,
            phi_min,
            phi_max,
            phi_points,
            walkoff_min_fs,
            walkoff_max_fs,
            walkoff_points,
            walkoff_linear,
            delay_fs,
            bound,
            temperature,
            no_refine,
            output,
        } => {
            let resolved = resolve_response(response)?;
            let spec = SweepSpec {
                phi: Axis::linear("phi", *phi_min, *phi_max, *phi_points)?,
                walkoff: Axis::new(
                    "walkoff",
                    walkoff_min_fs * FS,
                    walkoff_max_fs * FS,
                    *walkoff_points,
                    if *walkoff_linear { Spacing::Linear } else { Spacing::Log },
                )?,
                bound: match bound {
                    BoundArg::F1 => BoundSelector::F1maxNonuniform,
                    BoundArg::F0 => BoundSelector::F0Nonuniform,
                },
                pulse: pulse_kind(pulse)?,
                delay_rule: match delay_fs {
                    Some(d) => DelayRule::Fixed { delay: d * FS },
                    None => DelayRule::Symmetric,
                },
                temperature: *temperature,
                refine: !no_refine,
            };
            let mut inputs = inputs_of(response);
            inputs["pulse"] = json!(spec.pulse);
            inputs["phi_axis"] = json!([phi_min, phi_max, phi_points]);
            inputs["walkoff_axis_fs"] = json!([walkoff_min_fs, walkoff_max_fs, walkoff_points, !walkoff_linear]);
            inputs["delay_fs"] = json!(delay_fs);
            inputs["temperature"] = json!(temperature);
            ("heatmap", inputs, heatmap(&resolved, &spec, output)?)
        }
        Command::PhaseProfile {
            response,
            geometry,
            pulse,
            direction,
            t_min_fs,
            t_max_fs,
            points,
            output,
        } => {
            let resolved = resolve_response(response)?;
            let g = resolve_geometry(geometry)?;
            let mut inputs = inputs_of(response);
            inputs["geometry"] = geometry_echo(&g);
            (
                "phase-profile",
                inputs,
                phase_profile(&resolved, &g, pulse, *direction, (*t_min_fs, *t_max_fs), *points, output)?,
            )
        }
        Command::Pmp {
            response,
            pulse,
            total_phi,
            cells,
            output,
        } => {
            let resolved = resolve_response(response)?;
            let mut inputs = inputs_of(response);
            inputs["total_phi"] = json!(total_phi);
            inputs["cells"] = json!(cells);
            ("pmp", inputs, pmp(&resolved, pulse, *total_phi, cells, output)?)
        }
        Command::McValidate {
            response,
            geometry,
            realizations,
            n_time,
            dt_fs,
            seed,
            dump,
            dump_rows,
        } => {
            let resolved = resolve_response(response)?;
            let mut inputs = inputs_of(response);
            inputs["realizations"] = json!(realizations);
            inputs["n_time"] = json!(n_time);
            inputs["seed"] = json!(seed);
            let results = mc_validate(&resolved, geometry, *realizations, *n_time, *dt_fs, *seed, dump.as_deref(), *dump_rows)?;
            ("mc-validate", inputs, results)
        }
    };
    let mut summary = json!({
        "tool": "xpm-fidelity",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "inputs": inputs,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    if let (Value::Object(map), Value::Object(extra)) = (&mut summary, results) {
        map.extend(extra);
    }
    Ok(summary)
}

struct Resolved {
    model: ResponseModel,
    normalized: bool,
}

fn resolve_response(args: &ResponseArgs) -> CliResult<Resolved> {
    if let Some(path) = &args.response_file {
        let file = File::open(path)
            .map_err(|e| CliError::Data(format!("cannot read response file {}: {e}", path.display())))?;
        let table = response::load_tabulated(std::io::BufReader::new(file))
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        return Ok(Resolved {
            model: table.into(),
            normalized: false,
        });
    }
    if !args.two_pole {
        return Err(CliError::Usage("give a response: --two-pole or --response-file <PATH>".into()));
    }
    let (omega0, normalized) = match args.omega0 {
        Some(w) => (w, false),
        None => (NORMALIZED_OMEGA0, true),
    };
    let params = match (args.gamma, args.gamma_norm) {
        (Some(g), None) => TwoPoleParams::new(omega0, g)?,
        (None, Some(gn)) => TwoPoleParams::from_normalized(omega0, gn)?,
        _ => return Err(CliError::Usage("--two-pole needs --gamma-norm, or --omega0 with --gamma".into())),
    };
    Ok(Resolved {
        model: params.into(),
        normalized,
    })
}

fn inputs_of(args: &ResponseArgs) -> Value {
    match &args.response_file {
        Some(p) => json!({"response_file": p.display().to_string()}),
        None => json!({
            "two_pole": args.two_pole,
            "omega0": args.omega0,
            "gamma": args.gamma,
            "gamma_norm": args.gamma_norm,
        }),
    }
}

fn resolve_geometry(args: &GeometryArgs) -> CliResult<GateGeometry> {
    let g = if let Some(eta) = args.eta {
        let (l, va, vb) = (args.length_m.unwrap_or(0.0), args.va.unwrap_or(0.0), args.vb.unwrap_or(0.0));
        let mut g = GateGeometry::from_raw(eta, l, va, vb, 0.0)?;
        g.delay = args.delay_fs.map_or(0.5 * g.walkoff_time, |d| d * FS);
        GateGeometry::new(g.phi, g.walkoff_time, g.delay)?
    } else {
        let phi = args.phi.ok_or_else(|| CliError::Usage("give --phi and --walkoff-fs, or --eta/--length-m/--va/--vb".into()))?;
        let tw = args.walkoff_fs.ok_or_else(|| CliError::Usage("missing --walkoff-fs".into()))? * FS;
        GateGeometry::new(phi, tw, args.delay_fs.map_or(0.5 * tw, |d| d * FS))?
    };
    Ok(g.with_temperature(args.temperature)?)
}

fn geometry_echo(g: &GateGeometry) -> Value {
    json!({
        "phi": g.phi,
        "walkoff_fs": g.walkoff_time / FS,
        "delay_fs": g.delay / FS,
        "temperature": g.temperature,
    })
}

fn pulse_kind(args: &PulseArgs) -> CliResult<PulseKind> {
    match (args.pulse, args.t_psi_fs) {
        (PulseArg::Dirac, None) => Ok(PulseKind::Dirac),
        (PulseArg::Dirac, Some(_)) => Err(CliError::Usage("--t-psi-fs applies only to --pulse gaussian".into())),
        (PulseArg::Gaussian, Some(t)) if t > 0.0 => Ok(PulseKind::Gaussian { t_psi: t * FS }),
        (PulseArg::Gaussian, _) => Err(CliError::Usage("--pulse gaussian needs --t-psi-fs > 0".into())),
    }
}

fn metrics(args: &ResponseArgs) -> CliResult<Value> {
    let r = resolve_response(args)?;
    let m = response::metrics(&r.model)?;
    let fmax = fidelity::fmax(&r.model)?.value;
    let mut results = json!({ "fmax": fmax });
    match &r.model {
        ResponseModel::TwoPole(p) => {
            results["regime"] = json!(format!("{:?}", p.regime()).to_lowercase());
            results["gamma_norm"] = json!(p.gamma_norm());
            results["omega0_th"] = json!(m.t_h * p.omega0());
            results["him_l1_norm"] = json!(m.him_l1 / p.omega0());
            if !r.normalized {
                results["t_h_fs"] = json!(m.t_h / FS);
                results["him_l1"] = json!(m.him_l1);
            }
        }
        ResponseModel::Tabulated(t) => {
            results["t_h_fs"] = json!(m.t_h / FS);
            results["him_l1"] = json!(m.him_l1);
            results["scale_factor"] = json!(t.scale_factor());
            results["normalization_applied"] = json!(t.normalization_applied());
            results["samples"] = json!(t.times().len());
        }
    }
    Ok(results)
}

fn open_output(args: &OutputArgs, default_stem: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
    let path = args.output.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "{default_stem}.{}",
            match args.format {
                Format::Csv => "csv",
                Format::Json => "json",
            }
        ))
    });
    let file = File::create(&path).map_err(|e| CliError::Lib(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))?;
    Ok((path, BufWriter::new(file)))
}

fn write_table<R: Serialize>(args: &OutputArgs, default_stem: &str, header: &[&str], rows: &[R]) -> CliResult<PathBuf> {
    let (path, mut w) = open_output(args, default_stem)?;
    let io = |e: csv::Error| CliError::Lib(Error::Io(std::io::Error::other(e.to_string())));
    match args.format {
        Format::Csv => {
            let mut c = csv::WriterBuilder::new().has_headers(false).from_writer(&mut w);
            c.write_record(header).map_err(io)?;
            for row in rows {
                c.serialize(row).map_err(io)?;
            }
            c.flush().map_err(Error::from)?;
        }
        Format::Json => {
            serde_json::to_writer(&mut w, rows).map_err(|e| CliError::Lib(Error::Io(e.into())))?;
        }
    }
    w.flush().map_err(Error::from)?;
    Ok(path)
}

fn fmax_sweep(min: f64, max: f64, points: usize, log: bool, output: &OutputArgs) -> CliResult<Value> {
    let axis = Axis::new("gamma_norm", min, max, points, if log { Spacing::Log } else { Spacing::Linear })?;
    let rows = sweep::gamma_sweep(&axis)?;
    let fm: Vec<f64> = rows.iter().map(|r| r.fmax).collect();
    let (i, peak) = sweep::find_peak_1d(&fm)?;
    let tuples: Vec<_> = rows.iter().map(|r| (r.gamma_norm, r.omega0_th, r.him_l1_norm, r.fmax)).collect();
    let path = write_table(output, "fmax-sweep", &["gamma_norm", "omega0_th", "him_l1_norm", "fmax"], &tuples)?;
    Ok(json!({
        "output": path.display().to_string(),
        "rows": rows.len(),
        "peak_fmax": peak,
        "peak_gamma_norm": rows[i].gamma_norm,
        "fmax_first": fm[0],
        "fmax_last": fm[fm.len() - 1],
    }))
}

fn time_unit(r: &Resolved) -> &'static str {
    if r.normalized {
        "1/omega0"
    } else {
        "fs"
    }
}

fn heatmap(r: &Resolved, spec: &SweepSpec, output: &OutputArgs) -> CliResult<Value> {
    let map = sweep::heatmap_f1(spec, &r.model)?;
    let mut rows = Vec::with_capacity(map.phi.len() * map.walkoff.len());
    for (i, &phi) in map.phi.iter().enumerate() {
        for (j, &tw) in map.walkoff.iter().enumerate() {
            rows.push((phi, tw / FS, map.values[i][j]));
        }
    }
    let path = write_table(output, "heatmap", &["phi_rad", "walkoff_fs", "f1max"], &rows)?;
    for f in &map.failures {
        eprintln!("warning: cell {:?} failed: {}", f.index, f.message);
    }
    let peak = map.peak.map(|p| {
        json!({
            "phi_rad": p.phi,
            "walkoff_fs": p.walkoff / FS,
            "value": p.value,
            "coarse_value": p.coarse_value,
            "coarse_index": [p.index.0, p.index.1],
            "refined": p.refined,
        })
    });
    Ok(json!({
        "output": path.display().to_string(),
        "time_unit": time_unit(r),
        "cells": rows.len(),
        "failed_cells": map.failures.len(),
        "peak": peak,
    }))
}

fn phase_profile(
    r: &Resolved,
    g: &GateGeometry,
    pulse: &PulseArgs,
    direction: DirectionArg,
    range: (Option<f64>, Option<f64>),
    points: usize,
    output: &OutputArgs,
) -> CliResult<Value> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let kind = pulse_kind(pulse)?;
    let (direction, own_center, other) = match direction {
        DirectionArg::ASeesB => (Direction::ASeesB, 0.0, kind.pulse(g.delay)?),
        DirectionArg::BSeesA => (Direction::BSeesA, g.delay, kind.pulse(0.0)?),
    };
    let own: PulseShape = kind.pulse(own_center)?;
    let (lo, hi) = own.window();
    let pad = if lo == hi { g.walkoff_time } else { 0.0 };
    let t_min = range.0.map_or(lo - pad, |t| t * FS);
    let t_max = range.1.map_or(hi + pad, |t| t * FS);
    if !(t_min < t_max) {
        return Err(CliError::Usage("--t-min-fs must be below --t-max-fs".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (points - 1) as f64)
        .collect();
    let profile = fidelity::induced_phase_profile(&grid, g, &r.model, &other, direction)?;
    let rows: Vec<_> = grid
        .iter()
        .zip(&profile)
        .map(|(t, z)| (t / FS, z.re, z.im, z.arg(), z.norm()))
        .collect();
    let path = write_table(output, "phase-profile", &["t_fs", "re", "im", "arg_rad", "abs"], &rows)?;
    let abs_min = rows.iter().map(|r| r.4).fold(f64::INFINITY, f64::min);
    let abs_max = rows.iter().map(|r| r.4).fold(0.0, f64::max);
    Ok(json!({
        "output": path.display().to_string(),
        "time_unit": time_unit(r),
        "points": rows.len(),
        "abs_min": abs_min,
        "abs_max": abs_max,
    }))
}

fn pmp(r: &Resolved, pulse: &PulseArgs, total_phi: f64, cells: &[u32], output: &OutputArgs) -> CliResult<Value> {
    let p = pulse_kind(pulse)?.pulse(0.0)?;
    let mut rows = Vec::new();
    let mut in_regime = Vec::new();
    for &n in cells {
        let per_cell = total_phi / n as f64;
        let report = fidelity::pmp_cascade_bound(n, &r.model, per_cell, &p)?;
        in_regime.push(report.in_regime.unwrap_or(false));
        rows.push((n, per_cell, report.value));
    }
    let path = write_table(output, "pmp", &["n_cells", "per_cell_phi_rad", "bound"], &rows)?;
    Ok(json!({
        "output": path.display().to_string(),
        "bounds": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
        "in_regime": in_regime,
        "fmax": fidelity::fmax(&r.model)?.value,
    }))
}

#[allow(clippy::too_many_arguments)]
fn mc_validate(
    r: &Resolved,
    geometry: &GeometryArgs,
    realizations: usize,
    n_time: usize,
    dt_fs: Option<f64>,
    seed: u64,
    dump: Option<&Path>,
    dump_rows: usize,
) -> CliResult<Value> {
    let t_h = response::rms_duration(&r.model)?;
    let mut geometry = geometry.clone();
    if geometry.eta.is_none() {
        geometry.phi.get_or_insert(std::f64::consts::PI);
        geometry.walkoff_fs.get_or_insert(2.0 * t_h / FS);
    }
    let g = resolve_geometry(&geometry)?;
    let spectrum = NoiseSpectrum::phase_noise(&g, &r.model)?;
    let dt = match dt_fs {
        Some(d) => d * FS,
        None => std::f64::consts::PI / spectrum.cutoff(),
    };
    let ens = phasenoise::sample_process(&spectrum, realizations, n_time, dt, seed)?;
    if let Some(path) = dump {
        let file = File::create(path).map_err(Error::from)?;
        ens.write_csv(BufWriter::new(file), dump_rows)?;
    }
    let variance = fidelity::phase_variance(&g, &r.model)?;
    let analytic = (-0.5 * variance).exp();
    let est = phasenoise::estimate_char(&ens);
    let pass = (analytic - est.estimate.re).hypot(est.estimate.im) < 3.0 * est.stderr
        || (est.stderr == 0.0 && (analytic - est.estimate.re).abs() < 1e-12);
    Ok(json!({
        "geometry": geometry_echo(&g),
        "phase_variance": variance,
        "synthesized_variance": ens.synthesized_variance(),
        "dt_fs": dt / FS,
        "analytic": analytic,
        "estimate_re": est.estimate.re,
        "estimate_im": est.estimate.im,
        "stderr": est.stderr,
        "n_realizations": realizations,
        "seed": seed,
        "pass": pass,
    }))
}
