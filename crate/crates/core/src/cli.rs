//! Batch command-line front end.
//!
//! Every subcommand resolves its parameters, validates them, computes, and
//! writes one report: a JSON object (default) or, for table-like output, CSV
//! preceded by `#` lines carrying the resolved configuration. Floats are
//! written with 17 significant digits. Exit codes: 0 success, 1 computational
//! error, 2 usage error.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::Error as ComputeError;
use crate::heattrace::{self, EnergyLevel, WeylRow};
use crate::specfun::QuadratureSpec;
use crate::spectra::{self, Potential};
use crate::thermo::{self, EntropyMethod, FiducialEntropy, FundamentalEquation};
use crate::units::UnitSystem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "quasistatic",
    version,
    about = "Quasistatic quantum mechanics toolkit"
)]
struct Cli {
    /// Reduced Planck constant ħ
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar: f64,
    /// Boltzmann constant k_B
    #[arg(long, global = true, default_value_t = 1.0)]
    kb: f64,
    /// Particle mass M
    #[arg(long, global = true, default_value_t = 0.5)]
    mass: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate angular, radial, box or finite-difference eigenmodes
    Spectrum(SpectrumArgs),
    /// Heat trace and Weyl volume estimate for a list of t values
    Weyl(WeylArgs),
    /// Entropy expectation in the radial mode n, closed form and quadrature
    Entropy(EntropyArgs),
    /// Solve sin(c r0)/r0 = exp(S0/2k_B) for the wavenumber c
    Fiducial(FiducialArgs),
    /// Wick-rotated and quasistatic partition functions
    Partition(PartitionArgs),
    /// Imaginary time ↔ temperature table
    Duality(DualityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpectrumKind {
    Angular,
    Radial,
    Ball,
    Box,
    Numeric,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value_t = SpectrumKind::Radial)]
    kind: SpectrumKind,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = 5)]
    n_max: u32,
    #[arg(long, default_value_t = 3)]
    l_max: u32,
    /// Box side length L
    #[arg(long = "L", visible_alias = "side", default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, default_value_t = 3)]
    n_max_per_axis: u32,
    #[arg(long, default_value_t = 2000)]
    grid_points: usize,
    /// Number of lowest numeric eigenvalues
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// U(r): none, const:V, linear:A (A r), harmonic:K (K r²) or power:A:P (A r^P)
    #[arg(long, default_value = "none")]
    potential: String,
    /// Relative degeneracy tolerance
    #[arg(long, default_value_t = spectra::DEFAULT_DEGENERACY_TOLERANCE)]
    tolerance: f64,
    /// Also write the level list as an `energy,multiplicity` file
    #[arg(long)]
    levels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Domain {
    Ball,
    Cube,
    Levels,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Ball => "ball",
            Domain::Cube => "cube",
            Domain::Levels => "levels",
        })
    }
}

#[derive(Debug, Args)]
struct WeylArgs {
    #[arg(long, value_enum, default_value_t = Domain::Cube)]
    domain: Domain,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long = "L", visible_alias = "side", default_value_t = 1.0)]
    side: f64,
    /// Dimension (cube and levels domains)
    #[arg(long)]
    d: Option<u32>,
    /// Comma-separated heat-trace times
    #[arg(long = "t", value_delimiter = ',', required = true)]
    t_values: Vec<f64>,
    #[arg(long)]
    levels_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tolerance: f64,
    #[arg(long, default_value_t = 60)]
    max_subdivisions: u32,
}

#[derive(Debug, Args)]
struct FiducialArgs {
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    /// Fiducial entropy S0; `-inf` selects the formal limit
    #[arg(long, allow_hyphen_values = true, conflicts_with = "rhs")]
    s0: Option<String>,
    /// Right-hand side exp(S0/2k_B) given directly
    #[arg(long)]
    rhs: Option<f64>,
    #[arg(long, default_value_t = 1)]
    branch: u32,
    /// Fiducial volume; defaults to 4π r0³/3
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    #[arg(long, value_enum, default_value_t = Domain::Ball)]
    domain: Domain,
    #[arg(long, allow_hyphen_values = true)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = 200)]
    n_max: u32,
    /// Angular sectors l = 0..l_max added to the ball levels
    #[arg(long, default_value_t = 0)]
    l_max: u32,
    #[arg(long = "L", visible_alias = "side", default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, default_value_t = 8)]
    n_max_per_axis: u32,
    #[arg(long)]
    levels_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DualityArgs {
    /// Comma-separated imaginary times
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "temperature"
    )]
    tau: Vec<f64>,
    /// Comma-separated temperatures
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    temperature: Vec<f64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] ComputeError),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl From<LevelsFileError> for CliError {
    fn from(e: LevelsFileError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) | CliError::Output(_) => EXIT_COMPUTE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Errors from reading an `energy,multiplicity` levels file.
#[derive(Debug, Error)]
pub enum LevelsFileError {
    #[error("cannot read levels file {path}: {message}")]
    Io { path: String, message: String },
    #[error("levels file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("levels file contains no levels")]
    Empty,
}

/// Parses `energy,multiplicity` lines; `#` starts a comment, blank lines are
/// skipped. The result is sorted ascending by energy.
pub fn parse_levels(text: &str) -> Result<Vec<EnergyLevel>, LevelsFileError> {
    let mut levels = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |message: String| LevelsFileError::Parse { line, message };
        let mut fields = content.split(',').map(str::trim);
        let (Some(energy), Some(mult), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!(
                "expected `energy,multiplicity`, got `{content}`"
            )));
        };
        let energy: f64 = energy
            .parse()
            .map_err(|_| parse_err(format!("invalid energy `{energy}`")))?;
        if !energy.is_finite() {
            return Err(parse_err(format!("energy `{energy}` is not finite")));
        }
        let mult: i64 = mult
            .parse()
            .map_err(|_| parse_err(format!("invalid multiplicity `{mult}`")))?;
        if mult < 1 {
            return Err(parse_err(format!(
                "multiplicity must be at least 1, got {mult}"
            )));
        }
        levels.push(EnergyLevel {
            energy,
            multiplicity: mult as u64,
        });
    }
    if levels.is_empty() {
        return Err(LevelsFileError::Empty);
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(levels)
}

pub fn load_levels(path: &Path) -> Result<Vec<EnergyLevel>, LevelsFileError> {
    let text = fs::read_to_string(path).map_err(|e| LevelsFileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_levels(&text)
}

/// Inverse of [`parse_levels`].
pub fn format_levels(levels: &[EnergyLevel]) -> String {
    let mut out = String::from("# energy,multiplicity\n");
    for level in levels {
        out.push_str(&format!(
            "{},{}\n",
            fmt_real(level.energy),
            level.multiplicity
        ));
    }
    out
}

/// 17 significant digits, scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(
            fmt_real(x)
                .parse()
                .expect("formatted float is a JSON number"),
        )
    } else {
        Value::String(fmt_real(x))
    }
}

fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(real).collect())
}

/// Output of one subcommand before serialization.
struct Report {
    command: &'static str,
    params: Map<String, Value>,
    results: Value,
    table: Option<Table>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

/// Parses `argv` (program name first), runs the subcommand and writes the
/// report to `--out` or `stdout`. Diagnostics go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "usage error",
                _ => "error",
            };
            let _ = writeln!(stderr, "{kind}: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let units = UnitSystem::new(cli.hbar, cli.kb, cli.mass)
        .map_err(|e| usage(format!("unit system: {e}")))?;
    let report = match &cli.command {
        Command::Spectrum(args) => spectrum(args, &units)?,
        Command::Weyl(args) => weyl(args, &units)?,
        Command::Entropy(args) => entropy(args, &units)?,
        Command::Fiducial(args) => fiducial(args, &units)?,
        Command::Partition(args) => partition(args, &units)?,
        Command::Duality(args) => duality(args, &units)?,
    };
    let text = render(cli, &units, &report)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

fn config_value(cli: &Cli, units: &UnitSystem, report: &Report) -> Value {
    json!({
        "units": {
            "hbar": real(units.hbar()),
            "k_boltzmann": real(units.k_boltzmann()),
            "mass": real(units.mass()),
        },
        "format": match cli.format { Format::Json => "json", Format::Csv => "csv" },
        "parameters": Value::Object(report.params.clone()),
    })
}

fn render(cli: &Cli, units: &UnitSystem, report: &Report) -> Result<String, CliError> {
    let config = config_value(cli, units, report);
    match cli.format {
        Format::Json => {
            let doc = json!({
                "command": report.command,
                "config": config,
                "results": report.results,
            });
            let mut text =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let Some(table) = &report.table else {
                return Err(usage(format!(
                    "`{}` produces no table; use --format json",
                    report.command
                )));
            };
            let mut text = format!("# command: {}\n", report.command);
            text.push_str(&format!("# config: {config}\n"));
            let mut writer = csv::Writer::from_writer(Vec::new());
            let write_err = |e: csv::Error| CliError::Output(e.to_string());
            writer.write_record(&table.header).map_err(write_err)?;
            for row in &table.rows {
                writer.write_record(row).map_err(write_err)?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::Output(e.to_string()))?;
            text.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))?);
            Ok(text)
        }
    }
}

fn require_positive(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "--{name} must be positive and finite, got {value}"
        )))
    }
}

fn require_at_least<T: PartialOrd + fmt::Display>(
    name: &str,
    value: T,
    min: T,
) -> Result<(), CliError> {
    if value >= min {
        Ok(())
    } else {
        Err(usage(format!(
            "--{name} must be at least {min}, got {value}"
        )))
    }
}

fn parse_potential(spec: &str) -> Result<Option<Potential>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| usage(format!("invalid number `{s}` in --potential {spec}")))
    };
    Ok(match parts.as_slice() {
        ["none"] => None,
        ["const", v] => Some(Potential::constant(num(v)?)),
        ["linear", a] => {
            let a = num(a)?;
            Some(Potential::from_fn(move |r| a * r))
        }
        ["harmonic", k] => {
            let k = num(k)?;
            Some(Potential::from_fn(move |r| k * r * r))
        }
        ["power", a, p] => {
            let (a, p) = (num(a)?, num(p)?);
            Some(Potential::from_fn(move |r| a * r.powf(p)))
        }
        _ => {
            return Err(usage(format!(
                "unknown --potential `{spec}`; expected none, const:V, linear:A, harmonic:K or power:A:P"
            )))
        }
    })
}

fn level_rows(levels: &[EnergyLevel]) -> (Value, Vec<Vec<String>>) {
    let json_rows = levels
        .iter()
        .map(|l| json!({ "energy": real(l.energy), "multiplicity": l.multiplicity }))
        .collect();
    let rows = levels
        .iter()
        .map(|l| vec![fmt_real(l.energy), l.multiplicity.to_string()])
        .collect();
    (Value::Array(json_rows), rows)
}

fn spectrum(args: &SpectrumArgs, u: &UnitSystem) -> Result<Report, CliError> {
    require_positive("tolerance", args.tolerance)?;
    let mut params = Map::new();
    params.insert(
        "kind".into(),
        json!(format!("{:?}", args.kind).to_lowercase()),
    );
    params.insert("tolerance".into(), real(args.tolerance));

    let (levels, results, table) = match args.kind {
        SpectrumKind::Angular => {
            params.insert("l_max".into(), json!(args.l_max));
            let modes = spectra::angular_modes(args.l_max, u);
            let levels = spectra::angular_levels(args.l_max, u);
            let rows: Vec<Vec<String>> = modes
                .iter()
                .map(|m| {
                    vec![
                        m.l.to_string(),
                        fmt_real(m.kinetic_energy),
                        m.degeneracy.to_string(),
                    ]
                })
                .collect();
            let modes_json: Vec<Value> = modes
                .iter()
                .map(|m| json!({"l": m.l, "kinetic_energy": real(m.kinetic_energy), "degeneracy": m.degeneracy}))
                .collect();
            let kernel_dim = modes[0].degeneracy;
            let results = json!({ "modes": modes_json, "kernel_dimension": kernel_dim });
            (
                levels,
                results,
                Table {
                    header: vec!["l", "kinetic_energy", "degeneracy"],
                    rows,
                },
            )
        }
        SpectrumKind::Radial => {
            require_positive("r0", args.r0)?;
            require_at_least("n-max", args.n_max, 1)?;
            params.insert("r0".into(), real(args.r0));
            params.insert("n_max".into(), json!(args.n_max));
            let modes = spectra::radial_modes(args.r0, args.n_max, u)?;
            let energies: Vec<f64> = modes.iter().map(|m| m.kinetic_energy).collect();
            let dim = spectra::hilbert_dim_min(&energies, args.tolerance)?;
            let levels = spectra::radial_levels(args.r0, args.n_max, u)?;
            let rows = modes
                .iter()
                .map(|m| {
                    vec![
                        m.n.to_string(),
                        fmt_real(m.wavenumber),
                        fmt_real(m.kinetic_energy),
                    ]
                })
                .collect();
            let modes_json: Vec<Value> = modes
                .iter()
                .map(|m| json!({"n": m.n, "wavenumber": real(m.wavenumber), "kinetic_energy": real(m.kinetic_energy)}))
                .collect();
            let results = json!({ "modes": modes_json, "ground_space_dimension": dim });
            (
                levels,
                results,
                Table {
                    header: vec!["n", "wavenumber", "kinetic_energy"],
                    rows,
                },
            )
        }
        SpectrumKind::Ball => {
            require_positive("r0", args.r0)?;
            require_at_least("n-max", args.n_max, 1)?;
            params.insert("r0".into(), real(args.r0));
            params.insert("n_max".into(), json!(args.n_max));
            params.insert("l_max".into(), json!(args.l_max));
            let levels = spectra::ball_levels(args.r0, args.n_max, args.l_max, u)?;
            let ground = thermo::minimal_level(&levels)?;
            let angular_dim = spectra::angular_modes(0, u)[0].degeneracy as usize;
            let radial: Vec<f64> = spectra::radial_modes(args.r0, args.n_max, u)?
                .iter()
                .map(|m| m.kinetic_energy)
                .collect();
            let radial_dim = spectra::hilbert_dim_min(&radial, args.tolerance)?;
            let (levels_json, rows) = level_rows(&levels);
            let results = json!({
                "levels": levels_json,
                "ground_energy": real(ground.energy),
                "ground_space_dimension": ground.multiplicity,
                "tensor_ground_dimension": spectra::tensor_ground_space(angular_dim, radial_dim)?,
            });
            (
                levels,
                results,
                Table {
                    header: vec!["energy", "multiplicity"],
                    rows,
                },
            )
        }
        SpectrumKind::Box => {
            require_positive("L", args.side)?;
            require_at_least("d", args.d, 1)?;
            require_at_least("n-max-per-axis", args.n_max_per_axis, 1)?;
            params.insert("L".into(), real(args.side));
            params.insert("d".into(), json!(args.d));
            params.insert("n_max_per_axis".into(), json!(args.n_max_per_axis));
            let modes = spectra::box_modes(args.side, args.d, args.n_max_per_axis, u)?;
            let energies: Vec<f64> = modes.iter().map(|m| m.kinetic_energy).collect();
            let levels = spectra::group_energies(&energies, args.tolerance)?;
            let fmt_qn = |q: &[u32]| q.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
            let rows = modes
                .iter()
                .map(|m| vec![fmt_qn(&m.quantum_numbers), fmt_real(m.kinetic_energy)])
                .collect();
            let modes_json: Vec<Value> = modes
                .iter()
                .map(|m| json!({"quantum_numbers": m.quantum_numbers, "kinetic_energy": real(m.kinetic_energy)}))
                .collect();
            let (levels_json, _) = level_rows(&levels);
            let results = json!({
                "modes": modes_json,
                "levels": levels_json,
                "ground_space_dimension": spectra::hilbert_dim_min(&energies, args.tolerance)?,
            });
            (
                levels,
                results,
                Table {
                    header: vec!["quantum_numbers", "kinetic_energy"],
                    rows,
                },
            )
        }
        SpectrumKind::Numeric => {
            require_positive("r0", args.r0)?;
            require_at_least("grid-points", args.grid_points, 3)?;
            require_at_least("k", args.k, 1)?;
            if args.k >= args.grid_points - 1 {
                return Err(usage(format!(
                    "--k {} too large for --grid-points {}",
                    args.k, args.grid_points
                )));
            }
            let potential = parse_potential(&args.potential)?;
            params.insert("r0".into(), real(args.r0));
            params.insert("grid_points".into(), json!(args.grid_points));
            params.insert("k".into(), json!(args.k));
            params.insert("potential".into(), json!(args.potential));
            let spectrum = spectra::solve_radial_numeric(
                args.r0,
                args.grid_points,
                args.k,
                u,
                potential.as_ref(),
            )?;
            let dim = spectra::hilbert_dim_min(&spectrum.energies, args.tolerance)?;
            let free = potential.is_none();
            let analytic: Vec<f64> = if free {
                spectra::radial_modes(args.r0, args.k as u32, u)?
                    .iter()
                    .map(|m| m.kinetic_energy)
                    .collect()
            } else {
                Vec::new()
            };
            let wavenumbers = spectrum.wavenumbers(u);
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for (i, e) in spectrum.energies.iter().enumerate() {
                let mut entry = Map::new();
                entry.insert("index".into(), json!(i + 1));
                entry.insert("energy".into(), real(*e));
                let mut row = vec![(i + 1).to_string(), fmt_real(*e)];
                if free {
                    entry.insert("wavenumber".into(), real(wavenumbers[i]));
                    entry.insert("analytic_energy".into(), real(analytic[i]));
                    let rel = (e - analytic[i]).abs() / analytic[i];
                    entry.insert("relative_error".into(), real(rel));
                    row.extend([
                        fmt_real(wavenumbers[i]),
                        fmt_real(analytic[i]),
                        fmt_real(rel),
                    ]);
                }
                entries.push(Value::Object(entry));
                rows.push(row);
            }
            let header = if free {
                vec![
                    "index",
                    "energy",
                    "wavenumber",
                    "analytic_energy",
                    "relative_error",
                ]
            } else {
                vec!["index", "energy"]
            };
            let results = json!({
                "eigenvalues": entries,
                "grid_spacing": real(spectrum.grid_spacing()),
                "ground_space_dimension": dim,
            });
            let levels = spectrum
                .energies
                .iter()
                .map(|&e| EnergyLevel {
                    energy: e,
                    multiplicity: 1,
                })
                .collect();
            (levels, results, Table { header, rows })
        }
    };

    if let Some(path) = &args.levels_out {
        params.insert("levels_out".into(), json!(path.display().to_string()));
        fs::write(path, format_levels(&levels))
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    Ok(Report {
        command: "spectrum",
        params,
        results,
        table: Some(table),
    })
}

fn weyl(args: &WeylArgs, u: &UnitSystem) -> Result<Report, CliError> {
    if args.t_values.is_empty() {
        return Err(usage("--t needs at least one value"));
    }
    for &t in &args.t_values {
        require_positive("t", t)?;
    }
    let mut params = Map::new();
    params.insert("domain".into(), json!(args.domain.to_string()));
    params.insert("t".into(), reals(&args.t_values));

    let (rows, d, reference_volume, geometry): (Vec<WeylRow>, u32, Option<f64>, String) =
        match args.domain {
            Domain::Cube => {
                require_positive("L", args.side)?;
                let d = args.d.unwrap_or(3);
                require_at_least("d", d, 1)?;
                params.insert("L".into(), real(args.side));
                params.insert("d".into(), json!(d));
                let mut rows = Vec::with_capacity(args.t_values.len());
                for &t in &args.t_values {
                    let axis = spectra::interval_levels_for_trace(args.side, t, u)?;
                    let factors: Vec<&[EnergyLevel]> = vec![&axis[..]; d as usize];
                    rows.extend(heattrace::product_weyl_convergence_scan(
                        &factors,
                        &[t],
                        d,
                        u,
                    )?);
                }
                let geometry = format!("[0,L]^{d}");
                (rows, d, Some(args.side.powi(d as i32)), geometry)
            }
            Domain::Ball => {
                require_positive("r0", args.r0)?;
                if let Some(d) = args.d {
                    if d != 3 {
                        return Err(usage(
                            "--domain ball is three-dimensional; omit --d or pass 3",
                        ));
                    }
                }
                params.insert("r0".into(), real(args.r0));
                params.insert("d".into(), json!(3));
                let mut rows = Vec::with_capacity(args.t_values.len());
                for &t in &args.t_values {
                    let radial = spectra::interval_levels_for_trace(args.r0, t, u)?;
                    let sphere = spectra::sphere_levels_for_trace(t, u)?;
                    rows.extend(heattrace::product_weyl_convergence_scan(
                        &[&radial, &sphere],
                        &[t],
                        3,
                        u,
                    )?);
                }
                let volume = 4.0 * std::f64::consts::PI * args.r0;
                (rows, 3, Some(volume), "[0,r0] x S^2".to_string())
            }
            Domain::Levels => {
                let path = args
                    .levels_file
                    .as_ref()
                    .ok_or_else(|| usage("--domain levels requires --levels-file"))?;
                let d = args.d.unwrap_or(1);
                require_at_least("d", d, 1)?;
                params.insert("levels_file".into(), json!(path.display().to_string()));
                params.insert("d".into(), json!(d));
                let levels = load_levels(path)?;
                let rows = heattrace::weyl_convergence_scan(&levels, &args.t_values, d, u)?;
                (rows, d, None, "custom levels".to_string())
            }
        };

    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "t": real(r.t),
                "trace": real(r.trace),
                "truncation_bound": real(r.truncation_bound),
                "volume_estimate": real(r.volume_estimate),
            })
        })
        .collect();
    let table_rows = rows
        .iter()
        .map(|r| {
            vec![
                fmt_real(r.t),
                fmt_real(r.trace),
                fmt_real(r.truncation_bound),
                fmt_real(r.volume_estimate),
            ]
        })
        .collect();
    let results = json!({
        "dimension": d,
        "geometry": geometry,
        "reference_volume": reference_volume.map(real).unwrap_or(Value::Null),
        "rows": json_rows,
    });
    Ok(Report {
        command: "weyl",
        params,
        results,
        table: Some(Table {
            header: vec!["t", "trace", "truncation_bound", "volume_estimate"],
            rows: table_rows,
        }),
    })
}

fn entropy(args: &EntropyArgs, u: &UnitSystem) -> Result<Report, CliError> {
    require_at_least("n", args.n, 1)?;
    require_positive("r0", args.r0)?;
    require_positive("abs-tolerance", args.abs_tolerance)?;
    require_at_least("max-subdivisions", args.max_subdivisions, 1)?;
    let quad = QuadratureSpec::new(args.abs_tolerance, args.max_subdivisions)?;
    let closed =
        thermo::entropy_expectation_with(args.n, args.r0, EntropyMethod::ClosedForm, u, &quad)?;
    let numeric =
        thermo::entropy_expectation_with(args.n, args.r0, EntropyMethod::Quadrature, u, &quad)?;
    let mut params = Map::new();
    params.insert("n".into(), json!(args.n));
    params.insert("r0".into(), real(args.r0));
    params.insert("abs_tolerance".into(), real(args.abs_tolerance));
    params.insert("max_subdivisions".into(), json!(args.max_subdivisions));
    let kb = u.k_boltzmann();
    let results = json!({
        "closed_form": real(closed),
        "quadrature": real(numeric),
        "difference": real(closed - numeric),
        "closed_form_in_kb": real(closed / kb),
        "quadrature_in_kb": real(numeric / kb),
    });
    Ok(Report {
        command: "entropy",
        params,
        results,
        table: None,
    })
}

fn parse_s0(text: &str) -> Result<FiducialEntropy, CliError> {
    match text.trim() {
        "-inf" | "-infinity" | "-Infinity" => Ok(FiducialEntropy::NegativeInfinity),
        other => {
            let v: f64 = other
                .parse()
                .map_err(|_| usage(format!("invalid --s0 `{other}`; expected a number or -inf")))?;
            FiducialEntropy::finite(v).map_err(|e| usage(e.to_string()))
        }
    }
}

fn fiducial(args: &FiducialArgs, u: &UnitSystem) -> Result<Report, CliError> {
    require_positive("r0", args.r0)?;
    require_positive("temperature", args.temperature)?;
    require_at_least("branch", args.branch, 1)?;
    let s0 = match (&args.s0, args.rhs) {
        (Some(text), _) => parse_s0(text)?,
        (None, Some(rhs)) => {
            require_positive("rhs", rhs)?;
            FiducialEntropy::finite(2.0 * u.k_boltzmann() * rhs.ln())
                .map_err(|e| usage(e.to_string()))?
        }
        (None, None) => FiducialEntropy::NegativeInfinity,
    };
    let v0 = args
        .v0
        .unwrap_or(4.0 * std::f64::consts::PI * args.r0.powi(3) / 3.0);
    require_positive("v0", v0)?;
    let fe =
        FundamentalEquation::new(s0, v0, args.temperature).map_err(|e| usage(e.to_string()))?;
    let s0_value = match s0 {
        FiducialEntropy::Finite(v) => real(v),
        FiducialEntropy::NegativeInfinity => json!("-inf"),
    };
    let mut params = Map::new();
    params.insert("r0".into(), real(args.r0));
    params.insert("s0".into(), s0_value);
    params.insert("v0".into(), real(v0));
    params.insert("temperature".into(), real(args.temperature));
    params.insert("branch".into(), json!(args.branch));

    let c = thermo::solve_fiducial_wavenumber(&fe, args.r0, args.branch, u)?;
    let rhs = match s0 {
        FiducialEntropy::Finite(s) => (s / (2.0 * u.k_boltzmann())).exp(),
        FiducialEntropy::NegativeInfinity => 0.0,
    };
    let residual = (c * args.r0).sin() / args.r0 - rhs;
    let results = json!({
        "wavenumber": real(c),
        "rhs": real(rhs),
        "residual": real(residual),
        "kinetic_energy": real(u.kinetic_prefactor() * c * c),
    });
    Ok(Report {
        command: "fiducial",
        params,
        results,
        table: None,
    })
}

fn partition(args: &PartitionArgs, u: &UnitSystem) -> Result<Report, CliError> {
    if !(args.tau.is_finite() && args.tau >= 0.0) {
        return Err(usage(format!(
            "--tau must be nonnegative and finite, got {}",
            args.tau
        )));
    }
    let mut params = Map::new();
    params.insert("domain".into(), json!(args.domain.to_string()));
    params.insert("tau".into(), real(args.tau));
    let levels = match args.domain {
        Domain::Ball => {
            require_positive("r0", args.r0)?;
            require_at_least("n-max", args.n_max, 1)?;
            params.insert("r0".into(), real(args.r0));
            params.insert("n_max".into(), json!(args.n_max));
            params.insert("l_max".into(), json!(args.l_max));
            spectra::ball_levels(args.r0, args.n_max, args.l_max, u)?
        }
        Domain::Cube => {
            require_positive("L", args.side)?;
            require_at_least("d", args.d, 1)?;
            require_at_least("n-max-per-axis", args.n_max_per_axis, 1)?;
            params.insert("L".into(), real(args.side));
            params.insert("d".into(), json!(args.d));
            params.insert("n_max_per_axis".into(), json!(args.n_max_per_axis));
            spectra::box_levels(args.side, args.d, args.n_max_per_axis, u)?
        }
        Domain::Levels => {
            let path = args
                .levels_file
                .as_ref()
                .ok_or_else(|| usage("--domain levels requires --levels-file"))?;
            params.insert("levels_file".into(), json!(path.display().to_string()));
            load_levels(path)?
        }
    };
    let ground = thermo::minimal_level(&levels)?;
    let z_qqm = thermo::quasistatic_partition(&levels, args.tau, u)?;
    let (z_qm, temperature) = if args.tau > 0.0 {
        let point = thermo::duality_map(args.tau, u)?;
        (
            real(thermo::qm_partition(&levels, args.tau, u)?),
            real(point.temperature),
        )
    } else {
        (Value::Null, Value::Null)
    };
    let results = json!({
        "levels_used": levels.len(),
        "ground_energy": real(ground.energy),
        "ground_space_dimension": ground.multiplicity,
        "quasistatic_partition": real(z_qqm),
        "qm_partition": z_qm,
        "dual_temperature": temperature,
    });
    Ok(Report {
        command: "partition",
        params,
        results,
        table: None,
    })
}

fn duality(args: &DualityArgs, u: &UnitSystem) -> Result<Report, CliError> {
    let (points, source) = match (args.tau.is_empty(), args.temperature.is_empty()) {
        (false, true) => {
            for &t in &args.tau {
                require_positive("tau", t)?;
            }
            let points = args
                .tau
                .iter()
                .map(|&t| thermo::duality_map(t, u))
                .collect::<Result<Vec<_>, _>>()?;
            (points, "tau")
        }
        (true, false) => {
            for &t in &args.temperature {
                require_positive("temperature", t)?;
            }
            let points = args
                .temperature
                .iter()
                .map(|&t| thermo::duality_from_temperature(t, u))
                .collect::<Result<Vec<_>, _>>()?;
            (points, "temperature")
        }
        _ => return Err(usage("duality needs exactly one of --tau or --temperature")),
    };
    let mut params = Map::new();
    params.insert("input".into(), json!(source));
    let inputs = if source == "tau" {
        &args.tau
    } else {
        &args.temperature
    };
    params.insert("values".into(), reals(inputs));
    let json_rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "tau": real(p.imaginary_time),
                "temperature": real(p.temperature),
                "consistency": real(p.consistency(u)),
            })
        })
        .collect();
    let rows = points
        .iter()
        .map(|p| {
            vec![
                fmt_real(p.imaginary_time),
                fmt_real(p.temperature),
                fmt_real(p.consistency(u)),
            ]
        })
        .collect();
    Ok(Report {
        command: "duality",
        params,
        results: json!({ "rows": json_rows }),
        table: Some(Table {
            header: vec!["tau", "temperature", "consistency"],
            rows,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_levels_examples() {
        let levels = parse_levels("0,1\n1,2\n").unwrap();
        assert_eq!(
            levels,
            vec![
                EnergyLevel {
                    energy: 0.0,
                    multiplicity: 1
                },
                EnergyLevel {
                    energy: 1.0,
                    multiplicity: 2
                },
            ]
        );
        let sorted = parse_levels("# header\n5.5, 1\n\n-1e0,3 # comment\n2,1").unwrap();
        let energies: Vec<f64> = sorted.iter().map(|l| l.energy).collect();
        assert_eq!(energies, vec![-1.0, 2.0, 5.5]);
    }

    #[test]
    fn parse_levels_errors() {
        assert!(matches!(parse_levels(""), Err(LevelsFileError::Empty)));
        assert!(matches!(
            parse_levels("# only comments\n\n"),
            Err(LevelsFileError::Empty)
        ));
        match parse_levels("1,1\n2,-3\n") {
            Err(LevelsFileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_levels("1,1\n\nabc,1\n") {
            Err(LevelsFileError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_levels("1,0").is_err());
        assert!(parse_levels("1").is_err());
        assert!(parse_levels("1,2,3").is_err());
        assert!(parse_levels("inf,1").is_err());
        assert!(parse_levels("1,1.5").is_err());
    }

    #[test]
    fn format_round_trip() {
        let levels = vec![
            EnergyLevel {
                energy: 0.1,
                multiplicity: 1,
            },
            EnergyLevel {
                energy: std::f64::consts::PI.powi(2),
                multiplicity: 3,
            },
        ];
        assert_eq!(parse_levels(&format_levels(&levels)).unwrap(), levels);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn potentials() {
        assert!(parse_potential("none").unwrap().is_none());
        assert!(parse_potential("const:5").unwrap().is_some());
        assert!(parse_potential("power:1:0.5").unwrap().is_some());
        assert!(parse_potential("quartic:1").is_err());
        assert!(parse_potential("linear:x").is_err());
    }
}
