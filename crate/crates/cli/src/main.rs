//! Command-line front end: partition detection, system construction,
//! transforms, reconstruction, and frame certification as reproducible
//! batch runs.
//!
//! Exit codes: 0 success/certified, 2 validation, 3 numerical
//! (truncation/convergence), 4 I/O, 5 not certified.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ewf_core::io::{
    read_coefficients, read_partition_config, read_signal, read_spectrum_csv, read_wavelet_config,
    write_coefficients, write_coefficients_csv, write_partition_config, write_signal, SystemConfig,
    WaveletConfig,
};
use ewf_core::probe::seeded_gamma_probes;
use ewf_core::system::CoeffMode;
use ewf_core::{
    build_partition, build_system, certify, cewt_forward, detect_boundaries, dewt_forward,
    reconstruct, BoundarySet, CertifyOptions, EmpiricalWaveletSystem, Error, ErrorClass,
    FrameReport, FrequencyGrid, Verdict,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_NOT_CERTIFIED: u8 = 5;

/// Environment variable overriding the default certification grid size.
const GRID_POINTS_ENV: &str = "EWF_GRID_POINTS";

#[derive(Parser)]
#[command(name = "ewf", version, about = "Empirical wavelet transforms and frame certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect partition boundaries from a magnitude spectrum CSV.
    Detect(DetectArgs),
    /// Build a system and print its atoms.
    Build(BuildArgs),
    /// Forward transform a signal (cewt or dewt).
    Transform(TransformArgs),
    /// Invert a coefficient file back to a signal.
    Reconstruct(ReconstructArgs),
    /// Evaluate the frame conditions and write a certificate.
    Certify(CertifyArgs),
    /// Print a stored certificate; optionally dump scan samples as CSV.
    ReportDump(ReportDumpArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// CSV with (frequency, magnitude) columns for nonnegative frequencies.
    spectrum: PathBuf,
    #[arg(long)]
    bands: usize,
    #[arg(long, short, default_value = "partition.json")]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct SystemArgs {
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    wavelet: PathBuf,
    /// Shift rule: "reciprocal", "reciprocal:<margin>", "explicit:b1,b2,..."
    /// or "rational:p1/q1,p2/q2,..."
    #[arg(long, default_value = "reciprocal")]
    shift_rule: String,
    /// Overlap multiplier gamma >= 1 for compact profiles.
    #[arg(long, default_value_t = 1.0)]
    overlap: f64,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Optional JSON dump of the built atoms.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Signal file: .csv as (t, re, im), otherwise raw + sidecar.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, value_parser = ["cewt", "dewt"], default_value = "dewt")]
    mode: String,
    #[arg(long, short, default_value = "coefficients.json")]
    output: PathBuf,
    /// Also write per-band CSV dumps into this directory.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Round-trip through the frame operator and report the error.
    #[arg(long)]
    reconstruct: bool,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long, short, default_value = "reconstructed.csv")]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Frequency window [lo, hi); defaults to the gamma region extent.
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Grid resolution (half-open uniform samples over the window).
    #[arg(long)]
    grid_points: Option<usize>,
    /// Symmetric alpha-lattice window.
    #[arg(long, allow_negative_numbers = true)]
    alpha_window: Option<f64>,
    #[arg(long, default_value_t = 16)]
    k_range: usize,
    #[arg(long, default_value_t = 5)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4096)]
    probe_length: usize,
    /// Probe sample interval; defaults to a dyadic step covering the window.
    #[arg(long)]
    probe_interval: Option<f64>,
    #[arg(long, short, default_value = "report.json")]
    output: PathBuf,
}

#[derive(Args)]
struct ReportDumpArgs {
    report: PathBuf,
    /// Recompute the Parseval and cross-term scans from the embedded
    /// config and write them as CSV files into this directory.
    #[arg(long)]
    samples_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(match e.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Numerical => EXIT_NUMERICAL,
                ErrorClass::Io => EXIT_IO,
            })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Build(args) => cmd_build(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Certify(args) => cmd_certify(args),
        Command::ReportDump(args) => cmd_report_dump(args),
    }
}

fn parse_shift_rule(text: &str, overlap: f64) -> Result<SystemConfig, Error> {
    use ewf_core::io::ShiftRuleConfig;
    let rule = if text == "reciprocal" {
        ShiftRuleConfig::Reciprocal
    } else if let Some(rest) = text.strip_prefix("reciprocal:") {
        let margin: f64 = rest
            .parse()
            .map_err(|_| bad_input(format!("invalid margin in shift rule '{text}'")))?;
        ShiftRuleConfig::ReciprocalWithMargin { margin }
    } else if let Some(rest) = text.strip_prefix("explicit:") {
        let values: Result<Vec<f64>, _> = rest.split(',').map(str::parse).collect();
        ShiftRuleConfig::Explicit(
            values.map_err(|_| bad_input(format!("invalid explicit shift list '{text}'")))?,
        )
    } else if let Some(rest) = text.strip_prefix("rational:") {
        let mut pairs = Vec::new();
        for part in rest.split(',') {
            let (p, q) = part
                .split_once('/')
                .ok_or_else(|| bad_input(format!("expected p/q in '{part}'")))?;
            let p: i64 = p.parse().map_err(|_| bad_input(format!("bad numerator '{p}'")))?;
            let q: i64 = q.parse().map_err(|_| bad_input(format!("bad denominator '{q}'")))?;
            pairs.push([p, q]);
        }
        ShiftRuleConfig::ExplicitRational(pairs)
    } else {
        return Err(bad_input(format!("unknown shift rule '{text}'")));
    };
    Ok(SystemConfig { shift_rule: rule, overlap })
}

fn bad_input(message: String) -> Error {
    Error::Format(ewf_core::io::FormatError::Parse { path: "<args>".into(), line: 0, message })
}

fn load_system(args: &SystemArgs) -> Result<(EmpiricalWaveletSystem, BoundarySet, WaveletConfig, SystemConfig), Error> {
    let boundaries = read_partition_config(&args.partition)?;
    let wavelet_config = read_wavelet_config(&args.wavelet)?;
    let base = args.wavelet.parent().unwrap_or(Path::new("."));
    let wavelet = wavelet_config.build(base)?;
    let system_config = parse_shift_rule(&args.shift_rule, args.overlap)?;
    let partition = build_partition(&boundaries)?;
    let system = build_system(&partition, &wavelet, &system_config.to_options())?;
    Ok((system, boundaries, wavelet_config, system_config))
}

fn cmd_detect(args: DetectArgs) -> Result<ExitCode, Error> {
    let (freqs, mags) = read_spectrum_csv(&args.spectrum)?;
    let set = detect_boundaries(&freqs, &mags, args.bands)?;
    println!("detected boundaries:");
    for p in &set.points {
        println!("  nu = {p:.12}");
    }
    write_partition_config(&args.output, &set)?;
    println!("wrote {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode, Error> {
    let (system, ..) = load_system(&args.system)?;
    println!("{:<6} {:<22} {:<12} {:<14} {:<14} excluded", "n", "support", "center", "a_n", "b_n");
    let mut atoms_json = Vec::new();
    for (i, atom) in system.atoms.iter().enumerate() {
        let s = system.partition.supports[i];
        let lo = s.lo.map_or("-inf".to_string(), |v| format!("{v}"));
        let hi = s.hi.map_or("+inf".to_string(), |v| format!("{v}"));
        let (a, b, excl) = match &atom.params {
            Some(p) => (format!("{:.10}", p.scale), format!("{:.10}", p.shift_step), "no"),
            None => ("-".into(), "-".into(), "yes"),
        };
        println!("{:<6} {:<22} {:<12.6} {:<14} {:<14} {}", atom.index, format!("[{lo}, {hi}]"), atom.center, a, b, excl);
        atoms_json.push(json!({
            "n": atom.index,
            "center": atom.center,
            "scale": atom.params.map(|p| p.scale),
            "shiftStep": atom.params.map(|p| p.shift_step),
            "excluded": atom.excluded(),
        }));
    }
    println!("gamma region: {:?} over {:?}", system.gamma.label, system.gamma.intervals);
    if let Some(path) = args.output {
        let doc = json!({ "atoms": atoms_json, "gamma": { "label": format!("{:?}", system.gamma.label), "intervals": system.gamma.intervals } });
        std::fs::write(&path, serde_json::to_string_pretty(&doc).map_err(ewf_core::io::FormatError::from)?)
            .map_err(ewf_core::io::FormatError::from)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_transform(args: TransformArgs) -> Result<ExitCode, Error> {
    let (system, ..) = load_system(&args.system)?;
    let signal = read_signal(&args.signal)?;
    let coeffs = match args.mode.as_str() {
        "cewt" => cewt_forward(&signal, &system)?,
        _ => dewt_forward(&signal, &system)?,
    };
    write_coefficients(&args.output, &coeffs)?;
    println!(
        "wrote {} ({} bands, {} coefficients)",
        args.output.display(),
        coeffs.bands.len(),
        coeffs.bands.iter().map(|b| b.values.len()).sum::<usize>()
    );
    if let Some(dir) = &args.csv_dir {
        let paths = write_coefficients_csv(dir, &coeffs)?;
        println!("wrote {} per-band CSV files under {}", paths.len(), dir.display());
    }
    if args.reconstruct {
        if coeffs.mode != CoeffMode::Discrete {
            return Err(Error::System(ewf_core::SystemError::SystemMismatch(
                "--reconstruct requires dewt mode".into(),
            )));
        }
        let max_iter = 10 * signal.len();
        let rec = reconstruct(&coeffs, &system, max_iter, 1e-12)?;
        let projected = system.project_gamma(&signal);
        let err_sq: f64 = projected
            .samples
            .iter()
            .zip(&rec.signal.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * projected.sample_interval;
        let rel = (err_sq / projected.norm_sq().max(f64::MIN_POSITIVE)).sqrt();
        println!(
            "round-trip relative error {rel:.3e} (residual {:.3e}, {} iterations{})",
            rec.relative_residual,
            rec.iterations,
            if rec.converged { "" } else { ", NOT converged" }
        );
        if rec.non_positive_lower_bound {
            eprintln!("warning: frame operator not positive definite; lower frame bound may be non-positive");
        }
        if !rec.converged {
            return Ok(ExitCode::from(EXIT_NUMERICAL));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<ExitCode, Error> {
    let (system, ..) = load_system(&args.system)?;
    let coeffs = read_coefficients(&args.coeffs)?;
    let max_iter = if args.max_iter == 0 { 10 * coeffs.signal_len } else { args.max_iter };
    let rec = reconstruct(&coeffs, &system, max_iter, args.tol)?;
    write_signal(&args.output, &rec.signal)?;
    println!(
        "wrote {} (residual {:.3e}, {} iterations{})",
        args.output.display(),
        rec.relative_residual,
        rec.iterations,
        if rec.converged { "" } else { ", NOT converged" }
    );
    if rec.non_positive_lower_bound {
        eprintln!("warning: frame operator not positive definite; lower frame bound may be non-positive");
    }
    if !rec.converged {
        return Ok(ExitCode::from(EXIT_NUMERICAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn default_grid_points() -> usize {
    std::env::var(GRID_POINTS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1 << 16)
}

/// Dyadic sample interval whose frequency range covers the window.
fn default_probe_interval(window_hi: f64) -> f64 {
    let mut dt = 0.5;
    while 0.5 / dt < window_hi.abs().max(1.0) {
        dt *= 0.5;
    }
    dt * 0.5
}

fn cmd_certify(args: CertifyArgs) -> Result<ExitCode, Error> {
    let (system, boundaries, wavelet_config, system_config) = load_system(&args.system)?;
    let grid_points = args.grid_points.unwrap_or_else(default_grid_points);
    let grid = match &args.window {
        Some(w) if w.len() == 2 => FrequencyGrid::new(w[0], w[1], grid_points),
        _ => FrequencyGrid::over_gamma(&system, grid_points)
            .ok_or_else(|| bad_input("system has no compact supports; pass --window".into()))?,
    };
    let probe_interval = args.probe_interval.unwrap_or_else(|| default_probe_interval(grid.hi.abs().max(grid.lo.abs())));
    let probes = seeded_gamma_probes(&system, args.probe_length, probe_interval, args.probes, args.seed);

    let options = CertifyOptions { grid, alpha_window: args.alpha_window, k_range: args.k_range };
    let report = certify(&system, &options, &probes)?;

    print_report(&report);

    let config = json!({
        "partition": boundaries,
        "wavelet": wavelet_config,
        "system": system_config,
        "window": [grid.lo, grid.hi],
        "gridPoints": grid.points,
        "alphaWindow": report.truncation.alpha_window,
        "kRange": args.k_range,
        "probes": args.probes,
        "probeLength": args.probe_length,
        "probeInterval": probe_interval,
        "seed": args.seed,
    });
    let doc = json!({ "config": config, "report": report });
    std::fs::write(&args.output, serde_json::to_string_pretty(&doc).map_err(ewf_core::io::FormatError::from)?)
        .map_err(ewf_core::io::FormatError::from)?;
    println!("wrote {}", args.output.display());

    match report.verdict {
        Verdict::ParsevalCertified | Verdict::FrameCertified { .. } => Ok(ExitCode::SUCCESS),
        _ => Ok(ExitCode::from(EXIT_NOT_CERTIFIED)),
    }
}

fn print_report(report: &FrameReport) {
    match report.verdict {
        Verdict::ParsevalCertified => println!("verdict: ParsevalCertified"),
        Verdict::FrameCertified { a, b } => println!("verdict: FrameCertified  A = {a:.12}  B = {b:.12}"),
        Verdict::BesselOnly { b } => println!("verdict: BesselOnly  B = {b:.12}"),
        Verdict::Indeterminate => println!("verdict: Indeterminate"),
    }
    println!("parseval sum deviation: {:.6e}", report.parseval_sum_deviation);
    let max_residual = report
        .cross_term_residuals
        .iter()
        .map(|r| r.residual)
        .fold(0.0f64, f64::max);
    println!(
        "cross terms: {} lattice elements, max residual {max_residual:.6e}",
        report.cross_term_residuals.len()
    );
    println!("bounds: A = {:.12}, B = {:.12}", report.lower_a, report.bessel_b);
    if let Some(lic) = report.lic_value {
        println!("lic diagnostic: {lic:.12e}");
    }
    for (i, r) in report.probe_energy_ratios.iter().enumerate() {
        println!("probe {i}: energy ratio {r:.12}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

fn cmd_report_dump(args: ReportDumpArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.report).map_err(ewf_core::io::FormatError::from)?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(ewf_core::io::FormatError::from)?;
    let report: FrameReport = serde_json::from_value(doc["report"].clone())
        .map_err(ewf_core::io::FormatError::from)?;
    print_report(&report);

    if let Some(dir) = &args.samples_out {
        let config = &doc["config"];
        let boundaries: BoundarySet = serde_json::from_value(config["partition"].clone())
            .map_err(ewf_core::io::FormatError::from)?;
        let wavelet_config: WaveletConfig = serde_json::from_value(config["wavelet"].clone())
            .map_err(ewf_core::io::FormatError::from)?;
        let system_config: SystemConfig = serde_json::from_value(config["system"].clone())
            .map_err(ewf_core::io::FormatError::from)?;
        let base = args.report.parent().unwrap_or(Path::new("."));
        let wavelet = wavelet_config.build(base)?;
        let partition = build_partition(&boundaries)?;
        let system = build_system(&partition, &wavelet, &system_config.to_options())?;
        let grid = report.truncation.grid;

        std::fs::create_dir_all(dir).map_err(ewf_core::io::FormatError::from)?;
        let scan = ewf_core::frame::parseval_sum(&system, &grid)?;
        write_scan_csv(&dir.join("parseval_sum.csv"), "s", scan.samples.iter().map(|&(x, s)| (x, s, 0.0)))?;
        for (i, r) in report.cross_term_residuals.iter().enumerate() {
            let scan = ewf_core::frame::cross_term(&system, r.alpha, &grid)?;
            write_scan_csv(
                &dir.join(format!("cross_term_{i}.csv")),
                "g",
                scan.samples.iter().map(|&(x, g)| (x, g.re, g.im)),
            )?;
        }
        println!("wrote scan samples under {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn write_scan_csv(
    path: &Path,
    name: &str,
    rows: impl Iterator<Item = (f64, f64, f64)>,
) -> Result<(), Error> {
    use std::io::Write;
    let mut out = std::fs::File::create(path).map_err(ewf_core::io::FormatError::from)?;
    writeln!(out, "xi,{name}_re,{name}_im").map_err(ewf_core::io::FormatError::from)?;
    for (x, re, im) in rows {
        writeln!(out, "{x:.17e},{re:.17e},{im:.17e}").map_err(ewf_core::io::FormatError::from)?;
    }
    Ok(())
}
