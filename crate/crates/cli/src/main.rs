//! `starsl`: forward simulation, recovery and oracle runs for star graphs
//! with a frozen-argument potential.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use starsl_core::characteristic::{phi_blocks, sample_phi, PhiSampleSet, SampleGridSpec};
use starsl_core::descriptor::ConfigDescriptor;
use starsl_core::inverse::{
    recover_angles, recover_chords, recover_chords_resonant, recover_potentials, PotentialRecoveryProblem,
    RecoveryReport, RecoveryStatus, TopologyOptions, TopologyRecoveryProblem,
};
use starsl_core::oracle::{assemble, compare_phi_zeros, comparison_csv, spectrum};
use starsl_core::verify::verify;
use starsl_core::{Error, Mode};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  usage error
   3  config or sample file could not be parsed
   4  file could not be read or written
   5  invalid geometry
   6  sample grid does not match the requested grid
   7  sample fingerprint does not match the declared knowns
   8  rank-deficient chord system
   9  non-positive reciprocal chord
  10  Gauss-Newton iteration limit reached
  11  ambiguous potential recovery
  12  verify: at least one property failed
  13  eigensolver failure
  14  invalid configuration
  15  chord violates the triangle inequality
  16  recovered angles do not close the fan
  17  position outside an edge
  18  operation needs normalized mode
  19  grid point inside a pole window
  20  configurations differ where they must agree
  21  mesh too coarse";

#[derive(Debug, Parser)]
#[command(name = "starsl", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the mode of the configuration (verbatim or normalized).
    #[arg(long)]
    mode: Option<Mode>,
    /// Overrides the truncation order of the configuration.
    #[arg(long = "N", id = "order")]
    order: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the characteristic function on a grid (CSV, or JSON with fingerprint for a .json output).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Grid, e.g. generic:0.3:12.3:40, integers:1:20, resonant:2:10, zeroset:1:0:10, list:1,2+0.5i.
        #[arg(long)]
        grid: SampleGridSpec,
    },
    /// Recover chords and angles from samples; lengths and potentials come from --config.
    RecoverTopology {
        #[command(flatten)]
        common: Common,
        /// Observed samples (.json or .csv).
        #[arg(long)]
        observed: PathBuf,
        /// Grid the samples must lie on.
        #[arg(long)]
        grid: Option<SampleGridSpec>,
        /// Closure tolerance for the recovered angles.
        #[arg(long, default_value_t = starsl_core::geometry::RECOVERY_CLOSURE_TOLERANCE)]
        tolerance: f64,
        /// Return the minimum-norm solution when the chords are not identifiable (exit code stays 8).
        #[arg(long)]
        allow_rank_deficient: bool,
        /// Use the closed-form path on points resonant with single edges.
        #[arg(long)]
        resonant: bool,
    },
    /// Recover potential coefficients from samples; lengths and chords come from --config.
    RecoverPotential {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        observed: PathBuf,
        #[arg(long)]
        grid: Option<SampleGridSpec>,
        /// Residual tolerance for Gauss-Newton.
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Finite-difference eigenvalues of the star (CSV, or JSON for a .json output).
    OracleSpectrum {
        #[command(flatten)]
        common: Common,
        /// Mesh step.
        #[arg(long)]
        h: f64,
        /// Number of eigenvalues of smallest modulus.
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Tabulate real zeros of Phi against oracle eigenvalues (diagnostic only).
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// z range as LO:HI.
        #[arg(long, value_parser = parse_range)]
        range: (f64, f64),
    },
    /// Run the property suite; uses a built-in example when --config is absent.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Phi and its three blocks on a grid, for plotting.
    EmitPlotData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: SampleGridSpec,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, std::io::Error),
    Core(Error),
    Status(RecoveryStatus),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(..) => 4,
            Failure::Verify => 12,
            Failure::Status(_) => 8,
            Failure::Core(e) => match e {
                Error::Parse(_) => 3,
                Error::InvalidGeometry(_) => 5,
                Error::GridMismatch(_) => 6,
                Error::FingerprintMismatch { .. } => 7,
                Error::RankDeficient { .. } => 8,
                Error::NonPositiveReciprocal { .. } => 9,
                Error::MaxItersExceeded { .. } => 10,
                Error::AmbiguousSolution { .. } => 11,
                Error::EigensolverFailure => 13,
                Error::InvalidConfig(_) => 14,
                Error::TriangleViolation { .. } => 15,
                Error::ClosureViolation { .. } => 16,
                Error::OutOfDomain { .. } => 17,
                Error::ModeRequired => 18,
                Error::PoleWindow { .. } => 19,
                Error::ConfigMismatch(_) => 20,
                Error::MeshTooCoarse { .. } => 21,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Core(e) => e.to_string(),
            Failure::Status(s) => format!("recovery finished with status {s:?}"),
            Failure::Verify => "one or more properties failed".into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(p.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_json(path: &Option<PathBuf>) -> bool {
    path.as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn descriptor(common: &Common) -> Result<ConfigDescriptor, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required for this command".into()))?;
    let mut d = ConfigDescriptor::parse(&read(path)?)?;
    if let Some(mode) = common.mode {
        d.mode = mode;
    }
    if let Some(n) = common.order {
        d.truncation = n;
    }
    Ok(d)
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn observed(path: &Path, mode: Mode, grid: &Option<SampleGridSpec>, star: &starsl_core::StarModel) -> Result<PhiSampleSet, Failure> {
    let text = read(path)?;
    let set = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        PhiSampleSet::from_json(&text)?
    } else {
        PhiSampleSet::from_csv(&text, mode)?
    };
    if let Some(g) = grid {
        set.check_grid(&g.points(star)?)?;
    }
    Ok(set)
}

fn finish(report: &RecoveryReport, out: &Option<PathBuf>) -> Outcome {
    write(out, &(report.to_json() + "\n"))?;
    match report.status {
        RecoveryStatus::Ok => Ok(()),
        s => Err(Failure::Status(s)),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Simulate { common, grid } => {
            let loaded = descriptor(&common)?.build()?;
            warn(&loaded.warnings);
            let samples = sample_phi(&loaded.config, &grid)?;
            let text = if is_json(&common.out) {
                samples.to_json() + "\n"
            } else {
                samples.to_csv()
            };
            write(&common.out, &text)
        }
        Command::RecoverTopology {
            common,
            observed: path,
            grid,
            tolerance,
            allow_rank_deficient,
            resonant,
        } => {
            let d = descriptor(&common)?;
            let (star, warnings) = d.star()?;
            warn(&warnings);
            let set = observed(&path, star.mode(), &grid, &star)?;
            let m = star.edge_count();
            let problem = TopologyRecoveryProblem::new(star, set)?.with_options(TopologyOptions {
                allow_rank_deficient,
                closure_tolerance: tolerance,
                ..Default::default()
            });
            let report = if resonant {
                recover_chords_resonant(&problem)?
            } else if m >= 3 {
                recover_angles(&problem)?
            } else {
                recover_chords(&problem)?
            };
            finish(&report, &common.out)
        }
        Command::RecoverPotential {
            common,
            observed: path,
            grid,
            tolerance,
        } => {
            let d = descriptor(&common)?;
            let order = d.truncation;
            let loaded = d.build()?;
            let star = loaded.config.star();
            let set = observed(&path, star.mode(), &grid, star)?;
            let mut problem = PotentialRecoveryProblem::new(&loaded.config, order, set)?;
            problem.options.residual_tolerance = tolerance;
            finish(&recover_potentials(&problem)?, &common.out)
        }
        Command::OracleSpectrum { common, h, count } => {
            let (star, warnings) = descriptor(&common)?.star()?;
            warn(&warnings);
            let s = spectrum(&assemble(&star, h)?, count)?;
            let text = if is_json(&common.out) { s.to_json() + "\n" } else { s.to_csv() };
            write(&common.out, &text)
        }
        Command::Compare {
            common,
            h,
            count,
            range,
        } => {
            let loaded = descriptor(&common)?.build()?;
            warn(&loaded.warnings);
            let s = spectrum(&assemble(loaded.config.star(), h)?, count)?;
            let table = compare_phi_zeros(&loaded.config, &s, range.0, range.1);
            write(&common.out, &comparison_csv(&table))
        }
        Command::Verify { common } => {
            let d = match common.config {
                Some(_) => descriptor(&common)?,
                None => {
                    let mut d = ConfigDescriptor::example();
                    if let Some(mode) = common.mode {
                        d.mode = mode;
                    }
                    d
                }
            };
            let report = verify(&d);
            write(&common.out, &(report.to_json() + "\n"))?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::EmitPlotData { common, grid } => {
            let loaded = descriptor(&common)?.build()?;
            warn(&loaded.warnings);
            let cfg = &loaded.config;
            let points = grid.points(cfg.star())?;
            let mut text = String::from(
                "z_re,z_im,phi_re,phi_im,nonlocal_re,nonlocal_im,center_re,center_im,outer_re,outer_im\n",
            );
            for z in points {
                let b = phi_blocks(cfg, z);
                let cols: Vec<Complex64> = vec![z, b.total(), b.nonlocal, b.center, b.outer];
                let row: Vec<String> = cols
                    .iter()
                    .flat_map(|c| [c.re, c.im])
                    .map(starsl_core::characteristic::fmt_float)
                    .collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            write(&common.out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("starsl: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
