//! The `qmix` command.
//!
//! Exit codes: 0 on success, 1 when an input fails validation or an
//! operation is outside its domain, 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::density::{self, CDensity, Classification, Observable, QDensity, DENSITY_TOL};
use crate::dynamics::{self, Generator};
use crate::io::{self, MatrixFile};
use crate::qmatrix::QMatrix;
use crate::scenario::{self, SelfTest, SCHEMA_VERSION};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qmix", version, about = "Quaternionic density matrices and improper mixtures")]
pub struct Cli {
    /// Seed for randomized subcommands.
    #[arg(long, global = true, env = "QMIX_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Tolerance override, `name=value`. Known names: density.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Fourth-order Runge-Kutta on the von Neumann equation.
    Rk4,
    /// Product of short-time exponentials.
    Propagator,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a matrix file holds a quaternionic density matrix.
    Validate { file: PathBuf },
    /// Complex projection `rho -> rho_alpha`.
    Project { file: PathBuf },
    /// Proper or improper.
    Classify { file: PathBuf },
    /// Quaternionic density of the given rank projecting onto a complex density.
    Lift {
        file: PathBuf,
        #[arg(long)]
        rank: usize,
    },
    /// Rank-one quaternionic purification of a rank-2 complex density.
    Purify { file: PathBuf },
    /// Expectation value `Re Tr(A rho)`.
    Expect { observable: PathBuf, state: PathBuf },
    /// Evolve a state under a constant anti-hermitian generator.
    Evolve {
        state: PathBuf,
        #[arg(long = "gen")]
        generator: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Method::Rk4)]
        method: Method,
    },
    /// System/apparatus measurement: proper versus improper mixture.
    Scenario {
        /// `re,im` of the amplitude on `|+n>`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        cplus: [f64; 2],
        /// `re,im` of the amplitude on `|-n>`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        cminus: [f64; 2],
        /// Polar and azimuthal angle of the spin axis, radians.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, default_value = "0,0")]
        nhat: [f64; 2],
    },
    /// Randomized check of the projection and lift propositions.
    CheckProps {
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Corrupt every lift and purify output; the run must fail.
        #[arg(long)]
        self_test: bool,
    },
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    };
    let parse = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let pair = [parse(a)?, parse(b)?];
    if pair.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite value in {s:?}"));
    }
    Ok(pair)
}

const TOLERANCE_NAMES: [&str; 1] = ["density"];

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(format!("unknown tolerance {name:?}; known: {}", TOLERANCE_NAMES.join(", ")));
    }
    let v: f64 = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("tolerance {name} must be positive and finite, got {v}"));
    }
    Ok((name.to_owned(), v))
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn density_tol(&self) -> f64 {
        self.tolerances.get("density").copied().unwrap_or(DENSITY_TOL)
    }
}

enum Output {
    /// Canonical single-line matrix.
    Matrix(String),
    Report(String),
}

/// Failure of a subcommand after argument parsing.
#[derive(Debug)]
enum Failure {
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn read_matrix(path: &Path) -> std::result::Result<QMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    io::parse_matrix(&text).map_err(|e| match e {
        Error::Schema { pointer, message } => Failure::Domain(Error::Schema {
            pointer,
            message: format!("{}: {message}", path.display()),
        }),
        other => Failure::Domain(other),
    })
}

fn read_density(path: &Path, cfg: &RunConfig) -> std::result::Result<QDensity, Failure> {
    Ok(density::validate(&read_matrix(path)?, cfg.density_tol())?)
}

fn read_complex_density(path: &Path, cfg: &RunConfig) -> std::result::Result<CDensity, Failure> {
    let m = read_matrix(path)?;
    if m.beta_norm() != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{}: expected a complex density (no beta block), |beta|_F = {:e}",
            path.display(),
            m.beta_norm()
        ))
        .into());
    }
    Ok(CDensity::new(m.into_parts().0, cfg.density_tol())?)
}

fn report<T: Serialize>(value: &T) -> Output {
    Output::Report(serde_json::to_string_pretty(value).expect("reports serialize"))
}

#[derive(Serialize)]
struct Evolution {
    schema_version: u32,
    method: &'static str,
    t: f64,
    steps: usize,
    classification: Classification,
    beta_norm: f64,
    max_correction: Option<f64>,
    state: MatrixFile,
}

fn run(command: &Command, cfg: &RunConfig) -> std::result::Result<Output, Failure> {
    Ok(match command {
        Command::Validate { file } => {
            let rho = read_density(file, cfg)?;
            report(&json!({
                "schema_version": SCHEMA_VERSION,
                "valid": true,
                "dim": rho.dim(),
                "rank_q": rho.rank(),
                "classification": rho.classification(),
                "beta_norm": rho.beta_norm(),
            }))
        }
        Command::Project { file } => {
            let rho = read_density(file, cfg)?;
            Output::Matrix(io::serialize_complex(density::complex_projection(&rho).matrix()))
        }
        Command::Classify { file } => {
            let rho = read_density(file, cfg)?;
            report(&json!({
                "schema_version": SCHEMA_VERSION,
                "classification": rho.classification(),
                "beta_norm": rho.beta_norm(),
            }))
        }
        Command::Lift { file, rank } => {
            let rho_alpha = read_complex_density(file, cfg)?;
            Output::Matrix(io::serialize_matrix(density::lift(&rho_alpha, *rank)?.matrix()))
        }
        Command::Purify { file } => {
            let rho_alpha = read_complex_density(file, cfg)?;
            Output::Matrix(io::serialize_matrix(density::purify(&rho_alpha)?.matrix()))
        }
        Command::Expect { observable, state } => {
            let a = Observable::new(read_matrix(observable)?)?;
            let rho = read_density(state, cfg)?;
            report(&json!({
                "schema_version": SCHEMA_VERSION,
                "value": density::expectation(&a, &rho)?,
                "observable_is_complex": a.is_complex(),
            }))
        }
        Command::Evolve {
            state,
            generator,
            t,
            steps,
            method,
        } => {
            let rho = read_density(state, cfg)?;
            let gen = Generator::constant(read_matrix(generator)?)?;
            if *steps == 0 {
                return Err(Error::InvalidArgument("--steps must be positive".into()).into());
            }
            let (out, max_correction, name) = match method {
                Method::Rk4 => {
                    let run = dynamics::integrate(&rho, &gen, *t, *steps)?;
                    let c = run.max_correction();
                    (run.state, Some(c), "rk4")
                }
                Method::Propagator => {
                    let u = dynamics::time_ordered(&gen, *t, *steps)?;
                    (dynamics::evolve(&rho, &u)?, None, "propagator")
                }
            };
            report(&Evolution {
                schema_version: SCHEMA_VERSION,
                method: name,
                t: *t,
                steps: *steps,
                classification: out.classification(),
                beta_norm: out.beta_norm(),
                max_correction,
                state: MatrixFile::from(out.matrix()),
            })
        }
        Command::Scenario { cplus, cminus, nhat } => {
            let r = scenario::run_scenario(
                Complex64::new(cplus[0], cplus[1]),
                Complex64::new(cminus[0], cminus[1]),
                nhat[0],
                nhat[1],
            )?;
            if let Some(bad) = r.checks.iter().find(|c| !c.pass) {
                return Err(Error::InvalidArgument(format!(
                    "scenario check {} failed: residual {:e} > {:e}",
                    bad.name, bad.residual, bad.tolerance
                ))
                .into());
            }
            report(&r)
        }
        Command::CheckProps { nmax, trials, self_test } => {
            let mode = if *self_test { SelfTest::CorruptBeta } else { SelfTest::Off };
            report(&scenario::check_propositions(*nmax, *trials, cfg.seed, mode)?)
        }
    })
}

/// Parse `argv` (program name first), run, and write results to `stdout` or
/// `--out`, diagnostics to `stderr`. Returns the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let cfg = RunConfig {
        seed: cli.seed,
        tolerances: cli.tol.iter().cloned().collect(),
        out: cli.out.clone(),
    };
    let output = match run(&cli.command, &cfg) {
        Ok(o) => o,
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let mut text = match output {
        Output::Matrix(s) => s,
        Output::Report(s) => s,
    };
    text.push('\n');
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => {
            if let Err(e) = stdout.write_all(text.as_bytes()) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INVALID;
            }
        }
    }
    EXIT_OK
}

pub fn main_with_env() -> i32 {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    dispatch(std::env::args_os(), &mut stdout, &mut stderr)
}

/// Convenience for tests and embedding: run and capture both streams.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("0.5,-1e-3").unwrap(), [0.5, -1e-3]);
        assert_eq!(parse_pair(" 1 , 2 ").unwrap(), [1.0, 2.0]);
        assert!(parse_pair("1").is_err());
        assert!(parse_pair("1,2,3").is_err());
        assert!(parse_pair("1,nan").is_err());
    }

    #[test]
    fn tolerances() {
        assert_eq!(parse_tol("density=1e-8").unwrap(), ("density".into(), 1e-8));
        assert!(parse_tol("density=0").is_err());
        assert!(parse_tol("density=-1").is_err());
        assert!(parse_tol("bogus=1").is_err());
        assert!(parse_tol("density").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, out, err) = run_captured(["qmix"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
        let (code, _, _) = run_captured(["qmix", "scenario", "--cplus", "1,0"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, out, _) = run_captured(["qmix", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("check-props"));
    }

    #[test]
    fn scenario_negative_amplitudes() {
        let s = std::f64::consts::FRAC_1_SQRT_2.to_string();
        let (code, out, err) = run_captured(["qmix", "scenario", "--cplus", &format!("{s},0"), "--cminus", &format!("-{s},0")]);
        assert_eq!(code, EXIT_OK, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["inputs"]["c_minus"][0].as_f64().unwrap(), -std::f64::consts::FRAC_1_SQRT_2);
    }
}
