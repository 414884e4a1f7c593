use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::PathBuf;

mod commands;
mod io;
mod svg;

use io::{input, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Plucker point of a plane (or the plane of a Plucker point)
    Plucker,
    /// Incidence of two planes
    Incidence,
    /// Ellipticity test and margin of a congruence
    EllipticCheck,
    /// Osculating complex structure at a point of S2- (--vector y1,y2,y3)
    Osculate,
    /// Planes of a congruence meeting a totally real plane
    RealPoints,
    /// Taming 2-form of an elliptic congruence
    Tame,
    /// Ellipticity margins along the contraction deformation
    Deform,
    /// Ellipticity of the linearized PDE pair of a chart at --point
    PdeElliptic,
    /// Fiber congruence of a chart at --point
    Fiber,
    /// Residual of a curve field (CSV from --data) against a chart
    Residual,
    /// Solve for a curve from holomorphic data
    Solve,
    /// Integrate a case (3) curve
    DarbouxIntegrate,
    /// Apply a shear symmetry to an integrated case (3) curve
    Symmetry,
    /// Case (4) coframe built from --F
    Coframe,
    /// Duality misfit between cases (3) and (4)
    DualCheck,
    /// Structure equation fit of the case (4) coframe
    StructureFit,
    /// Microlocal invariants f, g over an icosphere
    Invariants,
    /// Balance integrals of |f|^2 and |g|^2
    Balance,
}

#[derive(Debug, Parser)]
#[command(name = "pseudocurve", version, about = "Elliptic line congruences and pseudocomplex structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Congruence JSON
    #[arg(long, global = true)]
    pub congruence: Option<PathBuf>,
    /// Chart JSON
    #[arg(long, global = true)]
    pub chart: Option<PathBuf>,
    /// Data file (holomorphic data JSON, case (3) JSON or curve field CSV)
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Expression JSON for F
    #[arg(long = "F", global = true)]
    pub f: Option<PathBuf>,
    /// Plane or Plucker point JSON; repeat for two planes
    #[arg(long, global = true)]
    pub plane: Vec<PathBuf>,
    /// Comma separated reals
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub vector: Option<Vec<f64>>,
    /// Chart point re z, im z, re w, im w, re p, im p
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    /// Grid points per direction, or sample count
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Icosphere subdivision level
    #[arg(long, global = true)]
    pub level: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Everything a command needs: parsed flags plus `--tol.<name>` overrides.
pub struct RunConfig {
    pub cli: Cli,
    pub tol: BTreeMap<String, f64>,
}

pub const TOL_NAMES: [&str; 3] = ["solver", "path", "incidence"];

/// Splits `--tol.<name> value` and `--tol.<name>=value` out of the arguments.
fn split_tolerances(args: Vec<String>) -> CliResult<(Vec<String>, BTreeMap<String, f64>)> {
    let mut rest = Vec::new();
    let mut tol = BTreeMap::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(spec) = a.strip_prefix("--tol.") else {
            rest.push(a);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| input(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        if !TOL_NAMES.contains(&name.as_str()) {
            return Err(input(format!("unknown tolerance `{name}` (known: {})", TOL_NAMES.join(", "))));
        }
        let v: f64 = value.parse().map_err(|_| input(format!("--tol.{name}: `{value}` is not a number")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(input(format!("--tol.{name} must be positive, got {value}")));
        }
        tol.insert(name, v);
    }
    Ok((rest, tol))
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("PSEUDOCURVE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| input(format!("PSEUDOCURVE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| input(e.to_string()))
}

fn run(args: Vec<String>) -> CliResult<()> {
    let (rest, tol) = split_tolerances(args)?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(input(msg.trim_start_matches("error: ").trim_end()));
        }
    };
    configure_threads()?;
    let cfg = RunConfig { cli, tol };
    let out = commands::dispatch(&cfg)?;
    out.emit(&cfg)
}

fn main() {
    if let Err(e) = run(std::env::args().collect()) {
        let code = e.exit_code();
        match &e {
            CliError::Input(m) => eprintln!("error: {m}"),
            CliError::Lib(err) => eprintln!("error: {err}"),
        }
        std::process::exit(code);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(a: &[&str]) -> Vec<String> {
        a.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tolerances_are_split_out() {
        let (rest, tol) = split_tolerances(strings(&["x", "solve", "--tol.solver", "1e-9", "--tol.path=1e-5", "--n", "8"])).unwrap();
        assert_eq!(rest, strings(&["x", "solve", "--n", "8"]));
        assert_eq!(tol["solver"], 1e-9);
        assert_eq!(tol["path"], 1e-5);
    }

    #[test]
    fn bad_tolerances_are_input_errors() {
        for bad in [&["x", "--tol.solver", "-1"][..], &["x", "--tol.nope", "1"], &["x", "--tol.path"], &["x", "--tol.path=abc"]] {
            let e = split_tolerances(strings(bad)).unwrap_err();
            assert_eq!(e.exit_code(), 1);
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
