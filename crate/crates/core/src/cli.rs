//! Command-line front end.
//!
//! Settings are `key=value` pairs coming from, in increasing precedence, a
//! `--config` file, positional arguments, `--set` flags, and the dedicated
//! `--seed` / `--out` flags. Unknown keys are usage errors.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::exterior::LinearMap;
use crate::gridmap::{energy_report, read_gmap, write_gmap, GridMap};
use crate::sampling;
use crate::solver::{minimize_energy, verify_solution, SolverConfig, SolverError, Termination};
use crate::triad::{calibration_comass_check, check_compatibility, make_triad, Family};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_MAX_ITERS: i32 = 3;
pub const EXIT_STALL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "multiholo", version, about = "Triad checks, map diagnostics and energy flows on lattice maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the triad axioms and the comass of ω.
    VerifyTriad(CommonArgs),
    /// Energies, identities and distortion of a GMAP file.
    CheckMap(CommonArgs),
    /// Minimize the (n+1)-energy starting from a GMAP file.
    Flow(CommonArgs),
    /// check-map plus a pass/fail verdict on being multiholomorphic.
    Report(CommonArgs),
    /// Write one of the built-in sample maps as GMAP.
    SampleMap(CommonArgs),
}

#[derive(clap::Args, Debug)]
struct CommonArgs {
    /// Settings as key=value.
    #[arg(value_name = "KEY=VALUE")]
    settings: Vec<String>,
    /// Flat key=value settings file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override one setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    VerifyTriad,
    CheckMap,
    Flow,
    Report,
    SampleMap,
}

impl CommandKind {
    fn keys(self) -> &'static [&'static str] {
        match self {
            CommandKind::VerifyTriad => &["family", "dim", "samples", "frames", "tol", "seed", "out"],
            CommandKind::CheckMap => &["input", "out"],
            CommandKind::Report => &["input", "tol", "out"],
            CommandKind::Flow => &[
                "input",
                "out",
                "history",
                "max_iters",
                "grad_tol",
                "step0",
                "backtrack",
                "armijo",
                "record_every",
            ],
            CommandKind::SampleMap => &["family", "kind", "n", "amplitude", "scale", "coord", "out"],
        }
    }
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub settings: BTreeMap<String, String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format(_) | Error::NonFinite(_) => Failure::Data(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn split_kv(s: &str) -> Result<(String, String), Failure> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Failure::Usage(format!("expected key=value, got `{s}`"))),
    }
}

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(split_kv)
        .collect()
}

impl RunConfig {
    fn resolve(command: CommandKind, args: &CommonArgs) -> Result<Self, Failure> {
        let mut pairs = Vec::new();
        if let Some(p) = &args.config {
            pairs.extend(parse_config_file(p)?);
        }
        for s in args.settings.iter().chain(&args.set) {
            pairs.push(split_kv(s)?);
        }
        if let Some(seed) = args.seed {
            pairs.push(("seed".into(), seed.to_string()));
        }
        if let Some(out) = &args.out {
            pairs.push(("out".into(), out.display().to_string()));
        }
        let allowed = command.keys();
        let mut settings = BTreeMap::new();
        for (k, v) in pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(Failure::Usage(format!("unknown key `{k}`; accepted: {}", allowed.join(", "))));
            }
            settings.insert(k, v);
        }
        Ok(Self { command, settings })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    fn parsed<V: std::str::FromStr>(&self, key: &str, default: V) -> Result<V, Failure> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Failure::Usage(format!("{key}: cannot parse `{v}`"))),
        }
    }

    fn family(&self) -> Result<Family, Failure> {
        let f = self.get("family").ok_or_else(|| Failure::Usage("missing family=...".into()))?;
        f.parse().map_err(|_| {
            Failure::Usage(format!(
                "unknown triad family `{f}`; expected one of {}",
                Family::ALL.map(|f| f.name()).join(", ")
            ))
        })
    }

    fn input(&self) -> Result<GridMap<f64>, Failure> {
        let p = self.get("input").ok_or_else(|| Failure::Usage("missing input=PATH".into()))?;
        let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {p}: {e}")))?;
        read_gmap(&text).map_err(|e| Failure::Data(format!("{p}: {e}")))
    }

    fn solver(&self) -> Result<SolverConfig<f64>, Failure> {
        let mut cfg = SolverConfig::default();
        for k in SolverConfig::<f64>::KEYS {
            if let Some(v) = self.get(k) {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cfg.get("out") {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {p}: {e}"))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn run_verify_triad(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let family = cfg.family()?;
    let dim = cfg.parsed("dim", family.default_dim())?;
    let samples: usize = cfg.parsed("samples", 10_000)?;
    let frames: usize = cfg.parsed("frames", samples)?;
    let tol: f64 = cfg.parsed("tol", 1e-10)?;
    let seed: u64 = cfg.parsed("seed", 0)?;
    let t = make_triad::<f64>(family, dim)?;
    let mut rng = sampling::seeded(seed);
    let compat = check_compatibility(&t, samples, tol, &mut rng);
    let comass = calibration_comass_check(&t, frames, tol, &mut rng);
    let pass = compat.pass() && comass.pass();
    let text = format!(
        "dim={dim}\nseed={seed}\n{}{}pass={pass}\n",
        compat.to_key_values(),
        comass.to_key_values()
    );
    emit(cfg, &text, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn run_check_map(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let m = cfg.input()?;
    let r = energy_report(&m)?;
    emit(cfg, &r.to_key_values(), stdout)?;
    Ok(EXIT_OK)
}

fn run_report(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let m = cfg.input()?;
    let tol: f64 = cfg.parsed("tol", 1e-10)?;
    let r = energy_report(&m)?;
    let v = verify_solution(&m, tol)?;
    emit(cfg, &format!("{}{}", r.to_key_values(), v.to_key_values()), stdout)?;
    Ok(if v.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn write_file(path: &str, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))
}

fn run_flow(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let m = cfg.input()?;
    let solver = cfg.solver()?;
    let out = cfg.get("out").ok_or_else(|| Failure::Usage("flow needs out=PATH (or --out) for the final map".into()))?;
    let history_path = cfg.get("history").map_or_else(|| format!("{out}.history.csv"), str::to_string);
    let (map, history, status, code) = match minimize_energy(&m, &solver) {
        Ok(o) => {
            let code = match o.termination {
                Termination::Converged => EXIT_OK,
                Termination::MaxIters => EXIT_MAX_ITERS,
            };
            let status = format!("{:?}", o.termination).to_lowercase();
            (o.map, o.history, format!("{status}\niterations={}", o.iterations), code)
        }
        Err(SolverError::Stall { iteration, map, history }) => (*map, history, format!("stall\niterations={iteration}"), EXIT_STALL),
        Err(SolverError::Config(e)) => return Err(e.into()),
    };
    write_file(out, &write_gmap(&map))?;
    write_file(&history_path, &history.to_csv())?;
    let last = history.last().expect("history has the initial record");
    let text = format!(
        "termination={status}\nenergy={:?}\npullback={:?}\ngap={:?}\nmax_residual={:?}\nhistory={history_path}\nmap={out}\n",
        last.energy, last.pullback, last.gap, last.max_residual
    );
    stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(code)
}

fn run_sample_map(cfg: &RunConfig, stdout: &mut dyn Write) -> Outcome {
    let family = match cfg.get("family") {
        Some(_) => cfg.family()?,
        None => Family::Associative,
    };
    let t = make_triad::<f64>(family, family.default_dim())?;
    let n: usize = cfg.parsed("n", 8)?;
    let shape = vec![n; t.n() + 1];
    let amp: f64 = cfg.parsed("amplitude", 0.05)?;
    let scale: i64 = cfg.parsed("scale", 2)?;
    let coord: usize = cfg.parsed("coord", t.n() + 1)?;
    if coord >= t.dim() {
        return Err(Failure::Usage(format!("coord={coord} outside a {}-dimensional target", t.dim())));
    }
    let d = t.dim();
    let m = match cfg.get("kind").unwrap_or("inclusion") {
        "inclusion" => GridMap::inclusion(t, &shape)?,
        "scaled" => GridMap::scaled_inclusion(t, &shape, scale)?,
        "constant" => GridMap::constant(t, &shape, &vec![0.0; d])?,
        "identity" if d == shape.len() => GridMap::linear(t, &shape, &LinearMap::identity(d))?,
        "perturbed" => GridMap::inclusion(t, &shape)?.perturbed(|x| {
            let mut v = vec![0.0; d];
            v[coord] = amp * (TAU * x[0]).sin();
            v
        })?,
        k => return Err(Failure::Usage(format!("unknown sample kind `{k}`; expected inclusion, scaled, constant, identity, perturbed"))),
    };
    emit(cfg, &write_gmap(&m), stdout)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to `stdout` unless an output path is set.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let (kind, args) = match &cli.command {
        Command::VerifyTriad(a) => (CommandKind::VerifyTriad, a),
        Command::CheckMap(a) => (CommandKind::CheckMap, a),
        Command::Flow(a) => (CommandKind::Flow, a),
        Command::Report(a) => (CommandKind::Report, a),
        Command::SampleMap(a) => (CommandKind::SampleMap, a),
    };
    let result = RunConfig::resolve(kind, args).and_then(|cfg| match kind {
        CommandKind::VerifyTriad => run_verify_triad(&cfg, stdout),
        CommandKind::CheckMap => run_check_map(&cfg, stdout),
        CommandKind::Flow => run_flow(&cfg, stdout),
        CommandKind::Report => run_report(&cfg, stdout),
        CommandKind::SampleMap => run_sample_map(&cfg, stdout),
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_DATA
        }
    }
}
