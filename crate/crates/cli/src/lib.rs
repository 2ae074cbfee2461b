//! Batch front end for `dbar-core`: JSON scenarios in, deterministic
//! artifacts out.
//!
//! Exit codes: 0 when the scenario's checks pass, 2 when they fail, 1 on
//! any error (bad config, unreadable input, rejected parameters).

pub mod artifacts;
pub mod config;
pub mod error;
pub mod input;
pub mod ops;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dbar_core::grid::Domain;
use serde_json::json;

use crate::config::{GridSpec, Module, Operation, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::input::Context;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "dbar", version, about = "Numerical d-bar calculus scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a built-in scenario instead of a file.
    #[arg(long)]
    builtin: Option<String>,
    /// Output directory; defaults to `out/<scenario>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write PGM heatmaps.
    #[arg(long)]
    pgm: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cauchy, Beurling and Newton transforms, ∂̄, mollification, Beltrami.
    Transform(Common),
    /// Integrating factors and trivial extensions.
    Factor(Common),
    /// Slice roots, zero graphs, Weierstrass polynomials, cutoff pairings.
    Zeros(Common),
    /// Polar sets, Poisson and Riesz, Chirka potential, J-holomorphy.
    Removability(Common),
    /// Field-file round trips and operator identities.
    Verify(Common),
    /// The truncated sharpness example.
    Counterexample {
        #[command(flatten)]
        common: Common,
        /// Number of product factors.
        #[arg(long = "K", alias = "k")]
        k: Option<usize>,
        /// Table exponent to emit.
        #[arg(long)]
        p: Option<f64>,
    },
}

fn builtin(name: &str, module: Module) -> Result<ScenarioConfig> {
    let op = match (name, module) {
        ("disc-potential", Module::Transform) => Operation::DiscPotential { pad: None },
        ("counterexample", Module::Counterexample) => Operation::Counterexample { k: 50, p: None },
        _ => {
            return Err(CliError::Config(format!(
                "no built-in scenario `{name}` for `{}` (known: transform/disc-potential, counterexample/counterexample)",
                module.name()
            )))
        }
    };
    let grid = match op {
        Operation::DiscPotential { .. } => Some(GridSpec {
            domain: Domain::unit_disc(),
            resolution: Some(256),
            shape: None,
        }),
        _ => None,
    };
    Ok(ScenarioConfig {
        scenario: name.to_string(),
        seed: None,
        out: None,
        grid,
        pgm: false,
        op,
    })
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DBAR_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("DBAR_THREADS must be a positive integer, got `{v}`")))?;
        // a pool configured earlier in this process wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load(module: Module, common: &Common) -> Result<(ScenarioConfig, PathBuf)> {
    match (&common.config, &common.builtin) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or --builtin, not both".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let cfg = ScenarioConfig::parse(&text, &path.display().to_string())?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((cfg, base))
        }
        (None, Some(name)) => Ok((builtin(name, module)?, PathBuf::from("."))),
        (None, None) if module == Module::Counterexample => {
            Ok((builtin("counterexample", module)?, PathBuf::from(".")))
        }
        (None, None) => Err(CliError::Config("missing --config <file.json> or --builtin <name>".into())),
    }
}

/// Run one scenario; returns the verdict and the artifact paths.
pub fn run_scenario(module: Module, cfg: &ScenarioConfig, base_dir: &Path, out: &Path) -> Result<(bool, Vec<PathBuf>)> {
    cfg.validate(module, base_dir)?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let ctx = Context {
        base_dir: base_dir.to_path_buf(),
        seed,
    };
    let outcome = ops::run(cfg, &ctx)?;
    let report = json!({
        "scenario": cfg.scenario,
        "module": module.name(),
        "op": cfg.op.name(),
        "seed": seed,
        "verdict": if outcome.pass { "pass" } else { "fail" },
        "config": cfg,
        "result": outcome.summary,
    });
    let written = artifacts::write_all(out, &report, &outcome, cfg.pgm)?;
    Ok((outcome.pass, written))
}

fn execute(cli: Cli) -> Result<bool> {
    set_threads()?;
    let (module, common, k, p) = match &cli.command {
        Command::Transform(c) => (Module::Transform, c, None, None),
        Command::Factor(c) => (Module::Factor, c, None, None),
        Command::Zeros(c) => (Module::Zeros, c, None, None),
        Command::Removability(c) => (Module::Removability, c, None, None),
        Command::Verify(c) => (Module::Verify, c, None, None),
        Command::Counterexample { common, k, p } => (Module::Counterexample, common, *k, *p),
    };
    let (mut cfg, base) = load(module, common)?;
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    if common.pgm {
        cfg.pgm = true;
    }
    if let Operation::Counterexample { k: ck, p: cp } = &mut cfg.op {
        if let Some(k) = k {
            *ck = k;
        }
        if p.is_some() {
            *cp = p;
        }
    } else if k.is_some() || p.is_some() {
        return Err(CliError::Config("--K and --p apply to the counterexample operation only".into()));
    }
    let out = match (&common.out, &cfg.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => base.join(o),
        (None, None) => PathBuf::from("out").join(&cfg.scenario),
    };
    let (pass, written) = run_scenario(module, &cfg, &base, &out)?;
    for w in &written {
        println!("wrote {}", w.display());
    }
    println!("{}: {}", cfg.scenario, if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
