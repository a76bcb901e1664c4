//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad arguments,
//! configuration, I/O or numerical errors.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::oracle::QuadratureOptions;
use config::{OutputFormat, ScenarioConfig};
use output::emit_text;
use verify::{run_verify, VerifySettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qewp", version, about = "Photon emission by shaped free-electron wavepackets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct Quadrature {
    /// Minimum number of quadrature nodes for the oracle.
    #[arg(long, default_value_t = 0)]
    pub nodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one scenario.
    Emit {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a scenario along the sweep axis in its config.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Stimulated emission against the envelope width Γ.
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
    /// Bunching spectrum of a modulated wavepacket.
    Fig4 {
        #[command(flatten)]
        common: Common,
    },
    /// Closed forms and oracle for every photon state.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        quadrature: Quadrature,
    },
    /// Run the verification battery and write a JSON report.
    Verify {
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Number of random points in each Gaussian grid.
        #[arg(long, default_value_t = verify::DEFAULT_GRID)]
        seed_grid: usize,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        quadrature: Quadrature,
        /// Relative error injected into the closed-form sinc.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_sinc: Option<f64>,
    },
}

struct Target {
    config: Option<ScenarioConfig>,
    out: Option<PathBuf>,
    format: OutputFormat,
}

impl Common {
    fn resolve(&self) -> Result<Target> {
        let config = self.config.as_deref().map(ScenarioConfig::load).transpose()?;
        let output = config.as_ref().and_then(|c| c.output.clone());
        let out = self.out.clone().or_else(|| output.as_ref().and_then(|s| s.path.clone()));
        let format = self.format.or_else(|| output.and_then(|s| s.format)).unwrap_or_default();
        Ok(Target { config, out, format })
    }

    fn required(&self, target: &Target) -> Result<ScenarioConfig> {
        target.config.clone().ok_or_else(|| Error::config("--config", "a scenario file is required"))
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Emit { common } => {
            let t = common.resolve()?;
            let config = common.required(&t)?;
            let report = commands::run_emit(&config.resolve()?)?;
            let text = match common.format {
                None if config.output.as_ref().and_then(|o| o.format).is_none() => report.to_text(),
                _ => report.render(t.format),
            };
            emit_text(&text, t.out.as_deref(), stdout)?;
        }
        Command::Sweep { common } => {
            let t = common.resolve()?;
            let config = common.required(&t)?;
            emit_text(&commands::run_sweep(&config)?.render(t.format), t.out.as_deref(), stdout)?;
        }
        Command::Fig3 { common } => {
            let t = common.resolve()?;
            emit_text(&commands::run_fig3(t.config.as_ref())?.render(t.format), t.out.as_deref(), stdout)?;
        }
        Command::Fig4 { common } => {
            let t = common.resolve()?;
            emit_text(&commands::run_fig4(t.config.as_ref())?.render(t.format), t.out.as_deref(), stdout)?;
        }
        Command::Table1 { common, quadrature } => {
            let t = common.resolve()?;
            let opts = QuadratureOptions { min_nodes: quadrature.nodes, ..QuadratureOptions::default() };
            emit_text(&commands::run_table1(t.config.as_ref(), &opts)?.render(t.format), t.out.as_deref(), stdout)?;
        }
        Command::Verify { out, seed_grid, seed, quadrature, perturb_sinc } => {
            if seed_grid == 0 {
                return Err(Error::config("--seed-grid", "must be at least 1"));
            }
            if let Some(p) = perturb_sinc {
                if !p.is_finite() {
                    return Err(Error::config("--perturb-sinc", "must be finite"));
                }
            }
            let settings = VerifySettings {
                grid_points: seed_grid,
                seed,
                options: QuadratureOptions { min_nodes: quadrature.nodes, ..QuadratureOptions::default() },
                perturb_sinc,
            };
            let report = run_verify(&settings)?;
            emit_text(&report.to_json(), out.as_deref(), stdout)?;
            for r in &report.records {
                let verdict = if r.pass { "ok" } else { "FAIL" };
                writeln!(stderr, "{verdict:<4} {:<34} {:.3e} (tol {:.1e})", r.name, r.max_rel_err, r.tolerance)?;
            }
            if !report.pass {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
