#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

mod commands;
mod manifest;
mod settings;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "mkdv", version, about = "Transition-region asymptotics for defocusing mKdV with kink boundary values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Reflection coefficient on a real grid, r(1) and the discrete spectrum.
    Scatter,
    /// p = |r(1)| and the phase phi_0.
    Phase,
    /// Ablowitz-Segur Painleve II solution.
    Painleve,
    /// Leading-order formula on an (s, t) sweep.
    Asymptote,
    /// Pseudo-spectral PDE run with snapshots.
    Simulate,
    /// Formula against the PDE run.
    Compare,
    /// Sign table of Re(2i theta) for one ray.
    Signature,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Scatter => "scatter",
            Command::Phase => "phase",
            Command::Painleve => "painleve",
            Command::Asymptote => "asymptote",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Signature => "signature",
        }
    }
}

/// Each flag overrides the config key of the same name.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Flat key=value file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Initial profile, CSV with header `x,q`.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Times, comma separated.
    #[arg(long, global = true)]
    tlist: Option<String>,
    /// `s_lo:s_hi`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    swindow: Option<String>,
    /// Half-width C of the band |x/t + 6| t^(2/3) < C.
    #[arg(long = "bandC", global = true)]
    band_c: Option<String>,
    /// Points per time in the s window.
    #[arg(long, global = true)]
    ns: Option<String>,
    /// `integral` or `blaschke`.
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi0: Option<String>,
    /// Lower end of the Painleve II grid.
    #[arg(long, global = true, allow_hyphen_values = true)]
    smin: Option<String>,
    /// `n:zmax` for a symmetric grid, or an explicit comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    zgrid: Option<String>,
    #[arg(long, global = true)]
    margin: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    /// Simulator grid size.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    halfwidth: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    framespeed: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi: Option<String>,
    /// `umin:umax:vmin:vmax`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// `nu:nv`.
    #[arg(long, global = true)]
    res: Option<String>,
    /// Use r = 0 and no eigenvalues in place of the profile's data.
    #[arg(long, global = true)]
    reflectionless: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("profile", self.profile.clone()),
            ("out", self.out.clone()),
            ("tlist", self.tlist.clone()),
            ("swindow", self.swindow.clone()),
            ("bandC", self.band_c.clone()),
            ("ns", self.ns.clone()),
            ("variant", self.variant.clone()),
            ("p", self.p.clone()),
            ("phi0", self.phi0.clone()),
            ("smin", self.smin.clone()),
            ("zgrid", self.zgrid.clone()),
            ("margin", self.margin.clone()),
            ("dt", self.dt.clone()),
            ("n", self.n.clone()),
            ("halfwidth", self.halfwidth.clone()),
            ("framespeed", self.framespeed.clone()),
            ("xi", self.xi.clone()),
            ("bounds", self.bounds.clone()),
            ("res", self.res.clone()),
            ("reflectionless", self.reflectionless.then(|| "true".to_string())),
        ]
    }
}

#[derive(Debug)]
pub enum CliError {
    Input { message: String, line: Option<usize> },
    Core(mkdv_core::Error),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), line: None }
    }

    pub fn input_at(line: usize, message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), line: Some(line) }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn to_json(&self, command: &str) -> serde_json::Value {
        let (kind, line, stage) = match self {
            CliError::Input { line, .. } => ("input", *line, None),
            CliError::Core(e) => {
                let line = match e {
                    mkdv_core::Error::Parse { line, .. } => Some(*line),
                    mkdv_core::Error::Stage { source, .. } => match source.as_ref() {
                        mkdv_core::Error::Parse { line, .. } => Some(*line),
                        _ => None,
                    },
                    _ => None,
                };
                (if e.is_numerical() { "numerical" } else { "input" }, line, e.stage())
            }
        };
        json!({
            "command": command,
            "kind": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "line": line,
            "stage": stage,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input { message, line: Some(l) } => write!(f, "line {l}: {message}"),
            CliError::Input { message, line: None } => f.write_str(message),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<mkdv_core::Error> for CliError {
    fn from(e: mkdv_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let result = Settings::resolve(cli.flags.config.as_deref(), &cli.flags.pairs()).and_then(|s| {
        let config_path = cli.flags.config.as_ref().map(|p| p.display().to_string());
        commands::dispatch(name, &s, config_path)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json(name));
            ExitCode::from(e.exit_code())
        }
    }
}
