use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "calabi", version, about = "Action, Calabi invariant and periodic orbits of area-preserving annulus and disk maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Boundary rotations, flux, Calabi invariant and boundary actions.
    Invariants(Opts),
    /// Periodic orbit atlas.
    Orbits(Opts),
    /// Witness search for the action inequalities.
    Verify(Opts),
    /// Action–rotation diagram as CSV, SVG or JSON.
    Diagram(Opts),
    /// Embedding of the annulus map into the disk for each `a`.
    Embed(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::Invariants(o) | Command::Orbits(o) | Command::Verify(o) | Command::Diagram(o) | Command::Embed(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Invariants(_) => "invariants",
            Command::Orbits(_) => "orbits",
            Command::Verify(_) => "verify",
            Command::Diagram(_) => "diagram",
            Command::Embed(_) => "embed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct Opts {
    /// Map spec (TOML).
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long = "kmax", value_name = "N")]
    pub k_max: Option<u32>,
    #[arg(long, value_name = "N")]
    pub grid: Option<u32>,
    /// Quadrature tolerance.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    /// Tolerance of the inequality checks.
    #[arg(long = "check-tol", value_name = "X")]
    pub check_tol: Option<f64>,
    /// Comma-separated embedding parameters.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    #[arg(long = "birkhoff-n", value_name = "N")]
    pub birkhoff_n: Option<u32>,
    #[arg(long = "birkhoff-starts", value_name = "N")]
    pub birkhoff_starts: Option<u32>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output formats for `diagram` (default: csv,svg).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

#[cfg(test)]
mod tests {
    use clap::{CommandFactory, Parser};

    use super::*;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lists_are_comma_separated() {
        let cli = Cli::parse_from(["calabi", "diagram", "--spec", "m.toml", "--a", "0,0.5,2", "--format", "csv,json"]);
        let o = cli.command.opts();
        assert_eq!(o.a.as_deref(), Some(&[0.0, 0.5, 2.0][..]));
        assert_eq!(o.format.as_deref(), Some(&[Format::Csv, Format::Json][..]));
    }
}
