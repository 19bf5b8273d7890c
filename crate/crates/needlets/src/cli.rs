//! Argument parsing and exit codes: `0` success, `1` check failure, `2`
//! input or usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use crate::commands::{execute, Outcome};
use crate::config::{parse_pairs, RunConfig, Subcommand};
use crate::error::{Error, Result};
use crate::io::read_text;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "needlets", version, about = "Spectrum-adapted needlet frames and Gaussian random fields on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Check forward-difference decay and summability of a spectrum.
    SpectrumCheck {
        /// Highest forward-difference order r.
        #[arg(long)]
        order: Option<String>,
        /// Largest acceptable decay constant.
        #[arg(long)]
        decay_threshold: Option<String>,
    },
    /// Build a frame and report its levels.
    BuildFrame,
    /// Draw a field realization.
    Sample {
        /// Also write a map image.
        #[arg(long)]
        image: bool,
        #[arg(long, value_parser = ["gray", "diverging"])]
        palette: Option<String>,
    },
    /// Run the frame regression checks.
    Diagnose {
        #[arg(long)]
        partition_tolerance: Option<String>,
        #[arg(long)]
        parseval_tolerance: Option<String>,
        /// Random index pairs for the orthogonality check.
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long, hide = true)]
        corrupt_cutoff: Option<String>,
    },
    /// Render a binary field file as an image.
    Render {
        input: PathBuf,
        #[arg(long, value_parser = ["gray", "diverging"])]
        palette: Option<String>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// `key=value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `power-law`, `constant`, `constant:A` or `table:PATH`.
    #[arg(long, global = true)]
    spectrum: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Top level.
    #[arg(long = "J", global = true)]
    top_level: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// `NTHETAxNPHI`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_parser = ["gauss", "equal-area", "tdesign"])]
    quadrature: Option<String>,
    /// Directory holding `j<level>.txt` designs.
    #[arg(long, global = true)]
    tdesign_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["kl", "needlet"])]
    expansion: Option<String>,
    #[arg(long, global = true, value_parser = ["json", "text"])]
    report: Option<String>,
}

/// Parses `args` (program name first) and resolves the configuration.
pub fn parse_config<I, T>(args: I) -> std::result::Result<Result<RunConfig>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(resolve(cli))
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let mut pairs = match &cli.common.config {
        Some(path) => parse_pairs(&read_text(path)?).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?,
        None => BTreeMap::new(),
    };
    let mut flag = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            pairs.insert(key.to_owned(), v);
        }
    };
    let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
    let c = cli.common;
    flag("spectrum", c.spectrum);
    flag("beta", c.beta);
    flag("J", c.top_level);
    flag("seed", c.seed);
    flag("grid", c.grid);
    flag("quadrature", c.quadrature);
    flag("tdesign-dir", path(c.tdesign_dir));
    flag("out", path(c.out));
    flag("expansion", c.expansion);
    flag("report", c.report);
    let subcommand = match cli.command {
        Command::SpectrumCheck { order, decay_threshold } => {
            flag("order", order);
            flag("decay-threshold", decay_threshold);
            Subcommand::SpectrumCheck
        }
        Command::BuildFrame => Subcommand::BuildFrame,
        Command::Sample { image, palette } => {
            if image {
                flag("image", Some("true".into()));
            }
            flag("palette", palette);
            Subcommand::Sample
        }
        Command::Diagnose {
            partition_tolerance,
            parseval_tolerance,
            pairs,
            corrupt_cutoff,
        } => {
            flag("partition-tolerance", partition_tolerance);
            flag("parseval-tolerance", parseval_tolerance);
            flag("pairs", pairs);
            flag("corrupt-cutoff", corrupt_cutoff);
            Subcommand::Diagnose
        }
        Command::Render { input, palette } => {
            flag("input", path(Some(input)));
            flag("palette", palette);
            Subcommand::Render
        }
    };
    pairs.remove("subcommand");
    let mut config = RunConfig::new(subcommand);
    config.apply(&pairs)?;
    Ok(config)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
            let _ = e.print();
            return code;
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Ok(Ok(config)) => config,
    };
    match execute(&config) {
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Ok(done) => {
            for path in &done.written {
                println!("wrote {}", path.display());
            }
            match done.outcome {
                Outcome::Passed => EXIT_SUCCESS,
                Outcome::Failed(names) => {
                    eprintln!("check failed: {}", names.join(", "));
                    EXIT_CHECK_FAILED
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExpansionSpec, SpectrumSpec};

    fn config(args: &[&str]) -> Result<RunConfig> {
        parse_config(std::iter::once("needlets").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_map_to_config() {
        let c = config(&["sample", "--J", "5", "--seed", "42", "--expansion", "kl", "--grid", "8x16", "--image"]).unwrap();
        assert_eq!(c.subcommand, Subcommand::Sample);
        assert_eq!((c.top_level, c.seed, c.grid), (5, 42, (8, 16)));
        assert_eq!(c.expansion, ExpansionSpec::Kl);
        assert!(c.image);
        let c = config(&["--spectrum", "constant", "spectrum-check", "--order", "2"]).unwrap();
        assert_eq!(c.spectrum, SpectrumSpec::Constant(1.0));
        assert_eq!(c.order, 2);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "subcommand=render\nseed=7\nbeta=2\n").unwrap();
        let file = path.to_str().unwrap();
        let c = config(&["diagnose", "--config", file, "--seed", "9"]).unwrap();
        assert_eq!(c.subcommand, Subcommand::Diagnose);
        assert_eq!((c.seed, c.beta), (9, 2.0));
    }

    #[test]
    fn usage_errors() {
        assert!(parse_config(["needlets", "sample", "--expansion", "fourier"]).is_err());
        assert!(parse_config(["needlets"]).is_err());
        assert!(config(&["sample", "--seed", "minus1"]).is_err());
        assert!(config(&["sample", "--config", "/nonexistent/run.cfg"]).is_err());
        assert_eq!(run(["needlets", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["needlets", "--help"]), EXIT_SUCCESS);
    }
}
