//! Command-line front end for `harmbounds`.
//!
//! ```text
//! harmbounds analyze --input study.json [--format text|json]
//! harmbounds example [--format text|json]
//! harmbounds verify --samples 10000 --seed 42
//! ```
//!
//! Exit codes: 0 success, 1 usage/parse/validation error, 2 incompatible
//! evidence in every stratum, 3 counterexample found.

pub mod error;
pub mod input;
pub mod rational;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use harmbounds::propositions::SharpBounds;

use crate::error::{exit, CliError};
use crate::input::{parse_json, InputFormat, StudyInput};
use crate::report::{analyze, render_json, render_text, AnalysisReport, Style};

/// Bundled worked example.
pub const MP_MEN_JSON: &str = include_str!("../data/mp_men.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "harmbounds", version, about = "Sharp bounds on counterfactual harm from trial and observational data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a study file of per-stratum counts.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        /// Defaults to CSV for `.csv` files and JSON otherwise.
        #[arg(long, value_enum)]
        input_format: Option<InputFormat>,
    },
    /// Analyze the bundled worked example.
    Example {
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Check the concordance propositions on random and constructed joints.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

/// The bundled input, parsed.
pub fn example_input() -> StudyInput {
    parse_json(MP_MEN_JSON).expect("bundled example parses")
}

pub fn command_example() -> AnalysisReport {
    analyze(&example_input()).expect("bundled example is valid")
}

/// Reads `HARMBOUNDS_COLOR`; `auto` (the default) styles only terminals.
pub fn color_style(setting: Option<&str>, terminal: bool) -> Result<Style, CliError> {
    match setting {
        None | Some("auto") => Ok(if terminal { Style::Ansi } else { Style::Plain }),
        Some("never") => Ok(Style::Plain),
        Some(other) => Err(CliError::Usage(format!(
            "HARMBOUNDS_COLOR must be 'never' or 'auto', got '{other}'"
        ))),
    }
}

fn render_analysis(report: &AnalysisReport, format: OutputFormat, terminal: bool) -> Result<String, CliError> {
    Ok(match format {
        OutputFormat::Json => render_json(report),
        OutputFormat::Text => {
            let setting = std::env::var("HARMBOUNDS_COLOR").ok();
            render_text(report, color_style(setting.as_deref(), terminal)?)
        }
    })
}

fn execute(cli: Cli, out: &mut dyn Write, terminal: bool) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze {
            input,
            format,
            input_format,
        } => {
            let input_format = input_format.unwrap_or_else(|| InputFormat::from_path(&input));
            let study = input::parse_input(&input, input_format)?;
            let report = analyze(&study)?;
            out.write_all(render_analysis(&report, format, terminal)?.as_bytes())?;
            Ok(if report.all_incompatible() {
                exit::INCOMPATIBLE
            } else {
                exit::SUCCESS
            })
        }
        Command::Example { format } => {
            out.write_all(render_analysis(&command_example(), format, terminal)?.as_bytes())?;
            Ok(exit::SUCCESS)
        }
        Command::Verify {
            samples,
            seed,
            format,
        } => {
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let report = verify::command_verify_with(&SharpBounds, samples, seed)?;
            out.write_all(report.render(format).as_bytes())?;
            Ok(report.exit_code())
        }
    }
}

/// Runs the CLI and returns the process exit code. `terminal` says whether
/// `out` is a terminal, for `HARMBOUNDS_COLOR=auto`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write, terminal: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::SUCCESS };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out, terminal) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["harmbounds"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err, false);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn color_setting() {
        assert_eq!(color_style(None, true).unwrap(), Style::Ansi);
        assert_eq!(color_style(Some("auto"), false).unwrap(), Style::Plain);
        assert_eq!(color_style(Some("never"), true).unwrap(), Style::Plain);
        assert!(color_style(Some("always"), true).is_err());
    }

    #[test]
    fn help_and_version_succeed() {
        assert_eq!(run_capture(&["--help"]).0, 0);
        assert_eq!(run_capture(&["--version"]).0, 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&[]).0, 1);
        assert_eq!(run_capture(&["frobnicate"]).0, 1);
        assert_eq!(run_capture(&["verify", "--samples", "-3"]).0, 1);
        let (code, _, err) = run_capture(&["verify", "--samples", "0"]);
        assert_eq!(code, 1);
        assert!(err.contains("--samples"), "{err}");
    }

    #[test]
    fn missing_input_file_exits_one() {
        let (code, _, err) = run_capture(&["analyze", "--input", "/nonexistent/study.json"]);
        assert_eq!(code, 1);
        assert!(err.contains("cannot read"), "{err}");
    }
}
