use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgMatches, Command};
use pshardy_cli::{execute, summary, CliError, ExperimentConfig, ExperimentKind, OutputFormat, Overrides};

const AFTER_HELP: &str = "Columns: series, parameter, value, reference, abs_error, est_error, converged.\n\
Exit status: 0 success, 1 invalid config, 2 quadrature did not converge (table still written).";

fn config_arg() -> Arg {
    Arg::new("config").long("config").short('c').required(true).value_parser(value_parser!(PathBuf)).help("TOML configuration")
}

fn cli() -> Command {
    let mut cmd = Command::new("pshardy")
        .about("Weighted Hardy space experiments on the unit disk")
        .subcommand_required(true)
        .after_help(AFTER_HELP)
        .subcommand(Command::new("validate").about("Check a configuration without computing anything").arg(config_arg()));
    for kind in ExperimentKind::ALL {
        cmd = cmd.subcommand(
            Command::new(kind.name())
                .about(format!("Run the {kind} experiment"))
                .long_about(format!("Run the {kind} experiment.\n\nTable: {}", kind.columns()))
                .after_help(AFTER_HELP)
                .arg(config_arg())
                .arg(Arg::new("out").long("out").short('o').value_parser(value_parser!(PathBuf)).help("Output path"))
                .arg(Arg::new("format").long("format").value_parser(["csv", "json"]).help("Output format"))
                .arg(Arg::new("tol").long("tol").value_parser(value_parser!(f64)).help("Override all quadrature tolerances")),
        );
    }
    cmd
}

fn load(m: &ArgMatches) -> Result<ExperimentConfig, CliError> {
    let path = m.get_one::<PathBuf>("config").expect("required");
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    ExperimentConfig::from_toml(&text)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let result = if name == "validate" {
        load(sub).map(|cfg| match cfg.validate() {
            report if report.is_empty() => {
                println!("{}: config is valid", cfg.experiment);
                0
            }
            report => {
                for line in report {
                    eprintln!("violation: {line}");
                }
                1
            }
        })
    } else {
        let kind: ExperimentKind = name.parse().expect("subcommands are experiment names");
        let overrides = Overrides {
            out: sub.get_one::<PathBuf>("out").cloned(),
            format: sub.get_one::<String>("format").map(|f| f.parse::<OutputFormat>().expect("restricted by clap")),
            tol: sub.get_one::<f64>("tol").copied(),
        };
        load(sub).and_then(|cfg| execute(kind, cfg, &overrides)).map(|outcome| {
            if outcome.written_to.is_some() {
                println!("{}", summary(&outcome.table));
            } else {
                print!("{}", outcome.rendered);
                eprintln!("{}", summary(&outcome.table));
            }
            outcome.exit_code()
        })
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_is_well_formed() {
        cli().debug_assert();
    }

    #[test]
    fn every_experiment_is_a_subcommand() {
        let names: Vec<String> = cli().get_subcommands().map(|c| c.get_name().to_string()).collect();
        for kind in ExperimentKind::ALL {
            assert!(names.contains(&kind.name().to_string()));
        }
    }
}
