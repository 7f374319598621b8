use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use topodyn::conditions::Verdict;
use topodyn_cli::{builtin, render, report_json, resolve, run_scenario, CliError, RunOptions, RunReport};

#[derive(Parser)]
#[command(name = "topodyn", version, about = "Topological checks on vector fields and control systems")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Print the built-in scenarios and exit.
    #[arg(long)]
    list_scenarios: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: a JSON file or the name of a built-in scenario.
    Analyze {
        scenario: String,
        /// Seed for every randomized step (overrides the scenario's).
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for report files; without it the report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Refinement level of every sphere mesh.
        #[arg(long)]
        refinement: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(report: &RunReport, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let csv = || render::to_csv(report).map_err(|e| CliError::Io(e.to_string()));
    let Some(dir) = out else {
        match format {
            Format::Json => print!("{}", report_json(report)),
            Format::Csv => print!("{}", csv()?),
            Format::Svg => return emit(report, Some(Path::new(".")), format),
        }
        return Ok(());
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join(format!("{}.json", report.scenario)), &report_json(report))?;
    if format != Format::Json {
        write(&dir.join(format!("{}.csv", report.scenario)), &csv()?)?;
    }
    if format == Format::Svg {
        for (i, r) in report.checks.iter().enumerate() {
            let Some(plot) = &r.plot else { continue };
            let title = format!("{}: {} ({})", report.scenario, r.condition, r.verdict.as_str());
            match render::to_svg(&title, plot) {
                Some(svg) => write(&dir.join(format!("{}-{}-{}.svg", report.scenario, i + 1, r.condition)), &svg)?,
                None => eprintln!("check {}: no plot for dimension {}", i + 1, plot.dimension),
            }
        }
    }
    Ok(())
}

fn analyze(scenario: &str, opts: RunOptions, out: Option<&Path>, format: Format) -> Result<Verdict, CliError> {
    let prepared = resolve(scenario)?;
    let report = run_scenario(&prepared, &opts);
    for (i, r) in report.checks.iter().enumerate() {
        match &r.message {
            Some(m) => eprintln!("{:>3} {:<20} {:<10} {m}", i + 1, r.condition, r.verdict.as_str()),
            None => eprintln!("{:>3} {:<20} {}", i + 1, r.condition, r.verdict.as_str()),
        }
    }
    eprintln!("{}: {}", report.scenario, report.aggregate.as_str());
    emit(&report, out, format)?;
    Ok(report.aggregate)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        let mut stdout = std::io::stdout().lock();
        for s in builtin::all() {
            // a closed pipe (`| head`) is not an error worth reporting
            if writeln!(stdout, "{:<24} {}", s.name, s.description).is_err() {
                break;
            }
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Analyze { scenario, seed, out, format, refinement }) = cli.command else {
        eprintln!("nothing to do; try `topodyn analyze <scenario>` or `topodyn --list-scenarios`");
        return ExitCode::from(2);
    };
    match analyze(&scenario, RunOptions { seed, refinement }, out.as_deref(), format) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
