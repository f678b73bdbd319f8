use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use visabs::report::{analyze, AnalyzeOptions, Format};
use visabs::{abstraction_score, exemplar, ConditionB, Scenario};

/// Information-theoretic analysis of visual abstraction scenarios.
#[derive(Debug, Parser)]
#[command(name = "visabs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute cost-benefit reports, route comparisons, scores and axis structure.
    Analyze {
        /// Scenario file, or `-` for stdin.
        file: PathBuf,
        #[arg(long)]
        pipeline: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a built-in scenario as JSON.
    Exemplar {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score one image from its condition A and B judgments.
    Score {
        #[arg(long, value_enum)]
        condition_a: YesNo,
        #[arg(long, value_enum)]
        condition_b: CondB,
    },
    /// Classify the transitions of the scenario's abstraction axes.
    Axis {
        file: PathBuf,
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Load and validate a scenario without analysing it.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Table => Format::Table,
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum YesNo {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CondB {
    Satisfied,
    Na,
    Negated,
}

impl From<CondB> for ConditionB {
    fn from(b: CondB) -> Self {
        match b {
            CondB::Satisfied => ConditionB::Satisfied,
            CondB::Na => ConditionB::NotApplicable,
            CondB::Negated => ConditionB::Negated,
        }
    }
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::input(format!("<stdin>: {e}")))?;
        Scenario::from_json_str(&text).map_err(Failure::input)
    } else {
        visabs::load_scenario(path).map_err(Failure::input)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::internal(format!("writing output: {e}")))
        }
    }
}

fn run_analysis(scenario: &Scenario, opts: &AnalyzeOptions, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let report = analyze(scenario, opts).map_err(|e| {
        if e.is_input_error() {
            Failure::input(e)
        } else {
            Failure::internal(e)
        }
    })?;
    emit(&report.render(format), out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            file,
            pipeline,
            format,
            out,
        } => {
            let scenario = load(&file)?;
            let opts = AnalyzeOptions { pipeline, axis: None };
            run_analysis(&scenario, &opts, format.into(), out.as_deref())
        }
        Command::Exemplar { name, out } => {
            let doc = exemplar(&name).map_err(Failure::input)?;
            emit(&doc.to_json(), out.as_deref())
        }
        Command::Score {
            condition_a,
            condition_b,
        } => {
            let score = abstraction_score(matches!(condition_a, YesNo::Yes), condition_b.into());
            emit(&format!("{score}\n"), None)
        }
        Command::Axis { file, axis, format } => {
            let mut scenario = load(&file)?;
            // Only the axis block is wanted here.
            scenario.pipelines.clear();
            scenario.direct_routes.clear();
            scenario.judgments.clear();
            let opts = AnalyzeOptions { pipeline: None, axis };
            run_analysis(&scenario, &opts, format.into(), None)
        }
        Command::Validate { file } => {
            let scenario = load(&file)?;
            emit(
                &format!(
                    "ok: {} alphabets, {} channels, {} stages, {} pipelines, {} direct routes, {} judgments, {} axes\n",
                    scenario.alphabets.len(),
                    scenario.channels.len(),
                    scenario.stages.len(),
                    scenario.pipelines.len(),
                    scenario.direct_routes.len(),
                    scenario.judgments.len(),
                    scenario.axes.len()
                ),
                None,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
