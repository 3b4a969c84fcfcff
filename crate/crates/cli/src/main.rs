use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mockcheck::checks::{
    run_data_stage, run_model_stage, BinaryOutputStrictness, DataStageConfig, ModelStageConfig,
    DEFAULT_SEED,
};
use mockcheck::engine::OptimizerKind;
use mockcheck::mock::{generate_mock_data, mock_model_recipe, mock_model_spec, MockDataConfig};
use mockcheck::report::{render_report, Report, ReportFormat, Verdict};
use mockcheck::spec::{
    load_dataset, parse_data_interface, parse_model_interface, parse_model_spec, DataInterface,
    LabelColumn, ModelInterface,
};
use serde_json::Value;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Mock-based unit tests for the data-preparation and model-design stages of
/// a deep-learning pipeline.
#[derive(Debug, Parser)]
#[command(name = "mockcheck", version)]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SharedArgs {
    /// Base seed; run i uses seed + i [default: $MOCKCHECK_SEED or 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of seeded runs for stochastic checks (odd) [default: 3]
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// JSON file with threshold overrides: {"data": {...}, "model": {...}}
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Accept only sigmoid outputs for binary classification
    #[arg(long, global = true)]
    strict_binary_output: bool,
    /// Include wall-clock timings in the report (output is then not reproducible)
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a CSV dataset against its data and model interfaces
    CheckData {
        /// CSV file with a header row
        #[arg(long)]
        data: PathBuf,
        /// Label column: header name, or a 0-based index if no header matches
        #[arg(long, default_value = "label")]
        label: String,
        #[arg(long)]
        data_interface: PathBuf,
        #[arg(long)]
        model_interface: PathBuf,
        /// Run the learnability probe even if structural checks failed
        #[arg(long)]
        force_learnability: bool,
    },
    /// Check a model spec against a data interface
    CheckModel {
        /// Model spec JSON
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data_interface: PathBuf,
    },
    /// Write mock data for a data interface as CSV
    GenMockData {
        #[arg(long)]
        data_interface: PathBuf,
        /// Output file [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the mock model for a pair of interfaces as a model spec
    GenMockModel {
        #[arg(long)]
        data_interface: PathBuf,
        #[arg(long)]
        model_interface: PathBuf,
        #[arg(long, value_enum, default_value_t = Optimizer::Adam)]
        optimizer: Optimizer,
        #[arg(long, default_value_t = 0.001)]
        learning_rate: f64,
        /// Output file [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Optimizer {
    Sgd,
    Adam,
}

/// Failure that ends the program with the usage/IO exit code.
#[derive(Debug)]
struct CliError(String);

impl From<mockcheck::Error> for CliError {
    fn from(e: mockcheck::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

fn read_data_interface(path: &Path) -> CliResult<DataInterface> {
    let di = parse_data_interface(&read_text(path)?)?;
    Ok(di)
}

fn read_model_interface(path: &Path) -> CliResult<ModelInterface> {
    Ok(parse_model_interface(&read_text(path)?)?)
}

/// Threshold overrides from `--config`, split by stage. Each section keeps
/// its raw JSON so it is possible to tell whether a key was given.
#[derive(Debug, Default)]
struct ConfigFile {
    data: Option<Value>,
    model: Option<Value>,
}

fn read_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError(format!("parse error: config {}: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError(format!("parse error: config {} must be a JSON object", path.display())));
    };
    let data = map.remove("data");
    let model = map.remove("model");
    if let Some(key) = map.keys().next() {
        return Err(CliError(format!(
            "parse error: config {}: unknown section '{key}' (expected \"data\" or \"model\")",
            path.display()
        )));
    }
    Ok(ConfigFile { data, model })
}

fn has_key(section: &Option<Value>, key: &str) -> bool {
    section.as_ref().and_then(|v| v.get(key)).is_some()
}

fn parse_section<T: serde::de::DeserializeOwned + Default>(
    section: &Option<Value>,
    name: &str,
) -> CliResult<T> {
    match section {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| CliError(format!("parse error: config section \"{name}\": {e}"))),
    }
}

/// Seed precedence: `--seed`, then the config file, then `MOCKCHECK_SEED`,
/// then the built-in default.
fn resolve_seed(shared: &SharedArgs, section: &Option<Value>, configured: u64) -> CliResult<u64> {
    if let Some(seed) = shared.seed {
        return Ok(seed);
    }
    if has_key(section, "seed") {
        return Ok(configured);
    }
    match std::env::var("MOCKCHECK_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError(format!("MOCKCHECK_SEED must be an unsigned integer, got {text:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn data_config(shared: &SharedArgs, file: &ConfigFile, force: bool) -> CliResult<DataStageConfig> {
    let mut config: DataStageConfig = parse_section(&file.data, "data")?;
    config.seed = resolve_seed(shared, &file.data, config.seed)?;
    if let Some(runs) = shared.runs {
        config.runs = runs;
    }
    config.force_learnability |= force;
    config.validate()?;
    Ok(config)
}

fn model_config(shared: &SharedArgs, file: &ConfigFile) -> CliResult<ModelStageConfig> {
    let mut config: ModelStageConfig = parse_section(&file.model, "model")?;
    config.seed = resolve_seed(shared, &file.model, config.seed)?;
    if let Some(runs) = shared.runs {
        config.runs = runs;
    }
    if shared.strict_binary_output {
        config.binary_output_strictness = BinaryOutputStrictness::Strict;
    }
    config.validate()?;
    Ok(config)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError(format!("cannot write to stdout: {e}"))),
    }
}

fn emit_report(shared: &SharedArgs, report: Report) -> CliResult<u8> {
    let report = if shared.timings { report } else { report.without_timings() };
    let format = match shared.format {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
    };
    write_output(None, render_report(&report, format)?.as_bytes())?;
    Ok(match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
    })
}

fn run(cli: Cli) -> CliResult<u8> {
    let shared = &cli.shared;
    let file = read_config(shared.config.as_deref())?;
    match cli.command {
        Command::CheckData {
            data,
            label,
            data_interface,
            model_interface,
            force_learnability,
        } => {
            let config = data_config(shared, &file, force_learnability)?;
            let di = read_data_interface(&data_interface)?;
            let mi = read_model_interface(&model_interface)?;
            let dataset = load_dataset(&data, &LabelColumn::from(label.as_str()))?;
            emit_report(shared, run_data_stage(&dataset, &di, &mi, &config)?)
        }
        Command::CheckModel {
            model,
            data_interface,
        } => {
            let config = model_config(shared, &file)?;
            let di = read_data_interface(&data_interface)?;
            let spec = parse_model_spec(&read_text(&model)?)?;
            emit_report(shared, run_model_stage(&spec, &di, &config)?)
        }
        Command::GenMockData {
            data_interface,
            out,
        } => {
            let seed = resolve_seed(shared, &None, DEFAULT_SEED)?;
            let di = read_data_interface(&data_interface)?;
            let dataset = generate_mock_data(&di, &MockDataConfig::new(seed))?;
            let mut bytes = Vec::new();
            dataset.write_csv(&mut bytes)?;
            write_output(out.as_deref(), &bytes)?;
            Ok(0)
        }
        Command::GenMockModel {
            data_interface,
            model_interface,
            optimizer,
            learning_rate,
            out,
        } => {
            let di = read_data_interface(&data_interface)?;
            let mi = read_model_interface(&model_interface)?;
            if mi.task_type != di.task_type {
                return Err(CliError(format!(
                    "model interface task {} differs from data interface task {}",
                    mi.task_type.as_str(),
                    di.task_type.as_str()
                )));
            }
            let optimizer = match optimizer {
                Optimizer::Sgd => OptimizerKind::Sgd,
                Optimizer::Adam => OptimizerKind::Adam,
            };
            let recipe = mock_model_recipe(&mi, di.num_features, di.num_classes)?;
            let spec = mock_model_spec(&recipe, di.num_features, optimizer, learning_rate)?;
            let mut text = serde_json::to_string_pretty(&spec)
                .map_err(|e| CliError(format!("cannot serialize model spec: {e}")))?;
            text.push('\n');
            write_output(out.as_deref(), text.as_bytes())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
