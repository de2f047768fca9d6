//! `dfkit` command line. Exit codes: 0 ran to completion, 1 data or
//! validation failure, 2 usage or I/O failure.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::db::{Database, DbError};
use crate::eval::{
    load_dataset, load_predictions, run_benchmark, validate_dataset, write_jsonl, DatasetError,
    OfflinePredictions, PredictionSource, RunOptions, StubParser,
};
use crate::fixtures::generate_dataset;
use crate::graph::{run_turn, EvaluationContext};
use crate::service::{default_clock, serve, ParserBinding, RemoteParser, ServiceConfig};
use crate::value::DateTime;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dfkit", version, about = "Execute and benchmark DataFlow calendar programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions against a dataset (EM and EA).
    Evaluate(EvaluateArgs),
    /// Run one program against a calendar.
    Execute(ExecuteArgs),
    /// Re-execute every gold program and report inconsistencies.
    Validate(ValidateArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Generate a seeded, self-consistent dataset.
    GenFixtures(GenFixturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["predictions", "parser_url", "stub"])))]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// JSONL of {dialogue_id, turn_index, program}.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Endpoint implementing the /parse contract.
    #[arg(long, env = "DFKIT_PARSER_URL")]
    pub parser_url: Option<String>,
    /// Use the bundled stub grammar.
    #[arg(long)]
    pub stub: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("program").required(true).args(["expr", "file"])))]
pub struct ExecuteArgs {
    /// Program text.
    #[arg(short = 'e', long = "expr")]
    pub expr: Option<String>,
    /// Read the program from a file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Starting database document; empty calendar if absent.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Session clock, YYYY-MM-DDTHH:MM.
    #[arg(long)]
    pub clock: Option<DateTime>,
    /// Print the graph document after the response.
    #[arg(long)]
    pub dump_graph: bool,
    /// Write the resulting database document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParserKind {
    Stub,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DFKIT_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, value_enum, conflicts_with = "parser_url")]
    pub parser: Option<ParserKind>,
    #[arg(long, env = "DFKIT_PARSER_URL")]
    pub parser_url: Option<String>,
    /// Default clock for new sessions.
    #[arg(long, env = "DFKIT_CLOCK")]
    pub clock: Option<DateTime>,
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
}

#[derive(Debug, Args)]
pub struct GenFixturesArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::Execute(a) => execute(a),
        Command::Validate(a) => validate(a),
        Command::Serve(a) => serve_cmd(a),
        Command::GenFixtures(a) => gen_fixtures(a),
    }
}

fn dataset_exit(e: &DatasetError) -> i32 {
    eprintln!("error: {e}");
    match e {
        DatasetError::Io { .. } => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn evaluate(args: EvaluateArgs) -> i32 {
    let dataset = match load_dataset(&args.dataset) {
        Ok(d) => d,
        Err(e) => return dataset_exit(&e),
    };
    let source: Box<dyn PredictionSource> = if let Some(path) = &args.predictions {
        match load_predictions(path) {
            Ok(p) => Box::new(OfflinePredictions::new(p)),
            Err(e) => return dataset_exit(&e),
        }
    } else if let Some(url) = &args.parser_url {
        Box::new(RemoteParser::new(
            url.clone(),
            Duration::from_millis(args.timeout_ms),
            args.retries,
        ))
    } else {
        Box::new(StubParser)
    };
    let report = match run_benchmark(&dataset, source.as_ref(), RunOptions { workers: args.workers }) {
        Ok(r) => r,
        Err(e) => return dataset_exit(&e),
    };
    match args.format {
        OutputFormat::Table => print!("{}", report.to_table()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    if let Some(path) = &args.json_out {
        if let Err(e) = fs::write(path, report.to_json() + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    EXIT_OK
}

fn execute(args: ExecuteArgs) -> i32 {
    let program = match (&args.expr, &args.file) {
        (Some(text), _) => text.clone(),
        (None, Some(path)) => match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        (None, None) => unreachable!("clap requires a program"),
    };
    let database = match &args.db {
        Some(path) => match Database::load(path) {
            Ok(db) => db,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return if matches!(e, DbError::Io(_)) { EXIT_USAGE } else { EXIT_DATA };
            }
        },
        None => Database::new(),
    };
    let mut ctx = EvaluationContext::new(args.clock.unwrap_or_else(default_clock), database);
    let turn = run_turn(&program, &mut ctx);
    println!("{}", turn.outcome.response);
    if args.dump_graph {
        println!("{}", turn.outcome.graph.to_document().to_json_pretty());
    }
    if let Some(path) = &args.out {
        if let Err(e) = ctx.database.save(path) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if let Some(e) = &turn.parse_error {
        eprintln!("error: {e}");
        return EXIT_DATA;
    }
    if let Some(e) = turn.outcome.first_failure() {
        eprintln!("error: {e}");
        return EXIT_DATA;
    }
    EXIT_OK
}

fn validate(args: ValidateArgs) -> i32 {
    let dataset = match load_dataset(&args.dataset) {
        Ok(d) => d,
        Err(e) => return dataset_exit(&e),
    };
    let violations = validate_dataset(&dataset);
    for v in &violations {
        println!("{v}");
    }
    println!("{} violations", violations.len());
    if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_DATA
    }
}

fn serve_cmd(args: ServeArgs) -> i32 {
    let timeout = Duration::from_millis(args.timeout_ms);
    let binding = match &args.parser_url {
        Some(url) => ParserBinding::Remote(RemoteParser::new(url.clone(), timeout, args.retries)),
        None => ParserBinding::Stub,
    };
    let config = ServiceConfig {
        binding,
        default_clock: args.clock.unwrap_or_else(default_clock),
        timeout,
        max_retries: args.retries,
    };
    match serve(config, args.port) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot serve on port {}: {e}", args.port);
            EXIT_USAGE
        }
    }
}

fn gen_fixtures(args: GenFixturesArgs) -> i32 {
    let dataset = generate_dataset(args.seed, args.count);
    if let Err(e) = write_jsonl(&args.out, &dataset) {
        eprintln!("error: cannot write {}: {e}", args.out.display());
        return EXIT_USAGE;
    }
    let turns: usize = dataset.iter().map(|d| d.turns.len()).sum();
    println!(
        "wrote {} dialogues ({turns} turns) to {}",
        dataset.len(),
        args.out.display()
    );
    EXIT_OK
}
