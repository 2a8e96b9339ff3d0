//! `visq`: query snapshots, inspect tables, run interaction scripts and time
//! query classes.
//!
//! Exit status is 0 on success, 1 for an empty result or failed assertion and
//! 2 for usage, parse or validation errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use visq_core::bench::{run_suite, BenchOptions};
use visq_core::engine::{Engine, Execution, WeightConfig};
use visq_core::interact::{Backend, Browser, Clock, FixtureBackend, VirtualClock};
use visq_core::query::parse_query;
use visq_core::script::{run, Script, EXIT_FAILED, EXIT_INVALID};
use visq_core::snapshot::{load_snapshot_file, PageSnapshot, Raster};
use visq_core::tables::get_table;
use visq_core::webdriver::{Session, WebDriverBackend, ENDPOINT_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "visq",
    version,
    about = "Visual-semantics queries over rendered page snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
struct EngineArgs {
    /// JSON file of weight constants.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluate on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a query against a snapshot file.
    Query {
        snapshot: PathBuf,
        query: String,
        #[arg(long, value_enum, default_value = "json")]
        output: Output,
        /// PNG screenshot replacing the snapshot's raster.
        #[arg(long)]
        raster: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print a table found by keyword, or one of its cells.
    Table {
        snapshot: PathBuf,
        keyword: String,
        /// Data row index, counted from 0 below the header.
        #[arg(long, requires = "column")]
        row: Option<usize>,
        /// Column index or header text.
        #[arg(long, requires = "row")]
        column: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        output: Output,
    },
    /// Run an interaction script.
    Run {
        script: PathBuf,
        /// `fixture:<dir>` or `webdriver:<url>`; a bare `webdriver` uses the
        /// endpoint from the environment.
        #[arg(long)]
        backend: Option<String>,
        /// Page script producing snapshot documents, for WebDriver backends.
        #[arg(long)]
        extractor: Option<PathBuf>,
        /// Write the journal here instead of standard output.
        #[arg(long)]
        journal: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Time each query class on a snapshot and tiled copies of it.
    Bench {
        snapshot: PathBuf,
        /// Tiling factors.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        copies: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        repetitions: u32,
        #[arg(long, value_enum, default_value = "json")]
        output: Output,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

/// A failure with its exit status.
struct Failure(u8, String);

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INVALID as u8, msg.to_string())
}

fn engine(args: &EngineArgs) -> Result<Engine, Failure> {
    let weights = match &args.config {
        None => WeightConfig::default(),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            let w: WeightConfig = serde_json::from_str(&text)
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            w.validate()
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            w
        }
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    Ok(Engine::new(weights, exec))
}

fn load(path: &Path) -> Result<PageSnapshot, Failure> {
    load_snapshot_file(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn with_raster(snap: PageSnapshot, png: &Path) -> Result<PageSnapshot, Failure> {
    let bytes = std::fs::read(png).map_err(|e| invalid(format!("{}: {e}", png.display())))?;
    let raw =
        Raster::from_png(&bytes, 1.0).map_err(|e| invalid(format!("{}: {e}", png.display())))?;
    let scale = f64::from(raw.width()) / snap.viewport().width;
    let raster =
        Raster::new(raw.width(), raw.height(), raw.pixels().to_vec(), scale).map_err(invalid)?;
    snap.with_screenshot(Some(raster)).map_err(invalid)
}

fn tsv(fields: &[&str]) -> String {
    fields
        .iter()
        .map(|f| f.replace(['\t', '\n'], " "))
        .collect::<Vec<_>>()
        .join("\t")
}

fn cmd_query(
    snapshot: &Path,
    query: &str,
    output: Output,
    raster: Option<&Path>,
    args: &EngineArgs,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let engine = engine(args)?;
    let predicate = parse_query(query).map_err(|e| invalid(format!("query: {e}")))?;
    let mut snap = load(snapshot)?;
    if let Some(png) = raster {
        snap = with_raster(snap, png)?;
    }
    let results = engine.evaluate(&snap, &predicate).map_err(invalid)?;
    match output {
        Output::Json => writeln!(out, "{}", results.to_json()).map_err(invalid)?,
        Output::Text => {
            for r in &results {
                let el = r.element(&snap);
                let weight = format!("{:.6}", r.weight);
                writeln!(
                    out,
                    "{}",
                    tsv(&[&el.id, &weight, &el.tag, &el.visible_text])
                )
                .map_err(invalid)?;
            }
        }
    }
    Ok(if results.is_empty() {
        EXIT_FAILED as u8
    } else {
        0
    })
}

fn cmd_table(
    snapshot: &Path,
    keyword: &str,
    cell: Option<(usize, &str)>,
    output: Output,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let snap = load(snapshot)?;
    let table = match get_table(&snap, keyword) {
        Ok(t) => t,
        Err(e) => return Err(Failure(EXIT_FAILED as u8, e.to_string())),
    };
    let Some((row, col)) = cell else {
        match output {
            Output::Json => writeln!(out, "{}", table.to_json()).map_err(invalid)?,
            Output::Text => {
                writeln!(
                    out,
                    "{}",
                    tsv(&table
                        .headers()
                        .iter()
                        .map(String::as_str)
                        .collect::<Vec<_>>())
                )
                .map_err(invalid)?;
                for r in table.rows() {
                    let texts: Vec<&str> = r.iter().map(|c| c.text()).collect();
                    writeln!(out, "{}", tsv(&texts)).map_err(invalid)?;
                }
            }
        }
        return Ok(0);
    };
    let found = match col.parse::<usize>() {
        Ok(c) => table.cell(row, c),
        Err(_) => table.cell_by_header(row, col),
    };
    let c = found.map_err(invalid)?;
    match output {
        Output::Json => {
            let v = json!({ "row": c.row, "col": c.col, "id": c.id(), "text": c.text() });
            writeln!(out, "{v}").map_err(invalid)?;
        }
        Output::Text => writeln!(out, "{}", c.text()).map_err(invalid)?,
    }
    Ok(0)
}

fn journal_sink(path: Option<&Path>) -> Result<Box<dyn Write + Send>, Failure> {
    Ok(match path {
        Some(p) => Box::new(
            std::fs::File::create(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout()),
    })
}

fn execute<B: Backend>(browser: &mut Browser<B>, script: &Script) -> Result<u8, Failure> {
    let mut stdout = std::io::stdout();
    let result = run(browser, script, &mut |o| {
        let line = serde_json::to_string(&o).expect("outputs serialize");
        let _ = writeln!(stdout, "{line}");
    });
    for w in browser.backend_mut().take_warnings() {
        eprintln!("warning: {w}");
    }
    match result {
        Ok(_) => Ok(0),
        Err(e) => Err(Failure(e.exit_code() as u8, e.to_string())),
    }
}

fn cmd_run(
    script: &Path,
    backend: Option<&str>,
    extractor: Option<&Path>,
    journal: Option<&Path>,
    args: &EngineArgs,
) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(script)
        .map_err(|e| invalid(format!("{}: {e}", script.display())))?;
    let parsed = Script::parse(&text).map_err(|e| invalid(format!("{}: {e}", script.display())))?;
    let engine = engine(args)?;
    let env_url = std::env::var(ENDPOINT_ENV).ok().filter(|u| !u.is_empty());
    let spec = match (backend, &env_url) {
        (Some(b), _) => b.to_owned(),
        (None, Some(_)) => "webdriver".to_owned(),
        (None, None) => {
            return Err(invalid(format!(
                "no backend: pass --backend fixture:<dir> or webdriver:<url>, or set {ENDPOINT_ENV}"
            )))
        }
    };
    if let Some(dir) = spec.strip_prefix("fixture:") {
        let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
        let fixture = FixtureBackend::load(dir)
            .map_err(invalid)?
            .with_clock(clock.clone())
            .with_journal_sink(journal_sink(journal)?);
        let mut browser = Browser::with_engine(fixture, engine).with_clock(clock);
        return execute(&mut browser, &parsed);
    }
    let url = match spec.strip_prefix("webdriver") {
        Some("") => env_url.ok_or_else(|| invalid(format!("{ENDPOINT_ENV} is not set")))?,
        Some(rest) => rest
            .strip_prefix(':')
            .ok_or_else(|| invalid(format!("unknown backend {spec:?}")))?
            .to_owned(),
        None => return Err(invalid(format!("unknown backend {spec:?}"))),
    };
    let extractor =
        extractor.ok_or_else(|| invalid("webdriver backends need --extractor <script>"))?;
    let script_text = std::fs::read_to_string(extractor)
        .map_err(|e| invalid(format!("{}: {e}", extractor.display())))?;
    let session = Session::connect(&url).map_err(invalid)?;
    let backend =
        WebDriverBackend::new(session, script_text).with_journal_sink(journal_sink(journal)?);
    let mut browser = Browser::with_engine(backend, engine);
    execute(&mut browser, &parsed)
}

fn cmd_bench(
    snapshot: &Path,
    copies: Vec<u32>,
    repetitions: u32,
    output: Output,
    args: &EngineArgs,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let engine = engine(args)?;
    let snap = load(snapshot)?;
    if copies.is_empty() || copies.contains(&0) {
        return Err(invalid("--copies must list positive tiling factors"));
    }
    let rows = run_suite(
        &engine,
        &snap,
        &BenchOptions {
            copies,
            repetitions,
        },
    )
    .map_err(invalid)?;
    for r in rows.iter().filter(|r| r.skipped.is_some()) {
        eprintln!(
            "notice: {} x{} skipped: {}",
            r.class.name(),
            r.copies,
            r.skipped.as_deref().unwrap_or("")
        );
    }
    match output {
        Output::Json => {
            let v: Value = serde_json::to_value(&rows).expect("rows serialize");
            writeln!(out, "{v}").map_err(invalid)?;
        }
        Output::Text => {
            for r in &rows {
                let millis = r.millis.map_or("skipped".to_owned(), |m| format!("{m:.3}"));
                let results = r.results.map_or(String::new(), |n| n.to_string());
                writeln!(
                    out,
                    "{}",
                    tsv(&[
                        r.class.name(),
                        &r.copies.to_string(),
                        &r.elements.to_string(),
                        &millis,
                        &results
                    ])
                )
                .map_err(invalid)?;
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let result = match &cli.command {
        Command::Query {
            snapshot,
            query,
            output,
            raster,
            engine,
        } => cmd_query(
            snapshot,
            query,
            *output,
            raster.as_deref(),
            engine,
            &mut stdout,
        ),
        Command::Table {
            snapshot,
            keyword,
            row,
            column,
            output,
        } => {
            let cell = row.zip(column.as_deref());
            cmd_table(snapshot, keyword, cell, *output, &mut stdout)
        }
        Command::Run {
            script,
            backend,
            extractor,
            journal,
            engine,
        } => cmd_run(
            script,
            backend.as_deref(),
            extractor.as_deref(),
            journal.as_deref(),
            engine,
        ),
        Command::Bench {
            snapshot,
            copies,
            repetitions,
            output,
            engine,
        } => cmd_bench(
            snapshot,
            copies.clone(),
            *repetitions,
            *output,
            engine,
            &mut stdout,
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("visq: {msg}");
            ExitCode::from(code)
        }
    }
}
