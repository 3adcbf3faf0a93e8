//! Command-line front end: `validate`, `analyze` and `simulate`.
//!
//! Exit codes are part of the interface: 0 success, 1 invalid input (bad
//! scenario, unreadable file, failed run), 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depbalance::scenario::BUILTIN_PREFIX;
use depbalance::{
    analyze, check_scenario, run_experiment_with, table_to_csv, Arms, BotKind, BotPolicy, EventRecord, MatchConfig,
    Scenario, ScenarioFile, SimError, BATTLE_SCENARIO,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "depbalance", version, about = "Dependency-graph game balancing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario and report every problem found.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Print aggregate dependency values and cease-fire durations.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run matched-seed balancing experiments.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Number of matched pairs.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        matches: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Balancing::Both)]
        balancing: Balancing,
        #[arg(long, value_enum, default_value_t = Bot::Rusher)]
        ai: Bot,
        #[arg(long, value_enum, default_value_t = Bot::Builder)]
        human: Bot,
        /// Override the scenario's match length.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_ticks: Option<u64>,
        /// Write report.json and per-match event logs here instead of
        /// printing the report.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file, or `builtin:battle`.
    #[arg(value_name = "SCENARIO")]
    path: Option<String>,
    /// Same as the positional argument.
    #[arg(long = "scenario", value_name = "SCENARIO")]
    flag: Option<String>,
}

impl Source {
    fn name(&self) -> &str {
        self.path
            .as_deref()
            .or(self.flag.as_deref())
            .expect("clap enforces one source")
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Balancing {
    On,
    Off,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Bot {
    Builder,
    Rusher,
    Balanced,
}

impl From<Bot> for BotKind {
    fn from(b: Bot) -> Self {
        match b {
            Bot::Builder => BotKind::Builder,
            Bot::Rusher => BotKind::Rusher,
            Bot::Balanced => BotKind::Balanced,
        }
    }
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::invalid(e.to_string())
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate { source } => validate(source.name(), stdout),
        Command::Analyze { source, format, out } => analyze_cmd(source.name(), format, out.as_deref(), stdout),
        Command::Simulate {
            source,
            matches,
            seed,
            balancing,
            ai,
            human,
            max_ticks,
            out,
        } => {
            let arms = match balancing {
                Balancing::On => Arms::On,
                Balancing::Off => Arms::Off,
                Balancing::Both => Arms::Both,
            };
            simulate(
                source.name(),
                SimArgs {
                    matches,
                    seed,
                    arms,
                    ai: ai.into(),
                    human: human.into(),
                    max_ticks,
                },
                out.as_deref(),
                stdout,
            )
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn read_source(name: &str) -> Result<String, Failure> {
    if let Some(builtin) = name.strip_prefix(BUILTIN_PREFIX) {
        return match builtin {
            "battle" => Ok(BATTLE_SCENARIO.to_owned()),
            other => Err(Failure::invalid(format!("unknown builtin scenario `{other}`"))),
        };
    }
    fs::read_to_string(name).map_err(|e| Failure::invalid(format!("cannot read `{name}`: {e}")))
}

fn load(name: &str) -> Result<Scenario, Failure> {
    let text = read_source(name)?;
    depbalance::parse_scenario(&text).map_err(|e| Failure::invalid(format!("{name}: invalid scenario\n{e}")))
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::invalid(format!("cannot write `{}`: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::invalid(format!("cannot write output: {e}"))),
    }
}

fn validate(name: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = read_source(name)?;
    let file = ScenarioFile::from_json(&text).map_err(|e| Failure::invalid(format!("{name}: {e}")))?;
    let (assets, edges) = (file.assets.len(), file.edges.len());
    let check = check_scenario(file);
    let mut report = String::new();
    for e in &check.errors {
        report.push_str(&format!("error: {e}\n"));
    }
    for w in &check.warnings {
        report.push_str(&format!("warning: {w}\n"));
    }
    if check.errors.is_empty() {
        report.push_str(&format!("{name}: ok ({assets} assets, {edges} edges)\n"));
        write_out(None, &report, stdout)
    } else {
        write_out(None, &report, stdout)?;
        Err(Failure::invalid(format!(
            "{name}: {} validation error(s)",
            check.errors.len()
        )))
    }
}

fn analyze_cmd(name: &str, format: Format, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let bundle = analyze(&load(name)?);
    let text = match format {
        Format::Csv => table_to_csv(&bundle.table),
        Format::Json => bundle.to_json(),
    };
    write_out(out, &text, stdout)
}

struct SimArgs {
    matches: u64,
    seed: u64,
    arms: Arms,
    ai: BotKind,
    human: BotKind,
    max_ticks: Option<u64>,
}

fn log_json(events: &[EventRecord]) -> String {
    let mut s = serde_json::to_string_pretty(events).expect("events always serialize");
    s.push('\n');
    s
}

fn simulate(name: &str, args: SimArgs, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let scenario = Arc::new(load(name)?);
    let mut config = MatchConfig::two_player(
        scenario,
        BotPolicy::preset(args.ai),
        BotPolicy::preset(args.human),
        args.seed,
    );
    if let Some(t) = args.max_ticks {
        config.max_ticks = t;
    }

    let logs = out.map(|dir| dir.join("logs"));
    if let Some(logs) = &logs {
        fs::create_dir_all(logs).map_err(|e| Failure::invalid(format!("cannot create `{}`: {e}", logs.display())))?;
    }
    let mut io_error = None;
    let report = run_experiment_with(&config, args.matches, args.seed, args.arms, |i, on, off| {
        let Some(logs) = &logs else { return Ok(()) };
        for (arm, result) in [("on", on), ("off", off)] {
            let Some(r) = result else { continue };
            let path = logs.join(format!("pair_{i:03}_{arm}.json"));
            if let Err(e) = fs::write(&path, log_json(&r.events)) {
                io_error.get_or_insert(format!("cannot write `{}`: {e}", path.display()));
            }
        }
        Ok(())
    })?;
    if let Some(e) = io_error {
        return Err(Failure::invalid(e));
    }

    let mut text = serde_json::to_string_pretty(&report).expect("reports always serialize");
    text.push('\n');
    match out {
        Some(dir) => {
            let path = dir.join("report.json");
            write_out(Some(&path), &text, stdout)?;
            write_out(
                None,
                &format!("wrote {} and {} pair log(s)\n", path.display(), args.matches),
                stdout,
            )
        }
        None => write_out(None, &text, stdout),
    }
}
