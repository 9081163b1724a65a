//! Command-line entry point: options, RSF input, program loading.

use std::io::{BufRead, BufReader, Read, Write};

use clap::{ArgAction, CommandFactory, Parser};

use crate::bdd::BddManager;
use crate::error::Error;
use crate::frontend::{parser::parse_program, resolve};
use crate::interp::{load_relations, Interpreter};
use crate::relation::RelationEngine;
use crate::rsf::{collect_universe, parse_rsf, RsfStream};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub skip_rsf: bool,
    pub memory_mb: u64,
    pub quiet: bool,
    pub program: String,
    pub args: Vec<String>,
}

#[derive(Debug, Parser)]
#[command(
    name = "crocopat",
    version,
    about = "Relation Manipulation Language interpreter",
    override_usage = "crocopat [OPTION]... FILE [ARGUMENT]...",
    disable_help_flag = true,
    disable_version_flag = true
)]
struct Options {
    #[arg(short = 'e', help = "Do not read RSF data from stdin.")]
    skip_rsf: bool,

    #[arg(
        short = 'm',
        value_name = "NUMBER",
        default_value_t = 50,
        hide_default_value = true,
        value_parser = clap::value_parser!(u64).range(1..),
        help = "Approximate memory for BDD package in MB. The default is 50."
    )]
    memory_mb: u64,

    #[arg(short = 'q', help = "Suppress warnings.")]
    quiet: bool,

    #[arg(short = 'h', action = ArgAction::Help, help = "Display help message and exit.")]
    help: Option<bool>,

    #[arg(short = 'v', action = ArgAction::Version, help = "Print version information and exit.")]
    version: Option<bool>,

    /// The program file followed by its arguments. Options end at the
    /// program file.
    #[arg(
        value_name = "FILE",
        required = true,
        num_args = 1..,
        trailing_var_arg = true,
        allow_hyphen_values = true,
        help = "RML program, followed by its arguments $1, $2, ..."
    )]
    words: Vec<String>,
}

impl Config {
    pub fn parse_from<I, T>(argv: I) -> Result<Config, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let o = Options::try_parse_from(argv)?;
        let mut words = o.words.into_iter();
        let program = words.next().expect("FILE is required");
        if program.len() > 1 && program.starts_with('-') {
            return Err(Options::command().error(
                clap::error::ErrorKind::UnknownArgument,
                format!("unexpected option '{program}'"),
            ));
        }
        Ok(Config {
            skip_rsf: o.skip_rsf,
            memory_mb: o.memory_mb,
            quiet: o.quiet,
            program,
            args: words.collect(),
        })
    }
}

/// Reads RSF up to end of input or a line starting with a dot.
fn read_rsf(input: &mut dyn Read) -> Result<RsfStream, Error> {
    let mut reader = BufReader::new(input);
    let mut text = String::new();
    let mut line = Vec::new();
    loop {
        line.clear();
        let n = reader
            .read_until(b'\n', &mut line)
            .map_err(|e| Error::input(format!("cannot read standard input: {e}")))?;
        if n == 0 {
            break;
        }
        let s = String::from_utf8(std::mem::take(&mut line))
            .map_err(|_| Error::input("standard input is not valid UTF-8"))?;
        let dot = s.starts_with('.');
        text.push_str(&s);
        if dot {
            break;
        }
    }
    Ok(parse_rsf(&text)?)
}

/// Everything after option parsing; returns the exit status or the error
/// to report.
pub fn execute(
    config: &Config,
    source: &str,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Error> {
    let (program, table) = resolve::resolve(&parse_program(source)?)?;
    let stream = if config.skip_rsf {
        RsfStream::default()
    } else {
        read_rsf(stdin)?
    };
    resolve::check_rsf_relations(&table, stream.tuples.iter().map(|t| t.relation.as_str()))?;
    let universe = collect_universe(&stream, program.lhs_literals());
    let engine = RelationEngine::new(universe, BddManager::with_megabytes(config.memory_mb));
    let rels = load_relations(&engine, &stream)?;
    drop(stream);
    Interpreter::new(
        engine,
        rels,
        config.args.clone(),
        !config.quiet,
        &config.program,
        stdout,
        stderr,
    )
    .run(&program)
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit status.
pub fn run(
    argv: &[String],
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let config = match Config::parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    let source = match std::fs::read_to_string(&config.program) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "Error: cannot read {}: {e}", config.program);
            return 1;
        }
    };
    match execute(&config, &source, stdin, stdout, stderr) {
        Ok(status) => status,
        Err(e) => {
            let _ = stdout.flush();
            let _ = writeln!(stderr, "{}", e.render(&config.program));
            1
        }
    }
}
