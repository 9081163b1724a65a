#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

pub const BIN: &str = env!("CARGO_BIN_EXE_crocopat");

pub const FAMILY_RSF: &str = "ParentOf John Alice\nParentOf John Joe\nParentOf Mary Alice\nParentOf Mary Joe\nParentOf Joe  Jane\n";

pub struct Run {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            status: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }
}

/// Runs the binary in `dir` with `stdin` piped in (closed when `None`).
pub fn run_bin(dir: &Path, args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn crocopat");
    let mut pipe = child.stdin.take().unwrap();
    if let Some(text) = stdin {
        pipe.write_all(text.as_bytes()).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap().into()
}

/// Writes `source` to `prog.rml` in a fresh directory and runs it.
pub fn run_source(source: &str, flags: &[&str], args: &[&str], stdin: Option<&str>) -> Run {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("prog.rml"), source).unwrap();
    let mut argv: Vec<&str> = flags.to_vec();
    argv.push("prog.rml");
    argv.extend_from_slice(args);
    run_bin(dir.path(), &argv, stdin)
}

/// Runs `source` in process over `rsf`, returning status, stdout, stderr.
pub fn run_in_process(source: &str, rsf: &str, args: &[&str]) -> Run {
    let config = crocopat::cli::Config {
        skip_rsf: false,
        memory_mb: 50,
        quiet: false,
        program: "prog.rml".into(),
        args: args.iter().map(|s| s.to_string()).collect(),
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = match crocopat::cli::execute(&config, source, &mut rsf.as_bytes(), &mut out, &mut err) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{}", e.render("prog.rml")).unwrap();
            1
        }
    };
    Run {
        status,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}
