//! The `rmf-lab` command-line front end.
//!
//! [`run`] parses an argument vector, executes one subcommand inside a rayon
//! pool of the requested size and writes JSON-lines records (or CSV tables)
//! to stdout or `--output`. Errors go to stderr as one JSON line; the exit
//! code is 0 on success, 2 on usage errors and 3 on domain errors.

pub mod cli;
pub mod commands;
pub mod config;
pub mod record;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::time::Instant;

use clap::{ArgMatches, CommandFactory, FromArgMatches};
use rmf_lab::stats::csv_float;

use crate::cli::{Cli, Format};
use crate::commands::{CmdError, Ctx, Output};
use crate::record::{error_line, ResultRecord, Val};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

const GLOBAL_IDS: &[&str] = &["seed", "threads", "format", "output", "config", "prime_cache"];

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    /// Parses every stdout line as a record.
    pub fn records(&self) -> Vec<ResultRecord> {
        self.stdout.lines().map(|l| ResultRecord::parse(l).expect("stdout holds records")).collect()
    }
}

/// Runs the CLI with `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let out = run_captured(args);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = io::stdout().flush();
    out.code
}

/// Like [`run`], but returns the streams instead of writing them.
pub fn run_captured<I, S>(args: I) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let fail = |code: i32, kind: &str, msg: &str, cmd: Option<&str>| RunOutput {
        code,
        stdout: String::new(),
        stderr: error_line(kind, msg, code, cmd) + "\n",
    };
    let args = match config::apply_config(args) {
        Ok(a) => a,
        Err(e) => return fail(EXIT_USAGE, "config", &e, None),
    };
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion => RunOutput { code: EXIT_OK, stdout: e.render().to_string(), stderr: String::new() },
                _ => fail(EXIT_USAGE, "usage", e.render().to_string().trim_end(), None),
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, "usage", e.render().to_string().trim_end(), None),
    };
    let (path, leaf) = subcommand_path(&matches);
    let command = path.join(" ");
    let params = echo_params(&path, leaf);

    let seed = match cli.global.seed {
        Some(s) => s,
        None => match entropy_seed() {
            Ok(s) => s,
            Err(e) => return fail(EXIT_IO, "io", &e, Some(&command)),
        },
    };
    let threads = cli.global.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_IO, "io", &e.to_string(), Some(&command)),
    };
    let ctx = Ctx { seed, command: command.clone(), prime_cache: cli.global.prime_cache.as_deref() };
    let start = Instant::now();
    let result = pool.install(|| commands::execute(&cli.command, &ctx));
    let wall = start.elapsed().as_millis() as u64;

    let mut output = match result {
        Ok(o) => o,
        Err(CmdError::Domain(e)) => return fail(EXIT_DOMAIN, commands::error_kind(&e), &e.to_string(), Some(&command)),
        Err(CmdError::Usage(m)) => return fail(EXIT_USAGE, "usage", &m, Some(&command)),
        Err(CmdError::Io(m)) => return fail(EXIT_IO, "io", &m, Some(&command)),
    };
    for r in &mut output.records {
        r.params = params.clone();
        r.runtime.threads = pool.current_num_threads() as u64;
        r.runtime.wall_time_ms = wall;
    }
    let text = match cli.global.format {
        Format::Json => output.records.iter().map(|r| r.to_json_line() + "\n").collect(),
        Format::Csv => match render_csv(&output) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_IO, "io", &e, Some(&command)),
        },
    };
    match &cli.global.output {
        None => RunOutput { code: EXIT_OK, stdout: text, stderr: String::new() },
        Some(p) => match File::create(p).and_then(|mut f| f.write_all(text.as_bytes())) {
            Ok(()) => RunOutput { code: EXIT_OK, stdout: String::new(), stderr: String::new() },
            Err(e) => fail(EXIT_IO, "io", &format!("{}: {e}", p.display()), Some(&command)),
        },
    }
}

fn subcommand_path(m: &ArgMatches) -> (Vec<String>, &ArgMatches) {
    let mut path = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name.to_string());
        cur = sub;
    }
    (path, cur)
}

fn echo_params(path: &[String], leaf: &ArgMatches) -> BTreeMap<String, Val> {
    let mut def = Cli::command();
    for name in path {
        def = def.find_subcommand(name).expect("matched subcommand exists").clone();
    }
    let mut out = BTreeMap::new();
    for arg in def.get_arguments() {
        let id = arg.get_id().as_str();
        if GLOBAL_IDS.contains(&id) {
            continue;
        }
        let Ok(Some(raw)) = leaf.try_get_raw(id) else { continue };
        let vals: Vec<Val> = raw.map(|v| Val::infer(&v.to_string_lossy())).collect();
        let key = arg.get_long().unwrap_or(id).to_string();
        let v = if arg.get_value_delimiter().is_some() || vals.len() != 1 {
            Val::List(vals)
        } else {
            vals.into_iter().next().unwrap()
        };
        out.insert(key, v);
    }
    out
}

fn entropy_seed() -> Result<u64, String> {
    let mut b = [0u8; 8];
    getrandom::getrandom(&mut b).map_err(|e| e.to_string())?;
    Ok(u64::from_le_bytes(b))
}

fn render_csv(out: &Output) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| e.to_string();
    if let Some(t) = &out.table {
        w.write_record(&t.header).map_err(err)?;
        for row in &t.rows {
            w.write_record(row).map_err(err)?;
        }
    } else {
        let flat: Vec<BTreeMap<String, String>> = out.records.iter().map(flatten).collect();
        let mut header: Vec<String> = vec!["command".into(), "seed".into()];
        for f in &flat {
            for k in f.keys() {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        w.write_record(&header).map_err(err)?;
        for f in &flat {
            w.write_record(header.iter().map(|k| f.get(k).map_or("", String::as_str))).map_err(err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn csv_cell(v: &Val) -> String {
    match v {
        Val::Bool(b) => b.to_string(),
        Val::Int(i) => i.to_string(),
        Val::Float(f) => csv_float(*f),
        Val::Str(s) => s.clone(),
        Val::List(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
    }
}

fn flatten(r: &ResultRecord) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("command".into(), r.command.clone());
    m.insert("seed".into(), r.seed.to_string());
    for (k, v) in &r.params {
        m.insert(format!("param.{k}"), csv_cell(v));
    }
    for (k, v) in &r.values {
        m.insert(k.clone(), csv_cell(v));
    }
    if let Some((lo, hi)) = r.ci {
        m.insert("ci_low".into(), csv_cell(&Val::Float(lo)));
        m.insert("ci_high".into(), csv_cell(&Val::Float(hi)));
    }
    m
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
