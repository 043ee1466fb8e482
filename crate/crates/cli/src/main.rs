//! `strandcomp`: validate, transform and analyze `.strand` specifications.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use strandcomp::dsl::{
    parse_document, parse_scenario, phi_transform, print_spec, synch_transform, validate_composition, Document,
    DslError, ProtocolSpec,
};
use strandcomp::search::{
    bisimulation_report, flip_modes, reachability_search, run_scenario, trace_to_dot, Outcome, SearchBudget,
};
use strandcomp::semantics::SemMode;
use strandcomp::strand::Severity;

const EXIT_OK: u8 = 0;
const EXIT_ATTACK: u8 = 10;
const EXIT_INCONCLUSIVE: u8 = 20;
const EXIT_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "strandcomp", version, about = "Symbolic analysis of composed strand-space protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Rule set used for the backward search.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Sync)]
    mode: ModeArg,
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    /// Directory for stats, trace and DOT files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also render the attack trace as Graphviz DOT.
    #[arg(long, global = true)]
    dot: bool,
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Basic,
    Abstract,
    Sync,
}

impl From<ModeArg> for SemMode {
    fn from(m: ModeArg) -> SemMode {
        match m {
            ModeArg::Basic => SemMode::Basic,
            ModeArg::Abstract => SemMode::Abstract,
            ModeArg::Sync => SemMode::Sync,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    Synch,
    Phi,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check specifications and compositions.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Search backwards from an attack pattern.
    Analyze {
        #[arg(long)]
        attack: String,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the synchronization or message-passing form of a composition.
    Transform {
        #[arg(value_enum)]
        which: Which,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compare the abstract and synchronization rules layer by layer.
    Compare {
        #[arg(long)]
        attack: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Turn one-to-one connections into one-to-many in the
        /// synchronization view first.
        #[arg(long)]
        flip_modes: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Replay a concrete forward scenario.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

/// Source files joined into one document, remembering where each began so
/// error positions point into the right file.
struct Sources {
    text: String,
    starts: Vec<(usize, PathBuf)>,
}

impl Sources {
    fn read(files: &[PathBuf]) -> Result<Sources> {
        let mut text = String::new();
        let mut starts = Vec::new();
        let mut line = 1;
        for f in files {
            let s = fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
            starts.push((line, f.clone()));
            line += s.lines().count() + 1;
            text.push_str(&s);
            text.push('\n');
        }
        Ok(Sources { text, starts })
    }

    fn locate(&self, line: usize) -> (String, usize) {
        let (start, f) = self.starts.iter().rev().find(|(s, _)| *s <= line).unwrap_or(&self.starts[0]);
        (f.display().to_string(), line + 1 - start)
    }

    fn describe(&self, e: &DslError) -> String {
        match e.position() {
            Some((line, col)) => {
                let (f, l) = self.locate(line);
                let msg = e.to_string();
                let msg = msg.split_once(": ").map(|(_, m)| m.to_string()).unwrap_or(msg);
                format!("{f}:{l}:{col}: {msg}")
            }
            None => e.to_string(),
        }
    }

    fn document(&self) -> Result<Document> {
        parse_document(&self.text).map_err(|e| anyhow!(self.describe(&e)))
    }

    fn spec(&self) -> Result<ProtocolSpec> {
        self.document()?.spec().map_err(|e| anyhow!(self.describe(&e)))
    }
}

fn emit(opts: &Opts, v: &Value, text: &str) {
    let body = if opts.json { serde_json::to_string_pretty(v).expect("json value") } else { text.to_string() };
    // a closed pipe is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{body}");
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))
}

fn validate(opts: &Opts, files: &[PathBuf]) -> Result<u8> {
    let mut diags: Vec<Value> = Vec::new();
    let push = |diags: &mut Vec<Value>, severity: &str, msg: String| {
        diags.push(json!({ "severity": severity, "message": msg }));
    };
    match Sources::read(files) {
        Err(e) => push(&mut diags, "error", format!("{e:#}")),
        Ok(src) => match src.document() {
            Err(e) => push(&mut diags, "error", e.to_string()),
            Ok(doc) => {
                for p in &doc.protocols {
                    for s in &p.schemas {
                        for m in s.check() {
                            push(&mut diags, "error", format!("{}: {m}", s.role));
                        }
                    }
                }
                if doc.is_composed() {
                    for d in validate_composition(&doc.composed()) {
                        let sev = if d.severity == Severity::Error { "error" } else { "warning" };
                        push(&mut diags, sev, d.message);
                    }
                } else if let Err(e) = doc.spec() {
                    push(&mut diags, "error", src.describe(&e));
                }
            }
        },
    }
    let ok = diags.iter().all(|d| d["severity"] != "error");
    let text = if diags.is_empty() {
        "ok".to_string()
    } else {
        diags
            .iter()
            .map(|d| format!("{}: {}", d["severity"].as_str().unwrap_or(""), d["message"].as_str().unwrap_or("")))
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit(opts, &json!({ "command": "validate", "ok": ok, "diagnostics": diags }), &text);
    Ok(if ok { EXIT_OK } else { EXIT_ERROR })
}

fn analyze(opts: &Opts, attack: &str, files: &[PathBuf]) -> Result<u8> {
    let spec = Sources::read(files)?.spec()?;
    let pattern = spec.attack(attack)?;
    let budget = SearchBudget {
        max_depth: opts.max_depth as usize,
        max_states: opts.max_states as usize,
        ..SearchBudget::default()
    };
    let mode: SemMode = opts.mode.into();
    let v = reachability_search(pattern, &spec, mode, &budget)?;
    let mut doc = v.to_json();
    doc["command"] = "analyze".into();
    doc["attack"] = attack.into();
    doc["mode"] = mode.to_string().into();
    let mut text = format!("{attack}: {v}");
    if let Some(t) = v.trace() {
        doc["trace_length"] = t.len().into();
        text.push_str(&format!("\ntrace of {} steps, attacked instance:\n{}", t.len(), t.attack_instance()));
    }
    if let Some(dir) = &opts.out {
        write_out(dir, "stats.json", &serde_json::to_string_pretty(&doc)?)?;
        if let Some(t) = v.trace() {
            write_out(dir, "trace.json", &t.to_json())?;
            if opts.dot {
                write_out(dir, "trace.dot", &trace_to_dot(t))?;
            }
        }
    } else if let (true, Some(t)) = (opts.dot, v.trace()) {
        text.push('\n');
        text.push_str(&trace_to_dot(t));
    }
    emit(opts, &doc, &text);
    Ok(match v.outcome {
        Outcome::AttackFound(_) => EXIT_ATTACK,
        Outcome::SecureFinite => EXIT_OK,
        Outcome::Inconclusive(_) => EXIT_INCONCLUSIVE,
    })
}

fn transform(opts: &Opts, which: Which, files: &[PathBuf]) -> Result<u8> {
    let src = Sources::read(files)?;
    let doc = src.document()?;
    let composed = doc.composed();
    let out = match which {
        Which::Synch => synch_transform(&composed),
        Which::Phi => phi_transform(&composed),
    }
    .map_err(|e| anyhow!(src.describe(&e)))?;
    let text = print_spec(&out);
    let name = match which {
        Which::Synch => "synch",
        Which::Phi => "phi",
    };
    if let Some(dir) = &opts.out {
        write_out(dir, &format!("{name}.strand"), &text)?;
    }
    emit(opts, &json!({ "command": "transform", "which": name, "text": text }), text.trim_end());
    Ok(EXIT_OK)
}

fn compare(opts: &Opts, attack: &str, depth: usize, flip: bool, files: &[PathBuf]) -> Result<u8> {
    let src = Sources::read(files)?;
    let doc = src.document()?;
    let abs = src.spec()?;
    let mut sync = synch_transform(&doc.composed()).map_err(|e| anyhow!(src.describe(&e)))?;
    if flip {
        sync = flip_modes(&sync);
    }
    let pattern = abs.attack(attack)?;
    let r = bisimulation_report(&abs, &sync, pattern, depth);
    let mut v = serde_json::to_value(&r)?;
    v["command"] = "compare".into();
    v["equivalent"] = r.equivalent().into();
    let mut text = String::new();
    for l in &r.layers {
        text.push_str(&format!("layer {}: {} abstract, {} sync\n", l.layer, l.abstract_states, l.sync_states));
    }
    match &r.divergence {
        None => text.push_str(&format!("equivalent to depth {depth} ({} round trips checked)", r.roundtrips)),
        Some(d) => {
            text.push_str(&format!("divergence at layer {}: {}\n  state: {}", d.layer, d.reason, d.state));
            for k in &d.only_abstract {
                text.push_str(&format!("\n  only abstract: {}", k.trim_end().replace('\n', " ")));
            }
            for k in &d.only_sync {
                text.push_str(&format!("\n  only sync: {}", k.trim_end().replace('\n', " ")));
            }
        }
    }
    emit(opts, &v, &text);
    Ok(if r.equivalent() { EXIT_OK } else { EXIT_ERROR })
}

fn oracle(opts: &Opts, scenario: &Path, files: &[PathBuf]) -> Result<u8> {
    let spec = Sources::read(files)?.spec()?;
    let text = fs::read_to_string(scenario).with_context(|| format!("cannot read {}", scenario.display()))?;
    let sc = parse_scenario(&text, &spec).map_err(|e| anyhow!("{}: {e}", scenario.display()))?;
    match run_scenario(&spec, &sc) {
        Ok(run) => {
            let v = json!({
                "command": "oracle",
                "valid": true,
                "actions": run.actions,
                "instantiates": run.instantiates,
                "state": run.state.to_string(),
            });
            let found = if run.instantiates.is_empty() { "no attack pattern".to_string() } else { run.instantiates.join(", ") };
            emit(opts, &v, &format!("valid scenario ({} actions), instantiates {found}\n{}", run.actions, run.state));
            Ok(EXIT_OK)
        }
        Err(e) => {
            let strandcomp::search::ScenarioError::Invalid { line, msg } = &e;
            let v = json!({ "command": "oracle", "valid": false, "line": line, "error": msg, "instantiates": [] });
            emit(opts, &v, &format!("invalid scenario: {e}"));
            Ok(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Validate { files } => validate(opts, files),
        Command::Analyze { attack, files } => analyze(opts, attack, files),
        Command::Transform { which, files } => transform(opts, *which, files),
        Command::Compare { attack, depth, flip_modes, files } => compare(opts, attack, *depth, *flip_modes, files),
        Command::Oracle { scenario, files } => oracle(opts, scenario, files),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.opts.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if json {
                println!("{}", json!({ "command": "error", "error": format!("{e:#}") }));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
