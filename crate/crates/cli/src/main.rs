mod verdict;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use heaplogic::algebra::{diff, normalize_with_diagnostics, NormalForm};
use heaplogic::env::{unfold, EnvError};
use heaplogic::graph::{build_graph, to_dot, HeapGraph, VertexId, VertexSel};
use heaplogic::term::{parse_term, ExtTerm, HeapTerm};
use heaplogic::workspace::{load, Workspace};
use serde::Serialize;

use verdict::{Checker, Outcome, Verdict};

#[derive(Parser)]
#[command(
    name = "heaplogic",
    version,
    about = "Non-repetitive heap logic checker"
)]
struct Cli {
    /// Bound on nested predicate unfoldings.
    #[arg(long, global = true, default_value_t = 4)]
    depth: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Treat heap parts unreachable from stack roots as errors.
    #[arg(long, global = true)]
    strict_garbage: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Satisfiability of one goal, or of every goal in the file.
    Check { file: PathBuf, goal: Option<String> },
    /// Normal form of a goal.
    Normalize { file: PathBuf, goal: String },
    /// Heaplets matched, missing and extra between two goals.
    Diff {
        file: PathBuf,
        expected: String,
        actual: String,
    },
    /// Whether some vertex of FROM reaches some vertex of TO.
    Reach {
        file: PathBuf,
        goal: String,
        /// Comma-separated vertex names.
        from: String,
        /// Comma-separated vertex names.
        to: String,
    },
    /// Graphviz rendering of a goal's heap graph.
    Dot {
        file: PathBuf,
        goal: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bounded unfolding of predicate calls and partial constants.
    Unfold { file: PathBuf, term: String },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Run = Result<u8, Failure>;

struct Ctx {
    ws: Workspace,
    depth: usize,
    format: Format,
    strict_garbage: bool,
}

fn read_workspace(path: &Path) -> Result<Workspace, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    load(&src).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

impl Ctx {
    fn checker(&self) -> Checker<'_> {
        Checker {
            env: &self.ws.env,
            depth: self.depth,
            strict_garbage: self.strict_garbage,
        }
    }

    /// A goal name declared in the file, or an inline term.
    fn goal(&self, arg: &str) -> Result<ExtTerm, Failure> {
        match self.ws.goal(arg) {
            Some(g) => Ok(g.term.clone()),
            None => {
                let t = parse_term(arg).map_err(|e| Failure(format!("goal `{arg}`: {e}")))?;
                for call in t.calls() {
                    self.ws.env.predicate(call)?;
                }
                Ok(t)
            }
        }
    }

    fn heap_goal(&self, arg: &str) -> Result<HeapTerm, Failure> {
        self.goal(arg)?
            .into_heap()
            .ok_or_else(|| Failure(format!("goal `{arg}` is not a spatial term")))
    }

    /// The single ground heap a goal denotes after unfolding.
    fn ground_goal(&self, arg: &str) -> Result<HeapTerm, Failure> {
        let h = self.heap_goal(arg)?;
        if !h.has_partial() && !h.has_call() {
            return Ok(h);
        }
        let mut out = unfold(&h, &self.ws.env, self.depth)?;
        match out.alternatives.len() {
            1 => Ok(out.alternatives.remove(0)),
            n => Err(Failure(format!(
                "goal `{arg}` unfolds to {n} alternatives; a single heap is needed"
            ))),
        }
    }

    fn graph(&self, arg: &str) -> Result<HeapGraph, Failure> {
        let h = self.ground_goal(arg)?;
        match self.checker().ground_graph(&h)? {
            Ok(g) => Ok(g),
            Err(o) => Err(Failure(format!(
                "goal `{arg}` is unsatisfiable: {}",
                describe(&o)
            ))),
        }
    }

    fn text_only(&self, what: &str) -> Result<(), Failure> {
        if self.format == Format::Dot {
            return Err(Failure(format!("`{what}` has no dot output")));
        }
        Ok(())
    }
}

fn describe(o: &Outcome) -> String {
    let mut s = o.verdict.as_str().to_string();
    if let Some(r) = &o.reason {
        s.push_str(": ");
        s.push_str(r);
    }
    if !o.witness.is_empty() {
        s.push_str(&format!(" [{}]", o.witness.join(", ")));
    }
    s
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct GoalReport {
    goal: String,
    term: String,
    #[serde(flatten)]
    outcome: Outcome,
}

fn cmd_check(ctx: &Ctx, goal: Option<&str>) -> Run {
    ctx.text_only("check")?;
    let goals: Vec<(String, ExtTerm)> = match goal {
        Some(arg) => vec![(arg.to_string(), ctx.goal(arg)?)],
        None => ctx
            .ws
            .goals
            .iter()
            .map(|g| (g.name.clone(), g.term.clone()))
            .collect(),
    };
    let checker = ctx.checker();
    let results: Vec<Result<Outcome, String>> = thread::scope(|s| {
        let handles: Vec<_> = goals
            .iter()
            .map(|(_, t)| s.spawn(|| checker.term(t)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err("goal evaluation panicked".into()))
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut code = 0;
    for ((name, term), result) in goals.into_iter().zip(results) {
        let outcome = match result {
            Ok(o) => o,
            Err(e) => {
                eprintln!("{name}: error: {e}");
                code = 3;
                continue;
            }
        };
        for w in &outcome.warnings {
            eprintln!("{name}: warning: {w}");
        }
        code = code.max(outcome.verdict.exit_code());
        reports.push(GoalReport {
            goal: name,
            term: term.to_string(),
            outcome,
        });
    }
    if ctx.format == Format::Json {
        print_json(&reports)?;
    } else {
        for r in &reports {
            println!("{}: {}", r.goal, describe(&r.outcome));
        }
    }
    Ok(code)
}

fn normal_forms(ctx: &Ctx, arg: &str) -> Result<Vec<NormalForm>, Failure> {
    let h = ctx.heap_goal(arg)?;
    let alternatives = if h.has_partial() || h.has_call() {
        unfold(&h, &ctx.ws.env, ctx.depth)?.alternatives
    } else {
        vec![h]
    };
    let mut forms = Vec::new();
    for alt in alternatives {
        let (nf, dropped) = normalize_with_diagnostics(&alt, &ctx.ws.env)?;
        for d in dropped {
            eprintln!("{d}");
        }
        if !forms.contains(&nf) {
            forms.push(nf);
        }
    }
    Ok(forms)
}

fn cmd_normalize(ctx: &Ctx, goal: &str) -> Run {
    let forms = normal_forms(ctx, goal)?;
    match ctx.format {
        Format::Text => {
            for nf in &forms {
                println!("{nf}");
            }
        }
        Format::Json => print_json(&forms)?,
        Format::Dot => {
            for nf in forms.iter().filter(|nf| nf.satisfiable) {
                print!("{}", to_dot(&build_graph(&nf.to_term(), &ctx.ws.env)?));
            }
        }
    }
    Ok(if forms.iter().any(|nf| nf.satisfiable) {
        0
    } else {
        1
    })
}

fn cmd_diff(ctx: &Ctx, expected: &str, actual: &str) -> Run {
    ctx.text_only("diff")?;
    let (e, a) = (ctx.ground_goal(expected)?, ctx.ground_goal(actual)?);
    let d = diff(&e, &a, &ctx.ws.env)?;
    if ctx.format == Format::Json {
        print_json(&d)?;
    } else {
        print!("{d}");
    }
    Ok(0)
}

fn selector(list: &str) -> Result<VertexSel, Failure> {
    let names: Vec<VertexId> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(VertexId::named)
        .collect();
    match names.len() {
        0 => Err(Failure(format!("empty vertex list `{list}`"))),
        1 => Ok(VertexSel::One(names.into_iter().next().unwrap())),
        _ => Ok(VertexSel::Set(names.into_iter().collect())),
    }
}

fn cmd_reach(ctx: &Ctx, goal: &str, from: &str, to: &str) -> Run {
    ctx.text_only("reach")?;
    let g = ctx.graph(goal)?;
    let answer = g.reaches(&selector(from)?, &selector(to)?)?;
    if ctx.format == Format::Json {
        print_json(&serde_json::json!({ "from": from, "to": to, "reaches": answer }))?;
    } else {
        println!("{answer}");
    }
    Ok(0)
}

fn cmd_dot(ctx: &Ctx, goal: &str, output: Option<&Path>) -> Run {
    let dot = to_dot(&ctx.graph(goal)?);
    match output {
        Some(path) => {
            fs::write(path, dot).map_err(|e| Failure(format!("{}: {e}", path.display())))?
        }
        None => print!("{dot}"),
    }
    Ok(0)
}

fn cmd_unfold(ctx: &Ctx, term: &str) -> Run {
    ctx.text_only("unfold")?;
    let h = ctx.heap_goal(term)?;
    let out = match unfold(&h, &ctx.ws.env, ctx.depth) {
        Ok(out) => out,
        Err(EnvError::DepthExhausted(_)) => {
            eprintln!("no unfolding of `{term}` within depth {}", ctx.depth);
            return Ok(Verdict::Inconclusive.exit_code());
        }
        Err(e) => return Err(e.into()),
    };
    for n in &out.notices {
        eprintln!("{n}");
    }
    if ctx.format == Format::Json {
        let alts: Vec<String> = out.alternatives.iter().map(|t| t.to_string()).collect();
        print_json(&alts)?;
    } else {
        for alt in &out.alternatives {
            println!("{alt}");
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Run {
    let file = match &cli.command {
        Command::Check { file, .. }
        | Command::Normalize { file, .. }
        | Command::Diff { file, .. }
        | Command::Reach { file, .. }
        | Command::Dot { file, .. }
        | Command::Unfold { file, .. } => file,
    };
    let ctx = Ctx {
        ws: read_workspace(file)?,
        depth: cli.depth,
        format: cli.format,
        strict_garbage: cli.strict_garbage,
    };
    match &cli.command {
        Command::Check { goal, .. } => cmd_check(&ctx, goal.as_deref()),
        Command::Normalize { goal, .. } => cmd_normalize(&ctx, goal),
        Command::Diff {
            expected, actual, ..
        } => cmd_diff(&ctx, expected, actual),
        Command::Reach { goal, from, to, .. } => cmd_reach(&ctx, goal, from, to),
        Command::Dot { goal, output, .. } => cmd_dot(&ctx, goal, output.as_deref()),
        Command::Unfold { term, .. } => cmd_unfold(&ctx, term),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
