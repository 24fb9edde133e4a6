//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::corpus::{corpus_file, CORPUS};
use super::report::{combined_exit, run, run_all, Overrides, Report, RunError};
use super::resolve::{parse_document_with, Directive, DirectiveKind, Document};
use super::{parser, printer, FrontendError};
use crate::translation::check_substitution_commutation;

#[derive(Debug, Parser)]
#[command(name = "refinekit", version, about = "Check refinements between k-dimensional deductive systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every `check` directive of a file.
    Check {
        file: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Search for a proof of a goal.
    Derive(GoalArgs),
    /// Run proof and countermodel search together.
    Decide(GoalArgs),
    /// Search for a finite countermodel.
    Countermodel(GoalArgs),
    /// Print a file in canonical form.
    Print { file: String },
    /// List the embedded corpus, or print one of its files.
    Corpus { name: Option<String> },
    /// Sample the substitution-commutation property of a translation.
    Commute {
        file: String,
        #[arg(long)]
        translation: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct GoalArgs {
    pub file: String,
    #[arg(long)]
    pub goal: String,
    /// Hypotheses, repeatable.
    #[arg(long)]
    pub from: Vec<String>,
    /// Presentation to work in; defaults to the first one declared.
    #[arg(long)]
    pub spec: Option<String>,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Args, Default)]
pub struct Opts {
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub max_derived: Option<usize>,
    #[arg(long)]
    pub inst_depth: Option<usize>,
    #[arg(long)]
    pub time_cap_ms: Option<u64>,
    /// Carrier bound: `N` for every sort or `SORT=N,...`.
    #[arg(long)]
    pub max_size: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub json: bool,
    /// Include proof listings in text output.
    #[arg(long)]
    pub proof: bool,
}

impl Opts {
    pub fn overrides(&self) -> Result<Overrides, FrontendError> {
        let mut o = Overrides {
            rounds: self.max_rounds,
            derived: self.max_derived,
            depth: self.inst_depth,
            time_ms: self.time_cap_ms,
            seed: self.seed,
            ..Overrides::default()
        };
        if let Some(spec) = &self.max_size {
            let bad = || FrontendError::Io(format!("bad --max-size `{spec}`"));
            for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                match part.split_once('=') {
                    Some((s, n)) => {
                        o.sizes.insert(s.trim().to_string(), n.trim().parse().map_err(|_| bad())?);
                    }
                    None => o.default_size = Some(part.parse().map_err(|_| bad())?),
                }
            }
        }
        Ok(o)
    }
}

/// Read a file from disk, falling back to the embedded corpus.
fn read_source(path: &str) -> Result<(String, Option<PathBuf>), FrontendError> {
    match std::fs::read_to_string(path) {
        Ok(t) => Ok((t, Path::new(path).parent().map(Path::to_path_buf))),
        Err(e) => corpus_file(path).map(|f| (f.text.to_string(), None)).ok_or_else(|| FrontendError::Io(format!("{path}: {e}"))),
    }
}

/// Load and resolve a document; imports are read relative to its directory,
/// then from the corpus.
pub fn load_document(path: &str) -> Result<Document, FrontendError> {
    let (text, dir) = read_source(path)?;
    let mut loader = |imp: &str| {
        if let Some(d) = &dir {
            if let Ok(t) = std::fs::read_to_string(d.join(imp)) {
                return Ok(t);
            }
        }
        corpus_file(imp).map(|f| f.text.to_string()).ok_or_else(|| FrontendError::Io(format!("cannot find `{imp}`")))
    };
    parse_document_with(&text, &mut loader)
}

fn goal_directive(kind: DirectiveKind, doc: &Document, a: &GoalArgs) -> Result<Directive, FrontendError> {
    let spec = match &a.spec {
        Some(s) => s.clone(),
        None => doc
            .presentations
            .first()
            .map(|p| p.name.to_string())
            .ok_or_else(|| FrontendError::Resolution { msg: "document declares no presentation".into(), span: Default::default() })?,
    };
    if doc.presentation(&spec).is_none() {
        return Err(FrontendError::Resolution { msg: format!("unknown presentation `{spec}`"), span: Default::default() });
    }
    let goal = doc.parse_formula_in(&spec, &a.goal)?;
    let from = a.from.iter().map(|f| doc.parse_formula_in(&spec, f)).collect::<Result<Vec<_>, _>>()?;
    let decl = super::ast::CheckDecl {
        kind: kind_name(kind).into(),
        operands: vec![spec.clone()],
        via: Vec::new(),
        goal: Some(parser::parse_formula(&a.goal)?),
        from: a.from.iter().map(|f| parser::parse_formula(f)).collect::<Result<_, _>>()?,
        with: Vec::new(),
        span: Default::default(),
    };
    Ok(Directive { kind, operands: vec![spec], via: Vec::new(), goal: Some(goal), from, with: Vec::new(), text: printer::check(&decl) })
}

fn kind_name(k: DirectiveKind) -> &'static str {
    match k {
        DirectiveKind::Derive => "derive",
        DirectiveKind::Decide => "decide",
        DirectiveKind::Countermodel => "countermodel",
        _ => unreachable!("only goal directives are built from flags"),
    }
}

fn emit(out: &mut dyn Write, reports: &[Report], json: bool, proofs: bool, single: bool) -> std::io::Result<()> {
    if json {
        let text = if single {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(reports)
        };
        writeln!(out, "{}", text.expect("reports serialize"))
    } else {
        reports.iter().try_for_each(|r| write!(out, "{}", r.render(proofs)))
    }
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => crate::par::with_threads(n, f),
        None => f(),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, RunError> {
    let io = |e: std::io::Error| RunError::Internal(e.to_string());
    match cli.command {
        Command::Check { file, opts } => {
            let doc = load_document(&file)?;
            let ov = opts.overrides()?;
            let reports = with_pool(opts.threads, || run_all(&doc, &ov))?;
            emit(out, &reports, opts.json, opts.proof, false).map_err(io)?;
            Ok(combined_exit(&reports))
        }
        Command::Derive(a) => goal_command(DirectiveKind::Derive, a, out),
        Command::Decide(a) => goal_command(DirectiveKind::Decide, a, out),
        Command::Countermodel(a) => goal_command(DirectiveKind::Countermodel, a, out),
        Command::Print { file } => {
            let (text, _) = read_source(&file)?;
            write!(out, "{}", printer::print_document(&parser::parse(&text)?)).map_err(io)?;
            Ok(0)
        }
        Command::Corpus { name: None } => {
            for f in CORPUS {
                writeln!(out, "{}", f.name).map_err(io)?;
            }
            Ok(0)
        }
        Command::Corpus { name: Some(n) } => {
            let f = corpus_file(&n).ok_or_else(|| FrontendError::Io(format!("no corpus file `{n}`")))?;
            write!(out, "{}", f.text).map_err(io)?;
            Ok(0)
        }
        Command::Commute { file, translation, samples, seed, json } => {
            let doc = load_document(&file)?;
            let tau = doc
                .translation(&translation)
                .ok_or_else(|| FrontendError::Resolution { msg: format!("unknown translation `{translation}`"), span: Default::default() })?;
            let r = check_substitution_commutation(tau, samples, seed).map_err(|e| RunError::Internal(e.to_string()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("serializes")).map_err(io)?;
            } else {
                writeln!(out, "{}: {}/{} samples commute", r.translation, r.passed, r.samples).map_err(io)?;
                if let Some(w) = &r.witness {
                    writeln!(out, "  witness: {w:?}").map_err(io)?;
                }
            }
            Ok(if r.ok() { 0 } else { 1 })
        }
    }
}

fn goal_command(kind: DirectiveKind, a: GoalArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    let doc = load_document(&a.file)?;
    let d = goal_directive(kind, &doc, &a)?;
    let ov = a.opts.overrides()?;
    let r = with_pool(a.opts.threads, || run(&d, &doc, &ov))?;
    emit(out, std::slice::from_ref(&r), a.opts.json, a.opts.proof, true).map_err(|e| RunError::Internal(e.to_string()))?;
    Ok(r.exit_code)
}

/// Run the tool on `args` (program name first), writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
