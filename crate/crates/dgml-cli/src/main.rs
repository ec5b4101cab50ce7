//! `dgml` — command-line frontend for the design-reuse toolkit.
//!
//! Exit codes: 0 success, 1 validation failure, 2 not found, 3 i/o
//! failure, 4 usage error. Machine-readable output goes to stdout,
//! diagnostics to stderr.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dgml_core::effort::{
    self, comparison_report, compute_ted, involvement_report, DgmlEffortRecord, EffortError,
    Hours,
};
use dgml_core::infer::{
    accept_skeleton, compose_skeleton, search, InferError, RequirementSpec, SkeletonDesign,
};
use dgml_core::parse::{parse_dgml, ParseError};
use dgml_core::repo::{RepoError, Repository};
use dgml_core::serialize::serialize_dgml;

#[derive(Parser)]
#[command(
    name = "dgml",
    version,
    about = "Store, search and reuse UI design modules kept as .dgml documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .dgml file and report whether it is valid
    Validate { file: PathBuf },
    /// Repository maintenance
    #[command(subcommand)]
    Repo(RepoCommand),
    /// Store a new module derived from an existing one (parent DRF +1)
    Derive {
        dir: PathBuf,
        /// Name of the module the new design is derived from
        #[arg(long)]
        parent: String,
        file: PathBuf,
    },
    /// Set the expert review score of a module (replaces the old score)
    Score {
        dir: PathBuf,
        name: String,
        score: u8,
    },
    /// Record one reuse of a module and print its new DRF
    Reuse { dir: PathBuf, name: String },
    /// Rank reusable candidates for a requirement specification
    Search {
        dir: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Only consider modules with at least this expert score
        #[arg(long, default_value_t = 0)]
        min_score: u8,
        #[arg(long)]
        json: bool,
    },
    /// Compose a maximum-coverage skeleton design from the repository
    Compose {
        dir: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        /// Only consider modules with at least this expert score
        #[arg(long, default_value_t = 0)]
        min_score: u8,
        /// Write the skeleton document to this file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accept the proposal without prompting
        #[arg(long)]
        yes: bool,
    },
    /// Effort accounting reports
    #[command(subcommand)]
    Effort(EffortCommand),
}

#[derive(Subcommand)]
enum RepoCommand {
    /// Create an empty repository layout
    Init { dir: PathBuf },
    /// Add a module file to the repository
    Add { dir: PathBuf, file: PathBuf },
    /// List module names in ascending order
    List {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild keywords.idx from the module files
    Reindex { dir: PathBuf },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QueryArgs {
    /// Requirement specification file (.uirs or .txt)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Explicit comma-separated keywords
    #[arg(long, value_delimiter = ',')]
    keywords: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum EffortCommand {
    /// Total effort (RF + DG + ACE) per project
    Ted {
        #[arg(long)]
        dgml: PathBuf,
    },
    /// TED vs. conventional totals with per-project savings
    Report {
        #[arg(long)]
        dgml: PathBuf,
        #[arg(long)]
        conv: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// End-user involvement compared across both approaches
    Involvement {
        #[arg(long)]
        dgml: PathBuf,
        #[arg(long)]
        conv: PathBuf,
    },
}

enum CliError {
    Parse { file: PathBuf, source: ParseError },
    Repo(RepoError),
    Infer(InferError),
    Effort { file: PathBuf, source: EffortError },
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => 1,
            CliError::Repo(e) => match e {
                RepoError::ModuleNotFound(_) | RepoError::NotARepository(_) => 2,
                RepoError::Io { .. } => 3,
                _ => 1,
            },
            CliError::Infer(_) => 1,
            CliError::Effort { .. } => 1,
            CliError::Io { .. } => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse { file, source } => write!(f, "{}: {source}", file.display()),
            CliError::Repo(e) => write!(f, "{e}"),
            CliError::Infer(e) => write!(f, "{e}"),
            CliError::Effort { file, source } => write!(f, "{}: {source}", file.display()),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<RepoError> for CliError {
    fn from(e: RepoError) -> Self {
        CliError::Repo(e)
    }
}

impl From<InferError> for CliError {
    fn from(e: InferError) -> Self {
        CliError::Infer(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            // clap renders help to stdout and errors to stderr by itself
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Repo(RepoCommand::Init { dir }) => {
            Repository::init(&dir)?;
            println!("initialized dgml repository at {}", dir.display());
            Ok(())
        }
        Command::Repo(RepoCommand::Add { dir, file }) => cmd_add(&dir, &file),
        Command::Repo(RepoCommand::List { dir, json }) => cmd_list(&dir, json),
        Command::Repo(RepoCommand::Reindex { dir }) => cmd_reindex(&dir),
        Command::Derive { dir, parent, file } => cmd_derive(&dir, &parent, &file),
        Command::Score { dir, name, score } => {
            let mut repo = open_repo(&dir)?;
            repo.set_score(&name, score)?;
            println!("scored {name} {score}");
            Ok(())
        }
        Command::Reuse { dir, name } => {
            let mut repo = open_repo(&dir)?;
            let drf = repo.record_reuse(&name)?;
            println!("{drf}");
            Ok(())
        }
        Command::Search {
            dir,
            query,
            min_score,
            json,
        } => cmd_search(&dir, &query, min_score, json),
        Command::Compose {
            dir,
            query,
            min_score,
            out,
            yes,
        } => cmd_compose(&dir, &query, min_score, out.as_deref(), yes),
        Command::Effort(EffortCommand::Ted { dgml }) => cmd_effort_ted(&dgml),
        Command::Effort(EffortCommand::Report { dgml, conv, json }) => {
            cmd_effort_report(&dgml, &conv, json)
        }
        Command::Effort(EffortCommand::Involvement { dgml, conv }) => {
            cmd_effort_involvement(&dgml, &conv)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_file(path: &Path) -> Result<dgml_core::DgmlDocument, CliError> {
    let text = read_file(path)?;
    parse_dgml(&text).map_err(|source| CliError::Parse {
        file: path.to_path_buf(),
        source,
    })
}

fn open_repo(dir: &Path) -> Result<Repository, CliError> {
    let repo = Repository::open(dir)?;
    for warning in repo.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(repo)
}

fn cmd_validate(file: &Path) -> Result<(), CliError> {
    let doc = parse_file(file)?;
    println!(
        "valid: {} ({} keywords, {} elements)",
        doc.module.name,
        doc.module.keywords.len(),
        doc.module.element_count()
    );
    Ok(())
}

fn cmd_add(dir: &Path, file: &Path) -> Result<(), CliError> {
    let doc = parse_file(file)?;
    let mut repo = open_repo(dir)?;
    let name = doc.module.name.clone();
    repo.add_module(doc)?;
    println!("added {name}");
    Ok(())
}

fn cmd_list(dir: &Path, json: bool) -> Result<(), CliError> {
    let repo = open_repo(dir)?;
    if json {
        let modules: Vec<_> = repo
            .modules()
            .values()
            .map(|m| {
                json!({
                    "name": m.name,
                    "keywords": m.keywords.iter().collect::<Vec<_>>(),
                    "drf": m.drf,
                    "score": m.expert_score,
                    "derived_from": m.derived_from,
                })
            })
            .collect();
        println!("{}", json!({ "modules": modules }));
    } else {
        for name in repo.module_names() {
            println!("{name}");
        }
    }
    Ok(())
}

fn cmd_reindex(dir: &Path) -> Result<(), CliError> {
    let mut repo = open_repo(dir)?;
    let report = repo.reindex()?;
    for skipped in &report.skipped {
        eprintln!("warning: skipped {}: {}", skipped.file, skipped.reason);
    }
    println!(
        "indexed {} keywords across {} modules",
        report.index.len(),
        repo.len()
    );
    if report.skipped.is_empty() {
        Ok(())
    } else {
        // corrupt files leave the rebuilt index healthy, but the exit code
        // must still flag that the repository needs attention
        Err(CliError::Repo(RepoError::ValidationFailed {
            name: report.skipped[0].file.clone(),
            violations: vec![],
        }))
    }
}

fn cmd_derive(dir: &Path, parent: &str, file: &Path) -> Result<(), CliError> {
    let doc = parse_file(file)?;
    let mut repo = open_repo(dir)?;
    let name = doc.module.name.clone();
    repo.derive_module(parent, doc)?;
    let parent_drf = repo.get(parent).map(|m| m.drf).unwrap_or_default();
    println!("derived {name} from {parent} (parent drf now {parent_drf})");
    Ok(())
}

fn load_query(query: &QueryArgs) -> Result<RequirementSpec, CliError> {
    match (&query.spec, &query.keywords) {
        (Some(path), None) => Ok(RequirementSpec::from_uirs(read_file(path)?)),
        (None, Some(keywords)) => Ok(RequirementSpec::from_keyword_list(keywords)),
        // clap's arg group makes the remaining combinations unreachable
        _ => Err(CliError::Infer(InferError::EmptyQuery)),
    }
}

fn cmd_search(dir: &Path, query: &QueryArgs, min_score: u8, json: bool) -> Result<(), CliError> {
    let repo = open_repo(dir)?;
    let spec = load_query(query)?;
    let candidates = search(&repo, &spec, min_score)?;
    if json {
        let rows: Vec<_> = candidates
            .iter()
            .map(|c| {
                json!({
                    "name": c.module_name,
                    "drf": c.drf,
                    "score": c.expert_score,
                    "match_score": c.match_score,
                    "matched": c.matched_keywords.iter().collect::<Vec<_>>(),
                })
            })
            .collect();
        println!(
            "{}",
            json!({
                "query": spec.keywords.iter().collect::<Vec<_>>(),
                "min_score": min_score,
                "candidates": rows,
            })
        );
    } else {
        if candidates.is_empty() {
            eprintln!("no matching modules");
        }
        for c in &candidates {
            println!(
                "{}\tdrf={}\tscore={}\tmatched={}",
                c.module_name,
                c.drf,
                c.expert_score,
                c.matched_keywords
                    .iter()
                    .map(String::as_str)
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
    }
    Ok(())
}

fn cmd_compose(
    dir: &Path,
    query: &QueryArgs,
    min_score: u8,
    out: Option<&Path>,
    yes: bool,
) -> Result<(), CliError> {
    let mut repo = open_repo(dir)?;
    let spec = load_query(query)?;
    let skeleton = compose_skeleton(&repo, &spec, min_score)?;

    let join = |set: &std::collections::BTreeSet<String>| {
        set.iter().map(String::as_str).collect::<Vec<_>>().join(", ")
    };
    println!("selected: {}", skeleton.selected.join(", "));
    println!("covered: {}", join(&skeleton.covered));
    println!("uncovered: {}", join(&skeleton.uncovered));
    let document = serialize_dgml(&skeleton.document);
    print!("{document}");

    if let Some(path) = out {
        fs::write(path, &document).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        eprintln!("wrote skeleton to {}", path.display());
    }

    if skeleton.selected.is_empty() {
        eprintln!("nothing selected; repository unchanged");
        return Ok(());
    }
    if yes || confirm(&skeleton)? {
        accept_skeleton(&mut repo, &skeleton)?;
        eprintln!(
            "recorded one reuse for each of {} selected modules",
            skeleton.selected.len()
        );
    } else {
        eprintln!("skeleton not accepted; repository unchanged");
    }
    Ok(())
}

fn confirm(skeleton: &SkeletonDesign) -> Result<bool, CliError> {
    eprint!(
        "accept skeleton and record one reuse for {}? [y/N] ",
        skeleton.selected.join(", ")
    );
    io::stderr().flush().ok();
    let mut line = String::new();
    match io::stdin().lock().read_line(&mut line) {
        Ok(_) => {
            let answer = line.trim().to_ascii_lowercase();
            Ok(answer == "y" || answer == "yes")
        }
        Err(_) => Ok(false),
    }
}

fn hours_json(h: Hours) -> serde_json::Value {
    json!(h.as_milli() as f64 / 1000.0)
}

fn cmd_effort_ted(dgml: &Path) -> Result<(), CliError> {
    let records = load_dgml_records(dgml)?;
    println!("project,ted");
    let mut total = Hours::ZERO;
    for record in &records {
        let ted = compute_ted(record);
        total = total + ted;
        println!("{},{ted}", record.project);
    }
    println!("TOTAL,{total}");
    Ok(())
}

fn cmd_effort_report(dgml: &Path, conv: &Path, json_out: bool) -> Result<(), CliError> {
    let dgml_records = load_dgml_records(dgml)?;
    let conv_records = load_conv_records(conv)?;
    let report =
        comparison_report(&dgml_records, &conv_records).map_err(|source| CliError::Effort {
            file: dgml.to_path_buf(),
            source,
        })?;
    if json_out {
        let row_json = |r: &dgml_core::EffortRow| {
            json!({
                "project": r.project,
                "ted": hours_json(r.ted),
                "conventional_total": hours_json(r.conventional_total),
                "savings": hours_json(r.savings),
            })
        };
        println!(
            "{}",
            json!({
                "rows": report.rows.iter().map(row_json).collect::<Vec<_>>(),
                "totals": row_json(&report.totals),
            })
        );
    } else {
        print!("{}", report.to_csv());
    }
    Ok(())
}

fn cmd_effort_involvement(dgml: &Path, conv: &Path) -> Result<(), CliError> {
    let dgml_records = load_dgml_records(dgml)?;
    let conv_records = load_conv_records(conv)?;
    let rows =
        involvement_report(&dgml_records, &conv_records).map_err(|source| CliError::Effort {
            file: dgml.to_path_buf(),
            source,
        })?;
    println!("project,user_hours,ace_hours");
    for row in rows {
        println!(
            "{},{},{}",
            row.project, row.conventional_user_hours, row.ace_hours
        );
    }
    Ok(())
}

fn load_dgml_records(path: &Path) -> Result<Vec<DgmlEffortRecord>, CliError> {
    let text = read_file(path)?;
    effort::parse_dgml_effort_csv(&text).map_err(|source| CliError::Effort {
        file: path.to_path_buf(),
        source,
    })
}

fn load_conv_records(path: &Path) -> Result<Vec<effort::ConventionalEffortRecord>, CliError> {
    let text = read_file(path)?;
    effort::parse_conventional_effort_csv(&text).map_err(|source| CliError::Effort {
        file: path.to_path_buf(),
        source,
    })
}
