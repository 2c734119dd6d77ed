//! `selres`: parse sentences with selectional restrictions checked either
//! after parsing (bg) or during it (index).
//!
//! Exit status: 0 when every run completes (rejected sentences included),
//! 1 on bad input or configuration, 2 when a batch expectation fails.

mod corpus;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser as ClapParser, Subcommand};
use hpsg_selres::grammar::{BUNDLED_DECLS, BUNDLED_LEXICON};
use hpsg_selres::{Decls, Grammar, Lexicon, SortHierarchy};
use rayon::prelude::*;

use report::{MethodArg, Record};

#[derive(ClapParser)]
#[command(
    name = "selres",
    version,
    about = "Check selectional restrictions on parsed sentences"
)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Sort hierarchy file (default: bundled)
    #[arg(long, global = true)]
    hierarchy: Option<PathBuf>,
    /// Lexicon file (default: bundled)
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Qfpsoa declarations file (default: bundled)
    #[arg(long, global = true)]
    decls: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    method: MethodArg,
    /// Show feature structures and the constraints behind each violation
    #[arg(long, global = true)]
    explain: bool,
    /// One JSON record per sentence
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one sentence
    Parse {
        #[arg(required = true)]
        sentence: Vec<String>,
    },
    /// Check a corpus of `<sentence> => accept|reject [, readings=<n>]` lines
    Batch {
        /// Corpus file (default: the bundled example corpus)
        corpus: Option<PathBuf>,
    },
    /// Check the hierarchy, declarations and lexicon
    Validate,
}

enum Failure {
    Input(anyhow::Error),
    Mismatch,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn load_hierarchy(config: &Config) -> Result<SortHierarchy> {
    match &config.hierarchy {
        Some(p) => {
            SortHierarchy::from_file(p).with_context(|| format!("hierarchy {}", p.display()))
        }
        None => Ok(SortHierarchy::bundled()),
    }
}

fn load_rest(config: &Config, hierarchy: SortHierarchy) -> Result<Grammar> {
    let decls = match &config.decls {
        Some(p) => Decls::from_file(p, &hierarchy)
            .with_context(|| format!("declarations {}", p.display()))?,
        None => Decls::parse(BUNDLED_DECLS, &hierarchy).context("bundled declarations")?,
    };
    let lexicon = match &config.lexicon {
        Some(p) => Lexicon::from_file(p, &hierarchy, &decls)
            .with_context(|| format!("lexicon {}", p.display()))?,
        None => Lexicon::parse(BUNDLED_LEXICON, &hierarchy, &decls).context("bundled lexicon")?,
    };
    Ok(Grammar {
        hierarchy,
        decls,
        lexicon,
    })
}

fn load(config: &Config) -> Result<Grammar> {
    load_rest(config, load_hierarchy(config)?)
}

fn emit(out: &mut impl Write, record: &Record, json: bool) -> Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string(record)?)?;
    } else {
        write!(out, "{}", report::render_text(record))?;
    }
    Ok(())
}

fn cmd_parse(config: &Config, sentence: &[String]) -> Result<(), Failure> {
    let grammar = load(config)?;
    let record = report::analyse(&grammar, &sentence.join(" "), config.method, config.explain)
        .map_err(anyhow::Error::from)?;
    emit(&mut std::io::stdout().lock(), &record, config.json)?;
    Ok(())
}

fn cmd_batch(config: &Config, path: Option<&PathBuf>) -> Result<(), Failure> {
    let grammar = load(config)?;
    let src = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("corpus {}", p.display()))?,
        None => corpus::BUNDLED.to_string(),
    };
    let cases = corpus::parse(&src)?;
    let results: Vec<Result<Record>> = cases
        .par_iter()
        .map(|case| {
            let mut r = report::analyse(&grammar, &case.sentence, config.method, config.explain)
                .with_context(|| format!("line {}", case.line))?;
            let pass =
                r.surviving().iter().all(|&n| case.expect.holds(n)) && r.agreement != Some(false);
            r.expect = Some(case.expect.to_string());
            r.pass = Some(pass);
            Ok(r)
        })
        .collect();

    let mut out = std::io::stdout().lock();
    let (mut passed, mut failed, mut errors) = (0, 0, Vec::new());
    for (case, result) in cases.iter().zip(results) {
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e:#}");
                errors.push(e);
                continue;
            }
        };
        let pass = record.pass == Some(true);
        if pass {
            passed += 1;
        } else {
            failed += 1;
        }
        if config.json {
            emit(&mut out, &record, true)?;
        } else {
            let counts: Vec<String> = record.surviving().iter().map(|n| n.to_string()).collect();
            writeln!(
                out,
                "{}  {}  => {}  (parses {}, surviving {})",
                if pass { "PASS" } else { "FAIL" },
                case.sentence,
                case.expect,
                record.pre_filter,
                counts.join("/"),
            )
            .context("writing output")?;
            if config.explain || !pass {
                for line in report::render_text(&record).lines() {
                    writeln!(out, "      {line}").context("writing output")?;
                }
            }
        }
    }
    if !config.json {
        writeln!(
            out,
            "{} sentences, {passed} passed, {failed} failed",
            cases.len() - errors.len()
        )
        .context("writing output")?;
    }
    if let Some(e) = errors.into_iter().next() {
        return Err(Failure::Input(e));
    }
    if failed > 0 {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn cmd_validate(config: &Config) -> Result<(), Failure> {
    let hierarchy = load_hierarchy(config)?;
    let violations = hierarchy.bcpo_violations();
    if violations.is_empty() {
        println!("BCPO: ok, {} sorts", hierarchy.len());
    } else {
        println!(
            "BCPO: {} ambiguous pairs, {} sorts",
            violations.len(),
            hierarchy.len()
        );
        for v in &violations {
            let bounds: Vec<&str> = v.bounds.iter().map(|&s| hierarchy.name(s)).collect();
            eprintln!(
                "warning: BCPO: `{}` and `{}` have several maximal common subsorts: {}",
                hierarchy.name(v.a),
                hierarchy.name(v.b),
                bounds.join(", ")
            );
        }
    }
    let grammar = load_rest(config, hierarchy)?;
    println!("declarations: {}", grammar.decls.len());
    println!(
        "lexicon: {} entries, {} words",
        grammar.lexicon.entries().count(),
        grammar.lexicon.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Parse { sentence } => cmd_parse(&cli.config, sentence),
        Command::Batch { corpus } => cmd_batch(&cli.config, corpus.as_ref()),
        Command::Validate => cmd_validate(&cli.config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch) => ExitCode::from(2),
    }
}
