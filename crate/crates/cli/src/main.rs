//! `mol`: command-line front end for the MOL nullability workbench.
//!
//! Exit status: 0 success, 1 error diagnostics, 2 usage or I/O failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, CommandFactory, Parser, Subcommand, ValueEnum};

use mol_core::analysis::result_io::{static_result_from_csv, static_result_to_csv, static_result_to_text};
use mol_core::analysis::{fixpoint_analyze, AnalysisOptions};
use mol_core::checker::{check_program, CheckMode};
use mol_core::corpus::{generate_corpus, write_corpus, CorpusSpec};
use mol_core::dynamic::{aggregate_traces, profile_from_csv, profile_to_csv, write_trace, Outcome, RunOptions, Tracer};
use mol_core::ir::{parse_syntax, print_program, validate_program, Program};
use mol_core::report::{
    build_dynamic_crosstab, build_static_crosstab, emit_report, project_rows, project_stats, tables, CrossTab,
    ReportFormat, ReportSection, RequiredLevel,
};
use mol_core::Diagnostic;

#[derive(Parser)]
#[command(name = "mol", version, about = "Nullability analysis workbench for MOL programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program, printing its canonical form.
    Parse { file: PathBuf },
    /// Classify every reference parameter as definitely, possibly or not
    /// locally required.
    AnalyzeStatic {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        loop_bound: usize,
        #[arg(long, default_value_t = 4096)]
        max_paths: usize,
        /// Write the result here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Execute an entry point, recording which arguments are null at each call.
    RunDynamic {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        entry: String,
        /// Seed of the first run; run k uses seed + k.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = mol_core::dynamic::DEFAULT_STEP_LIMIT)]
        step_limit: u64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Write traces here instead of standard output.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Also write the merged per-abstraction profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Check calls and assignments under a call model.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Print diagnostics as a JSON array.
        #[arg(long)]
        json: bool,
    },
    /// Render a cross-tabulation or project summary.
    #[command(group(ArgGroup::new("input").required(true).args(["static_csv", "dynamic_csv", "published"])))]
    Report {
        /// Static result CSV (from analyze-static).
        #[arg(long = "static", value_name = "CSV")]
        static_csv: Option<PathBuf>,
        /// Dynamic profile CSV (from run-dynamic --profile).
        #[arg(long = "dynamic", value_name = "CSV")]
        dynamic_csv: Option<PathBuf>,
        /// Use the built-in reference tables.
        #[arg(long)]
        published: bool,
        #[arg(long, value_enum)]
        table: Table,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate a synthetic corpus with ground truth.
    GenCorpus {
        #[arg(long, default_value_t = 2000)]
        methods: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        max_ref_params: usize,
        #[arg(long, default_value_t = 0.1)]
        loop_density: f64,
        #[arg(long, default_value_t = 8)]
        drivers: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Continuum,
    Conventional,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    Definite,
    Possible,
    Dynamic,
    Projects,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes to standard output; a closed pipe ends output silently.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e).context("cannot write to standard output"),
        _ => Ok(()),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => emit(text),
    }
}

fn report_diagnostics(origin: &str, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{origin}: {d}");
    }
}

/// Parses every file and validates their union as one program. `Ok(None)`
/// means error diagnostics were printed.
fn load(files: &[PathBuf]) -> Result<Option<Program>> {
    let mut program = Program::default();
    let mut ok = true;
    for f in files {
        match parse_syntax(&read(f)?) {
            Ok(p) => program.items.extend(p.items),
            Err(diags) => {
                report_diagnostics(&f.display().to_string(), &diags);
                ok = false;
            }
        }
    }
    if !ok {
        return Ok(None);
    }
    let diags = validate_program(&program);
    let origin = files
        .iter()
        .map(|f| f.display().to_string())
        .collect::<Vec<_>>()
        .join("+");
    report_diagnostics(&origin, &diags);
    Ok((!diags.iter().any(Diagnostic::is_error)).then_some(program))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Parse { file } => {
            let Some(p) = load(std::slice::from_ref(&file))? else {
                return Ok(1);
            };
            emit(&print_program(&p))?;
            Ok(0)
        }
        Command::AnalyzeStatic {
            files,
            loop_bound,
            max_paths,
            out,
            format,
        } => {
            let Some(p) = load(&files)? else { return Ok(1) };
            let r = match fixpoint_analyze(&p, AnalysisOptions { loop_bound, max_paths }) {
                Ok(r) => r,
                Err(diags) => {
                    report_diagnostics("analyze-static", &diags);
                    return Ok(1);
                }
            };
            for key in &r.path_budget_exceeded {
                eprintln!("warning: {key} exceeded the path budget; coarse summary used");
            }
            let text = match format {
                Format::Csv => static_result_to_csv(&r),
                Format::Text => static_result_to_text(&r),
            };
            write_or_print(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::RunDynamic {
            files,
            entry,
            seed,
            step_limit,
            runs,
            traces,
            profile,
        } => {
            let Some(p) = load(&files)? else { return Ok(1) };
            let tracer = Tracer::new(&p);
            let mut all = Vec::new();
            for k in 0..runs {
                let opts = RunOptions {
                    seed: seed.wrapping_add(k),
                    step_limit,
                };
                match tracer.run(&entry, opts) {
                    Ok(t) => all.push(t),
                    Err(d) => {
                        report_diagnostics("run-dynamic", &[d]);
                        return Ok(1);
                    }
                }
            }
            let failed = all.iter().filter(|t| t.outcome != Outcome::Completed).count();
            let calls: usize = all.iter().map(|t| t.total_calls()).sum();
            eprintln!("{runs} run(s), {calls} recorded call(s), {failed} not completed");
            let text: String = all.iter().map(write_trace).collect();
            write_or_print(traces.as_deref(), &text)?;
            if let Some(path) = profile {
                let (prof, diags) = aggregate_traces(&all, &p);
                report_diagnostics("run-dynamic", &diags);
                fs::write(&path, profile_to_csv(&prof)).with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(0)
        }
        Command::Check { files, mode, json } => {
            let Some(p) = load(&files)? else { return Ok(1) };
            let mode = match mode {
                Mode::Continuum => CheckMode::Continuum,
                Mode::Conventional => CheckMode::Conventional,
            };
            let diags = check_program(&p, mode);
            let text = if json {
                serde_json::to_string_pretty(&diags)? + "\n"
            } else {
                diags.iter().map(|d| format!("{d}\n")).collect()
            };
            emit(&text)?;
            Ok(u8::from(diags.iter().any(Diagnostic::is_error)))
        }
        Command::Report {
            static_csv,
            dynamic_csv,
            published,
            table,
            format,
        } => {
            let section = report_section(static_csv, dynamic_csv, published, table)?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Text => ReportFormat::Text,
            };
            emit(&emit_report(&[section], format))?;
            Ok(0)
        }
        Command::GenCorpus {
            methods,
            seed,
            out,
            max_ref_params,
            loop_density,
            drivers,
        } => {
            let spec = CorpusSpec {
                method_count: methods,
                seed,
                max_ref_params,
                loop_density,
                drivers,
                ..CorpusSpec::default()
            };
            let corpus = match generate_corpus(&spec) {
                Ok(c) => c,
                Err(d) => {
                    report_diagnostics("gen-corpus", &[d]);
                    return Ok(1);
                }
            };
            write_corpus(&corpus, &out).with_context(|| format!("cannot write corpus to {}", out.display()))?;
            eprintln!(
                "wrote {} abstractions and {} drivers to {}",
                corpus.truth.abstraction_count,
                corpus.truth.entries.len(),
                out.display()
            );
            Ok(0)
        }
    }
}

fn usage_error(msg: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, msg)
        .exit()
}

fn titled(title: &str, tab: CrossTab) -> ReportSection {
    ReportSection::CrossTab {
        title: title.into(),
        tab,
    }
}

fn report_section(
    static_csv: Option<PathBuf>,
    dynamic_csv: Option<PathBuf>,
    published: bool,
    table: Table,
) -> Result<ReportSection> {
    const DEFINITE: &str = "Reference parameters by count (columns) and definitely required (rows)";
    const POSSIBLE: &str = "Reference parameters by count (columns) and definitely or possibly required (rows)";
    const DYNAMIC: &str = "Reference parameters by count (columns) and never null (rows)";
    let level = |t| match t {
        Table::Definite => RequiredLevel::DefiniteOnly,
        _ => RequiredLevel::DefiniteOrPossible,
    };
    let title = |t| if t == Table::Definite { DEFINITE } else { POSSIBLE };
    if published {
        return Ok(match table {
            Table::Definite => titled(DEFINITE, tables::static_definite()),
            Table::Possible => titled(POSSIBLE, tables::static_possible()),
            Table::Dynamic => titled(DYNAMIC, tables::dynamic_never_null()),
            Table::Projects => ReportSection::Projects(project_stats(tables::project_percentages())),
        });
    }
    if let Some(path) = static_csv {
        if matches!(table, Table::Dynamic | Table::Projects) {
            usage_error("--table dynamic and --table projects need --dynamic or --published");
        }
        let r = static_result_from_csv(&read(&path)?).with_context(|| format!("malformed {}", path.display()))?;
        return Ok(titled(title(table), build_static_crosstab(&r, level(table))));
    }
    let path = dynamic_csv.expect("clap requires one input");
    if matches!(table, Table::Definite | Table::Possible) {
        usage_error("--table definite and --table possible need --static or --published");
    }
    let d = profile_from_csv(&read(&path)?).with_context(|| format!("malformed {}", path.display()))?;
    Ok(match table {
        Table::Dynamic => titled(DYNAMIC, build_dynamic_crosstab(&d)),
        _ => ReportSection::Projects(project_stats(project_rows(&d))),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
