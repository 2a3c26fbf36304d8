use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gwi_core::invariance::{derive_report, verify_case, Mode};
use gwi_core::manifest::load_manifest;
use gwi_core::relations::{enumerate_wdvv, RelationSpan};
use gwi_core::report::{write_report, write_reports, Format, Report};
use gwi_core::{parse_expr, print_expr, Error, GwiMonomial};

#[derive(Parser)]
#[command(
    name = "gwi",
    version,
    about = "Decorated-graph expressions and tautological-equation checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    format: String,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form of an expression.
    Canon { expr: String },
    /// Print the grading of a homogeneous expression.
    Grade { expr: String },
    /// Close a universe of monomials under WDVV and print the relations.
    Wdvv {
        #[arg(long)]
        universe: PathBuf,
    },
    /// Solve the transcribed equations of a case.
    Solve {
        #[arg(long)]
        case: PathBuf,
    },
    /// Derive rows at one level from the image table.
    Derive {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        l: u32,
    },
    /// Verify a case.
    Verify {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, default_value = "all", value_parser = ["solve", "derive", "residuals", "all"])]
        mode: String,
    },
    /// Verify every manifest in a corpus directory.
    VerifyAll {
        #[arg(long)]
        corpus: PathBuf,
    },
}

enum Outcome {
    /// Plain output; success.
    Done(String),
    Reports(String, bool),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format: Format = cli.format.parse().expect("validated by clap");
    match run(&cli.command, format) {
        Ok(outcome) => {
            let (text, ok) = match outcome {
                Outcome::Done(t) => (t, true),
                Outcome::Reports(t, ok) => (t, ok),
            };
            if let Err(e) = emit(cli.out.as_deref(), &text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn json_line(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json value");
    s.push('\n');
    s
}

fn one(report: Report, format: Format) -> Outcome {
    let ok = report.passed();
    Outcome::Reports(write_report(&report, format), ok)
}

fn run(cmd: &Command, format: Format) -> Result<Outcome, Error> {
    match cmd {
        Command::Canon { expr } => {
            let e = parse_expr(expr)?;
            Ok(Outcome::Done(match format {
                Format::Text => format!("{}\n", print_expr(&e)),
                Format::Json => json_line(serde_json::json!({ "canonical": print_expr(&e) })),
            }))
        }
        Command::Grade { expr } => {
            let e = parse_expr(expr)?;
            let g = e
                .grading()
                .ok_or_else(|| Error::Grading("expression is empty or not homogeneous".into()))?;
            Ok(Outcome::Done(match format {
                Format::Text => format!("{g}\n"),
                Format::Json => json_line(serde_json::json!({
                    "genus": g.genus_total,
                    "n": g.n_external,
                    "codim": g.codim,
                    "components": g.components,
                })),
            }))
        }
        Command::Wdvv { universe } => {
            let text = std::fs::read_to_string(universe).map_err(|source| Error::Io {
                path: universe.clone(),
                source,
            })?;
            let mut monomials: Vec<GwiMonomial> = Vec::new();
            for (n, line) in text.lines().enumerate() {
                let body = line.split('#').next().unwrap_or("").trim();
                if body.is_empty() {
                    continue;
                }
                let e = parse_expr(body).map_err(|e| Error::Located {
                    file: universe.display().to_string(),
                    line: n + 1,
                    context: "universe".into(),
                    source: Box::new(e),
                })?;
                monomials.extend(e.monomials().cloned());
            }
            let rels = enumerate_wdvv(&monomials)?;
            let span = RelationSpan::new(&rels, &monomials);
            Ok(Outcome::Done(match format {
                Format::Text => {
                    let mut s: String = rels.iter().map(|r| format!("{} = 0\n", print_expr(&r.expr))).collect();
                    s.push_str(&format!(
                        "relations {} rank {} universe {}\n",
                        rels.len(),
                        span.rank(),
                        span.universe.len()
                    ));
                    s
                }
                Format::Json => json_line(serde_json::json!({
                    "relations": rels.iter().map(|r| print_expr(&r.expr)).collect::<Vec<_>>(),
                    "rank": span.rank(),
                    "universe": span.universe.len(),
                })),
            }))
        }
        Command::Solve { case } => {
            let c = load_manifest(case)?;
            Ok(one(verify_case(&c, &[Mode::Solve]), format))
        }
        Command::Derive { case, l } => {
            let c = load_manifest(case)?;
            Ok(one(derive_report(&c, *l)?, format))
        }
        Command::Verify { case, mode } => {
            let c = load_manifest(case)?;
            let modes = Mode::parse_set(mode)?;
            Ok(one(verify_case(&c, &modes), format))
        }
        Command::VerifyAll { corpus } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus)
                .map_err(|source| Error::Io {
                    path: corpus.clone(),
                    source,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Schema(format!("no case manifests in {}", corpus.display())));
            }
            let cases = paths.iter().map(|p| load_manifest(p)).collect::<Result<Vec<_>, _>>()?;
            let all = [Mode::Solve, Mode::Derive, Mode::Residuals];
            let reports: Vec<Report> = std::thread::scope(|s| {
                let handles: Vec<_> = cases.iter().map(|c| s.spawn(|| verify_case(c, &all))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("verification thread"))
                    .collect()
            });
            let ok = reports.iter().all(Report::passed);
            Ok(Outcome::Reports(write_reports(&reports, format), ok))
        }
    }
}
