//! The `provtrail` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when the inputs are
//! well-formed but the operation fails (infeasible test, dangling or lost
//! provenance, predicate not holding).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::corpus::{
    load_corpus, read_dir_tests, read_test_file, serialize_test, trace_to_seed, Corpus, Test,
};
use crate::engine::{campaign, is_learned_name, GenConfig, GenMode};
use crate::postprocess::{ddmin_reduce, normalize, Checker, Predicate};
use crate::pseudoprov::{
    greedy_pseudo_provenance, oracle_min_segmentation, Aligner, MatchMode, ORACLE_MAX_LEN,
};
use crate::report::{contribution_table, render, Format};
use crate::sut::{self, RunOptions, Sut};

#[derive(Parser, Debug)]
#[command(
    name = "provtrail",
    version,
    about = "Seeded test generation with provenance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SutId {
    Avl,
    Fs,
}

impl SutId {
    fn get(self) -> &'static dyn Sut {
        let id = match self {
            SutId::Avl => "avl",
            SutId::Fs => "fs",
        };
        sut::lookup(id).expect("registered sut")
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Subsequence,
    Weighted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preserve {
    Failure,
    Coverage,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(clap::Args, Debug)]
struct PostArgs {
    #[arg(long, value_enum)]
    sut: SutId,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum)]
    preserve: Preserve,
    #[arg(long)]
    inject_bug: bool,
    /// Output file; the test is printed when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a generation campaign from a directory of seed tests.
    Generate {
        #[arg(long, value_enum)]
        sut: SutId,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        budget_tests: usize,
        #[arg(long, default_value_t = 50)]
        max_length: usize,
        #[arg(long)]
        rng_seed: u64,
        #[arg(long, value_enum, default_value = "subsequence")]
        mode: ModeArg,
        #[arg(long)]
        inject_bug: bool,
        /// Exponent of the weighted-mode sampling weight.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Delta-debug a test down to a 1-minimal test keeping the predicate.
    Reduce(PostArgs),
    /// Canonicalize variable names and lower constants.
    Normalize(PostArgs),
    /// Reconstruct provenance for unannotated components.
    Pseudoprov {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Match on action kinds instead of action text (needs --sut).
        #[arg(long = "abstract")]
        abstract_kinds: bool,
        #[arg(long, value_enum)]
        sut: Option<SutId>,
        /// Also align against the tests in this directory.
        #[arg(long)]
        include_generated: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report the optimal run count.
        #[arg(long)]
        check: bool,
    },
    /// Tabulate seed and action-kind contributions.
    Report {
        #[arg(long)]
        tests: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        transitive: bool,
        #[arg(long)]
        learned_only: bool,
        /// Fill the per-kind table (needs --sut).
        #[arg(long = "abstract")]
        abstract_kinds: bool,
        #[arg(long, value_enum)]
        sut: Option<SutId>,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Print the origin chain of one component.
    Trace {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        test: String,
        #[arg(long)]
        step: usize,
        /// Seed directory; without it, non-generated tests in --corpus are seeds.
        #[arg(long)]
        seeds: Option<PathBuf>,
    },
    /// Dump coverage points and actions of a sut as JSON.
    SutInfo {
        #[arg(long, value_enum)]
        sut: SutId,
    },
}

enum Failure {
    Usage(String),
    Domain(String),
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

/// Run the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(domain)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| domain(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn write_test(t: &Test, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = serialize_test(t);
    match path {
        Some(p) => write_file(p, &text),
        None => emit(out, &text),
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Generate {
            sut,
            seeds,
            out: dir,
            k,
            budget_tests,
            max_length,
            rng_seed,
            mode,
            inject_bug,
            alpha,
        } => {
            let cfg = GenConfig {
                k,
                max_test_length: max_length,
                budget_tests,
                rng_seed,
                mode: match mode {
                    ModeArg::Subsequence => GenMode::Subsequence,
                    ModeArg::Weighted => GenMode::Weighted,
                },
                weight_exponent: alpha,
                fault_injection: inject_bug,
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let corpus = load_corpus(&seeds, None).map_err(domain)?;
            let result = campaign(&corpus, sut.get(), &cfg).map_err(domain)?;
            result.persist(&corpus, &dir).map_err(domain)?;
            let best = result
                .best
                .as_ref()
                .map(|b| {
                    format!(
                        "; best covers {} branches, {} statements",
                        sut::branch_count(&b.result.coverage),
                        sut::stmt_count(&b.result.coverage)
                    )
                })
                .unwrap_or_default();
            emit(
                out,
                &format!(
                    "generated {} tests, learned {}{best}\n",
                    result.generated,
                    result.learned.len()
                ),
            )
        }
        Command::Reduce(args) => postprocess(args, false, out),
        Command::Normalize(args) => postprocess(args, true, out),
        Command::Pseudoprov {
            seeds,
            test,
            abstract_kinds,
            sut,
            include_generated,
            out: path,
            check,
        } => {
            let (mode, sut) = match (abstract_kinds, sut) {
                (true, None) => return Err(Failure::Usage("--abstract requires --sut".into())),
                (true, Some(s)) => (MatchMode::Abstract, Some(s.get())),
                (false, s) => (MatchMode::Exact, s.map(SutId::get)),
            };
            let corpus = load_corpus(&seeds, include_generated.as_deref()).map_err(domain)?;
            let target = read_test_file(&test).map_err(domain)?;
            let aligner = Aligner::new(
                &corpus,
                mode,
                sut,
                include_generated.is_some(),
                Some(&target.name),
            )
            .map_err(domain)?;
            let result = greedy_pseudo_provenance(&target, &aligner);
            write_test(&result.test, path.as_deref(), out)?;
            if check {
                let optimal = if target.len() <= ORACLE_MAX_LEN {
                    oracle_min_segmentation(&target, &aligner)
                        .map_err(domain)?
                        .to_string()
                } else {
                    format!("n/a (length > {ORACLE_MAX_LEN})")
                };
                emit(
                    out,
                    &format!(
                        "greedy_runs {}\noptimal_runs {optimal}\n",
                        result.runs.len()
                    ),
                )?;
            }
            Ok(())
        }
        Command::Report {
            tests,
            seeds,
            transitive,
            learned_only,
            abstract_kinds,
            sut,
            format,
        } => {
            let sut = match (abstract_kinds, sut) {
                (true, None) => return Err(Failure::Usage("--abstract requires --sut".into())),
                (true, Some(s)) => Some(s.get()),
                (false, _) => None,
            };
            let corpus = load_corpus(&seeds, Some(&tests)).map_err(domain)?;
            let selected: Vec<Test> = corpus
                .generated()
                .filter(|t| !learned_only || is_learned_name(&t.name))
                .cloned()
                .collect();
            let table = contribution_table(&selected, &corpus, sut, transitive).map_err(domain)?;
            let format = match format {
                FormatArg::Text => Format::Text,
                FormatArg::Json => Format::Json,
            };
            emit(out, &render(&table, format).map_err(domain)?)
        }
        Command::Trace {
            corpus,
            test,
            step,
            seeds,
        } => {
            let corpus = match seeds {
                Some(dir) => load_corpus(&dir, Some(&corpus)),
                None => infer_corpus(&corpus),
            }
            .map_err(domain)?;
            let chain = trace_to_seed(&corpus, &test, step).map_err(domain)?;
            if chain.is_empty() {
                return emit(out, "(seed)\n");
            }
            let text: String = chain.iter().map(|o| format!("{o}\n")).collect();
            emit(out, &text)
        }
        Command::SutInfo { sut } => {
            let sut = sut.get();
            let info = serde_json::json!({
                "points": sut.coverage_points().iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                "actions": sut.list_actions().iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&info).map_err(domain)?;
            emit(out, &(text + "\n"))
        }
    }
}

/// Seeds are the tests whose names are not generated names.
fn infer_corpus(dir: &Path) -> Result<Corpus, crate::corpus::CorpusError> {
    let (generated, seeds): (Vec<Test>, Vec<Test>) = read_dir_tests(dir)?
        .into_iter()
        .partition(|t| is_learned_name(&t.name) || t.name == crate::engine::BEST_TEST_NAME);
    Corpus::from_tests(seeds, generated)
}

fn postprocess(args: PostArgs, normalizing: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let sut = args.sut.get();
    let t = read_test_file(&args.test).map_err(domain)?;
    let predicate = match args.preserve {
        Preserve::Failure => Predicate::PreservesFailure,
        Preserve::Coverage => {
            let r = sut::run(sut, &t, RunOptions::strict(args.inject_bug)).map_err(domain)?;
            Predicate::PreservesCoverage(r.coverage)
        }
    };
    let mut checker = Checker::new(sut, predicate, args.inject_bug);
    let result = if normalizing {
        normalize(&t, &mut checker).map_err(domain)?.test
    } else {
        ddmin_reduce(&t, &mut checker).map_err(domain)?
    };
    write_test(&result, args.out.as_deref(), out)
}
