use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Result;
use bddcit::{
    CompiledConstraints, Encoding, EncodingMode, HandlerKind, Limits, ParamOrdering,
    PartialValidityBdd, QuantOrder,
};
use bddcit_cli::{
    cactus_path, cmd_bench, cmd_generate, cmd_verify, format_report, read_model, write_bench_csv, write_cactus_csv,
    BenchConfig, BenchStatus, GenerateArgs,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bddcit", version, about = "Constrained t-wise test generation with BDD validity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test suite and write it as CSV.
    Generate {
        model: PathBuf,
        #[arg(short = 't', long = "strength", default_value_t = 2)]
        strength: usize,
        #[arg(long, default_value = "bdd-partial-up")]
        handler: HandlerKind,
        /// Fill unspecified cells with values that keep each row valid.
        #[arg(long)]
        fill: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write 0-based value indices instead of labels.
        #[arg(long)]
        indices: bool,
    },
    /// Check a suite CSV for invalid rows and uncovered combinations.
    Verify {
        model: PathBuf,
        suite: PathBuf,
        #[arg(short = 't', long = "strength", default_value_t = 2)]
        strength: usize,
        #[arg(long, default_value = "bdd-partial-up")]
        handler: HandlerKind,
    },
    /// Time generation over every `.model` file in a directory.
    Bench {
        model_dir: PathBuf,
        #[arg(short = 't', long = "strength", default_value_t = 2)]
        strength: usize,
        /// Comma-separated handler names.
        #[arg(long, value_delimiter = ',', default_value = "bdd-and,bdd-partial-up,bdd-partial-down")]
        handler: Vec<HandlerKind>,
        #[arg(long, default_value_t = 12)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        trim: usize,
        /// Seconds per run before the pair is recorded as NA.
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        #[arg(short, long)]
        output: PathBuf,
        /// Worker threads; each (instance, handler) pair runs in isolation.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the constraint BDD in Graphviz format.
    Dot {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = DotKind::Valid)]
        kind: DotKind,
        /// Keep declaration order instead of the distance-based order.
        #[arg(long)]
        declaration_order: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DotKind {
    /// Valid full test cases.
    Valid,
    /// Valid full and partial test cases.
    Partial,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            model,
            strength,
            handler,
            fill,
            output,
            indices,
        } => {
            let suite = cmd_generate(&GenerateArgs {
                model,
                strength,
                handler,
                fill,
                output,
                indices,
            })?;
            for d in &suite.diagnostics {
                eprintln!("note: {d}");
            }
            eprintln!("{} rows", suite.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            model,
            suite,
            strength,
            handler,
        } => {
            let report = cmd_verify(&model, &suite, strength, handler)?;
            print!("{}", format_report(&read_model(&model)?, &report));
            Ok(if report.accepted() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Bench {
            model_dir,
            strength,
            handler,
            repeats,
            trim,
            timeout,
            output,
            jobs,
        } => {
            let cfg = BenchConfig {
                model_dir,
                strength,
                handlers: handler.clone(),
                repeats,
                trim,
                timeout: Duration::from_secs_f64(timeout),
                jobs,
            };
            let records = cmd_bench(&cfg)?;
            write_bench_csv(&records, std::fs::File::create(&output)?)?;
            write_cactus_csv(&records, &handler, std::fs::File::create(cactus_path(&output))?)?;
            for r in &records {
                match r.status {
                    BenchStatus::Ok => eprintln!(
                        "{:<24} {:<18} {:>10.4}s {:>6} rows",
                        r.instance,
                        r.handler,
                        r.seconds.unwrap_or_default(),
                        r.suite_size.unwrap_or_default()
                    ),
                    BenchStatus::Na => eprintln!("{:<24} {:<18} {:>11}", r.instance, r.handler, "NA"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dot {
            model,
            kind,
            declaration_order,
        } => {
            let model = read_model(&model)?;
            let ordering = if declaration_order {
                ParamOrdering::Declaration
            } else {
                ParamOrdering::Distance
            };
            let dot = match kind {
                DotKind::Valid => {
                    let enc = Encoding::new(&model, EncodingMode::Full, ordering);
                    let cc = CompiledConstraints::compile(&model, enc, Limits::default())?;
                    cc.manager.to_dot(cc.f)?
                }
                DotKind::Partial => {
                    let enc = Encoding::new(&model, EncodingMode::WithDash, ordering);
                    let cc = CompiledConstraints::compile(&model, enc, Limits::default())?;
                    let pb = PartialValidityBdd::build(cc, QuantOrder::Up)?;
                    pb.manager().to_dot(pb.g)?
                }
            };
            print!("{dot}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
