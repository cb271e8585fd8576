use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bncn_cli::{run_batch, self_check, CheckLevel, ExperimentConfig, Mode};
use bncn_core::groups::GroupDescriptor;
use bncn_core::recognizer::interpret;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bncn", version, about = "Recognize Sp(2n,q) versus SO(2n+1,q) by random sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run recognition trials on a freshly built group.
    Recognize {
        /// Group as sp:n:q or so:n:q.
        #[arg(long)]
        group: GroupDescriptor,
        /// test (with shortcuts) or plain.
        #[arg(long, default_value = "test")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        effort: usize,
        /// Master seed; drawn from the OS if omitted.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON-lines output; stdout if omitted. Timings go to <out>.timings.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include witness matrices in the records.
        #[arg(long)]
        dump_witness: bool,
        /// Check invariants on every sample.
        #[arg(long)]
        verify_invariants: bool,
        /// Print an explanation of each verdict to stderr.
        #[arg(long)]
        explain: bool,
    },
    /// Run the built-in invariant checks.
    Selfcheck {
        #[arg(long, default_value = "fast")]
        level: CheckLevel,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Recognize {
            group,
            mode,
            trials,
            effort,
            seed,
            out,
            jobs,
            dump_witness,
            verify_invariants,
            explain,
        } => {
            let seed = seed.unwrap_or_else(rand::random);
            eprintln!("master seed {seed}");
            let cfg = ExperimentConfig {
                group,
                mode,
                trials,
                effort,
                seed,
                jobs,
                dump_witness,
                verify_invariants,
            };
            let report = match run_batch(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let written = match &out {
                Some(path) => File::create(path)
                    .and_then(|f| report.write_jsonl(BufWriter::new(f)))
                    .and_then(|_| {
                        let mut t = path.clone().into_os_string();
                        t.push(".timings");
                        report.write_timings(BufWriter::new(File::create(t)?))
                    }),
                None => report.write_jsonl(io::stdout().lock()),
            };
            if let Err(e) = written {
                eprintln!("error writing output: {e}");
                return ExitCode::FAILURE;
            }
            if explain {
                for r in &report.records {
                    match (&r.verdict, &r.error) {
                        (Some(v), _) => {
                            eprintln!("trial {}:", r.trial);
                            eprint!("{}", interpret(v).unwrap_or_default());
                        }
                        (None, Some(e)) => eprintln!("trial {}: error: {e}", r.trial),
                        _ => {}
                    }
                }
            }
            let a = &report.aggregate;
            eprintln!(
                "{}: {} trials, {} correct, {} wrong, error rate {:.4}",
                a.group, a.trials, a.correct, a.wrong, a.error_rate
            );
            if a.invariant_failures > 0 {
                eprintln!("{} invariant failures", a.invariant_failures);
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Command::Selfcheck { level } => {
            let results = self_check(level);
            let mut stdout = io::stdout().lock();
            for r in &results {
                let _ = writeln!(stdout, "{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            let _ = writeln!(stdout, "{} checks, {failed} failed", results.len());
            if failed > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
