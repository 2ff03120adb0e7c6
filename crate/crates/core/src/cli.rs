//! Command-line front end: `gen`, `check`, `paper` and `fuzz`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for bad flags or input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::tree::{VertexId, WeightedTree};
use crate::verify::{
    check_tree, pair_report, random_tree, reproduce_case, run_theorem_suite_jobs, select_pairs,
    Backend, CheckGroup, PairMode, PaperCase, TrialConfig, WeightModel, DEFAULT_SEED,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "distlap",
    version,
    about = "Distance Laplacians of weighted trees and a verifier for the Z-matrix property of their pseudoinverses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random tree and write it as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// unit, int:LO:HI or rat:LO:HI:MAXDEN
        #[arg(long, default_value = "unit")]
        weights: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every check on a tree file.
    Check {
        file: PathBuf,
        /// Report the partitions and R-matrix checks for this ordered pair.
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "all_pairs")]
        pair: Option<Vec<usize>>,
        /// Run the per-pair checks on every ordered pair.
        #[arg(long)]
        all_pairs: bool,
        #[arg(long, default_value = "exact")]
        backend: String,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce a fixed worked case (all cases when --case is omitted).
    Paper {
        /// path4, t16 or euclid5
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Check many seeded random trees.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "int:1:10")]
        weights: String,
        #[arg(long, default_value = "exact")]
        backend: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Comma-separated check groups: lemmas, z, edm, rstructure, backends.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Per-pair checks on every ordered pair instead of sampling.
        #[arg(long)]
        all_pairs: bool,
        /// Print the JSON report to stdout.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time in the report.
        #[arg(long)]
        timing: bool,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen {
            n,
            seed,
            weights,
            out,
        } => gen(n, seed, &weights, out, stdout),
        Command::Check {
            file,
            pair,
            all_pairs,
            backend,
            json,
        } => check(file, pair, all_pairs, &backend, json, stdout),
        Command::Paper { case, json } => paper(case, json, stdout),
        Command::Fuzz {
            trials,
            n_min,
            n_max,
            seed,
            weights,
            backend,
            jobs,
            checks,
            all_pairs,
            json,
            out,
            timing,
        } => {
            let backend: Backend = backend.parse()?;
            let mut cfg =
                TrialConfig::new(trials, n_min, n_max, weights.parse()?, backend).with_seed(seed);
            if let Some(names) = checks {
                cfg = cfg.with_checks(
                    names
                        .iter()
                        .map(|s| s.parse())
                        .collect::<Result<Vec<CheckGroup>>>()?,
                );
            }
            if all_pairs {
                cfg.pairs = PairMode::All;
            }
            cfg.timing = timing;
            fuzz(&cfg, jobs, json, out, stdout, stderr)
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}

fn gen(
    n: usize,
    seed: u64,
    weights: &str,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    if n < 2 {
        return Err(Error::BadConfig("n must be ≥ 2".into()));
    }
    let model: WeightModel = weights.parse()?;
    let tree = random_tree(n, seed, model)?;
    let text = tree.to_json_string();
    match out {
        Some(path) => {
            std::fs::write(&path, format!("{text}\n")).map_err(io_err)?;
            writeln!(stdout, "{}", tree.digest()).map_err(io_err)?;
        }
        None => writeln!(stdout, "{text}").map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn check(
    file: PathBuf,
    pair: Option<Vec<usize>>,
    all_pairs: bool,
    backend: &str,
    json: bool,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let backend: Backend = backend.parse()?;
    let text = std::fs::read_to_string(&file)
        .map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
    let tree = WeightedTree::from_json_str(&text)?;
    let pairs = match &pair {
        Some(p) => {
            let (a, b) = (VertexId(p[0]), VertexId(p[1]));
            tree.check(a)?;
            tree.check(b)?;
            if a == b {
                return Err(Error::SameVertex(a.0));
            }
            vec![(a, b)]
        }
        None => select_pairs(
            tree.n(),
            DEFAULT_SEED,
            if all_pairs {
                PairMode::All
            } else {
                PairMode::Auto
            },
        ),
    };
    let result = check_tree(&tree, &pairs, backend, &CheckGroup::defaults(backend));
    let reports = match &pair {
        Some(_) => vec![pair_report(&tree, pairs[0].0, pairs[0].1)?],
        None => Vec::new(),
    };

    if json {
        let doc =
            serde_json::json!({ "backend": backend, "result": result, "pair_reports": reports });
        writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        )
        .map_err(io_err)?;
    } else {
        writeln!(
            stdout,
            "tree {} (n = {}), backend {backend}, {} pairs",
            result.digest,
            result.n,
            pairs.len()
        )
        .map_err(io_err)?;
        for (name, ok) in &result.checks {
            writeln!(
                stdout,
                "  {:<24} {}",
                name,
                if *ok { "ok" } else { "FAILED" }
            )
            .map_err(io_err)?;
        }
        if result.checks.get("sdag_z") == Some(&true) {
            writeln!(stdout, "all off-diagonal entries of S† are <= 0").map_err(io_err)?;
        }
        for r in &reports {
            writeln!(
                stdout,
                "pair {}: V = {}, VA = {}, VB = {}",
                r["pair"], r["V"], r["VA"], r["VB"]
            )
            .map_err(io_err)?;
            writeln!(stdout, "  U = {}, Q = {}, W = {}", r["U"], r["Q"], r["W"]).map_err(io_err)?;
            writeln!(stdout, "  det R = {}, s†_ab = {}", r["detR"], r["sdag_ab"])
                .map_err(io_err)?;
        }
        for f in &result.failures {
            writeln!(stdout, "FAILED {} {:?}: {}", f.check, f.pair, f.witness).map_err(io_err)?;
        }
    }
    let partitions_ok = reports.iter().all(|r| {
        r["checks"]
            .as_object()
            .is_some_and(|c| c.values().all(|v| v == true))
    });
    Ok(if result.passed() && partitions_ok {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn paper(case: Option<String>, json: bool, stdout: &mut dyn Write) -> Result<i32> {
    let cases = match case {
        Some(name) => vec![name.parse::<PaperCase>()?],
        None => PaperCase::ALL.to_vec(),
    };
    let reports = cases
        .into_iter()
        .map(reproduce_case)
        .collect::<Result<Vec<_>>>()?;
    if json {
        writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&reports).expect("serializable")
        )
        .map_err(io_err)?;
    } else {
        for r in &reports {
            writeln!(stdout, "== {} ==", r.case).map_err(io_err)?;
            for line in &r.lines {
                writeln!(stdout, "{line}").map_err(io_err)?;
            }
            for (name, ok) in &r.checks {
                writeln!(
                    stdout,
                    "  {:<18} {}",
                    name,
                    if *ok { "match" } else { "MISMATCH" }
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn fuzz(
    cfg: &TrialConfig,
    jobs: usize,
    json: bool,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    if cfg.n_max < 2 {
        return Err(Error::BadConfig("n must be ≥ 2".into()));
    }
    let report = run_theorem_suite_jobs(cfg, jobs)?;
    let text = report.to_json();
    if let Some(path) = out {
        std::fs::write(&path, format!("{text}\n")).map_err(io_err)?;
    }
    if json {
        writeln!(stdout, "{text}").map_err(io_err)?;
        write!(stderr, "{}", report.summary_table()).map_err(io_err)?;
    } else {
        write!(stdout, "{}", report.summary_table()).map_err(io_err)?;
    }
    for t in report.trials.iter().filter(|t| !t.result.passed()).take(5) {
        for f in t.result.failures.iter().take(3) {
            writeln!(
                stderr,
                "trial {} (seed {}): {} {:?}: {}",
                t.index, t.seed, f.check, f.pair, f.witness
            )
            .map_err(io_err)?;
        }
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("distlap").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn gen_rejects_small_n() {
        let (code, _, err) = run_args(&["gen", "--n", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("n must be ≥ 2"));
    }

    #[test]
    fn gen_to_stdout_parses() {
        let (code, out, _) = run_args(&["gen", "--n", "4", "--weights", "unit", "--seed", "3"]);
        assert_eq!(code, EXIT_OK);
        let t = WeightedTree::from_json_str(&out).unwrap();
        assert_eq!(t.edges().len(), 3);
    }

    #[test]
    fn paper_cases_and_bad_names() {
        let (code, out, _) = run_args(&["paper", "--case", "euclid5"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("s†(1,5)=1/810 > 0"));
        assert_eq!(run_args(&["paper", "--case", "nope"]).0, EXIT_USAGE);
    }

    #[test]
    fn fuzz_usage_errors() {
        assert_eq!(run_args(&["fuzz", "--n-max", "1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["fuzz", "--weights", "int:0:2"]).0, EXIT_USAGE);
        assert_eq!(
            run_args(&["fuzz", "--checks", "lemmas,bogus"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
    }
}
