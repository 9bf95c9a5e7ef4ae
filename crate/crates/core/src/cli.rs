//! Command-line interface. `run` returns the process exit code: 0 success,
//! 2 for a negative answer from `check` or `dsep`, 1 for runtime errors and
//! 64 for usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::adjustment::{check_vas_with, enumerate_vas, split_adjustment, CheckOptions, QuerySpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate, Family, LinearOptions, Method};
use crate::experiment::{run_replications, ExperimentConfig};
use crate::graph::{Dag, VertexSet};
use crate::io::{read_dag_file, read_scm_file, ScmSpec};
use crate::scm::Dataset;
use crate::separation::{first_open_path, is_d_separated};
use crate::taxonomy::oset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "wcde",
    version,
    about = "Adjustment sets and estimators for weighted controlled direct effects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphQuery {
    /// DAG file, one `PARENT -> CHILD` edge per line
    #[arg(long)]
    dag: PathBuf,
    #[arg(long)]
    exposure: String,
    #[arg(long)]
    outcome: String,
}

#[derive(Args, Debug)]
struct ModelQuery {
    /// JSON model specification
    #[arg(long)]
    scm: PathBuf,
    /// Overrides the exposure stored in the model file
    #[arg(long)]
    exposure: Option<String>,
    /// Overrides the outcome stored in the model file
    #[arg(long)]
    outcome: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    astar: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Plugin,
    Onestep,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Plugin => Method::PlugIn,
            MethodArg::Onestep => Method::OneStep,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Cells,
    Linear,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check whether a set is a valid adjustment set; exit 2 if not
    Check {
        #[command(flatten)]
        query: GraphQuery,
        /// Comma-separated adjustment set (empty for none)
        #[arg(long, default_value = "")]
        adjust: String,
        /// Condition on Z only (not Z and the exposure) in criterion 2
        #[arg(long)]
        literal_criterion2: bool,
    },
    /// List every valid adjustment set as JSON
    Enumerate {
        #[command(flatten)]
        query: GraphQuery,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Print the optimal adjustment set, one name per line
    Oset {
        #[command(flatten)]
        query: GraphQuery,
    },
    /// Print the true effect of a model
    Truth {
        #[command(flatten)]
        model: ModelQuery,
    },
    /// Estimate the effect from data and print a JSON report
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        query: GraphQuery,
        #[arg(long, default_value = "")]
        adjust: String,
        #[arg(long, value_enum, default_value = "onestep")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "cells")]
        family: FamilyArg,
        /// Quantile bins per continuous column for the linear family
        #[arg(long, default_value_t = crate::estimators::DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        astar: f64,
        /// Seed recorded in the report
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw a dataset from a model and write it as CSV
    Sample {
        #[arg(long)]
        scm: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo comparison of adjustment sets
    Simulate {
        #[command(flatten)]
        model: ModelQuery,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        /// Sets separated by `;`, names within a set by `,`
        #[arg(long)]
        adjust_sets: String,
        #[arg(long)]
        allow_invalid: bool,
        #[arg(long, value_enum, default_value = "onestep")]
        method: MethodArg,
        /// CSV output path
        #[arg(long)]
        out: PathBuf,
    },
    /// Test d-separation of X and Y given Z; exit 2 if connected
    Dsep {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "")]
        given: String,
    },
}

fn split_names(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Parses `"G1,G2;B1,G1,G2"` into sets; an empty segment is the empty set.
pub fn parse_set_list(g: &Dag, s: &str) -> Result<Vec<VertexSet>> {
    s.split(';').map(|part| g.set(&split_names(part))).collect()
}

fn graph_query(q: &GraphQuery, a: f64, a_star: f64) -> Result<(Dag, QuerySpec)> {
    let g = read_dag_file(&q.dag)?;
    let spec = QuerySpec::new(g.id(&q.exposure)?, g.id(&q.outcome)?, a, a_star)?;
    Ok((g, spec))
}

fn model_query(m: &ModelQuery) -> Result<(ScmSpec, QuerySpec)> {
    let spec = read_scm_file(&m.scm)?;
    let g = spec.scm.dag();
    let stored = spec.query;
    let pick = |flag: &Option<String>, stored: Option<_>, what: &str| -> Result<_> {
        match flag {
            Some(name) => g.id(name),
            None => stored.ok_or_else(|| {
                Error::Precondition(format!("no {what} given and none stored in the model file"))
            }),
        }
    };
    let q = QuerySpec::new(
        pick(&m.exposure, stored.map(|q| q.exposure), "exposure")?,
        pick(&m.outcome, stored.map(|q| q.outcome), "outcome")?,
        m.a.or(stored.map(|q| q.a)).unwrap_or(1.0),
        m.astar.or(stored.map(|q| q.a_star)).unwrap_or(0.0),
    )?;
    Ok((spec, q))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Check {
            query,
            adjust,
            literal_criterion2,
        } => {
            let (g, q) = graph_query(&query, 1.0, 0.0)?;
            let z = g.set(&split_names(&adjust))?;
            let report = check_vas_with(&g, &q, &z, CheckOptions { literal_criterion2 })?;
            writeln!(out, "{}", pretty(&report.to_json(&g)))?;
            Ok(if report.valid { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Enumerate { query, max_size } => {
            let (g, q) = graph_query(&query, 1.0, 0.0)?;
            let sets: Vec<_> = enumerate_vas(&g, &q, max_size)?
                .iter()
                .map(|a| json!({"adjustment": a.names(&g), "z1": g.set_names(&a.z1), "z2": g.set_names(&a.z2)}))
                .collect();
            writeln!(out, "{}", pretty(&sets))?;
            Ok(EXIT_OK)
        }
        Command::Oset { query } => {
            let (g, q) = graph_query(&query, 1.0, 0.0)?;
            let o = oset(&g, &q)?;
            if o.degenerate {
                writeln!(
                    err,
                    "note: {} is not an ancestor of {}; the effect is zero",
                    query.exposure, query.outcome
                )?;
            }
            for name in g.set_names(&o.set) {
                writeln!(out, "{name}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Truth { model } => {
            let (spec, q) = model_query(&model)?;
            writeln!(out, "{}", spec.scm.true_wcde(&q)?)?;
            Ok(EXIT_OK)
        }
        Command::Estimate {
            data,
            query,
            adjust,
            method,
            family,
            bins,
            a,
            astar,
            seed,
        } => {
            let (g, q) = graph_query(&query, a, astar)?;
            let mut ds = Dataset::read_csv(File::open(&data)?)?;
            ds.seed = seed;
            let adj = split_adjustment(&g, &q, &g.set(&split_names(&adjust))?)?;
            if !check_vas_with(&g, &q, &adj.z, CheckOptions::default())?.valid {
                writeln!(
                    err,
                    "warning: {} is not a valid adjustment set",
                    adj.label(&g)
                )?;
            }
            let family = match family {
                FamilyArg::Cells => Family::DiscreteCells,
                FamilyArg::Linear => Family::LinearBasis(LinearOptions {
                    bins,
                    ..LinearOptions::default()
                }),
            };
            let report = estimate(&ds, &g, &q, &adj, family, method.into())?;
            writeln!(out, "{}", pretty(&report))?;
            Ok(EXIT_OK)
        }
        Command::Sample {
            scm,
            n,
            seed,
            out: path,
        } => {
            let spec = read_scm_file(&scm)?;
            let ds = spec.scm.sample(n, seed)?;
            ds.write_csv(BufWriter::new(File::create(&path)?))?;
            writeln!(err, "wrote {n} rows to {}", path.display())?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            model,
            n,
            reps,
            seed,
            adjust_sets,
            allow_invalid,
            method,
            out: path,
        } => {
            let (spec, q) = model_query(&model)?;
            let sets = parse_set_list(spec.scm.dag(), &adjust_sets)?;
            let mut cfg = ExperimentConfig::new(spec.scm, q, sets, n, reps, seed);
            cfg.allow_invalid = allow_invalid;
            cfg.method = method.into();
            let table = run_replications(&cfg)?;
            table.write_csv(BufWriter::new(File::create(&path)?))?;
            let truth = cfg.scm.true_wcde(&cfg.q).ok();
            let summary = json!({
                "truth": truth,
                "n": n,
                "reps": reps,
                "seed": seed,
                "method": cfg.method,
                "rows": table.rows,
            });
            writeln!(out, "{}", pretty(&summary))?;
            Ok(EXIT_OK)
        }
        Command::Dsep { dag, x, y, given } => {
            let g = read_dag_file(&dag)?;
            let (xs, ys, zs) = (
                g.set(&split_names(&x))?,
                g.set(&split_names(&y))?,
                g.set(&split_names(&given))?,
            );
            if is_d_separated(&g, &xs, &ys, &zs)? {
                writeln!(out, "separated")?;
                Ok(EXIT_OK)
            } else {
                let path = first_open_path(&g, &xs, &ys, &zs).ok().flatten();
                match path {
                    Some(p) => writeln!(out, "connected via {}", p.render(&g))?,
                    None => writeln!(out, "connected")?,
                }
                Ok(EXIT_NEGATIVE)
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
