//! Running an experiment over its size ladder.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unilocal::config::{Configuration, Value};
use unilocal::graph::generate;
use unilocal::problems::Problem;
use unilocal::runtime::{run_sync, Fault, RunError, RunReport};

use crate::spec::{Built, Experiment};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invalid,
    /// The schedule ran out before the ceiling.
    Ceiling,
    /// Some node was still running at the round cap.
    RoundCap,
}

#[derive(Clone, Debug)]
pub struct Record {
    pub family: String,
    /// Ladder size; `n` is the node count actually generated (grids round down).
    pub size: usize,
    pub n: usize,
    pub seed: u64,
    pub status: Status,
    pub rounds: usize,
    pub iterations: u32,
    pub messages: u64,
    pub valid: bool,
    /// Largest color used, for coloring problems.
    pub palette: Option<u64>,
    /// Declared bound at the exact parameters, if there is a reference base.
    pub bound: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub runs: usize,
    pub mean_rounds: f64,
    pub max_rounds: usize,
    pub mean_iterations: f64,
    /// Mean of rounds / bound.
    pub fitted_c: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub problem: String,
    pub base: String,
    pub transformer: String,
    pub family: String,
    pub runs: usize,
    pub invalid: usize,
    pub ceiling_hits: usize,
    pub per_size: Vec<SizeSummary>,
    /// Mean of the per-size fitted C.
    pub fitted_c: Option<f64>,
    /// Largest over smallest fitted C across sizes.
    pub fitted_c_spread: Option<f64>,
}

pub struct Outcome {
    pub records: Vec<Record>,
    pub summary: Summary,
    /// Text dump of the first invalid run.
    pub counterexample: Option<String>,
}

fn largest_color(problem: &Problem, y: &[Value]) -> Option<u64> {
    matches!(problem, Problem::Coloring { .. }).then(|| y.iter().filter_map(Value::as_int).max().unwrap_or(0))
}

fn dump(c: &Configuration, y: &[Value], seed: u64) -> String {
    let mut s = format!("# seed {seed}\n# edge list\n{}\n# outputs (id value)\n", c.graph.to_edge_list());
    for (v, val) in y.iter().enumerate() {
        let _ = writeln!(s, "{} {val}", c.graph.id(v));
    }
    s
}

fn one(exp: &Experiment, n: usize, seed: u64) -> Result<(Record, Option<String>)> {
    let fam = exp.spec.family.at(n)?;
    let c = Configuration::plain(generate(&fam, seed).with_context(|| format!("generating {} at n={n}", exp.spec.family.kind))?);
    let bound = exp.reference().and_then(|a| a.bound_at(&c.graph));
    let mut rec = Record {
        family: exp.spec.family.kind.clone(),
        size: n,
        n: c.n(),
        seed,
        status: Status::Ok,
        rounds: 0,
        iterations: 0,
        messages: 0,
        valid: false,
        palette: None,
        bound,
    };
    let direct;
    let program = match &exp.built {
        Built::Uniform { uniform, .. } => &uniform.program,
        Built::Direct(a) => {
            direct = a.program(&a.true_guesses(&c.graph).context("parameter not computable on this graph")?);
            &direct
        }
        Built::Plain(p) => p,
    };
    let (y, report): (Vec<Value>, RunReport) = match run_sync(&**program, &c, exp.spec.round_cap, seed) {
        Ok(r) => r,
        Err(RunError::Fault { fault: Fault::ScheduleExhausted { .. }, round, .. }) => {
            rec.status = Status::Ceiling;
            rec.rounds = round;
            return Ok((rec, None));
        }
        Err(e) => return Err(e).with_context(|| format!("n={n} seed={seed}")),
    };
    rec.rounds = report.rounds_total;
    rec.messages = report.messages_sent;
    if let Built::Uniform { uniform, .. } = &exp.built {
        rec.iterations = uniform.iterations(&report);
    }
    rec.valid = exp.problem.verify(&c, &y)?;
    rec.palette = largest_color(&exp.problem, &y);
    rec.status = if report.forced.iter().any(|&f| f) {
        Status::RoundCap
    } else if rec.valid {
        Status::Ok
    } else {
        Status::Invalid
    };
    let cex = (!rec.valid).then(|| dump(&c, &y, seed));
    Ok((rec, cex))
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| s / k as f64)
}

fn summarize(exp: &Experiment, sizes: &[usize], records: &[Record]) -> Summary {
    let per_size: Vec<SizeSummary> = sizes
        .iter()
        .map(|&n| {
            let rs: Vec<&Record> = records.iter().filter(|r| r.size == n).collect();
            SizeSummary {
                n,
                runs: rs.len(),
                mean_rounds: mean(rs.iter().map(|r| r.rounds as f64)).unwrap_or(0.0),
                max_rounds: rs.iter().map(|r| r.rounds).max().unwrap_or(0),
                mean_iterations: mean(rs.iter().map(|r| r.iterations as f64)).unwrap_or(0.0),
                fitted_c: mean(rs.iter().filter_map(|r| Some(r.rounds as f64 / r.bound?.max(1) as f64))),
            }
        })
        .collect();
    let cs: Vec<f64> = per_size.iter().filter_map(|s| s.fitted_c).filter(|&c| c > 0.0).collect();
    let spread = (!cs.is_empty()).then(|| cs.iter().cloned().fold(f64::MIN, f64::max) / cs.iter().cloned().fold(f64::MAX, f64::min));
    Summary {
        name: exp.spec.name.clone(),
        problem: exp.problem.name(),
        base: exp.spec.base.clone().unwrap_or_else(|| exp.spec.programs.join("+")),
        transformer: exp.spec.transformer.clone(),
        family: exp.spec.family.kind.clone(),
        runs: records.len(),
        invalid: records.iter().filter(|r| matches!(r.status, Status::Invalid | Status::RoundCap)).count(),
        ceiling_hits: records.iter().filter(|r| r.status == Status::Ceiling).count(),
        fitted_c: mean(cs.iter().copied()),
        per_size,
        fitted_c_spread: spread,
    }
}

pub fn run(exp: &Experiment, max_n: Option<usize>, parallel: bool) -> Result<Outcome> {
    let sizes: Vec<usize> = exp.spec.sizes.iter().copied().filter(|&n| max_n.is_none_or(|m| n <= m)).collect();
    let jobs: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| (0..exp.spec.seeds).map(move |s| (n, s))).collect();
    let results: Vec<Result<(Record, Option<String>)>> = if parallel {
        jobs.par_iter().map(|&(n, s)| one(exp, n, s)).collect()
    } else {
        jobs.iter().map(|&(n, s)| one(exp, n, s)).collect()
    };
    let mut records = Vec::with_capacity(results.len());
    let mut counterexample = None;
    for r in results {
        let (rec, cex) = r?;
        if counterexample.is_none() {
            counterexample = cex;
        }
        records.push(rec);
    }
    let summary = summarize(exp, &sizes, &records);
    Ok(Outcome { records, summary, counterexample })
}

pub fn write_csv(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["family", "n", "seed", "rounds", "iterations", "messages", "valid", "palette"])?;
    for r in records {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.rounds.to_string(),
            r.iterations.to_string(),
            r.messages.to_string(),
            r.valid.to_string(),
            r.palette.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
