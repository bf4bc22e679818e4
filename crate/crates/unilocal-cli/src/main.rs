mod run;
mod spec;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unilocal::acceptance;
use unilocal::baselib::BASE_NAMES;
use unilocal::config::Configuration;
use unilocal::graph::all_graphs;
use unilocal::problems::{Problem, ORACLE_CAP};
use unilocal::pruning::{
    all_binary, certify_pruning, pruner_by_name, random_mm_labels, random_slc_instance, random_slc_output, CertifyOptions,
    PRUNER_NAMES,
};

/// Exit code when some run produced an invalid output or a pruner violated a property.
const EXIT_INVALID: u8 = 2;
/// Exit code when some run stopped at the schedule ceiling.
const EXIT_CEILING: u8 = 3;

#[derive(Parser)]
#[command(name = "unilocal", version, about = "Run and check uniform LOCAL algorithms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment spec over its size ladder.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed count.
        #[arg(long)]
        seeds: Option<u64>,
        /// Drops ladder sizes above this.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        parallel: bool,
    },
    /// Check a pruner's properties exhaustively on small graphs.
    Certify {
        #[arg(long)]
        pruner: String,
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        /// Random tentative outputs per graph (matching and list coloring).
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Also run the node program and compare.
        #[arg(long)]
        distributed: bool,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate summary JSON files.
    Table {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Print registry names.
    List,
    /// Run the acceptance checks.
    Accept {
        #[arg(long)]
        criterion: Vec<u8>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Run { spec, out, seeds, max_n, parallel } => cmd_run(&spec, &out, seeds, max_n, parallel),
        Cmd::Certify { pruner, max_n, samples, distributed, out } => cmd_certify(&pruner, max_n, samples, distributed, out),
        Cmd::Table { reports, csv } => {
            print!("{}", table::render(&reports, csv)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::List => {
            println!("bases: {}", BASE_NAMES.join(" "));
            println!("uniform programs: {}", spec::UNIFORM_PROGRAMS.join(" "));
            println!("pruners: {} (and rulingK for any K >= 1)", PRUNER_NAMES.join(" "));
            println!("transformers: {}", spec::TRANSFORMERS.join(" "));
            println!("families: {}", spec::FAMILIES.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Accept { criterion } => {
            let ids: Vec<u8> = if criterion.is_empty() { (1..=10).collect() } else { criterion };
            if let Some(bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
                bail!("no criterion {bad}; criteria are 1 to 10");
            }
            let mut all = true;
            for id in ids {
                let o = acceptance::run(id);
                println!("{o}");
                all &= o.passed;
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn cmd_run(path: &std::path::Path, out: &std::path::Path, seeds: Option<u64>, max_n: Option<usize>, parallel: bool) -> Result<ExitCode> {
    let mut s = spec::load(path)?;
    if let Some(k) = seeds {
        s.seeds = k;
    }
    let exp = spec::build(s)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let o = run::run(&exp, max_n, parallel)?;
    let name = &exp.spec.name;
    run::write_csv(&out.join(format!("{name}.csv")), &o.records)?;
    let json = out.join(format!("{name}.json"));
    std::fs::write(&json, serde_json::to_string_pretty(&o.summary)? + "\n").with_context(|| format!("writing {}", json.display()))?;
    let sm = &o.summary;
    println!("{name}: {} runs, {} invalid, {} at the ceiling", sm.runs, sm.invalid, sm.ceiling_hits);
    if let Some(cex) = &o.counterexample {
        let p = out.join(format!("{name}.counterexample.txt"));
        std::fs::write(&p, cex)?;
        eprintln!("invalid output; first counterexample in {}", p.display());
    }
    Ok(if sm.invalid > 0 {
        ExitCode::from(EXIT_INVALID)
    } else if sm.ceiling_hits > 0 {
        ExitCode::from(EXIT_CEILING)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_certify(name: &str, max_n: usize, samples: usize, distributed: bool, out: Option<PathBuf>) -> Result<ExitCode> {
    if max_n > ORACLE_CAP {
        bail!("--max-n {max_n} is above the oracle cap {ORACLE_CAP}");
    }
    let p = pruner_by_name(name).with_context(|| format!("unknown pruner {name}; known: {}", PRUNER_NAMES.join(", ")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let plain = || (1..=max_n).flat_map(all_graphs).map(Configuration::plain).collect::<Vec<_>>();
    let opts = CertifyOptions { distributed, ..CertifyOptions::default() };
    let report = match p.problem() {
        Problem::Ruling { .. } => certify_pruning(&*p, &plain(), &mut |c| all_binary(c.n()), &opts)?,
        Problem::Mm => certify_pruning(&*p, &plain(), &mut |c| (0..samples).map(|_| random_mm_labels(c, &mut rng)).collect(), &opts)?,
        Problem::Slc => {
            let mut r2 = ChaCha8Rng::seed_from_u64(1);
            let corpus: Vec<Configuration> = (1..=max_n).flat_map(|n| (0..samples).map(move |_| n)).map(|n| random_slc_instance(&mut r2, n)).collect();
            certify_pruning(&*p, &corpus, &mut |c| vec![random_slc_output(&mut rng, c)], &opts)?
        }
        Problem::Coloring { .. } => bail!("no pruner certifies plain coloring"),
    };
    println!(
        "{}: {} instances, {} glued solutions, {} violations",
        report.pruner,
        report.instances,
        report.glued_solutions,
        report.violations.len()
    );
    if let Some(v) = report.violations.first() {
        println!("first violation: {} on ids {:?} edges {:?}: {}", v.property, v.ids, v.edges, v.detail);
    }
    if let Some(path) = out {
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
}
