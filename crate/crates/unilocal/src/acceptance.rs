//! The ten acceptance checks, runnable from tests and from the command line.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselib::{
    layered_coloring, linial, linial_palette, luby_trunc, mis_from_linial, never, path_specialist, CliqueSpecialist, Luby,
};
use crate::bounds::{AscFn, BoundFn};
use crate::config::{Configuration, Value};
use crate::graph::{all_graphs, generate, induced_subgraph_with_map, product_graph, Family, Graph, GraphParam};
use crate::problems::Problem;
use crate::pruning::{all_binary, certify_pruning, random_mm_labels, CertifyOptions, MmPruner, RulingPruner};
use crate::runtime::demo::{FloodMax, RandomFlood, StaggeredStop};
use crate::runtime::{
    restrict, run_plan_barrier, run_sync, run_sync_with, Fault, Msg, NodeCtx, NodeProgram, NodeState, PhaseSpec, RunError,
    RunOptions, Schedule, SequenceProgram, SequentialPlan,
};
use crate::transformer::{dominate_uniformize, min_combine, uniformize_det, uniformize_lv, Flavor, ParamDomination, TransformOptions};

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    /// Time budget in seconds; exceeding it fails the criterion.
    pub budget: f64,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} criterion {:>2} {} ({:.1}s): {}", self.id, self.title, self.seconds, self.detail)
    }
}

pub const TITLES: [(&str, f64); 10] = [
    ("pruning certification", 300.0),
    ("product-graph correspondence", 300.0),
    ("deterministic uniform MIS", 600.0),
    ("Monte-Carlo uniform MIS", 900.0),
    ("weak domination", 600.0),
    ("min-combiner", 300.0),
    ("layered coloring", 900.0),
    ("set-sequence laws", 120.0),
    ("runtime laws", 300.0),
    ("adversarial base", 300.0),
];

/// Criteria that fail for a reason inherent to the construction, not a defect.
pub const KNOWN_GAPS: [(u8, &str); 1] = [(
    7,
    "rounds are a step function of the largest identity: once identities outgrow the small \
     early guesses, the list-coloring schedule needs one more doubling iteration (about 9 \
     extra rounds). Between n = 64 and 512 that step is crossed; beyond it rounds stay flat.",
)];

pub fn run(id: u8) -> Outcome {
    let (title, budget) = TITLES[id as usize - 1];
    let start = Instant::now();
    let res = match id {
        1 => pruning_certification(),
        2 => product_correspondence(),
        3 => deterministic_pipeline(),
        4 => monte_carlo_pipeline(),
        5 => weak_domination(),
        6 => min_combiner(),
        7 => layered(),
        8 => set_sequence_laws(),
        9 => runtime_laws(),
        10 => adversarial(),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds > budget {
        detail = format!("over the {budget}s budget; {detail}");
    }
    Outcome { id, title, passed: ok && seconds <= budget, seconds, budget, detail }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=10).map(run).collect()
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plain(f: &Family, seed: u64) -> Configuration {
    Configuration::plain(generate(f, seed).expect("valid family"))
}

fn small_corpus(max_n: usize) -> Vec<Configuration> {
    (1..=max_n).flat_map(all_graphs).map(Configuration::plain).collect()
}

fn pruning_certification() -> Check {
    let corpus = small_corpus(5);
    let opts = CertifyOptions::default();
    let mut lines = Vec::new();
    for beta in 1..=3 {
        let r = certify_pruning(&RulingPruner { beta }, &corpus, &mut |c| all_binary(c.n()), &opts).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("ruling{beta}: {:?}", r.violations.first()))?;
        lines.push(format!("ruling{beta} {} outputs", r.instances));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = certify_pruning(&MmPruner, &corpus, &mut |c| (0..500).map(|_| random_mm_labels(c, &mut rng)).collect(), &opts)
        .map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("mm: {:?}", r.violations.first()))?;
    lines.push(format!("mm {} outputs", r.instances));
    Ok(format!("{}; zero violations", lines.join(", ")))
}

/// Bitmask adjacency of the product graph, with clique ranges per node.
struct Product {
    adj: Vec<u64>,
    start: Vec<usize>,
    size: Vec<usize>,
}

fn product_masks(g: &Graph) -> Product {
    let (pg, map) = product_graph(g);
    let mut start = vec![usize::MAX; g.n()];
    let mut size = vec![0; g.n()];
    for (k, &(u, _)) in map.iter().enumerate() {
        start[u] = start[u].min(k);
        size[u] += 1;
    }
    let adj = (0..pg.n()).map(|k| pg.neighbors(k).iter().fold(0u64, |m, &j| m | 1 << j)).collect();
    Product { adj, start, size }
}

/// Maximal independent sets of the product, as one choice per clique (0 = none).
fn product_mis(p: &Product, u: usize, chosen: u64, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if u == p.start.len() {
        let all = p.adj.len();
        let dominated = (0..all).all(|k| chosen >> k & 1 == 1 || p.adj[k] & chosen != 0);
        if dominated {
            out.push(pick.clone());
        }
        return;
    }
    for i in 0..=p.size[u] {
        let mut next = chosen;
        if i > 0 {
            let k = p.start[u] + i - 1;
            if p.adj[k] & chosen != 0 {
                continue;
            }
            next |= 1 << k;
        }
        pick.push(i);
        product_mis(p, u + 1, next, pick, out);
        pick.pop();
    }
}

fn count_colorings(g: &Graph, v: usize, col: &mut Vec<usize>) -> u64 {
    if v == g.n() {
        return 1;
    }
    let mut total = 0;
    for c in 1..=g.degree(v) + 1 {
        if g.neighbors(v).iter().all(|&w| w >= v || col[w] != c) {
            col[v] = c;
            total += count_colorings(g, v + 1, col);
        }
    }
    total
}

fn product_correspondence() -> Check {
    let mut graphs = 0;
    let mut pairs = 0u64;
    for n in 1..=6 {
        for g in all_graphs(n) {
            graphs += 1;
            let p = product_masks(&g);
            let mut sets = Vec::new();
            product_mis(&p, 0, 0, &mut Vec::new(), &mut sets);
            for pick in &sets {
                ensure(pick.iter().all(|&i| i > 0), || format!("MIS misses a clique on {}", g.to_edge_list()))?;
                let proper = g.edges().into_iter().all(|(u, v)| pick[u] != pick[v]);
                ensure(proper, || format!("read-back not proper on {}", g.to_edge_list()))?;
            }
            let colorings = count_colorings(&g, 0, &mut vec![0; g.n()]);
            ensure(colorings == sets.len() as u64, || {
                format!("{} product MIS vs {colorings} colorings on {}", sets.len(), g.to_edge_list())
            })?;
            pairs += colorings;
        }
    }
    Ok(format!("{graphs} graphs, {pairs} MIS/coloring pairs matched one to one"))
}

fn ladder_families(n: usize) -> Vec<Family> {
    vec![
        Family::Cycle { n },
        Family::Path { n },
        Family::Gnp { n, p: 4.0 / n as f64 },
        Family::Regular { n, d: 4 },
    ]
}

const LADDER: [usize; 5] = [16, 32, 64, 128, 256];

fn verify(problem: &Problem, c: &Configuration, y: &[Value]) -> Result<(), String> {
    match problem.verify(c, y) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("invalid {} output on {}", problem.name(), c.graph.to_edge_list())),
        Err(e) => Err(e.to_string()),
    }
}

fn deterministic_pipeline() -> Check {
    let a = mis_from_linial();
    let u = uniformize_det(&a, &RulingPruner { beta: 1 }, &[], &TransformOptions::default()).map_err(|e| e.to_string())?;
    let mut per_size = Vec::new();
    for n in LADDER {
        let mut ratios = Vec::new();
        for f in ladder_families(n) {
            for seed in 0..3 {
                let c = plain(&f, seed);
                let (y, rep) = run_sync(&*u.program, &c, 10_000_000, seed).map_err(|e| e.to_string())?;
                verify(&Problem::MIS, &c, &y)?;
                ratios.push(rep.rounds_total as f64 / a.bound_at(&c.graph).unwrap() as f64);
            }
        }
        per_size.push(ratios.iter().sum::<f64>() / ratios.len() as f64);
    }
    let (lo, hi) = min_max(&per_size);
    let shown: Vec<String> = per_size.iter().map(|c| format!("{c:.2}")).collect();
    ensure(hi / lo <= 4.0, || format!("fitted C per size {shown:?}, ratio {:.2} > 4", hi / lo))?;
    Ok(format!("all valid; fitted C per size {shown:?}, max/min {:.2}", hi / lo))
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)))
}

fn monte_carlo_pipeline() -> Check {
    let u = uniformize_lv(&luby_trunc(), &RulingPruner { beta: 1 }, &[], &TransformOptions::default()).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    let mut unfinished = 0;
    for n in [32usize, 64, 128] {
        let p = 2.0 * (n as f64).ln() / n as f64;
        let mut rounds = Vec::new();
        for seed in 0..30 {
            let c = plain(&Family::Gnp { n, p }, seed);
            match run_sync(&*u.program, &c, 10_000_000, seed) {
                Ok((y, rep)) => {
                    verify(&Problem::MIS, &c, &y)?;
                    rounds.push(rep.rounds_total as f64);
                }
                Err(RunError::Fault { fault: Fault::ScheduleExhausted { .. }, .. }) => unfinished += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
        means.push(rounds.iter().sum::<f64>() / rounds.len().max(1) as f64);
    }
    let monotone = means.windows(2).all(|w| w[0] <= w[1]);
    let growth = means[2] / means[0];
    let cap = 3.0 * (128f64.log2() / 32f64.log2());
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
    ensure(monotone && growth <= cap, || format!("mean rounds {shown:?}, growth {growth:.2} (cap {cap:.2})"))?;
    Ok(format!("terminating runs all valid ({unfinished} hit the ceiling); mean rounds {shown:?}, growth {growth:.2} <= {cap:.2}"))
}

fn weak_domination() -> Check {
    let a = mis_from_linial().with_bound(vec![GraphParam::MaxId], BoundFn::Additive(vec!["linial+logstar+3".parse().expect("literal")]));
    let dom = ParamDomination { param: GraphParam::MaxDegree, by: GraphParam::MaxId, g: AscFn::id() };
    let u = dominate_uniformize(&a, &RulingPruner { beta: 1 }, &[dom], &TransformOptions::default()).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for n in LADDER {
        for f in ladder_families(n) {
            for seed in 0..3 {
                let c = plain(&f, seed);
                let (y, _) = run_sync(&*u.program, &c, 10_000_000, seed).map_err(|e| e.to_string())?;
                verify(&Problem::MIS, &c, &y)?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs, all valid"))
}

fn min_combiner() -> Check {
    let path = path_specialist();
    let clique: Arc<dyn NodeProgram> = Arc::new(CliqueSpecialist);
    let u = min_combine(vec![(path.clone(), "path".into()), (clique.clone(), "clique".into())], &RulingPruner { beta: 1 }, &TransformOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst: HashMap<&str, f64> = HashMap::new();
    for n in LADDER {
        for (name, f, alone) in [("path", Family::Path { n }, &path), ("clique", Family::Clique { n }, &clique)] {
            let c = plain(&f, 0);
            let (y0, solo) = run_sync(&**alone, &c, 1_000_000, 0).map_err(|e| e.to_string())?;
            verify(&Problem::MIS, &c, &y0)?;
            let (y, rep) = run_sync(&*u.program, &c, 10_000_000, 0).map_err(|e| e.to_string())?;
            verify(&Problem::MIS, &c, &y)?;
            let r = rep.rounds_total as f64 / solo.rounds_total.max(1) as f64;
            let w = worst.entry(name).or_insert(0.0);
            *w = w.max(r);
        }
    }
    let (p, q) = (worst["path"], worst["clique"]);
    ensure(p <= 8.0 && q <= 8.0, || format!("combined/specialist: paths {p:.2}, cliques {q:.2}"))?;
    Ok(format!("all valid; worst combined/specialist ratio: paths {p:.2}, cliques {q:.2}"))
}

fn layered() -> Check {
    let lay = layered_coloring(&linial(), Arc::new(linial_palette), &TransformOptions::default()).map_err(|e| e.to_string())?;
    let sizes = [32usize, 64, 128, 256, 512];
    let mut means = Vec::new();
    let mut worst_const: f64 = 0.0;
    for n in sizes {
        let mut rounds = Vec::new();
        for seed in 0..3 {
            let c = plain(&Family::Capped { n, p: 8.0 / n as f64, max_degree: 8 }, seed);
            let (y, rep) = run_sync(&*lay.program, &c, 10_000_000, seed).map_err(|e| e.to_string())?;
            verify(&Problem::Coloring { palette: None }, &c, &y)?;
            let top = y.iter().filter_map(Value::as_int).max().unwrap_or(0);
            let g = linial_palette(c.graph.max_degree().max(1) as u64);
            worst_const = worst_const.max(top as f64 / g as f64);
            rounds.push(rep.rounds_total as f64);
        }
        means.push(rounds.iter().sum::<f64>() / rounds.len() as f64);
    }
    let steps: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
    let summary = format!("all proper; palette <= {worst_const:.2} g(max degree); mean rounds for n = 32..512: {shown:?}");
    ensure(worst_const <= 8.0, || format!("palette reached {worst_const:.2} g(max degree)"))?;
    ensure(steps.iter().all(|&s| s <= 2.0), || format!("{summary}; a doubling added more than 2 rounds"))?;
    Ok(summary)
}

fn set_sequence_laws() -> Check {
    let shapes: Vec<BoundFn> = ["add(id, id)", "add(sq, logstar)", "prod(xlog, id)"].iter().map(|s| s.parse().expect("literal")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0u64;
    for f in &shapes {
        let c = f.bounding_constant();
        for e in 1..=12 {
            let i = 1u64 << e;
            let s = f.set_sequence(i);
            for x in &s.vectors {
                ensure(f.eval(x) <= c * i, || format!("{f}: {x:?} evaluates above {c}*{i}"))?;
            }
            let mut found = 0;
            let mut tries = 0;
            while found < 500 && tries < 200_000 {
                tries += 1;
                let a: Vec<u64> = (0..f.arity()).map(|_| 1 + sample_log_uniform(&mut rng, i)).collect();
                if f.eval(&a) > i {
                    continue;
                }
                found += 1;
                checked += 1;
                let dominated = s.vectors.iter().any(|x| x.iter().zip(&a).all(|(p, q)| p >= q));
                ensure(dominated, || format!("{f}: {a:?} with value <= {i} not dominated"))?;
            }
        }
    }
    Ok(format!("{checked} vectors, zero violations"))
}

/// Mostly small values, occasionally up to `hi`.
fn sample_log_uniform(rng: &mut ChaCha8Rng, hi: u64) -> u64 {
    let bits = rng.gen_range(0..=hi.ilog2());
    rng.gen_range(0..=(1u64 << bits))
}

/// Random 2-3 phase composition over a pool of flooding and random programs.
fn random_composition(rng: &mut ChaCha8Rng) -> Arc<SequentialPlan> {
    let k = rng.gen_range(2..=3);
    let phases = (0..k)
        .map(|j| {
            let p: Arc<dyn NodeProgram> = match rng.gen_range(0..5) {
                0 => Arc::new(FloodMax { rounds: rng.gen_range(0..4) }),
                1 => Arc::new(StaggeredStop { spread: rng.gen_range(1..5) }),
                2 => Arc::new(RandomFlood { max_rounds: rng.gen_range(0..5) }),
                3 => Arc::new(Luby { iterations: Some(rng.gen_range(1..4)) }),
                _ => restrict(Arc::new(RandomFlood { max_rounds: 8 }), rng.gen_range(0..4)),
            };
            PhaseSpec::new(p, format!("p{j}"))
        })
        .collect();
    Arc::new(SequentialPlan { phases, tagger: None })
}

fn runtime_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for run in 0..200u64 {
        let n = rng.gen_range(1..16);
        let c = plain(&Family::Gnp { n, p: rng.gen_range(0.1..0.5) }, run);
        let plan = random_composition(&mut rng);
        let prog: Arc<dyn NodeProgram> = Arc::new(SequenceProgram::new(plan.clone()));
        let (y, rep) = run_sync(&*prog, &c, 100_000, run).map_err(|e| e.to_string())?;

        // sequential composition: no more than the phases run back to back
        let b = run_plan_barrier(&*plan, &c, run, "", 100_000).map_err(|e| e.to_string())?;
        let sum: usize = b.phases.iter().map(|p| p.rounds).sum();
        ensure(rep.rounds_total <= sum, || format!("run {run}: {} rounds > phase sum {sum}", rep.rounds_total))?;
        ensure(b.outputs == y, || format!("run {run}: barrier outputs differ"))?;

        // restriction
        let t = rng.gen_range(0..6);
        let (yr, rr) = run_sync(&*restrict(prog.clone(), t), &c, 100_000, run).map_err(|e| e.to_string())?;
        ensure(rr.rounds_total <= t, || format!("run {run}: restrict({t}) took {}", rr.rounds_total))?;
        for v in 0..n {
            if rep.termination_round[v] <= t {
                ensure(yr[v] == y[v], || format!("run {run}: restriction changed an early output"))?;
            } else {
                ensure(yr[v] == Value::zero(), || format!("run {run}: cut node did not default"))?;
            }
        }

        // locality: the output at v is a function of the ball one past its running time
        let v = rng.gen_range(0..n);
        let r = rep.termination_round[v] + 1;
        let ball = c.graph.ball(v, r);
        let (sub, map) = induced_subgraph_with_map(&c.graph, &ball);
        let (ys, _) = run_sync(&*prog, &Configuration::plain(sub), 100_000, run).map_err(|e| e.to_string())?;
        let at = map.iter().position(|&w| w == v).expect("center is in its ball");
        ensure(ys[at] == y[v], || format!("run {run}: output at node {v} depends on data beyond radius {r}"))?;

        // scheduling
        for schedule in [Schedule::Reversed, Schedule::Shuffled(run)] {
            let opts = RunOptions { schedule, ..RunOptions::default() };
            let (yo, ro) = run_sync_with(&*prog, &c, 100_000, run, opts).map_err(|e| e.to_string())?;
            ensure(yo == y && ro.termination_round == rep.termination_round, || format!("run {run}: {schedule:?} changed the run"))?;
        }
    }
    Ok("200 composed runs: composition bound, restriction, locality and scheduling all hold".into())
}

/// Emits 0, 1 or 2 at random rounds.
struct Garbage;

struct GarbageState(ChaCha8Rng);

impl NodeProgram for Garbage {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(GarbageState(ctx.rng()))
    }
}

impl NodeState for GarbageState {
    fn step(&mut self, _: usize, _: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        for o in outbox.iter_mut() {
            *o = Some(vec![self.0.gen()]);
        }
        Ok(self.0.gen_bool(0.3).then(|| Value::Int(self.0.gen_range(0..3))))
    }
}

fn adversarial() -> Check {
    let mut a = never();
    a.name = "garbage".into();
    a.factory = Arc::new(|_: &[u64]| Arc::new(Garbage) as Arc<dyn NodeProgram>);
    let opts = TransformOptions { ceiling: 1 << 10, ..TransformOptions::default() };
    let det = uniformize_det(&a, &RulingPruner { beta: 1 }, &[], &opts).map_err(|e| e.to_string())?;
    a.flavor = Flavor::MonteCarlo { rho: 0.5 };
    let lv = uniformize_lv(&a, &RulingPruner { beta: 1 }, &[], &opts).map_err(|e| e.to_string())?;
    let (mut solved, mut ceiling) = (0, 0);
    for (k, u) in [det, lv].iter().enumerate() {
        for seed in 0..25u64 {
            let c = plain(&Family::Gnp { n: 12 + seed as usize, p: 0.25 }, seed + 100 * k as u64);
            match run_sync(&*u.program, &c, 10_000_000, seed) {
                Ok((y, _)) => {
                    verify(&Problem::MIS, &c, &y)?;
                    solved += 1;
                }
                Err(RunError::Fault { fault: Fault::ScheduleExhausted { .. }, .. }) => ceiling += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(format!("50 runs: {solved} valid, {ceiling} stopped at the ceiling, none wrong"))
}

