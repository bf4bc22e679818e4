//! Turning guess-dependent algorithms into uniform ones by alternating
//! restricted runs with pruning.

use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{dominated_lift, AscFn, BoundFn, Domination, LiftedBound, Rounding};
use crate::config::{Input, Value};
use crate::graph::{Graph, GraphParam};
use crate::problems::Problem;
use crate::pruning::PruningAlgorithm;
use crate::runtime::{restrict, After, NodeProgram, PhasePlan, PhaseSpec, RunReport, SequenceProgram};

/// Builds the program for one vector of guesses (ordered like `params`).
pub type Factory = Arc<dyn Fn(&[u64]) -> Arc<dyn NodeProgram> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Flavor {
    Deterministic,
    /// Correct within the declared time with probability at least `rho`.
    MonteCarlo { rho: f64 },
}

/// An algorithm that needs a shared guess for each parameter in `params`.
/// Its running time under good guesses is at most `bound` evaluated at the
/// guesses for `bound_params`.
#[derive(Clone)]
pub struct NonUniform {
    pub name: String,
    pub problem: Problem,
    pub params: Vec<GraphParam>,
    pub bound_params: Vec<GraphParam>,
    pub bound: BoundFn,
    pub flavor: Flavor,
    pub factory: Factory,
}

impl NonUniform {
    pub fn program(&self, guesses: &[u64]) -> Arc<dyn NodeProgram> {
        (self.factory)(guesses)
    }

    /// Same algorithm with its running time expressed over other parameters.
    pub fn with_bound(mut self, bound_params: Vec<GraphParam>, bound: BoundFn) -> Self {
        self.bound_params = bound_params;
        self.bound = bound;
        self
    }

    /// The exact parameter values of `g`, in `params` order.
    pub fn true_guesses(&self, g: &Graph) -> Option<Vec<u64>> {
        self.params.iter().map(|p| p.eval(g).map(|x| x.max(1))).collect()
    }

    /// Bound value at the exact parameters of `g`.
    pub fn bound_at(&self, g: &Graph) -> Option<u64> {
        let x: Option<Vec<u64>> = self.bound_params.iter().map(|p| p.eval(g).map(|x| x.max(1))).collect();
        Some(self.bound.eval(&x?))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("bound takes {bound} arguments but {params} bound parameters are listed")]
    Arity { bound: usize, params: usize },
    #[error("parameter {0} is neither bounded nor dominated")]
    MissingDomination(&'static str),
    #[error("dominating parameter {0} is not a bound parameter")]
    BadTarget(&'static str),
    #[error("success guarantee {0} must lie strictly between 0 and 1")]
    Guarantee(f64),
    #[error("nothing to combine")]
    Empty,
}

/// `param <= g(by)` on every instance of interest.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamDomination {
    pub param: GraphParam,
    pub by: GraphParam,
    pub g: AscFn,
}

#[derive(Clone, Debug)]
pub struct TransformOptions {
    /// Schedules stop before the first run longer than this.
    pub ceiling: u64,
    pub rounding: Rounding,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { ceiling: 1 << 20, rounding: Rounding::Down }
    }
}

/// Guess vectors for a budget, read off a (possibly lifted) set-sequence.
#[derive(Clone, Debug)]
pub struct GuessPlan {
    pub lifted: LiftedBound,
    /// Coordinates of the lifted set-sequence: bound parameters, then dominated ones.
    pub coords: Vec<GraphParam>,
    gamma: Vec<usize>,
}

impl GuessPlan {
    pub fn new(a: &NonUniform, doms: &[ParamDomination], rounding: Rounding) -> Result<Self, TransformError> {
        if a.bound.arity() != a.bound_params.len() {
            return Err(TransformError::Arity { bound: a.bound.arity(), params: a.bound_params.len() });
        }
        let mut coords = a.bound_params.clone();
        let mut dominations = Vec::new();
        for d in doms {
            let target = a.bound_params.iter().position(|&p| p == d.by).ok_or(TransformError::BadTarget(d.by.name()))?;
            coords.push(d.param);
            dominations.push(Domination { target, g: d.g.clone() });
        }
        let gamma = a
            .params
            .iter()
            .map(|p| coords.iter().position(|c| c == p).ok_or(TransformError::MissingDomination(p.name())))
            .collect::<Result<_, _>>()?;
        Ok(GuessPlan { lifted: dominated_lift(a.bound.clone(), dominations, rounding), coords, gamma })
    }

    pub fn bounding_constant(&self) -> u64 {
        self.lifted.base.bounding_constant()
    }

    /// Guess vectors (in the algorithm's parameter order) for budget `i`.
    pub fn guesses(&self, i: u64) -> Vec<Vec<u64>> {
        self.lifted
            .set_sequence(i)
            .vectors
            .iter()
            .map(|x| self.gamma.iter().map(|&k| x[k]).collect())
            .collect()
    }
}

type SlotMaker = Box<dyn Fn(&Slot) -> Arc<dyn NodeProgram> + Send + Sync>;

/// One restricted run in an alternating schedule, followed by pruning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub iteration: u32,
    /// Replayed iteration (Las Vegas schedule) or program index (min-combiner).
    pub inner: u32,
    pub index: usize,
    pub guesses: Vec<u64>,
    pub rounds: u64,
    pub label: String,
}

struct AlternatingPlan {
    slots: Arc<Vec<Slot>>,
    make: SlotMaker,
    cache: Vec<OnceLock<Arc<dyn NodeProgram>>>,
    pruner: Arc<dyn NodeProgram>,
}

impl PhasePlan for AlternatingPlan {
    fn phase(&self, k: usize) -> Option<PhaseSpec> {
        let slot = self.slots.get(k / 2)?;
        if k % 2 == 1 {
            return Some(PhaseSpec::new(self.pruner.clone(), format!("{}p", slot.label)));
        }
        let prog = self.cache[k / 2].get_or_init(|| restrict((self.make)(slot), slot.rounds as usize));
        Some(PhaseSpec::new(prog.clone(), slot.label.clone()))
    }

    fn after(&self, k: usize, input: &Input, output: Value) -> After {
        if k.is_multiple_of(2) {
            return After::Continue(Input { carried: Some(output), ..input.clone() });
        }
        let mut next = Input { carried: None, ..input.clone() };
        if let Value::Verdict { pruned, keep, strip } = output {
            if pruned {
                return After::Leave(*keep);
            }
            if let Some(list) = next.lists.as_mut() {
                for e in strip {
                    list.remove(e);
                }
            }
        }
        After::Continue(next)
    }

    fn may_leave(&self, k: usize) -> bool {
        k % 2 == 1
    }
}

/// A uniform program together with the schedule it walks through.
#[derive(Clone)]
pub struct Uniform {
    pub name: String,
    pub program: Arc<dyn NodeProgram>,
    pub plan: Arc<dyn PhasePlan>,
    pub slots: Arc<Vec<Slot>>,
}

impl Uniform {
    fn build(
        name: String,
        slots: Vec<Slot>,
        make: SlotMaker,
        pruner: &dyn PruningAlgorithm,
    ) -> Self {
        let slots = Arc::new(slots);
        let cache = (0..slots.len()).map(|_| OnceLock::new()).collect();
        let plan: Arc<dyn PhasePlan> = Arc::new(AlternatingPlan { slots: slots.clone(), make, cache, pruner: pruner.program() });
        Uniform { name, program: Arc::new(SequenceProgram::new(plan.clone())), plan, slots }
    }

    /// Slot of the last phase any node reached.
    pub fn last_slot(&self, report: &RunReport) -> Option<&Slot> {
        let k = report.phase_logs.iter().flatten().map(|r| r.index).max()?;
        self.slots.get(k / 2)
    }

    pub fn iterations(&self, report: &RunReport) -> u32 {
        self.last_slot(report).map_or(0, |s| s.iteration)
    }

    pub fn sub_iterations(&self, report: &RunReport) -> usize {
        report.phase_logs.iter().flatten().map(|r| r.index / 2 + 1).max().unwrap_or(0)
    }
}

fn guessed_maker(a: &NonUniform) -> SlotMaker {
    let factory = a.factory.clone();
    Box::new(move |s: &Slot| factory(&s.guesses))
}

fn budget_fits(c: u64, i: u32, ceiling: u64) -> bool {
    i < 63 && c.saturating_mul(1 << i) <= ceiling
}

/// Iteration `i` runs the algorithm once per guess vector for budget `2^i`,
/// each restricted to `c * 2^i` rounds and followed by pruning.
pub fn uniformize_det(
    a: &NonUniform,
    pruner: &dyn PruningAlgorithm,
    doms: &[ParamDomination],
    opts: &TransformOptions,
) -> Result<Uniform, TransformError> {
    let plan = GuessPlan::new(a, doms, opts.rounding)?;
    let c = plan.bounding_constant();
    let mut slots = Vec::new();
    let mut i = 1;
    while budget_fits(c, i, opts.ceiling) {
        for (k, x) in plan.guesses(1 << i).into_iter().enumerate() {
            slots.push(Slot { iteration: i, inner: i, index: k, guesses: x, rounds: c << i, label: format!("i{i}k{k}") });
        }
        i += 1;
    }
    Ok(Uniform::build(format!("det({},{})", a.name, pruner.name()), slots, guessed_maker(a), pruner))
}

/// Iteration `i` replays iterations `1..=i` of the deterministic schedule.
/// Every run draws fresh randomness (its label is unique).
pub fn uniformize_lv(
    a: &NonUniform,
    pruner: &dyn PruningAlgorithm,
    doms: &[ParamDomination],
    opts: &TransformOptions,
) -> Result<Uniform, TransformError> {
    let plan = GuessPlan::new(a, doms, opts.rounding)?;
    let c = plan.bounding_constant();
    let per_budget: Vec<Vec<Vec<u64>>> =
        (0..).map_while(|j| budget_fits(c, j, opts.ceiling).then(|| plan.guesses(1 << j))).collect();
    let mut slots = Vec::new();
    let mut i = 1;
    while budget_fits(c, i, opts.ceiling) {
        for j in 1..=i {
            for (k, x) in per_budget[j as usize].iter().enumerate() {
                slots.push(Slot {
                    iteration: i,
                    inner: j,
                    index: k,
                    guesses: x.clone(),
                    rounds: c << j,
                    label: format!("i{i}j{j}k{k}"),
                });
            }
        }
        i += 1;
    }
    Ok(Uniform::build(format!("lv({},{})", a.name, pruner.name()), slots, guessed_maker(a), pruner))
}

/// Lifts the bound over the dominated parameters and picks the schedule by flavor.
pub fn dominate_uniformize(
    a: &NonUniform,
    pruner: &dyn PruningAlgorithm,
    doms: &[ParamDomination],
    opts: &TransformOptions,
) -> Result<Uniform, TransformError> {
    match a.flavor {
        Flavor::Deterministic => uniformize_det(a, pruner, doms, opts),
        Flavor::MonteCarlo { .. } => uniformize_lv(a, pruner, doms, opts),
    }
}

/// Iteration `i` (from 0) runs every program for `2^i` rounds, each followed by pruning.
pub fn min_combine(
    programs: Vec<(Arc<dyn NodeProgram>, String)>,
    pruner: &dyn PruningAlgorithm,
    opts: &TransformOptions,
) -> Result<Uniform, TransformError> {
    if programs.is_empty() {
        return Err(TransformError::Empty);
    }
    let mut slots = Vec::new();
    let mut i = 0;
    while budget_fits(1, i, opts.ceiling) {
        for (j, (_, name)) in programs.iter().enumerate() {
            slots.push(Slot {
                iteration: i,
                inner: j as u32,
                index: j,
                guesses: Vec::new(),
                rounds: 1 << i,
                label: format!("i{i}{name}"),
            });
        }
        i += 1;
    }
    let names: Vec<&str> = programs.iter().map(|(_, n)| n.as_str()).collect();
    let name = format!("min({};{})", names.join(","), pruner.name());
    let progs: Vec<Arc<dyn NodeProgram>> = programs.into_iter().map(|(p, _)| p).collect();
    Ok(Uniform::build(name, slots, Box::new(move |s: &Slot| progs[s.index].clone()), pruner))
}

/// A Las Vegas program read as weak Monte-Carlo: by Markov's inequality it
/// finishes within `expected / (1 - rho)` rounds with probability at least `rho`.
#[derive(Clone)]
pub struct WeakMonteCarlo {
    pub program: Arc<dyn NodeProgram>,
    pub declared_rounds: u64,
    pub rho: f64,
}

pub fn wrap_las_vegas(program: Arc<dyn NodeProgram>, expected: f64, rho: f64) -> Result<WeakMonteCarlo, TransformError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(TransformError::Guarantee(rho));
    }
    Ok(WeakMonteCarlo { program, declared_rounds: (expected / (1.0 - rho)).ceil() as u64, rho })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::Mutex;

    use rand::Rng;

    use super::*;
    use crate::baselib::{luby_trunc, mis_from_linial, never};
    use crate::bounds::ceil_log2;
    use crate::config::Configuration;
    use crate::graph::{generate, Family};
    use crate::pruning::{RulingPruner, SlcPruner};
    use crate::runtime::{run_plan_barrier, run_sync, Fault, Msg, NodeCtx, NodeState, RunError};

    fn mis_pruner() -> RulingPruner {
        RulingPruner { beta: 1 }
    }

    fn cfg(f: Family, seed: u64) -> Configuration {
        Configuration::plain(generate(&f, seed).unwrap())
    }

    #[test]
    fn empty_graph_gives_empty_output() {
        let u = uniformize_det(&mis_from_linial(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        let (y, rep) = run_sync(&*u.program, &Configuration::plain(Graph::empty()), 10, 0).unwrap();
        assert!(y.is_empty());
        assert_eq!(rep.rounds_total, 0);
    }

    #[test]
    fn five_cycle_mis() {
        let u = uniformize_det(&mis_from_linial(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        let c = cfg(Family::Cycle { n: 5 }, 0);
        let (y, _) = run_sync(&*u.program, &c, 1_000_000, 0).unwrap();
        assert!(Problem::MIS.verify(&c, &y).unwrap());
        assert_eq!(y.iter().filter(|v| v.selected()).count(), 2);
    }

    #[test]
    fn stops_by_the_first_adequate_budget() {
        let a = mis_from_linial();
        let u = uniformize_det(&a, &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        for f in [Family::Path { n: 20 }, Family::Gnp { n: 40, p: 0.1 }, Family::Regular { n: 30, d: 4 }] {
            for seed in 0..3 {
                let c = cfg(f.clone(), seed);
                let (y, rep) = run_sync(&*u.program, &c, 1_000_000, seed).unwrap();
                assert!(Problem::MIS.verify(&c, &y).unwrap());
                let fstar = a.bound_at(&c.graph).unwrap();
                assert!(u.iterations(&rep) as u64 <= ceil_log2(fstar).max(1), "{f:?}: f* = {fstar}, iterations {}", u.iterations(&rep));
            }
        }
    }

    #[test]
    fn monte_carlo_base_on_sixteen_nodes() {
        let u = dominate_uniformize(&luby_trunc(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        assert!(u.slots.iter().any(|s| s.inner < s.iteration));
        for seed in 0..10 {
            let c = cfg(Family::Gnp { n: 16, p: 0.3 }, seed);
            let (y, _) = run_sync(&*u.program, &c, 1_000_000, seed).unwrap();
            assert!(Problem::MIS.verify(&c, &y).unwrap());
        }
    }

    #[test]
    fn hopeless_base_exhausts_the_schedule() {
        let opts = TransformOptions { ceiling: 64, ..TransformOptions::default() };
        let u = uniformize_det(&never(), &mis_pruner(), &[], &opts).unwrap();
        let err = run_sync(&*u.program, &cfg(Family::Path { n: 6 }, 0), 100_000, 0).unwrap_err();
        assert!(matches!(err.fault(), Some(Fault::ScheduleExhausted { .. })));
    }

    #[test]
    fn staggered_run_matches_barrier_run() {
        let det = uniformize_det(&mis_from_linial(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        let lv = uniformize_lv(&luby_trunc(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        for u in [det, lv] {
            for seed in 0..4 {
                let c = cfg(Family::Gnp { n: 24, p: 0.2 }, seed);
                let (y, _) = run_sync(&*u.program, &c, 1_000_000, seed).unwrap();
                let b = run_plan_barrier(&*u.plan, &c, seed, "", 100_000).unwrap();
                assert_eq!(y, b.outputs, "{}", u.name);
            }
        }
    }

    #[test]
    fn factory_sees_only_schedule_guesses() {
        let seen: Arc<Mutex<BTreeSet<Vec<u64>>>> = Arc::default();
        let mut a = mis_from_linial();
        let (inner, log) = (a.factory.clone(), seen.clone());
        a.factory = Arc::new(move |x: &[u64]| {
            log.lock().unwrap().insert(x.to_vec());
            inner(x)
        });
        let u = uniformize_det(&a, &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        let plan = GuessPlan::new(&a, &[], Rounding::Down).unwrap();
        let allowed: BTreeSet<Vec<u64>> = (1..=20).flat_map(|i| plan.guesses(1 << i)).collect();
        for (f, seed) in [(Family::Cycle { n: 30 }, 0), (Family::Gnp { n: 50, p: 0.1 }, 1)] {
            run_sync(&*u.program, &cfg(f, seed), 1_000_000, seed).unwrap();
        }
        let seen = seen.lock().unwrap();
        assert!(!seen.is_empty());
        assert!(seen.is_subset(&allowed));
    }

    #[test]
    fn dominated_degree_guess_is_read_off_the_identity_guess() {
        let dom = ParamDomination { param: GraphParam::MaxDegree, by: GraphParam::MaxId, g: AscFn::id() };
        let a = mis_from_linial().with_bound(vec![GraphParam::MaxId], "add(logstar+1)".parse().unwrap());
        let plan = GuessPlan::new(&a, std::slice::from_ref(&dom), Rounding::Down).unwrap();
        for i in 1..10 {
            for x in plan.guesses(1 << i) {
                assert_eq!(x[0], x[1]);
            }
        }
        assert_eq!(
            GuessPlan::new(&a, &[], Rounding::Down).unwrap_err(),
            TransformError::MissingDomination("max_degree")
        );
    }

    #[test]
    fn residual_shrinks_between_iterations() {
        let u = uniformize_det(&mis_from_linial(), &mis_pruner(), &[], &TransformOptions::default()).unwrap();
        let c = cfg(Family::Gnp { n: 60, p: 0.08 }, 3);
        let b = run_plan_barrier(&*u.plan, &c, 0, "", 100_000).unwrap();
        let counts: Vec<usize> = b.phases.iter().filter(|p| p.index % 2 == 1).map(|p| p.participants).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    }

    #[test]
    fn min_combiner_solves_with_either_program() {
        let fast = mis_from_linial().program(&[4, 1 << 20]);
        let slow = never().program(&[1]);
        let u = min_combine(vec![(slow, "never".into()), (fast, "mis".into())], &mis_pruner(), &TransformOptions::default()).unwrap();
        let c = cfg(Family::Grid { rows: 5, cols: 5 }, 0);
        let (y, _) = run_sync(&*u.program, &c, 1_000_000, 0).unwrap();
        assert!(Problem::MIS.verify(&c, &y).unwrap());
        assert!(matches!(min_combine(vec![], &mis_pruner(), &TransformOptions::default()), Err(TransformError::Empty)));
    }

    #[test]
    fn list_coloring_schedule_runs() {
        let b = crate::baselib::slc_adapter(&crate::baselib::linial()).unwrap();
        let u = uniformize_det(&b, &SlcPruner, &[], &TransformOptions::default()).unwrap();
        assert_eq!(u.slots[0].guesses.len(), 1);
    }

    #[test]
    fn las_vegas_wrapper() {
        let p = mis_from_linial().program(&[2, 100]);
        assert_eq!(wrap_las_vegas(p.clone(), 10.0, 0.5).unwrap().declared_rounds, 20);
        assert!(wrap_las_vegas(p.clone(), 10.0, 0.0).is_err());
        assert!(wrap_las_vegas(p, 10.0, 1.0).is_err());
        // full Luby on sparse graphs: within twice its mean in at least half the runs
        let c = cfg(Family::Gnp { n: 64, p: 0.08 }, 0);
        let luby = crate::baselib::Luby { iterations: None };
        let rounds: Vec<f64> = (0..200).map(|s| run_sync(&luby, &c, 100_000, s).unwrap().1.rounds_total as f64).collect();
        let mean = rounds.iter().sum::<f64>() / rounds.len() as f64;
        let w = wrap_las_vegas(Arc::new(crate::baselib::Luby { iterations: None }), mean, 0.5).unwrap();
        let within = rounds.iter().filter(|&&r| r <= w.declared_rounds as f64).count();
        assert!(within * 2 >= rounds.len());
    }

    /// Random 0/1 outputs after a random number of rounds.
    struct Garbage;

    struct GarbageState(rand_chacha::ChaCha8Rng);

    impl NodeProgram for Garbage {
        fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
            Box::new(GarbageState(ctx.rng()))
        }
    }

    impl NodeState for GarbageState {
        fn step(&mut self, _: usize, _: &[Option<Msg>], _: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
            Ok(self.0.gen_bool(0.4).then(|| Value::Int(self.0.gen_range(0..3))))
        }
    }

    #[test]
    fn garbage_base_never_yields_a_wrong_answer() {
        let mut a = never();
        a.factory = Arc::new(|_: &[u64]| Arc::new(Garbage) as Arc<dyn NodeProgram>);
        let opts = TransformOptions { ceiling: 256, ..TransformOptions::default() };
        let det = uniformize_det(&a, &mis_pruner(), &[], &opts).unwrap();
        a.flavor = Flavor::MonteCarlo { rho: 0.5 };
        let lv = uniformize_lv(&a, &mis_pruner(), &[], &opts).unwrap();
        for u in [det, lv] {
            for seed in 0..5 {
                let c = cfg(Family::Gnp { n: 20, p: 0.2 }, seed);
                match run_sync(&*u.program, &c, 1_000_000, seed) {
                    Ok((y, _)) => assert!(Problem::MIS.verify(&c, &y).unwrap()),
                    Err(RunError::Fault { fault, .. }) => assert!(matches!(fault, Fault::ScheduleExhausted { .. })),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}
