//! Per-node phase sequencing with an alpha-synchronizer.
//!
//! A node runs phase `k + 1` as soon as its own phase `k` is over; neighbours
//! may still be in phase `k`. Every live node sends one envelope per round on
//! each port. The envelope carries tagged inner messages and phase-end
//! notices; silence from a port means the neighbour has terminated.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{child_label, decode, encode, run_sync_with, Fault, Msg, NodeCtx, NodeProgram, NodeState, PhaseRecord, RunError, RunOptions};
use crate::config::{Configuration, Input, Value};
use crate::graph::Graph;

pub struct PhaseSpec {
    pub program: Arc<dyn NodeProgram>,
    pub label: String,
    /// Only talk to neighbours carrying the same tag (see [`PhasePlan::tag`]).
    pub same_tag_only: bool,
}

impl PhaseSpec {
    pub fn new(program: Arc<dyn NodeProgram>, label: impl Into<String>) -> Self {
        PhaseSpec { program, label: label.into(), same_tag_only: false }
    }

    pub fn masked(mut self) -> Self {
        self.same_tag_only = true;
        self
    }
}

pub enum After {
    /// Go on with the next phase, using this input record.
    Continue(Input),
    /// Stop the whole program with this output.
    Leave(Value),
}

/// The phase schedule shared by all nodes. It sees only a node's own input
/// and phase results, never the instance.
pub trait PhasePlan: Send + Sync {
    /// `None` once the schedule is exhausted.
    fn phase(&self, k: usize) -> Option<PhaseSpec>;

    fn first_record(&self, _degree: usize, input: &Input) -> Input {
        input.clone()
    }

    /// Called when phase `k` produced `output` on a node whose phase input was `input`.
    fn after(&self, k: usize, input: &Input, output: Value) -> After;

    /// Whether nodes can leave right after phase `k`. Before the next phase
    /// starts, every node then learns which neighbours are still there.
    fn may_leave(&self, _k: usize) -> bool {
        false
    }

    fn tag(&self, _degree: usize, _input: &Input) -> Option<u64> {
        None
    }
}

#[derive(Serialize, Deserialize)]
enum Event {
    Step { phase: usize, step: usize, payload: Option<Msg> },
    End { phase: usize, step: usize },
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    tag: Option<u64>,
    events: Vec<Event>,
}

pub struct SequenceProgram {
    plan: Arc<dyn PhasePlan>,
}

impl SequenceProgram {
    pub fn new(plan: Arc<dyn PhasePlan>) -> Self {
        SequenceProgram { plan }
    }
}

impl NodeProgram for SequenceProgram {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let d = ctx.degree;
        Box::new(SeqState {
            plan: self.plan.clone(),
            id: ctx.id,
            seed: ctx.seed,
            prefix: ctx.label.to_string(),
            my_tag: self.plan.tag(d, ctx.input),
            input: self.plan.first_record(d, ctx.input),
            gone: vec![false; d],
            active: vec![true; d],
            tags: vec![None; d],
            buffer: vec![HashMap::new(); d],
            ended: vec![HashMap::new(); d],
            k: 0,
            mode: Mode::Start,
            log: Vec::new(),
        })
    }
}

enum Mode {
    Start,
    Running { inner: Box<dyn NodeState>, ports: Vec<usize>, step: usize, label: String, start: usize },
    Waiting { prev: usize },
}

struct SeqState {
    plan: Arc<dyn PhasePlan>,
    id: u64,
    seed: u64,
    prefix: String,
    my_tag: Option<u64>,
    input: Input,
    gone: Vec<bool>,
    /// Neighbour is still taking part (has not left after a pruning phase).
    active: Vec<bool>,
    tags: Vec<Option<u64>>,
    buffer: Vec<HashMap<(usize, usize), Option<Msg>>>,
    ended: Vec<HashMap<usize, usize>>,
    k: usize,
    mode: Mode,
    log: Vec<PhaseRecord>,
}

impl SeqState {
    fn absorb(&mut self, round: usize, inbox: &[Option<Msg>]) -> Result<(), Fault> {
        for (p, m) in inbox.iter().enumerate() {
            match m {
                None => {
                    if round >= 1 {
                        self.gone[p] = true;
                    }
                }
                Some(bytes) => {
                    let env: Envelope = decode(bytes)?;
                    if env.tag.is_some() {
                        self.tags[p] = env.tag;
                    }
                    for ev in env.events {
                        match ev {
                            Event::Step { phase, step, payload } => {
                                self.buffer[p].insert((phase, step), payload);
                            }
                            Event::End { phase, step } => {
                                self.ended[p].insert(phase, step);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn ready(&self, ports: &[usize], phase: usize, step: usize) -> bool {
        ports.iter().all(|&p| {
            self.gone[p]
                || self.buffer[p].contains_key(&(phase, step - 1))
                || self.ended[p].get(&phase).is_some_and(|&t| t < step)
        })
    }
}

impl NodeState for SeqState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        self.absorb(round, inbox)?;
        let d = self.gone.len();
        let mut events: Vec<Vec<Event>> = (0..d).map(|_| Vec::new()).collect();
        let mut stepped = false;
        loop {
            match std::mem::replace(&mut self.mode, Mode::Start) {
                Mode::Waiting { prev } => {
                    let known = (0..d).all(|p| !self.active[p] || self.gone[p] || self.ended[p].contains_key(&prev));
                    if !known {
                        self.mode = Mode::Waiting { prev };
                        break;
                    }
                    for p in 0..d {
                        self.active[p] = self.active[p] && self.ended[p].contains_key(&prev);
                    }
                }
                Mode::Start => {
                    let spec = self.plan.phase(self.k).ok_or(Fault::ScheduleExhausted { phase: self.k })?;
                    // neighbour tags arrive in round 1
                    if spec.same_tag_only && round == 0 && d > 0 {
                        break;
                    }
                    let ports: Vec<usize> = (0..d)
                        .filter(|&p| self.active[p] && (!spec.same_tag_only || self.tags[p] == self.my_tag))
                        .collect();
                    let label = child_label(&self.prefix, &spec.label);
                    let ctx = NodeCtx { id: self.id, degree: ports.len(), input: &self.input, seed: self.seed, label: &label };
                    let inner = spec.program.init(&ctx);
                    self.mode = Mode::Running { inner, ports, step: 0, label, start: round };
                }
                Mode::Running { mut inner, ports, step: s, label, start } => {
                    let k = self.k;
                    if s >= 1 && (stepped || !self.ready(&ports, k, s)) {
                        self.mode = Mode::Running { inner, ports, step: s, label, start };
                        break;
                    }
                    let inner_in: Vec<Option<Msg>> = if s == 0 {
                        vec![None; ports.len()]
                    } else {
                        ports.iter().map(|&p| self.buffer[p].remove(&(k, s - 1)).flatten()).collect()
                    };
                    let mut inner_out = vec![None; ports.len()];
                    let res = inner.step(s, &inner_in, &mut inner_out)?;
                    stepped |= s >= 1;
                    match res {
                        None => {
                            for (q, &p) in ports.iter().enumerate() {
                                if !self.gone[p] {
                                    events[p].push(Event::Step { phase: k, step: s, payload: inner_out[q].take() });
                                }
                            }
                            self.mode = Mode::Running { inner, ports, step: s + 1, label, start };
                        }
                        Some(v) => {
                            self.log.push(PhaseRecord { index: k, label, start, end: round });
                            for p in 0..d {
                                if !self.gone[p] {
                                    events[p].push(Event::End { phase: k, step: s });
                                }
                            }
                            for b in &mut self.buffer {
                                b.retain(|&(ph, _), _| ph > k);
                            }
                            match self.plan.after(k, &self.input, v) {
                                After::Leave(out) => return Ok(Some(out)),
                                After::Continue(next) => {
                                    self.input = next;
                                    if self.plan.may_leave(k) {
                                        self.mode = Mode::Waiting { prev: k };
                                    }
                                    self.k += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        for (p, ev) in events.into_iter().enumerate() {
            if !self.gone[p] {
                let tag = if round == 0 { self.my_tag } else { None };
                outbox[p] = Some(encode(&Envelope { tag, events: ev }));
            }
        }
        Ok(None)
    }

    fn phase_log(&self) -> Vec<PhaseRecord> {
        self.log.clone()
    }
}

/// Tag from (degree, input); masked phases only talk to neighbours with the same tag.
pub type Tagger = Arc<dyn Fn(usize, &Input) -> Option<u64> + Send + Sync>;

/// Fixed list of phases; each phase's output is carried into the next
/// phase's input, the last phase's output is the result.
pub struct SequentialPlan {
    pub phases: Vec<PhaseSpec>,
    pub tagger: Option<Tagger>,
}

impl PhasePlan for SequentialPlan {
    fn phase(&self, k: usize) -> Option<PhaseSpec> {
        self.phases.get(k).map(|s| PhaseSpec {
            program: s.program.clone(),
            label: s.label.clone(),
            same_tag_only: s.same_tag_only,
        })
    }

    fn after(&self, k: usize, input: &Input, output: Value) -> After {
        if k + 1 >= self.phases.len() {
            After::Leave(output)
        } else {
            After::Continue(Input { carried: Some(output), ..input.clone() })
        }
    }

    fn tag(&self, degree: usize, input: &Input) -> Option<u64> {
        self.tagger.as_ref().and_then(|t| t(degree, input))
    }
}

pub fn compose(phases: Vec<(Arc<dyn NodeProgram>, String)>) -> Arc<dyn NodeProgram> {
    assert!(!phases.is_empty(), "compose needs at least one phase");
    let phases = phases.into_iter().map(|(p, l)| PhaseSpec::new(p, l)).collect();
    Arc::new(SequenceProgram::new(Arc::new(SequentialPlan { phases, tagger: None })))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarrierPhase {
    pub index: usize,
    pub label: String,
    pub participants: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug)]
pub struct BarrierRun {
    pub outputs: Vec<Value>,
    pub phases: Vec<BarrierPhase>,
}

/// Reference execution: every phase starts for all remaining nodes at once,
/// on the sub-configuration of the remaining nodes.
pub fn run_plan_barrier(
    plan: &dyn PhasePlan,
    config: &Configuration,
    seed: u64,
    label: &str,
    phase_cap: usize,
) -> Result<BarrierRun, RunError> {
    let g = &config.graph;
    let n = g.n();
    let tags: Vec<Option<u64>> = (0..n).map(|v| plan.tag(g.degree(v), &config.inputs[v])).collect();
    let mut inputs: Vec<Input> = config.inputs.iter().enumerate().map(|(v, i)| plan.first_record(config.graph.degree(v), i)).collect();
    let mut outputs: Vec<Option<Value>> = vec![None; n];
    let mut alive: Vec<usize> = (0..n).collect();
    let mut phases = Vec::new();
    let mut k = 0;
    while !alive.is_empty() {
        let spec = plan.phase(k).ok_or_else(|| RunError::Fault {
            node: alive[0],
            id: g.id(alive[0]),
            round: 0,
            fault: Fault::ScheduleExhausted { phase: k },
        })?;
        let pos: HashMap<usize, usize> = alive.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for &u in &alive {
            for &w in g.neighbors(u) {
                if u < w && pos.contains_key(&w) && (!spec.same_tag_only || tags[u] == tags[w]) {
                    edges.push((pos[&u], pos[&w]));
                }
            }
        }
        let sub_graph = Graph::from_edges(alive.iter().map(|&v| g.id(v)).collect(), &edges)
            .expect("sub-configuration of a valid graph");
        let sub = Configuration { graph: sub_graph, inputs: alive.iter().map(|&v| inputs[v].clone()).collect() };
        let opts = RunOptions { label: child_label(label, &spec.label), ..RunOptions::default() };
        let (out, rep) = run_sync_with(&*spec.program, &sub, phase_cap, seed, opts).map_err(|e| match e {
            RunError::Fault { node, id, round, fault } => RunError::Fault { node: alive[node], id, round, fault },
            other => other,
        })?;
        phases.push(BarrierPhase { index: k, label: spec.label.clone(), participants: alive.len(), rounds: rep.rounds_total });
        let mut still = Vec::new();
        for (i, value) in out.into_iter().enumerate() {
            let v = alive[i];
            match plan.after(k, &inputs[v], value) {
                After::Leave(y) => outputs[v] = Some(y),
                After::Continue(next) => {
                    inputs[v] = next;
                    still.push(v);
                }
            }
        }
        alive = still;
        k += 1;
    }
    Ok(BarrierRun { outputs: outputs.into_iter().map(|o| o.expect("every node left")).collect(), phases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::runtime::demo::{FloodMax, RandomFlood, StaggeredStop};
    use crate::runtime::{restrict, run_sync};

    fn staggered_then_flood() -> SequentialPlan {
        SequentialPlan {
            phases: vec![
                PhaseSpec::new(Arc::new(StaggeredStop { spread: 4 }), "a"),
                PhaseSpec::new(Arc::new(FloodMax { rounds: 2 }), "b"),
                PhaseSpec::new(Arc::new(RandomFlood { max_rounds: 3 }), "c"),
            ],
            tagger: None,
        }
    }

    #[test]
    fn two_zero_round_phases_take_zero_rounds() {
        let c = Configuration::plain(generate(&Family::Cycle { n: 6 }, 1).unwrap());
        let p = compose(vec![
            (Arc::new(FloodMax { rounds: 0 }) as Arc<dyn NodeProgram>, "x".into()),
            (Arc::new(FloodMax { rounds: 0 }), "y".into()),
        ]);
        let (_, rep) = run_sync(&*p, &c, 100, 0).unwrap();
        assert_eq!(rep.rounds_total, 0);
    }

    #[test]
    fn staggered_path_matches_barrier() {
        for seed in 0..20 {
            let c = Configuration::plain(generate(&Family::Path { n: 9 }, seed).unwrap());
            let plan = Arc::new(staggered_then_flood());
            let (out, rep) = run_sync(&SequenceProgram::new(plan.clone()), &c, 1000, seed).unwrap();
            let bar = run_plan_barrier(&*plan, &c, seed, "", 1000).unwrap();
            assert_eq!(out, bar.outputs);
            let sum: usize = bar.phases.iter().map(|p| p.rounds).sum();
            assert!(rep.rounds_total <= sum, "{} > {}", rep.rounds_total, sum);
        }
    }

    #[test]
    fn restricted_then_two_round_phase_within_four() {
        for seed in 0..10 {
            let c = Configuration::plain(generate(&Family::Gnp { n: 12, p: 0.3 }, seed).unwrap());
            let p = compose(vec![
                (restrict(Arc::new(RandomFlood { max_rounds: 6 }), 2), "a".into()),
                (Arc::new(FloodMax { rounds: 2 }), "p".into()),
            ]);
            let (_, rep) = run_sync(&*p, &c, 100, seed).unwrap();
            assert!(rep.rounds_total <= 4);
        }
    }

    struct Pruned;

    /// Phase 0 floods for a while; phase 1 keeps nodes with even output, the
    /// rest repeat with the next pair of phases.
    impl PhasePlan for Pruned {
        fn phase(&self, k: usize) -> Option<PhaseSpec> {
            if k >= 12 {
                return None;
            }
            Some(if k.is_multiple_of(2) {
                PhaseSpec::new(Arc::new(RandomFlood { max_rounds: 3 }), format!("a{k}"))
            } else {
                PhaseSpec::new(Arc::new(StaggeredStop { spread: 3 }), format!("p{k}"))
            })
        }

        fn after(&self, k: usize, input: &Input, output: Value) -> After {
            let x = output.as_int().unwrap_or(0);
            if k % 2 == 1 && (x + input.id).is_multiple_of(3) {
                After::Leave(Value::Int(x))
            } else {
                After::Continue(Input { carried: Some(output), ..input.clone() })
            }
        }

        fn may_leave(&self, k: usize) -> bool {
            k % 2 == 1
        }
    }

    #[test]
    fn leaving_nodes_match_barrier() {
        for seed in 0..20 {
            let c = Configuration::plain(generate(&Family::Gnp { n: 14, p: 0.3 }, seed).unwrap());
            let staggered = run_sync(&SequenceProgram::new(Arc::new(Pruned)), &c, 10_000, seed);
            let bar = run_plan_barrier(&Pruned, &c, seed, "", 1000);
            match (staggered, bar) {
                (Ok((out, _)), Ok(b)) => assert_eq!(out, b.outputs),
                (Err(e), Err(_)) => assert!(matches!(e.fault(), Some(Fault::ScheduleExhausted { .. }))),
                (a, b) => panic!("disagree: {:?} vs {:?}", a.map(|x| x.0), b.map(|x| x.outputs)),
            }
        }
    }
}
