//! Synchronous LOCAL-model executor.
//!
//! Round 0 is local computation only. In round `k >= 1` every running node
//! receives what its neighbours produced in round `k - 1`. A node that outputs
//! is terminated: whatever it put in its outbox during that same step is
//! dropped and it stays silent afterwards.

use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{Configuration, Input, Value};

pub mod demo;
mod sequence;

pub use sequence::{
    compose, run_plan_barrier, After, BarrierPhase, BarrierRun, PhasePlan, PhaseSpec, SequenceProgram, SequentialPlan,
};

/// Messages are opaque byte strings; their size is recorded, never limited.
pub type Msg = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("{0}")]
    Local(String),
    #[error("phase schedule exhausted at phase {phase}")]
    ScheduleExhausted { phase: usize },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("node {node} (id {id}) faulted in round {round}: {fault}")]
    Fault { node: usize, id: u64, round: usize, fault: Fault },
    #[error("writing trace: {0}")]
    Trace(#[from] std::io::Error),
}

impl RunError {
    pub fn fault(&self) -> Option<&Fault> {
        match self {
            RunError::Fault { fault, .. } => Some(fault),
            RunError::Trace(_) => None,
        }
    }
}

/// What a node knows when it wakes up.
pub struct NodeCtx<'a> {
    pub id: u64,
    pub degree: usize,
    pub input: &'a Input,
    pub seed: u64,
    /// Phase path of the running program; part of the randomness derivation.
    pub label: &'a str,
}

impl NodeCtx<'_> {
    /// The node's private random stream for this phase.
    pub fn rng(&self) -> ChaCha8Rng {
        node_rng(self.seed, self.id, self.label)
    }
}

/// Deterministic stream derived from `(seed, identity, label)`.
pub fn node_rng(seed: u64, id: u64, label: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.to_le_bytes());
    h.update(label.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub fn child_label(parent: &str, child: &str) -> String {
    if parent.is_empty() {
        child.to_string()
    } else {
        format!("{parent}/{child}")
    }
}

/// A per-node synchronous state machine.
pub trait NodeProgram: Send + Sync {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState>;
}

pub trait NodeState: Send {
    /// One round. `inbox[p]` is the message from port `p` (neighbours in
    /// increasing index order), `outbox` starts all `None`. Returning an
    /// output terminates the node.
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault>;

    /// Phases this node went through, for composed programs.
    fn phase_log(&self) -> Vec<PhaseRecord> {
        Vec::new()
    }
}

pub fn encode<T: Serialize>(value: &T) -> Msg {
    bincode::serialize(value).expect("in-memory serialization does not fail")
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, Fault> {
    bincode::deserialize(bytes).map_err(|e| Fault::Local(format!("undecodable message: {e}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseRecord {
    pub index: usize,
    pub label: String,
    /// Round of the phase's step 0.
    pub start: usize,
    /// Round in which the node finished the phase.
    pub end: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub rounds_total: usize,
    pub termination_round: Vec<usize>,
    /// Nodes cut off by the round cap (their output is the default "0").
    pub forced: Vec<bool>,
    pub messages_sent: u64,
    pub message_bytes: u64,
    /// Per phase label: the longest time any node spent in it.
    pub phase_breakdown: Vec<(String, usize)>,
    #[serde(skip)]
    pub phase_logs: Vec<Vec<PhaseRecord>>,
}

/// Order in which nodes are stepped inside a round. Results never depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    InOrder,
    Reversed,
    Shuffled(u64),
}

pub struct RunOptions<'w> {
    pub schedule: Schedule,
    pub label: String,
    /// JSON-lines trace: one record per delivered message and per output.
    pub trace: Option<&'w mut dyn Write>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        RunOptions { schedule: Schedule::InOrder, label: String::new(), trace: None }
    }
}

pub fn run_sync(
    program: &dyn NodeProgram,
    config: &Configuration,
    round_cap: usize,
    seed: u64,
) -> Result<(Vec<Value>, RunReport), RunError> {
    run_sync_with(program, config, round_cap, seed, RunOptions::default())
}

pub fn run_sync_with(
    program: &dyn NodeProgram,
    config: &Configuration,
    round_cap: usize,
    seed: u64,
    mut opts: RunOptions<'_>,
) -> Result<(Vec<Value>, RunReport), RunError> {
    let g = &config.graph;
    let n = g.n();
    // reverse[u][p] = port of u at neighbour g.neighbors(u)[p]
    let reverse: Vec<Vec<usize>> = (0..n)
        .map(|u| g.neighbors(u).iter().map(|&v| g.port_of(v, u).expect("symmetric adjacency")).collect())
        .collect();
    let mut states: Vec<Option<Box<dyn NodeState>>> = (0..n)
        .map(|v| {
            let ctx = NodeCtx {
                id: g.id(v),
                degree: g.degree(v),
                input: &config.inputs[v],
                seed,
                label: &opts.label,
            };
            Some(program.init(&ctx))
        })
        .collect();
    let mut outputs: Vec<Option<Value>> = vec![None; n];
    let mut report = RunReport {
        termination_round: vec![0; n],
        forced: vec![false; n],
        ..RunReport::default()
    };
    let mut logs: Vec<Vec<PhaseRecord>> = vec![Vec::new(); n];
    let mut pending: Vec<Vec<Option<Msg>>> = (0..n).map(|v| vec![None; g.degree(v)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffler = match opts.schedule {
        Schedule::Shuffled(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        _ => None,
    };
    if opts.schedule == Schedule::Reversed {
        order.reverse();
    }
    let mut running = n;
    let mut round = 0usize;
    while running > 0 {
        let inboxes: Vec<Vec<Option<Msg>>> = (0..n)
            .map(|u| {
                if states[u].is_none() {
                    return Vec::new();
                }
                g.neighbors(u)
                    .iter()
                    .zip(&reverse[u])
                    .map(|(&v, &q)| pending[v][q].clone())
                    .collect()
            })
            .collect();
        if let Some(rng) = shuffler.as_mut() {
            order.shuffle(rng);
        }
        let mut next: Vec<Vec<Option<Msg>>> = (0..n).map(|v| vec![None; g.degree(v)]).collect();
        for &u in &order {
            let Some(state) = states[u].as_mut() else { continue };
            let outbox = &mut next[u];
            let result = state.step(round, &inboxes[u], outbox).map_err(|fault| RunError::Fault {
                node: u,
                id: g.id(u),
                round,
                fault,
            })?;
            if let Some(out) = result {
                outbox.iter_mut().for_each(|m| *m = None);
                if let Some(w) = opts.trace.as_deref_mut() {
                    let rec = serde_json::json!({ "round": round, "node": g.id(u), "output": out.to_string() });
                    writeln!(w, "{rec}")?;
                }
                outputs[u] = Some(out);
                report.termination_round[u] = round;
                logs[u] = state.phase_log();
                states[u] = None;
                running -= 1;
            } else {
                for (p, m) in outbox.iter().enumerate() {
                    if let Some(m) = m {
                        report.messages_sent += 1;
                        report.message_bytes += m.len() as u64;
                        if let Some(w) = opts.trace.as_deref_mut() {
                            let to = g.id(g.neighbors(u)[p]);
                            let rec = serde_json::json!({ "round": round, "node": g.id(u), "to": to, "bytes": m.len() });
                            writeln!(w, "{rec}")?;
                        }
                    }
                }
            }
        }
        pending = next;
        if running == 0 || round >= round_cap {
            break;
        }
        round += 1;
    }
    for u in 0..n {
        if let Some(state) = states[u].take() {
            logs[u] = state.phase_log();
            outputs[u] = Some(Value::zero());
            report.termination_round[u] = round;
            report.forced[u] = true;
        }
    }
    report.rounds_total = report.termination_round.iter().copied().max().unwrap_or(0);
    report.phase_breakdown = breakdown(&logs, &opts.label, report.rounds_total);
    report.phase_logs = logs;
    Ok((outputs.into_iter().map(|o| o.expect("every node has an output")).collect(), report))
}

fn breakdown(logs: &[Vec<PhaseRecord>], label: &str, total: usize) -> Vec<(String, usize)> {
    let mut by_index: std::collections::BTreeMap<usize, (String, usize)> = Default::default();
    for rec in logs.iter().flatten() {
        let e = by_index.entry(rec.index).or_insert_with(|| (rec.label.clone(), 0));
        e.1 = e.1.max(rec.end - rec.start);
    }
    if by_index.is_empty() {
        let name = if label.is_empty() { "run" } else { label };
        return vec![(name.to_string(), total)];
    }
    by_index.into_values().collect()
}

/// Runs `inner` for at most `t` rounds; a node still running after round `t`
/// outputs "0".
pub struct Restrict {
    inner: Arc<dyn NodeProgram>,
    t: usize,
}

pub fn restrict(inner: Arc<dyn NodeProgram>, t: usize) -> Arc<dyn NodeProgram> {
    Arc::new(Restrict { inner, t })
}

impl NodeProgram for Restrict {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(RestrictState { inner: self.inner.init(ctx), t: self.t })
    }
}

struct RestrictState {
    inner: Box<dyn NodeState>,
    t: usize,
}

impl NodeState for RestrictState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        let out = self.inner.step(round, inbox, outbox)?;
        if out.is_none() && round >= self.t {
            return Ok(Some(Value::zero()));
        }
        Ok(out)
    }

    fn phase_log(&self) -> Vec<PhaseRecord> {
        self.inner.phase_log()
    }
}

/// Node program built from a closure producing the initial state.
pub struct FnProgram<F>(pub F);

impl<F> NodeProgram for FnProgram<F>
where
    F: Fn(&NodeCtx<'_>) -> Box<dyn NodeState> + Send + Sync,
{
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        (self.0)(ctx)
    }
}
