//! Pruning algorithms: constant-round procedures that fix the nodes whose
//! tentative output is locally correct and hand the rest over as a residual
//! instance.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ColorList, Configuration, Input, Value};
use crate::graph::GraphParam;
use crate::problems::{check_slc_instance, enumerate_solutions_limited, matched_partner, Problem, ProblemError, ORACLE_CAP};
use crate::runtime::{decode, encode, run_sync, Fault, Msg, NodeCtx, NodeProgram, NodeState};

#[derive(Debug, Error)]
pub enum PruneError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error(transparent)]
    Oracle(#[from] ProblemError),
    #[error("cannot combine outputs: {0}")]
    Combine(String),
    #[error("distributed run failed: {0}")]
    Run(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruned {
    pub w: Vec<bool>,
    /// Value a pruned node keeps; meaningful only where `w` holds.
    pub keep: Vec<Value>,
    pub residual: Configuration,
    /// Index in the original configuration of each residual node.
    pub origin: Vec<usize>,
}

impl Pruned {
    pub fn all_pruned(&self) -> bool {
        self.w.iter().all(|&b| b)
    }

    /// Kept values on the pruned nodes, the residual solution elsewhere.
    pub fn glue(&self, residual_output: &[Value]) -> Vec<Value> {
        let mut y = self.keep.clone();
        for (i, &v) in self.origin.iter().enumerate() {
            y[v] = residual_output[i].clone();
        }
        y
    }
}

pub trait PruningAlgorithm: Send + Sync {
    fn name(&self) -> String;
    fn problem(&self) -> Problem;
    fn declared_rounds(&self) -> usize;
    fn apply(&self, c: &Configuration, y_hat: &[Value]) -> Result<Pruned, PruneError>;
    /// Per-node realization. Reads the tentative output from the carried
    /// input value and outputs a [`Value::Verdict`].
    fn program(&self) -> Arc<dyn NodeProgram>;
}

/// Builds the residual from pruned flags, kept values and per-node list strips.
fn finish(c: &Configuration, w: Vec<bool>, keep: Vec<Value>, strip: &[Vec<(u64, u64)>]) -> Pruned {
    let rest: Vec<usize> = (0..c.n()).filter(|&v| !w[v]).collect();
    let (mut residual, origin) = c.restrict_to(&rest);
    for (i, &v) in origin.iter().enumerate() {
        let inp = &mut residual.inputs[i];
        inp.carried = None;
        if let Some(list) = inp.lists.as_mut() {
            for &e in &strip[v] {
                list.remove(e);
            }
        }
    }
    Pruned { w, keep, residual, origin }
}

/// Apply a pruner by running its node program.
pub fn apply_distributed(p: &dyn PruningAlgorithm, c: &Configuration, y_hat: &[Value]) -> Result<(Pruned, usize), PruneError> {
    let prog = p.program();
    let (out, rep) =
        run_sync(&*prog, &c.with_carried(y_hat), p.declared_rounds() + 1, 0).map_err(|e| PruneError::Run(e.to_string()))?;
    let mut w = Vec::with_capacity(c.n());
    let mut keep = Vec::with_capacity(c.n());
    let mut strip = Vec::with_capacity(c.n());
    for v in out {
        match v {
            Value::Verdict { pruned, keep: k, strip: s } => {
                w.push(pruned);
                keep.push(if pruned { *k } else { Value::zero() });
                strip.push(s);
            }
            other => return Err(PruneError::Run(format!("pruner produced {other}"))),
        }
    }
    Ok((finish(c, w, keep, &strip), rep.rounds_total))
}

pub fn combine_outputs(ids: &[u64], on_w: &BTreeMap<u64, Value>, rest: &BTreeMap<u64, Value>) -> Result<Vec<Value>, PruneError> {
    if let Some(id) = on_w.keys().find(|id| rest.contains_key(id)) {
        return Err(PruneError::Combine(format!("identity {id} in both parts")));
    }
    let known: BTreeSet<u64> = ids.iter().copied().collect();
    if let Some(id) = on_w.keys().chain(rest.keys()).find(|id| !known.contains(id)) {
        return Err(PruneError::Combine(format!("identity {id} is not a node")));
    }
    ids.iter()
        .map(|id| {
            on_w.get(id)
                .or_else(|| rest.get(id))
                .cloned()
                .ok_or_else(|| PruneError::Combine(format!("identity {id} has no value")))
        })
        .collect()
}

fn carried(ctx: &NodeCtx<'_>) -> Value {
    ctx.input.carried.clone().unwrap_or_default()
}

fn verdict(pruned: bool, keep: Value, strip: Vec<(u64, u64)>) -> Value {
    Value::Verdict { pruned, keep: Box::new(keep), strip }
}

fn broadcast<T: Serialize>(outbox: &mut [Option<Msg>], x: &T) {
    let m = encode(x);
    outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
}

fn received<T: serde::de::DeserializeOwned>(inbox: &[Option<Msg>]) -> Result<Vec<Option<T>>, Fault> {
    inbox.iter().map(|m| m.as_deref().map(decode).transpose()).collect()
}

/// Pruning for (2, beta)-ruling sets: keep isolated selected nodes and the
/// unselected nodes within distance beta of one.
pub struct RulingPruner {
    pub beta: usize,
}

impl PruningAlgorithm for RulingPruner {
    fn name(&self) -> String {
        format!("ruling{}", self.beta)
    }

    fn problem(&self) -> Problem {
        Problem::Ruling { alpha: 2, beta: self.beta }
    }

    fn declared_rounds(&self) -> usize {
        1 + self.beta
    }

    fn apply(&self, c: &Configuration, y_hat: &[Value]) -> Result<Pruned, PruneError> {
        let g = &c.graph;
        let sel = |v: usize| y_hat[v].selected();
        let ruler: Vec<bool> = (0..g.n()).map(|v| sel(v) && g.neighbors(v).iter().all(|&w| !sel(w))).collect();
        let w: Vec<bool> = (0..g.n())
            .map(|v| ruler[v] || (!sel(v) && g.ball(v, self.beta).iter().any(|&u| ruler[u])))
            .collect();
        let keep = ruler.iter().map(|&r| Value::Int(r as u64)).collect();
        Ok(finish(c, w, keep, &vec![Vec::new(); g.n()]))
    }

    fn program(&self) -> Arc<dyn NodeProgram> {
        Arc::new(RulingProgram { beta: self.beta })
    }
}

struct RulingProgram {
    beta: usize,
}

impl NodeProgram for RulingProgram {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(RulingState { beta: self.beta, sel: carried(ctx).selected(), ruler: false, near: false })
    }
}

struct RulingState {
    beta: usize,
    sel: bool,
    ruler: bool,
    near: bool,
}

impl NodeState for RulingState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        let got: Vec<Option<bool>> = received(inbox)?;
        if round == 0 {
            broadcast(outbox, &self.sel);
            return Ok(None);
        }
        if round == 1 {
            self.ruler = self.sel && got.iter().all(|b| *b != Some(true));
            self.near = self.ruler;
        } else {
            self.near |= got.contains(&Some(true));
        }
        if round == 1 + self.beta {
            let pruned = self.ruler || (!self.sel && self.near);
            return Ok(Some(verdict(pruned, Value::Int(self.ruler as u64), Vec::new())));
        }
        broadcast(outbox, &self.near);
        Ok(None)
    }
}

/// Pruning for maximal matching: keep matched pairs and nodes whose
/// neighbours are all matched. Matched pairs settle on the smaller endpoint
/// identity as label, the other pruned nodes on 0.
pub struct MmPruner;

impl PruningAlgorithm for MmPruner {
    fn name(&self) -> String {
        "mm".into()
    }

    fn problem(&self) -> Problem {
        Problem::Mm
    }

    fn declared_rounds(&self) -> usize {
        3
    }

    fn apply(&self, c: &Configuration, y_hat: &[Value]) -> Result<Pruned, PruneError> {
        let g = &c.graph;
        let partner: Vec<Option<usize>> = (0..g.n()).map(|v| matched_partner(g, y_hat, v)).collect();
        let w: Vec<bool> =
            (0..g.n()).map(|v| partner[v].is_some() || g.neighbors(v).iter().all(|&u| partner[u].is_some())).collect();
        let keep = (0..g.n())
            .map(|v| match partner[v] {
                Some(u) => Value::Int(g.id(u).min(g.id(v))),
                None => Value::zero(),
            })
            .collect();
        Ok(finish(c, w, keep, &vec![Vec::new(); g.n()]))
    }

    fn program(&self) -> Arc<dyn NodeProgram> {
        Arc::new(MmProgram)
    }
}

struct MmProgram;

impl NodeProgram for MmProgram {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let label = match carried(ctx) {
            Value::Int(x) if x != 0 => Some(x),
            _ => None,
        };
        Box::new(MmState { id: ctx.id, label, same: Vec::new(), partner: None })
    }
}

struct MmState {
    id: u64,
    label: Option<u64>,
    /// (port, identity) of neighbours sharing the label.
    same: Vec<(usize, u64)>,
    partner: Option<u64>,
}

impl NodeState for MmState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        match round {
            0 => broadcast(outbox, &(self.id, self.label)),
            1 => {
                let got: Vec<Option<(u64, Option<u64>)>> = received(inbox)?;
                if self.label.is_some() {
                    self.same = got
                        .iter()
                        .enumerate()
                        .filter_map(|(p, m)| m.filter(|(_, l)| *l == self.label).map(|(id, _)| (p, id)))
                        .collect();
                }
                broadcast(outbox, &(self.same.len() as u64));
            }
            2 => {
                let counts: Vec<Option<u64>> = received(inbox)?;
                if let [(p, id)] = self.same[..] {
                    if counts[p] == Some(1) {
                        self.partner = Some(id);
                    }
                }
                broadcast(outbox, &self.partner.is_some());
            }
            _ => {
                let matched: Vec<Option<bool>> = received(inbox)?;
                let excused = matched.iter().all(|m| *m == Some(true));
                let keep = self.partner.map_or(Value::zero(), |p| Value::Int(p.min(self.id)));
                return Ok(Some(verdict(self.partner.is_some() || excused, keep, Vec::new())));
            }
        }
        Ok(None)
    }
}

/// Pruning for strong list-coloring: keep nodes whose tentative color is in
/// their list and unique in their neighbourhood; neighbours lose the colors
/// taken by pruned nodes.
pub struct SlcPruner;

impl PruningAlgorithm for SlcPruner {
    fn name(&self) -> String {
        "slc".into()
    }

    fn problem(&self) -> Problem {
        Problem::Slc
    }

    fn declared_rounds(&self) -> usize {
        2
    }

    fn apply(&self, c: &Configuration, y_hat: &[Value]) -> Result<Pruned, PruneError> {
        if !check_slc_instance(c) {
            return Err(PruneError::Malformed("not a strong list-coloring instance".into()));
        }
        let g = &c.graph;
        let w: Vec<bool> = (0..g.n())
            .map(|v| {
                let list = c.inputs[v].lists.as_ref().expect("checked instance");
                y_hat[v].as_pair().is_some_and(|p| list.contains(p)) && g.neighbors(v).iter().all(|&u| y_hat[u] != y_hat[v])
            })
            .collect();
        let strip: Vec<Vec<(u64, u64)>> = (0..g.n())
            .map(|v| g.neighbors(v).iter().filter(|&&u| w[u]).filter_map(|&u| y_hat[u].as_pair()).collect())
            .collect();
        Ok(finish(c, w, y_hat.to_vec(), &strip))
    }

    fn program(&self) -> Arc<dyn NodeProgram> {
        Arc::new(SlcProgram)
    }
}

struct SlcProgram;

impl NodeProgram for SlcProgram {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let y = carried(ctx);
        let in_list = match (&ctx.input.lists, y.as_pair()) {
            (Some(l), Some(p)) => l.contains(p),
            _ => false,
        };
        Box::new(SlcState { y, in_list, pruned: false })
    }
}

struct SlcState {
    y: Value,
    in_list: bool,
    pruned: bool,
}

impl NodeState for SlcState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        match round {
            0 => broadcast(outbox, &self.y),
            1 => {
                let got: Vec<Option<Value>> = received(inbox)?;
                self.pruned = self.in_list && got.iter().all(|m| m.as_ref() != Some(&self.y));
                broadcast(outbox, &(self.pruned, self.y.clone()));
            }
            _ => {
                let got: Vec<Option<(bool, Value)>> = received(inbox)?;
                let mut strip: Vec<(u64, u64)> =
                    got.iter().flatten().filter(|(p, _)| *p).filter_map(|(_, y)| y.as_pair()).collect();
                strip.sort_unstable();
                strip.dedup();
                return Ok(Some(verdict(self.pruned, self.y.clone(), strip)));
            }
        }
        Ok(None)
    }
}

/// Deliberately wrong: prunes every selected node, whatever its neighbours say.
pub struct GreedyMutantPruner;

impl PruningAlgorithm for GreedyMutantPruner {
    fn name(&self) -> String {
        "mutant".into()
    }

    fn problem(&self) -> Problem {
        Problem::MIS
    }

    fn declared_rounds(&self) -> usize {
        0
    }

    fn apply(&self, c: &Configuration, y_hat: &[Value]) -> Result<Pruned, PruneError> {
        let w: Vec<bool> = y_hat.iter().map(Value::selected).collect();
        let keep = w.iter().map(|&b| Value::Int(b as u64)).collect();
        Ok(finish(c, w, keep, &vec![Vec::new(); c.n()]))
    }

    fn program(&self) -> Arc<dyn NodeProgram> {
        Arc::new(MutantProgram)
    }
}

struct MutantProgram;

impl NodeProgram for MutantProgram {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(MutantState(carried(ctx).selected()))
    }
}

struct MutantState(bool);

impl NodeState for MutantState {
    fn step(&mut self, _: usize, _: &[Option<Msg>], _: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        Ok(Some(verdict(self.0, Value::Int(self.0 as u64), Vec::new())))
    }
}

/// Look a pruner up by registry name: `ruling1`, `ruling2`, ..., `mis`, `mm`, `slc`, `mutant`.
pub fn pruner_by_name(name: &str) -> Option<Arc<dyn PruningAlgorithm>> {
    match name {
        "mis" => Some(Arc::new(RulingPruner { beta: 1 })),
        "mm" => Some(Arc::new(MmPruner)),
        "slc" => Some(Arc::new(SlcPruner)),
        "mutant" => Some(Arc::new(GreedyMutantPruner)),
        _ => {
            let beta: usize = name.strip_prefix("ruling")?.parse().ok()?;
            (beta >= 1).then(|| Arc::new(RulingPruner { beta }) as Arc<dyn PruningAlgorithm>)
        }
    }
}

pub const PRUNER_NAMES: [&str; 6] = ["mis", "ruling2", "ruling3", "mm", "slc", "mutant"];

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub property: String,
    pub digest: String,
    pub ids: Vec<u64>,
    pub edges: Vec<(u64, u64)>,
    pub tentative: Vec<String>,
    pub residual_solution: Option<Vec<String>>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CertReport {
    pub pruner: String,
    pub problem: String,
    pub instances: usize,
    pub glued_solutions: usize,
    pub distributed_checked: usize,
    pub violations: Vec<Violation>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub oracle_cap: usize,
    pub max_solutions: usize,
    /// Also compare the node program against `apply`.
    pub distributed: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { oracle_cap: ORACLE_CAP, max_solutions: 1 << 16, distributed: false }
    }
}

fn digest(c: &Configuration, y: &[Value]) -> String {
    let mut h = Sha256::new();
    h.update(c.graph.to_edge_list());
    for v in y {
        h.update(v.to_string());
        h.update(b",");
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn show(y: &[Value]) -> Vec<String> {
    y.iter().map(ToString::to_string).collect()
}

fn input_bound(c: &Configuration) -> Option<u64> {
    c.inputs.iter().filter_map(|i| i.delta_hat).max()
}

/// Checks solution detection, its converse, gluing against every oracle
/// solution of the residual, monotonicity of the registered parameters, and
/// optionally agreement of the node program with `apply`.
pub fn certify_pruning(
    p: &dyn PruningAlgorithm,
    corpus: &[Configuration],
    samples: &mut dyn FnMut(&Configuration) -> Vec<Vec<Value>>,
    opts: &CertifyOptions,
) -> Result<CertReport, PruneError> {
    let problem = p.problem();
    let mut report = CertReport { pruner: p.name(), problem: problem.name(), ..CertReport::default() };
    for c in corpus {
        if c.n() > opts.oracle_cap {
            return Err(ProblemError::TooLarge { n: c.n(), cap: opts.oracle_cap }.into());
        }
        for y_hat in samples(c) {
            report.instances += 1;
            let mut violation = |property: &str, residual: Option<&[Value]>, detail: String| {
                report.violations.push(Violation {
                    property: property.into(),
                    digest: digest(c, &y_hat),
                    ids: c.graph.ids().to_vec(),
                    edges: c.graph.edges().into_iter().map(|(u, v)| (c.graph.id(u), c.graph.id(v))).collect(),
                    tentative: show(&y_hat),
                    residual_solution: residual.map(show),
                    detail,
                });
            };
            let pr = p.apply(c, &y_hat)?;
            let valid = problem.verify(c, &y_hat)?;
            if valid && !pr.all_pruned() {
                violation("solution_detection", None, "valid tentative output not fully pruned".into());
            }
            if pr.all_pruned() && !valid {
                violation("pruned_all_implies_solution", None, "everything pruned but output invalid".into());
            }
            let sols = enumerate_solutions_limited(&problem, &pr.residual, opts.oracle_cap, opts.max_solutions)?;
            for y_res in &sols {
                report.glued_solutions += 1;
                let glued = pr.glue(y_res);
                if !problem.verify(c, &glued)? {
                    violation("gluing", Some(y_res), format!("combined output {:?} invalid", show(&glued)));
                    break;
                }
            }
            for param in GraphParam::ALL {
                if let (Some(after), Some(before)) = (param.eval(&pr.residual.graph), param.eval(&c.graph)) {
                    if after > before {
                        violation("monotonicity", None, format!("{} grew from {before} to {after}", param.name()));
                    }
                }
            }
            if let (Some(after), Some(before)) = (input_bound(&pr.residual), input_bound(c)) {
                if after > before {
                    violation("monotonicity", None, format!("degree bound grew from {before} to {after}"));
                }
            }
            if opts.distributed {
                report.distributed_checked += 1;
                let (dist, rounds) = apply_distributed(p, c, &y_hat)?;
                let keep_agrees = (0..c.n()).all(|v| !pr.w[v] || dist.keep[v] == pr.keep[v]);
                if dist.w != pr.w || !keep_agrees || dist.residual != pr.residual {
                    violation("distributed", None, "node program disagrees with apply".into());
                }
                if c.n() > 0 && rounds != p.declared_rounds() {
                    violation("distributed", None, format!("took {rounds} rounds, declared {}", p.declared_rounds()));
                }
            }
        }
    }
    Ok(report)
}

/// Every 0/1 vector of length `n`.
pub fn all_binary(n: usize) -> Vec<Vec<Value>> {
    (0u32..1 << n).map(|m| (0..n).map(|v| Value::Int((m >> v & 1) as u64)).collect()).collect()
}

/// Tentative matching labels: labels of a random edge subset (a node with
/// several chosen edges takes one of them), plus random noise and zeros.
pub fn random_mm_labels(c: &Configuration, rng: &mut impl Rng) -> Vec<Value> {
    let g = &c.graph;
    let n = g.n() as u64;
    let mut y: Vec<Value> = vec![Value::zero(); g.n()];
    for (u, v) in g.edges() {
        if rng.gen_bool(0.5) {
            let l = rng.gen_range(1..=n + 2);
            y[u] = Value::Int(l);
            y[v] = Value::Int(l);
        }
    }
    for x in y.iter_mut() {
        match rng.gen_range(0..6) {
            0 => *x = Value::zero(),
            1 => *x = Value::Int(rng.gen_range(1..=n + 2)),
            _ => {}
        }
    }
    y
}

/// A random valid strong list-coloring instance on `G(n, 0.4)`.
pub fn random_slc_instance(rng: &mut impl Rng, n: usize) -> Configuration {
    let g = crate::graph::generate(&crate::graph::Family::Gnp { n, p: 0.4 }, rng.gen()).expect("valid family");
    let dh = g.max_degree() as u64 + rng.gen_range(0..2);
    let classes = rng.gen_range(1..4);
    let inputs = (0..n)
        .map(|v| {
            let mut l = ColorList::full(classes, dh + 1);
            let spare = dh - g.degree(v) as u64;
            for k in 1..=classes {
                for _ in 0..rng.gen_range(0..=spare) {
                    l.remove((k, rng.gen_range(1..=dh + 1)));
                }
            }
            Input { delta_hat: Some(dh), lists: Some(l), ..Input::plain(g.id(v)) }
        })
        .collect();
    Configuration::new(g, inputs).expect("identities match")
}

/// Tentative list colors, some outside the lists.
pub fn random_slc_output(rng: &mut impl Rng, c: &Configuration) -> Vec<Value> {
    c.inputs
        .iter()
        .map(|i| {
            let l = i.lists.as_ref().expect("list-coloring instance");
            Value::Pair(rng.gen_range(1..=l.classes() + 1), rng.gen_range(1..=l.copies()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ColorList, Input};
    use crate::graph::{all_graphs, Graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ints(xs: &[u64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Int(x)).collect()
    }

    fn path(n: usize) -> Configuration {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Configuration::plain(Graph::with_sequential_ids(n, &edges).unwrap())
    }

    fn slc_config(g: Graph, dh: u64, lists: Vec<ColorList>) -> Configuration {
        let inputs = g
            .ids()
            .iter()
            .zip(lists)
            .map(|(&id, l)| Input { id, delta_hat: Some(dh), lists: Some(l), ..Input::plain(id) })
            .collect();
        Configuration::new(g, inputs).unwrap()
    }

    #[test]
    fn ruling_examples() {
        let p = RulingPruner { beta: 1 };
        let e = path(2);
        assert_eq!(p.apply(&e, &ints(&[1, 1])).unwrap().w, vec![false, false]);
        assert!(p.apply(&e, &ints(&[1, 0])).unwrap().all_pruned());
        let pr = p.apply(&path(3), &ints(&[1, 0, 0])).unwrap();
        assert_eq!(pr.w, vec![true, true, false]);
        assert_eq!(pr.residual.graph.ids(), &[3]);
        // garbage counts as unselected
        assert_eq!(p.apply(&path(3), &ints(&[1, 9, 9])).unwrap().w, vec![true, true, false]);
    }

    #[test]
    fn mm_examples() {
        let p = MmPruner;
        let pr = p.apply(&path(2), &ints(&[7, 7])).unwrap();
        assert!(pr.all_pruned());
        assert_eq!(pr.keep, ints(&[1, 1]));
        assert!(p.apply(&path(3), &ints(&[5, 5, 0])).unwrap().all_pruned());
        assert_eq!(p.apply(&path(3), &ints(&[0, 0, 0])).unwrap().w, vec![false; 3]);
    }

    #[test]
    fn slc_examples() {
        let p = SlcPruner;
        let e = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        let c = slc_config(e, 1, vec![ColorList::full(2, 2), ColorList::full(2, 2)]);
        let good = vec![Value::Pair(1, 1), Value::Pair(2, 1)];
        assert!(p.apply(&c, &good).unwrap().all_pruned());
        let pr = p.apply(&c, &[Value::Pair(3, 1), Value::Pair(1, 2)]).unwrap();
        assert_eq!(pr.w, vec![false, true]);
        let l = pr.residual.inputs[0].lists.as_ref().unwrap();
        assert!(!l.contains((1, 2)) && l.len() == 3);
        assert!(matches!(p.apply(&path(2), &good), Err(PruneError::Malformed(_))));
    }

    #[test]
    fn combine_cases() {
        let ids = [1, 2, 3];
        let all: BTreeMap<u64, Value> = ids.iter().map(|&i| (i, Value::Int(i))).collect();
        let none = BTreeMap::new();
        assert_eq!(combine_outputs(&ids, &all, &none).unwrap(), ints(&[1, 2, 3]));
        assert_eq!(combine_outputs(&ids, &none, &all).unwrap(), ints(&[1, 2, 3]));
        let a: BTreeMap<u64, Value> = [(1, Value::Int(9))].into();
        let b: BTreeMap<u64, Value> = [(2, Value::Int(8)), (3, Value::Int(7))].into();
        assert_eq!(combine_outputs(&ids, &a, &b).unwrap(), ints(&[9, 8, 7]));
        assert!(combine_outputs(&ids, &all, &b).is_err());
        assert!(combine_outputs(&ids, &a, &none).is_err());
    }

    fn corpus(max_n: usize) -> Vec<Configuration> {
        (0..=max_n).flat_map(all_graphs).map(Configuration::plain).collect()
    }

    #[test]
    fn ruling_pruners_certify_on_four_nodes() {
        let opts = CertifyOptions { distributed: true, ..CertifyOptions::default() };
        for beta in 1..=2 {
            let rep = certify_pruning(&RulingPruner { beta }, &corpus(4), &mut |c| all_binary(c.n()), &opts).unwrap();
            assert!(rep.passed(), "{:?}", rep.violations.first());
        }
    }

    #[test]
    fn mm_pruner_certifies_on_four_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = CertifyOptions { distributed: true, ..CertifyOptions::default() };
        let rep =
            certify_pruning(&MmPruner, &corpus(4), &mut |c| (0..40).map(|_| random_mm_labels(c, &mut rng)).collect(), &opts)
                .unwrap();
        assert!(rep.passed(), "{:?}", rep.violations.first());
    }

    #[test]
    fn mutant_fails_gluing_on_an_edge() {
        let rep =
            certify_pruning(&GreedyMutantPruner, &[path(2)], &mut |c| all_binary(c.n()), &CertifyOptions::default()).unwrap();
        assert!(rep.violations.iter().any(|v| v.property == "gluing"));
    }

    #[test]
    fn slc_residual_stays_an_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=8);
            let c = random_slc_instance(&mut rng, n);
            assert!(check_slc_instance(&c));
            let y = random_slc_output(&mut rng, &c);
            let pr = SlcPruner.apply(&c, &y).unwrap();
            assert!(check_slc_instance(&pr.residual));
            let (dist, rounds) = apply_distributed(&SlcPruner, &c, &y).unwrap();
            assert_eq!(dist.w, pr.w);
            assert_eq!(dist.residual, pr.residual);
            assert_eq!(rounds, 2);
        }
    }

    #[test]
    fn slc_pruner_certifies_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let corpus: Vec<Configuration> = (0..60)
            .map(|_| {
                let n = rng.gen_range(1..=4);
                random_slc_instance(&mut rng, n)
            })
            .collect();
        let rep = certify_pruning(
            &SlcPruner,
            &corpus,
            &mut |c| (0..10).map(|_| random_slc_output(&mut rng, c)).collect(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert!(rep.glued_solutions > 0);
    }
}
