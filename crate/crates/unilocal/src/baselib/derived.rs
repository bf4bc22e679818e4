//! Running a program on a graph derived from the network: every real node
//! plays the derived nodes it owns and relays their messages.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{Input, Value};
use crate::graph::{clique_identity, edge_identity};
use crate::runtime::{decode, encode, Fault, Msg, NodeCtx, NodeProgram, NodeState};

/// A derived node hosted by a real node.
struct Virtual {
    state: Option<Box<dyn NodeState>>,
    port_of: HashMap<u64, usize>,
    ports: Vec<u64>,
    inbox: Vec<Option<Msg>>,
    output: Option<Value>,
}

impl Virtual {
    fn new(program: &dyn NodeProgram, vid: u64, mut nbrs: Vec<u64>, seed: u64, label: &str) -> Self {
        nbrs.sort_unstable();
        nbrs.dedup();
        let input = Input::plain(vid);
        let ctx = NodeCtx { id: vid, degree: nbrs.len(), input: &input, seed, label };
        let state = program.init(&ctx);
        Virtual {
            state: Some(state),
            port_of: nbrs.iter().enumerate().map(|(p, &v)| (v, p)).collect(),
            inbox: vec![None; nbrs.len()],
            ports: nbrs,
            output: None,
        }
    }

    fn deliver(&mut self, from: u64, m: Msg) {
        if let Some(&p) = self.port_of.get(&from) {
            self.inbox[p] = Some(m);
        }
    }

    /// One step; returns the messages addressed by derived identity.
    fn step(&mut self, s: usize) -> Result<Vec<(u64, Msg)>, Fault> {
        let Some(state) = self.state.as_mut() else { return Ok(Vec::new()) };
        let inbox = std::mem::replace(&mut self.inbox, vec![None; self.ports.len()]);
        let mut outbox = vec![None; self.ports.len()];
        if let Some(v) = state.step(s, &inbox, &mut outbox)? {
            self.output = Some(v);
            self.state = None;
            return Ok(Vec::new());
        }
        Ok(self.ports.iter().zip(outbox).filter_map(|(&to, m)| m.map(|m| (to, m))).collect())
    }
}

/// Runs `base` on the clique product of the network and reads a color off
/// the selected clique member: node `u` gets the smallest `i` with `u_i`
/// selected, or 0 if none is.
pub struct ProductSim {
    pub base: Arc<dyn NodeProgram>,
}

impl NodeProgram for ProductSim {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(ProductState {
            base: self.base.clone(),
            id: ctx.id,
            deg: ctx.degree,
            seed: ctx.seed,
            label: ctx.label.to_string(),
            nbrs: Vec::new(),
            members: Vec::new(),
            local: Vec::new(),
        })
    }
}

struct ProductState {
    base: Arc<dyn NodeProgram>,
    id: u64,
    deg: usize,
    seed: u64,
    label: String,
    /// Per port: neighbour identity and degree.
    nbrs: Vec<Option<(u64, usize)>>,
    members: Vec<Virtual>,
    /// Messages between members of the own clique, for the next step.
    local: Vec<(u64, usize, Msg)>,
}

impl NodeState for ProductState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        if round == 0 {
            let m = encode(&(self.id, self.deg));
            outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
            return Ok(None);
        }
        if round == 1 {
            self.nbrs = inbox.iter().map(|m| m.as_deref().map(decode).transpose()).collect::<Result<_, _>>()?;
            let k = self.deg + 1;
            for i in 1..=k {
                let mut nb: Vec<u64> = (1..=k).filter(|&j| j != i).map(|j| clique_identity(self.id, j as u64)).collect();
                for &(nid, ndeg) in self.nbrs.iter().flatten() {
                    if i <= 1 + self.deg.min(ndeg) {
                        nb.push(clique_identity(nid, i as u64));
                    }
                }
                let vid = clique_identity(self.id, i as u64);
                self.members.push(Virtual::new(&*self.base, vid, nb, self.seed, &self.label));
            }
        } else {
            for (p, m) in inbox.iter().enumerate() {
                let (Some(m), Some((nid, _))) = (m, self.nbrs.get(p).copied().flatten()) else { continue };
                let items: Vec<(u64, Msg)> = decode(m)?;
                for (i, payload) in items {
                    if let Some(v) = self.members.get_mut(i as usize - 1) {
                        v.deliver(clique_identity(nid, i), payload);
                    }
                }
            }
            for (from, i, payload) in self.local.drain(..) {
                self.members[i].deliver(from, payload);
            }
        }
        let s = round - 1;
        let mut remote: Vec<Vec<(u64, Msg)>> = vec![Vec::new(); outbox.len()];
        let own: HashMap<u64, usize> = (0..self.members.len()).map(|i| (clique_identity(self.id, i as u64 + 1), i)).collect();
        for i in 0..self.members.len() {
            let from = clique_identity(self.id, i as u64 + 1);
            for (to, m) in self.members[i].step(s)? {
                if let Some(&j) = own.get(&to) {
                    self.local.push((from, j, m));
                } else if let Some(p) = self.nbrs.iter().position(|nb| nb.is_some_and(|(nid, _)| clique_identity(nid, i as u64 + 1) == to)) {
                    remote[p].push((i as u64 + 1, m));
                }
            }
        }
        if self.members.iter().all(|v| v.output.is_some()) {
            let color = self.members.iter().position(|v| v.output.as_ref().is_some_and(Value::selected));
            return Ok(Some(Value::Int(color.map_or(0, |i| i as u64 + 1))));
        }
        for (p, items) in remote.into_iter().enumerate() {
            if !items.is_empty() {
                outbox[p] = Some(encode(&items));
            }
        }
        Ok(None)
    }
}

/// A derived-node message on its way from `from` to `to`, which is hosted by `owner`.
#[derive(Clone, Serialize, Deserialize)]
struct Routed {
    from: u64,
    to: u64,
    owner: u64,
    payload: Msg,
}

#[derive(Serialize, Deserialize)]
enum LineWire {
    Id(u64),
    Nbrs(Vec<u64>),
    Batch { routed: Vec<Routed>, done: Option<Value> },
}

/// Runs `base` on the line graph. The edge `{u, v}` is played by its
/// endpoint with the smaller identity; one derived round takes two real
/// rounds (messages go through the shared endpoint). A node outputs
/// `min(id, partner id)` if an incident edge was selected, else 0.
pub struct LineSim {
    pub base: Arc<dyn NodeProgram>,
}

impl NodeProgram for LineSim {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(LineState {
            base: self.base.clone(),
            id: ctx.id,
            seed: ctx.seed,
            label: ctx.label.to_string(),
            ids: Vec::new(),
            port_of: HashMap::new(),
            ends: HashMap::new(),
            owned: BTreeMap::new(),
            relay: Vec::new(),
            arrived: Vec::new(),
            known: HashMap::new(),
        })
    }
}

struct LineState {
    base: Arc<dyn NodeProgram>,
    id: u64,
    seed: u64,
    label: String,
    ids: Vec<Option<u64>>,
    port_of: HashMap<u64, usize>,
    /// Endpoints of every edge within reach.
    ends: HashMap<u64, (u64, u64)>,
    /// Owned edges, keyed by the partner's identity.
    owned: BTreeMap<u64, Virtual>,
    /// Items whose shared endpoint is this node, to be forwarded next round.
    relay: Vec<Routed>,
    /// Items delivered to owned edges before their next step.
    arrived: Vec<Routed>,
    /// Outputs of incident edges, keyed by the partner's identity.
    known: HashMap<u64, Value>,
}

impl LineState {
    fn edge(&mut self, a: u64, b: u64) -> u64 {
        let e = edge_identity(a, b);
        self.ends.insert(e, (a.min(b), a.max(b)));
        e
    }
}

impl NodeState for LineState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        let d = outbox.len();
        if round == 0 {
            if d == 0 {
                return Ok(Some(Value::Int(0)));
            }
            let m = encode(&LineWire::Id(self.id));
            outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
            return Ok(None);
        }
        let wires: Vec<Option<LineWire>> = inbox.iter().map(|m| m.as_deref().map(decode).transpose()).collect::<Result<_, _>>()?;
        if round == 1 {
            self.ids = wires.iter().map(|w| if let Some(LineWire::Id(x)) = w { Some(*x) } else { None }).collect();
            self.port_of = self.ids.iter().enumerate().filter_map(|(p, x)| x.map(|x| (x, p))).collect();
            let mine: Vec<u64> = self.ids.iter().flatten().copied().collect();
            let m = encode(&LineWire::Nbrs(mine));
            outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
            return Ok(None);
        }
        let mut notices: Vec<Option<Value>> = vec![None; d];
        let mut sends: Vec<Vec<Routed>> = vec![Vec::new(); d];
        if round == 2 {
            let mine: Vec<u64> = self.ids.iter().flatten().copied().collect();
            for &w in &mine {
                self.edge(self.id, w);
            }
            for (p, w) in wires.into_iter().enumerate() {
                let (Some(LineWire::Nbrs(list)), Some(v)) = (w, self.ids[p]) else { continue };
                let far: Vec<u64> = list.iter().map(|&w| self.edge(v, w)).collect();
                if self.id < v {
                    let mut nb: Vec<u64> = mine.iter().filter(|&&w| w != v).map(|&w| edge_identity(self.id, w)).collect();
                    nb.extend(far.into_iter().filter(|&e| e != edge_identity(self.id, v)));
                    let vid = edge_identity(self.id, v);
                    self.owned.insert(v, Virtual::new(&*self.base, vid, nb, self.seed, &self.label));
                }
            }
        } else {
            for (p, w) in wires.into_iter().enumerate() {
                if let Some(LineWire::Batch { routed, done }) = w {
                    if let (Some(v), Some(val)) = (self.ids[p], done) {
                        self.known.insert(v, val);
                    }
                    if round.is_multiple_of(2) {
                        self.arrived.extend(routed);
                    } else {
                        self.relay.extend(routed);
                    }
                }
            }
        }
        if round % 2 == 1 {
            for item in std::mem::take(&mut self.relay) {
                if item.owner == self.id {
                    self.arrived.push(item);
                } else if let Some(&p) = self.port_of.get(&item.owner) {
                    sends[p].push(item);
                }
            }
        } else {
            let s = (round - 2) / 2;
            for item in std::mem::take(&mut self.arrived) {
                let (a, b) = self.ends.get(&item.to).copied().unwrap_or((0, 0));
                let partner = if a == self.id { b } else { a };
                if let Some(v) = self.owned.get_mut(&partner) {
                    v.deliver(item.from, item.payload);
                }
            }
            let partners: Vec<u64> = self.owned.keys().copied().collect();
            for v in partners {
                let from = edge_identity(self.id, v);
                let out = self.owned.get_mut(&v).expect("owned edge").step(s)?;
                if !self.known.contains_key(&v) {
                    if let Some(val) = self.owned[&v].output.clone() {
                        self.known.insert(v, val.clone());
                        notices[self.port_of[&v]] = Some(val);
                    }
                }
                for (to, payload) in out {
                    let Some(&(a, b)) = self.ends.get(&to) else { continue };
                    let shared = if a == self.id || b == self.id { self.id } else { v };
                    let item = Routed { from, to, owner: a, payload };
                    if shared == self.id {
                        self.relay.push(item);
                    } else {
                        sends[self.port_of[&v]].push(item);
                    }
                }
            }
        }
        let nothing_to_send = sends.iter().all(Vec::is_empty) && notices.iter().all(Option::is_none);
        if nothing_to_send && self.port_of.keys().all(|v| self.known.contains_key(v)) {
            let partner = self.known.iter().filter(|(_, val)| val.selected()).map(|(&v, _)| v).min();
            return Ok(Some(Value::Int(partner.map_or(0, |v| v.min(self.id)))));
        }
        for (p, (routed, done)) in sends.into_iter().zip(notices).enumerate() {
            if !routed.is_empty() || done.is_some() {
                outbox[p] = Some(encode(&LineWire::Batch { routed, done }));
            }
        }
        Ok(None)
    }
}
