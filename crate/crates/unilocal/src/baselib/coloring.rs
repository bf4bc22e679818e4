//! Polynomial color reduction and the greedy MIS over a coloring.

use std::sync::Arc;

use num_integer::Roots;
use primal_check::miller_rabin;
use serde::{Deserialize, Serialize};

use crate::config::Value;
use crate::runtime::{compose, decode, encode, Fault, Msg, NodeCtx, NodeProgram, NodeState};

/// One reduction step: colors in `[1, c]` are read as polynomials of degree
/// `d` over GF(q) and mapped into `[1, q^2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ColorReductionParams {
    pub c: u64,
    pub delta: u64,
    pub q: u64,
    pub d: u64,
}

pub fn smallest_prime_above(x: u64) -> u64 {
    let mut p = x.saturating_add(1);
    while !miller_rabin(p) {
        p += 1;
    }
    p
}

/// Least `r` with `r^k >= c`.
fn ceil_root(c: u64, k: u32) -> u64 {
    let r = c.nth_root(k);
    if (r as u128).pow(k) < c as u128 {
        r + 1
    } else {
        r
    }
}

/// Parameters with the smallest field among all degrees with
/// `q > delta * d` and `q^(d+1) >= c`; `None` when no step shrinks `c`.
pub fn reduction_params(c: u64, delta: u64) -> Option<ColorReductionParams> {
    let mut best: Option<(u64, u64)> = None;
    for d in 1..64u64 {
        let lo = delta.saturating_mul(d);
        if best.is_some_and(|(q, _)| lo >= q) {
            break;
        }
        let q = smallest_prime_above(lo.max(ceil_root(c, d as u32 + 1).saturating_sub(1)));
        if best.is_none_or(|(bq, _)| q < bq) {
            best = Some((q, d));
        }
    }
    let (q, d) = best.expect("degree 1 always yields a field");
    ((q as u128) * (q as u128) < c as u128).then_some(ColorReductionParams { c, delta, q, d })
}

/// Steps applied from palette `m` until none shrinks the palette.
pub fn reduction_schedule(m: u64, delta: u64) -> Vec<ColorReductionParams> {
    let mut out = Vec::new();
    let mut c = m.max(1);
    while let Some(p) = reduction_params(c, delta) {
        c = p.q * p.q;
        out.push(p);
    }
    out
}

/// Palette the reduction can end at for degree bound `delta`: the square of
/// the smallest prime above `2 * delta`.
pub fn linial_palette(delta: u64) -> u64 {
    let p = smallest_prime_above(delta.saturating_mul(2));
    p.saturating_mul(p)
}

fn poly_eval(x: u64, p: &ColorReductionParams, a: u64) -> u64 {
    let q = p.q as u128;
    let mut rest = (x.max(1) - 1) as u128;
    let (mut acc, mut pow) = (0u128, 1u128);
    for _ in 0..=p.d {
        acc = (acc + (rest % q) * pow) % q;
        rest /= q;
        pow = pow * (a as u128) % q;
    }
    acc as u64
}

/// New color of a node colored `x` whose neighbours hold `nbrs`. Picks the
/// smallest evaluation point where `x`'s polynomial differs from every
/// neighbour's; falls back to point 0 if the degree bound was too small.
pub fn reduce_color(x: u64, nbrs: &[u64], p: &ColorReductionParams) -> u64 {
    let a = (0..p.q)
        .find(|&a| {
            let mine = poly_eval(x, p, a);
            nbrs.iter().all(|&y| y == x || poly_eval(y, p, a) != mine)
        })
        .unwrap_or(0);
    a * p.q + poly_eval(x, p, a) + 1
}

/// Reduction from the identity coloring (or the input's initial coloring)
/// with shared guesses for the largest identity and the degree.
pub struct LinialColor {
    schedule: Arc<Vec<ColorReductionParams>>,
}

impl LinialColor {
    pub fn new(m: u64, delta: u64) -> Self {
        LinialColor { schedule: Arc::new(reduction_schedule(m, delta)) }
    }

    pub fn rounds(&self) -> usize {
        self.schedule.len()
    }
}

pub fn linial_color(m: u64, delta: u64) -> Arc<dyn NodeProgram> {
    Arc::new(LinialColor::new(m, delta))
}

impl NodeProgram for LinialColor {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(LinialState { schedule: self.schedule.clone(), color: ctx.input.color.unwrap_or(ctx.id) })
    }
}

struct LinialState {
    schedule: Arc<Vec<ColorReductionParams>>,
    color: u64,
}

impl NodeState for LinialState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        if round >= 1 {
            let nbrs: Vec<u64> = inbox.iter().flatten().map(|m| decode(m)).collect::<Result<_, _>>()?;
            self.color = reduce_color(self.color, &nbrs, &self.schedule[round - 1]);
        }
        if round >= self.schedule.len() {
            return Ok(Some(Value::Int(self.color)));
        }
        let m = encode(&self.color);
        outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
        Ok(None)
    }
}

#[derive(Serialize, Deserialize)]
enum Greedy {
    Color(u64, u64),
    Pending,
    Joined,
}

/// Greedy MIS over the carried coloring: a node joins once every neighbour
/// ranked below it (by color, then identity) is out, and drops out as soon
/// as a neighbour joins.
pub struct MisByColor;

impl NodeProgram for MisByColor {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let color = ctx.input.carried.as_ref().and_then(Value::as_int).unwrap_or(u64::MAX);
        Box::new(GreedyState { key: (color, ctx.id), lower: Vec::new(), joined: false })
    }
}

struct GreedyState {
    key: (u64, u64),
    lower: Vec<usize>,
    joined: bool,
}

impl NodeState for GreedyState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        if self.joined {
            return Ok(Some(Value::Int(1)));
        }
        let msgs: Vec<Option<Greedy>> = inbox.iter().map(|m| m.as_deref().map(decode).transpose()).collect::<Result<_, _>>()?;
        let send = |outbox: &mut [Option<Msg>], g: Greedy| {
            let m = encode(&g);
            outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
        };
        match round {
            0 => {
                send(outbox, Greedy::Color(self.key.0, self.key.1));
                return Ok(None);
            }
            1 => {
                for (p, m) in msgs.iter().enumerate() {
                    if let Some(Greedy::Color(c, id)) = m {
                        if (*c, *id) < self.key {
                            self.lower.push(p);
                        }
                    }
                }
            }
            _ => {
                if msgs.iter().any(|m| matches!(m, Some(Greedy::Joined))) {
                    return Ok(Some(Value::Int(0)));
                }
                self.lower.retain(|&p| msgs[p].is_some());
            }
        }
        if self.lower.is_empty() {
            self.joined = true;
            send(outbox, Greedy::Joined);
        } else {
            send(outbox, Greedy::Pending);
        }
        Ok(None)
    }
}

/// Coloring followed by the greedy MIS over it.
pub fn mis_from_coloring(coloring: Arc<dyn NodeProgram>) -> Arc<dyn NodeProgram> {
    compose(vec![(coloring, "color".into()), (Arc::new(MisByColor), "mis".into())])
}
