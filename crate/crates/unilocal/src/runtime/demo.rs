//! Small programs for exercising the executor.

use rand::Rng;

use super::{decode, encode, Fault, Msg, NodeCtx, NodeProgram, NodeState};
use crate::config::Value;

fn start_value(ctx: &NodeCtx<'_>) -> u64 {
    ctx.input.carried.as_ref().and_then(Value::as_int).unwrap_or(ctx.id)
}

fn absorb_max(cur: &mut u64, inbox: &[Option<Msg>]) -> Result<(), Fault> {
    for m in inbox.iter().flatten() {
        *cur = (*cur).max(decode::<u64>(m)?);
    }
    Ok(())
}

/// Outputs its own identity in round 0.
pub struct ConstantId;

impl NodeProgram for ConstantId {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(ConstantState(ctx.id))
    }
}

struct ConstantState(u64);

impl NodeState for ConstantState {
    fn step(&mut self, _: usize, _: &[Option<Msg>], _: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        Ok(Some(Value::Int(self.0)))
    }
}

/// Never outputs, never sends.
pub struct Silent;

impl NodeProgram for Silent {
    fn init(&self, _: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(SilentState)
    }
}

struct SilentState;

impl NodeState for SilentState {
    fn step(&mut self, _: usize, _: &[Option<Msg>], _: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        Ok(None)
    }
}

/// Floods the largest value seen (carried value, else identity) and outputs
/// it after `rounds` rounds.
pub struct FloodMax {
    pub rounds: usize,
}

impl NodeProgram for FloodMax {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(FloodState { cur: start_value(ctx), stop: self.rounds })
    }
}

struct FloodState {
    cur: u64,
    stop: usize,
}

impl NodeState for FloodState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        absorb_max(&mut self.cur, inbox)?;
        if round >= self.stop {
            return Ok(Some(Value::Int(self.cur)));
        }
        outbox.iter_mut().for_each(|m| *m = Some(encode(&self.cur)));
        Ok(None)
    }
}

/// Flooding with a per-node stopping round `id mod spread`; the output mixes
/// in the degree so port bookkeeping errors show up.
pub struct StaggeredStop {
    pub spread: u64,
}

impl NodeProgram for StaggeredStop {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(StaggeredState {
            cur: start_value(ctx),
            stop: (ctx.id % self.spread.max(1)) as usize,
            degree: ctx.degree as u64,
        })
    }
}

struct StaggeredState {
    cur: u64,
    stop: usize,
    degree: u64,
}

impl NodeState for StaggeredState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        absorb_max(&mut self.cur, inbox)?;
        if round >= self.stop {
            return Ok(Some(Value::Int(self.cur * 8 + self.degree)));
        }
        outbox.iter_mut().for_each(|m| *m = Some(encode(&self.cur)));
        Ok(None)
    }
}

/// Each node draws a stopping round in `[0, max_rounds]` and a random value;
/// it floods the maximum of (value, carried) and outputs it when it stops.
pub struct RandomFlood {
    pub max_rounds: usize,
}

impl NodeProgram for RandomFlood {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let mut rng = ctx.rng();
        let stop = rng.gen_range(0..=self.max_rounds);
        let cur = (rng.gen::<u64>() >> 20) ^ start_value(ctx);
        Box::new(FloodState { cur, stop })
    }
}
