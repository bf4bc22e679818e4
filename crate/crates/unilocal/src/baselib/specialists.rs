//! Uniform MIS programs that are fast on one graph family and may be wrong elsewhere.

use std::sync::Arc;

use crate::bounds::GUESS_CAP;
use crate::config::Value;
use crate::runtime::{decode, encode, Fault, Msg, NodeCtx, NodeProgram, NodeState};

use super::coloring::{linial_color, mis_from_coloring};

/// Correct on graphs of maximum degree 2: guesses are fixed constants.
pub fn path_specialist() -> Arc<dyn NodeProgram> {
    mis_from_coloring(linial_color(GUESS_CAP, 2))
}

/// Correct on cliques of diameter at most 3 hops: floods the largest
/// identity for three rounds, and the holder joins.
pub struct CliqueSpecialist;

pub const CLIQUE_FLOOD_ROUNDS: usize = 3;

impl NodeProgram for CliqueSpecialist {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(Flood { id: ctx.id, best: ctx.id })
    }
}

struct Flood {
    id: u64,
    best: u64,
}

impl NodeState for Flood {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        for m in inbox.iter().flatten() {
            self.best = self.best.max(decode(m)?);
        }
        if round > CLIQUE_FLOOD_ROUNDS {
            return Ok(Some(Value::Int((self.best == self.id) as u64)));
        }
        let m = encode(&self.best);
        outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
        Ok(None)
    }
}
