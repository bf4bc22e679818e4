//! Luby's randomized MIS, optionally cut off after a number of iterations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::ceil_log2;
use crate::config::Value;
use crate::runtime::{decode, encode, Fault, Msg, NodeCtx, NodeProgram, NodeState};

/// Smallest integer factor reaching success rate 1/2 in the calibration
/// sweep (`cargo run --release --example calibrate_luby`).
pub const LUBY_KAPPA: u64 = 1;

/// Iterations run for a size guess `n`: `kappa * ceil(log2 n)`, at least one.
pub fn luby_iterations(n: u64, kappa: u64) -> u64 {
    (kappa * ceil_log2(n)).max(1)
}

/// Two rounds per iteration: draw and compare, then announce. `None` runs
/// until every node has decided.
pub struct Luby {
    pub iterations: Option<u64>,
}

impl NodeProgram for Luby {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        Box::new(LubyState { id: ctx.id, rng: ctx.rng(), limit: self.iterations, mine: (0, 0), joined: false })
    }
}

#[derive(Serialize, Deserialize)]
enum LubyMsg {
    Draw(u64, u64),
    Joined,
}

struct LubyState {
    id: u64,
    rng: ChaCha8Rng,
    limit: Option<u64>,
    mine: (u64, u64),
    joined: bool,
}

impl NodeState for LubyState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        if self.joined {
            return Ok(Some(Value::Int(1)));
        }
        let msgs: Vec<LubyMsg> = inbox.iter().flatten().map(|m| decode(m)).collect::<Result<_, _>>()?;
        if round.is_multiple_of(2) {
            if msgs.iter().any(|m| matches!(m, LubyMsg::Joined)) {
                return Ok(Some(Value::Int(0)));
            }
            if self.limit.is_some_and(|l| round as u64 >= 2 * l) {
                return Ok(Some(Value::Int(0)));
            }
            self.mine = (self.rng.gen(), self.id);
            let m = encode(&LubyMsg::Draw(self.mine.0, self.mine.1));
            outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
        } else {
            let smallest = msgs.iter().all(|m| match *m {
                LubyMsg::Draw(r, id) => self.mine < (r, id),
                LubyMsg::Joined => true,
            });
            if smallest {
                self.joined = true;
                let m = encode(&LubyMsg::Joined);
                outbox.iter_mut().for_each(|o| *o = Some(m.clone()));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;
    use crate::graph::{generate, Family};
    use crate::problems::Problem;
    use crate::runtime::run_sync;

    #[test]
    fn untruncated_always_finishes_with_an_mis() {
        for seed in 0..20 {
            let c = Configuration::plain(generate(&Family::Gnp { n: 40, p: 0.2 }, seed).unwrap());
            let (y, _) = run_sync(&Luby { iterations: None }, &c, 100_000, seed).unwrap();
            assert!(Problem::MIS.verify(&c, &y).unwrap());
        }
    }

    #[test]
    fn truncation_caps_the_rounds() {
        assert_eq!(luby_iterations(1, 3), 1);
        assert_eq!(luby_iterations(64, 2), 12);
        let c = Configuration::plain(generate(&Family::Clique { n: 30 }, 0).unwrap());
        for l in 1..4 {
            let (y, rep) = run_sync(&Luby { iterations: Some(l) }, &c, 100_000, 7).unwrap();
            assert!(rep.rounds_total as u64 <= 2 * l);
            // a clique always decides in the first iteration
            assert!(Problem::MIS.verify(&c, &y).unwrap());
        }
    }

    #[test]
    fn outputs_depend_only_on_seed() {
        let c = Configuration::plain(generate(&Family::Gnp { n: 30, p: 0.2 }, 1).unwrap());
        let a = run_sync(&Luby { iterations: None }, &c, 1000, 3).unwrap().0;
        let b = run_sync(&Luby { iterations: None }, &c, 1000, 3).unwrap().0;
        assert_eq!(a, b);
    }
}
