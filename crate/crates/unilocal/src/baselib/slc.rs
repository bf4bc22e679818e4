//! Coloring algorithms as list-coloring algorithms, and the layered
//! coloring built on top of them.

use std::sync::Arc;

use thiserror::Error;

use crate::config::{ColorList, Input, Value};
use crate::graph::{layer_of, layer_thresholds, GraphParam};
use crate::problems::Problem;
use crate::pruning::SlcPruner;
use crate::runtime::{After, Fault, Msg, NodeCtx, NodeProgram, NodeState, PhasePlan, PhaseSpec, SequenceProgram};
use crate::transformer::{dominate_uniformize, NonUniform, TransformError, TransformOptions, Uniform};

#[derive(Debug, Error, PartialEq)]
pub enum AdapterError {
    #[error("{0} does not take a maximum-degree guess")]
    NoDegree(String),
    #[error("the running time of {0} depends on the maximum degree")]
    DegreeInBound(String),
    #[error("{name} needs a guess for {param}, which a layer cannot supply")]
    Unsupported { name: String, param: &'static str },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Reads the degree guess from the instance's `delta_hat` and turns color `c`
/// into the first copy of class `c` still in the node's list.
pub fn slc_adapter(a: &NonUniform) -> Result<NonUniform, AdapterError> {
    let pos = a.params.iter().position(|&p| p == GraphParam::MaxDegree).ok_or_else(|| AdapterError::NoDegree(a.name.clone()))?;
    if a.bound_params.contains(&GraphParam::MaxDegree) {
        return Err(AdapterError::DegreeInBound(a.name.clone()));
    }
    let mut params = a.params.clone();
    params.remove(pos);
    let inner = a.factory.clone();
    Ok(NonUniform {
        name: format!("slc({})", a.name),
        problem: Problem::Slc,
        params,
        bound_params: a.bound_params.clone(),
        bound: a.bound.clone(),
        flavor: a.flavor,
        factory: Arc::new(move |x: &[u64]| Arc::new(ToList { inner: inner.clone(), pos, rest: x.to_vec() }) as Arc<dyn NodeProgram>),
    })
}

struct ToList {
    inner: crate::transformer::Factory,
    pos: usize,
    rest: Vec<u64>,
}

impl NodeProgram for ToList {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let mut x = self.rest.clone();
        x.insert(self.pos, ctx.input.delta_hat.unwrap_or(0).max(1));
        let state = (self.inner)(&x).init(ctx);
        Box::new(ToListState { state, list: ctx.input.lists.clone() })
    }
}

struct ToListState {
    state: Box<dyn NodeState>,
    list: Option<ColorList>,
}

impl NodeState for ToListState {
    fn step(&mut self, round: usize, inbox: &[Option<Msg>], outbox: &mut [Option<Msg>]) -> Result<Option<Value>, Fault> {
        let Some(out) = self.state.step(round, inbox, outbox)? else { return Ok(None) };
        let c = out.as_int().unwrap_or(0);
        let j = self.list.as_ref().and_then(|l| l.first_copy(c)).unwrap_or(0);
        Ok(Some(Value::Pair(c, j)))
    }
}

/// Per-node layer data: the layer index and its degree cap `D`.
fn layer(palette: &dyn Fn(u64) -> u64, deg: usize) -> (u64, u64) {
    let t = layer_thresholds(palette, deg.max(1) as u64);
    let i = layer_of(deg as u64, &t).expect("thresholds cover the own degree");
    (i as u64, t[i + 1])
}

/// Colors `(c, j)` of a layer with cap `D` as distinct positive integers.
pub fn encode_list_color(c: u64, j: u64, d: u64) -> u64 {
    c.saturating_sub(1) * (d + 1) + j
}

/// Degree-layered coloring: every layer gets its own list-coloring run
/// (uniform, guessing only identities), a re-coloring from those colors
/// with known guesses, and a palette slot `[g(D) + 1, 2 g(D)]` of its own.
pub struct Layered {
    pub list_coloring: Uniform,
    pub program: Arc<dyn NodeProgram>,
}

pub fn layered_coloring(
    a: &NonUniform,
    palette: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    opts: &TransformOptions,
) -> Result<Layered, AdapterError> {
    for &p in &a.params {
        if !matches!(p, GraphParam::MaxDegree | GraphParam::MaxId) {
            return Err(AdapterError::Unsupported { name: a.name.clone(), param: p.name() });
        }
    }
    let b = dominate_uniformize(&slc_adapter(a)?, &SlcPruner, &[], opts)?;
    let recolor = Arc::new(Recolor { a: a.clone(), palette: palette.clone() });
    let plan = LayeredPlan { slc: b.program.clone(), recolor, palette };
    Ok(Layered { list_coloring: b, program: Arc::new(SequenceProgram::new(Arc::new(plan))) })
}

struct LayeredPlan {
    slc: Arc<dyn NodeProgram>,
    recolor: Arc<Recolor>,
    palette: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl PhasePlan for LayeredPlan {
    fn phase(&self, k: usize) -> Option<PhaseSpec> {
        match k {
            0 => Some(PhaseSpec::new(self.slc.clone(), "slc").masked()),
            1 => Some(PhaseSpec::new(self.recolor.clone(), "recolor").masked()),
            _ => None,
        }
    }

    fn first_record(&self, degree: usize, input: &Input) -> Input {
        let (_, d) = layer(&*self.palette, degree);
        Input {
            id: input.id,
            color: None,
            delta_hat: Some(d),
            lists: Some(ColorList::full((self.palette)(d), d + 1)),
            carried: None,
        }
    }

    fn tag(&self, degree: usize, _input: &Input) -> Option<u64> {
        Some(layer(&*self.palette, degree).0)
    }

    fn after(&self, k: usize, input: &Input, output: Value) -> After {
        let d = input.delta_hat.unwrap_or(1);
        if k == 0 {
            let color = output.as_pair().map(|(c, j)| encode_list_color(c, j, d));
            return After::Continue(Input { color: Some(color.unwrap_or(0)), lists: None, carried: None, ..input.clone() });
        }
        After::Leave(Value::Int((self.palette)(d) + output.as_int().unwrap_or(0)))
    }
}

/// The base coloring run inside one layer: degree guess `D`, identity
/// guess large enough for the encoded list colors.
struct Recolor {
    a: NonUniform,
    palette: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl Recolor {
    fn guesses(&self, d: u64) -> Vec<u64> {
        let m = 2 * d * (self.palette)(d);
        self.a.params.iter().map(|&p| if p == GraphParam::MaxDegree { d } else { m }).collect()
    }
}

impl NodeProgram for Recolor {
    fn init(&self, ctx: &NodeCtx<'_>) -> Box<dyn NodeState> {
        let d = ctx.input.delta_hat.unwrap_or(1);
        self.a.program(&self.guesses(d)).init(ctx)
    }
}

/// Palette bound of the layered coloring on a graph of maximum degree `delta`.
pub fn layered_palette(palette: &dyn Fn(u64) -> u64, delta: u64) -> u64 {
    let (_, d) = layer(palette, delta as usize);
    2 * palette(d)
}

