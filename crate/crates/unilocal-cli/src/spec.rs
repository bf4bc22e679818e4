//! Experiment specs (TOML) and what they resolve to.

use std::sync::Arc;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use unilocal::baselib::{self, layered_coloring, linial, linial_palette, CliqueSpecialist, Luby};
use unilocal::bounds::{AscFn, BoundFn};
use unilocal::graph::{Family, GraphParam};
use unilocal::problems::Problem;
use unilocal::pruning::{pruner_by_name, PruningAlgorithm};
use unilocal::runtime::NodeProgram;
use unilocal::transformer::{
    dominate_uniformize, min_combine, uniformize_det, uniformize_lv, NonUniform, ParamDomination, TransformOptions, Uniform,
};

/// ```toml
/// name = "mis-cycles"
/// base = "mis_from_linial"
/// pruner = "mis"
/// transformer = "det"          # det | lv | dominated | min | none
/// sizes = [16, 32, 64]
/// seeds = 3
/// [family]
/// kind = "cycle"
/// ```
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    /// Registry base, or a uniform program for `none` / `min`.
    #[serde(default)]
    pub base: Option<String>,
    /// Replaces the base's declared bound.
    #[serde(default)]
    pub bound: Option<String>,
    #[serde(default)]
    pub bound_params: Option<Vec<String>>,
    #[serde(default)]
    pub pruner: Option<String>,
    pub transformer: String,
    /// Uniform programs for the min-combiner.
    #[serde(default)]
    pub programs: Vec<String>,
    #[serde(default)]
    pub domination: Vec<DominationSpec>,
    pub family: FamilySpec,
    pub sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub ceiling: Option<u64>,
    #[serde(default = "default_round_cap")]
    pub round_cap: usize,
}

fn default_seeds() -> u64 {
    3
}

fn default_round_cap() -> usize {
    10_000_000
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DominationSpec {
    pub param: String,
    pub by: String,
    pub g: String,
}

/// A family shape; the size comes from the ladder.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: String,
    /// Edge probability.
    #[serde(default)]
    pub p: Option<f64>,
    /// Expected degree: `p = degree / n`.
    #[serde(default)]
    pub degree: Option<f64>,
    /// `p = ln_factor * ln(n) / n`.
    #[serde(default)]
    pub ln_factor: Option<f64>,
    /// Regular degree.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub trees: Option<usize>,
}

impl FamilySpec {
    fn prob(&self, n: usize) -> Result<f64> {
        let nf = n.max(1) as f64;
        match (self.p, self.degree, self.ln_factor) {
            (Some(p), None, None) => Ok(p),
            (None, Some(c), None) => Ok((c / nf).min(1.0)),
            (None, None, Some(f)) => Ok((f * nf.ln() / nf).clamp(0.0, 1.0)),
            _ => bail!("family {} needs exactly one of p, degree, ln_factor", self.kind),
        }
    }

    pub fn at(&self, n: usize) -> Result<Family> {
        Ok(match self.kind.as_str() {
            "path" => Family::Path { n },
            "cycle" => Family::Cycle { n },
            "clique" => Family::Clique { n },
            "grid" => {
                let rows = ((n as f64).sqrt() as usize).max(1);
                Family::Grid { rows, cols: n / rows }
            }
            "gnp" => Family::Gnp { n, p: self.prob(n)? },
            "forest" => Family::Forest { n, trees: self.trees.unwrap_or(1) },
            "regular" => Family::Regular { n, d: self.d.context("regular family needs d")? },
            "capped" => Family::Capped { n, p: self.prob(n)?, max_degree: self.max_degree.context("capped family needs max_degree")? },
            other => bail!("unknown family {other}; known: {}", FAMILIES.join(", ")),
        })
    }
}

pub const FAMILIES: [&str; 8] = ["path", "cycle", "clique", "grid", "gnp", "forest", "regular", "capped"];
pub const TRANSFORMERS: [&str; 5] = ["det", "lv", "dominated", "min", "none"];
/// Programs that need no guesses.
pub const UNIFORM_PROGRAMS: [&str; 4] = ["layered", "luby", "path_specialist", "clique_specialist"];

pub fn uniform_program(name: &str) -> Result<(Arc<dyn NodeProgram>, Problem)> {
    Ok(match name {
        "layered" => {
            let lay = layered_coloring(&linial(), Arc::new(linial_palette), &TransformOptions::default())?;
            (lay.program, Problem::Coloring { palette: None })
        }
        "luby" => (Arc::new(Luby { iterations: None }), Problem::MIS),
        "path_specialist" => (baselib::path_specialist(), Problem::MIS),
        "clique_specialist" => (Arc::new(CliqueSpecialist), Problem::MIS),
        other => bail!("unknown uniform program {other}; known: {}", UNIFORM_PROGRAMS.join(", ")),
    })
}

fn param(name: &str) -> Result<GraphParam> {
    GraphParam::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| anyhow!("unknown parameter {name}"))
}

/// What a spec runs.
pub enum Built {
    /// Transformed program with its schedule and the base it came from.
    Uniform { uniform: Uniform, base: Option<NonUniform> },
    /// A base run with its exact parameters.
    Direct(NonUniform),
    /// A program without guesses.
    Plain(Arc<dyn NodeProgram>),
}

pub struct Experiment {
    pub spec: ExperimentSpec,
    pub problem: Problem,
    pub built: Built,
}

impl Experiment {
    /// The base whose declared bound the measurements are compared against.
    pub fn reference(&self) -> Option<&NonUniform> {
        match &self.built {
            Built::Uniform { base, .. } => base.as_ref(),
            Built::Direct(a) => Some(a),
            Built::Plain(_) => None,
        }
    }
}

fn base(spec: &ExperimentSpec) -> Result<NonUniform> {
    let name = spec.base.as_deref().context("spec needs a base")?;
    let mut a = baselib::base_by_name(name).ok_or_else(|| anyhow!("unknown base {name}; known: {}", baselib::BASE_NAMES.join(", ")))?;
    if let Some(text) = &spec.bound {
        let bound: BoundFn = text.parse().with_context(|| format!("bound {text}"))?;
        let params = match &spec.bound_params {
            Some(ps) => ps.iter().map(|p| param(p)).collect::<Result<_>>()?,
            None => a.bound_params.clone(),
        };
        a = a.with_bound(params, bound);
    }
    Ok(a)
}

fn pruner(spec: &ExperimentSpec) -> Result<Arc<dyn PruningAlgorithm>> {
    let name = spec.pruner.as_deref().context("this transformer needs a pruner")?;
    pruner_by_name(name).ok_or_else(|| anyhow!("unknown pruner {name}"))
}

pub fn build(spec: ExperimentSpec) -> Result<Experiment> {
    ensure!(spec.sizes.windows(2).all(|w| w[0] < w[1]), "size ladder must be strictly increasing");
    let opts = TransformOptions { ceiling: spec.ceiling.unwrap_or(TransformOptions::default().ceiling), ..TransformOptions::default() };
    let (problem, built) = match spec.transformer.as_str() {
        "det" | "lv" | "dominated" => {
            let a = base(&spec)?;
            let p = pruner(&spec)?;
            ensure!(p.problem() == a.problem, "pruner {} solves {}, base {} solves {}", p.name(), p.problem().name(), a.name, a.problem.name());
            let doms = spec
                .domination
                .iter()
                .map(|d| Ok(ParamDomination { param: param(&d.param)?, by: param(&d.by)?, g: d.g.parse::<AscFn>().with_context(|| format!("domination {}", d.g))? }))
                .collect::<Result<Vec<_>>>()?;
            let u = match spec.transformer.as_str() {
                "det" => uniformize_det(&a, &*p, &doms, &opts)?,
                "lv" => uniformize_lv(&a, &*p, &doms, &opts)?,
                _ => dominate_uniformize(&a, &*p, &doms, &opts)?,
            };
            (p.problem(), Built::Uniform { uniform: u, base: Some(a) })
        }
        "min" => {
            let p = pruner(&spec)?;
            ensure!(!spec.programs.is_empty(), "min-combiner needs programs");
            let mut progs = Vec::new();
            for name in &spec.programs {
                let (prog, problem) = uniform_program(name)?;
                ensure!(problem == p.problem(), "program {name} does not solve {}", p.problem().name());
                progs.push((prog, name.clone()));
            }
            (p.problem(), Built::Uniform { uniform: min_combine(progs, &*p, &opts)?, base: None })
        }
        "none" => {
            let name = spec.base.as_deref().context("spec needs a base")?;
            if UNIFORM_PROGRAMS.contains(&name) {
                let (prog, problem) = uniform_program(name)?;
                (problem, Built::Plain(prog))
            } else {
                let a = base(&spec)?;
                (a.problem, Built::Direct(a))
            }
        }
        other => bail!("unknown transformer {other}; known: {}", TRANSFORMERS.join(", ")),
    };
    Ok(Experiment { spec, problem, built })
}

pub fn load(path: &std::path::Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
