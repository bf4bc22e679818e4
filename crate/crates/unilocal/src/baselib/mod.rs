//! Base algorithms and their non-uniform descriptions.

use std::sync::Arc;

use crate::bounds::BoundFn;
use crate::graph::GraphParam;
use crate::problems::Problem;
use crate::runtime::NodeProgram;
use crate::transformer::{Flavor, NonUniform};

pub mod coloring;
pub mod derived;
pub mod luby;
pub mod slc;
pub mod specialists;

pub use coloring::{linial_color, linial_palette, mis_from_coloring};
pub use derived::{LineSim, ProductSim};
pub use luby::{luby_iterations, Luby, LUBY_KAPPA};
pub use slc::{layered_coloring, layered_palette, slc_adapter, Layered};
pub use specialists::{path_specialist, CliqueSpecialist};

use GraphParam::{MaxDegree, MaxId, N};

fn bound(text: &str) -> BoundFn {
    text.parse().expect("registered bounds parse")
}

fn mis_program(delta: u64, m: u64) -> Arc<dyn NodeProgram> {
    mis_from_coloring(linial_color(m, delta))
}

/// Proper coloring from guesses (max degree, max identity).
pub fn linial() -> NonUniform {
    NonUniform {
        name: "linial".into(),
        problem: Problem::Coloring { palette: None },
        params: vec![MaxDegree, MaxId],
        bound_params: vec![MaxId],
        bound: bound("logstar+1"),
        flavor: Flavor::Deterministic,
        factory: Arc::new(|x: &[u64]| linial_color(x[1], x[0])),
    }
}

/// MIS by greedy choice over a Linial coloring.
pub fn mis_from_linial() -> NonUniform {
    NonUniform {
        name: "mis_from_linial".into(),
        problem: Problem::MIS,
        params: vec![MaxDegree, MaxId],
        bound_params: vec![MaxDegree, MaxId],
        bound: bound("add(linial+2, logstar+1)"),
        flavor: Flavor::Deterministic,
        factory: Arc::new(|x: &[u64]| mis_program(x[0], x[1])),
    }
}

/// Luby's MIS cut off after `LUBY_KAPPA * ceil(log2 n)` iterations.
pub fn luby_trunc() -> NonUniform {
    NonUniform {
        name: "luby_trunc".into(),
        problem: Problem::MIS,
        params: vec![N],
        bound_params: vec![N],
        bound: bound(&format!("{}*log+2", 2 * LUBY_KAPPA)),
        flavor: Flavor::MonteCarlo { rho: 0.5 },
        factory: Arc::new(|x: &[u64]| Arc::new(Luby { iterations: Some(luby_iterations(x[0], LUBY_KAPPA)) }) as Arc<dyn NodeProgram>),
    }
}

/// Maximal matching as an MIS of the line graph.
pub fn mm_line() -> NonUniform {
    NonUniform {
        name: "mm_line".into(),
        problem: Problem::Mm,
        params: vec![MaxDegree, MaxId],
        bound_params: vec![MaxDegree, MaxId],
        bound: bound("add(32*linial+8, 2*logstar+8)"),
        flavor: Flavor::Deterministic,
        factory: Arc::new(|x: &[u64]| {
            let hi = x[1].max(2);
            // the largest edge identity over ids <= hi, saturating for huge guesses
            let m = hi.checked_mul(hi - 1).map_or(u64::MAX, |p| p / 2 + hi - 1);
            Arc::new(LineSim { base: mis_program(2 * x[0], m) }) as Arc<dyn NodeProgram>
        }),
    }
}

/// `(max degree + 1)`-coloring as an MIS of the clique product.
pub fn color_from_mis() -> NonUniform {
    NonUniform {
        name: "color_from_mis".into(),
        problem: Problem::Coloring { palette: None },
        params: vec![MaxDegree, MaxId],
        bound_params: vec![MaxDegree, MaxId],
        bound: bound("add(16*linial+4, logstar+4)"),
        flavor: Flavor::Deterministic,
        factory: Arc::new(|x: &[u64]| {
            let s = x[1].saturating_mul(2);
            let m = s.checked_mul(s + 1).and_then(|p| (p / 2).checked_add(x[1])).unwrap_or(u64::MAX);
            Arc::new(ProductSim { base: mis_program(2 * x[0], m) }) as Arc<dyn NodeProgram>
        }),
    }
}

/// Outputs 0 at once; never solves anything with an edge.
pub fn never() -> NonUniform {
    NonUniform {
        name: "never".into(),
        problem: Problem::MIS,
        params: vec![N],
        bound_params: vec![N],
        bound: bound("id"),
        flavor: Flavor::Deterministic,
        factory: Arc::new(|_: &[u64]| crate::runtime::restrict(Arc::new(Luby { iterations: None }), 0)),
    }
}

pub const BASE_NAMES: [&str; 6] = ["linial", "mis_from_linial", "luby_trunc", "mm_line", "color_from_mis", "never"];

pub fn base_by_name(name: &str) -> Option<NonUniform> {
    Some(match name {
        "linial" => linial(),
        "mis_from_linial" => mis_from_linial(),
        "luby_trunc" => luby_trunc(),
        "mm_line" => mm_line(),
        "color_from_mis" => color_from_mis(),
        "never" => never(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;
    use crate::graph::{generate, Family, Graph};
    use crate::runtime::run_sync;
    use crate::transformer::TransformOptions;

    fn sample() -> Vec<Graph> {
        let fams = [
            Family::Path { n: 12 },
            Family::Cycle { n: 9 },
            Family::Clique { n: 6 },
            Family::Grid { rows: 4, cols: 5 },
            Family::Gnp { n: 30, p: 0.2 },
            Family::Regular { n: 20, d: 4 },
            Family::Forest { n: 25, trees: 3 },
        ];
        fams.iter().flat_map(|f| (0..3).map(move |s| generate(f, s).unwrap())).collect()
    }

    #[test]
    fn deterministic_bases_are_correct_within_their_bounds() {
        for name in ["linial", "mis_from_linial", "mm_line", "color_from_mis"] {
            let a = base_by_name(name).unwrap();
            for g in sample() {
                let x = a.true_guesses(&g).unwrap();
                let c = Configuration::plain(g.clone());
                let (y, rep) = run_sync(&*a.program(&x), &c, 100_000, 1).unwrap();
                assert!(a.problem.verify(&c, &y).unwrap(), "{name} wrong on {}", g.to_edge_list());
                let b = a.bound_at(&g).unwrap();
                assert!(rep.rounds_total as u64 <= b, "{name}: {} rounds, bound {b}", rep.rounds_total);
            }
        }
    }

    // the schedules hand out guesses up to the cap; nothing may overflow there
    #[test]
    fn bases_accept_extreme_guesses() {
        let g = generate(&Family::Gnp { n: 12, p: 0.3 }, 4).unwrap();
        let c = Configuration::plain(g);
        for name in BASE_NAMES {
            let a = base_by_name(name).unwrap();
            let k = a.params.len();
            for x in [vec![crate::bounds::GUESS_CAP; k], vec![1; k], vec![u64::MAX / 4; k]] {
                let prog = restrict_probe(&a, &x);
                let (y, _) = run_sync(&*prog, &c, 10_000, 2).unwrap();
                assert_eq!(y.len(), 12, "{name} at {x:?}");
            }
        }
    }

    fn restrict_probe(a: &NonUniform, x: &[u64]) -> Arc<dyn NodeProgram> {
        crate::runtime::restrict(a.program(x), 2_000)
    }

    #[test]
    fn product_coloring_uses_degree_plus_one_colors() {
        for g in sample() {
            let a = color_from_mis();
            let c = Configuration::plain(g.clone());
            let (y, _) = run_sync(&*a.program(&a.true_guesses(&g).unwrap()), &c, 100_000, 0).unwrap();
            let top = g.max_degree() as u64 + 1;
            assert!(Problem::Coloring { palette: Some(top) }.verify(&c, &y).unwrap());
        }
    }

    #[test]
    fn registry_is_complete() {
        for name in BASE_NAMES {
            let a = base_by_name(name).unwrap();
            assert_eq!(a.name, name);
            assert_eq!(a.bound.arity(), a.bound_params.len());
        }
        assert!(base_by_name("nope").is_none());
    }

    #[test]
    fn layered_coloring_uses_disjoint_layer_palettes() {
        let lay = layered_coloring(&linial(), Arc::new(linial_palette), &TransformOptions::default()).unwrap();
        for g in sample() {
            let c = Configuration::plain(g.clone());
            let (y, _) = run_sync(&*lay.program, &c, 1_000_000, 0).unwrap();
            assert!(Problem::Coloring { palette: None }.verify(&c, &y).unwrap(), "{}", g.to_edge_list());
            let t = crate::graph::layer_thresholds(linial_palette, g.max_degree() as u64);
            for v in 0..g.n() {
                let i = crate::graph::layer_of(g.degree(v) as u64, &t).unwrap();
                let gd = linial_palette(t[i + 1]);
                let col = y[v].as_int().unwrap();
                assert!(col > gd && col <= 2 * gd, "node of degree {} got {col}", g.degree(v));
            }
            let top = y.iter().filter_map(|v| v.as_int()).max().unwrap_or(0);
            assert!(top <= layered_palette(&linial_palette, g.max_degree() as u64));
        }
    }

    #[test]
    fn adapter_rejects_degree_dependent_bounds() {
        assert!(matches!(slc_adapter(&mis_from_linial()), Err(slc::AdapterError::DegreeInBound(_))));
        assert!(matches!(slc_adapter(&luby_trunc()), Err(slc::AdapterError::NoDegree(_))));
        let b = slc_adapter(&linial()).unwrap();
        assert_eq!(b.params, vec![MaxId]);
    }

    fn run_true(a: &NonUniform, g: &Graph) -> Vec<crate::config::Value> {
        let c = Configuration::plain(g.clone());
        run_sync(&*a.program(&a.true_guesses(g).unwrap()), &c, 100_000, 0).unwrap().0
    }

    #[test]
    fn matching_examples() {
        use crate::problems::matched_partner;
        let a = mm_line();
        let edge = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        let y = run_true(&a, &edge);
        assert_eq!(matched_partner(&edge, &y, 0), Some(1));
        let p4 = Graph::with_sequential_ids(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(Problem::Mm.verify(&Configuration::plain(p4.clone()), &run_true(&a, &p4)).unwrap());
        let star = Graph::with_sequential_ids(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let y = run_true(&a, &star);
        assert!(Problem::Mm.verify(&Configuration::plain(star.clone()), &y).unwrap());
        assert_eq!((1..6).filter(|&v| matched_partner(&star, &y, v).is_some()).count(), 1);
    }

    #[test]
    fn product_coloring_examples() {
        use crate::config::Value;
        let a = color_from_mis();
        let one = Graph::with_sequential_ids(1, &[]).unwrap();
        assert_eq!(run_true(&a, &one), vec![Value::Int(1)]);
        let edge = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        let mut y: Vec<u64> = run_true(&a, &edge).iter().map(|v| v.as_int().unwrap()).collect();
        y.sort_unstable();
        assert_eq!(y, vec![1, 2]);
    }

    #[test]
    fn list_adapter_examples() {
        use crate::config::{ColorList, Input, Value};
        use crate::pruning::{PruningAlgorithm, SlcPruner};
        let b = slc_adapter(&linial()).unwrap();
        let run = |g: &Graph, inputs: Vec<Input>, m: u64| {
            let c = Configuration::new(g.clone(), inputs).unwrap();
            let y = run_sync(&*b.program(&[m]), &c, 10_000, 0).unwrap().0;
            (c, y)
        };
        let full = |g: &Graph, dh: u64| -> Vec<Input> {
            g.ids()
                .iter()
                .map(|&id| Input { delta_hat: Some(dh), lists: Some(ColorList::full(linial_palette(dh.max(1)), dh + 1)), ..Input::plain(id) })
                .collect()
        };
        let one = Graph::with_sequential_ids(1, &[]).unwrap();
        let (_, y) = run(&one, full(&one, 0), 1);
        assert!(matches!(y[0], Value::Pair(_, 1)));
        let edge = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        let (c, y) = run(&edge, full(&edge, 1), 2);
        assert!(Problem::Slc.verify(&c, &y).unwrap());
        assert_ne!(y[0].as_pair().unwrap().0, y[1].as_pair().unwrap().0);
        // after pruning a first run, the residual still gets colored
        for seed in 0..10 {
            let g = generate(&Family::Gnp { n: 24, p: 0.25 }, seed).unwrap();
            let dh = g.max_degree() as u64;
            let (c, y) = run(&g, full(&g, dh), g.max_id());
            let mut y_hat = y.clone();
            for v in (0..g.n()).step_by(3) {
                y_hat[v] = Value::zero();
            }
            let pruned = SlcPruner.apply(&c, &y_hat).unwrap();
            let res = &pruned.residual;
            let y_res = run_sync(&*b.program(&[res.graph.max_id().max(1)]), res, 10_000, 0).unwrap().0;
            assert!(Problem::Slc.verify(res, &y_res).unwrap());
            assert!(Problem::Slc.verify(&c, &pruned.glue(&y_res)).unwrap());
        }
    }

    #[test]
    fn linial_output_ignores_distance_two_data() {
        use crate::config::Input;
        // a single reduction step: colors are a function of the radius-1 view
        let (m, d) = (60u64, 2u64);
        assert_eq!(coloring::reduction_schedule(m, d).len(), 1);
        let g = Graph::with_sequential_ids(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let base: Vec<u64> = vec![10, 20, 30, 40, 50];
        let run = |cols: &[u64]| {
            let inputs = g.ids().iter().zip(cols).map(|(&id, &c)| Input { color: Some(c), ..Input::plain(id) }).collect();
            run_sync(&*linial_color(m, d), &Configuration::new(g.clone(), inputs).unwrap(), 100, 0).unwrap().0
        };
        let y = run(&base);
        for (v, far) in [(0usize, vec![3, 4]), (2, vec![0, 4])] {
            let mut cols = base.clone();
            for &w in &far {
                cols[w] += 5;
            }
            assert_eq!(run(&cols)[v], y[v]);
        }
    }

    #[test]
    fn layer_sequence_properties() {
        // linial_palette is moderately fast with this factor on the sampled range
        let alpha = 6u64;
        for i in 1..2000u64 {
            assert!(linial_palette(2 * i) <= alpha * linial_palette(i));
            assert!(linial_palette(alpha * i) >= 2 * linial_palette(i));
        }
        let t = crate::graph::layer_thresholds(linial_palette, 5000);
        let cap = alpha.pow(alpha.ilog2() + 1);
        for w in t.windows(2) {
            assert!(w[0] < w[1]);
            assert!(linial_palette(w[1]) >= 2 * linial_palette(w[0]));
            assert!(linial_palette(w[1]) <= cap * linial_palette(w[0]));
        }
    }

    #[test]
    fn layered_on_empty_and_regular_graphs() {
        let lay = layered_coloring(&linial(), Arc::new(linial_palette), &TransformOptions::default()).unwrap();
        let (y, _) = run_sync(&*lay.program, &Configuration::plain(Graph::empty()), 10, 0).unwrap();
        assert!(y.is_empty());
        for d in [3usize, 4, 6] {
            let g = generate(&Family::Regular { n: 24, d }, 2).unwrap();
            let c = Configuration::plain(g);
            let (y, _) = run_sync(&*lay.program, &c, 1_000_000, 0).unwrap();
            let top = y.iter().filter_map(|v| v.as_int()).max().unwrap();
            assert!(Problem::Coloring { palette: None }.verify(&c, &y).unwrap());
            assert!(top <= layered_palette(&linial_palette, d as u64));
        }
    }
}
