//! Verifiers and brute-force solution oracles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, Value};
use crate::graph::Graph;

pub const ORACLE_CAP: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("node {node}: {what}")]
    Malformed { node: usize, what: String },
    #[error("oracle refuses {n} nodes (cap {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error("more than {0} solutions")]
    TooManySolutions(usize),
    #[error("output vector has {got} entries for {n} nodes")]
    Length { n: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Ruling { alpha: usize, beta: usize },
    Mm,
    Coloring { palette: Option<u64> },
    Slc,
}

impl Problem {
    pub const MIS: Problem = Problem::Ruling { alpha: 2, beta: 1 };

    pub fn name(&self) -> String {
        match *self {
            Problem::Ruling { alpha: 2, beta: 1 } => "mis".into(),
            Problem::Ruling { alpha, beta } => format!("ruling({alpha},{beta})"),
            Problem::Mm => "mm".into(),
            Problem::Coloring { palette: Some(p) } => format!("coloring({p})"),
            Problem::Coloring { palette: None } => "coloring".into(),
            Problem::Slc => "slc".into(),
        }
    }

    pub fn verify(&self, c: &Configuration, y: &[Value]) -> Result<bool, ProblemError> {
        if y.len() != c.n() {
            return Err(ProblemError::Length { n: c.n(), got: y.len() });
        }
        Ok(match *self {
            Problem::Ruling { alpha, beta } => check_ruling(c, y, alpha, beta),
            Problem::Mm => check_mm(c, y),
            Problem::Coloring { palette } => check_coloring(c, y, palette),
            Problem::Slc => check_slc(c, y)?,
        })
    }
}

/// `y(v) = 1` selects `v`; anything else does not.
pub fn check_ruling(c: &Configuration, y: &[Value], alpha: usize, beta: usize) -> bool {
    let g = &c.graph;
    let selected: Vec<usize> = (0..g.n()).filter(|&v| y[v].selected()).collect();
    let mut near = vec![usize::MAX; g.n()];
    for &s in &selected {
        let dist = g.distances_from(s);
        for (v, d) in dist.into_iter().enumerate() {
            let Some(d) = d else { continue };
            if v != s && y[v].selected() && d < alpha {
                return false;
            }
            near[v] = near[v].min(d);
        }
    }
    (0..g.n()).all(|v| near[v] <= beta)
}

fn mm_label(v: &Value) -> Option<u64> {
    match *v {
        Value::Int(x) if x != 0 => Some(x),
        _ => None,
    }
}

/// The neighbour `v` is matched to, if any.
pub fn matched_partner(g: &Graph, y: &[Value], v: usize) -> Option<usize> {
    let l = mm_label(&y[v])?;
    let mut same = g.neighbors(v).iter().copied().filter(|&w| mm_label(&y[w]) == Some(l));
    let w = same.next()?;
    if same.next().is_some() {
        return None;
    }
    let others = g.neighbors(w).iter().filter(|&&x| x != v && mm_label(&y[x]) == Some(l)).count();
    (others == 0).then_some(w)
}

pub fn check_mm(c: &Configuration, y: &[Value]) -> bool {
    let g = &c.graph;
    let matched: Vec<bool> = (0..g.n()).map(|v| matched_partner(g, y, v).is_some()).collect();
    (0..g.n()).all(|v| matched[v] || g.neighbors(v).iter().all(|&w| matched[w]))
}

/// Colors are positive integers; with a palette they must lie in `[1, palette]`.
pub fn check_coloring(c: &Configuration, y: &[Value], palette: Option<u64>) -> bool {
    let g = &c.graph;
    let color = |v: usize| y[v].as_int().filter(|&x| x >= 1 && palette.is_none_or(|p| x <= p));
    if (0..g.n()).any(|v| color(v).is_none()) {
        return false;
    }
    g.edges().into_iter().all(|(u, v)| y[u] != y[v])
}

pub fn check_slc(c: &Configuration, y: &[Value]) -> Result<bool, ProblemError> {
    for (v, inp) in c.inputs.iter().enumerate() {
        if inp.lists.is_none() || inp.delta_hat.is_none() {
            return Err(ProblemError::Malformed { node: v, what: "missing list or degree bound".into() });
        }
    }
    let g = &c.graph;
    let in_list = (0..g.n()).all(|v| {
        let list = c.inputs[v].lists.as_ref().expect("checked above");
        y[v].as_pair().is_some_and(|p| list.contains(p))
    });
    Ok(in_list && g.edges().into_iter().all(|(u, v)| y[u] != y[v]))
}

pub fn check_slc_instance(c: &Configuration) -> bool {
    let g = &c.graph;
    if g.n() == 0 {
        return true;
    }
    let Some(dh) = c.inputs[0].delta_hat else { return false };
    let Some(classes) = c.inputs[0].lists.as_ref().map(|l| l.classes()) else { return false };
    if (dh as usize) < g.max_degree() {
        return false;
    }
    (0..g.n()).all(|v| {
        let inp = &c.inputs[v];
        let Some(list) = &inp.lists else { return false };
        inp.delta_hat == Some(dh)
            && list.classes() == classes
            && list.copies() == dh + 1
            && (1..=classes).all(|k| list.copies_of(k) > g.degree(v) as u64)
    })
}

pub fn enumerate_solutions(problem: &Problem, c: &Configuration) -> Result<Vec<Vec<Value>>, ProblemError> {
    enumerate_solutions_limited(problem, c, ORACLE_CAP, 1 << 20)
}

/// All valid output vectors over the problem's canonical alphabet.
pub fn enumerate_solutions_limited(
    problem: &Problem,
    c: &Configuration,
    cap: usize,
    max_solutions: usize,
) -> Result<Vec<Vec<Value>>, ProblemError> {
    let n = c.n();
    if n > cap {
        return Err(ProblemError::TooLarge { n, cap });
    }
    let g = &c.graph;
    match *problem {
        Problem::Ruling { alpha, beta } => {
            let mut out = Vec::new();
            for mask in 0u32..(1 << n) {
                let y: Vec<Value> = (0..n).map(|v| Value::Int(((mask >> v) & 1) as u64)).collect();
                if check_ruling(c, &y, alpha, beta) {
                    push_limited(&mut out, y, max_solutions)?;
                }
            }
            Ok(out)
        }
        Problem::Mm => {
            let edges = g.edges();
            let mut out = Vec::new();
            let mut used = vec![false; n];
            let mut chosen = Vec::new();
            maximal_matchings(g, &edges, 0, &mut used, &mut chosen, &mut out, max_solutions)?;
            Ok(out)
        }
        Problem::Coloring { palette } => {
            let p = palette.unwrap_or(g.max_degree() as u64 + 1);
            let choices: Vec<Vec<Value>> = (0..n).map(|_| (1..=p).map(Value::Int).collect()).collect();
            backtrack_proper(g, &choices, max_solutions)
        }
        Problem::Slc => {
            check_slc(c, &vec![Value::zero(); n])?;
            let choices: Vec<Vec<Value>> = c
                .inputs
                .iter()
                .map(|i| i.lists.as_ref().expect("checked").elements().map(|(a, b)| Value::Pair(a, b)).collect())
                .collect();
            backtrack_proper(g, &choices, max_solutions)
        }
    }
}

fn push_limited(out: &mut Vec<Vec<Value>>, y: Vec<Value>, max: usize) -> Result<(), ProblemError> {
    if out.len() >= max {
        return Err(ProblemError::TooManySolutions(max));
    }
    out.push(y);
    Ok(())
}

fn maximal_matchings(
    g: &Graph,
    edges: &[(usize, usize)],
    i: usize,
    used: &mut Vec<bool>,
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<Value>>,
    max: usize,
) -> Result<(), ProblemError> {
    if i == edges.len() {
        if edges.iter().all(|&(u, v)| used[u] || used[v]) {
            let mut y = vec![Value::zero(); g.n()];
            for &(u, v) in chosen.iter() {
                let l = g.id(u).min(g.id(v));
                y[u] = Value::Int(l);
                y[v] = Value::Int(l);
            }
            push_limited(out, y, max)?;
        }
        return Ok(());
    }
    let (u, v) = edges[i];
    if !used[u] && !used[v] {
        used[u] = true;
        used[v] = true;
        chosen.push((u, v));
        maximal_matchings(g, edges, i + 1, used, chosen, out, max)?;
        chosen.pop();
        used[u] = false;
        used[v] = false;
    }
    maximal_matchings(g, edges, i + 1, used, chosen, out, max)
}

fn backtrack_proper(g: &Graph, choices: &[Vec<Value>], max: usize) -> Result<Vec<Vec<Value>>, ProblemError> {
    fn go(g: &Graph, choices: &[Vec<Value>], y: &mut Vec<Value>, v: usize, out: &mut Vec<Vec<Value>>, max: usize) -> Result<(), ProblemError> {
        if v == g.n() {
            return push_limited(out, y.clone(), max);
        }
        for c in &choices[v] {
            if g.neighbors(v).iter().any(|&w| w < v && y[w] == *c) {
                continue;
            }
            y[v] = c.clone();
            go(g, choices, y, v + 1, out, max)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut y = vec![Value::zero(); g.n()];
    go(g, choices, &mut y, 0, &mut out, max)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ColorList, Input};
    use proptest::prelude::*;

    fn ints(xs: &[u64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Int(x)).collect()
    }

    fn path(n: usize) -> Configuration {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Configuration::plain(Graph::with_sequential_ids(n, &edges).unwrap())
    }

    fn slc(g: Graph, dh: u64, lists: Vec<ColorList>) -> Configuration {
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
        assert!(check_ruling(&path(1), &ints(&[1]), 2, 1));
        assert!(!check_ruling(&path(2), &ints(&[1, 1]), 2, 1));
        assert!(check_ruling(&path(5), &ints(&[1, 0, 0, 1, 0]), 2, 2));
        assert!(!check_ruling(&path(5), &ints(&[1, 0, 0, 0, 1]), 2, 1));
        assert!(!check_ruling(&path(5), &ints(&[1, 0, 1, 0, 1]), 3, 1));
    }

    #[test]
    fn mm_examples() {
        assert!(check_mm(&path(2), &ints(&[7, 7])));
        assert!(check_mm(&path(3), &ints(&[5, 5, 0])));
        assert!(!check_mm(&path(3), &ints(&[0, 0, 0])));
        // three equal labels on a path: nobody is matched
        assert!(!check_mm(&path(3), &ints(&[5, 5, 5])));
    }

    #[test]
    fn coloring_examples() {
        assert!(check_coloring(&path(2), &ints(&[1, 2]), Some(2)));
        assert!(!check_coloring(&path(2), &ints(&[1, 1]), None));
        let tri = Configuration::plain(Graph::with_sequential_ids(3, &[(0, 1), (1, 2), (0, 2)]).unwrap());
        assert!(!check_coloring(&tri, &ints(&[1, 2, 3]), Some(2)));
        assert!(check_coloring(&tri, &ints(&[1, 2, 3]), None));
    }

    #[test]
    fn slc_examples() {
        let one = slc(Graph::with_sequential_ids(1, &[]).unwrap(), 0, vec![ColorList::from_elements(1, 1, &[(1, 1)])]);
        assert_eq!(check_slc(&one, &[Value::Pair(1, 1)]), Ok(true));
        let e = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        let full = slc(e.clone(), 1, vec![ColorList::full(2, 2), ColorList::full(2, 2)]);
        assert_eq!(check_slc(&full, &[Value::Pair(1, 1), Value::Pair(1, 1)]), Ok(false));
        let disjoint = slc(
            e.clone(),
            1,
            vec![ColorList::from_elements(2, 2, &[(1, 1), (1, 2)]), ColorList::from_elements(2, 2, &[(2, 1), (2, 2)])],
        );
        assert_eq!(check_slc(&disjoint, &[Value::Pair(1, 2), Value::Pair(2, 1)]), Ok(true));
        let bare = Configuration::plain(e);
        assert!(matches!(check_slc(&bare, &[Value::zero(), Value::zero()]), Err(ProblemError::Malformed { .. })));
    }

    #[test]
    fn slc_instance_examples() {
        let iso = slc(Graph::with_sequential_ids(1, &[]).unwrap(), 0, vec![ColorList::full(3, 1)]);
        assert!(check_slc_instance(&iso));
        let e = slc(Graph::with_sequential_ids(2, &[(0, 1)]).unwrap(), 0, vec![ColorList::full(1, 1); 2]);
        assert!(!check_slc_instance(&e));
        let mut l = ColorList::full(2, 3);
        l.remove((1, 2));
        let p = slc(path(3).graph, 2, vec![ColorList::full(2, 3), l, ColorList::full(2, 3)]);
        assert!(!check_slc_instance(&p));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_solutions(&Problem::MIS, &path(2)).unwrap().len(), 2);
        let tri = Configuration::plain(Graph::with_sequential_ids(3, &[(0, 1), (1, 2), (0, 2)]).unwrap());
        assert_eq!(enumerate_solutions(&Problem::MIS, &tri).unwrap().len(), 3);
        assert_eq!(enumerate_solutions(&Problem::Mm, &path(3)).unwrap().len(), 2);
        assert_eq!(enumerate_solutions(&Problem::Coloring { palette: None }, &path(2)).unwrap().len(), 2);
        assert!(matches!(enumerate_solutions(&Problem::MIS, &path(11)), Err(ProblemError::TooLarge { .. })));
    }

    fn direct_mis(g: &Graph, s: &[bool]) -> bool {
        let independent = g.edges().iter().all(|&(u, v)| !(s[u] && s[v]));
        let dominating = (0..g.n()).all(|v| s[v] || g.neighbors(v).iter().any(|&w| s[w]));
        independent && dominating
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (1usize..=6).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let k = pairs.len();
            proptest::collection::vec(any::<bool>(), k).prop_map(move |bits| {
                let edges: Vec<_> = pairs.iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| *e).collect();
                Graph::with_sequential_ids(n, &edges).unwrap()
            })
        })
    }

    #[test]
    fn ruling_agrees_with_direct_mis_exhaustively() {
        for n in 1..=6usize {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            for gm in 0u32..(1 << pairs.len()) {
                let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| gm >> i & 1 == 1).map(|(_, e)| *e).collect();
                let c = Configuration::plain(Graph::with_sequential_ids(n, &edges).unwrap());
                for sm in 0u32..(1 << n) {
                    let s: Vec<bool> = (0..n).map(|v| sm >> v & 1 == 1).collect();
                    let y: Vec<Value> = s.iter().map(|&b| Value::Int(b as u64)).collect();
                    assert_eq!(check_ruling(&c, &y, 2, 1), direct_mis(&c.graph, &s));
                }
            }
        }
    }

    fn union(a: &Graph, b: &Graph) -> Graph {
        let off = a.n();
        let mut ids: Vec<u64> = a.ids().to_vec();
        ids.extend(b.ids().iter().map(|&i| i + 100));
        let mut edges = a.edges();
        edges.extend(b.edges().into_iter().map(|(u, v)| (u + off, v + off)));
        Graph::from_edges(ids, &edges).unwrap()
    }

    proptest! {
        #[test]
        fn verifiers_closed_under_disjoint_union(
            a in small_graph(),
            b in small_graph(),
            ya in proptest::collection::vec(0u64..4, 6),
            yb in proptest::collection::vec(0u64..4, 6),
        ) {
            let ca = Configuration::plain(a.clone());
            let cb = Configuration::plain(b.clone());
            let cu = Configuration::plain(union(&a, &b));
            let ya = ints(&ya[..a.n()]);
            let yb = ints(&yb[..b.n()]);
            let yu: Vec<Value> = ya.iter().chain(&yb).cloned().collect();
            for p in [Problem::MIS, Problem::Ruling { alpha: 2, beta: 2 }, Problem::Mm, Problem::Coloring { palette: Some(3) }] {
                let whole = p.verify(&cu, &yu).unwrap();
                let parts = p.verify(&ca, &ya).unwrap() && p.verify(&cb, &yb).unwrap();
                prop_assert_eq!(whole, parts, "{}", p.name());
            }
        }

        #[test]
        fn solutions_exist_and_verify(g in small_graph()) {
            let c = Configuration::plain(g);
            for p in [Problem::MIS, Problem::Mm, Problem::Coloring { palette: None }] {
                let sols = enumerate_solutions(&p, &c).unwrap();
                prop_assert!(!sols.is_empty());
                for y in &sols {
                    prop_assert!(p.verify(&c, y).unwrap());
                }
            }
        }
    }
}
