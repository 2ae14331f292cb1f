//! Hardness-instance generators: 3-colorability encoded as solution
//! existence, solution checking and query evaluation, and clique encoded as
//! evaluation of a query with negation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::{parse_mapping, MappingProgram};
use crate::oracle::{
    certain_oracle, check_abd_solution, exists_solution_general, DomainBudget, Semantics,
};
use crate::query::{parse_query, Query};
use crate::term::Fact;

/// Undirected loop-free graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn add_vertex(&mut self, v: &str) {
        self.vertices.insert(v.to_string());
    }

    /// Adds the edge {u, v}; loops are ignored.
    pub fn add_edge(&mut self, u: &str, v: &str) {
        self.add_vertex(u);
        self.add_vertex(v);
        if u != v {
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            self.edges.insert((a.to_string(), b.to_string()));
        }
    }

    /// One edge `u v` or one isolated vertex `u` per line; `#` and `%`
    /// start comments.
    pub fn parse(src: &str) -> Result<Graph> {
        let mut g = Graph::new();
        for (n, line) in src.lines().enumerate() {
            let line = line.split(['#', '%']).next().unwrap_or("");
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                [] => {}
                [v] => g.add_vertex(v),
                [u, v] => g.add_edge(u, v),
                _ => {
                    return Err(Error::Parse {
                        line: n + 1,
                        col: 1,
                        msg: "expected `u v` or `u`".into(),
                    })
                }
            }
        }
        Ok(g)
    }

    pub fn neighbours(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = self
            .vertices
            .iter()
            .map(|v| (v.as_str(), BTreeSet::new()))
            .collect();
        for (a, b) in &self.edges {
            adj.get_mut(a.as_str()).unwrap().insert(b);
            adj.get_mut(b.as_str()).unwrap().insert(a);
        }
        adj
    }

    /// Breadth-first two-coloring.
    pub fn is_bipartite(&self) -> bool {
        let adj = self.neighbours();
        let mut side: BTreeMap<&str, bool> = BTreeMap::new();
        for start in adj.keys() {
            if side.contains_key(start) {
                continue;
            }
            side.insert(start, false);
            let mut queue = vec![*start];
            while let Some(v) = queue.pop() {
                let s = side[v];
                for &w in &adj[v] {
                    match side.get(w) {
                        Some(&t) if t == s => return false,
                        Some(_) => {}
                        None => {
                            side.insert(w, !s);
                            queue.push(w);
                        }
                    }
                }
            }
        }
        true
    }

    fn edge_facts(&self, rel: &str) -> Vec<Fact> {
        let mut out = Vec::new();
        for (a, b) in &self.edges {
            out.push(Fact::ground(rel, &[a, b]));
            out.push(Fact::ground(rel, &[b, a]));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let touched: BTreeSet<&String> = self.edges.iter().flat_map(|(a, b)| [a, b]).collect();
        for v in self.vertices.iter().filter(|v| !touched.contains(v)) {
            writeln!(f, "{v}")?;
        }
        for (a, b) in &self.edges {
            writeln!(f, "{a} {b}")?;
        }
        Ok(())
    }
}

pub const COLORS: [&str; 3] = ["r", "g", "b"];

/// A generated instance: mapping, source, and the candidate solution or
/// query the reduction asks about.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub mapping: MappingProgram,
    pub source: Instance,
    pub candidate: Option<Instance>,
    pub query: Option<Query>,
}

fn color_pairs() -> Vec<Fact> {
    let mut out = Vec::new();
    for a in COLORS {
        for b in COLORS {
            if a != b {
                out.push(Fact::ground("D", &[a, b]));
            }
        }
    }
    out
}

const PAIR_RULE: &str = "abd: D(z,v) <-> B@1(x,z), C@1(y,v), E@1(x,y).";

/// Solution existence: a solution picks one color per vertex so that every
/// edge joins distinct colors and every ordered color pair occurs on an
/// edge.
pub fn three_col_exist(g: &Graph) -> Reduction {
    let src =
        format!("abd: V(x) <-> B@1(x,v), C@1(x,v).\nabd: E0(x,y) <-> E@1(x,y).\n{PAIR_RULE}\n");
    let mapping = parse_mapping(&src).expect("fixed mapping");
    let mut source: Instance = color_pairs().into_iter().collect();
    source.extend(g.vertices.iter().map(|v| Fact::ground("V", &[v])));
    source.extend(g.edge_facts("E0"));
    Reduction {
        mapping,
        source,
        candidate: None,
        query: None,
    }
}

/// Solution check: B and C list every color for every vertex, and a
/// labeling must select a coloring through annotation 1.
pub fn three_col_check(g: &Graph) -> Reduction {
    let src = format!("{PAIR_RULE}\nabd: V(x,v) <-> B@2(x,v).\nabd: V(x,v) <-> C@2(x,v).\n");
    let mapping = parse_mapping(&src).expect("fixed mapping");
    let mut source: Instance = color_pairs().into_iter().collect();
    let mut candidate = Instance::new();
    for v in &g.vertices {
        for c in COLORS {
            source.insert(Fact::ground("V", &[v, c]));
            candidate.insert(Fact::ground("B", &[v, c]));
            candidate.insert(Fact::ground("C", &[v, c]));
        }
    }
    candidate.extend(g.edge_facts("E"));
    Reduction {
        mapping,
        source,
        candidate: Some(candidate),
        query: None,
    }
}

/// Query evaluation: the query asks for a monochromatic edge, so it is
/// certain exactly when the graph is not 3-colorable.
pub fn three_col_eval(g: &Graph) -> Reduction {
    let src =
        "abd: V(x) <-> B@1(x,v), C@1(x,v).\nabd: M(v) <-> C@1(x,v).\nabd: E0(x,y) <-> E@1(x,y).\n";
    let mapping = parse_mapping(src).expect("fixed mapping");
    let mut source: Instance = COLORS.iter().map(|c| Fact::ground("M", &[c])).collect();
    source.extend(g.vertices.iter().map(|v| Fact::ground("V", &[v])));
    source.extend(g.edge_facts("E0"));
    let query = parse_query("q() :- B(x,z), C(y,z), E(x,y).").expect("fixed query");
    Reduction {
        mapping,
        source,
        candidate: None,
        query: Some(query),
    }
}

/// Clique: C0 holds the ordered pairs of distinct slots c1..ck; the query
/// looks for two slots whose chosen vertices are not adjacent.
pub fn clique(g: &Graph, k: usize) -> Reduction {
    let src = "abd: E0(x,y) <-> E@1(x,y).\nabd: C0(x,y) <-> C@1(x,y), A@1(x,z), B@1(y,v).\n";
    let mapping = parse_mapping(src).expect("fixed mapping");
    let mut source: Instance = g.edge_facts("E0").into_iter().collect();
    let slots: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    for a in &slots {
        for b in &slots {
            if a != b {
                source.insert(Fact::ground("C0", &[a, b]));
            }
        }
    }
    let query = parse_query("q() :- C(x,y), A(x,z1), B(y,z2), not E(z1,z2).").expect("fixed query");
    Reduction {
        mapping,
        source,
        candidate: None,
        query: Some(query),
    }
}

/// Budget sized for a reduction: no fresh constants and room for every
/// fact the encoding can need.
pub fn reduction_budget(r: &Reduction) -> DomainBudget {
    let size = r.candidate.as_ref().map_or(0, Instance::len) + 4 * r.source.len() + 8;
    DomainBudget {
        extra_constants: 0,
        max_size: size,
        ..DomainBudget::default()
    }
}

/// Does the existence instance have a solution? Two-colorable graphs are
/// answered directly, as the reduction prescribes.
pub fn decide_exist(g: &Graph, budget: &DomainBudget) -> Result<bool> {
    if g.is_bipartite() {
        return Ok(true);
    }
    let r = three_col_exist(g);
    Ok(exists_solution_general(&r.source, &r.mapping, budget)?.exists)
}

/// Is the generated candidate a solution? Two-colorable graphs are
/// answered directly.
pub fn decide_check(g: &Graph, budget: &DomainBudget) -> Result<bool> {
    if g.is_bipartite() {
        return Ok(true);
    }
    let r = three_col_check(g);
    let j = r
        .candidate
        .as_ref()
        .expect("check reduction has a candidate");
    Ok(check_abd_solution(&r.source, &r.mapping, j, budget.max_nodes)?.is_some())
}

/// Certain answer of the evaluation instance.
pub fn decide_eval(g: &Graph, budget: &DomainBudget) -> Result<bool> {
    let r = three_col_eval(g);
    Ok(certain_oracle(
        Semantics::Abd,
        &r.source,
        &r.mapping,
        r.query.as_ref().unwrap(),
        budget,
    )?
    .holds())
}

/// Certain answer of the clique instance.
pub fn decide_clique(g: &Graph, k: usize, budget: &DomainBudget) -> Result<bool> {
    let r = clique(g, k);
    Ok(certain_oracle(
        Semantics::Abd,
        &r.source,
        &r.mapping,
        r.query.as_ref().unwrap(),
        budget,
    )?
    .holds())
}
