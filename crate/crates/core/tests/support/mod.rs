//! Random case generators and independent graph checkers shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use bidex::reductions::Graph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn source_atom(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    if rng.gen_bool(0.6) {
        let a = *vars.choose(rng).unwrap();
        let b = *vars.choose(rng).unwrap();
        format!("R({a},{b})")
    } else {
        format!("P({})", vars.choose(rng).unwrap())
    }
}

fn target_atom(rng: &mut ChaCha8Rng, args: &[&str]) -> String {
    let a = *args.choose(rng).unwrap();
    if rng.gen_bool(0.6) {
        let b = *args.choose(rng).unwrap();
        format!("S({a},{b})")
    } else {
        format!("T({a})")
    }
}

fn vars_of(atoms: &[String]) -> Vec<&'static str> {
    ["x", "y", "w"]
        .into_iter()
        .filter(|v| atoms.iter().any(|a| a.contains(v)))
        .collect()
}

/// Up to two tgds from R/2, P/1 into S/2, T/1 with at most one existential.
pub fn tgd_program(rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for _ in 0..rng.gen_range(1..=2) {
        let body: Vec<String> = (0..rng.gen_range(1..=2))
            .map(|_| source_atom(rng, &["x", "y", "w"]))
            .collect();
        let mut args = vars_of(&body);
        if rng.gen_bool(0.6) {
            args.push("z");
        }
        let head: Vec<String> = (0..rng.gen_range(1..=3))
            .map(|_| target_atom(rng, &args))
            .collect();
        out.push_str(&format!(
            "tgd: {} -> {}.\n",
            body.join(", "),
            head.join(", ")
        ));
    }
    out
}

/// Up to two abds with one body atom each, each head atom with its own
/// annotation so that the density is one.
pub fn abd_program(rng: &mut ChaCha8Rng, max_head: usize) -> String {
    let mut out = String::new();
    let (mut s, mut t) = (0, 0);
    for _ in 0..rng.gen_range(1..=2) {
        let body = source_atom(rng, &["x", "y"]);
        let mut args = vars_of(std::slice::from_ref(&body));
        if rng.gen_bool(0.6) {
            args.push("z");
        }
        let head: Vec<String> = (0..rng.gen_range(1..=max_head))
            .map(|_| {
                let a = target_atom(rng, &args);
                let ann = if a.starts_with('S') {
                    s += 1;
                    s
                } else {
                    t += 1;
                    t
                };
                let at = a.find('(').unwrap();
                format!("{}@{}{}", &a[..at], ann, &a[at..])
            })
            .collect();
        out.push_str(&format!("abd: {} <-> {}.\n", body, head.join(", ")));
    }
    out
}

/// Up to `max` source facts over the constants a, b, c.
pub fn source_facts(rng: &mut ChaCha8Rng, max: usize) -> String {
    let consts = ["a", "b", "c"];
    let mut facts = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=max) {
        let c = |rng: &mut ChaCha8Rng| *consts.choose(rng).unwrap();
        if rng.gen_bool(0.6) {
            let (a, b) = (c(rng), c(rng));
            facts.insert(format!("R({a},{b})."));
        } else {
            facts.insert(format!("P({}).", c(rng)));
        }
    }
    facts.into_iter().collect::<Vec<_>>().join(" ")
}

fn query_term(rng: &mut ChaCha8Rng, vars: &[&'static str]) -> String {
    if rng.gen_bool(0.15) {
        "\"a\"".to_string()
    } else {
        vars.choose(rng).unwrap().to_string()
    }
}

fn query_atom(rng: &mut ChaCha8Rng, vars: &[&'static str]) -> String {
    if rng.gen_bool(0.6) {
        format!("S({},{})", query_term(rng, vars), query_term(rng, vars))
    } else {
        format!("T({})", query_term(rng, vars))
    }
}

/// A union of conjunctive queries over S/2 and T/1, boolean or unary.
pub fn ucq(rng: &mut ChaCha8Rng) -> String {
    let unary = rng.gen_bool(0.5);
    let mut ds = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut atoms: Vec<String> = (0..rng.gen_range(1..=2))
            .map(|_| query_atom(rng, &["u", "v", "t"]))
            .collect();
        if unary && !atoms.iter().any(|a| a.contains('u')) {
            atoms.push("T(u)".into());
        }
        ds.push(atoms.join(", "));
    }
    format!("q({}) :- {}.", if unary { "u" } else { "" }, ds.join(" ; "))
}

/// `forall` queries of the form body -> conclusion.
pub fn universal_query(rng: &mut ChaCha8Rng) -> String {
    let vars = ["x1", "x2", "x3"];
    let (premise, used) = loop {
        let premise: Vec<String> = (0..rng.gen_range(1..=2))
            .map(|_| query_atom(rng, &vars))
            .collect();
        let used: Vec<&'static str> = vars
            .into_iter()
            .filter(|v| premise.iter().any(|a| a.contains(v)))
            .collect();
        if !used.is_empty() {
            break (premise, used);
        }
    };
    let conclusion = match rng.gen_range(0..4) {
        0 => query_atom(rng, &used),
        1 => format!("{} = {}", query_term(rng, &used), query_term(rng, &used)),
        2 => format!("not {}", query_atom(rng, &used)),
        _ => "false".to_string(),
    };
    let head = if used.len() > 1 && rng.gen_bool(0.3) {
        used[0]
    } else {
        ""
    };
    let quantified: Vec<&str> = used.iter().copied().filter(|v| *v != head).collect();
    format!(
        "q({head}) :- forall {}: {} -> {}.",
        quantified.join(", "),
        premise.join(" & "),
        conclusion
    )
}

/// One positive atom and one or two negated atoms over its variables.
pub fn cq_neg_query(rng: &mut ChaCha8Rng) -> String {
    let pos = query_atom(rng, &["u", "v"]);
    let vars: Vec<&'static str> = ["u", "v"].into_iter().filter(|v| pos.contains(v)).collect();
    let vars = if vars.is_empty() { vec!["u"] } else { vars };
    let negs: Vec<String> = (0..rng.gen_range(1..=2))
        .map(|_| format!("not {}", query_atom(rng, &vars)))
        .collect();
    let head = if rng.gen_bool(0.4) && pos.contains('u') {
        "u"
    } else {
        ""
    };
    format!("q({head}) :- {}, {}.", pos, negs.join(", "))
}

/// Every graph on 1..=n vertices, one per isomorphism class.
pub fn graphs_up_to(n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for k in 1..=n {
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .collect();
        let perms = permutations(k);
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect();
            let canon = perms
                .iter()
                .map(|p| {
                    let mut es: Vec<(usize, usize)> = edges
                        .iter()
                        .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                        .collect();
                    es.sort();
                    es
                })
                .min()
                .unwrap();
            if seen.insert(canon) {
                let mut g = Graph::new();
                for v in 0..k {
                    g.add_vertex(&format!("v{v}"));
                }
                for (a, b) in edges {
                    g.add_edge(&format!("v{a}"), &format!("v{b}"));
                }
                out.push(g);
            }
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn adjacent(g: &Graph, a: &str, b: &str) -> bool {
    let (x, y) = if a < b { (a, b) } else { (b, a) };
    g.edges.contains(&(x.to_string(), y.to_string()))
}

/// Tries all 3^n colorings.
pub fn three_colorable(g: &Graph) -> bool {
    let vs: Vec<&String> = g.vertices.iter().collect();
    let n = vs.len() as u32;
    (0..3u32.pow(n)).any(|code| {
        let color = |i: usize| code / 3u32.pow(i as u32) % 3;
        (0..vs.len())
            .all(|i| (i + 1..vs.len()).all(|j| color(i) != color(j) || !adjacent(g, vs[i], vs[j])))
    })
}

/// Tries all vertex subsets of size k.
pub fn has_clique(g: &Graph, k: usize) -> bool {
    let vs: Vec<&String> = g.vertices.iter().collect();
    (0u32..(1 << vs.len()))
        .filter(|m| m.count_ones() as usize == k)
        .any(|m| {
            let pick: Vec<&String> = (0..vs.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| vs[i])
                .collect();
            pick.iter()
                .enumerate()
                .all(|(i, a)| pick[i + 1..].iter().all(|b| adjacent(g, a, b)))
        })
}
