//! Gaifman partition: group facts that are connected through shared nulls.

use std::collections::HashMap;

use crate::instance::Instance;
use crate::term::{Fact, Term};

/// Splits `facts` into blocks of facts linked by terms for which `is_null`
/// holds. Null-free facts end up in singleton blocks. Blocks are ordered by
/// their first fact, and facts keep their input order inside a block.
pub fn gaifman_partition_by(facts: &[Fact], is_null: impl Fn(&Term) -> bool) -> Vec<Vec<Fact>> {
    let n = facts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut owner: HashMap<&Term, usize> = HashMap::new();
    for (i, f) in facts.iter().enumerate() {
        for t in f.args.iter().filter(|t| is_null(t)) {
            match owner.get(t) {
                Some(&j) => {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(t, i);
                }
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut blocks: HashMap<usize, Vec<Fact>> = HashMap::new();
    for (i, f) in facts.iter().enumerate() {
        let r = root(&mut parent, i);
        if !blocks.contains_key(&r) {
            order.push(r);
        }
        let b = blocks.entry(r).or_default();
        if !b.contains(f) {
            b.push(f.clone());
        }
    }
    order
        .into_iter()
        .map(|r| blocks.remove(&r).unwrap())
        .collect()
}

/// Gaifman partition of a table, with open and closed nulls as vertices.
pub fn gaifman_partition(table: &Instance) -> Vec<Instance> {
    let facts: Vec<Fact> = table.iter().cloned().collect();
    gaifman_partition_by(&facts, Term::is_null)
        .into_iter()
        .map(|b| b.into_iter().collect())
        .collect()
}
