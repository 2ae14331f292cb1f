//! Unifiers of a set of query atoms with copies of a table.
//!
//! Closed nulls are shared by every copy, open nulls are renamed apart per
//! copy. A unifier assigns each atom to a (copy, fact) pair and is the most
//! general solution of the resulting equalities.

use std::collections::{BTreeMap, BTreeSet};

use crate::condition::Congruence;
use crate::hom::Subst;
use crate::instance::Instance;
use crate::term::{Fact, Term};

/// Renames the open nulls of `f` into copy `c`. Copy 0 keeps the original
/// ids; copy c shifts them by `c * stride`.
pub fn copy_fact(f: &Fact, c: usize, stride: u32) -> Fact {
    f.map(|t| copy_term(t, c, stride))
}

pub fn copy_term(t: &Term, c: usize, stride: u32) -> Term {
    match t {
        Term::Open(k) => Term::Open(k + c as u32 * stride),
        other => other.clone(),
    }
}

/// Largest open-null id in `t`, used as the copy stride.
pub fn open_stride(t: &Instance) -> u32 {
    t.nulls()
        .iter()
        .filter_map(|n| match n {
            Term::Open(k) => Some(*k),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .max(1)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Unifier {
    /// Indices (in iteration order of the table) of the facts that are hit.
    pub subset: Vec<usize>,
    pub copies: usize,
    /// For every query atom, the (copy, fact index) it is sent to.
    pub assignment: Vec<(usize, usize)>,
    /// Query variables to their value.
    pub theta1: Subst,
    /// Closed nulls that get identified with something else.
    pub theta2: Subst,
    /// Per copy: open nulls (original ids) to their value. Values that are
    /// open nulls carry renamed ids, see [`copy_term`].
    pub theta2_copies: Vec<Subst>,
    /// The equalities the unifier solves, over renamed terms.
    pub equalities: Vec<(Term, Term)>,
}

/// Calls `f` for every assignment of `atoms` to (copy, fact) pairs with at
/// most `max_copies` copies whose equalities are consistent. Copies are
/// numbered in order of first use, so each set of copies is produced once.
pub fn for_each_assignment(
    atoms: &[Fact],
    facts: &[Fact],
    stride: u32,
    max_copies: usize,
    f: &mut dyn FnMut(&[(usize, usize)], &[(Term, Term)]) -> bool,
) -> bool {
    fn go(
        atoms: &[Fact],
        facts: &[Fact],
        stride: u32,
        max_copies: usize,
        used: usize,
        asg: &mut Vec<(usize, usize)>,
        eqs: &mut Vec<(Term, Term)>,
        cc: &Congruence,
        f: &mut dyn FnMut(&[(usize, usize)], &[(Term, Term)]) -> bool,
    ) -> bool {
        let i = asg.len();
        if i == atoms.len() {
            return f(asg, eqs);
        }
        let atom = &atoms[i];
        for c in 0..(used + 1).min(max_copies) {
            for (j, fact) in facts.iter().enumerate() {
                if fact.rel != atom.rel || fact.args.len() != atom.args.len() {
                    continue;
                }
                let mut cc2 = cc.clone();
                let n = eqs.len();
                let mut ok = true;
                for (a, b) in atom.args.iter().zip(&fact.args) {
                    let b = copy_term(b, c, stride);
                    if !cc2.union(a, &b) {
                        ok = false;
                        break;
                    }
                    eqs.push((a.clone(), b));
                }
                if ok {
                    asg.push((c, j));
                    let go_on = go(
                        atoms,
                        facts,
                        stride,
                        max_copies,
                        used.max(c + 1),
                        asg,
                        eqs,
                        &cc2,
                        f,
                    );
                    asg.pop();
                    if !go_on {
                        eqs.truncate(n);
                        return false;
                    }
                }
                eqs.truncate(n);
            }
        }
        true
    }
    go(
        atoms,
        facts,
        stride,
        max_copies,
        0,
        &mut Vec::new(),
        &mut Vec::new(),
        &Congruence::new(),
        f,
    )
}

/// Class representative preferring constants, then closed nulls, then open
/// nulls, then variables (this is the order of [`Term`]).
fn build(
    atoms: &[Fact],
    facts: &[Fact],
    stride: u32,
    asg: &[(usize, usize)],
    eqs: &[(Term, Term)],
) -> Unifier {
    let mut cc = Congruence::new();
    for (a, b) in eqs {
        cc.union(a, b);
    }
    let copies = asg.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let subset: BTreeSet<usize> = asg.iter().map(|p| p.1).collect();
    let rep = |cc: &mut Congruence, t: &Term| -> Term {
        // prefer closed over open so the closed retraction stays the identity
        // wherever possible
        let r = cc.repr(t);
        if r.is_open() {
            let mut best = r.clone();
            for (a, b) in eqs {
                for x in [a, b] {
                    if x.is_closed() && cc.same(x, t) && (!best.is_closed() || x < &best) {
                        best = x.clone();
                    }
                }
            }
            return best;
        }
        r
    };
    let mut theta1 = Subst::new();
    for a in atoms {
        for v in a.args.iter().filter(|t| t.is_var()) {
            let r = rep(&mut cc, v);
            theta1.insert(v.clone(), r);
        }
    }
    let mut theta2 = Subst::new();
    let mut theta2_copies = vec![Subst::new(); copies];
    for &j in &subset {
        for c in 0..copies {
            for t in &facts[j].args {
                let r = rep(&mut cc, &copy_term(t, c, stride));
                if t.is_closed() && &r != t {
                    theta2.insert(t.clone(), r);
                } else if t.is_open() && r != copy_term(t, c, stride) {
                    theta2_copies[c].insert(t.clone(), r);
                }
            }
        }
    }
    Unifier {
        subset: subset.into_iter().collect(),
        copies,
        assignment: asg.to_vec(),
        theta1,
        theta2,
        theta2_copies,
        equalities: eqs.to_vec(),
    }
}

/// All unifiers of `atoms` with `t`, including non-covering ones.
pub fn enumerate_unifiers(atoms: &[Fact], t: &Instance) -> Vec<Unifier> {
    let facts: Vec<Fact> = t.iter().cloned().collect();
    let stride = open_stride(t);
    let mut out = Vec::new();
    for_each_assignment(
        atoms,
        &facts,
        stride,
        atoms.len().max(1),
        &mut |asg, eqs| {
            out.push(build(atoms, &facts, stride, asg, eqs));
            true
        },
    );
    out
}

/// Partition of the unifier's terms, as a sorted list of sorted classes.
fn partition(u: &Unifier) -> Vec<Vec<Term>> {
    let mut cc = Congruence::new();
    let mut terms = BTreeSet::new();
    for (a, b) in &u.equalities {
        cc.union(a, b);
        terms.insert(a.clone());
        terms.insert(b.clone());
    }
    let mut classes: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for t in terms {
        let r = cc.repr(&t);
        classes.entry(r).or_default().push(t);
    }
    let mut out: Vec<Vec<Term>> = classes.into_values().collect();
    out.sort();
    out
}

fn refines(fine: &[Vec<Term>], coarse: &[Vec<Term>]) -> bool {
    let owner: BTreeMap<&Term, usize> = coarse
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |t| (t, i)))
        .collect();
    fine.iter().all(|c| {
        let first = owner.get(&c[0]);
        first.is_some() && c.iter().all(|t| owner.get(t) == first)
    })
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Canonical form under renaming of the copies.
fn canonical(u: &Unifier, stride: u32) -> Vec<Vec<Term>> {
    let base = partition(u);
    let mut best: Option<Vec<Vec<Term>>> = None;
    for perm in permutations(u.copies) {
        let m = |t: &Term| match t {
            Term::Open(k) => {
                let (c, o) = ((k - 1) / stride, (k - 1) % stride + 1);
                Term::Open(o + perm[c as usize] as u32 * stride)
            }
            other => other.clone(),
        };
        let mut p: Vec<Vec<Term>> = base
            .iter()
            .map(|c| {
                let mut c: Vec<Term> = c.iter().map(m).collect();
                c.sort();
                c
            })
            .collect();
        p.sort();
        if best.as_ref().is_none_or(|b| &p < b) {
            best = Some(p);
        }
    }
    best.unwrap_or_default()
}

/// The most general unifiers of `atoms` with subsets of `t`: every copy of
/// every hit fact is the image of some atom. Unifiers that strictly coarsen
/// another one with the same subset and copy count are dropped, and
/// unifiers equal up to renaming of copies are kept once.
pub fn mgu_set(atoms: &[Fact], t: &Instance) -> Vec<Unifier> {
    let stride = open_stride(t);
    let covering: Vec<Unifier> = enumerate_unifiers(atoms, t)
        .into_iter()
        .filter(|u| {
            let hit: BTreeSet<(usize, usize)> = u.assignment.iter().copied().collect();
            hit.len() == u.subset.len() * u.copies
        })
        .collect();
    let parts: Vec<Vec<Vec<Term>>> = covering.iter().map(partition).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, u) in covering.iter().enumerate() {
        let dominated = covering.iter().enumerate().any(|(j, w)| {
            j != i
                && w.subset == u.subset
                && w.copies == u.copies
                && refines(&parts[j], &parts[i])
                && !refines(&parts[i], &parts[j])
        });
        if dominated {
            continue;
        }
        if seen.insert((u.subset.clone(), u.copies, canonical(u, stride))) {
            out.push(u.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn repeated_variable_binds_open_null() {
        let t = Instance::parse("R(a, ?o1).").unwrap();
        let us = mgu_set(&[Fact::new("R", vec![v("x"), v("x")])], &t);
        assert_eq!(us.len(), 1);
        assert_eq!(us[0].theta1[&v("x")], Term::constant("a"));
        assert_eq!(us[0].theta2_copies[0][&Term::Open(1)], Term::constant("a"));
    }

    #[test]
    fn one_unifier_per_fact() {
        let t = Instance::parse("R(a). R(b).").unwrap();
        let us = mgu_set(&[Fact::new("R", vec![v("x")])], &t);
        assert_eq!(us.len(), 2);
    }

    #[test]
    fn two_copies_of_an_open_fact() {
        let t = Instance::parse("S(a, ?o1).").unwrap();
        let atoms = [
            Fact::new("S", vec![v("x"), v("z1")]),
            Fact::new("S", vec![v("y"), v("z2")]),
        ];
        let us = mgu_set(&atoms, &t);
        // one copy identifying z1 and z2, and two copies keeping them apart
        assert_eq!(us.len(), 2);
        let two = us.iter().find(|u| u.copies == 2).unwrap();
        assert_ne!(two.theta1[&v("z1")], two.theta1[&v("z2")]);
        let one = us.iter().find(|u| u.copies == 1).unwrap();
        assert_eq!(one.theta1[&v("z1")], one.theta1[&v("z2")]);
    }

    #[test]
    fn closed_null_shared_across_copies() {
        let t = Instance::parse("S(a, ?c1).").unwrap();
        let atoms = [
            Fact::new("S", vec![v("x"), v("z1")]),
            Fact::new("S", vec![v("y"), v("z2")]),
        ];
        for u in mgu_set(&atoms, &t) {
            assert_eq!(u.theta1[&v("z1")], Term::Closed(1));
            assert_eq!(u.theta1[&v("z2")], Term::Closed(1));
        }
    }

    #[test]
    fn clash_gives_nothing() {
        let t = Instance::parse("R(a).").unwrap();
        assert!(mgu_set(&[Fact::new("R", vec![Term::constant("b")])], &t).is_empty());
    }
}
