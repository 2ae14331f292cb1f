//! Homomorphism search between a pattern and a target fact set.

use std::collections::{BTreeMap, BTreeSet};

use crate::instance::Instance;
use crate::term::{Fact, Term};

/// A term assignment. Terms absent from the map are left unchanged.
pub type Subst = BTreeMap<Term, Term>;

pub fn apply_term(s: &Subst, t: &Term) -> Term {
    s.get(t).cloned().unwrap_or_else(|| t.clone())
}

pub fn apply_fact(s: &Subst, f: &Fact) -> Fact {
    f.map(|t| apply_term(s, t))
}

pub fn apply_all<'a>(s: &Subst, fs: impl IntoIterator<Item = &'a Fact>) -> Instance {
    fs.into_iter().map(|f| apply_fact(s, f)).collect()
}

fn match_atom(
    atom: &Fact,
    fact: &Fact,
    s: &mut Subst,
    mappable: &dyn Fn(&Term) -> bool,
    undo: &mut Vec<Term>,
) -> bool {
    if atom.rel != fact.rel || atom.args.len() != fact.args.len() {
        return false;
    }
    for (p, v) in atom.args.iter().zip(&fact.args) {
        if mappable(p) {
            match s.get(p) {
                Some(b) if b != v => return false,
                Some(_) => {}
                None => {
                    s.insert(p.clone(), v.clone());
                    undo.push(p.clone());
                }
            }
        } else if p != v {
            return false;
        }
    }
    true
}

fn search(
    pattern: &[Fact],
    i: usize,
    target: &Instance,
    s: &mut Subst,
    mappable: &dyn Fn(&Term) -> bool,
    f: &mut dyn FnMut(&Subst) -> bool,
) -> bool {
    if i == pattern.len() {
        return f(s);
    }
    let atom = &pattern[i];
    for fact in target.relation(&atom.rel) {
        let mut undo = Vec::new();
        let ok = match_atom(atom, fact, s, mappable, &mut undo);
        let go_on = !ok || search(pattern, i + 1, target, s, mappable, f);
        for k in undo {
            s.remove(&k);
        }
        if !go_on {
            return false;
        }
    }
    true
}

/// Calls `f` for every extension of `init` mapping `pattern` into `target`.
/// Terms for which `mappable` is false must occur literally in the target.
/// Stops early when `f` returns false; the return value says whether the
/// enumeration ran to completion.
pub fn for_each_hom(
    pattern: &[Fact],
    target: &Instance,
    init: &Subst,
    mappable: &dyn Fn(&Term) -> bool,
    f: &mut dyn FnMut(&Subst) -> bool,
) -> bool {
    let mut s = init.clone();
    search(pattern, 0, target, &mut s, mappable, f)
}

pub fn exists_hom(
    pattern: &[Fact],
    target: &Instance,
    init: &Subst,
    mappable: &dyn Fn(&Term) -> bool,
) -> bool {
    !for_each_hom(pattern, target, init, mappable, &mut |_| false)
}

/// All homomorphisms from `pattern` into `target`. Variables and nulls of
/// the pattern are free unless listed in `frozen`; constants are fixed.
/// The result is sorted by assignment.
pub fn find_homomorphisms(
    pattern: &[Fact],
    target: &Instance,
    frozen: &BTreeSet<Term>,
) -> Vec<Subst> {
    let mappable = |t: &Term| !t.is_const() && !frozen.contains(t);
    let mut out = Vec::new();
    for_each_hom(pattern, target, &Subst::new(), &mappable, &mut |s| {
        out.push(s.clone());
        true
    });
    out.sort();
    out.dedup();
    out
}
