use std::collections::{BTreeMap, BTreeSet};

use super::{eval::tuples, Disjunct, Query};
use crate::condition::{Congruence, GlobalCondition};
use crate::error::{Error, Result};
use crate::hom::{apply_fact, for_each_hom, Subst};
use crate::instance::Instance;
use crate::term::{sym, Fact, Term};

fn check_input(t: &Instance, cond: &GlobalCondition) -> Result<()> {
    if !cond.is_trivial() {
        return Err(Error::Precondition(
            "negation evaluator needs a trivial condition".into(),
        ));
    }
    if t.nulls().iter().any(Term::is_closed) {
        return Err(Error::Precondition(
            "negation evaluator needs a table without closed nulls".into(),
        ));
    }
    let mut owner: BTreeMap<&Term, &Fact> = BTreeMap::new();
    for f in t.iter() {
        for n in f.args.iter().filter(|a| a.is_null()) {
            if *owner.entry(n).or_insert(f) != f {
                return Err(Error::Precondition(format!(
                    "null {n} occurs in more than one fact"
                )));
            }
        }
    }
    Ok(())
}

fn check_query(d: &Disjunct) -> Result<()> {
    if d.pos.len() != 1 || !d.neqs.is_empty() {
        return Err(Error::Precondition(
            "negation evaluator needs one positive atom and no disequalities".into(),
        ));
    }
    let pv = d.pos_vars();
    for n in &d.neg {
        if n.args.iter().any(|a| a.is_var() && !pv.contains(a)) {
            return Err(Error::Precondition(format!(
                "negated atom {n} uses a variable outside the positive atom"
            )));
        }
    }
    Ok(())
}

/// Binding of the variables of `u` that maps it onto the ground fact `g`.
fn match_ground(u: &Fact, g: &Fact) -> Option<Subst> {
    let mut out = None;
    let single: Instance = [g.clone()].into_iter().collect();
    for_each_hom(
        std::slice::from_ref(u),
        &single,
        &Subst::new(),
        &Term::is_var,
        &mut |h| {
            out = Some(h.clone());
            false
        },
    );
    out
}

/// Whether the atom could be made equal to some fact of the table.
fn unifiable(a: &Fact, t: &Instance) -> bool {
    t.relation(&a.rel).any(|f| {
        let mut cc = Congruence::new();
        f.args.len() == a.args.len() && a.args.iter().zip(&f.args).all(|(x, y)| cc.union(x, y))
    })
}

/// Certain truth of `∃y R(u) ∧ ¬S1(w1) ∧ ... ∧ ¬Sn(wn)` over a table whose
/// nulls are open and each confined to one fact, under a trivial condition.
///
/// Facts of the table that match `R(u)` whatever their nulls become must
/// be blocked, and blocking facts can only come from the table. The
/// evaluator keeps, for every fact with nulls, the groundings over a finite
/// domain whose query matches can still be blocked, and removes groundings
/// until nothing changes. The query is certain exactly when some fact runs
/// out of groundings or a ground match cannot be blocked.
pub fn eval_cq_neg1(
    t: &Instance,
    cond: &GlobalCondition,
    q: &Query,
    tuple: &[Term],
) -> Result<bool> {
    check_input(t, cond)?;
    let ds = q.bind(tuple);
    let d = match ds.as_slice() {
        [] => return Ok(false),
        [d] => d,
        _ => {
            return Err(Error::Precondition(
                "negation evaluator needs a single disjunct".into(),
            ))
        }
    };
    check_query(d)?;
    let u = &d.pos[0];

    // a match that is forced and has no possible blocker settles the query
    let forced = |f: &Fact| {
        let mut h = None;
        for_each_hom(
            std::slice::from_ref(u),
            &[f.clone()].into_iter().collect(),
            &Subst::new(),
            &Term::is_var,
            &mut |s| {
                h = Some(s.clone());
                false
            },
        );
        h
    };
    for f in t.iter() {
        if let Some(h) = forced(f) {
            if d.neg.iter().all(|n| !unifiable(&apply_fact(&h, n), t)) {
                return Ok(true);
            }
        }
    }

    let mut dom: BTreeSet<Term> = t.constants();
    for a in d.pos.iter().chain(&d.neg) {
        dom.extend(a.args.iter().filter(|x| x.is_const()).cloned());
    }
    let nulls = t.nulls();
    let fresh = nulls.len() + d.vars().len();
    let mut dom: Vec<Term> = dom.into_iter().collect();
    dom.extend((0..fresh).map(|k| Term::Const(sym(&format!("\u{1}v{k}")))));

    let ground: Vec<Fact> = t.iter().filter(|f| f.is_ground()).cloned().collect();
    let mut cands: Vec<BTreeSet<Fact>> = Vec::new();
    for f in t.iter().filter(|f| !f.is_ground()) {
        let ns: Vec<Term> = f
            .args
            .iter()
            .filter(|a| a.is_null())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let set = tuples(&dom, ns.len())
            .into_iter()
            .map(|vals| {
                let s: Subst = ns.iter().cloned().zip(vals).collect();
                apply_fact(&s, f)
            })
            .collect();
        cands.push(set);
    }

    loop {
        let mut possible: BTreeSet<Fact> = ground.iter().cloned().collect();
        for c in &cands {
            possible.extend(c.iter().cloned());
        }
        let blocked = |g: &Fact| match match_ground(u, g) {
            None => true,
            Some(h) => d.neg.iter().any(|n| possible.contains(&apply_fact(&h, n))),
        };
        if ground.iter().any(|g| !blocked(g)) {
            return Ok(true);
        }
        let mut changed = false;
        for c in cands.iter_mut() {
            let before = c.len();
            c.retain(|g| blocked(g));
            changed |= c.len() != before;
            if c.is_empty() {
                return Ok(true);
            }
        }
        if !changed {
            return Ok(false);
        }
    }
}
