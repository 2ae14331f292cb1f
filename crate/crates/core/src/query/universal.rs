use super::{negated_dnf, Disjunct, Query, QueryBody};
use crate::condition::{sat_check_grouped, GlobalCondition};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::term::{Fact, Term};
use crate::unify::{copy_fact, copy_term, for_each_assignment, open_stride};

/// Cap on the number of disjuncts in the normal form of a negated matrix.
pub const MAX_DNF_DISJUNCTS: usize = 64;

type Groups = Vec<Vec<Vec<(Term, Term)>>>;

/// Values a term takes across `k` copies.
fn spread(t: &Term, k: usize, stride: u32) -> Vec<Term> {
    if t.is_open() {
        (0..k).map(|c| copy_term(t, c, stride)).collect()
    } else {
        vec![t.clone()]
    }
}

fn condition_groups(cond: &GlobalCondition, k: usize, stride: u32) -> Groups {
    cond.clauses()
        .map(|clause| {
            clause
                .iter()
                .map(|d| {
                    let (l, r) = (spread(&d.0, k, stride), spread(&d.1, k, stride));
                    l.iter()
                        .flat_map(|a| r.iter().map(move |b| (a.clone(), b.clone())))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Whether some instance represented by `(t, cond)` satisfies one of the
/// disjuncts. Disjuncts must be equality-free and every variable must occur
/// in a positive atom.
///
/// A witness uses k copies of `t`, one per group of positive atoms that
/// land in the same copy, with the open nulls of each copy renamed apart.
/// The positive atoms fix equalities; the condition (spread over the
/// copies), the negated atoms against every fact of every copy and the
/// disequalities must stay satisfiable.
pub fn exists_eval(t: &Instance, cond: &GlobalCondition, disjuncts: &[Disjunct]) -> Result<bool> {
    let facts: Vec<Fact> = t.iter().cloned().collect();
    let stride = open_stride(t);
    for d in disjuncts {
        if !d.eqs.is_empty() {
            return Err(Error::Precondition(
                "disjunct still carries equalities".into(),
            ));
        }
        let pos = d.pos_vars();
        if let Some(v) = d.vars().into_iter().find(|v| !pos.contains(v)) {
            return Err(Error::Precondition(format!(
                "variable {v} of {d} occurs in no positive atom"
            )));
        }
        let kmax = d.pos.len().max(1);
        let mut found = false;
        for_each_assignment(&d.pos, &facts, stride, kmax, &mut |asg, eqs| {
            let k = asg.iter().map(|p| p.0 + 1).max().unwrap_or(0).max(1);
            let mut groups = condition_groups(cond, k, stride);
            for n in &d.neg {
                for f in facts
                    .iter()
                    .filter(|f| f.rel == n.rel && f.args.len() == n.args.len())
                {
                    for c in 0..k {
                        let g = copy_fact(f, c, stride);
                        groups.push(
                            n.args
                                .iter()
                                .zip(&g.args)
                                .map(|(a, b)| vec![(a.clone(), b.clone())])
                                .collect(),
                        );
                    }
                }
            }
            for (a, b) in &d.neqs {
                groups.push(vec![vec![(a.clone(), b.clone())]]);
            }
            found = sat_check_grouped(eqs, &groups);
            !found
        });
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Certain truth of a universal query at `tuple`: no represented instance
/// satisfies the negated matrix.
pub fn eval_universal(
    t: &Instance,
    cond: &GlobalCondition,
    q: &Query,
    tuple: &[Term],
) -> Result<bool> {
    let QueryBody::Universal { matrix, .. } = &q.body else {
        return Err(Error::Precondition("not a universal query".into()));
    };
    if !q.head_matches(tuple) {
        return Ok(false);
    }
    let m = matrix.substitute(&q.binding(tuple));
    let ds: Vec<Disjunct> = negated_dnf(&m, MAX_DNF_DISJUNCTS)?
        .iter()
        .filter_map(|d| d.normalize(&Default::default()))
        .collect();
    Ok(!exists_eval(t, cond, &ds)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn q(s: &str) -> Query {
        parse_query(s).unwrap()
    }

    #[test]
    fn closed_null_must_be_p2() {
        // the closed course can only be the one taught in e3
        let t = Instance::parse("PC(p2, ?c1). CE(?c1, e3).").unwrap();
        let query = q("q() :- forall p, c: PC(p,c) & CE(c,\"e3\") -> p = \"p2\".");
        assert!(eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
        let t = Instance::parse("PC(p2, ?o1). CE(?o1, e3). PC(p1, ?o2).").unwrap();
        assert!(!eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
    }

    #[test]
    fn open_copies_break_single_valued_claims() {
        let t = Instance::parse("R(a, ?o1).").unwrap();
        let query = q("q() :- forall y, z: R(\"a\", y) & R(\"a\", z) -> y = z.");
        assert!(!eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
        let t = Instance::parse("R(a, ?c1).").unwrap();
        assert!(eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
    }

    #[test]
    fn condition_is_respected() {
        let t = Instance::parse("R(?c1).").unwrap();
        let query = q("q() :- forall x: R(x) -> x != \"a\".");
        assert!(!eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
        let cond = GlobalCondition::parse("?c1 != a").unwrap();
        assert!(eval_universal(&t, &cond, &query, &[]).unwrap());
    }

    #[test]
    fn open_condition_spreads_over_copies() {
        let t = Instance::parse("R(?o1). S(?o2).").unwrap();
        let cond = GlobalCondition::parse("?o1 != ?o2").unwrap();
        let query = q("q() :- forall x: R(x) -> not S(x).");
        assert!(eval_universal(&t, &cond, &query, &[]).unwrap());
        assert!(!eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
    }

    #[test]
    fn negated_atom_over_all_facts() {
        let t = Instance::parse("R(a). S(?o1).").unwrap();
        let query = q("q() :- forall x: R(x) -> S(x).");
        assert!(!eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
        let t = Instance::parse("R(a). S(a).").unwrap();
        assert!(eval_universal(&t, &GlobalCondition::new(), &query, &[]).unwrap());
    }

    #[test]
    fn exists_with_positive_atoms_only() {
        let t = Instance::parse("R(?o1).").unwrap();
        let d = q("q() :- R(\"a\").").bind(&[]);
        assert!(exists_eval(&t, &GlobalCondition::new(), &d).unwrap());
    }
}
