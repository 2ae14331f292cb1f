use std::collections::BTreeSet;

use super::search::{abd_search, gcwa_star_solutions, inference_search, owa_search};
use super::{DomainBudget, Semantics};
use crate::error::Result;
use crate::hom::{apply_fact, apply_term, for_each_hom, Subst};
use crate::instance::Instance;
use crate::mapping::MappingProgram;
use crate::query::{naive_eval, Query, QueryBody};
use crate::term::{Fact, Sym, Term};

/// Certain answers over an enumerated solution set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    /// No solution inside the budget.
    NoSolutions,
    Answers(BTreeSet<Vec<Term>>),
}

impl OracleAnswer {
    /// Truth of a boolean query; vacuously true without solutions.
    pub fn holds(&self) -> bool {
        match self {
            OracleAnswer::NoSolutions => true,
            OracleAnswer::Answers(a) => a.contains(&Vec::new()),
        }
    }
}

/// Relations whose content is the same in every solution: those whose head
/// atoms never use an existential variable, filled with the image of all
/// source matches. Returns the other relations and the rigid facts.
fn rigid_facts(i: &Instance, p: &MappingProgram) -> (BTreeSet<Sym>, Instance) {
    let rules: Vec<(Vec<Fact>, Vec<Fact>)> = if p.is_annotated() {
        p.abds
            .iter()
            .map(|a| (a.body.clone(), a.head_facts()))
            .collect()
    } else {
        p.tgds
            .iter()
            .map(|t| (t.body.clone(), t.head.clone()))
            .collect()
    };
    let mut loose = BTreeSet::new();
    for (body, head) in &rules {
        let bv: BTreeSet<&Term> = body.iter().flat_map(|f| f.args.iter()).collect();
        for a in head {
            if a.args.iter().any(|t| t.is_var() && !bv.contains(t)) {
                loose.insert(a.rel.clone());
            }
        }
    }
    let mut facts = Instance::new();
    for (body, head) in &rules {
        for_each_hom(body, i, &Subst::new(), &Term::is_var, &mut |h| {
            facts.extend(
                head.iter()
                    .filter(|a| !loose.contains(&a.rel))
                    .map(|a| apply_fact(h, a)),
            );
            true
        });
    }
    (loose, facts)
}

/// A boolean union query whose negated atoms only use rigid relations is
/// monotone over candidates: negation is read against the rigid facts.
fn monotone_holds<'a>(
    q: &'a Query,
    rigid: &'a Instance,
) -> Option<impl Fn(&Instance) -> bool + 'a> {
    let QueryBody::Union(ds) = &q.body else {
        return None;
    };
    if !q.is_boolean() {
        return None;
    }
    Some(move |j: &Instance| {
        ds.iter().any(|d| {
            !for_each_hom(&d.pos, j, &Subst::new(), &Term::is_var, &mut |h| {
                let ok = d.neg.iter().all(|a| !rigid.contains(&apply_fact(h, a)))
                    && d.neqs
                        .iter()
                        .all(|(a, b)| apply_term(h, a) != apply_term(h, b))
                    && d.eqs
                        .iter()
                        .all(|(a, b)| apply_term(h, a) == apply_term(h, b));
                !ok
            })
        })
    })
}

/// Runs the search for one semantics; `prune` must be monotone.
fn search(
    sem: Semantics,
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
    prune: &dyn Fn(&Instance) -> bool,
    visit: &mut dyn FnMut(&Instance) -> bool,
) -> Result<()> {
    match sem {
        Semantics::Abd => abd_search(i, p, budget, prune, &mut |j, _| visit(j)),
        Semantics::Inference => inference_search(i, p, budget, prune, visit),
        Semantics::Owa => owa_search(i, p, budget, prune, visit),
        Semantics::GcwaStar => {
            for j in gcwa_star_solutions(i, p, budget)? {
                if !prune(&j) && !visit(&j) {
                    break;
                }
            }
            Ok(())
        }
    }
}

/// Intersection of the query answers over every solution within the
/// budget. A boolean query that is monotone over candidates only needs a
/// solution that falsifies it, so candidates that already satisfy it are
/// cut off early.
pub fn certain_oracle(
    sem: Semantics,
    i: &Instance,
    p: &MappingProgram,
    q: &Query,
    budget: &DomainBudget,
) -> Result<OracleAnswer> {
    let (loose, rigid_facts) = rigid_facts(i, p);
    let negates_rigid = q
        .disjuncts()
        .iter()
        .all(|d| d.neg.iter().all(|a| !loose.contains(&a.rel)));
    if let Some(prune) = monotone_holds(q, &rigid_facts).filter(|_| negates_rigid) {
        let mut falsified = false;
        search(sem, i, p, budget, &prune, &mut |_| {
            falsified = true;
            false
        })?;
        if falsified {
            return Ok(OracleAnswer::Answers(BTreeSet::new()));
        }
        let mut any = false;
        search(sem, i, p, budget, &|_| false, &mut |_| {
            any = true;
            false
        })?;
        return Ok(if any {
            OracleAnswer::Answers([Vec::new()].into())
        } else {
            OracleAnswer::NoSolutions
        });
    }
    let mut acc: Option<BTreeSet<Vec<Term>>> = None;
    search(sem, i, p, budget, &|_| false, &mut |j| {
        let ans = naive_eval(j, q);
        let next = match acc.take() {
            None => ans,
            Some(a) => a.intersection(&ans).cloned().collect(),
        };
        // nothing left to lose, but keep going only if answers remain
        let go_on = !next.is_empty();
        acc = Some(next);
        go_on
    })?;
    Ok(match acc {
        None => OracleAnswer::NoSolutions,
        Some(a) => OracleAnswer::Answers(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::parse_mapping;
    use crate::query::parse_query;

    fn budget() -> DomainBudget {
        DomainBudget {
            extra_constants: 2,
            max_size: 6,
            max_nodes: 2_000_000,
        }
    }

    #[test]
    fn disequality_certain_under_abd_only() {
        let i = Instance::parse("R(a,b). R(c,d).").unwrap();
        let q = parse_query("q() :- S(x,z1), V(z2,y), z1 != z2.").unwrap();
        let abd = parse_mapping("abd: R(x,y) <-> S@1(x,z), V@1(z,y).").unwrap();
        assert!(certain_oracle(Semantics::Abd, &i, &abd, &q, &budget())
            .unwrap()
            .holds());
        let tgd = parse_mapping("tgd: R(x,y) -> S(x,z), V(z,y).").unwrap();
        assert!(!certain_oracle(Semantics::Owa, &i, &tgd, &q, &budget())
            .unwrap()
            .holds());
    }

    #[test]
    fn closed_world_forbids_other_facts() {
        let p = parse_mapping("abd: R(x,y) <-> S@1(x,z).").unwrap();
        let i = Instance::parse("R(a,b).").unwrap();
        let q = parse_query("q(w) :- S(w,z), not S(\"b\",z).").unwrap();
        let a = certain_oracle(Semantics::Abd, &i, &p, &q, &budget()).unwrap();
        assert_eq!(a, OracleAnswer::Answers([vec![Term::constant("a")]].into()));
        let q = parse_query("q(w) :- S(w,z), not S(z,w).").unwrap();
        let a = certain_oracle(Semantics::Abd, &i, &p, &q, &budget()).unwrap();
        assert_eq!(a, OracleAnswer::Answers(BTreeSet::new()));
    }

    #[test]
    fn no_solutions_is_distinguished() {
        let p = parse_mapping("abd: R(x,y) <-> T@1(x), S@1(y).").unwrap();
        let i = Instance::parse("R(a,b). R(c,d).").unwrap();
        let q = parse_query("q() :- T(x).").unwrap();
        assert_eq!(
            certain_oracle(Semantics::Abd, &i, &p, &q, &budget()).unwrap(),
            OracleAnswer::NoSolutions
        );
    }
}
