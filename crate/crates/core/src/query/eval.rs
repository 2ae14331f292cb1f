use std::collections::BTreeSet;

use super::{Disjunct, Formula, Query, QueryBody};
use crate::error::{Error, Result};
use crate::hom::{apply_fact, apply_term, for_each_hom, Subst};
use crate::instance::Instance;
use crate::term::{sym, Term};

fn disjunct_holds(d: &Disjunct, inst: &Instance) -> bool {
    !for_each_hom(&d.pos, inst, &Subst::new(), &Term::is_var, &mut |h| {
        let ok = d.neg.iter().all(|a| !inst.contains(&apply_fact(h, a)))
            && d.neqs
                .iter()
                .all(|(a, b)| apply_term(h, a) != apply_term(h, b))
            && d.eqs
                .iter()
                .all(|(a, b)| apply_term(h, a) == apply_term(h, b));
        !ok
    })
}

fn formula_holds(f: &Formula, inst: &Instance, s: &Subst) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => inst.contains(&apply_fact(s, a)),
        Formula::Eq(a, b) => apply_term(s, a) == apply_term(s, b),
        Formula::Not(g) => !formula_holds(g, inst, s),
        Formula::And(gs) => gs.iter().all(|g| formula_holds(g, inst, s)),
        Formula::Or(gs) => gs.iter().any(|g| formula_holds(g, inst, s)),
        Formula::Implies(a, b) => !formula_holds(a, inst, s) || formula_holds(b, inst, s),
    }
}

fn forall(vars: &[Term], dom: &[Term], matrix: &Formula, inst: &Instance, s: &mut Subst) -> bool {
    let Some((v, rest)) = vars.split_first() else {
        return formula_holds(matrix, inst, s);
    };
    for d in dom {
        s.insert(v.clone(), d.clone());
        if !forall(rest, dom, matrix, inst, s) {
            s.remove(v);
            return false;
        }
    }
    s.remove(v);
    true
}

/// Whether `inst`, read as a complete database, satisfies `q(t)`. Nulls are
/// treated as ordinary values.
pub fn holds(q: &Query, inst: &Instance, t: &[Term]) -> bool {
    match &q.body {
        QueryBody::Union(_) => q.bind(t).iter().any(|d| disjunct_holds(d, inst)),
        QueryBody::Universal { vars, matrix } => {
            if !q.head_matches(t) {
                return false;
            }
            let m = matrix.substitute(&q.binding(t));
            // values outside the active domain behave alike, one fresh value
            // per variable is enough to cover every equality pattern
            let mut dom: BTreeSet<Term> = inst.dom();
            m.constants(&mut dom);
            let mut dom: Vec<Term> = dom.into_iter().collect();
            dom.extend((0..vars.len()).map(|k| Term::Const(sym(&format!("\u{1}fresh{k}")))));
            forall(vars, &dom, &m, inst, &mut Subst::new())
        }
    }
}

/// Answers of `q` on `inst` read as a complete database. Only tuples of
/// constants are returned.
pub fn naive_eval(inst: &Instance, q: &Query) -> BTreeSet<Vec<Term>> {
    let mut out = BTreeSet::new();
    match &q.body {
        QueryBody::Union(ds) => {
            for d in ds {
                for_each_hom(&d.pos, inst, &Subst::new(), &Term::is_var, &mut |h| {
                    let mut h = h.clone();
                    for (a, b) in &d.eqs {
                        if !h.contains_key(a) {
                            let v = apply_term(&h, b);
                            h.insert(a.clone(), v);
                        }
                    }
                    let t: Vec<Term> = q.head.iter().map(|x| apply_term(&h, x)).collect();
                    if t.iter().all(Term::is_const) && !out.contains(&t) && holds(q, inst, &t) {
                        out.insert(t);
                    }
                    true
                });
            }
        }
        QueryBody::Universal { .. } => {
            let mut dom: BTreeSet<Term> = inst.constants();
            dom.extend(q.constants());
            let dom: Vec<Term> = dom.into_iter().collect();
            for t in tuples(&dom, q.arity()) {
                if holds(q, inst, &t) {
                    out.insert(t);
                }
            }
        }
    }
    out
}

pub(crate) fn tuples(dom: &[Term], n: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                dom.iter().map(move |d| {
                    let mut u = t.clone();
                    u.push(d.clone());
                    u
                })
            })
            .collect();
    }
    out
}

/// Answers of an arbitrary query on a ground instance.
pub fn eval_fo_full(j: &Instance, q: &Query) -> Result<BTreeSet<Vec<Term>>> {
    if !j.is_ground() {
        return Err(Error::Precondition(
            "full evaluation needs a ground instance".into(),
        ));
    }
    Ok(naive_eval(j, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn union_with_negation() {
        let j = Instance::parse("S(a, x). S(b, x). S(c, y).").unwrap();
        let q = parse_query("q(w) :- S(w,z), not S(\"b\",z).").unwrap();
        let ans: Vec<Vec<Term>> = naive_eval(&j, &q).into_iter().collect();
        assert_eq!(ans, vec![vec![c("c")]]);
    }

    #[test]
    fn universal_with_fresh_values() {
        let j = Instance::parse("PC(p1, c1). CE(c1, e3).").unwrap();
        let q = parse_query("q() :- forall p, c: PC(p,c) & CE(c,\"e3\") -> p = \"p2\".").unwrap();
        assert!(!holds(&q, &j, &[]));
        let j = Instance::parse("PC(p2, c1). CE(c1, e3).").unwrap();
        assert!(holds(&q, &j, &[]));
        let q = parse_query("q() :- forall x, y: x = y.").unwrap();
        assert!(!holds(&q, &Instance::new(), &[]));
    }

    #[test]
    fn head_equated_to_constant() {
        let j = Instance::parse("R(a). R(b).").unwrap();
        let q = parse_query("q(x) :- R(x), x = \"a\".").unwrap();
        let ans: Vec<Vec<Term>> = naive_eval(&j, &q).into_iter().collect();
        assert_eq!(ans, vec![vec![c("a")]]);
    }

    #[test]
    fn non_ground_rejected() {
        let j = Instance::parse("R(?o1).").unwrap();
        let q = parse_query("q() :- R(x).").unwrap();
        assert!(eval_fo_full(&j, &q).is_err());
    }
}
