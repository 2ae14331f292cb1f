use super::{Disjunct, Query};
use crate::condition::{sat_check, GlobalCondition};
use crate::error::{Error, Result};
use crate::hom::{apply_term, exists_hom, for_each_hom, Subst};
use crate::instance::Instance;
use crate::term::Term;

/// Certain truth of a union of conjunctive queries with at most one
/// disequality per disjunct.
///
/// Each disjunct with a disequality `x != y` is read as the egd
/// `body -> x = y` and chased on the table; a failure (two constants, or a
/// merge the condition forbids) means every represented instance satisfies
/// the query. Otherwise the disequality-free disjuncts are evaluated on the
/// chased table.
pub fn eval_ucq_neq1(
    t: &Instance,
    cond: &GlobalCondition,
    q: &Query,
    tuple: &[Term],
) -> Result<bool> {
    let ds = q.bind(tuple);
    if ds.iter().any(|d| !d.neg.is_empty() || d.neqs.len() > 1) {
        return Err(Error::Precondition(
            "query has negation or more than one disequality in a disjunct".into(),
        ));
    }
    let (plain, egds): (Vec<&Disjunct>, Vec<&Disjunct>) =
        ds.iter().partition(|d| d.neqs.is_empty());
    let mut cur = t.clone();
    let mut merged: Vec<(Term, Term)> = Vec::new();
    loop {
        let mut step = None;
        for d in &egds {
            let (x, y) = &d.neqs[0];
            for_each_hom(&d.pos, &cur, &Subst::new(), &Term::is_var, &mut |h| {
                let (a, b) = (apply_term(h, x), apply_term(h, y));
                if a != b {
                    step = Some((a, b));
                    return false;
                }
                true
            });
            if step.is_some() {
                break;
            }
        }
        let Some((a, b)) = step else { break };
        if a.is_const() && b.is_const() {
            return Ok(true);
        }
        merged.push((a.clone(), b.clone()));
        if !sat_check(&merged, cond) {
            return Ok(true);
        }
        let (from, to) = if b.is_const() || (!a.is_const() && b < a) {
            (a, b)
        } else {
            (b, a)
        };
        let s: Subst = [(from, to)].into();
        cur = cur.map_terms(|x| apply_term(&s, x));
    }
    Ok(plain
        .iter()
        .any(|d| exists_hom(&d.pos, &cur, &Subst::new(), &Term::is_var)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    #[test]
    fn condition_forces_distinct_images() {
        let t = Instance::parse("S(a,?o1). S(c,?o2). V(?o1,b). V(?o2,d).").unwrap();
        let q = parse_query("q() :- S(x,z1), V(z2,y), z1 != z2.").unwrap();
        let cond = GlobalCondition::parse("?o1 != ?o2").unwrap();
        assert!(eval_ucq_neq1(&t, &cond, &q, &[]).unwrap());
        assert!(!eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[]).unwrap());
    }

    #[test]
    fn constants_clash() {
        let t = Instance::parse("R(a, b). R(a, c).").unwrap();
        let q = parse_query("q() :- R(x, y), R(x, z), y != z.").unwrap();
        assert!(eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[]).unwrap());
    }

    #[test]
    fn merge_enables_plain_disjunct() {
        let t = Instance::parse("R(a, ?o1). R(a, b).").unwrap();
        let q = parse_query("q() :- R(x, y), R(x, z), y != z ; R(w, w2), P(w2).").unwrap();
        assert!(!eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[]).unwrap());
        let t = Instance::parse("R(a, ?o1). R(a, b). P(b).").unwrap();
        assert!(eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[]).unwrap());
    }

    #[test]
    fn plain_ucq_is_naive() {
        let t = Instance::parse("R(a, ?o1).").unwrap();
        let q = parse_query("q(x) :- R(x, y).").unwrap();
        assert!(eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[Term::constant("a")]).unwrap());
        assert!(!eval_ucq_neq1(&t, &GlobalCondition::new(), &q, &[Term::constant("b")]).unwrap());
    }
}
