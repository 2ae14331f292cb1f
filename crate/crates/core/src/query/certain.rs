use std::collections::BTreeSet;

use super::eval::tuples;
use super::{
    classify, eval_cq_neg1, eval_fo_full, eval_ucq_neq1, eval_universal, naive_eval, Query,
    QueryClass,
};
use crate::chase::{annotated_chase, ChaseFailure, ChaseOutcome, Representative};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::MappingProgram;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertainOutcome {
    /// The chase failed, so the source has no solution.
    NoSolutions(ChaseFailure),
    Answers {
        class: QueryClass,
        answers: BTreeSet<Vec<Term>>,
    },
    /// No exact evaluator applies.
    Unsupported { class: QueryClass, reason: String },
}

impl CertainOutcome {
    /// Truth of a boolean query. Every query is certain when there are no
    /// solutions.
    pub fn holds(&self) -> Option<bool> {
        match self {
            CertainOutcome::NoSolutions(_) => Some(true),
            CertainOutcome::Answers { answers, .. } => Some(answers.contains(&Vec::new())),
            CertainOutcome::Unsupported { .. } => None,
        }
    }
}

/// Tuples worth testing: constants of the table, the program and the query.
pub fn candidate_tuples(t: &Instance, p: &MappingProgram, q: &Query) -> Vec<Vec<Term>> {
    let mut dom: BTreeSet<Term> = t.constants();
    dom.extend(q.constants());
    for abd in &p.abds {
        for a in abd
            .body
            .iter()
            .chain(abd.head.iter().map(|h| h.fact()).collect::<Vec<_>>().iter())
        {
            dom.extend(a.args.iter().filter(|x| x.is_const()).cloned());
        }
    }
    let dom: Vec<Term> = dom.into_iter().collect();
    tuples(&dom, q.arity())
}

/// Answers on a representative for a given class.
pub fn answers_on(
    rep: &Representative,
    p: &MappingProgram,
    q: &Query,
    class: &QueryClass,
) -> Result<BTreeSet<Vec<Term>>> {
    let (t, cond) = (&rep.table, &rep.condition);
    let mut out = BTreeSet::new();
    let each = |out: &mut BTreeSet<Vec<Term>>, f: &dyn Fn(&[Term]) -> Result<bool>| -> Result<()> {
        for tuple in candidate_tuples(t, p, q) {
            if f(&tuple)? {
                out.insert(tuple);
            }
        }
        Ok(())
    };
    match class {
        QueryClass::Ucq => out = naive_eval(t, q),
        QueryClass::UcqNeq1 => each(&mut out, &|x| eval_ucq_neq1(t, cond, q, x))?,
        QueryClass::Universal => each(&mut out, &|x| eval_universal(t, cond, q, x))?,
        QueryClass::CqNeg1 => each(&mut out, &|x| eval_cq_neg1(t, cond, q, x))?,
        QueryClass::FullFo => out = eval_fo_full(t, q)?,
        QueryClass::Unsupported(why) => return Err(Error::Precondition(why.clone())),
    }
    Ok(out)
}

/// Certain answers of `q` over the solutions of `i` under `p`: chase, pick
/// the evaluator for the query class and run it on the representative.
pub fn certain_answers(i: &Instance, p: &MappingProgram, q: &Query) -> Result<CertainOutcome> {
    let class = classify(q, p);
    let rep = match annotated_chase(i, p)? {
        ChaseOutcome::Failure(f) => return Ok(CertainOutcome::NoSolutions(f)),
        ChaseOutcome::Success(r) => r,
    };
    if let QueryClass::Unsupported(reason) = &class {
        return Ok(CertainOutcome::Unsupported {
            class: class.clone(),
            reason: reason.clone(),
        });
    }
    match answers_on(&rep, p, q, &class) {
        Ok(answers) => Ok(CertainOutcome::Answers { class, answers }),
        Err(Error::Precondition(reason)) => Ok(CertainOutcome::Unsupported { class, reason }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::parse_mapping;
    use crate::query::parse_query;

    #[test]
    fn disequality_separates_images() {
        let p = parse_mapping("abd: R(x,y) <-> S@1(x,z), V@1(z,y).").unwrap();
        let i = Instance::parse("R(a,b). R(c,d).").unwrap();
        let q = parse_query("q() :- S(x,z1), V(z2,y), z1 != z2.").unwrap();
        let out = certain_answers(&i, &p, &q).unwrap();
        assert_eq!(out.holds(), Some(true));
        let q = parse_query("q(x) :- S(x,z).").unwrap();
        let CertainOutcome::Answers { answers, class } = certain_answers(&i, &p, &q).unwrap()
        else {
            panic!()
        };
        assert_eq!(class, QueryClass::Ucq);
        assert_eq!(answers.len(), 2);
    }
}
