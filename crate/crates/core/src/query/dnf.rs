use super::{Disjunct, Formula};
use crate::error::{Error, Result};

enum Lit {
    Pos(crate::term::Fact),
    Neg(crate::term::Fact),
    Eq(crate::term::Term, crate::term::Term),
    Neq(crate::term::Term, crate::term::Term),
}

/// Disjunctive normal form of `not f`, as conjunctive disjuncts. Fails with
/// a budget error when more than `cap` disjuncts would be produced.
pub fn negated_dnf(f: &Formula, cap: usize) -> Result<Vec<Disjunct>> {
    let conjs = dnf(f, false, cap)?;
    Ok(conjs
        .into_iter()
        .map(|lits| {
            let mut d = Disjunct::default();
            for l in lits {
                match l {
                    Lit::Pos(a) => d.pos.push(a),
                    Lit::Neg(a) => d.neg.push(a),
                    Lit::Eq(a, b) => d.eqs.push((a, b)),
                    Lit::Neq(a, b) => d.neqs.push((a, b)),
                }
            }
            d
        })
        .collect())
}

/// DNF of `f` when `positive`, of `not f` otherwise.
fn dnf(f: &Formula, positive: bool, cap: usize) -> Result<Vec<Vec<Lit>>> {
    let out = match (f, positive) {
        (Formula::True, true) | (Formula::False, false) => vec![vec![]],
        (Formula::True, false) | (Formula::False, true) => vec![],
        (Formula::Atom(a), true) => vec![vec![Lit::Pos(a.clone())]],
        (Formula::Atom(a), false) => vec![vec![Lit::Neg(a.clone())]],
        (Formula::Eq(a, b), true) => vec![vec![Lit::Eq(a.clone(), b.clone())]],
        (Formula::Eq(a, b), false) => vec![vec![Lit::Neq(a.clone(), b.clone())]],
        (Formula::Not(g), p) => dnf(g, !p, cap)?,
        (Formula::Or(gs), true) | (Formula::And(gs), false) => {
            let mut out = Vec::new();
            for g in gs {
                out.extend(dnf(g, positive, cap)?);
                check(out.len(), cap)?;
            }
            out
        }
        (Formula::And(gs), true) | (Formula::Or(gs), false) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for g in gs {
                let part = dnf(g, positive, cap)?;
                check(acc.len() * part.len(), cap)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &part {
                        next.push(a.iter().chain(b).map(Lit::dup).collect());
                    }
                }
                acc = next;
            }
            acc
        }
        (Formula::Implies(a, b), true) => {
            let or = Formula::Or(vec![Formula::Not(a.clone()), (**b).clone()]);
            dnf(&or, true, cap)?
        }
        (Formula::Implies(a, b), false) => {
            let and = Formula::And(vec![(**a).clone(), Formula::Not(b.clone())]);
            dnf(&and, true, cap)?
        }
    };
    check(out.len(), cap)?;
    Ok(out)
}

fn check(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Budget(format!(
            "normal form exceeds {cap} disjuncts"
        )));
    }
    Ok(())
}

impl Lit {
    fn dup(&self) -> Lit {
        match self {
            Lit::Pos(a) => Lit::Pos(a.clone()),
            Lit::Neg(a) => Lit::Neg(a.clone()),
            Lit::Eq(a, b) => Lit::Eq(a.clone(), b.clone()),
            Lit::Neq(a, b) => Lit::Neq(a.clone(), b.clone()),
        }
    }
}
