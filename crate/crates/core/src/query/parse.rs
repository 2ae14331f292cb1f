use std::collections::BTreeSet;

use super::{Disjunct, Formula, Query, QueryBody};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::term::{sym, Fact, Term};

/// Parses `q(x) :- body ; body.` or `q(x) :- forall y, z: matrix.`
///
/// Disjunct items are atoms, `not` atoms, `s = t` and `s != t`. Matrices use
/// `&`, `|`, `->`, `not` and parentheses. Unquoted identifiers are
/// variables, double-quoted tokens are constants.
pub fn parse_query(src: &str) -> Result<Query> {
    let mut cur = Cursor::new(src)?;
    let name = cur.word("query name")?;
    cur.expect(&Tok::LParen, "'('")?;
    let mut head = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            head.push(term(&mut cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma, "',' or ')'")?;
        }
    }
    cur.expect(&Tok::Turnstile, "':-'")?;
    let body = if cur.eat_word("forall") {
        let mut vars = Vec::new();
        loop {
            let w = cur.word("quantified variable")?;
            vars.push(Term::Var(sym(&w)));
            if cur.eat(&Tok::Colon) {
                break;
            }
            cur.expect(&Tok::Comma, "',' or ':'")?;
        }
        let matrix = implication(&mut cur)?;
        QueryBody::Universal { vars, matrix }
    } else {
        let mut ds = Vec::new();
        loop {
            ds.push(disjunct(&mut cur)?);
            if !cur.eat(&Tok::Semi) {
                break;
            }
        }
        QueryBody::Union(ds)
    };
    cur.expect(&Tok::Dot, "'.' at end of query")?;
    if !cur.at_end() {
        return cur.error("trailing input after query");
    }
    let q = Query { name, head, body };
    check_safety(q)
}

fn term(cur: &mut Cursor) -> Result<Term> {
    match cur.next() {
        Some(Tok::Word(w)) => Ok(Term::Var(sym(&w))),
        Some(Tok::Quoted(w)) => Ok(Term::Const(sym(&w))),
        _ => cur.error("expected a variable or a quoted constant"),
    }
}

fn atom(cur: &mut Cursor) -> Result<Fact> {
    let rel = cur.word("relation name")?;
    cur.expect(&Tok::LParen, "'('")?;
    let mut args = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            args.push(term(cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma, "',' or ')'")?;
        }
    }
    Ok(Fact::new(&rel, args))
}

fn is_atom_start(cur: &Cursor) -> bool {
    matches!(cur.peek(), Some(Tok::Word(_))) && cur.peek_at(1) == Some(&Tok::LParen)
}

fn comparison(cur: &mut Cursor) -> Result<(Term, Term, bool)> {
    let a = term(cur)?;
    let neq = match cur.next() {
        Some(Tok::Eq) => false,
        Some(Tok::Neq) => true,
        _ => return cur.error("expected '=' or '!='"),
    };
    let b = term(cur)?;
    Ok((a, b, neq))
}

fn disjunct(cur: &mut Cursor) -> Result<Disjunct> {
    let mut d = Disjunct::default();
    loop {
        if matches!(cur.peek(), Some(Tok::Word(w)) if w == "not")
            && cur.peek_at(1) != Some(&Tok::LParen)
        {
            cur.next();
            d.neg.push(atom(cur)?);
        } else if is_atom_start(cur) {
            d.pos.push(atom(cur)?);
        } else {
            let (a, b, neq) = comparison(cur)?;
            if neq {
                d.neqs.push((a, b));
            } else {
                d.eqs.push((a, b));
            }
        }
        if !cur.eat(&Tok::Comma) {
            return Ok(d);
        }
    }
}

fn implication(cur: &mut Cursor) -> Result<Formula> {
    let lhs = disjunction(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = implication(cur)?;
        return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn disjunction(cur: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![conjunction(cur)?];
    while cur.eat(&Tok::Bar) {
        parts.push(conjunction(cur)?);
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::Or(parts)
    })
}

fn conjunction(cur: &mut Cursor) -> Result<Formula> {
    let mut parts = vec![unary(cur)?];
    while cur.eat(&Tok::Amp) {
        parts.push(unary(cur)?);
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::And(parts)
    })
}

fn unary(cur: &mut Cursor) -> Result<Formula> {
    if matches!(cur.peek(), Some(Tok::Word(w)) if w == "not")
        && cur.peek_at(1) != Some(&Tok::LParen)
    {
        cur.next();
        return Ok(Formula::Not(Box::new(unary(cur)?)));
    }
    if cur.eat(&Tok::LParen) {
        let f = implication(cur)?;
        cur.expect(&Tok::RParen, "')'")?;
        return Ok(f);
    }
    if matches!(cur.peek(), Some(Tok::Word(w)) if w == "true" || w == "false")
        && cur.peek_at(1) != Some(&Tok::LParen)
    {
        let Some(Tok::Word(w)) = cur.next() else {
            unreachable!()
        };
        return Ok(if w == "true" {
            Formula::True
        } else {
            Formula::False
        });
    }
    if is_atom_start(cur) {
        return Ok(Formula::Atom(atom(cur)?));
    }
    let (a, b, neq) = comparison(cur)?;
    let eq = Formula::Eq(a, b);
    Ok(if neq { Formula::Not(Box::new(eq)) } else { eq })
}

fn check_safety(mut q: Query) -> Result<Query> {
    let head: BTreeSet<Term> = q.head.iter().filter(|t| t.is_var()).cloned().collect();
    match &mut q.body {
        QueryBody::Union(ds) => {
            let mut kept = Vec::new();
            for d in ds.iter() {
                let Some(n) = d.normalize(&head) else {
                    continue;
                };
                let pos = n.pos_vars();
                let bound = |v: &Term| pos.contains(v) || head.contains(v);
                for v in &head {
                    let linked = pos.contains(v) || n.eqs.iter().any(|(a, _)| a == v);
                    if !linked {
                        return Err(Error::UnsafeQuery(format!(
                            "head variable {v} does not occur in a positive atom of {d}"
                        )));
                    }
                }
                if let Some(v) = n.vars().into_iter().find(|v| !bound(v)) {
                    return Err(Error::UnsafeQuery(format!(
                        "variable {v} of {d} occurs in no positive atom"
                    )));
                }
                kept.push(n);
            }
            *ds = kept;
        }
        QueryBody::Universal { vars, matrix } => {
            let mut free = BTreeSet::new();
            matrix.vars(&mut free);
            let bound: BTreeSet<Term> = vars.iter().cloned().chain(head.iter().cloned()).collect();
            if let Some(v) = free.difference(&bound).next() {
                return Err(Error::UnsafeQuery(format!(
                    "variable {v} is neither quantified nor in the head"
                )));
            }
            if let Some(v) = vars.iter().find(|v| head.contains(v)) {
                return Err(Error::UnsafeQuery(format!(
                    "head variable {v} is also quantified"
                )));
            }
        }
    }
    Ok(q)
}
