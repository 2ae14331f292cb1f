use std::collections::BTreeMap;

use super::{Abd, Aegd, Atom, Egd, MappingProgram, Tgd};
use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::term::{sym, Fact, Sym, Term};

/// Parses the mapping DSL. Statements end with `.`; unquoted identifiers
/// are variables and double-quoted tokens are constants.
pub fn parse_mapping(src: &str) -> Result<MappingProgram> {
    let mut cur = Cursor::new(src)?;
    let mut p = MappingProgram::default();
    while !cur.at_end() {
        let (line, col) = cur.here();
        let kind = cur.word("statement kind")?;
        cur.expect(&Tok::Colon, "':' after statement kind")?;
        match kind.as_str() {
            "abd" => {
                let body = plain_list(&mut cur, "abd body")?;
                cur.expect(&Tok::BiArrow, "'<->'")?;
                let head = atom_list(&mut cur)?;
                if head.iter().any(|a| a.ann.is_none()) {
                    return Err(Error::Annotation(format!(
                        "{line}:{col}: every abd head atom needs an annotation"
                    )));
                }
                p.abds.push(Abd { body, head });
            }
            "aegd" => {
                let body = atom_list(&mut cur)?;
                if body.iter().any(|a| a.ann.is_none()) {
                    return Err(Error::Annotation(format!(
                        "{line}:{col}: every aegd atom needs an annotation"
                    )));
                }
                cur.expect(&Tok::Arrow, "'->'")?;
                let (left, right) = equality(&mut cur, body.iter().flat_map(|a| &a.args))?;
                p.aegds.push(Aegd { body, left, right });
            }
            "tgd" => {
                let body = plain_list(&mut cur, "tgd body")?;
                cur.expect(&Tok::Arrow, "'->'")?;
                let head = plain_list(&mut cur, "tgd head")?;
                p.tgds.push(Tgd { body, head });
            }
            "egd" => {
                let body = plain_list(&mut cur, "egd body")?;
                cur.expect(&Tok::Arrow, "'->'")?;
                let (left, right) = equality(&mut cur, body.iter().flat_map(|a| &a.args))?;
                p.egds.push(Egd { body, left, right });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unknown statement kind {other:?}"),
                });
            }
        }
        cur.expect(&Tok::Dot, "'.' at end of statement")?;
    }
    if p.is_annotated() && (!p.tgds.is_empty() || !p.egds.is_empty()) {
        return Err(Error::MixedProgram);
    }
    infer_schemas(&mut p)?;
    Ok(p)
}

fn term(cur: &mut Cursor) -> Result<Term> {
    match cur.next() {
        Some(Tok::Word(w)) => Ok(Term::Var(sym(&w))),
        Some(Tok::Quoted(w)) => Ok(Term::Const(sym(&w))),
        _ => cur.error("expected a variable or a quoted constant"),
    }
}

fn atom(cur: &mut Cursor) -> Result<Atom> {
    let rel = cur.word("relation name")?;
    let mut ann = None;
    if cur.eat(&Tok::At) {
        let w = cur.word("annotation")?;
        match w.parse::<u32>() {
            Ok(k) if k > 0 => ann = Some(k),
            _ => return cur.error("annotation must be a positive integer"),
        }
    }
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
    Ok(Atom {
        rel: sym(&rel),
        ann,
        args,
    })
}

fn atom_list(cur: &mut Cursor) -> Result<Vec<Atom>> {
    let mut out = vec![atom(cur)?];
    while cur.eat(&Tok::Comma) {
        out.push(atom(cur)?);
    }
    Ok(out)
}

fn plain_list(cur: &mut Cursor, what: &str) -> Result<Vec<Fact>> {
    let here = cur.here();
    let atoms = atom_list(cur)?;
    if atoms.iter().any(|a| a.ann.is_some()) {
        return Err(Error::Annotation(format!(
            "{}:{}: annotations are not allowed in {what}",
            here.0, here.1
        )));
    }
    Ok(atoms.iter().map(Atom::fact).collect())
}

fn equality<'a>(
    cur: &mut Cursor,
    body: impl Iterator<Item = &'a Term> + Clone,
) -> Result<(Term, Term)> {
    let left = term(cur)?;
    cur.expect(&Tok::Eq, "'='")?;
    let right = term(cur)?;
    for t in [&left, &right] {
        if t.is_var() && !body.clone().any(|b| b == t) {
            return cur.error(format!("variable {t} does not occur in the body"));
        }
    }
    Ok((left, right))
}

fn note(
    schema: &mut BTreeMap<Sym, usize>,
    arity: &mut BTreeMap<Sym, usize>,
    rel: &Sym,
    n: usize,
) -> Result<()> {
    if let Some(&a) = arity.get(rel) {
        if a != n {
            return Err(Error::ArityConflict {
                rel: rel.to_string(),
                first: a,
                second: n,
            });
        }
    }
    arity.insert(rel.clone(), n);
    schema.insert(rel.clone(), n);
    Ok(())
}

fn infer_schemas(p: &mut MappingProgram) -> Result<()> {
    let mut arity = BTreeMap::new();
    let (mut source, mut target) = (BTreeMap::new(), BTreeMap::new());
    for a in &p.abds {
        for f in &a.body {
            note(&mut source, &mut arity, &f.rel, f.arity())?;
        }
        for h in &a.head {
            note(&mut target, &mut arity, &h.rel, h.args.len())?;
        }
    }
    for a in &p.aegds {
        for h in &a.body {
            note(&mut target, &mut arity, &h.rel, h.args.len())?;
        }
    }
    for t in &p.tgds {
        for f in &t.body {
            note(&mut source, &mut arity, &f.rel, f.arity())?;
        }
        for f in &t.head {
            note(&mut target, &mut arity, &f.rel, f.arity())?;
        }
    }
    for e in &p.egds {
        for f in &e.body {
            note(&mut target, &mut arity, &f.rel, f.arity())?;
        }
    }
    if let Some(r) = source.keys().find(|r| target.contains_key(*r)) {
        return Err(Error::SchemaOverlap(r.to_string()));
    }
    p.source = source;
    p.target = target;
    Ok(())
}
