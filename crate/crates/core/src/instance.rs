//! Finite instances and tables, and the facts file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::term::{sym, Fact, Sym, Term};

/// A finite set of facts. Ground instances hold only constants; naive and
/// semi-naive tables may also hold nulls.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    facts: BTreeSet<Fact>,
}

impl Instance {
    pub fn new() -> Instance {
        Instance::default()
    }

    pub fn insert(&mut self, f: Fact) -> bool {
        self.facts.insert(f)
    }

    pub fn remove(&mut self, f: &Fact) -> bool {
        self.facts.remove(f)
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.contains(f)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    /// Facts over one relation, in order.
    pub fn relation<'a>(&'a self, rel: &'a Sym) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts
            .range(Fact::lower_bound(rel)..)
            .take_while(move |f| &f.rel == rel)
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Fact>) {
        self.facts.extend(other);
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn union(&self, other: &Instance) -> Instance {
        Instance {
            facts: self.facts.union(&other.facts).cloned().collect(),
        }
    }

    /// Active domain.
    pub fn dom(&self) -> BTreeSet<Term> {
        self.facts
            .iter()
            .flat_map(|f| f.args.iter().cloned())
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        self.dom().into_iter().filter(Term::is_const).collect()
    }

    pub fn nulls(&self) -> BTreeSet<Term> {
        self.dom().into_iter().filter(Term::is_null).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.facts.iter().all(Fact::is_ground)
    }

    pub fn schema(&self) -> BTreeMap<Sym, usize> {
        self.facts
            .iter()
            .map(|f| (f.rel.clone(), f.arity()))
            .collect()
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Instance {
        self.facts.iter().map(|x| x.map(&f)).collect()
    }

    /// Parses the facts format: `R(a, b).` per line, `%` comments, nulls as
    /// `?o1` / `?c1`. Bare and double-quoted identifiers are constants.
    pub fn parse(src: &str) -> Result<Instance> {
        let mut cur = Cursor::new(src)?;
        let mut inst = Instance::new();
        let mut arity: BTreeMap<String, usize> = BTreeMap::new();
        while !cur.at_end() {
            let rel = cur.word("relation name")?;
            cur.expect(&Tok::LParen, "'('")?;
            let mut args = Vec::new();
            if !cur.eat(&Tok::RParen) {
                loop {
                    let t = match cur.next() {
                        Some(Tok::Word(w)) | Some(Tok::Quoted(w)) => Term::Const(sym(&w)),
                        Some(Tok::Null { open: true, id }) => Term::Open(id),
                        Some(Tok::Null { open: false, id }) => Term::Closed(id),
                        _ => return cur.error("expected a constant or null"),
                    };
                    args.push(t);
                    if cur.eat(&Tok::RParen) {
                        break;
                    }
                    cur.expect(&Tok::Comma, "',' or ')'")?;
                }
            }
            cur.expect(&Tok::Dot, "'.' after fact")?;
            if let Some(&a) = arity.get(&rel) {
                if a != args.len() {
                    return Err(Error::ArityConflict {
                        rel,
                        first: a,
                        second: args.len(),
                    });
                }
            } else {
                arity.insert(rel.clone(), args.len());
            }
            inst.insert(Fact::new(&rel, args));
        }
        Ok(inst)
    }
}

impl FromIterator<Fact> for Instance {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        Instance {
            facts: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

impl IntoIterator for Instance {
    type Item = Fact;
    type IntoIter = std::collections::btree_set::IntoIter<Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.into_iter()
    }
}

/// Renders in the facts file format, one fact per line.
impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.facts {
            writeln!(f, "{x}.")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.facts.iter()).finish()
    }
}

/// A semi-naive table is an instance whose facts may carry open and closed nulls.
pub type SemiNaiveTable = Instance;
pub type NaiveTable = Instance;
