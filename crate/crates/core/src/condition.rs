//! Global conditions: conjunctions of disequality clauses over nulls and
//! constants, plus the congruence-based satisfiability test.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::Result;
use crate::lexer::{Cursor, Tok};
use crate::term::{sym, Term};

/// `left != right`, stored with the smaller term on the left.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diseq(pub Term, pub Term);

impl Diseq {
    pub fn new(a: Term, b: Term) -> Diseq {
        if a <= b {
            Diseq(a, b)
        } else {
            Diseq(b, a)
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.0 == self.1
    }
}

impl fmt::Display for Diseq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} != {}", self.0, self.1)
    }
}

impl fmt::Debug for Diseq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A disjunction of disequalities, sorted and deduplicated.
pub type Clause = Vec<Diseq>;

pub fn normalize_clause(mut c: Clause) -> Clause {
    c.sort();
    c.dedup();
    c
}

/// Conjunction of clauses. The empty conjunction is true.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct GlobalCondition {
    clauses: BTreeSet<Clause>,
}

impl GlobalCondition {
    pub fn new() -> GlobalCondition {
        GlobalCondition::default()
    }

    pub fn from_clauses(cs: impl IntoIterator<Item = Clause>) -> GlobalCondition {
        let mut g = GlobalCondition::new();
        for c in cs {
            g.add(c);
        }
        g
    }

    pub fn add(&mut self, c: Clause) {
        self.clauses.insert(normalize_clause(c));
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.clauses
            .iter()
            .flatten()
            .flat_map(|d| [d.0.clone(), d.1.clone()])
            .collect()
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> GlobalCondition {
        GlobalCondition::from_clauses(
            self.clauses
                .iter()
                .map(|c| c.iter().map(|d| Diseq::new(f(&d.0), f(&d.1))).collect()),
        )
    }

    /// Parses one clause per line, literals separated by `|`.
    pub fn parse(src: &str) -> Result<GlobalCondition> {
        let mut g = GlobalCondition::new();
        for line in src.lines() {
            let mut cur = Cursor::new(line)?;
            if cur.at_end() {
                continue;
            }
            let mut clause = Vec::new();
            loop {
                let a = cond_term(&mut cur)?;
                cur.expect(&Tok::Neq, "'!='")?;
                let b = cond_term(&mut cur)?;
                clause.push(Diseq::new(a, b));
                if cur.at_end() {
                    break;
                }
                cur.expect(&Tok::Bar, "'|'")?;
            }
            g.add(clause);
        }
        Ok(g)
    }
}

fn cond_term(cur: &mut Cursor) -> Result<Term> {
    match cur.next() {
        Some(Tok::Word(w)) | Some(Tok::Quoted(w)) => Ok(Term::Const(sym(&w))),
        Some(Tok::Null { open: true, id }) => Ok(Term::Open(id)),
        Some(Tok::Null { open: false, id }) => Ok(Term::Closed(id)),
        _ => cur.error("expected a constant or null"),
    }
}

impl fmt::Display for GlobalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let lits: Vec<String> = c.iter().map(|d| d.to_string()).collect();
            writeln!(f, "{}", lits.join(" | "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for GlobalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.clauses.iter()).finish()
    }
}

/// Union-find over terms that refuses to merge two distinct constants.
#[derive(Clone, Default)]
pub struct Congruence {
    idx: HashMap<Term, usize>,
    terms: Vec<Term>,
    parent: Vec<usize>,
    konst: Vec<Option<Term>>,
    failed: bool,
}

impl Congruence {
    pub fn new() -> Congruence {
        Congruence::default()
    }

    fn id(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.idx.get(t) {
            return i;
        }
        let i = self.parent.len();
        self.idx.insert(t.clone(), i);
        self.terms.push(t.clone());
        self.parent.push(i);
        self.konst
            .push(if t.is_const() { Some(t.clone()) } else { None });
        i
    }

    fn root(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Merges the classes of `a` and `b`. Returns false (and marks the
    /// structure as failed) when two distinct constants end up together.
    pub fn union(&mut self, a: &Term, b: &Term) -> bool {
        let (ia, ib) = (self.id(a), self.id(b));
        let (ra, rb) = (self.root(ia), self.root(ib));
        if ra == rb {
            return !self.failed;
        }
        let merged = match (&self.konst[ra], &self.konst[rb]) {
            (Some(x), Some(y)) if x != y => {
                self.failed = true;
                return false;
            }
            (Some(x), _) | (_, Some(x)) => Some(x.clone()),
            _ => None,
        };
        self.parent[rb] = ra;
        self.konst[ra] = merged;
        !self.failed
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn same(&mut self, a: &Term, b: &Term) -> bool {
        if a == b {
            return true;
        }
        let (ia, ib) = (self.id(a), self.id(b));
        self.root(ia) == self.root(ib)
    }

    /// Canonical representative: the class constant if any, otherwise the
    /// least term of the class.
    pub fn repr(&mut self, t: &Term) -> Term {
        let Some(&i) = self.idx.get(t) else {
            return t.clone();
        };
        let r = self.root(i);
        if let Some(c) = &self.konst[r] {
            return c.clone();
        }
        let mut best = t.clone();
        for j in 0..self.terms.len() {
            if self.root(j) == r && self.terms[j] < best {
                best = self.terms[j].clone();
            }
        }
        best
    }
}

/// Satisfiability of `equalities ∧ condition` when every class that holds
/// no constant may take a fresh constant of its own.
pub fn sat_check(equalities: &[(Term, Term)], condition: &GlobalCondition) -> bool {
    let groups: Vec<Vec<Vec<(Term, Term)>>> = condition
        .clauses()
        .map(|c| c.iter().map(|d| vec![(d.0.clone(), d.1.clone())]).collect())
        .collect();
    sat_check_grouped(equalities, &groups)
}

/// Like [`sat_check`] but each clause is a disjunction of conjunctions of
/// disequalities. A clause holds when some conjunction has all its pairs in
/// distinct classes.
pub fn sat_check_grouped(equalities: &[(Term, Term)], clauses: &[Vec<Vec<(Term, Term)>>]) -> bool {
    let mut cc = Congruence::new();
    for (a, b) in equalities {
        if !cc.union(a, b) {
            return false;
        }
    }
    clauses.iter().all(|clause| {
        clause
            .iter()
            .any(|conj| conj.iter().all(|(a, b)| !cc.same(a, b)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn forced_violation() {
        let g = GlobalCondition::from_clauses([vec![Diseq::new(Term::Open(1), c("a"))]]);
        assert!(!sat_check(&[(Term::Open(1), c("a"))], &g));
    }

    #[test]
    fn distinct_constants() {
        assert!(!sat_check(&[(c("a"), c("b"))], &GlobalCondition::new()));
    }

    #[test]
    fn unrelated_nulls() {
        let g = GlobalCondition::from_clauses([vec![Diseq::new(Term::Closed(1), Term::Open(3))]]);
        assert!(sat_check(&[(Term::Closed(1), Term::Open(2))], &g));
    }

    #[test]
    fn round_trip_text() {
        let g = GlobalCondition::parse("?c1 != ?o1 | ?o1 != a\n?o2 != b\n").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(GlobalCondition::parse(&g.to_string()).unwrap(), g);
    }
}
