//! Queries over the target schema and the certain-answer evaluators.

mod certain;
mod classify;
mod cqneg;
mod dnf;
pub(crate) mod eval;
mod neq;
mod parse;
mod universal;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::condition::Congruence;
use crate::hom::{apply_fact, apply_term, Subst};
use crate::term::{Fact, Term};

pub use certain::{answers_on, candidate_tuples, certain_answers, CertainOutcome};
pub use classify::{classify, QueryClass};
pub use cqneg::eval_cq_neg1;
pub use dnf::negated_dnf;
pub use eval::{eval_fo_full, holds, naive_eval};
pub use neq::eval_ucq_neq1;
pub use parse::parse_query;
pub use universal::{eval_universal, exists_eval, MAX_DNF_DISJUNCTS};

/// One conjunctive disjunct: positive atoms, negated atoms, equalities and
/// disequalities.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Disjunct {
    pub pos: Vec<Fact>,
    pub neg: Vec<Fact>,
    pub eqs: Vec<(Term, Term)>,
    pub neqs: Vec<(Term, Term)>,
}

impl Disjunct {
    pub fn vars(&self) -> BTreeSet<Term> {
        let mut out: BTreeSet<Term> = BTreeSet::new();
        for f in self.pos.iter().chain(&self.neg) {
            out.extend(f.args.iter().filter(|t| t.is_var()).cloned());
        }
        for (a, b) in self.eqs.iter().chain(&self.neqs) {
            out.extend([a, b].into_iter().filter(|t| t.is_var()).cloned());
        }
        out
    }

    pub fn pos_vars(&self) -> BTreeSet<Term> {
        self.pos
            .iter()
            .flat_map(|f| f.args.iter())
            .filter(|t| t.is_var())
            .cloned()
            .collect()
    }

    pub fn substitute(&self, s: &Subst) -> Disjunct {
        let pair = |(a, b): &(Term, Term)| (apply_term(s, a), apply_term(s, b));
        Disjunct {
            pos: self.pos.iter().map(|f| apply_fact(s, f)).collect(),
            neg: self.neg.iter().map(|f| apply_fact(s, f)).collect(),
            eqs: self.eqs.iter().map(pair).collect(),
            neqs: self.neqs.iter().map(pair).collect(),
        }
    }

    /// Folds the equalities into the other literals. Variables in `keep`
    /// are replaced only by constants. Returns `None` when two distinct
    /// constants are equated or a disequality becomes reflexive.
    pub fn normalize(&self, keep: &BTreeSet<Term>) -> Option<Disjunct> {
        let mut cc = Congruence::new();
        for (a, b) in &self.eqs {
            if !cc.union(a, b) {
                return None;
            }
        }
        let mut s = Subst::new();
        let mut residual = Vec::new();
        for v in self.vars() {
            let r = cc.repr(&v);
            if r == v {
                continue;
            }
            if keep.contains(&v) {
                if r.is_const() {
                    residual.push((v, r));
                }
                continue;
            }
            s.insert(v, r);
        }
        // head variables sharing a class without a constant: map the class to
        // its least head variable and remember the other equalities
        let keep_sorted: Vec<&Term> = keep.iter().collect();
        for v in &keep_sorted {
            if s.contains_key(*v) {
                continue;
            }
            let r = cc.repr(v);
            if r.is_const() || r == **v {
                continue;
            }
            let leader = keep_sorted.iter().find(|k| cc.same(k, v)).copied().unwrap();
            if leader != *v {
                residual.push(((*v).clone(), leader.clone()));
            }
            for u in self.vars() {
                if !keep.contains(&u) && cc.same(&u, v) {
                    s.insert(u, leader.clone());
                }
            }
        }
        let mut d = self.substitute(&s);
        d.eqs = residual;
        if d.neqs.iter().any(|(a, b)| a == b) {
            return None;
        }
        d.neqs.retain(|(a, b)| !(a.is_const() && b.is_const()));
        Some(d)
    }
}

impl fmt::Display for Disjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = Vec::new();
        items.extend(self.pos.iter().map(|a| fmt_atom(a)));
        items.extend(self.neg.iter().map(|a| format!("not {}", fmt_atom(a))));
        items.extend(
            self.eqs
                .iter()
                .map(|(a, b)| format!("{} = {}", fmt_term(a), fmt_term(b))),
        );
        items.extend(
            self.neqs
                .iter()
                .map(|(a, b)| format!("{} != {}", fmt_term(a), fmt_term(b))),
        );
        if items.is_empty() {
            items.push("true".into());
        }
        write!(f, "{}", items.join(", "))
    }
}

pub(crate) fn fmt_term(t: &Term) -> String {
    match t {
        Term::Const(c) => format!("\"{c}\""),
        other => other.to_string(),
    }
}

pub(crate) fn fmt_atom(a: &Fact) -> String {
    let args: Vec<String> = a.args.iter().map(fmt_term).collect();
    format!("{}({})", a.rel, args.join(", "))
}

/// Quantifier-free formula used as the matrix of a universal query.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Fact),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn vars(&self, out: &mut BTreeSet<Term>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(f) => out.extend(f.args.iter().filter(|t| t.is_var()).cloned()),
            Formula::Eq(a, b) => out.extend([a, b].into_iter().filter(|t| t.is_var()).cloned()),
            Formula::Not(g) => g.vars(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.vars(out)),
            Formula::Implies(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn constants(&self, out: &mut BTreeSet<Term>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(f) => out.extend(f.args.iter().filter(|t| t.is_const()).cloned()),
            Formula::Eq(a, b) => out.extend([a, b].into_iter().filter(|t| t.is_const()).cloned()),
            Formula::Not(g) => g.constants(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.constants(out)),
            Formula::Implies(a, b) => {
                a.constants(out);
                b.constants(out);
            }
        }
    }

    pub fn substitute(&self, s: &Subst) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(f) => Formula::Atom(apply_fact(s, f)),
            Formula::Eq(a, b) => Formula::Eq(apply_term(s, a), apply_term(s, b)),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(s))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(s)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(s)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.substitute(s)), Box::new(b.substitute(s)))
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Implies(..) => 0,
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Formula::True => write!(f, "true")?,
            Formula::False => write!(f, "false")?,
            Formula::Atom(a) => write!(f, "{}", fmt_atom(a))?,
            Formula::Eq(a, b) => write!(f, "{} = {}", fmt_term(a), fmt_term(b))?,
            Formula::Not(g) => match &**g {
                Formula::Eq(a, b) => write!(f, "{} != {}", fmt_term(a), fmt_term(b))?,
                other => {
                    write!(f, "not ")?;
                    other.fmt_at(f, 3)?;
                }
            },
            Formula::And(gs) | Formula::Or(gs) => {
                let (sep, p) = if matches!(self, Formula::And(_)) {
                    (" & ", 3)
                } else {
                    (" | ", 2)
                };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    g.fmt_at(f, p)?;
                }
            }
            Formula::Implies(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " -> ")?;
                b.fmt_at(f, 0)?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum QueryBody {
    /// A union of conjunctive disjuncts, variables not in the head are
    /// existentially quantified.
    Union(Vec<Disjunct>),
    /// `forall vars: matrix`.
    Universal { vars: Vec<Term>, matrix: Formula },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Query {
    pub name: String,
    pub head: Vec<Term>,
    pub body: QueryBody,
}

impl Query {
    pub fn arity(&self) -> usize {
        self.head.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.head.is_empty()
    }

    pub fn disjuncts(&self) -> &[Disjunct] {
        match &self.body {
            QueryBody::Union(ds) => ds,
            QueryBody::Universal { .. } => &[],
        }
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        out.extend(self.head.iter().filter(|t| t.is_const()).cloned());
        match &self.body {
            QueryBody::Union(ds) => {
                for d in ds {
                    for f in d.pos.iter().chain(&d.neg) {
                        out.extend(f.args.iter().filter(|t| t.is_const()).cloned());
                    }
                    for (a, b) in d.eqs.iter().chain(&d.neqs) {
                        out.extend([a, b].into_iter().filter(|t| t.is_const()).cloned());
                    }
                }
            }
            QueryBody::Universal { matrix, .. } => matrix.constants(&mut out),
        }
        out
    }

    /// Binding of the head variables to `t`. Panics if the arity differs.
    pub fn binding(&self, t: &[Term]) -> Subst {
        assert_eq!(t.len(), self.head.len(), "answer tuple arity");
        let mut s = Subst::new();
        for (h, v) in self.head.iter().zip(t) {
            if h.is_var() {
                s.insert(h.clone(), v.clone());
            }
        }
        s
    }

    /// Head terms that disagree with `t` on constants make the tuple a
    /// non-answer regardless of the body.
    pub(crate) fn head_matches(&self, t: &[Term]) -> bool {
        let mut seen: BTreeMap<&Term, &Term> = BTreeMap::new();
        self.head.iter().zip(t).all(|(h, v)| {
            if h.is_const() {
                h == v
            } else {
                *seen.entry(h).or_insert(v) == v
            }
        })
    }

    /// Existential disjuncts with the head bound to `t` and equalities
    /// folded away. Unsatisfiable disjuncts are dropped.
    pub fn bind(&self, t: &[Term]) -> Vec<Disjunct> {
        if !self.head_matches(t) {
            return Vec::new();
        }
        let s = self.binding(t);
        self.disjuncts()
            .iter()
            .filter_map(|d| d.substitute(&s).normalize(&BTreeSet::new()))
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.head.iter().map(fmt_term).collect();
        write!(f, "{}({}) :- ", self.name, head.join(", "))?;
        match &self.body {
            QueryBody::Union(ds) => {
                let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                write!(f, "{}", parts.join(" ; "))?;
            }
            QueryBody::Universal { vars, matrix } => {
                let vs: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
                write!(f, "forall {}: {matrix}", vs.join(", "))?;
            }
        }
        write!(f, ".")
    }
}
