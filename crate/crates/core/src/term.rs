//! Terms and facts.

use std::fmt;
use std::sync::Arc;

/// Interned-ish symbol; cheap to clone and ordered by content.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// A constant, an open null, a closed null or a variable.
///
/// The derived order puts constants first, then open nulls, closed nulls and
/// finally variables. Several algorithms rely on this (a constant is always
/// the least member of an equivalence class).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Sym),
    Open(u32),
    Closed(u32),
    Var(Sym),
}

impl Term {
    pub fn constant(s: &str) -> Term {
        Term::Const(sym(s))
    }

    pub fn var(s: &str) -> Term {
        Term::Var(sym(s))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Open(_) | Term::Closed(_))
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Term::Open(_))
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Term::Closed(_))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Const(s) | Term::Var(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => write!(f, "{s}"),
            Term::Open(k) => write!(f, "?o{k}"),
            Term::Closed(k) => write!(f, "?c{k}"),
            Term::Var(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => write!(f, "{s:?}"),
            Term::Var(s) => write!(f, "${s}"),
            _ => write!(f, "{self}"),
        }
    }
}

/// A relational atom over terms. Ground facts, facts with nulls and
/// query atoms all share this type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub rel: Sym,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(rel: &str, args: Vec<Term>) -> Fact {
        Fact {
            rel: sym(rel),
            args,
        }
    }

    /// Ground fact from constant names.
    pub fn ground(rel: &str, args: &[&str]) -> Fact {
        Fact::new(rel, args.iter().map(|a| Term::constant(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_const)
    }

    pub fn map(&self, f: impl Fn(&Term) -> Term) -> Fact {
        Fact {
            rel: self.rel.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }

    /// Lower bound for range scans over a relation in an ordered fact set.
    pub(crate) fn lower_bound(rel: &Sym) -> Fact {
        Fact {
            rel: rel.clone(),
            args: Vec::new(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
