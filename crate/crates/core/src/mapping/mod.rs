//! The dependency language: abds, aegds, s-t tgds and target egds.

mod metrics;
mod parse;
mod translate;
mod views;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{sym, Fact, Sym, Term};

pub use metrics::{
    affected_positions, annotation_cardinality, annotation_density, check_safety, is_gav_reducible,
    Metric, Position, SafetyReport,
};
pub use parse::parse_mapping;
pub use translate::{translate_tgds, Translation};
pub use views::{diamond_rel, BackwardRule, DiamondRule};

/// An atom that may carry an annotation. Annotation identity is the pair
/// (relation, integer).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Sym,
    pub ann: Option<u32>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(rel: &str, ann: Option<u32>, args: Vec<Term>) -> Atom {
        Atom {
            rel: sym(rel),
            ann,
            args,
        }
    }

    pub fn annotated(rel: &str, ann: u32, args: Vec<Term>) -> Atom {
        Atom::new(rel, Some(ann), args)
    }

    pub fn plain(f: &Fact) -> Atom {
        Atom {
            rel: f.rel.clone(),
            ann: None,
            args: f.args.clone(),
        }
    }

    /// The atom with its annotation dropped.
    pub fn fact(&self) -> Fact {
        Fact {
            rel: self.rel.clone(),
            args: self.args.clone(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().filter(|t| t.is_var())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Const(c) => write!(f, "\"{c}\""),
        other => write!(f, "{other}"),
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    write!(f, "(")?;
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_term(f, t)?;
    }
    write!(f, ")")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rel)?;
        if let Some(a) = self.ann {
            write!(f, "@{a}")?;
        }
        write_args(f, &self.args)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

struct Quoted<'a>(&'a Fact);

impl fmt::Display for Quoted<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.rel)?;
        write_args(f, &self.0.args)
    }
}

fn vars_of<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> BTreeSet<Term> {
    facts
        .into_iter()
        .flat_map(|f| f.args.iter())
        .filter(|t| t.is_var())
        .cloned()
        .collect()
}

/// `body <-> head` where every head atom is annotated.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Abd {
    pub body: Vec<Fact>,
    pub head: Vec<Atom>,
}

impl Abd {
    pub fn head_facts(&self) -> Vec<Fact> {
        self.head.iter().map(Atom::fact).collect()
    }

    /// Variables shared by body and head.
    pub fn frontier(&self) -> BTreeSet<Term> {
        let b = vars_of(&self.body);
        let h = vars_of(&self.head_facts());
        b.intersection(&h).cloned().collect()
    }

    /// Variables that occur only in the body.
    pub fn body_only(&self) -> BTreeSet<Term> {
        let h = vars_of(&self.head_facts());
        vars_of(&self.body).difference(&h).cloned().collect()
    }

    /// Variables that occur only in the head.
    pub fn head_only(&self) -> BTreeSet<Term> {
        let b = vars_of(&self.body);
        vars_of(&self.head_facts())
            .difference(&b)
            .cloned()
            .collect()
    }
}

impl fmt::Display for Abd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "abd: ")?;
        let body: Vec<Quoted> = self.body.iter().map(Quoted).collect();
        write_list(f, &body)?;
        write!(f, " <-> ")?;
        write_list(f, &self.head)?;
        write!(f, ".")
    }
}

/// Annotated target egd.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Aegd {
    pub body: Vec<Atom>,
    pub left: Term,
    pub right: Term,
}

impl fmt::Display for Aegd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "aegd: ")?;
        write_list(f, &self.body)?;
        write!(f, " -> ")?;
        write_term(f, &self.left)?;
        write!(f, " = ")?;
        write_term(f, &self.right)?;
        write!(f, ".")
    }
}

/// Source-to-target tgd. Existential variables are the head variables that
/// do not occur in the body.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tgd {
    pub body: Vec<Fact>,
    pub head: Vec<Fact>,
}

impl Tgd {
    pub fn existentials(&self) -> BTreeSet<Term> {
        let b = vars_of(&self.body);
        vars_of(&self.head).difference(&b).cloned().collect()
    }

    pub fn frontier(&self) -> BTreeSet<Term> {
        let b = vars_of(&self.body);
        vars_of(&self.head).intersection(&b).cloned().collect()
    }

    pub fn is_full(&self) -> bool {
        self.existentials().is_empty()
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tgd: ")?;
        let body: Vec<Quoted> = self.body.iter().map(Quoted).collect();
        write_list(f, &body)?;
        write!(f, " -> ")?;
        let head: Vec<Quoted> = self.head.iter().map(Quoted).collect();
        write_list(f, &head)?;
        write!(f, ".")
    }
}

/// Target egd.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Egd {
    pub body: Vec<Fact>,
    pub left: Term,
    pub right: Term,
}

impl fmt::Display for Egd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "egd: ")?;
        let body: Vec<Quoted> = self.body.iter().map(Quoted).collect();
        write_list(f, &body)?;
        write!(f, " -> ")?;
        write_term(f, &self.left)?;
        write!(f, " = ")?;
        write_term(f, &self.right)?;
        write!(f, ".")
    }
}

/// A parsed mapping: either annotated (abds and aegds) or plain (tgds and
/// egds), never both.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct MappingProgram {
    pub source: BTreeMap<Sym, usize>,
    pub target: BTreeMap<Sym, usize>,
    pub abds: Vec<Abd>,
    pub aegds: Vec<Aegd>,
    pub tgds: Vec<Tgd>,
    pub egds: Vec<Egd>,
}

impl MappingProgram {
    pub fn is_annotated(&self) -> bool {
        !self.abds.is_empty() || !self.aegds.is_empty()
    }

    /// annot(Σ, R) over the abds.
    pub fn annotations(&self, rel: &str) -> BTreeSet<u32> {
        self.abds
            .iter()
            .flat_map(|a| &a.head)
            .filter(|a| &*a.rel == rel)
            .filter_map(|a| a.ann)
            .collect()
    }

    /// Every (relation, annotation) pair used in an abd head.
    pub fn annotation_pairs(&self) -> BTreeSet<(Sym, u32)> {
        self.abds
            .iter()
            .flat_map(|a| &a.head)
            .filter_map(|a| a.ann.map(|i| (a.rel.clone(), i)))
            .collect()
    }
}

impl fmt::Display for MappingProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.abds {
            writeln!(f, "{x}")?;
        }
        for x in &self.aegds {
            writeln!(f, "{x}")?;
        }
        for x in &self.tgds {
            writeln!(f, "{x}")?;
        }
        for x in &self.egds {
            writeln!(f, "{x}")?;
        }
        Ok(())
    }
}
