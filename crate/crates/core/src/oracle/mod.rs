//! Brute-force reference semantics over a bounded domain: ABD, inference
//! based, open world and GCWA*. Every verdict is relative to the domain of
//! the source plus a few fresh constants.

mod abd;
mod certain;
mod inference;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::instance::Instance;
use crate::mapping::MappingProgram;
use crate::term::{sym, Term};

pub use abd::check_abd_solution;
pub use certain::{certain_oracle, OracleAnswer};
pub use inference::{check_inference_solution, check_owa_solution};
pub use search::{
    candidate_instances, enumerate_abd_solutions, enumerate_inference_solutions,
    exists_solution_general, gcwa_star_solutions, owa_solutions, ExistsVerdict,
};

/// Limits for the bounded searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainBudget {
    /// Fresh constants added to the active domain.
    pub extra_constants: usize,
    /// Largest candidate instance, in facts.
    pub max_size: usize,
    /// Search nodes before giving up with a budget error.
    pub max_nodes: usize,
}

impl Default for DomainBudget {
    fn default() -> Self {
        DomainBudget {
            extra_constants: 2,
            max_size: 8,
            max_nodes: 2_000_000,
        }
    }
}

impl fmt::Display for DomainBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "extra-constants={} max-size={}",
            self.extra_constants, self.max_size
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    Abd,
    Inference,
    Owa,
    GcwaStar,
}

impl FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "abd" => Ok(Semantics::Abd),
            "inf" | "inference" => Ok(Semantics::Inference),
            "owa" => Ok(Semantics::Owa),
            "gcwa" | "gcwa*" => Ok(Semantics::GcwaStar),
            other => Err(format!(
                "unknown semantics {other:?} (expected abd, inf, owa or gcwa)"
            )),
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Abd => "abd",
            Semantics::Inference => "inf",
            Semantics::Owa => "owa",
            Semantics::GcwaStar => "gcwa",
        })
    }
}

/// Constants of the mapping itself.
pub(crate) fn program_constants(p: &MappingProgram) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let mut add = |ts: &[Term]| out.extend(ts.iter().filter(|t| t.is_const()).cloned());
    for a in &p.abds {
        a.body.iter().for_each(|f| add(&f.args));
        a.head.iter().for_each(|f| add(&f.args));
    }
    for e in &p.aegds {
        e.body.iter().for_each(|f| add(&f.args));
        add(&[e.left.clone(), e.right.clone()]);
    }
    for t in &p.tgds {
        t.body.iter().chain(&t.head).for_each(|f| add(&f.args));
    }
    for e in &p.egds {
        e.body.iter().for_each(|f| add(&f.args));
        add(&[e.left.clone(), e.right.clone()]);
    }
    out
}

/// dom(I), the mapping constants and `extra` fresh constants `_n1`, `_n2`, ...
pub fn bounded_domain(i: &Instance, p: &MappingProgram, extra: usize) -> Vec<Term> {
    let mut dom = i.constants();
    dom.extend(program_constants(p));
    let mut fresh = Vec::new();
    let mut k = 0;
    while fresh.len() < extra {
        k += 1;
        let t = Term::Const(sym(&format!("_n{k}")));
        if !dom.contains(&t) {
            fresh.push(t);
        }
    }
    dom.into_iter().chain(fresh).collect()
}

/// Shared node counter for the searches.
pub(crate) struct Counter {
    left: usize,
    what: &'static str,
}

impl Counter {
    pub(crate) fn new(limit: usize, what: &'static str) -> Counter {
        Counter { left: limit, what }
    }

    pub(crate) fn tick(&mut self) -> crate::error::Result<()> {
        if self.left == 0 {
            return Err(crate::error::Error::Budget(format!(
                "{} exceeded its node limit",
                self.what
            )));
        }
        self.left -= 1;
        Ok(())
    }
}
