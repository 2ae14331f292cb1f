use std::fmt;

use super::{negated_dnf, Query, QueryBody, MAX_DNF_DISJUNCTS};
use crate::mapping::{affected_positions, annotation_density, is_gav_reducible, MappingProgram};
use crate::term::Term;

/// Which evaluator answers a query exactly over a given program.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QueryClass {
    Ucq,
    UcqNeq1,
    Universal,
    CqNeg1,
    /// Every dependency is full, so the representative is a single ground
    /// instance.
    FullFo,
    Unsupported(String),
}

impl fmt::Display for QueryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryClass::Ucq => write!(f, "UCQ"),
            QueryClass::UcqNeq1 => write!(f, "UCQ_NEQ1"),
            QueryClass::Universal => write!(f, "UNIVERSAL"),
            QueryClass::CqNeg1 => write!(f, "CQNEG1"),
            QueryClass::FullFo => write!(f, "FULL_FO"),
            QueryClass::Unsupported(why) => write!(f, "UNSUPPORTED ({why})"),
        }
    }
}

fn aegd_merges_nulls(p: &MappingProgram) -> bool {
    let affected = affected_positions(p);
    let at_affected = |body: &[crate::mapping::Atom], v: &Term| {
        body.iter().any(|a| {
            a.args.iter().enumerate().any(|(k, t)| {
                t == v
                    && a.ann
                        .is_some_and(|i| affected.contains(&(a.rel.clone(), i, k + 1)))
            })
        })
    };
    p.aegds
        .iter()
        .any(|e| at_affected(&e.body, &e.left) && at_affected(&e.body, &e.right))
}

fn all_full(p: &MappingProgram) -> bool {
    p.forward_tgds().iter().all(|t| t.is_full())
}

pub fn classify(q: &Query, p: &MappingProgram) -> QueryClass {
    let full = all_full(p);
    let dense = annotation_density(p).overall > 1;
    let fallback = |why: &str| {
        if full {
            QueryClass::FullFo
        } else {
            QueryClass::Unsupported(why.to_string())
        }
    };
    if dense {
        return fallback("annotation density above 1");
    }
    match &q.body {
        QueryBody::Union(ds) => {
            if ds.iter().all(|d| d.neg.is_empty() && d.neqs.is_empty()) {
                return QueryClass::Ucq;
            }
            if ds.iter().all(|d| d.neg.is_empty() && d.neqs.len() <= 1) {
                return QueryClass::UcqNeq1;
            }
            let shape = ds.len() == 1 && ds[0].pos.len() == 1 && ds[0].neqs.is_empty() && {
                let pv = ds[0].pos_vars();
                ds[0]
                    .neg
                    .iter()
                    .all(|n| n.args.iter().all(|a| !a.is_var() || pv.contains(a)))
            };
            if !shape {
                return fallback("negation outside a single positive atom");
            }
            if !is_gav_reducible(&p.forward_tgds()) {
                return fallback("mapping is not GAV-reducible");
            }
            if aegd_merges_nulls(p) {
                return fallback("an aegd equates two affected positions");
            }
            QueryClass::CqNeg1
        }
        QueryBody::Universal { matrix, .. } => match negated_dnf(matrix, MAX_DNF_DISJUNCTS) {
            Err(_) => fallback("normal form too large"),
            Ok(ds) => {
                let head: std::collections::BTreeSet<Term> = q.head.iter().cloned().collect();
                let ok = ds.iter().filter_map(|d| d.normalize(&head)).all(|d| {
                    let pv = d.pos_vars();
                    d.vars().iter().all(|v| pv.contains(v) || head.contains(v))
                });
                if ok {
                    QueryClass::Universal
                } else {
                    fallback("negated matrix is not range-restricted")
                }
            }
        },
    }
}
