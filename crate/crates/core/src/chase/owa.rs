use std::collections::BTreeSet;

use super::{ChaseFailure, Phase};
use crate::hom::{apply_fact, apply_term, find_homomorphisms, for_each_hom, Subst};
use crate::instance::Instance;
use crate::mapping::MappingProgram;
use crate::term::Term;

/// Oblivious chase of the tgds (or of the abds read left to right), then the
/// egds. Nulls are plain and rendered as open nulls.
pub fn owa_chase(i: &Instance, p: &MappingProgram) -> std::result::Result<Instance, ChaseFailure> {
    let mut next = 0u32;
    let mut t = Instance::new();
    for tgd in p.forward_tgds() {
        let z = tgd.existentials();
        for mut h in find_homomorphisms(&tgd.body, i, &BTreeSet::new()) {
            for v in &z {
                next += 1;
                h.insert(v.clone(), Term::Open(next));
            }
            t.extend(tgd.head.iter().map(|f| apply_fact(&h, f)));
        }
    }
    let egds = p.plain_egds();
    loop {
        let mut step = None;
        for e in &egds {
            for_each_hom(&e.body, &t, &Subst::new(), &Term::is_var, &mut |s| {
                let (a, b) = (apply_term(s, &e.left), apply_term(s, &e.right));
                if a != b {
                    step = Some((e.to_string(), a, b));
                    return false;
                }
                true
            });
            if step.is_some() {
                break;
            }
        }
        let Some((e, a, b)) = step else {
            return Ok(t);
        };
        let (from, to) = match (a.is_const(), b.is_const()) {
            (true, true) => {
                return Err(ChaseFailure {
                    phase: Phase::Egd,
                    witness: format!("{e} equates constants {a} and {b}"),
                })
            }
            (true, false) => (b, a),
            (false, true) => (a, b),
            _ if a < b => (b, a),
            _ => (a, b),
        };
        let s: Subst = [(from, to)].into();
        t = t.map_terms(|x| apply_term(&s, x));
    }
}
