//! Isomorphism of tables up to a kind-preserving bijective renaming of nulls.

use std::collections::BTreeSet;

use crate::hom::for_each_hom;
use crate::instance::Instance;
use crate::term::{Fact, Term};

pub fn isomorphic(a: &Instance, b: &Instance) -> bool {
    if a.len() != b.len() || a.nulls().len() != b.nulls().len() {
        return false;
    }
    let pattern: Vec<Fact> = a.iter().cloned().collect();
    let mut found = false;
    for_each_hom(&pattern, b, &Default::default(), &Term::is_null, &mut |s| {
        let kinds_ok = s
            .iter()
            .all(|(k, v)| (k.is_open() && v.is_open()) || (k.is_closed() && v.is_closed()));
        let image: BTreeSet<&Term> = s.values().collect();
        if kinds_ok && image.len() == s.len() {
            found = true;
            return false;
        }
        true
    });
    found
}
