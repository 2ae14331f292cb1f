use std::collections::{BTreeMap, BTreeSet};

use super::{MappingProgram, Tgd};
use crate::term::{Fact, Sym, Term};

/// Per-relation values plus their maximum (0 for an empty program).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metric {
    pub per_relation: BTreeMap<Sym, usize>,
    pub overall: usize,
}

impl Metric {
    fn from_map(per_relation: BTreeMap<Sym, usize>) -> Metric {
        let overall = per_relation.values().copied().max().unwrap_or(0);
        Metric {
            per_relation,
            overall,
        }
    }

    pub fn get(&self, rel: &str) -> usize {
        self.per_relation.get(rel).copied().unwrap_or(0)
    }
}

/// Annotated position: relation, annotation and 1-based argument index.
pub type Position = (Sym, u32, usize);

/// For each relation, the largest number of times a single annotation of
/// it occurs across all abd heads.
pub fn annotation_density(p: &MappingProgram) -> Metric {
    let mut count: BTreeMap<(Sym, u32), usize> = BTreeMap::new();
    for a in p.abds.iter().flat_map(|a| &a.head) {
        if let Some(i) = a.ann {
            *count.entry((a.rel.clone(), i)).or_default() += 1;
        }
    }
    let mut per: BTreeMap<Sym, usize> = BTreeMap::new();
    for ((r, _), n) in count {
        let e = per.entry(r).or_default();
        *e = (*e).max(n);
    }
    Metric::from_map(per)
}

/// Number of distinct annotations per relation across abd heads.
pub fn annotation_cardinality(p: &MappingProgram) -> Metric {
    let mut per: BTreeMap<Sym, usize> = BTreeMap::new();
    for (r, _) in p.annotation_pairs() {
        *per.entry(r).or_default() += 1;
    }
    Metric::from_map(per)
}

/// Annotated positions holding a head-only variable of some abd.
pub fn affected_positions(p: &MappingProgram) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    for abd in &p.abds {
        let z = abd.head_only();
        for a in &abd.head {
            let Some(i) = a.ann else { continue };
            for (k, t) in a.args.iter().enumerate() {
                if z.contains(t) {
                    out.insert((a.rel.clone(), i, k + 1));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyReport {
    pub safe: bool,
    /// Indices of unsafe aegds with the offending variable.
    pub offending: Vec<(usize, Term)>,
}

/// An aegd is safe when every variable repeated in its body avoids the
/// affected positions.
pub fn check_safety(p: &MappingProgram) -> SafetyReport {
    let aff = affected_positions(p);
    let mut offending = Vec::new();
    for (n, e) in p.aegds.iter().enumerate() {
        let mut seen: BTreeMap<&Term, Vec<Position>> = BTreeMap::new();
        for a in &e.body {
            for (k, t) in a.args.iter().enumerate() {
                if t.is_var() {
                    seen.entry(t)
                        .or_default()
                        .push((a.rel.clone(), a.ann.unwrap_or(0), k + 1));
                }
            }
        }
        for (v, ps) in seen {
            if ps.len() >= 2 && ps.iter().any(|p| aff.contains(p)) {
                offending.push((n, v.clone()));
            }
        }
    }
    SafetyReport {
        safe: offending.is_empty(),
        offending,
    }
}

/// Drops repeated head atoms.
pub(crate) fn dedup_head(head: &[Fact]) -> Vec<Fact> {
    let mut out: Vec<Fact> = Vec::new();
    for f in head {
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    out
}

/// True when every existential variable of every tgd occurs in exactly
/// one head atom.
pub fn is_gav_reducible(tgds: &[Tgd]) -> bool {
    tgds.iter().all(|t| {
        let head = dedup_head(&t.head);
        t.existentials()
            .iter()
            .all(|z| head.iter().filter(|f| f.args.contains(z)).count() == 1)
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_mapping;
    use super::*;

    fn ex9() -> MappingProgram {
        parse_mapping(
            "abd: R(x,y) <-> T@1(x,z), T@1(y,z), T@2(x,y).
             abd: S(x,x), R(x,x) <-> V@1(x).
             aegd: T@1(x,y), V@1(x) -> x = y.",
        )
        .unwrap()
    }

    #[test]
    fn density_and_cardinality() {
        let p = ex9();
        let d = annotation_density(&p);
        assert_eq!((d.get("T"), d.get("V"), d.overall), (2, 1, 2));
        let c = annotation_cardinality(&p);
        assert_eq!((c.get("T"), c.get("V"), c.overall), (2, 1, 2));
        assert_eq!(
            annotation_cardinality(&MappingProgram::default()).overall,
            0
        );
    }

    #[test]
    fn affected_and_safe() {
        let p = ex9();
        let aff: Vec<Position> = affected_positions(&p).into_iter().collect();
        assert_eq!(aff, vec![(crate::term::sym("T"), 1, 2)]);
        assert!(check_safety(&p).safe);
    }

    #[test]
    fn key_constraint_on_invented_id_is_unsafe() {
        let p = parse_mapping(
            "abd: Emp0(ssn,name) <-> Emp@1(eid,name).
             aegd: Emp@1(eid,n1), Emp@1(eid,n2) -> n1 = n2.",
        )
        .unwrap();
        let r = check_safety(&p);
        assert!(!r.safe);
        assert_eq!(r.offending, vec![(0, Term::var("eid"))]);
    }

    #[test]
    fn no_existentials_no_affected() {
        let p = parse_mapping("abd: R(x) <-> S@1(x).").unwrap();
        assert!(affected_positions(&p).is_empty());
        assert_eq!(annotation_density(&p).overall, 1);
    }

    #[test]
    fn gav_reducibility() {
        let shared =
            parse_mapping("tgd: P(p,e) -> PE(p,e).\ntgd: PT(p,t) -> PE(p,eid), TM(eid,t).")
                .unwrap();
        assert!(!is_gav_reducible(&shared.tgds));
        let split = parse_mapping("tgd: R(x,y) -> S(x,z), V(x,w).").unwrap();
        assert!(is_gav_reducible(&split.tgds));
        let dup = parse_mapping("tgd: R(x,y) -> S(x,z), S(x,z).").unwrap();
        assert!(is_gav_reducible(&dup.tgds));
    }
}
