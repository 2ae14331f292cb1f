use std::collections::{BTreeMap, BTreeSet};

use super::Counter;
use crate::error::{Error, Result};
use crate::gaifman::gaifman_partition_by;
use crate::hom::{apply_fact, apply_term, exists_hom, for_each_hom, Subst};
use crate::instance::Instance;
use crate::mapping::{Egd, MappingProgram, Tgd};
use crate::term::{Fact, Term};

/// Whether (I, J) satisfies the tgds and egds.
pub(crate) fn is_model(i: &Instance, tgds: &[Tgd], egds: &[Egd], j: &Instance) -> bool {
    let tgds_ok = tgds.iter().all(|t| {
        for_each_hom(&t.body, i, &Subst::new(), &Term::is_var, &mut |h| {
            exists_hom(&t.head, j, h, &Term::is_var)
        })
    });
    tgds_ok && egds.iter().all(|e| egd_holds(e, j))
}

pub(crate) fn egd_holds(e: &Egd, j: &Instance) -> bool {
    for_each_hom(&e.body, j, &Subst::new(), &Term::is_var, &mut |h| {
        apply_term(h, &e.left) == apply_term(h, &e.right)
    })
}

fn tag(k: usize, a: &Fact) -> Fact {
    Fact::new(&format!("{k}#{}", a.rel), a.args.clone())
}

fn untag(a: &Fact) -> Fact {
    Fact::new(
        a.rel.split_once('#').map_or(&*a.rel, |(_, r)| r),
        a.args.clone(),
    )
}

/// One assignment f with f(α) ⊆ I and f(β) ⊆ J.
struct Inference {
    all: BTreeSet<Fact>,
    strong: BTreeSet<Fact>,
    /// Image of each head atom, under the atom's position tag.
    tagged: Vec<Fact>,
}

/// The inferences of one tgd, grouped by source match.
struct TgdInferences<'a> {
    tgd: &'a Tgd,
    /// Head atoms, tagged with their position, split into blocks linked by
    /// existential variables.
    blocks: Vec<Vec<Fact>>,
    groups: Vec<Vec<Inference>>,
}

impl<'a> TgdInferences<'a> {
    fn build(t: &'a Tgd, i: &Instance, j: &Instance) -> TgdInferences<'a> {
        let ex = t.existentials();
        let strong_atoms: Vec<&Fact> = t
            .head
            .iter()
            .filter(|a| !a.args.iter().any(|x| ex.contains(x)))
            .collect();
        let tagged: Vec<Fact> = t.head.iter().enumerate().map(|(k, a)| tag(k, a)).collect();
        let blocks = gaifman_partition_by(&tagged, |x| ex.contains(x));
        let mut groups = Vec::new();
        for_each_hom(&t.body, i, &Subst::new(), &Term::is_var, &mut |h| {
            let mut group = Vec::new();
            for_each_hom(&t.head, j, h, &Term::is_var, &mut |f| {
                group.push(Inference {
                    all: t.head.iter().map(|a| apply_fact(f, a)).collect(),
                    strong: strong_atoms.iter().map(|a| apply_fact(f, a)).collect(),
                    tagged: tagged.iter().map(|a| apply_fact(f, a)).collect(),
                });
                true
            });
            groups.push(group);
            true
        });
        TgdInferences {
            tgd: t,
            blocks,
            groups,
        }
    }

    /// Condition 3 for the chosen inferences, block by block: no match of a
    /// head block that sends each atom to an image of the same atom, touches
    /// a weakly inferred fact and has no source match.
    fn respects_weak(&self, chosen: &[&Inference], i: &Instance) -> bool {
        let inferred: BTreeSet<&Fact> = chosen.iter().flat_map(|f| f.all.iter()).collect();
        let strong: BTreeSet<&Fact> = chosen.iter().flat_map(|f| f.strong.iter()).collect();
        let weak: BTreeSet<&Fact> = inferred
            .into_iter()
            .filter(|f| !strong.contains(f))
            .collect();
        if weak.is_empty() {
            return true;
        }
        let body_vars: BTreeSet<&Term> = self.tgd.body.iter().flat_map(|a| a.args.iter()).collect();
        let images: Instance = chosen
            .iter()
            .flat_map(|f| f.tagged.iter().cloned())
            .collect();
        self.blocks.iter().all(|atoms| {
            for_each_hom(atoms, &images, &Subst::new(), &Term::is_var, &mut |g| {
                if !atoms
                    .iter()
                    .any(|a| weak.contains(&untag(&apply_fact(g, a))))
                {
                    return true;
                }
                let init: Subst = g
                    .iter()
                    .filter(|(k, _)| body_vars.contains(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                exists_hom(&self.tgd.body, i, &init, &Term::is_var)
            })
        })
    }

    /// Maximal fact sets inferred by some strategy for this tgd that meets
    /// conditions 2 and 3. None when no strategy does.
    fn maximal_inferred(&self, i: &Instance, counter: &mut Counter) -> Result<Vec<BTreeSet<Fact>>> {
        if self.groups.iter().any(Vec::is_empty) {
            return Ok(Vec::new());
        }
        let mut found: BTreeSet<BTreeSet<Fact>> = BTreeSet::new();
        let mut chosen: Vec<&Inference> = Vec::new();
        self.choose(0, &mut chosen, i, &mut found, counter)?;
        let all: Vec<BTreeSet<Fact>> = found.into_iter().collect();
        Ok(all
            .iter()
            .filter(|s| !all.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
            .cloned()
            .collect())
    }

    fn choose<'b>(
        &'b self,
        g: usize,
        chosen: &mut Vec<&'b Inference>,
        i: &Instance,
        found: &mut BTreeSet<BTreeSet<Fact>>,
        counter: &mut Counter,
    ) -> Result<()> {
        if g == self.groups.len() {
            counter.tick()?;
            if self.respects_weak(chosen, i) {
                found.insert(chosen.iter().flat_map(|f| f.all.iter().cloned()).collect());
            }
            return Ok(());
        }
        let group = &self.groups[g];
        if group.len() >= 32 {
            return Err(Error::Budget(
                "too many inferences for one source match".into(),
            ));
        }
        // every nonempty subset of the group's extensions
        for mask in 1u64..(1u64 << group.len()) {
            let before = chosen.len();
            chosen.extend(
                group
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, f)| f),
            );
            self.choose(g + 1, chosen, i, found, counter)?;
            chosen.truncate(before);
        }
        Ok(())
    }
}

/// Whether `j` belongs to the inference-based semantics of `i` under the
/// tgds and egds of `p`: some inference strategy infers every fact, extends
/// every source match, never lets a weakly inferred fact complete an
/// unjustified head match, and (I, J) is a model.
pub fn check_inference_solution(
    i: &Instance,
    p: &MappingProgram,
    j: &Instance,
    max_nodes: usize,
) -> Result<bool> {
    if p.is_annotated() {
        return Err(Error::Precondition(
            "the inference check needs tgds and egds".into(),
        ));
    }
    check_inference_with(i, &p.tgds, &p.egds, j, max_nodes)
}

/// Open-world check: (I, J) only has to be a model of the tgds and egds.
pub fn check_owa_solution(i: &Instance, p: &MappingProgram, j: &Instance) -> Result<bool> {
    if p.is_annotated() {
        return Err(Error::Precondition(
            "the open-world check needs tgds and egds".into(),
        ));
    }
    Ok(is_model(i, &p.tgds, &p.egds, j))
}

pub(crate) fn check_inference_with(
    i: &Instance,
    tgds: &[Tgd],
    egds: &[Egd],
    j: &Instance,
    max_nodes: usize,
) -> Result<bool> {
    if !j.is_ground() {
        return Err(Error::Precondition(
            "candidate solution must be ground".into(),
        ));
    }
    if !is_model(i, tgds, egds, j) {
        return Ok(false);
    }
    let mut counter = Counter::new(max_nodes, "inference solution check");
    let mut options = Vec::new();
    for t in tgds {
        let sets = TgdInferences::build(t, i, j).maximal_inferred(i, &mut counter)?;
        if sets.is_empty() {
            return Ok(false);
        }
        options.push(sets);
    }
    // condition 1: pick one strategy per tgd so that together they infer J
    let need: BTreeSet<&Fact> = j.iter().collect();
    let mut memo = BTreeMap::new();
    cover(
        &options,
        0,
        &BTreeSet::new(),
        &need,
        &mut memo,
        &mut counter,
    )
}

fn cover(
    options: &[Vec<BTreeSet<Fact>>],
    k: usize,
    have: &BTreeSet<Fact>,
    need: &BTreeSet<&Fact>,
    memo: &mut BTreeMap<(usize, BTreeSet<Fact>), bool>,
    counter: &mut Counter,
) -> Result<bool> {
    if need.iter().all(|f| have.contains(*f)) {
        return Ok(true);
    }
    if k == options.len() {
        return Ok(false);
    }
    if let Some(&r) = memo.get(&(k, have.clone())) {
        return Ok(r);
    }
    counter.tick()?;
    let mut r = false;
    for s in &options[k] {
        if r {
            break;
        }
        let mut h = have.clone();
        h.extend(s.iter().cloned());
        r = cover(options, k + 1, &h, need, memo, counter)?;
    }
    memo.insert((k, have.clone()), r);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::parse_mapping;

    fn check(p: &str, i: &str, j: &str) -> bool {
        let p = parse_mapping(p).unwrap();
        check_inference_solution(
            &Instance::parse(i).unwrap(),
            &p,
            &Instance::parse(j).unwrap(),
            1_000_000,
        )
        .unwrap()
    }

    const XI: &str = "tgd: R(x,y) -> S(x,z), T(z,y), T(x,y).";

    #[test]
    fn uninferred_fact_rejected() {
        // T(a,a) cannot be inferred by any assignment
        let j = "S(a,a). S(a,c). S(c,a). T(a,a). T(a,b). T(c,b). T(a,d). T(c,d).";
        assert!(!check(XI, "R(a,b). R(c,d).", j));
    }

    #[test]
    fn weak_fact_completing_foreign_match_rejected() {
        // z = a for R(a,b) and z = a for R(c,d) would also make S(a,a), T(a,d)
        // a match of the head for R(a,d)
        assert!(!check(
            XI,
            "R(a,b). R(c,d).",
            "S(a,a). T(a,b). S(c,a). T(a,d). T(c,d)."
        ));
        assert!(check(
            XI,
            "R(a,b). R(c,d).",
            "S(a,n). T(n,b). T(a,b). S(c,m). T(m,d). T(c,d)."
        ));
    }

    #[test]
    fn foreign_matches_respect_blocks_and_positions() {
        // S(n,n) is only an image of S(z,z), never of S(w,w)
        let p = "tgd: P(w) -> S(z,z), S(w,w).";
        assert!(check(p, "P(a).", "S(a,a). S(n,n)."));
        // S(n,n) fills S(z,z) only, so z = x = n is no match
        let p = "tgd: R(x,y) -> S(z,z), S(z,x), S(x,z).";
        assert!(check(p, "R(a,a).", "S(n,n). S(n,a). S(a,n)."));
    }

    #[test]
    fn shared_null_across_triggers_rejected() {
        // one cc for every person would make p1 a member of e3's project
        let p = "tgd: P(p,e) -> PC(p,cc), CE(cc,e).";
        let i = "P(p1,e1). P(p1,e2). P(p2,e3).";
        assert!(!check(
            p,
            i,
            "CE(cc1,e1). CE(cc1,e2). CE(cc1,e3). PC(p1,cc1). PC(p2,cc1)."
        ));
        assert!(check(
            p,
            i,
            "CE(cc1,e1). CE(cc1,e2). CE(cc2,e3). PC(p1,cc1). PC(p2,cc2)."
        ));
    }

    #[test]
    fn every_source_match_needs_an_image() {
        assert!(!check(XI, "R(a,b). R(c,d).", "S(a,n). T(n,b). T(a,b)."));
    }

    #[test]
    fn egds_checked() {
        let p = "tgd: R(x) -> S(x,z).\negd: S(x,y), S(x,w) -> y = w.";
        assert!(check(p, "R(a).", "S(a,b)."));
        assert!(!check(p, "R(a).", "S(a,b). S(a,c)."));
    }

    #[test]
    fn full_tgds_have_one_solution() {
        let p = "tgd: R(x,y) -> S(y,x).";
        assert!(check(p, "R(a,b).", "S(b,a)."));
        assert!(!check(p, "R(a,b).", "S(b,a). S(a,a)."));
    }
}
