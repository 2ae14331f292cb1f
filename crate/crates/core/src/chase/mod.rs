//! The annotated chase (forward, egd and backward steps) and the plain
//! oblivious chase used for open-world comparisons.

mod owa;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::condition::{Diseq, GlobalCondition};
use crate::error::{Error, Result};
use crate::hom::{apply_fact, apply_term, exists_hom, find_homomorphisms, for_each_hom, Subst};
use crate::instance::Instance;
use crate::labeling::TupleLabeling;
use crate::mapping::{annotation_density, diamond_rel, Abd, MappingProgram};
use crate::term::{Fact, Term};

pub use owa::owa_chase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Forward,
    Egd,
    Backward,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Forward => "forward",
            Phase::Egd => "egd",
            Phase::Backward => "backward",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseFailure {
    pub phase: Phase,
    pub witness: String,
}

impl fmt::Display for ChaseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chase failed in the {} step: {}",
            self.phase, self.witness
        )
    }
}

/// The pair (T, φ*) with the labeling that produced it. `authoritative` is
/// false when the program has density above 1, where rep(T, φ*) need not
/// coincide with the solution set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representative {
    pub table: Instance,
    pub condition: GlobalCondition,
    pub labels: TupleLabeling,
    pub authoritative: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChaseOutcome {
    Success(Representative),
    Failure(ChaseFailure),
}

impl ChaseOutcome {
    pub fn representative(&self) -> Option<&Representative> {
        match self {
            ChaseOutcome::Success(r) => Some(r),
            ChaseOutcome::Failure(_) => None,
        }
    }
}

/// Intermediate tables, with null ids as created.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChaseTrace {
    pub forward: TupleLabeling,
    pub egd: Option<TupleLabeling>,
}

#[derive(Default)]
struct NullGen {
    open: u32,
    closed: u32,
}

impl NullGen {
    fn open(&mut self) -> Term {
        self.open += 1;
        Term::Open(self.open)
    }
    fn closed(&mut self) -> Term {
        self.closed += 1;
        Term::Closed(self.closed)
    }
}

fn check_annotated(p: &MappingProgram) -> Result<()> {
    if !p.tgds.is_empty() || !p.egds.is_empty() {
        return Err(Error::Precondition(
            "the annotated chase needs abds and aegds".into(),
        ));
    }
    Ok(())
}

/// Fires every abd on every body match in `i`, in program order and then in
/// match order, with one fresh open null per head-only variable.
pub fn forward_chase(i: &Instance, p: &MappingProgram) -> Result<TupleLabeling> {
    check_annotated(p)?;
    Ok(forward(i, p, &mut NullGen::default()))
}

fn forward(i: &Instance, p: &MappingProgram, gen: &mut NullGen) -> TupleLabeling {
    let mut out = TupleLabeling::new();
    for abd in &p.abds {
        let z = abd.head_only();
        for h in find_homomorphisms(&abd.body, i, &BTreeSet::new()) {
            let mut h = h;
            for v in &z {
                let n = gen.open();
                h.insert(v.clone(), n);
            }
            for a in &abd.head {
                out.add(apply_fact(&h, &a.fact()), a.ann.unwrap_or(0));
            }
        }
    }
    out
}

/// Applies the aegds to a fixpoint, matching annotated atoms against the
/// labels. A null equated with a constant becomes the constant; two nulls
/// become one fresh closed null.
pub fn egd_chase(
    t: &TupleLabeling,
    p: &MappingProgram,
) -> Result<std::result::Result<TupleLabeling, ChaseFailure>> {
    check_annotated(p)?;
    let mut gen = NullGen {
        open: 0,
        closed: max_closed(t),
    };
    Ok(egd_step(t.clone(), p, &mut gen))
}

fn max_closed(t: &TupleLabeling) -> u32 {
    t.table()
        .nulls()
        .iter()
        .filter_map(|n| match n {
            Term::Closed(k) => Some(*k),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn egd_step(
    mut t: TupleLabeling,
    p: &MappingProgram,
    gen: &mut NullGen,
) -> std::result::Result<TupleLabeling, ChaseFailure> {
    let egds = p.diamond_egds();
    loop {
        let d = t.diamond();
        let mut step = None;
        for (n, e) in egds.iter().enumerate() {
            for_each_hom(&e.body, &d, &Subst::new(), &Term::is_var, &mut |s| {
                let (a, b) = (apply_term(s, &e.left), apply_term(s, &e.right));
                if a != b {
                    step = Some((n, a, b));
                    return false;
                }
                true
            });
            if step.is_some() {
                break;
            }
        }
        let Some((n, a, b)) = step else {
            return Ok(t);
        };
        let mut s = Subst::new();
        match (a.is_const(), b.is_const()) {
            (true, true) => {
                return Err(ChaseFailure {
                    phase: Phase::Egd,
                    witness: format!("{} equates constants {a} and {b}", p.aegds[n]),
                })
            }
            (true, false) => {
                s.insert(b, a);
            }
            (false, true) => {
                s.insert(a, b);
            }
            (false, false) => {
                let c = gen.closed();
                s.insert(a, c.clone());
                s.insert(b, c);
            }
        }
        t = t.substitute(&s);
    }
}

/// Chases the abds right to left over the labeled table and collects the
/// disequality clauses that keep backward triggers from producing source
/// facts outside `i`.
pub fn backward_chase(
    t: &TupleLabeling,
    i: &Instance,
    p: &MappingProgram,
) -> Result<std::result::Result<GlobalCondition, ChaseFailure>> {
    check_annotated(p)?;
    Ok(backward(t, i, p))
}

fn backward(
    t: &TupleLabeling,
    i: &Instance,
    p: &MappingProgram,
) -> std::result::Result<GlobalCondition, ChaseFailure> {
    let d = t.diamond();
    let mut cond = GlobalCondition::new();
    for abd in &p.abds {
        let per_atom: Vec<Vec<Subst>> = abd
            .head
            .iter()
            .map(|a| {
                let pat = [Fact {
                    rel: diamond_rel(&a.rel, a.ann.unwrap_or(0)),
                    args: a.args.clone(),
                }];
                find_homomorphisms(&pat, &d, &BTreeSet::new())
            })
            .collect();
        if per_atom.iter().any(Vec::is_empty) {
            continue;
        }
        let mut chosen: Vec<&Subst> = Vec::new();
        backward_triggers(abd, &per_atom, &mut chosen, i, &mut cond)?;
    }
    Ok(cond)
}

fn compatible(chosen: &[&Subst], next: &Subst) -> bool {
    next.iter().all(|(v, val)| {
        chosen.iter().all(|h| match h.get(v) {
            Some(w) => w == val || w.is_null() || val.is_null(),
            None => true,
        })
    })
}

fn backward_triggers<'a>(
    abd: &Abd,
    per_atom: &'a [Vec<Subst>],
    chosen: &mut Vec<&'a Subst>,
    i: &Instance,
    cond: &mut GlobalCondition,
) -> std::result::Result<(), ChaseFailure> {
    let k = chosen.len();
    if k == per_atom.len() {
        return fire_backward(abd, chosen, i, cond);
    }
    for h in &per_atom[k] {
        if compatible(chosen, h) {
            chosen.push(h);
            backward_triggers(abd, per_atom, chosen, i, cond)?;
            chosen.pop();
        }
    }
    Ok(())
}

fn fire_backward(
    abd: &Abd,
    hs: &[&Subst],
    i: &Instance,
    cond: &mut GlobalCondition,
) -> std::result::Result<(), ChaseFailure> {
    let mut values: BTreeMap<&Term, Vec<&Term>> = BTreeMap::new();
    for h in hs {
        for (v, val) in h.iter() {
            values.entry(v).or_default().push(val);
        }
    }
    let mut hh = Subst::new();
    for (v, vals) in &values {
        let pick = if vals.iter().all(|x| x == &vals[0]) {
            vals[0]
        } else {
            vals.iter()
                .find(|x| x.is_const())
                .copied()
                .unwrap_or(vals[0])
        };
        hh.insert((*v).clone(), pick.clone());
    }
    let produced: Vec<Fact> = abd.body.iter().map(|f| apply_fact(&hh, f)).collect();
    let free = |t: &Term| t.is_var() || t.is_null();
    if exists_hom(&produced, i, &Subst::new(), &free) {
        return Ok(());
    }
    let mut clause = Vec::new();
    for vals in values.values() {
        for a in 0..vals.len() {
            for b in a + 1..vals.len() {
                let d = Diseq::new(vals[a].clone(), vals[b].clone());
                if !d.is_reflexive() {
                    clause.push(d);
                }
            }
        }
    }
    if clause.is_empty() {
        let facts: Vec<String> = abd
            .head
            .iter()
            .zip(hs)
            .map(|(a, h)| format!("{}@{}", apply_fact(h, &a.fact()), a.ann.unwrap_or(0)))
            .collect();
        let made: Vec<String> = produced.iter().map(|f| f.to_string()).collect();
        return Err(ChaseFailure {
            phase: Phase::Backward,
            witness: format!(
                "{{{}}} forces {} which is not in the source",
                facts.join(", "),
                made.join(", ")
            ),
        });
    }
    cond.add(clause);
    Ok(())
}

/// Renumbers open and closed nulls as 1, 2, ... in order of their ids.
pub fn compact_nulls(
    t: &TupleLabeling,
    cond: &GlobalCondition,
) -> (TupleLabeling, GlobalCondition) {
    let mut nulls: BTreeSet<Term> = t.table().nulls();
    nulls.extend(cond.terms().into_iter().filter(Term::is_null));
    let (mut o, mut c) = (0, 0);
    let mut m: BTreeMap<Term, Term> = BTreeMap::new();
    for n in nulls {
        let to = match n {
            Term::Open(_) => {
                o += 1;
                Term::Open(o)
            }
            _ => {
                c += 1;
                Term::Closed(c)
            }
        };
        m.insert(n, to);
    }
    let f = |x: &Term| m.get(x).cloned().unwrap_or_else(|| x.clone());
    (t.map_terms(f), cond.map_terms(f))
}

/// Runs the three steps and returns the representative or the failure.
pub fn annotated_chase(i: &Instance, p: &MappingProgram) -> Result<ChaseOutcome> {
    annotated_chase_traced(i, p).map(|(o, _)| o)
}

pub fn annotated_chase_traced(
    i: &Instance,
    p: &MappingProgram,
) -> Result<(ChaseOutcome, ChaseTrace)> {
    check_annotated(p)?;
    let mut gen = NullGen::default();
    let t1 = forward(i, p, &mut gen);
    let mut trace = ChaseTrace {
        forward: t1.clone(),
        egd: None,
    };
    let t2 = match egd_step(t1, p, &mut gen) {
        Ok(t) => t,
        Err(f) => return Ok((ChaseOutcome::Failure(f), trace)),
    };
    trace.egd = Some(t2.clone());
    let cond = match backward(&t2, i, p) {
        Ok(c) => c,
        Err(f) => return Ok((ChaseOutcome::Failure(f), trace)),
    };
    let (labels, condition) = compact_nulls(&t2, &cond);
    let rep = Representative {
        table: labels.table(),
        condition,
        labels,
        authoritative: annotation_density(p).overall <= 1,
    };
    Ok((ChaseOutcome::Success(rep), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::isomorphic;
    use crate::mapping::parse_mapping;

    fn facts(s: &str) -> Instance {
        Instance::parse(s).unwrap()
    }

    #[test]
    fn employee_project_representative() {
        let p = parse_mapping(
            "abd: S(x,y) <-> K@1(x,z), V@1(z,y).
             abd: R(x) <-> U@1(x,y).
             aegd: U@1(x,y), K@1(x,z) -> y = z.",
        )
        .unwrap();
        let i = facts("S(a,b). S(c,d). R(a).");
        let ChaseOutcome::Success(r) = annotated_chase(&i, &p).unwrap() else {
            panic!()
        };
        let want = facts("K(a,?c1). K(c,?o1). V(?c1,b). V(?o1,d). U(a,?c1).");
        assert_eq!(r.table, want);
        assert_eq!(r.condition, GlobalCondition::parse("?c1 != ?o1").unwrap());
    }

    #[test]
    fn appendix_example_fails_backward() {
        let p = parse_mapping(
            "abd: R(x,y) <-> S@1(x,z), S@2(y,z), V@1(x,z).
             aegd: V@1(x,z1), S@2(x,z2) -> z1 = z2.",
        )
        .unwrap();
        let i = facts("R(a,b). R(c,a).");
        let (out, trace) = annotated_chase_traced(&i, &p).unwrap();
        let t1: TupleLabeling = [
            (Fact::new("S", vec![Term::constant("a"), Term::Open(1)]), 1),
            (Fact::new("S", vec![Term::constant("c"), Term::Open(2)]), 1),
            (Fact::new("S", vec![Term::constant("b"), Term::Open(1)]), 2),
            (Fact::new("S", vec![Term::constant("a"), Term::Open(2)]), 2),
            (Fact::new("V", vec![Term::constant("a"), Term::Open(1)]), 1),
            (Fact::new("V", vec![Term::constant("c"), Term::Open(2)]), 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(trace.forward, t1);
        let t2 = trace.egd.unwrap();
        assert_eq!(
            t2.table(),
            facts("S(a,?c1). S(c,?c1). S(b,?c1). V(a,?c1). V(c,?c1).")
        );
        assert_eq!(
            t2.get(&Fact::new("S", vec![Term::constant("a"), Term::Closed(1)]))
                .unwrap()
                .len(),
            2
        );
        assert!(matches!(
            out,
            ChaseOutcome::Failure(ChaseFailure {
                phase: Phase::Backward,
                ..
            })
        ));
    }

    #[test]
    fn appendix_example_without_aegd() {
        let p = parse_mapping("abd: R(x,y) <-> S@1(x,z), S@2(y,z), V@1(x,z).").unwrap();
        let ChaseOutcome::Success(r) = annotated_chase(&facts("R(a,b). R(c,a)."), &p).unwrap()
        else {
            panic!()
        };
        assert_eq!(r.condition, GlobalCondition::parse("?o1 != ?o2").unwrap());
    }

    #[test]
    fn cross_product_fails() {
        let p = parse_mapping("abd: R(x,y) <-> T@1(x), S@1(y).").unwrap();
        let out = annotated_chase(&facts("R(a,b). R(c,d)."), &p).unwrap();
        assert!(matches!(
            out,
            ChaseOutcome::Failure(ChaseFailure {
                phase: Phase::Backward,
                ..
            })
        ));
    }

    #[test]
    fn constant_clash() {
        let p =
            parse_mapping("abd: A(x,y) <-> S@1(x,y).\naegd: S@1(x,y), S@1(x,z) -> y = z.").unwrap();
        let out = annotated_chase(&facts("A(a,b). A(a,c)."), &p).unwrap();
        assert!(matches!(
            out,
            ChaseOutcome::Failure(ChaseFailure {
                phase: Phase::Egd,
                ..
            })
        ));
    }

    #[test]
    fn empty_source() {
        let p = parse_mapping("abd: R(x) <-> S@1(x,z).").unwrap();
        let ChaseOutcome::Success(r) = annotated_chase(&Instance::new(), &p).unwrap() else {
            panic!()
        };
        assert!(r.table.is_empty() && r.condition.is_trivial());
    }

    #[test]
    fn program_order_does_not_matter() {
        let a = "abd: S(x,y) <-> K@1(x,z), V@1(z,y).";
        let b = "abd: R(x) <-> U@1(x,y).";
        let e = "aegd: U@1(x,y), K@1(x,z) -> y = z.";
        let i = facts("S(a,b). S(c,d). R(a). R(c).");
        let one = annotated_chase(&i, &parse_mapping(&format!("{a}\n{b}\n{e}")).unwrap()).unwrap();
        let two = annotated_chase(&i, &parse_mapping(&format!("{b}\n{a}\n{e}")).unwrap()).unwrap();
        let (r1, r2) = (one.representative().unwrap(), two.representative().unwrap());
        assert!(isomorphic(&r1.table, &r2.table));
        assert_eq!(r1.condition.len(), r2.condition.len());
    }
}
