use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::inference::{check_inference_with, egd_holds, is_model};
use super::{bounded_domain, check_abd_solution, Counter, DomainBudget};
use crate::chase::{annotated_chase, ChaseOutcome};
use crate::error::{Error, Result};
use crate::hom::{apply_fact, exists_hom, for_each_hom, Subst};
use crate::instance::Instance;
use crate::labeling::TupleLabeling;
use crate::mapping::{annotation_density, Egd, MappingProgram, Tgd};
use crate::query::eval::tuples;
use crate::term::{Fact, Term};

/// Candidate target instances are unions of ground head images: for every
/// source match of a rule, the head with its existential variables valued
/// over the bounded domain. Every solution under each semantics is such a
/// union (up to the bound), so the search is complete within the budget.
pub(crate) struct ImageSpace {
    /// Per source match, the images that satisfy it.
    obligations: Vec<Vec<BTreeSet<Fact>>>,
    /// Increments tried when growing a candidate.
    units: Vec<BTreeSet<Fact>>,
}

fn head_images(
    body: &[Fact],
    head: &[Fact],
    i: &Instance,
    dom: &[Term],
) -> Vec<Vec<BTreeSet<Fact>>> {
    let body_vars: BTreeSet<&Term> = body.iter().flat_map(|f| f.args.iter()).collect();
    let ex: Vec<Term> = head
        .iter()
        .flat_map(|f| f.args.iter())
        .filter(|t| t.is_var() && !body_vars.contains(t))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vals = tuples(dom, ex.len());
    let mut out = Vec::new();
    for_each_hom(body, i, &Subst::new(), &Term::is_var, &mut |h| {
        let mut imgs = Vec::new();
        for v in &vals {
            let mut s = h.clone();
            s.extend(ex.iter().cloned().zip(v.iter().cloned()));
            imgs.push(head.iter().map(|a| apply_fact(&s, a)).collect());
        }
        out.push(imgs);
        true
    });
    out
}

impl ImageSpace {
    pub(crate) fn new(
        rules: &[(Vec<Fact>, Vec<Fact>)],
        i: &Instance,
        dom: &[Term],
        singletons: bool,
    ) -> ImageSpace {
        let mut obligations = Vec::new();
        for (b, h) in rules {
            obligations.extend(head_images(b, h, i, dom));
        }
        obligations.sort_by_key(Vec::len);
        let mut units: BTreeSet<BTreeSet<Fact>> = obligations.iter().flatten().cloned().collect();
        if singletons {
            units = units.iter().flatten().map(|f| [f.clone()].into()).collect();
        }
        ImageSpace {
            obligations,
            units: units.into_iter().collect(),
        }
    }

    /// Calls `visit` on every reachable candidate with at most `max_size`
    /// facts that `prune` accepts. `prune` must be monotone: once it rejects
    /// an instance it rejects every superset. `visit` returns false to stop.
    pub(crate) fn search(
        &self,
        max_size: usize,
        counter: &mut Counter,
        prune: &dyn Fn(&Instance) -> bool,
        visit: &mut dyn FnMut(&Instance) -> Result<bool>,
    ) -> Result<()> {
        let mut seen = HashSet::new();
        let mut st = State {
            max_size,
            counter,
            prune,
            visit,
            seen: &mut seen,
            stop: false,
        };
        self.cover(0, &Instance::new(), &mut st)
    }

    fn cover(&self, k: usize, j: &Instance, st: &mut State) -> Result<()> {
        if st.stop {
            return Ok(());
        }
        st.counter.tick()?;
        let Some(opts) = self.obligations.get(k) else {
            return self.grow(j, st);
        };
        if opts.iter().any(|img| img.iter().all(|f| j.contains(f))) {
            return self.cover(k + 1, j, st);
        }
        for img in opts {
            let mut j2 = j.clone();
            j2.extend(img.iter().cloned());
            if j2.len() <= st.max_size && !(st.prune)(&j2) {
                self.cover(k + 1, &j2, st)?;
            }
            if st.stop {
                break;
            }
        }
        Ok(())
    }

    fn grow(&self, j: &Instance, st: &mut State) -> Result<()> {
        if st.stop || !st.seen.insert(j.clone()) {
            return Ok(());
        }
        st.counter.tick()?;
        if !(st.visit)(j)? {
            st.stop = true;
            return Ok(());
        }
        for u in &self.units {
            if u.iter().all(|f| j.contains(f)) {
                continue;
            }
            let mut j2 = j.clone();
            j2.extend(u.iter().cloned());
            if j2.len() <= st.max_size && !(st.prune)(&j2) {
                self.grow(&j2, st)?;
            }
            if st.stop {
                break;
            }
        }
        Ok(())
    }
}

struct State<'a> {
    max_size: usize,
    counter: &'a mut Counter,
    prune: &'a dyn Fn(&Instance) -> bool,
    visit: &'a mut dyn FnMut(&Instance) -> Result<bool>,
    seen: &'a mut HashSet<Instance>,
    stop: bool,
}

/// The abds read as rules over plain target relations.
fn abd_rules(p: &MappingProgram) -> Vec<(Vec<Fact>, Vec<Fact>)> {
    p.abds
        .iter()
        .map(|a| (a.body.clone(), a.head_facts()))
        .collect()
}

fn tgd_rules(tgds: &[Tgd]) -> Vec<(Vec<Fact>, Vec<Fact>)> {
    tgds.iter()
        .map(|t| (t.body.clone(), t.head.clone()))
        .collect()
}

/// Violations that no larger candidate can repair: head matches with no
/// source match and aegd violations, restricted to relations that carry a
/// single annotation, so the labeling of their facts is forced.
fn abd_prune(i: &Instance, p: &MappingProgram) -> impl Fn(&Instance) -> bool {
    let single = |rel: &str| p.annotations(rel).len() == 1;
    let backward: Vec<(Vec<Fact>, Vec<Fact>, BTreeSet<Term>)> = p
        .abds
        .iter()
        .filter(|a| a.head.iter().all(|h| single(&h.rel)))
        .map(|a| (a.head_facts(), a.body.clone(), a.frontier()))
        .collect();
    let egds: Vec<Egd> = p
        .plain_egds()
        .into_iter()
        .filter(|e| e.body.iter().all(|f| single(&f.rel)))
        .collect();
    let i = i.clone();
    move |j: &Instance| {
        egds.iter().any(|e| !egd_holds(e, j))
            || backward.iter().any(|(head, body, frontier)| {
                !for_each_hom(head, j, &Subst::new(), &Term::is_var, &mut |g| {
                    let init: Subst = g
                        .iter()
                        .filter(|(k, _)| frontier.contains(*k))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    exists_hom(body, &i, &init, &Term::is_var)
                })
            })
    }
}

/// Tgds and egds a program stands for under the non-annotated semantics.
pub(crate) fn plain_dependencies(p: &MappingProgram) -> (Vec<Tgd>, Vec<Egd>) {
    (p.forward_tgds(), p.plain_egds())
}

fn require_annotated(p: &MappingProgram) -> Result<()> {
    if !p.is_annotated() && !p.tgds.is_empty() {
        return Err(Error::Precondition(
            "ABD semantics needs an abd program".into(),
        ));
    }
    Ok(())
}

/// Searches ABD solutions, pruned additionally by `extra` (monotone).
pub(crate) fn abd_search(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
    extra: &dyn Fn(&Instance) -> bool,
    visit: &mut dyn FnMut(&Instance, TupleLabeling) -> bool,
) -> Result<()> {
    require_annotated(p)?;
    let dom = bounded_domain(i, p, budget.extra_constants);
    let space = ImageSpace::new(&abd_rules(p), i, &dom, false);
    let base = abd_prune(i, p);
    let mut counter = Counter::new(budget.max_nodes, "ABD solution enumeration");
    space.search(
        budget.max_size,
        &mut counter,
        &|j| base(j) || extra(j),
        &mut |j| {
            Ok(match check_abd_solution(i, p, j, budget.max_nodes)? {
                Some(l) => visit(j, l),
                None => true,
            })
        },
    )
}

/// Searches inference-based solutions, pruned additionally by `extra`.
pub(crate) fn inference_search(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
    extra: &dyn Fn(&Instance) -> bool,
    visit: &mut dyn FnMut(&Instance) -> bool,
) -> Result<()> {
    let (tgds, egds) = plain_dependencies(p);
    let dom = bounded_domain(i, p, budget.extra_constants);
    let space = ImageSpace::new(&tgd_rules(&tgds), i, &dom, false);
    let mut counter = Counter::new(budget.max_nodes, "inference solution enumeration");
    let prune = |j: &Instance| egds.iter().any(|e| !egd_holds(e, j)) || extra(j);
    space.search(budget.max_size, &mut counter, &prune, &mut |j| {
        Ok(
            if check_inference_with(i, &tgds, &egds, j, budget.max_nodes)? {
                visit(j)
            } else {
                true
            },
        )
    })
}

/// Searches open-world solutions built from facts of head images.
pub(crate) fn owa_search(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
    extra: &dyn Fn(&Instance) -> bool,
    visit: &mut dyn FnMut(&Instance) -> bool,
) -> Result<()> {
    let (tgds, egds) = plain_dependencies(p);
    let dom = bounded_domain(i, p, budget.extra_constants);
    let space = ImageSpace::new(&tgd_rules(&tgds), i, &dom, true);
    let mut counter = Counter::new(budget.max_nodes, "open-world solution enumeration");
    let prune = |j: &Instance| egds.iter().any(|e| !egd_holds(e, j)) || extra(j);
    space.search(budget.max_size, &mut counter, &prune, &mut |j| {
        Ok(if is_model(i, &tgds, &egds, j) {
            visit(j)
        } else {
            true
        })
    })
}

/// Every candidate the searches consider: unions of head images that cover
/// each source match, within the budget. Annotations are ignored.
pub fn candidate_instances(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<BTreeSet<Instance>> {
    let (tgds, _) = plain_dependencies(p);
    let dom = bounded_domain(i, p, budget.extra_constants);
    let space = ImageSpace::new(&tgd_rules(&tgds), i, &dom, false);
    let mut counter = Counter::new(budget.max_nodes, "candidate enumeration");
    let mut out = BTreeSet::new();
    space.search(budget.max_size, &mut counter, &|_| false, &mut |j| {
        out.insert(j.clone());
        Ok(true)
    })?;
    Ok(out)
}

/// All ground ABD solutions within the budget, each with a witness labeling.
pub fn enumerate_abd_solutions(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<BTreeMap<Instance, TupleLabeling>> {
    let mut out = BTreeMap::new();
    abd_search(i, p, budget, &|_| false, &mut |j, l| {
        out.insert(j.clone(), l);
        true
    })?;
    Ok(out)
}

/// All ground inference-based solutions within the budget. Abd programs
/// are read with their annotations dropped.
pub fn enumerate_inference_solutions(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<BTreeSet<Instance>> {
    let mut out = BTreeSet::new();
    inference_search(i, p, budget, &|_| false, &mut |j| {
        out.insert(j.clone());
        true
    })?;
    Ok(out)
}

/// Open-world solutions within the budget whose facts all come from head
/// images. Arbitrary extra facts are left out.
pub fn owa_solutions(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<BTreeSet<Instance>> {
    let mut out = BTreeSet::new();
    owa_search(i, p, budget, &|_| false, &mut |j| {
        out.insert(j.clone());
        true
    })?;
    Ok(out)
}

/// GCWA* solutions: unions of subset-minimal solutions that are still
/// solutions.
pub fn gcwa_star_solutions(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<BTreeSet<Instance>> {
    let (tgds, egds) = plain_dependencies(p);
    let dom = bounded_domain(i, p, budget.extra_constants);
    let space = ImageSpace::new(&tgd_rules(&tgds), i, &dom, false);
    let mut counter = Counter::new(budget.max_nodes, "GCWA* enumeration");
    let mut minimal = BTreeSet::new();
    let prune = |j: &Instance| egds.iter().any(|e| !egd_holds(e, j));
    space.search(budget.max_size, &mut counter, &prune, &mut |j| {
        let is_min = is_model(i, &tgds, &egds, j)
            && j.iter().all(|f| {
                let mut smaller = j.clone();
                smaller.remove(f);
                !is_model(i, &tgds, &egds, &smaller)
            });
        if is_min {
            minimal.insert(j.clone());
        }
        Ok(true)
    })?;
    let minimal: Vec<Instance> = minimal.into_iter().collect();
    if minimal.len() > 20 {
        return Err(Error::Budget(format!(
            "{} minimal solutions are too many to combine",
            minimal.len()
        )));
    }
    let mut out = BTreeSet::new();
    for mask in 1u32..(1u32 << minimal.len()) {
        counter.tick()?;
        let mut u = Instance::new();
        for (k, m) in minimal.iter().enumerate() {
            if mask >> k & 1 == 1 {
                u.extend(m.iter().cloned());
            }
        }
        if u.len() <= budget.max_size && egds.iter().all(|e| egd_holds(e, &u)) {
            out.insert(u);
        }
    }
    Ok(out)
}

/// Outcome of a solution-existence test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistsVerdict {
    pub exists: bool,
    /// False when a negative answer only covers the bounded domain.
    pub authoritative: bool,
    pub witness: Option<Instance>,
}

/// Whether `i` has an ABD solution. Density-one programs are decided by the
/// chase; otherwise the bounded search looks for a witness.
pub fn exists_solution_general(
    i: &Instance,
    p: &MappingProgram,
    budget: &DomainBudget,
) -> Result<ExistsVerdict> {
    require_annotated(p)?;
    if annotation_density(p).overall <= 1 {
        let exists = matches!(annotated_chase(i, p)?, ChaseOutcome::Success(_));
        return Ok(ExistsVerdict {
            exists,
            authoritative: true,
            witness: None,
        });
    }
    let mut witness = None;
    abd_search(i, p, budget, &|_| false, &mut |j, _| {
        witness = Some(j.clone());
        false
    })?;
    Ok(ExistsVerdict {
        exists: witness.is_some(),
        authoritative: witness.is_some(),
        witness,
    })
}
