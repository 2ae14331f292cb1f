use std::collections::{BTreeSet, HashMap, HashSet};

use super::Counter;
use crate::error::{Error, Result};
use crate::hom::{apply_fact, find_homomorphisms, for_each_hom, Subst};
use crate::instance::Instance;
use crate::labeling::TupleLabeling;
use crate::mapping::{diamond_rel, MappingProgram};
use crate::term::{Fact, Term};

/// A source match of an abd body together with the ways its head can be
/// completed inside the candidate (as sets of label variables).
struct Obligation {
    body: Vec<usize>,
    exts: Vec<Vec<usize>>,
}

/// A complete head match inside the candidate, with the source matches that
/// justify it backwards.
struct HeadMatch {
    vars: Vec<usize>,
    bodies: Vec<Vec<usize>>,
}

/// The candidate J compiled into label variables: variable k says that
/// fact `vars[k].0` of J carries annotation `vars[k].1`.
struct Problem {
    i_len: usize,
    j: Vec<Fact>,
    vars: Vec<(usize, u32)>,
    fact_vars: Vec<Vec<usize>>,
    obligations: Vec<Obligation>,
    heads: Vec<HeadMatch>,
    /// Label sets that may not be all present (aegd violations).
    conflicts: Vec<Vec<usize>>,
    support: Vec<Vec<(usize, usize)>>,
}

const UNSET: u8 = 0;
const ON: u8 = 1;
const OFF: u8 = 2;

fn sorted(v: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let s: BTreeSet<usize> = v.into_iter().collect();
    s.into_iter().collect()
}

fn subset(a: &[usize], b: &BTreeSet<usize>) -> bool {
    a.iter().all(|x| b.contains(x))
}

impl Problem {
    fn build(i: &Instance, p: &MappingProgram, j: &Instance) -> Problem {
        let i_facts: Vec<Fact> = i.iter().cloned().collect();
        let i_idx: HashMap<&Fact, usize> =
            i_facts.iter().enumerate().map(|(k, f)| (f, k)).collect();
        let j_facts: Vec<Fact> = j.iter().cloned().collect();
        let mut vars = Vec::new();
        let mut fact_vars = vec![Vec::new(); j_facts.len()];
        let mut var_of: HashMap<Fact, usize> = HashMap::new();
        let mut diamond = Instance::new();
        for (k, f) in j_facts.iter().enumerate() {
            for a in p.annotations(&f.rel) {
                let d = Fact {
                    rel: diamond_rel(&f.rel, a),
                    args: f.args.clone(),
                };
                var_of.insert(d.clone(), vars.len());
                fact_vars[k].push(vars.len());
                vars.push((k, a));
                diamond.insert(d);
            }
        }
        let vars_of =
            |s: &Subst, atoms: &[Fact]| sorted(atoms.iter().map(|a| var_of[&apply_fact(s, a)]));
        let body_of =
            |s: &Subst, atoms: &[Fact]| sorted(atoms.iter().map(|a| i_idx[&apply_fact(s, a)]));

        let mut obligations = Vec::new();
        let mut heads = Vec::new();
        for r in p.diamond_rules() {
            let body_vars: BTreeSet<Term> = r
                .source
                .iter()
                .flat_map(|f| f.args.iter())
                .filter(|t| t.is_var())
                .cloned()
                .collect();
            for h in find_homomorphisms(&r.source, i, &BTreeSet::new()) {
                let init: Subst = h.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                let mut exts = BTreeSet::new();
                for_each_hom(&r.target, &diamond, &init, &Term::is_var, &mut |e| {
                    exts.insert(vars_of(e, &r.target));
                    true
                });
                obligations.push(Obligation {
                    body: body_of(&h, &r.source),
                    exts: exts.into_iter().collect(),
                });
            }
            for e in find_homomorphisms(&r.target, &diamond, &BTreeSet::new()) {
                let init: Subst = e
                    .iter()
                    .filter(|(k, _)| body_vars.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let mut bodies = BTreeSet::new();
                for_each_hom(&r.source, i, &init, &Term::is_var, &mut |b| {
                    bodies.insert(body_of(b, &r.source));
                    true
                });
                heads.push(HeadMatch {
                    vars: vars_of(&e, &r.target),
                    bodies: bodies.into_iter().collect(),
                });
            }
        }
        let mut conflicts = Vec::new();
        for e in p.diamond_egds() {
            for_each_hom(&e.body, &diamond, &Subst::new(), &Term::is_var, &mut |s| {
                if crate::hom::apply_term(s, &e.left) != crate::hom::apply_term(s, &e.right) {
                    conflicts.push(vars_of(s, &e.body));
                }
                true
            });
        }
        for h in heads.iter().filter(|h| h.bodies.is_empty()) {
            conflicts.push(h.vars.clone());
        }
        let mut support = vec![Vec::new(); vars.len()];
        for (o, ob) in obligations.iter().enumerate() {
            for (k, e) in ob.exts.iter().enumerate() {
                for &v in e {
                    support[v].push((o, k));
                }
            }
        }
        Problem {
            i_len: i_facts.len(),
            j: j_facts,
            vars,
            fact_vars,
            obligations,
            heads,
            conflicts,
            support,
        }
    }

    fn set_all(a: &mut [u8], vs: &[usize]) -> bool {
        let mut changed = false;
        for &v in vs {
            if a[v] == UNSET {
                a[v] = ON;
                changed = true;
            }
        }
        changed
    }

    /// Unit propagation. Returns false on a conflict.
    fn propagate(&self, a: &mut [u8]) -> bool {
        loop {
            let mut changed = false;
            for c in &self.conflicts {
                let unset: Vec<usize> = c.iter().copied().filter(|&v| a[v] == UNSET).collect();
                let off = c.iter().any(|&v| a[v] == OFF);
                if off {
                    continue;
                }
                match unset.len() {
                    0 => return false,
                    1 => {
                        a[unset[0]] = OFF;
                        changed = true;
                    }
                    _ => {}
                }
            }
            for fv in &self.fact_vars {
                if fv.iter().any(|&v| a[v] == ON) {
                    continue;
                }
                let unset: Vec<usize> = fv.iter().copied().filter(|&v| a[v] == UNSET).collect();
                match unset.len() {
                    0 => return false,
                    1 => {
                        a[unset[0]] = ON;
                        changed = true;
                    }
                    _ => {}
                }
            }
            for ob in &self.obligations {
                let viable: Vec<&Vec<usize>> = ob
                    .exts
                    .iter()
                    .filter(|e| e.iter().all(|&v| a[v] != OFF))
                    .collect();
                match viable.len() {
                    0 => return false,
                    1 => changed |= Self::set_all(a, viable[0]),
                    _ => {}
                }
            }
            for v in 0..self.vars.len() {
                if a[v] != ON {
                    continue;
                }
                let viable: Vec<&Vec<usize>> = self.support[v]
                    .iter()
                    .map(|&(o, k)| &self.obligations[o].exts[k])
                    .filter(|e| e.iter().all(|&w| a[w] != OFF))
                    .collect();
                match viable.len() {
                    0 => return false,
                    1 => changed |= Self::set_all(a, viable[0]),
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// The pending disjunctive requirement with the fewest options, as the
    /// label sets that would satisfy it.
    fn pending(&self, a: &[u8]) -> Option<Vec<Vec<usize>>> {
        let mut best: Option<Vec<Vec<usize>>> = None;
        let mut consider = |opts: Vec<Vec<usize>>| {
            if best.as_ref().is_none_or(|b| opts.len() < b.len()) {
                best = Some(opts);
            }
        };
        let done = |e: &Vec<usize>| e.iter().all(|&v| a[v] == ON);
        let viable = |e: &&Vec<usize>| e.iter().all(|&v| a[v] != OFF);
        for ob in &self.obligations {
            if !ob.exts.iter().any(done) {
                consider(ob.exts.iter().filter(viable).cloned().collect());
            }
        }
        for v in (0..self.vars.len()).filter(|&v| a[v] == ON) {
            let exts: Vec<&Vec<usize>> = self.support[v]
                .iter()
                .map(|&(o, k)| &self.obligations[o].exts[k])
                .collect();
            if !exts.iter().any(|e| done(e)) {
                consider(exts.into_iter().filter(|e| viable(e)).cloned().collect());
            }
        }
        for fv in &self.fact_vars {
            if !fv.iter().any(|&v| a[v] == ON) {
                consider(
                    fv.iter()
                        .filter(|&&v| a[v] == UNSET)
                        .map(|&v| vec![v])
                        .collect(),
                );
            }
        }
        best
    }

    fn search(&self, a: Vec<u8>, counter: &mut Counter) -> Result<Option<Vec<u8>>> {
        counter.tick()?;
        if let Some(opts) = self.pending(&a) {
            for o in opts {
                let mut b = a.clone();
                Self::set_all(&mut b, &o);
                if self.propagate(&mut b) {
                    if let Some(r) = self.search(b, counter)? {
                        return Ok(Some(r));
                    }
                }
            }
            return Ok(None);
        }
        if let Some(v) = a.iter().position(|&x| x == UNSET) {
            for val in [OFF, ON] {
                let mut b = a.clone();
                b[v] = val;
                if self.propagate(&mut b) {
                    if let Some(r) = self.search(b, counter)? {
                        return Ok(Some(r));
                    }
                }
            }
            return Ok(None);
        }
        let on: BTreeSet<usize> = (0..a.len()).filter(|&v| a[v] == ON).collect();
        for &g in &on {
            if !self.has_witness(g, &on, counter)? {
                return Ok(None);
            }
        }
        Ok(Some(a))
    }

    /// Is there I' ⊆ I and a minimal model J' ⊆ J_ℓ of I' containing `g`?
    fn has_witness(&self, g: usize, on: &BTreeSet<usize>, counter: &mut Counter) -> Result<bool> {
        let live = |e: &Vec<usize>| subset(e, on);
        let mut seen = HashSet::new();
        for ob in &self.obligations {
            for e in ob.exts.iter().filter(|e| live(e) && e.contains(&g)) {
                let ip: BTreeSet<usize> = ob.body.iter().copied().collect();
                let jp: BTreeSet<usize> = e.iter().copied().collect();
                if self.witness_dfs(ip, jp, on, &mut seen, counter)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn witness_dfs(
        &self,
        ip: BTreeSet<usize>,
        jp: BTreeSet<usize>,
        on: &BTreeSet<usize>,
        seen: &mut HashSet<(Vec<usize>, Vec<usize>)>,
        counter: &mut Counter,
    ) -> Result<bool> {
        if !seen.insert((ip.iter().copied().collect(), jp.iter().copied().collect())) {
            return Ok(false);
        }
        counter.tick()?;
        let active: Vec<&Obligation> = self
            .obligations
            .iter()
            .filter(|o| subset(&o.body, &ip))
            .collect();
        // forward obligations of I' must be met inside J'
        for ob in &active {
            if ob.exts.iter().any(|e| subset(e, &jp)) {
                continue;
            }
            for e in ob.exts.iter().filter(|e| subset(e, on)) {
                let mut j2 = jp.clone();
                j2.extend(e.iter().copied());
                if self.witness_dfs(ip.clone(), j2, on, seen, counter)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        // head matches inside J' must be justified by I'
        for h in self.heads.iter().filter(|h| subset(&h.vars, &jp)) {
            if h.bodies.iter().any(|b| b.iter().all(|x| ip.contains(x))) {
                continue;
            }
            for b in &h.bodies {
                let mut i2 = ip.clone();
                i2.extend(b.iter().copied());
                if self.witness_dfs(i2, jp.clone(), on, seen, counter)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        // (I', J') is a model; it is minimal when no single fact of J' can go
        let critical = |f: usize| {
            active.iter().any(|ob| {
                let inside: Vec<&Vec<usize>> = ob.exts.iter().filter(|e| subset(e, &jp)).collect();
                !inside.is_empty() && inside.iter().all(|e| e.contains(&f))
            })
        };
        if jp.iter().all(|&f| critical(f)) {
            return Ok(true);
        }
        // a larger I' may make the redundant facts necessary
        for x in 0..self.i_len {
            if !ip.contains(&x) {
                let mut i2 = ip.clone();
                i2.insert(x);
                if self.witness_dfs(i2, jp.clone(), on, seen, counter)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn labeling(&self, a: &[u8]) -> TupleLabeling {
        (0..a.len())
            .filter(|&v| a[v] == ON)
            .map(|v| (self.j[self.vars[v].0].clone(), self.vars[v].1))
            .collect()
    }
}

/// Searches a labeling ℓ with (I, J) ⊨_ℓ Σ↔: (I, J_ℓ) is a model of the
/// renamed dependencies and every labeled fact belongs to a minimal model
/// (I', J'_ℓ) with I' ⊆ I. Returns the labeling found, if any.
///
/// Labels are decided by unit propagation over the forward, backward and
/// aegd constraints and branching on the most constrained requirement, so
/// a forced labeling (one annotation per relation) costs a single pass.
pub fn check_abd_solution(
    i: &Instance,
    p: &MappingProgram,
    j: &Instance,
    max_nodes: usize,
) -> Result<Option<TupleLabeling>> {
    if !p.tgds.is_empty() || !p.egds.is_empty() {
        return Err(Error::Precondition(
            "the ABD check needs abds and aegds".into(),
        ));
    }
    if !j.is_ground() {
        return Err(Error::Precondition(
            "candidate solution must be ground".into(),
        ));
    }
    let prob = Problem::build(i, p, j);
    let mut a = vec![UNSET; prob.vars.len()];
    if !prob.propagate(&mut a) {
        return Ok(None);
    }
    let mut counter = Counter::new(max_nodes, "ABD solution check");
    Ok(prob.search(a, &mut counter)?.map(|a| prob.labeling(&a)))
}
