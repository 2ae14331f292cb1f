//! Valuations of semi-naive tables and membership in rep(T, φ*).

use std::collections::{BTreeMap, BTreeSet};

use crate::condition::GlobalCondition;
use crate::error::{Error, Result};
use crate::hom::{apply_fact, for_each_hom, Subst};
use crate::instance::Instance;
use crate::term::{Fact, Term};

/// Partial map from nulls to constants.
pub type Valuation = BTreeMap<Term, Term>;

/// Default number of subset probes for [`check_rep_membership`].
pub const DEFAULT_REP_BUDGET: usize = 1 << 16;

pub fn apply_valuation(table: &Instance, v: &Valuation) -> Result<Instance> {
    let mut out = Instance::new();
    for f in table {
        let mut args = Vec::with_capacity(f.args.len());
        for t in &f.args {
            if t.is_null() {
                match v.get(t) {
                    Some(c) => args.push(c.clone()),
                    None => return Err(Error::MissingValuation(t.to_string())),
                }
            } else {
                args.push(t.clone());
            }
        }
        out.insert(Fact {
            rel: f.rel.clone(),
            args,
        });
    }
    Ok(out)
}

/// Does the pair (v, {v_1..v_n}) satisfy φ*? A literal holds when the sets
/// of values its two sides can take across all copies are disjoint: open
/// nulls range over every copy, closed nulls and constants have one value.
pub fn satisfies(closed: &Valuation, copies: &[Subst], cond: &GlobalCondition) -> bool {
    let values = |t: &Term| -> BTreeSet<Term> {
        match t {
            Term::Open(_) => copies
                .iter()
                .map(|c| c.get(t).cloned().unwrap_or_else(|| t.clone()))
                .collect(),
            Term::Closed(_) => [closed.get(t).cloned().unwrap_or_else(|| t.clone())].into(),
            _ => [t.clone()].into(),
        }
    };
    cond.clauses().all(|clause| {
        clause
            .iter()
            .any(|d| values(&d.0).is_disjoint(&values(&d.1)))
    })
}

/// Is `j` in rep(T, φ*) with the default probe budget?
pub fn check_rep_membership(t: &Instance, cond: &GlobalCondition, j: &Instance) -> Result<bool> {
    check_rep_membership_with(t, cond, j, DEFAULT_REP_BUDGET)
}

/// Searches a closed-null valuation into dom(J) and a family of open-null
/// copies whose union is exactly `j` and which satisfies the condition.
pub fn check_rep_membership_with(
    t: &Instance,
    cond: &GlobalCondition,
    j: &Instance,
    budget: usize,
) -> Result<bool> {
    if t.is_empty() {
        return Ok(j.is_empty());
    }
    if j.is_empty() {
        return Ok(false);
    }
    let closed: Vec<Term> = t.nulls().into_iter().filter(Term::is_closed).collect();
    let domain: Vec<Term> = j.constants().into_iter().collect();
    let mut probes = 0usize;
    let mut choice = vec![0usize; closed.len()];
    loop {
        let v: Valuation = closed
            .iter()
            .cloned()
            .zip(choice.iter().map(|&k| domain[k].clone()))
            .collect();
        if cover_search(t, &v, cond, j, budget, &mut probes)? {
            return Ok(true);
        }
        // next closed-null valuation in odometer order
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(false);
            }
            choice[k] += 1;
            if choice[k] < domain.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn cover_search(
    t: &Instance,
    v: &Valuation,
    cond: &GlobalCondition,
    j: &Instance,
    budget: usize,
    probes: &mut usize,
) -> Result<bool> {
    let tv: Vec<Fact> = t.iter().map(|f| apply_fact(v, f)).collect();
    let mut copies: Vec<(Subst, BTreeSet<Fact>)> = Vec::new();
    for_each_hom(&tv, j, &Subst::new(), &Term::is_open, &mut |s| {
        let image = tv.iter().map(|f| apply_fact(s, f)).collect();
        copies.push((s.clone(), image));
        true
    });
    copies.sort();
    copies.dedup_by(|a, b| a.0 == b.0);
    let targets: Vec<&Fact> = j.iter().collect();
    if !targets
        .iter()
        .all(|f| copies.iter().any(|(_, img)| img.contains(*f)))
    {
        return Ok(false);
    }
    let mut chosen: Vec<Subst> = Vec::new();
    let mut covered = vec![0usize; targets.len()];
    dfs(
        &targets,
        &copies,
        v,
        cond,
        &mut chosen,
        &mut covered,
        budget,
        probes,
    )
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    targets: &[&Fact],
    copies: &[(Subst, BTreeSet<Fact>)],
    v: &Valuation,
    cond: &GlobalCondition,
    chosen: &mut Vec<Subst>,
    covered: &mut Vec<usize>,
    budget: usize,
    probes: &mut usize,
) -> Result<bool> {
    let Some(next) = covered.iter().position(|&c| c == 0) else {
        return Ok(true);
    };
    for (s, img) in copies.iter().filter(|(_, img)| img.contains(targets[next])) {
        *probes += 1;
        if *probes > budget {
            return Err(Error::Budget(format!(
                "rep membership exceeded {budget} probes"
            )));
        }
        chosen.push(s.clone());
        if satisfies(v, chosen, cond) {
            for (k, f) in targets.iter().enumerate() {
                if img.contains(*f) {
                    covered[k] += 1;
                }
            }
            let found = dfs(targets, copies, v, cond, chosen, covered, budget, probes)?;
            for (k, f) in targets.iter().enumerate() {
                if img.contains(*f) {
                    covered[k] -= 1;
                }
            }
            if found {
                return Ok(true);
            }
        }
        chosen.pop();
    }
    Ok(false)
}
