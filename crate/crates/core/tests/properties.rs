mod support;

use std::collections::BTreeSet;

use bidex::chase::{annotated_chase, ChaseOutcome};
use bidex::condition::Congruence;
use bidex::gaifman::gaifman_partition;
use bidex::hom::{apply_all, find_homomorphisms};
use bidex::iso::isomorphic;
use bidex::mapping::{
    affected_positions, annotation_density, is_gav_reducible, parse_mapping, translate_tgds,
    MappingProgram,
};
use bidex::oracle::{check_abd_solution, enumerate_abd_solutions, DomainBudget};
use bidex::query::{certain_answers, CertainOutcome};
use bidex::rep::{apply_valuation, check_rep_membership, Valuation};
use bidex::{parse_query, sat_check, Diseq, Fact, GlobalCondition, Instance, Term};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use support::rng;

fn tgds(seed: u64) -> MappingProgram {
    parse_mapping(&support::tgd_program(&mut rng(seed))).unwrap()
}

fn abds(seed: u64, max_head: usize) -> MappingProgram {
    parse_mapping(&support::abd_program(&mut rng(seed), max_head)).unwrap()
}

fn source(seed: u64, max: usize) -> Instance {
    Instance::parse(&support::source_facts(&mut rng(seed), max)).unwrap()
}

fn chased(i: &Instance, p: &MappingProgram) -> Option<(Instance, GlobalCondition)> {
    match annotated_chase(i, p).unwrap() {
        ChaseOutcome::Success(r) => Some((r.table, r.condition)),
        ChaseOutcome::Failure(_) => None,
    }
}

/// Maps every null to its own fresh constant.
fn fresh_valuation(t: &Instance) -> Valuation {
    t.nulls()
        .into_iter()
        .enumerate()
        .map(|(k, n)| (n, Term::constant(&format!("_f{k}"))))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_has_density_one(seed in any::<u64>()) {
        let t = translate_tgds(&tgds(seed)).unwrap().program;
        prop_assert_eq!(annotation_density(&t).overall, 1);
    }

    #[test]
    fn mapping_round_trips(seed in any::<u64>()) {
        for p in [tgds(seed), abds(seed, 3), translate_tgds(&tgds(seed)).unwrap().program] {
            prop_assert_eq!(parse_mapping(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn full_programs_have_no_affected_positions(seed in any::<u64>()) {
        let p = translate_tgds(&tgds(seed)).unwrap().program;
        if p.abds.iter().all(|a| a.head_only().is_empty()) {
            prop_assert!(affected_positions(&p).is_empty());
        }
    }

    #[test]
    fn gav_reducible_programs_chase_to_trivial_conditions(seed in any::<u64>(), src in any::<u64>()) {
        let p = tgds(seed);
        prop_assume!(is_gav_reducible(&p.tgds));
        let t = translate_tgds(&p).unwrap().program;
        if let Some((_, cond)) = chased(&source(src, 3), &t) {
            prop_assert!(cond.is_trivial(), "{}", cond);
        }
    }

    #[test]
    fn fresh_valuation_is_a_rep_member(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 3);
        if let Some((t, cond)) = chased(&source(src, 3), &p) {
            let j = apply_valuation(&t, &fresh_valuation(&t)).unwrap();
            prop_assert!(check_rep_membership(&t, &cond, &j).unwrap());
            prop_assert!(check_rep_membership(&t, &GlobalCondition::new(), &j).unwrap());
        }
    }

    #[test]
    fn chase_is_independent_of_rule_order(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 3);
        let mut q = p.clone();
        q.abds.reverse();
        let i = source(src, 4);
        match (chased(&i, &p), chased(&i, &q)) {
            (Some((a, ca)), Some((b, cb))) => {
                prop_assert!(isomorphic(&a, &b), "{} vs {}", a, b);
                prop_assert_eq!(ca.is_trivial(), cb.is_trivial());
            }
            (None, None) => {}
            (a, b) => prop_assert!(false, "success {} vs {}", a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn chase_size_is_bounded(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 3);
        let i = source(src, 4);
        if let Some((t, _)) = chased(&i, &p) {
            let body = p.abds.iter().map(|a| a.body.len()).max().unwrap_or(0) as u32;
            let head = p.abds.iter().map(|a| a.head.len()).max().unwrap_or(0);
            prop_assert!(t.len() <= p.abds.len() * i.len().pow(body) * head);
        }
    }

    #[test]
    fn enumerated_solutions_pass_the_check(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 2);
        let i = source(src, 3);
        let budget = DomainBudget { extra_constants: 1, max_size: 5, ..DomainBudget::default() };
        for j in enumerate_abd_solutions(&i, &p, &budget).unwrap().keys() {
            prop_assert!(check_abd_solution(&i, &p, j, budget.max_nodes).unwrap().is_some(), "{}", j);
        }
    }

    #[test]
    fn ucq_answers_grow_with_the_source(seed in any::<u64>(), src in any::<u64>(), more in any::<u64>()) {
        let p = abds(seed, 3);
        let small = source(src, 3);
        let large = small.union(&source(more, 2));
        let q = parse_query(&support::ucq(&mut rng(seed ^ more))).unwrap();
        match (certain_answers(&small, &p, &q).unwrap(), certain_answers(&large, &p, &q).unwrap()) {
            (CertainOutcome::Answers { answers: a, .. }, CertainOutcome::Answers { answers: b, .. }) => {
                prop_assert!(a.is_subset(&b), "{:?} vs {:?}", a, b);
            }
            (CertainOutcome::NoSolutions(_), b) => prop_assert!(matches!(b, CertainOutcome::NoSolutions(_))),
            _ => {}
        }
    }

    #[test]
    fn gaifman_blocks_partition_the_table(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 3);
        if let Some((t, _)) = chased(&source(src, 4), &p) {
            let blocks = gaifman_partition(&t);
            let mut union = Instance::new();
            let mut owner = std::collections::BTreeMap::new();
            for (k, b) in blocks.iter().enumerate() {
                for f in b.iter() {
                    prop_assert!(union.insert(f.clone()), "{} in two blocks", f);
                }
                for n in b.nulls() {
                    prop_assert!(owner.insert(n.clone(), k).is_none(), "{} spans blocks", n);
                }
            }
            prop_assert_eq!(&union, &t);
            let mut facts: Vec<Fact> = t.iter().cloned().collect();
            facts.shuffle(&mut rng(src));
            let again: BTreeSet<Instance> = gaifman_partition(&facts.into_iter().collect()).into_iter().collect();
            prop_assert_eq!(again, blocks.into_iter().collect::<BTreeSet<_>>());
        }
    }

    #[test]
    fn homomorphisms_map_into_the_target(seed in any::<u64>(), src in any::<u64>()) {
        let p = abds(seed, 3);
        let i = source(src, 4);
        for a in &p.abds {
            for h in find_homomorphisms(&a.body, &i, &BTreeSet::new()) {
                prop_assert!(apply_all(&h, &a.body).is_subset(&i));
            }
        }
    }

    #[test]
    fn sat_check_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool: Vec<Term> = (1..=3)
            .map(Term::Open)
            .chain((1..=3).map(Term::Closed))
            .chain(["a", "b"].map(Term::constant))
            .collect();
        let pick = |r: &mut rand_chacha::ChaCha8Rng| pool.choose(r).unwrap().clone();
        let eqs: Vec<(Term, Term)> = (0..r.gen_range(0..=3)).map(|_| (pick(&mut r), pick(&mut r))).collect();
        let mut cond = GlobalCondition::new();
        for _ in 0..r.gen_range(0..=3) {
            cond.add((0..r.gen_range(1..=2)).map(|_| Diseq::new(pick(&mut r), pick(&mut r))).collect());
        }
        prop_assert_eq!(sat_check(&eqs, &cond), brute_sat(&pool, &eqs, &cond), "{:?} {}", eqs, cond);
    }
}

/// Tries every assignment of the nulls in `pool` to its constants plus
/// one fresh constant per null.
fn brute_sat(pool: &[Term], eqs: &[(Term, Term)], cond: &GlobalCondition) -> bool {
    let nulls: Vec<&Term> = pool.iter().filter(|t| t.is_null()).collect();
    let mut values: Vec<Term> = pool.iter().filter(|t| t.is_const()).cloned().collect();
    values.extend((0..nulls.len()).map(|k| Term::constant(&format!("_v{k}"))));
    let mut choice = vec![0usize; nulls.len()];
    loop {
        let val = |t: &Term| match nulls.iter().position(|n| *n == t) {
            Some(k) => values[choice[k]].clone(),
            None => t.clone(),
        };
        let ok = eqs.iter().all(|(a, b)| val(a) == val(b))
            && cond
                .clauses()
                .all(|c| c.iter().any(|d| val(&d.0) != val(&d.1)));
        if ok {
            return true;
        }
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < values.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            return false;
        }
    }
}

#[test]
fn congruence_refuses_distinct_constants() {
    let mut cc = Congruence::new();
    assert!(cc.union(&Term::Open(1), &Term::constant("a")));
    assert!(!cc.union(&Term::Open(1), &Term::constant("b")));
}
