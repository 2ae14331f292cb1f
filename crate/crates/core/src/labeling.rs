//! Tuple labelings: which annotations each fact of a table carries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::hom::Subst;
use crate::instance::Instance;
use crate::mapping::diamond_rel;
use crate::term::{Fact, Term};

#[derive(Clone, Default, PartialEq, Eq)]
pub struct TupleLabeling {
    labels: BTreeMap<Fact, BTreeSet<u32>>,
}

impl TupleLabeling {
    pub fn new() -> TupleLabeling {
        TupleLabeling::default()
    }

    pub fn add(&mut self, f: Fact, ann: u32) {
        self.labels.entry(f).or_default().insert(ann);
    }

    pub fn get(&self, f: &Fact) -> Option<&BTreeSet<u32>> {
        self.labels.get(f)
    }

    pub fn has(&self, f: &Fact, ann: u32) -> bool {
        self.labels.get(f).is_some_and(|s| s.contains(&ann))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Fact, &BTreeSet<u32>)> {
        self.labels.iter()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The labeled facts as a plain table.
    pub fn table(&self) -> Instance {
        self.labels.keys().cloned().collect()
    }

    /// The table over the renamed schema: `R@i(a)` for every label i of `R(a)`.
    pub fn diamond(&self) -> Instance {
        self.labels
            .iter()
            .flat_map(|(f, s)| {
                s.iter().map(move |&i| Fact {
                    rel: diamond_rel(&f.rel, i),
                    args: f.args.clone(),
                })
            })
            .collect()
    }

    /// Applies a term substitution, merging labels of facts that collide.
    pub fn substitute(&self, s: &Subst) -> TupleLabeling {
        let mut out = TupleLabeling::new();
        for (f, anns) in &self.labels {
            let g = f.map(|t| s.get(t).cloned().unwrap_or_else(|| t.clone()));
            out.labels
                .entry(g)
                .or_default()
                .extend(anns.iter().copied());
        }
        out
    }

    pub fn map_terms(&self, m: impl Fn(&Term) -> Term) -> TupleLabeling {
        let mut out = TupleLabeling::new();
        for (f, anns) in &self.labels {
            out.labels
                .entry(f.map(&m))
                .or_default()
                .extend(anns.iter().copied());
        }
        out
    }
}

impl FromIterator<(Fact, u32)> for TupleLabeling {
    fn from_iter<I: IntoIterator<Item = (Fact, u32)>>(iter: I) -> Self {
        let mut l = TupleLabeling::new();
        for (f, a) in iter {
            l.add(f, a);
        }
        l
    }
}

/// One line per fact: `R(a, ?o1) -> {1,2}`.
impl fmt::Display for TupleLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (fact, anns) in &self.labels {
            let a: Vec<String> = anns.iter().map(u32::to_string).collect();
            writeln!(f, "{fact} -> {{{}}}", a.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for TupleLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.labels.iter()).finish()
    }
}
