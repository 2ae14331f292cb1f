use super::{Atom, Egd, MappingProgram, Tgd};
use crate::term::{sym, Fact, Sym};

/// Relation name standing for annotation `ann` of `rel` in the renamed
/// schema. `@` cannot appear in a parsed name, so no clash is possible.
pub fn diamond_rel(rel: &str, ann: u32) -> Sym {
    sym(&format!("{rel}@{ann}"))
}

fn diamond_atom(a: &Atom) -> Fact {
    match a.ann {
        Some(i) => Fact {
            rel: diamond_rel(&a.rel, i),
            args: a.args.clone(),
        },
        None => a.fact(),
    }
}

/// An abd read right to left: annotated target body, source head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackwardRule {
    pub body: Vec<Atom>,
    pub head: Vec<Fact>,
}

/// Both directions of an abd over the renamed schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiamondRule {
    pub source: Vec<Fact>,
    pub target: Vec<Fact>,
}

impl MappingProgram {
    /// Annotations stripped: abds read as s-t tgds. Plain programs return
    /// their tgds.
    pub fn forward_tgds(&self) -> Vec<Tgd> {
        if !self.is_annotated() {
            return self.tgds.clone();
        }
        self.abds
            .iter()
            .map(|a| Tgd {
                body: a.body.clone(),
                head: a.head_facts(),
            })
            .collect()
    }

    pub fn backward_rules(&self) -> Vec<BackwardRule> {
        self.abds
            .iter()
            .map(|a| BackwardRule {
                body: a.head.clone(),
                head: a.body.clone(),
            })
            .collect()
    }

    /// Abds with each annotated atom renamed to its own relation.
    pub fn diamond_rules(&self) -> Vec<DiamondRule> {
        self.abds
            .iter()
            .map(|a| DiamondRule {
                source: a.body.clone(),
                target: a.head.iter().map(diamond_atom).collect(),
            })
            .collect()
    }

    /// Aegds over the renamed schema.
    pub fn diamond_egds(&self) -> Vec<Egd> {
        self.aegds
            .iter()
            .map(|e| Egd {
                body: e.body.iter().map(diamond_atom).collect(),
                left: e.left.clone(),
                right: e.right.clone(),
            })
            .collect()
    }

    /// Target egds with annotations stripped.
    pub fn plain_egds(&self) -> Vec<Egd> {
        if !self.is_annotated() {
            return self.egds.clone();
        }
        self.aegds
            .iter()
            .map(|e| Egd {
                body: e.body.iter().map(Atom::fact).collect(),
                left: e.left.clone(),
                right: e.right.clone(),
            })
            .collect()
    }
}
