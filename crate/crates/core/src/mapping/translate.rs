use std::collections::BTreeMap;

use super::metrics::{check_safety, dedup_head};
use super::{Abd, Aegd, Atom, MappingProgram};
use crate::error::{Error, Result};
use crate::gaifman::gaifman_partition_by;
use crate::term::Sym;

/// Result of rewriting tgds and egds into abds and aegds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Translation {
    pub program: MappingProgram,
    pub warnings: Vec<String>,
}

/// Rewrites a plain program into an annotated one of density 1: one abd per
/// Gaifman block of each tgd head (existentials act as nulls), each head atom
/// taking the next annotation of its relation. Each egd becomes one aegd per
/// combination of annotations available for its body relations.
pub fn translate_tgds(p: &MappingProgram) -> Result<Translation> {
    if p.is_annotated() {
        return Err(Error::Precondition(
            "translation expects tgds and egds".into(),
        ));
    }
    let mut next: BTreeMap<Sym, u32> = BTreeMap::new();
    let mut out = MappingProgram {
        source: p.source.clone(),
        target: p.target.clone(),
        ..Default::default()
    };
    let mut warnings = Vec::new();
    for t in &p.tgds {
        let z = t.existentials();
        for block in gaifman_partition_by(&dedup_head(&t.head), |v| z.contains(v)) {
            let head = block
                .iter()
                .map(|f| {
                    let k = next.entry(f.rel.clone()).or_insert(0);
                    *k += 1;
                    Atom {
                        rel: f.rel.clone(),
                        ann: Some(*k),
                        args: f.args.clone(),
                    }
                })
                .collect();
            out.abds.push(Abd {
                body: t.body.clone(),
                head,
            });
        }
    }
    for e in &p.egds {
        let choices: Vec<Vec<u32>> = e
            .body
            .iter()
            .map(|f| out.annotations(&f.rel).into_iter().collect())
            .collect();
        if choices.iter().any(Vec::is_empty) {
            warnings.push(format!(
                "dropped {e}: a body relation occurs in no tgd head"
            ));
            continue;
        }
        let mut pick = vec![0usize; choices.len()];
        loop {
            let body = e
                .body
                .iter()
                .zip(&pick)
                .zip(&choices)
                .map(|((f, &k), c)| Atom {
                    rel: f.rel.clone(),
                    ann: Some(c[k]),
                    args: f.args.clone(),
                })
                .collect();
            out.aegds.push(Aegd {
                body,
                left: e.left.clone(),
                right: e.right.clone(),
            });
            let mut i = 0;
            loop {
                if i == pick.len() {
                    break;
                }
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
    }
    let report = check_safety(&out);
    if let Some((n, v)) = report.offending.first() {
        return Err(Error::UnsafeEgd(format!(
            "{} (variable {v} reaches an invented position)",
            out.aegds[*n]
        )));
    }
    Ok(Translation {
        program: out,
        warnings,
    })
}
