use super::enumerate_expansions;
use crate::error::Result;
use crate::structures::{age_members, enumerate_embeddings, ClassSpec, FiniteStructure};
use std::collections::BTreeSet;

/// Smallest age member `b` (by size, then canonical form) with at most
/// `size_bound` vertices such that every expansion of `b` contains a copy
/// of every expansion of `a`. `None` means nothing was found in the bound.
pub fn bounded_expansion_property_search(
    spec: &ClassSpec,
    a: &FiniteStructure,
    size_bound: usize,
) -> Result<Option<FiniteStructure>> {
    let a_exps = enumerate_expansions(spec, a)?;
    let wanted: BTreeSet<_> = a_exps.iter().map(|e| (&e.order, &e.labels, &e.aux)).collect();
    for m in a.len()..=size_bound {
        for b in age_members(spec, m)? {
            let embs = enumerate_embeddings(a, &b);
            if embs.is_empty() {
                continue;
            }
            let b_exps = enumerate_expansions(spec, &b)?;
            let ok = b_exps.iter().all(|be| {
                let mut got = BTreeSet::new();
                for emb in &embs {
                    got.insert(be.restricted_parts(&emb.map));
                }
                wanted.iter().all(|&(o, l, x)| got.contains(&(o.clone(), l.clone(), x.clone())))
            });
            if ok {
                return Ok(Some(b));
            }
        }
    }
    Ok(None)
}
