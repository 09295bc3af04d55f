use super::{canonical_form, validate_structure, CanonicalForm, ClassSpec, FiniteStructure};
use crate::error::Result;
use std::collections::BTreeMap;

/// Isomorphism types of the age with exactly `size` vertices, sorted by
/// canonical form.
///
/// Built by one-vertex extensions of the types one size down, which is
/// complete because ages are hereditary.
pub fn age_members(spec: &ClassSpec, size: usize) -> Result<Vec<FiniteStructure>> {
    let mut level: BTreeMap<CanonicalForm, FiniteStructure> = BTreeMap::new();
    let empty = seed(spec);
    if validate_structure(&empty, spec)? {
        level.insert(canonical_form(&empty), empty);
    }
    for _ in 0..size {
        let mut next = BTreeMap::new();
        for s in level.values() {
            for t in one_vertex_extensions(s, spec) {
                if validate_structure(&t, spec)? {
                    next.entry(canonical_form(&t)).or_insert(t);
                }
            }
        }
        level = next;
    }
    Ok(level.into_values().collect())
}

/// All isomorphism types with `1..=bound` vertices, by size then canonical form.
pub fn age_up_to(spec: &ClassSpec, bound: usize) -> Result<Vec<FiniteStructure>> {
    let mut out = Vec::new();
    for m in 1..=bound {
        out.extend(age_members(spec, m)?);
    }
    Ok(out)
}

fn seed(spec: &ClassSpec) -> FiniteStructure {
    let mut s = FiniteStructure::new(0);
    if matches!(spec, ClassSpec::Composition(..)) {
        s.set_equivalence(Some(Vec::new())).expect("empty");
    }
    s
}

fn tournament_like(spec: &ClassSpec) -> bool {
    matches!(spec, ClassSpec::Tournaments | ClassSpec::QAge | ClassSpec::S2Age)
}

/// Every way to add vertex `n` to `s`: each old vertex gets an arc in,
/// out, or none; for composites the new vertex also picks a class.
fn one_vertex_extensions(s: &FiniteStructure, spec: &ClassSpec) -> Vec<FiniteStructure> {
    let n = s.len();
    let choices: u32 = if tournament_like(spec) {
        2
    } else if matches!(spec, ClassSpec::EdgelessAge) {
        1
    } else {
        3
    };
    let mut out = Vec::new();
    let total = (choices as u64).pow(n as u32);
    let class_options: Vec<Option<usize>> = match s.equivalence() {
        Some(e) => {
            let k = e.iter().copied().max().map_or(0, |m| m + 1);
            (0..=k).map(Some).collect()
        }
        None => vec![None],
    };
    for code in 0..total {
        let mut t = FiniteStructure::new(n + 1);
        for (x, y) in s.arc_list() {
            t.orient(x, y);
        }
        let mut c = code;
        for x in 0..n {
            let pick = (c % choices as u64) as u32;
            c /= choices as u64;
            match (choices, pick) {
                (1, _) => {}
                (2, 0) | (3, 1) => t.orient(x, n),
                (2, _) | (3, 2) => t.orient(n, x),
                _ => {}
            }
        }
        for cls in &class_options {
            let mut u = t.clone();
            if let (Some(cls), Some(e)) = (cls, s.equivalence()) {
                let mut e = e.to_vec();
                e.push(*cls);
                u.set_equivalence(Some(e)).expect("length");
            }
            out.push(u);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tournament_type_counts() {
        // 1, 1, 2, 4, 12 tournaments on 1..5 vertices.
        let counts: Vec<usize> =
            (1..=5).map(|m| age_members(&ClassSpec::Tournaments, m).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 12]);
    }

    #[test]
    fn poset_type_counts() {
        // 1, 2, 5, 16 unlabeled posets on 1..4 points.
        let counts: Vec<usize> =
            (1..=4).map(|m| age_members(&ClassSpec::PosetAge, m).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 16]);
    }

    #[test]
    fn local_orders() {
        // Both 3-tournaments are local orders. Of the four 4-tournaments,
        // a 3-cycle with a source or a sink has a non-transitive
        // neighbourhood, leaving the transitive and the strong one.
        assert_eq!(age_members(&ClassSpec::S2Age, 3).unwrap().len(), 2);
        assert_eq!(age_members(&ClassSpec::S2Age, 4).unwrap().len(), 2);
    }
}
