use super::{Coloured, FiniteStructure};
use serde::{Deserialize, Serialize};

/// Injective map from a domain structure into a codomain structure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Embedding { map: (0..n).collect() }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Embedding) -> Embedding {
        Embedding { map: self.map.iter().map(|&v| other.map[v]).collect() }
    }

    pub fn image_sorted(&self) -> Vec<usize> {
        let mut v = self.map.clone();
        v.sort_unstable();
        v
    }
}

/// Backtracking search over injective, relation-exact maps `a -> b`.
/// `visit` returns `false` to stop early.
pub(crate) fn search(a: &Coloured, b: &Coloured, visit: &mut dyn FnMut(&[usize]) -> bool) {
    if a.n > b.n {
        return;
    }
    let mut map = Vec::with_capacity(a.n);
    let mut used = vec![false; b.n];
    extend(a, b, &mut map, &mut used, visit);
}

fn extend(
    a: &Coloured,
    b: &Coloured,
    map: &mut Vec<usize>,
    used: &mut [bool],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let i = map.len();
    if i == a.n {
        return visit(map);
    }
    for v in 0..b.n {
        if used[v] || a.colour[i] != b.colour[v] {
            continue;
        }
        let ok = map
            .iter()
            .enumerate()
            .all(|(j, &w)| a.get(i, j) == b.get(v, w) && a.get(j, i) == b.get(w, v));
        if !ok {
            continue;
        }
        used[v] = true;
        map.push(v);
        let go_on = extend(a, b, map, used, visit);
        map.pop();
        used[v] = false;
        if !go_on {
            return false;
        }
    }
    true
}

/// Every embedding of `a` into `b`, in lexicographic order of the map.
pub fn enumerate_embeddings(a: &FiniteStructure, b: &FiniteStructure) -> Vec<Embedding> {
    let (ca, cb) = (Coloured::from(a), Coloured::from(b));
    let mut out = Vec::new();
    search(&ca, &cb, &mut |m| {
        out.push(Embedding { map: m.to_vec() });
        true
    });
    out
}

/// Calls `visit` on each embedding in lexicographic order; `visit` returns
/// `false` to stop.
pub fn for_each_embedding(
    a: &FiniteStructure,
    b: &FiniteStructure,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    search(&Coloured::from(a), &Coloured::from(b), visit);
}

/// `N_emb(a, b)`.
pub fn count_embeddings(a: &FiniteStructure, b: &FiniteStructure) -> usize {
    let (ca, cb) = (Coloured::from(a), Coloured::from(b));
    let mut count = 0usize;
    search(&ca, &cb, &mut |_| {
        count += 1;
        true
    });
    count
}

pub fn first_embedding(a: &FiniteStructure, b: &FiniteStructure) -> Option<Embedding> {
    let (ca, cb) = (Coloured::from(a), Coloured::from(b));
    let mut found = None;
    search(&ca, &cb, &mut |m| {
        found = Some(Embedding { map: m.to_vec() });
        false
    });
    found
}

/// Direct check that `map` preserves and reflects every relation.
pub fn is_embedding(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> bool {
    if map.len() != a.len() || map.iter().any(|&v| v >= b.len()) {
        return false;
    }
    let mut seen = vec![false; b.len()];
    for &v in map {
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let (ca, cb) = (Coloured::from(a), Coloured::from(b));
    (0..a.len()).all(|i| {
        ca.colour[i] == cb.colour[map[i]]
            && (0..a.len()).all(|j| ca.get(i, j) == cb.get(map[i], map[j]))
    })
}
