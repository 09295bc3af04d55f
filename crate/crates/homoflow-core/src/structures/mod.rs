//! Finite digraphs with optional unary parts, an auxiliary relation `R`,
//! a linear order and an explicit equivalence. Vertices are `0..n`.

mod canon;
mod coloured;
mod embed;
mod membership;
mod spec;
pub mod builders;
mod age;

pub(crate) use embed::search as coloured_search;
pub use canon::{
    automorphisms, canonical_coloured_form, canonical_form, is_isomorphic, CanonicalForm,
};
pub use coloured::Coloured;
pub use embed::{
    count_embeddings, enumerate_embeddings, first_embedding, for_each_embedding, is_embedding,
    Embedding,
};
pub use membership::{
    hatq_completion, is_strict_order_matrix, p3_labelings, s_n_labelings, untwist_labels,
    validate_structure, HatQCompletion,
};
pub use spec::ClassSpec;
pub use age::{age_members, age_up_to};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default cap on the number of vertices handled by exhaustive routines.
pub const DEFAULT_MAX_VERTICES: usize = 8;

/// Reads `HOMOFLOW_MAX_VERTICES`, falling back to [`DEFAULT_MAX_VERTICES`].
pub fn max_vertices() -> usize {
    std::env::var("HOMOFLOW_MAX_VERTICES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_VERTICES)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteStructure {
    n: usize,
    arcs: Vec<bool>,
    parts: Option<Vec<u32>>,
    aux: Option<Vec<bool>>,
    order: Option<Vec<usize>>,
    equivalence: Option<Vec<usize>>,
}

impl FiniteStructure {
    /// Edgeless structure on `n` vertices.
    pub fn new(n: usize) -> Self {
        FiniteStructure {
            n,
            arcs: vec![false; n * n],
            parts: None,
            aux: None,
            order: None,
            equivalence: None,
        }
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut s = Self::new(n);
        for &(x, y) in arcs {
            s.add_arc(x, y)?;
        }
        Ok(s)
    }

    /// Tournament with `x -> y` iff `x < y`.
    pub fn linear_tournament(n: usize) -> Self {
        let mut s = Self::new(n);
        for x in 0..n {
            for y in x + 1..n {
                s.arcs[x * n + y] = true;
            }
        }
        s
    }

    pub fn cycle3() -> Self {
        Self::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).expect("valid cycle")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn has_arc(&self, x: usize, y: usize) -> bool {
        self.arcs[x * self.n + y]
    }

    /// `x ⊥ y`: distinct and joined by no arc.
    #[inline]
    pub fn perp(&self, x: usize, y: usize) -> bool {
        x != y && !self.arcs[x * self.n + y] && !self.arcs[y * self.n + x]
    }

    pub fn add_arc(&mut self, x: usize, y: usize) -> Result<()> {
        if x >= self.n || y >= self.n {
            return Err(Error::Malformed(format!("arc ({x},{y}) out of range")));
        }
        if x == y {
            return Err(Error::Malformed(format!("loop at {x}")));
        }
        if self.arcs[y * self.n + x] {
            return Err(Error::Malformed(format!("both ({x},{y}) and ({y},{x})")));
        }
        self.arcs[x * self.n + y] = true;
        Ok(())
    }

    /// Sets the arc between `x` and `y` to point `x -> y`, clearing the reverse.
    pub fn orient(&mut self, x: usize, y: usize) {
        self.arcs[y * self.n + x] = false;
        self.arcs[x * self.n + y] = true;
    }

    pub fn remove_arcs_between(&mut self, x: usize, y: usize) {
        self.arcs[x * self.n + y] = false;
        self.arcs[y * self.n + x] = false;
    }

    pub fn arc_list(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for x in 0..self.n {
            for y in 0..self.n {
                if self.has_arc(x, y) {
                    v.push((x, y));
                }
            }
        }
        v
    }

    pub fn out_degree(&self, x: usize) -> usize {
        (0..self.n).filter(|&y| self.has_arc(x, y)).count()
    }

    pub fn in_degree(&self, x: usize) -> usize {
        (0..self.n).filter(|&y| self.has_arc(y, x)).count()
    }

    pub fn parts(&self) -> Option<&[u32]> {
        self.parts.as_deref()
    }

    pub fn set_parts(&mut self, parts: Option<Vec<u32>>) -> Result<()> {
        if let Some(p) = &parts {
            if p.len() != self.n {
                return Err(Error::Malformed("parts length differs from n".into()));
            }
        }
        self.parts = parts;
        Ok(())
    }

    pub fn aux(&self, x: usize, y: usize) -> bool {
        self.aux.as_ref().is_some_and(|r| r[x * self.n + y])
    }

    pub fn has_aux(&self) -> bool {
        self.aux.is_some()
    }

    pub fn aux_list(&self) -> Option<Vec<(usize, usize)>> {
        self.aux.as_ref().map(|r| {
            let mut v = Vec::new();
            for x in 0..self.n {
                for y in 0..self.n {
                    if r[x * self.n + y] {
                        v.push((x, y));
                    }
                }
            }
            v
        })
    }

    pub fn set_aux(&mut self, pairs: Option<&[(usize, usize)]>) -> Result<()> {
        match pairs {
            None => self.aux = None,
            Some(pairs) => {
                let mut r = vec![false; self.n * self.n];
                for &(x, y) in pairs {
                    if x >= self.n || y >= self.n || x == y {
                        return Err(Error::Malformed(format!("bad R pair ({x},{y})")));
                    }
                    r[x * self.n + y] = true;
                }
                self.aux = Some(r);
            }
        }
        Ok(())
    }

    /// The stored linear order as a list of vertices, least first.
    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn set_order(&mut self, order: Option<Vec<usize>>) -> Result<()> {
        if let Some(o) = &order {
            check_permutation(o, self.n)?;
        }
        self.order = order;
        Ok(())
    }

    pub fn equivalence(&self) -> Option<&[usize]> {
        self.equivalence.as_deref()
    }

    pub fn set_equivalence(&mut self, classes: Option<Vec<usize>>) -> Result<()> {
        if let Some(c) = &classes {
            if c.len() != self.n {
                return Err(Error::Malformed("equivalence length differs from n".into()));
            }
        }
        self.equivalence = classes;
        Ok(())
    }

    /// Checks the invariants of a well-formed structure.
    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.n;
        if self.arcs.len() != n * n {
            return Err(Error::Malformed("arc matrix size".into()));
        }
        for x in 0..n {
            if self.arcs[x * n + x] {
                return Err(Error::Malformed(format!("loop at {x}")));
            }
            for y in x + 1..n {
                if self.arcs[x * n + y] && self.arcs[y * n + x] {
                    return Err(Error::Malformed(format!("both ({x},{y}) and ({y},{x})")));
                }
            }
        }
        if let Some(o) = &self.order {
            check_permutation(o, n)?;
        }
        if let Some(r) = &self.aux {
            for x in 0..n {
                for y in 0..n {
                    if r[x * n + y] && (x == y || self.perp(x, y)) {
                        return Err(Error::Malformed(format!(
                            "R relates the unlinked pair ({x},{y})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Induced substructure on `vertices` (in the given order).
    pub fn induced(&self, vertices: &[usize]) -> FiniteStructure {
        let k = vertices.len();
        let mut s = FiniteStructure::new(k);
        for (i, &x) in vertices.iter().enumerate() {
            for (j, &y) in vertices.iter().enumerate() {
                s.arcs[i * k + j] = self.has_arc(x, y);
            }
        }
        s.parts = self.parts.as_ref().map(|p| vertices.iter().map(|&v| p[v]).collect());
        s.aux = self.aux.as_ref().map(|r| {
            let mut m = vec![false; k * k];
            for (i, &x) in vertices.iter().enumerate() {
                for (j, &y) in vertices.iter().enumerate() {
                    m[i * k + j] = r[x * self.n + y];
                }
            }
            m
        });
        s.order = self.order.as_ref().map(|o| {
            let rank = ranks(o);
            let mut local: Vec<usize> = (0..k).collect();
            local.sort_by_key(|&i| rank[vertices[i]]);
            local
        });
        s.equivalence = self.equivalence.as_ref().map(|e| {
            let picked: Vec<usize> = vertices.iter().map(|&v| e[v]).collect();
            normalise_classes(&picked)
        });
        s
    }

    /// Copy with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> FiniteStructure {
        let n = self.n;
        let mut s = FiniteStructure::new(n);
        for x in 0..n {
            for y in 0..n {
                s.arcs[perm[x] * n + perm[y]] = self.arcs[x * n + y];
            }
        }
        s.parts = self.parts.as_ref().map(|p| {
            let mut q = vec![0; n];
            for v in 0..n {
                q[perm[v]] = p[v];
            }
            q
        });
        s.aux = self.aux.as_ref().map(|r| {
            let mut m = vec![false; n * n];
            for x in 0..n {
                for y in 0..n {
                    m[perm[x] * n + perm[y]] = r[x * n + y];
                }
            }
            m
        });
        s.order = self.order.as_ref().map(|o| o.iter().map(|&v| perm[v]).collect());
        s.equivalence = self.equivalence.as_ref().map(|e| {
            let mut q = vec![0; n];
            for v in 0..n {
                q[perm[v]] = e[v];
            }
            normalise_classes(&q)
        });
        s
    }

    /// Drops order, parts, `R` and the equivalence, keeping only arcs.
    pub fn digraph(&self) -> FiniteStructure {
        let mut s = FiniteStructure::new(self.n);
        s.arcs.clone_from(&self.arcs);
        s
    }

    /// Classes of the no-arc relation, each sorted, listed by least member.
    pub fn perp_partition(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.n;
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = (x..n).filter(|&y| y == x || self.perp(x, y)).collect();
            for &y in &members {
                if class_of[y] != usize::MAX {
                    return Err(Error::NotAnEquivalence);
                }
                class_of[y] = classes.len();
            }
            classes.push(members);
        }
        for x in 0..n {
            for y in x + 1..n {
                if self.perp(x, y) != (class_of[x] == class_of[y]) {
                    return Err(Error::NotAnEquivalence);
                }
            }
        }
        Ok(classes)
    }

    /// Class index of every vertex under [`Self::perp_partition`].
    pub fn perp_class_vector(&self) -> Result<Vec<usize>> {
        let classes = self.perp_partition()?;
        let mut v = vec![0; self.n];
        for (i, c) in classes.iter().enumerate() {
            for &x in c {
                v[x] = i;
            }
        }
        Ok(v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("structure serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub(crate) fn check_permutation(o: &[usize], n: usize) -> Result<()> {
    if o.len() != n {
        return Err(Error::Malformed("order length differs from n".into()));
    }
    let mut seen = vec![false; n];
    for &v in o {
        if v >= n || seen[v] {
            return Err(Error::Malformed("order is not a permutation".into()));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Inverse of an order listing: `ranks(o)[v]` is the position of `v`.
pub fn ranks(order: &[usize]) -> Vec<usize> {
    let mut r = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        r[v] = i;
    }
    r
}

/// Renumbers class ids by first occurrence.
pub(crate) fn normalise_classes(ids: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    let mut out = Vec::with_capacity(ids.len());
    for &c in ids {
        let next = map.len();
        out.push(*map.entry(c).or_insert(next));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    n: usize,
    arcs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parts: Option<BTreeMap<String, u32>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    r: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<usize>>,
}

impl Serialize for FiniteStructure {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let parts = self.parts.as_ref().map(|p| {
            // Zero-padded keys keep the map in vertex order.
            let width = self.n.to_string().len();
            p.iter()
                .enumerate()
                .map(|(i, &l)| (format!("{i:0width$}"), l))
                .collect()
        });
        StructureJson {
            n: self.n,
            arcs: self.arc_list().into_iter().map(|(x, y)| [x, y]).collect(),
            parts,
            r: self.aux_list().map(|v| v.into_iter().map(|(x, y)| [x, y]).collect()),
            order: self.order.clone(),
            classes: self.equivalence.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FiniteStructure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = StructureJson::deserialize(de)?;
        let arcs: Vec<(usize, usize)> = j.arcs.iter().map(|a| (a[0], a[1])).collect();
        let mut s = FiniteStructure::from_arcs(j.n, &arcs).map_err(D::Error::custom)?;
        if let Some(p) = j.parts {
            let mut v = vec![0u32; j.n];
            for (k, l) in p {
                let i: usize = k.parse().map_err(D::Error::custom)?;
                if i >= j.n {
                    return Err(D::Error::custom(format!("part key {i} out of range")));
                }
                v[i] = l;
            }
            s.parts = Some(v);
        }
        if let Some(r) = j.r {
            let pairs: Vec<(usize, usize)> = r.iter().map(|a| (a[0], a[1])).collect();
            s.set_aux(Some(&pairs)).map_err(D::Error::custom)?;
        }
        s.set_order(j.order).map_err(D::Error::custom)?;
        s.set_equivalence(j.classes).map_err(D::Error::custom)?;
        s.check_well_formed().map_err(D::Error::custom)?;
        Ok(s)
    }
}

/// Iterates over all permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = Some((0..n).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut p = out.clone();
        cur = if next_permutation(&mut p) { Some(p) } else { None };
        Some(out)
    })
}

/// Advances `p` to the next lexicographic permutation; false at the last one.
pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All `k`-element subsets of `0..n`, each sorted, in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}
