//! Precompact expansions of every age in scope: enumeration, validation,
//! restriction and relative counts.

mod closed_form;
mod ep;
mod hat;
mod semigeneric;

pub use closed_form::{closed_form_count, closed_form_total};
pub use ep::bounded_expansion_property_search;
pub use hat::{delta, delta_inverse, hatq_full_expansions, qhat_expansion_iso, rotation};
pub use semigeneric::{
    amalgamate_transversal, amalgamate_with_bits, complete_fourth_edge, semigeneric_witness,
    sr_column_order,
};

use crate::error::{Error, Result};
use crate::structures::{
    enumerate_embeddings, hatq_completion, is_embedding, max_vertices,
    p3_labelings, permutations, ranks, s_n_labelings, validate_structure, CanonicalForm,
    ClassSpec, Coloured, Embedding, FiniteStructure,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Multiplier separating quotient labels from class labels in composite
/// expansions.
pub const COMPOSITE_LABEL_BASE: u32 = 1 << 16;

/// A base structure plus the relations an expansion adds: a linear order
/// (least first), unary labels and an auxiliary binary relation `R`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expansion {
    pub base: FiniteStructure,
    pub order: Option<Vec<usize>>,
    pub labels: Option<Vec<u32>>,
    pub aux: Option<Vec<(usize, usize)>>,
}

impl Expansion {
    pub fn new(base: FiniteStructure) -> Self {
        Expansion { base, order: None, labels: None, aux: None }
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.order = Some(order);
        self
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn with_aux(mut self, mut aux: Vec<(usize, usize)>) -> Self {
        aux.sort_unstable();
        self.aux = Some(aux);
        self
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Strict order test `x < y`; false without an order.
    pub fn less(&self, x: usize, y: usize) -> bool {
        match &self.order {
            Some(o) => {
                let r = ranks(o);
                r[x] < r[y]
            }
            None => false,
        }
    }

    pub fn aux_has(&self, x: usize, y: usize) -> bool {
        self.aux.as_ref().is_some_and(|a| a.binary_search(&(x, y)).is_ok())
    }

    /// Checks that the decoration fits the base.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.base.len();
        if let Some(o) = &self.order {
            let mut seen = vec![false; n];
            if o.len() != n || o.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
                return Err(Error::Malformed("expansion order is not a permutation".into()));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != n {
                return Err(Error::Malformed("label vector length differs from n".into()));
            }
        }
        if let Some(a) = &self.aux {
            if a.iter().any(|&(x, y)| x >= n || y >= n || x == y) {
                return Err(Error::Malformed("R pair out of range".into()));
            }
        }
        Ok(())
    }

    /// Flattened view with every relation of base and expansion.
    pub fn coloured(&self) -> Coloured {
        let mut c = Coloured::from(&self.base);
        if let Some(o) = &self.order {
            c.add_order(o, Coloured::LESS2);
        }
        if let Some(l) = &self.labels {
            c.add_colours(l);
        }
        if let Some(a) = &self.aux {
            for &(x, y) in a {
                c.set_bit(x, y, Coloured::AUX);
            }
        }
        c
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        crate::structures::canonical_coloured_form(&self.coloured())
    }

    /// The expansion pulled back along `map`, a vertex map from a structure
    /// on `sub.len()` vertices into `self.base`.
    pub fn restrict_to(&self, sub: &FiniteStructure, map: &[usize]) -> Expansion {
        let (order, labels, aux) = self.restricted_parts(map);
        Expansion { base: sub.clone(), order, labels, aux }
    }

    /// Restriction along a checked embedding of `sub` into the base.
    pub fn restrict(&self, sub: &FiniteStructure, emb: &Embedding) -> Result<Expansion> {
        if !is_embedding(sub, &self.base, &emb.map) {
            return Err(Error::Embedding("map does not embed the domain".into()));
        }
        Ok(self.restrict_to(sub, &emb.map))
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn restricted_parts(
        &self,
        map: &[usize],
    ) -> (Option<Vec<usize>>, Option<Vec<u32>>, Option<Vec<(usize, usize)>>) {
        let order = self.order.as_ref().map(|o| {
            let r = ranks(o);
            let mut local: Vec<usize> = (0..map.len()).collect();
            local.sort_by_key(|&i| r[map[i]]);
            local
        });
        let labels = self.labels.as_ref().map(|l| map.iter().map(|&v| l[v]).collect());
        let aux = self.aux.as_ref().map(|_| {
            let mut v = Vec::new();
            for (i, &x) in map.iter().enumerate() {
                for (j, &y) in map.iter().enumerate() {
                    if i != j && self.aux_has(x, y) {
                        v.push((i, j));
                    }
                }
            }
            v
        });
        (order, labels, aux)
    }

    /// True iff the restriction along `map` has the decoration of `other`.
    pub fn restricts_to(&self, map: &[usize], other: &Expansion) -> bool {
        let (o, l, a) = self.restricted_parts(map);
        o == other.order && l == other.labels && a == other.aux
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("expansion serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    base: FiniteStructure,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<BTreeMap<String, u32>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    r: Option<Vec<[usize; 2]>>,
}

impl Serialize for Expansion {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let width = self.base.len().to_string().len();
        ExpansionJson {
            base: self.base.clone(),
            order: self.order.clone(),
            labels: self.labels.as_ref().map(|l| {
                l.iter().enumerate().map(|(i, &v)| (format!("{i:0width$}"), v)).collect()
            }),
            r: self.aux.as_ref().map(|a| a.iter().map(|&(x, y)| [x, y]).collect()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Expansion {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ExpansionJson::deserialize(de)?;
        let n = j.base.len();
        let labels = match j.labels {
            Some(m) => {
                let mut v = vec![0u32; n];
                if m.len() != n {
                    return Err(D::Error::custom("labels must cover every vertex"));
                }
                for (k, l) in m {
                    let i: usize = k.parse().map_err(D::Error::custom)?;
                    if i >= n {
                        return Err(D::Error::custom(format!("label key {i} out of range")));
                    }
                    v[i] = l;
                }
                Some(v)
            }
            None => None,
        };
        let mut e = Expansion { base: j.base, order: j.order, labels, aux: None };
        if let Some(r) = j.r {
            e = e.with_aux(r.iter().map(|p| (p[0], p[1])).collect());
        }
        e.check_shape().map_err(D::Error::custom)?;
        Ok(e)
    }
}

/// `#(A)` and the relative counts `#(A*, B)` along one embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionCount {
    pub total: u64,
    /// Indexed by position in `enumerate_expansions(spec, a)`.
    pub relative: BTreeMap<usize, u64>,
}

fn check_input(spec: &ClassSpec, a: &FiniteStructure) -> Result<()> {
    let bound = max_vertices();
    if a.len() > bound {
        return Err(Error::BoundExceeded { size: a.len(), bound });
    }
    if !validate_structure(a, spec)? {
        return Err(Error::Domain(format!("structure is not in the age `{}`", spec.tag())));
    }
    Ok(())
}

/// Every expansion of `a` in the expansion class of `spec`, sorted and
/// duplicate free.
pub fn enumerate_expansions(spec: &ClassSpec, a: &FiniteStructure) -> Result<Vec<Expansion>> {
    check_input(spec, a)?;
    let mut out = expansions_unchecked(spec, a)?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub(crate) fn expansions_unchecked(spec: &ClassSpec, a: &FiniteStructure) -> Result<Vec<Expansion>> {
    let n = a.len();
    let with_orders = |orders: Vec<Vec<usize>>| -> Vec<Expansion> {
        orders.into_iter().map(|o| Expansion::new(a.clone()).with_order(o)).collect()
    };
    Ok(match spec {
        ClassSpec::Tournaments
        | ClassSpec::EdgelessAge
        | ClassSpec::GnAge(_)
        | ClassSpec::FTAge(_) => with_orders(permutations(n).collect()),
        ClassSpec::QAge => {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by_key(|&x| a.in_degree(x));
            with_orders(vec![o])
        }
        ClassSpec::PosetAge => with_orders(linear_extensions(n, &|x, y| a.has_arc(x, y))),
        ClassSpec::S2Age | ClassSpec::S3Age => {
            let k = if matches!(spec, ClassSpec::S2Age) { 2 } else { 3 };
            s_n_labelings(a, k).into_iter().map(|l| Expansion::new(a.clone()).with_labels(l)).collect()
        }
        ClassSpec::P3Age => {
            let mut out = Vec::new();
            for (lab, less) in p3_labelings(a) {
                for o in linear_extensions(n, &|x, y| less[x * n + y]) {
                    out.push(Expansion::new(a.clone()).with_order(o).with_labels(lab.clone()));
                }
            }
            out
        }
        ClassSpec::DomegaAge => with_orders(convex_orders(&a.perp_partition()?)),
        ClassSpec::DnAge(m) => dn_expansions(a, *m)?,
        ClassSpec::HatTAge => hat_t_expansions(a)?,
        ClassSpec::HatQAge => hat_q_expansions(a)?,
        ClassSpec::SemiGenericAge => semigeneric::expansions(a)?,
        ClassSpec::SemiGenericRAge => {
            let classes = a.perp_partition()?;
            let cols = sr_column_order(a)
                .ok_or_else(|| Error::Domain("R does not determine a column order".into()))?;
            let ordered: Vec<&Vec<usize>> = cols.iter().map(|&c| &classes[c]).collect();
            with_orders(within_orders(&ordered))
        }
        ClassSpec::Composition(k, l) => composite_expansions(a, k, l)?,
        ClassSpec::TreeLeafAge | ClassSpec::OrderedTreeLeafAge => {
            return Err(Error::Unsupported("leaf structures are handled by the trees module".into()))
        }
    })
}

/// True iff expansions of `spec` carry unary labels.
pub fn carries_labels(spec: &ClassSpec) -> bool {
    match spec {
        ClassSpec::S2Age
        | ClassSpec::S3Age
        | ClassSpec::P3Age
        | ClassSpec::DnAge(_)
        | ClassSpec::HatTAge
        | ClassSpec::HatQAge => true,
        ClassSpec::Composition(k, l) => carries_labels(k) || carries_labels(l),
        _ => false,
    }
}

/// All linear extensions of the strict order `less`, as least-first listings.
pub fn linear_extensions(n: usize, less: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn go(
        n: usize,
        less: &dyn Fn(usize, usize) -> bool,
        used: &mut [bool],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if used[v] || (0..n).any(|u| !used[u] && u != v && less(u, v)) {
                continue;
            }
            used[v] = true;
            cur.push(v);
            go(n, less, used, cur, out);
            cur.pop();
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    go(n, less, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// Orders listing the classes contiguously, in every class order and every
/// order inside each class.
pub fn convex_orders(classes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for p in permutations(classes.len()) {
        let ordered: Vec<&Vec<usize>> = p.iter().map(|&i| &classes[i]).collect();
        out.extend(within_orders(&ordered));
    }
    out
}

/// Concatenations of every permutation of each class, classes kept in the
/// given sequence.
pub(crate) fn within_orders(classes: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for c in classes {
        let mut next = Vec::new();
        for prefix in &acc {
            for p in permutations(c.len()) {
                let mut v = prefix.clone();
                v.extend(p.iter().map(|&i| c[i]));
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// True iff every class is an interval of `order`.
pub fn is_convex(order: &[usize], class_of: &[usize]) -> bool {
    let mut closed = BTreeSet::new();
    let mut current = None;
    for &v in order {
        let c = class_of[v];
        if current != Some(c) {
            if closed.contains(&c) {
                return false;
            }
            if let Some(p) = current {
                closed.insert(p);
            }
            current = Some(c);
        }
    }
    true
}

/// Class indices in the sequence they appear in a convex order.
pub(crate) fn class_sequence(order: &[usize], class_of: &[usize]) -> Vec<usize> {
    let mut seq: Vec<usize> = Vec::new();
    for &v in order {
        if seq.last() != Some(&class_of[v]) {
            seq.push(class_of[v]);
        }
    }
    seq
}

fn dn_expansions(a: &FiniteStructure, m: usize) -> Result<Vec<Expansion>> {
    let classes = a.perp_partition()?;
    let k = classes.len();
    let mut out = Vec::new();
    // Injective labels 1..=m on classes; classes listed by increasing label.
    for pick in crate::structures::subsets(m, k) {
        for p in permutations(k) {
            let mut labels = vec![0u32; a.len()];
            let mut by_label: Vec<(usize, usize)> = Vec::new();
            for (ci, &slot) in p.iter().enumerate() {
                let lab = pick[slot] + 1;
                for &x in &classes[ci] {
                    labels[x] = lab as u32;
                }
                by_label.push((lab, ci));
            }
            by_label.sort_unstable();
            let ordered: Vec<&Vec<usize>> = by_label.iter().map(|&(_, c)| &classes[c]).collect();
            for o in within_orders(&ordered) {
                out.push(Expansion::new(a.clone()).with_order(o).with_labels(labels.clone()));
            }
        }
    }
    Ok(out)
}

fn hat_t_expansions(a: &FiniteStructure) -> Result<Vec<Expansion>> {
    let classes = a.perp_partition()?;
    let singles: Vec<usize> = classes.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
    let mut out = Vec::new();
    for o in convex_orders(&classes) {
        let r = ranks(&o);
        let mut base_labels = vec![0u32; a.len()];
        for c in classes.iter().filter(|c| c.len() == 2) {
            let (x, y) = (c[0], c[1]);
            let (first, second) = if r[x] < r[y] { (x, y) } else { (y, x) };
            base_labels[first] = 0;
            base_labels[second] = 1;
        }
        for mask in 0u32..(1 << singles.len()) {
            let mut labels = base_labels.clone();
            for (i, &x) in singles.iter().enumerate() {
                labels[x] = (mask >> i) & 1;
            }
            out.push(Expansion::new(a.clone()).with_order(o.clone()).with_labels(labels));
        }
    }
    Ok(out)
}

fn hat_q_expansions(a: &FiniteStructure) -> Result<Vec<Expansion>> {
    let comp = hatq_completion(a).ok_or_else(|| Error::Domain("no full-cover completion".into()))?;
    if a.is_empty() {
        return Ok(vec![Expansion::new(a.clone()).with_order(vec![]).with_labels(vec![])]);
    }
    let full = crate::structures::builders::hatq_full(comp.k);
    let full_exps = hatq_full_expansions(comp.k);
    let mut out = BTreeSet::new();
    for emb in enumerate_embeddings(a, &full) {
        for e in &full_exps {
            out.insert(e.restrict_to(a, &emb.map));
        }
    }
    Ok(out.into_iter().collect())
}

fn composite_expansions(a: &FiniteStructure, k: &ClassSpec, l: &ClassSpec) -> Result<Vec<Expansion>> {
    let cs = crate::composition::quotient_structure(a)?;
    let q_exps = expansions_unchecked(k, &cs.quotient)?;
    let mut class_exps = Vec::new();
    for c in &cs.classes {
        class_exps.push(expansions_unchecked(l, c)?);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; class_exps.len()];
    if class_exps.iter().any(|v| v.is_empty()) {
        return Ok(out);
    }
    for qe in &q_exps {
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            let parts: Vec<&Expansion> = idx.iter().enumerate().map(|(c, &i)| &class_exps[c][i]).collect();
            out.push(crate::composition::flatten_expansion(a, &cs, qe, &parts)?);
            let mut c = 0;
            loop {
                if c == idx.len() {
                    break;
                }
                idx[c] += 1;
                if idx[c] < class_exps[c].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
            if c == idx.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// True iff `e` satisfies every clause of the expansion class of `spec`.
pub fn validate_expansion(spec: &ClassSpec, e: &Expansion) -> bool {
    if e.check_shape().is_err() || !matches!(validate_structure(&e.base, spec), Ok(true)) {
        return false;
    }
    let a = &e.base;
    let n = a.len();
    let only_order = e.labels.is_none() && e.aux.is_none() && e.order.is_some();
    match spec {
        ClassSpec::Tournaments
        | ClassSpec::EdgelessAge
        | ClassSpec::GnAge(_)
        | ClassSpec::FTAge(_) => only_order,
        ClassSpec::QAge => {
            only_order && (0..n).all(|x| (0..n).all(|y| !a.has_arc(x, y) || e.less(x, y)))
        }
        ClassSpec::PosetAge => {
            only_order && (0..n).all(|x| (0..n).all(|y| !a.has_arc(x, y) || e.less(x, y)))
        }
        ClassSpec::S2Age | ClassSpec::S3Age => {
            let k = if matches!(spec, ClassSpec::S2Age) { 2 } else { 3 };
            e.order.is_none()
                && e.aux.is_none()
                && e.labels.as_ref().is_some_and(|l| s_n_labelings(a, k).contains(l))
        }
        ClassSpec::P3Age => {
            let (Some(o), Some(l)) = (&e.order, &e.labels) else { return false };
            if e.aux.is_some() || l.iter().any(|&x| x > 2) {
                return false;
            }
            let less = crate::structures::untwist_labels(a, l);
            let r = ranks(o);
            crate::structures::is_strict_order_matrix(n, &less)
                && (0..n).all(|x| (0..n).all(|y| !less[x * n + y] || r[x] < r[y]))
        }
        ClassSpec::DomegaAge => {
            only_order && is_convex(e.order.as_ref().unwrap(), &a.perp_class_vector().unwrap())
        }
        ClassSpec::DnAge(m) => valid_dn(e, *m),
        ClassSpec::HatTAge => valid_hat_t(e),
        ClassSpec::HatQAge => valid_hat_q(e),
        ClassSpec::SemiGenericAge => semigeneric_witness(e).is_some(),
        ClassSpec::SemiGenericRAge => {
            if !only_order {
                return false;
            }
            let class_of = a.perp_class_vector().unwrap();
            let o = e.order.as_ref().unwrap();
            is_convex(o, &class_of) && sr_column_order(a).is_some_and(|c| c == class_sequence(o, &class_of))
        }
        ClassSpec::Composition(..) => {
            expansions_unchecked(spec, a).map(|v| v.contains(e)).unwrap_or(false)
        }
        ClassSpec::TreeLeafAge | ClassSpec::OrderedTreeLeafAge => false,
    }
}

fn valid_dn(e: &Expansion, m: usize) -> bool {
    let (Some(o), Some(l)) = (&e.order, &e.labels) else { return false };
    if e.aux.is_some() {
        return false;
    }
    let class_of = e.base.perp_class_vector().unwrap();
    if !is_convex(o, &class_of) {
        return false;
    }
    if l.iter().any(|&x| x == 0 || x as usize > m) {
        return false;
    }
    let n = e.base.len();
    for x in 0..n {
        for y in 0..n {
            if (class_of[x] == class_of[y]) != (l[x] == l[y]) {
                return false;
            }
        }
    }
    // Classes appear by increasing label.
    o.windows(2).all(|w| l[w[0]] <= l[w[1]])
}

fn valid_hat_t(e: &Expansion) -> bool {
    let (Some(o), Some(l)) = (&e.order, &e.labels) else { return false };
    if e.aux.is_some() || l.iter().any(|&x| x > 1) {
        return false;
    }
    let class_of = e.base.perp_class_vector().unwrap();
    if !is_convex(o, &class_of) {
        return false;
    }
    let r = ranks(o);
    for c in e.base.perp_partition().unwrap() {
        if c.len() == 2 {
            let (first, second) = if r[c[0]] < r[c[1]] { (c[0], c[1]) } else { (c[1], c[0]) };
            if l[first] != 0 || l[second] != 1 {
                return false;
            }
        }
    }
    true
}

/// Accepts iff the expansion is the pull-back of a transversal expansion of
/// the full cover along some embedding.
fn valid_hat_q(e: &Expansion) -> bool {
    if e.aux.is_some() || e.order.is_none() || e.labels.is_none() {
        return false;
    }
    let Some(comp) = hatq_completion(&e.base) else { return false };
    if e.base.is_empty() {
        return true;
    }
    let full = crate::structures::builders::hatq_full(comp.k);
    let full_exps = hatq_full_expansions(comp.k);
    let mut found = false;
    crate::structures::for_each_embedding(&e.base, &full, &mut |m| {
        if full_exps.iter().any(|f| f.restricts_to(m, e)) {
            found = true;
            return false;
        }
        true
    });
    found
}

/// Number of expansions of `b` whose restriction along `emb` is `a_star`.
pub fn count_relative_expansions(
    spec: &ClassSpec,
    a_star: &Expansion,
    b: &FiniteStructure,
    emb: &Embedding,
) -> Result<u64> {
    if !is_embedding(&a_star.base, b, &emb.map) {
        return Err(Error::Embedding("map does not embed the base of the expansion".into()));
    }
    let exps = enumerate_expansions(spec, b)?;
    Ok(exps.iter().filter(|e| e.restricts_to(&emb.map, a_star)).count() as u64)
}

/// `#(A)` together with `#(A*, B)` for every expansion of `a`, along the
/// first embedding of `a` into `b`.
pub fn expansion_count(spec: &ClassSpec, a: &FiniteStructure, b: &FiniteStructure) -> Result<ExpansionCount> {
    let a_exps = enumerate_expansions(spec, a)?;
    let b_exps = enumerate_expansions(spec, b)?;
    let emb = crate::structures::first_embedding(a, b)
        .ok_or_else(|| Error::Embedding("the first structure does not embed".into()))?;
    let mut relative = BTreeMap::new();
    for (i, ae) in a_exps.iter().enumerate() {
        let c = b_exps.iter().filter(|e| e.restricts_to(&emb.map, ae)).count() as u64;
        relative.insert(i, c);
    }
    Ok(ExpansionCount { total: a_exps.len() as u64, relative })
}
