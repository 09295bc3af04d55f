//! Compositions `K[L]`: each point of a `K`-structure blown up into an
//! `L`-structure, with an explicit congruence. Product expansions,
//! product measures and the lift of extension witnesses.

use crate::error::{Error, Result};
use crate::expansion_classes::{class_sequence, is_convex, Expansion, COMPOSITE_LABEL_BASE};
use crate::hrushovski::{is_automorphism, Extension, PartialIsoSystem, PartialMap};
use crate::random_expansion_solver::RandomExpansionMeasure;
use crate::structures::{validate_structure, ClassSpec, FiniteStructure};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// A composite `(quotient : classes)` with its flattening. Class `i`
/// occupies the vertices `members[i]` of the flattening.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeStructure {
    pub quotient: FiniteStructure,
    pub classes: Vec<FiniteStructure>,
    pub members: Vec<Vec<usize>>,
    pub flattening: FiniteStructure,
}

impl CompositeStructure {
    /// Class index of every flattened vertex.
    pub fn class_of(&self) -> Vec<usize> {
        let mut v = vec![0; self.flattening.len()];
        for (c, m) in self.members.iter().enumerate() {
            for &x in m {
                v[x] = c;
            }
        }
        v
    }

    /// Position of every flattened vertex inside its class.
    pub fn local_index(&self) -> Vec<usize> {
        let mut v = vec![0; self.flattening.len()];
        for m in &self.members {
            for (j, &x) in m.iter().enumerate() {
                v[x] = j;
            }
        }
        v
    }
}

fn plain(s: &FiniteStructure, what: &str) -> Result<()> {
    if s.parts().is_some() || s.has_aux() || s.order().is_some() || s.equivalence().is_some() {
        return Err(Error::Signature(format!("{what} must be a plain digraph")));
    }
    Ok(())
}

/// Blows up vertex `i` of `q` into `parts[i]`: inside a class the part's
/// arcs, across classes `(x,i) -> (y,j)` iff `i -> j` in `q`.
pub fn compose(q: &FiniteStructure, parts: &[FiniteStructure]) -> Result<CompositeStructure> {
    if parts.len() != q.len() {
        return Err(Error::Signature(format!(
            "{} parts supplied for a quotient on {} vertices",
            parts.len(),
            q.len()
        )));
    }
    plain(q, "the quotient")?;
    for p in parts {
        plain(p, "every part")?;
    }
    let n: usize = parts.iter().map(FiniteStructure::len).sum();
    let mut members = Vec::with_capacity(parts.len());
    let mut class = Vec::with_capacity(n);
    let mut next = 0;
    for (i, p) in parts.iter().enumerate() {
        members.push((next..next + p.len()).collect::<Vec<_>>());
        class.extend(std::iter::repeat_n(i, p.len()));
        next += p.len();
    }
    let mut flat = FiniteStructure::new(n);
    for (i, p) in parts.iter().enumerate() {
        for (x, y) in p.arc_list() {
            flat.orient(members[i][x], members[i][y]);
        }
    }
    for x in 0..n {
        for y in 0..n {
            if class[x] != class[y] && q.has_arc(class[x], class[y]) {
                flat.orient(x, y);
            }
        }
    }
    flat.set_equivalence(Some(class))?;
    Ok(CompositeStructure { quotient: q.clone(), classes: parts.to_vec(), members, flattening: flat })
}

/// Splits a structure with an equivalence (the stored one, else the
/// no-arc classes) into quotient and classes.
pub fn quotient_structure(s: &FiniteStructure) -> Result<CompositeStructure> {
    if s.parts().is_some() || s.has_aux() || s.order().is_some() {
        return Err(Error::Signature("only arcs and the equivalence are supported".into()));
    }
    let class = match s.equivalence() {
        Some(e) => crate::structures::normalise_classes(e),
        None => s.perp_class_vector()?,
    };
    let k = class.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); k];
    for (x, &c) in class.iter().enumerate() {
        members[c].push(x);
    }
    let reps: Vec<usize> = members.iter().map(|m| m[0]).collect();
    for x in 0..s.len() {
        for y in 0..s.len() {
            let (cx, cy) = (class[x], class[y]);
            if cx != cy && s.has_arc(x, y) != s.has_arc(reps[cx], reps[cy]) {
                return Err(Error::NotACongruence(format!(
                    "arcs between classes {cx} and {cy} are not uniform"
                )));
            }
        }
    }
    let quotient = s.induced(&reps).digraph();
    let classes = members.iter().map(|m| s.induced(m).digraph()).collect();
    let mut flattening = s.clone();
    flattening.set_equivalence(Some(class))?;
    Ok(CompositeStructure { quotient, classes, members, flattening })
}

/// An expansion of the quotient together with one expansion per class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductExpansion {
    pub quotient: Expansion,
    pub classes: Vec<Expansion>,
}

/// Lexicographic flattening: classes in quotient order, each in its own
/// order; labels combine as `quotient * 2^16 + class`.
pub fn flatten_expansion(
    s: &FiniteStructure,
    cs: &CompositeStructure,
    qe: &Expansion,
    parts: &[&Expansion],
) -> Result<Expansion> {
    if qe.aux.is_some() || parts.iter().any(|p| p.aux.is_some()) {
        return Err(Error::Unsupported("composite expansions carry no auxiliary relation".into()));
    }
    let order = match (&qe.order, parts.iter().all(|p| p.order.is_some())) {
        (Some(qo), true) => {
            let mut o = Vec::with_capacity(s.len());
            for &c in qo {
                o.extend(parts[c].order.as_ref().expect("checked").iter().map(|&j| cs.members[c][j]));
            }
            Some(o)
        }
        (None, _) if parts.iter().all(|p| p.order.is_none()) => None,
        _ => return Err(Error::Unsupported("orders on only one factor".into())),
    };
    let labelled = qe.labels.is_some() || parts.iter().any(|p| p.labels.is_some());
    let labels = labelled.then(|| {
        let mut l = vec![0u32; s.len()];
        for (c, m) in cs.members.iter().enumerate() {
            let ql = qe.labels.as_ref().map_or(0, |v| v[c]);
            for (j, &x) in m.iter().enumerate() {
                let cl = parts[c].labels.as_ref().map_or(0, |v| v[j]);
                l[x] = ql * COMPOSITE_LABEL_BASE + cl;
            }
        }
        l
    });
    Ok(Expansion { base: s.clone(), order, labels, aux: None })
}

/// Inverse of [`flatten_expansion`] for the factor classes `k`, `l`.
pub fn decompose_expansion(
    k: &ClassSpec,
    l: &ClassSpec,
    cs: &CompositeStructure,
    e: &Expansion,
) -> Result<ProductExpansion> {
    let class_of = cs.class_of();
    let local = cs.local_index();
    let q_order = match &e.order {
        Some(o) => {
            if !is_convex(o, &class_of) {
                return Err(Error::Domain("order is not convex on the classes".into()));
            }
            Some(class_sequence(o, &class_of))
        }
        None => None,
    };
    let mut q_labels = vec![0u32; cs.members.len()];
    let mut class_labels: Vec<Vec<u32>> = cs.members.iter().map(|m| vec![0; m.len()]).collect();
    if let Some(lab) = &e.labels {
        for (c, m) in cs.members.iter().enumerate() {
            q_labels[c] = lab[m[0]] / COMPOSITE_LABEL_BASE;
            for (j, &x) in m.iter().enumerate() {
                if lab[x] / COMPOSITE_LABEL_BASE != q_labels[c] {
                    return Err(Error::Domain("quotient label varies inside a class".into()));
                }
                class_labels[c][j] = lab[x] % COMPOSITE_LABEL_BASE;
            }
        }
    }
    let mut quotient = Expansion::new(cs.quotient.clone());
    quotient.order = q_order;
    if crate::expansion_classes::carries_labels(k) {
        quotient.labels = Some(q_labels);
    }
    let mut classes = Vec::new();
    for c in 0..cs.members.len() {
        let mut ce = Expansion::new(cs.classes[c].clone());
        if let Some(o) = &e.order {
            ce.order = Some(o.iter().filter(|&&x| class_of[x] == c).map(|&x| local[x]).collect());
        }
        if crate::expansion_classes::carries_labels(l) {
            ce.labels = Some(class_labels[c].clone());
        }
        classes.push(ce);
    }
    Ok(ProductExpansion { quotient, classes })
}

/// `(nu ⊗ mu)(S*) = mu(quotient*) · ∏ nu(class_i*)`.
pub fn product_measure_eval(
    nu: &RandomExpansionMeasure,
    mu: &RandomExpansionMeasure,
    s: &CompositeStructure,
    s_star: &ProductExpansion,
) -> Result<BigRational> {
    if s_star.classes.len() != s.classes.len() {
        return Err(Error::Domain("one class expansion per class is required".into()));
    }
    let mut w = mu.weight(&s_star.quotient)?;
    for ce in &s_star.classes {
        w *= nu.weight(ce)?;
    }
    Ok(w)
}

/// Weight of a composite expansion under the product of the uniform
/// measures of `k` (on the quotient) and `l` (on every class).
pub fn uniform_product_weight<'a>(k: &'a ClassSpec, l: &'a ClassSpec) -> impl Fn(&Expansion) -> Result<BigRational> + Sync + 'a {
    move |e: &Expansion| {
        let cs = quotient_structure(&e.base)?;
        let pe = decompose_expansion(k, l, &cs, e)?;
        let nu = RandomExpansionMeasure::uniform(l, &cs.classes)?;
        let mu = RandomExpansionMeasure::uniform(k, std::slice::from_ref(&cs.quotient))?;
        product_measure_eval(&nu, &mu, &cs, &pe)
    }
}

/// The maps of a composite system split into one system on the quotient
/// and one on a merged `L`-structure holding a copy of every class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedSystems {
    pub quotient: PartialIsoSystem,
    pub parts: PartialIsoSystem,
    /// `part_map[i][c]`: index in `parts.maps` of the class map of map `i`
    /// on class `c`, if `c` is in its domain.
    pub part_map: Vec<Vec<Option<usize>>>,
    /// First vertex of each class copy inside `parts.ambient`.
    pub offsets: Vec<usize>,
}

/// Merges the classes into one `L`-structure: the disjoint union if it lies
/// in `L`, else the union with every arc pointing to the later copy.
fn merge_parts(classes: &[FiniteStructure], l: &ClassSpec) -> Result<(FiniteStructure, Vec<usize>)> {
    let n: usize = classes.iter().map(FiniteStructure::len).sum();
    let mut offsets = Vec::new();
    let mut union = FiniteStructure::new(n);
    let mut next = 0;
    for c in classes {
        offsets.push(next);
        for (x, y) in c.arc_list() {
            union.orient(next + x, next + y);
        }
        next += c.len();
    }
    if validate_structure(&union, l)? {
        return Ok((union, offsets));
    }
    let mut linked = union.clone();
    for (i, c) in classes.iter().enumerate() {
        for (j, d) in classes.iter().enumerate().skip(i + 1) {
            for x in 0..c.len() {
                for y in 0..d.len() {
                    linked.orient(offsets[i] + x, offsets[j] + y);
                }
            }
        }
    }
    if validate_structure(&linked, l)? {
        return Ok((linked, offsets));
    }
    Err(Error::Unsupported("no joint embedding of the classes was found".into()))
}

/// Projects partial isomorphisms of the flattening onto the quotient and
/// the merged classes.
pub fn project_partial_isos(
    cs: &CompositeStructure,
    maps: &[PartialMap],
    l: &ClassSpec,
) -> Result<ProjectedSystems> {
    let class_of = cs.class_of();
    let local = cs.local_index();
    let (ambient, offsets) = merge_parts(&cs.classes, l)?;
    let mut q_maps = Vec::new();
    let mut p_maps = Vec::new();
    let mut part_map = Vec::new();
    for p in maps {
        let mut qm: Vec<(usize, usize)> = Vec::new();
        for &(x, y) in p {
            let pair = (class_of[x], class_of[y]);
            match qm.iter().find(|&&(c, _)| c == pair.0) {
                Some(&(_, d)) if d != pair.1 => {
                    return Err(Error::Domain("map does not respect the congruence".into()))
                }
                Some(_) => {}
                None => qm.push(pair),
            }
        }
        qm.sort_unstable();
        let mut per_class = vec![None; cs.members.len()];
        for &(c, d) in &qm {
            let pm: Vec<(usize, usize)> = p
                .iter()
                .filter(|&&(x, _)| class_of[x] == c)
                .map(|&(x, y)| (offsets[c] + local[x], offsets[d] + local[y]))
                .collect();
            per_class[c] = Some(p_maps.len());
            p_maps.push(pm);
        }
        part_map.push(per_class);
        q_maps.push(qm);
    }
    let quotient = PartialIsoSystem::new(cs.quotient.clone(), q_maps)?;
    let parts = PartialIsoSystem::new(ambient, p_maps)?;
    Ok(ProjectedSystems { quotient, parts, part_map, offsets })
}

/// A composite witness: `E = (D : T, ..., T)` with an embedding of the
/// original composite and automorphisms extending the given maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedWitness {
    pub composite: CompositeStructure,
    pub embedding: Vec<usize>,
    pub automorphisms: Vec<Vec<usize>>,
}

fn check_factor(sys: &PartialIsoSystem, w: &Extension, what: &str) -> Result<()> {
    if w.automorphisms.len() != sys.maps.len() {
        return Err(Error::WitnessMismatch(format!("{what}: one automorphism per map is required")));
    }
    if !crate::structures::is_embedding(&sys.ambient, &w.witness, &w.embedding) {
        return Err(Error::WitnessMismatch(format!("{what}: the ambient does not embed")));
    }
    for (m, a) in sys.maps.iter().zip(&w.automorphisms) {
        if !is_automorphism(&w.witness, a) {
            return Err(Error::WitnessMismatch(format!("{what}: not an automorphism")));
        }
        if m.iter().any(|&(x, y)| a[w.embedding[x]] != w.embedding[y]) {
            return Err(Error::WitnessMismatch(format!("{what}: automorphism misses a pair")));
        }
    }
    Ok(())
}

/// Lifts extension witnesses of the projected systems to the composite:
/// `E = (D : T, ..., T)` and `psi((c, t)) = (phi'(c), tau_{c}(t))`.
pub fn hrushovski_product_lift(
    k_witness: &Extension,
    l_witness: &Extension,
    cs: &CompositeStructure,
    maps: &[PartialMap],
    l: &ClassSpec,
) -> Result<LiftedWitness> {
    let proj = project_partial_isos(cs, maps, l)?;
    check_factor(&proj.quotient, k_witness, "quotient witness")?;
    check_factor(&proj.parts, l_witness, "class witness")?;
    let d = &k_witness.witness;
    let t = &l_witness.witness;
    let e = compose(d, &vec![t.clone(); d.len()])?;
    let tl = t.len();
    let class_of = cs.class_of();
    let local = cs.local_index();
    let embedding: Vec<usize> = (0..cs.flattening.len())
        .map(|x| {
            let c = class_of[x];
            k_witness.embedding[c] * tl + l_witness.embedding[proj.offsets[c] + local[x]]
        })
        .collect();
    let mut automorphisms = Vec::new();
    for (i, phi) in k_witness.automorphisms.iter().enumerate() {
        let mut tau_of: Vec<Option<&Vec<usize>>> = vec![None; d.len()];
        for (c, slot) in proj.part_map[i].iter().enumerate() {
            if let Some(j) = slot {
                tau_of[k_witness.embedding[c]] = Some(&l_witness.automorphisms[*j]);
            }
        }
        let psi: Vec<usize> = (0..e.flattening.len())
            .map(|v| {
                let (dc, tt) = (v / tl, v % tl);
                let moved = tau_of[dc].map_or(tt, |tau| tau[tt]);
                phi[dc] * tl + moved
            })
            .collect();
        automorphisms.push(psi);
    }
    let lifted = LiftedWitness { composite: e, embedding, automorphisms };
    for (m, psi) in maps.iter().zip(&lifted.automorphisms) {
        if !is_automorphism(&lifted.composite.flattening, psi)
            || m.iter().any(|&(x, y)| psi[lifted.embedding[x]] != lifted.embedding[y])
        {
            return Err(Error::WitnessMismatch("lifted map fails verification".into()));
        }
    }
    Ok(lifted)
}
