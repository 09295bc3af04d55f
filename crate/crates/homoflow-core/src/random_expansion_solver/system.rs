use super::lp::{q, EqSystem, Q};
use crate::error::{Error, Result};
use crate::expansion_classes::{enumerate_expansions, Expansion};
use crate::structures::{
    automorphisms, canonical_form, enumerate_embeddings, is_embedding, subsets, validate_structure,
    CanonicalForm, ClassSpec, FiniteStructure,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One stored embedding `structures[from] -> structures[to]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentEmbedding {
    pub from: usize,
    pub to: usize,
    pub map: Vec<usize>,
}

/// Finitely many structures of an age with representative embeddings
/// between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub structures: Vec<FiniteStructure>,
    pub embeddings: Vec<FragmentEmbedding>,
}

/// Representatives of the embeddings `a -> b` modulo automorphisms of `b`
/// acting on images (precomposition with automorphisms of `a` is covered
/// by the isomorphism rows).
fn embedding_representatives(a: &FiniteStructure, b: &FiniteStructure) -> Vec<Vec<usize>> {
    let auts = automorphisms(b);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for e in enumerate_embeddings(a, b) {
        let orbit_key = auts
            .iter()
            .map(|s| {
                let mut img: Vec<usize> = e.map.iter().map(|&v| s[v]).collect();
                img.sort_unstable();
                img
            })
            .min()
            .unwrap_or_default();
        if seen.insert(orbit_key) {
            out.push(e.map);
        }
    }
    out
}

impl Fragment {
    /// Exactly the given structures (deduplicated up to isomorphism) with
    /// representative embeddings between every pair of distinct sizes.
    pub fn from_structures(spec: &ClassSpec, structures: Vec<FiniteStructure>) -> Result<Fragment> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for s in structures {
            if !validate_structure(&s, spec)? {
                return Err(Error::Domain(format!("fragment member is not in the age `{}`", spec.tag())));
            }
            if seen.insert(canonical_form(&s)) {
                kept.push(s);
            }
        }
        let mut embeddings = Vec::new();
        for (i, a) in kept.iter().enumerate() {
            for (j, b) in kept.iter().enumerate() {
                if a.len() < b.len() {
                    for map in embedding_representatives(a, b) {
                        embeddings.push(FragmentEmbedding { from: i, to: j, map });
                    }
                }
            }
        }
        Ok(Fragment { name: None, structures: kept, embeddings })
    }

    /// Closes `tops` under nonempty substructures up to isomorphism. The tops
    /// keep their vertex numbering.
    pub fn closed(spec: &ClassSpec, tops: Vec<FiniteStructure>) -> Result<Fragment> {
        let mut all: BTreeMap<CanonicalForm, FiniteStructure> = BTreeMap::new();
        let mut order = Vec::new();
        for t in &tops {
            let key = canonical_form(t);
            if !all.contains_key(&key) {
                all.insert(key.clone(), t.clone());
                order.push(key);
            }
        }
        for t in &tops {
            for k in 1..t.len() {
                for sub in subsets(t.len(), k) {
                    let s = t.induced(&sub);
                    let key = canonical_form(&s);
                    if !all.contains_key(&key) {
                        all.insert(key.clone(), s);
                        order.push(key);
                    }
                }
            }
        }
        let list: Vec<FiniteStructure> = order.into_iter().map(|k| all.remove(&k).expect("present")).collect();
        Fragment::from_structures(spec, list)
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// Structures in the age and every stored map an embedding.
    pub fn validate(&self, spec: &ClassSpec) -> Result<()> {
        for s in &self.structures {
            s.check_well_formed()?;
            if !validate_structure(s, spec)? {
                return Err(Error::Domain(format!("fragment member is not in the age `{}`", spec.tag())));
            }
        }
        for (i, e) in self.embeddings.iter().enumerate() {
            let (Some(a), Some(b)) = (self.structures.get(e.from), self.structures.get(e.to)) else {
                return Err(Error::Embedding(format!("embedding {i} references a missing structure")));
            };
            if !is_embedding(a, b, &e.map) {
                return Err(Error::Embedding(format!("embedding {i} is not an embedding")));
            }
        }
        Ok(())
    }
}

/// Provenance of a row of the constraint system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RowRef {
    /// Weights of one structure sum to one.
    Probability { structure: usize },
    /// Weight of `expansion` equals the total weight of its extensions
    /// along the stored embedding.
    Extension { embedding: usize, expansion: Expansion },
    /// Isomorphic expansions of one structure have equal weight.
    Isomorphism { structure: usize, left: Expansion, right: Expansion },
}

/// `Σ coeffs · x = rhs` over `(structure, expansion)` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub reference: RowRef,
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: i64,
}

/// The linear system of a fragment.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub spec: ClassSpec,
    pub fragment: Fragment,
    /// Expansions of each fragment structure, in enumeration order.
    pub expansions: Vec<Vec<Expansion>>,
    /// Index of the first variable of each structure.
    pub offsets: Vec<usize>,
    pub rows: Vec<Row>,
}

impl LinearSystem {
    pub fn num_vars(&self) -> usize {
        self.expansions.iter().map(Vec::len).sum()
    }

    /// `(structure, expansion index)` of a variable.
    pub fn var_owner(&self, v: usize) -> (usize, usize) {
        let s = self.offsets.partition_point(|&o| o <= v) - 1;
        (s, v - self.offsets[s])
    }

    pub fn var_of(&self, structure: usize, e: &Expansion) -> Option<usize> {
        let list = self.expansions.get(structure)?;
        list.binary_search(e).ok().map(|i| self.offsets[structure] + i)
    }

    pub fn expansion_of(&self, v: usize) -> &Expansion {
        let (s, i) = self.var_owner(v);
        &self.expansions[s][i]
    }

    pub(crate) fn eq_system(&self) -> EqSystem {
        EqSystem {
            cols: self.num_vars(),
            rows: self
                .rows
                .iter()
                .map(|r| (r.coeffs.iter().map(|&(j, c)| (j, q(c))).collect(), q(r.rhs)))
                .collect(),
        }
    }

    /// Rebuilds the row named by `r`, or explains why it does not exist.
    pub fn instantiate(&self, r: &RowRef) -> std::result::Result<Row, String> {
        match r {
            RowRef::Probability { structure } => {
                let list = self.expansions.get(*structure).ok_or("no such structure")?;
                let o = self.offsets[*structure];
                Ok(Row { reference: r.clone(), coeffs: (0..list.len()).map(|i| (o + i, 1)).collect(), rhs: 1 })
            }
            RowRef::Extension { embedding, expansion } => {
                let emb = self.fragment.embeddings.get(*embedding).ok_or("no such embedding")?;
                let lhs = self.var_of(emb.from, expansion).ok_or("expansion is not an expansion of the domain")?;
                let mut coeffs = vec![(lhs, 1)];
                let o = self.offsets[emb.to];
                for (i, be) in self.expansions[emb.to].iter().enumerate() {
                    if be.restricts_to(&emb.map, expansion) {
                        coeffs.push((o + i, -1));
                    }
                }
                Ok(Row { reference: r.clone(), coeffs, rhs: 0 })
            }
            RowRef::Isomorphism { structure, left, right } => {
                let a = self.var_of(*structure, left).ok_or("left expansion not found")?;
                let b = self.var_of(*structure, right).ok_or("right expansion not found")?;
                if a == b || left.canonical_form() != right.canonical_form() {
                    return Err("expansions are not distinct isomorphic copies".into());
                }
                Ok(Row { reference: r.clone(), coeffs: vec![(a, 1), (b, -1)], rhs: 0 })
            }
        }
    }

    /// Human-readable `Σ c·x[s:i] = rhs`.
    pub fn render(&self, row: &Row) -> String {
        let terms: Vec<String> = row
            .coeffs
            .iter()
            .map(|&(v, c)| {
                let (s, i) = self.var_owner(v);
                let sign = if c < 0 { "-" } else { "+" };
                let mag = c.unsigned_abs();
                if mag == 1 {
                    format!("{sign} x[{s}:{i}]")
                } else {
                    format!("{sign} {mag}·x[{s}:{i}]")
                }
            })
            .collect();
        format!("{} = {}", terms.join(" ").trim_start_matches("+ "), row.rhs)
    }
}

/// Probability rows, one extension row per (stored embedding, domain
/// expansion) and isomorphism rows chaining each isomorphism class.
pub fn build_constraints(spec: &ClassSpec, frag: &Fragment) -> Result<LinearSystem> {
    frag.validate(spec)?;
    let mut expansions = Vec::with_capacity(frag.structures.len());
    let mut offsets = Vec::with_capacity(frag.structures.len());
    let mut total = 0;
    for s in &frag.structures {
        let list = enumerate_expansions(spec, s)?;
        offsets.push(total);
        total += list.len();
        expansions.push(list);
    }
    let mut sys = LinearSystem { spec: spec.clone(), fragment: frag.clone(), expansions, offsets, rows: Vec::new() };
    let mut refs = Vec::new();
    for s in 0..frag.structures.len() {
        refs.push(RowRef::Probability { structure: s });
    }
    for (k, emb) in frag.embeddings.iter().enumerate() {
        for e in &sys.expansions[emb.from] {
            refs.push(RowRef::Extension { embedding: k, expansion: e.clone() });
        }
    }
    for (s, list) in sys.expansions.iter().enumerate() {
        let mut classes: BTreeMap<CanonicalForm, Vec<&Expansion>> = BTreeMap::new();
        for e in list {
            classes.entry(e.canonical_form()).or_default().push(e);
        }
        for members in classes.values() {
            for w in members.windows(2) {
                refs.push(RowRef::Isomorphism { structure: s, left: w[0].clone(), right: w[1].clone() });
            }
        }
    }
    let mut rows = Vec::with_capacity(refs.len());
    for r in refs {
        rows.push(sys.instantiate(&r).map_err(Error::Domain)?);
    }
    sys.rows = rows;
    Ok(sys)
}

/// True iff `x` satisfies every row exactly.
pub(crate) fn satisfies(sys: &LinearSystem, x: &[Q]) -> bool {
    sys.rows.iter().all(|r| {
        let lhs: Q = r.coeffs.iter().map(|&(v, c)| &x[v] * q(c)).sum();
        lhs == q(r.rhs)
    })
}
