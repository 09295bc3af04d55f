//! Bounded search for extensions of partial isomorphisms to automorphisms.

use crate::error::{Error, Result};
use crate::random_expansion_solver::{check_density_criterion, DensityOutcome};
use crate::structures::{
    age_members, age_up_to, automorphisms, enumerate_embeddings, is_embedding, ClassSpec,
    FiniteStructure,
};
use serde::{Deserialize, Serialize};

/// A partial map as `(x, image)` pairs.
pub type PartialMap = Vec<(usize, usize)>;

/// An ambient structure with partial isomorphisms between substructures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialIsoSystem {
    pub ambient: FiniteStructure,
    pub maps: Vec<PartialMap>,
}

impl PartialIsoSystem {
    /// Checks every map is injective and preserves and reflects all
    /// relations on its domain.
    pub fn new(ambient: FiniteStructure, maps: Vec<PartialMap>) -> Result<Self> {
        for (i, m) in maps.iter().enumerate() {
            if !is_partial_iso(&ambient, m) {
                return Err(Error::Domain(format!("map {i} is not a partial isomorphism")));
            }
        }
        Ok(PartialIsoSystem { ambient, maps })
    }
}

fn is_partial_iso(s: &FiniteStructure, m: &[(usize, usize)]) -> bool {
    let n = s.len();
    let dom: Vec<usize> = m.iter().map(|p| p.0).collect();
    let img: Vec<usize> = m.iter().map(|p| p.1).collect();
    let distinct = |v: &[usize]| (0..v.len()).all(|i| v[i] < n && !v[..i].contains(&v[i]));
    if !distinct(&dom) || !distinct(&img) {
        return false;
    }
    let (a, b) = (s.induced(&dom), s.induced(&img));
    let identity: Vec<usize> = (0..dom.len()).collect();
    is_embedding(&a, &b, &identity)
}

/// True iff `perm` is an automorphism of `s` (all relations).
pub fn is_automorphism(s: &FiniteStructure, perm: &[usize]) -> bool {
    let n = s.len();
    let mut seen = vec![false; n];
    perm.len() == n
        && perm.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
        && is_embedding(s, s, perm)
}

/// A structure containing the ambient (via `embedding`) together with one
/// automorphism per map, each extending its map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    pub witness: FiniteStructure,
    pub embedding: Vec<usize>,
    pub automorphisms: Vec<Vec<usize>>,
}

/// Searches age members with at most `size_bound` vertices, by size then
/// canonical form, for a witness extending every map. `None` is not a
/// refutation.
pub fn extend_partial_isos(
    sys: &PartialIsoSystem,
    spec: &ClassSpec,
    size_bound: usize,
) -> Result<Option<Extension>> {
    for m in sys.ambient.len()..=size_bound {
        for c in age_members(spec, m)? {
            if let Some(w) = try_witness_all_embeddings(sys, &c) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn try_witness_all_embeddings(sys: &PartialIsoSystem, c: &FiniteStructure) -> Option<Extension> {
    let embs = enumerate_embeddings(&sys.ambient, c);
    if embs.is_empty() {
        return None;
    }
    let auts = automorphisms(c);
    'emb: for emb in embs {
        let mut chosen = Vec::with_capacity(sys.maps.len());
        for m in &sys.maps {
            match auts.iter().find(|a| m.iter().all(|&(x, y)| a[emb.map[x]] == emb.map[y])) {
                Some(a) => chosen.push(a.clone()),
                None => continue 'emb,
            }
        }
        return Some(Extension { witness: c.clone(), embedding: emb.map, automorphisms: chosen });
    }
    None
}

/// Pointwise check of an extension against its system.
pub fn verify_extension(sys: &PartialIsoSystem, ext: &Extension) -> bool {
    ext.automorphisms.len() == sys.maps.len()
        && is_embedding(&sys.ambient, &ext.witness, &ext.embedding)
        && sys.maps.iter().zip(&ext.automorphisms).all(|(m, a)| {
            is_automorphism(&ext.witness, a)
                && m.iter().all(|&(x, y)| a[ext.embedding[x]] == ext.embedding[y])
        })
}

/// Outcome of comparing the extension route with the density route.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrushovskiReport {
    pub class: String,
    pub bound: usize,
    pub systems: usize,
    pub extended: usize,
    pub not_found: usize,
    pub density_pass: bool,
    /// Every system extended and density passed, or some system failed and
    /// density failed.
    pub consistent: bool,
}

/// Single-map systems on age members with at most three vertices, with
/// domains of size one or two, one per map up to duplicates.
pub fn sample_systems(spec: &ClassSpec) -> Result<Vec<PartialIsoSystem>> {
    let mut out = Vec::new();
    for a in age_up_to(spec, 3)? {
        let n = a.len();
        let mut maps: Vec<PartialMap> = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    maps.push(vec![(x, y)]);
                }
                for x2 in 0..n {
                    for y2 in 0..n {
                        if x2 > x && y2 != y && (x, y) != (x2, y2) {
                            maps.push(vec![(x, y), (x2, y2)]);
                        }
                    }
                }
            }
        }
        for m in maps {
            if is_partial_iso(&a, &m) && m.iter().any(|&(x, y)| x != y) {
                out.push(PartialIsoSystem { ambient: a.clone(), maps: vec![m] });
            }
        }
    }
    Ok(out)
}

/// Runs the sampled systems and the density check at the same bound.
pub fn hrushovski_implies_uniform_ok(spec: &ClassSpec, size_bound: usize) -> Result<HrushovskiReport> {
    let systems = sample_systems(spec)?;
    let mut extended = 0;
    for s in &systems {
        if extend_partial_isos(s, spec, size_bound)?.is_some() {
            extended += 1;
        }
    }
    let density_pass = matches!(check_density_criterion(spec, size_bound)?, DensityOutcome::Pass { .. });
    let all = extended == systems.len();
    Ok(HrushovskiReport {
        class: spec.tag(),
        bound: size_bound,
        systems: systems.len(),
        extended,
        not_found: systems.len() - extended,
        density_pass,
        consistent: all == density_pass,
    })
}
