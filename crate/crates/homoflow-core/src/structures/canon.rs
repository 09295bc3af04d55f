use super::embed::search;
use super::{Coloured, FiniteStructure};
use serde::{Deserialize, Serialize};

/// Isomorphism-invariant encoding; equal forms iff isomorphic structures.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(pub Vec<u32>);

/// Canonical form of a structure (all relations, parts, order, equivalence).
pub fn canonical_form(s: &FiniteStructure) -> CanonicalForm {
    canonical_coloured(&Coloured::from(s)).0
}

/// Canonical form of an arbitrary coloured view.
pub fn canonical_coloured_form(c: &Coloured) -> CanonicalForm {
    canonical_coloured(c).0
}

pub fn is_isomorphic(a: &FiniteStructure, b: &FiniteStructure) -> bool {
    a.len() == b.len() && canonical_form(a) == canonical_form(b)
}

/// All automorphisms, as vertex maps, identity first.
pub fn automorphisms(s: &FiniteStructure) -> Vec<Vec<usize>> {
    coloured_automorphisms(&Coloured::from(s))
}

pub(crate) fn coloured_automorphisms(c: &Coloured) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    search(c, c, &mut |m| {
        out.push(m.to_vec());
        true
    });
    out
}

/// Minimum, over vertex sequences, of the encoding built vertex by vertex:
/// `[invariant, colour, rel(prev, v), rel(v, prev) ...]`. Returns the form
/// and one minimising sequence (`seq[i]` is the vertex placed at position `i`).
pub fn canonical_coloured(c: &Coloured) -> (CanonicalForm, Vec<usize>) {
    let n = c.n;
    let inv = invariants(c);
    let mut best: Option<Vec<u32>> = None;
    let mut best_seq = Vec::new();
    let mut seq = Vec::with_capacity(n);
    let mut code = vec![n as u32];
    let mut used = vec![false; n];
    descend(c, &inv, &mut seq, &mut used, &mut code, &mut best, &mut best_seq);
    (CanonicalForm(best.unwrap_or_else(|| vec![0])), best_seq)
}

fn chunk(c: &Coloured, inv: &[u64], seq: &[usize], v: usize) -> Vec<u32> {
    let mut ch = Vec::with_capacity(3 + 2 * seq.len());
    ch.push((inv[v] >> 32) as u32);
    ch.push(inv[v] as u32);
    ch.push(c.colour[v]);
    for &u in seq {
        ch.push(((c.get(u, v) as u32) << 8) | c.get(v, u) as u32);
    }
    ch
}

#[allow(clippy::too_many_arguments)]
fn descend(
    c: &Coloured,
    inv: &[u64],
    seq: &mut Vec<usize>,
    used: &mut [bool],
    code: &mut Vec<u32>,
    best: &mut Option<Vec<u32>>,
    best_seq: &mut Vec<usize>,
) {
    let n = c.n;
    if seq.len() == n {
        if best.as_ref().is_none_or(|b| *code < *b) {
            *best = Some(code.clone());
            *best_seq = seq.clone();
        }
        return;
    }
    // Keep only candidates with the least chunk; others cannot win.
    let mut cands: Vec<(Vec<u32>, usize)> = Vec::new();
    for v in 0..n {
        if used[v] {
            continue;
        }
        let ch = chunk(c, inv, seq, v);
        match cands.first() {
            Some((m, _)) if ch > *m => {}
            Some((m, _)) if ch < *m => cands = vec![(ch, v)],
            _ => cands.push((ch, v)),
        }
    }
    let min_chunk = cands[0].0.clone();
    // Prune if this prefix already loses to the incumbent.
    if let Some(b) = best.as_ref() {
        let mut prefix = code.clone();
        prefix.extend_from_slice(&min_chunk);
        if prefix[..] > b[..prefix.len()] {
            return;
        }
    }
    let mut explored: Vec<usize> = Vec::new();
    for (ch, v) in cands {
        // Twins: swapping v with an explored candidate is an automorphism
        // fixing everything else, so the subtree is identical.
        if explored.iter().any(|&u| twins(c, u, v)) {
            continue;
        }
        explored.push(v);
        used[v] = true;
        seq.push(v);
        let len = code.len();
        code.extend_from_slice(&ch);
        descend(c, inv, seq, used, code, best, best_seq);
        code.truncate(len);
        seq.pop();
        used[v] = false;
    }
}

fn twins(c: &Coloured, u: usize, v: usize) -> bool {
    if c.colour[u] != c.colour[v] || c.get(u, v) != c.get(v, u) {
        return false;
    }
    (0..c.n)
        .filter(|&w| w != u && w != v)
        .all(|w| c.get(u, w) == c.get(v, w) && c.get(w, u) == c.get(w, v))
}

/// Colour refinement: iterated hashing of (colour, out/in relation multisets).
fn invariants(c: &Coloured) -> Vec<u64> {
    let n = c.n;
    let mut cur: Vec<u64> = c.colour.iter().map(|&x| x as u64).collect();
    for _ in 0..3 {
        let mut next = Vec::with_capacity(n);
        for v in 0..n {
            let mut sig: Vec<(u8, u8, u64)> =
                (0..n).filter(|&w| w != v).map(|w| (c.get(v, w), c.get(w, v), cur[w])).collect();
            sig.sort_unstable();
            next.push(hash_sig(cur[v], &sig));
        }
        cur = compress(&next);
    }
    cur
}

fn compress(vals: &[u64]) -> Vec<u64> {
    let mut sorted: Vec<u64> = vals.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    vals.iter().map(|v| sorted.binary_search(v).expect("present") as u64).collect()
}

fn hash_sig(own: u64, sig: &[(u8, u8, u64)]) -> u64 {
    // FNV-1a over the signature; deterministic across runs.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    };
    feed(own);
    for &(a, b, w) in sig {
        feed(((a as u64) << 8) | b as u64);
        feed(w);
    }
    h
}
