use super::mcdiarmid_bound;
use crate::error::{Error, Result};
use crate::structures::{automorphisms, first_embedding, for_each_embedding, FiniteStructure};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Default constant in the target edge count `c · n^{4/3}`.
pub const GIRTH4_EDGE_CONSTANT: f64 = 0.4;

/// A `k`-uniform hypergraph on `0..vertices`, edges stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: usize,
    pub hyperedges: Vec<Vec<usize>>,
}

/// Output of the girth-4 generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Girth4Report {
    pub hypergraph: Hypergraph,
    pub constant: f64,
    pub target: usize,
    pub reached: bool,
}

impl Hypergraph {
    /// Pairwise intersections of size at most one and no Berge cycle of
    /// length 2 or 3.
    pub fn has_girth_at_least_4(&self) -> bool {
        let e = &self.hyperedges;
        let meet = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> { a.iter().filter(|x| b.contains(x)).copied().collect() };
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                if meet(&e[i], &e[j]).len() > 1 {
                    return false;
                }
            }
        }
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let ij = meet(&e[i], &e[j]);
                if ij.is_empty() {
                    continue;
                }
                for l in j + 1..e.len() {
                    let jl = meet(&e[j], &e[l]);
                    let li = meet(&e[l], &e[i]);
                    if let ([a], [b], [c]) = (&ij[..], &jl[..], &li[..]) {
                        if a != b && b != c && a != c {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_uniform(&self, k: usize) -> bool {
        self.hyperedges.iter().all(|e| {
            e.len() == k && e.windows(2).all(|w| w[0] < w[1]) && e.iter().all(|&v| v < self.vertices)
        })
    }
}

/// Random `k`-subsets kept unless they meet an edge in two vertices or close
/// a Berge triangle, over `200 · max(1, c · n^{4/3})` attempts; the report
/// records whether the target `c · n^{4/3}` was reached.
pub fn build_girth4_hypergraph_with(n: usize, k: usize, seed: u64, constant: f64) -> Result<Girth4Report> {
    if k < 3 || n < k {
        return Err(Error::Param(format!("need n >= k >= 3, got n = {n}, k = {k}")));
    }
    let target = ((constant * (n as f64).powf(4.0 / 3.0)).floor() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    let attempts = 200 * target;
    let full = n * (n - 1) / (k * (k - 1));
    for _ in 0..attempts {
        if edges.len() >= full {
            break;
        }
        let mut e: Vec<usize> = index::sample(&mut rng, n, k).into_vec();
        e.sort_unstable();
        // Edge index -> vertex shared with the candidate.
        let mut touching: BTreeMap<usize, usize> = BTreeMap::new();
        let mut ok = true;
        'scan: for &v in &e {
            for &f in &incident[v] {
                if touching.insert(f, v).is_some() {
                    ok = false;
                    break 'scan;
                }
            }
        }
        if ok {
            let touched: Vec<usize> = touching.keys().copied().collect();
            'pairs: for (i, &f) in touched.iter().enumerate() {
                for &g in &touched[i + 1..] {
                    if touching[&f] != touching[&g] && edges[f].iter().any(|x| edges[g].contains(x)) {
                        ok = false;
                        break 'pairs;
                    }
                }
            }
        }
        if ok {
            for &v in &e {
                incident[v].push(edges.len());
            }
            edges.push(e);
        }
    }
    let reached = edges.len() >= target;
    Ok(Girth4Report { hypergraph: Hypergraph { vertices: n, hyperedges: edges }, constant, target, reached })
}

pub fn build_girth4_hypergraph(n: usize, k: usize, seed: u64) -> Result<Hypergraph> {
    Ok(build_girth4_hypergraph_with(n, k, seed, GIRTH4_EDGE_CONSTANT)?.hypergraph)
}

/// How pairs outside every hyperedge are filled in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "param", rename_all = "snake_case")]
pub enum PlantMode {
    /// Arbitrary orientation; target age omits `I_{m+1}`.
    Gn(usize),
    /// No arc; target age omits every listed tournament.
    FT(Vec<FiniteStructure>),
}

/// Largest independent set has more than `m` vertices.
pub fn has_independent_set(g: &FiniteStructure, size: usize) -> bool {
    fn go(g: &FiniteStructure, chosen: &mut Vec<usize>, start: usize, size: usize) -> bool {
        if chosen.len() == size {
            return true;
        }
        for v in start..g.len() {
            if chosen.iter().all(|&u| g.perp(u, v)) {
                chosen.push(v);
                if go(g, chosen, v + 1, size) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(g, &mut Vec::new(), 0, size)
}

/// True iff some listed tournament embeds.
pub fn contains_any(g: &FiniteStructure, forbidden: &[FiniteStructure]) -> bool {
    forbidden.iter().any(|t| first_embedding(t, g).is_some())
}

/// One uniformly random copy of `h` per hyperedge; other pairs per `mode`.
/// The result is re-checked against the mode's forbidden substructures.
pub fn plant_hypergraph_digraph(hg: &Hypergraph, h: &FiniteStructure, mode: &PlantMode, seed: u64) -> Result<FiniteStructure> {
    if hg.hyperedges.iter().any(|e| e.len() != h.len()) {
        return Err(Error::Param(format!("hyperedges must have {} vertices", h.len())));
    }
    if !hg.is_uniform(h.len()) {
        return Err(Error::Param("hyperedges are not sorted vertex sets".into()));
    }
    let n = hg.vertices;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = FiniteStructure::new(n);
    let mut covered = vec![false; n * n];
    for e in &hg.hyperedges {
        let mut img = e.clone();
        img.shuffle(&mut rng);
        for i in 0..h.len() {
            for j in 0..h.len() {
                if i != j {
                    covered[img[i] * n + img[j]] = true;
                    if h.has_arc(i, j) {
                        g.orient(img[i], img[j]);
                    }
                }
            }
        }
    }
    if let PlantMode::Gn(_) = mode {
        for x in 0..n {
            for y in x + 1..n {
                if !covered[x * n + y] {
                    if rng.gen::<bool>() {
                        g.orient(x, y);
                    } else {
                        g.orient(y, x);
                    }
                }
            }
        }
    }
    let bad = match mode {
        PlantMode::Gn(m) => has_independent_set(&g, m + 1),
        PlantMode::FT(list) => contains_any(&g, list),
    };
    if bad {
        return Err(Error::Domain("planted digraph leaves the target age".into()));
    }
    Ok(g)
}

/// Counts over embeddings that land inside a single hyperedge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypergraphQopReport {
    pub hyperedges: usize,
    /// `|Aut(H)|`.
    pub automorphisms: usize,
    pub n_emb: usize,
    pub rho: f64,
    /// `N_exp` per (order of `G`, order of `H`).
    pub n_exp: Vec<Vec<usize>>,
    pub max_deviation: f64,
    /// McDiarmid bound at the observed deviation with `a_i = 1/(sL)`.
    pub mcdiarmid_bound: f64,
}

/// `ℰ` is every embedding of `h` into `g` whose image is one hyperedge;
/// expansions are linear orders.
pub fn qop_hypergraph_check(
    h: &FiniteStructure,
    g: &FiniteStructure,
    hg: &Hypergraph,
    g_orders: &[Vec<usize>],
) -> Result<HypergraphQopReport> {
    let k = h.len();
    let edges: BTreeSet<&Vec<usize>> = hg.hyperedges.iter().collect();
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for e in &hg.hyperedges {
        let sub = g.induced(e);
        for_each_embedding(h, &sub, &mut |m| {
            maps.push(m.iter().map(|&i| e[i]).collect());
            true
        });
    }
    debug_assert!(maps.iter().all(|m| {
        let mut s = m.clone();
        s.sort_unstable();
        edges.contains(&s)
    }));
    let h_orders: Vec<Vec<usize>> = crate::structures::permutations(k).collect();
    let rho = 1.0 / h_orders.len() as f64;
    let mut n_exp = Vec::with_capacity(g_orders.len());
    let mut worst: f64 = 0.0;
    for go in g_orders {
        if go.len() != g.len() {
            return Err(Error::Param("order of G has the wrong length".into()));
        }
        let mut pos = vec![0; g.len()];
        for (i, &v) in go.iter().enumerate() {
            pos[v] = i;
        }
        let mut tally: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for m in &maps {
            let mut o: Vec<usize> = (0..k).collect();
            o.sort_by_key(|&i| pos[m[i]]);
            *tally.entry(o).or_insert(0) += 1;
        }
        let row: Vec<usize> = h_orders.iter().map(|o| tally.get(o).copied().unwrap_or(0)).collect();
        if !maps.is_empty() {
            for &c in &row {
                worst = worst.max((c as f64 / maps.len() as f64 - rho).abs());
            }
        }
        n_exp.push(row);
    }
    let l = automorphisms(h).len();
    let s = hg.hyperedges.len();
    let bound = if s == 0 || worst == 0.0 {
        2.0
    } else {
        mcdiarmid_bound(&vec![1.0 / (s * l) as f64; s], worst)?
    };
    Ok(HypergraphQopReport {
        hyperedges: s,
        automorphisms: l,
        n_emb: maps.len(),
        rho,
        n_exp,
        max_deviation: worst,
        mcdiarmid_bound: bound,
    })
}

/// One run of the hypergraph method: generator, planting and the
/// hyperedge-restricted counts against random orders of the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypergraphRun {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub mode: PlantMode,
    pub edge_target: usize,
    pub target_reached: bool,
    pub girth_ok: bool,
    /// The planted digraph omits everything the mode forbids.
    pub valid: bool,
    pub check: HypergraphQopReport,
}

/// `orders` uniformly random orders of the planted digraph, from the
/// run's seed.
pub fn run_hypergraph_method(
    n: usize,
    h: &FiniteStructure,
    mode: &PlantMode,
    seed: u64,
    orders: usize,
    constant: f64,
) -> Result<HypergraphRun> {
    let k = h.len();
    let report = build_girth4_hypergraph_with(n, k, seed, constant)?;
    let hg = &report.hypergraph;
    let g = plant_hypergraph_digraph(hg, h, mode, seed.wrapping_add(1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let g_orders: Vec<Vec<usize>> = (0..orders.max(1))
        .map(|_| {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(&mut rng);
            o
        })
        .collect();
    let check = qop_hypergraph_check(h, &g, hg, &g_orders)?;
    let valid = match mode {
        PlantMode::Gn(m) => !has_independent_set(&g, m + 1),
        PlantMode::FT(list) => !contains_any(&g, list),
    };
    Ok(HypergraphRun {
        n,
        k,
        seed,
        mode: mode.clone(),
        edge_target: report.target,
        target_reached: report.reached,
        girth_ok: hg.has_girth_at_least_4() && hg.is_uniform(k),
        valid,
        check,
    })
}
