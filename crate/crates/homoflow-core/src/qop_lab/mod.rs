//! Quantitative expansion experiments: random samplers, expected embedding
//! counts, McDiarmid bounds, the sampled deviation pipeline, single-variable
//! sensitivity and the hypergraph method.

mod hypergraph;
mod samplers;

pub use hypergraph::{
    build_girth4_hypergraph, build_girth4_hypergraph_with, contains_any, has_independent_set,
    plant_hypergraph_digraph, qop_hypergraph_check, run_hypergraph_method, Girth4Report, Hypergraph, HypergraphQopReport,
    HypergraphRun, PlantMode,
    GIRTH4_EDGE_CONSTANT,
};
pub use samplers::{sample_structure, sample_with, Sample, Sampler};

use crate::error::{Error, Result};
use crate::expansion_classes::enumerate_expansions;
use crate::structures::builders::{hat_cover, multipartite};
use crate::structures::{for_each_embedding, ClassSpec, FiniteStructure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Experiment parameters. `n` is the number of columns of `G` (the fixed
/// number of parts for `DnRandom`), `m` the class size of `G` for the
/// multipartite samplers, `big_m` the column size for `SRRandom`, `k` the
/// number of columns of `H` and `a` its class sizes where relevant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QopParams {
    pub epsilon: f64,
    pub d: f64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub big_m: usize,
    #[serde(default)]
    pub a: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Sampled expansions of `G` per trial.
    pub g_expansions: usize,
}

impl Default for QopParams {
    fn default() -> Self {
        QopParams { epsilon: 0.1, d: 0.05, n: 10, k: 2, m: 1, big_m: 2, a: Vec::new(), trials: 10, seed: 0, g_expansions: 50 }
    }
}

impl QopParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d <= self.epsilon) {
            return Err(Error::Param("need 0 < D <= epsilon".into()));
        }
        if self.n < self.k {
            return Err(Error::Param("need n >= k".into()));
        }
        if !self.a.is_empty() && self.a.len() != self.k {
            return Err(Error::Param("class sizes must list k entries".into()));
        }
        Ok(())
    }

    /// Class sizes of `H` for the multipartite samplers.
    pub fn class_sizes(&self) -> Vec<usize> {
        if self.a.is_empty() {
            vec![1; self.k]
        } else {
            self.a.clone()
        }
    }
}

/// The age whose expansions a sampler's structures carry.
pub fn sampler_spec(sampler: Sampler, p: &QopParams) -> ClassSpec {
    match sampler {
        Sampler::DomegaRandom => ClassSpec::DomegaAge,
        Sampler::DnRandom => ClassSpec::DnAge(p.n),
        Sampler::HatTRandom => ClassSpec::HatTAge,
        Sampler::SRRandom => ClassSpec::SemiGenericRAge,
    }
}

/// The standard small structure `H`: complete multipartite with sizes
/// `a`, the full cover of the `k`-element linear tournament, or a sampled
/// `k`-column structure carrying `R`.
pub fn default_h(sampler: Sampler, p: &QopParams) -> Result<FiniteStructure> {
    Ok(match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom => multipartite(&p.class_sizes()),
        Sampler::HatTRandom => hat_cover(&FiniteStructure::linear_tournament(p.k)),
        Sampler::SRRandom => sample_structure(sampler, &QopParams { n: p.k, ..p.clone() }, p.seed)?.structure,
    })
}

/// `2 exp(-2ε² / Σ a_i²)`, unclamped.
pub fn mcdiarmid_bound(a: &[f64], epsilon: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Domain("no bounded differences given".into()));
    }
    if epsilon <= 0.0 || a.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
        return Err(Error::Domain("need epsilon > 0 and every a_i > 0".into()));
    }
    let s: f64 = a.iter().map(|x| x * x).sum();
    Ok(2.0 * (-2.0 * epsilon * epsilon / s).exp())
}

fn falling(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    (n - k + 1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

fn factorial(n: usize) -> BigInt {
    falling(n, n)
}

fn binomial(n: usize, k: usize) -> BigInt {
    falling(n, k) / factorial(k)
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::from(2).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// `E[N_emb(H, G)]` for the standard `H` of the sampler.
pub fn expected_embeddings(sampler: Sampler, p: &QopParams) -> Result<BigRational> {
    let (n, k) = (p.n, p.k);
    Ok(match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom => {
            let a = p.class_sizes();
            let mut cross = 0i64;
            for l in 0..a.len() {
                for j in l + 1..a.len() {
                    cross += (a[l] * a[j]) as i64;
                }
            }
            let prod = a.iter().fold(BigInt::one(), |acc, &ai| acc * falling(p.m, ai));
            BigRational::from_integer(falling(n, k) * prod) * pow2(-cross)
        }
        Sampler::HatTRandom => {
            let c2 = (k * k.saturating_sub(1) / 2) as i64;
            BigRational::from_integer(falling(n, k)) * pow2(k as i64 - c2)
        }
        Sampler::SRRandom => {
            if p.big_m == 0 || p.big_m % 2 == 1 {
                return Err(Error::Param("M must be a positive even number".into()));
            }
            let c = binomial(p.big_m, p.big_m / 2);
            let pairs = (k * k.saturating_sub(1) / 2) as u32;
            let prob = BigRational::new(BigInt::one(), (&c * &c).pow(pairs));
            // `R` fixes the column order, so only increasing column tuples embed.
            BigRational::from_integer(binomial(n, k) * factorial(p.big_m).pow(k as u32)) * prob
        }
    })
}

/// Largest change of `N_emb(h, G)` when one variable of the sampler
/// changes, for `G` with `n` columns of size `m` (`M` for `SRRandom`).
pub fn sensitivity_bound(sampler: Sampler, h: &FiniteStructure, n: usize, m: usize) -> Result<BigInt> {
    let classes = h.perp_partition()?;
    let k = classes.len();
    if k < 2 {
        return Ok(BigInt::from(0));
    }
    let pairs = falling(k, 2) * falling(n.saturating_sub(2), k - 2);
    let a: Vec<usize> = classes.iter().map(Vec::len).collect();
    Ok(match sampler {
        Sampler::DomegaRandom => pairs * a.iter().fold(BigInt::one(), |acc, &ai| acc * falling(m, ai)),
        Sampler::DnRandom => {
            let mut best = BigInt::from(0);
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    let mut t = BigInt::from(a[i] * a[j]) * falling(m - 1, a[i] - 1) * falling(m - 1, a[j] - 1);
                    for (l, &al) in a.iter().enumerate() {
                        if l != i && l != j {
                            t *= falling(m, al);
                        }
                    }
                    best = best.max(t);
                }
            }
            pairs * best
        }
        Sampler::HatTRandom => pairs * BigInt::from(2).pow(k as u32),
        Sampler::SRRandom => pairs * factorial(m).pow(k as u32),
    })
}

/// Result of one single-variable change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub variable: usize,
    pub value: u32,
    pub before: usize,
    pub after: usize,
    pub delta: i64,
    pub bound: String,
    pub within_bound: bool,
}

/// Recounts `N_emb(h, G)` after the `flip`-th entry of [`Sample::flips`].
pub fn single_edge_sensitivity(h: &FiniteStructure, g: &Sample, flip: usize) -> Result<Sensitivity> {
    let flips = g.flips();
    let &(variable, value) = flips
        .get(flip)
        .ok_or_else(|| Error::Param(format!("flip index {flip} out of range ({} flips)", flips.len())))?;
    let mut vars = g.variables.clone();
    vars[variable] = value;
    let g2 = g.rebuild(vars)?;
    let before = count(h, &g.structure);
    let after = count(h, &g2.structure);
    let delta = after as i64 - before as i64;
    let bound = sensitivity_bound(g.sampler, h, g.classes.len(), g.classes[0].len())?;
    Ok(Sensitivity {
        variable,
        value,
        before,
        after,
        delta,
        within_bound: BigInt::from(delta.unsigned_abs()) <= bound,
        bound: bound.to_string(),
    })
}

fn count(h: &FiniteStructure, g: &FiniteStructure) -> usize {
    let mut c = 0;
    for_each_embedding(h, g, &mut |_| {
        c += 1;
        true
    });
    c
}

/// Constants of the concentration argument, recorded per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QopConstants {
    /// `E[N_emb]`.
    pub zeta: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    /// Single-variable change of `N_emb / ζ`, times the squared size
    /// parameter.
    pub epsilon_1: f64,
    /// The same for `N_exp / ζ`.
    pub epsilon_2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QopRunReport {
    pub sampler: Sampler,
    pub params: QopParams,
    pub h: FiniteStructure,
    pub rho: f64,
    pub h_expansions: usize,
    pub emb_counts: Vec<usize>,
    /// `N_exp` of the first expansion of `H` against the first sampled
    /// expansion of `G`, per trial.
    pub exp_counts: Vec<usize>,
    /// Largest `|N_exp/N_emb - ρ|` over sampled pairs, per trial.
    pub trial_deviation: Vec<f64>,
    pub degenerate_trials: usize,
    pub max_deviation: f64,
    pub mcdiarmid_log_p: f64,
    pub mcdiarmid_p: f64,
    pub constants: QopConstants,
}

impl QopRunReport {
    /// Fraction of non-degenerate trials whose deviation is below `eps`.
    pub fn fraction_within(&self, eps: f64) -> f64 {
        let ok = self.trial_deviation.iter().filter(|&&d| d < eps).count();
        let total = self.trial_deviation.len();
        if total == 0 {
            0.0
        } else {
            ok as f64 / total as f64
        }
    }

    /// Per-trial tallies as CSV.
    pub fn trials_csv(&self) -> String {
        let mut s = String::from("trial,n_emb,n_exp,deviation\n");
        for (t, ((e, x), d)) in self.emb_counts.iter().zip(&self.exp_counts).zip(&self.trial_deviation).enumerate() {
            s.push_str(&format!("{t},{e},{x},{d}\n"));
        }
        s
    }
}

type Key = (Vec<usize>, Option<Vec<u32>>);

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `ln #(G)` for a sampled `G` with `n` columns of size `m`.
fn ln_expansions_of_g(sampler: Sampler, n: usize, m: usize) -> f64 {
    match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom => ln_factorial(n) + n as f64 * ln_factorial(m),
        Sampler::HatTRandom => ln_factorial(n) + n as f64 * 2f64.ln(),
        Sampler::SRRandom => n as f64 * ln_factorial(m),
    }
}

struct Trial {
    emb: usize,
    first_exp: usize,
    deviation: Option<f64>,
}

fn run_trial(
    sampler: Sampler,
    h: &FiniteStructure,
    h_keys: &HashMap<Key, usize>,
    rho: f64,
    p: &QopParams,
    t: usize,
) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ t as u64);
    let g = sample_with(sampler, p, &mut rng)?;
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for_each_embedding(h, &g.structure, &mut |m| {
        maps.push(m.to_vec());
        true
    });
    if maps.is_empty() {
        return Ok(Trial { emb: 0, first_exp: 0, deviation: None });
    }
    let mut worst: f64 = 0.0;
    let mut first_exp = 0;
    let mut pos = vec![0usize; g.structure.len()];
    for s in 0..p.g_expansions.max(1) {
        let (order, labels) = samplers::random_expansion(&g, &mut rng);
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut tally = vec![0usize; h_keys.len()];
        for m in &maps {
            let mut o: Vec<usize> = (0..h.len()).collect();
            o.sort_by_key(|&i| pos[m[i]]);
            let l = labels.as_ref().map(|l| m.iter().map(|&v| l[v]).collect::<Vec<u32>>());
            let idx = h_keys
                .get(&(o, l))
                .ok_or_else(|| Error::Domain("pulled-back expansion is not an expansion of H".into()))?;
            tally[*idx] += 1;
        }
        if s == 0 {
            first_exp = tally[0];
        }
        for &c in &tally {
            worst = worst.max((c as f64 / maps.len() as f64 - rho).abs());
        }
    }
    Ok(Trial { emb: maps.len(), first_exp, deviation: Some(worst) })
}

/// Samples `G` per trial, counts `N_emb(H, G)` and, for every expansion of
/// `H` against sampled expansions of `G`, `N_exp`; `ℰ` is all embeddings.
pub fn run_qop_experiment(sampler: Sampler, h: &FiniteStructure, p: &QopParams) -> Result<QopRunReport> {
    p.validate()?;
    let spec = sampler_spec(sampler, p);
    let h_exps = enumerate_expansions(&spec, h)?;
    let mut h_keys: HashMap<Key, usize> = HashMap::new();
    for (i, e) in h_exps.iter().enumerate() {
        let order = e.order.clone().ok_or_else(|| Error::Unsupported("expansions without an order".into()))?;
        h_keys.insert((order, e.labels.clone()), i);
    }
    let rho = 1.0 / h_exps.len() as f64;
    let trials: Vec<Result<Trial>> =
        (0..p.trials).into_par_iter().map(|t| run_trial(sampler, h, &h_keys, rho, p, t)).collect();
    let mut report = QopRunReport {
        sampler,
        params: p.clone(),
        h: h.clone(),
        rho,
        h_expansions: h_exps.len(),
        emb_counts: Vec::new(),
        exp_counts: Vec::new(),
        trial_deviation: Vec::new(),
        degenerate_trials: 0,
        max_deviation: 0.0,
        mcdiarmid_log_p: 0.0,
        mcdiarmid_p: 0.0,
        constants: QopConstants { zeta: 0.0, delta_1: 0.0, delta_2: 0.0, epsilon_1: 0.0, epsilon_2: 0.0 },
    };
    for t in trials {
        let t = t?;
        match t.deviation {
            None => report.degenerate_trials += 1,
            Some(d) => {
                report.emb_counts.push(t.emb);
                report.exp_counts.push(t.first_exp);
                report.trial_deviation.push(d);
                report.max_deviation = report.max_deviation.max(d);
            }
        }
    }

    let col = match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom => p.m,
        Sampler::HatTRandom => 2,
        Sampler::SRRandom => p.big_m,
    };
    let probe = sample_structure(sampler, p, p.seed)?;
    let vars = probe.variables.len().max(1) as f64;
    let zeta = if matches!(sampler, Sampler::DomegaRandom | Sampler::DnRandom) && h.perp_partition()?.len() != p.k {
        // Non-standard `H`: fall back to the observed mean.
        report.emb_counts.iter().sum::<usize>() as f64 / report.emb_counts.len().max(1) as f64
    } else {
        expected_embeddings(sampler, p)?.to_f64().unwrap_or(f64::NAN)
    };
    let scale = if sampler == Sampler::DnRandom { p.m } else { p.n } as f64;
    let bound = sensitivity_bound(sampler, h, p.n, col)?.to_f64().unwrap_or(f64::INFINITY);
    let eps1 = scale * scale * bound / zeta;
    let eps2 = eps1;
    let delta_of = |e: f64| if e > 0.0 { 2.0 * scale * scale / (vars * e * e) } else { f64::INFINITY };
    let (d1, d2) = (delta_of(eps1), delta_of(eps2));
    let d3 = d1.min(d2);
    let ln_p = 2f64.ln() + (h_exps.len() as f64).ln() + ln_expansions_of_g(sampler, p.n, col) - d3 * p.d * p.d * scale * scale;
    report.mcdiarmid_log_p = if ln_p.is_finite() { ln_p } else { f64::MIN };
    report.mcdiarmid_p = ln_p.exp().min(f64::MAX);
    report.constants = QopConstants { zeta, delta_1: d1.min(f64::MAX), delta_2: d2.min(f64::MAX), epsilon_1: eps1, epsilon_2: eps2 };
    Ok(report)
}
