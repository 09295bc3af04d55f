use super::QopParams;
use crate::error::{Error, Result};
use crate::structures::builders::hat_cover;
use crate::structures::{subsets, FiniteStructure};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Random structure families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `n` classes of size `m`, each cross pair oriented by a fair bit.
    DomegaRandom,
    /// As `DomegaRandom` with `n` playing the role of the fixed number of
    /// parts `N`.
    DnRandom,
    /// `n` full columns over a uniformly random tournament.
    HatTRandom,
    /// `n` columns of size `M` carrying `R`, one uniformly chosen
    /// half/half pair per column pair.
    SRRandom,
}

impl Sampler {
    pub fn parse(s: &str) -> Result<Sampler> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "domega" | "domegarandom" => Ok(Sampler::DomegaRandom),
            "dn" | "dnrandom" => Ok(Sampler::DnRandom),
            "hatt" | "hattrandom" => Ok(Sampler::HatTRandom),
            "sr" | "srrandom" => Ok(Sampler::SRRandom),
            _ => Err(Error::Param(format!("unknown sampler `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampler::DomegaRandom => "domega",
            Sampler::DnRandom => "dn",
            Sampler::HatTRandom => "hatT",
            Sampler::SRRandom => "sr",
        }
    }
}

/// A sampled structure with its column partition and the values of the
/// independent variables it was built from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub sampler: Sampler,
    pub structure: FiniteStructure,
    /// Columns (no-arc classes) in sampler order.
    pub classes: Vec<Vec<usize>>,
    pub variables: Vec<u32>,
    /// Number of values each variable ranges over.
    pub arity: Vec<u32>,
    /// Half size for `SRRandom`, unused otherwise.
    half: usize,
}

fn check(sampler: Sampler, p: &QopParams) -> Result<()> {
    if p.n == 0 {
        return Err(Error::Param("n must be positive".into()));
    }
    match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom if p.m == 0 => Err(Error::Param("m must be positive".into())),
        Sampler::SRRandom if p.big_m == 0 || p.big_m % 2 == 1 => {
            Err(Error::Param("M must be a positive even number".into()))
        }
        _ => Ok(()),
    }
}

fn column_classes(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..n).map(|c| (c * size..(c + 1) * size).collect()).collect()
}

/// Cross pairs `(x, y)`, `x < y` in different classes, in lexicographic order.
fn cross_pairs(n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 0..n * m {
        for y in x + 1..n * m {
            if x / m != y / m {
                out.push((x, y));
            }
        }
    }
    out
}

/// All `(A, B)` with `|A| = |B| = M/2`, as index sets into the two columns.
fn half_pairs(big_m: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let halves = subsets(big_m, big_m / 2);
    let mut out = Vec::with_capacity(halves.len() * halves.len());
    for a in &halves {
        for b in &halves {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

impl Sample {
    /// Rebuilds the structure after changing the variables.
    pub fn rebuild(&self, variables: Vec<u32>) -> Result<Sample> {
        if variables.len() != self.arity.len() || variables.iter().zip(&self.arity).any(|(v, a)| v >= a) {
            return Err(Error::Param("variable vector does not fit the sampler".into()));
        }
        let n = self.classes.len();
        let structure = match self.sampler {
            Sampler::DomegaRandom | Sampler::DnRandom => {
                let m = self.classes[0].len();
                let mut s = FiniteStructure::new(n * m);
                for (&(x, y), &bit) in cross_pairs(n, m).iter().zip(&variables) {
                    if bit == 0 {
                        s.orient(x, y);
                    } else {
                        s.orient(y, x);
                    }
                }
                s
            }
            Sampler::HatTRandom => {
                let mut t = FiniteStructure::new(n);
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if variables[k] == 0 {
                            t.orient(i, j);
                        } else {
                            t.orient(j, i);
                        }
                        k += 1;
                    }
                }
                hat_cover(&t)
            }
            Sampler::SRRandom => {
                let big_m = 2 * self.half;
                let pairs = half_pairs(big_m);
                let mut s = FiniteStructure::new(n * big_m);
                let mut aux = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        let (a, b) = &pairs[variables[k] as usize];
                        k += 1;
                        for xi in 0..big_m {
                            for yi in 0..big_m {
                                let (x, y) = (i * big_m + xi, j * big_m + yi);
                                let in_a = a.contains(&xi);
                                let in_b = b.contains(&yi);
                                if in_a != in_b {
                                    s.orient(x, y);
                                } else {
                                    s.orient(y, x);
                                }
                                if in_b {
                                    aux.push((x, y));
                                }
                                if in_a {
                                    aux.push((y, x));
                                }
                            }
                        }
                    }
                }
                s.set_aux(Some(&aux))?;
                s
            }
        };
        Ok(Sample { structure, variables, ..self.clone() })
    }

    /// Every single-variable change as `(variable, new value)`, in order.
    pub fn flips(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (i, (&v, &a)) in self.variables.iter().zip(&self.arity).enumerate() {
            for w in 0..a {
                if w != v {
                    out.push((i, w));
                }
            }
        }
        out
    }
}

/// Draws a structure; the same RNG state gives the same structure.
pub fn sample_with<R: Rng>(sampler: Sampler, p: &QopParams, rng: &mut R) -> Result<Sample> {
    check(sampler, p)?;
    let n = p.n;
    let (classes, arity, half) = match sampler {
        Sampler::DomegaRandom | Sampler::DnRandom => {
            (column_classes(n, p.m), vec![2; cross_pairs(n, p.m).len()], 0)
        }
        Sampler::HatTRandom => (column_classes(n, 2), vec![2; n * n.saturating_sub(1) / 2], 0),
        Sampler::SRRandom => {
            let count = half_pairs(p.big_m).len() as u32;
            (column_classes(n, p.big_m), vec![count; n * n.saturating_sub(1) / 2], p.big_m / 2)
        }
    };
    let variables: Vec<u32> = arity.iter().map(|&a| rng.gen_range(0..a)).collect();
    let blank = Sample { sampler, structure: FiniteStructure::new(0), classes, variables: vec![], arity, half };
    blank.rebuild(variables)
}

/// Seeded entry point.
pub fn sample_structure(sampler: Sampler, p: &QopParams, seed: u64) -> Result<Sample> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    sample_with(sampler, p, &mut rng)
}

/// A uniformly random expansion of a sample, as a vertex order (least
/// first) and labels where the class carries them.
pub(crate) fn random_expansion<R: Rng>(s: &Sample, rng: &mut R) -> (Vec<usize>, Option<Vec<u32>>) {
    let mut cols: Vec<usize> = (0..s.classes.len()).collect();
    if s.sampler != Sampler::SRRandom {
        cols.shuffle(rng);
    }
    let mut order = Vec::with_capacity(s.structure.len());
    let mut labels = vec![0u32; s.structure.len()];
    for (rank, &c) in cols.iter().enumerate() {
        let mut inside = s.classes[c].clone();
        inside.shuffle(rng);
        match s.sampler {
            Sampler::HatTRandom => {
                labels[inside[0]] = 0;
                labels[inside[1]] = 1;
            }
            Sampler::DnRandom => {
                for &v in &inside {
                    labels[v] = rank as u32 + 1;
                }
            }
            _ => {}
        }
        order.extend(inside);
    }
    let labels = matches!(s.sampler, Sampler::HatTRandom | Sampler::DnRandom).then_some(labels);
    (order, labels)
}
