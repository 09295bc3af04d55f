use super::lp::Q;
use crate::error::Result;
use crate::expansion_classes::{enumerate_expansions, Expansion};
use crate::structures::{age_up_to, first_embedding, subsets, ClassSpec, FiniteStructure};
use crate::trees::{self, RootedBinaryTree};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Two expansions of `a` with different relative counts in `b` along
/// `embedding`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexamplePair {
    pub a: FiniteStructure,
    pub b: FiniteStructure,
    pub embedding: Vec<usize>,
    pub left: Expansion,
    pub left_count: u64,
    pub right: Expansion,
    pub right_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DensityOutcome {
    Pass { bound: usize, pairs_checked: usize },
    Counterexample(Box<CounterexamplePair>),
}

impl DensityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, DensityOutcome::Pass { .. })
    }
}

type Key = (Option<Vec<usize>>, Option<Vec<u32>>, Option<Vec<(usize, usize)>>);

fn expansion_from_key(a: &FiniteStructure, key: Key) -> Expansion {
    let (order, labels, aux) = key;
    Expansion { base: a.clone(), order, labels, aux }
}

/// Checks one `b`; returns the number of substructure positions examined
/// or the first counterexample.
fn check_top(spec: &ClassSpec, b: &FiniteStructure) -> Result<std::result::Result<usize, CounterexamplePair>> {
    let exps = enumerate_expansions(spec, b)?;
    let mut checked = 0;
    for k in 1..b.len() {
        for u in subsets(b.len(), k) {
            let a = b.induced(&u);
            let mut counts: BTreeMap<Key, u64> = BTreeMap::new();
            for e in &exps {
                *counts.entry(e.restricted_parts(&u)).or_insert(0) += 1;
            }
            let a_exps = enumerate_expansions(spec, &a)?;
            let cex = |left: Expansion, lc: u64, right: Expansion, rc: u64| CounterexamplePair {
                a: a.clone(),
                b: b.clone(),
                embedding: u.clone(),
                left,
                left_count: lc,
                right,
                right_count: rc,
            };
            if counts.len() != a_exps.len() {
                let (key, &c) = counts.iter().next().expect("b has an expansion");
                let present = expansion_from_key(&a, key.clone());
                let missing = a_exps
                    .iter()
                    .find(|e| !counts.contains_key(&(e.order.clone(), e.labels.clone(), e.aux.clone())))
                    .cloned()
                    .unwrap_or_else(|| present.clone());
                return Ok(Err(cex(present, c, missing, 0)));
            }
            let mut it = counts.iter();
            let (k0, &c0) = it.next().expect("nonempty");
            if let Some((k1, &c1)) = it.find(|(_, &c)| c != c0) {
                return Ok(Err(cex(
                    expansion_from_key(&a, k0.clone()),
                    c0,
                    expansion_from_key(&a, k1.clone()),
                    c1,
                )));
            }
            checked += 1;
        }
    }
    Ok(Ok(checked))
}

/// For every `b` of the age with at most `size_bound` vertices and every
/// proper substructure `a` of `b`, all expansions of `a` have the same
/// number of extensions to `b`.
pub fn check_density_criterion(spec: &ClassSpec, size_bound: usize) -> Result<DensityOutcome> {
    let tops: Vec<FiniteStructure> = age_up_to(spec, size_bound)?.into_iter().filter(|b| b.len() >= 2).collect();
    let results: Vec<Result<std::result::Result<usize, CounterexamplePair>>> =
        tops.par_iter().map(|b| check_top(spec, b)).collect();
    let mut pairs = 0;
    for r in results {
        match r? {
            Ok(c) => pairs += c,
            Err(cex) => return Ok(DensityOutcome::Counterexample(Box::new(cex))),
        }
    }
    Ok(DensityOutcome::Pass { bound: size_bound, pairs_checked: pairs })
}

/// Generators claimed to form a cofinal subclass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "members", rename_all = "snake_case")]
pub enum CandidateFamily {
    Structures(Vec<FiniteStructure>),
    Trees(Vec<RootedBinaryTree>),
}

/// Every age member within the bound embeds in a family member, and any
/// two expansions of a family member are isomorphic.
pub fn check_cofinal_isomorphism(spec: &ClassSpec, family: &CandidateFamily, size_bound: usize) -> Result<bool> {
    match family {
        CandidateFamily::Trees(list) => trees::cofinal_isomorphism(list, size_bound),
        CandidateFamily::Structures(list) => {
            for s in age_up_to(spec, size_bound)? {
                if !list.iter().any(|f| first_embedding(&s, f).is_some()) {
                    return Ok(false);
                }
            }
            for f in list {
                let exps = enumerate_expansions(spec, f)?;
                let Some(first) = exps.first().map(Expansion::canonical_form) else { return Ok(false) };
                if exps.iter().any(|e| e.canonical_form() != first) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Result of checking a measure against the probability and extension
/// conditions on a whole age segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub bound: usize,
    pub structures: usize,
    pub probability_rows: usize,
    pub extension_rows: usize,
    pub failures: Vec<String>,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `Σ_{A*} w(A*) = 1` for every `A` and
/// `w(A*) = Σ_{B* ↾ U = A*} w(B*)` for every `B` and every `U ⊂ B`, all
/// within `size_bound` vertices.
pub fn check_measure_consistency(
    spec: &ClassSpec,
    size_bound: usize,
    weight: &(dyn Fn(&Expansion) -> Result<Q> + Sync),
) -> Result<ConsistencyReport> {
    let members = age_up_to(spec, size_bound)?;
    let per: Vec<Result<(usize, usize, Vec<String>)>> = members
        .par_iter()
        .map(|b| {
            let exps = enumerate_expansions(spec, b)?;
            let mut failures = Vec::new();
            let mut total = Q::zero();
            let mut wb = Vec::with_capacity(exps.len());
            for e in &exps {
                let w = weight(e)?;
                total += &w;
                wb.push(w);
            }
            if !total.is_one() {
                failures.push(format!("weights of {} sum to {total}", b.to_json()));
            }
            let mut ext_rows = 0;
            for k in 1..b.len() {
                for u in subsets(b.len(), k) {
                    let a = b.induced(&u);
                    let mut sums: BTreeMap<Key, Q> = BTreeMap::new();
                    for (e, w) in exps.iter().zip(&wb) {
                        *sums.entry(e.restricted_parts(&u)).or_insert_with(Q::zero) += w;
                    }
                    for ae in enumerate_expansions(spec, &a)? {
                        ext_rows += 1;
                        let key = (ae.order.clone(), ae.labels.clone(), ae.aux.clone());
                        let rhs = sums.get(&key).cloned().unwrap_or_else(Q::zero);
                        let lhs = weight(&ae)?;
                        if lhs != rhs {
                            failures.push(format!(
                                "extension row fails for {} inside {} at {u:?}: {lhs} != {rhs}",
                                ae.to_json(),
                                b.to_json()
                            ));
                        }
                    }
                }
            }
            Ok((1, ext_rows, failures))
        })
        .collect();
    let mut report = ConsistencyReport {
        bound: size_bound,
        structures: members.len(),
        probability_rows: 0,
        extension_rows: 0,
        failures: Vec::new(),
    };
    for r in per {
        let (p, e, f) = r?;
        report.probability_rows += p;
        report.extension_rows += e;
        report.failures.extend(f);
    }
    Ok(report)
}

/// `1/#(A)` for an expansion of `A`.
pub fn uniform_weight(spec: &ClassSpec) -> impl Fn(&Expansion) -> Result<Q> + Sync + '_ {
    move |e: &Expansion| {
        let n = enumerate_expansions(spec, &e.base)?.len();
        Ok(Q::new(1.into(), (n as u64).into()))
    }
}
