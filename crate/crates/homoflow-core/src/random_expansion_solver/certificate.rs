use super::lp::{self, q, LpOutcome, Q};
use super::measure::RandomExpansionMeasure;
use super::system::{build_constraints, satisfies, Fragment, LinearSystem, RowRef};
use crate::error::{Error, Result};
use crate::expansion_classes::Expansion;
use crate::structures::ClassSpec;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        use serde::de::Error;
        String::deserialize(d)?.parse().map_err(|_| D::Error::custom("bad rational"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    Infeasible,
    Feasible,
}

/// An extension row `x[a] = x[b]` between two structures whose expansions
/// form a single isomorphism class, so each side is pinned to `1/#`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clash {
    pub embedding: usize,
    pub left: Expansion,
    #[serde(with = "rational_string")]
    pub left_value: Q,
    pub right: Expansion,
    #[serde(with = "rational_string")]
    pub right_value: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    /// The combined steps read `Σ c·x = 0` with `c >= 0` and a positive
    /// coefficient on this expansion, so its weight must vanish. `forced`
    /// lists every weight with a positive coefficient, this one first.
    ForcedZero {
        structure: usize,
        expansion: Expansion,
        #[serde(default)]
        forced: Vec<ForcedWeight>,
    },
    /// The combined steps read `Σ c·x = r` with `c >= 0` and `r < 0`.
    Contradiction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clash: Option<Clash>,
    },
    /// A strictly positive solution is attached.
    Consistent,
}

/// A weight that a certificate forces to vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedWeight {
    pub structure: usize,
    pub expansion: Expansion,
}

/// One weighted constraint instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateStep {
    #[serde(with = "rational_string")]
    pub multiplier: Q,
    pub row: RowRef,
    pub equation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub class: String,
    pub fragment: Fragment,
    pub steps: Vec<CertificateStep>,
    pub conclusion: Conclusion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<RandomExpansionMeasure>,
}

impl Certificate {
    pub fn is_infeasible(&self) -> bool {
        self.kind == CertificateKind::Infeasible
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificates serialise")
    }
}

/// Outcome of [`solve_feasibility`].
#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(RandomExpansionMeasure),
    Infeasible(Certificate),
}

impl Feasibility {
    /// Wraps a feasible outcome in a replayable certificate.
    pub fn into_certificate(self, sys: &LinearSystem) -> Certificate {
        match self {
            Feasibility::Infeasible(c) => c,
            Feasibility::Feasible(m) => Certificate {
                kind: CertificateKind::Feasible,
                class: sys.spec.tag(),
                fragment: sys.fragment.clone(),
                steps: Vec::new(),
                conclusion: Conclusion::Consistent,
                measure: Some(m),
            },
        }
    }
}

fn steps_from(sys: &LinearSystem, y: &[Q]) -> Vec<CertificateStep> {
    sys.rows
        .iter()
        .zip(y)
        .filter(|(_, m)| !m.is_zero())
        .map(|(r, m)| CertificateStep { multiplier: m.clone(), row: r.reference.clone(), equation: sys.render(r) })
        .collect()
}

/// `1/#` when every expansion of the structure is isomorphic to every other.
fn pinned_value(sys: &LinearSystem, s: usize) -> Option<Q> {
    let list = &sys.expansions[s];
    let first = list.first()?.canonical_form();
    list.iter()
        .all(|e| e.canonical_form() == first)
        .then(|| Q::new(1.into(), (list.len() as u64).into()))
}

fn find_clash(sys: &LinearSystem, candidates: &[RowRef]) -> Option<Clash> {
    for r in candidates {
        let RowRef::Extension { embedding, expansion } = r else { continue };
        let Ok(row) = sys.instantiate(r) else { continue };
        if row.coeffs.len() != 2 {
            continue;
        }
        let emb = &sys.fragment.embeddings[*embedding];
        let (Some(lv), Some(rv)) = (pinned_value(sys, emb.from), pinned_value(sys, emb.to)) else { continue };
        if lv != rv {
            return Some(Clash {
                embedding: *embedding,
                left: expansion.clone(),
                left_value: lv,
                right: sys.expansion_of(row.coeffs[1].0).clone(),
                right_value: rv,
            });
        }
    }
    None
}

/// `Σ multiplier · row` as (coefficients, constant); `None` if a step does
/// not instantiate.
fn combination(sys: &LinearSystem, steps: &[CertificateStep]) -> Option<(BTreeMap<usize, Q>, Q)> {
    let mut lhs: BTreeMap<usize, Q> = BTreeMap::new();
    let mut rhs = Q::zero();
    for step in steps {
        let row = sys.instantiate(&step.row).ok()?;
        for &(v, c) in &row.coeffs {
            *lhs.entry(v).or_insert_with(Q::zero) += &step.multiplier * q(c);
        }
        rhs += &step.multiplier * q(row.rhs);
    }
    lhs.retain(|_, c| !c.is_zero());
    Some((lhs, rhs))
}

fn forced_conclusion(sys: &LinearSystem, steps: &[CertificateStep]) -> Conclusion {
    let (lhs, _) = combination(sys, steps).expect("steps come from the system");
    let forced: Vec<ForcedWeight> = lhs
        .iter()
        .filter(|(_, c)| c.is_positive())
        .map(|(&v, _)| ForcedWeight { structure: sys.var_owner(v).0, expansion: sys.expansion_of(v).clone() })
        .collect();
    let first = forced.first().expect("a forced weight").clone();
    Conclusion::ForcedZero { structure: first.structure, expansion: first.expansion, forced }
}

/// Rows of isomorphism steps turning `x[from]` into `x[to]`: their sum is
/// `x[from] - x[to]`.
fn iso_path(sys: &LinearSystem, from: usize, to: usize) -> Option<Vec<(Q, RowRef)>> {
    let mut prev: BTreeMap<usize, (usize, Q, RowRef)> = BTreeMap::new();
    let mut frontier = vec![from];
    let mut seen = std::collections::BTreeSet::from([from]);
    while let Some(u) = frontier.pop() {
        if u == to {
            break;
        }
        for r in &sys.rows {
            if !matches!(r.reference, RowRef::Isomorphism { .. }) {
                continue;
            }
            let (a, b) = (r.coeffs[0].0, r.coeffs[1].0);
            let step = if a == u {
                Some((b, Q::one()))
            } else if b == u {
                Some((a, -Q::one()))
            } else {
                None
            };
            if let Some((w, m)) = step {
                if seen.insert(w) {
                    prev.insert(w, (u, m, r.reference.clone()));
                    frontier.push(w);
                }
            }
        }
    }
    if !seen.contains(&to) {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = to;
    while cur != from {
        let (p, m, r) = prev[&cur].clone();
        out.push((m, r));
        cur = p;
    }
    Some(out)
}

/// Two extension rows from isomorphic expansions of one structure into the
/// same target, where one extension set contains the other: the
/// difference forces every weight in the surplus to vanish.
fn sandwich(sys: &LinearSystem) -> Option<Vec<CertificateStep>> {
    let ext: Vec<(usize, usize, usize, std::collections::BTreeSet<usize>, &RowRef)> = sys
        .rows
        .iter()
        .filter_map(|r| match &r.reference {
            RowRef::Extension { embedding, .. } => {
                let e = &sys.fragment.embeddings[*embedding];
                let targets = r.coeffs[1..].iter().map(|&(v, _)| v).collect();
                Some((e.from, e.to, r.coeffs[0].0, targets, &r.reference))
            }
            _ => None,
        })
        .collect();
    for (i, (from1, to1, v1, s1, r1)) in ext.iter().enumerate() {
        for (j, (from2, to2, v2, s2, r2)) in ext.iter().enumerate() {
            if i == j || from1 != from2 || to1 != to2 || !(s1.len() < s2.len() && s1.is_subset(s2)) {
                continue;
            }
            let class = |v: usize| sys.expansion_of(v).canonical_form();
            if class(*v1) != class(*v2) {
                continue;
            }
            let Some(path) = iso_path(sys, *v2, *v1) else { continue };
            let mut rows = vec![(Q::one(), (*r1).clone()), (-Q::one(), (*r2).clone())];
            rows.extend(path);
            let steps: Vec<CertificateStep> = rows
                .into_iter()
                .map(|(multiplier, row)| {
                    let inst = sys.instantiate(&row).expect("row of the system");
                    CertificateStep { multiplier, equation: sys.render(&inst), row }
                })
                .collect();
            let (lhs, rhs) = combination(sys, &steps)?;
            if rhs.is_zero() && !lhs.is_empty() && lhs.values().all(|c| c.is_positive()) {
                return Some(steps);
            }
        }
    }
    None
}

fn measure_from(sys: &LinearSystem, x: &[Q]) -> RandomExpansionMeasure {
    let mut m = RandomExpansionMeasure::new();
    for (v, w) in x.iter().enumerate() {
        m.insert(sys.expansion_of(v).clone(), w.clone());
    }
    m
}

/// Exact feasibility of the system with strictly positive weights.
///
/// Infeasible systems yield a nonnegative combination of rows reading
/// `0 <= negative`; systems whose solutions all vanish somewhere yield a
/// combination forcing one weight to zero. Forced zeros are searched from
/// the first fragment structure onwards.
pub fn solve_feasibility(sys: &LinearSystem) -> Result<Feasibility> {
    let eq = sys.eq_system();
    let n = eq.cols;
    let infeasible = |steps: Vec<CertificateStep>, conclusion| Certificate {
        kind: CertificateKind::Infeasible,
        class: sys.spec.tag(),
        fragment: sys.fragment.clone(),
        steps,
        conclusion,
        measure: None,
    };
    match lp::solve(&eq, &vec![Q::zero(); n]) {
        LpOutcome::Infeasible { farkas } => {
            let steps = steps_from(sys, &farkas);
            let refs: Vec<RowRef> = steps.iter().map(|s| s.row.clone()).collect();
            let clash = find_clash(sys, &refs);
            return Ok(Feasibility::Infeasible(infeasible(steps, Conclusion::Contradiction { clash })));
        }
        LpOutcome::Unbounded => unreachable!("zero objective"),
        LpOutcome::Optimal { .. } => {}
    }

    // x = z + t·1 with z, t >= 0; maximise t.
    let mut shifted = eq.clone();
    shifted.cols = n + 1;
    for (coeffs, _) in shifted.rows.iter_mut() {
        let s: Q = coeffs.iter().map(|(_, c)| c.clone()).sum();
        if !s.is_zero() {
            coeffs.push((n, s));
        }
    }
    let mut cost = vec![Q::zero(); n + 1];
    cost[n] = Q::one();
    if let LpOutcome::Optimal { x, value, .. } = lp::solve(&shifted, &cost) {
        if value.is_positive() {
            let point: Vec<Q> = x[..n].iter().map(|z| z + &value).collect();
            debug_assert!(satisfies(sys, &point));
            return Ok(Feasibility::Feasible(measure_from(sys, &point)));
        }
    }

    if let Some(steps) = sandwich(sys) {
        return Ok(Feasibility::Infeasible(infeasible(steps.clone(), forced_conclusion(sys, &steps))));
    }
    for v in 0..n {
        let mut c = vec![Q::zero(); n];
        c[v] = Q::one();
        if let LpOutcome::Optimal { y, value, .. } = lp::solve(&eq, &c) {
            if value.is_zero() {
                let steps = steps_from(sys, &y);
                return Ok(Feasibility::Infeasible(infeasible(steps.clone(), forced_conclusion(sys, &steps))));
            }
        }
    }
    Err(Error::Domain("no strictly positive solution but no forced zero found".into()))
}

/// Variables that vanish in every solution, in variable order. Empty if
/// the system has no solution at all.
pub fn forced_zeros(sys: &LinearSystem) -> Vec<usize> {
    let eq = sys.eq_system();
    (0..eq.cols)
        .filter(|&v| {
            let mut c = vec![Q::zero(); eq.cols];
            c[v] = Q::one();
            matches!(lp::solve(&eq, &c), LpOutcome::Optimal { value, .. } if value.is_zero())
        })
        .collect()
}

/// Builds the system of `frag` and solves it.
pub fn solve_fragment(spec: &ClassSpec, frag: &Fragment) -> Result<Certificate> {
    let sys = build_constraints(spec, frag)?;
    Ok(solve_feasibility(&sys)?.into_certificate(&sys))
}

/// Replays `cert` against freshly enumerated expansions; the error names
/// the first broken step (index `steps.len()` for the conclusion).
pub fn replay_certificate(cert: &Certificate, spec: &ClassSpec) -> Result<()> {
    let end = cert.steps.len();
    let fail = |index: usize, reason: &str| Error::Step { index, reason: reason.to_string() };
    if cert.class != spec.tag() {
        return Err(fail(0, "certificate is for a different class"));
    }
    let sys = build_constraints(spec, &cert.fragment).map_err(|e| fail(0, &e.to_string()))?;
    let mut lhs: BTreeMap<usize, Q> = BTreeMap::new();
    let mut rhs = Q::zero();
    for (i, step) in cert.steps.iter().enumerate() {
        let row = sys.instantiate(&step.row).map_err(|m| fail(i, &m))?;
        if sys.render(&row) != step.equation {
            return Err(fail(i, "recorded equation differs from the recomputed instance"));
        }
        if step.multiplier.is_zero() {
            return Err(fail(i, "zero multiplier"));
        }
        for &(v, c) in &row.coeffs {
            *lhs.entry(v).or_insert_with(Q::zero) += &step.multiplier * q(c);
        }
        rhs += &step.multiplier * q(row.rhs);
    }
    let nonneg = lhs.values().all(|c| !c.is_negative());
    match (&cert.kind, &cert.conclusion) {
        (CertificateKind::Infeasible, Conclusion::ForcedZero { structure, expansion, forced }) => {
            if !nonneg || !rhs.is_zero() {
                return Err(fail(end, "combination is not a nonnegative form equal to zero"));
            }
            let named = std::iter::once((*structure, expansion)).chain(forced.iter().map(|f| (f.structure, &f.expansion)));
            for (s, e) in named {
                let v = sys.var_of(s, e).ok_or_else(|| fail(end, "unknown expansion"))?;
                if !lhs.get(&v).is_some_and(|c| c.is_positive()) {
                    return Err(fail(end, "a concluded expansion does not occur in the combination"));
                }
            }
            Ok(())
        }
        (CertificateKind::Infeasible, Conclusion::Contradiction { clash }) => {
            if !nonneg || !rhs.is_negative() {
                return Err(fail(end, "combination does not reach a negative constant"));
            }
            if let Some(c) = clash {
                let r = RowRef::Extension { embedding: c.embedding, expansion: c.left.clone() };
                let ok = find_clash(&sys, &[r]).is_some_and(|found| &found == c);
                if !ok {
                    return Err(fail(end, "clash values do not match the fragment"));
                }
            }
            Ok(())
        }
        (CertificateKind::Feasible, Conclusion::Consistent) => {
            let m = cert.measure.as_ref().ok_or_else(|| fail(end, "no measure attached"))?;
            let mut x = Vec::with_capacity(sys.num_vars());
            for v in 0..sys.num_vars() {
                let w = m.weight(sys.expansion_of(v)).map_err(|e| fail(end, &e.to_string()))?;
                if !w.is_positive() {
                    return Err(fail(end, "weight is not positive"));
                }
                x.push(w);
            }
            if !satisfies(&sys, &x) {
                return Err(fail(end, "measure violates a constraint"));
            }
            Ok(())
        }
        _ => Err(fail(end, "kind and conclusion disagree")),
    }
}

/// True iff [`replay_certificate`] succeeds.
pub fn verify_certificate(cert: &Certificate, spec: &ClassSpec) -> bool {
    replay_certificate(cert, spec).is_ok()
}

/// For every coordinate, the minimum and maximum over the feasible set
/// coincide.
pub fn feasible_set_is_a_point(sys: &LinearSystem) -> Result<bool> {
    let eq = sys.eq_system();
    let n = eq.cols;
    let base = match lp::solve(&eq, &vec![Q::zero(); n]) {
        LpOutcome::Optimal { x, .. } => x,
        _ => return Ok(false),
    };
    let basis = pinned_by_equalities(&eq, n);
    for v in 0..n {
        if basis[v] {
            continue;
        }
        for sign in [1, -1] {
            let mut c = vec![Q::zero(); n];
            c[v] = q(sign);
            match lp::solve(&eq, &c) {
                LpOutcome::Optimal { value, .. } if value == &base[v] * q(sign) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// Coordinates fixed by the equalities alone (zero in every kernel vector),
/// found by exact row reduction.
fn pinned_by_equalities(eq: &lp::EqSystem, n: usize) -> Vec<bool> {
    let mut rows: Vec<Vec<Q>> = eq
        .rows
        .iter()
        .map(|(c, _)| {
            let mut r = vec![Q::zero(); n];
            for (j, v) in c {
                r[*j] += v;
            }
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = Q::one() / &rows[r][col];
        for j in col..n {
            rows[r][j] = &rows[r][j] * &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for j in col..n {
                    if !prow[j].is_zero() {
                        row[j] = &row[j] - &f * &prow[j];
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut fixed = vec![false; n];
    for (i, &pc) in pivots.iter().enumerate() {
        fixed[pc] = (0..n).all(|j| j == pc || rows[i][j].is_zero());
    }
    fixed
}
