use super::{first_embedding, ClassSpec, FiniteStructure};
use crate::error::{Error, Result};

/// True iff `s` belongs to the age named by `spec`.
///
/// Malformed input is an error, distinct from `Ok(false)`.
pub fn validate_structure(s: &FiniteStructure, spec: &ClassSpec) -> Result<bool> {
    s.check_well_formed()?;
    spec.check()?;
    Ok(match spec {
        ClassSpec::Tournaments => is_tournament(s),
        ClassSpec::QAge => is_tournament(s) && is_transitive(s),
        ClassSpec::EdgelessAge => s.arc_list().is_empty(),
        ClassSpec::S2Age => !s_n_labelings(s, 2).is_empty(),
        ClassSpec::S3Age => !s_n_labelings(s, 3).is_empty(),
        ClassSpec::PosetAge => is_transitive(s),
        ClassSpec::P3Age => !p3_labelings(s).is_empty(),
        ClassSpec::DnAge(n) => s.perp_partition().map(|p| p.len() <= *n).unwrap_or(false),
        ClassSpec::DomegaAge => s.perp_partition().is_ok(),
        ClassSpec::HatTAge => is_hat_t(s),
        ClassSpec::HatQAge => hatq_completion(s).is_some(),
        ClassSpec::SemiGenericAge => is_semi_generic(s),
        ClassSpec::SemiGenericRAge => {
            s.has_aux()
                && is_semi_generic(s)
                && crate::expansion_classes::sr_column_order(s).is_some()
        }
        ClassSpec::GnAge(n) => independence_number_at_most(s, *n),
        ClassSpec::FTAge(list) => {
            let d = s.digraph();
            list.iter().all(|t| first_embedding(&t.digraph(), &d).is_none())
        }
        ClassSpec::Composition(k, l) => is_composite_member(s, k, l)?,
        ClassSpec::TreeLeafAge | ClassSpec::OrderedTreeLeafAge => {
            return Err(Error::Unsupported(
                "leaf structures carry a ternary relation; use the trees module".into(),
            ))
        }
    })
}

fn is_tournament(s: &FiniteStructure) -> bool {
    (0..s.len()).all(|x| (x + 1..s.len()).all(|y| !s.perp(x, y)))
}

fn is_transitive(s: &FiniteStructure) -> bool {
    let n = s.len();
    for x in 0..n {
        for y in 0..n {
            if !s.has_arc(x, y) {
                continue;
            }
            for z in 0..n {
                if s.has_arc(y, z) && !s.has_arc(x, z) {
                    return false;
                }
            }
        }
    }
    true
}

/// Every partition class has at most two elements, and each vertex sends
/// exactly one arc into every two-element class not containing it.
fn is_hat_t(s: &FiniteStructure) -> bool {
    let Ok(classes) = s.perp_partition() else { return false };
    if classes.iter().any(|c| c.len() > 2) {
        return false;
    }
    for x in 0..s.len() {
        for c in classes.iter().filter(|c| c.len() == 2 && !c.contains(&x)) {
            if c.iter().filter(|&&y| s.has_arc(x, y)).count() != 1 {
                return false;
            }
        }
    }
    true
}

/// Block parity: for columns `P != Q`, every 2x2 sub-block of the arc
/// matrix from `P` to `Q` holds an even number of arcs.
fn is_semi_generic(s: &FiniteStructure) -> bool {
    let Ok(classes) = s.perp_partition() else { return false };
    for (i, p) in classes.iter().enumerate() {
        for q in classes.iter().skip(i + 1) {
            for (a, &x) in p.iter().enumerate() {
                for &x2 in &p[a + 1..] {
                    for (b, &y) in q.iter().enumerate() {
                        for &y2 in &q[b + 1..] {
                            let parity = s.has_arc(x, y) as u8
                                ^ s.has_arc(x, y2) as u8
                                ^ s.has_arc(x2, y) as u8
                                ^ s.has_arc(x2, y2) as u8;
                            if parity != 0 {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// No independent set (pairwise ⊥) of size `m + 1`.
fn independence_number_at_most(s: &FiniteStructure, m: usize) -> bool {
    fn grow(s: &FiniteStructure, set: &mut Vec<usize>, start: usize, target: usize) -> bool {
        if set.len() == target {
            return true;
        }
        for v in start..s.len() {
            if set.iter().all(|&u| s.perp(u, v)) {
                set.push(v);
                if grow(s, set, v + 1, target) {
                    return true;
                }
                set.pop();
            }
        }
        false
    }
    !grow(s, &mut Vec::new(), 0, m + 1)
}

fn is_composite_member(s: &FiniteStructure, k: &ClassSpec, l: &ClassSpec) -> Result<bool> {
    match crate::composition::quotient_structure(s) {
        Ok(c) => {
            if !validate_structure(&c.quotient, k)? {
                return Ok(false);
            }
            for part in &c.classes {
                if !validate_structure(part, l)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Err(Error::NotACongruence(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Arc predicate of the sector model: vertex `(k, r)` with `k` the sector
/// and `r` the offset inside it.
fn sector_arc(n: u32, kx: u32, ky: u32, rx_lt_ry: bool) -> bool {
    let d = (ky + n - kx) % n;
    match d {
        0 => rx_lt_ry,
        1 => !rx_lt_ry,
        _ => false,
    }
}

/// Admissible offset comparisons for a pair given labels: bit 0 for
/// `r_x < r_y`, bit 1 for `r_x > r_y`.
fn sector_options(s: &FiniteStructure, n: u32, lab: &[u32], x: usize, y: usize) -> u8 {
    let mut out = 0;
    for (bit, lt) in [(1u8, true), (2u8, false)] {
        if sector_arc(n, lab[x], lab[y], lt) == s.has_arc(x, y)
            && sector_arc(n, lab[y], lab[x], !lt) == s.has_arc(y, x)
        {
            out |= bit;
        }
    }
    out
}

/// All sector labelings `V -> Z_n` realizable on the circle model of `S(n)`.
pub fn s_n_labelings(s: &FiniteStructure, n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut lab = vec![0u32; s.len()];
    fn go(s: &FiniteStructure, n: u32, i: usize, lab: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == lab.len() {
            if offsets_acyclic(s, n, lab) {
                out.push(lab.clone());
            }
            return;
        }
        for k in 0..n {
            lab[i] = k;
            if (0..i).all(|j| sector_options(s, n, lab, j, i) != 0) {
                go(s, n, i + 1, lab, out);
            }
        }
    }
    go(s, n, 0, &mut lab, &mut out);
    out
}

/// The forced offset comparisons must admit a strict total order.
fn offsets_acyclic(s: &FiniteStructure, n: u32, lab: &[u32]) -> bool {
    let v = s.len();
    let mut less = vec![false; v * v];
    for x in 0..v {
        for y in x + 1..v {
            match sector_options(s, n, lab, x, y) {
                1 => less[x * v + y] = true,
                2 => less[y * v + x] = true,
                3 => {}
                _ => return false,
            }
        }
    }
    is_acyclic(v, &less)
}

pub(crate) fn is_acyclic(v: usize, less: &[bool]) -> bool {
    let mut indeg = vec![0usize; v];
    for x in 0..v {
        for y in 0..v {
            if less[x * v + y] {
                indeg[y] += 1;
            }
        }
    }
    let mut stack: Vec<usize> = (0..v).filter(|&x| indeg[x] == 0).collect();
    let mut seen = 0;
    while let Some(x) = stack.pop() {
        seen += 1;
        for y in 0..v {
            if less[x * v + y] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    stack.push(y);
                }
            }
        }
    }
    seen == v
}

/// Labelings into `P_0, P_1, P_2` whose untwisting is a partial order,
/// together with that strict order as a matrix (`m[x*n+y]` iff `x < y`).
pub fn p3_labelings(s: &FiniteStructure) -> Vec<(Vec<u32>, Vec<bool>)> {
    let n = s.len();
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let lab: Vec<u32> = (0..n)
            .map(|_| {
                let l = (c % 3) as u32;
                c /= 3;
                l
            })
            .collect();
        let less = untwist_labels(s, &lab);
        if is_strict_order_matrix(n, &less) {
            out.push((lab, less));
        }
    }
    out.sort();
    out
}

/// Untwisted strict order for a labeling.
pub fn untwist_labels(s: &FiniteStructure, lab: &[u32]) -> Vec<bool> {
    let n = s.len();
    let mut less = vec![false; n * n];
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let d = (lab[y] + 3 - lab[x]) % 3;
            // Decide `x < y` from the arcs between the pair.
            less[x * n + y] = match d {
                0 => s.has_arc(x, y),
                // y one part above x: ⊥ means x < y.
                1 => s.perp(x, y),
                // x one part above y: y -> x means x < y.
                _ => s.has_arc(y, x),
            };
        }
    }
    less
}

pub fn is_strict_order_matrix(n: usize, less: &[bool]) -> bool {
    for x in 0..n {
        for y in 0..n {
            if less[x * n + y] && less[y * n + x] {
                return false;
            }
            if !less[x * n + y] {
                continue;
            }
            for z in 0..n {
                if less[y * n + z] && !less[x * n + z] {
                    return false;
                }
            }
        }
    }
    true
}

/// Placement of a structure inside the full 2-cover of a linear order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatQCompletion {
    /// Number of columns.
    pub k: usize,
    /// Per vertex: column position `0..k` and level (0 = C, 1 = P).
    pub coords: Vec<(usize, u8)>,
}

/// Finds an embedding into the full cover on as many columns as `s` has
/// classes, if one exists.
pub fn hatq_completion(s: &FiniteStructure) -> Option<HatQCompletion> {
    if !is_hat_t(s) {
        return None;
    }
    let classes = s.perp_partition().ok()?;
    let k = classes.len();
    let mut level = vec![0u8; s.len()];
    for mask in 0u64..(1u64 << k) {
        for (ci, c) in classes.iter().enumerate() {
            let flip = ((mask >> ci) & 1) as u8;
            for (pos, &x) in c.iter().enumerate() {
                level[x] = (pos as u8) ^ flip;
            }
        }
        // Base tournament on classes: arc XOR same-level.
        let mut base = vec![false; k * k];
        let mut consistent = true;
        'pairs: for ci in 0..k {
            for cj in 0..k {
                if ci == cj {
                    continue;
                }
                let mut val = None;
                for &x in &classes[ci] {
                    for &y in &classes[cj] {
                        let b = s.has_arc(x, y) ^ (level[x] == level[y]);
                        if *val.get_or_insert(b) != b {
                            consistent = false;
                            break 'pairs;
                        }
                    }
                }
                base[ci * k + cj] = val.unwrap_or(false);
            }
        }
        if !consistent {
            continue;
        }
        let transitive = (0..k).all(|a| {
            (0..k).all(|b| !base[a * k + b] || (0..k).all(|c| !base[b * k + c] || base[a * k + c]))
        });
        if !transitive {
            continue;
        }
        let pos: Vec<usize> =
            (0..k).map(|c| (0..k).filter(|&d| d != c && base[d * k + c]).count()).collect();
        let mut coords = vec![(0, 0); s.len()];
        for (ci, c) in classes.iter().enumerate() {
            for &x in c {
                coords[x] = (pos[ci], level[x]);
            }
        }
        return Some(HatQCompletion { k, coords });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::builders;

    #[test]
    fn edgeless_in_gn() {
        let i3 = FiniteStructure::new(3);
        assert!(validate_structure(&i3, &ClassSpec::GnAge(3)).unwrap());
        assert!(!validate_structure(&i3, &ClassSpec::GnAge(2)).unwrap());
    }

    #[test]
    fn cycle_is_semi_generic() {
        // Singleton columns impose no parity constraint.
        assert!(validate_structure(&FiniteStructure::cycle3(), &ClassSpec::SemiGenericAge).unwrap());
    }

    #[test]
    fn general_position_two_columns() {
        let s = builders::semi_generic_general_position();
        assert!(validate_structure(&s, &ClassSpec::SemiGenericAge).unwrap());
        assert_eq!(s.perp_partition().unwrap().len(), 2);
    }

    #[test]
    fn s2_contains_tournaments_on_three_vertices() {
        assert!(validate_structure(&FiniteStructure::cycle3(), &ClassSpec::S2Age).unwrap());
        assert!(validate_structure(&FiniteStructure::linear_tournament(3), &ClassSpec::S2Age).unwrap());
        // S(2) is a tournament class.
        assert!(!validate_structure(&FiniteStructure::new(2), &ClassSpec::S2Age).unwrap());
        // S(3) allows non-adjacent pairs.
        assert!(validate_structure(&FiniteStructure::new(2), &ClassSpec::S3Age).unwrap());
    }

    #[test]
    fn hat_q_full_columns_complete() {
        for k in 1..=4 {
            let q = builders::hatq_full(k);
            let c = hatq_completion(&q).expect("full cover completes");
            assert_eq!(c.k, k);
        }
        // A source over a 3-cycle is not switching equivalent to a linear order.
        let t = FiniteStructure::from_arcs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)]).unwrap();
        let cover = builders::hat_cover(&t);
        assert!(validate_structure(&cover, &ClassSpec::HatTAge).unwrap());
        assert!(!validate_structure(&cover, &ClassSpec::HatQAge).unwrap());
        // Every 3-tournament is switching equivalent to the linear one.
        let c3 = builders::hat_cover(&FiniteStructure::cycle3());
        assert!(validate_structure(&c3, &ClassSpec::HatQAge).unwrap());
    }

    #[test]
    fn malformed_is_an_error() {
        let mut s = FiniteStructure::new(2);
        s.set_aux(Some(&[(0, 1)])).unwrap();
        assert!(matches!(
            validate_structure(&s, &ClassSpec::SemiGenericRAge),
            Err(Error::Malformed(_))
        ));
    }
}
