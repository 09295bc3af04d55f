use super::{class_sequence, is_convex, within_orders, Expansion};
use crate::error::{Error, Result};
use crate::structures::{permutations, validate_structure, ClassSpec, FiniteStructure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Index of the column pair `p < q` among all pairs in lexicographic order.
fn pair_index(p: usize, q: usize, k: usize) -> usize {
    p * (2 * k - p - 1) / 2 + (q - p - 1)
}

/// Writes `arc(x, y) = f(x) xor g(y)` for `x` in `p`, `y` in `q`, with
/// `f(p[0]) = 0`.
fn split_block(a: &FiniteStructure, p: &[usize], q: &[usize], f: &mut [bool], g: &mut [bool]) {
    for &y in q {
        g[y] = a.has_arc(p[0], y);
    }
    for &x in p {
        f[x] = a.has_arc(x, q[0]) ^ g[q[0]];
    }
}

pub(super) fn expansions(a: &FiniteStructure) -> Result<Vec<Expansion>> {
    let classes = a.perp_partition()?;
    let k = classes.len();
    let n = a.len();
    let pairs = pair_count(k);
    let mut out = Vec::new();
    let (mut f, mut g) = (vec![false; n], vec![false; n]);
    for perm in permutations(k) {
        let ordered: Vec<&Vec<usize>> = perm.iter().map(|&c| &classes[c]).collect();
        let orders = within_orders(&ordered);
        for mask in 0u64..(1u64 << pairs) {
            let mut r = Vec::new();
            for p in 0..k {
                for q in p + 1..k {
                    let c = (mask >> pair_index(p, q, k)) & 1 == 1;
                    let (cp, cq) = (ordered[p], ordered[q]);
                    split_block(a, cp, cq, &mut f, &mut g);
                    for &x in cp {
                        for &y in cq {
                            if c ^ g[y] {
                                r.push((x, y));
                            }
                            if c ^ f[x] {
                                r.push((y, x));
                            }
                        }
                    }
                }
            }
            r.sort_unstable();
            for o in &orders {
                out.push(Expansion {
                    base: a.clone(),
                    order: Some(o.clone()),
                    labels: None,
                    aux: Some(r.clone()),
                });
            }
        }
    }
    Ok(out)
}

/// Adds one transversal vertex per column: `n + p` sits in the column at
/// position `p` of `column_order`, the new vertices form a linear
/// tournament in that order, and `bits[pair]` picks which of the two
/// parity-consistent amalgams is used between each pair of columns.
pub fn amalgamate_with_bits(
    a: &FiniteStructure,
    column_order: &[usize],
    bits: &[bool],
) -> Result<FiniteStructure> {
    if !validate_structure(a, &ClassSpec::SemiGenericAge)? {
        return Err(Error::Domain("structure is not semi-generic".into()));
    }
    let classes = a.perp_partition()?;
    let k = classes.len();
    let mut seen = vec![false; k];
    if column_order.len() != k
        || column_order.iter().any(|&c| c >= k || std::mem::replace(&mut seen[c], true))
    {
        return Err(Error::Param("column order is not a permutation of the columns".into()));
    }
    if bits.len() != pair_count(k) {
        return Err(Error::Param(format!("expected {} amalgam bits", pair_count(k))));
    }
    let n = a.len();
    let mut b = FiniteStructure::new(n + k);
    for (x, y) in a.arc_list() {
        b.orient(x, y);
    }
    let (mut f, mut g) = (vec![false; n], vec![false; n]);
    for p in 0..k {
        for q in p + 1..k {
            let (tp, tq) = (n + p, n + q);
            b.orient(tp, tq);
            let (cp, cq) = (&classes[column_order[p]], &classes[column_order[q]]);
            split_block(a, cp, cq, &mut f, &mut g);
            let c = bits[pair_index(p, q, k)];
            for &y in cq {
                if c ^ g[y] {
                    b.orient(tp, y);
                } else {
                    b.orient(y, tp);
                }
            }
            for &x in cp {
                if c ^ f[x] {
                    b.orient(tq, x);
                } else {
                    b.orient(x, tq);
                }
            }
        }
    }
    Ok(b)
}

/// [`amalgamate_with_bits`] with the amalgam bits drawn from `seed`.
pub fn amalgamate_transversal(
    a: &FiniteStructure,
    column_order: &[usize],
    seed: u64,
) -> Result<FiniteStructure> {
    let k = a.perp_partition()?.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<bool> = (0..pair_count(k)).map(|_| rng.gen()).collect();
    amalgamate_with_bits(a, column_order, &bits)
}

/// Builds the transversal amalgam certifying a semi-generic expansion and
/// checks every clause against it; `None` when the expansion is invalid.
pub fn semigeneric_witness(e: &Expansion) -> Option<FiniteStructure> {
    let a = &e.base;
    if e.labels.is_some() || !matches!(validate_structure(a, &ClassSpec::SemiGenericAge), Ok(true)) {
        return None;
    }
    let order = e.order.as_ref()?;
    let aux = e.aux.as_ref()?;
    let classes = a.perp_partition().ok()?;
    let class_of = a.perp_class_vector().ok()?;
    if !is_convex(order, &class_of) {
        return None;
    }
    if aux.iter().any(|&(x, y)| x == y || a.perp(x, y)) {
        return None;
    }
    let cols = class_sequence(order, &class_of);
    let k = cols.len();
    let n = a.len();
    let (mut f, mut g) = (vec![false; n], vec![false; n]);
    let mut bits = vec![false; pair_count(k)];
    for p in 0..k {
        for q in p + 1..k {
            let (cp, cq) = (&classes[cols[p]], &classes[cols[q]]);
            split_block(a, cp, cq, &mut f, &mut g);
            bits[pair_index(p, q, k)] = e.aux_has(cp[0], cq[0]) ^ g[cq[0]];
        }
    }
    let b = amalgamate_with_bits(a, &cols, &bits).ok()?;
    if !matches!(validate_structure(&b, &ClassSpec::SemiGenericAge), Ok(true)) {
        return None;
    }
    if b.perp_partition().ok()?.len() != k {
        return None;
    }
    let mut pos = vec![0; k];
    for (p, &c) in cols.iter().enumerate() {
        pos[c] = p;
    }
    for p in 0..k {
        if !classes[cols[p]].iter().all(|&x| b.perp(n + p, x)) {
            return None;
        }
        if !(p + 1..k).all(|q| b.has_arc(n + p, n + q)) {
            return None;
        }
    }
    for x in 0..n {
        let t = n + pos[class_of[x]];
        for y in 0..n {
            if x != y && !a.perp(x, y) && e.aux_has(x, y) != b.has_arc(t, y) {
                return None;
            }
        }
    }
    Some(b)
}

/// Column order forced by `R` on a semi-generic digraph carrying `R`, as
/// class indices of [`FiniteStructure::perp_partition`]; `None` if `R` is
/// not the reduct of a valid expansion.
pub fn sr_column_order(s: &FiniteStructure) -> Option<Vec<usize>> {
    let classes = s.perp_partition().ok()?;
    let k = classes.len();
    let mut before = vec![false; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let (p, q) = (&classes[i], &classes[j]);
            let rows_constant = q.iter().all(|&y| p.iter().all(|&x| s.aux(x, y) == s.aux(p[0], y)))
                && p.iter().all(|&x| q.iter().all(|&y| s.aux(y, x) == s.aux(q[0], x)));
            if !rows_constant {
                return None;
            }
            let mut p_first = true;
            let mut q_first = true;
            for &x in p {
                for &y in q {
                    let d = s.has_arc(x, y) ^ s.aux(x, y) ^ s.aux(y, x);
                    p_first &= !d;
                    q_first &= d;
                }
            }
            match (p_first, q_first) {
                (true, false) => before[i * k + j] = true,
                (false, true) => before[j * k + i] = true,
                _ => return None,
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let preds = |c: usize| (0..k).filter(|&d| before[d * k + c]).count();
    order.sort_by_key(|&c| preds(c));
    for (i, &c) in order.iter().enumerate() {
        for &d in &order[i + 1..] {
            if !before[c * k + d] {
                return None;
            }
        }
    }
    Some(order)
}

/// The fourth cross pair between two 2-element columns, oriented so that
/// the number of arcs from `left` to `right` is even.
pub fn complete_fourth_edge(
    left: [usize; 2],
    right: [usize; 2],
    arcs: &[(usize, usize)],
) -> Result<(usize, usize)> {
    let all = [left[0], left[1], right[0], right[1]];
    if (0..4).any(|i| (i + 1..4).any(|j| all[i] == all[j])) {
        return Err(Error::Config("columns must consist of four distinct vertices".into()));
    }
    if arcs.len() != 3 {
        return Err(Error::Config("exactly three cross arcs are required".into()));
    }
    let mut covered = Vec::new();
    let mut forward = 0;
    for &(x, y) in arcs {
        let pair = if left.contains(&x) && right.contains(&y) {
            forward += 1;
            (x, y)
        } else if right.contains(&x) && left.contains(&y) {
            (y, x)
        } else {
            return Err(Error::Config(format!("({x},{y}) is not a cross pair")));
        };
        if covered.contains(&pair) {
            return Err(Error::Config(format!("pair ({},{}) given twice", pair.0, pair.1)));
        }
        covered.push(pair);
    }
    let (l, r) = left
        .iter()
        .flat_map(|&l| right.iter().map(move |&r| (l, r)))
        .find(|p| !covered.contains(p))
        .expect("three of four pairs covered");
    Ok(if forward % 2 == 1 { (l, r) } else { (r, l) })
}
