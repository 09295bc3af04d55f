use super::{class_sequence, is_convex, validate_expansion, Expansion};
use crate::error::{Error, Result};
use crate::structures::builders::{hat_cover, hatq_full};
use crate::structures::{coloured_search, ranks, ClassSpec, Coloured, FiniteStructure};

/// The `2k` expansions of the full cover on `k` columns, one per transitive
/// transversal. Columns follow the transversal order and the transversal
/// point (label 1) leads its column.
pub fn hatq_full_expansions(k: usize) -> Vec<Expansion> {
    let base = hatq_full(k);
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let t: Vec<usize> = (0..k).map(|i| 2 * i + ((mask >> i) & 1) as usize).collect();
        let outdeg: Vec<usize> =
            t.iter().map(|&x| t.iter().filter(|&&y| base.has_arc(x, y)).count()).collect();
        let mut sorted = outdeg.clone();
        sorted.sort_unstable();
        if sorted != (0..k).collect::<Vec<_>>() {
            continue;
        }
        let mut cols: Vec<usize> = (0..k).collect();
        cols.sort_by_key(|&i| std::cmp::Reverse(outdeg[i]));
        let mut order = Vec::with_capacity(2 * k);
        let mut labels = vec![0u32; 2 * k];
        for &i in &cols {
            order.push(t[i]);
            order.push(t[i] ^ 1);
            labels[t[i]] = 1;
        }
        out.push(Expansion::new(base.clone()).with_order(order).with_labels(labels));
    }
    out.sort();
    out
}

/// The automorphism `(i, m) -> (i+1, m)` for `i < k-1` and
/// `(k-1, m) -> (0, 1-m)` of the full cover on `k` columns.
pub fn rotation(k: usize) -> Vec<usize> {
    (0..2 * k)
        .map(|v| {
            let (i, m) = (v / 2, v % 2);
            if i + 1 < k {
                2 * (i + 1) + m
            } else {
                1 - m
            }
        })
        .collect()
}

/// Ordered tournament of a cover expansion with full columns: for classes
/// `A_i < A_j` in the expansion order, `i -> j` iff the `I_0` point of
/// `A_i` points to the `I_1` point of `A_j`.
pub fn delta(e: &Expansion) -> Result<FiniteStructure> {
    let classes = e.base.perp_partition()?;
    if classes.iter().any(|c| c.len() != 2) {
        return Err(Error::Domain("every column must have two elements".into()));
    }
    let (Some(order), Some(labels)) = (&e.order, &e.labels) else {
        return Err(Error::Domain("expansion needs an order and labels".into()));
    };
    let class_of = e.base.perp_class_vector()?;
    if !is_convex(order, &class_of) {
        return Err(Error::Domain("order is not convex".into()));
    }
    let seq = class_sequence(order, &class_of);
    let mut i0 = Vec::new();
    let mut i1 = Vec::new();
    for &c in &seq {
        let (x, y) = (classes[c][0], classes[c][1]);
        match (labels[x], labels[y]) {
            (0, 1) => {
                i0.push(x);
                i1.push(y);
            }
            (1, 0) => {
                i0.push(y);
                i1.push(x);
            }
            _ => return Err(Error::Domain("each column needs one I_0 and one I_1 point".into())),
        }
    }
    let k = seq.len();
    let mut t = FiniteStructure::new(k);
    for i in 0..k {
        for j in i + 1..k {
            if e.base.has_arc(i0[i], i1[j]) {
                t.orient(i, j);
            } else {
                t.orient(j, i);
            }
        }
    }
    t.set_order(Some((0..k).collect()))?;
    Ok(t)
}

/// Inverse of [`delta`]: the cover of the tournament renumbered by its
/// order, with the P point of each column first and labelled `I_0`.
pub fn delta_inverse(t: &FiniteStructure) -> Result<Expansion> {
    let k = t.len();
    if (0..k).any(|x| (x + 1..k).any(|y| t.perp(x, y))) {
        return Err(Error::Domain("not a tournament".into()));
    }
    let order: Vec<usize> = t.order().map(|o| o.to_vec()).unwrap_or_else(|| (0..k).collect());
    let renamed = t.digraph().relabel(&ranks(&order));
    let base = hat_cover(&renamed);
    let mut labels = vec![0u32; 2 * k];
    let mut ord = Vec::with_capacity(2 * k);
    for i in 0..k {
        labels[2 * i] = 1;
        ord.push(2 * i + 1);
        ord.push(2 * i);
    }
    Ok(Expansion::new(base).with_order(ord).with_labels(labels))
}

fn carries(c1: &Coloured, c2: &Coloured, sigma: &[usize]) -> bool {
    (0..c1.n).all(|x| {
        c1.colour[x] == c2.colour[sigma[x]] && (0..c1.n).all(|y| c1.get(x, y) == c2.get(sigma[x], sigma[y]))
    })
}

/// An automorphism of the common base carrying `e1` to `e2`. On full
/// covers it is a power of [`rotation`]; otherwise it is found by search.
pub fn qhat_expansion_iso(e1: &Expansion, e2: &Expansion) -> Result<Vec<usize>> {
    if e1.base != e2.base {
        return Err(Error::Domain("expansions of different bases".into()));
    }
    for e in [e1, e2] {
        if !validate_expansion(&ClassSpec::HatQAge, e) {
            return Err(Error::Domain("not a valid cover expansion".into()));
        }
    }
    let (c1, c2) = (e1.coloured(), e2.coloured());
    let n = e1.len();
    if n.is_multiple_of(2) && e1.base == hatq_full(n / 2) {
        let rho = rotation(n / 2);
        let mut sigma: Vec<usize> = (0..n).collect();
        for _ in 0..n.max(1) {
            if carries(&c1, &c2, &sigma) {
                return Ok(sigma);
            }
            sigma = sigma.iter().map(|&v| rho[v]).collect();
        }
    }
    let mut found = None;
    coloured_search(&c1, &c2, &mut |m| {
        found = Some(m.to_vec());
        false
    });
    found.ok_or_else(|| Error::Domain("the expansions are not isomorphic".into()))
}
