use super::certificate::{Certificate, CertificateKind, CertificateStep, Clash, Conclusion};
use super::lp::Q;
use super::system::{build_constraints, Fragment, RowRef};
use crate::error::{Error, Result};
use crate::expansion_classes::{class_sequence, Expansion};
use crate::structures::builders::hatq_full;
use crate::structures::{ClassSpec, FiniteStructure};

/// Names accepted by [`builtin_fragment`]; anything after the first `-`
/// is a free-form suffix.
pub const BUILTIN_FRAGMENTS: [&str; 5] = ["s2", "s3", "p", "p3", "qhat"];

/// `x -> y`, `x -> c`, `y -> c` on `x = 0`, `y = 1`, `c = 2`, together with
/// the edge `x -> y`.
fn local_order_triangle() -> Vec<FiniteStructure> {
    let c = FiniteStructure::from_arcs(3, &[(0, 1), (0, 2), (1, 2)]).expect("valid");
    let b = FiniteStructure::from_arcs(3, &[(0, 2), (2, 1), (0, 1)]).expect("valid");
    let a = FiniteStructure::from_arcs(2, &[(0, 1)]).expect("valid");
    vec![c, b, a]
}

/// `a -> b` with `c` unrelated, on `a = 0`, `b = 1`, `c = 2`, and its
/// restrictions to `{a, c}` and `{b, c}`.
fn chain_and_point() -> Vec<FiniteStructure> {
    let c = FiniteStructure::from_arcs(3, &[(0, 1)]).expect("valid");
    let a = c.induced(&[0, 2]);
    let b = c.induced(&[1, 2]);
    vec![c, a, b]
}

/// Three full columns `B_i = {(i,C), (i,P)}` as vertices `2i` and `2i+1`:
/// on each level the later column points to the earlier one, and across
/// levels the earlier column points to the later one. The second
/// structure is the initial segment `B_1 ⊔ B_2`.
pub fn qhat_columns() -> (FiniteStructure, FiniteStructure) {
    let b = hatq_full(3);
    let a = b.induced(&[0, 1, 2, 3]);
    (b, a)
}

/// The class and fragment of a built-in non-amenability witness.
pub fn builtin_fragment(name: &str) -> Result<(ClassSpec, Fragment)> {
    let key = name.trim().to_ascii_lowercase();
    let key = key.strip_prefix("builtin:").unwrap_or(&key);
    let base = key.split('-').next().unwrap_or_default();
    let (spec, structures) = match base {
        "s2" => (ClassSpec::S2Age, local_order_triangle()),
        "s3" => (ClassSpec::S3Age, local_order_triangle()),
        "p" => (ClassSpec::PosetAge, chain_and_point()),
        "p3" => (ClassSpec::P3Age, chain_and_point()),
        "qhat" | "q" => {
            let (b, a) = qhat_columns();
            (ClassSpec::HatQAge, vec![b, a])
        }
        _ => return Err(Error::Config(format!("unknown built-in fragment `{name}`"))),
    };
    Ok((spec.clone(), Fragment::from_structures(&spec, structures)?.with_name(base)))
}

/// The expansion of the two-column segment ordered `B_1 < B_2` with
/// `I_1 = {(1,C), (2,P)}`.
fn qhat_segment_expansion(list: &[Expansion]) -> Option<Expansion> {
    list.iter()
        .find(|e| {
            let labels = e.labels.as_deref().unwrap_or_default();
            let class_of: Vec<usize> = (0..4).map(|v| v / 2).collect();
            let seq = e.order.as_ref().map(|o| class_sequence(o, &class_of));
            labels == [1, 0, 0, 1] && seq.as_deref() == Some(&[0, 1][..])
        })
        .cloned()
}

/// The two-column clash written out by hand: `4·(E)` for the segment
/// expansion, `-1·(P)` and `-1·(I)` on the segment, `2/3·(P)` and
/// `2/3·(I)` on the three columns. The sum reads `0 = -1/3`.
pub fn hand_encoded_qhat_certificate() -> Result<Certificate> {
    let (spec, frag) = builtin_fragment("qhat")?;
    let sys = build_constraints(&spec, &frag)?;
    let (b_idx, a_idx) = (0, 1);
    let a_star = qhat_segment_expansion(&sys.expansions[a_idx])
        .ok_or_else(|| Error::Domain("segment expansion not found".into()))?;
    let emb = frag
        .embeddings
        .iter()
        .position(|e| e.from == a_idx && e.to == b_idx && e.map == [0, 1, 2, 3])
        .ok_or_else(|| Error::Domain("initial segment embedding not stored".into()))?;
    let ext = RowRef::Extension { embedding: emb, expansion: a_star.clone() };
    let ext_row = sys.instantiate(&ext).map_err(Error::Domain)?;
    if ext_row.coeffs.len() != 2 {
        return Err(Error::Domain("segment expansion does not extend uniquely".into()));
    }
    let b_star = sys.expansion_of(ext_row.coeffs[1].0).clone();

    let rat = |n: i64, d: i64| Q::new(n.into(), d.into());
    let mut rows: Vec<(Q, RowRef)> = vec![(rat(4, 1), ext), (rat(-1, 1), RowRef::Probability { structure: a_idx })];
    for other in sys.expansions[a_idx].iter().filter(|e| **e != a_star) {
        rows.push((
            rat(-1, 1),
            RowRef::Isomorphism { structure: a_idx, left: a_star.clone(), right: other.clone() },
        ));
    }
    rows.push((rat(2, 3), RowRef::Probability { structure: b_idx }));
    for other in sys.expansions[b_idx].iter().filter(|e| **e != b_star) {
        rows.push((
            rat(2, 3),
            RowRef::Isomorphism { structure: b_idx, left: b_star.clone(), right: other.clone() },
        ));
    }
    let mut steps = Vec::with_capacity(rows.len());
    for (multiplier, row) in rows {
        let inst = sys.instantiate(&row).map_err(Error::Domain)?;
        steps.push(CertificateStep { multiplier, equation: sys.render(&inst), row });
    }
    let clash = Clash {
        embedding: emb,
        left: a_star,
        left_value: rat(1, sys.expansions[a_idx].len() as i64),
        right: b_star,
        right_value: rat(1, sys.expansions[b_idx].len() as i64),
    };
    Ok(Certificate {
        kind: CertificateKind::Infeasible,
        class: spec.tag(),
        fragment: frag,
        steps,
        conclusion: Conclusion::Contradiction { clash: Some(clash) },
        measure: None,
    })
}
