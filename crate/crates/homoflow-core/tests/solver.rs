use homoflow_core::expansion_classes::enumerate_expansions;
use homoflow_core::random_expansion_solver::{
    build_constraints, builtin_fragment, check_cofinal_isomorphism, check_density_criterion,
    check_measure_consistency, feasible_set_is_a_point, hand_encoded_qhat_certificate, replay_certificate,
    solve_feasibility, solve_fragment, uniform_weight, uniqueness_probe, verify_certificate, CandidateFamily,
    Certificate, Conclusion, DensityOutcome, Feasibility, Fragment, LinearSystem, RandomExpansionMeasure, RowRef,
    BUILTIN_FRAGMENTS,
};
use homoflow_core::structures::age_up_to;
use homoflow_core::structures::builders::hatq_full;
use homoflow_core::trees::build_nice_tree_family;
use homoflow_core::{ClassSpec, FiniteStructure};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Evaluates every row of the system at the given weights.
fn satisfies(sys: &LinearSystem, w: &[BigRational]) -> bool {
    sys.rows.iter().all(|r| {
        let lhs: BigRational = r.coeffs.iter().map(|&(j, c)| &w[j] * BigRational::from_integer(c.into())).sum();
        lhs == BigRational::from_integer(r.rhs.into())
    })
}

fn uniform_vector(sys: &LinearSystem) -> Vec<BigRational> {
    sys.expansions
        .iter()
        .flat_map(|list| std::iter::repeat_n(q(1, list.len() as i64), list.len()))
        .collect()
}

fn measure_vector(sys: &LinearSystem, m: &RandomExpansionMeasure) -> Vec<BigRational> {
    (0..sys.num_vars()).map(|v| m.weight(sys.expansion_of(v)).unwrap()).collect()
}

#[test]
fn single_point_linear_order_system() {
    let spec = ClassSpec::Tournaments;
    let frag = Fragment::from_structures(&spec, vec![FiniteStructure::new(1)]).unwrap();
    let sys = build_constraints(&spec, &frag).unwrap();
    assert_eq!(sys.num_vars(), 1);
    assert_eq!(sys.rows.len(), 1);
    assert_eq!(sys.rows[0].coeffs, vec![(0, 1)]);
    assert_eq!(sys.rows[0].rhs, 1);
    match solve_feasibility(&sys).unwrap() {
        Feasibility::Feasible(m) => assert!(m.weight(sys.expansion_of(0)).unwrap().is_one()),
        Feasibility::Infeasible(_) => panic!("a single point is consistent"),
    }
}

#[test]
fn local_order_system_has_both_extension_shapes() {
    let (spec, frag) = builtin_fragment("s2").unwrap();
    let sys = build_constraints(&spec, &frag).unwrap();
    let edge = frag.structures.iter().position(|s| s.len() == 2).unwrap();
    let widths: Vec<usize> = sys
        .rows
        .iter()
        .filter(|r| match &r.reference {
            RowRef::Extension { embedding, .. } => frag.embeddings[*embedding].from == edge,
            _ => false,
        })
        .map(|r| r.coeffs.len())
        .collect();
    // One expansion on the right, and a sum of two.
    assert!(widths.contains(&2), "{widths:?}");
    assert!(widths.contains(&3), "{widths:?}");
}

#[test]
fn domega_small_fragment_is_consistent() {
    let spec = ClassSpec::DomegaAge;
    let structures = vec![FiniteStructure::new(1), FiniteStructure::new(2), FiniteStructure::from_arcs(2, &[(0, 1)]).unwrap()];
    let frag = Fragment::from_structures(&spec, structures).unwrap();
    let sys = build_constraints(&spec, &frag).unwrap();
    assert!(satisfies(&sys, &uniform_vector(&sys)));
    let cert = solve_fragment(&spec, &frag).unwrap();
    assert!(!cert.is_infeasible());
    assert!(verify_certificate(&cert, &spec));
    let m = cert.measure.as_ref().unwrap();
    let w = measure_vector(&sys, m);
    assert!(w.iter().all(|x| *x > BigRational::zero()));
    assert!(satisfies(&sys, &w));
}

#[test]
fn every_builtin_fragment_is_refuted_with_a_checkable_certificate() {
    for name in BUILTIN_FRAGMENTS {
        let (spec, frag) = builtin_fragment(name).unwrap();
        let cert = solve_fragment(&spec, &frag).unwrap();
        assert!(cert.is_infeasible(), "{name}");
        assert!(verify_certificate(&cert, &spec), "{name}");
        replay_certificate(&cert, &spec).unwrap();
        // No positive weighting exists; the uniform one in particular fails.
        let sys = build_constraints(&spec, &frag).unwrap();
        assert!(!satisfies(&sys, &uniform_vector(&sys)), "{name}");
    }
}

#[test]
fn local_order_forces_the_middle_labelling_to_zero() {
    let (spec, frag) = builtin_fragment("s2").unwrap();
    let cert = solve_fragment(&spec, &frag).unwrap();
    let Conclusion::ForcedZero { forced, .. } = &cert.conclusion else { panic!("{:?}", cert.conclusion) };
    assert!(forced.iter().any(|f| f.structure == 0 && f.expansion.labels.as_deref() == Some(&[0, 0, 1][..])));
}

#[test]
fn column_clash_values() {
    let (spec, frag) = builtin_fragment("qhat").unwrap();
    let cert = solve_fragment(&spec, &frag).unwrap();
    let Conclusion::Contradiction { clash: Some(c) } = &cert.conclusion else { panic!("{:?}", cert.conclusion) };
    let mut vals = [c.left_value.clone(), c.right_value.clone()];
    vals.sort();
    assert_eq!(vals, [q(1, 6), q(1, 4)]);
}

#[test]
fn tampered_certificates_are_rejected() {
    let (spec, frag) = builtin_fragment("p").unwrap();
    let cert = solve_fragment(&spec, &frag).unwrap();
    let sys = build_constraints(&spec, &frag).unwrap();

    let mut tampered = 0;
    for (i, step) in cert.steps.iter().enumerate() {
        let RowRef::Extension { embedding, expansion } = &step.row else { continue };
        let list = &sys.expansions[frag.embeddings[*embedding].from];
        for other in list.iter().filter(|e| *e != expansion) {
            let mut bad = cert.clone();
            bad.steps[i].row = RowRef::Extension { embedding: *embedding, expansion: other.clone() };
            assert!(!verify_certificate(&bad, &spec));
            tampered += 1;
        }
    }
    assert!(tampered > 0);

    let mut bad = cert.clone();
    bad.steps[0].multiplier += q(1, 7);
    assert!(!verify_certificate(&bad, &spec));
    assert!(!verify_certificate(&cert, &ClassSpec::Tournaments));
}

#[test]
fn certificates_survive_json() {
    for name in BUILTIN_FRAGMENTS {
        let (spec, frag) = builtin_fragment(name).unwrap();
        let cert = solve_fragment(&spec, &frag).unwrap();
        let back: Certificate = serde_json::from_value(cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back, &spec));
    }
}

#[test]
fn hand_encoded_column_certificate() {
    let cert = hand_encoded_qhat_certificate().unwrap();
    assert!(cert.is_infeasible());
    assert!(verify_certificate(&cert, &ClassSpec::HatQAge));
}

#[test]
fn tournament_age_up_to_three_is_uniform() {
    let spec = ClassSpec::Tournaments;
    let tops: Vec<_> = age_up_to(&spec, 3).unwrap();
    let frag = Fragment::closed(&spec, tops).unwrap();
    let sys = build_constraints(&spec, &frag).unwrap();
    assert!(satisfies(&sys, &uniform_vector(&sys)));
    let Feasibility::Feasible(m) = solve_feasibility(&sys).unwrap() else { panic!("consistent") };
    assert_eq!(measure_vector(&sys, &m), uniform_vector(&sys));
}

#[test]
fn enlarging_a_refuted_fragment_keeps_it_refuted() {
    for name in ["s2", "p"] {
        let (spec, frag) = builtin_fragment(name).unwrap();
        let mut tops = frag.structures.clone();
        tops.extend(age_up_to(&spec, 3).unwrap());
        let bigger = Fragment::closed(&spec, tops).unwrap();
        let cert = solve_fragment(&spec, &bigger).unwrap();
        assert!(cert.is_infeasible(), "{name}");
        assert!(verify_certificate(&cert, &spec), "{name}");
    }
}

#[test]
fn density_examples() {
    assert!(check_density_criterion(&ClassSpec::DomegaAge, 4).unwrap().passed());
    assert!(check_density_criterion(&ClassSpec::Tournaments, 4).unwrap().passed());
    match check_density_criterion(&ClassSpec::PosetAge, 3).unwrap() {
        DensityOutcome::Counterexample(c) => {
            assert_ne!(c.left_count, c.right_count);
            assert_eq!(c.left.base, c.right.base);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn cofinal_isomorphic_families() {
    let trees = CandidateFamily::Trees((1..=3).map(build_nice_tree_family).collect());
    assert!(check_cofinal_isomorphism(&ClassSpec::TreeLeafAge, &trees, 4).unwrap());
    let columns = CandidateFamily::Structures((1..=4).map(hatq_full).collect());
    assert!(check_cofinal_isomorphism(&ClassSpec::HatQAge, &columns, 4).unwrap());
    let spec = ClassSpec::DnAge(2);
    let members = CandidateFamily::Structures(age_up_to(&spec, 3).unwrap());
    assert!(!check_cofinal_isomorphism(&spec, &members, 3).unwrap());
}

#[test]
fn domega_probe_pins_symmetric_pieces_only() {
    let probe = uniqueness_probe(&ClassSpec::DomegaAge, 2).unwrap();
    assert_eq!((probe[0].fragments, probe[0].unique), (1, 1));
    // The two points are swapped by an automorphism; the edge's two orders
    // are not, and nothing below it ties them.
    assert_eq!((probe[1].fragments, probe[1].unique), (2, 1));

    let spec = ClassSpec::DomegaAge;
    let edge = FiniteStructure::from_arcs(2, &[(0, 1)]).unwrap();
    let sys = build_constraints(&spec, &Fragment::closed(&spec, vec![edge]).unwrap()).unwrap();
    assert!(!feasible_set_is_a_point(&sys).unwrap());
    for x in [q(1, 3), q(1, 2), q(9, 10)] {
        let w: Vec<BigRational> = (0..sys.num_vars())
            .map(|v| match sys.expansion_of(v).base.len() {
                2 if sys.expansion_of(v).less(0, 1) => x.clone(),
                2 => BigRational::one() - &x,
                _ => BigRational::one(),
            })
            .collect();
        assert!(satisfies(&sys, &w));
    }
}

#[test]
fn uniform_weights_are_consistent_on_dense_classes() {
    for spec in [ClassSpec::Tournaments, ClassSpec::DomegaAge, ClassSpec::HatTAge, ClassSpec::DnAge(2)] {
        let report = check_measure_consistency(&spec, 4, &uniform_weight(&spec)).unwrap();
        assert!(report.ok(), "{}: {:?}", spec.tag(), report.failures.first());
        assert!(report.extension_rows > 0);
    }
    let spec = ClassSpec::PosetAge;
    assert!(!check_measure_consistency(&spec, 3, &uniform_weight(&spec)).unwrap().ok());
}

#[test]
fn uniform_measure_helper_matches_counts() {
    let spec = ClassSpec::DomegaAge;
    let members = age_up_to(&spec, 3).unwrap();
    let m = RandomExpansionMeasure::uniform(&spec, &members).unwrap();
    for a in &members {
        assert!(m.is_probability_on(&spec, a).unwrap());
        let exps = enumerate_expansions(&spec, a).unwrap();
        for e in &exps {
            assert_eq!(m.weight(e).unwrap(), q(1, exps.len() as i64));
        }
    }
}
