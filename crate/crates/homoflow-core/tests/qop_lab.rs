use homoflow_core::qop_lab::{
    build_girth4_hypergraph, default_h, expected_embeddings, mcdiarmid_bound, plant_hypergraph_digraph,
    run_hypergraph_method, run_qop_experiment, sample_structure, sensitivity_bound, single_edge_sensitivity,
    Hypergraph, PlantMode, QopParams, Sampler, GIRTH4_EDGE_CONSTANT,
};
use homoflow_core::structures::{count_embeddings, is_isomorphic, validate_structure};
use homoflow_core::{ClassSpec, FiniteStructure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::VecDeque;

const SAMPLERS: [Sampler; 4] = [Sampler::DomegaRandom, Sampler::DnRandom, Sampler::HatTRandom, Sampler::SRRandom];

fn params(n: usize, k: usize) -> QopParams {
    QopParams { n, k, m: 2, big_m: 2, ..QopParams::default() }
}

#[test]
fn mcdiarmid_examples() {
    let b = mcdiarmid_bound(&[1.0], 1.0).unwrap();
    assert!((b - 2.0 * (-2.0f64).exp()).abs() < 1e-12);
    assert!((b - 0.27067).abs() < 1e-5);
    let (c, n, eps) = (0.3, 17, 0.8);
    let b = mcdiarmid_bound(&vec![c; n], eps).unwrap();
    assert!((b - 2.0 * (-2.0 * eps * eps / (n as f64 * c * c)).exp()).abs() < 1e-12);
    assert!((mcdiarmid_bound(&[1.0, 2.0], 1e-9).unwrap() - 2.0).abs() < 1e-9);
    let mut last = f64::INFINITY;
    for e in 1..20 {
        let b = mcdiarmid_bound(&[0.5; 4], e as f64 / 10.0).unwrap();
        assert!(b < last);
        last = b;
    }
    assert!(mcdiarmid_bound(&[], 1.0).is_err());
    assert!(mcdiarmid_bound(&[1.0], 0.0).is_err());
}

#[test]
fn closed_form_expectations() {
    for n in 1..6 {
        for m in 1..4 {
            let p = QopParams { n, k: 1, m, a: vec![1], ..QopParams::default() };
            assert_eq!(expected_embeddings(Sampler::DomegaRandom, &p).unwrap(), BigRational::from_integer((n * m).into()));
            // Every vertex is an embedding of a single point.
            let h = default_h(Sampler::DomegaRandom, &p).unwrap();
            let g = sample_structure(Sampler::DomegaRandom, &p, n as u64).unwrap();
            assert_eq!(count_embeddings(&h, &g.structure), n * m);
        }
        let p = QopParams { n, k: 1, ..QopParams::default() };
        assert_eq!(expected_embeddings(Sampler::HatTRandom, &p).unwrap(), BigRational::from_integer((2 * n).into()));
    }
    let p = QopParams { n: 4, k: 2, ..QopParams::default() };
    assert_eq!(expected_embeddings(Sampler::HatTRandom, &p).unwrap(), BigRational::from_integer(24.into()));
}

#[test]
fn monte_carlo_means_match_expectations() {
    let seeds = 10_000u64;
    for sampler in SAMPLERS {
        for (n, k) in [(2, 1), (4, 2), (8, 2)] {
            let p = params(n, k);
            let h = default_h(sampler, &p).unwrap();
            let want = expected_embeddings(sampler, &p).unwrap().to_f64().unwrap();
            let counts: Vec<f64> = (1..=seeds)
                .map(|s| count_embeddings(&h, &sample_structure(sampler, &p, s).unwrap().structure) as f64)
                .collect();
            let mean = counts.iter().sum::<f64>() / seeds as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
            let se = (var / seeds as f64).sqrt();
            assert!(
                (mean - want).abs() <= 4.0 * se + 1e-9,
                "{} n={n} k={k}: mean {mean} vs {want} (se {se})",
                sampler.name()
            );
        }
    }
}

#[test]
fn samplers_are_seed_deterministic() {
    for sampler in SAMPLERS {
        let p = params(5, 2);
        let a = sample_structure(sampler, &p, 42).unwrap();
        assert_eq!(a, sample_structure(sampler, &p, 42).unwrap());
        assert!((43..53).any(|s| sample_structure(sampler, &p, s).unwrap().structure != a.structure));
    }
}

#[test]
fn small_samples() {
    let p = QopParams { n: 2, k: 1, m: 1, ..QopParams::default() };
    let mut forward = 0;
    for s in 0..400 {
        let g = sample_structure(Sampler::DomegaRandom, &p, s).unwrap().structure;
        assert_eq!(g.arc_list().len(), 1);
        forward += usize::from(g.has_arc(0, 1));
    }
    assert!((150..250).contains(&forward), "{forward}");

    let p = QopParams { n: 1, k: 1, ..QopParams::default() };
    let g = sample_structure(Sampler::HatTRandom, &p, 0).unwrap();
    assert!(g.variables.is_empty());
    assert_eq!(g.structure.len(), 2);
    assert!(validate_structure(&g.structure, &ClassSpec::HatTAge).unwrap());
}

#[test]
fn semi_generic_samples_validate() {
    for (n, big_m) in [(2, 2), (3, 2), (3, 4)] {
        let p = QopParams { n, k: 1, big_m, ..QopParams::default() };
        for s in 0..1000 {
            let g = sample_structure(Sampler::SRRandom, &p, s).unwrap().structure;
            assert!(validate_structure(&g, &ClassSpec::SemiGenericRAge).unwrap(), "seed {s}");
            assert!(validate_structure(&g.digraph(), &ClassSpec::SemiGenericAge).unwrap(), "seed {s}");
        }
    }
}

#[test]
fn sensitivity_examples() {
    for sampler in SAMPLERS {
        let p = params(4, 1);
        let h = default_h(sampler, &p).unwrap();
        let g = sample_structure(sampler, &p, 3).unwrap();
        for f in 0..g.flips().len() {
            assert_eq!(single_edge_sensitivity(&h, &g, f).unwrap().delta, 0);
        }
    }

    let p = QopParams { n: 4, k: 2, ..QopParams::default() };
    let h = default_h(Sampler::HatTRandom, &p).unwrap();
    assert_eq!(sensitivity_bound(Sampler::HatTRandom, &h, 4, 2).unwrap(), BigInt::from(8));
    for seed in 0..5 {
        let g = sample_structure(Sampler::HatTRandom, &p, seed).unwrap();
        for f in 0..g.flips().len() {
            let s = single_edge_sensitivity(&h, &g, f).unwrap();
            assert!(s.within_bound && s.delta.abs() <= 8);
        }
    }

    let p = QopParams { n: 4, k: 2, m: 1, a: vec![1, 1], ..QopParams::default() };
    let h = default_h(Sampler::DomegaRandom, &p).unwrap();
    assert_eq!(sensitivity_bound(Sampler::DomegaRandom, &h, 4, 1).unwrap(), BigInt::from(2));
    let mut worst = 0;
    for seed in 0..20 {
        let g = sample_structure(Sampler::DomegaRandom, &p, seed).unwrap();
        for f in 0..g.flips().len() {
            let s = single_edge_sensitivity(&h, &g, f).unwrap();
            assert!(s.delta.abs() <= 2);
            worst = worst.max(s.delta.abs());
        }
    }
    // A single arc embeds once per arc of a tournament, so flips never move the count.
    assert_eq!(worst, 0);
}

/// Berge girth at least 4 iff the incidence graph has no cycle shorter than 8.
fn incidence_girth_at_least_8(hg: &Hypergraph) -> bool {
    let n = hg.vertices;
    let total = n + hg.hyperedges.len();
    let mut adj = vec![Vec::new(); total];
    for (i, e) in hg.hyperedges.iter().enumerate() {
        for &v in e {
            adj[v].push(n + i);
            adj[n + i].push(v);
        }
    }
    for start in 0..total {
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w && dist[u] + dist[w] + 1 < 8 {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn girth_four_generator() {
    let hg = build_girth4_hypergraph(3, 3, 0).unwrap();
    assert_eq!(hg.hyperedges, vec![vec![0, 1, 2]]);
    for seed in 0..100 {
        let hg = build_girth4_hypergraph(20, 3, seed).unwrap();
        assert!(hg.is_uniform(3));
        assert!(hg.has_girth_at_least_4());
        assert!(incidence_girth_at_least_8(&hg), "seed {seed}");
    }
    let mean = |n: usize| (0..20).map(|s| build_girth4_hypergraph(n, 3, s).unwrap().hyperedges.len()).sum::<usize>();
    let sizes: Vec<usize> = [10, 20, 40, 60].into_iter().map(mean).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    assert!(build_girth4_hypergraph(2, 3, 0).is_err());
}

#[test]
fn planting() {
    let empty = Hypergraph { vertices: 6, hyperedges: vec![] };
    let h = FiniteStructure::linear_tournament(3);
    let g = plant_hypergraph_digraph(&empty, &h, &PlantMode::FT(vec![FiniteStructure::cycle3()]), 0).unwrap();
    assert_eq!(g, FiniteStructure::new(6));

    let single = Hypergraph { vertices: 5, hyperedges: vec![vec![0, 2, 4]] };
    for seed in 0..10 {
        let g = plant_hypergraph_digraph(&single, &h, &PlantMode::Gn(2), seed).unwrap();
        assert!(validate_structure(&g, &ClassSpec::GnAge(2)).unwrap());
        assert!(is_isomorphic(&g.induced(&[0, 2, 4]), &h));
    }

    let run = run_hypergraph_method(60, &h, &PlantMode::FT(vec![FiniteStructure::cycle3()]), 9, 1, GIRTH4_EDGE_CONSTANT)
        .unwrap();
    assert!(run.valid);
    let hg = build_girth4_hypergraph(60, 3, 9).unwrap();
    let g = plant_hypergraph_digraph(&hg, &h, &PlantMode::FT(vec![FiniteStructure::cycle3()]), 10).unwrap();
    for x in 0..60 {
        for y in 0..60 {
            for z in 0..60 {
                assert!(!(g.has_arc(x, y) && g.has_arc(y, z) && g.has_arc(z, x)));
            }
        }
    }
}

#[test]
fn embedding_counts_inside_hyperedges() {
    let rigid = FiniteStructure::linear_tournament(3);
    for seed in 0..5 {
        let run = run_hypergraph_method(30, &rigid, &PlantMode::Gn(2), seed, 2, GIRTH4_EDGE_CONSTANT).unwrap();
        assert_eq!(run.check.automorphisms, 1);
        assert_eq!(run.check.n_emb, run.check.hyperedges);
    }
    let c3 = FiniteStructure::cycle3();
    let run = run_hypergraph_method(30, &c3, &PlantMode::Gn(2), 1, 2, GIRTH4_EDGE_CONSTANT).unwrap();
    assert_eq!(run.check.automorphisms, 3);
    assert_eq!(run.check.n_emb, 3 * run.check.hyperedges);
}

#[test]
fn single_vertex_has_ratio_one() {
    let p = QopParams { n: 6, k: 1, m: 1, trials: 5, g_expansions: 5, ..QopParams::default() };
    let h = default_h(Sampler::DomegaRandom, &p).unwrap();
    let r = run_qop_experiment(Sampler::DomegaRandom, &h, &p).unwrap();
    assert_eq!(r.rho, 1.0);
    assert_eq!(r.max_deviation, 0.0);
    assert_eq!(r.fraction_within(1e-12), 1.0);
}

#[test]
fn semi_generic_run_reports_rho() {
    let p = QopParams { n: 30, k: 2, big_m: 2, m: 1, trials: 5, g_expansions: 5, ..QopParams::default() };
    let h = default_h(Sampler::SRRandom, &p).unwrap();
    let r = run_qop_experiment(Sampler::SRRandom, &h, &p).unwrap();
    assert!((r.rho - 0.25).abs() < 1e-12);
    assert_eq!(r.trial_deviation.len(), 5);
}

#[test]
fn bad_parameters_are_rejected() {
    let p = QopParams { n: 1, k: 2, ..QopParams::default() };
    assert!(run_qop_experiment(Sampler::HatTRandom, &FiniteStructure::new(1), &p).is_err());
    let p = QopParams { big_m: 3, ..QopParams::default() };
    assert!(expected_embeddings(Sampler::SRRandom, &p).is_err());
    assert!(Sampler::parse("nope").is_err());
}
