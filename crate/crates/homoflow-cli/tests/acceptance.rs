use homoflow_core::composition::uniform_product_weight;
use homoflow_core::expansion_classes::{closed_form_count, enumerate_expansions, hatq_full_expansions, qhat_expansion_iso};
use homoflow_core::qop_lab::{
    default_h, run_hypergraph_method, run_qop_experiment, sample_structure, single_edge_sensitivity, PlantMode,
    QopParams, Sampler, GIRTH4_EDGE_CONSTANT,
};
use homoflow_core::random_expansion_solver::{
    builtin_fragment, check_density_criterion, check_measure_consistency, solve_fragment, verify_certificate,
    CertificateKind, Conclusion, DensityOutcome,
};
use homoflow_core::structures::builders::hatq_full;
use homoflow_core::structures::{age_up_to, is_embedding, permutations, subsets};
use homoflow_core::trees::{
    build_oh_qop_witness, check_oh_witness, enumerate_convex_orders, leaf_structures_with, minimal_tree,
    OrderedLeafStructure,
};
use homoflow_core::{ClassSpec, Expansion, FiniteStructure};
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: homoflow_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn forced_set(c: &Conclusion) -> Vec<(usize, Expansion)> {
    match c {
        Conclusion::ForcedZero { structure, expansion, forced } => {
            let mut v = vec![(*structure, expansion.clone())];
            v.extend(forced.iter().map(|f| (f.structure, f.expansion.clone())));
            v
        }
        _ => Vec::new(),
    }
}

fn has_forced(c: &Conclusion, structure: usize, order: Option<&[usize]>, labels: Option<&[u32]>) -> bool {
    forced_set(c)
        .iter()
        .any(|(s, e)| *s == structure && e.order.as_deref() == order && e.labels.as_deref() == labels)
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for name in ["s2", "s3", "p", "p3", "qhat"] {
        let start = Instant::now();
        let (spec, frag) = core(builtin_fragment(name))?;
        let cert = core(solve_fragment(&spec, &frag))?;
        let verified = verify_certificate(&cert, &spec);
        let elapsed = start.elapsed();
        ensure(cert.kind == CertificateKind::Infeasible, || format!("{name}: not infeasible"))?;
        ensure(verified, || format!("{name}: replay failed"))?;
        ensure(elapsed < Duration::from_secs(10), || format!("{name}: took {elapsed:?}"))?;
        let c = &cert.conclusion;
        let matched = match name {
            // Transitive triangle with the two sources in P_0 and the sink in P_1.
            "s2" | "s3" => has_forced(c, 0, None, Some(&[0, 0, 1])),
            "p" => has_forced(c, 0, Some(&[0, 2, 1]), None),
            "p3" => has_forced(c, 0, Some(&[1, 2, 0]), Some(&[1, 0, 1])),
            _ => match c {
                Conclusion::Contradiction { clash: Some(cl) } => {
                    let (l, r) = (cl.left_value.clone(), cl.right_value.clone());
                    let (q4, q6) = (BigRational::new(1.into(), 4.into()), BigRational::new(1.into(), 6.into()));
                    (l == q4 && r == q6) || (l == q6 && r == q4)
                }
                _ => false,
            },
        };
        ensure(matched, || format!("{name}: unexpected conclusion {}", serde_json::to_string(c).unwrap()))?;
        notes.push(format!("{name} {:.2}s", elapsed.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let passing = [
        ClassSpec::DomegaAge,
        ClassSpec::DnAge(3),
        ClassSpec::HatTAge,
        ClassSpec::SemiGenericAge,
        ClassSpec::Tournaments,
        ClassSpec::GnAge(2),
        ClassSpec::FTAge(vec![FiniteStructure::cycle3()]),
    ];
    let mut notes = Vec::new();
    for spec in &passing {
        let t = Instant::now();
        let out = core(check_density_criterion(spec, 5))?;
        ensure(out.passed(), || format!("{} fails at bound 5", spec.tag()))?;
        notes.push(format!("{} {:.1}s", spec.tag(), t.elapsed().as_secs_f64()));
    }
    match core(check_density_criterion(&ClassSpec::PosetAge, 3))? {
        DensityOutcome::Counterexample(pair) => {
            ensure(pair.left_count != pair.right_count, || "counterexample counts agree".into())?;
            ensure(is_embedding(&pair.a, &pair.b, &pair.embedding), || "counterexample map is no embedding".into())?;
        }
        DensityOutcome::Pass { .. } => return Err("PosetAge passes at bound 3".into()),
    }
    let total = start.elapsed();
    ensure(total < Duration::from_secs(60), || format!("took {total:?}"))?;
    Ok(format!("{}; poset counterexample; total {:.1}s", notes.join(", "), total.as_secs_f64()))
}

/// Every expansion of every substructure position of every `b` with at
/// most `bound` vertices has the closed-form number of extensions.
fn closed_form_agrees(spec: &ClassSpec, bound: usize) -> Result<usize, String> {
    let mut checked = 0;
    for b in core(age_up_to(spec, bound))? {
        let b_exps = core(enumerate_expansions(spec, &b))?;
        for k in 1..=b.len() {
            for u in subsets(b.len(), k) {
                let a = b.induced(&u);
                let mut tally: BTreeMap<Expansion, u64> = BTreeMap::new();
                for e in &b_exps {
                    *tally.entry(e.restrict_to(&a, &u)).or_insert(0) += 1;
                }
                let want = core(closed_form_count(spec, &a, &b))?;
                for ae in core(enumerate_expansions(spec, &a))? {
                    let got = tally.get(&ae).copied().unwrap_or(0);
                    if u128::from(got) != want {
                        return Err(format!(
                            "{}: {got} != {want} for {} in {}",
                            spec.tag(),
                            ae.to_json(),
                            b.to_json()
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

fn criterion_3() -> Outcome {
    let specs = [
        ClassSpec::DomegaAge,
        ClassSpec::HatTAge,
        ClassSpec::SemiGenericAge,
        ClassSpec::DnAge(2),
        ClassSpec::DnAge(3),
        ClassSpec::DnAge(4),
    ];
    let mut notes = Vec::new();
    for spec in &specs {
        let n = closed_form_agrees(spec, 5)?;
        notes.push(format!("{} {n}", spec.tag()));
    }
    Ok(format!("pairs checked: {}", notes.join(", ")))
}

fn carries(e1: &Expansion, e2: &Expansion, pi: &[usize]) -> bool {
    let n = e1.len();
    let mut seen = vec![false; n];
    for &v in pi {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let labels_ok = match (&e1.labels, &e2.labels) {
        (Some(l1), Some(l2)) => (0..n).all(|x| l1[x] == l2[pi[x]]),
        (None, None) => true,
        _ => false,
    };
    labels_ok
        && (0..n).all(|x| {
            (0..n).all(|y| {
                e1.base.has_arc(x, y) == e2.base.has_arc(pi[x], pi[y]) && e1.less(x, y) == e2.less(pi[x], pi[y])
            })
        })
}

fn criterion_4() -> Outcome {
    let mut pairs = 0;
    for k in 1..=5 {
        let s = hatq_full(k);
        let exps = core(enumerate_expansions(&ClassSpec::HatQAge, &s))?;
        ensure(exps.len() == 2 * k, || format!("k = {k}: {} expansions", exps.len()))?;
        ensure(exps == hatq_full_expansions(k), || format!("k = {k}: enumerator and transversal recipe differ"))?;
        for e1 in &exps {
            for e2 in &exps {
                let pi = core(qhat_expansion_iso(e1, e2))?;
                ensure(carries(e1, e2, &pi), || format!("k = {k}: map does not carry one expansion to the other"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("2k expansions for k = 1..5, {pairs} isomorphisms verified"))
}

fn criterion_5() -> Outcome {
    let factors = [
        (ClassSpec::Tournaments, ClassSpec::EdgelessAge),
        (ClassSpec::EdgelessAge, ClassSpec::Tournaments),
        (ClassSpec::Tournaments, ClassSpec::Tournaments),
        (ClassSpec::EdgelessAge, ClassSpec::EdgelessAge),
    ];
    let mut notes = Vec::new();
    for (k, l) in &factors {
        let spec = ClassSpec::Composition(Box::new(k.clone()), Box::new(l.clone()));
        let w = uniform_product_weight(k, l);
        let r = core(check_measure_consistency(&spec, 4, &w))?;
        ensure(r.ok(), || format!("{}: {}", spec.tag(), r.failures.first().cloned().unwrap_or_default()))?;
        notes.push(format!("{} ({} structures, {} (E) rows)", spec.tag(), r.structures, r.extension_rows));
    }
    Ok(notes.join(", "))
}

fn convex_by_definition(ls: &homoflow_core::trees::LeafStructure, order: &[usize]) -> bool {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    ls.c.iter().all(|&(x, y, z)| (pos[x] < pos[y] && pos[x] < pos[z]) || (pos[y] < pos[x] && pos[z] < pos[x]))
}

fn criterion_6() -> Outcome {
    let mut structures = 0;
    for leaves in 1..=6 {
        for ls in leaf_structures_with(leaves) {
            let (tree, _) = core(minimal_tree(&ls))?;
            let b = tree.non_terminal_count();
            let orders = core(enumerate_convex_orders(&ls))?;
            let brute = permutations(leaves).filter(|o| convex_by_definition(&ls, o)).count();
            ensure(orders.len() == 1 << b && brute == 1 << b, || {
                format!("{leaves} leaves, b = {b}: {} enumerated, {brute} by filter", orders.len())
            })?;
            structures += 1;
        }
    }
    let mut witnesses = 0;
    for leaves in 1..=3 {
        for ls in leaf_structures_with(leaves) {
            for order in permutations(leaves) {
                let a = OrderedLeafStructure { structure: ls.clone(), order };
                let w = core(build_oh_qop_witness(&a))?;
                let r = core(check_oh_witness(&a, &w))?;
                ensure(r.exact && r.max_deviation == 0.0, || format!("deviation {} for {leaves} leaves", r.max_deviation))?;
                witnesses += 1;
            }
        }
    }
    Ok(format!("2^b law on {structures} leaf structures (b <= 5); {witnesses} exact witnesses"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let runs = [
        (Sampler::HatTRandom, QopParams { n: 60, k: 1, trials: 200, g_expansions: 50, seed: 1, ..QopParams::default() }),
        (
            Sampler::DomegaRandom,
            QopParams { n: 60, k: 2, m: 1, trials: 200, g_expansions: 50, seed: 2, ..QopParams::default() },
        ),
    ];
    let mut notes = Vec::new();
    for (sampler, p) in runs {
        let h = core(default_h(sampler, &p))?;
        let r = core(run_qop_experiment(sampler, &h, &p))?;
        ensure((r.rho - 0.5).abs() < 1e-12, || format!("{}: rho = {}", sampler.name(), r.rho))?;
        let frac = r.fraction_within(0.05);
        ensure(r.degenerate_trials == 0 && frac >= 0.95, || {
            format!("{}: {frac} of trials within 0.05", sampler.name())
        })?;
        notes.push(format!("{} fraction {frac:.3}, max {:.4}", sampler.name(), r.max_deviation));
    }
    let total = start.elapsed();
    ensure(total < Duration::from_secs(300), || format!("took {total:?}"))?;
    Ok(format!("{}; {:.1}s", notes.join(", "), total.as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let h = FiniteStructure::linear_tournament(3);
    let mode = PlantMode::FT(vec![FiniteStructure::cycle3()]);
    let mut within = 0;
    let mut edges = 0;
    for seed in 0..100u64 {
        let run = core(run_hypergraph_method(60, &h, &mode, seed, 1, GIRTH4_EDGE_CONSTANT))?;
        ensure(run.valid, || format!("seed {seed}: planted digraph contains C_3"))?;
        ensure(run.girth_ok, || format!("seed {seed}: girth check fails"))?;
        ensure(run.check.n_emb == run.check.hyperedges * run.check.automorphisms, || "N_emb != s·L".into())?;
        edges += run.check.hyperedges;
        if run.check.max_deviation < 0.1 {
            within += 1;
        }
    }
    ensure(within >= 90, || format!("{within} of 100 seeds within 0.1"))?;
    Ok(format!("{within}/100 seeds within 0.1, mean {} hyperedges", edges as f64 / 100.0))
}

fn criterion_9() -> Outcome {
    let mut flips = 0;
    let mut worst = 0i64;
    let setups: Vec<(Sampler, QopParams)> = vec![
        (Sampler::DomegaRandom, QopParams { k: 2, m: 1, a: vec![1, 1], ..QopParams::default() }),
        (Sampler::DomegaRandom, QopParams { k: 2, m: 2, a: vec![1, 2], ..QopParams::default() }),
        (Sampler::DomegaRandom, QopParams { k: 3, m: 1, a: vec![1, 1, 1], ..QopParams::default() }),
        (Sampler::DnRandom, QopParams { k: 2, m: 2, a: vec![2, 1], ..QopParams::default() }),
        (Sampler::DnRandom, QopParams { k: 2, m: 1, a: vec![1, 1], ..QopParams::default() }),
        (Sampler::HatTRandom, QopParams { k: 2, ..QopParams::default() }),
        (Sampler::HatTRandom, QopParams { k: 3, ..QopParams::default() }),
        (Sampler::SRRandom, QopParams { k: 2, big_m: 2, ..QopParams::default() }),
    ];
    for (sampler, base) in setups {
        for n in base.k..=5 {
            for seed in 0..4 {
                let p = QopParams { n, seed, ..base.clone() };
                let h = core(default_h(sampler, &p))?;
                let g = core(sample_structure(sampler, &p, seed))?;
                for f in 0..g.flips().len() {
                    let s = core(single_edge_sensitivity(&h, &g, f))?;
                    ensure(s.within_bound, || {
                        format!("{} n = {n}: delta {} exceeds {}", sampler.name(), s.delta, s.bound)
                    })?;
                    worst = worst.max(s.delta.abs());
                    flips += 1;
                }
            }
        }
    }
    Ok(format!("{flips} flips within bounds, largest |delta| {worst}"))
}

fn table_run() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_homoflow"))
        .args(["table", "--bound", "4", "--trials", "100", "--seed", "7"])
        .env_remove("HOMOFLOW_MAX_VERTICES")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit {:?}: {}", out.status, String::from_utf8_lossy(&out.stdout)))?;
    Ok(out.stdout)
}

fn criterion_10() -> Outcome {
    let first = table_run()?;
    let second = table_run()?;
    ensure(first == second, || "the two reports differ".into())?;
    let v: serde_json::Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    let got: Vec<(String, String)> = rows
        .iter()
        .map(|r| (r["class"].as_str().unwrap_or("").to_string(), r["amenable"].as_str().unwrap_or("").to_string()))
        .collect();
    let want = [
        ("S(2)", "✗"),
        ("S(3)", "✗"),
        ("P", "✗"),
        ("P(3)", "✗"),
        ("Q̂", "✗"),
        ("D_n", "✓"),
        ("T̂^ω", "✓"),
        ("S", "✓"),
        ("G_n", "✓"),
        ("F({C_3})", "✓"),
    ];
    let want: Vec<(String, String)> = want.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    ensure(got == want, || format!("amenability column {got:?}"))?;
    Ok(format!("{} bytes, identical; amenability pattern matches", first.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    // Five full columns have ten vertices.
    std::env::set_var("HOMOFLOW_MAX_VERTICES", "10");
    let criteria: [Criterion; 10] = [
        ("non-amenability certificates", criterion_1),
        ("density criterion", criterion_2),
        ("closed forms against brute force", criterion_3),
        ("2k expansions and cover isomorphisms", criterion_4),
        ("product measure", criterion_5),
        ("trees", criterion_6),
        ("concentration", criterion_7),
        ("hypergraph method", criterion_8),
        ("sensitivity bounds", criterion_9),
        ("table determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
