use crate::output::{csv_row, CliError, Output};
use crate::{table, Command};
use homoflow_core::expansion_classes::{closed_form_count, enumerate_expansions, expansion_count};
use homoflow_core::hrushovski::{extend_partial_isos, hrushovski_implies_uniform_ok, verify_extension, PartialIsoSystem};
use homoflow_core::qop_lab::{
    default_h, run_hypergraph_method, run_qop_experiment, PlantMode, QopParams, Sampler, GIRTH4_EDGE_CONSTANT,
};
use homoflow_core::random_expansion_solver::{
    builtin_fragment, check_density_criterion, replay_certificate, solve_fragment, verify_certificate, Certificate,
    Conclusion, Fragment,
};
use homoflow_core::structures::max_vertices;
use homoflow_core::trees::{
    build_nice_tree_family, build_oh_qop_witness, check_oh_witness, enumerate_convex_orders, is_nice, minimal_tree,
    tree_to_leaf_structure, OrderedLeafStructure, RootedBinaryTree,
};
use homoflow_core::{ClassSpec, FiniteStructure};
use serde_json::{json, Value};
use std::path::Path;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Expand { class, input, relative } => expand(class, input, relative.as_deref()),
        Command::Amenable { class, fragment, emit_cert } => amenable(class, fragment, emit_cert.as_deref()),
        Command::Density { class, bound } => density(class, *bound),
        Command::Qop { sampler, n, k, m, big_m, a, trials, seed, epsilon, d, g_expansions, h } => {
            let p = QopParams {
                epsilon: *epsilon,
                d: *d,
                n: *n,
                k: *k,
                m: *m,
                big_m: *big_m,
                a: a.clone(),
                trials: *trials,
                seed: *seed,
                g_expansions: *g_expansions,
            };
            qop(sampler, p, h.as_deref())
        }
        Command::Hypergraph { n, k, seed, mode, h, orders, constant } => {
            hypergraph(*n, *k, *seed, mode, h.as_deref(), *orders, constant.unwrap_or(GIRTH4_EDGE_CONSTANT))
        }
        Command::Hrushovski { class, system, bound } => hrushovski(class, system.as_deref(), *bound),
        Command::Trees { op, input, n, order } => trees(op, input.as_deref(), *n, order),
        Command::Table { bound, trials, seed } => table::run(*bound, *trials, *seed),
        Command::VerifyCert { input, class } => verify_cert(input, class.as_deref()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_structure(path: &Path) -> Result<FiniteStructure> {
    Ok(FiniteStructure::from_json_str(&read(path)?)?)
}

fn parse_class(tag: &str) -> Result<ClassSpec> {
    Ok(ClassSpec::parse(tag)?)
}

fn check_size(s: &FiniteStructure) -> Result<()> {
    let bound = max_vertices();
    if s.len() > bound {
        return Err(homoflow_core::Error::BoundExceeded { size: s.len(), bound }.into());
    }
    Ok(())
}

fn expand(class: &str, input: &Path, relative: Option<&Path>) -> Result<Output> {
    let spec = parse_class(class)?;
    let a = read_structure(input)?;
    check_size(&a)?;
    let exps = enumerate_expansions(&spec, &a)?;
    let Some(rel) = relative else {
        let mut csv = String::from("index,expansion\n");
        for (i, e) in exps.iter().enumerate() {
            csv.push_str(&csv_row(&[i.to_string(), e.to_json().to_string()]));
        }
        let json = json!({
            "class": spec.tag(),
            "structure": a,
            "count": exps.len(),
            "expansions": exps,
        });
        return Ok(Output::json(json).with_csv(csv));
    };
    let b = read_structure(rel)?;
    check_size(&b)?;
    let counts = expansion_count(&spec, &a, &b)?;
    let closed = closed_form_count(&spec, &a, &b).ok().map(|v| v.to_string());
    let mut csv = String::from("index,relative\n");
    let mut rows = Vec::new();
    for (i, c) in &counts.relative {
        csv.push_str(&csv_row(&[i.to_string(), c.to_string()]));
        rows.push(json!({ "expansion": exps[*i], "relative": c }));
    }
    let json = json!({
        "class": spec.tag(),
        "a": a,
        "b": b,
        "total": counts.total,
        "relative": rows,
        "closed_form": closed,
    });
    Ok(Output::json(json).with_csv(csv))
}

fn load_fragment(spec: &ClassSpec, name: &str) -> Result<(ClassSpec, Fragment)> {
    if name.starts_with("builtin:") {
        let (bspec, frag) = builtin_fragment(name)?;
        if bspec != *spec {
            return Err(CliError::Input(format!(
                "fragment `{name}` belongs to class `{}`, not `{}`",
                bspec.tag(),
                spec.tag()
            )));
        }
        return Ok((bspec, frag));
    }
    let v: Value = serde_json::from_str(&read(Path::new(name))?)?;
    let frag = if v.get("embeddings").is_some() {
        let f: Fragment = serde_json::from_value(v)?;
        f.validate(spec)?;
        f
    } else {
        let structures: Vec<FiniteStructure> = serde_json::from_value(
            v.get("structures").cloned().ok_or_else(|| CliError::Input("fragment needs `structures`".into()))?,
        )?;
        if v.get("closed").and_then(Value::as_bool).unwrap_or(false) {
            Fragment::closed(spec, structures)?
        } else {
            Fragment::from_structures(spec, structures)?
        }
    };
    Ok((spec.clone(), frag))
}

fn amenable(class: &str, fragment: &str, emit: Option<&Path>) -> Result<Output> {
    let spec = parse_class(class)?;
    let (spec, frag) = load_fragment(&spec, fragment)?;
    let cert = solve_fragment(&spec, &frag)?;
    let verified = verify_certificate(&cert, &spec);
    if let Some(path) = emit {
        std::fs::write(path, serde_json::to_string_pretty(&cert)? + "\n")?;
    }
    let json = json!({
        "class": spec.tag(),
        "fragment": fragment,
        "kind": cert.kind,
        "verified": verified,
        "conclusion": cert.conclusion,
        "certificate": cert,
    });
    Ok(Output::json(json))
}

fn density(class: &str, bound: usize) -> Result<Output> {
    let spec = parse_class(class)?;
    let outcome = check_density_criterion(&spec, bound.min(max_vertices()))?;
    let csv = format!("class,bound,passed\n{},{},{}\n", spec.tag(), bound, outcome.passed());
    let json = json!({ "class": spec.tag(), "bound": bound, "passed": outcome.passed(), "result": outcome });
    Ok(Output::json(json).with_csv(csv))
}

fn qop(sampler: &str, p: QopParams, h: Option<&Path>) -> Result<Output> {
    let sampler = Sampler::parse(sampler)?;
    let h = match h {
        Some(path) => read_structure(path)?,
        None => default_h(sampler, &p)?,
    };
    let report = run_qop_experiment(sampler, &h, &p)?;
    let csv = report.trials_csv();
    let mut json = serde_json::to_value(&report)?;
    json["fraction_within_epsilon"] = json!(report.fraction_within(p.epsilon));
    Ok(Output::json(json).with_csv(csv))
}

fn parse_mode(mode: &str) -> Result<PlantMode> {
    let m = mode.trim().to_ascii_lowercase();
    if m == "ft-c3" {
        return Ok(PlantMode::FT(vec![FiniteStructure::cycle3()]));
    }
    if let Some(rest) = m.strip_prefix("gn:").or_else(|| m.strip_prefix("gn")) {
        if let Ok(v) = rest.parse::<usize>() {
            return Ok(PlantMode::Gn(v));
        }
    }
    Err(CliError::Input(format!("unknown mode `{mode}` (expected ft-c3 or gn:<m>)")))
}

fn hypergraph(
    n: usize,
    k: usize,
    seed: u64,
    mode: &str,
    h: Option<&Path>,
    orders: usize,
    constant: f64,
) -> Result<Output> {
    let mode = parse_mode(mode)?;
    let h = match h {
        Some(path) => read_structure(path)?,
        None => FiniteStructure::linear_tournament(k),
    };
    if h.len() != k {
        return Err(CliError::Input(format!("H has {} vertices but k = {k}", h.len())));
    }
    let run = run_hypergraph_method(n, &h, &mode, seed, orders, constant)?;
    let c = &run.check;
    let csv = format!(
        "n,k,seed,hyperedges,n_emb,max_deviation,girth_ok,valid\n{},{},{},{},{},{},{},{}\n",
        run.n, run.k, run.seed, c.hyperedges, c.n_emb, c.max_deviation, run.girth_ok, run.valid
    );
    Ok(Output::json(serde_json::to_value(&run)?).with_csv(csv))
}

fn hrushovski(class: &str, system: Option<&Path>, bound: usize) -> Result<Output> {
    let spec = parse_class(class)?;
    let Some(path) = system else {
        let report = hrushovski_implies_uniform_ok(&spec, bound.min(max_vertices()))?;
        return Ok(Output::json(serde_json::to_value(report)?));
    };
    let raw: PartialIsoSystem = serde_json::from_str(&read(path)?)?;
    let sys = PartialIsoSystem::new(raw.ambient, raw.maps)?;
    let found = extend_partial_isos(&sys, &spec, bound.min(max_vertices()))?;
    let json = match found {
        Some(ext) => json!({
            "class": spec.tag(),
            "bound": bound,
            "status": "found",
            "verified": verify_extension(&sys, &ext),
            "extension": ext,
        }),
        None => json!({ "class": spec.tag(), "bound": bound, "status": "not_found" }),
    };
    Ok(Output::json(json))
}

fn read_tree(input: Option<&Path>) -> Result<RootedBinaryTree> {
    let path = input.ok_or_else(|| CliError::Input("this operation needs --in".into()))?;
    Ok(RootedBinaryTree::from_json_str(&read(path)?)?)
}

fn trees(op: &str, input: Option<&Path>, n: Option<usize>, order: &[usize]) -> Result<Output> {
    let need_n = || n.ok_or_else(|| CliError::Input("this operation needs --n".into()));
    match op {
        "count-convex" => {
            let t = read_tree(input)?;
            let ls = tree_to_leaf_structure(&t);
            let (min, _) = minimal_tree(&ls)?;
            let orders = enumerate_convex_orders(&ls)?;
            let b = min.non_terminal_count();
            let mut csv = String::from("index,order\n");
            for (i, o) in orders.iter().enumerate() {
                let s: Vec<String> = o.iter().map(usize::to_string).collect();
                csv.push_str(&csv_row(&[i.to_string(), s.join(" ")]));
            }
            let json = json!({
                "leaves": ls.leaves,
                "non_terminal": b,
                "count": orders.len(),
                "expected": 1u64 << b,
                "orders": orders,
            });
            Ok(Output::json(json).with_csv(csv))
        }
        "leaf-structure" => {
            let ls = tree_to_leaf_structure(&read_tree(input)?);
            Ok(Output::json(serde_json::to_value(ls)?))
        }
        "minimal-tree" => {
            let ls = tree_to_leaf_structure(&read_tree(input)?);
            let (t, map) = minimal_tree(&ls)?;
            Ok(Output::json(json!({ "tree": t.to_json(), "leaf_map": map })))
        }
        "is-nice" => {
            let n = need_n()?;
            Ok(Output::json(json!({ "n": n, "nice": is_nice(&read_tree(input)?, n) })))
        }
        "nice-family" => Ok(Output::json(build_nice_tree_family(need_n()?).to_json())),
        "oh-witness" => {
            let ls = tree_to_leaf_structure(&read_tree(input)?);
            let order = if order.is_empty() { (0..ls.leaves).collect() } else { order.to_vec() };
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..ls.leaves).collect::<Vec<_>>() {
                return Err(CliError::Input("--order must be a permutation of the leaves".into()));
            }
            let a = OrderedLeafStructure { structure: ls, order };
            let w = build_oh_qop_witness(&a)?;
            let report = check_oh_witness(&a, &w)?;
            Ok(Output::json(json!({ "witness": w, "report": report })))
        }
        other => Err(CliError::Input(format!(
            "unknown tree operation `{other}` (count-convex, leaf-structure, minimal-tree, is-nice, nice-family, oh-witness)"
        ))),
    }
}

fn verify_cert(input: &Path, class: Option<&str>) -> Result<Output> {
    let cert: Certificate = serde_json::from_str(&read(input)?)?;
    let spec = parse_class(class.unwrap_or(&cert.class))?;
    let (verified, reason) = match replay_certificate(&cert, &spec) {
        Ok(()) => (true, None),
        Err(e) => (false, Some(e.to_string())),
    };
    let forced = match &cert.conclusion {
        Conclusion::ForcedZero { forced, .. } => forced.len(),
        _ => 0,
    };
    let json = json!({
        "class": spec.tag(),
        "kind": cert.kind,
        "steps": cert.steps.len(),
        "forced_weights": forced,
        "verified": verified,
        "reason": reason,
    });
    let mut out = Output::json(json);
    if !verified {
        out.exit_code = 1;
    }
    Ok(out)
}
