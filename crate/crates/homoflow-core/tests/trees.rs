use homoflow_core::structures::permutations;
use homoflow_core::trees::{
    build_nice_tree_family, build_oh_qop_witness, check_oh_witness, enumerate_convex_orders, is_convex_leaf_order,
    is_nice, leaf_structures_with, minimal_tree, tree_to_leaf_structure, LeafStructure, OrderedLeafStructure,
    RootedBinaryTree,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn ancestors(parents: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while let Some(p) = parents[v] {
        out.push(p);
        v = p;
    }
    out
}

/// `C` straight from the definition on a parent array.
fn path_oracle(parents: &[Option<usize>], leaves: &[usize]) -> BTreeSet<(usize, usize, usize)> {
    let mut c = BTreeSet::new();
    for (i, &x) in leaves.iter().enumerate() {
        let up: BTreeSet<usize> = ancestors(parents, x).into_iter().collect();
        for (j, &y) in leaves.iter().enumerate() {
            for (k, &z) in leaves.iter().enumerate() {
                if i == j || i == k || j == k {
                    continue;
                }
                let ay = ancestors(parents, y);
                let az = ancestors(parents, z);
                let meet = *ay.iter().find(|v| az.contains(v)).unwrap();
                let mut path: BTreeSet<usize> = ay.iter().take_while(|&&v| v != meet).copied().collect();
                path.extend(az.iter().take_while(|&&v| v != meet));
                path.insert(meet);
                if path.is_disjoint(&up) {
                    c.insert((i, j, k));
                }
            }
        }
    }
    c
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Option<usize>>, RootedBinaryTree) {
    let mut parents = vec![None];
    let mut kids = vec![0usize];
    while parents.len() < n {
        let open: Vec<usize> = (0..parents.len()).filter(|&v| kids[v] < 2).collect();
        let p = open[rng.gen_range(0..open.len())];
        kids[p] += 1;
        parents.push(Some(p));
        kids.push(0);
    }
    let t = RootedBinaryTree::new(parents.clone(), 0).unwrap();
    (parents, t)
}

#[test]
fn single_node() {
    let t = RootedBinaryTree::new(vec![None], 0).unwrap();
    let ls = tree_to_leaf_structure(&t);
    assert_eq!(ls.leaves, 1);
    assert!(ls.c.is_empty());
    assert_eq!(enumerate_convex_orders(&ls).unwrap(), vec![vec![0]]);
}

#[test]
fn depth_two_tree_matches_path_oracle() {
    let t = build_nice_tree_family(2);
    let parents: Vec<Option<usize>> = (0..t.len()).map(|v| t.parent(v)).collect();
    let ls = tree_to_leaf_structure(&t);
    let oracle = path_oracle(&parents, &t.leaves());
    assert_eq!(ls.c, oracle);
    // Each leaf is C-related to the sibling pair on the other side, both ways.
    assert_eq!(ls.c.len(), 8);
}

#[test]
fn caterpillar_relates_only_the_deep_pair() {
    let parents = vec![None, Some(0), Some(0), Some(1), Some(1)];
    let t = RootedBinaryTree::new(parents.clone(), 0).unwrap();
    let leaves = t.leaves();
    let ls = tree_to_leaf_structure(&t);
    assert_eq!(ls.c, path_oracle(&parents, &leaves));
    let shallow = leaves.iter().position(|&v| v == 2).unwrap();
    assert_eq!(ls.c.len(), 2);
    assert!(ls.c.iter().all(|&(x, _, _)| x == shallow));
}

#[test]
fn random_trees_match_path_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=15 {
        for _ in 0..20 {
            let (parents, t) = random_tree(&mut rng, n);
            assert_eq!(tree_to_leaf_structure(&t).c, path_oracle(&parents, &t.leaves()));
        }
    }
}

#[test]
fn convex_order_counts() {
    let one = LeafStructure { leaves: 1, c: BTreeSet::new() };
    assert_eq!(enumerate_convex_orders(&one).unwrap().len(), 1);
    let two = LeafStructure { leaves: 2, c: BTreeSet::new() };
    assert_eq!(enumerate_convex_orders(&two).unwrap().len(), 2);
    let four = tree_to_leaf_structure(&build_nice_tree_family(2));
    let brute: Vec<Vec<usize>> = permutations(4).filter(|p| is_convex_leaf_order(&four, p)).collect();
    assert_eq!(brute.len(), 8);
    let mut listed = enumerate_convex_orders(&four).unwrap();
    listed.sort();
    let mut brute = brute;
    brute.sort();
    assert_eq!(listed, brute);
}

#[test]
fn power_of_two_law() {
    for leaves in 1..=6 {
        for ls in leaf_structures_with(leaves) {
            let (t, _) = minimal_tree(&ls).unwrap();
            let b = t.non_terminal_count();
            assert_eq!(b, leaves - 1);
            let listed = enumerate_convex_orders(&ls).unwrap();
            assert_eq!(listed.len(), 1 << b);
            assert!(listed.iter().all(|o| is_convex_leaf_order(&ls, o)));
            if leaves <= 5 {
                assert_eq!(permutations(leaves).filter(|p| is_convex_leaf_order(&ls, p)).count(), 1 << b);
            }
        }
    }
}

#[test]
fn nice_trees() {
    let t0 = build_nice_tree_family(0);
    assert_eq!(t0.len(), 1);
    assert!(is_nice(&t0, 0));
    let t2 = build_nice_tree_family(2);
    assert_eq!(t2.leaves().len(), 4);
    assert!(t2.leaves().iter().all(|&v| t2.level(v) == 2));
    assert!(is_nice(&t2, 2));
    assert!(!is_nice(&t2, 1));
    let pruned = RootedBinaryTree::new(vec![None, Some(0), Some(0), Some(1), Some(1), Some(2)], 0).unwrap();
    assert!(!is_nice(&pruned, 2));
}

#[test]
fn minimal_tree_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=15 {
        for _ in 0..30 {
            let (_, t) = random_tree(&mut rng, n);
            let ls = tree_to_leaf_structure(&t);
            let (m, map) = minimal_tree(&ls).unwrap();
            assert_eq!(tree_to_leaf_structure(&m).relabel(&map), ls);
            assert!((0..m.len()).all(|v| m.children(v).len() != 1));
            assert!(m.len() <= t.len());
        }
    }
}

#[test]
fn witness_for_small_structures() {
    let single = OrderedLeafStructure { structure: LeafStructure { leaves: 1, c: BTreeSet::new() }, order: vec![0] };
    let w = build_oh_qop_witness(&single).unwrap();
    assert_eq!(w.embeddings.len(), 1);
    let r = check_oh_witness(&single, &w).unwrap();
    assert!(r.exact);
    assert_eq!(r.max_deviation, 0.0);

    let pair = OrderedLeafStructure { structure: LeafStructure { leaves: 2, c: BTreeSet::new() }, order: vec![1, 0] };
    let w = build_oh_qop_witness(&pair).unwrap();
    assert_eq!(w.embeddings.len(), 2);
    let images: Vec<BTreeSet<usize>> = w.embeddings.iter().map(|e| e.iter().copied().collect()).collect();
    assert!(images[0].is_disjoint(&images[1]));
    let r = check_oh_witness(&pair, &w).unwrap();
    assert_eq!(r.expansions_of_a, 2);
    assert!(r.exact);
    assert_eq!(r.max_deviation, 0.0);
}

#[test]
fn witness_is_exact_for_every_three_leaf_order() {
    for ls in leaf_structures_with(3) {
        for order in permutations(3) {
            let a = OrderedLeafStructure { structure: ls.clone(), order };
            let w = build_oh_qop_witness(&a).unwrap();
            let r = check_oh_witness(&a, &w).unwrap();
            assert!(r.exact);
            assert_eq!(r.embeddings, r.expansions_of_a);
        }
    }
}

#[test]
fn tree_json_round_trip() {
    let t = build_nice_tree_family(3);
    let back = RootedBinaryTree::from_json_str(&t.to_json().to_string()).unwrap();
    assert_eq!(back, t);
    assert!(RootedBinaryTree::from_json_str(r#"{"parents": [null, 0, 0, 0], "root": 0}"#).is_err());
}
