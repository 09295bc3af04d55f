//! Rooted binary trees, their leaf structures with the ternary relation
//! `C`, convex orders, nice trees and exact witnesses for ordered leaf
//! structures.

use crate::error::{Error, Result};
use crate::structures::permutations;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A rooted tree with at most two children per node, stored as parent
/// links (`None` at the root).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct RootedBinaryTree {
    parents: Vec<Option<usize>>,
    root: usize,
    children: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    parents: Vec<Option<usize>>,
    root: usize,
}

impl TryFrom<TreeJson> for RootedBinaryTree {
    type Error = Error;
    fn try_from(j: TreeJson) -> Result<Self> {
        RootedBinaryTree::new(j.parents, j.root)
    }
}

impl From<RootedBinaryTree> for TreeJson {
    fn from(t: RootedBinaryTree) -> Self {
        TreeJson { parents: t.parents, root: t.root }
    }
}

impl RootedBinaryTree {
    /// Accepts `parents[root]` as `None` or `Some(root)`.
    pub fn new(mut parents: Vec<Option<usize>>, root: usize) -> Result<Self> {
        let n = parents.len();
        if root >= n {
            return Err(Error::Malformed("root out of range".into()));
        }
        if parents[root] == Some(root) {
            parents[root] = None;
        }
        if parents[root].is_some() {
            return Err(Error::Malformed("the root has a parent".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate() {
            match p {
                None if v != root => return Err(Error::Malformed(format!("node {v} has no parent"))),
                Some(p) if *p >= n || *p == v => {
                    return Err(Error::Malformed(format!("bad parent for node {v}")))
                }
                Some(p) => children[*p].push(v),
                None => {}
            }
        }
        if children.iter().any(|c| c.len() > 2) {
            return Err(Error::Malformed("a node has more than two children".into()));
        }
        let t = RootedBinaryTree { parents, root, children };
        let reached = t.preorder().len();
        if reached != n {
            return Err(Error::Malformed("parent links contain a cycle".into()));
        }
        Ok(t)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trees serialise")
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Nodes in depth-first preorder, children by increasing id.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        let mut seen = vec![false; self.len()];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            out.push(v);
            for &c in self.children[v].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Terminal nodes in preorder; leaf `i` of the leaf structure is
    /// `leaves()[i]`.
    pub fn leaves(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&v| self.children[v].is_empty()).collect()
    }

    pub fn non_terminal_count(&self) -> usize {
        self.children.iter().filter(|c| !c.is_empty()).count()
    }

    /// Number of edges from `v` to the root.
    pub fn level(&self, mut v: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parents[v] {
            v = p;
            d += 1;
        }
        d
    }

    fn path_to_root(&self, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(p) = self.parents[v] {
            out.push(p);
            v = p;
        }
        out
    }

    /// Nodes on the shortest path between `x` and `y`.
    fn path_between(&self, x: usize, y: usize) -> BTreeSet<usize> {
        let px = self.path_to_root(x);
        let py = self.path_to_root(y);
        let sy: BTreeSet<usize> = py.iter().copied().collect();
        let meet = *px.iter().find(|v| sy.contains(v)).expect("common root");
        let mut out: BTreeSet<usize> = px.iter().take_while(|&&v| v != meet).copied().collect();
        out.extend(py.iter().take_while(|&&v| v != meet).copied());
        out.insert(meet);
        out
    }
}

/// Leaves `0..leaves` with the ternary relation `C`, stored with both
/// orders of the symmetric pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeafStructure {
    pub leaves: usize,
    pub c: BTreeSet<(usize, usize, usize)>,
}

impl LeafStructure {
    pub fn holds(&self, x: usize, y: usize, z: usize) -> bool {
        self.c.contains(&(x, y, z))
    }

    /// Renames leaf `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> LeafStructure {
        LeafStructure {
            leaves: self.leaves,
            c: self.c.iter().map(|&(x, y, z)| (perm[x], perm[y], perm[z])).collect(),
        }
    }

    /// Restriction to `vs`, renumbered by position.
    pub fn induced(&self, vs: &[usize]) -> LeafStructure {
        let mut c = BTreeSet::new();
        for (i, &x) in vs.iter().enumerate() {
            for (j, &y) in vs.iter().enumerate() {
                for (k, &z) in vs.iter().enumerate() {
                    if self.holds(x, y, z) {
                        c.insert((i, j, k));
                    }
                }
            }
        }
        LeafStructure { leaves: vs.len(), c }
    }
}

/// `C(x,y,z)` iff the path from `x` to the root avoids the path between
/// `y` and `z`, for distinct leaves.
pub fn tree_to_leaf_structure(t: &RootedBinaryTree) -> LeafStructure {
    let leaves = t.leaves();
    let mut c = BTreeSet::new();
    for (i, &x) in leaves.iter().enumerate() {
        let up: BTreeSet<usize> = t.path_to_root(x).into_iter().collect();
        for (j, &y) in leaves.iter().enumerate() {
            for (k, &z) in leaves.iter().enumerate() {
                if i == j || i == k || j == k {
                    continue;
                }
                if t.path_between(y, z).is_disjoint(&up) {
                    c.insert((i, j, k));
                }
            }
        }
    }
    LeafStructure { leaves: leaves.len(), c }
}

/// The binary tree with the fewest nodes whose leaf structure is `ls`,
/// with `map[i]` the leaf of `ls` at tree leaf `i`.
pub fn minimal_tree(ls: &LeafStructure) -> Result<(RootedBinaryTree, Vec<usize>)> {
    if ls.leaves == 0 {
        return Err(Error::Domain("a leaf structure needs at least one leaf".into()));
    }
    let mut parents: Vec<Option<usize>> = Vec::new();
    let mut map = Vec::new();
    fn build(
        ls: &LeafStructure,
        set: &[usize],
        parent: Option<usize>,
        parents: &mut Vec<Option<usize>>,
        map: &mut Vec<usize>,
    ) -> Result<()> {
        let id = parents.len();
        parents.push(parent);
        if set.len() == 1 {
            map.push(set[0]);
            return Ok(());
        }
        // y and z lie on the same side of the top split iff some x in the
        // set sits outside their clade.
        let mut side = vec![usize::MAX; set.len()];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..set.len() {
            if side[i] != usize::MAX {
                continue;
            }
            side[i] = blocks.len();
            let mut block = vec![set[i]];
            let mut frontier = vec![i];
            while let Some(a) = frontier.pop() {
                for b in 0..set.len() {
                    if side[b] == usize::MAX && set.iter().any(|&x| ls.holds(x, set[a], set[b])) {
                        side[b] = blocks.len();
                        block.push(set[b]);
                        frontier.push(b);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        if blocks.len() != 2 {
            return Err(Error::Domain("relation is not the leaf structure of a binary tree".into()));
        }
        for b in &blocks {
            build(ls, b, Some(id), parents, map)?;
        }
        Ok(())
    }
    let all: Vec<usize> = (0..ls.leaves).collect();
    build(ls, &all, None, &mut parents, &mut map)?;
    let t = RootedBinaryTree::new(parents, 0)?;
    // Preorder of a tree built depth first matches creation order.
    if tree_to_leaf_structure(&t).relabel(&map) != *ls {
        return Err(Error::Domain("relation is not the leaf structure of a binary tree".into()));
    }
    Ok((t, map))
}

/// `C(x,y,z)` forces `x` before both or after both of `y`, `z`.
pub fn is_convex_leaf_order(ls: &LeafStructure, order: &[usize]) -> bool {
    let mut pos = vec![0; ls.leaves];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    ls.c.iter().all(|&(x, y, z)| (pos[x] < pos[y] && pos[x] < pos[z]) || (pos[y] < pos[x] && pos[z] < pos[x]))
}

/// Every convex order (least first), one per choice of child order at each
/// non-terminal node of the minimal tree.
pub fn enumerate_convex_orders(ls: &LeafStructure) -> Result<Vec<Vec<usize>>> {
    let (t, map) = minimal_tree(ls)?;
    let leaves = t.leaves();
    let mut leaf_index = vec![usize::MAX; t.len()];
    for (i, &v) in leaves.iter().enumerate() {
        leaf_index[v] = map[i];
    }
    let internal: Vec<usize> = (0..t.len()).filter(|&v| !t.children(v).is_empty()).collect();
    let mut out = Vec::with_capacity(1 << internal.len());
    for mask in 0u64..(1u64 << internal.len()) {
        let mut flip = vec![false; t.len()];
        for (b, &v) in internal.iter().enumerate() {
            flip[v] = (mask >> b) & 1 == 1;
        }
        let mut order = Vec::with_capacity(ls.leaves);
        let mut stack = vec![t.root()];
        while let Some(v) = stack.pop() {
            let ch = t.children(v);
            if ch.is_empty() {
                order.push(leaf_index[v]);
                continue;
            }
            let mut ch = ch.to_vec();
            if flip[v] {
                ch.reverse();
            }
            for &c in ch.iter().rev() {
                stack.push(c);
            }
        }
        out.push(order);
    }
    out.sort();
    Ok(out)
}

/// The complete binary tree of depth `n` (`2^n` leaves).
pub fn build_nice_tree_family(n: usize) -> RootedBinaryTree {
    let size = (1usize << (n + 1)) - 1;
    let parents = (0..size).map(|v| if v == 0 { None } else { Some((v - 1) / 2) }).collect();
    RootedBinaryTree::new(parents, 0).expect("heap layout")
}

/// Every node above level `n` has two children and the terminal nodes
/// are exactly the `2^n` nodes of level `n`.
pub fn is_nice(t: &RootedBinaryTree, n: usize) -> bool {
    let leaves = t.leaves();
    leaves.len() == 1 << n
        && leaves.iter().all(|&v| t.level(v) == n)
        && (0..t.len()).all(|v| t.children(v).is_empty() || t.children(v).len() == 2)
}

/// An injective map of leaves preserving and reflecting `C`.
pub fn leaf_structure_embedding(a: &LeafStructure, b: &LeafStructure) -> Option<Vec<usize>> {
    fn go(a: &LeafStructure, b: &LeafStructure, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = map.len();
        if i == a.leaves {
            return true;
        }
        for v in 0..b.leaves {
            if used[v] {
                continue;
            }
            map.push(v);
            let ok = (0..=i).all(|x| {
                (0..=i).all(|y| {
                    (0..=i).all(|z| {
                        (x != i && y != i && z != i) || a.holds(x, y, z) == b.holds(map[x], map[y], map[z])
                    })
                })
            });
            if ok {
                used[v] = true;
                if go(a, b, map, used) {
                    return true;
                }
                used[v] = false;
            }
            map.pop();
        }
        false
    }
    let mut map = Vec::with_capacity(a.leaves);
    let mut used = vec![false; b.leaves];
    go(a, b, &mut map, &mut used).then_some(map)
}

/// Leaf structures of all full binary trees with `leaves` leaves, one per
/// isomorphism type.
pub fn leaf_structures_with(leaves: usize) -> Vec<LeafStructure> {
    fn shapes(n: usize) -> Vec<Shape> {
        if n == 1 {
            return vec![Shape::Leaf];
        }
        let mut out = Vec::new();
        for l in 1..=n / 2 {
            for a in shapes(l) {
                for b in shapes(n - l) {
                    out.push(Shape::Node(Box::new(a.clone()), Box::new(b)));
                }
            }
        }
        out
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if leaves == 0 {
        return out;
    }
    for s in shapes(leaves) {
        let mut parents = Vec::new();
        s.emit(None, &mut parents);
        let t = RootedBinaryTree::new(parents, 0).expect("shape");
        let ls = tree_to_leaf_structure(&t);
        if seen.insert(canonical_leaf_form(&ls)) {
            out.push(ls);
        }
    }
    out
}

#[derive(Clone)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn emit(&self, parent: Option<usize>, parents: &mut Vec<Option<usize>>) {
        let id = parents.len();
        parents.push(parent);
        if let Shape::Node(a, b) = self {
            a.emit(Some(id), parents);
            b.emit(Some(id), parents);
        }
    }
}

/// Lexicographically least relabelling; exhaustive, for small structures.
pub fn canonical_leaf_form(ls: &LeafStructure) -> BTreeSet<(usize, usize, usize)> {
    permutations(ls.leaves).map(|p| ls.relabel(&p).c).min().unwrap_or_default()
}

/// `C` relabelled so that the order becomes `0 < 1 < ...`; equal values
/// mean isomorphic ordered structures.
pub fn ordered_form(ls: &LeafStructure, order: &[usize]) -> BTreeSet<(usize, usize, usize)> {
    let mut rank = vec![0; ls.leaves];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    ls.relabel(&rank).c
}

/// Every leaf structure with at most `size_bound` leaves embeds into a
/// family member, and all convex orders of each member give isomorphic
/// ordered structures.
pub fn cofinal_isomorphism(family: &[RootedBinaryTree], size_bound: usize) -> Result<bool> {
    let members: Vec<LeafStructure> = family.iter().map(tree_to_leaf_structure).collect();
    for n in 1..=size_bound {
        for ls in leaf_structures_with(n) {
            if !members.iter().any(|m| leaf_structure_embedding(&ls, m).is_some()) {
                return Ok(false);
            }
        }
    }
    for m in &members {
        let orders = enumerate_convex_orders(m)?;
        let first = ordered_form(m, &orders[0]);
        if orders.iter().any(|o| ordered_form(m, o) != first) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A leaf structure with an arbitrary linear order (least first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedLeafStructure {
    pub structure: LeafStructure,
    pub order: Vec<usize>,
}

/// A witness `B` with embeddings `φ_i : A -> B` such that each convex order
/// of `B` pulls back to each convex order of `A` along exactly one `φ_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OhWitness {
    pub tree: RootedBinaryTree,
    pub structure: LeafStructure,
    /// The linear order of `B`, least first.
    pub order: Vec<usize>,
    pub embeddings: Vec<Vec<usize>>,
    /// Leaf of `A` copied at each leaf of `B`.
    pub hosts: Vec<usize>,
}

/// Builds the witness from the minimal tree `D` of `a`: every non-terminal
/// node `u` becomes a switch with two children, each holding a copy of
/// both subtrees below `u`; embedding `f` sends the left subtree of `u`
/// into the first or second child according to bit `f(u)`.
pub fn build_oh_qop_witness(a: &OrderedLeafStructure) -> Result<OhWitness> {
    let ls = &a.structure;
    let (d, map) = minimal_tree(ls)?;
    let d_leaves = d.leaves();
    let mut host_of_node = vec![usize::MAX; d.len()];
    for (i, &v) in d_leaves.iter().enumerate() {
        host_of_node[v] = map[i];
    }
    let internal: Vec<usize> = d.preorder().into_iter().filter(|&v| !d.children(v).is_empty()).collect();
    let bit_of: std::collections::BTreeMap<usize, usize> =
        internal.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // E(u): returns the root id of the copy.
    struct Builder<'a> {
        d: &'a RootedBinaryTree,
        host_of_node: &'a [usize],
        parents: Vec<Option<usize>>,
        host: Vec<Option<usize>>,
        /// For a switch node: (first child, second child); each child has
        /// children (copy of left subtree, copy of right subtree).
        switch: std::collections::BTreeMap<usize, [[usize; 2]; 2]>,
    }
    impl Builder<'_> {
        fn node(&mut self, parent: Option<usize>, host: Option<usize>) -> usize {
            self.parents.push(parent);
            self.host.push(host);
            self.parents.len() - 1
        }
        fn build(&mut self, u: usize, parent: Option<usize>) -> usize {
            let ch = self.d.children(u).to_vec();
            if ch.is_empty() {
                return self.node(parent, Some(self.host_of_node[u]));
            }
            let beta = self.node(parent, None);
            let mut halves = [[0; 2]; 2];
            for half in halves.iter_mut() {
                let p = self.node(Some(beta), None);
                half[0] = self.build(ch[0], Some(p));
                half[1] = self.build(ch[1], Some(p));
            }
            self.switch.insert(beta, halves);
            beta
        }
    }
    let mut b = Builder {
        d: &d,
        host_of_node: &host_of_node,
        parents: Vec::new(),
        host: Vec::new(),
        switch: Default::default(),
    };
    let root = b.build(d.root(), None);
    let tree = RootedBinaryTree::new(b.parents.clone(), root)?;
    let e_leaves = tree.leaves();
    let mut leaf_pos = vec![usize::MAX; tree.len()];
    for (i, &v) in e_leaves.iter().enumerate() {
        leaf_pos[v] = i;
    }
    let hosts: Vec<usize> = e_leaves.iter().map(|&v| b.host[v].expect("leaf hosts")).collect();

    let mut embeddings = Vec::with_capacity(1 << internal.len());
    for mask in 0u64..(1u64 << internal.len()) {
        let mut phi = vec![usize::MAX; ls.leaves];
        // (node of D, node of E standing for it)
        let mut stack = vec![(d.root(), root)];
        while let Some((u, e)) = stack.pop() {
            let ch = d.children(u);
            if ch.is_empty() {
                phi[host_of_node[u]] = leaf_pos[e];
                continue;
            }
            let halves = b.switch[&e];
            let f = ((mask >> bit_of[&u]) & 1) as usize;
            stack.push((ch[0], halves[f][0]));
            stack.push((ch[1], halves[1 - f][1]));
        }
        embeddings.push(phi);
    }

    let mut rank = vec![0; ls.leaves];
    for (i, &v) in a.order.iter().enumerate() {
        rank[v] = i;
    }
    let mut order: Vec<usize> = (0..e_leaves.len()).collect();
    order.sort_by_key(|&v| (rank[hosts[v]], v));
    Ok(OhWitness { structure: tree_to_leaf_structure(&tree), tree, order, embeddings, hosts })
}

/// Exhaustive check of a witness over all convex orders of `B` and all
/// convex orders of `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OhWitnessReport {
    pub expansions_of_a: usize,
    pub embeddings: usize,
    pub witness_leaves: usize,
    pub expansions_checked: usize,
    /// Largest `|hits/|E| - 1/#(A)|`.
    pub max_deviation: f64,
    /// Every count of respecting embeddings is exactly one.
    pub exact: bool,
}

pub fn check_oh_witness(a: &OrderedLeafStructure, w: &OhWitness) -> Result<OhWitnessReport> {
    let ls = &a.structure;
    let a_orders = enumerate_convex_orders(ls)?;
    for phi in &w.embeddings {
        if ls.induced(&(0..ls.leaves).collect::<Vec<_>>()) != w.structure.induced(phi).relabel(&(0..ls.leaves).collect::<Vec<_>>())
        {
            return Err(Error::Embedding("witness map does not preserve C".into()));
        }
        let pos_b: Vec<usize> = {
            let mut p = vec![0; w.order.len()];
            for (i, &v) in w.order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        let mut by_b: Vec<usize> = (0..ls.leaves).collect();
        by_b.sort_by_key(|&x| pos_b[phi[x]]);
        if by_b != a.order {
            return Err(Error::Embedding("witness map does not preserve the order".into()));
        }
    }
    let rho = 1.0 / a_orders.len() as f64;
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let b_orders = enumerate_convex_orders(&w.structure)?;
    for bo in &b_orders {
        let mut pos = vec![0; bo.len()];
        for (i, &v) in bo.iter().enumerate() {
            pos[v] = i;
        }
        let mut hits = vec![0usize; a_orders.len()];
        for phi in &w.embeddings {
            let mut pulled: Vec<usize> = (0..ls.leaves).collect();
            pulled.sort_by_key(|&x| pos[phi[x]]);
            if let Ok(i) = a_orders.binary_search(&pulled) {
                hits[i] += 1;
            }
        }
        for &h in &hits {
            exact &= h == 1;
            worst = worst.max((h as f64 / w.embeddings.len() as f64 - rho).abs());
        }
    }
    Ok(OhWitnessReport {
        expansions_of_a: a_orders.len(),
        embeddings: w.embeddings.len(),
        witness_leaves: w.structure.leaves,
        expansions_checked: b_orders.len(),
        max_deviation: worst,
        exact,
    })
}
