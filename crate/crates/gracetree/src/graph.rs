//! Trees, vertex labelings, the labeling hierarchy and structural recognizers.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{contract, invalid, Result};

/// An immutable simple tree on vertex ids `0..vertex_count`, with an optional root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    root: Option<usize>,
}

impl Tree {
    /// Builds a tree, rejecting anything that is not connected and acyclic.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Tree> {
        if vertex_count == 0 {
            return invalid("a tree needs at least one vertex");
        }
        if edges.len() + 1 != vertex_count {
            return invalid(format!(
                "{} vertices need {} edges, got {}",
                vertex_count,
                vertex_count - 1,
                edges.len()
            ));
        }
        let mut adj = vec![Vec::new(); vertex_count];
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return invalid(format!(
                    "edge {u}-{v} names a vertex outside 0..{vertex_count}"
                ));
            }
            if u == v {
                return invalid(format!("self-loop at {u}"));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return invalid(format!("duplicate edge {}-{}", key.0, key.1));
            }
            adj[u].push(v);
            adj[v].push(u);
            norm.push((u, v));
        }
        let mut visited = vec![false; vertex_count];
        let mut stack = vec![0];
        visited[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !visited[y] {
                    visited[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        if count != vertex_count {
            return invalid("edges do not connect every vertex (the input contains a cycle)");
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        Ok(Tree {
            adj,
            edges: norm,
            root: None,
        })
    }

    /// The one-vertex tree.
    pub fn single() -> Tree {
        Tree {
            adj: vec![Vec::new()],
            edges: Vec::new(),
            root: None,
        }
    }

    /// The path with `n` edges on vertices `0..=n` in order.
    pub fn path(n: usize) -> Tree {
        let edges: Vec<_> = (0..n).map(|i| (i, i + 1)).collect();
        Tree::new(n + 1, &edges).expect("path is a tree")
    }

    /// The star with center 0 and leaves `1..=m`.
    pub fn star(m: usize) -> Tree {
        let edges: Vec<_> = (1..=m).map(|i| (0, i)).collect();
        Tree::new(m + 1, &edges)
            .expect("star is a tree")
            .with_root(0)
    }

    /// A spider with center 0 and the given leg lengths.
    pub fn spider(legs: &[usize]) -> Tree {
        let mut edges = Vec::new();
        let mut next = 1;
        for &len in legs {
            let mut prev = 0;
            for _ in 0..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
        }
        Tree::new(next, &edges)
            .expect("spider is a tree")
            .with_root(0)
    }

    /// Builds a rooted tree from a parent array (`parent[root] == None`).
    pub fn from_parents(parent: &[Option<usize>]) -> Result<Tree> {
        let mut root = None;
        let mut edges = Vec::new();
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) => edges.push((*p, v)),
                None if root.is_none() => root = Some(v),
                None => return invalid("parent array has two roots"),
            }
        }
        let t = Tree::new(parent.len(), &edges)?;
        Ok(match root {
            Some(r) => t.with_root(r),
            None => t,
        })
    }

    /// Builds a rooted tree from child lists, the root being vertex 0.
    pub fn from_children(children: &[Vec<usize>]) -> Result<Tree> {
        let mut edges = Vec::new();
        for (u, cs) in children.iter().enumerate() {
            for &c in cs {
                edges.push((u, c));
            }
        }
        Ok(Tree::new(children.len(), &edges)?.with_root(0))
    }

    pub fn with_root(mut self, root: usize) -> Tree {
        assert!(root < self.adj.len(), "root {root} out of range");
        self.root = Some(root);
        self
    }

    pub fn without_root(mut self) -> Tree {
        self.root = None;
        self
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// The number of edges, written `n` throughout.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.is_leaf(v))
            .collect()
    }

    /// BFS from `r`: visiting order, parents and depths.
    pub fn bfs(&self, r: usize) -> Rooted {
        let n = self.vertex_count();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([r]);
        seen[r] = true;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        let mut children = vec![Vec::new(); n];
        for &v in &order {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        Rooted {
            root: r,
            parent,
            depth,
            order,
            children,
        }
    }

    pub fn eccentricity(&self, v: usize) -> usize {
        *self.bfs(v).depth.iter().max().unwrap()
    }

    pub fn eccentricities(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .map(|v| self.eccentricity(v))
            .collect()
    }

    /// A longest path starting at `v`, ties broken toward smaller ids.
    pub fn longest_path_from(&self, v: usize) -> Vec<usize> {
        let r = self.bfs(v);
        let far = (0..self.vertex_count())
            .max_by_key(|&x| (r.depth[x], std::cmp::Reverse(x)))
            .unwrap();
        let mut path = vec![far];
        let mut x = far;
        while let Some(p) = r.parent[x] {
            path.push(p);
            x = p;
        }
        path.reverse();
        path
    }

    /// A longest path in the tree.
    pub fn diameter_path(&self) -> Vec<usize> {
        let a = *self.longest_path_from(0).last().unwrap();
        self.longest_path_from(a)
    }

    pub fn diameter(&self) -> usize {
        self.diameter_path().len() - 1
    }

    /// The one or two central vertices.
    pub fn center(&self) -> Vec<usize> {
        let p = self.diameter_path();
        let d = p.len() - 1;
        if d.is_multiple_of(2) {
            vec![p[d / 2]]
        } else {
            let mut c = vec![p[d / 2], p[d / 2 + 1]];
            c.sort_unstable();
            c
        }
    }

    /// The vertices reachable from `start` without crossing `avoid`.
    pub fn component_without(&self, start: usize, avoid: usize) -> Vec<usize> {
        let mut out = vec![start];
        let mut stack = vec![(start, avoid)];
        while let Some((x, from)) = stack.pop() {
            for &y in &self.adj[x] {
                if y != from {
                    out.push(y);
                    stack.push((y, x));
                }
            }
        }
        out
    }

    /// The subtree induced on `keep`, renumbered in the given order. Returns the tree
    /// and the map from new ids to old ids.
    pub fn induced(&self, keep: &[usize]) -> Result<(Tree, Vec<usize>)> {
        let mut index = HashMap::new();
        for (i, &v) in keep.iter().enumerate() {
            index.insert(v, i);
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
                edges.push((a, b));
            }
        }
        Ok((Tree::new(keep.len(), &edges)?, keep.to_vec()))
    }

    /// Adds `k` leaves at `v`; new leaves get ids `vertex_count..`.
    pub fn attach_leaves(&self, v: usize, k: usize) -> Tree {
        let n = self.vertex_count();
        let mut edges = self.edges.clone();
        for i in 0..k {
            edges.push((v, n + i));
        }
        let t = Tree::new(n + k, &edges).expect("attaching leaves keeps a tree");
        match self.root {
            Some(r) => t.with_root(r),
            None => t,
        }
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel_vertices(&self, perm: &[usize]) -> Tree {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        let t = Tree::new(self.vertex_count(), &edges).expect("permutation keeps a tree");
        match self.root {
            Some(r) => t.with_root(perm[r]),
            None => t,
        }
    }
}

/// A BFS view of a tree from a chosen root.
#[derive(Debug, Clone)]
pub struct Rooted {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    pub order: Vec<usize>,
    pub children: Vec<Vec<usize>>,
}

impl Rooted {
    pub fn height(&self) -> usize {
        *self.depth.iter().max().unwrap()
    }

    pub fn level(&self, l: usize) -> Vec<usize> {
        self.order
            .iter()
            .copied()
            .filter(|&v| self.depth[v] == l)
            .collect()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    /// Whether `d` lies in the subtree of `a` (a vertex is its own descendant).
    pub fn is_descendant(&self, d: usize, a: usize) -> bool {
        let mut x = d;
        loop {
            if x == a {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }
}

/// AHU canonical string of the subtree at `v`.
pub fn rooted_canon(children: &[Vec<usize>], v: usize) -> String {
    let mut memo = vec![None; children.len()];
    canon_rec(children, v, &mut memo)
}

fn canon_rec(children: &[Vec<usize>], v: usize, memo: &mut Vec<Option<String>>) -> String {
    if let Some(s) = &memo[v] {
        return s.clone();
    }
    let mut parts: Vec<String> = children[v]
        .iter()
        .map(|&c| canon_rec(children, c, memo))
        .collect();
    parts.sort();
    let s = format!("({})", parts.concat());
    memo[v] = Some(s.clone());
    s
}

/// Maps rooted tree `a` (at `ra`) onto rooted tree `b` (at `rb`): `result[x]` is the vertex
/// of `b` matched with vertex `x` of `a`. `None` if the rooted trees differ.
pub fn rooted_isomorphism(a: &Tree, ra: usize, b: &Tree, rb: usize) -> Option<Vec<usize>> {
    if a.vertex_count() != b.vertex_count() {
        return None;
    }
    let ca = a.bfs(ra).children;
    let cb = b.bfs(rb).children;
    let mut ma = vec![None; ca.len()];
    let mut mb = vec![None; cb.len()];
    for v in 0..ca.len() {
        canon_rec(&ca, v, &mut ma);
    }
    for v in 0..cb.len() {
        canon_rec(&cb, v, &mut mb);
    }
    if ma[ra] != mb[rb] {
        return None;
    }
    let mut map = vec![usize::MAX; ca.len()];
    let mut stack = vec![(ra, rb)];
    while let Some((x, y)) = stack.pop() {
        map[x] = y;
        let mut xs = ca[x].clone();
        let mut ys = cb[y].clone();
        xs.sort_by(|p, q| ma[*p].cmp(&ma[*q]));
        ys.sort_by(|p, q| mb[*p].cmp(&mb[*q]));
        for (p, q) in xs.into_iter().zip(ys) {
            stack.push((p, q));
        }
    }
    Some(map)
}

/// Whether two trees are isomorphic as free trees.
pub fn isomorphic(a: &Tree, b: &Tree) -> bool {
    if a.vertex_count() != b.vertex_count() {
        return false;
    }
    let ka = a.center();
    let kb = b.center();
    if ka.len() != kb.len() {
        return false;
    }
    kb.iter()
        .any(|&rb| rooted_isomorphism(a, ka[0], b, rb).is_some())
}

/// An injective map from vertices to non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexLabeling(Vec<u64>);

impl VertexLabeling {
    /// Wraps labels indexed by vertex id, rejecting repeated labels.
    pub fn new(labels: Vec<u64>) -> Result<VertexLabeling> {
        let mut seen = BTreeSet::new();
        for &l in &labels {
            if !seen.insert(l) {
                return invalid(format!("label {l} used twice"));
            }
        }
        Ok(VertexLabeling(labels))
    }

    pub fn labels(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn get(&self, v: usize) -> u64 {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_label(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// The vertex carrying label `l`.
    pub fn vertex_with(&self, l: u64) -> Option<usize> {
        self.0.iter().position(|&x| x == l)
    }

    /// Induced edge labels in the tree's edge order.
    pub fn edge_labels(&self, tree: &Tree) -> Vec<u64> {
        tree.edges()
            .iter()
            .map(|&(u, v)| self.0[u].abs_diff(self.0[v]))
            .collect()
    }

    fn check_defined(&self, tree: &Tree) -> Result<()> {
        if self.0.len() != tree.vertex_count() {
            return invalid(format!(
                "labeling covers {} vertices but the tree has {}",
                self.0.len(),
                tree.vertex_count()
            ));
        }
        Ok(())
    }
}

/// Which labeling classes a labeling belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingClassification {
    pub is_rho: bool,
    pub is_sigma: bool,
    pub is_graceful: bool,
    /// The least `k` witnessing an α-labeling.
    pub alpha_index: Option<u64>,
}

/// Checks every definition of the hierarchy against `labeling`.
pub fn classify_labeling(tree: &Tree, labeling: &VertexLabeling) -> Result<LabelingClassification> {
    labeling.check_defined(tree)?;
    let n = tree.edge_count() as u64;
    let max = labeling.max_label();
    let edges = labeling.edge_labels(tree);
    let within_2n = max <= 2 * n;
    let mut hit = vec![false; n as usize + 1];
    let mut rho = within_2n;
    for &e in &edges {
        if !rho {
            break;
        }
        let x = e.min(2 * n + 1 - e.min(2 * n + 1));
        if x == 0 || x > n || hit[x as usize] {
            rho = false;
        } else {
            hit[x as usize] = true;
        }
    }
    let mut sorted = edges.clone();
    sorted.sort_unstable();
    let exact = sorted.iter().copied().eq(1..=n);
    let sigma = within_2n && exact;
    let graceful = max <= n && exact;
    let alpha_index = if graceful {
        (0..n.max(1)).find(|&k| alpha_holds(tree, labeling, k))
    } else {
        None
    };
    Ok(LabelingClassification {
        is_rho: rho,
        is_sigma: sigma,
        is_graceful: graceful,
        alpha_index,
    })
}

/// Whether every edge straddles the threshold `k`.
pub fn alpha_holds(tree: &Tree, labeling: &VertexLabeling, k: u64) -> bool {
    tree.edges().iter().all(|&(u, v)| {
        let (a, b) = (labeling.get(u), labeling.get(v));
        a.min(b) <= k && k < a.max(b)
    })
}

/// Graceful check with a precise reason on failure.
pub fn check_graceful(tree: &Tree, labeling: &VertexLabeling) -> Result<()> {
    let c = classify_labeling(tree, labeling)?;
    if c.is_graceful {
        Ok(())
    } else {
        contract("labeling is not graceful")
    }
}

pub fn is_graceful(tree: &Tree, labeling: &VertexLabeling) -> bool {
    classify_labeling(tree, labeling)
        .map(|c| c.is_graceful)
        .unwrap_or(false)
}

/// The complementary labeling `n - f`.
pub fn complement_labeling(labeling: &VertexLabeling, n: u64) -> Result<VertexLabeling> {
    if labeling.max_label() > n || labeling.len() as u64 != n + 1 {
        return contract("complement needs a graceful labeling with labels 0..n");
    }
    Ok(VertexLabeling(labeling.0.iter().map(|&f| n - f).collect()))
}

/// Complement with a full graceful check against the tree.
pub fn complement_on(tree: &Tree, labeling: &VertexLabeling) -> Result<VertexLabeling> {
    check_graceful(tree, labeling)?;
    complement_labeling(labeling, tree.edge_count() as u64)
}

/// The inverse α-labeling: `k - f` below the threshold, `n + k + 1 - f` above it.
pub fn inverse_alpha(tree: &Tree, labeling: &VertexLabeling, k: u64) -> Result<VertexLabeling> {
    check_graceful(tree, labeling)?;
    if !alpha_holds(tree, labeling, k) {
        return contract(format!("labeling is not an alpha-labeling with index {k}"));
    }
    let n = tree.edge_count() as u64;
    let out = labeling
        .0
        .iter()
        .map(|&f| if f <= k { k - f } else { n + k + 1 - f })
        .collect();
    Ok(VertexLabeling(out))
}

/// A 2-coloring of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub part_a: Vec<usize>,
    pub part_b: Vec<usize>,
}

impl Bipartition {
    pub fn of(tree: &Tree) -> Bipartition {
        let r = tree.bfs(0);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for v in 0..tree.vertex_count() {
            if r.depth[v].is_multiple_of(2) {
                a.push(v)
            } else {
                b.push(v)
            }
        }
        Bipartition {
            part_a: a,
            part_b: b,
        }
    }

    pub fn side_of(&self, v: usize) -> &[usize] {
        if self.part_a.contains(&v) {
            &self.part_a
        } else {
            &self.part_b
        }
    }
}

/// The bipartition (part A holds vertex 0) and every vertex's potential depth set.
pub fn bipartition_and_depth_sets(tree: &Tree) -> (Bipartition, Vec<BTreeSet<usize>>) {
    let bp = Bipartition::of(tree);
    let sets = (0..tree.vertex_count())
        .map(|v| (0..bp.side_of(v).len()).collect())
        .collect();
    (bp, sets)
}

/// The depth set of position `v` on the path with `n` edges.
pub fn path_depth_set(n: usize, v: usize) -> Result<BTreeSet<usize>> {
    if v > n {
        return invalid(format!("P_{n} has no vertex at position {v}"));
    }
    let evens = n / 2 + 1;
    let side = if v.is_multiple_of(2) {
        evens
    } else {
        n + 1 - evens
    };
    let mut set: BTreeSet<usize> = (0..side).collect();
    let leaf = v == 0 || v == n;
    let drop: &[usize] = match (n, v) {
        _ if n > 0 && n.is_multiple_of(4) && leaf => &[n / 4],
        // Inverse α-labelings reflect the low part, so these sets are symmetric.
        (4, 2) => &[0, 2],
        (5, 1) | (5, 4) => &[1],
        (8, 4) => &[1, 3],
        _ => &[],
    };
    for d in drop {
        set.remove(d);
    }
    Ok(set)
}

/// Data describing a generalized banana tree rooted at `apex`: every branch is a path of
/// `h` edges to a joined leaf, followed by one edge to a star center carrying leaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BananaShape {
    pub apex: usize,
    pub h: usize,
    /// Per branch: the path from the apex's child down to the star center (inclusive).
    pub spines: Vec<Vec<usize>>,
    /// Per branch: the leaves hanging off the star center.
    pub tips: Vec<Vec<usize>>,
}

/// An even-caterpillar banana tree: a generalized banana with positive even bundles of extra
/// leaves on every spine vertex at levels `k..=h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenCaterpillarShape {
    pub banana: BananaShape,
    pub k: usize,
    /// Extra leaves per vertex (indexed by vertex id, empty where none).
    pub extras: Vec<Vec<usize>>,
}

/// Single-child chains from each child of `apex`; `None` unless each chain ends at a
/// vertex whose children are all leaves.
fn banana_branches(r: &Rooted, apex: usize) -> Option<Vec<Vec<usize>>> {
    let heads = &r.children[apex];
    if heads.is_empty() {
        return None;
    }
    let mut branches = Vec::new();
    for &c in heads {
        let mut chain = vec![c];
        let mut x = c;
        while r.children[x].len() == 1 {
            x = r.children[x][0];
            chain.push(x);
        }
        if !r.children[x].iter().all(|&y| r.is_leaf(y)) {
            return None;
        }
        branches.push(chain);
    }
    Some(branches)
}

/// Every `h` for which the tree is a generalized banana tree with apex `apex`.
pub fn banana_heights_at(tree: &Tree, apex: usize) -> BTreeSet<usize> {
    let r = tree.bfs(apex);
    let Some(branches) = banana_branches(&r, apex) else {
        return BTreeSet::new();
    };
    let mut common: Option<BTreeSet<usize>> = None;
    for chain in &branches {
        // A branch that is a bare path ends either in a one-leaf star or in a lone center.
        let p = chain.len() - 1;
        let mut o = BTreeSet::from([p]);
        if r.is_leaf(*chain.last().unwrap()) && p >= 1 {
            o.insert(p - 1);
        }
        common = Some(match common {
            None => o,
            Some(c) => c.intersection(&o).copied().collect(),
        });
    }
    common.unwrap_or_default()
}

/// The generalized banana decomposition with apex `apex` and height `h`.
pub fn banana_shape_at_h(tree: &Tree, apex: usize, h: usize) -> Option<BananaShape> {
    if !banana_heights_at(tree, apex).contains(&h) {
        return None;
    }
    let r = tree.bfs(apex);
    let branches = banana_branches(&r, apex)?;
    let mut spines = Vec::new();
    let mut tips = Vec::new();
    for chain in branches {
        let spine: Vec<usize> = chain[..=h].to_vec();
        tips.push(r.children[spine[h]].clone());
        spines.push(spine);
    }
    Some(BananaShape {
        apex,
        h,
        spines,
        tips,
    })
}

/// Recognizes a generalized banana tree with the given apex, preferring the smallest `h`.
pub fn banana_shape_at(tree: &Tree, apex: usize) -> Option<BananaShape> {
    let h = *banana_heights_at(tree, apex).iter().next()?;
    banana_shape_at_h(tree, apex, h)
}

/// Recognizes a generalized banana tree for any apex.
pub fn banana_shape(tree: &Tree) -> Option<BananaShape> {
    if let Some(r) = tree.root() {
        if let Some(s) = banana_shape_at(tree, r) {
            return Some(s);
        }
    }
    (0..tree.vertex_count()).find_map(|a| banana_shape_at(tree, a))
}

/// Recognizes an even-caterpillar banana tree with the given apex and threshold level `k`.
pub fn even_caterpillar_shape_at(
    tree: &Tree,
    apex: usize,
    k: usize,
) -> Option<EvenCaterpillarShape> {
    let r = tree.bfs(apex);
    let d = r.height();
    if d < 2 || k >= d {
        return None;
    }
    let h = d - 2;
    let mut extras = vec![Vec::new(); tree.vertex_count()];
    let mut spines = Vec::new();
    let mut tips = Vec::new();
    let wants = |l: usize| l >= k;
    let take_extras = |v: usize, pool: Vec<usize>, level: usize| -> Option<Vec<usize>> {
        if wants(level) {
            (pool.len() >= 2 && pool.len().is_multiple_of(2)).then_some(pool)
        } else {
            pool.is_empty().then_some(pool)
        }
        .inspect(|_p| {
            let _ = v;
        })
    };
    if h == 0 {
        // The apex carries the star centers and, when k = 0, the extra leaves.
        let kids = &r.children[apex];
        let leafy: Vec<usize> = kids.iter().copied().filter(|&c| r.is_leaf(c)).collect();
        let inner: Vec<usize> = kids.iter().copied().filter(|&c| !r.is_leaf(c)).collect();
        for &c in &inner {
            if !r.children[c].iter().all(|&y| r.is_leaf(y)) {
                return None;
            }
        }
        let extra_count = if wants(0) {
            if leafy.len() < 2 {
                return None;
            }
            leafy.len() - leafy.len() % 2
        } else {
            0
        };
        extras[apex] = leafy[leafy.len() - extra_count..].to_vec();
        for &c in inner
            .iter()
            .chain(leafy[..leafy.len() - extra_count].iter())
        {
            spines.push(vec![c]);
            tips.push(r.children[c].clone());
        }
        let banana = BananaShape {
            apex,
            h,
            spines,
            tips,
        };
        return Some(EvenCaterpillarShape { banana, k, extras });
    }
    let root_leaves: Vec<usize> = r.children[apex]
        .iter()
        .copied()
        .filter(|&c| r.is_leaf(c))
        .collect();
    extras[apex] = take_extras(apex, root_leaves, 0)?;
    for &c in r.children[apex].iter().filter(|&&c| !r.is_leaf(c)) {
        let mut spine = vec![c];
        let mut x = c;
        for level in 1..=h {
            let leafy: Vec<usize> = r.children[x]
                .iter()
                .copied()
                .filter(|&y| r.is_leaf(y))
                .collect();
            let inner: Vec<usize> = r.children[x]
                .iter()
                .copied()
                .filter(|&y| !r.is_leaf(y))
                .collect();
            let (next, pool) = if level < h {
                if inner.len() != 1 {
                    return None;
                }
                (inner[0], leafy)
            } else if inner.len() == 1 {
                (inner[0], leafy)
            } else if inner.is_empty() && !leafy.is_empty() {
                (leafy[0], leafy[1..].to_vec())
            } else {
                return None;
            };
            extras[x] = take_extras(x, pool, level)?;
            spine.push(next);
            x = next;
        }
        if !r.children[x].iter().all(|&y| r.is_leaf(y)) {
            return None;
        }
        tips.push(r.children[x].clone());
        spines.push(spine);
    }
    if spines.is_empty() {
        return None;
    }
    let banana = BananaShape {
        apex,
        h,
        spines,
        tips,
    };
    Some(EvenCaterpillarShape { banana, k, extras })
}

/// Recognizes an even-caterpillar banana tree for any apex and the largest admissible
/// number of even bundles (smallest `k`).
pub fn even_caterpillar_shape(tree: &Tree) -> Option<EvenCaterpillarShape> {
    let mut apexes: Vec<usize> = (0..tree.vertex_count()).collect();
    if let Some(r) = tree.root() {
        apexes.retain(|&a| a != r);
        apexes.insert(0, r);
    }
    for a in apexes {
        let d = tree.eccentricity(a);
        for k in 0..d {
            if let Some(s) = even_caterpillar_shape_at(tree, a, k) {
                return Some(s);
            }
        }
    }
    None
}

/// Structural summary of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeProfile {
    pub diameter: usize,
    pub center: Vec<usize>,
    pub eccentricities: Vec<usize>,
    pub caterpillar: bool,
    pub lobster: bool,
    pub spider: bool,
    pub banana: bool,
    pub generalized_banana: Option<usize>,
    pub even_caterpillar_banana: Option<(usize, usize)>,
    pub radial: bool,
    pub odd_radial: bool,
    pub symmetrical: bool,
}

/// Whether every vertex lies within distance `m` of some path.
pub fn is_m_distant(tree: &Tree, m: usize) -> bool {
    let n = tree.vertex_count();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    for _ in 0..m {
        let alive_count = alive.iter().filter(|&&a| a).count();
        if alive_count <= 2 {
            return true;
        }
        let strip: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] <= 1).collect();
        for &v in &strip {
            alive[v] = false;
        }
        for &v in &strip {
            for &u in tree.neighbors(v) {
                if alive[u] {
                    deg[u] -= 1;
                }
            }
        }
    }
    (0..n).all(|v| !alive[v] || deg[v] <= 2)
}

/// The root used for rooted class flags: the tree's root, else its unique center.
fn profile_root(tree: &Tree) -> Option<usize> {
    tree.root().or_else(|| {
        let c = tree.center();
        (c.len() == 1).then(|| c[0])
    })
}

pub fn is_radial(tree: &Tree, root: usize) -> bool {
    let r = tree.bfs(root);
    let h = r.height();
    (0..tree.vertex_count()).all(|v| !r.is_leaf(v) || r.depth[v] == h)
}

pub fn is_odd_radial(tree: &Tree, root: usize) -> bool {
    let r = tree.bfs(root);
    is_radial(tree, root)
        && (0..tree.vertex_count()).all(|v| r.is_leaf(v) || r.children[v].len() % 2 == 1)
}

pub fn is_symmetrical(tree: &Tree, root: usize) -> bool {
    let r = tree.bfs(root);
    let mut per_level: HashMap<usize, usize> = HashMap::new();
    for v in 0..tree.vertex_count() {
        let c = r.children[v].len();
        if *per_level.entry(r.depth[v]).or_insert(c) != c {
            return false;
        }
    }
    true
}

pub fn is_spider(tree: &Tree) -> bool {
    (0..tree.vertex_count())
        .filter(|&v| tree.degree(v) > 2)
        .count()
        <= 1
}

pub fn profile_tree(tree: &Tree) -> TreeProfile {
    let root = profile_root(tree);
    let gb = banana_shape(tree);
    let banana =
        gb.is_some() && (0..tree.vertex_count()).any(|a| banana_heights_at(tree, a).contains(&1));
    let ecb = even_caterpillar_shape(tree).map(|s| (s.banana.h, s.k));
    TreeProfile {
        diameter: tree.diameter(),
        center: tree.center(),
        eccentricities: tree.eccentricities(),
        caterpillar: is_m_distant(tree, 1),
        lobster: is_m_distant(tree, 2),
        spider: is_spider(tree),
        banana,
        generalized_banana: gb.map(|s| s.h),
        even_caterpillar_banana: ecb,
        radial: root.map(|r| is_radial(tree, r)).unwrap_or(false),
        odd_radial: root.map(|r| is_odd_radial(tree, r)).unwrap_or(false),
        symmetrical: root.map(|r| is_symmetrical(tree, r)).unwrap_or(false),
    }
}
