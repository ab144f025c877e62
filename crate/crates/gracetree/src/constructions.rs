//! The Δ and Δ+1 compositions and their generalizations, subdivision, matchings and
//! contrees, joining at a zero label, symmetrical trees and cyclic decompositions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classic::{label_caterpillar, label_path, label_star};
use crate::error::{contract, invalid, Error, Result};
use crate::graph::{
    alpha_holds, check_graceful, complement_labeling, inverse_alpha, is_graceful, is_symmetrical,
    rooted_isomorphism, Bipartition, Tree, VertexLabeling,
};

/// A set of pairwise disjoint tree edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    partner: BTreeMap<usize, usize>,
}

impl Matching {
    /// Validates that every edge is in the tree and no vertex is covered twice.
    pub fn new(tree: &Tree, edges: &[(usize, usize)]) -> Result<Matching> {
        let mut partner = BTreeMap::new();
        for &(a, b) in edges {
            if a >= tree.vertex_count() || b >= tree.vertex_count() || !tree.has_edge(a, b) {
                return invalid(format!("{a}-{b} is not an edge of the tree"));
            }
            for x in [a, b] {
                if partner.contains_key(&x) {
                    return invalid(format!("vertex {x} is covered by two matching edges"));
                }
            }
            partner.insert(a, b);
            partner.insert(b, a);
        }
        Ok(Matching {
            edges: edges.to_vec(),
            partner,
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        self.partner.get(&v).copied()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.partner(a) == Some(b)
    }

    /// Vertices of `tree` left uncovered.
    pub fn unmatched(&self, tree: &Tree) -> Vec<usize> {
        (0..tree.vertex_count())
            .filter(|v| !self.partner.contains_key(v))
            .collect()
    }

    pub fn is_perfect(&self, tree: &Tree) -> bool {
        self.unmatched(tree).is_empty()
    }

    /// Covers all but at most one vertex.
    pub fn is_almost_perfect(&self, tree: &Tree) -> bool {
        self.unmatched(tree).len() <= 1
    }
}

/// A maximum matching, found by matching the deepest unmatched vertex with its parent.
pub fn maximum_matching(tree: &Tree) -> Matching {
    let r = tree.bfs(0);
    let mut used = vec![false; tree.vertex_count()];
    let mut edges = Vec::new();
    for &v in r.order.iter().rev() {
        if let Some(p) = r.parent[v] {
            if !used[v] && !used[p] {
                used[v] = true;
                used[p] = true;
                edges.push((p, v));
            }
        }
    }
    Matching::new(tree, &edges).expect("greedy matching is valid")
}

/// A direction on every matching edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingOrientation {
    /// `(tail, head)` per matching edge.
    pub arcs: Vec<(usize, usize)>,
}

impl MatchingOrientation {
    pub fn is_head(&self, v: usize) -> Option<bool> {
        self.arcs.iter().find_map(|&(t, h)| {
            if h == v {
                Some(true)
            } else if t == v {
                Some(false)
            } else {
                None
            }
        })
    }

    /// Every non-matching edge has two heads or two tails as ends.
    pub fn satisfies(&self, tree: &Tree, m: &Matching) -> bool {
        let mut head = vec![None; tree.vertex_count()];
        for &(t, h) in &self.arcs {
            head[t] = Some(false);
            head[h] = Some(true);
        }
        tree.edges()
            .iter()
            .filter(|&&(a, b)| !m.contains(a, b))
            .all(|&(a, b)| head[a].is_some() && head[a] == head[b])
    }
}

/// Orients a perfect matching by growing a subtree one matched pair at a time.
pub fn orient_matching(tree: &Tree, m: &Matching) -> Result<MatchingOrientation> {
    if !m.is_perfect(tree) {
        return invalid("orientation needs a perfect matching");
    }
    let n = tree.vertex_count();
    let mut head: Vec<Option<bool>> = vec![None; n];
    let (a, b) = m.edges()[0];
    head[a] = Some(true);
    head[b] = Some(false);
    let mut arcs = vec![(b, a)];
    let mut stack = vec![a, b];
    while let Some(x) = stack.pop() {
        for &w in tree.neighbors(x) {
            if head[w].is_some() {
                continue;
            }
            let w2 = m.partner(w).expect("perfect matching covers w");
            let role = head[x].expect("x is inside");
            head[w] = Some(role);
            head[w2] = Some(!role);
            arcs.push(if role { (w2, w) } else { (w, w2) });
            stack.push(w);
            stack.push(w2);
        }
    }
    Ok(MatchingOrientation { arcs })
}

/// For each S-edge (in `S.edges()` order) the T-vertices at both ends of its copy-connecting edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachmentMap {
    pub ends: Vec<(usize, usize)>,
}

impl AttachmentMap {
    /// Every copy-connecting edge joins the copies of `v`.
    pub fn fixed(s: &Tree, v: usize) -> AttachmentMap {
        AttachmentMap {
            ends: vec![(v, v); s.edge_count()],
        }
    }

    /// One T-vertex per S-edge.
    pub fn per_edge(vertices: &[usize]) -> AttachmentMap {
        AttachmentMap {
            ends: vertices.iter().map(|&t| (t, t)).collect(),
        }
    }

    fn resolve(&self, s: &Tree, t: &Tree) -> Result<Vec<usize>> {
        if self.ends.len() != s.edge_count() {
            return invalid(format!(
                "attachment map has {} entries for {} S-edges",
                self.ends.len(),
                s.edge_count()
            ));
        }
        self.ends
            .iter()
            .map(|&(x, y)| {
                if x != y {
                    invalid(format!(
                        "copy-connecting edge joins different T-vertices {x} and {y}"
                    ))
                } else if x >= t.vertex_count() {
                    invalid(format!("T has no vertex {x}"))
                } else {
                    Ok(x)
                }
            })
            .collect()
    }
}

fn side_a(t: &Tree, a_vertex: usize) -> Vec<bool> {
    let bp = Bipartition::of(t);
    let a_side: BTreeSet<usize> = bp.side_of(a_vertex).iter().copied().collect();
    (0..t.vertex_count()).map(|x| a_side.contains(&x)).collect()
}

/// S Δ T: a copy of T per S-vertex, copy `x` holding vertex ids `x·n_T .. (x+1)·n_T`.
/// Part A of T is the side of T's vertex labeled 0.
pub fn delta_construction(
    s: &Tree,
    f: &VertexLabeling,
    t: &Tree,
    g: &VertexLabeling,
    attach: &AttachmentMap,
) -> Result<(Tree, VertexLabeling)> {
    let zero = g
        .vertex_with(0)
        .ok_or_else(|| Error::ContractViolation("g has no vertex labeled 0".into()))?;
    delta_construction_with_part(s, f, t, g, attach, zero)
}

/// S Δ T with part A chosen as the side of `a_vertex`.
pub fn delta_construction_with_part(
    s: &Tree,
    f: &VertexLabeling,
    t: &Tree,
    g: &VertexLabeling,
    attach: &AttachmentMap,
    a_vertex: usize,
) -> Result<(Tree, VertexLabeling)> {
    check_graceful(s, f)?;
    check_graceful(t, g)?;
    let via = attach.resolve(s, t)?;
    if a_vertex >= t.vertex_count() {
        return invalid(format!("T has no vertex {a_vertex}"));
    }
    let (ns, nt) = (s.vertex_count(), t.vertex_count());
    let in_a = side_a(t, a_vertex);
    let mut edges = Vec::with_capacity(ns * nt - 1);
    for x in 0..ns {
        edges.extend(t.edges().iter().map(|&(p, q)| (x * nt + p, x * nt + q)));
    }
    for (&(x1, x2), &w) in s.edges().iter().zip(&via) {
        edges.push((x1 * nt + w, x2 * nt + w));
    }
    let mut labels = vec![0u64; ns * nt];
    for x in 0..ns {
        let i = f.get(x);
        for y in 0..nt {
            let base = if in_a[y] { i } else { ns as u64 - i - 1 };
            labels[x * nt + y] = base * nt as u64 + g.get(y);
        }
    }
    finish(ns * nt, &edges, labels)
}

fn finish(
    count: usize,
    edges: &[(usize, usize)],
    labels: Vec<u64>,
) -> Result<(Tree, VertexLabeling)> {
    let tree = Tree::new(count, edges)?;
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(&tree, &lab) {
        return Err(Error::Defect("composed labeling is not graceful".into()));
    }
    Ok((tree, lab))
}

/// S Δ+1 T: copies of T for every S-vertex but `u`, which stays a single vertex.
/// Copy of `x` occupies ids `idx·n_T .. (idx+1)·n_T` with `idx = x` below `u` and `x - 1`
/// above it; `u` gets id `(n_S - 1)·n_T`.
pub fn delta_plus_one(
    s: &Tree,
    f: &VertexLabeling,
    u: usize,
    t: &Tree,
    g: &VertexLabeling,
    v: usize,
    attach: &AttachmentMap,
) -> Result<(Tree, VertexLabeling)> {
    check_graceful(s, f).map_err(|e| Error::ContractViolation(e.to_string()))?;
    check_graceful(t, g).map_err(|e| Error::ContractViolation(e.to_string()))?;
    let (ns, nt) = (s.vertex_count(), t.vertex_count());
    if u >= ns || f.get(u) != ns as u64 - 1 {
        return contract(format!("u must be labeled {} in S", ns - 1));
    }
    if v >= nt || g.get(v) != 0 {
        return contract("v must be labeled 0 in T");
    }
    let via = attach.resolve(s, t)?;
    let idx = |x: usize| if x < u { x } else { x - 1 };
    let u_id = (ns - 1) * nt;
    let mut edges = Vec::with_capacity(u_id);
    for x in (0..ns).filter(|&x| x != u) {
        let o = idx(x) * nt;
        edges.extend(t.edges().iter().map(|&(p, q)| (o + p, o + q)));
    }
    for (&(x1, x2), &w) in s.edges().iter().zip(&via) {
        if x1 == u || x2 == u {
            if w != v {
                return invalid("edges at u must attach to the copy of v");
            }
            let other = if x1 == u { x2 } else { x1 };
            edges.push((u_id, idx(other) * nt + v));
        } else {
            edges.push((idx(x1) * nt + w, idx(x2) * nt + w));
        }
    }
    let in_a = side_a(t, v);
    let mut labels = vec![0u64; u_id + 1];
    for x in (0..ns).filter(|&x| x != u) {
        let i = f.get(x);
        for y in 0..nt {
            let base = if in_a[y] { i } else { ns as u64 - i - 2 };
            labels[idx(x) * nt + y] = base * nt as u64 + g.get(y);
        }
    }
    labels[u_id] = ((ns - 1) * nt) as u64;
    finish(u_id + 1, &edges, labels)
}

/// The tree with every edge replaced by a path of `k + 1` edges, gracefully labeled.
/// Original vertices keep their ids; edge `e = (a, b)` of `tree.edges()` gets the new
/// vertices `n + e·k .. n + (e+1)·k` in order from `a` to `b`.
pub fn subdivide_graceful(
    tree: &Tree,
    f: &VertexLabeling,
    k: usize,
) -> Result<(Tree, VertexLabeling)> {
    check_graceful(tree, f)?;
    if k == 0 {
        return invalid("subdivision length must be at least 1");
    }
    let ns = tree.vertex_count();
    if ns == 1 {
        return Ok((tree.clone(), f.clone()));
    }
    let mut edges = Vec::with_capacity(tree.edge_count() * (k + 1));
    let mut inner: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (e, &(a, b)) in tree.edges().iter().enumerate() {
        let mids: Vec<usize> = (0..k).map(|j| ns + e * k + j).collect();
        let mut prev = a;
        for &m in &mids {
            edges.push((prev, m));
            prev = m;
        }
        edges.push((prev, b));
        let mut rev = mids.clone();
        rev.reverse();
        inner.insert((a, b), mids);
        inner.insert((b, a), rev);
    }
    let out = Tree::new(ns + tree.edge_count() * k, &edges)?;

    let u = f
        .vertex_with(ns as u64 - 1)
        .expect("graceful labeling uses the top label");
    let rooted = tree.bfs(u);
    // The matching step runs on S with one P_1 per non-u vertex (its parent edge) and a leaf at u.
    let top = |c: usize| ns + if c < u { c } else { c - 1 };
    let leaf = 2 * ns - 1;
    let mut aux = Vec::new();
    let mut pairs = vec![(u, leaf)];
    for c in (0..ns).filter(|&c| c != u) {
        aux.push((top(c), c));
        aux.push((rooted.parent[c].expect("non-root has a parent"), top(c)));
        pairs.push((top(c), c));
    }
    aux.push((u, leaf));
    let aux = Tree::new(2 * ns, &aux)?;
    let m = Matching::new(&aux, &pairs)?;
    let orient = orient_matching(&aux, &m)?;
    let v_at_head = orient.is_head(u).expect("u is matched");

    let nt = (k + 1) as u64;
    let g = label_path(k);
    let mut labels = vec![0u64; out.vertex_count()];
    for c in (0..ns).filter(|&c| c != u) {
        let p = rooted.parent[c].unwrap();
        // The copy at c runs from the vertex next to p down to c.
        let mut copy = inner[&(p, c)].clone();
        copy.push(c);
        let v_at_top = orient.is_head(top(c)).unwrap() == v_at_head;
        if !v_at_top {
            copy.reverse();
        }
        let i = f.get(c);
        for (pos, &x) in copy.iter().enumerate() {
            let base = if pos % 2 == 0 { i } else { ns as u64 - i - 2 };
            labels[x] = base * nt + g.get(pos);
        }
    }
    labels[u] = (ns as u64 - 1) * nt;
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(&out, &lab) {
        return Err(Error::Defect("subdivided labeling is not graceful".into()));
    }
    Ok((out, lab))
}

/// A contracted tree together with the original vertices behind each contree vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contree {
    pub tree: Tree,
    /// Original vertices of each contree vertex (a matched pair or the lone unmatched vertex).
    pub groups: Vec<Vec<usize>>,
    /// Contree vertex of each original vertex.
    pub of_vertex: Vec<usize>,
}

impl Contree {
    /// The contree vertex of the unmatched vertex, if any.
    pub fn singleton(&self) -> Option<usize> {
        self.groups.iter().position(|g| g.len() == 1)
    }
}

/// Contracts the edges of a perfect or almost-perfect matching.
pub fn contree(tree: &Tree, m: &Matching) -> Result<Contree> {
    if !m.is_almost_perfect(tree) {
        return invalid("contree needs a perfect or almost-perfect matching");
    }
    let n = tree.vertex_count();
    let mut of_vertex = vec![usize::MAX; n];
    let mut groups = Vec::new();
    for v in 0..n {
        if of_vertex[v] != usize::MAX {
            continue;
        }
        let mut group = vec![v];
        if let Some(p) = m.partner(v) {
            group.push(p);
        }
        for &x in &group {
            of_vertex[x] = groups.len();
        }
        groups.push(group);
    }
    let edges: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .filter(|&&(a, b)| !m.contains(a, b))
        .map(|&(a, b)| (of_vertex[a], of_vertex[b]))
        .collect();
    Ok(Contree {
        tree: Tree::new(groups.len(), &edges)?,
        groups,
        of_vertex,
    })
}

/// Which contree theorem to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContreeMode {
    Perfect,
    AlmostPerfect,
}

/// Lifts a graceful labeling of the contree (vertex order as in [`contree`]) to the tree.
/// In almost-perfect mode the singleton must be labeled 0.
pub fn label_via_contree(
    tree: &Tree,
    m: &Matching,
    contree_labeling: &VertexLabeling,
    mode: ContreeMode,
) -> Result<VertexLabeling> {
    let ok = match mode {
        ContreeMode::Perfect => m.is_perfect(tree),
        ContreeMode::AlmostPerfect => m.unmatched(tree).len() == 1,
    };
    if !ok {
        return contract(format!("matching is not {mode:?}"));
    }
    let ct = contree(tree, m)?;
    let s = &ct.tree;
    if !is_graceful(s, contree_labeling) {
        return contract("contree labeling is not graceful");
    }
    // Original edge behind each contree edge.
    let mut behind = BTreeMap::new();
    for &(a, b) in tree.edges() {
        if !m.contains(a, b) {
            let (p, q) = (ct.of_vertex[a], ct.of_vertex[b]);
            behind.insert((p, q), a);
            behind.insert((q, p), b);
        }
    }
    let p1 = Tree::path(1);
    let g = label_path(1);
    let mut labels = vec![0u64; tree.vertex_count()];
    match mode {
        ContreeMode::Perfect => {
            let orient = orient_matching(tree, m)?;
            // T-vertex 0 is the head of each pair.
            let pos = |x: usize| if orient.is_head(x).unwrap() { 0 } else { 1 };
            let via: Vec<usize> = s
                .edges()
                .iter()
                .map(|&(p, q)| pos(behind[&(p, q)]))
                .collect();
            let (_, lab) = delta_construction_with_part(
                s,
                contree_labeling,
                &p1,
                &g,
                &AttachmentMap::per_edge(&via),
                0,
            )?;
            for (c, group) in ct.groups.iter().enumerate() {
                for &x in group {
                    labels[x] = lab.get(c * 2 + pos(x));
                }
            }
        }
        ContreeMode::AlmostPerfect => {
            let su = ct.singleton().expect("one unmatched vertex");
            if contree_labeling.get(su) != 0 {
                return contract("the singleton contree vertex must be labeled 0");
            }
            let f = complement_labeling(contree_labeling, s.edge_count() as u64)?;
            let u = ct.groups[su][0];
            let n = tree.vertex_count();
            let mut aug: Vec<(usize, usize)> = tree.edges().to_vec();
            aug.push((u, n));
            let aug = Tree::new(n + 1, &aug)?;
            let mut pairs = m.edges().to_vec();
            pairs.push((u, n));
            let am = Matching::new(&aug, &pairs)?;
            let orient = orient_matching(&aug, &am)?;
            let v_at_head = orient.is_head(u).unwrap();
            let pos = |x: usize| {
                if orient.is_head(x).unwrap() == v_at_head {
                    0
                } else {
                    1
                }
            };
            let via: Vec<usize> = s
                .edges()
                .iter()
                .map(|&(p, q)| {
                    if p == su || q == su {
                        0
                    } else {
                        pos(behind[&(p, q)])
                    }
                })
                .collect();
            let (_, lab) = delta_plus_one(s, &f, su, &p1, &g, 0, &AttachmentMap::per_edge(&via))?;
            let idx = |c: usize| if c < su { c } else { c - 1 };
            for (c, group) in ct.groups.iter().enumerate() {
                if c == su {
                    labels[u] = lab.get((s.vertex_count() - 1) * 2);
                } else {
                    for &x in group {
                        labels[x] = lab.get(idx(c) * 2 + pos(x));
                    }
                }
            }
        }
    }
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(tree, &lab) {
        return Err(Error::Defect(
            "lifted contree labeling is not graceful".into(),
        ));
    }
    Ok(lab)
}

/// What the second tree's labeling must be when joining at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinMode {
    Alpha,
    Graceful,
}

/// The α-index of an α-labeling with 0 at `v`: the largest label on `v`'s side.
fn alpha_index_at(tree: &Tree, f: &VertexLabeling, v: usize) -> Option<u64> {
    let bp = Bipartition::of(tree);
    let k = bp.side_of(v).iter().map(|&x| f.get(x)).max().unwrap();
    alpha_holds(tree, f, k).then_some(k)
}

/// Identifies `v1` with `v2`. The merged tree keeps T1's ids and appends T2's other
/// vertices in order.
pub fn join_at_zero(
    t1: &Tree,
    f1: &VertexLabeling,
    v1: usize,
    t2: &Tree,
    f2: &VertexLabeling,
    v2: usize,
    mode: JoinMode,
) -> Result<(Tree, VertexLabeling)> {
    let as_contract = |e: Error| Error::ContractViolation(e.to_string());
    check_graceful(t1, f1).map_err(as_contract)?;
    check_graceful(t2, f2).map_err(as_contract)?;
    if v1 >= t1.vertex_count() || f1.get(v1) != 0 {
        return contract("v1 must be labeled 0");
    }
    if v2 >= t2.vertex_count() || f2.get(v2) != 0 {
        return contract("v2 must be labeled 0");
    }
    let k1 = alpha_index_at(t1, f1, v1)
        .ok_or_else(|| Error::ContractViolation("f1 is not an α-labeling".into()))?;
    if mode == JoinMode::Alpha && alpha_index_at(t2, f2, v2).is_none() {
        return contract("f2 is not an α-labeling");
    }
    let n1 = t1.vertex_count();
    let n2 = t2.edge_count() as u64;
    let inv = inverse_alpha(t1, f1, k1)?;
    let id2 = |y: usize| {
        if y == v2 {
            v1
        } else if y < v2 {
            n1 + y
        } else {
            n1 + y - 1
        }
    };
    let mut edges = t1.edges().to_vec();
    edges.extend(t2.edges().iter().map(|&(a, b)| (id2(a), id2(b))));
    let mut labels = vec![0u64; n1 + t2.vertex_count() - 1];
    for (x, slot) in labels.iter_mut().enumerate().take(n1) {
        let l = inv.get(x);
        *slot = if l <= k1 { l } else { l + n2 };
    }
    for y in (0..t2.vertex_count()).filter(|&y| y != v2) {
        labels[id2(y)] = k1 + f2.get(y);
    }
    finish(labels.len(), &edges, labels)
}

/// Joins a caterpillar `h` at `v` (maximum eccentricity or next to such a vertex) to a
/// graceful tree at its 0-labeled vertex `u`.
pub fn attach_caterpillar(
    t: &Tree,
    f: &VertexLabeling,
    u: usize,
    h: &Tree,
    v: usize,
) -> Result<(Tree, VertexLabeling)> {
    let alpha = label_caterpillar(h, v)?;
    join_at_zero(h, &alpha, v, t, f, u, JoinMode::Graceful)
}

/// Graceful labeling of a symmetrical tree with the root labeled 0.
pub fn label_symmetrical(tree: &Tree, root: usize) -> Result<VertexLabeling> {
    if root >= tree.vertex_count() {
        return invalid(format!("vertex {root} is not in the tree"));
    }
    if !is_symmetrical(tree, root) {
        return invalid("tree is not symmetrical");
    }
    let r = tree.bfs(root);
    let mut counts = Vec::new();
    let mut v = root;
    while !r.children[v].is_empty() {
        counts.push(r.children[v].len());
        v = r.children[v][0];
    }
    let mut cur = Tree::single();
    let mut lab = VertexLabeling::new(vec![0])?;
    let mut cur_root = 0;
    for &c in counts.iter().rev() {
        let star = Tree::star(c);
        let f = complement_labeling(&label_star(c), c as u64)?;
        let (t, l) = delta_plus_one(
            &star,
            &f,
            0,
            &cur,
            &lab,
            cur_root,
            &AttachmentMap::fixed(&star, cur_root),
        )?;
        cur_root = c * cur.vertex_count();
        lab = complement_labeling(&l, t.edge_count() as u64)?;
        cur = t;
    }
    let map = rooted_isomorphism(&cur, cur_root, tree, root)
        .ok_or_else(|| Error::Defect("built tree differs from the input".into()))?;
    let mut out = vec![0u64; tree.vertex_count()];
    for (x, &y) in map.iter().enumerate() {
        out[y] = lab.get(x);
    }
    VertexLabeling::new(out)
}

/// The `2n + 1` turned copies of the tree in K_{2n+1}, vertices as residues, each edge
/// written `(smaller, larger)`.
pub fn cyclic_decomposition(
    tree: &Tree,
    labeling: &VertexLabeling,
) -> Result<Vec<Vec<(usize, usize)>>> {
    check_graceful(tree, labeling)?;
    let modulus = 2 * tree.edge_count() + 1;
    Ok((0..modulus)
        .map(|i| {
            tree.edges()
                .iter()
                .map(|&(a, b)| {
                    let x = (labeling.get(a) as usize + i) % modulus;
                    let y = (labeling.get(b) as usize + i) % modulus;
                    (x.min(y), x.max(y))
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{classify_labeling, isomorphic};

    fn lab(v: &[u64]) -> VertexLabeling {
        VertexLabeling::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delta_of_two_edges() {
        let e = Tree::path(1);
        let g = label_path(1);
        let (t, l) = delta_construction(&e, &g, &e, &g, &AttachmentMap::fixed(&e, 0)).unwrap();
        assert!(isomorphic(&t, &Tree::path(3)));
        // g_0 on copy 0: A = {0}: 0, B: (2-0-1)·2 + 1 = 3; copy 1: 2, 1.
        assert_eq!(l.labels(), &[0, 3, 2, 1]);
    }

    #[test]
    fn delta_edge_labels_on_s_edges() {
        let s = Tree::path(2);
        let f = lab(&[0, 2, 1]);
        let t = Tree::star(2);
        let (out, l) =
            delta_construction(&s, &f, &t, &label_star(2), &AttachmentMap::fixed(&s, 0)).unwrap();
        assert_eq!(out.vertex_count(), 9);
        let mut s_labels: Vec<u64> = s
            .edges()
            .iter()
            .map(|&(a, b)| l.get(a * 3).abs_diff(l.get(b * 3)))
            .collect();
        s_labels.sort();
        assert_eq!(s_labels, vec![3, 6]);
    }

    #[test]
    fn delta_trivial_copies() {
        let s = Tree::star(2);
        let f = label_star(2);
        let (t, l) = delta_construction(
            &s,
            &f,
            &Tree::single(),
            &lab(&[0]),
            &AttachmentMap::fixed(&s, 0),
        )
        .unwrap();
        assert_eq!(t, Tree::new(3, s.edges()).unwrap());
        assert_eq!(l, f);
    }

    #[test]
    fn delta_rotatable_vertex_is_zero() {
        let s = Tree::path(3);
        let f = label_path(3);
        let t = Tree::path(2);
        let g = lab(&[1, 2, 0]);
        let (_, l) =
            delta_construction_with_part(&s, &f, &t, &g, &AttachmentMap::fixed(&s, 1), 2).unwrap();
        let xs = f.vertex_with(0).unwrap();
        assert_eq!(l.get(xs * 3 + 2), 0);
    }

    #[test]
    fn delta_plus_one_star_and_edge() {
        let s = Tree::star(3);
        let f = complement_labeling(&label_star(3), 3).unwrap();
        let t = Tree::path(1);
        let (out, l) = delta_plus_one(
            &s,
            &f,
            0,
            &t,
            &label_path(1),
            0,
            &AttachmentMap::fixed(&s, 0),
        )
        .unwrap();
        assert_eq!(out.vertex_count(), 7);
        assert_eq!(l.get(6), 6);
        assert!(is_graceful(&out, &l));
        let (same, l1) = delta_plus_one(
            &s,
            &f,
            0,
            &Tree::single(),
            &lab(&[0]),
            0,
            &AttachmentMap::fixed(&s, 0),
        )
        .unwrap();
        assert!(isomorphic(&same, &s));
        assert!(is_graceful(&same, &l1));
        let bad = delta_plus_one(
            &s,
            &label_star(3),
            0,
            &t,
            &label_path(1),
            0,
            &AttachmentMap::fixed(&s, 0),
        );
        assert!(matches!(bad, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn orientation_of_p3() {
        let t = Tree::path(3);
        let m = Matching::new(&t, &[(0, 1), (2, 3)]).unwrap();
        let o = orient_matching(&t, &m).unwrap();
        assert_eq!(o.is_head(1), o.is_head(2));
        assert!(o.satisfies(&t, &m));
        let spider = Tree::spider(&[1, 1, 1]);
        let mm = maximum_matching(&spider);
        assert!(matches!(
            orient_matching(&spider, &mm),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn subdivisions() {
        let (t, l) = subdivide_graceful(&Tree::path(1), &label_path(1), 1).unwrap();
        assert!(isomorphic(&t, &Tree::path(2)) && is_graceful(&t, &l));
        let (t, l) = subdivide_graceful(&Tree::path(2), &lab(&[0, 2, 1]), 1).unwrap();
        assert!(isomorphic(&t, &Tree::path(4)) && is_graceful(&t, &l));
        let (t, l) = subdivide_graceful(&Tree::star(3), &label_star(3), 2).unwrap();
        assert!(isomorphic(&t, &Tree::spider(&[3, 3, 3])) && is_graceful(&t, &l));
    }

    #[test]
    fn contrees() {
        let e = Tree::path(1);
        let m = Matching::new(&e, &[(0, 1)]).unwrap();
        assert_eq!(contree(&e, &m).unwrap().tree.vertex_count(), 1);
        assert_eq!(
            label_via_contree(&e, &m, &lab(&[0]), ContreeMode::Perfect)
                .unwrap()
                .labels(),
            &[0, 1]
        );
        let p3 = Tree::path(3);
        let m = Matching::new(&p3, &[(0, 1), (2, 3)]).unwrap();
        assert!(isomorphic(&contree(&p3, &m).unwrap().tree, &Tree::path(1)));
        let p2 = Tree::path(2);
        let m = Matching::new(&p2, &[(0, 1)]).unwrap();
        let c = contree(&p2, &m).unwrap();
        assert_eq!(c.groups, vec![vec![0, 1], vec![2]]);
        assert_eq!(c.singleton(), Some(1));
    }

    #[test]
    fn almost_perfect_lift() {
        // 0-1-2-3 with a pendant 4 at 2; the unmatched vertex is 4, the contree is P_2.
        let t = Tree::new(5, &[(0, 1), (1, 2), (2, 3), (2, 4)]).unwrap();
        let m = Matching::new(&t, &[(0, 1), (2, 3)]).unwrap();
        let c = contree(&t, &m).unwrap();
        let su = c.singleton().unwrap();
        assert!(isomorphic(&c.tree, &Tree::path(2)));
        let cl = crate::oracle::brute_force_graceful(&c.tree, Some((su, 0)))
            .unwrap()
            .unwrap();
        let l = label_via_contree(&t, &m, &cl, ContreeMode::AlmostPerfect).unwrap();
        assert!(is_graceful(&t, &l));
    }

    #[test]
    fn joins() {
        let e = Tree::path(1);
        let g = label_path(1);
        let (t, l) = join_at_zero(&e, &g, 0, &e, &g, 0, JoinMode::Alpha).unwrap();
        assert!(isomorphic(&t, &Tree::path(2)));
        assert!(classify_labeling(&t, &l).unwrap().alpha_index.is_some());
        let p3 = Tree::path(3);
        let s3 = Tree::star(3);
        let sl = complement_labeling(&label_star(3), 3).unwrap();
        let leaf = sl.vertex_with(0).unwrap();
        let (t, l) =
            join_at_zero(&p3, &label_path(3), 0, &s3, &sl, leaf, JoinMode::Graceful).unwrap();
        assert_eq!(t.edge_count(), 6);
        assert!(is_graceful(&t, &l));
    }

    #[test]
    fn symmetrical_trees() {
        let bin = Tree::from_children(&[
            vec![1, 2],
            vec![3, 4],
            vec![5, 6],
            vec![],
            vec![],
            vec![],
            vec![],
        ])
        .unwrap();
        let l = label_symmetrical(&bin, 0).unwrap();
        assert!(is_graceful(&bin, &l) && l.get(0) == 0);
        let s = Tree::star(4);
        assert_eq!(label_symmetrical(&s, 0).unwrap().get(0), 0);
        let sp = Tree::spider(&[2, 2, 2]);
        let l = label_symmetrical(&sp, 0).unwrap();
        assert!(is_graceful(&sp, &l) && l.get(0) == 0);
        assert!(label_symmetrical(&Tree::spider(&[1, 2]), 0).is_err());
    }

    #[test]
    fn decompositions() {
        for (t, l) in [
            (Tree::path(1), label_path(1)),
            (Tree::path(2), label_path(2)),
            (Tree::star(3), label_star(3)),
        ] {
            let copies = cyclic_decomposition(&t, &l).unwrap();
            let n = 2 * t.edge_count() + 1;
            assert_eq!(copies.len(), n);
            let all: BTreeSet<_> = copies.iter().flatten().copied().collect();
            assert_eq!(all.len(), n * (n - 1) / 2);
        }
    }
}
