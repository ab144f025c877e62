//! Exhaustive search for graceful and α-labelings, labeling counts, 0-rotatability and
//! free-tree enumeration.
//!
//! The search assigns edge labels from the largest down: at each step the current label
//! must be realized by some edge, either already fully labeled or completed now.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::classic::SimpleGraph;
use crate::error::{Error, Result};
use crate::graph::{Bipartition, Tree, VertexLabeling};

/// Default vertex cap; `GLAB_MAX_VERTICES` overrides it.
pub const DEFAULT_MAX_VERTICES: usize = 16;

/// Search limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_vertices: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let max_vertices = std::env::var("GLAB_MAX_VERTICES")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_VERTICES);
        OracleConfig { max_vertices }
    }
}

impl OracleConfig {
    fn admit(&self, vertices: usize) -> Result<()> {
        if vertices > self.max_vertices {
            return Err(Error::Refused(format!(
                "{vertices} vertices exceeds the search cap of {}",
                self.max_vertices
            )));
        }
        Ok(())
    }
}

/// Counters from one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub solutions: u64,
    #[serde(with = "duration_micros")]
    pub wall_time: Duration,
}

mod duration_micros {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_micros(u64::deserialize(d)?))
    }
}

/// What the search is asked for.
#[derive(Debug, Clone, Default)]
pub struct Query {
    /// Pins `(vertex, label)`.
    pub pin: Option<(usize, u64)>,
    /// Restrict to α-labelings (trees only).
    pub alpha: bool,
    /// Count every labeling instead of stopping at the first.
    pub count: bool,
}

struct Search {
    m: u64,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    label: Vec<Option<u64>>,
    used: Vec<bool>,
    used_edge: Vec<bool>,
    /// Per vertex: the allowed label range for α searches.
    range: Vec<(u64, u64)>,
    count: bool,
    break_complement: bool,
    stats: SearchStats,
    found: Option<Vec<u64>>,
    keep_all: bool,
    all: Vec<Vec<u64>>,
}

impl Search {
    fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Search {
        let m = edges.len() as u64;
        let mut adj = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        Search {
            m,
            adj,
            edges: edges.to_vec(),
            label: vec![None; vertex_count],
            used: vec![false; m as usize + 1],
            used_edge: vec![false; m as usize + 1],
            range: vec![(0, m); vertex_count],
            count: false,
            break_complement: false,
            stats: SearchStats::default(),
            found: None,
            keep_all: false,
            all: Vec::new(),
        }
    }

    /// Labels `v` with `x`, returning the edge labels it created, or `None` on conflict.
    fn assign(&mut self, v: usize, x: u64) -> Option<Vec<u64>> {
        let (lo, hi) = self.range[v];
        if x < lo || x > hi || self.used[x as usize] {
            return None;
        }
        let mut made = Vec::new();
        for i in 0..self.adj[v].len() {
            let w = self.adj[v][i];
            if let Some(y) = self.label[w] {
                let d = x.abs_diff(y);
                if d == 0 || self.used_edge[d as usize] {
                    for &e in &made {
                        self.used_edge[e as usize] = false;
                    }
                    return None;
                }
                self.used_edge[d as usize] = true;
                made.push(d);
            }
        }
        self.label[v] = Some(x);
        self.used[x as usize] = true;
        Some(made)
    }

    fn unassign(&mut self, v: usize, made: Vec<u64>) {
        let x = self.label[v].take().expect("assigned");
        self.used[x as usize] = false;
        for e in made {
            self.used_edge[e as usize] = false;
        }
    }

    fn done(&self) -> bool {
        !self.count && self.found.is_some()
    }

    fn finish(&mut self) {
        // Isolated vertices take any unused labels.
        let mut labels: Vec<Option<u64>> = self.label.clone();
        let mut free = (0..=self.m).filter(|&x| !self.used[x as usize]);
        for l in labels.iter_mut() {
            if l.is_none() {
                match free.next() {
                    Some(x) => *l = Some(x),
                    None => return,
                }
            }
        }
        self.stats.solutions += 1;
        let labels: Vec<u64> = labels.into_iter().map(|l| l.unwrap()).collect();
        if self.keep_all {
            self.all.push(labels.clone());
        }
        if self.found.is_none() {
            self.found = Some(labels);
        }
    }

    fn rec(&mut self, l: u64) {
        self.stats.nodes += 1;
        if l == 0 {
            self.finish();
            return;
        }
        if self.used_edge[l as usize] {
            self.rec(l - 1);
            return;
        }
        // Extend from a labeled endpoint first.
        for i in 0..self.edges.len() {
            let (u, v) = self.edges[i];
            let (a, b) = match (self.label[u], self.label[v]) {
                (Some(x), None) => (x, v),
                (None, Some(y)) => (y, u),
                _ => continue,
            };
            for y in [a.checked_add(l), a.checked_sub(l)].into_iter().flatten() {
                if y > self.m {
                    continue;
                }
                if let Some(made) = self.assign(b, y) {
                    if self.used_edge[l as usize] {
                        self.rec(l - 1);
                    }
                    self.unassign(b, made);
                    if self.done() {
                        return;
                    }
                }
            }
        }
        for i in 0..self.edges.len() {
            let (u, v) = self.edges[i];
            if self.label[u].is_some() || self.label[v].is_some() {
                continue;
            }
            for a in 0..=self.m - l {
                if self.used[a as usize] || self.used[(a + l) as usize] {
                    continue;
                }
                let orientations: &[(u64, u64)] = if self.break_complement && l == self.m {
                    &[(a, a + l)]
                } else {
                    &[(a, a + l), (a + l, a)]
                };
                for &(x, y) in orientations {
                    if let Some(m1) = self.assign(u, x) {
                        if let Some(m2) = self.assign(v, y) {
                            self.rec(l - 1);
                            self.unassign(v, m2);
                        }
                        self.unassign(u, m1);
                    }
                    if self.done() {
                        return;
                    }
                }
            }
        }
    }

    fn run(mut self, pin: Option<(usize, u64)>) -> (Option<Vec<u64>>, SearchStats) {
        let start = Instant::now();
        let ok = match pin {
            Some((v, x)) => v < self.label.len() && x <= self.m && self.assign(v, x).is_some(),
            None => true,
        };
        if ok {
            if self.m == 0 {
                self.finish();
            } else {
                self.rec(self.m);
            }
        }
        self.stats.wall_time = start.elapsed();
        (self.found, self.stats)
    }
}

fn search_tree(
    tree: &Tree,
    query: &Query,
    cfg: &OracleConfig,
) -> Result<(Option<VertexLabeling>, SearchStats)> {
    cfg.admit(tree.vertex_count())?;
    if let Some((v, _)) = query.pin {
        if v >= tree.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "pinned vertex {v} is not in the tree"
            )));
        }
    }
    let sides: Vec<Option<Vec<usize>>> = if query.alpha {
        let bp = Bipartition::of(tree);
        if tree.edge_count() == 0 {
            vec![None]
        } else {
            vec![Some(bp.part_a), Some(bp.part_b)]
        }
    } else {
        vec![None]
    };
    let mut total = SearchStats::default();
    let mut first = None;
    for low in sides {
        let mut s = Search::new(tree.vertex_count(), tree.edges());
        s.count = query.count;
        s.break_complement = !query.count && query.pin.is_none() && low.is_none();
        if let Some(low) = &low {
            let k = low.len() as u64 - 1;
            for v in 0..tree.vertex_count() {
                s.range[v] = if low.contains(&v) {
                    (0, k)
                } else {
                    (k + 1, s.m)
                };
            }
        }
        let (found, stats) = s.run(query.pin);
        total.nodes += stats.nodes;
        total.solutions += stats.solutions;
        total.wall_time += stats.wall_time;
        if first.is_none() {
            first = found;
        }
        if first.is_some() && !query.count {
            break;
        }
    }
    let lab = first.map(|l| VertexLabeling::new(l).expect("search labels are injective"));
    Ok((lab, total))
}

/// A graceful labeling honoring the optional pin, or `None` if none exists.
pub fn brute_force_graceful(
    tree: &Tree,
    pin: Option<(usize, u64)>,
) -> Result<Option<VertexLabeling>> {
    brute_force_graceful_with(tree, pin, &OracleConfig::default())
}

pub fn brute_force_graceful_with(
    tree: &Tree,
    pin: Option<(usize, u64)>,
    cfg: &OracleConfig,
) -> Result<Option<VertexLabeling>> {
    Ok(search_tree(
        tree,
        &Query {
            pin,
            ..Query::default()
        },
        cfg,
    )?
    .0)
}

/// An α-labeling honoring the optional pin, or `None` if none exists.
pub fn brute_force_alpha(tree: &Tree, pin: Option<(usize, u64)>) -> Result<Option<VertexLabeling>> {
    brute_force_alpha_with(tree, pin, &OracleConfig::default())
}

pub fn brute_force_alpha_with(
    tree: &Tree,
    pin: Option<(usize, u64)>,
    cfg: &OracleConfig,
) -> Result<Option<VertexLabeling>> {
    Ok(search_tree(
        tree,
        &Query {
            pin,
            alpha: true,
            count: false,
        },
        cfg,
    )?
    .0)
}

/// Runs an arbitrary query, returning the first labeling found and the search counters.
pub fn search(
    tree: &Tree,
    query: &Query,
    cfg: &OracleConfig,
) -> Result<(Option<VertexLabeling>, SearchStats)> {
    search_tree(tree, query, cfg)
}

/// The number of labeled graceful (or α) labelings; complements are counted separately.
pub fn count_labelings(tree: &Tree, alpha: bool, pin: Option<(usize, u64)>) -> Result<u64> {
    let q = Query {
        pin,
        alpha,
        count: true,
    };
    Ok(search_tree(tree, &q, &OracleConfig::default())?.1.solutions)
}

/// Every α-labeling of a tree (for small trees).
pub fn all_alpha_labelings(tree: &Tree) -> Result<Vec<VertexLabeling>> {
    OracleConfig::default().admit(tree.vertex_count())?;
    let bp = Bipartition::of(tree);
    let n = tree.edge_count() as u64;
    let mut out = Vec::new();
    if n == 0 {
        return Ok(vec![VertexLabeling::new(vec![0])?]);
    }
    for low in [bp.part_a, bp.part_b] {
        let k = low.len() as u64 - 1;
        let mut s = Search::new(tree.vertex_count(), tree.edges());
        s.count = true;
        for v in 0..tree.vertex_count() {
            s.range[v] = if low.contains(&v) { (0, k) } else { (k + 1, n) };
        }
        s.keep_all = true;
        s.rec(n);
        out.extend(
            s.all
                .into_iter()
                .map(|l| VertexLabeling::new(l).expect("search labels are injective")),
        );
    }
    Ok(out)
}

/// A graceful labeling of a general simple graph, or `None`.
pub fn brute_force_graceful_graph(graph: &SimpleGraph) -> Result<Option<Vec<u64>>> {
    OracleConfig::default().admit(graph.vertex_count())?;
    if graph.vertex_count() as u64 > graph.edge_count() as u64 + 1 {
        return Ok(None);
    }
    let mut s = Search::new(graph.vertex_count(), graph.edges());
    s.break_complement = true;
    Ok(s.run(None).0)
}

/// Whether every vertex can be labeled 0 in some graceful labeling.
pub fn is_zero_rotatable(tree: &Tree) -> Result<bool> {
    for v in 0..tree.vertex_count() {
        if brute_force_graceful(tree, Some((v, 0)))?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One representative of every free tree on `n` vertices, each relabeled in BFS order from
/// its center.
pub fn enumerate_free_trees(n: usize) -> impl Iterator<Item = Tree> {
    let mut layer: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    if n >= 1 {
        layer.insert(String::new(), vec![Vec::new()]);
    }
    for size in 2..=n {
        let mut next: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
        for adj in layer.values() {
            for v in 0..adj.len() {
                let mut grown = adj.clone();
                grown.push(vec![v]);
                grown[v].push(size - 1);
                let key = free_canon(&grown);
                next.entry(key).or_insert(grown);
            }
        }
        layer = next;
    }
    layer
        .into_values()
        .map(|adj| {
            let mut edges = Vec::new();
            for (u, ns) in adj.iter().enumerate() {
                for &v in ns {
                    if u < v {
                        edges.push((u, v));
                    }
                }
            }
            let t = Tree::new(adj.len(), &edges).expect("grown trees are trees");
            bfs_from_center(&t)
        })
        .collect::<Vec<_>>()
        .into_iter()
}

/// Known counts of free trees on 1..=16 vertices.
pub const FREE_TREE_COUNTS: [usize; 16] = [
    1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551, 1301, 3159, 7741, 19320,
];

/// Canonical string of a free tree given by adjacency lists.
pub fn free_canon(adj: &[Vec<usize>]) -> String {
    let centers = centers_of(adj);
    centers
        .iter()
        .map(|&c| rooted_string(adj, c, usize::MAX))
        .min()
        .unwrap()
}

fn centers_of(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut alive = n;
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut removed = vec![false; n];
    while alive > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            alive -= 1;
            for &u in &adj[v] {
                if !removed[u] {
                    deg[u] -= 1;
                    if deg[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        layer = next;
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

fn rooted_string(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut parts: Vec<String> = adj[v]
        .iter()
        .filter(|&&u| u != parent)
        .map(|&u| rooted_string(adj, u, v))
        .collect();
    parts.sort();
    format!("({})", parts.concat())
}

fn bfs_from_center(t: &Tree) -> Tree {
    let adj: Vec<Vec<usize>> = (0..t.vertex_count())
        .map(|v| t.neighbors(v).to_vec())
        .collect();
    let c = centers_of(&adj)[0];
    let order = t.bfs(c).order;
    let mut perm = vec![0; t.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        perm[v] = i;
    }
    t.relabel_vertices(&perm).without_root()
}

/// Canonical form of a free tree.
pub fn tree_canon(t: &Tree) -> String {
    let adj: Vec<Vec<usize>> = (0..t.vertex_count())
        .map(|v| t.neighbors(v).to_vec())
        .collect();
    free_canon(&adj)
}

/// The labels each vertex takes over all α-labelings in which its part is the low part.
pub fn alpha_depth_sets(tree: &Tree) -> Result<Vec<BTreeSet<usize>>> {
    let mut out = vec![BTreeSet::new(); tree.vertex_count()];
    let bp = Bipartition::of(tree);
    for f in all_alpha_labelings(tree)? {
        let zero = f.vertex_with(0).expect("graceful labelings use 0");
        let low = bp.side_of(zero);
        for &v in low {
            out[v].insert(f.get(v) as usize);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{classify_labeling, is_graceful, path_depth_set};

    #[test]
    fn free_tree_counts() {
        for n in 1..=11 {
            assert_eq!(
                enumerate_free_trees(n).count(),
                FREE_TREE_COUNTS[n - 1],
                "n={n}"
            );
        }
    }

    #[test]
    fn single_edge() {
        let f = brute_force_graceful(&Tree::path(1), None).unwrap().unwrap();
        assert!(is_graceful(&Tree::path(1), &f));
    }

    #[test]
    fn p4_center_pins() {
        let t = Tree::path(4);
        assert!(brute_force_alpha(&t, Some((2, 0))).unwrap().is_none());
        // A graceful labeling with the center labeled 0 exists: 1,4,0,2,3.
        assert!(brute_force_graceful(&t, Some((2, 0))).unwrap().is_some());
    }

    #[test]
    fn spider_222_has_no_alpha() {
        let t = Tree::spider(&[2, 2, 2]);
        assert!(brute_force_alpha(&t, None).unwrap().is_none());
        assert!(brute_force_graceful(&t, None).unwrap().is_some());
    }

    #[test]
    fn zero_rotatable_examples() {
        assert!(is_zero_rotatable(&Tree::path(1)).unwrap());
        for n in 1..=11 {
            assert!(is_zero_rotatable(&Tree::path(n)).unwrap());
        }
        // K_{1,3} with one edge replaced by a path of length 3.
        let t = Tree::spider(&[1, 1, 3]);
        assert!(!is_zero_rotatable(&t).unwrap());
    }

    #[test]
    fn cap_refuses() {
        let cfg = OracleConfig { max_vertices: 4 };
        assert!(matches!(
            brute_force_graceful_with(&Tree::path(5), None, &cfg),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn counts_are_isomorphism_invariant() {
        for t in enumerate_free_trees(7) {
            let base = count_labelings(&t, false, None).unwrap();
            let perm: Vec<usize> = (0..7).rev().collect();
            assert_eq!(
                count_labelings(&t.relabel_vertices(&perm), false, None).unwrap(),
                base
            );
            assert_eq!(base % 2, 0);
        }
    }

    #[test]
    fn count_star() {
        // K_{1,3}: center 0 or 3, leaves any order: 2 * 3!.
        assert_eq!(count_labelings(&Tree::star(3), false, None).unwrap(), 12);
    }

    #[test]
    fn small_graphs() {
        for n in 3..=10 {
            let g = SimpleGraph::cycle(n).unwrap();
            let f = brute_force_graceful_graph(&g).unwrap();
            assert_eq!(f.is_some(), matches!(n % 4, 0 | 3), "C_{n}");
            if let Some(f) = f {
                assert!(g.is_graceful(&f));
            }
        }
        assert!(
            brute_force_graceful_graph(&SimpleGraph::complete(4).unwrap())
                .unwrap()
                .is_some()
        );
        assert!(
            brute_force_graceful_graph(&SimpleGraph::complete(5).unwrap())
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn depth_sets_match_path_exceptions() {
        for n in 1..=10 {
            let d = alpha_depth_sets(&Tree::path(n)).unwrap();
            for (v, set) in d.iter().enumerate() {
                assert_eq!(*set, path_depth_set(n, v).unwrap(), "P_{n} position {v}");
            }
        }
    }

    #[test]
    fn results_classify() {
        for t in enumerate_free_trees(8) {
            let f = brute_force_graceful(&t, None).unwrap().unwrap();
            assert!(classify_labeling(&t, &f).unwrap().is_graceful);
            if let Some(a) = brute_force_alpha(&t, None).unwrap() {
                assert!(classify_labeling(&t, &a).unwrap().alpha_index.is_some());
            }
        }
    }
}
