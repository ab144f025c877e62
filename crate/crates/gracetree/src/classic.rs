//! Explicit labelings of paths, caterpillars, stars, cycles, complete and complete
//! bipartite graphs, with the diameter-4 predicate and the even-degree obstruction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{is_m_distant, Tree, VertexLabeling};

/// A simple graph on vertex ids `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<SimpleGraph> {
        if vertex_count == 0 {
            return invalid("a graph needs at least one vertex");
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count || u == v {
                return invalid(format!("bad edge {u}-{v}"));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return invalid(format!("duplicate edge {u}-{v}"));
            }
        }
        Ok(SimpleGraph {
            vertex_count,
            edges: edges.to_vec(),
        })
    }

    /// The cycle `0-1-...-(n-1)-0`.
    pub fn cycle(n: usize) -> Result<SimpleGraph> {
        if n < 3 {
            return invalid("a cycle needs at least 3 vertices");
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        SimpleGraph::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<SimpleGraph> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        SimpleGraph::new(n, &edges)
    }

    /// `K_{m,n}` with parts `0..m` and `m..m+n`.
    pub fn complete_bipartite(m: usize, n: usize) -> Result<SimpleGraph> {
        let mut edges = Vec::new();
        for u in 0..m {
            for v in m..m + n {
                edges.push((u, v));
            }
        }
        SimpleGraph::new(m + n, &edges)
    }

    pub fn from_tree(tree: &Tree) -> SimpleGraph {
        SimpleGraph {
            vertex_count: tree.vertex_count(),
            edges: tree.edges().to_vec(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Whether `labels` is a graceful labeling of this graph.
    pub fn is_graceful(&self, labels: &[u64]) -> bool {
        let n = self.edges.len() as u64;
        if labels.len() != self.vertex_count || labels.iter().any(|&l| l > n) {
            return false;
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            return false;
        }
        let mut e: Vec<u64> = self
            .edges
            .iter()
            .map(|&(u, v)| labels[u].abs_diff(labels[v]))
            .collect();
        e.sort_unstable();
        e.into_iter().eq(1..=n)
    }

    /// The least α index of a graceful labeling, if any.
    pub fn alpha_index(&self, labels: &[u64]) -> Option<u64> {
        if !self.is_graceful(labels) {
            return None;
        }
        let n = self.edges.len() as u64;
        (0..n.max(1)).find(|&k| {
            self.edges.iter().all(|&(u, v)| {
                let (a, b) = (labels[u], labels[v]);
                a.min(b) <= k && k < a.max(b)
            })
        })
    }
}

/// `0, n, 1, n-1, ...` along the path with `n` edges.
pub fn label_path(n: usize) -> VertexLabeling {
    let n = n as u64;
    let labels = (0..=n)
        .map(|i| if i % 2 == 0 { i / 2 } else { n - i / 2 })
        .collect();
    VertexLabeling::new(labels).expect("path labels are distinct")
}

/// Center 0, leaves `1..=m` (vertex ids as in [`Tree::star`]).
pub fn label_star(m: usize) -> VertexLabeling {
    VertexLabeling::new((0..=m as u64).collect()).expect("star labels are distinct")
}

/// The zig-zag α-labeling of a caterpillar with `start` labeled 0.
pub fn label_caterpillar(tree: &Tree, start: usize) -> Result<VertexLabeling> {
    if start >= tree.vertex_count() {
        return invalid(format!("vertex {start} is not in the tree"));
    }
    if !is_m_distant(tree, 1) {
        return invalid("tree is not a caterpillar");
    }
    let ecc = tree.eccentricities();
    let top = *ecc.iter().max().unwrap();
    let ok = ecc[start] == top || tree.neighbors(start).iter().any(|&u| ecc[u] == top);
    if !ok {
        return invalid(format!(
            "vertex {start} neither has maximum eccentricity nor is adjacent to such a vertex"
        ));
    }
    let spine = tree.longest_path_from(start);
    let on_spine: BTreeSet<usize> = spine.iter().copied().collect();
    let dominated = (0..tree.vertex_count())
        .all(|v| on_spine.contains(&v) || tree.neighbors(v).iter().any(|u| on_spine.contains(u)));
    if !dominated {
        return Err(crate::Error::Defect(
            "longest path from start does not dominate the caterpillar".into(),
        ));
    }
    let n = tree.edge_count() as u64;
    let mut labels = vec![0u64; tree.vertex_count()];
    let (mut low, mut high) = (0u64, n);
    let mut take = |from_low: bool| {
        if from_low {
            low += 1;
            low - 1
        } else {
            high -= 1;
            high + 1
        }
    };
    // The spine vertex v_i takes a low label for even i; its off-spine neighbors take the other side.
    labels[spine[0]] = take(true);
    for (i, &v) in spine.iter().enumerate() {
        let v_low = i % 2 == 0;
        for &u in tree.neighbors(v) {
            if !on_spine.contains(&u) {
                labels[u] = take(!v_low);
            }
        }
        if let Some(&next) = spine.get(i + 1) {
            labels[next] = take(!v_low);
        }
    }
    VertexLabeling::new(labels)
}

/// Cycle labels listed around `0-1-...-(n-1)`; `None` when no graceful labeling exists.
pub fn label_cycle(n: usize) -> Result<Option<Vec<u64>>> {
    if n < 3 {
        return invalid("a cycle needs at least 3 vertices");
    }
    let (top, skip_high, skip_low, m) = match n % 4 {
        0 => (n as u64, Some(3 * (n as u64 / 4)), None, n as u64 / 4),
        3 => {
            let m = (n as u64 + 1) / 4;
            (n as u64, None, Some(m), m)
        }
        _ => return Ok(None),
    };
    let mut out = vec![2 * m];
    let (mut low, mut high) = (0u64, top);
    while out.len() < n {
        if out.len() % 2 == 1 {
            if Some(low) == skip_low {
                low += 1;
            }
            out.push(low);
            low += 1;
        } else {
            if Some(high) == skip_high {
                high -= 1;
            }
            out.push(high);
            high -= 1;
        }
    }
    Ok(Some(out))
}

/// Graceful labelings of `K_n` for `n <= 4`.
pub fn label_complete(n: usize) -> Option<Vec<u64>> {
    match n {
        1 => Some(vec![0]),
        2 => Some(vec![0, 1]),
        3 => Some(vec![0, 1, 3]),
        4 => Some(vec![0, 1, 4, 6]),
        _ => None,
    }
}

/// Part `0..m` gets `0..m-1`; part `m..m+n` gets `m, 2m, ..., nm`.
pub fn label_complete_bipartite(m: usize, n: usize) -> Result<Vec<u64>> {
    if m == 0 || n == 0 {
        return invalid("both parts must be nonempty");
    }
    let m64 = m as u64;
    Ok((0..m64).chain((1..=n as u64).map(|j| j * m64)).collect())
}

/// True when every degree is even and the edge count is 1 or 2 mod 4.
pub fn even_degree_obstruction(graph: &SimpleGraph) -> bool {
    let n = graph.edge_count();
    (0..graph.vertex_count()).all(|v| graph.degree(v).is_multiple_of(2)) && matches!(n % 4, 1 | 2)
}

/// A diameter-4 tree with two branches at the center: stars with `m1` and `m2` leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diameter4Instance {
    pub m1: usize,
    pub m2: usize,
    pub n: usize,
}

impl Diameter4Instance {
    pub fn new(m1: usize, m2: usize) -> Diameter4Instance {
        let (m1, m2) = (m1.max(m2), m1.min(m2));
        Diameter4Instance {
            m1,
            m2,
            n: m1 + m2 + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m2 == 0 || self.m1 < self.m2 {
            return invalid("need m1 >= m2 >= 1 for diameter 4");
        }
        if self.n != self.m1 + self.m2 + 2 {
            return invalid(format!(
                "n must equal m1 + m2 + 2 = {}",
                self.m1 + self.m2 + 2
            ));
        }
        Ok(())
    }

    /// Center 0, branch centers 1 and 2, then the `m1` leaves of 1 and `m2` leaves of 2.
    pub fn tree(&self) -> Tree {
        let mut edges = vec![(0, 1), (0, 2)];
        let mut next = 3;
        for (c, m) in [(1, self.m1), (2, self.m2)] {
            for _ in 0..m {
                edges.push((c, next));
                next += 1;
            }
        }
        Tree::new(next, &edges)
            .expect("diameter-4 instance is a tree")
            .with_root(0)
    }
}

/// The first witness `(x, r)` in lexicographic `(r, x)` order, if any.
pub fn diameter4_zero_centered(inst: &Diameter4Instance) -> Result<Option<(usize, usize)>> {
    inst.validate()?;
    let (m1, m2, n) = (inst.m1 as i64, inst.m2 as i64, inst.n as i64);
    for r in 2..=n / 2 {
        for x in 0..=(r - 1).min(m2) {
            if x % 2 == 1 && r % 2 == 1 {
                continue;
            }
            if m1 == (m2 + 2 - x) * (r - 1) - x {
                return Ok(Some((x as usize, r as usize)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::classify_labeling;

    #[test]
    fn path_examples() {
        assert_eq!(label_path(4).labels(), &[0, 4, 1, 3, 2]);
        assert_eq!(label_path(1).labels(), &[0, 1]);
        assert_eq!(label_path(0).labels(), &[0]);
        let f = label_path(5);
        assert_eq!(f.labels(), &[0, 5, 1, 4, 2, 3]);
        assert_eq!(
            classify_labeling(&Tree::path(5), &f).unwrap().alpha_index,
            Some(2)
        );
    }

    #[test]
    fn caterpillar_examples() {
        let t = Tree::path(4);
        assert_eq!(label_caterpillar(&t, 0).unwrap().labels(), &[0, 4, 1, 3, 2]);
        let s = Tree::star(4);
        let f = label_caterpillar(&s, 1).unwrap();
        assert_eq!(f.get(1), 0);
        assert_eq!(f.get(0), 4);
        assert!(classify_labeling(&s, &f).unwrap().alpha_index.is_some());
        // spine a=0, b=1; legs 2,3 at a and 4 at b.
        let t = Tree::new(5, &[(0, 1), (0, 2), (0, 3), (1, 4)]).unwrap();
        let f = label_caterpillar(&t, 2).unwrap();
        assert_eq!(f.get(2), 0);
        assert!(classify_labeling(&t, &f).unwrap().alpha_index.is_some());
        assert!(label_caterpillar(&Tree::path(6), 3).is_err());
        assert!(label_caterpillar(&Tree::spider(&[2, 2, 2]), 1).is_err());
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(label_cycle(4).unwrap().unwrap(), vec![2, 0, 4, 1]);
        assert_eq!(label_cycle(3).unwrap().unwrap(), vec![2, 0, 3]);
        assert_eq!(label_cycle(5).unwrap(), None);
        assert!(label_cycle(2).is_err());
        for n in 3..=40 {
            let g = SimpleGraph::cycle(n).unwrap();
            match label_cycle(n).unwrap() {
                Some(f) => {
                    assert!(g.is_graceful(&f), "C_{n}");
                    if n % 4 == 0 {
                        assert_eq!(g.alpha_index(&f), Some(n as u64 / 2 - 1));
                    }
                }
                None => assert!(matches!(n % 4, 1 | 2)),
            }
        }
    }

    #[test]
    fn complete_examples() {
        for n in 1..=4 {
            assert!(SimpleGraph::complete(n)
                .unwrap()
                .is_graceful(&label_complete(n).unwrap()));
        }
        assert_eq!(label_complete(5), None);
    }

    #[test]
    fn complete_bipartite_examples() {
        assert_eq!(label_complete_bipartite(2, 3).unwrap(), vec![0, 1, 2, 4, 6]);
        assert_eq!(label_complete_bipartite(1, 4).unwrap(), vec![0, 1, 2, 3, 4]);
        let g = SimpleGraph::complete_bipartite(3, 3).unwrap();
        assert_eq!(
            g.alpha_index(&label_complete_bipartite(3, 3).unwrap()),
            Some(2)
        );
    }

    #[test]
    fn obstruction_examples() {
        assert!(even_degree_obstruction(&SimpleGraph::cycle(5).unwrap()));
        assert!(!even_degree_obstruction(&SimpleGraph::cycle(4).unwrap()));
        assert!(!even_degree_obstruction(&SimpleGraph::from_tree(
            &Tree::path(5)
        )));
    }

    #[test]
    fn diameter4_bounds() {
        let inst = Diameter4Instance { m1: 1, m2: 1, n: 3 };
        assert!(diameter4_zero_centered(&inst).is_err());
        let inst = Diameter4Instance::new(1, 1);
        // P_4 labeled 1,4,0,2,3 is 0-centered; the scan finds r = 2, x = 1.
        assert_eq!(diameter4_zero_centered(&inst).unwrap(), Some((1, 2)));
    }
}
