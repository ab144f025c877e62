use std::collections::BTreeSet;

use gracetree::classic::{label_caterpillar, label_path};
use gracetree::constructions::*;
use gracetree::graph::{
    classify_labeling, is_graceful, is_m_distant, isomorphic, Tree, VertexLabeling,
};
use gracetree::oracle::{brute_force_alpha, brute_force_graceful, enumerate_free_trees};

fn small_trees(max_vertices: usize) -> Vec<Tree> {
    (1..=max_vertices).flat_map(enumerate_free_trees).collect()
}

fn graceful(t: &Tree) -> VertexLabeling {
    brute_force_graceful(t, None).unwrap().unwrap()
}

#[test]
fn delta_bookkeeping_on_small_pairs() {
    let trees = small_trees(4);
    for s in &trees {
        let f = graceful(s);
        for t in &trees {
            let g = graceful(t);
            let nt = t.vertex_count();
            for v in 0..nt {
                let (out, l) =
                    delta_construction(s, &f, t, &g, &AttachmentMap::fixed(s, v)).unwrap();
                assert_eq!(out.vertex_count(), s.vertex_count() * nt);
                assert!(classify_labeling(&out, &l).unwrap().is_graceful);
                let s_labels: BTreeSet<u64> = s
                    .edges()
                    .iter()
                    .map(|&(a, b)| l.get(a * nt + v).abs_diff(l.get(b * nt + v)))
                    .collect();
                let expected: BTreeSet<u64> = (1..s.vertex_count() as u64)
                    .map(|i| i * nt as u64)
                    .collect();
                assert_eq!(s_labels, expected);
            }
        }
    }
}

#[test]
fn generalized_delta_with_varying_attachments() {
    let s = Tree::path(3);
    let f = label_path(3);
    let t = Tree::spider(&[1, 2]);
    let g = graceful(&t);
    for mask in 0..27usize {
        let via: Vec<usize> = (0..3).map(|i| (mask / 3usize.pow(i)) % 3).collect();
        let (out, l) = delta_construction(&s, &f, &t, &g, &AttachmentMap::per_edge(&via)).unwrap();
        assert!(is_graceful(&out, &l));
    }
    let bad = AttachmentMap {
        ends: vec![(0, 1), (0, 0), (0, 0)],
    };
    assert!(delta_construction(&s, &f, &t, &g, &bad).is_err());
}

#[test]
fn delta_plus_one_on_small_pairs() {
    let trees = small_trees(4);
    for s in &trees {
        let ns = s.vertex_count() as u64;
        let f = brute_force_graceful(s, Some((0, ns - 1))).unwrap();
        let Some(f) = f else { continue };
        for t in &trees {
            let nt = t.vertex_count();
            for v in 0..nt {
                let Some(g) = brute_force_graceful(t, Some((v, 0))).unwrap() else {
                    continue;
                };
                let (out, l) =
                    delta_plus_one(s, &f, 0, t, &g, v, &AttachmentMap::fixed(s, v)).unwrap();
                assert_eq!(out.vertex_count(), (s.vertex_count() - 1) * nt + 1);
                assert_eq!(l.get(out.vertex_count() - 1), (ns - 1) * nt as u64);
            }
        }
    }
}

#[test]
fn orientations_hold_on_every_perfect_matching_tree() {
    for t in small_trees(10) {
        let m = maximum_matching(&t);
        if m.is_perfect(&t) {
            let o = orient_matching(&t, &m).unwrap();
            assert!(o.satisfies(&t, &m));
        } else {
            assert!(orient_matching(&t, &m).is_err());
        }
    }
}

#[test]
fn subdivisions_of_small_trees() {
    for t in small_trees(6) {
        let f = graceful(&t);
        for k in 1..=3 {
            let (out, l) = subdivide_graceful(&t, &f, k).unwrap();
            assert_eq!(out.edge_count(), t.edge_count() * (k + 1));
            assert!(is_graceful(&out, &l));
        }
    }
}

#[test]
fn contree_lifts_on_small_trees() {
    for t in small_trees(10) {
        let m = maximum_matching(&t);
        let unmatched = m.unmatched(&t);
        if unmatched.len() > 1 {
            continue;
        }
        let c = contree(&t, &m).unwrap();
        if unmatched.is_empty() {
            let cl = graceful(&c.tree);
            let l = label_via_contree(&t, &m, &cl, ContreeMode::Perfect).unwrap();
            assert!(is_graceful(&t, &l));
        } else {
            let su = c.singleton().unwrap();
            if let Some(cl) = brute_force_graceful(&c.tree, Some((su, 0))).unwrap() {
                let l = label_via_contree(&t, &m, &cl, ContreeMode::AlmostPerfect).unwrap();
                assert!(is_graceful(&t, &l));
            }
        }
    }
}

#[test]
fn lobster_with_perfect_matching() {
    // Spine 0-1-2-3 with one leaf per spine vertex and the pendant path 2-8-9.
    let edges = [
        (0, 1),
        (1, 2),
        (2, 3),
        (0, 4),
        (1, 5),
        (2, 6),
        (3, 7),
        (2, 8),
        (8, 9),
    ];
    let t = Tree::new(10, &edges).unwrap();
    assert!(is_m_distant(&t, 2));
    let m = maximum_matching(&t);
    assert!(m.is_perfect(&t));
    let c = contree(&t, &m).unwrap();
    assert!(is_m_distant(&c.tree, 1));
    let start = *c.tree.diameter_path().first().unwrap();
    let cl = label_caterpillar(&c.tree, start).unwrap();
    let l = label_via_contree(&t, &m, &cl, ContreeMode::Perfect).unwrap();
    assert!(is_graceful(&t, &l));
}

#[test]
fn joins_on_small_trees() {
    let trees = small_trees(5);
    for t1 in &trees {
        for v1 in 0..t1.vertex_count() {
            let Some(f1) = brute_force_alpha(t1, Some((v1, 0))).unwrap() else {
                continue;
            };
            for t2 in &trees {
                let v2 = 0;
                if let Some(f2) = brute_force_alpha(t2, Some((v2, 0))).unwrap() {
                    let (t, l) = join_at_zero(t1, &f1, v1, t2, &f2, v2, JoinMode::Alpha).unwrap();
                    assert_eq!(t.edge_count(), t1.edge_count() + t2.edge_count());
                    assert!(classify_labeling(&t, &l).unwrap().alpha_index.is_some());
                }
                if let Some(f2) = brute_force_graceful(t2, Some((v2, 0))).unwrap() {
                    let (t, l) =
                        join_at_zero(t1, &f1, v1, t2, &f2, v2, JoinMode::Graceful).unwrap();
                    assert!(is_graceful(&t, &l));
                }
            }
        }
    }
}

#[test]
fn attach_caterpillar_to_graceful_trees() {
    let h = Tree::new(6, &[(0, 1), (1, 2), (2, 3), (1, 4), (2, 5)]).unwrap();
    for t in small_trees(6) {
        let f = graceful(&t);
        let u = f.vertex_with(0).unwrap();
        let (out, l) = attach_caterpillar(&t, &f, u, &h, 0).unwrap();
        assert_eq!(out.edge_count(), t.edge_count() + h.edge_count());
        assert!(is_graceful(&out, &l));
    }
}

#[test]
fn symmetrical_trees_from_child_counts() {
    for counts in [
        vec![1],
        vec![3],
        vec![2, 2],
        vec![3, 1],
        vec![1, 3, 2],
        vec![2, 1, 2],
        vec![2, 2, 2],
    ] {
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let mut level = vec![0];
        for &c in &counts {
            let mut next = Vec::new();
            for &p in &level {
                for _ in 0..c {
                    children.push(Vec::new());
                    let id = children.len() - 1;
                    children[p].push(id);
                    next.push(id);
                }
            }
            level = next;
        }
        let t = Tree::from_children(&children).unwrap();
        let l = label_symmetrical(&t, 0).unwrap();
        assert!(is_graceful(&t, &l));
        assert_eq!(l.get(0), 0);
    }
}

#[test]
fn decompositions_partition_complete_graphs() {
    for t in small_trees(7).into_iter().filter(|t| t.edge_count() > 0) {
        let l = graceful(&t);
        let copies = cyclic_decomposition(&t, &l).unwrap();
        let n = 2 * t.edge_count() + 1;
        assert_eq!(copies.len(), n);
        let mut seen = BTreeSet::new();
        for copy in &copies {
            for &e in copy {
                assert!(seen.insert(e), "edge {e:?} appears twice");
            }
            let used: BTreeSet<usize> = copy.iter().flat_map(|&(a, b)| [a, b]).collect();
            let ids: Vec<usize> = used.iter().copied().collect();
            let local: Vec<(usize, usize)> = copy
                .iter()
                .map(|&(a, b)| {
                    (
                        ids.binary_search(&a).unwrap(),
                        ids.binary_search(&b).unwrap(),
                    )
                })
                .collect();
            let copy_tree = Tree::new(ids.len(), &local).unwrap();
            assert!(isomorphic(&copy_tree, &t));
        }
        assert_eq!(seen.len(), n * (n - 1) / 2);
    }
}
