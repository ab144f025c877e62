use proptest::prelude::*;

use gracetree::advanced::*;
use gracetree::graph::{is_graceful, is_odd_radial, Tree};
use gracetree::oracle::enumerate_free_trees;

fn small_trees(max_vertices: usize) -> Vec<Tree> {
    (1..=max_vertices).flat_map(enumerate_free_trees).collect()
}

/// A rooted tree with `counts[l]` listing children per vertex of level `l`, level by level.
fn from_levels(counts: &[Vec<usize>]) -> Tree {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut level = vec![0];
    for row in counts {
        assert_eq!(row.len(), level.len());
        let mut next = Vec::new();
        for (&p, &c) in level.iter().zip(row) {
            for _ in 0..c {
                children.push(Vec::new());
                let id = children.len() - 1;
                children[p].push(id);
                next.push(id);
            }
        }
        level = next;
    }
    Tree::from_children(&children).unwrap()
}

#[test]
fn every_match_on_small_trees_labels() {
    let mut hits = std::collections::BTreeMap::new();
    for t in small_trees(14) {
        for w in match_theorem(&t) {
            let l = label_matched(&t, &w)
                .unwrap_or_else(|e| panic!("{} failed on {:?}: {e}", w.theorem, t.edges()));
            assert!(is_graceful(&t, &l), "{} on {:?}", w.theorem, t.edges());
            *hits.entry(w.theorem).or_insert(0usize) += 1;
        }
    }
    for id in TheoremId::ALL {
        assert!(
            hits.get(&id).copied().unwrap_or(0) > 0,
            "no small tree matched {id}"
        );
    }
}

#[test]
fn centered_theorems_label_the_center_zero() {
    for t in small_trees(13) {
        for w in match_theorem(&t) {
            if w.radius.is_some() {
                assert_eq!(label_matched(&t, &w).unwrap().get(w.root), 0);
            }
        }
    }
}

#[test]
fn theorem_entry_points_reject_other_trees() {
    let path = Tree::path(6);
    assert!(label_diameter6(&path, TheoremId::T41).is_err());
    assert!(label_diameter6(&path, TheoremId::T43).is_err());
    assert!(label_diameter2r(&path, TheoremId::T43).is_err());
    assert!(label_generalized_banana(&Tree::single()).is_err());
}

#[test]
fn aux_on_small_odd_radial_trees() {
    for t in small_trees(10) {
        for root in 0..t.vertex_count() {
            if !is_odd_radial(&t, root) {
                continue;
            }
            for extra in 0..3 {
                let aux = label_odd_radial_aux(&t, root, extra, None).unwrap();
                assert!(is_graceful(&aux.tree, &aux.labeling));
                assert_eq!(aux.labeling.get(root), 0);
                assert_eq!(aux.transferable.is_some(), extra > 0);
            }
        }
    }
}

#[test]
fn spider_powers_on_all_leg_multisets() {
    fn parts(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            parts(n - p, p, cur, out);
            cur.pop();
        }
    }
    for n in 1..=16 {
        let mut all = Vec::new();
        parts(n, n, &mut Vec::new(), &mut all);
        for legs in all {
            match label_spider_powers(&legs) {
                Some((t, l)) => assert!(is_graceful(&t, &l), "{legs:?}"),
                None => assert!(!spider_powers_condition(&legs)),
            }
        }
    }
}

#[test]
fn labeling_functions_at_every_leaf() {
    for t in small_trees(9) {
        for v in (0..t.vertex_count()).filter(|&v| t.degree(v) == 1) {
            let g = labeling_function(&t, v).unwrap();
            assert!(g.is_labeling_function(&t));
            assert!(g.labels[v] == num_rational::BigRational::from_integer(0.into()));
        }
    }
}

#[test]
fn attaching_leaves_at_every_vertex() {
    for t in small_trees(9) {
        for v in 0..t.vertex_count() {
            let (big_n, out, l) = attach_leaves_graceful(&t, v).unwrap();
            assert_eq!(out.edge_count(), t.edge_count() + big_n);
            assert!(is_graceful(&out, &l));
            let f = consistent_rrg(&t, v).unwrap();
            for k in big_n + 1..=big_n + 5 {
                let (out, l) = fill_attached_leaves(&t, v, &f, k).unwrap();
                assert!(is_graceful(&out, &l));
            }
            if big_n > 0 {
                assert!(fill_attached_leaves(&t, v, &f, big_n - 1).is_err());
            }
        }
    }
}

#[test]
fn large_banana_families() {
    // Apex with m legs, each a path of length h + 1 ending in a star with the given tips.
    for m in 1..=6 {
        for h in 0..3 {
            let tips: Vec<usize> = (0..m).map(|i| (i * 3 + 1) % 5).collect();
            let mut children: Vec<Vec<usize>> = vec![Vec::new()];
            for &tip in &tips {
                let mut prev = 0;
                for _ in 0..=h {
                    children.push(Vec::new());
                    let id = children.len() - 1;
                    children[prev].push(id);
                    prev = id;
                }
                for _ in 0..tip {
                    children.push(Vec::new());
                    let id = children.len() - 1;
                    children[prev].push(id);
                }
            }
            let t = Tree::from_children(&children).unwrap();
            if let Ok(l) = label_generalized_banana(&t) {
                assert!(is_graceful(&t, &l));
            } else {
                assert!(match_theorem(&t)
                    .iter()
                    .all(|w| w.theorem != TheoremId::GenBanana));
            }
        }
    }
}

#[test]
fn diameter_six_from_a_bps() {
    let t = from_levels(&[vec![3], vec![3, 3, 1], vec![1, 1, 1, 3, 1, 1, 1]]);
    assert_eq!(
        tree_bps(&t, 0, 3).unwrap(),
        "((1,1,1),(3,1,1),(1))".parse().unwrap()
    );
    let ids: Vec<TheoremId> = match_theorem(&t).iter().map(|w| w.theorem).collect();
    assert!(ids.contains(&TheoremId::T41) && ids.contains(&TheoremId::T45));
    for id in [TheoremId::T41, TheoremId::T42, TheoremId::T45] {
        let l = label_diameter6(&t, id).unwrap();
        assert!(is_graceful(&t, &l));
        assert_eq!(l.get(0), 0);
    }
}

#[test]
fn diameter_six_with_mixed_leaf_depths() {
    // Every internal vertex has an odd number of children, leaves at depths 2 and 3.
    let t = from_levels(&[vec![3], vec![3, 1, 1], vec![0, 3, 0, 1, 5]]);
    let l = label_diameter6(&t, TheoremId::T45).unwrap();
    assert!(is_graceful(&t, &l));
    assert_eq!(l.get(0), 0);
    let shallow = from_levels(&[vec![3], vec![3, 1, 1], vec![0, 2, 1, 1, 1]]);
    let l = label_diameter6(&shallow, TheoremId::T42).unwrap();
    assert!(is_graceful(&shallow, &l));
    assert!(label_diameter6(&shallow, TheoremId::T41).is_err());
}

#[test]
fn diameter_eight_even_counts() {
    let four = from_levels(&[vec![3], vec![1, 1, 1], vec![1, 1, 3], vec![2, 2, 2, 2, 1]]);
    let l = label_diameter2r(&four, TheoremId::T43).unwrap();
    assert!(is_graceful(&four, &l));
    assert_eq!(l.get(0), 0);
    let none = from_levels(&[vec![3], vec![1, 1, 1], vec![1, 1, 3], vec![1, 3, 1, 1, 5]]);
    assert!(is_graceful(
        &none,
        &label_diameter2r(&none, TheoremId::T43).unwrap()
    ));
    let three = from_levels(&[vec![3], vec![1, 1, 1], vec![1, 1, 3], vec![2, 2, 2, 1, 1]]);
    assert!(label_diameter2r(&three, TheoremId::T43).is_err());
    let even_mid = from_levels(&[vec![3], vec![2, 1, 1], vec![1, 1, 1, 1]]);
    assert!(match_theorem(&even_mid)
        .iter()
        .all(|w| w.theorem != TheoremId::T41));
}

/// Apex with one branch per entry: a spine of `h + 1` vertices ending in a star with `tips`
/// leaves, plus `extras[level]` leaves on the spine vertex at each level.
fn banana(h: usize, branches: &[(usize, Vec<usize>)]) -> Tree {
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let add = |children: &mut Vec<Vec<usize>>, p: usize| {
        children.push(Vec::new());
        let id = children.len() - 1;
        children[p].push(id);
        id
    };
    for (tips, extras) in branches {
        let mut prev = 0;
        for level in 0..=h {
            prev = add(&mut children, prev);
            for _ in 0..extras.get(level).copied().unwrap_or(0) {
                add(&mut children, prev);
            }
        }
        for _ in 0..*tips {
            add(&mut children, prev);
        }
    }
    Tree::from_children(&children).unwrap()
}

#[test]
fn banana_examples() {
    let t = banana(1, &[(3, vec![]), (5, vec![]), (1, vec![])]);
    assert!(match_theorem(&t)
        .iter()
        .any(|w| w.theorem == TheoremId::GenBanana));
    let l = label_generalized_banana(&t).unwrap();
    assert!(is_graceful(&t, &l));
    assert_eq!(l.get(0), 0);
    let spider = banana(0, &[(1, vec![]), (2, vec![]), (4, vec![])]);
    assert!(is_graceful(
        &spider,
        &label_generalized_banana(&spider).unwrap()
    ));
    let even = banana(2, &[(2, vec![]), (3, vec![])]);
    assert!(is_graceful(
        &even,
        &label_generalized_banana(&even).unwrap()
    ));
}

#[test]
fn even_caterpillar_banana_examples() {
    let t = banana(2, &[(1, vec![0, 2]), (1, vec![0, 4]), (3, vec![0, 2])]);
    assert!(match_theorem(&t)
        .iter()
        .any(|w| w.theorem == TheoremId::EvenCatBanana));
    let l = label_even_caterpillar_banana(&t).unwrap();
    assert!(is_graceful(&t, &l));
    let two_levels = banana(2, &[(1, vec![2, 2]), (1, vec![4, 2]), (3, vec![2, 6])]);
    assert!(is_graceful(
        &two_levels,
        &label_even_caterpillar_banana(&two_levels).unwrap()
    ));
    let four = banana(1, &[(1, vec![2]), (2, vec![2]), (1, vec![4]), (3, vec![2])]);
    assert!(is_graceful(
        &four,
        &label_even_caterpillar_banana(&four).unwrap()
    ));
    let plain = banana(1, &[(3, vec![]), (5, vec![]), (1, vec![])]);
    assert!(is_graceful(
        &plain,
        &label_even_caterpillar_banana(&plain).unwrap()
    ));
    let odd_bundle = banana(1, &[(1, vec![3]), (2, vec![2]), (1, vec![2])]);
    assert!(label_even_caterpillar_banana(&odd_bundle).is_err());
}

#[test]
fn log_spider_matches_transport() {
    let t = Tree::spider(&[1, 3, 1, 1, 2]);
    let w = match_theorem(&t)
        .into_iter()
        .find(|w| w.theorem == TheoremId::LogSpider)
        .unwrap();
    assert_eq!(w.legs.as_deref(), Some(&[3, 2, 1, 1, 1][..]));
    assert!(is_graceful(&t, &label_matched(&t, &w).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_match_on_random_layered_trees(
        depth in 2usize..5,
        root in 2usize..6,
        seed in proptest::collection::vec(0usize..5, 16),
        odd_bias in proptest::bool::ANY,
    ) {
        let mut rows = vec![vec![root]];
        let mut width = root;
        for level in 1..depth {
            let row: Vec<usize> = (0..width)
                .map(|i| {
                    let x = seed[(i * 5 + level * 3) % 16];
                    if odd_bias && level + 1 < depth { 2 * (x % 2) + 1 } else { x }
                })
                .collect();
            width = row.iter().sum();
            rows.push(row);
            if width == 0 || width > 60 {
                break;
            }
        }
        let t = from_levels(&rows);
        for w in match_theorem(&t) {
            let l = label_matched(&t, &w);
            prop_assert!(l.is_ok(), "{} failed: {:?}", w.theorem, l.err());
            prop_assert!(is_graceful(&t, &l.unwrap()));
        }
    }

    #[test]
    fn back_and_forth_on_odd_diameter_six_trees(
        branches in proptest::collection::vec(
            proptest::collection::vec(proptest::option::weighted(0.6, 0usize..3), 1..6),
            1..5,
        ),
        extra_branch in proptest::bool::ANY,
    ) {
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let add = |children: &mut Vec<Vec<usize>>, p: usize| {
            children.push(Vec::new());
            let id = children.len() - 1;
            children[p].push(id);
            id
        };
        let mut branches = branches;
        if (branches.len() % 2 == 0) != extra_branch {
            branches.pop();
        }
        for level2 in &branches {
            let a = add(&mut children, 0);
            let take = if level2.len() % 2 == 0 { level2.len() - 1 } else { level2.len() };
            for c in &level2[..take] {
                let b = add(&mut children, a);
                if let Some(c) = c {
                    for _ in 0..2 * c + 1 {
                        add(&mut children, b);
                    }
                }
            }
        }
        prop_assume!(!branches.is_empty());
        let t = Tree::from_children(&children).unwrap();
        if let Some(w) = match_theorem(&t).into_iter().find(|w| w.theorem == TheoremId::T45) {
            let l = label_matched(&t, &w).unwrap();
            prop_assert!(is_graceful(&t, &l));
            prop_assert_eq!(l.get(0), 0);
        }
    }
}
