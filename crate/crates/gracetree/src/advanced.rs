//! Labelers driven by transfers and BPS deciders (odd radial auxiliary trees, diameter-2r
//! trees, the back-and-forth diameter-6 labeler, banana classes), the power-of-two spider
//! labeling, rational labeling functions and attaching leaves.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bps::{decide_depth1, decide_large_depth, decide_odd_depth2, Bps, BpsDecision};
use crate::classic::label_star;
use crate::constructions::attach_caterpillar;
use crate::error::{contract, invalid, Error, Result};
use crate::graph::{
    banana_shape, even_caterpillar_shape, is_graceful, is_odd_radial, is_spider,
    rooted_isomorphism, BananaShape, EvenCaterpillarShape, Rooted, Tree, VertexLabeling,
};
use crate::transfers::{
    replay_plan, AlternatingSequence, Form, TransferPlan, TransferStep, TransferableSet,
};

/// Label at 1-based position `p` of the closed sequence `0, n, 1, n-1, ...` of the star
/// K_{1,n}; position 0 is the imaginary vertex labeled `n + 1`.
fn closed_label(n: usize, p: usize) -> u64 {
    if p % 2 == 1 {
        ((p - 1) / 2) as u64
    } else {
        (n + 1 - p / 2) as u64
    }
}

/// Replays a walk of transfers on the star K_{1,n} labeled by vertex id, all leaves
/// transferable from the center.
fn star_walk(n: usize, steps: &[TransferStep]) -> Result<Tree> {
    let star = Tree::star(n);
    if steps.is_empty() {
        return Ok(star);
    }
    let lab = label_star(n);
    let order: Vec<usize> = (1..=n + 1).map(|p| closed_label(n, p) as usize).collect();
    let seq = AlternatingSequence {
        vertices: order,
        form: Form::DescendingGap,
        a: 0,
        b: n as i64 + 1,
    };
    let leaves: Vec<usize> = (1..=n).collect();
    let set = TransferableSet::new(&star, &lab, &seq, &leaves)?;
    replay_plan(
        &star,
        &lab,
        &seq,
        &set,
        &TransferPlan {
            steps: steps.to_vec(),
        },
    )
    .map_err(|e| Error::Defect(format!("transfer walk failed: {e}")))
}

/// Drops trailing steps that would move nothing.
fn trim_walk(steps: &mut Vec<TransferStep>, total: usize) {
    let mut remaining = total;
    for (i, s) in steps.iter().enumerate() {
        if s.leftover >= remaining {
            steps.truncate(i);
            return;
        }
        remaining -= s.leftover;
    }
}

/// Carries the identity labeling of a star-walk result over to an isomorphic target.
fn transport(built: &Tree, target: &Tree, root: usize) -> Result<VertexLabeling> {
    let map = rooted_isomorphism(built, 0, target, root)
        .ok_or_else(|| Error::Defect("transfers produced a tree of the wrong shape".into()))?;
    let mut labels = vec![0u64; target.vertex_count()];
    for (x, &y) in map.iter().enumerate() {
        labels[y] = x as u64;
    }
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(target, &lab) {
        return Err(Error::Defect("transported labeling is not graceful".into()));
    }
    Ok(lab)
}

/// Breadth-first order following the given child orders.
fn lex_bfs(children: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut out = vec![root];
    let mut i = 0;
    while i < out.len() {
        out.extend(children[out[i]].iter().copied());
        i += 1;
    }
    out
}

/// Reorders children so that each vertex's children follow the first position of their
/// descendant leaves in `pos`.
fn order_children(children: &mut [Vec<usize>], root: usize, pos: &BTreeMap<usize, usize>) {
    let order = lex_bfs(children, root);
    let mut first = vec![usize::MAX; children.len()];
    for &u in order.iter().rev() {
        first[u] = match pos.get(&u) {
            Some(&p) if children[u].is_empty() => p,
            _ => children[u]
                .iter()
                .map(|&c| first[c])
                .min()
                .unwrap_or(usize::MAX),
        };
    }
    for ch in children.iter_mut() {
        ch.sort_by_key(|&c| first[c]);
    }
}

/// A graceful labeling of an odd radial tree with leaves attached to its first leaf.
#[derive(Debug, Clone)]
pub struct AuxLabeling {
    /// The tree with `attached` appended as leaves of the first leaf.
    pub tree: Tree,
    pub labeling: VertexLabeling,
    /// The leaves of the original tree in lexicographic order.
    pub sequence: AlternatingSequence,
    /// The attached leaves; `None` when nothing was attached.
    pub transferable: Option<TransferableSet>,
    pub attached: Vec<usize>,
    /// The lexicographic order of all vertices.
    pub order: Vec<usize>,
}

/// Labels an odd radial tree plus `extra` leaves at its first leaf by the star-then-chain
/// transfers `s_1 -> s_2 -> ... -> s_k`. `leaf_order` fixes the lexicographic order of the
/// leaves; by default children are taken by vertex id.
pub fn label_odd_radial_aux(
    tree: &Tree,
    root: usize,
    extra: usize,
    leaf_order: Option<&[usize]>,
) -> Result<AuxLabeling> {
    if root >= tree.vertex_count() {
        return invalid(format!("vertex {root} is not in the tree"));
    }
    if !is_odd_radial(tree, root) {
        return invalid("tree is not odd radial at the given root");
    }
    let rt = tree.bfs(root);
    let mut children = rt.children.clone();
    if let Some(want) = leaf_order {
        let leaves: HashSet<usize> = (0..tree.vertex_count())
            .filter(|&v| rt.is_leaf(v))
            .collect();
        let given: HashSet<usize> = want.iter().copied().collect();
        if given != leaves || want.len() != leaves.len() {
            return invalid("leaf order must list every leaf once");
        }
        let pos = want.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        order_children(&mut children, root, &pos);
    }
    let order = lex_bfs(&children, root);
    let size = order.len();
    let m = order.iter().filter(|&&v| children[v].is_empty()).count();
    let k = size - m + 1;
    if let Some(want) = leaf_order {
        if order[k - 1..] != *want {
            return invalid("leaf order is not realized by any lexicographic order");
        }
    }
    let n = tree.edge_count() + extra;
    let mut steps: Vec<TransferStep> = (1..k)
        .map(|j| TransferStep {
            from: j,
            to: j + 1,
            leftover: children[order[j - 1]].len(),
        })
        .collect();
    trim_walk(&mut steps, n);
    let built = star_walk(n, &steps)?;

    let first_leaf = order[k - 1];
    let full = tree.attach_leaves(first_leaf, extra);
    let attached: Vec<usize> = (size..size + extra).collect();
    let mut by_position = order.clone();
    by_position.extend(attached.iter().copied());
    let mut labels = vec![0u64; full.vertex_count()];
    for (i, &v) in by_position.iter().enumerate() {
        labels[v] = closed_label(n, i + 1);
    }
    let labeling = VertexLabeling::new(labels)?;
    let to_full: Vec<usize> = {
        let mut inv = vec![0; n + 1];
        for (i, &v) in by_position.iter().enumerate() {
            inv[closed_label(n, i + 1) as usize] = v;
        }
        inv
    };
    if built
        .edges()
        .iter()
        .any(|&(a, b)| !full.has_edge(to_full[a], to_full[b]))
    {
        return Err(Error::Defect(
            "auxiliary transfers produced a different tree".into(),
        ));
    }
    if !is_graceful(&full, &labeling) {
        return Err(Error::Defect("auxiliary labeling is not graceful".into()));
    }
    let form = if k % 2 == 1 {
        Form::DescendingGap
    } else {
        Form::AscendingGap
    };
    let b = if k == 1 {
        n as i64 + 1
    } else {
        closed_label(n, k - 1) as i64
    };
    let sequence = AlternatingSequence {
        vertices: order[k - 1..].to_vec(),
        form,
        a: closed_label(n, k) as i64,
        b,
    };
    for (i, &v) in sequence.vertices.iter().enumerate() {
        if sequence.label_at(i + 1) != labeling.get(v) as i64 {
            return Err(Error::Defect(
                "leaves do not form an alternating sequence".into(),
            ));
        }
    }
    let transferable = if extra > 0 {
        Some(TransferableSet::new(
            &full, &labeling, &sequence, &attached,
        )?)
    } else {
        None
    };
    Ok(AuxLabeling {
        tree: full,
        labeling,
        sequence,
        transferable,
        attached,
        order,
    })
}

/// Orders the children of `u` so its leaves read `target`. Returns the leaves in order.
fn arrange(
    ch: &[Vec<usize>],
    keys: &[Bps],
    sizes: &[usize],
    u: usize,
    target: &[usize],
) -> Option<Vec<usize>> {
    if ch[u].is_empty() {
        return (target.len() == 1 && keys[u] == Bps::Leaf(target[0])).then(|| vec![u]);
    }
    let mut want = target.to_vec();
    want.sort_unstable();
    let mut have = keys[u].values();
    have.sort_unstable();
    if want != have {
        return None;
    }
    let mut used = vec![false; ch[u].len()];
    let mut out = Vec::new();
    fill(ch, keys, sizes, &ch[u], &mut used, target, &mut out).then_some(out)
}

fn fill(
    ch: &[Vec<usize>],
    keys: &[Bps],
    sizes: &[usize],
    kids: &[usize],
    used: &mut [bool],
    target: &[usize],
    out: &mut Vec<usize>,
) -> bool {
    if target.is_empty() {
        return used.iter().all(|&b| b);
    }
    let mut tried: Vec<&Bps> = Vec::new();
    for i in 0..kids.len() {
        let c = kids[i];
        if used[i] || tried.contains(&&keys[c]) || sizes[c] > target.len() {
            continue;
        }
        tried.push(&keys[c]);
        if let Some(part) = arrange(ch, keys, sizes, c, &target[..sizes[c]]) {
            used[i] = true;
            let len = out.len();
            out.extend(part);
            if fill(ch, keys, sizes, kids, used, &target[sizes[c]..], out) {
                return true;
            }
            out.truncate(len);
            used[i] = false;
        }
    }
    false
}

/// The rooted tree cut at depth `cut`: children lists, the BPS of every vertex and the
/// number of cut-level vertices below each vertex.
struct Cut {
    children: Vec<Vec<usize>>,
    keys: Vec<Bps>,
    sizes: Vec<usize>,
}

fn cut_at(rt: &Rooted, cut: usize) -> Cut {
    let n = rt.order.len();
    let mut children = vec![Vec::new(); n];
    let mut keys = vec![Bps::Leaf(0); n];
    let mut sizes = vec![0; n];
    for &u in rt.order.iter().rev() {
        if rt.depth[u] > cut {
            continue;
        }
        if rt.depth[u] == cut {
            keys[u] = Bps::Leaf(rt.children[u].len());
            sizes[u] = 1;
        } else {
            children[u] = rt.children[u].clone();
            keys[u] = Bps::node(children[u].iter().map(|&c| keys[c].clone()).collect());
            sizes[u] = children[u].iter().map(|&c| sizes[c]).sum();
        }
    }
    Cut {
        children,
        keys,
        sizes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decider {
    Depth2,
    Large,
}

/// The BPS of a centered tree cut one level above its deepest leaves.
pub fn tree_bps(tree: &Tree, root: usize, radius: usize) -> Result<Bps> {
    if radius == 0 {
        return invalid("radius must be positive");
    }
    let rt = tree.bfs(root);
    Ok(cut_at(&rt, radius - 1).keys[root].clone())
}

/// Strips the deepest leaves, decides the BPS of the remaining odd radial tree, and
/// realizes the decision by the auxiliary chain followed by the decided plan.
fn label_by_bps(
    tree: &Tree,
    root: usize,
    radius: usize,
    decider: Decider,
    zeros: bool,
) -> Result<VertexLabeling> {
    let rt = tree.bfs(root);
    let cut = cut_at(&rt, radius - 1);
    let b = &cut.keys[root];
    let decision: Option<BpsDecision> = match (b.depth(), decider) {
        (0, _) => return invalid("tree is too shallow"),
        (1, _) => Some(decide_depth1(b)?),
        (_, Decider::Depth2) => decide_odd_depth2(b, zeros)?,
        (_, Decider::Large) => decide_large_depth(b, zeros)?,
    };
    let decision =
        decision.ok_or_else(|| Error::Defect(format!("no attainable sequence found in {b}")))?;
    let leaves = arrange(
        &cut.children,
        &cut.keys,
        &cut.sizes,
        root,
        &decision.sequence,
    )
    .ok_or_else(|| Error::Defect("decided sequence is not contained in the BPS".into()))?;
    let mut children = cut.children.clone();
    let pos = leaves.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    order_children(&mut children, root, &pos);
    let order = lex_bfs(&children, root);
    let k = order.len() - leaves.len() + 1;
    let mut steps: Vec<TransferStep> = (1..k)
        .map(|j| TransferStep {
            from: j,
            to: j + 1,
            leftover: children[order[j - 1]].len(),
        })
        .collect();
    steps.extend(decision.plan.shifted(k - 1).steps);
    let n = tree.edge_count();
    trim_walk(&mut steps, n);
    transport(&star_walk(n, &steps)?, tree, root)
}

/// Branch kinds of the back-and-forth labeler, by internal and leaf counts at level 2.
fn branch_kind(internal: usize, leaves: usize) -> usize {
    match (internal % 2, internal > 0, leaves > 0) {
        (1, _, false) => 1,
        (1, _, true) => 2,
        (0, true, _) => 3,
        _ => 4,
    }
}

/// Diameter-6 trees with every internal vertex having an odd number of children: a
/// back-and-forth pass over the first level orders the second level, then a forward pass
/// hands out the third level.
fn label_back_and_forth(tree: &Tree, root: usize) -> Result<VertexLabeling> {
    let rt = tree.bfs(root);
    struct Branch {
        internal: Vec<usize>,
        leaves: usize,
        kind: usize,
    }
    let mut branches: Vec<Branch> = rt.children[root]
        .iter()
        .map(|&c| {
            let mut internal: Vec<usize> = rt.children[c]
                .iter()
                .copied()
                .filter(|&x| !rt.is_leaf(x))
                .collect();
            internal.sort_unstable();
            let leaves = rt.children[c].len() - internal.len();
            let kind = branch_kind(internal.len(), leaves);
            Branch {
                internal,
                leaves,
                kind,
            }
        })
        .collect();
    // Ties between equal kinds keep vertex-id order (children are sorted by id).
    branches.sort_by_key(|b| b.kind);
    let m = branches.len();
    let count = |kind: usize| branches.iter().filter(|b| b.kind == kind).count();
    let (n1, n2, n3) = (count(1), count(2), count(3));

    // Visits over the first level (1-based branch index) with the parts left behind, each
    // part tagged with whether it consists of internal vertices.
    let mut visits: Vec<(usize, Vec<(bool, usize)>)> = Vec::new();
    let full = |j: usize| -> Vec<(bool, usize)> {
        let b = &branches[j - 1];
        vec![(true, b.internal.len()), (false, b.leaves)]
    };
    if n2 + n3 == 0 {
        for j in 1..=m {
            visits.push((j, full(j)));
        }
    } else {
        let first = n1 + 1;
        let last = n1 + n2 + n3;
        let row1 = |j: usize| -> (bool, usize) {
            let b = &branches[j - 1];
            if b.kind == 3 {
                (true, 1)
            } else {
                (true, b.internal.len())
            }
        };
        let row2 = |j: usize| -> (bool, usize) {
            let b = &branches[j - 1];
            if b.kind == 3 {
                (true, b.internal.len() - 1)
            } else {
                (false, 1)
            }
        };
        let row3 = |j: usize| -> (bool, usize) {
            let b = &branches[j - 1];
            if b.kind == 2 {
                (false, b.leaves - 1)
            } else {
                (false, b.leaves)
            }
        };
        for j in 1..last {
            visits.push((j, if j < first { full(j) } else { vec![row1(j)] }));
        }
        if first == last {
            visits.push((last, vec![row1(last), row2(last), row3(last)]));
        } else {
            visits.push((last, vec![row1(last), row2(last)]));
            for j in (first + 1..last).rev() {
                visits.push((j, vec![row2(j)]));
            }
            visits.push((first, vec![row2(first), row3(first)]));
        }
        for j in first + 1..=m {
            visits.push((j, if j <= last { vec![row3(j)] } else { full(j) }));
        }
    }

    // Second-level internal vertices in the order they are left behind.
    let mut next_internal = vec![0usize; m];
    let mut internals = Vec::new();
    for (j, parts) in &visits {
        for &(is_internal, c) in parts {
            if is_internal {
                let b = &branches[j - 1];
                internals.extend(
                    b.internal[next_internal[j - 1]..next_internal[j - 1] + c]
                        .iter()
                        .copied(),
                );
                next_internal[j - 1] += c;
            }
        }
    }
    if internals.is_empty() {
        return invalid("tree has no vertices at depth 3");
    }

    let mut steps = vec![TransferStep {
        from: 1,
        to: 2,
        leftover: m,
    }];
    for (i, (j, parts)) in visits.iter().enumerate() {
        let to = visits.get(i + 1).map(|v| v.0 + 1).unwrap_or(m + 2);
        let leftover = parts.iter().map(|p| p.1).sum();
        steps.push(TransferStep {
            from: j + 1,
            to,
            leftover,
        });
    }
    for (i, &u) in internals.iter().enumerate().take(internals.len() - 1) {
        steps.push(TransferStep {
            from: m + 2 + i,
            to: m + 3 + i,
            leftover: rt.children[u].len(),
        });
    }
    let n = tree.edge_count();
    trim_walk(&mut steps, n);
    transport(&star_walk(n, &steps)?, tree, root)
}

/// Odd-apex case of the banana labelers: auxiliary chain over the spider of spines, the
/// back-and-forth pass for the even bundles, then the depth-1 plan for the star tips.
fn label_banana_odd(tree: &Tree, shape: &EvenCaterpillarShape) -> Result<VertexLabeling> {
    let banana = &shape.banana;
    let m = banana.spines.len();
    let h = banana.h;
    let counts: Vec<usize> = banana.tips.iter().map(Vec::len).collect();
    let decision = decide_depth1(&Bps::leaves_of(&counts))?;
    let mut unused: Vec<usize> = (0..m).collect();
    let mut branch_order = Vec::with_capacity(m);
    for &c in &decision.sequence {
        let i = unused
            .iter()
            .position(|&b| counts[b] == c)
            .ok_or_else(|| Error::Defect("decided sequence does not match the tips".into()))?;
        branch_order.push(unused.remove(i));
    }
    let mut order = vec![banana.apex];
    for level in 0..=h {
        order.extend(branch_order.iter().map(|&b| banana.spines[b][level]));
    }
    let k = order.len() - m + 1;
    let mut steps: Vec<TransferStep> = (1..k)
        .map(|j| TransferStep {
            from: j,
            to: j + 1,
            leftover: if j == 1 { m } else { 1 },
        })
        .collect();
    let extra = |p: usize| shape.extras[order[p - 1]].len();
    if let Some(i) = (1..k).find(|&p| extra(p) > 0) {
        steps.push(TransferStep {
            from: k,
            to: k - 1,
            leftover: 0,
        });
        for j in (i + 1..k).rev() {
            steps.push(TransferStep {
                from: j,
                to: j - 1,
                leftover: 1,
            });
        }
        steps.push(TransferStep {
            from: i,
            to: i + 1,
            leftover: extra(i),
        });
        for j in i + 1..k {
            steps.push(TransferStep {
                from: j,
                to: j + 1,
                leftover: extra(j) - 1,
            });
        }
    }
    steps.extend(decision.plan.shifted(k - 1).steps);
    let n = tree.edge_count();
    trim_walk(&mut steps, n);
    transport(&star_walk(n, &steps)?, tree, banana.apex)
}

/// Both banana labelers: odd apex degree directly, even apex degree by deleting a branch
/// and attaching it back as a caterpillar.
fn label_banana_shape(tree: &Tree, shape: &EvenCaterpillarShape) -> Result<VertexLabeling> {
    let banana = &shape.banana;
    let m = banana.spines.len();
    if m % 2 == 1 {
        return label_banana_odd(tree, shape);
    }
    let apex = banana.apex;
    let last = m - 1;
    let mut h_keep = vec![apex];
    for &s in &banana.spines[last] {
        h_keep.push(s);
        h_keep.extend(shape.extras[s].iter().copied());
    }
    h_keep.extend(banana.tips[last].iter().copied());
    let in_h: HashSet<usize> = h_keep[1..].iter().copied().collect();
    let t_keep: Vec<usize> = (0..tree.vertex_count())
        .filter(|v| !in_h.contains(v))
        .collect();
    let (t_rest, _) = tree.induced(&t_keep)?;
    let (h_tree, _) = tree.induced(&h_keep)?;
    let new_id: BTreeMap<usize, usize> = t_keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let remap = |vs: &[usize]| -> Vec<usize> { vs.iter().map(|v| new_id[v]).collect() };
    let mut extras = vec![Vec::new(); t_keep.len()];
    for (i, &v) in t_keep.iter().enumerate() {
        extras[i] = remap(&shape.extras[v]);
    }
    let sub = EvenCaterpillarShape {
        banana: BananaShape {
            apex: new_id[&apex],
            h: banana.h,
            spines: banana.spines[..last].iter().map(|s| remap(s)).collect(),
            tips: banana.tips[..last].iter().map(|t| remap(t)).collect(),
        },
        k: shape.k,
        extras,
    };
    let f = label_banana_odd(&t_rest, &sub)?;
    let (_, merged) = attach_caterpillar(&t_rest, &f, new_id[&apex], &h_tree, 0)?;
    // Merged ids: the caterpillar first, then the rest without its apex.
    let mut original: Vec<usize> = h_keep.clone();
    original.extend(t_keep.iter().copied().filter(|&v| v != apex));
    let mut labels = vec![0u64; tree.vertex_count()];
    for (x, &v) in original.iter().enumerate() {
        labels[v] = merged.get(x);
    }
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(tree, &lab) {
        return Err(Error::Defect("banana labeling is not graceful".into()));
    }
    Ok(lab)
}

fn plain_even_shape(tree: &Tree, banana: BananaShape) -> EvenCaterpillarShape {
    EvenCaterpillarShape {
        k: banana.h + 1,
        banana,
        extras: vec![Vec::new(); tree.vertex_count()],
    }
}

/// Graceful labeling of a generalized banana tree.
pub fn label_generalized_banana(tree: &Tree) -> Result<VertexLabeling> {
    let banana = banana_shape(tree)
        .ok_or_else(|| Error::InvalidInput("not a generalized banana tree".into()))?;
    label_banana_shape(tree, &plain_even_shape(tree, banana))
}

/// Graceful labeling of an even-caterpillar banana tree.
pub fn label_even_caterpillar_banana(tree: &Tree) -> Result<VertexLabeling> {
    let shape = even_caterpillar_shape(tree)
        .ok_or_else(|| Error::InvalidInput("not an even-caterpillar banana tree".into()))?;
    label_banana_shape(tree, &shape)
}

/// Whether legs (in descending order) satisfy `m_i <= max(1, log2(n / (2i - 1)) + 1)`.
pub fn spider_powers_condition(legs: &[usize]) -> bool {
    let n: usize = legs.iter().sum();
    legs.iter().enumerate().all(|(i, &len)| {
        len <= 1
            || (len - 1 < usize::BITS as usize
                && (1usize << (len - 1)).saturating_mul(2 * i + 1) <= n)
    })
}

/// The spider with the given legs (sorted into descending order, center 0) labeled with
/// `2^{m_i - 1}(2i - 1), ..., 2i - 1` outward along each long leg, or `None` when the
/// length condition fails.
pub fn label_spider_powers(legs: &[usize]) -> Option<(Tree, VertexLabeling)> {
    let mut legs: Vec<usize> = legs.iter().copied().filter(|&l| l > 0).collect();
    legs.sort_unstable_by(|a, b| b.cmp(a));
    if !spider_powers_condition(&legs) {
        return None;
    }
    let tree = Tree::spider(&legs);
    let n: usize = legs.iter().sum();
    let mut labels = vec![0u64; n + 1];
    let mut used = vec![false; n + 1];
    used[0] = true;
    let mut next = 1;
    let mut short = Vec::new();
    for (i, &len) in legs.iter().enumerate() {
        let odd = (2 * i + 1) as u64;
        if len >= 2 {
            for j in 0..len {
                let l = (1u64 << (len - 1 - j)) * odd;
                labels[next + j] = l;
                used[l as usize] = true;
            }
        } else {
            short.push(next);
        }
        next += len;
    }
    let mut free = (1..=n).filter(|&l| !used[l]);
    for v in short {
        labels[v] = free.next().expect("one free label per short leg") as u64;
    }
    let lab = VertexLabeling::new(labels).ok()?;
    debug_assert!(is_graceful(&tree, &lab));
    Some((tree, lab))
}

/// Leg lengths of a spider (descending) with its center; paths split at the middle.
pub fn spider_legs(tree: &Tree) -> Option<(usize, Vec<usize>)> {
    if !is_spider(tree) || tree.vertex_count() < 2 {
        return None;
    }
    let center = (0..tree.vertex_count())
        .find(|&v| tree.degree(v) >= 3)
        .unwrap_or_else(|| tree.diameter_path()[tree.diameter() / 2]);
    let rt = tree.bfs(center);
    let mut legs: Vec<usize> = rt.children[center]
        .iter()
        .map(|&c| {
            let mut len = 1;
            let mut x = c;
            while let Some(&y) = rt.children[x].first() {
                x = y;
                len += 1;
            }
            len
        })
        .collect();
    legs.sort_unstable_by(|a, b| b.cmp(a));
    Some((center, legs))
}

/// Exact non-negative rational labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLabeling {
    pub labels: Vec<BigRational>,
}

impl Serialize for RationalLabeling {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.labels.iter().map(|x| x.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalLabeling {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let labels = v
            .iter()
            .map(|s| {
                BigRational::from_str(s)
                    .map_err(|e| serde::de::Error::custom(format!("bad rational {s:?}: {e}")))
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(RationalLabeling { labels })
    }
}

impl fmt::Display for RationalLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.labels.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", v.join(" "))
    }
}

impl RationalLabeling {
    /// Injective, non-negative, and `V = E ∪ {0}`.
    pub fn is_labeling_function(&self, tree: &Tree) -> bool {
        if self.labels.len() != tree.vertex_count() || self.labels.iter().any(|x| x.is_negative()) {
            return false;
        }
        let vs: HashSet<&BigRational> = self.labels.iter().collect();
        if vs.len() != self.labels.len() {
            return false;
        }
        let es: HashSet<BigRational> = tree
            .edges()
            .iter()
            .map(|&(a, b)| (&self.labels[a] - &self.labels[b]).abs())
            .collect();
        if es.len() != tree.edge_count() {
            return false;
        }
        let mut with_zero = es;
        with_zero.insert(BigRational::zero());
        with_zero.len() == vs.len() && vs.iter().all(|x| with_zero.contains(*x))
    }
}

fn two_adic(x: &BigInt) -> (BigInt, i64) {
    let mut x = x.clone();
    let mut e = 0;
    let two = BigInt::from(2);
    while !x.is_zero() && x.is_even() {
        x /= &two;
        e += 1;
    }
    (x, e)
}

/// Class under `x ~ y iff x / y` is a power of two, with the exponent within the class.
fn power_class(x: &BigRational) -> ((BigInt, BigInt), i64) {
    let (p, ep) = two_adic(x.numer());
    let (q, eq) = two_adic(x.denom());
    ((p, q), ep - eq)
}

/// The family condition: `g(x) = 2^k g(y)` with `k >= 1` forces `y` below `x` and `x` full.
fn family_condition(rt: &Rooted, tree: &Tree, g: &[Option<BigRational>], deg_h: &[usize]) -> bool {
    let mut classes: BTreeMap<(BigInt, BigInt), Vec<(i64, usize)>> = BTreeMap::new();
    for (v, x) in g.iter().enumerate() {
        if let Some(x) = x.as_ref().filter(|x| x.is_positive()) {
            let (key, e) = power_class(x);
            classes.entry(key).or_default().push((e, v));
        }
    }
    classes.values().all(|members| {
        members.iter().all(|&(ex, x)| {
            members
                .iter()
                .filter(|&&(ey, _)| ex > ey)
                .all(|&(_, y)| rt.is_descendant(y, x) && deg_h[x] == tree.degree(x))
        })
    })
}

/// A labeling function with `g(v) = 0` for a leaf `v`, grown from the edge at `v` by
/// halving (one missing child) or splitting `g(u)` into `q, g(u) - q` (two missing).
pub fn labeling_function(tree: &Tree, v: usize) -> Result<RationalLabeling> {
    if v >= tree.vertex_count() || tree.degree(v) != 1 {
        return invalid(format!("vertex {v} is not a leaf"));
    }
    let rt = tree.bfs(v);
    let n = tree.vertex_count();
    let mut g: Vec<Option<BigRational>> = vec![None; n];
    let mut deg_h = vec![0usize; n];
    let mut keys: HashSet<(BigInt, BigInt)> = HashSet::new();
    let nv = tree.neighbors(v)[0];
    g[v] = Some(BigRational::zero());
    g[nv] = Some(BigRational::one());
    keys.insert(power_class(&BigRational::one()).0);
    deg_h[v] = 1;
    deg_h[nv] = 1;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    while let Some(&u) = rt
        .order
        .iter()
        .find(|&&u| g[u].is_some() && deg_h[u] < tree.degree(u))
    {
        let gu = g[u].clone().unwrap();
        let missing: Vec<usize> = rt.children[u]
            .iter()
            .copied()
            .filter(|&c| g[c].is_none())
            .collect();
        if missing.len() == 1 {
            let w = missing[0];
            let x = &gu * &half;
            keys.insert(power_class(&x).0);
            g[w] = Some(x);
            deg_h[w] = 1;
            deg_h[u] += 1;
        } else {
            let q = choose_split(&gu, &keys)?;
            let r = &gu - &q;
            keys.insert(power_class(&q).0);
            keys.insert(power_class(&r).0);
            g[missing[0]] = Some(q);
            g[missing[1]] = Some(r);
            deg_h[missing[0]] = 1;
            deg_h[missing[1]] = 1;
            deg_h[u] += 2;
        }
        if cfg!(debug_assertions) && !family_condition(&rt, tree, &g, &deg_h) {
            return Err(Error::Defect(
                "labeling-function growth broke the family condition".into(),
            ));
        }
    }
    let labels: Vec<BigRational> = g
        .into_iter()
        .map(|x| x.expect("every vertex labeled"))
        .collect();
    let out = RationalLabeling { labels };
    if !out.is_labeling_function(tree) {
        return Err(Error::Defect(
            "grown function is not a labeling function".into(),
        ));
    }
    Ok(out)
}

/// Picks `q = g·o/2^s` in `(3g/8, 5g/8)`, `q != g/2`, with `q` and `g - q` in fresh
/// power-of-two classes distinct from each other.
fn choose_split(g: &BigRational, keys: &HashSet<(BigInt, BigInt)>) -> Result<BigRational> {
    for s in 1u32..256 {
        let den = BigInt::one() << s;
        let lo = BigInt::from(3) * &den;
        let hi = BigInt::from(5) * &den;
        let mut o = BigInt::one();
        while BigInt::from(8) * &o <= lo {
            o += 2;
        }
        while BigInt::from(8) * &o < hi {
            let frac = BigRational::new(o.clone(), den.clone());
            let q = g * &frac;
            let r = g - &q;
            let (kq, kr) = (power_class(&q).0, power_class(&r).0);
            if q != r && kq != kr && !keys.contains(&kq) && !keys.contains(&kr) {
                return Ok(q);
            }
            o += 2;
        }
    }
    Err(Error::Defect("no admissible split found".into()))
}

fn rrg_rec(tree: &Tree, v: usize) -> Result<Vec<BigUint>> {
    match tree.degree(v) {
        0 => Ok(vec![BigUint::zero()]),
        1 => {
            let g = labeling_function(tree, v)?;
            let lcm = g
                .labels
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            Ok(g.labels
                .iter()
                .map(|x| {
                    (x.numer() * (&lcm / x.denom()))
                        .to_biguint()
                        .expect("labels are non-negative")
                })
                .collect())
        }
        _ => {
            let w = *tree.neighbors(v).last().unwrap();
            let branch = tree.component_without(w, v);
            let in_branch: HashSet<usize> = branch.iter().copied().collect();
            let mut keep2 = vec![v];
            keep2.extend(branch.iter().copied());
            let mut keep1 = vec![v];
            keep1.extend((0..tree.vertex_count()).filter(|x| *x != v && !in_branch.contains(x)));
            let (h1, _) = tree.induced(&keep1)?;
            let (h2, _) = tree.induced(&keep2)?;
            let f1 = rrg_rec(&h1, 0)?;
            let f2 = rrg_rec(&h2, 0)?;
            let scale = f1.iter().max().unwrap() + BigUint::one();
            let mut out = vec![BigUint::zero(); tree.vertex_count()];
            for (i, &x) in keep1.iter().enumerate() {
                out[x] = f1[i].clone();
            }
            for (i, &x) in keep2.iter().enumerate().skip(1) {
                out[x] = &f2[i] * &scale;
            }
            Ok(out)
        }
    }
}

/// Injective with distinct edge labels and `V = E ∪ {0}`.
pub fn is_consistent_rrg(tree: &Tree, f: &VertexLabeling) -> bool {
    let vs: HashSet<u64> = f.labels().iter().copied().collect();
    let es: Vec<u64> = f.edge_labels(tree);
    let eset: HashSet<u64> = es.iter().copied().collect();
    f.len() == tree.vertex_count()
        && eset.len() == es.len()
        && vs.contains(&0)
        && vs.len() == eset.len() + 1
        && eset.iter().all(|e| vs.contains(e))
}

/// A consistent range-relaxed graceful labeling with `f(v) = 0`: a scaled labeling
/// function at a leaf, and branch-by-branch scaling by `max + 1` at higher degree.
pub fn consistent_rrg(tree: &Tree, v: usize) -> Result<VertexLabeling> {
    if v >= tree.vertex_count() {
        return invalid(format!("vertex {v} is not in the tree"));
    }
    let big = rrg_rec(tree, v)?;
    let labels = big
        .iter()
        .map(|x| {
            x.to_u64()
                .ok_or_else(|| Error::Refused("labels exceed 64 bits".into()))
        })
        .collect::<Result<Vec<u64>>>()?;
    let f = VertexLabeling::new(labels)?;
    if !is_consistent_rrg(tree, &f) {
        return Err(Error::Defect("scaled labeling is not consistent".into()));
    }
    Ok(f)
}

/// Attaches `k` leaves at `v` (labeled 0 by `f`) and gives them the labels in
/// `0..=n+k` that `f` leaves unused.
pub fn fill_attached_leaves(
    tree: &Tree,
    v: usize,
    f: &VertexLabeling,
    k: usize,
) -> Result<(Tree, VertexLabeling)> {
    if !is_consistent_rrg(tree, f) || f.get(v) != 0 {
        return contract("labeling must be consistent with 0 at the attachment vertex");
    }
    let top = (tree.edge_count() + k) as u64;
    if f.max_label() > top {
        return contract(format!(
            "{k} leaves are too few for the largest label {}",
            f.max_label()
        ));
    }
    let out = tree.attach_leaves(v, k);
    let used: HashSet<u64> = f.labels().iter().copied().collect();
    let mut labels = f.labels().to_vec();
    labels.extend((0..=top).filter(|l| !used.contains(l)));
    let lab = VertexLabeling::new(labels)?;
    if !is_graceful(&out, &lab) {
        return Err(Error::Defect("filled labeling is not graceful".into()));
    }
    Ok((out, lab))
}

/// The least `N = max(0, max_label - n)` for the consistent labeling at `v`, with the
/// graceful tree obtained by attaching `N` leaves there.
pub fn attach_leaves_graceful(tree: &Tree, v: usize) -> Result<(usize, Tree, VertexLabeling)> {
    let f = consistent_rrg(tree, v)?;
    let n = tree.edge_count() as u64;
    let big_n = f.max_label().saturating_sub(n) as usize;
    let (t, l) = fill_attached_leaves(tree, v, &f, big_n)?;
    Ok((big_n, t, l))
}

/// Labeling theorems that [`match_theorem`] can recognize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "4.1")]
    T41,
    #[serde(rename = "4.2")]
    T42,
    #[serde(rename = "4.3")]
    T43,
    #[serde(rename = "4.4")]
    T44,
    #[serde(rename = "4.5")]
    T45,
    #[serde(rename = "gen-banana")]
    GenBanana,
    #[serde(rename = "even-cat-banana")]
    EvenCatBanana,
    #[serde(rename = "log-spider")]
    LogSpider,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::T41,
        TheoremId::T42,
        TheoremId::T43,
        TheoremId::T44,
        TheoremId::T45,
        TheoremId::GenBanana,
        TheoremId::EvenCatBanana,
        TheoremId::LogSpider,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T41 => "4.1",
            TheoremId::T42 => "4.2",
            TheoremId::T43 => "4.3",
            TheoremId::T44 => "4.4",
            TheoremId::T45 => "4.5",
            TheoremId::GenBanana => "gen-banana",
            TheoremId::EvenCatBanana => "even-cat-banana",
            TheoremId::LogSpider => "log-spider",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<TheoremId> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.trim_start_matches('t').replace('.', "");
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().replace('.', "") == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown theorem {s:?}")))
    }
}

/// A theorem whose hypotheses the tree satisfies, with the data that witnesses them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremMatch {
    pub theorem: TheoremId,
    /// The central vertex, apex or spider center.
    pub root: usize,
    /// Half the diameter for the centered theorems.
    pub radius: Option<usize>,
    /// Children per vertex, listed by level from the root.
    pub child_counts: Option<Vec<Vec<usize>>>,
    pub bps: Option<Bps>,
    pub shape: Option<EvenCaterpillarShape>,
    pub legs: Option<Vec<usize>>,
}

impl TheoremMatch {
    fn new(theorem: TheoremId, root: usize) -> TheoremMatch {
        TheoremMatch {
            theorem,
            root,
            radius: None,
            child_counts: None,
            bps: None,
            shape: None,
            legs: None,
        }
    }
}

/// Leaves at depth `r - 1` have distinct parents, and each has a sibling with a positive
/// even number of children.
fn shallow_leaves_ok(rt: &Rooted, r: usize) -> bool {
    let shallow: Vec<usize> = rt
        .level(r - 1)
        .into_iter()
        .filter(|&x| rt.is_leaf(x))
        .collect();
    let mut parents = HashSet::new();
    shallow.iter().all(|&x| {
        let p = rt.parent[x].expect("non-root");
        parents.insert(p)
            && rt.children[p].iter().any(|&s| {
                s != x && !rt.children[s].is_empty() && rt.children[s].len().is_multiple_of(2)
            })
    })
}

/// Every theorem whose hypotheses hold, with witnesses.
pub fn match_theorem(tree: &Tree) -> Vec<TheoremMatch> {
    let mut out = Vec::new();
    let d = tree.diameter();
    let center = tree.center();
    if d >= 4 && d.is_multiple_of(2) && center.len() == 1 {
        let v = center[0];
        let r = d / 2;
        let rt = tree.bfs(v);
        let all = 0..tree.vertex_count();
        let odd_upto = |lim: usize| {
            all.clone()
                .filter(|&x| rt.depth[x] <= lim)
                .all(|x| rt.children[x].len() % 2 == 1)
        };
        let leaves_at = |ok: &dyn Fn(usize) -> bool| {
            all.clone()
                .filter(|&x| rt.is_leaf(x))
                .all(|x| ok(rt.depth[x]))
        };
        let evens = rt
            .level(r - 1)
            .into_iter()
            .filter(|&x| rt.children[x].len().is_multiple_of(2))
            .count();
        let counts: Vec<Vec<usize>> = (0..r)
            .map(|l| {
                rt.level(l)
                    .into_iter()
                    .map(|x| rt.children[x].len())
                    .collect()
            })
            .collect();
        let witness = |t: TheoremId| {
            let mut w = TheoremMatch::new(t, v);
            w.radius = Some(r);
            w.child_counts = Some(counts.clone());
            w.bps = Some(cut_at(&rt, r - 1).keys[v].clone());
            w
        };
        let only_deep = leaves_at(&|x| x == r);
        let deep_or_shallow = leaves_at(&|x| x == r || x == r - 1) && shallow_leaves_ok(&rt, r);
        if r == 3 && odd_upto(1) {
            if only_deep {
                out.push(witness(TheoremId::T41));
            }
            if deep_or_shallow {
                out.push(witness(TheoremId::T42));
            }
        }
        if odd_upto(r - 2) && evens % 4 != 3 {
            if only_deep {
                out.push(witness(TheoremId::T43));
            }
            if deep_or_shallow {
                out.push(witness(TheoremId::T44));
            }
        }
        let internal_odd = all
            .clone()
            .filter(|&x| !rt.is_leaf(x))
            .all(|x| rt.children[x].len() % 2 == 1);
        if r == 3 && internal_odd && leaves_at(&|x| x == 2 || x == 3) {
            out.push(witness(TheoremId::T45));
        }
    }
    if let Some(b) = banana_shape(tree) {
        let mut w = TheoremMatch::new(TheoremId::GenBanana, b.apex);
        w.shape = Some(plain_even_shape(tree, b));
        out.push(w);
    }
    if let Some(s) = even_caterpillar_shape(tree) {
        let mut w = TheoremMatch::new(TheoremId::EvenCatBanana, s.banana.apex);
        w.shape = Some(s);
        out.push(w);
    }
    if let Some((c, legs)) = spider_legs(tree) {
        if spider_powers_condition(&legs) {
            let mut w = TheoremMatch::new(TheoremId::LogSpider, c);
            w.legs = Some(legs);
            out.push(w);
        }
    }
    out
}

fn find_match(tree: &Tree, theorem: TheoremId) -> Result<TheoremMatch> {
    match_theorem(tree)
        .into_iter()
        .find(|m| m.theorem == theorem)
        .ok_or_else(|| {
            Error::InvalidInput(format!("tree does not satisfy the hypotheses of {theorem}"))
        })
}

/// Labels a diameter-6 tree with strategy `4.1`, `4.2` or `4.5`, with the center labeled 0.
pub fn label_diameter6(tree: &Tree, theorem: TheoremId) -> Result<VertexLabeling> {
    if !matches!(theorem, TheoremId::T41 | TheoremId::T42 | TheoremId::T45) {
        return invalid(format!("{theorem} is not a diameter-6 strategy"));
    }
    let w = find_match(tree, theorem)?;
    label_matched(tree, &w)
}

/// Labels a diameter-2r tree with strategy `4.3` or `4.4`, with the center labeled 0.
pub fn label_diameter2r(tree: &Tree, theorem: TheoremId) -> Result<VertexLabeling> {
    if !matches!(theorem, TheoremId::T43 | TheoremId::T44) {
        return invalid(format!("{theorem} is not a diameter-2r strategy"));
    }
    let w = find_match(tree, theorem)?;
    label_matched(tree, &w)
}

/// Runs the labeler of a match produced by [`match_theorem`] for the same tree.
pub fn label_matched(tree: &Tree, w: &TheoremMatch) -> Result<VertexLabeling> {
    let r = w.radius.unwrap_or(0);
    match w.theorem {
        TheoremId::T41 => label_by_bps(tree, w.root, r, Decider::Depth2, false),
        TheoremId::T42 => label_by_bps(tree, w.root, r, Decider::Depth2, true),
        TheoremId::T43 => label_by_bps(tree, w.root, r, Decider::Large, false),
        TheoremId::T44 => label_by_bps(tree, w.root, r, Decider::Large, true),
        TheoremId::T45 => label_back_and_forth(tree, w.root),
        TheoremId::GenBanana | TheoremId::EvenCatBanana => {
            let shape = w
                .shape
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("match carries no shape".into()))?;
            label_banana_shape(tree, shape)
        }
        TheoremId::LogSpider => {
            let legs = w
                .legs
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("match carries no legs".into()))?;
            let (spider, lab) = label_spider_powers(legs)
                .ok_or_else(|| Error::InvalidInput("legs fail the length condition".into()))?;
            let map = rooted_isomorphism(&spider, 0, tree, w.root)
                .ok_or_else(|| Error::InvalidInput("legs do not describe the tree".into()))?;
            let mut labels = vec![0u64; tree.vertex_count()];
            for (x, &y) in map.iter().enumerate() {
                labels[y] = lab.get(x);
            }
            VertexLabeling::new(labels)
        }
    }
}

/// Labels with the first matching theorem.
pub fn label_auto(tree: &Tree) -> Result<(TheoremId, VertexLabeling)> {
    let w = match_theorem(tree)
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidInput("no labeling theorem applies".into()))?;
    Ok((w.theorem, label_matched(tree, &w)?))
}
