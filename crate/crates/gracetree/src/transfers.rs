//! Leaf and branch transfers, alternating sequences, transferable sets, attainable and
//! nicely attainable count sequences with replayable plans, and leaf ordering.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{classify_labeling, Tree, VertexLabeling};

/// Which template the labels of an alternating sequence follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// `a, b-1, a+1, b-2, ...`
    DescendingGap,
    /// `a, b+1, a-1, b+2, ...`
    AscendingGap,
}

/// Distinct vertices whose labels follow one of the two alternating templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingSequence {
    pub vertices: Vec<usize>,
    pub form: Form,
    pub a: i64,
    pub b: i64,
}

impl AlternatingSequence {
    /// The template label at 1-based position `pos`; position 0 is the imaginary `v_0`
    /// labeled `b`.
    pub fn label_at(&self, pos: usize) -> i64 {
        template(self.form, self.a, self.b, pos)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The vertex at 1-based position `pos`.
    pub fn vertex(&self, pos: usize) -> usize {
        self.vertices[pos - 1]
    }

    /// Whether the labels of `v_2, ...` lie strictly between the parameters.
    pub fn converges(&self) -> bool {
        let (lo, hi) = (self.a.min(self.b), self.a.max(self.b));
        (2..=self.len()).all(|p| {
            let x = self.label_at(p);
            lo < x && x < hi
        })
    }
}

fn template(form: Form, a: i64, b: i64, pos: usize) -> i64 {
    let j = (pos / 2) as i64;
    match (form, pos % 2) {
        (Form::DescendingGap, 1) => a + j,
        (Form::DescendingGap, _) => b - j,
        (Form::AscendingGap, 1) => a - j,
        (Form::AscendingGap, _) => b + j,
    }
}

/// Detects the form and parameters of an alternating sequence.
///
/// Two vertices fit both forms; the convergent reading is chosen.
pub fn make_alternating(
    labeling: &VertexLabeling,
    vertices: &[usize],
) -> Result<AlternatingSequence> {
    if vertices.len() < 2 {
        return invalid(
            "an alternating sequence needs at least two vertices to fix its parameters",
        );
    }
    if vertices.iter().collect::<BTreeSet<_>>().len() != vertices.len() {
        return invalid("alternating sequence vertices must be distinct");
    }
    if let Some(&v) = vertices.iter().find(|&&v| v >= labeling.len()) {
        return invalid(format!("vertex {v} is not labeled"));
    }
    let labels: Vec<i64> = vertices.iter().map(|&v| labeling.get(v) as i64).collect();
    let a = labels[0];
    let mut forms = vec![
        (Form::DescendingGap, labels[1] + 1),
        (Form::AscendingGap, labels[1] - 1),
    ];
    if labels[1] < a {
        forms.reverse();
    }
    for (form, b) in forms {
        if labels
            .iter()
            .enumerate()
            .all(|(i, &x)| template(form, a, b, i + 1) == x)
        {
            return Ok(AlternatingSequence {
                vertices: vertices.to_vec(),
                form,
                a,
                b,
            });
        }
    }
    invalid(format!("labels {labels:?} fit neither alternating form"))
}

/// Leaves adjacent to `v_1` with consecutive labels `c..=d`, listed by increasing label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferableSet {
    pub leaves: Vec<usize>,
    pub c: u64,
    pub d: u64,
}

impl TransferableSet {
    /// Validates the set against the sequence, tree and labeling.
    pub fn new(
        tree: &Tree,
        labeling: &VertexLabeling,
        seq: &AlternatingSequence,
        leaves: &[usize],
    ) -> Result<TransferableSet> {
        if leaves.is_empty() {
            return invalid("a transferable set must be nonempty");
        }
        let mut sorted: Vec<usize> = leaves.to_vec();
        sorted.sort_by_key(|&v| labeling.get(v));
        let c = labeling.get(sorted[0]);
        let d = labeling.get(*sorted.last().unwrap());
        if d - c + 1 != sorted.len() as u64
            || sorted.iter().collect::<BTreeSet<_>>().len() != sorted.len()
        {
            return invalid("transferable leaves must carry consecutive labels");
        }
        if (c + d) as i64 != seq.a + seq.b {
            return invalid(format!("c + d = {} but a + b = {}", c + d, seq.a + seq.b));
        }
        let v1 = seq.vertex(1);
        for &l in &sorted {
            if !tree.has_edge(v1, l) || !tree.is_leaf(l) {
                return invalid(format!("vertex {l} is not a leaf adjacent to v_1"));
            }
        }
        Ok(TransferableSet {
            leaves: sorted,
            c,
            d,
        })
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }
}

/// How a set of moved labels relates to the transfer endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferType {
    /// One consecutive range `k..=k+m` with `k + (k+m) = f(u) + f(v)`.
    First,
    /// Two ranges of equal length `k..=k+m`, `l..=l+m` with `k + l + m = f(u) + f(v)`.
    Second,
    /// Symmetric about `(f(u)+f(v))/2` but neither of the above.
    General,
}

/// Checks the pairing condition: the labels pair up (with at most one middle label)
/// so that each pair sums to `f(u) + f(v)`.
pub fn transfer_type(labels: &[u64], fu: u64, fv: u64) -> Option<TransferType> {
    if labels.is_empty() {
        return None;
    }
    let mut s: Vec<u64> = labels.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let sum = fu + fv;
    let n = s.len();
    for i in 0..n.div_ceil(2) {
        if s[i] + s[n - 1 - i] != sum {
            return None;
        }
    }
    let runs = s.windows(2).filter(|w| w[1] != w[0] + 1).count() + 1;
    Some(match runs {
        1 => TransferType::First,
        2 if n.is_multiple_of(2) => {
            let k = s[0];
            let half = n / 2;
            let l = s[half];
            if s[half - 1] == k + half as u64 - 1 && s[n - 1] == l + half as u64 - 1 {
                TransferType::Second
            } else {
                TransferType::General
            }
        }
        _ => TransferType::General,
    })
}

/// Moves the branches hanging from `u` at `targets` over to `v`.
///
/// Leaves are the one-vertex case. Requires the pairing condition on the target labels.
pub fn apply_transfer(
    tree: &Tree,
    labeling: &VertexLabeling,
    u: usize,
    targets: &[usize],
    v: usize,
) -> Result<Tree> {
    let n = tree.vertex_count();
    if u >= n || v >= n || targets.iter().any(|&t| t >= n) {
        return invalid("transfer names a vertex outside the tree");
    }
    if u == v {
        return invalid("transfer source and target coincide");
    }
    if targets.is_empty() {
        return invalid("nothing to transfer");
    }
    for &t in targets {
        if !tree.has_edge(u, t) {
            return invalid(format!("vertex {t} is not adjacent to {u}"));
        }
        if t == v || tree.component_without(t, u).contains(&v) {
            return invalid(format!("target {v} lies inside the moved branch at {t}"));
        }
    }
    let labels: Vec<u64> = targets.iter().map(|&t| labeling.get(t)).collect();
    if transfer_type(&labels, labeling.get(u), labeling.get(v)).is_none() {
        return Err(Error::TransferRejected(format!(
            "labels {:?} do not pair to f(u) + f(v) = {}",
            labels,
            labeling.get(u) + labeling.get(v)
        )));
    }
    let moved: HashSet<usize> = targets.iter().copied().collect();
    let edges: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .map(|&(x, y)| {
            if x == u && moved.contains(&y) {
                (v, y)
            } else if y == u && moved.contains(&x) {
                (x, v)
            } else {
                (x, y)
            }
        })
        .collect();
    let t = Tree::new(n, &edges)?;
    Ok(match tree.root() {
        Some(r) => t.with_root(r),
        None => t,
    })
}

/// The least number of leaves a transfer `v_i -> v_j` can leave behind, and its parity;
/// any larger count of the same parity is also possible.
pub fn transfer_options(
    seq: &AlternatingSequence,
    i: usize,
    j: usize,
    incoming_from: Option<usize>,
) -> Result<(usize, usize)> {
    let m = seq.len();
    if i == 0 || j == 0 || i > m || j > m {
        return invalid(format!("positions must lie in 1..={m}"));
    }
    if i % 2 == j % 2 {
        return invalid("transfers join positions of different parity");
    }
    let p = incoming_from.unwrap_or(0);
    if incoming_from.is_none() && i != 1 {
        return invalid("only v_1 holds leaves before any transfer");
    }
    if p % 2 == i % 2 {
        return invalid("the incoming transfer must come from the other parity");
    }
    let min = j.abs_diff(p) / 2;
    Ok((min, min % 2))
}

/// Extends a convergent sequence to its maximal alternating extension.
pub fn close_sequence(
    seq: &AlternatingSequence,
    labeling: &VertexLabeling,
) -> Result<AlternatingSequence> {
    if !seq.converges() {
        return invalid("sequence does not converge");
    }
    for (i, &v) in seq.vertices.iter().enumerate() {
        if labeling.get(v) as i64 != seq.label_at(i + 1) {
            return invalid(format!("vertex {v} does not carry the template label"));
        }
    }
    let mut out = seq.clone();
    let mut used: HashSet<usize> = out.vertices.iter().copied().collect();
    let (lo, hi) = (seq.a.min(seq.b), seq.a.max(seq.b));
    loop {
        let x = out.label_at(out.len() + 1);
        if x <= lo || x >= hi {
            break;
        }
        match labeling.vertex_with(x as u64) {
            Some(v) if !used.contains(&v) => {
                used.insert(v);
                out.vertices.push(v);
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Leaves of a transferable set in the order a closed convergent sequence reaches them.
pub fn leaf_order(
    tree: &Tree,
    labeling: &VertexLabeling,
    seq: &AlternatingSequence,
    leaves: &[usize],
) -> Result<Vec<usize>> {
    let set = TransferableSet::new(tree, labeling, seq, leaves)?;
    let (c, d) = (set.c, set.d);
    let count = (d - c + 1) as usize;
    let mut order = Vec::with_capacity(count);
    let (mut lo, mut hi) = (c, d);
    let mut take_high = seq.form == Form::DescendingGap;
    while order.len() < count {
        let l = if take_high {
            hi -= 1;
            hi + 1
        } else {
            lo += 1;
            lo - 1
        };
        order.push(labeling.vertex_with(l).expect("label present"));
        take_high = !take_high;
    }
    Ok(order)
}

/// One step of a plan: 1-based positions and the number of leaves left at `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransferStep {
    pub from: usize,
    pub to: usize,
    pub leftover: usize,
}

/// A context-free, well-behaved sequence of first-type transfers.
///
/// The final holder keeps every leaf still with it; for a nicely attainable plan that is
/// the fresh vertex `v_{m+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransferPlan {
    pub steps: Vec<TransferStep>,
}

impl fmt::Display for TransferPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v1")?;
        for s in &self.steps {
            write!(f, "->v{}", s.to)?;
        }
        Ok(())
    }
}

impl TransferPlan {
    /// The positions visited, starting at `v_1`.
    pub fn visits(&self) -> Vec<usize> {
        let mut v = vec![1];
        v.extend(self.steps.iter().map(|s| s.to));
        v
    }

    /// The largest position touched.
    pub fn span(&self) -> usize {
        self.visits().into_iter().max().unwrap_or(1)
    }

    /// Per-position leaf counts after the plan, for `total` transferable leaves and
    /// `len` positions (grown to the span if needed).
    pub fn result(&self, total: usize, len: usize) -> Result<Vec<usize>> {
        let mut out = vec![0; len.max(self.span())];
        let mut remaining = total;
        let (mut holder, mut prev) = (1usize, 0usize);
        for (k, s) in self.steps.iter().enumerate() {
            let fail = |reason: String| Error::ReplayFailure {
                step: k + 1,
                reason,
            };
            if s.from != holder {
                return Err(fail(format!(
                    "step leaves from v{} but the leaves are at v{holder}",
                    s.from
                )));
            }
            if s.to == 0 || s.to % 2 == s.from % 2 {
                return Err(fail(format!(
                    "v{} -> v{} joins positions of equal parity",
                    s.from, s.to
                )));
            }
            let min = s.to.abs_diff(prev) / 2;
            if s.leftover < min || (s.leftover - min) % 2 != 0 {
                return Err(fail(format!(
                    "leftover {} is not {min} plus an even number",
                    s.leftover
                )));
            }
            if s.leftover >= remaining {
                return Err(fail(format!(
                    "leftover {} leaves nothing to move",
                    s.leftover
                )));
            }
            out[s.from - 1] += s.leftover;
            remaining -= s.leftover;
            prev = holder;
            holder = s.to;
        }
        out[holder - 1] += remaining;
        Ok(out)
    }

    /// Shifts every position by `offset`.
    pub fn shifted(&self, offset: usize) -> TransferPlan {
        TransferPlan {
            steps: self
                .steps
                .iter()
                .map(|s| TransferStep {
                    from: s.from + offset,
                    to: s.to + offset,
                    leftover: s.leftover,
                })
                .collect(),
        }
    }
}

/// Symbols describing classes of counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    /// A positive odd integer.
    O,
    /// A positive even integer.
    E,
    /// Zero.
    Zero,
    /// A non-negative even integer.
    EOrZero,
}

impl Symbol {
    pub fn matches(self, n: usize) -> bool {
        match self {
            Symbol::O => n % 2 == 1,
            Symbol::E => n > 0 && n.is_multiple_of(2),
            Symbol::Zero => n == 0,
            Symbol::EOrZero => n.is_multiple_of(2),
        }
    }

    pub fn parse_list(text: &str) -> Result<Vec<Symbol>> {
        text.split(',')
            .map(|t| match t.trim() {
                "o" => Ok(Symbol::O),
                "e" => Ok(Symbol::E),
                "0" => Ok(Symbol::Zero),
                "e/0" => Ok(Symbol::EOrZero),
                other => invalid(format!("unknown symbol {other:?}")),
            })
            .collect()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::O => "o",
            Symbol::E => "e",
            Symbol::Zero => "0",
            Symbol::EOrZero => "e/0",
        })
    }
}

pub fn match_symbols(counts: &[usize], symbols: &[Symbol]) -> bool {
    counts.len() == symbols.len() && counts.iter().zip(symbols).all(|(&n, s)| s.matches(n))
}

/// A catalog skeleton: visited positions relative to the piece start (1-based).
#[derive(Debug, Clone)]
struct Skeleton {
    /// Number of positions the piece accounts for.
    len: usize,
    visits: Vec<usize>,
    /// Whether the last visit is a dump onto the position after the piece.
    nice: bool,
}

fn nice_skeletons(max_len: usize) -> Vec<Skeleton> {
    let mut out = Vec::new();
    // o
    out.push(Skeleton {
        len: 1,
        visits: vec![1, 2],
        nice: true,
    });
    // e, e, e, e (backwards double-8)
    out.push(Skeleton {
        len: 4,
        visits: vec![1, 2, 3, 4, 1, 2, 3, 4, 5],
        nice: true,
    });
    // e, e/0, o^(2j), e/0, e
    let mut j = 0;
    while 2 * j + 4 <= max_len {
        let mut v = vec![1, 2, 1];
        for i in 2..=j + 2 {
            v.push(2 * i);
            v.push(2 * i - 1);
        }
        v.push(2 * j + 4);
        v.push(2 * j + 5);
        out.push(Skeleton {
            len: 2 * j + 4,
            visits: v,
            nice: true,
        });
        j += 1;
    }
    // e, o, o, o, e
    out.push(Skeleton {
        len: 5,
        visits: vec![1, 4, 3, 2, 5, 6],
        nice: true,
    });
    // e, o, e, e, o, e
    out.push(Skeleton {
        len: 6,
        visits: vec![1, 4, 5, 2, 3, 6, 7],
        nice: true,
    });
    out.retain(|s| s.len <= max_len);
    out
}

fn tail_skeletons(max_len: usize) -> Vec<Skeleton> {
    let mut out = Vec::new();
    out.push(Skeleton {
        len: 1,
        visits: vec![1],
        nice: false,
    });
    // e, e/0, e, o
    out.push(Skeleton {
        len: 4,
        visits: vec![1, 2, 1, 4, 3],
        nice: false,
    });
    // e, e/0, o^(2k)
    let mut k = 0;
    while 2 * k + 2 <= max_len {
        let mut v = vec![1, 2, 1];
        for i in 2..=k + 1 {
            v.push(2 * i);
            v.push(2 * i - 1);
        }
        out.push(Skeleton {
            len: 2 * k + 2,
            visits: v,
            nice: false,
        });
        k += 1;
    }
    // Nicely attainable pieces with the final dump removed.
    for s in nice_skeletons(max_len) {
        let mut v = s.visits.clone();
        v.pop();
        if v.len() > 1 {
            out.push(Skeleton {
                len: s.len,
                visits: v,
                nice: false,
            });
        }
    }
    // e, ..., e out and back
    for k in 2..=max_len {
        let mut v: Vec<usize> = (1..=k).collect();
        v.extend((1..k).rev());
        out.push(Skeleton {
            len: k,
            visits: v,
            nice: false,
        });
    }
    out.retain(|s| s.len <= max_len);
    out
}

/// Assigns leftovers to a skeleton for the given local counts, or `None`.
fn solve_skeleton(sk: &Skeleton, counts: &[usize]) -> Option<Vec<usize>> {
    let v = &sk.visits;
    let steps = v.len() - 1;
    let mut mins = Vec::with_capacity(steps);
    for t in 0..steps {
        let prev = if t == 0 { 0 } else { v[t - 1] };
        let to = v[t + 1];
        if to % 2 == v[t] % 2 || prev % 2 == v[t] % 2 {
            return None;
        }
        mins.push(to.abs_diff(prev) / 2);
    }
    let final_pos = if sk.nice {
        None
    } else {
        Some(*v.last().unwrap())
    };
    let mut leftovers = mins.clone();
    for x in 1..=sk.len {
        let visits: Vec<usize> = (0..steps).filter(|&t| v[t] == x).collect();
        let need: usize = visits.iter().map(|&t| mins[t]).sum();
        let n = counts[x - 1];
        if final_pos == Some(x) {
            if n < need + 1 {
                return None;
            }
        } else if visits.is_empty() {
            if n != 0 {
                return None;
            }
        } else {
            if n < need || !(n - need).is_multiple_of(2) {
                return None;
            }
            leftovers[visits[0]] += n - need;
        }
    }
    Some(leftovers)
}

fn skeleton_plan(sk: &Skeleton, leftovers: &[usize], offset: usize) -> Vec<TransferStep> {
    (0..leftovers.len())
        .map(|t| TransferStep {
            from: sk.visits[t] + offset,
            to: sk.visits[t + 1] + offset,
            leftover: leftovers[t],
        })
        .collect()
}

/// Catalog-driven planner: nicely attainable pieces chained by their dumps, closed by an
/// attainable tail (or, in nice mode, by a final dump onto `v_{m+1}`).
fn catalog_plan(counts: &[usize], nicely: bool) -> Option<TransferPlan> {
    let m = counts.len();
    let suffix: Vec<usize> = {
        let mut s = vec![0; m + 1];
        for i in (0..m).rev() {
            s[i] = s[i + 1] + counts[i];
        }
        s
    };
    let nice = nice_skeletons(m);
    let tails = tail_skeletons(m);
    let mut memo: HashMap<usize, Option<Vec<TransferStep>>> = HashMap::new();
    fn go(
        pos: usize,
        counts: &[usize],
        suffix: &[usize],
        nicely: bool,
        nice: &[Skeleton],
        tails: &[Skeleton],
        memo: &mut HashMap<usize, Option<Vec<TransferStep>>>,
    ) -> Option<Vec<TransferStep>> {
        if let Some(r) = memo.get(&pos) {
            return r.clone();
        }
        let m = counts.len();
        let mut best = None;
        let offset = pos;
        // Nicely attainable pieces first, then attainable tails.
        'outer: for sk in nice
            .iter()
            .chain(if nicely { [].iter() } else { tails.iter() })
        {
            let end = pos + sk.len;
            if end > m {
                continue;
            }
            if sk.nice {
                let rest = suffix[end];
                if nicely {
                    if end != m && rest == 0 {
                        continue;
                    }
                } else if rest == 0 {
                    continue;
                }
            } else if suffix[end] != 0 {
                continue;
            }
            let Some(lo) = solve_skeleton(sk, &counts[pos..end]) else {
                continue;
            };
            let mut steps = skeleton_plan(sk, &lo, offset);
            if sk.nice && end < m {
                match go(end, counts, suffix, nicely, nice, tails, memo) {
                    Some(rest) => steps.extend(rest),
                    None => continue 'outer,
                }
            }
            best = Some(steps);
            break;
        }
        memo.insert(pos, best.clone());
        best
    }
    if m == 0 {
        return if nicely {
            None
        } else {
            Some(TransferPlan::default())
        };
    }
    if !nicely && suffix[0] == 0 {
        return Some(TransferPlan::default());
    }
    go(0, counts, &suffix, nicely, &nice, &tails, &mut memo).map(|steps| TransferPlan { steps })
}

/// Outcome of a budgeted plan search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(TransferPlan),
    /// Every plan within the step bound was tried.
    Exhausted,
    /// The node budget ran out first.
    Inconclusive,
}

type FailKey = (usize, usize, Vec<usize>, usize);

struct PlanSearch {
    nicely: bool,
    budget: u64,
    nodes: u64,
    failed: HashSet<FailKey>,
    out: Vec<TransferStep>,
}

impl PlanSearch {
    /// `Some(true)` on success, `Some(false)` on exhaustion, `None` when out of budget.
    fn dfs(
        &mut self,
        i: usize,
        p: usize,
        needs: &mut Vec<usize>,
        remaining: usize,
        steps_left: usize,
    ) -> Option<bool> {
        let m = needs.len();
        if !self.nicely && needs[i - 1] == remaining && remaining >= 1 {
            return Some(true);
        }
        if steps_left == 0 {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let key = (i, p, needs.clone(), steps_left);
        if self.failed.contains(&key) {
            return Some(false);
        }
        let mut targets: Vec<usize> = (1..=m).filter(|&j| j % 2 != i % 2).collect();
        if self.nicely && i == m {
            targets.push(m + 1);
        }
        for j in targets {
            let min = j.abs_diff(p) / 2;
            let cap = needs[i - 1].min(remaining.saturating_sub(1));
            let mut l = min;
            while l <= cap {
                if j == m + 1 {
                    // The dump: everything else must already be in place.
                    let after = needs[i - 1] - l;
                    if after == 0 && needs.iter().enumerate().all(|(x, &n)| x == i - 1 || n == 0) {
                        self.out.push(TransferStep {
                            from: i,
                            to: j,
                            leftover: l,
                        });
                        return Some(true);
                    }
                } else {
                    needs[i - 1] -= l;
                    self.out.push(TransferStep {
                        from: i,
                        to: j,
                        leftover: l,
                    });
                    let r = self.dfs(j, i, needs, remaining - l, steps_left - 1);
                    if r != Some(false) {
                        return r;
                    }
                    self.out.pop();
                    needs[i - 1] += l;
                }
                l += 2;
            }
        }
        self.failed.insert(key);
        Some(false)
    }
}

/// Exhaustive search over well-behaved first-type plans of at most `2m` steps (plus the
/// dump in nice mode), independent of the catalog.
pub fn search_plan_bounded(counts: &[usize], nicely: bool, budget: u64) -> SearchOutcome {
    let m = counts.len();
    if m == 0 {
        return SearchOutcome::Exhausted;
    }
    let total: usize = counts.iter().sum();
    if !nicely && total == 0 {
        return SearchOutcome::Found(TransferPlan::default());
    }
    let mut search = PlanSearch {
        nicely,
        budget,
        nodes: 0,
        failed: HashSet::new(),
        out: Vec::new(),
    };
    let mut needs = counts.to_vec();
    let remaining = if nicely { total + 1 } else { total };
    match search.dfs(1, 0, &mut needs, remaining, 2 * m + usize::from(nicely)) {
        Some(true) => SearchOutcome::Found(TransferPlan { steps: search.out }),
        Some(false) => SearchOutcome::Exhausted,
        None => SearchOutcome::Inconclusive,
    }
}

fn search_plan(counts: &[usize], nicely: bool) -> Option<TransferPlan> {
    match search_plan_bounded(counts, nicely, u64::MAX) {
        SearchOutcome::Found(p) => Some(p),
        _ => None,
    }
}

/// Which planner produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanRoute {
    Catalog,
    Search,
}

/// A plan with result exactly `counts`, or `None`.
pub fn plan_attainable(counts: &[usize]) -> Option<TransferPlan> {
    plan_attainable_routed(counts).map(|(p, _)| p)
}

pub fn plan_attainable_routed(counts: &[usize]) -> Option<(TransferPlan, PlanRoute)> {
    if let Some(p) = catalog_plan(counts, false) {
        return Some((p, PlanRoute::Catalog));
    }
    search_plan(counts, false).map(|p| (p, PlanRoute::Search))
}

/// A plan with result `counts` followed by a positive dump onto `v_{m+1}`, or `None`.
pub fn plan_nicely_attainable(counts: &[usize]) -> Option<TransferPlan> {
    plan_nicely_attainable_routed(counts).map(|(p, _)| p)
}

pub fn plan_nicely_attainable_routed(counts: &[usize]) -> Option<(TransferPlan, PlanRoute)> {
    if let Some(p) = catalog_plan(counts, true) {
        return Some((p, PlanRoute::Catalog));
    }
    search_plan(counts, true).map(|p| (p, PlanRoute::Search))
}

/// Executes a plan in a concrete context, checking gracefulness after every step.
pub fn replay_plan(
    tree: &Tree,
    labeling: &VertexLabeling,
    seq: &AlternatingSequence,
    leaves: &TransferableSet,
    plan: &TransferPlan,
) -> Result<Tree> {
    let mut t = tree.clone();
    let (mut c, mut d) = (leaves.c as i64, leaves.d as i64);
    let (mut holder, mut prev) = (1usize, 0usize);
    for (k, s) in plan.steps.iter().enumerate() {
        let fail = |reason: String| Error::ReplayFailure {
            step: k + 1,
            reason,
        };
        if s.from != holder {
            return Err(fail(format!("leaves are at v{holder}, not v{}", s.from)));
        }
        if s.to == 0 || s.to > seq.len() {
            return Err(fail(format!(
                "v{} is outside the alternating sequence",
                s.to
            )));
        }
        let delta = seq.label_at(s.to) - seq.label_at(prev);
        let l = s.leftover as i64;
        let size = d - c + 1;
        if l < delta.abs() || (l + delta) % 2 != 0 || l >= size {
            return Err(fail(format!(
                "cannot leave {l} of {size} leaves moving v{} -> v{}",
                s.from, s.to
            )));
        }
        let r = (l + delta) / 2;
        let q = (l - delta) / 2;
        let (lo, hi) = (c + r, d - q);
        let moved: Vec<usize> = (lo..=hi)
            .map(|x| {
                labeling
                    .vertex_with(x as u64)
                    .ok_or_else(|| fail(format!("no vertex labeled {x}")))
            })
            .collect::<Result<_>>()?;
        t = apply_transfer(&t, labeling, seq.vertex(s.from), &moved, seq.vertex(s.to))
            .map_err(|e| fail(e.to_string()))?;
        if !classify_labeling(&t, labeling)?.is_graceful {
            return Err(fail("labeling stopped being graceful".into()));
        }
        c = lo;
        d = hi;
        prev = holder;
        holder = s.to;
    }
    Ok(t)
}

/// A concrete setting for replaying plans.
#[derive(Debug, Clone)]
pub struct Context {
    pub tree: Tree,
    pub labeling: VertexLabeling,
    pub seq: AlternatingSequence,
    pub leaves: TransferableSet,
}

impl Context {
    /// How many of the original transferable leaves sit at each sequence vertex of `t`.
    pub fn census(&self, t: &Tree) -> Vec<usize> {
        let set: HashSet<usize> = self.leaves.leaves.iter().copied().collect();
        self.seq
            .vertices
            .iter()
            .map(|&v| {
                t.neighbors(v)
                    .iter()
                    .filter(|x| set.contains(x) && t.is_leaf(**x))
                    .count()
            })
            .collect()
    }
}

/// A labeled star with an alternating sequence of `m` vertices starting at the center and
/// `transferable` leaves adjacent to it, plus `pad` bystander pairs. With `ascending` the
/// complementary labeling is used, which flips the form.
pub fn star_context(m: usize, transferable: usize, pad: usize, ascending: bool) -> Result<Context> {
    if m == 0 || transferable == 0 {
        return invalid("a context needs a sequence vertex and a transferable leaf");
    }
    // Sequence labels 0, L, 1, L-1, ... use `lows` small and `highs` large leaves.
    let lows = (m - 1) / 2;
    let highs = m / 2;
    let bystander = usize::from(highs > lows);
    let leaves_total = lows + highs + bystander + transferable + 2 * pad;
    let tree = Tree::star(leaves_total);
    let n = leaves_total as u64;
    let base: Vec<u64> = (0..=n).collect();
    let labeling = if ascending {
        VertexLabeling::new(base.iter().map(|&x| n - x).collect())?
    } else {
        VertexLabeling::new(base)?
    };
    let seq_labels: Vec<u64> = (1..=m)
        .map(|p| {
            let x = template(Form::DescendingGap, 0, n as i64 + 1, p) as u64;
            if ascending {
                n - x
            } else {
                x
            }
        })
        .collect();
    let vertices: Vec<usize> = seq_labels
        .iter()
        .map(|&l| labeling.vertex_with(l).unwrap())
        .collect();
    let seq = make_alternating(&labeling, &vertices).or_else(|_| {
        let form = if ascending {
            Form::AscendingGap
        } else {
            Form::DescendingGap
        };
        let a = labeling.get(vertices[0]) as i64;
        let b = if ascending {
            a - n as i64 - 1
        } else {
            n as i64 + 1
        };
        Ok::<_, Error>(AlternatingSequence {
            vertices: vertices.clone(),
            form,
            a,
            b,
        })
    })?;
    let seq = fix_single(seq, &labeling, ascending, n)?;
    let lo = lows as u64 + bystander as u64 + pad as u64 + 1;
    let hi = lo + transferable as u64 - 1;
    let labels: Vec<u64> = (lo..=hi)
        .map(|x| if ascending { n - x } else { x })
        .collect();
    let set: Vec<usize> = labels
        .iter()
        .map(|&l| labeling.vertex_with(l).unwrap())
        .collect();
    let leaves = TransferableSet::new(&tree, &labeling, &seq, &set)?;
    Ok(Context {
        tree,
        labeling,
        seq,
        leaves,
    })
}

/// With one sequence vertex the parameters are set by the star itself.
fn fix_single(
    seq: AlternatingSequence,
    labeling: &VertexLabeling,
    ascending: bool,
    n: u64,
) -> Result<AlternatingSequence> {
    if seq.len() > 1 {
        return Ok(seq);
    }
    let a = labeling.get(seq.vertices[0]) as i64;
    Ok(if ascending {
        AlternatingSequence {
            form: Form::AscendingGap,
            a,
            b: a - n as i64 - 1,
            ..seq
        }
    } else {
        AlternatingSequence {
            form: Form::DescendingGap,
            a,
            b: n as i64 + 1,
            ..seq
        }
    })
}

/// Every result reachable by well-behaved first-type plans in the tight star context for
/// `m` positions and `total` leaves, found by simulating label ranges directly. With
/// `nicely`, the context has `m + 1` positions and only plans ending with a first visit of
/// `v_{m+1}` count (reported without the dump entry).
pub fn brute_force_results(m: usize, total: usize, nicely: bool) -> Result<BTreeSet<Vec<usize>>> {
    let positions = if nicely { m + 1 } else { m };
    let ctx = star_context(positions, total, 0, false)?;
    let label = |p: usize| -> i64 {
        if p == 0 {
            ctx.seq.b
        } else {
            ctx.labeling.get(ctx.seq.vertex(p)) as i64
        }
    };
    let mut seen: HashSet<(usize, usize, i64, i64, Vec<usize>, bool)> = HashSet::new();
    let mut out = BTreeSet::new();
    let mut stack = vec![(
        1usize,
        0usize,
        ctx.leaves.c as i64,
        ctx.leaves.d as i64,
        vec![0usize; positions],
        false,
    )];
    while let Some(state) = stack.pop() {
        if !seen.insert(state.clone()) {
            continue;
        }
        let (i, p, c, d, kept, dumped) = state;
        let size = (d - c + 1) as usize;
        let mut fin = kept.clone();
        fin[i - 1] += size;
        if dumped {
            fin.truncate(m);
            out.insert(fin);
            continue;
        }
        if !nicely {
            out.insert(fin);
        }
        let _ = p;
        let fi = label(i);
        for j in 1..=positions {
            if j % 2 == i % 2 {
                continue;
            }
            if nicely && j == m + 1 && i != m {
                continue;
            }
            if nicely && j == m + 1 && kept[m] != 0 {
                continue;
            }
            let target = fi + label(j);
            for x in c..=d {
                let y = target - x;
                if y < x || y > d {
                    continue;
                }
                let mut k = kept.clone();
                k[i - 1] += size - (y - x + 1) as usize;
                stack.push((j, i, x, y, k, nicely && j == m + 1));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::label_star;

    fn lab(v: &[u64]) -> VertexLabeling {
        VertexLabeling::new(v.to_vec()).unwrap()
    }

    #[test]
    fn alternating_examples() {
        let f = lab(&[2, 10, 3, 9, 4]);
        let s = make_alternating(&f, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!((s.form, s.a, s.b), (Form::DescendingGap, 2, 11));
        let star = label_star(9);
        let s = make_alternating(&star, &[0, 9, 1, 8]).unwrap();
        assert_eq!((s.a, s.b), (0, 10));
        assert!(make_alternating(&lab(&[5, 6]), &[0, 0]).is_err());
        assert!(make_alternating(&lab(&[0, 9, 2]), &[0, 1, 2]).is_err());
    }

    #[test]
    fn transfer_examples() {
        let t = Tree::star(9);
        let f = label_star(9);
        let moved: Vec<usize> = (1..=8).collect();
        let t2 = apply_transfer(&t, &f, 0, &moved, 9).unwrap();
        assert!(t2.has_edge(0, 9) && t2.has_edge(9, 1) && !t2.has_edge(0, 1));
        assert!(classify_labeling(&t2, &f).unwrap().is_graceful);
        assert!(matches!(
            apply_transfer(&t, &f, 0, &[1, 7], 9),
            Err(Error::TransferRejected(_))
        ));
        // Single-leaf condition 2 f(u1) = f(u) + f(v).
        let t10 = Tree::star(10);
        let f10 = label_star(10);
        assert!(apply_transfer(&t10, &f10, 0, &[5], 10).is_ok());
        assert!(apply_transfer(&t10, &f10, 0, &[4], 10).is_err());
    }

    #[test]
    fn transfer_types() {
        assert_eq!(
            transfer_type(&[1, 2, 3, 4, 5, 6, 7, 8], 0, 9),
            Some(TransferType::First)
        );
        assert_eq!(
            transfer_type(&[1, 2, 7, 8], 0, 9),
            Some(TransferType::Second)
        );
        assert_eq!(
            transfer_type(&[1, 3, 6, 8], 0, 9),
            Some(TransferType::General)
        );
        assert_eq!(transfer_type(&[1, 7], 0, 9), None);
    }

    #[test]
    fn options_examples() {
        let f = label_star(9);
        let s = make_alternating(&f, &[0, 9, 1, 8]).unwrap();
        assert_eq!(transfer_options(&s, 1, 2, None).unwrap(), (1, 1));
        assert_eq!(transfer_options(&s, 1, 4, None).unwrap(), (2, 0));
        assert_eq!(transfer_options(&s, 4, 3, Some(1)).unwrap(), (1, 1));
        assert!(transfer_options(&s, 1, 3, None).is_err());
    }

    #[test]
    fn closure_examples() {
        let f = lab(&[2, 10, 3, 9, 4, 8, 5, 7, 6, 0, 1, 11]);
        let s = make_alternating(&f, &[0, 1, 2, 3, 4]).unwrap();
        let c = close_sequence(&s, &f).unwrap();
        let labels: Vec<u64> = c.vertices.iter().map(|&v| f.get(v)).collect();
        assert_eq!(labels, vec![2, 10, 3, 9, 4, 8, 5, 7, 6]);
        assert_eq!(close_sequence(&c, &f).unwrap(), c);
        let star = label_star(9);
        let s = make_alternating(&star, &[0, 9]).unwrap();
        let c = close_sequence(&s, &star).unwrap();
        let labels: Vec<u64> = c.vertices.iter().map(|&v| star.get(v)).collect();
        assert_eq!(labels, vec![0, 9, 1, 8, 2, 7, 3, 6, 4, 5]);
    }

    #[test]
    fn leaf_order_examples() {
        let t = Tree::star(8);
        let f = label_star(8);
        let s = make_alternating(&f, &[0, 8]).unwrap();
        let leaves: Vec<usize> = (1..=8).collect();
        let order = leaf_order(&t, &f, &s, &leaves).unwrap();
        let labels: Vec<u64> = order.iter().map(|&v| f.get(v)).collect();
        assert_eq!(labels, vec![8, 1, 7, 2, 6, 3, 5, 4]);
        let closed = close_sequence(&s, &f).unwrap();
        assert_eq!(order, closed.vertices[closed.len() - 8..].to_vec());
        let t9 = Tree::star(9);
        let f9 = label_star(9);
        let s9 = make_alternating(&f9, &[0, 9]).unwrap();
        assert_eq!(leaf_order(&t9, &f9, &s9, &[5]).unwrap(), vec![5]);
        assert!(leaf_order(&t9, &f9, &s9, &[4]).is_err());
        // Complemented star: center labeled 9, sequence 9, 1, 8, ... has the ascending form.
        let g = lab(&(0..=9).map(|x| 9 - x).collect::<Vec<_>>());
        let s = make_alternating(&g, &[0, 8]).unwrap();
        assert_eq!((s.form, s.a, s.b), (Form::AscendingGap, 9, 0));
        let leaves: Vec<usize> = (3..=6).map(|l| g.vertex_with(l).unwrap()).collect();
        let order = leaf_order(&t9, &g, &s, &leaves).unwrap();
        let labels: Vec<u64> = order.iter().map(|&v| g.get(v)).collect();
        assert_eq!(labels, vec![3, 6, 4, 5]);
    }

    #[test]
    fn catalog_examples() {
        let p = plan_nicely_attainable(&[5]).unwrap();
        assert_eq!(p.visits(), vec![1, 2]);
        let p = plan_attainable(&[2, 2, 2, 2]).unwrap();
        assert_eq!(p.visits(), vec![1, 2, 3, 4, 1, 2, 3, 4]);
        let p = plan_attainable(&[2, 4, 2, 3]).unwrap();
        assert_eq!(p.visits(), vec![1, 2, 1, 4, 3]);
        let p = plan_nicely_attainable(&[2, 3, 1, 3, 2]).unwrap();
        assert_eq!(p.visits(), vec![1, 4, 3, 2, 5, 6]);
        let p = plan_nicely_attainable(&[2, 1, 2, 2, 1, 2]).unwrap();
        assert_eq!(p.visits(), vec![1, 4, 5, 2, 3, 6, 7]);
        let p = plan_nicely_attainable(&[2, 0, 0, 2]).unwrap();
        assert_eq!(p.visits(), vec![1, 2, 1, 4, 3, 4, 5]);
        assert_eq!(p.result(5, 5).unwrap(), vec![2, 0, 0, 2, 1]);
    }

    #[test]
    fn symbols() {
        let s = Symbol::parse_list("e,e/0,e,o").unwrap();
        assert!(match_symbols(&[2, 0, 4, 3], &s));
        assert!(!match_symbols(&[2, 1], &Symbol::parse_list("e,e").unwrap()));
        assert!(!match_symbols(&[0], &[Symbol::E]));
    }

    #[test]
    fn replay_star_examples() {
        let ctx = star_context(3, 9, 0, false).unwrap();
        let p = plan_attainable(&[3, 1, 5]).unwrap();
        let t = replay_plan(&ctx.tree, &ctx.labeling, &ctx.seq, &ctx.leaves, &p).unwrap();
        assert_eq!(ctx.census(&t), vec![3, 1, 5]);
        let t0 = replay_plan(
            &ctx.tree,
            &ctx.labeling,
            &ctx.seq,
            &ctx.leaves,
            &TransferPlan::default(),
        )
        .unwrap();
        assert_eq!(t0, ctx.tree);
        let ctx = star_context(4, 8, 0, false).unwrap();
        assert_eq!(ctx.tree.edge_count(), 12);
        let p = plan_attainable(&[2, 2, 2, 2]).unwrap();
        let t = replay_plan(&ctx.tree, &ctx.labeling, &ctx.seq, &ctx.leaves, &p).unwrap();
        assert_eq!(ctx.census(&t), vec![2, 2, 2, 2]);
    }

    #[test]
    fn planner_matches_brute_force() {
        for m in 1..=5 {
            for total in 1..=9 {
                let reachable = brute_force_results(m, total, false).unwrap();
                for counts in compositions(total, m) {
                    let planned = plan_attainable(&counts);
                    assert_eq!(planned.is_some(), reachable.contains(&counts), "{counts:?}");
                    if let Some(p) = planned {
                        assert_eq!(p.result(total, m).unwrap(), counts);
                    }
                }
            }
        }
    }

    #[test]
    fn nice_planner_matches_brute_force() {
        for m in 1..=4 {
            for total in 0..=8 {
                let reachable = brute_force_results(m, total + 1, true).unwrap();
                for counts in compositions(total, m) {
                    let planned = plan_nicely_attainable(&counts);
                    assert_eq!(planned.is_some(), reachable.contains(&counts), "{counts:?}");
                }
            }
        }
    }

    fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![total]];
        }
        let mut out = Vec::new();
        for first in 0..=total {
            for mut rest in compositions(total - first, parts - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
}
