//! Blockwise permutable sequences (BPS): containment, and attainability deciders for
//! depth 1, odd depth 2 and odd BPS of any depth via endings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{contract, invalid, Error, Result};
use crate::transfers::{plan_attainable, search_plan_bounded, SearchOutcome, TransferPlan};

/// A count, or an unordered collection of BPS. Children are kept sorted so equal BPS
/// compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bps {
    Leaf(usize),
    Node(Vec<Bps>),
}

impl Bps {
    pub fn node(mut children: Vec<Bps>) -> Bps {
        children.sort();
        Bps::Node(children)
    }

    pub fn leaves_of(values: &[usize]) -> Bps {
        Bps::node(values.iter().map(|&v| Bps::Leaf(v)).collect())
    }

    pub fn depth(&self) -> usize {
        match self {
            Bps::Leaf(_) => 0,
            Bps::Node(ch) => 1 + ch.iter().map(Bps::depth).max().unwrap_or(0),
        }
    }

    /// Every node has an odd number of children.
    pub fn is_odd(&self) -> bool {
        match self {
            Bps::Leaf(_) => true,
            Bps::Node(ch) => ch.len() % 2 == 1 && ch.iter().all(Bps::is_odd),
        }
    }

    /// The integers in some contained order.
    pub fn values(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_values(&mut out);
        out
    }

    fn collect_values(&self, out: &mut Vec<usize>) {
        match self {
            Bps::Leaf(n) => out.push(*n),
            Bps::Node(ch) => ch.iter().for_each(|c| c.collect_values(out)),
        }
    }

    /// Number of integers.
    pub fn len(&self) -> usize {
        match self {
            Bps::Leaf(_) => 1,
            Bps::Node(ch) => ch.iter().map(Bps::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of the integers.
    pub fn total(&self) -> usize {
        self.values().iter().sum()
    }

    /// Number of even integers, zeros included.
    pub fn even_count(&self) -> usize {
        self.values().iter().filter(|&&v| v % 2 == 0).count()
    }

    pub fn zero_count(&self) -> usize {
        self.values().iter().filter(|&&v| v == 0).count()
    }

    /// Whether `seq` is one of the contained sequences.
    pub fn contains(&self, seq: &[usize]) -> bool {
        if seq.len() != self.len() {
            return false;
        }
        match self {
            Bps::Leaf(n) => seq == [*n],
            Bps::Node(ch) => {
                let mut used = vec![false; ch.len()];
                contains_rec(ch, &mut used, seq)
            }
        }
    }
}

fn contains_rec(ch: &[Bps], used: &mut [bool], seq: &[usize]) -> bool {
    if seq.is_empty() {
        return used.iter().all(|&u| u);
    }
    for i in 0..ch.len() {
        if used[i] || (i > 0 && !used[i - 1] && ch[i - 1] == ch[i]) {
            continue;
        }
        let l = ch[i].len();
        if l <= seq.len() && ch[i].contains(&seq[..l]) {
            used[i] = true;
            if contains_rec(ch, used, &seq[l..]) {
                used[i] = false;
                return true;
            }
            used[i] = false;
        }
    }
    false
}

impl fmt::Display for Bps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bps::Leaf(n) => write!(f, "{n}"),
            Bps::Node(ch) => {
                write!(f, "(")?;
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for Bps {
    type Err = Error;

    fn from_str(text: &str) -> Result<Bps> {
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let b = parse_bps(&chars, &mut pos)?;
        skip_ws(&chars, &mut pos);
        if pos != chars.len() {
            return invalid(format!("unexpected {:?} at column {}", chars[pos], pos + 1));
        }
        Ok(b)
    }
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_bps(chars: &[char], pos: &mut usize) -> Result<Bps> {
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => invalid(format!("expected a BPS at column {}", *pos + 1)),
        Some('(') => {
            *pos += 1;
            let mut children = vec![parse_bps(chars, pos)?];
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    Some(',') => {
                        *pos += 1;
                        children.push(parse_bps(chars, pos)?);
                    }
                    Some(')') => {
                        *pos += 1;
                        return Ok(Bps::node(children));
                    }
                    Some(c) => {
                        return invalid(format!(
                            "expected ',' or ')' but found {c:?} at column {}",
                            *pos + 1
                        ))
                    }
                    None => return invalid(format!("unclosed '(' at column {}", *pos + 1)),
                }
            }
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while *pos < chars.len() && chars[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let s: String = chars[start..*pos].iter().collect();
            s.parse().map(Bps::Leaf).map_err(|_| {
                Error::InvalidInput(format!("count too large at column {}", start + 1))
            })
        }
        Some(c) => invalid(format!("unexpected {c:?} at column {}", *pos + 1)),
    }
}

impl Serialize for Bps {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bps {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Bps, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every contained sequence, once each. Fails if there are more than `cap`.
pub fn bps_contains_capped(b: &Bps, cap: usize) -> Result<BTreeSet<Vec<usize>>> {
    match b {
        Bps::Leaf(n) => Ok(BTreeSet::from([vec![*n]])),
        Bps::Node(ch) => {
            let sets: Vec<Vec<Vec<usize>>> = ch
                .iter()
                .map(|c| bps_contains_capped(c, cap).map(|s| s.into_iter().collect()))
                .collect::<Result<_>>()?;
            let mut out = BTreeSet::new();
            let mut order: Vec<usize> = Vec::with_capacity(ch.len());
            let mut used = vec![false; ch.len()];
            permute_children(ch, &sets, &mut used, &mut order, &mut out, cap)?;
            Ok(out)
        }
    }
}

fn permute_children(
    ch: &[Bps],
    sets: &[Vec<Vec<usize>>],
    used: &mut [bool],
    order: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    if order.len() == ch.len() {
        let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
        for &i in order.iter() {
            let mut next = Vec::with_capacity(partial.len() * sets[i].len());
            for p in &partial {
                for s in &sets[i] {
                    let mut q = p.clone();
                    q.extend_from_slice(s);
                    next.push(q);
                }
            }
            partial = next;
            if partial.len() > cap {
                return invalid(format!("more than {cap} contained sequences"));
            }
        }
        out.extend(partial);
        if out.len() > cap {
            return invalid(format!("more than {cap} contained sequences"));
        }
        return Ok(());
    }
    for i in 0..ch.len() {
        if used[i] || (i > 0 && !used[i - 1] && ch[i - 1] == ch[i]) {
            continue;
        }
        used[i] = true;
        order.push(i);
        permute_children(ch, sets, used, order, out, cap)?;
        order.pop();
        used[i] = false;
    }
    Ok(())
}

/// Default cap on the number of contained sequences materialized at once.
pub const CONTAINS_CAP: usize = 1_000_000;

pub fn bps_contains(b: &Bps) -> Result<BTreeSet<Vec<usize>>> {
    bps_contains_capped(b, CONTAINS_CAP)
}

/// How a decision was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRoute {
    /// Odd counts, then positive evens, then zeros.
    Sorted,
    /// The depth-2 class tables.
    Table,
    /// Composition of ending pairs.
    Endings,
    /// Search over contained sequences after the constructive route failed.
    Search,
}

/// A contained attainable sequence with a plan for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpsDecision {
    pub sequence: Vec<usize>,
    pub plan: TransferPlan,
    pub route: DecisionRoute,
}

fn planned(sequence: Vec<usize>, route: DecisionRoute) -> Option<BpsDecision> {
    plan_attainable(&sequence).map(|plan| BpsDecision {
        sequence,
        plan,
        route,
    })
}

/// Any BPS of depth at most 1 contains `o, ..., o, e, ..., e, 0, ..., 0`, which is
/// attainable.
pub fn decide_depth1(b: &Bps) -> Result<BpsDecision> {
    if b.depth() > 1 {
        return invalid(format!("depth {} exceeds 1", b.depth()));
    }
    let mut v = b.values();
    v.sort_by_key(|&x| (x == 0, x % 2 == 0, x));
    planned(v, DecisionRoute::Sorted)
        .ok_or_else(|| Error::Defect("sorted depth-1 sequence has no plan".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Class {
    C01,
    C13,
    C23,
    C35,
    C33,
    C11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Dots,
    O,
    E,
    EZ,
}

type Row = &'static [(Class, &'static str)];

use Class::*;

const POSITIVE_NICE: &[Row] = &[
    &[(C01, "..., o")],
    &[(C13, "..., e, o, o"), (C13, "o, e, ..., o")],
    &[(C13, "..., o, o, e"), (C35, "e, e, e, ..., o, o")],
    &[(C23, "..., o, e, e"), (C23, "e, e, ..., o")],
    &[
        (C23, "..., o, e, e"),
        (C35, "e, e, ..., o, o, e"),
        (C35, "e, e, e, ..., o, o"),
    ],
    &[
        (C35, "..., o, o, e, e, e"),
        (C35, "e, ..., o, o, e, e"),
        (C35, "e, e, ..., o, o, e"),
        (C35, "e, e, e, ..., o, o"),
    ],
];

const POSITIVE_IRREDUCIBLE: &[Row] = &[
    &[],
    &[(C13, "..., o, o, e")],
    &[(C23, "..., o, e, e")],
    &[(C35, "..., o, o, e, e, e")],
    &[(C13, "..., e, o, o"), (C23, "o, e, ..., e")],
    &[(C23, "..., o, e, e"), (C35, "e, e, ..., o, o, e")],
    &[(C35, "..., o, o, e, e, e"), (C35, "e, ..., o, o, e, e")],
    &[
        (C35, "..., o, o, e, e, e"),
        (C35, "e, ..., o, o, e, e"),
        (C35, "e, e, ..., o, o, e"),
    ],
];

const ZERO_NICE: &[Row] = &[
    &[(C01, "..., o")],
    &[(C13, "..., e, o, o"), (C13, "o, e, ..., o")],
    &[(C13, "..., o, o, e"), (C33, "e/0, e, e, ...")],
    &[(C23, "..., o, e, e/0"), (C23, "e/0, e, ..., o")],
    &[(C33, "..., e, e/0, e"), (C11, "e, ...")],
    &[
        (C13, "..., o, o, e"),
        (C11, "..., e"),
        (C23, "e/0, e, ..., o"),
    ],
    &[
        (C23, "..., o, e, e/0"),
        (C33, "e/0, e, ..., e"),
        (C33, "e/0, e, e, ..."),
    ],
    &[(C23, "..., o, e, e/0"), (C11, "..., e"), (C11, "..., e")],
    &[
        (C33, "..., e, e/0, e"),
        (C33, "e, ..., e, e/0"),
        (C33, "e/0, e, ..., e"),
        (C33, "e/0, e, e, ..."),
    ],
    &[
        (C13, "..., o, o, e"),
        (C11, "..., e"),
        (C11, "..., e"),
        (C11, "..., e"),
    ],
    &[
        (C11, "..., e"),
        (C11, "..., e"),
        (C11, "..., e"),
        (C11, "..., e"),
    ],
];

const ZERO_IRREDUCIBLE: &[Row] = &[
    &[],
    &[(C13, "..., o, o, e")],
    &[(C23, "..., o, e, e/0")],
    &[(C33, "..., e, e, e/0")],
    &[(C11, "..., e")],
    &[(C13, "..., e, o, o"), (C23, "o, e, ..., e/0")],
    &[(C13, "..., o, o, e"), (C11, "..., e")],
    &[(C23, "..., o, e, e/0"), (C33, "e/0, e, ..., e")],
    &[(C11, "e"), (C23, "e/0, e, o")],
    &[(C23, "..., o, e, e/0"), (C11, "e/0, e, ..., e, e, e")],
    &[(C11, "..., e"), (C23, "o, o, o, e, ..., e/0")],
    &[(C23, "..., o, e, e/0, e, e, e, e"), (C11, "..., e")],
    &[(C33, "..., e, e/0, e"), (C33, "e, ..., e, e/0")],
    &[(C11, "..., e"), (C11, "..., e")],
    &[(C13, "..., o, o, e"), (C11, "..., e"), (C11, "..., e")],
    &[
        (C33, "..., e, e/0, e"),
        (C33, "e, ..., e, e/0"),
        (C33, "e/0, e, ..., e"),
    ],
    &[(C11, "..., e"), (C11, "..., e"), (C11, "..., e")],
];

fn tokens(pattern: &str) -> Vec<Tok> {
    pattern
        .split(',')
        .map(|t| match t.trim() {
            "..." => Tok::Dots,
            "o" => Tok::O,
            "e" => Tok::E,
            "e/0" => Tok::EZ,
            other => unreachable!("bad table token {other}"),
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Block {
    odds: Vec<usize>,
    evens: Vec<usize>,
    zero: bool,
}

impl Block {
    fn from_bps(b: &Bps) -> Block {
        let v = b.values();
        let mut odds: Vec<usize> = v.iter().copied().filter(|x| x % 2 == 1).collect();
        let mut evens: Vec<usize> = v.iter().copied().filter(|&x| x > 0 && x % 2 == 0).collect();
        odds.sort_unstable();
        evens.sort_unstable();
        Block {
            odds,
            evens,
            zero: v.contains(&0),
        }
    }

    fn a(&self) -> usize {
        self.evens.len() + usize::from(self.zero)
    }

    fn b(&self) -> usize {
        self.a() + self.odds.len()
    }

    fn class(&self, zero_mode: bool) -> Class {
        let (a, b) = (self.a(), self.b());
        match (zero_mode, a % 4) {
            (false, _) if a == b => C11,
            (false, 0) => C01,
            (false, 1) => C13,
            (false, 2) => C23,
            (false, _) => C35,
            (true, 0) => C01,
            (true, 1) if a < b => C13,
            (true, 1) => C11,
            (true, 2) => C23,
            (true, _) => C33,
        }
    }

    /// Realizations of this block following `pattern`, one per admissible zero position.
    fn expand(&self, pattern: &str) -> Vec<Vec<usize>> {
        let toks = tokens(pattern);
        let rep_e = toks
            .iter()
            .filter(|t| matches!(t, Tok::E | Tok::EZ))
            .count();
        let rep_o = toks.iter().filter(|t| **t == Tok::O).count();
        let has_dots = toks.contains(&Tok::Dots);
        let (a, odds) = (self.a(), self.odds.len());
        if a < rep_e || (a - rep_e) % 4 != 0 || odds < rep_o {
            return Vec::new();
        }
        let groups = (a - rep_e) / 4;
        let extra_o = odds - rep_o;
        if !has_dots && (groups > 0 || extra_o > 0) {
            return Vec::new();
        }
        // Candidate zero slots: an e/0 token, or the second entry of an added group.
        let ez_slots: Vec<usize> = (0..toks.len()).filter(|&i| toks[i] == Tok::EZ).collect();
        let mut zero_choices: Vec<Option<usize>> = if self.zero {
            ez_slots.iter().map(|&i| Some(i)).collect()
        } else {
            vec![None]
        };
        if self.zero && groups > 0 {
            zero_choices.push(Some(usize::MAX));
        }
        let mut out = Vec::new();
        for zc in zero_choices {
            let mut evens = self.evens.iter().copied();
            let mut odd_vals = self.odds.iter().copied();
            let mut seq = Vec::with_capacity(self.b());
            let mut dots_done = false;
            for (i, t) in toks.iter().enumerate() {
                match t {
                    Tok::O => seq.push(odd_vals.next().unwrap()),
                    Tok::E => seq.push(evens.next().unwrap()),
                    Tok::EZ if zc == Some(i) => seq.push(0),
                    Tok::EZ => seq.push(evens.next().unwrap()),
                    Tok::Dots if !dots_done => {
                        dots_done = true;
                        for _ in 0..extra_o {
                            seq.push(odd_vals.next().unwrap());
                        }
                        for g in 0..groups {
                            for k in 0..4 {
                                if g == 0 && k == 1 && zc == Some(usize::MAX) {
                                    seq.push(0);
                                } else {
                                    seq.push(evens.next().unwrap());
                                }
                            }
                        }
                    }
                    Tok::Dots => {}
                }
            }
            out.push(seq);
        }
        out
    }
}

fn check_zero_conditions_block(b: &Bps) -> Result<()> {
    let v = b.values();
    let zeros = v.iter().filter(|&&x| x == 0).count();
    if zeros > 1 {
        return invalid(format!("block {b} has more than one 0"));
    }
    if zeros == 1 && !v.iter().any(|&x| x > 0 && x % 2 == 0) {
        return invalid(format!("block {b} has a 0 but no positive even integer"));
    }
    Ok(())
}

/// The blocks of a depth-2 BPS: each child, a bare count being a block of one.
fn blocks_of(b: &Bps) -> Vec<Bps> {
    match b {
        Bps::Leaf(_) => vec![b.clone()],
        Bps::Node(ch) => ch.clone(),
    }
}

/// Cap on the number of zero placements tried per table arrangement.
const ARRANGEMENT_CAP: usize = 256;

/// Decides an odd BPS of depth at most 2 by the class tables. Without `allow_zeros` every
/// count must be positive; with it, each block has at most one 0 and, if it has one, a
/// positive even count too.
pub fn decide_odd_depth2(b: &Bps, allow_zeros: bool) -> Result<Option<BpsDecision>> {
    if !b.is_odd() {
        return invalid(format!("{b} is not odd"));
    }
    if b.depth() > 2 {
        return invalid(format!("depth {} exceeds 2", b.depth()));
    }
    let blocks = blocks_of(b);
    if allow_zeros {
        blocks.iter().try_for_each(check_zero_conditions_block)?;
    } else if b.zero_count() > 0 {
        return invalid(format!("{b} has a 0; zeros need the zero-aware mode"));
    }
    if let Some(d) = table_decision(&blocks, allow_zeros) {
        return Ok(Some(d));
    }
    Ok(search_decision(b))
}

fn table_decision(blocks: &[Bps], zero_mode: bool) -> Option<BpsDecision> {
    let data: Vec<Block> = blocks.iter().map(Block::from_bps).collect();
    let mut pool: BTreeMap<Class, Vec<usize>> = BTreeMap::new();
    for (i, bl) in data.iter().enumerate() {
        pool.entry(bl.class(zero_mode)).or_default().push(i);
    }
    let trailing: Vec<usize> = if zero_mode {
        Vec::new()
    } else {
        pool.remove(&C11).unwrap_or_default()
    };
    let (nice, irreducible) = if zero_mode {
        (ZERO_NICE, ZERO_IRREDUCIBLE)
    } else {
        (POSITIVE_NICE, POSITIVE_IRREDUCIBLE)
    };
    // Greedily peel nicely attainable rows.
    let mut rows: Vec<(Row, Vec<usize>)> = Vec::new();
    for &row in nice {
        while let Some(ids) = take_row(&mut pool, row) {
            rows.push((row, ids));
        }
    }
    let rest: Vec<(Class, usize)> = pool
        .iter()
        .flat_map(|(c, v)| v.iter().map(move |&i| (*c, i)))
        .collect();
    for &row in irreducible {
        let mut trial = pool.clone();
        let Some(ids) = take_row(&mut trial, row) else {
            continue;
        };
        if ids.len() != rest.len() {
            continue;
        }
        let mut all_rows = rows.clone();
        all_rows.push((row, ids));
        if let Some(d) = realize(&data, &all_rows, &trailing) {
            return Some(d);
        }
    }
    None
}

/// Removes one block per row entry, matching classes, if all are available.
fn take_row(pool: &mut BTreeMap<Class, Vec<usize>>, row: Row) -> Option<Vec<usize>> {
    let mut need: BTreeMap<Class, usize> = BTreeMap::new();
    for (c, _) in row {
        *need.entry(*c).or_default() += 1;
    }
    if need
        .iter()
        .any(|(c, &k)| pool.get(c).map_or(0, Vec::len) < k)
    {
        return None;
    }
    Some(
        row.iter()
            .map(|(c, _)| pool.get_mut(c).unwrap().pop().unwrap())
            .collect(),
    )
}

fn realize(data: &[Block], rows: &[(Row, Vec<usize>)], trailing: &[usize]) -> Option<BpsDecision> {
    let mut options: Vec<Vec<Vec<usize>>> = Vec::new();
    for (row, ids) in rows {
        for ((_, pattern), &i) in row.iter().zip(ids) {
            let ex = data[i].expand(pattern);
            if ex.is_empty() {
                return None;
            }
            options.push(ex);
        }
    }
    for &i in trailing {
        options.push(vec![data[i].evens.clone()]);
    }
    let mut index = vec![0usize; options.len()];
    for _ in 0..ARRANGEMENT_CAP {
        let seq: Vec<usize> = options
            .iter()
            .zip(&index)
            .flat_map(|(o, &k)| o[k].iter().copied())
            .collect();
        if let Some(d) = planned(seq, DecisionRoute::Table) {
            return Some(d);
        }
        // Next combination.
        let mut k = 0;
        while k < index.len() {
            index[k] += 1;
            if index[k] < options[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
        if k == index.len() {
            break;
        }
    }
    None
}

fn search_decision(b: &Bps) -> Option<BpsDecision> {
    let seqs = bps_contains(b).ok()?;
    seqs.into_iter()
        .find_map(|s| planned(s, DecisionRoute::Search))
}

/// Suffix classes of `e`/`o` sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ending {
    /// Nicely attainable.
    Empty,
    E1,
    E2,
    E2p,
    E3,
}

impl fmt::Display for Ending {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ending::Empty => "∅",
            Ending::E1 => "E1",
            Ending::E2 => "E2",
            Ending::E2p => "E2'",
            Ending::E3 => "E3",
        })
    }
}

/// Ending pairs of a BPS, each with a contained witness sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EndingPairSet {
    pub pairs: BTreeMap<(Ending, Ending), Vec<usize>>,
}

impl EndingPairSet {
    pub fn set(&self) -> BTreeSet<(Ending, Ending)> {
        self.pairs.keys().copied().collect()
    }

    fn single(pairs: &[(Ending, Ending)], witness: &[usize]) -> EndingPairSet {
        EndingPairSet {
            pairs: pairs.iter().map(|&p| (p, witness.to_vec())).collect(),
        }
    }

    /// Pairs obtained by ordering three parts in any way and chaining their endings.
    fn compose3(parts: [&EndingPairSet; 3]) -> EndingPairSet {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut out = EndingPairSet::default();
        for perm in PERMS {
            let [x, y, z] = perm.map(|i| parts[i]);
            for (&(e1, e2), w1) in &x.pairs {
                for (&(f2, e3), w2) in &y.pairs {
                    if f2 != e2 {
                        continue;
                    }
                    for (&(g3, e4), w3) in &z.pairs {
                        if g3 != e3 || out.pairs.contains_key(&(e1, e4)) {
                            continue;
                        }
                        let mut w = w1.clone();
                        w.extend(w2);
                        w.extend(w3);
                        out.pairs.insert((e1, e4), w);
                    }
                }
            }
        }
        out
    }
}

/// The ending pairs listed for a given number of even integers modulo 4.
pub fn expected_ending_pairs(evens: usize) -> BTreeSet<(Ending, Ending)> {
    use Ending::*;
    BTreeSet::from_iter(match evens % 4 {
        0 => vec![(Empty, Empty), (E2, E2p), (E2p, E2)],
        1 => vec![(Empty, E1), (E1, E2), (E2, E3), (E3, Empty)],
        2 => vec![(Empty, E2), (Empty, E2p), (E2, Empty), (E2p, Empty)],
        _ => vec![(Empty, E3), (E1, Empty), (E2, E1), (E3, E2)],
    })
}

fn check_large_depth_zeros(b: &Bps) -> Result<()> {
    match b {
        Bps::Leaf(0) => invalid("a 0 must sit in a depth-1 block"),
        Bps::Leaf(_) => Ok(()),
        Bps::Node(ch) => {
            if b.depth() == 1 {
                check_zero_conditions_block(b)
            } else {
                ch.iter().try_for_each(check_large_depth_zeros)
            }
        }
    }
}

/// Ending pairs by triple composition, with `o`, `e` (and `(e,e,0)`, `(e,o,0)` when zeros
/// are allowed) as base cases.
pub fn ending_pairs(b: &Bps, allow_zeros: bool) -> Result<EndingPairSet> {
    if !b.is_odd() {
        return invalid(format!("{b} is not odd"));
    }
    if allow_zeros {
        check_large_depth_zeros(b)?;
    } else if b.zero_count() > 0 {
        return invalid(format!("{b} has a 0; zeros need the zero-aware mode"));
    }
    Ok(pairs_of(b))
}

fn pairs_of(b: &Bps) -> EndingPairSet {
    use Ending::*;
    match b {
        Bps::Leaf(n) if n % 2 == 1 => {
            EndingPairSet::single(&[(Empty, Empty), (E2, E2p), (E2p, E2)], &[*n])
        }
        Bps::Leaf(n) => {
            EndingPairSet::single(&[(Empty, E1), (E1, E2), (E2, E3), (E3, Empty)], &[*n])
        }
        Bps::Node(ch) if ch.len() == 1 => pairs_of(&ch[0]),
        Bps::Node(ch) => {
            let has_zero = ch.contains(&Bps::Leaf(0));
            if has_zero && ch.len() == 3 {
                return zero_base(ch);
            }
            let order = if has_zero {
                zero_first_order(ch)
            } else {
                (0..ch.len()).collect()
            };
            // Fold from the right: (B1, B2, (B3, ..., Bk)).
            let k = order.len();
            let tail: Vec<Bps> = order[k - 1..].iter().map(|&i| ch[i].clone()).collect();
            let mut acc = pairs_of(&tail[0]);
            let mut rest: Vec<Bps> = tail;
            let mut i = k - 1;
            while i >= 2 {
                let (x, y) = (&ch[order[i - 2]], &ch[order[i - 1]]);
                rest.push(x.clone());
                rest.push(y.clone());
                acc = if has_zero && rest.len() == 3 {
                    zero_base(&rest)
                } else {
                    EndingPairSet::compose3([&pairs_of(x), &pairs_of(y), &acc])
                };
                i -= 2;
            }
            acc
        }
    }
}

/// Order children so the 0 and a positive even end up in the innermost triple.
fn zero_first_order(ch: &[Bps]) -> Vec<usize> {
    let zero = ch.iter().position(|c| *c == Bps::Leaf(0)).unwrap();
    let even = ch
        .iter()
        .position(|c| matches!(c, Bps::Leaf(n) if *n > 0 && n % 2 == 0))
        .unwrap();
    let mut order: Vec<usize> = (0..ch.len()).filter(|&i| i != zero && i != even).collect();
    order.push(even);
    order.push(zero);
    order
}

/// `(e, e, 0)` and `(e, o, 0)`.
fn zero_base(ch: &[Bps]) -> EndingPairSet {
    use Ending::*;
    let vals: Vec<usize> = ch
        .iter()
        .flat_map(Bps::values)
        .filter(|&v| v != 0)
        .collect();
    let (mut e, mut o): (Vec<usize>, Vec<usize>) = vals.iter().partition(|&&v| v % 2 == 0);
    e.sort_unstable();
    o.sort_unstable();
    let mut out = EndingPairSet::default();
    if e.len() == 2 {
        let (x, y) = (e[0], e[1]);
        out.pairs.insert((Empty, E3), vec![x, 0, y]);
        out.pairs.insert((E1, Empty), vec![0, x, y]);
        out.pairs.insert((E2, E1), vec![0, x, y]);
        out.pairs.insert((E3, E2), vec![x, y, 0]);
    } else {
        let (x, y) = (e[0], o[0]);
        out.pairs.insert((Empty, E2), vec![y, x, 0]);
        out.pairs.insert((Empty, E2p), vec![x, 0, y]);
        out.pairs.insert((E2, Empty), vec![0, x, y]);
        out.pairs.insert((E2p, Empty), vec![y, 0, x]);
    }
    out
}

/// Decides an odd BPS of any depth whose number of even integers is not 3 mod 4.
/// Returns `None` exactly when that number is 3 mod 4.
pub fn decide_large_depth(b: &Bps, allow_zeros: bool) -> Result<Option<BpsDecision>> {
    let pairs = ending_pairs(b, allow_zeros)?;
    if b.even_count() % 4 == 3 {
        return Ok(None);
    }
    use Ending::*;
    for want in [(Empty, Empty), (Empty, E1), (Empty, E2)] {
        if let Some(w) = pairs.pairs.get(&want) {
            if let Some(d) = planned(w.clone(), DecisionRoute::Endings) {
                return Ok(Some(d));
            }
        }
    }
    Ok(search_decision(b))
}

/// Result of the exhaustive BPS oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    /// The lexicographically least attainable contained sequence.
    Found(Vec<usize>, TransferPlan),
    NotAttainable,
    /// Some sequence could not be settled within the node budget.
    Inconclusive,
}

/// Searches every contained sequence with the catalog-free plan search; `budget` bounds
/// the nodes explored per sequence.
pub fn bps_brute_force(b: &Bps, budget: u64) -> Result<BruteOutcome> {
    let seqs = bps_contains(b)?;
    let mut inconclusive = false;
    for s in seqs {
        match search_plan_bounded(&s, false, budget) {
            SearchOutcome::Found(p) => return Ok(BruteOutcome::Found(s, p)),
            SearchOutcome::Exhausted => {}
            SearchOutcome::Inconclusive => inconclusive = true,
        }
    }
    Ok(if inconclusive {
        BruteOutcome::Inconclusive
    } else {
        BruteOutcome::NotAttainable
    })
}

/// Checks a decision against its BPS: containment and an independently replayable plan.
pub fn verify_decision(b: &Bps, d: &BpsDecision) -> Result<()> {
    if !b.contains(&d.sequence) {
        return contract(format!("{:?} is not contained in {b}", d.sequence));
    }
    let total: usize = d.sequence.iter().sum();
    let result = d.plan.result(total, d.sequence.len())?;
    if result != d.sequence {
        return contract(format!("plan yields {result:?}, not {:?}", d.sequence));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Bps {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_canonical() {
        assert_eq!(p("((7,0,0),2,2)"), p("(2, (0,7,0), 2)"));
        assert_eq!(p("((7,0,0),2,2)").to_string(), "(2,2,(0,0,7))");
        assert_eq!(p("((7,0,0),2,2)").depth(), 2);
        assert!(p("(1,(2,3))").depth() == 2 && !p("(1,(2,3))").is_odd());
        assert!("(1,2".parse::<Bps>().is_err());
        assert!("(1,,2)".parse::<Bps>().is_err());
        assert!("x".parse::<Bps>().is_err());
    }

    #[test]
    fn containment_table() {
        let got = bps_contains(&p("((7,0,0),2,2)")).unwrap();
        let want: BTreeSet<Vec<usize>> = [
            [7, 0, 0, 2, 2],
            [0, 7, 0, 2, 2],
            [0, 0, 7, 2, 2],
            [2, 7, 0, 0, 2],
            [2, 0, 7, 0, 2],
            [2, 0, 0, 7, 2],
            [2, 2, 7, 0, 0],
            [2, 2, 0, 7, 0],
            [2, 2, 0, 0, 7],
        ]
        .into_iter()
        .map(|a| a.to_vec())
        .collect();
        assert_eq!(got, want);
        for s in &got {
            assert!(p("((7,0,0),2,2)").contains(s));
        }
        assert!(!p("((7,0,0),2,2)").contains(&[7, 2, 0, 0, 2]));
        assert_eq!(bps_contains(&p("5")).unwrap().len(), 1);
        assert_eq!(bps_contains(&p("(1,2,3)")).unwrap().len(), 6);
    }

    #[test]
    fn depth1_examples() {
        let d = decide_depth1(&p("(2,1,0,3)")).unwrap();
        assert_eq!(d.sequence, vec![1, 3, 2, 0]);
        verify_decision(&p("(2,1,0,3)"), &d).unwrap();
        assert!(decide_depth1(&p("0")).unwrap().plan.steps.is_empty());
        let d = decide_depth1(&p("(4,4)")).unwrap();
        assert_eq!(d.sequence, vec![4, 4]);
    }

    #[test]
    fn depth2_examples() {
        for (s, z) in [
            ("((1,1,1),(1,1,1),(1))", false),
            ("((2,1,1),(1,2,1),(3))", false),
            ("((2,0,1),(1,1,1),(1))", true),
        ] {
            let b = p(s);
            let d = decide_odd_depth2(&b, z).unwrap().unwrap();
            assert_eq!(d.route, DecisionRoute::Table, "{s}");
            verify_decision(&b, &d).unwrap();
        }
        assert!(decide_odd_depth2(&p("((1,0,0),(1,0,0),(2))"), true).is_err());
        assert!(decide_odd_depth2(&p("((2,0,1),(1,1,1),(1))"), false).is_err());
    }

    #[test]
    fn ending_examples() {
        use Ending::*;
        assert_eq!(
            ending_pairs(&p("3"), false).unwrap().set(),
            expected_ending_pairs(0)
        );
        assert_eq!(
            ending_pairs(&p("2"), false).unwrap().set(),
            expected_ending_pairs(1)
        );
        let t = ending_pairs(&p("(2,4,6)"), false).unwrap().set();
        assert!(t.is_superset(&BTreeSet::from([
            (Empty, E3),
            (E1, Empty),
            (E2, E1),
            (E3, E2)
        ])));
        assert!(decide_large_depth(&p("(2,4,6)"), false).unwrap().is_none());
        let b = p("(((1,3,5),1,1),1,1)");
        let d = decide_large_depth(&b, false).unwrap().unwrap();
        assert!(d.sequence.iter().all(|x| x % 2 == 1));
        verify_decision(&b, &d).unwrap();
        let b = p("(((2,2,1),2,1),(2,1,1),1)");
        let d = decide_large_depth(&b, false).unwrap().unwrap();
        verify_decision(&b, &d).unwrap();
    }

    #[test]
    fn brute_force_examples() {
        assert!(matches!(
            bps_brute_force(&p("((7,0,0),2,2)"), 1_000_000).unwrap(),
            BruteOutcome::Found(..)
        ));
        match bps_brute_force(&p("3"), 1000).unwrap() {
            BruteOutcome::Found(s, _) => assert_eq!(s, vec![3]),
            other => panic!("{other:?}"),
        }
    }
}
