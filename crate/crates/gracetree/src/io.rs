//! Text formats: edge lists, nested-parenthesis rooted trees, graph shorthands, BPS
//! expressions and labelings. Every parser reports errors with line and column.
//!
//! Edge list (a tree unless a `graph` line precedes the header):
//! ```text
//! # comment
//! n=3
//! root=0      (optional)
//! 0 1
//! 1 2
//! ```
//! Rooted: `(()(()))` is a root with a leaf child and a child with one leaf; ids follow
//! preorder. Shorthands: `path:n`, `star:m`, `spider:l1,l2,...` for trees and `cycle:n`,
//! `complete:n`, `kbip:m,n` for graphs.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::bps::Bps;
use crate::classic::SimpleGraph;
use crate::error::{Error, Result};
use crate::graph::{Tree, VertexLabeling};

/// Anything the command line accepts as a subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Tree(Tree),
    Graph(SimpleGraph),
    Bps(Bps),
}

fn at(line: usize, col: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}, column {col}: {msg}"))
}

/// Tokens of a line with their 1-based columns; `#` starts a comment.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        let sep = ch.is_whitespace() || ch == ',';
        match (sep, start) {
            (true, Some(s)) => {
                out.push((s + 1, &body[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &body[s..]));
    }
    out
}

fn number(line: usize, col: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| at(line, col, format!("expected a number, found {tok:?}")))
}

/// A parsed edge list: vertex count, optional root and edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub vertex_count: usize,
    pub root: Option<usize>,
    pub edges: Vec<(usize, usize)>,
    /// Declared a general graph by a `graph` line.
    pub graph: bool,
}

/// Parses the edge-list format, rejecting out-of-range ids, loops and repeated edges.
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut n = None;
    let mut root = None;
    let mut graph = false;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some(&(col, first)) = toks.first() else {
            continue;
        };
        let key_value = |key: &str| -> Option<Result<usize>> {
            let joined: String = toks.iter().map(|t| t.1).collect();
            let rest = joined.strip_prefix(key)?.strip_prefix('=')?;
            Some(number(line, col + key.len() + 1, rest.trim()))
        };
        if n.is_none() && toks.len() == 1 && first == "graph" && !graph {
            graph = true;
            continue;
        }
        if n.is_none() {
            match key_value("n") {
                Some(v) => n = Some(v?),
                None => {
                    return Err(at(
                        line,
                        col,
                        format!("expected n=<vertices>, found {first:?}"),
                    ))
                }
            }
            continue;
        }
        let count = n.unwrap();
        if let Some(v) = key_value("root") {
            let r = v?;
            if r >= count {
                return Err(at(line, col, format!("root {r} is not below n={count}")));
            }
            root = Some(r);
            continue;
        }
        if toks.len() != 2 {
            let c = toks.get(2).map_or(col, |t| t.0);
            return Err(at(line, c, "expected two vertex ids"));
        }
        let a = number(line, toks[0].0, toks[0].1)?;
        let b = number(line, toks[1].0, toks[1].1)?;
        for (c, v) in [(toks[0].0, a), (toks[1].0, b)] {
            if v >= count {
                return Err(at(line, c, format!("vertex {v} is not below n={count}")));
            }
        }
        if a == b {
            return Err(at(line, toks[0].0, format!("loop at vertex {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(at(line, toks[0].0, format!("duplicate edge {a} {b}")));
        }
        edges.push((a, b));
    }
    let vertex_count = n.ok_or_else(|| at(1, 1, "missing n=<vertices> header"))?;
    Ok(EdgeList {
        vertex_count,
        root,
        edges,
        graph,
    })
}

fn shorthand(text: &str) -> Option<(&str, &str)> {
    let (kind, rest) = text.trim().split_once(':')?;
    kind.chars()
        .all(|c| c.is_ascii_alphabetic())
        .then_some((kind, rest))
}

fn shorthand_numbers(rest: &str, offset: usize) -> Result<Vec<usize>> {
    tokens(rest)
        .into_iter()
        .map(|(c, t)| number(1, c + offset, t))
        .collect()
}

fn parse_rooted(text: &str) -> Result<Tree> {
    let mut children: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut closed_root = false;
    for (i, raw) in text.lines().enumerate() {
        for (j, ch) in raw.chars().enumerate() {
            let (line, col) = (i + 1, j + 1);
            match ch {
                '(' => {
                    if closed_root {
                        return Err(at(line, col, "text after the root"));
                    }
                    let id = children.len();
                    children.push(Vec::new());
                    if let Some(&p) = stack.last() {
                        children[p].push(id);
                    }
                    stack.push(id);
                }
                ')' => {
                    if stack.pop().is_none() {
                        return Err(at(line, col, "unmatched ')'"));
                    }
                    closed_root = stack.is_empty();
                }
                c if c.is_whitespace() => {}
                c => return Err(at(line, col, format!("unexpected {c:?} in a rooted tree"))),
            }
        }
    }
    if !stack.is_empty() || children.is_empty() {
        let lines = text.lines().count().max(1);
        let cols = text.lines().last().map_or(0, |l| l.chars().count());
        return Err(at(lines, cols + 1, "unclosed '('"));
    }
    Tree::from_children(&children)
}

/// Parses a tree from any tree format.
pub fn parse_tree(text: &str) -> Result<Tree> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('(') {
        return parse_rooted(text);
    }
    if let Some((kind, rest)) = shorthand(text) {
        let off = text.find(':').unwrap() + 1;
        let nums = shorthand_numbers(rest, off)?;
        let one = || -> Result<usize> {
            match nums[..] {
                [x] => Ok(x),
                _ => Err(at(1, off + 1, format!("{kind} takes one number"))),
            }
        };
        return match kind {
            "path" => Ok(Tree::path(one()?)),
            "star" => Ok(Tree::star(one()?)),
            "spider" if nums.iter().all(|&x| x > 0) => Ok(Tree::spider(&nums)),
            "spider" => Err(at(1, off + 1, "spider legs must be positive")),
            "cycle" | "complete" | "kbip" => {
                Err(Error::InvalidInput(format!("{kind} is not a tree")))
            }
            _ => Err(at(1, 1, format!("unknown shorthand {kind:?}"))),
        };
    }
    let el = parse_edge_list(text)?;
    if el.graph {
        return Err(at(1, 1, "expected a tree, found a graph edge list"));
    }
    let t = Tree::new(el.vertex_count, &el.edges)
        .map_err(|e| Error::InvalidInput(format!("not a tree: {}", strip_kind(&e))))?;
    Ok(match el.root {
        Some(r) => t.with_root(r),
        None => t,
    })
}

fn strip_kind(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Parses a simple graph; tree formats are accepted too.
pub fn parse_graph(text: &str) -> Result<SimpleGraph> {
    if let Some((kind, rest)) = shorthand(text) {
        let off = text.find(':').unwrap() + 1;
        let nums = shorthand_numbers(rest, off)?;
        return match (kind, &nums[..]) {
            ("cycle", [n]) => SimpleGraph::cycle(*n),
            ("complete", [n]) => SimpleGraph::complete(*n),
            ("kbip", [m, n]) => SimpleGraph::complete_bipartite(*m, *n),
            ("cycle" | "complete", _) => Err(at(1, off + 1, format!("{kind} takes one number"))),
            ("kbip", _) => Err(at(1, off + 1, "kbip takes two numbers")),
            _ => parse_tree(text).map(|t| SimpleGraph::from_tree(&t)),
        };
    }
    if text.trim_start().starts_with('(') {
        return parse_tree(text).map(|t| SimpleGraph::from_tree(&t));
    }
    let el = parse_edge_list(text)?;
    SimpleGraph::new(el.vertex_count, &el.edges)
}

/// Detects the format: parenthesized text with digits or a bare number is a BPS, other
/// parenthesized text a rooted tree, `cycle:`/`complete:`/`kbip:` or a `graph` edge list
/// a graph, and any other edge list a tree.
pub fn parse_input(text: &str) -> Result<Input> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(at(1, 1, "empty input"));
    }
    let first = trimmed.chars().next().unwrap();
    if first.is_ascii_digit() && !trimmed.contains('\n') && !trimmed.contains('=') {
        return trimmed.parse().map(Input::Bps);
    }
    if first == '(' {
        if trimmed.chars().any(|c| c.is_ascii_digit()) {
            return trimmed.parse().map(Input::Bps);
        }
        return parse_rooted(text).map(Input::Tree);
    }
    if let Some((kind, _)) = shorthand(text) {
        return match kind {
            "cycle" | "complete" | "kbip" => parse_graph(text).map(Input::Graph),
            _ => parse_tree(text).map(Input::Tree),
        };
    }
    let el = parse_edge_list(text)?;
    if el.graph {
        SimpleGraph::new(el.vertex_count, &el.edges).map(Input::Graph)
    } else {
        parse_tree(text).map(Input::Tree)
    }
}

/// Edge-list text for a tree, with its root if it has one.
pub fn emit_tree(tree: &Tree) -> String {
    let mut s = format!("n={}\n", tree.vertex_count());
    if let Some(r) = tree.root() {
        let _ = writeln!(s, "root={r}");
    }
    for &(a, b) in tree.edges() {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

/// Nested-parenthesis text for a tree rooted at `root`, children in id order.
pub fn emit_rooted(tree: &Tree, root: usize) -> String {
    let rt = tree.bfs(root);
    let mut s = String::new();
    let mut stack = vec![(root, false)];
    while let Some((v, done)) = stack.pop() {
        if done {
            s.push(')');
            continue;
        }
        s.push('(');
        stack.push((v, true));
        let mut kids = rt.children[v].clone();
        kids.sort_unstable();
        stack.extend(kids.into_iter().rev().map(|c| (c, false)));
    }
    s
}

/// Edge-list text for a graph.
pub fn emit_graph(graph: &SimpleGraph) -> String {
    let mut s = format!("graph\nn={}\n", graph.vertex_count());
    for &(a, b) in graph.edges() {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

/// Text for any input.
pub fn emit_input(input: &Input) -> String {
    match input {
        Input::Tree(t) => emit_tree(t),
        Input::Graph(g) => emit_graph(g),
        Input::Bps(b) => b.to_string(),
    }
}

/// Parses labels indexed by vertex: a JSON array or numbers separated by whitespace or
/// commas.
pub fn parse_labels(text: &str) -> Result<Vec<u64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed)
            .map_err(|e| at(e.line(), e.column(), format!("bad label array: {e}")));
    }
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        for (col, tok) in tokens(raw) {
            out.push(
                tok.parse()
                    .map_err(|_| at(i + 1, col, format!("expected a label, found {tok:?}")))?,
            );
        }
    }
    Ok(out)
}

/// Parses a vertex labeling (labels must be distinct).
pub fn parse_labeling(text: &str) -> Result<VertexLabeling> {
    VertexLabeling::new(parse_labels(text)?)
}

/// Labels separated by single spaces.
pub fn emit_labels(labels: &[u64]) -> String {
    labels
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_path() {
        let t = parse_tree("n=3\n0 1\n1 2").unwrap();
        assert_eq!(t, Tree::path(2));
        assert_eq!(
            parse_input("n=3\n0 1\n1 2").unwrap(),
            Input::Tree(Tree::path(2))
        );
    }

    #[test]
    fn duplicate_edges_are_located() {
        let e = parse_tree("n=3\n0 1\n0 1").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("duplicate"), "{e}");
        let e = parse_tree("n=3\n0 1\n0 x").unwrap_err().to_string();
        assert!(e.contains("line 3, column 3"), "{e}");
    }

    #[test]
    fn structural_errors() {
        assert!(parse_tree("n=4\n0 1\n2 3")
            .unwrap_err()
            .to_string()
            .contains("not a tree"));
        assert!(parse_tree("n=3\n0 1\n1 2\n0 2").is_err());
        assert!(parse_input("n=3\n0 1\n1 2\n0 2").is_err());
        assert!(matches!(
            parse_input("graph\nn=3\n0 1\n1 2\n0 2").unwrap(),
            Input::Graph(_)
        ));
        assert!(parse_tree("graph\nn=2\n0 1").is_err());
    }

    #[test]
    fn bps_and_rooted() {
        let b = parse_input("((7,0,0),2,2)").unwrap();
        assert_eq!(b, Input::Bps("((7,0,0),2,2)".parse().unwrap()));
        let t = parse_tree("(()(()))").unwrap();
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(emit_rooted(&t, 0), "(()(()))");
        assert!(parse_tree("(()")
            .unwrap_err()
            .to_string()
            .contains("unclosed"));
        assert!(parse_tree("())")
            .unwrap_err()
            .to_string()
            .contains("column 3"));
    }

    #[test]
    fn shorthands() {
        assert_eq!(
            parse_graph("cycle:5").unwrap(),
            SimpleGraph::cycle(5).unwrap()
        );
        assert_eq!(
            parse_graph("kbip:2,3").unwrap(),
            SimpleGraph::complete_bipartite(2, 3).unwrap()
        );
        assert_eq!(
            parse_tree("spider:2,2,2").unwrap(),
            Tree::spider(&[2, 2, 2])
        );
        assert!(matches!(
            parse_input("complete:4").unwrap(),
            Input::Graph(_)
        ));
        assert!(parse_tree("cycle:4").is_err());
    }

    #[test]
    fn round_trips() {
        for input in [
            Input::Tree(Tree::spider(&[1, 2, 3])),
            Input::Tree(Tree::path(4).without_root()),
            Input::Graph(SimpleGraph::complete(4).unwrap()),
            Input::Bps("((7,0,0),2,2)".parse().unwrap()),
        ] {
            assert_eq!(parse_input(&emit_input(&input)).unwrap(), input);
        }
        assert_eq!(parse_labels("[0, 3, 1]").unwrap(), vec![0, 3, 1]);
        assert_eq!(
            parse_labels(&emit_labels(&[4, 0, 2])).unwrap(),
            vec![4, 0, 2]
        );
    }
}
