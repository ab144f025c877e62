//! Subcommands and their JSON reports.

use std::fs;
use std::io::Read;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use gracetree::advanced::{
    attach_leaves_graceful, fill_attached_leaves, label_auto, label_matched, labeling_function,
    match_theorem, TheoremId,
};
use gracetree::bps::{
    bps_brute_force, decide_depth1, decide_large_depth, decide_odd_depth2, verify_decision, Bps,
    BruteOutcome,
};
use gracetree::classic::{
    label_caterpillar, label_complete, label_complete_bipartite, label_cycle, SimpleGraph,
};
use gracetree::constructions::{cyclic_decomposition, label_symmetrical};
use gracetree::graph::{classify_labeling, is_symmetrical, profile_tree, Tree, VertexLabeling};
use gracetree::io::{
    emit_tree, parse_graph, parse_input, parse_labeling, parse_labels, parse_tree, Input,
};
use gracetree::oracle::{
    brute_force_graceful, brute_force_graceful_graph, search, OracleConfig, Query,
};
use gracetree::transfers::{
    make_alternating, replay_plan, star_context, TransferPlan, TransferableSet,
};
use gracetree::Error;

#[derive(Debug, Parser)]
#[command(name = "gracetree", version, about = "Graceful labelings of trees")]
pub struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the subject comes from: a file, `-` for stdin, or the text itself.
#[derive(Debug, Args)]
pub struct Source {
    /// File path, `-` for stdin, or literal text (`path:5`, `((7,0,0),2,2)`, `(()())`).
    pub input: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a labeling of a tree or graph.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Labels by vertex: file, `-`, or literal (`0 3 1 2` or `[0,3,1,2]`).
        #[arg(long)]
        labels: String,
        /// Also require an α-labeling.
        #[arg(long)]
        alpha: bool,
    },
    /// Construct a graceful labeling.
    Label {
        #[command(flatten)]
        source: Source,
        /// Theorem or classic strategy: 4.1 .. 4.5, gen-banana, even-cat-banana, log-spider,
        /// caterpillar, symmetrical.
        #[arg(long, conflicts_with = "auto")]
        theorem: Option<String>,
        /// Use the first applicable theorem (the default).
        #[arg(long)]
        auto: bool,
        /// Attach leaves at this vertex until a graceful labeling exists.
        #[arg(long, conflicts_with_all = ["theorem", "labeling_function"])]
        attach_leaves: Option<usize>,
        /// Attach this many leaves instead of the least number (with --attach-leaves).
        #[arg(long, requires = "attach_leaves")]
        count: Option<usize>,
        /// Rational labeling function vanishing at this leaf.
        #[arg(long, conflicts_with = "theorem")]
        labeling_function: Option<usize>,
    },
    /// Decide a BPS: find a contained attainable sequence and its plan.
    Decide {
        /// BPS expression, file, or `-`.
        bps: String,
        /// Allow zero counts at the leaves.
        #[arg(long)]
        zeros: bool,
        /// Cross-check with the exhaustive search (node budget).
        #[arg(long)]
        brute: Option<u64>,
    },
    /// Replay a transfer plan from a JSON trace.
    Replay {
        /// JSON trace: a star context or an explicit tree, labels and sequence, plus a plan.
        #[arg(long)]
        trace: String,
    },
    /// Exhaustive search for graceful or α-labelings.
    Search {
        #[command(flatten)]
        source: Source,
        /// Pin a label: `v=<id>:<label>` or `<id>:<label>`.
        #[arg(long)]
        pin: Option<String>,
        /// Search for α-labelings only.
        #[arg(long)]
        alpha: bool,
        /// Count all labelings.
        #[arg(long)]
        count: bool,
        /// Size cap (overrides GLAB_MAX_VERTICES).
        #[arg(long)]
        max_vertices: Option<usize>,
    },
    /// Structural profile, matching theorems, and optionally a labeling's classes.
    Classify {
        #[command(flatten)]
        source: Source,
        /// Labels to classify alongside the structure.
        #[arg(long)]
        labels: Option<String>,
    },
    /// Cyclic decomposition of K_{2n+1} into copies of a tree.
    Decompose {
        #[command(flatten)]
        source: Source,
        /// Graceful labels to use; found by construction or search when absent.
        #[arg(long)]
        labels: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Rejected,
    Refused,
    Defect,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Rejected | Status::Refused => 1,
            Status::Defect => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Rejected => "rejected",
            Status::Refused => "refused",
            Status::Defect => "defect",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub status: Status,
    pub payload: Value,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "status": self.status.name(),
            "payload": self.payload,
            "diagnostics": self.diagnostics,
        })
    }
}

/// A failed command: status plus message.
struct Failure(Status, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match e {
            Error::Refused(_) => Status::Refused,
            Error::Defect(_) => Status::Defect,
            _ => Status::Rejected,
        };
        Failure(status, e.to_string())
    }
}

fn rejected<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(Status::Rejected, msg.into()))
}

type Outcome = Result<(Value, Vec<String>), Failure>;

pub fn run(command: Command) -> Report {
    let (name, outcome) = match command {
        Command::Verify {
            source,
            labels,
            alpha,
        } => ("verify", verify(&source, &labels, alpha)),
        Command::Label {
            source,
            theorem,
            auto: _,
            attach_leaves,
            count,
            labeling_function,
        } => (
            "label",
            label(
                &source,
                theorem.as_deref(),
                attach_leaves,
                count,
                labeling_function,
            ),
        ),
        Command::Decide { bps, zeros, brute } => ("decide", decide(&bps, zeros, brute)),
        Command::Replay { trace } => ("replay", replay(&trace)),
        Command::Search {
            source,
            pin,
            alpha,
            count,
            max_vertices,
        } => (
            "search",
            search_cmd(&source, pin.as_deref(), alpha, count, max_vertices),
        ),
        Command::Classify { source, labels } => ("classify", classify(&source, labels.as_deref())),
        Command::Decompose { source, labels } => {
            ("decompose", decompose(&source, labels.as_deref()))
        }
    };
    match outcome {
        Ok((payload, diagnostics)) => Report {
            command: name,
            status: Status::Ok,
            payload,
            diagnostics,
        },
        Err(Failure(status, msg)) => Report {
            command: name,
            status,
            payload: Value::Null,
            diagnostics: vec![msg],
        },
    }
}

fn read_text(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure(Status::Rejected, format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    let looks_like_path = !arg.contains('\n') && !arg.contains(':') && !arg.starts_with('(');
    if looks_like_path && Path::new(arg).is_file() {
        return fs::read_to_string(arg)
            .map_err(|e| Failure(Status::Rejected, format!("cannot read {arg}: {e}")));
    }
    Ok(arg.replace("\\n", "\n"))
}

fn read_tree(source: &Source) -> Result<Tree, Failure> {
    Ok(parse_tree(&read_text(&source.input)?)?)
}

fn tree_or_graph(source: &Source) -> Result<Input, Failure> {
    let text = read_text(&source.input)?;
    match parse_input(&text)? {
        Input::Bps(_) => rejected("expected a tree or graph, found a BPS"),
        other => Ok(other),
    }
}

/// Reports a tree labeling only after it classifies as graceful.
fn checked(tree: &Tree, lab: &VertexLabeling) -> Result<Value, Failure> {
    let c = classify_labeling(tree, lab)?;
    if !c.is_graceful {
        return Err(Failure(
            Status::Defect,
            "constructed labeling failed verification".into(),
        ));
    }
    Ok(json!({ "labels": lab.labels(), "classification": c }))
}

fn verify(source: &Source, labels: &str, alpha: bool) -> Outcome {
    let labels = parse_labels(&read_text(labels)?)?;
    match tree_or_graph(source)? {
        Input::Tree(t) => {
            let lab = VertexLabeling::new(labels)?;
            let c = classify_labeling(&t, &lab)?;
            let ok = c.is_graceful && (!alpha || c.alpha_index.is_some());
            if !ok {
                let what = if alpha { "an α-labeling" } else { "graceful" };
                return Err(Failure(
                    Status::Rejected,
                    format!("labeling is not {what}: {}", json!(c)),
                ));
            }
            Ok((json!({ "classification": c }), vec![]))
        }
        Input::Graph(g) => {
            let graceful = g.is_graceful(&labels);
            let alpha_index = g.alpha_index(&labels);
            if !graceful || (alpha && alpha_index.is_none()) {
                return rejected("labeling is not graceful for this graph");
            }
            Ok((
                json!({ "is_graceful": true, "alpha_index": alpha_index }),
                vec![],
            ))
        }
        Input::Bps(_) => unreachable!(),
    }
}

const CONJECTURES: [&str; 2] = ["diameter6", "four-even"];

fn label(
    source: &Source,
    theorem: Option<&str>,
    attach: Option<usize>,
    count: Option<usize>,
    rational: Option<usize>,
) -> Outcome {
    let text = read_text(&source.input)?;
    if let Some(kind) = text.trim().split_once(':').map(|p| p.0) {
        if matches!(kind, "cycle" | "complete" | "kbip") {
            return label_graph(&text);
        }
    }
    if let Some(name) = theorem {
        if CONJECTURES.contains(&name) {
            return Err(Failure(
                Status::Refused,
                format!("{name}: conjectured, not implemented"),
            ));
        }
    }
    let tree = parse_tree(&text)?;
    if let Some(leaf) = rational {
        let g = labeling_function(&tree, leaf)?;
        if !g.is_labeling_function(&tree) {
            return Err(Failure(
                Status::Defect,
                "labeling function failed verification".into(),
            ));
        }
        return Ok((json!({ "rational_labels": g }), vec![]));
    }
    if let Some(v) = attach {
        let (n, t, lab) = match count {
            None => attach_leaves_graceful(&tree, v)?,
            Some(k) => {
                let f = gracetree::advanced::consistent_rrg(&tree, v)?;
                let (t, l) = fill_attached_leaves(&tree, v, &f, k)?;
                (k, t, l)
            }
        };
        let mut payload = checked(&t, &lab)?;
        payload["attached"] = json!(n);
        payload["tree"] = json!(emit_tree(&t));
        return Ok((payload, vec![]));
    }
    let (tag, lab) = match theorem {
        Some("caterpillar") => {
            let start = tree.diameter_path()[0];
            ("caterpillar".to_string(), label_caterpillar(&tree, start)?)
        }
        Some("symmetrical") => {
            let root = tree.root().unwrap_or(0);
            if !is_symmetrical(&tree, root) {
                return rejected(format!("tree is not symmetrical at vertex {root}"));
            }
            ("symmetrical".to_string(), label_symmetrical(&tree, root)?)
        }
        Some(name) => {
            let id: TheoremId = name.parse()?;
            let w = match_theorem(&tree)
                .into_iter()
                .find(|w| w.theorem == id)
                .ok_or_else(|| {
                    Failure(
                        Status::Rejected,
                        format!("tree does not satisfy the hypotheses of {id}"),
                    )
                })?;
            (id.to_string(), label_matched(&tree, &w)?)
        }
        None => auto(&tree)?,
    };
    let mut payload = checked(&tree, &lab)?;
    payload["strategy"] = json!(tag);
    Ok((payload, vec![]))
}

/// First matching theorem, then the classic constructions.
fn auto(tree: &Tree) -> Result<(String, VertexLabeling), Failure> {
    if !match_theorem(tree).is_empty() {
        let (id, lab) = label_auto(tree)?;
        return Ok((id.to_string(), lab));
    }
    if profile_tree(tree).caterpillar {
        let start = tree.diameter_path()[0];
        return Ok(("caterpillar".into(), label_caterpillar(tree, start)?));
    }
    if let Some(root) = tree.center().into_iter().find(|&c| is_symmetrical(tree, c)) {
        return Ok(("symmetrical".into(), label_symmetrical(tree, root)?));
    }
    match brute_force_graceful(tree, None) {
        Ok(Some(l)) => Ok(("search".into(), l)),
        Ok(None) => Err(Failure(
            Status::Defect,
            "exhaustive search found no graceful labeling".into(),
        )),
        Err(Error::Refused(m)) => Err(Failure(
            Status::Refused,
            format!("no constructive labeler applies and {m}"),
        )),
        Err(e) => Err(e.into()),
    }
}

fn label_graph(text: &str) -> Outcome {
    let (kind, rest) = text.trim().split_once(':').unwrap();
    let graph: SimpleGraph = parse_graph(text)?;
    let nums: Vec<usize> = rest
        .split(',')
        .filter_map(|s| s.trim().parse().ok())
        .collect();
    let labels = match (kind, &nums[..]) {
        ("cycle", [n]) => label_cycle(*n)?,
        ("complete", [n]) => label_complete(*n),
        ("kbip", [m, n]) => Some(label_complete_bipartite(*m, *n)?),
        _ => return rejected("bad graph shorthand"),
    };
    let Some(labels) = labels else {
        return rejected(format!("{kind}:{rest} has no graceful labeling"));
    };
    if !graph.is_graceful(&labels) {
        return Err(Failure(
            Status::Defect,
            "constructed labeling failed verification".into(),
        ));
    }
    Ok((
        json!({ "labels": labels, "alpha_index": graph.alpha_index(&labels), "strategy": kind }),
        vec![],
    ))
}

fn decide(text: &str, zeros: bool, brute: Option<u64>) -> Outcome {
    let b: Bps = read_text(text)?.trim().parse()?;
    let decided = match b.depth() {
        0 | 1 => decide_depth1(&b).map(Some),
        2 if b.is_odd() => decide_odd_depth2(&b, zeros),
        _ => decide_large_depth(&b, zeros),
    };
    let mut diagnostics = Vec::new();
    let mut payload = json!({ "bps": b.to_string() });
    let decision = match (decided, brute) {
        (Ok(d), _) => d,
        (Err(e @ Error::InvalidInput(_)), Some(budget)) => {
            diagnostics.push(format!(
                "decider preconditions fail ({e}); exhaustive search only"
            ));
            return match bps_brute_force(&b, budget)? {
                BruteOutcome::Found(s, p) => {
                    payload["brute_force"] = json!({ "sequence": s, "plan": p });
                    Ok((payload, diagnostics))
                }
                BruteOutcome::NotAttainable => Err(Failure(
                    Status::Rejected,
                    "no contained sequence is attainable".into(),
                )),
                BruteOutcome::Inconclusive => {
                    Err(Failure(Status::Refused, "search budget exhausted".into()))
                }
            };
        }
        (Err(e), _) => return Err(e.into()),
    };
    match &decision {
        Some(d) => {
            verify_decision(&b, d)?;
            payload["decision"] = json!(d);
            payload["plan_text"] = json!(d.plan.to_string());
        }
        None => {
            payload["decision"] = Value::Null;
            diagnostics.push("not decided by this calculus".to_string());
        }
    }
    if let Some(budget) = brute {
        let outcome = bps_brute_force(&b, budget)?;
        payload["brute_force"] = match &outcome {
            BruteOutcome::Found(s, p) => json!({ "sequence": s, "plan": p }),
            BruteOutcome::NotAttainable => json!("not-attainable"),
            BruteOutcome::Inconclusive => json!("inconclusive"),
        };
        let agrees = match (&decision, &outcome) {
            (Some(_), BruteOutcome::NotAttainable) => false,
            (None, BruteOutcome::Found(..)) => b.depth() != 2 || !b.is_odd(),
            _ => true,
        };
        if !agrees {
            return Err(Failure(
                Status::Defect,
                "decider and exhaustive search disagree".into(),
            ));
        }
    }
    if decision.is_none() {
        return Err(Failure(Status::Rejected, diagnostics.remove(0)));
    }
    Ok((payload, diagnostics))
}

#[derive(Debug, Deserialize)]
struct StarSpec {
    m: usize,
    transferable: usize,
    #[serde(default)]
    pad: usize,
    #[serde(default)]
    ascending: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Trace {
    tree: Option<String>,
    labels: Option<Vec<u64>>,
    sequence: Option<Vec<usize>>,
    leaves: Option<Vec<usize>>,
    star: Option<StarSpec>,
    plan: TransferPlan,
}

fn replay(path: &str) -> Outcome {
    let trace: Trace = serde_json::from_str(&read_text(path)?).map_err(|e| {
        Failure(
            Status::Rejected,
            format!("bad trace at line {}, column {}: {e}", e.line(), e.column()),
        )
    })?;
    let (tree, labeling, seq, leaves) = match (&trace.star, &trace.tree) {
        (Some(s), None) => {
            let c = star_context(s.m, s.transferable, s.pad, s.ascending)?;
            (c.tree, c.labeling, c.seq, c.leaves)
        }
        (None, Some(text)) => {
            let tree = parse_tree(text)?;
            let missing =
                |what: &str| Failure(Status::Rejected, format!("trace with a tree needs {what}"));
            let labeling =
                VertexLabeling::new(trace.labels.clone().ok_or_else(|| missing("labels"))?)?;
            let seq = make_alternating(
                &labeling,
                trace
                    .sequence
                    .as_deref()
                    .ok_or_else(|| missing("sequence"))?,
            )?;
            let set = TransferableSet::new(
                &tree,
                &labeling,
                &seq,
                trace.leaves.as_deref().ok_or_else(|| missing("leaves"))?,
            )?;
            (tree, labeling, seq, set)
        }
        _ => return rejected("trace needs exactly one of `tree` or `star`"),
    };
    let out = replay_plan(&tree, &labeling, &seq, &leaves, &trace.plan)?;
    let payload = checked(&out, &labeling)?;
    let set: std::collections::HashSet<usize> = leaves.leaves.iter().copied().collect();
    let census: Vec<usize> = seq
        .vertices
        .iter()
        .map(|&v| {
            out.neighbors(v)
                .iter()
                .filter(|x| set.contains(x) && out.is_leaf(**x))
                .count()
        })
        .collect();
    Ok((
        json!({ "tree": emit_tree(&out), "labels": payload["labels"], "census": census, "steps": trace.plan.steps.len() }),
        vec![],
    ))
}

fn parse_pin(text: &str) -> Result<(usize, u64), Failure> {
    let body = text.trim().strip_prefix("v=").unwrap_or(text.trim());
    let parsed = body
        .split_once(':')
        .and_then(|(v, l)| Some((v.trim().parse().ok()?, l.trim().parse().ok()?)));
    parsed.ok_or_else(|| {
        Failure(
            Status::Rejected,
            format!("bad pin {text:?}; expected v=<id>:<label>"),
        )
    })
}

fn search_cmd(
    source: &Source,
    pin: Option<&str>,
    alpha: bool,
    count: bool,
    max: Option<usize>,
) -> Outcome {
    let mut cfg = OracleConfig::default();
    if let Some(m) = max {
        cfg.max_vertices = m;
    }
    let pin = pin.map(parse_pin).transpose()?;
    match tree_or_graph(source)? {
        Input::Tree(t) => {
            let (lab, stats) = search(&t, &Query { pin, alpha, count }, &cfg)?;
            let mut payload = json!({ "found": lab.is_some(), "stats": stats });
            if let Some(l) = &lab {
                payload["labels"] = checked(&t, l)?["labels"].clone();
            }
            if count {
                payload["count"] = json!(stats.solutions);
            }
            Ok((payload, vec![]))
        }
        Input::Graph(g) => {
            if pin.is_some() || alpha || count {
                return rejected("--pin, --alpha and --count apply to trees only");
            }
            if g.vertex_count() > cfg.max_vertices {
                return Err(Failure(
                    Status::Refused,
                    format!(
                        "{} vertices exceed the cap {}",
                        g.vertex_count(),
                        cfg.max_vertices
                    ),
                ));
            }
            let labels = brute_force_graceful_graph(&g)?;
            if let Some(l) = &labels {
                if !g.is_graceful(l) {
                    return Err(Failure(
                        Status::Defect,
                        "search returned a non-graceful labeling".into(),
                    ));
                }
            }
            Ok((
                json!({ "found": labels.is_some(), "labels": labels }),
                vec![],
            ))
        }
        Input::Bps(_) => unreachable!(),
    }
}

fn classify(source: &Source, labels: Option<&str>) -> Outcome {
    match tree_or_graph(source)? {
        Input::Tree(t) => {
            let theorems: Vec<String> = match_theorem(&t)
                .iter()
                .map(|w| w.theorem.to_string())
                .collect();
            let mut payload = json!({
                "kind": "tree",
                "vertices": t.vertex_count(),
                "profile": profile_tree(&t),
                "theorems": theorems,
            });
            if let Some(l) = labels {
                let lab = parse_labeling(&read_text(l)?)?;
                payload["classification"] = json!(classify_labeling(&t, &lab)?);
            }
            Ok((payload, vec![]))
        }
        Input::Graph(g) => {
            let degrees: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
            let mut payload = json!({
                "kind": "graph",
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "degrees": degrees,
                "parity_obstruction": gracetree::classic::even_degree_obstruction(&g),
            });
            if let Some(l) = labels {
                let labels = parse_labels(&read_text(l)?)?;
                payload["is_graceful"] = json!(g.is_graceful(&labels));
                payload["alpha_index"] = json!(g.alpha_index(&labels));
            }
            Ok((payload, vec![]))
        }
        Input::Bps(_) => unreachable!(),
    }
}

fn decompose(source: &Source, labels: Option<&str>) -> Outcome {
    let tree = read_tree(source)?;
    let (lab, how) = match labels {
        Some(l) => (parse_labeling(&read_text(l)?)?, "given".to_string()),
        None => {
            let (tag, l) = auto(&tree)?;
            (l, tag)
        }
    };
    let copies = cyclic_decomposition(&tree, &lab)?;
    Ok((
        json!({ "labels": lab.labels(), "source": how, "modulus": 2 * tree.edge_count() + 1, "copies": copies }),
        vec![],
    ))
}
