#![allow(dead_code)]

use std::path::PathBuf;

use forge_core::diagram::{DiagEdge, DiagNode, DiagPort, DiagramGraph, EdgeKind, NodeKind, Side};
use forge_core::lf::*;
use forge_core::Span;
use proptest::prelude::*;

pub fn fixture_models() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/models");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lf"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}".prop_filter("not a keyword", |s| is_identifier(s))
}

fn class_name() -> impl Strategy<Value = String> {
    "[A-Z][a-z0-9]{0,5}"
}

fn type_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["int", "bool", "double", "time", "char*", "string", "u32"]).prop_map(String::from)
}

fn host_code() -> impl Strategy<Value = HostCode> {
    "[ a-z0-9;(){}\"'=+<>\\n/*]{0,24}"
        .prop_filter("no closing delimiter", |s| !s.contains("=}"))
        .prop_map(HostCode::new)
}

fn unit() -> impl Strategy<Value = TimeUnit> {
    prop::sample::select(TimeUnit::ALL.to_vec())
}

pub fn time_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![Just(Expr::Int(0)), (0u64..10_000, unit()).prop_map(|(value, unit)| Expr::Time { value, unit })]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-1000i64..1000).prop_map(Expr::Int),
        time_expr(),
        (0u32..100, 0u32..1000).prop_map(|(a, b)| Expr::Float(format!("{a}.{b}"))),
        "[a-zA-Z0-9 _.,]{0,10}".prop_map(Expr::Str),
        ident().prop_map(Expr::Ident),
        host_code().prop_map(Expr::Code),
    ]
}

pub fn reference() -> impl Strategy<Value = Ref> {
    (prop::option::of(ident()), ident()).prop_map(|(c, n)| match c {
        Some(c) => Ref::child(&c, &n),
        None => Ref::local(&n),
    })
}

fn timer() -> impl Strategy<Value = Timer> {
    (
        ident(),
        prop::option::of("[a-zA-Z0-9 ]{0,8}"),
        prop::option::of((time_expr(), prop::option::of(time_expr()))),
    )
        .prop_map(|(name, label, times)| {
            let (offset, period) = match times {
                None => (None, None),
                Some((o, p)) => (Some(o), p),
            };
            Timer { name, label, offset, period, span: Span::default() }
        })
}

pub fn element() -> impl Strategy<Value = Element> {
    let port = || {
        (ident(), prop::option::of(type_name()))
            .prop_map(|(name, type_name)| Port { name, type_name, span: Span::default() })
    };
    prop_oneof![
        port().prop_map(Element::Input),
        port().prop_map(Element::Output),
        timer().prop_map(Element::Timer),
        (ident(), prop::option::of(type_name()), prop::option::of(expr())).prop_map(|(name, type_name, init)| {
            Element::State(StateVar { name, type_name, init, span: Span::default() })
        }),
        (prop::collection::vec(reference(), 0..3), prop::collection::vec(reference(), 0..3), host_code())
            .prop_map(|(triggers, effects, body)| {
                Element::Reaction(Reaction { triggers, effects, body, span: Span::default() })
            }),
        (ident(), class_name(), prop::collection::vec((ident(), expr()), 0..3)).prop_map(|(name, reactor, args)| {
            Element::Instantiation(Instantiation {
                name,
                reactor,
                args: args.into_iter().map(|(name, value)| Assignment { name, value }).collect(),
                span: Span::default(),
            })
        }),
        (reference(), reference()).prop_map(|(from, to)| Element::Connection(Connection { from, to })),
    ]
}

fn param() -> impl Strategy<Value = Param> {
    (ident(), prop::option::of(type_name()), prop::option::of(expr()))
        .prop_map(|(name, type_name, default)| Param { name, type_name, default, span: Span::default() })
}

fn reactor(is_main: bool) -> impl Strategy<Value = ReactorDef> {
    let name = if is_main { prop::option::of(class_name()).boxed() } else { class_name().prop_map(Some).boxed() };
    (name, prop::collection::vec(param(), 0..3), prop::collection::vec(element(), 0..8)).prop_map(
        move |(name, params, elements)| ReactorDef { name, is_main, params, elements, span: Span::default() },
    )
}

/// Syntactically valid models; they need not validate.
pub fn model() -> impl Strategy<Value = Model> {
    (
        prop::option::of("[A-Z][a-zA-Z]{0,6}"),
        prop::collection::vec(reactor(false), 0..3),
        prop::option::of(reactor(true)),
    )
        .prop_map(|(target, mut reactors, main)| {
            reactors.extend(main);
            Model {
                target: target.map(|name| Target { name, span: Span::default() }),
                reactors,
                source_text: String::new(),
            }
        })
}

/// Random compound graph: a root with up to `max_nodes` descendants,
/// nesting at most two levels below the root.
pub fn diagram_graph(max_nodes: usize) -> impl Strategy<Value = DiagramGraph> {
    (1..=max_nodes, any::<u64>()).prop_map(|(n, seed)| build_graph(n, seed))
}

pub fn build_graph(n: usize, seed: u64) -> DiagramGraph {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);

    struct Proto {
        id: String,
        parent: Option<usize>,
        depth: usize,
        width: i64,
        height: i64,
        west: usize,
        east: usize,
    }
    let mut protos = vec![Proto { id: "root".into(), parent: None, depth: 0, width: 80, height: 48, west: 1, east: 1 }];
    for i in 0..n {
        let candidates: Vec<usize> = (0..protos.len()).filter(|&p| protos[p].depth < 2).collect();
        let parent = candidates[rng.random_range(0..candidates.len())];
        protos.push(Proto {
            id: format!("{}/n{i}", protos[parent].id),
            parent: Some(parent),
            depth: protos[parent].depth + 1,
            width: rng.random_range(20..120),
            height: rng.random_range(16..70),
            west: rng.random_range(0..3),
            east: rng.random_range(0..3),
        });
    }
    let ports = |p: &Proto| -> Vec<DiagPort> {
        (0..p.west)
            .map(|k| DiagPort { id: format!("{}.w{k}", p.id), side: Side::West, label: format!("w{k}") })
            .chain((0..p.east).map(|k| DiagPort { id: format!("{}.e{k}", p.id), side: Side::East, label: format!("e{k}") }))
            .collect()
    };

    // edges join ports of siblings or a container's own ports with its children
    let mut edges = Vec::new();
    for (c, cp) in protos.iter().enumerate() {
        let kids: Vec<usize> = (0..protos.len()).filter(|&k| protos[k].parent == Some(c)).collect();
        if kids.is_empty() {
            continue;
        }
        let count = rng.random_range(0..=kids.len() * 2);
        for _ in 0..count {
            let pick = |rng: &mut StdRng, own_ok: bool| -> usize {
                if own_ok && rng.random_bool(0.15) {
                    c
                } else {
                    kids[rng.random_range(0..kids.len())]
                }
            };
            let s = pick(&mut rng, true);
            let t = pick(&mut rng, s != c);
            let sp = ports(&protos[s]);
            let tp = ports(&protos[t]);
            if sp.is_empty() || tp.is_empty() {
                continue;
            }
            let source = sp[rng.random_range(0..sp.len())].id.clone();
            let target = tp[rng.random_range(0..tp.len())].id.clone();
            let kind = [EdgeKind::Connection, EdgeKind::Trigger, EdgeKind::Effect][rng.random_range(0..3)];
            edges.push(DiagEdge { id: format!("{}~e{}", cp.id, edges.len()), source, target, kind, container: cp.id.clone() });
        }
    }

    fn build(i: usize, protos: &[Proto], ports: &dyn Fn(&Proto) -> Vec<DiagPort>) -> DiagNode {
        let p = &protos[i];
        let children: Vec<DiagNode> =
            (0..protos.len()).filter(|&k| protos[k].parent == Some(i)).map(|k| build(k, protos, ports)).collect();
        let kind = match (p.depth, children.is_empty()) {
            (0, _) => NodeKind::Reactor,
            (_, false) => NodeKind::Instance,
            _ => NodeKind::Reaction,
        };
        DiagNode { id: p.id.clone(), kind, label: p.id.clone(), ports: ports(p), children, width: p.width, height: p.height }
    }
    DiagramGraph { nodes: vec![build(0, &protos, &ports)], edges }
}

// ---------------------------------------------------------------- oracles

use forge_core::diagram::{LaidNode, LaidOutDiagram};
use forge_core::layout::{layout_with_trace, ContainerTrace, LayoutConfig};
use std::collections::{HashMap, HashSet};

/// Kahn's algorithm; true when every node can be ordered.
pub fn toposort_ok(nodes: &[&str], edges: &[(String, String)]) -> bool {
    let mut indeg: HashMap<&str, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for (_, t) in edges {
        *indeg.get_mut(t.as_str()).expect("edge target is a node") += 1;
    }
    let mut ready: Vec<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(n, _)| *n).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for (s, t) in edges {
            if s == n {
                let d = indeg.get_mut(t.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(t.as_str());
                }
            }
        }
    }
    seen == nodes.len()
}

/// Counts crossing pairs by checking every pair of edges.
pub fn pair_crossings(layers: &[Vec<String>], edges: &[(String, String)]) -> usize {
    let mut pos = HashMap::new();
    for (l, layer) in layers.iter().enumerate() {
        for (p, v) in layer.iter().enumerate() {
            pos.insert(v.as_str(), (l, p));
        }
    }
    let norm: Vec<((usize, usize), (usize, usize))> = edges
        .iter()
        .map(|(a, b)| {
            let (pa, pb) = (pos[a.as_str()], pos[b.as_str()]);
            if pa.0 <= pb.0 {
                (pa, pb)
            } else {
                (pb, pa)
            }
        })
        .collect();
    let mut count = 0;
    for i in 0..norm.len() {
        for j in i + 1..norm.len() {
            let (a, b) = (norm[i], norm[j]);
            if a.0 .0 == b.0 .0 && (a.0 .1 < b.0 .1 && a.1 .1 > b.1 .1 || a.0 .1 > b.0 .1 && a.1 .1 < b.1 .1) {
                count += 1;
            }
        }
    }
    count
}

fn rect(n: &LaidNode) -> (i64, i64, i64, i64) {
    (n.x, n.y, n.x + n.width, n.y + n.height)
}

pub fn rects_overlap(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64)) -> bool {
    a.0 < b.2 && b.0 < a.2 && a.1 < b.3 && b.1 < a.3
}

fn geometry_violations(n: &LaidNode, cfg: &LayoutConfig, out: &mut Vec<String>) {
    let (x0, y0, x1, y1) = rect(n);
    for (i, a) in n.children.iter().enumerate() {
        let r = rect(a);
        if r.0 < x0 + cfg.padding || r.1 < y0 + cfg.padding || r.2 > x1 - cfg.padding || r.3 > y1 - cfg.padding {
            out.push(format!("{} escapes {}", a.id, n.id));
        }
        for b in &n.children[i + 1..] {
            if rects_overlap(r, rect(b)) {
                out.push(format!("{} overlaps {}", a.id, b.id));
            }
        }
        geometry_violations(a, cfg, out);
    }
}

fn trace_violations(t: &ContainerTrace, out: &mut Vec<String>) {
    let reversed: HashSet<&str> = t.reversed.iter().map(String::as_str).collect();
    let dag: Vec<(String, String)> = t
        .edges
        .iter()
        .zip(&t.edge_ids)
        .map(|((s, d), id)| if reversed.contains(id.as_str()) { (d.clone(), s.clone()) } else { (s.clone(), d.clone()) })
        .collect();
    let nodes: Vec<&str> = t.layers.keys().map(String::as_str).collect();
    if !toposort_ok(&nodes, &dag) {
        out.push(format!("{}: edges still cyclic after breaking", t.container));
    }
    for ((s, d), id) in t.edges.iter().zip(&t.edge_ids) {
        let (ls, ld) = (t.layers[s], t.layers[d]);
        let ok = if reversed.contains(id.as_str()) { ls > ld } else { ld > ls };
        if !ok {
            out.push(format!("{}: edge {id} not monotone ({ls} -> {ld})", t.container));
        }
    }
    let mut initial = t.order.clone();
    for l in &mut initial {
        l.sort();
    }
    let before = pair_crossings(&initial, &t.unit_edges);
    let after = pair_crossings(&t.order, &t.unit_edges);
    if after > before {
        out.push(format!("{}: crossings grew from {before} to {after}", t.container));
    }
    if after != t.final_crossings || before != t.initial_crossings {
        out.push(format!("{}: reported crossings disagree with pair counter", t.container));
    }
}

fn route_violations(d: &LaidOutDiagram, out: &mut Vec<String>) {
    for e in &d.edges {
        let (Some(s), Some(t)) = (d.port(&e.source), d.port(&e.target)) else {
            out.push(format!("{}: dangling endpoint", e.id));
            continue;
        };
        let (first, last) = (e.points.first(), e.points.last());
        if first.map(|p| (p.x, p.y)) != Some((s.x, s.y)) || last.map(|p| (p.x, p.y)) != Some((t.x, t.y)) {
            out.push(format!("{}: route does not join its ports", e.id));
        }
    }
}

/// Lays `g` out twice and reports every broken layout invariant.
pub fn layout_violations(g: &DiagramGraph, cfg: &LayoutConfig) -> Vec<String> {
    let (d, traces) = layout_with_trace(g, cfg);
    let mut out = Vec::new();
    for t in &traces {
        trace_violations(t, &mut out);
    }
    for (i, a) in d.nodes.iter().enumerate() {
        for b in &d.nodes[i + 1..] {
            if rects_overlap(rect(a), rect(b)) {
                out.push(format!("{} overlaps {}", a.id, b.id));
            }
        }
        geometry_violations(a, cfg, &mut out);
    }
    route_violations(&d, &mut out);
    let again = layout_with_trace(g, cfg).0;
    if serde_json::to_string(&d).unwrap() != serde_json::to_string(&again).unwrap() {
        out.push("layout is not deterministic".into());
    }
    out
}

// ---------------------------------------------------------------- tool calls

use forge_core::toolgen::{JsonType, SlotKind, ToolSchema};

fn pick<'a>(rng: &mut rand::rngs::StdRng, items: &[&'a str]) -> &'a str {
    use rand::Rng;
    items[rng.random_range(0..items.len())]
}

fn random_ident(rng: &mut rand::rngs::StdRng) -> String {
    use rand::Rng;
    loop {
        let len = rng.random_range(1..8);
        let s: String = (0..len)
            .map(|i| {
                let pool: &[u8] = if i == 0 { b"abcxyzTRS_" } else { b"abcxyz0129_TRS" };
                pool[rng.random_range(0..pool.len())] as char
            })
            .collect();
        if is_identifier(&s) {
            return s;
        }
    }
}

/// A schema-valid value for one parameter of the given slot kind.
pub fn random_slot_value(kind: SlotKind, rng: &mut rand::rngs::StdRng) -> String {
    use rand::Rng;
    match kind {
        SlotKind::Identifier | SlotKind::Text => random_ident(rng),
        SlotKind::Integer => rng.random_range(-500i64..500).to_string(),
        SlotKind::Expression => match rng.random_range(0..4) {
            0 => "0".into(),
            1 => random_ident(rng),
            _ => format!("{} {}", rng.random_range(0u64..5000), pick(rng, &TimeUnit::ALL.iter().map(|u| u.as_str()).collect::<Vec<_>>())),
        },
        SlotKind::Attribute => {
            let text: String = (0..rng.random_range(0..10)).map(|_| pick(rng, &["a", "b", " ", "9", "-"])).collect();
            format!("@label(\"{text}\")")
        }
        SlotKind::TypeName => format!("{}{}", pick(rng, &["int", "bool", "double", "time"]), "*".repeat(rng.random_range(0..2))),
        SlotKind::Reference => match rng.random_range(0..3) {
            0 => format!("{}.{}", random_ident(rng), random_ident(rng)),
            _ => random_ident(rng),
        },
        SlotKind::Code => {
            let parts = ["x = 1;", " ", "\n", "f(a, b);", "{ }", "\"s\"", "// c", "=", "{", "}", "->", ";"];
            (0..rng.random_range(0..8)).map(|_| pick(rng, &parts)).collect::<String>().replace("=}", "= }")
        }
    }
}

/// Arguments that satisfy `schema`: every required parameter, a random
/// subset of optional ones, and values of the declared JSON type.
pub fn random_arguments(schema: &ToolSchema, rng: &mut rand::rngs::StdRng) -> serde_json::Value {
    use rand::Rng;
    let mut obj = serde_json::Map::new();
    for p in &schema.parameters {
        if p.optional && rng.random_bool(0.4) {
            continue;
        }
        let value = match p.json_type {
            JsonType::String => serde_json::Value::String(random_slot_value(p.kind, rng)),
            JsonType::Integer => serde_json::json!(rng.random_range(-500i64..500)),
            JsonType::Boolean => serde_json::json!(rng.random_bool(0.5)),
            JsonType::ArrayOfString => serde_json::Value::Array(
                (0..rng.random_range(0..4)).map(|_| serde_json::Value::String(random_slot_value(p.kind, rng))).collect(),
            ),
        };
        obj.insert(p.name.clone(), value);
    }
    serde_json::Value::Object(obj)
}
