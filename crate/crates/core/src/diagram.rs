//! Transient diagram view of a model: synthesis into a compound
//! node/port/edge graph, and rendering of a laid-out graph as SVG or JSON.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::lf::{Element, Model, ReactorDef, Ref, BUILTIN_TRIGGERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Reactor,
    Instance,
    Timer,
    Reaction,
    PortProxy,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Reactor => "reactor",
            NodeKind::Instance => "instance",
            NodeKind::Timer => "timer",
            NodeKind::Reaction => "reaction",
            NodeKind::PortProxy => "port-proxy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    West,
    East,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Connection,
    Trigger,
    Effect,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Connection => "connection",
            EdgeKind::Trigger => "trigger",
            EdgeKind::Effect => "effect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagPort {
    pub id: String,
    pub side: Side,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    pub ports: Vec<DiagPort>,
    pub children: Vec<DiagNode>,
    /// Minimum size derived from label length and port count.
    pub width: i64,
    pub height: i64,
}

impl DiagNode {
    /// Pre-order traversal including `self`.
    pub fn walk(&self) -> Vec<&DiagNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagEdge {
    pub id: String,
    /// Port id.
    pub source: String,
    /// Port id.
    pub target: String,
    pub kind: EdgeKind,
    /// Id of the compound node whose body declares the edge.
    pub container: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramGraph {
    pub nodes: Vec<DiagNode>,
    pub edges: Vec<DiagEdge>,
}

impl DiagramGraph {
    pub fn all_nodes(&self) -> Vec<&DiagNode> {
        self.nodes.iter().flat_map(DiagNode::walk).collect()
    }

    /// Maps every port id to the id of the node that owns it.
    pub fn port_owners(&self) -> HashMap<&str, &str> {
        let mut out = HashMap::new();
        for n in self.all_nodes() {
            for p in &n.ports {
                out.insert(p.id.as_str(), n.id.as_str());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisConfig {
    /// How many levels of instantiation are shown with their contents.
    pub depth: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig { depth: 1 }
    }
}

const CHAR_WIDTH: i64 = 7;
const LABEL_PAD: i64 = 16;
const PORT_PITCH: i64 = 16;

fn size_hint(kind: NodeKind, label: &str, west: usize, east: usize) -> (i64, i64) {
    let label_w = label.chars().count() as i64 * CHAR_WIDTH + LABEL_PAD;
    let port_h = west.max(east) as i64 * PORT_PITCH + 16;
    match kind {
        NodeKind::Reactor | NodeKind::Instance => (label_w.max(80), port_h.max(48)),
        NodeKind::Timer => (label_w.max(40), 40),
        NodeKind::Reaction => (label_w.max(36), 30),
        NodeKind::PortProxy => (label_w.max(48), 24),
    }
}

fn leaf(id: String, kind: NodeKind, label: String, ports: Vec<DiagPort>) -> DiagNode {
    let west = ports.iter().filter(|p| p.side == Side::West).count();
    let east = ports.len() - west;
    let (width, height) = size_hint(kind, &label, west, east);
    DiagNode { id, kind, label, ports, children: Vec::new(), width, height }
}

/// Builds the diagram of the main reactor, or of every reactor definition
/// when the model has no main reactor.
pub fn synthesize(model: &Model) -> DiagramGraph {
    synthesize_with(model, SynthesisConfig::default())
}

pub fn synthesize_with(model: &Model, cfg: SynthesisConfig) -> DiagramGraph {
    let mut b = Builder { model, cfg, ids: HashSet::new(), edges: Vec::new() };
    let mains: Vec<&ReactorDef> = model.reactors.iter().filter(|r| r.is_main).collect();
    let roots: Vec<&ReactorDef> = if mains.is_empty() { model.reactors.iter().collect() } else { mains };
    let mut nodes = Vec::new();
    for def in roots {
        let base = if def.is_main {
            "main".to_string()
        } else {
            format!("reactor:{}", def.display_name())
        };
        let id = b.alloc(&base);
        let mut stack = vec![def.name.as_deref().unwrap_or("")];
        let node = b.reactor_node(id, NodeKind::Reactor, def.display_name().to_string(), def, 0, &mut stack);
        nodes.push(node);
    }
    DiagramGraph { nodes, edges: b.edges }
}

struct Builder<'m> {
    model: &'m Model,
    cfg: SynthesisConfig,
    ids: HashSet<String>,
    edges: Vec<DiagEdge>,
}

/// Per-container lookup tables used while resolving references.
#[derive(Default)]
struct Scope {
    own_ports: HashMap<String, String>,
    timers: HashMap<String, String>,
    children: HashMap<String, HashMap<String, String>>,
    proxies: Vec<DiagNode>,
    proxy_index: HashMap<String, usize>,
}

impl<'m> Builder<'m> {
    fn alloc(&mut self, base: &str) -> String {
        let mut id = base.to_string();
        let mut n = 2;
        while self.ids.contains(&id) {
            id = format!("{base}~{n}");
            n += 1;
        }
        self.ids.insert(id.clone());
        id
    }

    fn ports_of(&mut self, node_id: &str, def: &ReactorDef) -> (Vec<DiagPort>, HashMap<String, String>) {
        let mut ports = Vec::new();
        let mut names = HashMap::new();
        let decls: Vec<(String, Side)> = def
            .inputs()
            .map(|p| (p.name.clone(), Side::West))
            .chain(def.outputs().map(|p| (p.name.clone(), Side::East)))
            .collect();
        for (name, side) in decls {
            let id = self.alloc(&format!("{node_id}.{name}"));
            names.entry(name.clone()).or_insert_with(|| id.clone());
            ports.push(DiagPort { id, side, label: name });
        }
        (ports, names)
    }

    fn reactor_node<'a>(
        &mut self,
        id: String,
        kind: NodeKind,
        label: String,
        def: &'a ReactorDef,
        level: usize,
        stack: &mut Vec<&'a str>,
    ) -> DiagNode
    where
        'm: 'a,
    {
        let (ports, own_ports) = self.ports_of(&id, def);
        let mut node = leaf(id.clone(), kind, label, ports);
        if level > self.cfg.depth {
            return node;
        }
        let mut scope = Scope { own_ports, ..Scope::default() };
        let mut children = Vec::new();
        let mut reaction_ids = Vec::new();

        for e in &def.elements {
            match e {
                Element::Timer(t) => {
                    let tid = self.alloc(&format!("{id}/{}", t.name));
                    let port = self.alloc(&format!("{tid}.out"));
                    scope.timers.entry(t.name.clone()).or_insert_with(|| port.clone());
                    let label = t.label.clone().unwrap_or_else(|| t.name.clone());
                    children.push(leaf(
                        tid,
                        NodeKind::Timer,
                        label,
                        vec![DiagPort { id: port, side: Side::East, label: String::new() }],
                    ));
                }
                Element::Reaction(_) => {
                    let k = reaction_ids.len() + 1;
                    let rid = self.alloc(&format!("{id}/reaction#{k}"));
                    let pin = self.alloc(&format!("{rid}.in"));
                    let pout = self.alloc(&format!("{rid}.out"));
                    reaction_ids.push((pin.clone(), pout.clone()));
                    children.push(leaf(
                        rid,
                        NodeKind::Reaction,
                        k.to_string(),
                        vec![
                            DiagPort { id: pin, side: Side::West, label: String::new() },
                            DiagPort { id: pout, side: Side::East, label: String::new() },
                        ],
                    ));
                }
                Element::Instantiation(inst) => {
                    let cid = self.alloc(&format!("{id}/{}", inst.name));
                    let label = format!("{}: {}", inst.name, inst.reactor);
                    let class = self.model.reactors.iter().find(|r| r.name.as_deref() == Some(&inst.reactor));
                    let child = match class {
                        Some(cdef) if !stack.contains(&inst.reactor.as_str()) => {
                            stack.push(cdef.name.as_deref().unwrap_or(""));
                            let n = self.reactor_node(cid, NodeKind::Instance, label, cdef, level + 1, stack);
                            stack.pop();
                            n
                        }
                        Some(cdef) => {
                            let (ports, _) = self.ports_of(&cid, cdef);
                            leaf(cid, NodeKind::Instance, label, ports)
                        }
                        None => leaf(cid, NodeKind::Instance, label, Vec::new()),
                    };
                    let ports: HashMap<String, String> =
                        child.ports.iter().rev().map(|p| (p.label.clone(), p.id.clone())).collect();
                    scope.children.entry(inst.name.clone()).or_insert(ports);
                    children.push(child);
                }
                Element::Input(_) | Element::Output(_) | Element::State(_) | Element::Connection(_) => {}
            }
        }

        let mut reactions = reaction_ids.iter();
        for e in &def.elements {
            match e {
                Element::Connection(c) => {
                    let s = self.endpoint(&id, &mut scope, &c.from, Side::East);
                    let t = self.endpoint(&id, &mut scope, &c.to, Side::West);
                    self.edge(&id, s, t, EdgeKind::Connection);
                }
                Element::Reaction(r) => {
                    let (pin, pout) = reactions.next().expect("one port pair per reaction").clone();
                    for trig in &r.triggers {
                        let s = self.endpoint(&id, &mut scope, trig, Side::East);
                        self.edge(&id, s, pin.clone(), EdgeKind::Trigger);
                    }
                    for eff in &r.effects {
                        let t = self.endpoint(&id, &mut scope, eff, Side::West);
                        self.edge(&id, pout.clone(), t, EdgeKind::Effect);
                    }
                }
                _ => {}
            }
        }

        children.append(&mut scope.proxies);
        node.children = children;
        node
    }

    fn edge(&mut self, container: &str, source: String, target: String, kind: EdgeKind) {
        let n = self.edges.iter().filter(|e| e.container == container).count() + 1;
        let id = self.alloc(&format!("{container}~e{n}"));
        self.edges.push(DiagEdge { id, source, target, kind, container: container.to_string() });
    }

    /// Port id for `r`, creating a port proxy when `r` does not name a port.
    /// `side` is the side a proxy port needs to face the rest of the edge.
    fn endpoint(&mut self, container: &str, scope: &mut Scope, r: &Ref, side: Side) -> String {
        let found = match &r.container {
            None if !BUILTIN_TRIGGERS.contains(&r.name.as_str()) => {
                scope.own_ports.get(&r.name).or_else(|| scope.timers.get(&r.name)).cloned()
            }
            None => None,
            Some(child) => scope.children.get(child).and_then(|ports| ports.get(&r.name)).cloned(),
        };
        if let Some(port) = found {
            return port;
        }
        let text = r.to_string();
        let idx = match scope.proxy_index.get(&text) {
            Some(&i) => i,
            None => {
                let pid = self.alloc(&format!("{container}/?{text}"));
                scope.proxies.push(leaf(pid, NodeKind::PortProxy, text.clone(), Vec::new()));
                scope.proxy_index.insert(text, scope.proxies.len() - 1);
                scope.proxies.len() - 1
            }
        };
        let suffix = if side == Side::East { "out" } else { "in" };
        let proxy = &scope.proxies[idx];
        if let Some(p) = proxy.ports.iter().find(|p| p.side == side) {
            return p.id.clone();
        }
        let port_id = self.alloc(&format!("{}.{suffix}", proxy.id));
        let proxy = &mut scope.proxies[idx];
        proxy.ports.push(DiagPort { id: port_id.clone(), side, label: String::new() });
        proxy.ports.sort_by_key(|p| p.side == Side::East);
        port_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaidPort {
    pub id: String,
    pub side: Side,
    pub label: String,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaidNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
    pub ports: Vec<LaidPort>,
    pub children: Vec<LaidNode>,
}

impl LaidNode {
    pub fn walk(&self) -> Vec<&LaidNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaidEdge {
    pub id: String,
    pub kind: EdgeKind,
    pub source: String,
    pub target: String,
    pub container: String,
    /// Polyline from the source port to the target port.
    pub points: Vec<Point>,
    /// Set when cycle breaking flipped the edge during layering.
    pub reversed: bool,
}

/// Absolute coordinates for every node, port and edge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaidOutDiagram {
    pub width: i64,
    pub height: i64,
    pub nodes: Vec<LaidNode>,
    pub edges: Vec<LaidEdge>,
}

impl LaidOutDiagram {
    pub fn all_nodes(&self) -> Vec<&LaidNode> {
        self.nodes.iter().flat_map(LaidNode::walk).collect()
    }

    pub fn port(&self, id: &str) -> Option<&LaidPort> {
        self.all_nodes().into_iter().flat_map(|n| &n.ports).find(|p| p.id == id)
    }
}

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const STYLE: &str = "\
.frame{fill:#f4f7fb;stroke:#4a5a70;stroke-width:1}\
.instance>.frame{fill:#e6eef8}\
.reaction>.frame,.timer>.frame{fill:none;stroke:none}\
.port-proxy>.frame{fill:#fff;stroke-dasharray:4 2}\
.chevron{fill:#d9d9d9;stroke:#333}\
.glyph{fill:#fff;stroke:#333}\
.port{fill:#333}\
.edge{fill:none;stroke:#333;stroke-width:1.2}\
.trigger,.effect{stroke-dasharray:3 2}\
text{font-family:sans-serif;font-size:11px}";

/// Standalone SVG document. Output is a pure function of the input.
pub fn render_svg(d: &LaidOutDiagram) -> String {
    let (w, h) = (d.width.max(1), d.height.max(1));
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let title = d.nodes.iter().map(|n| n.label.as_str()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "<title>{}</title>", esc(&title));
    let _ = writeln!(s, "<style>{STYLE}</style>");
    for n in &d.nodes {
        svg_node(&mut s, n);
    }
    for e in &d.edges {
        let pts: Vec<String> = e.points.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="edge {}" data-id="{}" points="{}"/>"#,
            e.kind.as_str(),
            esc(&e.id),
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

fn svg_node(s: &mut String, n: &LaidNode) {
    let (x, y, w, h) = (n.x, n.y, n.width, n.height);
    let _ = writeln!(s, r#"<g class="{}" data-id="{}">"#, n.kind.as_str(), esc(&n.id));
    let _ = writeln!(
        s,
        r#"<rect class="frame" data-id="{}" x="{x}" y="{y}" width="{w}" height="{h}" rx="6" ry="6"/>"#,
        esc(&n.id)
    );
    match n.kind {
        NodeKind::Reaction => {
            let notch = (w / 5).min(10);
            let _ = writeln!(
                s,
                r#"<polygon class="chevron" points="{},{} {},{} {},{} {},{} {},{} {},{}"/>"#,
                x,
                y,
                x + w - notch,
                y,
                x + w,
                y + h / 2,
                x + w - notch,
                y + h,
                x,
                y + h,
                x + notch,
                y + h / 2
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                x + w / 2,
                y + h / 2 + 4,
                esc(&n.label)
            );
        }
        NodeKind::Timer => {
            let (cx, cy, r) = (x + w / 2, y + 14, 10);
            let _ = writeln!(s, r#"<circle class="glyph clock" cx="{cx}" cy="{cy}" r="{r}"/>"#);
            let _ = writeln!(
                s,
                r#"<path class="glyph hands" d="M{cx},{} L{cx},{cy} L{},{cy}"/>"#,
                cy - 7,
                cx + 5
            );
            let _ = writeln!(
                s,
                r#"<text x="{cx}" y="{}" text-anchor="middle">{}</text>"#,
                y + h - 3,
                esc(&n.label)
            );
        }
        _ => {
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 6, y + 14, esc(&n.label));
        }
    }
    for p in &n.ports {
        let _ = writeln!(
            s,
            r#"<polygon class="port" data-id="{}" points="{},{} {},{} {},{}"/>"#,
            esc(&p.id),
            p.x - 4,
            p.y - 4,
            p.x + 4,
            p.y,
            p.x - 4,
            p.y + 4
        );
        if !p.label.is_empty() && !n.children.is_empty() {
            let (lx, anchor) = match p.side {
                Side::West => (p.x + 7, "start"),
                Side::East => (p.x - 7, "end"),
            };
            let _ = writeln!(
                s,
                r#"<text x="{lx}" y="{}" text-anchor="{anchor}">{}</text>"#,
                p.y - 5,
                esc(&p.label)
            );
        }
    }
    for c in &n.children {
        svg_node(s, c);
    }
    s.push_str("</g>\n");
}

/// Flat render spec for canvas clients. Coordinates match [`render_svg`].
pub fn render_json(d: &LaidOutDiagram) -> String {
    serde_json::to_string_pretty(&render_value(d)).expect("render spec serializes")
}

pub fn render_value(d: &LaidOutDiagram) -> serde_json::Value {
    let mut nodes = Vec::new();
    fn visit(n: &LaidNode, parent: Option<&str>, out: &mut Vec<serde_json::Value>) {
        out.push(json!({
            "id": n.id,
            "kind": n.kind,
            "label": n.label,
            "parent": parent,
            "x": n.x,
            "y": n.y,
            "w": n.width,
            "h": n.height,
            "ports": n.ports.iter().map(|p| json!({
                "id": p.id, "side": p.side, "label": p.label, "x": p.x, "y": p.y,
            })).collect::<Vec<_>>(),
        }));
        for c in &n.children {
            visit(c, Some(&n.id), out);
        }
    }
    for n in &d.nodes {
        visit(n, None, &mut nodes);
    }
    let edges: Vec<_> = d
        .edges
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "kind": e.kind,
                "source": e.source,
                "target": e.target,
                "points": e.points.iter().map(|p| json!({"x": p.x, "y": p.y})).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "width": d.width, "height": d.height, "nodes": nodes, "edges": edges })
}
