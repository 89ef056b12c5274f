//! Layered left-to-right layout for compound diagrams.
//!
//! Each container is laid out after its children: greedy DFS cycle breaking,
//! longest-path layering with dummy vertices, barycenter ordering that keeps
//! the best ordering seen, then stacked coordinates. Ties are broken by id.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagram::{
    DiagNode, DiagramGraph, LaidEdge, LaidNode, LaidOutDiagram, LaidPort, NodeKind, Point, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub layer_spacing: i64,
    pub node_spacing: i64,
    pub padding: i64,
    pub crossing_sweeps: usize,
    /// Height reserved for a compound node's label.
    pub header: i64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { layer_spacing: 40, node_spacing: 20, padding: 16, crossing_sweeps: 4, header: 20 }
    }
}

impl LayoutConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.layer_spacing <= 0 || self.node_spacing <= 0 || self.padding <= 0 {
            return Err("spacings and padding must be positive".into());
        }
        if self.header < 0 {
            return Err("header must not be negative".into());
        }
        if self.crossing_sweeps == 0 {
            return Err("at least one crossing sweep is required".into());
        }
        Ok(())
    }
}

/// Intermediate results for one container, exposed for inspection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ContainerTrace {
    /// Empty for the top level that holds the root nodes.
    pub container: String,
    /// Layered edges between children as (source node, target node).
    pub edges: Vec<(String, String)>,
    pub edge_ids: Vec<String>,
    /// Ids of edges flipped by cycle breaking.
    pub reversed: Vec<String>,
    pub layers: BTreeMap<String, usize>,
    /// Final vertex order per layer, dummies included.
    pub order: Vec<Vec<String>>,
    /// Unit-span edges between consecutive layers, oriented downwards.
    pub unit_edges: Vec<(String, String)>,
    pub initial_crossings: usize,
    pub final_crossings: usize,
    pub dummies: usize,
}

// ---------------------------------------------------------------- phases

fn break_cycles_idx(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, i));
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut reversed = vec![false; edges.len()];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&(v, ei)) = adj[u].get(*next) {
                *next += 1;
                match state[v] {
                    0 => {
                        state[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => reversed[ei] = true,
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    reversed
}

fn longest_path_idx(n: usize, dag: &[(usize, usize)]) -> Vec<usize> {
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in dag {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut layer = vec![0usize; n];
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = ready.pop() {
        for &v in &out[u] {
            layer[v] = layer[v].max(layer[u] + 1);
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(v);
            }
        }
    }
    layer
}

/// Crossings between consecutive layers, by inversion counting.
fn crossings_idx(layers: &[Vec<usize>], unit: &[(usize, usize)], nverts: usize) -> usize {
    let mut pos = vec![0usize; nverts];
    let mut layer_of = vec![0usize; nverts];
    for (l, layer) in layers.iter().enumerate() {
        for (p, &v) in layer.iter().enumerate() {
            pos[v] = p;
            layer_of[v] = l;
        }
    }
    let mut by_layer: Vec<Vec<(usize, usize)>> = vec![Vec::new(); layers.len()];
    for &(u, v) in unit {
        by_layer[layer_of[u]].push((pos[u], pos[v]));
    }
    let mut total = 0;
    for (l, mut pairs) in by_layer.into_iter().enumerate() {
        if pairs.len() < 2 {
            continue;
        }
        pairs.sort_unstable();
        let width = layers.get(l + 1).map_or(0, Vec::len) + 1;
        let mut tree = vec![0usize; width + 1];
        for (seen, &(_, b)) in pairs.iter().enumerate() {
            let mut at_most = 0;
            let mut i = b + 1;
            while i > 0 {
                at_most += tree[i];
                i &= i - 1;
            }
            total += seen - at_most;
            let mut i = b + 1;
            while i <= width {
                tree[i] += 1;
                i += i & i.wrapping_neg();
            }
        }
    }
    total
}

fn minimize_idx(
    mut layers: Vec<Vec<usize>>,
    unit: &[(usize, usize)],
    names: &[String],
    sweeps: usize,
) -> (Vec<Vec<usize>>, usize, usize) {
    let n = names.len();
    let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut down: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in unit {
        down[u].push(v);
        up[v].push(u);
    }
    let initial = crossings_idx(&layers, unit, n);
    let mut best = (layers.clone(), initial);
    let mut pos = vec![0usize; n];
    for sweep in 0..sweeps {
        if best.1 == 0 {
            break;
        }
        let downward = sweep % 2 == 0;
        let order: Vec<usize> = if downward {
            (1..layers.len()).collect()
        } else {
            (0..layers.len().saturating_sub(1)).rev().collect()
        };
        for l in order {
            let reference = if downward { l - 1 } else { l + 1 };
            for (p, &v) in layers[reference].iter().enumerate() {
                pos[v] = p;
            }
            let neighbours = if downward { &up } else { &down };
            let mut keyed: Vec<(f64, usize)> = layers[l]
                .iter()
                .enumerate()
                .map(|(p, &v)| {
                    let ns = &neighbours[v];
                    let bary = if ns.is_empty() {
                        p as f64
                    } else {
                        ns.iter().map(|&u| pos[u] as f64).sum::<f64>() / ns.len() as f64
                    };
                    (bary, v)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| names[a.1].cmp(&names[b.1])));
            layers[l] = keyed.into_iter().map(|(_, v)| v).collect();
        }
        let c = crossings_idx(&layers, unit, n);
        if c < best.1 {
            best = (layers.clone(), c);
        }
    }
    (best.0, initial, best.1)
}

fn index_of(nodes: &[&str]) -> HashMap<String, usize> {
    nodes.iter().enumerate().map(|(i, n)| (n.to_string(), i)).collect()
}

/// Greedy DFS cycle breaking. Returns the acyclic edge list (back edges
/// flipped) and the indices of the flipped edges. Nodes are visited in id
/// order. Self-loops are returned unchanged.
pub fn break_cycles(nodes: &[&str], edges: &[(&str, &str)]) -> (Vec<(String, String)>, Vec<usize>) {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let idx = index_of(&sorted);
    let pairs: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (idx[*u], idx[*v])).collect();
    let loops: Vec<bool> = pairs.iter().map(|(u, v)| u == v).collect();
    let proper: Vec<(usize, usize)> = pairs.iter().copied().filter(|(u, v)| u != v).collect();
    let flags = break_cycles_idx(sorted.len(), &proper);
    let mut flipped = flags.into_iter();
    let mut out = Vec::new();
    let mut reversed = Vec::new();
    for (i, (u, v)) in edges.iter().enumerate() {
        if !loops[i] && flipped.next().unwrap_or(false) {
            reversed.push(i);
            out.push((v.to_string(), u.to_string()));
        } else {
            out.push((u.to_string(), v.to_string()));
        }
    }
    (out, reversed)
}

/// Longest-path layering of an acyclic graph; sources get layer 0.
pub fn assign_layers(nodes: &[&str], edges: &[(&str, &str)]) -> BTreeMap<String, usize> {
    let idx = index_of(nodes);
    let pairs: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (idx[*u], idx[*v])).collect();
    longest_path_idx(nodes.len(), &pairs)
        .into_iter()
        .enumerate()
        .map(|(i, l)| (nodes[i].to_string(), l))
        .collect()
}

/// Node names, layers as index lists, and edges as index pairs pointing down.
type LayeredIndex = (Vec<String>, Vec<Vec<usize>>, Vec<(usize, usize)>);

fn layered_index(layers: &[Vec<String>], edges: &[(String, String)]) -> LayeredIndex {
    let names: Vec<String> = layers.iter().flatten().cloned().collect();
    let idx: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut layer_of = vec![0usize; names.len()];
    let mut ilayers = Vec::new();
    let mut next = 0;
    for (l, layer) in layers.iter().enumerate() {
        ilayers.push((next..next + layer.len()).collect::<Vec<_>>());
        layer_of[next..next + layer.len()].fill(l);
        next += layer.len();
    }
    let unit = edges
        .iter()
        .map(|(u, v)| {
            let (a, b) = (idx[u.as_str()], idx[v.as_str()]);
            if layer_of[a] <= layer_of[b] {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    (names, ilayers, unit)
}

/// Crossings of `edges`, each joining vertices in adjacent layers.
pub fn count_crossings(layers: &[Vec<String>], edges: &[(String, String)]) -> usize {
    let (names, ilayers, unit) = layered_index(layers, edges);
    crossings_idx(&ilayers, &unit, names.len())
}

/// Barycenter sweeps alternating down and up; returns the ordering with the
/// fewest crossings seen, the input ordering included.
pub fn minimize_crossings(layers: Vec<Vec<String>>, edges: &[(String, String)], sweeps: usize) -> Vec<Vec<String>> {
    let (names, ilayers, unit) = layered_index(&layers, edges);
    let (best, _, _) = minimize_idx(ilayers, &unit, &names, sweeps);
    best.into_iter().map(|l| l.into_iter().map(|v| names[v].clone()).collect()).collect()
}

// ---------------------------------------------------------------- groups

struct GroupEdge {
    id: String,
    from: usize,
    to: usize,
}

struct GroupLayout {
    positions: Vec<(i64, i64)>,
    width: i64,
    height: i64,
    /// Edge id, dummy points in source-to-target order, reversed flag.
    routes: Vec<(String, Vec<Point>, bool)>,
    trace: ContainerTrace,
}

fn place_group(ids: &[&str], sizes: &[(i64, i64)], edges: &[GroupEdge], cfg: &LayoutConfig) -> GroupLayout {
    // work in id order regardless of declaration order
    let mut perm: Vec<usize> = (0..ids.len()).collect();
    perm.sort_by(|&a, &b| ids[a].cmp(ids[b]));
    let mut rank = vec![0usize; ids.len()];
    for (r, &i) in perm.iter().enumerate() {
        rank[i] = r;
    }
    let n = ids.len();
    let mut names: Vec<String> = perm.iter().map(|&i| ids[i].to_string()).collect();
    let mut dims: Vec<(i64, i64)> = perm.iter().map(|&i| sizes[i]).collect();

    let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (rank[e.from], rank[e.to])).collect();
    let reversed = break_cycles_idx(n, &pairs);
    let dag: Vec<(usize, usize)> =
        pairs.iter().zip(&reversed).map(|(&(u, v), &r)| if r { (v, u) } else { (u, v) }).collect();
    let mut layer = longest_path_idx(n, &dag);

    let mut unit = Vec::new();
    let mut chains = Vec::new();
    for (e, &(a, b)) in edges.iter().zip(&dag) {
        let mut chain = vec![a];
        for (k, _) in (layer[a] + 1..layer[b]).enumerate() {
            names.push(format!("{}~{}", e.id, k + 1));
            dims.push((0, 0));
            layer.push(layer[a] + 1 + k);
            chain.push(names.len() - 1);
        }
        chain.push(b);
        unit.extend(chain.windows(2).map(|w| (w[0], w[1])));
        chains.push(chain);
    }
    let dummies = names.len() - n;

    let depth = layer.iter().max().map_or(0, |m| m + 1);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..names.len() {
        layers[layer[v]].push(v);
    }
    for l in &mut layers {
        l.sort_by(|&a, &b| names[a].cmp(&names[b]));
    }
    let (order, initial_crossings, final_crossings) = minimize_idx(layers, &unit, &names, cfg.crossing_sweeps);

    let column = dims[..n].iter().map(|d| d.0).max().unwrap_or(0);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    for &(u, v) in &unit {
        preds[v].push(u);
    }
    let mut xy = vec![(0i64, 0i64); names.len()];
    let mut height = 0;
    for (l, vs) in order.iter().enumerate() {
        let col_x = l as i64 * (column + cfg.layer_spacing);
        let mut min_y = 0;
        for &v in vs {
            let (w, h) = dims[v];
            let desired = if preds[v].is_empty() {
                min_y
            } else {
                let centers: i64 = preds[v].iter().map(|&u| xy[u].1 + dims[u].1 / 2).sum();
                centers / preds[v].len() as i64 - h / 2
            };
            let y = desired.max(min_y);
            xy[v] = (col_x + (column - w) / 2, y);
            min_y = y + h + cfg.node_spacing;
            height = height.max(y + h);
        }
    }
    let width = if depth == 0 { 0 } else { depth as i64 * column + (depth as i64 - 1) * cfg.layer_spacing };

    let routes = edges
        .iter()
        .zip(&chains)
        .zip(&reversed)
        .map(|((e, chain), &rev)| {
            let mut pts: Vec<Point> = chain[1..chain.len() - 1]
                .iter()
                .map(|&d| Point { x: xy[d].0, y: xy[d].1 })
                .collect();
            if rev {
                pts.reverse();
            }
            (e.id.clone(), pts, rev)
        })
        .collect();

    let trace = ContainerTrace {
        container: String::new(),
        edges: dag
            .iter()
            .zip(&reversed)
            .map(|(&(u, v), &r)| if r { (names[v].clone(), names[u].clone()) } else { (names[u].clone(), names[v].clone()) })
            .collect(),
        edge_ids: edges.iter().map(|e| e.id.clone()).collect(),
        reversed: edges.iter().zip(&reversed).filter(|(_, &r)| r).map(|(e, _)| e.id.clone()).collect(),
        layers: (0..n).map(|v| (names[v].clone(), layer[v])).collect(),
        order: order.iter().map(|l| l.iter().map(|&v| names[v].clone()).collect()).collect(),
        unit_edges: unit.iter().map(|&(u, v)| (names[u].clone(), names[v].clone())).collect(),
        initial_crossings,
        final_crossings,
        dummies,
    };
    GroupLayout { positions: (0..ids.len()).map(|i| xy[rank[i]]).collect(), width, height, routes, trace }
}

// ---------------------------------------------------------------- compounds

struct Placed<'g> {
    node: &'g DiagNode,
    width: i64,
    height: i64,
    kids: Vec<(i64, i64, Placed<'g>)>,
    routes: Vec<(String, Vec<Point>, bool)>,
}

struct Ctx<'g> {
    cfg: LayoutConfig,
    owners: HashMap<&'g str, &'g str>,
    by_container: HashMap<&'g str, Vec<&'g crate::diagram::DiagEdge>>,
    traces: Vec<ContainerTrace>,
}

fn shift(routes: &mut [(String, Vec<Point>, bool)], dx: i64, dy: i64) {
    for (_, pts, _) in routes {
        for p in pts {
            p.x += dx;
            p.y += dy;
        }
    }
}

fn place<'g>(node: &'g DiagNode, ctx: &mut Ctx<'g>) -> Placed<'g> {
    let kids: Vec<Placed<'g>> = node.children.iter().map(|c| place(c, ctx)).collect();
    if kids.is_empty() {
        return Placed { node, width: node.width, height: node.height, kids: Vec::new(), routes: Vec::new() };
    }
    let ids: Vec<&str> = node.children.iter().map(|c| c.id.as_str()).collect();
    let slot: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut group_edges = Vec::new();
    for e in ctx.by_container.get(node.id.as_str()).into_iter().flatten() {
        let from = ctx.owners.get(e.source.as_str()).and_then(|o| slot.get(o));
        let to = ctx.owners.get(e.target.as_str()).and_then(|o| slot.get(o));
        if let (Some(&from), Some(&to)) = (from, to) {
            if from != to {
                group_edges.push(GroupEdge { id: e.id.clone(), from, to });
            }
        }
    }
    let sizes: Vec<(i64, i64)> = kids.iter().map(|k| (k.width, k.height)).collect();
    let cfg = ctx.cfg;
    let mut g = place_group(&ids, &sizes, &group_edges, &cfg);
    g.trace.container = node.id.clone();
    ctx.traces.push(g.trace);
    let (ox, oy) = (cfg.padding, cfg.header + cfg.padding);
    shift(&mut g.routes, ox, oy);
    Placed {
        node,
        width: node.width.max(g.width + 2 * cfg.padding),
        height: node.height.max(cfg.header + g.height + 2 * cfg.padding),
        kids: kids.into_iter().zip(g.positions).map(|(k, (x, y))| (ox + x, oy + y, k)).collect(),
        routes: g.routes,
    }
}

struct Emit {
    ports: HashMap<String, (Point, Side)>,
    rects: HashMap<String, (i64, i64, i64, i64)>,
    routes: HashMap<String, (Vec<Point>, bool)>,
}

fn port_top(node: &DiagNode, header: i64, height: i64) -> i64 {
    match node.kind {
        NodeKind::Reactor | NodeKind::Instance => header.min(height / 2),
        _ => 0,
    }
}

fn emit(p: Placed<'_>, x: i64, y: i64, cfg: &LayoutConfig, out: &mut Emit) -> LaidNode {
    let n = p.node;
    let top = port_top(n, cfg.header, p.height);
    let mut ports = Vec::new();
    for side in [Side::West, Side::East] {
        let on_side: Vec<_> = n.ports.iter().filter(|q| q.side == side).collect();
        let count = on_side.len() as i64;
        for (i, q) in on_side.into_iter().enumerate() {
            let px = if side == Side::West { x } else { x + p.width };
            let py = y + top + (p.height - top) * (2 * i as i64 + 1) / (2 * count);
            out.ports.insert(q.id.clone(), (Point { x: px, y: py }, side));
            ports.push(LaidPort { id: q.id.clone(), side, label: q.label.clone(), x: px, y: py });
        }
    }
    // keep declaration order in the output
    ports.sort_by_key(|lp| n.ports.iter().position(|q| q.id == lp.id));
    out.rects.insert(n.id.clone(), (x, y, p.width, p.height));
    for (id, mut pts, rev) in p.routes {
        for pt in &mut pts {
            pt.x += x;
            pt.y += y;
        }
        out.routes.insert(id, (pts, rev));
    }
    let children = p.kids.into_iter().map(|(cx, cy, k)| emit(k, x + cx, y + cy, cfg, out)).collect();
    LaidNode {
        id: n.id.clone(),
        kind: n.kind,
        label: n.label.clone(),
        x,
        y,
        width: p.width,
        height: p.height,
        ports,
        children,
    }
}

const LOOP_GAP: i64 = 8;

fn route(e: &crate::diagram::DiagEdge, ctx: &Ctx<'_>, em: &Emit) -> (Vec<Point>, bool) {
    let (s, s_side) = em.ports.get(&e.source).copied().unwrap_or((Point { x: 0, y: 0 }, Side::East));
    let (t, t_side) = em.ports.get(&e.target).copied().unwrap_or((Point { x: 0, y: 0 }, Side::West));
    if let Some((dummies, rev)) = em.routes.get(&e.id) {
        let mut pts = vec![s];
        pts.extend(dummies.iter().copied());
        pts.push(t);
        return (pts, *rev);
    }
    let so = ctx.owners.get(e.source.as_str()).copied();
    let to = ctx.owners.get(e.target.as_str()).copied();
    if so.is_some() && so == to {
        let (_, ry, _, _) = em.rects[so.unwrap_or_default()];
        let out = |p: Point, side: Side| match side {
            Side::West => p.x - LOOP_GAP,
            Side::East => p.x + LOOP_GAP,
        };
        let top = ry - LOOP_GAP;
        let (sx, tx) = (out(s, s_side), out(t, t_side));
        return (
            vec![s, Point { x: sx, y: s.y }, Point { x: sx, y: top }, Point { x: tx, y: top }, Point { x: tx, y: t.y }, t],
            false,
        );
    }
    if s.y == t.y {
        return (vec![s, t], false);
    }
    let mx = (s.x + t.x) / 2;
    (vec![s, Point { x: mx, y: s.y }, Point { x: mx, y: t.y }, t], false)
}

pub fn layout(g: &DiagramGraph, cfg: &LayoutConfig) -> LaidOutDiagram {
    layout_with_trace(g, cfg).0
}

/// Same as [`layout`], also returning the per-container intermediate results.
pub fn layout_with_trace(g: &DiagramGraph, cfg: &LayoutConfig) -> (LaidOutDiagram, Vec<ContainerTrace>) {
    let mut by_container: HashMap<&str, Vec<_>> = HashMap::new();
    for e in &g.edges {
        by_container.entry(e.container.as_str()).or_default().push(e);
    }
    let mut ctx = Ctx { cfg: *cfg, owners: g.port_owners(), by_container, traces: Vec::new() };
    let placed: Vec<Placed<'_>> = g.nodes.iter().map(|n| place(n, &mut ctx)).collect();

    let ids: Vec<&str> = g.nodes.iter().map(|n| n.id.as_str()).collect();
    let sizes: Vec<(i64, i64)> = placed.iter().map(|p| (p.width, p.height)).collect();
    let top = place_group(&ids, &sizes, &[], cfg);
    ctx.traces.push(top.trace);

    let mut em = Emit { ports: HashMap::new(), rects: HashMap::new(), routes: HashMap::new() };
    let nodes = placed
        .into_iter()
        .zip(top.positions)
        .map(|(p, (x, y))| emit(p, cfg.padding + x, cfg.padding + y, cfg, &mut em))
        .collect();
    let edges = g
        .edges
        .iter()
        .map(|e| {
            let (points, reversed) = route(e, &ctx, &em);
            LaidEdge {
                id: e.id.clone(),
                kind: e.kind,
                source: e.source.clone(),
                target: e.target.clone(),
                container: e.container.clone(),
                points,
                reversed,
            }
        })
        .collect();
    let d = LaidOutDiagram {
        width: top.width + 2 * cfg.padding,
        height: top.height + 2 * cfg.padding,
        nodes,
        edges,
    };
    (d, ctx.traces)
}
