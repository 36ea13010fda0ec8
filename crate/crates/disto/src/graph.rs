//! Finite labeled multi-relational digraphs, generators and exhaustive enumeration.
//!
//! Relations are 0-based in memory and 1-based in every external format.
//! A label of `bits` bits is stored as an integer whose bit `i` is the
//! `i`-th character of the bitstring, so `"10"` is the value 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type Label = u32;

/// Largest supported label width.
pub const MAX_BITS: usize = 24;

/// Enumeration refuses to produce more than this many digraphs.
pub const ENUMERATION_LIMIT: u64 = 1 << 30;

/// A finite `bits`-bit labeled, `rels`-relational digraph with nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Digraph {
    bits: usize,
    labels: Vec<Label>,
    /// Per relation, sorted and duplicate-free `(src, dst)` pairs.
    edges: Vec<Vec<(NodeId, NodeId)>>,
}

/// A digraph with a distinguished node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pointed {
    pub graph: Digraph,
    pub point: NodeId,
}

pub fn label_to_string(label: Label, bits: usize) -> String {
    (0..bits).map(|i| if label >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_label(s: &str) -> Result<Label> {
    if s.len() > MAX_BITS {
        return Err(Error::Format(format!("label {s:?} is longer than {MAX_BITS} bits")));
    }
    s.chars().enumerate().try_fold(0, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << i),
        _ => Err(Error::Format(format!("label {s:?} is not a bitstring"))),
    })
}

impl Digraph {
    /// Builds a digraph from 0-based `(rel, src, dst)` triples.
    pub fn new(
        bits: usize,
        rels: usize,
        labels: Vec<Label>,
        edges: impl IntoIterator<Item = (usize, NodeId, NodeId)>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Digraph("a digraph needs at least one node".into()));
        }
        if rels == 0 {
            return Err(Error::Digraph("a digraph needs at least one relation".into()));
        }
        if bits > MAX_BITS {
            return Err(Error::Digraph(format!("at most {MAX_BITS} label bits are supported")));
        }
        if let Some(l) = labels.iter().find(|&&l| bits < 32 && l >> bits != 0) {
            return Err(Error::Digraph(format!("label {l} does not fit in {bits} bits")));
        }
        let n = labels.len();
        let mut per_rel = vec![Vec::new(); rels];
        for (r, u, v) in edges {
            if r >= rels {
                return Err(Error::Digraph(format!("relation {} out of range", r + 1)));
            }
            if u >= n || v >= n {
                return Err(Error::Digraph(format!("dangling endpoint in edge ({u},{v})")));
            }
            per_rel[r].push((u, v));
        }
        for es in &mut per_rel {
            es.sort_unstable();
            es.dedup();
        }
        Ok(Digraph { bits, labels, edges: per_rel })
    }

    /// Unlabeled (0-bit) digraph.
    pub fn unlabeled(n: usize, rels: usize, edges: impl IntoIterator<Item = (usize, NodeId, NodeId)>) -> Result<Self> {
        Self::new(0, rels, vec![0; n], edges)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn rels(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: NodeId) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn edges(&self, rel: usize) -> &[(NodeId, NodeId)] {
        &self.edges[rel]
    }

    /// All edges as `(rel, src, dst)` in canonical (lexicographic) order.
    pub fn all_edges(&self) -> impl Iterator<Item = (usize, NodeId, NodeId)> + '_ {
        self.edges.iter().enumerate().flat_map(|(r, es)| es.iter().map(move |&(u, v)| (r, u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, rel: usize, u: NodeId, v: NodeId) -> bool {
        self.edges[rel].binary_search(&(u, v)).is_ok()
    }

    /// `incoming()[v][r]` lists the `r`-predecessors of `v`.
    pub fn incoming(&self) -> Vec<Vec<Vec<NodeId>>> {
        let mut inc = vec![vec![Vec::new(); self.rels()]; self.node_count()];
        for (r, u, v) in self.all_edges() {
            inc[v][r].push(u);
        }
        inc
    }

    /// `outgoing()[v][r]` lists the `r`-successors of `v`.
    pub fn outgoing(&self) -> Vec<Vec<Vec<NodeId>>> {
        let mut out = vec![vec![Vec::new(); self.rels()]; self.node_count()];
        for (r, u, v) in self.all_edges() {
            out[u][r].push(v);
        }
        out
    }

    pub fn with_labels(&self, bits: usize, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::Digraph("label count differs from node count".into()));
        }
        Self::new(bits, self.rels(), labels, self.all_edges())
    }

    pub fn pointed(self, point: NodeId) -> Result<Pointed> {
        if point >= self.node_count() {
            return Err(Error::Digraph(format!("point {point} is not a node")));
        }
        Ok(Pointed { graph: self, point })
    }

    /// Dipath check: nodes `0..n` in some order linked by single-relation
    /// edges `(v_i, v_{i+1})`, nothing else.
    pub fn is_dipath(&self) -> bool {
        let n = self.node_count();
        if self.rels() != 1 || self.edge_count() != n - 1 {
            return false;
        }
        let out = self.outgoing();
        let inc = self.incoming();
        let Some(start) = (0..n).find(|&v| inc[v][0].is_empty()) else { return false };
        let (mut v, mut seen) = (start, 1);
        while let [next] = out[v][0][..] {
            if next == start || inc[next][0].len() != 1 {
                return false;
            }
            v = next;
            seen += 1;
            if seen > n {
                return false;
            }
        }
        seen == n
    }

    /// Ditree check: edges point from children to parents; the root is the
    /// unique node without outgoing edges and every node reaches it.
    pub fn ditree_root(&self) -> Option<NodeId> {
        let n = self.node_count();
        let out = self.outgoing();
        let outdeg: Vec<usize> = (0..n).map(|v| out[v].iter().map(Vec::len).sum()).collect();
        let roots: Vec<NodeId> = (0..n).filter(|&v| outdeg[v] == 0).collect();
        if roots.len() != 1 || outdeg.iter().any(|&d| d > 1) {
            return None;
        }
        for v in 0..n {
            let (mut u, mut steps) = (v, 0);
            while outdeg[u] == 1 {
                u = out[u].iter().flatten().copied().next().unwrap();
                steps += 1;
                if steps > n {
                    return None;
                }
            }
        }
        Some(roots[0])
    }

    /// Ordered ditree: a ditree where each node has at most one incoming
    /// `i`-neighbor and an incoming `(i+1)`-neighbor implies an incoming `i`-neighbor.
    pub fn is_ordered_ditree(&self) -> bool {
        if self.ditree_root().is_none() {
            return false;
        }
        self.incoming().iter().all(|rels| {
            rels.iter().all(|us| us.len() <= 1) && rels.windows(2).all(|w| w[1].is_empty() || !w[0].is_empty())
        })
    }
}

impl Pointed {
    pub fn new(graph: Digraph, point: NodeId) -> Result<Self> {
        graph.pointed(point)
    }
}

/// Structure classes known to the generators and enumerators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    Dipath,
    OrderedDitree,
    Grid,
    General,
    Undirected,
}

impl std::str::FromStr for StructureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dipath" => Self::Dipath,
            "ordered-ditree" => Self::OrderedDitree,
            "grid" => Self::Grid,
            "general" => Self::General,
            "undirected" => Self::Undirected,
            _ => return Err(Error::Format(format!("unknown structure kind {s:?}"))),
        })
    }
}

/// Parameters for [`generate`]. Unused fields are ignored by each kind.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub nodes: usize,
    pub height: usize,
    pub width: usize,
    /// Relation count (arity for ordered ditrees).
    pub rels: usize,
    pub bits: usize,
    pub labels: Option<Vec<Label>>,
    /// Edge probability for random kinds.
    pub density: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { nodes: 1, height: 1, width: 1, rels: 1, bits: 0, labels: None, density: 0.3, seed: 0 }
    }
}

/// Dipath `0 -> 1 -> ... -> n-1`, pointed at its last node.
pub fn dipath(n: usize) -> Result<Pointed> {
    if n == 0 {
        return Err(Error::Digraph("a dipath needs at least one node".into()));
    }
    Digraph::unlabeled(n, 1, (1..n).map(|i| (0, i - 1, i)))?.pointed(n - 1)
}

/// Labeled dipath spelling `word`, pointed at its last node.
pub fn word_dipath(bits: usize, word: &[Label]) -> Result<Pointed> {
    let d = dipath(word.len())?;
    d.graph.with_labels(bits, word.to_vec())?.pointed(d.point)
}

/// Node id of grid cell `(i, j)`, both 0-based, in row-major order.
pub fn grid_id(width: usize, i: usize, j: usize) -> NodeId {
    i * width + j
}

/// Grid cell of a node id, inverse of [`grid_id`].
pub fn grid_coords(width: usize, v: NodeId) -> (usize, usize) {
    (v / width, v % width)
}

/// `h x w` grid: relation 1 points down `(i,j) -> (i+1,j)`, relation 2 points
/// right `(i,j) -> (i,j+1)`. Pointed at the upper-left corner.
pub fn grid(h: usize, w: usize) -> Result<Pointed> {
    if h == 0 || w == 0 {
        return Err(Error::Digraph("grid dimensions must be positive".into()));
    }
    let mut edges = Vec::new();
    for i in 0..h {
        for j in 0..w {
            if i + 1 < h {
                edges.push((0, grid_id(w, i, j), grid_id(w, i + 1, j)));
            }
            if j + 1 < w {
                edges.push((1, grid_id(w, i, j), grid_id(w, i, j + 1)));
            }
        }
    }
    Digraph::unlabeled(h * w, 2, edges)?.pointed(0)
}

/// Complete `arity`-ary ordered ditree on `n` nodes in breadth-first order.
/// Node `k > 0` is child number `(k-1) % arity` of node `(k-1) / arity`.
pub fn complete_ordered_ditree(n: usize, arity: usize) -> Result<Pointed> {
    if n == 0 || arity == 0 {
        return Err(Error::Digraph("ditree needs a node and a positive arity".into()));
    }
    let edges = (1..n).map(|k| ((k - 1) % arity, k, (k - 1) / arity));
    Digraph::unlabeled(n, arity, edges)?.pointed(0)
}

pub fn random_digraph(n: usize, bits: usize, rels: usize, density: f64, rng: &mut impl Rng) -> Result<Digraph> {
    let labels = (0..n).map(|_| if bits == 0 { 0 } else { rng.gen_range(0..1u32 << bits) }).collect();
    let mut edges = Vec::new();
    for r in 0..rels {
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(density) {
                    edges.push((r, u, v));
                }
            }
        }
    }
    Digraph::new(bits, rels, labels, edges)
}

fn random_undirected(n: usize, bits: usize, density: f64, rng: &mut impl Rng) -> Result<Digraph> {
    let labels = (0..n).map(|_| if bits == 0 { 0 } else { rng.gen_range(0..1u32 << bits) }).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.extend([(0, u, v), (0, v, u)]);
            }
        }
    }
    Digraph::new(bits, 1, labels, edges)
}

/// Builds a structure of the requested kind. Dipaths point at the last node,
/// ditrees at the root, grids at the upper-left corner; other kinds are unpointed.
pub fn generate(kind: StructureKind, p: &GenParams) -> Result<(Digraph, Option<NodeId>)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed);
    if p.nodes == 0 {
        return Err(Error::Digraph("node count must be positive".into()));
    }
    let (mut d, point) = match kind {
        StructureKind::Dipath => {
            let pd = dipath(p.nodes)?;
            (pd.graph, Some(pd.point))
        }
        StructureKind::Grid => {
            let pd = grid(p.height, p.width)?;
            (pd.graph, Some(pd.point))
        }
        StructureKind::OrderedDitree => {
            let pd = complete_ordered_ditree(p.nodes, p.rels)?;
            (pd.graph, Some(pd.point))
        }
        StructureKind::General => (random_digraph(p.nodes, 0, p.rels, p.density, &mut rng)?, None),
        StructureKind::Undirected => (random_undirected(p.nodes, 0, p.density, &mut rng)?, None),
    };
    let labels = match &p.labels {
        Some(ls) => ls.clone(),
        None if p.bits == 0 => vec![0; d.node_count()],
        None => (0..d.node_count()).map(|_| rng.gen_range(0..1u32 << p.bits)).collect(),
    };
    d = d.with_labels(p.bits, labels)?;
    Ok((d, point))
}

/// Number of digraphs [`enumerate_digraphs`] yields for `General`.
pub fn general_count(max_nodes: usize, bits: usize, rels: usize) -> u64 {
    (1..=max_nodes as u64)
        .map(|n| {
            let e = n * n * rels as u64 + n * bits as u64;
            if e >= 63 { u64::MAX } else { 1u64 << e }
        })
        .fold(0u64, u64::saturating_add)
}

/// Every labeled structure of the kind with at most `max_nodes` nodes, each
/// exactly once under node-id identity (no isomorphism reduction). Dipaths
/// point at node `n-1`, ditrees at node 0, grids at node 0.
pub fn enumerate_digraphs(
    max_nodes: usize,
    bits: usize,
    rels: usize,
    kind: StructureKind,
) -> Result<Box<dyn Iterator<Item = Digraph>>> {
    if bits > MAX_BITS || rels == 0 {
        return Err(Error::Digraph("bad enumeration signature".into()));
    }
    let shapes: Vec<Digraph> = match kind {
        StructureKind::General => {
            if general_count(max_nodes, bits, rels) > ENUMERATION_LIMIT {
                return Err(Error::Bound(format!(
                    "enumerating all {bits}-bit {rels}-relational digraphs up to {max_nodes} nodes"
                )));
            }
            return Ok(Box::new((1..=max_nodes).flat_map(move |n| {
                let slots = n * n * rels;
                (0u64..1 << slots).flat_map(move |mask| {
                    let edges: Vec<_> = (0..slots)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| (i / (n * n), i % (n * n) / n, i % n))
                        .collect();
                    let base = Digraph::new(0, rels, vec![0; n], edges).expect("valid by construction");
                    all_labelings(base, bits)
                })
            })));
        }
        StructureKind::Undirected => {
            if rels != 1 {
                return Err(Error::Digraph("undirected graphs use one relation".into()));
            }
            let mut out = Vec::new();
            for n in 1..=max_nodes {
                let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
                if pairs.len() > 24 {
                    return Err(Error::Bound("undirected enumeration too large".into()));
                }
                for mask in 0u32..1 << pairs.len() {
                    let edges = pairs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .flat_map(|(_, &(u, v))| [(0, u, v), (0, v, u)]);
                    out.push(Digraph::unlabeled(n, 1, edges)?);
                }
            }
            out
        }
        StructureKind::Dipath => {
            if rels != 1 {
                return Err(Error::Digraph("dipaths use one relation".into()));
            }
            (1..=max_nodes).map(|n| dipath(n).map(|p| p.graph)).collect::<Result<_>>()?
        }
        StructureKind::Grid => {
            if rels != 2 {
                return Err(Error::Digraph("grids use two relations".into()));
            }
            let mut out = Vec::new();
            for h in 1..=max_nodes {
                for w in 1..=max_nodes / h {
                    out.push(grid(h, w)?.graph);
                }
            }
            out
        }
        StructureKind::OrderedDitree => ordered_ditrees(max_nodes, rels)?,
    };
    if shapes.len() as u64 * (1u64 << (bits * max_nodes).min(62)) > ENUMERATION_LIMIT {
        return Err(Error::Bound("enumeration too large".into()));
    }
    Ok(Box::new(shapes.into_iter().flat_map(move |d| all_labelings(d, bits))))
}

fn all_labelings(d: Digraph, bits: usize) -> impl Iterator<Item = Digraph> {
    let n = d.node_count();
    let total_bits = n * bits;
    assert!(total_bits < 40, "labeling enumeration too large");
    (0u64..1 << total_bits).map(move |m| {
        let labels = (0..n).map(|v| ((m >> (v * bits)) & ((1u64 << bits) - 1)) as Label).collect();
        d.with_labels(bits, labels).expect("labels fit")
    })
}

/// Ordered ditree shape: children in relation order.
#[derive(Clone, Debug)]
struct Shape(Vec<Shape>);

fn shapes_of_size(n: usize, arity: usize, memo: &mut Vec<Option<Vec<Shape>>>) -> Vec<Shape> {
    if let Some(s) = &memo[n] {
        return s.clone();
    }
    // Distribute n-1 nodes over k ordered nonempty children, 0 <= k <= arity.
    fn forests(total: usize, slots: usize, arity: usize, memo: &mut Vec<Option<Vec<Shape>>>) -> Vec<Vec<Shape>> {
        if total == 0 {
            return vec![vec![]];
        }
        if slots == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        for first in 1..=total {
            let heads = shapes_of_size(first, arity, memo);
            let tails = forests(total - first, slots - 1, arity, memo);
            for h in &heads {
                for t in &tails {
                    let mut f = vec![h.clone()];
                    f.extend(t.iter().cloned());
                    out.push(f);
                }
            }
        }
        out
    }
    let res: Vec<Shape> = forests(n - 1, arity, arity, memo).into_iter().map(Shape).collect();
    memo[n] = Some(res.clone());
    res
}

fn shape_to_digraph(s: &Shape, arity: usize) -> Digraph {
    let mut edges = Vec::new();
    let mut queue = std::collections::VecDeque::from([(s, 0usize)]);
    let mut next = 1;
    while let Some((sh, id)) = queue.pop_front() {
        for (i, c) in sh.0.iter().enumerate() {
            edges.push((i, next, id));
            queue.push_back((c, next));
            next += 1;
        }
    }
    Digraph::unlabeled(next, arity, edges).expect("valid by construction")
}

/// All unlabeled ordered `arity`-ary ditrees with at most `max_nodes` nodes, root 0.
pub fn ordered_ditrees(max_nodes: usize, arity: usize) -> Result<Vec<Digraph>> {
    if max_nodes > 12 {
        return Err(Error::Bound("ordered ditree enumeration is limited to 12 nodes".into()));
    }
    let mut memo = vec![None; max_nodes + 1];
    Ok((1..=max_nodes)
        .flat_map(|n| shapes_of_size(n, arity, &mut memo))
        .map(|s| shape_to_digraph(&s, arity))
        .collect())
}

/// Binary ordered ditrees of height at most `h` (a single node has height 0).
pub fn ordered_binary_ditrees_by_height(h: usize) -> Vec<Digraph> {
    fn build(h: usize) -> Vec<Shape> {
        if h == 0 {
            return vec![Shape(vec![])];
        }
        let sub = build(h - 1);
        let mut out = vec![Shape(vec![])];
        for a in &sub {
            out.push(Shape(vec![a.clone()]));
            for b in &sub {
                out.push(Shape(vec![a.clone(), b.clone()]));
            }
        }
        out
    }
    build(h).iter().map(|s| shape_to_digraph(s, 2)).collect()
}

/// All labeled pointed ditrees (not necessarily ordered) with at most
/// `max_nodes` nodes, root 0, node `i > 0` hanging below some node `< i`.
/// Smaller trees come first.
pub fn enumerate_ditrees(max_nodes: usize, bits: usize, rels: usize) -> Result<impl Iterator<Item = Pointed>> {
    if max_nodes > 9 {
        return Err(Error::Bound("ditree enumeration is limited to 9 nodes".into()));
    }
    if bits * max_nodes > 20 {
        return Err(Error::Bound("too many labelings for ditree enumeration".into()));
    }
    Ok((1..=max_nodes).flat_map(move |n| {
        // Mixed-radix counter over parent choices and relation choices.
        let radices: Vec<usize> = (1..n).map(|i| i * rels).collect();
        let total: usize = radices.iter().product();
        (0..total).flat_map(move |mut code| {
            let mut edges = Vec::with_capacity(n - 1);
            for (i, &r) in radices.iter().enumerate() {
                let c = code % r;
                code /= r;
                edges.push((c % rels, i + 1, c / rels));
            }
            let base = Digraph::new(0, rels, vec![0; n], edges).expect("valid by construction");
            all_labelings(base, bits).map(|d| Pointed { graph: d, point: 0 })
        })
    }))
}

/// External JSON form of a (pointed) digraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigraphJson {
    pub bits: usize,
    pub relations: usize,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<[usize; 3]>,
    pub point: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub label: String,
}

/// First violated digraph invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyDomain,
    NoRelations,
    NonDenseIds(usize),
    LabelWidth { node: usize, label: String },
    RelationOutOfRange(usize),
    DanglingEndpoint { src: usize, dst: usize },
    PointOutOfRange(usize),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptyDomain => write!(f, "empty domain"),
            Violation::NoRelations => write!(f, "no relations"),
            Violation::NonDenseIds(id) => write!(f, "node ids are not 0..n-1 in order (saw {id})"),
            Violation::LabelWidth { node, label } => write!(f, "label {label:?} of node {node} has the wrong width"),
            Violation::RelationOutOfRange(r) => write!(f, "relation {r} out of range"),
            Violation::DanglingEndpoint { src, dst } => write!(f, "dangling endpoint in edge ({src},{dst})"),
            Violation::PointOutOfRange(p) => write!(f, "point {p} is not a node"),
        }
    }
}

/// Checks every digraph invariant on the external form.
pub fn validate(d: &DigraphJson) -> std::result::Result<(), Violation> {
    if d.nodes.is_empty() {
        return Err(Violation::EmptyDomain);
    }
    if d.relations == 0 {
        return Err(Violation::NoRelations);
    }
    let n = d.nodes.len();
    for (i, node) in d.nodes.iter().enumerate() {
        if node.id != i {
            return Err(Violation::NonDenseIds(node.id));
        }
        if node.label.len() != d.bits || parse_label(&node.label).is_err() {
            return Err(Violation::LabelWidth { node: i, label: node.label.clone() });
        }
    }
    for &[r, u, v] in &d.edges {
        if r == 0 || r > d.relations {
            return Err(Violation::RelationOutOfRange(r));
        }
        if u >= n || v >= n {
            return Err(Violation::DanglingEndpoint { src: u, dst: v });
        }
    }
    match d.point {
        Some(p) if p >= n => Err(Violation::PointOutOfRange(p)),
        _ => Ok(()),
    }
}

impl Digraph {
    pub fn to_json(&self, point: Option<NodeId>) -> DigraphJson {
        DigraphJson {
            bits: self.bits,
            relations: self.rels(),
            nodes: self
                .labels
                .iter()
                .enumerate()
                .map(|(id, &l)| NodeJson { id, label: label_to_string(l, self.bits) })
                .collect(),
            edges: self.all_edges().map(|(r, u, v)| [r + 1, u, v]).collect(),
            point,
        }
    }

    pub fn from_json(j: &DigraphJson) -> Result<(Digraph, Option<NodeId>)> {
        validate(j).map_err(|v| Error::Digraph(v.to_string()))?;
        let labels = j.nodes.iter().map(|n| parse_label(&n.label)).collect::<Result<Vec<_>>>()?;
        let d = Digraph::new(j.bits, j.relations, labels, j.edges.iter().map(|&[r, u, v]| (r - 1, u, v)))?;
        Ok((d, j.point))
    }
}

impl Pointed {
    pub fn to_json(&self) -> DigraphJson {
        self.graph.to_json(Some(self.point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(n: usize, edges: Vec<[usize; 3]>) -> DigraphJson {
        DigraphJson {
            bits: 0,
            relations: 1,
            nodes: (0..n).map(|id| NodeJson { id, label: String::new() }).collect(),
            edges,
            point: None,
        }
    }

    #[test]
    fn validate_minimal_and_dangling() {
        assert_eq!(validate(&raw(1, vec![])), Ok(()));
        assert_eq!(validate(&raw(2, vec![[1, 0, 5]])), Err(Violation::DanglingEndpoint { src: 0, dst: 5 }));
        assert_eq!(validate(&raw(0, vec![])), Err(Violation::EmptyDomain));
    }

    #[test]
    fn validate_labeled_cycle() {
        let mut j = raw(3, vec![[1, 0, 1], [1, 1, 2], [1, 2, 0]]);
        j.bits = 1;
        for (n, l) in j.nodes.iter_mut().zip(["1", "0", "0"]) {
            n.label = l.into();
        }
        assert_eq!(validate(&j), Ok(()));
        j.nodes[1].label = "01".into();
        assert!(matches!(validate(&j), Err(Violation::LabelWidth { node: 1, .. })));
    }

    #[test]
    fn dipath_shape() {
        let p = dipath(3).unwrap();
        assert_eq!(p.graph.edges(0), &[(0, 1), (1, 2)]);
        assert_eq!(p.point, 2);
        assert!(p.graph.is_dipath());
        assert!(dipath(0).is_err());
    }

    #[test]
    fn grid_2x2_relations() {
        let g = grid(2, 2).unwrap().graph;
        // (1,1)=0, (1,2)=1, (2,1)=2, (2,2)=3
        assert_eq!(g.edges(0), &[(0, 2), (1, 3)]);
        assert_eq!(g.edges(1), &[(0, 1), (2, 3)]);
        assert!(grid(0, 3).is_err());
    }

    #[test]
    fn single_root_ditree() {
        let t = complete_ordered_ditree(1, 2).unwrap();
        assert_eq!(t.graph.edge_count(), 0);
        assert_eq!(t.point, 0);
        assert!(t.graph.is_ordered_ditree());
        assert!(complete_ordered_ditree(6, 2).unwrap().graph.is_ordered_ditree());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_digraphs(1, 0, 1, StructureKind::General).unwrap().count(), 2);
        assert_eq!(enumerate_digraphs(2, 0, 1, StructureKind::General).unwrap().count(), 18);
        assert_eq!(enumerate_digraphs(2, 0, 1, StructureKind::Dipath).unwrap().count(), 2);
        assert_eq!(enumerate_digraphs(2, 1, 1, StructureKind::General).unwrap().count(), 4 + 64);
        assert!(enumerate_digraphs(7, 0, 1, StructureKind::General).is_err());
    }

    #[test]
    fn ordered_ditree_counts() {
        // Binary ordered trees (child 2 needs child 1): sizes 1,1,2,5,... (Motzkin numbers).
        let trees = ordered_ditrees(5, 2).unwrap();
        let mut per = [0; 6];
        for t in &trees {
            assert!(t.is_ordered_ditree());
            per[t.node_count()] += 1;
        }
        assert_eq!(&per[1..], &[1, 1, 2, 4, 9]);
        assert_eq!(ordered_binary_ditrees_by_height(2).len(), 13);
    }

    #[test]
    fn ditree_enumeration_yields_ditrees() {
        let all: Vec<_> = enumerate_ditrees(4, 0, 1).unwrap().collect();
        assert_eq!(all.len(), 1 + 1 + 2 + 6);
        assert!(all.iter().all(|p| p.graph.ditree_root() == Some(0)));
    }

    #[test]
    fn json_roundtrip() {
        let (d, p) = generate(StructureKind::General, &GenParams { nodes: 4, bits: 2, rels: 2, seed: 7, ..Default::default() })
            .unwrap();
        let j = d.to_json(p);
        let text = serde_json::to_string(&j).unwrap();
        let back: DigraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Digraph::from_json(&back).unwrap(), (d, p));
        assert!(text.starts_with("{\"bits\":2,\"relations\":2,\"nodes\""));
    }

    #[test]
    fn labels_are_bitstrings() {
        assert_eq!(parse_label("10").unwrap(), 1);
        assert_eq!(label_to_string(1, 2), "10");
        assert_eq!(label_to_string(0, 0), "");
        assert!(parse_label("12").is_err());
    }
}
