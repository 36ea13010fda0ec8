//! Grids: a structural recognizer and tiling systems over labeled grids.
//!
//! Relation 1 points down and relation 2 points right, as in
//! [`crate::graph::grid`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{label_to_string, parse_label, Digraph, Label, NodeId};

/// The six structural conditions, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GridCondition {
    /// Both relations are partial injective functions.
    I,
    /// Following either relation from any node reaches a sink.
    II,
    /// Exactly one node is a source of both relations.
    III,
    /// Relation-1 neighbors of relation-2 sources are relation-2 sources.
    IV,
    /// A node with both successors has a down-then-right descendant.
    V,
    /// Down-then-right equals right-then-down.
    VI,
}

impl fmt::Display for GridCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GridCondition::I => "i",
            GridCondition::II => "ii",
            GridCondition::III => "iii",
            GridCondition::IV => "iv",
            GridCondition::V => "v",
            GridCondition::VI => "vi",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridVerdict {
    /// `coords[v]` is the `(row, column)` of node `v`.
    Grid { height: usize, width: usize, coords: Vec<(usize, usize)> },
    Failed(GridCondition),
}

impl GridVerdict {
    pub fn is_grid(&self) -> bool {
        matches!(self, GridVerdict::Grid { .. })
    }
}

/// Checks the six conditions in order and reports the first one violated.
pub fn grid_validate(d: &Digraph) -> Result<GridVerdict> {
    if d.rels() != 2 {
        return Err(Error::Arity { expected: 2, found: d.rels() });
    }
    let n = d.node_count();
    let out = d.outgoing();
    let inc = d.incoming();
    if (0..n).any(|v| (0..2).any(|r| out[v][r].len() > 1 || inc[v][r].len() > 1)) {
        return Ok(GridVerdict::Failed(GridCondition::I));
    }
    let succ = |v: NodeId, r: usize| out[v][r].first().copied();
    let pred = |v: NodeId, r: usize| inc[v][r].first().copied();
    for r in 0..2 {
        for v in 0..n {
            let (mut u, mut steps) = (v, 0);
            while let Some(w) = succ(u, r) {
                u = w;
                steps += 1;
                if steps > n {
                    return Ok(GridVerdict::Failed(GridCondition::II));
                }
            }
        }
    }
    let source = |v: NodeId, r: usize| pred(v, r).is_none();
    let corners: Vec<NodeId> = (0..n).filter(|&v| source(v, 0) && source(v, 1)).collect();
    if corners.len() != 1 {
        return Ok(GridVerdict::Failed(GridCondition::III));
    }
    for v in (0..n).filter(|&v| source(v, 1)) {
        if pred(v, 0).into_iter().chain(succ(v, 0)).any(|u| !source(u, 1)) {
            return Ok(GridVerdict::Failed(GridCondition::IV));
        }
    }
    let down_right = |v: NodeId| succ(v, 0).and_then(|u| succ(u, 1));
    let right_down = |v: NodeId| succ(v, 1).and_then(|u| succ(u, 0));
    if (0..n).any(|v| succ(v, 0).is_some() && succ(v, 1).is_some() && down_right(v).is_none()) {
        return Ok(GridVerdict::Failed(GridCondition::V));
    }
    if (0..n).any(|v| down_right(v) != right_down(v)) {
        return Ok(GridVerdict::Failed(GridCondition::VI));
    }
    // The conditions force a grid; read off its coordinates.
    let mut coords = vec![(usize::MAX, usize::MAX); n];
    let mut row = Some(corners[0]);
    let (mut height, mut width) = (0, 0);
    while let Some(start) = row {
        let mut col = Some(start);
        let mut j = 0;
        while let Some(v) = col {
            coords[v] = (height, j);
            j += 1;
            col = succ(v, 1);
        }
        width = j;
        height += 1;
        row = succ(start, 0);
    }
    debug_assert!(coords.iter().all(|&(i, _)| i != usize::MAX) && height * width == n);
    Ok(GridVerdict::Grid { height, width, coords })
}

/// One position of a tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TileCell {
    Border,
    Cell(Label, usize),
}

pub type Tile = [TileCell; 4];

/// Tiles are 2×2 blocks `[top-left, top-right, bottom-left, bottom-right]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingSystem {
    bits: usize,
    states: Vec<String>,
    tiles: HashSet<Tile>,
}

impl TilingSystem {
    pub fn new(bits: usize, states: Vec<String>, tiles: impl IntoIterator<Item = Tile>) -> Result<Self> {
        let tiles: HashSet<Tile> = tiles.into_iter().collect();
        let ok = |c: &TileCell| match *c {
            TileCell::Border => true,
            TileCell::Cell(l, q) => q < states.len() && (bits >= 32 || l >> bits == 0),
        };
        if states.is_empty() || tiles.iter().any(|t| !t.iter().all(ok)) {
            return Err(Error::Automaton("tile mentions an unknown state or an oversized label".into()));
        }
        Ok(TilingSystem { bits, states, tiles })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn tiles(&self) -> &HashSet<Tile> {
        &self.tiles
    }

    pub fn with_tiles(&self, extra: impl IntoIterator<Item = Tile>) -> Self {
        let mut ts = self.clone();
        ts.tiles.extend(extra);
        ts
    }
}

/// A bordered run: `(h+2) × (w+2)` cells, border on the frame only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorderedRun {
    pub cells: Vec<Vec<TileCell>>,
}

impl BorderedRun {
    pub fn block(&self, i: usize, j: usize) -> Tile {
        [self.cells[i][j], self.cells[i][j + 1], self.cells[i + 1][j], self.cells[i + 1][j + 1]]
    }

    /// Every 2×2 block is a tile and the interior carries `labels`.
    pub fn is_valid(&self, ts: &TilingSystem, labels: &[Vec<Label>]) -> bool {
        let (h, w) = (labels.len(), labels.first().map_or(0, Vec::len));
        if self.cells.len() != h + 2 || self.cells.iter().any(|r| r.len() != w + 2) {
            return false;
        }
        for i in 0..h + 2 {
            for j in 0..w + 2 {
                let frame = i == 0 || j == 0 || i == h + 1 || j == w + 1;
                let fits = match self.cells[i][j] {
                    TileCell::Border => frame,
                    TileCell::Cell(l, _) => !frame && l == labels[i - 1][j - 1],
                };
                if !fits {
                    return false;
                }
            }
        }
        (0..=h).all(|i| (0..=w).all(|j| ts.tiles.contains(&self.block(i, j))))
    }
}

/// Labels of a grid digraph as a row-major matrix.
pub fn grid_labels(g: &Digraph) -> Result<Vec<Vec<Label>>> {
    match grid_validate(g)? {
        GridVerdict::Grid { height, width, coords } => {
            let mut labels = vec![vec![0; width]; height];
            for (v, &(i, j)) in coords.iter().enumerate() {
                labels[i][j] = g.label(v);
            }
            Ok(labels)
        }
        GridVerdict::Failed(c) => Err(Error::Digraph(format!("not a grid: condition {c} fails"))),
    }
}

struct Search<'a> {
    ts: &'a TilingSystem,
    labels: &'a [Vec<Label>],
    run: BorderedRun,
}

impl Search<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.labels.len(), self.labels[0].len())
    }

    /// Blocks touching interior cell `(i, j)` (bordered coordinates) whose
    /// cells are all fixed once `(i, j)` is, in row-major filling order.
    fn blocks_ok(&self, i: usize, j: usize) -> bool {
        let (h, w) = self.dims();
        let fixed = |a: usize, b: usize| a == 0 || b == 0 || a == h + 1 || b == w + 1 || (a, b) <= (i, j);
        for bi in i - 1..=i {
            for bj in j - 1..=j {
                let cells = [(bi, bj), (bi, bj + 1), (bi + 1, bj), (bi + 1, bj + 1)];
                if cells.iter().all(|&(a, b)| fixed(a, b)) && !self.ts.tiles.contains(&self.run.block(bi, bj)) {
                    return false;
                }
            }
        }
        true
    }

    fn fill(&mut self, k: usize) -> bool {
        let (h, w) = self.dims();
        if k == h * w {
            return true;
        }
        let (i, j) = (k / w + 1, k % w + 1);
        for q in 0..self.ts.states.len() {
            self.run.cells[i][j] = TileCell::Cell(self.labels[i - 1][j - 1], q);
            if self.blocks_ok(i, j) && self.fill(k + 1) {
                return true;
            }
        }
        false
    }
}

/// Backtracking search for a bordered run on the labeled grid `g`.
pub fn ts_recognize(ts: &TilingSystem, g: &Digraph) -> Result<Option<BorderedRun>> {
    if g.bits() != ts.bits {
        return Err(Error::Digraph(format!("grid has {} label bits, tiling system {}", g.bits(), ts.bits)));
    }
    let labels = grid_labels(g)?;
    Ok(ts_recognize_labels(ts, &labels))
}

/// Same as [`ts_recognize`] on a label matrix.
pub fn ts_recognize_labels(ts: &TilingSystem, labels: &[Vec<Label>]) -> Option<BorderedRun> {
    let (h, w) = (labels.len(), labels[0].len());
    let mut cells = vec![vec![TileCell::Border; w + 2]; h + 2];
    for i in 0..h {
        for j in 0..w {
            cells[i + 1][j + 1] = TileCell::Cell(labels[i][j], 0);
        }
    }
    let mut s = Search { ts, labels, run: BorderedRun { cells } };
    if s.fill(0) {
        debug_assert!(s.run.is_valid(ts, labels));
        Some(s.run)
    } else {
        None
    }
}

/// `{"bits", "states", "tiles": [[c1, c2, c3, c4]]}` with cells `"label:state"` or `"#"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingJson {
    pub bits: usize,
    pub states: Vec<String>,
    pub tiles: Vec<[String; 4]>,
}

impl TilingSystem {
    pub fn cell_to_string(&self, c: TileCell) -> String {
        match c {
            TileCell::Border => "#".into(),
            TileCell::Cell(l, q) => format!("{}:{}", label_to_string(l, self.bits), self.states[q]),
        }
    }

    pub fn to_json(&self) -> TilingJson {
        let mut tiles: Vec<Tile> = self.tiles.iter().copied().collect();
        tiles.sort();
        TilingJson {
            bits: self.bits,
            states: self.states.clone(),
            tiles: tiles.iter().map(|t| t.map(|c| self.cell_to_string(c))).collect(),
        }
    }

    pub fn from_json(j: &TilingJson) -> Result<Self> {
        let parse = |s: &str| -> Result<TileCell> {
            if s == "#" {
                return Ok(TileCell::Border);
            }
            let (l, q) = s.split_once(':').ok_or_else(|| Error::Format(format!("tile cell {s:?} is not label:state")))?;
            if l.len() != j.bits {
                return Err(Error::Format(format!("tile label {l:?} does not have {} bits", j.bits)));
            }
            let q = j.states.iter().position(|x| x == q).ok_or_else(|| Error::Format(format!("unknown tile state {q:?}")))?;
            Ok(TileCell::Cell(parse_label(l)?, q))
        };
        let tiles = j
            .tiles
            .iter()
            .map(|t| Ok([parse(&t[0])?, parse(&t[1])?, parse(&t[2])?, parse(&t[3])?]))
            .collect::<Result<Vec<Tile>>>()?;
        TilingSystem::new(j.bits, j.states.clone(), tiles)
    }
}

/// All tiles over the given labels and states whose horizontal and vertical
/// neighbor pairs satisfy the predicates.
pub fn tiles_from_pairs(
    bits: usize,
    states: usize,
    horizontal: impl Fn(TileCell, TileCell) -> bool,
    vertical: impl Fn(TileCell, TileCell) -> bool,
) -> Vec<Tile> {
    let mut cells = vec![TileCell::Border];
    for l in 0..1 << bits {
        cells.extend((0..states).map(|q| TileCell::Cell(l, q)));
    }
    let mut out = Vec::new();
    for &a in &cells {
        for &b in &cells {
            for &c in &cells {
                for &d in &cells {
                    if horizontal(a, b) && horizontal(c, d) && vertical(a, c) && vertical(b, d) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Two states alternating along each row, starting with state 0 and ending
/// with state 1: recognizes the unlabeled grids of even width.
pub fn even_width() -> TilingSystem {
    use TileCell::*;
    let tiles = tiles_from_pairs(
        0,
        2,
        |a, b| match (a, b) {
            (Border, Border) => true,
            (Border, Cell(_, q)) => q == 0,
            (Cell(_, q), Border) => q == 1,
            (Cell(_, x), Cell(_, y)) => x != y,
        },
        |a, b| match (a, b) {
            (Cell(_, x), Cell(_, y)) => x == y,
            _ => true,
        },
    );
    TilingSystem::new(0, vec!["0".into(), "1".into()], tiles).expect("valid by construction")
}
