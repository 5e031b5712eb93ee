//! Simple random walks on the lattice Z^d and the rooted d-ary tree.
//!
//! A walk is generated as a sequence of move codes. On the lattice the code
//! `k` in `0..2d` means `+e_{k/2}` for even `k` and `-e_{k/2}` for odd `k`
//! (neighbor order `+e_1, -e_1, ..., +e_d, -e_d`). On the tree the code `0`
//! means "go to the parent" and `c + 1` means "go to child `c`".

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{combine, walk_stream};
use crate::sites::SiteTable;

/// Graph descriptor, serialized as `{"graph": "tree" | "lattice", "d": int}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "lowercase")]
pub enum Graph {
    Lattice { d: usize },
    Tree { d: usize },
}

impl Graph {
    pub fn lattice(d: usize) -> Result<Self> {
        let g = Graph::Lattice { d };
        g.validate()?;
        Ok(g)
    }

    pub fn tree(d: usize) -> Result<Self> {
        let g = Graph::Tree { d };
        g.validate()?;
        Ok(g)
    }

    /// Lattices need `d >= 3` (transience), trees need `d >= 2`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Graph::Lattice { d } if d < 3 => Err(Error::InvalidGraph(format!(
                "lattice dimension must be at least 3, got {d}"
            ))),
            Graph::Tree { d } if d < 2 => Err(Error::InvalidGraph(format!(
                "tree branching must be at least 2, got {d}"
            ))),
            Graph::Lattice { d } | Graph::Tree { d } if d > u16::MAX as usize => {
                Err(Error::InvalidGraph(format!("d = {d} is too large")))
            }
            _ => Ok(()),
        }
    }

    pub fn d(&self) -> usize {
        match *self {
            Graph::Lattice { d } | Graph::Tree { d } => d,
        }
    }

    pub fn is_tree(&self) -> bool {
        matches!(self, Graph::Tree { .. })
    }

    /// The origin of Z^d or the root of the tree.
    pub fn origin(&self) -> VertexId {
        match *self {
            Graph::Lattice { d } => VertexId::Lattice(vec![0; d]),
            Graph::Tree { .. } => VertexId::Tree(Vec::new()),
        }
    }

    /// Whether `v` is a vertex of this graph.
    pub fn contains(&self, v: &VertexId) -> bool {
        match (self, v) {
            (Graph::Lattice { d }, VertexId::Lattice(x)) => x.len() == *d,
            (Graph::Tree { d }, VertexId::Tree(p)) => p.iter().all(|&c| (c as usize) < *d),
            _ => false,
        }
    }

    pub(crate) fn check_vertex(&self, v: &VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexMismatch {
                vertex: v.to_string(),
                graph: self.to_string(),
            })
        }
    }

    /// All neighbors of `v`, in move-code order.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(match (self, v) {
            (Graph::Lattice { d }, VertexId::Lattice(x)) => (0..2 * *d as u32)
                .map(|k| VertexId::Lattice(lattice_neighbor(x, k)))
                .collect(),
            (Graph::Tree { d }, VertexId::Tree(p)) => {
                let mut out = Vec::with_capacity(d + 1);
                if !p.is_empty() {
                    out.push(VertexId::Tree(p[..p.len() - 1].to_vec()));
                }
                out.extend((0..*d as u32).map(|c| {
                    let mut q = p.clone();
                    q.push(c);
                    VertexId::Tree(q)
                }));
                out
            }
            _ => unreachable!(),
        })
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Graph::Lattice { d } => write!(f, "Z^{d}"),
            Graph::Tree { d } => write!(f, "T_{d}"),
        }
    }
}

/// Canonical vertex encoding: integer coordinates on Z^d, or the child-index
/// path from the root on the tree (the empty path is the root).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexId {
    Lattice(Vec<i32>),
    Tree(Vec<u32>),
}

pub(crate) const TREE_ROOT_KEY: u64 = 0x7ee0_0000_0000_0001;
pub(crate) const LATTICE_ROOT_KEY: u64 = 0x1a77_0000_0000_0001;

#[inline]
pub(crate) fn tree_child_key(parent: u64, child: u32) -> u64 {
    combine(parent, child as u64 + 1)
}

#[inline]
pub(crate) fn lattice_key(coords: &[i32]) -> u64 {
    coords
        .iter()
        .fold(LATTICE_ROOT_KEY, |h, &x| combine(h, x as i64 as u64))
}

impl VertexId {
    /// Tree level |v| (path length); `None` on the lattice.
    pub fn level(&self) -> Option<usize> {
        match self {
            VertexId::Tree(p) => Some(p.len()),
            VertexId::Lattice(_) => None,
        }
    }

    /// Stable 64-bit key, a pure function of the encoding. Scenery values are
    /// drawn from streams keyed by it.
    pub fn key(&self) -> u64 {
        match self {
            VertexId::Tree(p) => p.iter().fold(TREE_ROOT_KEY, |h, &c| tree_child_key(h, c)),
            VertexId::Lattice(x) => lattice_key(x),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Lattice(x) => write!(f, "{x:?}"),
            VertexId::Tree(p) => write!(f, "path{p:?}"),
        }
    }
}

#[inline]
fn lattice_neighbor(x: &[i32], code: u32) -> Vec<i32> {
    let mut y = x.to_vec();
    apply_lattice_move(&mut y, code);
    y
}

#[inline]
pub(crate) fn apply_lattice_move(x: &mut [i32], code: u32) {
    let axis = (code / 2) as usize;
    if code.is_multiple_of(2) {
        x[axis] += 1;
    } else {
        x[axis] -= 1;
    }
}

/// Draw a lattice move code, uniform over `0..2d`.
#[inline]
pub fn draw_lattice_move<R: Rng + ?Sized>(d: usize, rng: &mut R) -> u32 {
    rng.random_range(0..2 * d as u32)
}

/// Draw a tree move code. From the root every move goes to a uniformly chosen
/// child; elsewhere the parent and each child have probability `1/(d+1)`.
#[inline]
pub fn draw_tree_move<R: Rng + ?Sized>(at_root: bool, d: usize, rng: &mut R) -> u32 {
    if at_root {
        rng.random_range(0..d as u32) + 1
    } else {
        rng.random_range(0..d as u32 + 1)
    }
}

/// One step of the simple random walk on Z^d from `current`.
pub fn step_lattice<R: Rng + ?Sized>(current: &VertexId, rng: &mut R) -> Result<VertexId> {
    match current {
        VertexId::Lattice(x) if x.len() >= 3 => {
            let code = draw_lattice_move(x.len(), rng);
            Ok(VertexId::Lattice(lattice_neighbor(x, code)))
        }
        other => Err(Error::VertexMismatch {
            vertex: other.to_string(),
            graph: "Z^d with d >= 3".into(),
        }),
    }
}

/// One step of the simple random walk on the d-ary tree from `current`.
pub fn step_tree<R: Rng + ?Sized>(current: &VertexId, d: usize, rng: &mut R) -> Result<VertexId> {
    let graph = Graph::tree(d)?;
    graph.check_vertex(current)?;
    let VertexId::Tree(p) = current else {
        unreachable!()
    };
    let mut path = p.clone();
    match draw_tree_move(path.is_empty(), d, rng) {
        0 => {
            path.pop();
        }
        c => path.push(c - 1),
    }
    Ok(VertexId::Tree(path))
}

/// A finished walk `S_0, ..., S_n`, stored as move codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkTrace {
    graph: Graph,
    moves: Vec<u32>,
    levels: Vec<u32>,
}

impl WalkTrace {
    pub fn graph(&self) -> Graph {
        self.graph
    }

    /// Number of steps.
    pub fn n(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self) -> &[u32] {
        &self.moves
    }

    /// Tree levels `|S_0|, ..., |S_n|`; empty for lattice walks.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Iterate over the visited vertices `S_0, ..., S_n`.
    ///
    /// Each item is a fresh `VertexId`, so on the tree this costs O(depth) per
    /// step; use [`WalkTrace::sites`] for large traces.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        let mut current = self.graph.origin();
        let mut first = true;
        let mut moves = self.moves.iter();
        std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(current.clone());
            }
            let &code = moves.next()?;
            match &mut current {
                VertexId::Lattice(x) => apply_lattice_move(x, code),
                VertexId::Tree(p) => {
                    if code == 0 {
                        p.pop();
                    } else {
                        p.push(code - 1);
                    }
                }
            }
            Some(current.clone())
        })
    }

    /// Vertex at time `k`.
    pub fn vertex(&self, k: usize) -> Option<VertexId> {
        self.vertices().nth(k)
    }

    /// Replay the walk into a site table, returning the site index of `S_k`
    /// for every `k`.
    pub fn sites(&self) -> (SiteTable, Vec<u32>) {
        let mut table = SiteTable::new(self.graph);
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut cursor = table.cursor();
        out.push(cursor.site());
        for &code in &self.moves {
            out.push(cursor.apply(&mut table, code));
        }
        (table, out)
    }
}

/// Fill `moves` (and `levels` on the tree) with an `n`-step walk.
pub(crate) fn generate_moves<R: Rng + ?Sized>(
    graph: Graph,
    n: usize,
    rng: &mut R,
    moves: &mut Vec<u32>,
    levels: &mut Vec<u32>,
) {
    moves.clear();
    levels.clear();
    moves.reserve(n);
    match graph {
        Graph::Lattice { d } => {
            for _ in 0..n {
                moves.push(draw_lattice_move(d, rng));
            }
        }
        Graph::Tree { d } => {
            levels.reserve(n + 1);
            let mut level = 0u32;
            levels.push(0);
            for _ in 0..n {
                let code = draw_tree_move(level == 0, d, rng);
                if code == 0 {
                    level -= 1;
                } else {
                    level += 1;
                }
                moves.push(code);
                levels.push(level);
            }
        }
    }
}

/// Sample an `n`-step walk from an explicit generator.
pub fn sample_trace<R: Rng + ?Sized>(graph: Graph, n: usize, rng: &mut R) -> Result<WalkTrace> {
    graph.validate()?;
    if n == 0 {
        return Err(Error::DegenerateRun);
    }
    let mut moves = Vec::new();
    let mut levels = Vec::new();
    generate_moves(graph, n, rng, &mut moves, &mut levels);
    Ok(WalkTrace {
        graph,
        moves,
        levels,
    })
}

/// Run an `n`-step walk on stream 0 of `seed`. The trace is a pure function
/// of `(graph, n, seed)`.
pub fn run_walk(graph: Graph, n: usize, seed: u64) -> Result<WalkTrace> {
    run_walk_stream(graph, n, seed, 0)
}

/// Run replica `stream` of a walk keyed by `seed`.
pub fn run_walk_stream(graph: Graph, n: usize, seed: u64, stream: u64) -> Result<WalkTrace> {
    sample_trace(graph, n, &mut walk_stream(seed, stream))
}

/// Sample the level process of the tree walk alone (a birth-death chain on
/// the non-negative integers). Consumes randomness exactly like the full tree
/// walk, so the levels coincide with those of [`sample_trace`] on the same
/// generator.
pub fn sample_levels<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R, levels: &mut Vec<u32>) {
    levels.clear();
    levels.reserve(n + 1);
    let mut level = 0u32;
    levels.push(0);
    for _ in 0..n {
        if draw_tree_move(level == 0, d, rng) == 0 {
            level -= 1;
        } else {
            level += 1;
        }
        levels.push(level);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    /// Generator returning zero words: every bounded draw yields its minimum.
    struct Zeros;
    impl RngCore for Zeros {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0)
        }
    }

    #[test]
    fn lattice_direction_zero_is_plus_e1() {
        let next = step_lattice(&VertexId::Lattice(vec![0, 0, 0]), &mut Zeros).unwrap();
        assert_eq!(next, VertexId::Lattice(vec![1, 0, 0]));
    }

    #[test]
    fn lattice_neighbor_order() {
        let g = Graph::lattice(3).unwrap();
        let nb = g.neighbors(&g.origin()).unwrap();
        assert_eq!(nb.len(), 6);
        assert_eq!(nb[0], VertexId::Lattice(vec![1, 0, 0]));
        assert_eq!(nb[1], VertexId::Lattice(vec![-1, 0, 0]));
        assert_eq!(nb[5], VertexId::Lattice(vec![0, 0, -1]));
    }

    #[test]
    fn tree_successors_of_path_1() {
        let g = Graph::tree(3).unwrap();
        let v = VertexId::Tree(vec![1]);
        let nb = g.neighbors(&v).unwrap();
        assert_eq!(
            nb,
            vec![
                VertexId::Tree(vec![]),
                VertexId::Tree(vec![1, 0]),
                VertexId::Tree(vec![1, 1]),
                VertexId::Tree(vec![1, 2]),
            ]
        );
        let mut rng = walk_stream(1, 0);
        for _ in 0..200 {
            let s = step_tree(&v, 3, &mut rng).unwrap();
            assert!(nb.contains(&s));
        }
    }

    #[test]
    fn tree_root_always_moves_down() {
        let mut rng = walk_stream(3, 0);
        for _ in 0..100 {
            let s = step_tree(&VertexId::Tree(vec![]), 2, &mut rng).unwrap();
            assert_eq!(s.level(), Some(1));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Graph::lattice(2).is_err());
        assert!(Graph::tree(1).is_err());
        assert_eq!(
            run_walk(Graph::Tree { d: 2 }, 0, 1),
            Err(Error::DegenerateRun)
        );
        assert!(step_tree(&VertexId::Tree(vec![3]), 3, &mut Zeros).is_err());
        assert!(step_lattice(&VertexId::Tree(vec![]), &mut Zeros).is_err());
    }

    #[test]
    fn trace_vertices_match_levels_and_sites() {
        let t = run_walk(Graph::Tree { d: 3 }, 500, 11).unwrap();
        let verts: Vec<_> = t.vertices().collect();
        assert_eq!(verts.len(), 501);
        assert_eq!(verts[0], VertexId::Tree(vec![]));
        for (v, &l) in verts.iter().zip(t.levels()) {
            assert_eq!(v.level(), Some(l as usize));
        }
        let (table, sites) = t.sites();
        for (v, &s) in verts.iter().zip(&sites) {
            assert_eq!(&table.vertex(s), v);
        }
    }

    #[test]
    fn graph_descriptor_json() {
        let g: Graph = serde_json::from_str(r#"{"graph":"tree","d":2}"#).unwrap();
        assert_eq!(g, Graph::Tree { d: 2 });
        assert_eq!(
            serde_json::to_string(&Graph::Lattice { d: 3 }).unwrap(),
            r#"{"graph":"lattice","d":3}"#
        );
    }

    #[test]
    fn level_chain_matches_tree_walk() {
        let t = run_walk(Graph::Tree { d: 4 }, 2000, 5).unwrap();
        let mut levels = Vec::new();
        sample_levels(4, 2000, &mut walk_stream(5, 0), &mut levels);
        assert_eq!(levels, t.levels());
    }
}
