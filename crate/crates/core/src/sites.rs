//! Dense indexing of visited vertices.
//!
//! Simulations never materialize `VertexId`s in the hot loop. Tree vertices
//! live in an arena with parent and child links; lattice vertices are found
//! through a hash map over packed coordinates. Both resolve a site index back
//! to its canonical `VertexId` on demand.

use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::graph::{
    apply_lattice_move, lattice_key, tree_child_key, Graph, VertexId, TREE_ROOT_KEY,
};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct TreeArena {
    d: usize,
    parent: Vec<u32>,
    child_index: Vec<u32>,
    depth: Vec<u32>,
    key: Vec<u64>,
    // d slots per node
    children: Vec<u32>,
}

impl TreeArena {
    fn new(d: usize) -> Self {
        let mut a = TreeArena {
            d,
            parent: Vec::new(),
            child_index: Vec::new(),
            depth: Vec::new(),
            key: Vec::new(),
            children: Vec::new(),
        };
        a.push_node(NONE, NONE, 0, TREE_ROOT_KEY);
        a
    }

    fn clear(&mut self) {
        self.parent.clear();
        self.child_index.clear();
        self.depth.clear();
        self.key.clear();
        self.children.clear();
        self.push_node(NONE, NONE, 0, TREE_ROOT_KEY);
    }

    fn push_node(&mut self, parent: u32, child: u32, depth: u32, key: u64) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.child_index.push(child);
        self.depth.push(depth);
        self.key.push(key);
        self.children.extend(std::iter::repeat_n(NONE, self.d));
        id
    }

    #[inline]
    fn child(&mut self, node: u32, c: u32) -> u32 {
        let slot = node as usize * self.d + c as usize;
        let existing = self.children[slot];
        if existing != NONE {
            return existing;
        }
        let key = tree_child_key(self.key[node as usize], c);
        let depth = self.depth[node as usize] + 1;
        let id = self.push_node(node, c, depth, key);
        self.children[slot] = id;
        id
    }

    fn find_child(&self, node: u32, c: u32) -> Option<u32> {
        let id = self.children[node as usize * self.d + c as usize];
        (id != NONE).then_some(id)
    }

    fn path(&self, mut node: u32) -> Vec<u32> {
        let mut path = Vec::with_capacity(self.depth[node as usize] as usize);
        while self.parent[node as usize] != NONE {
            path.push(self.child_index[node as usize]);
            node = self.parent[node as usize];
        }
        path.reverse();
        path
    }
}

#[derive(Clone, Debug)]
enum LatticeMap {
    // d <= 3 and every |coordinate| < 2^20: 21-bit lanes
    Narrow(FxHashMap<u64, u32>),
    // d <= 4: each coordinate occupies one 32-bit lane
    Packed(FxHashMap<u128, u32>),
    Boxed(FxHashMap<Box<[i32]>, u32>),
}

#[derive(Clone, Debug)]
struct LatticeIndex {
    d: usize,
    coords: Vec<i32>,
    key: Vec<u64>,
    map: LatticeMap,
}

const NARROW_BITS: u32 = 21;
const NARROW_LIMIT: i32 = 1 << (NARROW_BITS - 1);

#[inline]
fn pack_narrow(x: &[i32]) -> Option<u64> {
    let mut k = 0u64;
    for (i, &c) in x.iter().enumerate() {
        if c >= NARROW_LIMIT || c <= -NARROW_LIMIT {
            return None;
        }
        k |= ((c + NARROW_LIMIT) as u64) << (NARROW_BITS as usize * i);
    }
    Some(k)
}

#[inline]
fn pack(x: &[i32]) -> u128 {
    x.iter()
        .enumerate()
        .fold(0u128, |acc, (i, &c)| acc | ((c as u32 as u128) << (32 * i)))
}

impl LatticeIndex {
    fn new(d: usize) -> Self {
        let map = if d <= 3 {
            LatticeMap::Narrow(FxHashMap::default())
        } else if d <= 4 {
            LatticeMap::Packed(FxHashMap::default())
        } else {
            LatticeMap::Boxed(FxHashMap::default())
        };
        LatticeIndex {
            d,
            coords: Vec::new(),
            key: Vec::new(),
            map,
        }
    }

    fn clear(&mut self) {
        self.coords.clear();
        self.key.clear();
        if self.d <= 3 && matches!(self.map, LatticeMap::Packed(_)) {
            self.map = LatticeMap::Narrow(FxHashMap::default());
        }
        match &mut self.map {
            LatticeMap::Narrow(m) => m.clear(),
            LatticeMap::Packed(m) => m.clear(),
            LatticeMap::Boxed(m) => m.clear(),
        }
    }

    fn find(&self, x: &[i32]) -> Option<u32> {
        match &self.map {
            LatticeMap::Narrow(m) => pack_narrow(x).and_then(|k| m.get(&k).copied()),
            LatticeMap::Packed(m) => m.get(&pack(x)).copied(),
            LatticeMap::Boxed(m) => m.get(x).copied(),
        }
    }

    /// Leave the narrow encoding once a coordinate outgrows it.
    #[cold]
    fn widen(&mut self, len: usize) {
        let mut m = FxHashMap::default();
        m.reserve(len);
        for (i, p) in self.coords.chunks(self.d).enumerate() {
            m.insert(pack(p), i as u32);
        }
        self.map = LatticeMap::Packed(m);
    }

    #[inline]
    fn intern(&mut self, x: &[i32]) -> u32 {
        let next = self.key.len() as u32;
        if let LatticeMap::Narrow(m) = &self.map {
            if pack_narrow(x).is_none() {
                self.widen(m.len());
            }
        }
        let (id, fresh) = match &mut self.map {
            LatticeMap::Narrow(m) => {
                let e = m
                    .entry(pack_narrow(x).expect("within narrow range"))
                    .or_insert(next);
                (*e, *e == next)
            }
            LatticeMap::Packed(m) => {
                let e = m.entry(pack(x)).or_insert(next);
                (*e, *e == next)
            }
            LatticeMap::Boxed(m) => match m.get(x) {
                Some(&id) => (id, false),
                None => {
                    m.insert(x.into(), next);
                    (next, true)
                }
            },
        };
        if fresh {
            self.coords.extend_from_slice(x);
            self.key.push(lattice_key(x));
        }
        id
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Tree(TreeArena),
    Lattice(LatticeIndex),
}

/// Bijection between the vertices seen so far and dense indices `0..len`.
#[derive(Clone, Debug)]
pub struct SiteTable {
    graph: Graph,
    kind: Kind,
}

impl SiteTable {
    /// A table containing only the origin (site 0 on the tree).
    pub fn new(graph: Graph) -> Self {
        let kind = match graph {
            Graph::Tree { d } => Kind::Tree(TreeArena::new(d)),
            Graph::Lattice { d } => Kind::Lattice(LatticeIndex::new(d)),
        };
        SiteTable { graph, kind }
    }

    pub fn graph(&self) -> Graph {
        self.graph
    }

    pub fn clear(&mut self) {
        match &mut self.kind {
            Kind::Tree(a) => a.clear(),
            Kind::Lattice(l) => l.clear(),
        }
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            Kind::Tree(a) => a.parent.len(),
            Kind::Lattice(l) => l.key.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Canonical key of a site, equal to `self.vertex(site).key()`.
    #[inline]
    pub fn key(&self, site: u32) -> u64 {
        match &self.kind {
            Kind::Tree(a) => a.key[site as usize],
            Kind::Lattice(l) => l.key[site as usize],
        }
    }

    /// Tree level of a site.
    pub fn level(&self, site: u32) -> Option<u32> {
        match &self.kind {
            Kind::Tree(a) => Some(a.depth[site as usize]),
            Kind::Lattice(_) => None,
        }
    }

    pub fn vertex(&self, site: u32) -> VertexId {
        match &self.kind {
            Kind::Tree(a) => VertexId::Tree(a.path(site)),
            Kind::Lattice(l) => {
                let s = site as usize * l.d;
                VertexId::Lattice(l.coords[s..s + l.d].to_vec())
            }
        }
    }

    pub fn find(&self, v: &VertexId) -> Option<u32> {
        if !self.graph.contains(v) {
            return None;
        }
        match (&self.kind, v) {
            (Kind::Tree(a), VertexId::Tree(p)) => {
                let mut node = 0u32;
                for &c in p {
                    node = a.find_child(node, c)?;
                }
                Some(node)
            }
            (Kind::Lattice(l), VertexId::Lattice(x)) => l.find(x),
            _ => None,
        }
    }

    /// Index of `v`, adding it (and, on the tree, its ancestors) if absent.
    pub fn intern(&mut self, v: &VertexId) -> Result<u32> {
        self.graph.check_vertex(v)?;
        Ok(match (&mut self.kind, v) {
            (Kind::Tree(a), VertexId::Tree(p)) => p.iter().fold(0u32, |node, &c| a.child(node, c)),
            (Kind::Lattice(l), VertexId::Lattice(x)) => l.intern(x),
            _ => unreachable!(),
        })
    }

    /// A walker positioned at the origin.
    pub fn cursor(&mut self) -> Cursor {
        match &mut self.kind {
            Kind::Tree(_) => Cursor {
                site: 0,
                coords: Vec::new(),
            },
            Kind::Lattice(l) => {
                let coords = vec![0; l.d];
                let site = l.intern(&coords);
                Cursor { site, coords }
            }
        }
    }
}

/// Current position of a walk inside a [`SiteTable`].
#[derive(Clone, Debug)]
pub struct Cursor {
    site: u32,
    coords: Vec<i32>,
}

impl Cursor {
    #[inline]
    pub fn site(&self) -> u32 {
        self.site
    }

    /// Apply a move code (see [`crate::graph`]) and return the new site.
    #[inline]
    pub fn apply(&mut self, table: &mut SiteTable, code: u32) -> u32 {
        self.site = match &mut table.kind {
            Kind::Tree(a) => {
                if code == 0 {
                    a.parent[self.site as usize]
                } else {
                    a.child(self.site, code - 1)
                }
            }
            Kind::Lattice(l) => {
                apply_lattice_move(&mut self.coords, code);
                l.intern(&self.coords)
            }
        };
        self.site
    }
}
