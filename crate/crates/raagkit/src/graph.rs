//! Defining graphs for right-angled Artin groups.
//!
//! A [`DefiningGraph`] is a finite simple graph on named vertices.  Each
//! vertex is a group generator; each edge declares that the two generators
//! commute.  Graphs are capped at 64 vertices so that vertex sets fit in a
//! `u64` bitmask, which the word calculus uses heavily.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of vertices in a defining graph.
pub const MAX_VERTICES: usize = 64;

/// A finite simple graph defining a right-angled Artin group.
///
/// Vertices are indexed `0..vertex_count()` in the order given at
/// construction; all word-level APIs speak vertex indices, with names used
/// only at the parsing and printing boundary.
#[derive(Debug)]
pub struct DefiningGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// `adj[v]` has bit `w` set iff `{v, w}` is an edge.
    adj: Vec<u64>,
    edges: BTreeSet<(usize, usize)>,
}

impl DefiningGraph {
    /// Builds a graph from vertex names and edges given as name pairs.
    ///
    /// Rejects duplicate or empty vertex names, unknown edge endpoints,
    /// loops, and vertex counts above [`MAX_VERTICES`].  Duplicate edges
    /// are tolerated and deduplicated.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Arc<Self>> {
        if vertices.len() > MAX_VERTICES {
            return Err(Error::InvalidGraph {
                detail: format!(
                    "{} vertices exceeds the supported maximum of {MAX_VERTICES}",
                    vertices.len()
                ),
            });
        }
        let mut names = Vec::with_capacity(vertices.len());
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            let name = v.as_ref().to_owned();
            if name.is_empty() {
                return Err(Error::InvalidGraph { detail: "empty vertex name".into() });
            }
            if name.contains(char::is_whitespace) || name.contains('^') {
                return Err(Error::InvalidGraph {
                    detail: format!("vertex name `{name}` contains whitespace or `^`"),
                });
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidGraph {
                    detail: format!("duplicate vertex name `{name}`"),
                });
            }
            names.push(name);
        }
        let mut adj = vec![0u64; names.len()];
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let a = a.as_ref();
            let b = b.as_ref();
            let &ia = index.get(a).ok_or_else(|| Error::InvalidGraph {
                detail: format!("edge endpoint `{a}` is not a vertex"),
            })?;
            let &ib = index.get(b).ok_or_else(|| Error::InvalidGraph {
                detail: format!("edge endpoint `{b}` is not a vertex"),
            })?;
            if ia == ib {
                return Err(Error::InvalidGraph { detail: format!("loop at vertex `{a}`") });
            }
            adj[ia] |= 1 << ib;
            adj[ib] |= 1 << ia;
            edge_set.insert((ia.min(ib), ia.max(ib)));
        }
        Ok(Arc::new(DefiningGraph { names, index, adj, edges: edge_set }))
    }

    /// Graph with no edges: the free group on the given generators.
    pub fn free<S: AsRef<str>>(vertices: &[S]) -> Result<Arc<Self>> {
        Self::new(vertices, &[])
    }

    /// Complete graph: free abelian group on the given generators.
    pub fn complete(vertices: &[&str]) -> Result<Arc<Self>> {
        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                edges.push((vertices[i], vertices[j]));
            }
        }
        Self::new(vertices, &edges)
    }

    /// Cycle graph on the given vertices in order.
    pub fn cycle(vertices: &[&str]) -> Result<Arc<Self>> {
        if vertices.len() < 3 {
            return Err(Error::InvalidGraph { detail: "cycle needs at least 3 vertices".into() });
        }
        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            edges.push((vertices[i], vertices[(i + 1) % vertices.len()]));
        }
        Self::new(vertices, &edges)
    }

    /// Path graph on the given vertices in order.
    pub fn path(vertices: &[&str]) -> Result<Arc<Self>> {
        let mut edges = Vec::new();
        for w in vertices.windows(2) {
            edges.push((w[0], w[1]));
        }
        Self::new(vertices, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Edges as sorted index pairs `(lo, hi)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacent(&self, v: usize, w: usize) -> bool {
        v != w && (self.adj[v] >> w) & 1 == 1
    }

    /// Link of `v` as a bitmask (neighbours of `v`, excluding `v`).
    pub fn link_mask(&self, v: usize) -> u64 {
        self.adj[v]
    }

    /// Star of `v` as a bitmask (neighbours plus `v` itself).
    pub fn star_mask(&self, v: usize) -> u64 {
        self.adj[v] | (1 << v)
    }

    /// Link of `v` as a sorted list of vertex indices.
    pub fn link(&self, v: usize) -> Vec<usize> {
        mask_to_vec(self.adj[v])
    }

    /// True when every vertex in `mask` is adjacent to or equal to every
    /// vertex the support of a word might add; used for subgroup checks.
    pub fn mask_within(&self, support: u64, allowed: u64) -> bool {
        support & !allowed == 0
    }

    /// Structural equality: same vertex names in the same order and the
    /// same edge set.
    pub fn same_graph(&self, other: &DefiningGraph) -> bool {
        self.names == other.names && self.edges == other.edges
    }

    /// Serializable snapshot of the graph.
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [self.names[a].clone(), self.names[b].clone()])
                .collect(),
        }
    }

    /// Parses a graph from its JSON description.
    pub fn from_json(text: &str) -> Result<Arc<Self>> {
        let spec: GraphSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse { detail: e.to_string() })?;
        spec.build()
    }
}

/// JSON wire format for a defining graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Arc<DefiningGraph>> {
        let edges: Vec<(&str, &str)> =
            self.edges.iter().map(|e| (e[0].as_str(), e[1].as_str())).collect();
        let verts: Vec<&str> = self.vertices.iter().map(|s| s.as_str()).collect();
        DefiningGraph::new(&verts, &edges)
    }
}

/// Expands a bitmask into the sorted list of set bit positions.
pub fn mask_to_vec(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out.push(v);
        m &= m - 1;
    }
    out
}
