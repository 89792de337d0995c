use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected weighted edge with `source < target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: u32,
    pub target: u32,
    pub weight: f64,
}

/// Weighted undirected user graph. Edges are kept sorted by `(source, target)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityNetwork {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl SimilarityNetwork {
    /// Validates endpoints, rejects self-loops and duplicate pairs. Edge
    /// endpoints may be given in either order.
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len() as u32;
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                if e.source > e.target {
                    Edge {
                        source: e.target,
                        target: e.source,
                        weight: e.weight,
                    }
                } else {
                    e
                }
            })
            .collect();
        for e in &edges {
            if e.target >= n {
                return Err(Error::invalid(format!("edge endpoint {} out of range", e.target)));
            }
            if e.source == e.target {
                return Err(Error::invalid(format!("self-loop on node {}", e.source)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::invalid(format!("non-positive edge weight {}", e.weight)));
            }
        }
        edges.sort_by_key(|e| (e.source, e.target));
        if edges
            .windows(2)
            .any(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(Error::invalid("duplicate edge"));
        }
        Ok(SimilarityNetwork { nodes, edges })
    }

    /// Caller guarantees edges are sorted, in range, and unique.
    pub(crate) fn from_sorted(nodes: Vec<String>, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.windows(2).all(|w| (w[0].source, w[0].target) < (w[1].source, w[1].target)));
        debug_assert!(edges.iter().all(|e| e.source < e.target && (e.target as usize) < nodes.len()));
        SimilarityNetwork { nodes, edges }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes()];
        for e in &self.edges {
            deg[e.source as usize] += 1;
            deg[e.target as usize] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }

    /// Subgraph on the nodes with `keep[i]`, node order preserved.
    pub fn induced(&self, keep: &[bool]) -> SimilarityNetwork {
        assert_eq!(keep.len(), self.n_nodes());
        let mut remap = vec![u32::MAX; self.n_nodes()];
        let mut nodes = Vec::new();
        for (i, name) in self.nodes.iter().enumerate() {
            if keep[i] {
                remap[i] = nodes.len() as u32;
                nodes.push(name.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.source as usize] && keep[e.target as usize])
            .map(|e| Edge {
                source: remap[e.source as usize],
                target: remap[e.target as usize],
                weight: e.weight,
            })
            .collect();
        SimilarityNetwork::from_sorted(nodes, edges)
    }

    /// Same topology with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> SimilarityNetwork {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        SimilarityNetwork::from_sorted(self.nodes.clone(), edges)
    }

    pub fn to_snapshot(&self, meta: NetworkMeta) -> NetworkSnapshot {
        NetworkSnapshot {
            meta,
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|e| (e.source, e.target, e.weight)).collect(),
        }
    }

    pub fn from_snapshot(snap: &NetworkSnapshot) -> Result<Self> {
        let edges = snap
            .edges
            .iter()
            .map(|&(source, target, weight)| Edge {
                source,
                target,
                weight,
            })
            .collect();
        SimilarityNetwork::new(snap.nodes.clone(), edges)
    }
}

/// Provenance recorded alongside a stored network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub tfidf_variant: Option<String>,
    pub similarity_threshold: Option<f64>,
    pub k_core: Option<usize>,
    /// Users left out of the network because their TF-IDF rows were all zero.
    #[serde(default)]
    pub excluded_users: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub meta: NetworkMeta,
    pub nodes: Vec<String>,
    pub edges: Vec<(u32, u32, f64)>,
}

/// CSR adjacency with each neighbor list in ascending node order.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    fn new(g: &SimilarityNetwork) -> Self {
        let n = g.n_nodes();
        let deg = g.degrees();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut weights = vec![0f64; offsets[n]];
        // Sorted edge order fills each list in ascending neighbor order.
        for e in g.edges() {
            let (s, t) = (e.source as usize, e.target as usize);
            neighbors[fill[s]] = e.target;
            weights[fill[s]] = e.weight;
            fill[s] += 1;
            neighbors[fill[t]] = e.source;
            weights[fill[t]] = e.weight;
            fill[t] += 1;
        }
        let adj = Adjacency {
            offsets,
            neighbors,
            weights,
        };
        debug_assert!((0..n).all(|i| adj.neighbors(i).0.windows(2).all(|w| w[0] < w[1])));
        adj
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn neighbors(&self, node: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[node], self.offsets[node + 1]);
        (&self.neighbors[a..b], &self.weights[a..b])
    }
}
