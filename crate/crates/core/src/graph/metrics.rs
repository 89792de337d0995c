use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::network::SimilarityNetwork;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub nodes: usize,
    pub edges: usize,
    /// degree -> number of nodes with that degree
    pub degree_distribution: BTreeMap<usize, usize>,
    /// Connected component sizes, largest first.
    pub component_sizes: Vec<usize>,
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    /// Groups of element indices; each group ascending, groups ordered by
    /// their smallest element.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

/// Connected components as ascending node-index lists.
pub fn components(g: &SimilarityNetwork) -> Vec<Vec<usize>> {
    let mut ds = DisjointSet::new(g.n_nodes());
    for e in g.edges() {
        ds.union(e.source as usize, e.target as usize);
    }
    ds.groups()
}

pub fn graph_metrics(g: &SimilarityNetwork) -> GraphMetrics {
    let mut degree_distribution = BTreeMap::new();
    for d in g.degrees() {
        *degree_distribution.entry(d).or_insert(0) += 1;
    }
    let mut component_sizes: Vec<usize> = components(g).iter().map(Vec::len).collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    GraphMetrics {
        nodes: g.n_nodes(),
        edges: g.n_edges(),
        degree_distribution,
        component_sizes,
    }
}
