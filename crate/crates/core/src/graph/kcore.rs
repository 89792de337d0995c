use std::collections::VecDeque;

use super::network::SimilarityNetwork;

/// Maximal subgraph in which every node has at least `k` neighbors
/// (unweighted degree). Nodes are peeled with a work queue; each node is
/// removed at most once, so the cost is O(V + E).
pub fn k_core(g: &SimilarityNetwork, k: usize) -> SimilarityNetwork {
    let adj = g.adjacency();
    let mut degree = g.degrees();
    let mut alive = vec![true; g.n_nodes()];
    let mut queue: VecDeque<usize> = (0..g.n_nodes()).filter(|&v| degree[v] < k).collect();
    for &v in &queue {
        alive[v] = false;
    }
    while let Some(v) = queue.pop_front() {
        for &u in adj.neighbors(v).0 {
            let u = u as usize;
            if alive[u] {
                degree[u] -= 1;
                if degree[u] < k {
                    alive[u] = false;
                    queue.push_back(u);
                }
            }
        }
    }
    g.induced(&alive)
}

/// Core number of every node: the largest k such that the node is in the k-core.
pub fn core_numbers(g: &SimilarityNetwork) -> Vec<usize> {
    let adj = g.adjacency();
    let n = g.n_nodes();
    let mut degree = g.degrees();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for (v, &d) in degree.iter().enumerate() {
        buckets[d].push(v);
    }
    let mut core = vec![0; n];
    let mut done = vec![false; n];
    let mut current = 0;
    let mut processed = 0;
    while processed < n {
        // Lazy buckets: stale entries are skipped when popped.
        let Some(v) = buckets[current].pop() else {
            current += 1;
            continue;
        };
        if done[v] || degree[v] != current {
            continue;
        }
        done[v] = true;
        core[v] = current;
        processed += 1;
        for &u in adj.neighbors(v).0 {
            let u = u as usize;
            // Degrees never drop below the current level.
            if !done[u] && degree[u] > current {
                degree[u] -= 1;
                buckets[degree[u]].push(u);
            }
        }
    }
    core
}
