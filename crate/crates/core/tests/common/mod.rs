#![allow(dead_code)]

use std::collections::HashSet;

use courl_core::graph::{build_matrix, Edge, SimilarityNetwork, TfIdfVariant, UserUrlMatrix};
use courl_core::ingest::canonicalize_url;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn url(j: usize) -> String {
    format!("https://site{j:03}.example/page")
}

/// Random share list over at most `max_users` users and `max_urls` URLs.
/// One URL is shared by every user so its column must come out as zero.
pub fn random_shares(seed: u64, max_users: usize, max_urls: usize) -> Vec<(String, String)> {
    let mut r = rng(seed);
    let n_users = r.random_range(2..=max_users);
    let n_urls = r.random_range(2..=max_urls);
    let mut shares = Vec::new();
    for u in 0..n_users {
        let user = format!("user{u:02}");
        shares.push((user.clone(), url(0)));
        let k = r.random_range(1..=12);
        for _ in 0..k {
            // Skewed toward low indices so URLs get co-shared.
            let j = (r.random::<f64>().powi(2) * (n_urls - 1) as f64) as usize + 1;
            shares.push((user.clone(), url(j)));
        }
    }
    shares
}

pub fn matrix_from(shares: &[(String, String)], variant: TfIdfVariant) -> UserUrlMatrix {
    let active: HashSet<String> = shares.iter().map(|(u, _)| u.clone()).collect();
    build_matrix(
        shares.iter().map(|(u, l)| (u.as_str(), canonicalize_url(l).unwrap())),
        &active,
        variant,
    )
    .unwrap()
}

pub fn network(n: usize, edges: &[(usize, usize, f64)]) -> SimilarityNetwork {
    SimilarityNetwork::new(
        (0..n).map(|i| format!("v{i:03}")).collect(),
        edges
            .iter()
            .map(|&(s, t, w)| Edge {
                source: s as u32,
                target: t as u32,
                weight: w,
            })
            .collect(),
    )
    .unwrap()
}

/// Erdos-Renyi style graph with edge probability `p` and weights in (0.05, 1].
pub fn random_graph(seed: u64, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                edges.push((i, j, 0.05 + 0.95 * r.random::<f64>()));
            }
        }
    }
    edges
}

/// Connected random graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(seed: u64, n: usize, extra: usize) -> Vec<(usize, usize, f64)> {
    let mut r = rng(seed);
    let mut present = HashSet::new();
    let mut edges = Vec::new();
    let mut add = |a: usize, b: usize, w: f64, edges: &mut Vec<(usize, usize, f64)>| {
        let key = (a.min(b), a.max(b));
        if a != b && present.insert(key) {
            edges.push((key.0, key.1, w));
        }
    };
    for v in 1..n {
        let parent = r.random_range(0..v);
        let w = 0.05 + 0.95 * r.random::<f64>();
        add(v, parent, w, &mut edges);
    }
    for _ in 0..extra {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        let w = 0.05 + 0.95 * r.random::<f64>();
        add(a, b, w, &mut edges);
    }
    edges
}
