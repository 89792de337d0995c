//! Cosine projection of the user-URL matrix onto a user similarity network.
//!
//! Only user pairs that co-share a URL can have positive cosine, so pairs are
//! generated from an inverted index over URLs rather than all N^2 pairs. For
//! a positive threshold the index is further restricted with prefix
//! filtering: URLs are ordered globally from most to least shared, and each
//! user's most popular URLs are left out of the index as long as their
//! combined share of the user's unit vector stays below the threshold. By
//! Cauchy-Schwarz a pair reaching the threshold must then co-share a URL
//! that both users indexed, so no qualifying pair is missed.
//!
//! Candidate pairs are scored exactly: the dot product accumulates over the
//! two rows in ascending URL order, so results are bit-identical for any
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{Row, UserUrlMatrix};
use super::network::{Edge, SimilarityNetwork};

/// Relative slack on the prefix bound so float rounding can only shrink
/// the unindexed prefix, never grow it.
const PREFIX_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    /// Users dropped because every TF-IDF weight in their row is zero.
    pub zero_weight_users: Vec<String>,
    pub candidate_pairs: u64,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub network: SimilarityNetwork,
    /// For each network node, its row index in the matrix.
    pub matrix_rows: Vec<usize>,
    pub diagnostics: ProjectionDiagnostics,
}

/// Cosine of two sparse rows, accumulated in ascending column order.
pub fn cosine(a: Row<'_>, b: Row<'_>) -> f64 {
    let dot = sparse_dot(a, b);
    if dot == 0.0 {
        return 0.0;
    }
    (dot / (norm(a) * norm(b))).min(1.0)
}

fn sparse_dot(a: Row<'_>, b: Row<'_>) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.cols.len() && j < b.cols.len() {
        match a.cols[i].cmp(&b.cols[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a.weights[i] * b.weights[j];
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

fn norm(r: Row<'_>) -> f64 {
    r.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
}

pub fn project_similarity(m: &UserUrlMatrix, threshold: f64) -> SimilarityNetwork {
    project(m, threshold).network
}

/// Project with diagnostics. `threshold` is clamped to `[0, 1]`.
pub fn project(m: &UserUrlMatrix, threshold: f64) -> Projection {
    let threshold = threshold.clamp(0.0, 1.0);

    let mut rows = Vec::new();
    let mut zero = Vec::new();
    for i in 0..m.n_users() {
        if m.row(i).weights.iter().any(|&w| w > 0.0) {
            rows.push(i);
        } else {
            zero.push(m.users()[i].clone());
        }
    }
    let n = rows.len();
    let norms: Vec<f64> = rows.iter().map(|&i| norm(m.row(i))).collect();

    // Global URL order: most shared first, ties by column index.
    let mut by_popularity: Vec<u32> = (0..m.n_urls() as u32).collect();
    by_popularity.sort_unstable_by(|&a, &b| m.df()[b as usize].cmp(&m.df()[a as usize]).then(a.cmp(&b)));
    let mut rank = vec![0u32; m.n_urls()];
    for (r, &c) in by_popularity.iter().enumerate() {
        rank[c as usize] = r as u32;
    }

    // Indexed (suffix) URLs per node, in ascending rank order.
    let bound = threshold * threshold * (1.0 - PREFIX_SLACK);
    let suffixes: Vec<Vec<u32>> = rows
        .par_iter()
        .zip(&norms)
        .map(|(&i, &nrm)| {
            let row = m.row(i);
            let mut feats: Vec<(u32, f64)> = row
                .cols
                .iter()
                .zip(row.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&c, &w)| (c, w / nrm))
                .collect();
            feats.sort_unstable_by_key(|&(c, _)| rank[c as usize]);
            let mut prefix_sq = 0.0;
            let mut start = 0;
            while start < feats.len() {
                let next = prefix_sq + feats[start].1 * feats[start].1;
                if next >= bound {
                    break;
                }
                prefix_sq = next;
                start += 1;
            }
            feats[start..].iter().map(|&(c, _)| c).collect()
        })
        .collect();

    let mut postings: Vec<Vec<u32>> = vec![Vec::new(); m.n_urls()];
    for (node, feats) in suffixes.iter().enumerate() {
        for &c in feats {
            postings[c as usize].push(node as u32);
        }
    }

    let per_node: Vec<(Vec<Edge>, u64)> = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map_init(
            || (vec![false; n], Vec::new()),
            |(seen, touched), x| {
                for &c in &suffixes[x] {
                    let list = &postings[c as usize];
                    let from = list.partition_point(|&y| (y as usize) <= x);
                    for &y in &list[from..] {
                        if !seen[y as usize] {
                            seen[y as usize] = true;
                            touched.push(y);
                        }
                    }
                }
                touched.sort_unstable();
                let row_x = m.row(rows[x]);
                let mut edges = Vec::new();
                for &y in touched.iter() {
                    seen[y as usize] = false;
                    let dot = sparse_dot(row_x, m.row(rows[y as usize]));
                    let cos = (dot / (norms[x] * norms[y as usize])).min(1.0);
                    if cos > 0.0 && cos >= threshold {
                        edges.push(Edge {
                            source: x as u32,
                            target: y,
                            weight: cos,
                        });
                    }
                }
                let scored = touched.len() as u64;
                touched.clear();
                (edges, scored)
            },
        )
        .collect();

    let candidate_pairs = per_node.iter().map(|(_, c)| c).sum();
    let edges: Vec<Edge> = per_node.into_iter().flat_map(|(e, _)| e).collect();
    let nodes = rows.iter().map(|&i| m.users()[i].clone()).collect();
    if !zero.is_empty() {
        log::info!("{} users have all-zero TF-IDF rows and were left out of the network", zero.len());
    }
    Projection {
        network: SimilarityNetwork::from_sorted(nodes, edges),
        matrix_rows: rows,
        diagnostics: ProjectionDiagnostics {
            zero_weight_users: zero,
            candidate_pairs,
        },
    }
}
