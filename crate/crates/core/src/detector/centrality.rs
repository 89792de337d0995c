//! Eigenvector centrality by power iteration.
//!
//! The iteration multiplies by `A + I` instead of `A`. The shift leaves the
//! eigenvectors unchanged but moves the spectrum to `λ + 1`, so the dominant
//! eigenvalue is strictly largest in magnitude even on bipartite components
//! (paths, stars, even cycles), where plain iteration on `A` oscillates
//! between two vectors forever.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{components, Adjacency, SimilarityNetwork};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    L2,
    Max,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMode {
    /// One power iteration over the whole graph.
    #[default]
    Global,
    /// Independent iteration, normalization, and percentile per connected component.
    PerComponent,
}

impl std::str::FromStr for CentralityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "global" => Ok(CentralityMode::Global),
            "per_component" | "per-component" => Ok(CentralityMode::PerComponent),
            other => Err(format!("unknown centrality mode {other:?} (expected global|per_component)")),
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l2" => Ok(Normalization::L2),
            "max" => Ok(Normalization::Max),
            other => Err(format!("unknown normalization {other:?} (expected l2|max)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub normalization: Normalization,
    pub mode: CentralityMode,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        CentralityConfig {
            tol: 1e-10,
            max_iter: 1000,
            normalization: Normalization::L2,
            mode: CentralityMode::Global,
        }
    }
}

impl CentralityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("centrality tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("centrality max_iter must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub users: Vec<String>,
    /// Aligned with `users` (the network's node order).
    pub scores: Vec<f64>,
    pub normalization: Normalization,
    pub mode: CentralityMode,
    pub iterations_used: usize,
    pub converged: bool,
    /// Component id per node in per-component mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<usize>>,
}

impl CentralityScores {
    pub fn as_map(&self) -> HashMap<&str, f64> {
        self.users.iter().map(String::as_str).zip(self.scores.iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs the shifted iteration; returns the l2-normalized vector, iterations,
/// and convergence flag. Zero-degree nodes stay at 0.
fn power_iterate(adj: &Adjacency, tol: f64, max_iter: usize) -> (Vec<f64>, usize, bool) {
    let n = adj.n_nodes();
    let mut x: Vec<f64> = (0..n).map(|i| if adj.degree(i) > 0 { 1.0 } else { 0.0 }).collect();
    let norm = l2(&x);
    if norm == 0.0 {
        return (x, 0, true);
    }
    x.iter_mut().for_each(|v| *v /= norm);

    let mut y = vec![0.0; n];
    for iter in 1..=max_iter {
        y.par_iter_mut().with_min_len(2048).enumerate().for_each(|(i, yi)| {
            let (nbrs, ws) = adj.neighbors(i);
            if nbrs.is_empty() {
                *yi = 0.0;
                return;
            }
            let mut acc = x[i];
            for (&j, &w) in nbrs.iter().zip(ws) {
                acc += w * x[j as usize];
            }
            *yi = acc;
        });
        let norm = l2(&y);
        y.iter_mut().for_each(|v| *v /= norm);
        let diff = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut y);
        if diff < tol {
            return (x, iter, true);
        }
    }
    (x, max_iter, false)
}

fn renormalize(x: &mut [f64], normalization: Normalization) {
    let scale = match normalization {
        Normalization::L2 => l2(x),
        Normalization::Max => x.iter().copied().fold(0.0, f64::max),
    };
    if scale > 0.0 {
        x.iter_mut().for_each(|v| *v /= scale);
    }
}

/// Eigenvector centrality of every node. A graph without edges yields all
/// zeros; non-convergence is reported through `converged`, not as an error.
pub fn eigenvector_centrality(g: &SimilarityNetwork, cfg: &CentralityConfig) -> Result<CentralityScores> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (scores, iterations_used, converged, comps) = match cfg.mode {
        CentralityMode::Global => {
            let (mut x, it, ok) = power_iterate(&g.adjacency(), cfg.tol, cfg.max_iter);
            renormalize(&mut x, cfg.normalization);
            (x, it, ok, None)
        }
        CentralityMode::PerComponent => {
            let mut scores = vec![0.0; g.n_nodes()];
            let mut comp_of = vec![0; g.n_nodes()];
            let (mut iters, mut all_ok) = (0, true);
            for (c, members) in components(g).iter().enumerate() {
                let mut keep = vec![false; g.n_nodes()];
                for &v in members {
                    keep[v] = true;
                    comp_of[v] = c;
                }
                if members.len() < 2 {
                    continue;
                }
                let sub = g.induced(&keep);
                let (mut x, it, ok) = power_iterate(&sub.adjacency(), cfg.tol, cfg.max_iter);
                renormalize(&mut x, cfg.normalization);
                for (k, &v) in members.iter().enumerate() {
                    scores[v] = x[k];
                }
                iters = iters.max(it);
                all_ok &= ok;
            }
            (scores, iters, all_ok, Some(comp_of))
        }
    };
    if !converged {
        log::warn!(
            "eigenvector centrality did not converge within {} iterations (tol {})",
            cfg.max_iter,
            cfg.tol
        );
    }
    Ok(CentralityScores {
        users: g.nodes().to_vec(),
        scores,
        normalization: cfg.normalization,
        mode: cfg.mode,
        iterations_used,
        converged,
        components: comps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn graph(n: usize, edges: &[(u32, u32, f64)]) -> SimilarityNetwork {
        SimilarityNetwork::new(
            (0..n).map(|i| format!("v{i}")).collect(),
            edges
                .iter()
                .map(|&(source, target, weight)| Edge { source, target, weight })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn k4_uniform() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((i, j, 1.0));
            }
        }
        let s = eigenvector_centrality(&graph(4, &edges), &CentralityConfig::default()).unwrap();
        assert!(s.converged);
        for v in &s.scores {
            assert!((v - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn path_graph_max_normalized() {
        let cfg = CentralityConfig {
            normalization: Normalization::Max,
            ..Default::default()
        };
        let s = eigenvector_centrality(&graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]), &cfg).unwrap();
        assert!(s.converged);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.scores[0] - r).abs() < 1e-6);
        assert!((s.scores[1] - 1.0).abs() < 1e-12);
        assert!((s.scores[2] - r).abs() < 1e-6);
    }

    #[test]
    fn uniform_weight_scaling() {
        let g = graph(5, &[(0, 1, 0.6), (1, 2, 0.9), (2, 3, 0.5), (3, 4, 0.7), (1, 3, 0.8)]);
        let cfg = CentralityConfig::default();
        let a = eigenvector_centrality(&g, &cfg).unwrap();
        let b = eigenvector_centrality(&g.scaled(10.0), &cfg).unwrap();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn isolated_nodes_score_zero() {
        let s = eigenvector_centrality(&graph(4, &[(0, 1, 1.0)]), &CentralityConfig::default()).unwrap();
        assert_eq!(s.scores[2], 0.0);
        assert_eq!(s.scores[3], 0.0);
        let norm: f64 = s.scores.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);

        let none = eigenvector_centrality(&graph(2, &[]), &CentralityConfig::default()).unwrap();
        assert_eq!(none.scores, vec![0.0, 0.0]);
    }

    #[test]
    fn errors_and_non_convergence() {
        let cfg = CentralityConfig::default();
        assert!(matches!(
            eigenvector_centrality(&SimilarityNetwork::default(), &cfg),
            Err(Error::EmptyGraph)
        ));
        let bad = CentralityConfig { tol: 0.0, ..cfg };
        assert!(eigenvector_centrality(&graph(2, &[(0, 1, 1.0)]), &bad).is_err());

        let g = graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        let short = CentralityConfig { max_iter: 2, ..cfg };
        let s = eigenvector_centrality(&g, &short).unwrap();
        assert!(!s.converged);
        assert_eq!(s.iterations_used, 2);
    }

    #[test]
    fn per_component_normalizes_each_component() {
        // a triangle and a separate edge
        let g = graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0)]);
        let cfg = CentralityConfig {
            mode: CentralityMode::PerComponent,
            normalization: Normalization::Max,
            ..Default::default()
        };
        let s = eigenvector_centrality(&g, &cfg).unwrap();
        for v in &s.scores {
            assert!((v - 1.0).abs() < 1e-9);
        }
        assert_eq!(s.components, Some(vec![0, 0, 0, 1, 1]));
    }
}
