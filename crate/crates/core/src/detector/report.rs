use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::centrality::{CentralityMode, CentralityScores, Normalization};
use crate::error::{Error, Result};
use crate::graph::{DisjointSet, SimilarityNetwork, UserUrlMatrix};
use crate::ingest::{normalize_handle, UserProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedAccount {
    pub user_id: String,
    pub score: f64,
    pub cluster_id: Option<usize>,
    pub suspended: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedItem {
    pub item: String,
    /// Cluster members that shared it.
    pub users: usize,
    /// Sum of those members' TF-IDF weights on it.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub members: Vec<String>,
    pub shared_urls: Vec<SharedItem>,
    pub shared_domains: Vec<SharedItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationReport {
    pub percentile: f64,
    /// Flagged accounts score strictly above this value. In per-component
    /// mode this is the smallest of the component thresholds.
    pub threshold_value: f64,
    pub mode: CentralityMode,
    pub normalization: Normalization,
    pub iterations_used: usize,
    pub converged: bool,
    pub nodes_scored: usize,
    /// Highest score first, ties by user id.
    pub flagged: Vec<FlaggedAccount>,
    pub clusters: Vec<Cluster>,
    pub suspended_count: usize,
    pub unmatched_suspensions: usize,
}

impl CoordinationReport {
    pub fn flagged_ids(&self) -> HashSet<String> {
        self.flagged.iter().map(|f| f.user_id.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per scored node: `user_id,score,flagged,cluster_id,suspended`.
    pub fn write_csv<W: Write>(&self, scores: &CentralityScores, out: W) -> Result<()> {
        let flagged: HashMap<&str, &FlaggedAccount> =
            self.flagged.iter().map(|f| (f.user_id.as_str(), f)).collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores.scores[b]
                .total_cmp(&scores.scores[a])
                .then_with(|| scores.users[a].cmp(&scores.users[b]))
        });
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "score", "flagged", "cluster_id", "suspended"])?;
        for i in order {
            let user = scores.users[i].as_str();
            let f = flagged.get(user);
            w.write_record([
                user,
                &format!("{}", scores.scores[i]),
                if f.is_some() { "true" } else { "false" },
                &f.and_then(|f| f.cluster_id).map(|c| c.to_string()).unwrap_or_default(),
                if f.is_some_and(|f| f.suspended) { "true" } else { "false" },
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report csv>", e))
    }
}

/// Nearest-rank percentile: the `ceil(p/100 * n)`-th smallest value.
pub fn nearest_rank(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // p*n is exact for integral p; the epsilon absorbs representation error otherwise.
    let rank = ((p * n as f64) / 100.0 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Some(sorted[rank - 1])
}

fn validate_percentile(p: f64) -> Result<()> {
    if p > 0.0 && p < 100.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("percentile must be in (0, 100), got {p}")))
    }
}

/// Flag nodes whose score is strictly greater than the nearest-rank `p`-th
/// percentile. Per-component scores are thresholded within each component.
pub fn percentile_threshold(scores: &CentralityScores, p: f64) -> Result<CoordinationReport> {
    validate_percentile(p)?;
    if scores.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let groups: Vec<Vec<usize>> = match &scores.components {
        Some(comp) if scores.mode == CentralityMode::PerComponent => {
            let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &c) in comp.iter().enumerate() {
                by.entry(c).or_default().push(i);
            }
            by.into_values().collect()
        }
        _ => vec![(0..scores.len()).collect()],
    };

    let mut flagged = Vec::new();
    let mut threshold_value = f64::INFINITY;
    for members in &groups {
        let values: Vec<f64> = members.iter().map(|&i| scores.scores[i]).collect();
        let t = nearest_rank(&values, p).expect("non-empty group");
        threshold_value = threshold_value.min(t);
        for &i in members {
            // zero scores are never flagged
            if scores.scores[i] > t && scores.scores[i] > 0.0 {
                flagged.push(FlaggedAccount {
                    user_id: scores.users[i].clone(),
                    score: scores.scores[i],
                    cluster_id: None,
                    suspended: false,
                });
            }
        }
    }
    flagged.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.user_id.cmp(&b.user_id)));

    Ok(CoordinationReport {
        percentile: p,
        threshold_value,
        mode: scores.mode,
        normalization: scores.normalization,
        iterations_used: scores.iterations_used,
        converged: scores.converged,
        nodes_scored: scores.len(),
        flagged,
        clusters: Vec::new(),
        suspended_count: 0,
        unmatched_suspensions: 0,
    })
}

fn rank_items(mut items: Vec<SharedItem>, min_users: usize, top_n: usize) -> Vec<SharedItem> {
    items.retain(|s| s.users >= min_users);
    items.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.item.cmp(&b.item)));
    items.truncate(top_n);
    items
}

/// Connected components of the subgraph induced by `flagged`, largest first.
/// With a matrix, each cluster lists the URLs and domains its members
/// co-share (shared by at least two members, or the lone member of a
/// singleton), ranked by total TF-IDF weight.
pub fn extract_clusters(
    g: &SimilarityNetwork,
    flagged: &HashSet<String>,
    matrix: Option<&UserUrlMatrix>,
    top_n: usize,
) -> Vec<Cluster> {
    let index = g.node_index();
    let mut nodes: Vec<usize> = flagged
        .iter()
        .filter_map(|u| {
            let idx = index.get(u.as_str()).copied();
            if idx.is_none() {
                log::warn!("flagged user {u} is not a node of the network");
            }
            idx
        })
        .collect();
    nodes.sort_unstable();
    let mut local = vec![usize::MAX; g.n_nodes()];
    for (k, &v) in nodes.iter().enumerate() {
        local[v] = k;
    }
    let mut ds = DisjointSet::new(nodes.len());
    for e in g.edges() {
        let (a, b) = (local[e.source as usize], local[e.target as usize]);
        if a != usize::MAX && b != usize::MAX {
            ds.union(a, b);
        }
    }
    let mut groups: Vec<Vec<String>> = ds
        .groups()
        .into_iter()
        .map(|grp| {
            let mut m: Vec<String> = grp.into_iter().map(|k| g.nodes()[nodes[k]].clone()).collect();
            m.sort();
            m
        })
        .collect();
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));

    groups
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let (shared_urls, shared_domains) = match matrix {
                Some(m) => cluster_evidence(m, &members, top_n),
                None => (Vec::new(), Vec::new()),
            };
            Cluster {
                id,
                members,
                shared_urls,
                shared_domains,
            }
        })
        .collect()
}

fn cluster_evidence(m: &UserUrlMatrix, members: &[String], top_n: usize) -> (Vec<SharedItem>, Vec<SharedItem>) {
    let mut urls: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    let mut domains: BTreeMap<&str, (HashSet<usize>, f64)> = BTreeMap::new();
    for (k, user) in members.iter().enumerate() {
        let Some(i) = m.user_index(user) else { continue };
        let row = m.row(i);
        for (&c, &w) in row.cols.iter().zip(row.weights) {
            let e = urls.entry(c).or_default();
            e.0 += 1;
            e.1 += w;
            let d = domains.entry(m.url_domain(c as usize)).or_default();
            d.0.insert(k);
            d.1 += w;
        }
    }
    let min_users = members.len().min(2);
    let urls = urls
        .into_iter()
        .map(|(c, (users, weight))| SharedItem {
            item: m.urls()[c as usize].clone(),
            users,
            weight,
        })
        .collect();
    let domains = domains
        .into_iter()
        .map(|(d, (users, weight))| SharedItem {
            item: d.to_string(),
            users: users.len(),
            weight,
        })
        .collect();
    (rank_items(urls, min_users, top_n), rank_items(domains, min_users, top_n))
}

/// Attach clusters to a report and set each flagged account's cluster id.
pub fn attach_clusters(report: &mut CoordinationReport, clusters: Vec<Cluster>) {
    let by_user: HashMap<&str, usize> = clusters
        .iter()
        .flat_map(|c| c.members.iter().map(move |m| (m.as_str(), c.id)))
        .collect();
    for f in &mut report.flagged {
        f.cluster_id = by_user.get(f.user_id.as_str()).copied();
    }
    report.clusters = clusters;
}

/// Mark flagged accounts whose profile handle is in `suspended_handles`
/// (compared case-insensitively, without '@'). Listed handles that match no
/// profile are counted in `unmatched_suspensions`.
pub fn annotate_suspensions(
    mut report: CoordinationReport,
    suspended_handles: &HashSet<String>,
    profiles: &[UserProfile],
) -> CoordinationReport {
    let wanted: HashSet<String> = suspended_handles.iter().map(|h| normalize_handle(h)).collect();
    let handle_of: HashMap<&str, String> = profiles
        .iter()
        .map(|p| (p.user_id.as_str(), normalize_handle(&p.handle)))
        .collect();
    let known: HashSet<&str> = handle_of.values().map(String::as_str).collect();
    let unmatched: Vec<&String> = wanted.iter().filter(|h| !known.contains(h.as_str())).collect();
    if !unmatched.is_empty() {
        log::warn!("{} suspended handles match no profile", unmatched.len());
    }

    let mut count = 0;
    for f in &mut report.flagged {
        f.suspended = handle_of
            .get(f.user_id.as_str())
            .is_some_and(|h| wanted.contains(h));
        count += usize::from(f.suspended);
    }
    report.suspended_count = count;
    report.unmatched_suspensions = unmatched.len();
    report
}
