//! The user-URL bipartite graph as a sparse CSR matrix of share counts and
//! TF-IDF weights.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CanonicalUrl;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfIdfVariant {
    /// `count * ln(N / df)`. URLs shared by every user get weight zero.
    #[default]
    Raw,
    /// `count * (ln((1 + N) / (1 + df)) + 1)`.
    Smoothed,
}

impl TfIdfVariant {
    pub fn idf(self, n_users: usize, df: usize) -> f64 {
        let (n, df) = (n_users as f64, df as f64);
        match self {
            TfIdfVariant::Raw => (n / df).ln(),
            TfIdfVariant::Smoothed => ((1.0 + n) / (1.0 + df)).ln() + 1.0,
        }
    }
}

impl std::str::FromStr for TfIdfVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(TfIdfVariant::Raw),
            "smoothed" => Ok(TfIdfVariant::Smoothed),
            other => Err(format!("unknown tf-idf variant {other:?} (expected raw|smoothed)")),
        }
    }
}

/// Borrowed view of one user's row. Columns are strictly ascending.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub cols: &'a [u32],
    pub counts: &'a [u32],
    pub weights: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserUrlMatrix {
    users: Vec<String>,
    urls: Vec<String>,
    domains: Vec<String>,
    variant: TfIdfVariant,
    idf: Vec<f64>,
    df: Vec<u32>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
    weights: Vec<f64>,
}

impl UserUrlMatrix {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_urls(&self) -> usize {
        self.urls.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn urls(&self) -> &[String] {
        &self.urls
    }

    pub fn url_domain(&self, url: usize) -> &str {
        &self.domains[url]
    }

    pub fn variant(&self) -> TfIdfVariant {
        self.variant
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn df(&self) -> &[u32] {
        &self.df
    }

    pub fn row(&self, user: usize) -> Row<'_> {
        let (a, b) = (self.row_ptr[user], self.row_ptr[user + 1]);
        Row {
            cols: &self.cols[a..b],
            counts: &self.counts[a..b],
            weights: &self.weights[a..b],
        }
    }

    pub fn user_index(&self, user_id: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(user_id)).ok()
    }

    /// Users whose every weight is zero (they only share ubiquitous URLs).
    pub fn zero_weight_users(&self) -> Vec<usize> {
        (0..self.n_users())
            .filter(|&i| self.row(i).weights.iter().all(|&w| w == 0.0))
            .collect()
    }

    /// Dense copy of the weights, users by URLs. Intended for small matrices.
    pub fn dense_weights(&self) -> Vec<Vec<f64>> {
        (0..self.n_users())
            .map(|i| {
                let mut dense = vec![0.0; self.n_urls()];
                let row = self.row(i);
                for (&c, &w) in row.cols.iter().zip(row.weights) {
                    dense[c as usize] = w;
                }
                dense
            })
            .collect()
    }

    pub fn to_snapshot(&self, threshold: Option<f64>) -> MatrixSnapshot {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_users() {
            let row = self.row(i);
            for k in 0..row.cols.len() {
                triplets.push((i as u32, row.cols[k], row.counts[k], row.weights[k]));
            }
        }
        MatrixSnapshot {
            n_users: self.n_users(),
            n_urls: self.n_urls(),
            tfidf_variant: self.variant,
            threshold,
            users: self.users.clone(),
            urls: self.urls.clone(),
            domains: self.domains.clone(),
            triplets,
        }
    }

    /// Rebuild a matrix from a snapshot. Weights are recomputed from counts
    /// and must agree with the stored ones.
    pub fn from_snapshot(snap: &MatrixSnapshot) -> Result<Self> {
        let bad = |m: &str| Error::invalid(format!("matrix snapshot: {m}"));
        if snap.users.len() != snap.n_users || snap.urls.len() != snap.n_urls {
            return Err(bad("header dimensions do not match"));
        }
        if snap.domains.len() != snap.n_urls {
            return Err(bad("domain list length mismatch"));
        }
        let mut b = Builder::default();
        for &(i, u, c, _) in &snap.triplets {
            let (i, u) = (i as usize, u as usize);
            if i >= snap.n_users || u >= snap.n_urls || c == 0 {
                return Err(bad("triplet out of range"));
            }
            let url = CanonicalUrl {
                full: snap.urls[u].clone(),
                registered_domain: snap.domains[u].clone(),
            };
            for _ in 0..c {
                b.add(&snap.users[i], &url);
            }
        }
        let m = b.build(|_| true, snap.tfidf_variant)?;
        if m.users != snap.users || m.urls != snap.urls {
            return Err(bad("user or url order is not canonical"));
        }
        for ((_, _, _, w), mw) in snap.triplets.iter().zip(&m.weights) {
            if (w - mw).abs() > 1e-9 * mw.abs().max(1.0) {
                return Err(bad("stored weight disagrees with counts"));
            }
        }
        Ok(m)
    }
}

/// Sparse triplet snapshot: `(user index, url index, count, weight)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSnapshot {
    pub n_users: usize,
    pub n_urls: usize,
    pub tfidf_variant: TfIdfVariant,
    pub threshold: Option<f64>,
    pub users: Vec<String>,
    pub urls: Vec<String>,
    pub domains: Vec<String>,
    pub triplets: Vec<(u32, u32, u32, f64)>,
}

/// Accumulates `(user, url)` shares with interned ids.
#[derive(Debug, Default)]
pub struct Builder {
    user_ids: HashMap<String, u32>,
    users: Vec<String>,
    url_ids: HashMap<String, u32>,
    urls: Vec<String>,
    domains: Vec<String>,
    shares: Vec<(u32, u32)>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, user: &str, url: &CanonicalUrl) {
        let u = match self.user_ids.get(user) {
            Some(&id) => id,
            None => {
                let id = self.users.len() as u32;
                self.users.push(user.to_string());
                self.user_ids.insert(user.to_string(), id);
                id
            }
        };
        let l = match self.url_ids.get(&url.full) {
            Some(&id) => id,
            None => {
                let id = self.urls.len() as u32;
                self.urls.push(url.full.clone());
                self.domains.push(url.registered_domain.clone());
                self.url_ids.insert(url.full.clone(), id);
                id
            }
        };
        self.shares.push((u, l));
    }

    pub fn n_shares(&self) -> usize {
        self.shares.len()
    }

    /// Total shares per user id.
    pub fn share_counts(&self) -> HashMap<&str, usize> {
        let mut per = vec![0usize; self.users.len()];
        for &(u, _) in &self.shares {
            per[u as usize] += 1;
        }
        self.users.iter().map(String::as_str).zip(per).collect()
    }

    /// Users with at least `min_urls` shares.
    pub fn active_users(&self, min_urls: usize) -> HashSet<String> {
        self.share_counts()
            .into_iter()
            .filter(|&(_, n)| n >= min_urls.max(1))
            .map(|(u, _)| u.to_string())
            .collect()
    }

    /// Freeze into a matrix over the users accepted by `keep`. Users and URLs
    /// are ordered lexicographically so the result is independent of input order.
    pub fn build(self, keep: impl Fn(&str) -> bool, variant: TfIdfVariant) -> Result<UserUrlMatrix> {
        let kept: Vec<bool> = self.users.iter().map(|u| keep(u)).collect();
        let mut shares: Vec<(u32, u32)> =
            self.shares.into_iter().filter(|&(u, _)| kept[u as usize]).collect();
        if shares.is_empty() {
            return Err(Error::EmptyMatrix);
        }

        let mut user_used = vec![false; self.users.len()];
        let mut url_used = vec![false; self.urls.len()];
        for &(u, l) in &shares {
            user_used[u as usize] = true;
            url_used[l as usize] = true;
        }
        let (user_remap, users) = reorder(&self.users, &user_used);
        let (url_remap, urls) = reorder(&self.urls, &url_used);
        let mut domains = vec![String::new(); urls.len()];
        for (old, &new) in url_remap.iter().enumerate() {
            if new != u32::MAX {
                domains[new as usize] = self.domains[old].clone();
            }
        }

        for s in shares.iter_mut() {
            *s = (user_remap[s.0 as usize], url_remap[s.1 as usize]);
        }
        shares.sort_unstable();

        let n_users = users.len();
        let mut row_ptr = Vec::with_capacity(n_users + 1);
        let mut cols = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        let mut df = vec![0u32; urls.len()];
        row_ptr.push(0);
        let mut current = 0u32;
        for (k, &(u, l)) in shares.iter().enumerate() {
            while current < u {
                row_ptr.push(cols.len());
                current += 1;
            }
            if k > 0 && shares[k - 1] == (u, l) {
                *counts.last_mut().expect("previous entry") += 1;
            } else {
                cols.push(l);
                counts.push(1);
                df[l as usize] += 1;
            }
        }
        row_ptr.push(cols.len());
        debug_assert_eq!(row_ptr.len(), n_users + 1);

        let idf: Vec<f64> = df.iter().map(|&d| variant.idf(n_users, d as usize)).collect();
        let weights: Vec<f64> = cols
            .iter()
            .zip(&counts)
            .map(|(&c, &n)| f64::from(n) * idf[c as usize])
            .collect();

        let m = UserUrlMatrix {
            users,
            urls,
            domains,
            variant,
            idf,
            df,
            row_ptr,
            cols,
            counts,
            weights,
        };
        if m.weights.iter().all(|&w| w == 0.0) {
            log::warn!(
                "every TF-IDF weight is zero ({} users, {} urls): no coordination signal",
                m.n_users(),
                m.n_urls()
            );
        }
        Ok(m)
    }
}

fn reorder(names: &[String], used: &[bool]) -> (Vec<u32>, Vec<String>) {
    let mut order: Vec<usize> = (0..names.len()).filter(|&i| used[i]).collect();
    order.sort_unstable_by(|&a, &b| names[a].cmp(&names[b]));
    let mut remap = vec![u32::MAX; names.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as u32;
    }
    (remap, order.into_iter().map(|i| names[i].clone()).collect())
}

/// Build the matrix from `(user, url)` shares, keeping only `active_users`.
pub fn build_matrix<I, S>(
    shares: I,
    active_users: &HashSet<String>,
    variant: TfIdfVariant,
) -> Result<UserUrlMatrix>
where
    I: IntoIterator<Item = (S, CanonicalUrl)>,
    S: AsRef<str>,
{
    let mut b = Builder::new();
    for (user, url) in shares {
        if active_users.contains(user.as_ref()) {
            b.add(user.as_ref(), &url);
        }
    }
    b.build(|_| true, variant)
}
