//! End-to-end detection: shares -> TF-IDF matrix -> cosine network ->
//! optional k-core -> eigenvector centrality -> percentile flagging -> clusters.

use serde::{Deserialize, Serialize};

use crate::detector::{
    attach_clusters, eigenvector_centrality, extract_clusters, percentile_threshold, CentralityConfig,
    CentralityScores, CoordinationReport,
};
use crate::error::{Error, Result};
use crate::graph::{k_core, project, Builder, Projection, SimilarityNetwork, TfIdfVariant, UserUrlMatrix};
use crate::ingest::{Post, UrlResolver};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectParams {
    pub min_urls: usize,
    pub tfidf_variant: TfIdfVariant,
    pub similarity_threshold: f64,
    /// Restrict detection to this k-core of the similarity network.
    pub k_core: Option<usize>,
    pub centrality: CentralityConfig,
    pub percentile: f64,
    /// URLs and domains listed per cluster.
    pub top_evidence: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            min_urls: 5,
            tfidf_variant: TfIdfVariant::Raw,
            similarity_threshold: 0.5,
            k_core: None,
            centrality: CentralityConfig::default(),
            percentile: 99.0,
            top_evidence: 10,
        }
    }
}

impl DetectParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_urls < 1 {
            return Err(Error::invalid("min_urls must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::invalid(format!(
                "similarity_threshold must be in [0, 1], got {}",
                self.similarity_threshold
            )));
        }
        if !(self.percentile > 0.0 && self.percentile < 100.0) {
            return Err(Error::invalid(format!("percentile must be in (0, 100), got {}", self.percentile)));
        }
        self.centrality.validate()
    }
}

/// Record every canonicalizable URL in `post` as a share by its author.
pub fn add_post_shares(builder: &mut Builder, post: &Post, resolver: &UrlResolver) {
    for raw in &post.raw_urls {
        if let Some(url) = resolver.resolve(raw) {
            builder.add(&post.author_id, &url);
        }
    }
}

pub fn collect_shares<'a, I>(posts: I, resolver: &UrlResolver) -> Builder
where
    I: IntoIterator<Item = &'a Post>,
{
    let mut b = Builder::new();
    for post in posts {
        add_post_shares(&mut b, post, resolver);
    }
    b
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub matrix: UserUrlMatrix,
    pub projection: Projection,
    /// The network centrality ran on (the k-core when one was requested).
    pub network: SimilarityNetwork,
    pub scores: CentralityScores,
    pub report: CoordinationReport,
}

/// Run detection over the shares collected in `builder`.
pub fn detect_shares(builder: Builder, params: &DetectParams) -> Result<Detection> {
    params.validate()?;
    let active = builder.active_users(params.min_urls);
    let matrix = builder.build(|u| active.contains(u), params.tfidf_variant)?;
    let projection = project(&matrix, params.similarity_threshold);
    let network = match params.k_core {
        Some(k) => k_core(&projection.network, k),
        None => projection.network.clone(),
    };
    if network.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let scores = eigenvector_centrality(&network, &params.centrality)?;
    let mut report = percentile_threshold(&scores, params.percentile)?;
    let clusters = extract_clusters(&network, &report.flagged_ids(), Some(&matrix), params.top_evidence);
    attach_clusters(&mut report, clusters);
    Ok(Detection {
        matrix,
        projection,
        network,
        scores,
        report,
    })
}

pub fn detect(posts: &[Post], resolver: &UrlResolver, params: &DetectParams) -> Result<Detection> {
    detect_shares(collect_shares(posts, resolver), params)
}
