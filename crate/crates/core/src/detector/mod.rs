//! Centrality scoring, percentile flagging, cluster extraction, and
//! suspension annotation.

mod centrality;
mod report;

pub use self::centrality::{
    eigenvector_centrality, CentralityConfig, CentralityMode, CentralityScores, Normalization,
};
pub use self::report::{
    annotate_suspensions, attach_clusters, extract_clusters, nearest_rank, percentile_threshold, Cluster,
    CoordinationReport, FlaggedAccount, SharedItem,
};
