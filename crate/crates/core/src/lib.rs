//! Detection of coordinated accounts from co-URL sharing.
//!
//! Users are linked to the URLs they share, weighted by TF-IDF, and projected
//! onto a cosine-similarity network. Accounts whose eigenvector centrality
//! exceeds a high percentile of the centrality distribution are flagged and
//! grouped into clusters, which [`characterize`] then inspects for template
//! bios, duplicate media, and shared link targets.

pub mod characterize;
pub mod detector;
mod error;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod synth;

pub use crate::error::{Error, Result};
