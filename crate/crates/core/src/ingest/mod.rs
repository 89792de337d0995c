//! Corpus ingestion: JSONL readers, URL canonicalization, activity
//! filtering, and descriptive statistics.

mod corpus;
mod stats;
mod url;

pub use self::corpus::{
    load_profiles, load_suspended_handles, normalize_handle, parse_corpus, write_jsonl, FieldMap,
    ParsedCorpus, ParsedProfiles, Post, PostReader, RejectReason, UserProfile,
};
pub use self::stats::{compute_corpus_stats, filter_active_users, top_k, write_count_table, CorpusStats};
pub use self::url::{
    apply_expansion_map, canonicalize_url, canonicalize_url_with, CanonicalUrl, ExpansionMap,
    TrackingParams, UrlRejection, UrlResolver, DEFAULT_TRACKING_PARAMS,
};
