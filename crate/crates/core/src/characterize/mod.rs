//! Account- and content-level forensics over a set of flagged accounts:
//! template bios, identical bio hashtag sequences, independently posted
//! duplicate media, linked domains, and shared bio links.

mod bio;
mod content;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use self::bio::{
    char_trigrams, find_bio_templates, jaccard, normalize_bio, BioCluster, BioTemplateConfig, MatchKind,
};
pub use self::content::{
    bio_hashtags, domain_stats, find_duplicate_media, find_hashtag_sequences, shared_bio_links,
    BioLinkReport, DuplicateMediaGroup, HashtagSequenceCluster, LinkTargetProfile, MediaPosting, Platform,
    PlatformMap,
};

use crate::ingest::{Post, UrlResolver, UserProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForensicsConfig {
    pub bio: BioTemplateConfig,
    pub min_hashtag_members: usize,
    pub min_media_posters: usize,
    pub platforms: PlatformMap,
}

impl Default for ForensicsConfig {
    fn default() -> Self {
        ForensicsConfig {
            bio: BioTemplateConfig::default(),
            min_hashtag_members: 2,
            min_media_posters: 2,
            platforms: PlatformMap::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForensicsReport {
    pub accounts: usize,
    /// Flagged ids without a profile.
    pub missing_profiles: Vec<String>,
    pub bio_clusters: Vec<BioCluster>,
    pub hashtag_sequences: Vec<HashtagSequenceCluster>,
    pub duplicate_media: Vec<DuplicateMediaGroup>,
    pub domains: LinkTargetProfile,
    pub bio_links: BioLinkReport,
}

/// Run every forensic check restricted to `flagged`.
pub fn characterize(
    posts: &[Post],
    profiles: &[UserProfile],
    flagged: &HashSet<String>,
    resolver: &UrlResolver,
    cfg: &ForensicsConfig,
) -> ForensicsReport {
    let mut selected: Vec<UserProfile> =
        profiles.iter().filter(|p| flagged.contains(&p.user_id)).cloned().collect();
    selected.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    let have: HashSet<&str> = selected.iter().map(|p| p.user_id.as_str()).collect();
    let mut missing: Vec<String> = flagged.iter().filter(|u| !have.contains(u.as_str())).cloned().collect();
    missing.sort();
    if !missing.is_empty() {
        log::warn!("{} flagged accounts have no profile", missing.len());
    }

    let flagged_posts = posts.iter().filter(|p| flagged.contains(&p.author_id));
    ForensicsReport {
        accounts: flagged.len(),
        missing_profiles: missing,
        bio_clusters: find_bio_templates(&selected, &cfg.bio),
        hashtag_sequences: find_hashtag_sequences(&selected, cfg.min_hashtag_members),
        duplicate_media: find_duplicate_media(flagged_posts, cfg.min_media_posters),
        domains: domain_stats(posts, flagged, resolver, &cfg.platforms),
        bio_links: shared_bio_links(&selected, resolver),
    }
}
