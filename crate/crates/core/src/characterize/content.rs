use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{Post, UrlResolver, UserProfile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagSequenceCluster {
    pub sequence: Vec<String>,
    pub members: BTreeSet<String>,
}

/// Hashtags in order of appearance, lowercased, without '#'.
pub fn bio_hashtags(bio: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = bio.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while let Some(&(j, d)) = chars.peek() {
            if d.is_alphanumeric() || d == '_' {
                end = j + d.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        if end > start {
            out.push(bio[start..end].to_lowercase());
        }
    }
    out
}

/// Users whose bios carry the exact same ordered hashtag list.
pub fn find_hashtag_sequences(profiles: &[UserProfile], min_members: usize) -> Vec<HashtagSequenceCluster> {
    let mut groups: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    for p in profiles {
        let tags = bio_hashtags(&p.bio);
        if !tags.is_empty() {
            groups.entry(tags).or_default().insert(p.user_id.clone());
        }
    }
    let mut out: Vec<HashtagSequenceCluster> = groups
        .into_iter()
        .filter(|(_, m)| m.len() >= min_members.max(2))
        .map(|(sequence, members)| HashtagSequenceCluster { sequence, members })
        .collect();
    out.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then_with(|| a.sequence.cmp(&b.sequence)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaPosting {
    pub user_id: String,
    pub post_id: String,
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateMediaGroup {
    pub media_digest: String,
    /// Original posts only, ordered by time then post id.
    pub postings: Vec<MediaPosting>,
}

impl DuplicateMediaGroup {
    pub fn distinct_users(&self) -> usize {
        self.postings.iter().map(|p| p.user_id.as_str()).collect::<HashSet<_>>().len()
    }
}

/// Media digests posted independently (not as reposts) by at least
/// `min_posters` distinct authors.
pub fn find_duplicate_media<'a, I>(posts: I, min_posters: usize) -> Vec<DuplicateMediaGroup>
where
    I: IntoIterator<Item = &'a Post>,
{
    let mut by_digest: BTreeMap<&'a str, Vec<&'a Post>> = BTreeMap::new();
    for post in posts {
        if post.is_repost {
            continue;
        }
        let mut seen = HashSet::new();
        for d in &post.media_digests {
            if seen.insert(d.as_str()) {
                by_digest.entry(d.as_str()).or_default().push(post);
            }
        }
    }
    by_digest
        .into_iter()
        .filter_map(|(digest, posts)| {
            let authors: HashSet<&str> = posts.iter().map(|p| p.author_id.as_str()).collect();
            if authors.len() < min_posters.max(2) {
                return None;
            }
            let mut postings: Vec<MediaPosting> = posts
                .iter()
                .map(|p| MediaPosting {
                    user_id: p.author_id.clone(),
                    post_id: p.post_id.clone(),
                    created_at: p.created_at,
                })
                .collect();
            postings.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
            Some(DuplicateMediaGroup {
                media_digest: digest.to_string(),
                postings,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Platform {
    ThisPlatform,
    VideoPlatform,
    OtherSocial,
    Web,
}

impl Platform {
    pub fn label(self) -> &'static str {
        match self {
            Platform::ThisPlatform => "this-platform",
            Platform::VideoPlatform => "video-platform",
            Platform::OtherSocial => "other-social",
            Platform::Web => "web",
        }
    }
}

/// Domain lists per platform label; a domain matches itself and its subdomains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformMap {
    pub this_platform: Vec<String>,
    pub video_platform: Vec<String>,
    pub other_social: Vec<String>,
}

impl Default for PlatformMap {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        PlatformMap {
            this_platform: v(&["x.com", "twitter.com", "t.co"]),
            video_platform: v(&["youtube.com", "youtu.be"]),
            other_social: v(&["facebook.com", "instagram.com", "reddit.com", "t.me"]),
        }
    }
}

impl PlatformMap {
    pub fn classify(&self, domain: &str) -> Platform {
        let hit = |list: &[String]| {
            list.iter().any(|d| {
                domain == d || (domain.len() > d.len() && domain.ends_with(d.as_str()) && domain[..domain.len() - d.len()].ends_with('.'))
            })
        };
        if hit(&self.this_platform) {
            Platform::ThisPlatform
        } else if hit(&self.video_platform) {
            Platform::VideoPlatform
        } else if hit(&self.other_social) {
            Platform::OtherSocial
        } else {
            Platform::Web
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkTargetProfile {
    pub domain_counts: BTreeMap<String, u64>,
    /// Keyed by platform label; every label is present.
    pub platform_counts: BTreeMap<String, u64>,
    pub rejected_urls: u64,
}

/// Registered-domain counts over the posts authored by `users`.
pub fn domain_stats<'a, I>(
    posts: I,
    users: &HashSet<String>,
    resolver: &UrlResolver,
    platforms: &PlatformMap,
) -> LinkTargetProfile
where
    I: IntoIterator<Item = &'a Post>,
{
    let mut out = LinkTargetProfile::default();
    for p in [Platform::ThisPlatform, Platform::VideoPlatform, Platform::OtherSocial, Platform::Web] {
        out.platform_counts.insert(p.label().to_string(), 0);
    }
    for post in posts {
        if !users.contains(&post.author_id) {
            continue;
        }
        for raw in &post.raw_urls {
            match resolver.resolve(raw) {
                Some(url) => {
                    *out.platform_counts
                        .get_mut(platforms.classify(&url.registered_domain).label())
                        .expect("all labels present") += 1;
                    *out.domain_counts.entry(url.registered_domain).or_default() += 1;
                }
                None => out.rejected_urls += 1,
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioLinkReport {
    /// Domains linked from two or more bios, with the linking users.
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub skipped_urls: u64,
}

pub fn shared_bio_links(profiles: &[UserProfile], resolver: &UrlResolver) -> BioLinkReport {
    let mut all: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut skipped = 0;
    for p in profiles {
        for raw in &p.bio_urls {
            match resolver.resolve(raw) {
                Some(url) => {
                    all.entry(url.registered_domain).or_default().insert(p.user_id.clone());
                }
                None => skipped += 1,
            }
        }
    }
    all.retain(|_, users| users.len() >= 2);
    BioLinkReport {
        domains: all,
        skipped_urls: skipped,
    }
}
