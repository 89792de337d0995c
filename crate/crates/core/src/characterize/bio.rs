use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::graph::DisjointSet;
use crate::ingest::UserProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    ExactTemplate,
    NearDuplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioCluster {
    pub normalized_text: String,
    pub members: BTreeSet<String>,
    pub match_kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BioTemplateConfig {
    pub min_members: usize,
    pub jaccard_min: f64,
    /// Known phrases matched as substrings of the normalized bio.
    pub probes: Vec<String>,
}

impl Default for BioTemplateConfig {
    fn default() -> Self {
        BioTemplateConfig {
            min_members: 2,
            jaccard_min: 0.8,
            probes: Vec::new(),
        }
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c,
            '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
            | '\u{2010}'..='\u{2027}'
            | '\u{2030}'..='\u{205E}'
            | '\u{3001}'..='\u{3003}'
            | '\u{FF01}'..='\u{FF0F}')
}

/// Lowercase, drop punctuation, collapse whitespace. Emoji and other
/// symbols are kept. Idempotent.
pub fn normalize_bio(bio: &str) -> String {
    let cleaned: String = bio.to_lowercase().chars().filter(|&c| !is_punctuation(c)).collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Character 3-grams of an already normalized string. Strings shorter than
/// three characters yield themselves as a single shingle.
pub fn char_trigrams(text: &str) -> HashSet<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < 3 {
        return if chars.is_empty() {
            HashSet::new()
        } else {
            HashSet::from([text.to_string()])
        };
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

pub fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.iter().filter(|s| b.contains(*s)).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Template and near-duplicate bio clusters.
///
/// * every probe contained in at least `min_members` normalized bios yields
///   an exact-template cluster;
/// * identical non-empty normalized bios shared by `min_members` users yield
///   an exact-template cluster;
/// * single-linkage over 3-gram Jaccard >= `jaccard_min` yields a
///   near-duplicate cluster when the component has at least two distinct
///   bios and is not already covered by one exact cluster.
///
/// Near-duplicate discovery compares all pairs and is meant for flagged sets,
/// not whole corpora.
pub fn find_bio_templates(profiles: &[UserProfile], cfg: &BioTemplateConfig) -> Vec<BioCluster> {
    let min_members = cfg.min_members.max(2);
    let normalized: Vec<(String, &str)> = profiles
        .iter()
        .map(|p| (normalize_bio(&p.bio), p.user_id.as_str()))
        .collect();
    let mut out = Vec::new();

    for probe in &cfg.probes {
        let needle = normalize_bio(probe);
        if needle.is_empty() {
            continue;
        }
        let members: BTreeSet<String> = normalized
            .iter()
            .filter(|(bio, _)| bio.contains(&needle))
            .map(|(_, u)| u.to_string())
            .collect();
        if members.len() >= min_members {
            out.push(BioCluster {
                normalized_text: needle,
                members,
                match_kind: MatchKind::ExactTemplate,
            });
        }
    }

    let mut by_text: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for (bio, user) in &normalized {
        if !bio.is_empty() {
            by_text.entry(bio.as_str()).or_default().insert(user.to_string());
        }
    }
    for (text, members) in &by_text {
        if members.len() >= min_members && !out.iter().any(|c| &c.members == members) {
            out.push(BioCluster {
                normalized_text: text.to_string(),
                members: members.clone(),
                match_kind: MatchKind::ExactTemplate,
            });
        }
    }

    let texts: Vec<&str> = by_text.keys().copied().collect();
    let shingles: Vec<HashSet<String>> = texts.iter().map(|t| char_trigrams(t)).collect();
    let mut ds = DisjointSet::new(texts.len());
    for a in 0..texts.len() {
        for b in a + 1..texts.len() {
            if jaccard(&shingles[a], &shingles[b]) >= cfg.jaccard_min {
                ds.union(a, b);
            }
        }
    }
    for group in ds.groups() {
        if group.len() < 2 {
            continue;
        }
        let members: BTreeSet<String> = group.iter().flat_map(|&t| by_text[texts[t]].iter().cloned()).collect();
        if members.len() < min_members || out.iter().any(|c| members.is_subset(&c.members)) {
            continue;
        }
        out.push(BioCluster {
            // texts are sorted, so the first is the smallest representative
            normalized_text: texts[group[0]].to_string(),
            members,
            match_kind: MatchKind::NearDuplicate,
        });
    }

    out.sort_by(|a, b| {
        a.match_kind
            .cmp(&b.match_kind)
            .then(b.members.len().cmp(&a.members.len()))
            .then_with(|| a.normalized_text.cmp(&b.normalized_text))
    });
    out
}
