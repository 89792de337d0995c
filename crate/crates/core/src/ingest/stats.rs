use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Post;
use super::url::UrlResolver;
use crate::error::Result;

/// Descriptive statistics over a post corpus. All maps are ordered so the
/// serialized form is stable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub posts: u64,
    pub users: u64,
    pub url_shares: u64,
    pub rejected_urls: u64,
    pub hashtag_counts: BTreeMap<String, u64>,
    pub mention_counts: BTreeMap<String, u64>,
    pub domain_counts: BTreeMap<String, u64>,
    pub language_distribution: BTreeMap<String, u64>,
    /// interaction type ("likes", "retweets", "replies", "quotes") -> count value -> frequency
    pub interaction_histograms: BTreeMap<String, BTreeMap<u64, u64>>,
}

#[derive(Default)]
struct Partial {
    stats: CorpusStats,
    authors: HashSet<String>,
}

fn bump(map: &mut BTreeMap<String, u64>, key: &str, by: u64) {
    if let Some(v) = map.get_mut(key) {
        *v += by;
    } else {
        map.insert(key.to_string(), by);
    }
}

impl Partial {
    fn add(mut self, post: &Post, resolver: &UrlResolver) -> Self {
        let s = &mut self.stats;
        s.posts += 1;
        if !self.authors.contains(&post.author_id) {
            self.authors.insert(post.author_id.clone());
        }
        for h in &post.hashtags {
            bump(&mut s.hashtag_counts, h, 1);
        }
        for m in &post.mentions {
            bump(&mut s.mention_counts, m, 1);
        }
        for raw in &post.raw_urls {
            match resolver.resolve(raw) {
                Some(url) => {
                    s.url_shares += 1;
                    bump(&mut s.domain_counts, &url.registered_domain, 1);
                }
                None => s.rejected_urls += 1,
            }
        }
        if let Some(lang) = &post.language {
            bump(&mut s.language_distribution, lang, 1);
        }
        for (kind, value) in [
            ("likes", post.likes),
            ("retweets", post.retweets),
            ("replies", post.replies),
            ("quotes", post.quotes),
        ] {
            *s.interaction_histograms
                .entry(kind.to_string())
                .or_default()
                .entry(value)
                .or_default() += 1;
        }
        self
    }

    fn merge(mut self, other: Partial) -> Self {
        let (a, b) = (&mut self.stats, other.stats);
        a.posts += b.posts;
        a.url_shares += b.url_shares;
        a.rejected_urls += b.rejected_urls;
        for (dst, src) in [
            (&mut a.hashtag_counts, b.hashtag_counts),
            (&mut a.mention_counts, b.mention_counts),
            (&mut a.domain_counts, b.domain_counts),
            (&mut a.language_distribution, b.language_distribution),
        ] {
            for (k, v) in src {
                *dst.entry(k).or_default() += v;
            }
        }
        for (kind, hist) in b.interaction_histograms {
            let dst = a.interaction_histograms.entry(kind).or_default();
            for (k, v) in hist {
                *dst.entry(k).or_default() += v;
            }
        }
        self.authors.extend(other.authors);
        self
    }
}

/// Exact counts over the corpus. The reduction is associative and
/// commutative, so results do not depend on thread count or input order.
pub fn compute_corpus_stats(posts: &[Post], resolver: &UrlResolver) -> CorpusStats {
    let partial = posts
        .par_iter()
        .with_min_len(8192)
        .fold(Partial::default, |acc, p| acc.add(p, resolver))
        .reduce(Partial::default, Partial::merge);
    let mut stats = partial.stats;
    stats.users = partial.authors.len() as u64;
    stats
}

/// Entries sorted by count descending, ties broken by item ascending.
pub fn top_k<K: Clone + Ord>(counts: &BTreeMap<K, u64>, k: usize) -> Vec<(K, u64)> {
    let mut rows: Vec<(K, u64)> = counts.iter().map(|(i, c)| (i.clone(), *c)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

/// `item,count` CSV.
pub fn write_count_table<W: Write>(rows: &[(String, u64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item", "count"])?;
    for (item, count) in rows {
        w.write_record([item.as_str(), &count.to_string()])?;
    }
    w.flush().map_err(|e| crate::error::Error::io("<csv output>", e))?;
    Ok(())
}

/// Users whose posts contain at least `min_urls` canonicalizable URL shares,
/// counting repeats and reposts.
pub fn filter_active_users<'a, I>(posts: I, min_urls: usize, resolver: &UrlResolver) -> HashSet<String>
where
    I: IntoIterator<Item = &'a Post>,
{
    let mut shares: HashMap<&'a str, usize> = HashMap::new();
    for post in posts {
        let n = post
            .raw_urls
            .iter()
            .filter(|raw| resolver.resolve(raw).is_some())
            .count();
        *shares.entry(post.author_id.as_str()).or_default() += n;
    }
    shares
        .into_iter()
        .filter(|&(_, n)| n >= min_urls.max(1))
        .map(|(u, _)| u.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn post(id: usize, author: &str, urls: &[&str]) -> Post {
        let mut p = Post::new(format!("p{id}"), author);
        p.raw_urls = urls.iter().map(|s| s.to_string()).collect();
        p
    }

    #[test]
    fn active_user_threshold() {
        let r = UrlResolver::default();
        let mut posts = Vec::new();
        let mut id = 0;
        for (user, n) in [("a", 5), ("b", 2), ("c", 1)] {
            for k in 0..n {
                posts.push(post(id, user, &[&format!("https://site.com/{k}")]));
                id += 1;
            }
        }
        posts.push(post(id, "d", &["not a url"]));

        // brute-force recount
        let expected = ["a", "b", "c", "d"]
            .iter()
            .filter(|u| {
                posts
                    .iter()
                    .filter(|p| p.author_id == **u)
                    .flat_map(|p| &p.raw_urls)
                    .filter(|raw| raw.starts_with("https://"))
                    .count()
                    >= 2
            })
            .count();
        assert_eq!(expected, 2);
        assert_eq!(filter_active_users(&posts, 2, &r).len(), expected);
        assert!(filter_active_users(&posts, 5, &r).contains("a"));
        assert_eq!(filter_active_users(&posts, 5, &r).len(), 1);
        assert!(!filter_active_users(&posts, 1, &r).contains("d"));
    }

    #[test]
    fn large_hashtag_counts() {
        let r = UrlResolver::default();
        let mut posts = Vec::new();
        for i in 0..2707 {
            let mut p = Post::new(format!("h{i}"), format!("u{}", i % 37));
            p.hashtags = vec!["trump2024".into()];
            posts.push(p);
        }
        for i in 0..34285 {
            let mut p = Post::new(format!("m{i}"), "x");
            p.mentions = vec!["rncresearch".into()];
            p.language = Some("en".into());
            posts.push(p);
        }
        let stats = compute_corpus_stats(&posts, &r);
        assert_eq!(stats.hashtag_counts["trump2024"], 2707);
        assert_eq!(stats.mention_counts["rncresearch"], 34285);
        assert_eq!(stats.language_distribution.values().sum::<u64>(), 34285);
        assert_eq!(stats.interaction_histograms["likes"][&0], 2707 + 34285);
        assert_eq!(top_k(&stats.hashtag_counts, 20)[0], ("trump2024".to_string(), 2707));
    }

    #[test]
    fn empty_corpus_stats() {
        let stats = compute_corpus_stats(&[], &UrlResolver::default());
        assert!(stats.hashtag_counts.is_empty());
        assert!(stats.mention_counts.is_empty());
        assert!(stats.domain_counts.is_empty());
        assert!(stats.language_distribution.is_empty());
        assert!(stats.interaction_histograms.is_empty());
    }

    #[test]
    fn domains_are_canonical() {
        let posts = vec![post(0, "a", &["https://www.nytimes.com/x", "https://t.co/abc", "::"])];
        let stats = compute_corpus_stats(&posts, &UrlResolver::default());
        assert_eq!(stats.domain_counts["nytimes.com"], 1);
        assert_eq!(stats.domain_counts["t.co"], 1);
        assert_eq!(stats.rejected_urls, 1);
    }

    proptest! {
        #[test]
        fn stats_permutation_invariant(
            rows in prop::collection::vec((0usize..5, 0usize..4, 0u64..4, prop::bool::ANY), 0..60),
            seed in any::<u64>(),
        ) {
            let posts: Vec<Post> = rows.iter().enumerate().map(|(i, &(u, d, likes, en))| {
                let mut p = post(i, &format!("u{u}"), &[&format!("https://d{d}.com/{i}")]);
                p.hashtags = vec![format!("tag{}", d)];
                p.likes = likes;
                if en { p.language = Some("en".into()); }
                p
            }).collect();
            let mut shuffled = posts.clone();
            // deterministic Fisher-Yates driven by the seed
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let r = UrlResolver::default();
            prop_assert_eq!(compute_corpus_stats(&posts, &r), compute_corpus_stats(&shuffled, &r));
        }

        #[test]
        fn active_filter_monotone(counts in prop::collection::vec(0usize..8, 1..10), k in 1usize..8) {
            let mut posts = Vec::new();
            for (u, &n) in counts.iter().enumerate() {
                for j in 0..n {
                    posts.push(post(posts.len(), &format!("u{u}"), &[&format!("https://a.com/{j}")]));
                }
            }
            let r = UrlResolver::default();
            let low = filter_active_users(&posts, k, &r);
            let high = filter_active_users(&posts, k + 1, &r);
            prop_assert!(high.is_subset(&low));
        }
    }
}
