use std::collections::BTreeSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Post, UserProfile};

/// Recorded in corpus metadata so other implementations can reproduce a corpus.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9, SeedableRng::seed_from_u64); unit = (next_u64 >> 11) * 2^-53; index = floor(unit * n)";

/// First second of May 2024, UTC.
const EPOCH: i64 = 1_714_521_600;
const MONTH_SECS: usize = 31 * 86_400;

const BIO_WORDS: &[&str] = &[
    "dad", "mom", "teacher", "nurse", "veteran", "engineer", "fan", "coffee", "dogs", "cats", "hiking",
    "books", "music", "faith", "family", "football", "gardening", "retired", "student", "writer", "texas",
    "ohio", "florida", "news", "politics", "photography", "cooking", "science", "history", "runner",
];
const TOPIC_TAGS: &[&str] = &[
    "election2024", "trump2024", "biden2024", "vote", "gop", "democrats", "maga", "voteblue2024",
    "debate", "economy", "border", "news",
];
const LANGS: &[&str] = &["es", "fr", "de", "pt", "it"];
const CAMPAIGN_TEMPLATE: &str = "Sick of biased media? Real stories at the link below";
const CAMPAIGN_TAGS: &str = "#Vote2024 #OnlyChoice #RealNews";
const CAMPAIGN_OUTLETS: &[&str] = &["https://outlet-one.example", "https://outlet-two.example/home"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_organic: usize,
    pub n_coordinated: usize,
    pub url_catalog_size: usize,
    pub zipf_exponent: f64,
    /// Inclusive range of URL shares (one URL per post) per user.
    pub shares_per_user: (usize, usize),
    pub campaign_pool_size: usize,
    /// Fraction of each coordinated user's shares drawn from the campaign pool.
    pub campaign_overlap: f64,
    /// Probability that an organic post is a repost.
    pub repost_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_organic: 1000,
            n_coordinated: 30,
            url_catalog_size: 2000,
            zipf_exponent: 1.1,
            shares_per_user: (5, 25),
            campaign_pool_size: 10,
            campaign_overlap: 0.9,
            repost_fraction: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(format!("synth: {m}")));
        if self.n_organic + self.n_coordinated == 0 {
            return fail("no users requested".into());
        }
        if self.url_catalog_size == 0 {
            return fail("url_catalog_size must be >= 1".into());
        }
        if !(self.zipf_exponent > 0.0 && self.zipf_exponent.is_finite()) {
            return fail(format!("zipf_exponent must be > 0, got {}", self.zipf_exponent));
        }
        let (lo, hi) = self.shares_per_user;
        if lo == 0 || lo > hi {
            return fail(format!("shares_per_user must satisfy 1 <= min <= max, got ({lo}, {hi})"));
        }
        if self.n_coordinated > 0 && self.campaign_pool_size == 0 {
            return fail("campaign_pool_size must be >= 1 when n_coordinated > 0".into());
        }
        if !(0.0..=1.0).contains(&self.campaign_overlap) {
            return fail(format!("campaign_overlap must be in [0, 1], got {}", self.campaign_overlap));
        }
        if !(0.0..=1.0).contains(&self.repost_fraction) {
            return fail(format!("repost_fraction must be in [0, 1], got {}", self.repost_fraction));
        }
        Ok(())
    }

    /// Pool shares for a coordinated user with `n` shares.
    pub fn pool_shares(&self, n: usize) -> usize {
        ((self.campaign_overlap * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub coordinated_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpus {
    pub posts: Vec<Post>,
    pub profiles: Vec<UserProfile>,
    pub truth: GroundTruth,
}

/// Portable uniform draws on top of a seeded ChaCha8 stream.
struct Stream(ChaCha8Rng);

impl Stream {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Log-uniform engagement count in [0, 1000).
    fn heavy_tail(&mut self) -> u64 {
        ((self.unit() * 1000f64.ln()).exp() - 1.0).floor() as u64
    }
}

/// Inverse-CDF sampler over ranks `0..n` with weight `(rank + 1)^-s`.
struct Zipf {
    cdf: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, s: f64) -> Self {
        let mut acc = 0.0;
        let cdf = (1..=n)
            .map(|r| {
                acc += (r as f64).powf(-s);
                acc
            })
            .collect();
        Zipf { cdf }
    }

    fn sample(&self, rng: &mut Stream) -> usize {
        let target = rng.unit() * self.cdf.last().copied().unwrap_or(0.0);
        self.cdf.partition_point(|&c| c <= target).min(self.cdf.len() - 1)
    }
}

fn catalog_url(rank: usize) -> String {
    format!("https://site{:03}.example/article/{rank}", rank % 97)
}

fn pool_url(k: usize) -> String {
    format!("https://campaign-news{}.example/story/{k}", k % 4)
}

/// Generate a labeled corpus. Output is a pure function of the config.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = Stream(ChaCha8Rng::seed_from_u64(cfg.seed));
    let zipf = Zipf::new(cfg.url_catalog_size, cfg.zipf_exponent);
    let total = cfg.n_organic + cfg.n_coordinated;

    // roles[k] == true marks user k as coordinated; Fisher-Yates shuffle.
    let mut roles: Vec<bool> = (0..total).map(|k| k < cfg.n_coordinated).collect();
    for i in (1..total).rev() {
        let j = rng.below(i + 1);
        roles.swap(i, j);
    }

    let mut posts = Vec::new();
    let mut profiles = Vec::with_capacity(total);
    let mut truth = GroundTruth::default();
    let (lo, hi) = cfg.shares_per_user;

    for (k, &coordinated) in roles.iter().enumerate() {
        let user = format!("user{k:06}");
        let n_shares = lo + rng.below(hi - lo + 1);
        let n_pool = if coordinated { cfg.pool_shares(n_shares) } else { 0 };

        for s in 0..n_shares {
            let url = if s < n_pool {
                pool_url(rng.below(cfg.campaign_pool_size))
            } else {
                catalog_url(zipf.sample(&mut rng))
            };
            let mut post = Post::new(format!("p{:08}", posts.len()), user.clone());
            post.created_at = EPOCH + rng.below(MONTH_SECS) as i64;
            post.raw_urls = vec![url];
            post.language = Some(if rng.chance(0.85) { "en" } else { LANGS[rng.below(LANGS.len())] }.to_string());
            post.likes = rng.heavy_tail();
            post.retweets = rng.heavy_tail() / 4;
            post.replies = rng.heavy_tail() / 8;
            post.quotes = rng.heavy_tail() / 16;
            if coordinated {
                post.hashtags = vec!["vote2024".into(), "realnews".into()];
                if rng.chance(0.2) {
                    post.media_digests = vec![format!("campaign-image-{}", rng.below(3))];
                }
            } else {
                for _ in 0..rng.below(3) {
                    post.hashtags.push(TOPIC_TAGS[rng.below(TOPIC_TAGS.len())].to_string());
                }
                post.is_repost = rng.chance(cfg.repost_fraction);
                if rng.chance(0.1) {
                    post.media_digests = vec![format!("media-{}", post.post_id)];
                }
            }
            post.text = format!("shared {}", post.raw_urls[0]);
            posts.push(post);
        }

        let mut profile = UserProfile::new(user.clone(), format!("handle{k:06}"));
        profile.display_name = format!("User {k}");
        if coordinated {
            profile.bio = if rng.chance(0.5) {
                format!("{CAMPAIGN_TEMPLATE} {CAMPAIGN_TAGS}")
            } else {
                format!("Patriot voice. {CAMPAIGN_TEMPLATE}")
            };
            profile.bio_urls = vec![CAMPAIGN_OUTLETS[rng.below(CAMPAIGN_OUTLETS.len())].to_string()];
            truth.coordinated_ids.insert(user);
        } else {
            let words: Vec<&str> = (0..4 + rng.below(6)).map(|_| BIO_WORDS[rng.below(BIO_WORDS.len())]).collect();
            profile.bio = words.join(" ");
            if rng.chance(0.1) {
                profile.bio_urls = vec![format!("https://blog{}.example", rng.below(100_000))];
            }
        }
        profiles.push(profile);
    }

    Ok(SynthCorpus { posts, profiles, truth })
}
