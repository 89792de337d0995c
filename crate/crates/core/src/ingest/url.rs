//! URL canonicalization.
//!
//! Two shares point at the same resource when their canonical `full` strings
//! are equal. Canonicalization is offline: shortened links stay as they are
//! unless an [`ExpansionMap`] supplies the target.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use url::{Host, Url};

use crate::error::{Error, Result};

/// Default query parameters removed during canonicalization. Entries ending
/// in `*` match by prefix.
pub const DEFAULT_TRACKING_PARAMS: &[&str] =
    &["utm_*", "fbclid", "gclid", "igshid", "ref_src", "s", "t"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalUrl {
    pub full: String,
    pub registered_domain: String,
}

impl fmt::Display for CanonicalUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.full)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UrlRejection {
    Empty,
    Unparseable(String),
    NoHost,
}

impl fmt::Display for UrlRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UrlRejection::Empty => f.write_str("empty URL"),
            UrlRejection::Unparseable(e) => write!(f, "unparseable URL: {e}"),
            UrlRejection::NoHost => f.write_str("URL has no usable host"),
        }
    }
}

impl std::error::Error for UrlRejection {}

/// Names of query parameters to strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrackingParams(Vec<String>);

impl Default for TrackingParams {
    fn default() -> Self {
        TrackingParams(DEFAULT_TRACKING_PARAMS.iter().map(|s| s.to_string()).collect())
    }
}

impl TrackingParams {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TrackingParams(names.into_iter().map(Into::into).collect())
    }

    pub fn matches(&self, name: &str) -> bool {
        let name = name.to_ascii_lowercase();
        self.0.iter().any(|pat| match pat.strip_suffix('*') {
            Some(prefix) => name.starts_with(prefix),
            None => name == *pat,
        })
    }
}

/// Canonicalize with the default tracking-parameter list.
pub fn canonicalize_url(raw: &str) -> Result<CanonicalUrl, UrlRejection> {
    canonicalize_url_with(raw, &TrackingParams::default())
}

pub fn canonicalize_url_with(
    raw: &str,
    tracking: &TrackingParams,
) -> Result<CanonicalUrl, UrlRejection> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(UrlRejection::Empty);
    }
    if !trimmed.contains("://") {
        if let Some((scheme, rest)) = trimmed.split_once(':') {
            let schemelike = scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme.chars().all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '-');
            if schemelike && !rest.starts_with(|c: char| c.is_ascii_digit()) {
                return Err(UrlRejection::Unparseable(format!("unsupported scheme {scheme}")));
            }
        }
    }
    // Scheme-less shares such as "t.co/abc" are read as https.
    let parsed = if trimmed.contains("://") {
        Url::parse(trimmed)
    } else {
        Url::parse(&format!("https://{trimmed}"))
    }
    .map_err(|e| UrlRejection::Unparseable(e.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(UrlRejection::Unparseable(format!("unsupported scheme {}", parsed.scheme())));
    }

    let host = match parsed.host() {
        Some(Host::Domain(d)) => {
            let d = d.to_ascii_lowercase();
            let d = d.trim_end_matches('.');
            let d = d.strip_prefix("www.").filter(|rest| !rest.is_empty()).unwrap_or(d);
            // Bare words ("localhost", "foo") are not treated as link targets.
            if !d.contains('.') {
                return Err(UrlRejection::NoHost);
            }
            d.to_string()
        }
        Some(Host::Ipv4(ip)) => ip.to_string(),
        Some(Host::Ipv6(ip)) => format!("[{ip}]"),
        None => return Err(UrlRejection::NoHost),
    };

    let mut full = String::with_capacity(trimmed.len());
    full.push_str(parsed.scheme());
    full.push_str("://");
    full.push_str(&host);
    if let Some(port) = parsed.port() {
        full.push(':');
        full.push_str(&port.to_string());
    }
    full.push_str(parsed.path().trim_end_matches('/'));

    if let Some(query) = parsed.query() {
        let mut kept: Vec<(String, &str)> = query
            .split('&')
            .filter(|seg| !seg.is_empty())
            .map(|seg| {
                let name = seg.split('=').next().unwrap_or("");
                let decoded: String = url::form_urlencoded::parse(name.as_bytes())
                    .next()
                    .map(|(k, _)| k.into_owned())
                    .unwrap_or_default();
                (decoded, seg)
            })
            .filter(|(name, _)| !tracking.matches(name))
            .collect();
        // Stable: repeated names keep their relative order.
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        if !kept.is_empty() {
            full.push('?');
            for (i, (_, seg)) in kept.iter().enumerate() {
                if i > 0 {
                    full.push('&');
                }
                full.push_str(seg);
            }
        }
    }

    let registered_domain = match parsed.host() {
        Some(Host::Domain(_)) => host.clone(),
        _ => host.trim_matches(|c| c == '[' || c == ']').to_string(),
    };
    Ok(CanonicalUrl {
        full,
        registered_domain,
    })
}

/// Offline substitute for link resolution: shortened URL -> expanded target.
#[derive(Debug, Default)]
pub struct ExpansionMap {
    entries: HashMap<String, String>,
    warnings: AtomicUsize,
}

impl ExpansionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keys are stored in canonical form when they canonicalize.
    pub fn insert(&mut self, short: &str, expanded: &str) {
        let key = canonicalize_url(short)
            .map(|c| c.full)
            .unwrap_or_else(|_| short.trim().to_string());
        self.entries.insert(key, expanded.trim().to_string());
    }

    /// Two-column TSV: `short<TAB>expanded`. Blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = ExpansionMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.splitn(2, '\t');
            match (cols.next(), cols.next()) {
                (Some(short), Some(expanded)) if !short.trim().is_empty() => {
                    map.insert(short, expanded)
                }
                _ => {
                    return Err(Error::Format {
                        what: "expansion map",
                        path: path.to_path_buf(),
                        message: format!("line {} is not two tab-separated columns", lineno + 1),
                    })
                }
            }
        }
        Ok(map)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn warnings(&self) -> usize {
        self.warnings.load(Ordering::Relaxed)
    }

    pub fn apply(&self, url: CanonicalUrl, tracking: &TrackingParams) -> CanonicalUrl {
        match self.entries.get(&url.full) {
            None => url,
            Some(target) => match canonicalize_url_with(target, tracking) {
                Ok(expanded) => expanded,
                Err(e) => {
                    log::warn!("expansion of {} to {target:?} rejected: {e}", url.full);
                    self.warnings.fetch_add(1, Ordering::Relaxed);
                    url
                }
            },
        }
    }
}

pub fn apply_expansion_map(url: CanonicalUrl, map: &ExpansionMap) -> CanonicalUrl {
    map.apply(url, &TrackingParams::default())
}

/// Canonicalization settings shared by every stage that touches URLs.
#[derive(Debug, Default)]
pub struct UrlResolver {
    pub tracking: TrackingParams,
    pub expansions: Option<ExpansionMap>,
}

impl UrlResolver {
    pub fn new(tracking: TrackingParams, expansions: Option<ExpansionMap>) -> Self {
        UrlResolver {
            tracking,
            expansions,
        }
    }

    pub fn resolve(&self, raw: &str) -> Option<CanonicalUrl> {
        let url = canonicalize_url_with(raw, &self.tracking).ok()?;
        Some(match &self.expansions {
            Some(map) => map.apply(url, &self.tracking),
            None => url,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_case_www_fragment_tracking() {
        let c = canonicalize_url("HTTPS://WWW.Example.com/Path?utm_source=x&id=2#frag").unwrap();
        assert_eq!(c.full, "https://example.com/Path?id=2");
        assert_eq!(c.registered_domain, "example.com");
    }

    #[test]
    fn shortener_left_unresolved() {
        let c = canonicalize_url("https://t.co/AbC").unwrap();
        assert_eq!(c.full, "https://t.co/AbC");
        assert_eq!(c.registered_domain, "t.co");
    }

    #[test]
    fn rejects_non_urls() {
        assert!(canonicalize_url("not a url").is_err());
        assert_eq!(canonicalize_url("   "), Err(UrlRejection::Empty));
        assert!(canonicalize_url("mailto:someone@example.com").is_err());
        assert!(canonicalize_url("::bad::").is_err());
    }

    #[test]
    fn root_path_has_no_trailing_slash() {
        assert_eq!(canonicalize_url("http://Example.org/").unwrap().full, "http://example.org");
        assert_eq!(canonicalize_url("example.org/a/b//").unwrap().full, "https://example.org/a/b");
    }

    #[test]
    fn query_sorted_and_short_names_stripped() {
        let c = canonicalize_url("https://x.com/u/status/1?t=abc&s=20&b=2&a=1").unwrap();
        assert_eq!(c.full, "https://x.com/u/status/1?a=1&b=2");
    }

    #[test]
    fn custom_tracking_list() {
        let tracking = TrackingParams::new(["sid"]);
        let c = canonicalize_url_with("https://a.com/?sid=1&utm_source=z", &tracking).unwrap();
        assert_eq!(c.full, "https://a.com?utm_source=z");
    }

    #[test]
    fn expansion_map_lookup() {
        let mut map = ExpansionMap::new();
        map.insert("t.co/abc", "https://www.patriotvoice.site/story/1?utm_medium=social");
        map.insert("https://t.co/bad", "::bad::");

        let short = canonicalize_url("https://t.co/abc").unwrap();
        let out = apply_expansion_map(short, &map);
        assert_eq!(out.full, "https://patriotvoice.site/story/1");
        assert_eq!(out.registered_domain, "patriotvoice.site");

        let absent = canonicalize_url("https://t.co/zzz").unwrap();
        assert_eq!(apply_expansion_map(absent.clone(), &map), absent);
        assert_eq!(map.warnings(), 0);

        let bad = canonicalize_url("https://t.co/bad").unwrap();
        assert_eq!(apply_expansion_map(bad.clone(), &map), bad);
        assert_eq!(map.warnings(), 1);
    }

    #[test]
    fn expansion_map_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.tsv");
        fs::write(&path, "# short\texpanded\nhttps://bit.ly/x\thttps://example.com/x\n\n").unwrap();
        let map = ExpansionMap::load(&path).unwrap();
        assert_eq!(map.len(), 1);

        fs::write(&path, "onlyonecolumn\n").unwrap();
        assert!(matches!(ExpansionMap::load(&path), Err(Error::Format { .. })));
    }

    fn url_strategy() -> impl Strategy<Value = String> {
        (
            prop::sample::select(vec!["http", "https", "HTTPS", "Http"]),
            prop::bool::ANY,
            "[a-zA-Z]{1,8}\\.(com|org|site|CO)",
            prop::collection::vec("[a-zA-Z0-9_-]{1,6}", 0..4),
            prop::bool::ANY,
            prop::collection::vec(
                (
                    prop::sample::select(vec!["id", "utm_source", "q", "s", "fbclid", "page"]),
                    "[a-z0-9]{0,4}",
                ),
                0..4,
            ),
            prop::option::of("[a-z]{1,5}"),
        )
            .prop_map(|(scheme, www, host, segs, slash, query, frag)| {
                let mut s = format!("{scheme}://{}{host}", if www { "www." } else { "" });
                for seg in &segs {
                    s.push('/');
                    s.push_str(seg);
                }
                if slash {
                    s.push('/');
                }
                if !query.is_empty() {
                    s.push('?');
                    let q: Vec<String> = query.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    s.push_str(&q.join("&"));
                }
                if let Some(f) = frag {
                    s.push('#');
                    s.push_str(&f);
                }
                s
            })
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(raw in url_strategy()) {
            let once = canonicalize_url(&raw).unwrap();
            let twice = canonicalize_url(&once.full).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn cosmetic_variants_collapse(
            host in "[a-z]{1,8}\\.com",
            path in "(/[a-z0-9]{1,5}){0,3}",
            frag in "[a-z]{0,5}",
            utm in "[a-z0-9]{1,5}",
        ) {
            let plain = canonicalize_url(&format!("https://{host}{path}")).unwrap();
            let noisy = format!(
                "HTTPS://WWW.{}{path}/?utm_campaign={utm}&fbclid={utm}#{frag}",
                host.to_uppercase()
            );
            prop_assert_eq!(canonicalize_url(&noisy).unwrap(), plain);
        }
    }
}
