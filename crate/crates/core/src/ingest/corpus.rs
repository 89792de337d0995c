//! Line-delimited JSON readers for posts, profiles, and suspension lists.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub author_id: String,
    #[serde(default)]
    pub created_at: i64,
    #[serde(default)]
    pub text: String,
    #[serde(default, rename = "urls")]
    pub raw_urls: Vec<String>,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub media_digests: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default)]
    pub likes: u64,
    #[serde(default)]
    pub retweets: u64,
    #[serde(default)]
    pub replies: u64,
    #[serde(default)]
    pub quotes: u64,
    #[serde(default)]
    pub is_repost: bool,
}

impl Post {
    /// A post with only identity fields set.
    pub fn new(post_id: impl Into<String>, author_id: impl Into<String>) -> Self {
        Post {
            post_id: post_id.into(),
            author_id: author_id.into(),
            created_at: 0,
            text: String::new(),
            raw_urls: Vec::new(),
            hashtags: Vec::new(),
            mentions: Vec::new(),
            media_digests: Vec::new(),
            language: None,
            likes: 0,
            retweets: 0,
            replies: 0,
            quotes: 0,
            is_repost: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub handle: String,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub bio: String,
    #[serde(default)]
    pub bio_urls: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_image_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_image_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspended: Option<bool>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>, handle: impl Into<String>) -> Self {
        UserProfile {
            user_id: user_id.into(),
            handle: handle.into(),
            ..Default::default()
        }
    }
}

/// Input field names for each [`Post`] field. Defaults match the field names
/// written by the synthetic generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub post_id: String,
    pub author_id: String,
    pub created_at: String,
    pub text: String,
    pub urls: String,
    pub hashtags: String,
    pub mentions: String,
    pub media_digests: String,
    pub language: String,
    pub likes: String,
    pub retweets: String,
    pub replies: String,
    pub quotes: String,
    pub is_repost: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            post_id: "post_id".into(),
            author_id: "author_id".into(),
            created_at: "created_at".into(),
            text: "text".into(),
            urls: "urls".into(),
            hashtags: "hashtags".into(),
            mentions: "mentions".into(),
            media_digests: "media_digests".into(),
            language: "language".into(),
            likes: "likes".into(),
            retweets: "retweets".into(),
            replies: "replies".into(),
            quotes: "quotes".into(),
            is_repost: "is_repost".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    MalformedJson,
    MissingId,
    BadField,
    DuplicateId,
}

fn id_field(obj: &Map<String, Value>, name: &str) -> Option<String> {
    match obj.get(name)? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn string_list(obj: &Map<String, Value>, name: &str) -> Result<Vec<String>, RejectReason> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                _ => Err(RejectReason::BadField),
            })
            .collect(),
        Some(Value::String(s)) => Ok(vec![s.clone()]),
        _ => Err(RejectReason::BadField),
    }
}

fn count(obj: &Map<String, Value>, name: &str) -> Result<u64, RejectReason> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(0),
        Some(v) => v.as_u64().ok_or(RejectReason::BadField),
    }
}

fn strip_tag(s: &str, prefix: char) -> Option<String> {
    let s = s.trim().trim_start_matches(prefix);
    (!s.is_empty()).then(|| s.to_lowercase())
}

impl FieldMap {
    /// Parse one JSON line into a post. Does not check id uniqueness.
    pub fn parse_line(&self, line: &str) -> Result<Post, RejectReason> {
        let value: Value = serde_json::from_str(line).map_err(|_| RejectReason::MalformedJson)?;
        let Value::Object(obj) = value else {
            return Err(RejectReason::MalformedJson);
        };
        let post_id = id_field(&obj, &self.post_id).ok_or(RejectReason::MissingId)?;
        let author_id = id_field(&obj, &self.author_id).ok_or(RejectReason::MissingId)?;
        let created_at = match obj.get(&self.created_at) {
            None | Some(Value::Null) => 0,
            Some(v) => v.as_i64().ok_or(RejectReason::BadField)?,
        };
        let text = match obj.get(&self.text) {
            Some(Value::String(s)) => s.clone(),
            _ => String::new(),
        };
        let language = match obj.get(&self.language) {
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            _ => None,
        };
        let is_repost = match obj.get(&self.is_repost) {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => return Err(RejectReason::BadField),
        };
        Ok(Post {
            post_id,
            author_id,
            created_at,
            text,
            raw_urls: string_list(&obj, &self.urls)?,
            hashtags: string_list(&obj, &self.hashtags)?
                .iter()
                .filter_map(|h| strip_tag(h, '#'))
                .collect(),
            mentions: string_list(&obj, &self.mentions)?
                .iter()
                .filter_map(|m| strip_tag(m, '@'))
                .collect(),
            media_digests: string_list(&obj, &self.media_digests)?,
            language,
            likes: count(&obj, &self.likes)?,
            retweets: count(&obj, &self.retweets)?,
            replies: count(&obj, &self.replies)?,
            quotes: count(&obj, &self.quotes)?,
            is_repost,
        })
    }
}

/// Streaming post reader. Invalid lines are counted in [`PostReader::rejects`]
/// and skipped; only I/O failures end the stream with an error.
pub struct PostReader {
    path: PathBuf,
    lines: Lines<BufReader<File>>,
    schema: FieldMap,
    seen: HashSet<String>,
    rejects: usize,
}

impl PostReader {
    pub fn open(path: impl AsRef<Path>, schema: FieldMap) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(PostReader {
            path,
            lines: BufReader::new(file).lines(),
            schema,
            seen: HashSet::new(),
            rejects: 0,
        })
    }

    pub fn rejects(&self) -> usize {
        self.rejects
    }
}

impl Iterator for PostReader {
    type Item = Result<Post>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            if line.trim().is_empty() {
                continue;
            }
            match self.schema.parse_line(&line) {
                Ok(post) if self.seen.insert(post.post_id.clone()) => return Some(Ok(post)),
                Ok(_) | Err(_) => self.rejects += 1,
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct ParsedCorpus {
    pub posts: Vec<Post>,
    pub rejects: usize,
}

/// Read a whole post file, parsing lines in parallel. Output order matches
/// input order; duplicate post ids after the first occurrence are rejected.
pub fn parse_corpus(path: impl AsRef<Path>, schema: &FieldMap) -> Result<ParsedCorpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let parsed: Vec<Result<Post, RejectReason>> = lines
        .par_iter()
        .with_min_len(4096)
        .map(|line| schema.parse_line(line))
        .collect();

    let mut seen = HashSet::with_capacity(parsed.len());
    let mut out = ParsedCorpus::default();
    for item in parsed {
        match item {
            Ok(post) if seen.insert(post.post_id.clone()) => out.posts.push(post),
            _ => out.rejects += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct ParsedProfiles {
    pub profiles: Vec<UserProfile>,
    pub rejects: usize,
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<ParsedProfiles> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut out = ParsedProfiles::default();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<UserProfile>(&line) {
            Ok(p) if !p.user_id.is_empty() && seen.insert(p.user_id.clone()) => {
                out.profiles.push(p)
            }
            _ => out.rejects += 1,
        }
    }
    Ok(out)
}

/// Normalized form used to compare handles: lowercase without a leading '@'.
pub fn normalize_handle(handle: &str) -> String {
    handle.trim().trim_start_matches('@').to_lowercase()
}

/// Newline-delimited suspended handles; blank lines and `#` comments skipped.
pub fn load_suspended_handles(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_handle)
        .collect())
}

pub fn write_jsonl<T: Serialize>(items: &[T], mut out: impl std::io::Write) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n").map_err(|e| Error::io("<jsonl output>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn malformed_line_is_counted_not_fatal() {
        let f = write_file(&[
            r#"{"post_id":"1","author_id":"a","urls":["https://t.co/abc"]}"#,
            r#"{"post_id":"2","author_id":"b""#,
            r#"{"post_id":"3","author_id":"c"}"#,
        ]);
        let parsed = parse_corpus(f.path(), &FieldMap::default()).unwrap();
        assert_eq!(parsed.posts.len(), 2);
        assert_eq!(parsed.rejects, 1);
        assert_eq!(parsed.posts[0].raw_urls, vec!["https://t.co/abc".to_string()]);

        let mut reader = PostReader::open(f.path(), FieldMap::default()).unwrap();
        let streamed: Vec<Post> = reader.by_ref().map(|p| p.unwrap()).collect();
        assert_eq!(streamed, parsed.posts);
        assert_eq!(reader.rejects(), 1);
    }

    #[test]
    fn empty_file() {
        let f = write_file(&[]);
        let parsed = parse_corpus(f.path(), &FieldMap::default()).unwrap();
        assert!(parsed.posts.is_empty());
        assert_eq!(parsed.rejects, 0);
    }

    #[test]
    fn missing_ids_and_duplicates_rejected() {
        let f = write_file(&[
            r#"{"author_id":"a"}"#,
            r#"{"post_id":"","author_id":"a"}"#,
            r#"{"post_id":"1","author_id":"a"}"#,
            r#"{"post_id":"1","author_id":"b"}"#,
            r#"{"post_id":"2","author_id":"a","likes":-3}"#,
        ]);
        let parsed = parse_corpus(f.path(), &FieldMap::default()).unwrap();
        assert_eq!(parsed.posts.len(), 1);
        assert_eq!(parsed.rejects, 4);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = parse_corpus("/nonexistent/posts.jsonl", &FieldMap::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn custom_schema_and_tag_normalization() {
        let schema = FieldMap {
            post_id: "id".into(),
            author_id: "user".into(),
            urls: "links".into(),
            language: "lang".into(),
            ..FieldMap::default()
        };
        let post = schema
            .parse_line(
                r##"{"id":17,"user":"u9","links":["a.com"],"hashtags":["#Trump2024"],"mentions":["@RNCResearch"],"lang":"en","is_repost":true}"##,
            )
            .unwrap();
        assert_eq!(post.post_id, "17");
        assert_eq!(post.hashtags, vec!["trump2024"]);
        assert_eq!(post.mentions, vec!["rncresearch"]);
        assert_eq!(post.language.as_deref(), Some("en"));
        assert!(post.is_repost);
    }

    #[test]
    fn profiles_and_suspended_list() {
        let f = write_file(&[
            r#"{"user_id":"1","handle":"PatriotVoice3","bio":"hi"}"#,
            r#"{"user_id":"1","handle":"dup"}"#,
            r#"not json"#,
        ]);
        let parsed = load_profiles(f.path()).unwrap();
        assert_eq!(parsed.profiles.len(), 1);
        assert_eq!(parsed.rejects, 2);

        let s = write_file(&["@PatriotVoice3", "", "# comment", "JoeAustin0"]);
        let handles = load_suspended_handles(s.path()).unwrap();
        assert_eq!(handles.len(), 2);
        assert!(handles.contains("patriotvoice3"));
    }
}
