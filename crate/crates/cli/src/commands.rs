//! One function per subcommand. Each computes its outputs in memory and
//! returns them; nothing touches the output directory until all succeed.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use courl_core::characterize::characterize;
use courl_core::detector::{annotate_suspensions, CoordinationReport};
use courl_core::graph::{
    graph_metrics, k_core, project, write_edge_list, write_graphml, Builder, NetworkMeta, NetworkSnapshot,
    SimilarityNetwork,
};
use courl_core::ingest::{
    compute_corpus_stats, load_profiles, load_suspended_handles, normalize_handle, parse_corpus, top_k,
    write_count_table, write_jsonl, Post, PostReader, UrlResolver,
};
use courl_core::pipeline::{add_post_shares, detect_shares};
use courl_core::synth::{evaluate_sets, generate, sweep, write_sweep_csv, GroundTruth, RNG_ALGORITHM};
use courl_core::{Error, Result};
use serde_json::json;

use crate::config::{required, ExportFormat, RunConfig};
use crate::output::{sha256_bytes, Outputs};

pub struct Finished {
    pub outputs: Outputs,
    pub summary: serde_json::Value,
    pub message: String,
}

/// Input keys whose files are digested into run.json, per command.
pub fn input_keys(command: &str) -> &'static [&'static str] {
    match command {
        "stats" => &["posts", "expansions"],
        "build" => &["posts", "expansions"],
        "detect" => &["posts", "profiles", "suspended", "expansions"],
        "characterize" => &["posts", "profiles", "flagged", "expansions"],
        "eval" => &["flagged", "truth"],
        "export" => &["network"],
        _ => &[],
    }
}

fn csv_bytes<F>(write: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        write(&mut w)?;
        w.flush().map_err(|e| Error::io("<csv buffer>", e))?;
    }
    Ok(buf)
}

/// Stream posts from disk straight into a share builder.
fn stream_shares(cfg: &RunConfig, resolver: &UrlResolver) -> Result<(Builder, usize, usize)> {
    let path = required(&cfg.posts, "posts")?;
    let mut reader = PostReader::open(path, cfg.fields.clone())?;
    let mut builder = Builder::new();
    let mut n = 0;
    for post in &mut reader {
        add_post_shares(&mut builder, &post?, resolver);
        n += 1;
    }
    log::info!("read {n} posts ({} rejected lines)", reader.rejects());
    Ok((builder, n, reader.rejects()))
}

fn load_posts(cfg: &RunConfig) -> Result<(Vec<Post>, usize)> {
    let parsed = parse_corpus(required(&cfg.posts, "posts")?, &cfg.fields)?;
    if parsed.rejects > 0 {
        log::warn!("{} post lines rejected", parsed.rejects);
    }
    Ok((parsed.posts, parsed.rejects))
}

/// Flagged ids from a `detect` report or a plain id list.
pub fn load_flagged(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        let report: CoordinationReport = serde_json::from_str(&text).map_err(|e| Error::Format {
            what: "flagged report",
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        return Ok(report.flagged_ids());
    }
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn load_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        what: "truth file",
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn stats(cfg: &RunConfig) -> Result<Finished> {
    let resolver = cfg.resolver()?;
    let (posts, rejects) = load_posts(cfg)?;
    let stats = compute_corpus_stats(&posts, &resolver);

    let mut out = Outputs::default();
    out.add_json("stats.json", &stats)?;
    for (name, table) in [
        ("hashtags.csv", &stats.hashtag_counts),
        ("mentions.csv", &stats.mention_counts),
        ("domains.csv", &stats.domain_counts),
        ("languages.csv", &stats.language_distribution),
    ] {
        let rows = top_k(table, cfg.top_k);
        out.add_with(name, |buf| write_count_table(&rows, buf))?;
    }
    out.add(
        "interactions.csv",
        csv_bytes(|w| {
            w.write_record(["interaction", "count", "frequency"])?;
            for (kind, hist) in &stats.interaction_histograms {
                for (value, freq) in hist {
                    w.write_record([kind.as_str(), &value.to_string(), &freq.to_string()])?;
                }
            }
            Ok(())
        })?,
    );
    Ok(Finished {
        summary: json!({
            "posts": stats.posts,
            "users": stats.users,
            "rejected_lines": rejects,
            "url_shares": stats.url_shares,
            "rejected_urls": stats.rejected_urls,
        }),
        message: format!("{} posts from {} users", stats.posts, stats.users),
        outputs: out,
    })
}

fn network_meta(cfg: &RunConfig, k: Option<usize>, excluded: &[String]) -> NetworkMeta {
    NetworkMeta {
        tfidf_variant: Some(format!("{:?}", cfg.tfidf_variant).to_lowercase()),
        similarity_threshold: Some(cfg.similarity_threshold),
        k_core: k,
        excluded_users: excluded.to_vec(),
    }
}

pub fn build(cfg: &RunConfig) -> Result<Finished> {
    let resolver = cfg.resolver()?;
    let params = cfg.detect_params();
    let (builder, n_posts, rejects) = stream_shares(cfg, &resolver)?;
    let active = builder.active_users(params.min_urls);
    let matrix = builder.build(|u| active.contains(u), params.tfidf_variant)?;
    let projection = project(&matrix, params.similarity_threshold);
    let network = match params.k_core {
        Some(k) => k_core(&projection.network, k),
        None => projection.network.clone(),
    };
    let metrics = graph_metrics(&network);

    let mut out = Outputs::default();
    out.add_json("matrix.json", &matrix.to_snapshot(Some(params.similarity_threshold)))?;
    out.add_json(
        "network.json",
        &network.to_snapshot(network_meta(cfg, params.k_core, &projection.diagnostics.zero_weight_users)),
    )?;
    out.add_with("edges.csv", |buf| write_edge_list(&network, buf))?;
    out.add_json(
        "metrics.json",
        &json!({ "graph": metrics, "projection": projection.diagnostics }),
    )?;
    Ok(Finished {
        summary: json!({
            "posts": n_posts,
            "rejected_lines": rejects,
            "matrix_users": matrix.n_users(),
            "matrix_urls": matrix.n_urls(),
            "nodes": network.n_nodes(),
            "edges": network.n_edges(),
        }),
        message: format!(
            "matrix {}x{}; network {} nodes, {} edges",
            matrix.n_users(),
            matrix.n_urls(),
            network.n_nodes(),
            network.n_edges()
        ),
        outputs: out,
    })
}

pub fn detect(cfg: &RunConfig) -> Result<Finished> {
    let resolver = cfg.resolver()?;
    let params = cfg.detect_params();
    if cfg.suspended.is_some() && cfg.profiles.is_none() {
        return Err(Error::InvalidConfig(
            "suspension matching needs profiles: set `profiles` along with `suspended`".into(),
        ));
    }
    let profiles = match &cfg.profiles {
        Some(p) => load_profiles(p)?.profiles,
        None => Vec::new(),
    };
    let mut suspended = match &cfg.suspended {
        Some(p) => load_suspended_handles(p)?,
        None => HashSet::new(),
    };
    suspended.extend(
        profiles
            .iter()
            .filter(|p| p.suspended == Some(true))
            .map(|p| normalize_handle(&p.handle)),
    );

    let (builder, n_posts, rejects) = stream_shares(cfg, &resolver)?;
    let det = detect_shares(builder, &params)?;
    let report = if cfg.profiles.is_some() {
        annotate_suspensions(det.report, &suspended, &profiles)
    } else {
        det.report
    };

    let scores = det.scores.as_map();
    let viz = k_core(&det.network, cfg.export_k_core);
    let viz_scores: Vec<f64> = viz.nodes().iter().map(|u| scores[u.as_str()]).collect();
    let flagged = report.flagged_ids();
    let viz_flagged: Vec<f64> = viz.nodes().iter().map(|u| f64::from(u8::from(flagged.contains(u)))).collect();

    let mut out = Outputs::default();
    let mut report_json = report.to_json()?.into_bytes();
    report_json.push(b'\n');
    out.add("report.json", report_json);
    out.add_with("report.csv", |buf| report.write_csv(&det.scores, buf))?;
    out.add_with("edges.csv", |buf| write_edge_list(&det.network, buf))?;
    out.add_with("network.graphml", |buf| {
        write_graphml(&viz, &[("centrality", &viz_scores), ("flagged", &viz_flagged)], buf)
    })?;
    out.add_json(
        "network.json",
        &det
            .network
            .to_snapshot(network_meta(cfg, params.k_core, &det.projection.diagnostics.zero_weight_users)),
    )?;
    out.add_json(
        "metrics.json",
        &json!({
            "graph": graph_metrics(&det.network),
            "visualization_k_core": cfg.export_k_core,
            "visualization_graph": graph_metrics(&viz),
            "projection": det.projection.diagnostics,
            "matrix": { "users": det.matrix.n_users(), "urls": det.matrix.n_urls(), "nnz": det.matrix.nnz() },
        }),
    )?;
    if !report.converged {
        log::warn!("power iteration stopped at max_iter without meeting tol");
    }
    Ok(Finished {
        summary: json!({
            "posts": n_posts,
            "rejected_lines": rejects,
            "nodes": det.network.n_nodes(),
            "edges": det.network.n_edges(),
            "flagged": report.flagged.len(),
            "clusters": report.clusters.len(),
            "suspended_count": report.suspended_count,
            "threshold_value": report.threshold_value,
            "converged": report.converged,
        }),
        message: format!(
            "flagged {} of {} accounts (threshold {:.6}) in {} clusters",
            report.flagged.len(),
            report.nodes_scored,
            report.threshold_value,
            report.clusters.len()
        ),
        outputs: out,
    })
}

pub fn characterize_cmd(cfg: &RunConfig) -> Result<Finished> {
    let flagged = load_flagged(required(&cfg.flagged, "flagged")?)?;
    let profiles = load_profiles(required(&cfg.profiles, "profiles")?)?.profiles;
    let resolver = cfg.resolver()?;
    let (posts, _) = load_posts(cfg)?;
    let report = characterize(&posts, &profiles, &flagged, &resolver, &cfg.forensics_config());

    let mut per_user: BTreeMap<&str, (u64, u64, u64)> = flagged.iter().map(|u| (u.as_str(), (0, 0, 0))).collect();
    for p in &posts {
        if let Some(row) = per_user.get_mut(p.author_id.as_str()) {
            row.0 += 1;
            row.1 += u64::from(!p.is_repost);
            row.2 += p.raw_urls.iter().filter(|u| resolver.resolve(u).is_some()).count() as u64;
        }
    }
    let with_profile: HashSet<&str> = profiles.iter().map(|p| p.user_id.as_str()).collect();

    let mut out = Outputs::default();
    out.add_json("forensics.json", &report)?;
    out.add(
        "accounts.csv",
        csv_bytes(|w| {
            w.write_record(["user_id", "has_profile", "posts", "original_posts", "url_shares"])?;
            for (user, (posts, originals, shares)) in &per_user {
                w.write_record([
                    *user,
                    if with_profile.contains(user) { "true" } else { "false" },
                    &posts.to_string(),
                    &originals.to_string(),
                    &shares.to_string(),
                ])?;
            }
            Ok(())
        })?,
    );
    let domains = top_k(&report.domains.domain_counts, usize::MAX);
    out.add_with("domains.csv", |buf| write_count_table(&domains, buf))?;
    let platforms: Vec<(String, u64)> =
        report.domains.platform_counts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    out.add_with("platforms.csv", |buf| write_count_table(&platforms, buf))?;

    Ok(Finished {
        summary: json!({
            "accounts": report.accounts,
            "missing_profiles": report.missing_profiles.len(),
            "bio_clusters": report.bio_clusters.len(),
            "hashtag_sequences": report.hashtag_sequences.len(),
            "duplicate_media": report.duplicate_media.len(),
            "shared_bio_link_domains": report.bio_links.domains.len(),
        }),
        message: format!(
            "{} accounts: {} bio clusters, {} hashtag sequences, {} duplicate media groups",
            report.accounts,
            report.bio_clusters.len(),
            report.hashtag_sequences.len(),
            report.duplicate_media.len()
        ),
        outputs: out,
    })
}

pub fn synth(cfg: &RunConfig) -> Result<Finished> {
    let synth_cfg = cfg.synth_config();
    let corpus = generate(&synth_cfg)?;
    let mut posts = Vec::new();
    write_jsonl(&corpus.posts, &mut posts)?;
    let mut profiles = Vec::new();
    write_jsonl(&corpus.profiles, &mut profiles)?;
    let mut truth = serde_json::to_vec_pretty(&corpus.truth)?;
    truth.push(b'\n');

    let mut both = posts.clone();
    both.extend_from_slice(&profiles);
    let corpus_digest = sha256_bytes(&both);
    let digests = json!({
        "posts.jsonl": sha256_bytes(&posts),
        "profiles.jsonl": sha256_bytes(&profiles),
        "truth.json": sha256_bytes(&truth),
    });

    let mut out = Outputs::default();
    out.add("posts.jsonl", posts);
    out.add("profiles.jsonl", profiles);
    out.add("truth.json", truth);
    out.add_json(
        "synth.json",
        &json!({
            "config": synth_cfg,
            "rng": RNG_ALGORITHM,
            "corpus_sha256": corpus_digest,
            "files": digests,
        }),
    )?;
    Ok(Finished {
        summary: json!({
            "posts": corpus.posts.len(),
            "users": corpus.profiles.len(),
            "coordinated": corpus.truth.coordinated_ids.len(),
            "corpus_sha256": corpus_digest,
        }),
        message: format!(
            "{} posts, {} users ({} coordinated); corpus sha256 {corpus_digest}",
            corpus.posts.len(),
            corpus.profiles.len(),
            corpus.truth.coordinated_ids.len()
        ),
        outputs: out,
    })
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn eval(cfg: &RunConfig) -> Result<Finished> {
    let flagged = load_flagged(required(&cfg.flagged, "flagged")?)?;
    let truth = load_truth(required(&cfg.truth, "truth")?)?;
    let m = evaluate_sets(&flagged, &truth);

    let mut out = Outputs::default();
    out.add_json("metrics.json", &json!({ "flagged": flagged.len(), "truth": truth.coordinated_ids.len(), "metrics": m }))?;
    out.add(
        "metrics.csv",
        csv_bytes(|w| {
            w.write_record(["flagged", "truth", "tp", "fp", "fn", "precision", "recall", "f1"])?;
            w.write_record([
                flagged.len().to_string(),
                truth.coordinated_ids.len().to_string(),
                m.true_positives.to_string(),
                m.false_positives.to_string(),
                m.false_negatives.to_string(),
                opt_num(m.precision),
                opt_num(m.recall),
                opt_num(m.f1),
            ])
        })?,
    );
    Ok(Finished {
        summary: serde_json::to_value(m)?,
        message: format!(
            "precision {} recall {} f1 {}",
            opt_num(m.precision),
            opt_num(m.recall),
            opt_num(m.f1)
        ),
        outputs: out,
    })
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Finished> {
    let grid = cfg.sweep_grid();
    let rows = sweep(&grid);
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    let mut out = Outputs::default();
    out.add_with("metrics.csv", |buf| write_sweep_csv(&rows, buf))?;
    out.add_json("sweep.json", &json!({ "grid": grid, "rows": rows }))?;
    Ok(Finished {
        summary: json!({ "points": rows.len(), "failed": failed }),
        message: format!("{} grid points ({failed} failed)", rows.len()),
        outputs: out,
    })
}

pub fn export(cfg: &RunConfig) -> Result<Finished> {
    let path = required(&cfg.network, "network")?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let snap: NetworkSnapshot = serde_json::from_str(&text).map_err(|e| Error::Format {
        what: "network snapshot",
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let full = SimilarityNetwork::from_snapshot(&snap)?;
    let g = match cfg.k_core {
        Some(k) => k_core(&full, k),
        None => full,
    };
    let mut out = Outputs::default();
    let name = match cfg.export_format {
        ExportFormat::Edges => {
            out.add_with("edges.csv", |buf| write_edge_list(&g, buf))?;
            "edges.csv"
        }
        ExportFormat::Graphml => {
            out.add_with("network.graphml", |buf| write_graphml(&g, &[], buf))?;
            "network.graphml"
        }
    };
    Ok(Finished {
        summary: json!({ "nodes": g.n_nodes(), "edges": g.n_edges(), "k_core": cfg.k_core }),
        message: format!("wrote {name}: {} nodes, {} edges", g.n_nodes(), g.n_edges()),
        outputs: out,
    })
}
