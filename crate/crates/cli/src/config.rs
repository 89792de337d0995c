//! Run configuration: a TOML or JSON file, overridden key by key from flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use courl_core::characterize::{BioTemplateConfig, ForensicsConfig, PlatformMap};
use courl_core::detector::{CentralityConfig, CentralityMode, Normalization};
use courl_core::graph::TfIdfVariant;
use courl_core::ingest::{ExpansionMap, FieldMap, TrackingParams, UrlResolver, DEFAULT_TRACKING_PARAMS};
use courl_core::pipeline::DetectParams;
use courl_core::synth::{SweepGrid, SynthConfig};
use courl_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    Edges,
    Graphml,
}

/// Sweep axes. Empty axes fall back to the single configured value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub seeds: Vec<u64>,
    pub overlaps: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub percentiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub posts: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    /// Newline-delimited suspended handles.
    pub suspended: Option<PathBuf>,
    /// Two-column TSV of shortened -> expanded URLs.
    pub expansions: Option<PathBuf>,
    /// A report.json from `detect` or a newline-delimited list of user ids.
    pub flagged: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    /// A network.json written by `build` or `detect`.
    pub network: Option<PathBuf>,
    pub output: PathBuf,
    pub fields: FieldMap,
    pub tracking_params: Vec<String>,

    pub min_urls: usize,
    pub tfidf_variant: TfIdfVariant,
    pub similarity_threshold: f64,
    pub k_core: Option<usize>,
    pub centrality_tol: f64,
    pub centrality_max_iter: usize,
    pub centrality_mode: CentralityMode,
    pub centrality_normalization: Normalization,
    pub percentile: f64,
    pub top_evidence: usize,

    /// k-core written to network.graphml by `detect`.
    pub export_k_core: usize,
    pub export_format: ExportFormat,
    /// Rows in each top-k table written by `stats`.
    pub top_k: usize,

    pub platforms: PlatformMap,
    pub template_probes: Vec<String>,
    pub near_duplicate_jaccard: f64,
    pub min_template_members: usize,
    pub min_hashtag_members: usize,
    pub min_media_posters: usize,

    /// The one seed for all randomness; replaces `synth.seed`.
    pub seed: u64,
    pub synth: SynthConfig,
    pub sweep: SweepAxes,
    /// Worker threads; 0 or absent means one per core.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let detect = DetectParams::default();
        let forensics = ForensicsConfig::default();
        RunConfig {
            posts: None,
            profiles: None,
            suspended: None,
            expansions: None,
            flagged: None,
            truth: None,
            network: None,
            output: PathBuf::from("out"),
            fields: FieldMap::default(),
            tracking_params: DEFAULT_TRACKING_PARAMS.iter().map(|s| s.to_string()).collect(),
            min_urls: detect.min_urls,
            tfidf_variant: detect.tfidf_variant,
            similarity_threshold: detect.similarity_threshold,
            k_core: detect.k_core,
            centrality_tol: detect.centrality.tol,
            centrality_max_iter: detect.centrality.max_iter,
            centrality_mode: detect.centrality.mode,
            centrality_normalization: detect.centrality.normalization,
            percentile: detect.percentile,
            top_evidence: detect.top_evidence,
            export_k_core: 10,
            export_format: ExportFormat::Edges,
            top_k: 20,
            platforms: forensics.platforms,
            template_probes: forensics.bio.probes,
            near_duplicate_jaccard: forensics.bio.jaccard_min,
            min_template_members: forensics.bio.min_members,
            min_hashtag_members: forensics.min_hashtag_members,
            min_media_posters: forensics.min_media_posters,
            seed: 0,
            synth: SynthConfig::default(),
            sweep: SweepAxes::default(),
            threads: None,
        }
    }
}

/// Command-line overrides; each flag replaces the matching config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Post corpus (line-delimited JSON).
    #[arg(long, global = true)]
    pub posts: Option<PathBuf>,
    /// Profile file (line-delimited JSON).
    #[arg(long, global = true)]
    pub profiles: Option<PathBuf>,
    /// Suspended handles, one per line.
    #[arg(long, global = true)]
    pub suspended: Option<PathBuf>,
    /// Shortened-to-expanded URL table (TSV).
    #[arg(long, global = true)]
    pub expansions: Option<PathBuf>,
    /// Flagged accounts: report.json or one user id per line.
    #[arg(long, global = true)]
    pub flagged: Option<PathBuf>,
    /// Ground-truth labels (truth.json).
    #[arg(long, global = true)]
    pub truth: Option<PathBuf>,
    /// Stored network snapshot (network.json).
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub min_urls: Option<usize>,
    /// raw | smoothed
    #[arg(long, global = true)]
    pub tfidf_variant: Option<TfIdfVariant>,
    #[arg(long, global = true)]
    pub similarity_threshold: Option<f64>,
    /// Restrict detection (or `export`) to this k-core.
    #[arg(long, global = true)]
    pub k_core: Option<usize>,
    #[arg(long, global = true)]
    pub centrality_tol: Option<f64>,
    #[arg(long, global = true)]
    pub centrality_max_iter: Option<usize>,
    /// global | per_component
    #[arg(long, global = true)]
    pub centrality_mode: Option<CentralityMode>,
    /// l2 | max
    #[arg(long, global = true)]
    pub centrality_normalization: Option<Normalization>,
    #[arg(long, global = true)]
    pub percentile: Option<f64>,
    #[arg(long, global = true)]
    pub top_evidence: Option<usize>,
    #[arg(long, global = true)]
    pub export_k_core: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub export_format: Option<ExportFormat>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    /// Known template phrase (repeatable; replaces the configured list).
    #[arg(long = "probe", global = true)]
    pub template_probes: Vec<String>,
    #[arg(long, global = true)]
    pub near_duplicate_jaccard: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub n_organic: Option<usize>,
    #[arg(long, global = true)]
    pub n_coordinated: Option<usize>,
    #[arg(long, global = true)]
    pub campaign_overlap: Option<f64>,
    #[arg(long, global = true)]
    pub campaign_pool_size: Option<usize>,
    #[arg(long, global = true)]
    pub url_catalog_size: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sweep_seeds: Vec<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sweep_overlaps: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sweep_thresholds: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sweep_percentiles: Vec<f64>,
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn set_list<T>(slot: &mut Vec<T>, value: Vec<T>) {
    if !value.is_empty() {
        *slot = value;
    }
}

impl RunConfig {
    /// Parse a config file; `.json` is read as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        set_opt(&mut self.posts, o.posts);
        set_opt(&mut self.profiles, o.profiles);
        set_opt(&mut self.suspended, o.suspended);
        set_opt(&mut self.expansions, o.expansions);
        set_opt(&mut self.flagged, o.flagged);
        set_opt(&mut self.truth, o.truth);
        set_opt(&mut self.network, o.network);
        set(&mut self.output, o.output);
        set(&mut self.min_urls, o.min_urls);
        set(&mut self.tfidf_variant, o.tfidf_variant);
        set(&mut self.similarity_threshold, o.similarity_threshold);
        set_opt(&mut self.k_core, o.k_core);
        set(&mut self.centrality_tol, o.centrality_tol);
        set(&mut self.centrality_max_iter, o.centrality_max_iter);
        set(&mut self.centrality_mode, o.centrality_mode);
        set(&mut self.centrality_normalization, o.centrality_normalization);
        set(&mut self.percentile, o.percentile);
        set(&mut self.top_evidence, o.top_evidence);
        set(&mut self.export_k_core, o.export_k_core);
        set(&mut self.export_format, o.export_format);
        set(&mut self.top_k, o.top_k);
        set_list(&mut self.template_probes, o.template_probes);
        set(&mut self.near_duplicate_jaccard, o.near_duplicate_jaccard);
        set(&mut self.seed, o.seed);
        set(&mut self.synth.n_organic, o.n_organic);
        set(&mut self.synth.n_coordinated, o.n_coordinated);
        set(&mut self.synth.campaign_overlap, o.campaign_overlap);
        set(&mut self.synth.campaign_pool_size, o.campaign_pool_size);
        set(&mut self.synth.url_catalog_size, o.url_catalog_size);
        set_list(&mut self.sweep.seeds, o.sweep_seeds);
        set_list(&mut self.sweep.overlaps, o.sweep_overlaps);
        set_list(&mut self.sweep.thresholds, o.sweep_thresholds);
        set_list(&mut self.sweep.percentiles, o.sweep_percentiles);
        set_opt(&mut self.threads, o.threads);
        self.synth.seed = self.seed;
    }

    /// Check every numeric parameter before any work starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.detect_params().validate()?;
        self.synth_config().validate()?;
        if !(0.0..=1.0).contains(&self.near_duplicate_jaccard) {
            return bad(format!("near_duplicate_jaccard must be in [0, 1], got {}", self.near_duplicate_jaccard));
        }
        if self.min_template_members < 2 || self.min_hashtag_members < 2 || self.min_media_posters < 2 {
            return bad("minimum group sizes must be >= 2".into());
        }
        if self.top_k == 0 {
            return bad("top_k must be >= 1".into());
        }
        for &p in &self.sweep.percentiles {
            if !(p > 0.0 && p < 100.0) {
                return bad(format!("sweep percentile {p} outside (0, 100)"));
            }
        }
        for &t in &self.sweep.thresholds {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("sweep threshold {t} outside [0, 1]"));
            }
        }
        for &o in &self.sweep.overlaps {
            if !(0.0..=1.0).contains(&o) {
                return bad(format!("sweep overlap {o} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn detect_params(&self) -> DetectParams {
        DetectParams {
            min_urls: self.min_urls,
            tfidf_variant: self.tfidf_variant,
            similarity_threshold: self.similarity_threshold,
            k_core: self.k_core,
            centrality: CentralityConfig {
                tol: self.centrality_tol,
                max_iter: self.centrality_max_iter,
                normalization: self.centrality_normalization,
                mode: self.centrality_mode,
            },
            percentile: self.percentile,
            top_evidence: self.top_evidence,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            ..self.synth.clone()
        }
    }

    pub fn forensics_config(&self) -> ForensicsConfig {
        ForensicsConfig {
            bio: BioTemplateConfig {
                min_members: self.min_template_members,
                jaccard_min: self.near_duplicate_jaccard,
                probes: self.template_probes.clone(),
            },
            min_hashtag_members: self.min_hashtag_members,
            min_media_posters: self.min_media_posters,
            platforms: self.platforms.clone(),
        }
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        let or = |axis: &Vec<f64>, v: f64| if axis.is_empty() { vec![v] } else { axis.clone() };
        let base = self.synth_config();
        SweepGrid {
            seeds: if self.sweep.seeds.is_empty() { vec![self.seed] } else { self.sweep.seeds.clone() },
            overlaps: or(&self.sweep.overlaps, base.campaign_overlap),
            thresholds: or(&self.sweep.thresholds, self.similarity_threshold),
            percentiles: or(&self.sweep.percentiles, self.percentile),
            base,
            params: self.detect_params(),
        }
    }

    pub fn resolver(&self) -> Result<UrlResolver> {
        let expansions = match &self.expansions {
            Some(path) => Some(ExpansionMap::load(path)?),
            None => None,
        };
        Ok(UrlResolver::new(TrackingParams::new(&self.tracking_params), expansions))
    }
}

/// The path for `key`, or a configuration error naming the missing input.
pub fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("missing input: set `{key}` in the config or pass --{}", key.replace('_', "-"))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_flags_layer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "percentile = 95.0\nsimilarity_threshold = 0.6\nk_core = 3\nseed = 7\n\n[synth]\nn_organic = 50\n",
        )
        .unwrap();
        let mut cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.k_core, Some(3));
        cfg.apply(Overrides {
            percentile: Some(97.0),
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!(cfg.percentile, 97.0);
        assert_eq!(cfg.similarity_threshold, 0.6);
        assert_eq!(cfg.synth_config().seed, 9);
        assert_eq!(cfg.synth_config().n_organic, 50);
        cfg.validate().unwrap();
    }

    #[test]
    fn json_config_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.json");
        std::fs::write(&good, r#"{"tfidf_variant": "smoothed", "centrality_mode": "per_component"}"#).unwrap();
        let cfg = RunConfig::load(&good).unwrap();
        assert_eq!(cfg.tfidf_variant, TfIdfVariant::Smoothed);
        let typo = dir.path().join("b.json");
        std::fs::write(&typo, r#"{"percentil": 99}"#).unwrap();
        assert!(matches!(RunConfig::load(&typo), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn out_of_domain_values_rejected() {
        for cfg in [
            RunConfig { percentile: 100.0, ..Default::default() },
            RunConfig { similarity_threshold: -0.1, ..Default::default() },
            RunConfig { centrality_tol: 0.0, ..Default::default() },
            RunConfig { near_duplicate_jaccard: 2.0, ..Default::default() },
            RunConfig {
                sweep: SweepAxes { percentiles: vec![99.0, 100.0], ..Default::default() },
                ..Default::default()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn sweep_axes_default_to_single_values() {
        let g = RunConfig::default().sweep_grid();
        assert_eq!(g.points().len(), 1);
    }
}
