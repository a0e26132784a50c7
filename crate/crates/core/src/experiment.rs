//! End-to-end experiment runner: build or load three 20-row groups, run the
//! three pairwise classifications, run link discovery over all 60 rows with
//! progress 1..60 assigned in group order, and render every report.
//!
//! This module is filesystem-free: CSV group sources arrive as preloaded
//! datasets keyed by the path string in the config, and the bundle returns
//! rendered artifacts for the caller to write.

use crate::classifier::{fit_cpts, learn_classifier_structure, BayesNet, DEFAULT_T_CLASSIFIER};
use crate::dataset::DataSet;
use crate::discretize::{apply_discretization, fit_discretization, Method};
use crate::error::{Error, Result};
use crate::eval::{evaluate, split, SplitSpec};
use crate::format::{dataset_to_csv, links_to_csv, summary_to_csv, SummaryRow};
use crate::links::{discover_links, LinkReport, Skeleton, DEFAULT_T_LINKS};
use crate::rng::derive_seed;
use crate::speckle::{generate_speckle, Mode, SpeckleParams};
use crate::texture::{featurize_batch, DEFAULT_ROI_SIZE, DEFAULT_STRIDE, TEXTURE_NAMES};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Version stamp of the experiment config schema.
pub const CONFIG_FORMAT_VERSION: u32 = 1;
/// Every group contributes exactly this many feature rows.
pub const GROUP_SIZE: usize = 20;
/// Default train fraction for the pairwise comparisons.
pub const DEFAULT_SPLIT_RATIO: f64 = 0.5;
/// Default bin count for discretization.
pub const DEFAULT_BINS: usize = 3;

// Seed-derivation namespaces, so image generation and split shuffles never
// share a stream.
const NS_IMAGE: u64 = 0;
const NS_SPLIT: u64 = 1;

/// How one group's 20 rows come to exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceKind {
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "csv")]
    Csv,
}

/// Which synthetic field model a simulated group uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    #[serde(rename = "phasor")]
    Phasor,
    #[default]
    #[serde(rename = "pupil")]
    Pupil,
}

fn d_width() -> u32 {
    256
}
fn d_height() -> u32 {
    256
}
fn d_n() -> u32 {
    1000
}
fn d_pupil() -> f64 {
    0.2
}

/// Generation parameters for a simulated group. `blur_ramp` sweeps
/// blur_sigma linearly from its first to its second value across the
/// group's 20 images, overriding `blur_sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimGroupParams {
    #[serde(default = "d_width")]
    pub width: u32,
    #[serde(default = "d_height")]
    pub height: u32,
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default = "d_n")]
    pub n: u32,
    #[serde(default = "d_pupil")]
    pub pupil_radius: f64,
    #[serde(default)]
    pub blur_sigma: f64,
    #[serde(default)]
    pub blur_ramp: Option<[f64; 2]>,
}

impl Default for SimGroupParams {
    fn default() -> Self {
        SimGroupParams {
            width: d_width(),
            height: d_height(),
            mode: SimMode::default(),
            n: d_n(),
            pupil_radius: d_pupil(),
            blur_sigma: 0.0,
            blur_ramp: None,
        }
    }
}

/// One experiment group: a name (used as the class label) plus either
/// generation parameters or the path of a feature CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub source: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SimGroupParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn d_config_version() -> u32 {
    CONFIG_FORMAT_VERSION
}
fn d_split_ratio() -> f64 {
    DEFAULT_SPLIT_RATIO
}
fn d_bins() -> usize {
    DEFAULT_BINS
}

/// Full experiment description. Unknown keys are rejected.
///
/// When `t` is set it overrides the information threshold everywhere; when
/// absent, classifier structure learning uses its own default and link
/// discovery uses its larger, bias-calibrated default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_config_version")]
    pub format_version: u32,
    pub groups: Vec<GroupConfig>,
    pub seed: u64,
    #[serde(default = "d_split_ratio")]
    pub split_ratio: f64,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "d_bins")]
    pub bins: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub positive_class: Option<String>,
}

/// Parses and validates an experiment config JSON document.
pub fn config_from_json(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })?;
    validate_config(&config)?;
    Ok(config)
}

fn validate_config(config: &ExperimentConfig) -> Result<()> {
    if config.format_version != CONFIG_FORMAT_VERSION {
        return Err(Error::data(format!(
            "config format_version {} is not supported (expected {CONFIG_FORMAT_VERSION})",
            config.format_version
        )));
    }
    if config.groups.len() != 3 {
        return Err(Error::param(
            "groups",
            format!("exactly 3 groups required, found {}", config.groups.len()),
        ));
    }
    for (i, group) in config.groups.iter().enumerate() {
        if group.name.is_empty()
            || !group
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::param(
                "groups",
                format!(
                    "group {i} name `{}` must be non-empty and use only letters, digits, `_`, `-`",
                    group.name
                ),
            ));
        }
        if config.groups[..i].iter().any(|g| g.name == group.name) {
            return Err(Error::param(
                "groups",
                format!("duplicate group name `{}`", group.name),
            ));
        }
        match group.source {
            SourceKind::Simulate => {
                if group.path.is_some() {
                    return Err(Error::param(
                        "groups",
                        format!("group `{}` simulates; `path` is not allowed", group.name),
                    ));
                }
            }
            SourceKind::Csv => {
                if group.path.is_none() {
                    return Err(Error::param(
                        "groups",
                        format!("group `{}` reads a CSV; `path` is required", group.name),
                    ));
                }
                if group.params.is_some() {
                    return Err(Error::param(
                        "groups",
                        format!(
                            "group `{}` reads a CSV; `params` is not allowed",
                            group.name
                        ),
                    ));
                }
            }
        }
    }
    if !(config.split_ratio > 0.0 && config.split_ratio < 1.0) {
        return Err(Error::param(
            "split_ratio",
            "must lie strictly between 0 and 1",
        ));
    }
    if let Some(t) = config.t {
        if t.is_nan() || t < 0.0 {
            return Err(Error::param("t", "threshold must be nonnegative"));
        }
    }
    if let Some(positive) = &config.positive_class {
        if !config.groups.iter().any(|g| &g.name == positive) {
            return Err(Error::param(
                "positive_class",
                format!("`{positive}` does not name any group"),
            ));
        }
    }
    Ok(())
}

/// Everything one experiment run produces, rendered and structured.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentBundle {
    /// All 60 feature rows with class and progress columns, in CSV form.
    pub features_csv: String,
    /// One line per pairwise comparison, in CSV form.
    pub summary_csv: String,
    /// Progress-incident edges of the link run, in CSV form.
    pub links_csv: String,
    /// Structured pairwise outcomes backing `summary_csv`.
    pub summary: Vec<SummaryRow>,
    /// Fitted model per comparison, keyed like `summary`.
    pub models: Vec<(String, BayesNet)>,
    /// Full dependency skeleton of the 60-row link run.
    pub skeleton: Skeleton,
    /// Progress-incident edges and verdict of the link run.
    pub link_report: LinkReport,
}

fn simulate_group(
    root_seed: u64,
    group_index: usize,
    name: &str,
    params: &SimGroupParams,
) -> Result<DataSet> {
    let mut images = Vec::with_capacity(GROUP_SIZE);
    for k in 0..GROUP_SIZE {
        let sigma = match params.blur_ramp {
            Some([start, end]) => start + (end - start) * k as f64 / (GROUP_SIZE - 1) as f64,
            None => params.blur_sigma,
        };
        let mode = match params.mode {
            SimMode::Phasor => Mode::PhasorSum {
                phasor_count: params.n,
            },
            SimMode::Pupil => Mode::BandLimited {
                pupil_radius: params.pupil_radius,
            },
        };
        let seed = derive_seed(root_seed, &[NS_IMAGE, group_index as u64, k as u64]);
        let sp = SpeckleParams::new(params.width, params.height, mode, seed).with_blur(sigma);
        let image = generate_speckle(&sp)
            .map_err(|e| Error::data(format!("group `{name}`, image {k}: {e}")))?;
        images.push(image);
    }
    featurize_batch(&images, name, DEFAULT_ROI_SIZE, DEFAULT_STRIDE, false)
        .map_err(|e| Error::data(format!("group `{name}`: {e}")))
}

fn load_csv_group(
    name: &str,
    path: &str,
    csv_sources: &BTreeMap<String, DataSet>,
) -> Result<DataSet> {
    let source = csv_sources.get(path).ok_or_else(|| {
        Error::data(format!(
            "group `{name}`: CSV source `{path}` was not provided"
        ))
    })?;
    if source.attributes != TEXTURE_NAMES {
        return Err(Error::data(format!(
            "group `{name}`: CSV source `{path}` must carry exactly the attributes t1..t9"
        )));
    }
    if source.n_rows() != GROUP_SIZE {
        return Err(Error::data(format!(
            "group `{name}`: expected {GROUP_SIZE} rows, found {}",
            source.n_rows()
        )));
    }
    // The group name is the class label; any labels in the file are replaced.
    DataSet::new(
        source.attributes.clone(),
        source.rows.clone(),
        Some(vec![name.to_string(); GROUP_SIZE]),
        None,
    )
}

/// Runs the full protocol: three pairwise train/test comparisons and the
/// 60-row link-discovery pass, all seeded from the config.
pub fn run_experiment(
    config: &ExperimentConfig,
    csv_sources: &BTreeMap<String, DataSet>,
) -> Result<ExperimentBundle> {
    validate_config(config)?;
    let t_classifier = config.t.unwrap_or(DEFAULT_T_CLASSIFIER);
    let t_links = config.t.unwrap_or(DEFAULT_T_LINKS);

    let mut groups: Vec<DataSet> = Vec::with_capacity(3);
    for (g, group) in config.groups.iter().enumerate() {
        let data = match group.source {
            SourceKind::Simulate => {
                let defaults = SimGroupParams::default();
                let params = group.params.as_ref().unwrap_or(&defaults);
                simulate_group(config.seed, g, &group.name, params)?
            }
            SourceKind::Csv => load_csv_group(
                &group.name,
                group.path.as_deref().expect("validated"),
                csv_sources,
            )?,
        };
        groups.push(data);
    }

    // 60-row feature table: groups concatenated in config order, progress
    // numbered 1..60 across the concatenation.
    let attributes: Vec<String> = TEXTURE_NAMES.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::with_capacity(3 * GROUP_SIZE);
    let mut classes = Vec::with_capacity(3 * GROUP_SIZE);
    for data in &groups {
        rows.extend(data.rows.iter().cloned());
        classes.extend(data.classes.as_ref().expect("labeled").iter().cloned());
    }
    let progress: Vec<u32> = (1..=(3 * GROUP_SIZE) as u32).collect();
    let full = DataSet::new(attributes.clone(), rows, Some(classes), Some(progress))?;
    let features_csv = dataset_to_csv(&full)?;

    let mut summary = Vec::with_capacity(3);
    let mut models = Vec::with_capacity(3);
    for (pair_index, &(a, b)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
        let name_a = &config.groups[a].name;
        let name_b = &config.groups[b].name;
        let comparison = format!("{name_a}-vs-{name_b}");

        let mut pair_rows = Vec::with_capacity(2 * GROUP_SIZE);
        let mut pair_classes = Vec::with_capacity(2 * GROUP_SIZE);
        for &g in &[a, b] {
            pair_rows.extend(groups[g].rows.iter().cloned());
            pair_classes.extend(groups[g].classes.as_ref().expect("labeled").iter().cloned());
        }
        let pair = DataSet::new(attributes.clone(), pair_rows, Some(pair_classes), None)?;

        let spec = SplitSpec {
            ratio: config.split_ratio,
            stratified: true,
            seed: derive_seed(config.seed, &[NS_SPLIT, pair_index as u64]),
        };
        let (train_idx, test_idx) = split(&pair, &spec)?;
        let train = pair.subset(&train_idx)?;
        let test = pair.subset(&test_idx)?;

        let disc_spec = fit_discretization(&train, config.method, config.bins)?;
        let disc = apply_discretization(&disc_spec, &train)?;
        let net = fit_cpts(learn_classifier_structure(&disc, t_classifier)?, &disc)?;

        let positive = match &config.positive_class {
            Some(p) if p == name_a || p == name_b => p.clone(),
            _ => name_a.clone(),
        };
        let report = evaluate(&net, &test, &positive)?;
        summary.push(SummaryRow {
            comparison: comparison.clone(),
            report,
            selected: net.selected.clone(),
        });
        models.push((comparison, net));
    }
    let summary_csv = summary_to_csv(&summary);

    let link_spec = fit_discretization(&full, config.method, config.bins)?;
    let link_disc = apply_discretization(&link_spec, &full)?;
    let (skeleton, link_report) = discover_links(&link_disc, t_links)?;
    let links_csv = links_to_csv(&link_report);

    Ok(ExperimentBundle {
        features_csv,
        summary_csv,
        links_csv,
        summary,
        models,
        skeleton,
        link_report,
    })
}
