//! Supervised-pipeline discretization: cut points are learned on training
//! data only and then applied to any dataset with the same attributes.
//!
//! Bin assignment uses the upper-side tie rule: a value equal to a cut point
//! belongs to the bin above it, so `bin = #{cuts <= value}`.

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Binning strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Cut points at empirical quantiles i/k (midpoint-between-neighbors).
    #[default]
    #[serde(rename = "eqfreq")]
    EqualFrequency,
    /// k equal-width intervals spanning [min, max].
    #[serde(rename = "eqwidth")]
    EqualWidth,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eqfreq" => Ok(Method::EqualFrequency),
            "eqwidth" => Ok(Method::EqualWidth),
            other => Err(Error::data(format!(
                "unknown discretization method `{other}` (expected eqfreq or eqwidth)"
            ))),
        }
    }
}

/// Per-attribute cut points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeCuts {
    pub name: String,
    /// Strictly ascending; length <= bins - 1 (fewer for degenerate columns).
    pub cuts: Vec<f64>,
}

/// Learned discretization: method, bin count, and cut points per attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub method: Method,
    pub bins: usize,
    pub attributes: Vec<AttributeCuts>,
}

impl DiscretizationSpec {
    pub fn cuts_for(&self, name: &str) -> Option<&[f64]> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.cuts.as_slice())
    }
}

/// One discretized column: bin ids in [0, arity).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteColumn {
    pub name: String,
    pub arity: usize,
    pub values: Vec<usize>,
    /// Label strings for label-encoded columns (the class column).
    pub labels: Option<Vec<String>>,
}

/// Fully discretized dataset; the progress and class columns, when present,
/// appear as ordinary columns named "progress" and "class".
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDataSet {
    pub columns: Vec<DiscreteColumn>,
    pub n_rows: usize,
    /// The spec the feature columns were binned with.
    pub spec: DiscretizationSpec,
}

impl DiscreteDataSet {
    pub fn column(&self, name: &str) -> Result<&DiscreteColumn> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::data(format!("unknown attribute `{name}`")))
    }
}

fn quantile_cuts(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut cuts = Vec::with_capacity(k - 1);
    for i in 1..k {
        let idx = i * n / k; // floor; 1-based rank of the upper neighbor
        debug_assert!(idx >= 1 && idx < n);
        let cut = 0.5 * (sorted[idx - 1] + sorted[idx]);
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

fn width_cuts(min: f64, max: f64, k: usize) -> Vec<f64> {
    if min == max {
        return Vec::new();
    }
    let mut cuts = Vec::with_capacity(k - 1);
    for i in 1..k {
        let cut = min + (max - min) * i as f64 / k as f64;
        if cuts.last().is_none_or(|&last| cut > last) {
            cuts.push(cut);
        }
    }
    cuts
}

/// Learns cut points for every attribute of `data`, plus the progress column
/// (named "progress") when present.
pub fn fit_discretization(data: &DataSet, method: Method, k: usize) -> Result<DiscretizationSpec> {
    if k < 2 {
        return Err(Error::param("bins", "bin count must be at least 2"));
    }
    if data.n_rows() == 0 {
        return Err(Error::data("cannot fit discretization on an empty dataset"));
    }
    if data.n_rows() < k {
        return Err(Error::data(format!(
            "need at least {k} rows to fit {k} bins, got {}",
            data.n_rows()
        )));
    }
    let mut attributes = Vec::new();
    let mut fit_column = |name: &str, values: Vec<f64>| {
        let cuts = match method {
            Method::EqualFrequency => {
                let mut sorted = values;
                sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
                if sorted[0] == sorted[sorted.len() - 1] {
                    Vec::new()
                } else {
                    quantile_cuts(&sorted, k)
                }
            }
            Method::EqualWidth => {
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                width_cuts(min, max, k)
            }
        };
        attributes.push(AttributeCuts {
            name: name.to_string(),
            cuts,
        });
    };
    for (i, name) in data.attributes.iter().enumerate() {
        fit_column(name, data.rows.iter().map(|r| r[i]).collect());
    }
    if let Some(progress) = &data.progress {
        fit_column("progress", progress.iter().map(|&p| p as f64).collect());
    }
    Ok(DiscretizationSpec {
        method,
        bins: k,
        attributes,
    })
}

/// Bin id under the upper-side tie rule.
#[inline]
pub fn bin_of(cuts: &[f64], value: f64) -> usize {
    cuts.iter().take_while(|&&c| c <= value).count()
}

/// Applies a learned spec to a dataset, label-encoding the class column.
///
/// Every attribute named in the spec must exist in `data` (the progress
/// pseudo-attribute requires the progress column). Row count and order are
/// preserved.
pub fn apply_discretization(spec: &DiscretizationSpec, data: &DataSet) -> Result<DiscreteDataSet> {
    let mut columns = Vec::with_capacity(spec.attributes.len() + 2);
    for attr in &spec.attributes {
        let values: Vec<f64> = if attr.name == "progress" {
            let progress = data.progress.as_ref().ok_or_else(|| {
                Error::data("spec includes `progress` but the dataset has no progress column")
            })?;
            progress.iter().map(|&p| p as f64).collect()
        } else {
            let idx = data.attribute_index(&attr.name).ok_or_else(|| {
                Error::data(format!("dataset is missing attribute `{}`", attr.name))
            })?;
            data.rows.iter().map(|r| r[idx]).collect()
        };
        columns.push(DiscreteColumn {
            name: attr.name.clone(),
            arity: attr.cuts.len() + 1,
            values: values.iter().map(|&v| bin_of(&attr.cuts, v)).collect(),
            labels: None,
        });
    }
    if let Some(classes) = &data.classes {
        let labels = data.class_labels();
        let values = classes
            .iter()
            .map(|c| labels.iter().position(|l| l == c).expect("label present"))
            .collect();
        columns.push(DiscreteColumn {
            name: "class".into(),
            arity: labels.len(),
            values,
            labels: Some(labels),
        });
    }
    Ok(DiscreteDataSet {
        columns,
        n_rows: data.n_rows(),
        spec: spec.clone(),
    })
}
