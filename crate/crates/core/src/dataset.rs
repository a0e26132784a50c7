//! Ordered tabular feature data: named numeric attributes, an optional class
//! label per row, and an optional positive-integer progress attribute.

use crate::error::{Error, Result};

/// In-memory dataset in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    pub attributes: Vec<String>,
    /// Row-major values; every row has exactly `attributes.len()` entries.
    pub rows: Vec<Vec<f64>>,
    /// Class label per row, if present.
    pub classes: Option<Vec<String>>,
    /// 1-based progress attribute per row, if present.
    pub progress: Option<Vec<u32>>,
}

impl DataSet {
    /// Builds a dataset and checks every structural invariant.
    pub fn new(
        attributes: Vec<String>,
        rows: Vec<Vec<f64>>,
        classes: Option<Vec<String>>,
        progress: Option<Vec<u32>>,
    ) -> Result<Self> {
        let data = DataSet {
            attributes,
            rows,
            classes,
            progress,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::data("dataset needs at least one attribute"));
        }
        for (i, name) in self.attributes.iter().enumerate() {
            if name.is_empty() || name.contains(',') || name.contains('\n') {
                return Err(Error::data(format!(
                    "attribute {i} must be a non-empty token without commas"
                )));
            }
            if name == "class" || name == "progress" {
                return Err(Error::data(format!("attribute name `{name}` is reserved")));
            }
            if self.attributes[..i].contains(name) {
                return Err(Error::data(format!("duplicate attribute name `{name}`")));
            }
        }
        let arity = self.attributes.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != arity {
                return Err(Error::data(format!(
                    "row {i} has {} values, expected {arity}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "row {i} contains non-finite value {bad}"
                )));
            }
        }
        if let Some(classes) = &self.classes {
            if classes.len() != self.rows.len() {
                return Err(Error::data("class column length does not match row count"));
            }
            if let Some(bad) = classes
                .iter()
                .find(|c| c.is_empty() || c.contains(',') || c.contains('\n'))
            {
                return Err(Error::data(format!(
                    "class label `{bad}` must be a non-empty token without commas"
                )));
            }
        }
        if let Some(progress) = &self.progress {
            if progress.len() != self.rows.len() {
                return Err(Error::data(
                    "progress column length does not match row count",
                ));
            }
            if progress.contains(&0) {
                return Err(Error::data("progress values must be positive"));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Sorted unique class labels; empty when no class column exists.
    pub fn class_labels(&self) -> Vec<String> {
        let Some(classes) = &self.classes else {
            return Vec::new();
        };
        let mut labels: Vec<String> = classes.clone();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// New dataset containing the given rows (by index, in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<DataSet> {
        for &i in indices {
            if i >= self.rows.len() {
                return Err(Error::data(format!("row index {i} out of range")));
            }
        }
        DataSet::new(
            self.attributes.clone(),
            indices.iter().map(|&i| self.rows[i].clone()).collect(),
            self.classes
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i].clone()).collect()),
            self.progress
                .as_ref()
                .map(|p| indices.iter().map(|&i| p[i]).collect()),
        )
    }
}
