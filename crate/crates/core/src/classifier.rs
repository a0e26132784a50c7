//! Selective tree-augmented naive Bayes classifier.
//!
//! Structure learning is gated by an information threshold t (in bits):
//!
//! 1. Feature selection - attribute X gets the edge class -> X exactly when
//!    MI(X; class) > t; unselected attributes take no part in inference.
//! 2. Augmentation - for each selected pair with CMI(X_i, X_j | class) > t,
//!    a directed edge is added from the node with higher MI against the
//!    class (ties fall back to attribute order) toward the lower one. Every
//!    node accepts at most one attribute parent; the best-scoring candidate
//!    wins. Edges always point from the senior node in a fixed total order,
//!    so the graph is acyclic by construction.
//!
//! CPTs are maximum-likelihood with Laplace smoothing, so every entry is
//! strictly positive and rows sum to 1. Classification multiplies the class
//! prior by P(bin | parents) over the selected attributes after binning the
//! raw instance with the discretization stored in the model.

use crate::discretize::{bin_of, DiscreteDataSet, DiscretizationSpec};
use crate::error::{Error, Result};
use crate::info::{cmi, mi};
use serde::{Deserialize, Serialize};

/// Default information threshold for classifier structure learning, in bits.
pub const DEFAULT_T_CLASSIFIER: f64 = 0.01;
/// Default Laplace smoothing pseudo-count.
pub const DEFAULT_ALPHA: f64 = 1.0;
/// Version stamp of the serialized model document.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Conditional probability table of one node, row-major over
/// [parent configurations..., node states].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub node: String,
    /// Parent node names, outermost first ("class" first when present).
    pub parents: Vec<String>,
    /// State counts of [parents..., node].
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Cpt {
    /// Probability of `state` given the parent states, in `parents` order.
    fn lookup(&self, parent_states: &[usize], state: usize) -> f64 {
        debug_assert_eq!(parent_states.len() + 1, self.dims.len());
        let mut idx = 0usize;
        for (d, &s) in self.dims[..parent_states.len()].iter().zip(parent_states) {
            debug_assert!(s < *d);
            idx = idx * d + s;
        }
        self.probs[idx * self.dims[self.dims.len() - 1] + state]
    }
}

/// A learned network: structure, discretization, and (after fitting) CPTs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    pub format_version: u32,
    /// Feature attribute names available at training time, in train order.
    pub attributes: Vec<String>,
    /// Sorted class labels; prediction ties resolve to the earliest.
    pub class_labels: Vec<String>,
    /// Selected attribute names (subset of `attributes`, in train order).
    pub selected: Vec<String>,
    /// Directed edges (parent, child), class edges included.
    pub edges: Vec<(String, String)>,
    pub discretization: DiscretizationSpec,
    pub threshold_bits: f64,
    pub alpha: f64,
    /// Rows used by `fit_cpts`; 0 until fitted.
    pub n_train: usize,
    /// One table per node: class first, then selected attributes.
    pub cpts: Vec<Cpt>,
}

/// Classification outcome: the winning label and the posterior per class
/// (aligned with the model's `class_labels`).
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub posterior: Vec<f64>,
}

fn feature_columns(data: &DiscreteDataSet) -> Vec<usize> {
    data.columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.name != "class" && c.name != "progress")
        .map(|(i, _)| i)
        .collect()
}

/// Learns the thresholded structure from discretized training data.
///
/// The class column is required with at least two observed labels; the
/// progress column, when present, is ignored (it exists for link discovery,
/// not classification). The returned net has empty CPTs until [`fit_cpts`].
pub fn learn_classifier_structure(data: &DiscreteDataSet, t: f64) -> Result<BayesNet> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::param("t", "threshold must be nonnegative"));
    }
    let class = data.column("class").map_err(|_| {
        Error::data("structure learning requires a class column in the training data")
    })?;
    let observed: std::collections::BTreeSet<usize> = class.values.iter().copied().collect();
    if observed.len() < 2 {
        return Err(Error::data(
            "training data holds a single class; nothing to discriminate",
        ));
    }

    let features = feature_columns(data);
    let mi_class: Vec<f64> = features
        .iter()
        .map(|&i| mi(&data.columns[i], class))
        .collect::<Result<_>>()?;

    // Feature selection.
    let selected_local: Vec<usize> = (0..features.len()).filter(|&k| mi_class[k] > t).collect();
    let mut edges: Vec<(String, String)> = selected_local
        .iter()
        .map(|&k| ("class".to_string(), data.columns[features[k]].name.clone()))
        .collect();

    // Augmentation candidates among the selected attributes.
    // Seniority: higher MI with the class, ties by attribute order.
    let senior = |a: usize, b: usize| -> bool {
        mi_class[a] > mi_class[b] || (mi_class[a] == mi_class[b] && a < b)
    };
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (p, &a) in selected_local.iter().enumerate() {
        for &b in &selected_local[p + 1..] {
            let score = cmi(
                &data.columns[features[a]],
                &data.columns[features[b]],
                &[class],
            )?;
            if score > t {
                let (parent, child) = if senior(a, b) { (a, b) } else { (b, a) };
                candidates.push((score, parent, child));
            }
        }
    }
    candidates.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("finite scores")
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut has_parent = vec![false; features.len()];
    for (_, parent, child) in candidates {
        if !has_parent[child] {
            has_parent[child] = true;
            edges.push((
                data.columns[features[parent]].name.clone(),
                data.columns[features[child]].name.clone(),
            ));
        }
    }

    Ok(BayesNet {
        format_version: MODEL_FORMAT_VERSION,
        attributes: features
            .iter()
            .map(|&i| data.columns[i].name.clone())
            .collect(),
        class_labels: class
            .labels
            .clone()
            .ok_or_else(|| Error::data("class column is missing its label table"))?,
        selected: selected_local
            .iter()
            .map(|&k| data.columns[features[k]].name.clone())
            .collect(),
        edges,
        discretization: data.spec.clone(),
        threshold_bits: t,
        alpha: DEFAULT_ALPHA,
        n_train: 0,
        cpts: Vec::new(),
    })
}

/// Attribute parent of `child` under the learned structure, if any.
fn attribute_parent<'a>(net: &'a BayesNet, child: &str) -> Option<&'a str> {
    net.edges
        .iter()
        .find(|(p, c)| c == child && p != "class")
        .map(|(p, _)| p.as_str())
}

/// Fits Laplace-smoothed CPTs on discretized training data, consuming and
/// returning the net. Every CPT row sums to 1 and every entry is positive.
pub fn fit_cpts(mut net: BayesNet, data: &DiscreteDataSet) -> Result<BayesNet> {
    let class = data.column("class")?;
    let k = net.class_labels.len();
    if class.arity != k || class.labels.as_deref() != Some(&net.class_labels) {
        return Err(Error::data(
            "training data class labels do not match the learned structure",
        ));
    }
    let n = data.n_rows;
    let mut class_counts = vec![0usize; k];
    for &c in &class.values {
        class_counts[c] += 1;
    }
    if class_counts.contains(&0) {
        return Err(Error::data(
            "every class label must appear in the CPT training data",
        ));
    }
    let alpha = net.alpha;
    let mut cpts = Vec::with_capacity(net.selected.len() + 1);
    cpts.push(Cpt {
        node: "class".into(),
        parents: Vec::new(),
        dims: vec![k],
        probs: class_counts
            .iter()
            .map(|&c| (c as f64 + alpha) / (n as f64 + alpha * k as f64))
            .collect(),
    });

    for name in &net.selected {
        let col = data.column(name)?;
        let parent = attribute_parent(&net, name);
        match parent {
            None => {
                // dims [class, node]
                let mut counts = vec![0usize; k * col.arity];
                for row in 0..n {
                    counts[class.values[row] * col.arity + col.values[row]] += 1;
                }
                let mut probs = vec![0.0f64; k * col.arity];
                for c in 0..k {
                    let total: usize = counts[c * col.arity..(c + 1) * col.arity].iter().sum();
                    for v in 0..col.arity {
                        probs[c * col.arity + v] = (counts[c * col.arity + v] as f64 + alpha)
                            / (total as f64 + alpha * col.arity as f64);
                    }
                }
                cpts.push(Cpt {
                    node: name.clone(),
                    parents: vec!["class".into()],
                    dims: vec![k, col.arity],
                    probs,
                });
            }
            Some(pname) => {
                // dims [class, parent, node]
                let pcol = data.column(pname)?;
                let pa = pcol.arity;
                let mut counts = vec![0usize; k * pa * col.arity];
                for row in 0..n {
                    let idx =
                        (class.values[row] * pa + pcol.values[row]) * col.arity + col.values[row];
                    counts[idx] += 1;
                }
                let mut probs = vec![0.0f64; k * pa * col.arity];
                for cfg in 0..k * pa {
                    let total: usize = counts[cfg * col.arity..(cfg + 1) * col.arity].iter().sum();
                    for v in 0..col.arity {
                        probs[cfg * col.arity + v] = (counts[cfg * col.arity + v] as f64 + alpha)
                            / (total as f64 + alpha * col.arity as f64);
                    }
                }
                cpts.push(Cpt {
                    node: name.clone(),
                    parents: vec!["class".into(), pname.to_string()],
                    dims: vec![k, pa, col.arity],
                    probs,
                });
            }
        }
    }
    net.cpts = cpts;
    net.n_train = n;
    Ok(net)
}

/// Classifies one raw (continuous) instance aligned with `net.attributes`.
///
/// The instance is binned with the model's stored discretization. Posterior
/// is proportional to P(class) times the product of selected-attribute CPT
/// entries, normalized to sum 1; ties pick the lexicographically first label
/// (class labels are stored sorted).
pub fn classify(net: &BayesNet, instance: &[f64]) -> Result<Prediction> {
    if net.cpts.is_empty() {
        return Err(Error::data("model has no CPTs; fit it before classifying"));
    }
    if instance.len() != net.attributes.len() {
        return Err(Error::data(format!(
            "instance has {} values, model expects {}",
            instance.len(),
            net.attributes.len()
        )));
    }
    if let Some(bad) = instance.iter().find(|v| !v.is_finite()) {
        return Err(Error::data(format!(
            "instance contains non-finite value {bad}"
        )));
    }

    // Bin every selected attribute (parents are always selected too).
    let mut bins: Vec<(usize, usize)> = Vec::with_capacity(net.selected.len()); // (attr idx, bin)
    for name in &net.selected {
        let idx = net
            .attributes
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::data(format!("missing selected attribute `{name}`")))?;
        let cuts = net
            .discretization
            .cuts_for(name)
            .ok_or_else(|| Error::data(format!("missing cut points for `{name}`")))?;
        bins.push((idx, bin_of(cuts, instance[idx])));
    }
    let bin_by_name = |name: &str| -> usize {
        let pos = net
            .selected
            .iter()
            .position(|s| s == name)
            .expect("selected");
        bins[pos].1
    };

    let k = net.class_labels.len();
    let class_cpt = &net.cpts[0];
    let mut posterior: Vec<f64> = (0..k).map(|c| class_cpt.lookup(&[], c)).collect();
    for (s, name) in net.selected.iter().enumerate() {
        let cpt = &net.cpts[s + 1];
        let bin = bins[s].1;
        for (c, post) in posterior.iter_mut().enumerate() {
            let p = match cpt.parents.len() {
                1 => cpt.lookup(&[c], bin),
                2 => cpt.lookup(&[c, bin_by_name(&cpt.parents[1])], bin),
                _ => unreachable!("class node is never re-fitted here"),
            };
            *post *= p;
        }
        let _ = name;
    }
    let total: f64 = posterior.iter().sum();
    for p in &mut posterior {
        *p /= total;
    }
    let mut best = 0usize;
    for c in 1..k {
        if posterior[c] > posterior[best] {
            best = c;
        }
    }
    Ok(Prediction {
        label: net.class_labels[best].clone(),
        posterior,
    })
}
