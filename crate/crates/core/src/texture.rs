//! ROI selection and the nine kernel texture measures t1..t9.
//!
//! A fixed-size window (default 30x30) is scanned over the image on a stride
//! grid and the window with the highest speckle contrast is selected as the
//! region of interest. Within the ROI, 3x3 and 5x5 kernels slide over every
//! fully interior position (no padding) and per-window base statistics are
//! aggregated by arithmetic mean:
//!
//! | slot | kernel | statistic                          |
//! |------|--------|------------------------------------|
//! | t1   | 3x3    | mean                               |
//! | t2   | 3x3    | range (max - min)                  |
//! | t3   | 3x3    | population standard deviation      |
//! | t4   | 3x3    | skewness ((1/n) sum ((x-m)/s)^3)   |
//! | t5   | 3x3    | mean absolute deviation, times 10  |
//! | t6   | 5x5    | range                              |
//! | t7   | 5x5    | mean absolute deviation            |
//! | t8   | 5x5    | skewness                           |
//! | t9   | 5x5    | population standard deviation      |
//!
//! Skewness of a zero-variance window is defined as 0. The t5 scale factor
//! keeps its magnitude in a readable range and is recorded as a comment line
//! in emitted CSV files.

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::speckle::SpeckleImage;

/// Canonical feature order; matches the CSV schema.
pub const TEXTURE_NAMES: [&str; 9] = ["t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"];

/// Cosmetic scale applied to t5 (mean absolute deviation, 3x3 kernel).
pub const T5_SCALE: f64 = 10.0;

/// Default ROI side length in pixels.
pub const DEFAULT_ROI_SIZE: u32 = 30;
/// Default ROI search stride in pixels.
pub const DEFAULT_STRIDE: u32 = 5;
/// Default quadrant-contrast delta accepted by the uniformity check.
pub const DEFAULT_UNIFORMITY_THRESHOLD: f64 = 0.2;

/// Square region of interest within a speckle image.
#[derive(Clone, Copy)]
pub struct Roi<'a> {
    pub origin_x: u32,
    pub origin_y: u32,
    pub size: u32,
    pub source: &'a SpeckleImage,
}

impl<'a> Roi<'a> {
    /// Validates bounds and the minimum size needed by the 5x5 kernel.
    pub fn new(source: &'a SpeckleImage, origin_x: u32, origin_y: u32, size: u32) -> Result<Self> {
        if size < 7 {
            return Err(Error::param("size", "ROI must be at least 7x7"));
        }
        let fits_x = origin_x
            .checked_add(size)
            .is_some_and(|e| e <= source.width);
        let fits_y = origin_y
            .checked_add(size)
            .is_some_and(|e| e <= source.height);
        if !(fits_x && fits_y) {
            return Err(Error::param(
                "origin",
                format!(
                    "ROI {}x{} at ({}, {}) exceeds the {}x{} image",
                    size, size, origin_x, origin_y, source.width, source.height
                ),
            ));
        }
        Ok(Roi {
            origin_x,
            origin_y,
            size,
            source,
        })
    }

    #[inline]
    fn value(&self, rx: u32, ry: u32) -> f64 {
        self.source.at(self.origin_x + rx, self.origin_y + ry)
    }
}

/// The nine texture measures of one ROI, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TextureVector {
    pub values: [f64; 9],
}

impl TextureVector {
    /// Value of the named measure ("t1".."t9").
    pub fn get(&self, name: &str) -> Option<f64> {
        TEXTURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

/// Quadrant-contrast homogeneity report for an ROI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityReport {
    pub quadrant_contrasts: [f64; 4],
    pub max_pairwise_delta: f64,
    pub pass: bool,
    pub threshold: f64,
}

/// Mean and population contrast over a window, via precomputed prefix sums.
struct IntegralImage {
    width: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl IntegralImage {
    fn build(image: &SpeckleImage) -> Self {
        let w = image.width as usize;
        let h = image.height as usize;
        let stride = w + 1;
        let mut sum = vec![0.0f64; stride * (h + 1)];
        let mut sum_sq = vec![0.0f64; stride * (h + 1)];
        for y in 0..h {
            let mut row_s = 0.0f64;
            let mut row_q = 0.0f64;
            for x in 0..w {
                let v = image.intensities[y * w + x];
                row_s += v;
                row_q += v * v;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row_s;
                sum_sq[(y + 1) * stride + x + 1] = sum_sq[y * stride + x + 1] + row_q;
            }
        }
        IntegralImage {
            width: w,
            sum,
            sum_sq,
        }
    }

    /// Speckle contrast of the window; 0 for zero-mean or zero-variance windows.
    fn window_contrast(&self, x: usize, y: usize, size: usize) -> f64 {
        let stride = self.width + 1;
        let idx = |sx: usize, sy: usize| sy * stride + sx;
        let n = (size * size) as f64;
        let s = self.sum[idx(x + size, y + size)] + self.sum[idx(x, y)]
            - self.sum[idx(x + size, y)]
            - self.sum[idx(x, y + size)];
        if s <= 0.0 {
            return 0.0;
        }
        let q = self.sum_sq[idx(x + size, y + size)] + self.sum_sq[idx(x, y)]
            - self.sum_sq[idx(x + size, y)]
            - self.sum_sq[idx(x, y + size)];
        let mean = s / n;
        let var = (q / n - mean * mean).max(0.0);
        var.sqrt() / mean
    }
}

/// Selects the window with maximal speckle contrast on the stride grid.
///
/// Ties are broken toward the smallest (origin_y, origin_x); the scan order
/// makes the result deterministic.
pub fn select_roi(image: &SpeckleImage, size: u32, stride: u32) -> Result<Roi<'_>> {
    if size < 7 {
        return Err(Error::param("size", "ROI must be at least 7x7"));
    }
    if stride == 0 {
        return Err(Error::param("stride", "stride must be positive"));
    }
    if image.width < size || image.height < size {
        return Err(Error::param(
            "size",
            format!(
                "image {}x{} is smaller than the {size}x{size} window",
                image.width, image.height
            ),
        ));
    }
    let integral = IntegralImage::build(image);
    let (mut best_x, mut best_y, mut best_k) = (0u32, 0u32, f64::NEG_INFINITY);
    let mut y = 0;
    while y + size <= image.height {
        let mut x = 0;
        while x + size <= image.width {
            let k = integral.window_contrast(x as usize, y as usize, size as usize);
            if k > best_k {
                best_k = k;
                best_x = x;
                best_y = y;
            }
            x += stride;
        }
        y += stride;
    }
    Roi::new(image, best_x, best_y, size)
}

/// Contrast of one ROI quadrant; zero-variance and zero-mean regions give 0.
fn quadrant_contrast(roi: &Roi<'_>, qx: u32, qy: u32, half: u32) -> f64 {
    let n = (half as usize * half as usize) as f64;
    let mut s = 0.0f64;
    for ry in 0..half {
        for rx in 0..half {
            s += roi.value(qx + rx, qy + ry);
        }
    }
    if s <= 0.0 {
        return 0.0;
    }
    let mean = s / n;
    let mut ss = 0.0f64;
    for ry in 0..half {
        for rx in 0..half {
            let d = roi.value(qx + rx, qy + ry) - mean;
            ss += d * d;
        }
    }
    (ss / n).sqrt() / mean
}

/// Compares speckle contrast across the four ROI quadrants.
///
/// `pass` holds exactly when the maximum pairwise contrast difference is at
/// most `threshold`. The ROI side must be even so quadrants are equal.
pub fn uniformity_check(roi: &Roi<'_>, threshold: f64) -> Result<UniformityReport> {
    if !roi.size.is_multiple_of(2) {
        return Err(Error::param(
            "size",
            "uniformity check requires an even ROI size",
        ));
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::param("threshold", "must be nonnegative"));
    }
    let half = roi.size / 2;
    let quadrant_contrasts = [
        quadrant_contrast(roi, 0, 0, half),
        quadrant_contrast(roi, half, 0, half),
        quadrant_contrast(roi, 0, half, half),
        quadrant_contrast(roi, half, half, half),
    ];
    let mut max_delta = 0.0f64;
    for a in 0..4 {
        for b in a + 1..4 {
            max_delta = max_delta.max((quadrant_contrasts[a] - quadrant_contrasts[b]).abs());
        }
    }
    Ok(UniformityReport {
        quadrant_contrasts,
        max_pairwise_delta: max_delta,
        pass: max_delta <= threshold,
        threshold,
    })
}

/// Per-window base statistics: (mean, range, stddev, skewness, mad).
///
/// A constant window (max == min, the exact detector of zero population
/// variance) short-circuits to (c, 0, 0, 0, 0) so dispersion measures are
/// exactly zero.
fn window_stats(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mut min = values[0];
    let mut max = values[0];
    let mut sum = 0.0f64;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    if max == min {
        return (values[0], 0.0, 0.0, 0.0, 0.0);
    }
    let mean = sum / n;
    let (mut m2, mut m3, mut mad) = (0.0f64, 0.0f64, 0.0f64);
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        mad += d.abs();
    }
    let var = m2 / n;
    let sd = var.sqrt();
    let skew = if sd == 0.0 {
        0.0
    } else {
        m3 / (n * sd * sd * sd)
    };
    (mean, max - min, sd, skew, mad / n)
}

/// Mean of `stat` over every fully interior `kernel`-sized window of the ROI.
fn aggregate_kernel(roi: &Roi<'_>, kernel: u32) -> (f64, f64, f64, f64, f64) {
    let span = roi.size - kernel + 1;
    let mut window = vec![0.0f64; (kernel * kernel) as usize];
    let mut acc = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for wy in 0..span {
        for wx in 0..span {
            let mut i = 0;
            for ky in 0..kernel {
                for kx in 0..kernel {
                    window[i] = roi.value(wx + kx, wy + ky);
                    i += 1;
                }
            }
            let (mean, range, sd, skew, mad) = window_stats(&window);
            acc.0 += mean;
            acc.1 += range;
            acc.2 += sd;
            acc.3 += skew;
            acc.4 += mad;
        }
    }
    let count = (span * span) as f64;
    (
        acc.0 / count,
        acc.1 / count,
        acc.2 / count,
        acc.3 / count,
        acc.4 / count,
    )
}

/// Computes the nine texture measures of the ROI.
///
/// A globally constant ROI returns exactly (c, 0, 0, 0, 0, 0, 0, 0, 0).
pub fn texture_features(roi: &Roi<'_>) -> Result<TextureVector> {
    let mut min = roi.value(0, 0);
    let mut max = min;
    for ry in 0..roi.size {
        for rx in 0..roi.size {
            let v = roi.value(rx, ry);
            min = min.min(v);
            max = max.max(v);
        }
    }
    if max == min {
        let mut values = [0.0f64; 9];
        values[0] = min;
        return Ok(TextureVector { values });
    }
    let (mean3, range3, sd3, skew3, mad3) = aggregate_kernel(roi, 3);
    let (_, range5, sd5, skew5, mad5) = aggregate_kernel(roi, 5);
    Ok(TextureVector {
        values: [
            mean3,
            range3,
            sd3,
            skew3,
            mad3 * T5_SCALE,
            range5,
            mad5,
            skew5,
            sd5,
        ],
    })
}

/// Featurizes a chronologically ordered batch of images into one dataset.
///
/// Each image contributes one row: ROI selection with the given window and
/// stride, then the nine measures. The class column is `class_label` for
/// every row; with `with_progress`, the progress column is the 1-based
/// position in the input order.
pub fn featurize_batch(
    images: &[SpeckleImage],
    class_label: &str,
    roi_size: u32,
    stride: u32,
    with_progress: bool,
) -> Result<DataSet> {
    if images.is_empty() {
        return Err(Error::data("featurize_batch requires at least one image"));
    }
    if class_label.is_empty() || class_label.contains(',') || class_label.contains('\n') {
        return Err(Error::data(
            "class label must be a non-empty token without commas",
        ));
    }
    let mut rows = Vec::with_capacity(images.len());
    for (index, image) in images.iter().enumerate() {
        let roi = select_roi(image, roi_size, stride)
            .map_err(|e| Error::data(format!("image {index}: {e}")))?;
        let features =
            texture_features(&roi).map_err(|e| Error::data(format!("image {index}: {e}")))?;
        rows.push(features.values.to_vec());
    }
    let attributes = TEXTURE_NAMES.iter().map(|s| s.to_string()).collect();
    let classes = vec![class_label.to_string(); images.len()];
    let progress = with_progress.then(|| (1..=images.len() as u32).collect());
    DataSet::new(attributes, rows, Some(classes), progress)
}
