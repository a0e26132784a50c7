//! Pure text and byte codecs for every artifact the toolchain reads or
//! writes: the feature-table CSV schema, 16-bit PGM and exact binary
//! rasters, model JSON, and report renderings. Nothing here touches the
//! filesystem; callers move the bytes.

use crate::classifier::{BayesNet, Prediction, MODEL_FORMAT_VERSION};
use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::links::{LinkReport, Skeleton};
use crate::speckle::SpeckleImage;
use crate::texture::{T5_SCALE, TEXTURE_NAMES};
use serde::Serialize;

/// Version stamp of the feature CSV schema.
pub const CSV_FORMAT_VERSION: u32 = 1;
/// Version stamp of the raster codecs (PGM sidecar + binary).
pub const RASTER_FORMAT_VERSION: u32 = 1;
/// Version stamp of report artifacts (summary/links/predictions, JSON reports).
pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Magic prefix of the exact float raster format.
pub const RASTER_MAGIC: &[u8; 5] = b"SPKL1";

/// Shortest decimal text that parses back to the identical f64.
///
/// `f64`'s `Display` already emits the minimal digit string that
/// round-trips, in plain positional notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn csv_header(with_progress: bool) -> String {
    let mut h = TEXTURE_NAMES.join(",");
    h.push_str(",class");
    if with_progress {
        h.push_str(",progress");
    }
    h
}

/// Renders a feature dataset in the canonical CSV schema.
///
/// The dataset must carry exactly the nine texture attributes and a class
/// column; the progress column is emitted when present. The leading comment
/// documents the t5 scale factor so the file is self-describing.
pub fn dataset_to_csv(data: &DataSet) -> Result<String> {
    if data.attributes != TEXTURE_NAMES {
        return Err(Error::data(
            "CSV schema requires exactly the attributes t1..t9",
        ));
    }
    let classes = data
        .classes
        .as_ref()
        .ok_or_else(|| Error::data("CSV schema requires a class column"))?;
    let mut out = String::new();
    out.push_str(&format!(
        "# t5 is the 3x3 mean absolute deviation scaled by {T5_SCALE}\n"
    ));
    out.push_str(&csv_header(data.progress.is_some()));
    out.push('\n');
    for (i, row) in data.rows.iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        fields.push(classes[i].clone());
        if let Some(progress) = &data.progress {
            fields.push(progress[i].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parses the canonical CSV schema. Leading `#` comment lines are skipped;
/// the header must then match exactly; every row must parse at full arity.
/// Errors carry 1-based line numbers.
pub fn dataset_from_csv(text: &str) -> Result<DataSet> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let mut iter = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let (header_line, header) = loop {
        match iter.next() {
            Some((_, l)) if l.starts_with('#') => continue,
            Some((n, l)) => break (n, l),
            None => return Err(Error::parse(1, "missing header")),
        }
    };
    let with_progress = if header == csv_header(false) {
        false
    } else if header == csv_header(true) {
        true
    } else {
        return Err(Error::parse(
            header_line,
            format!(
                "header must be exactly `{}` or `{}`",
                csv_header(false),
                csv_header(true)
            ),
        ));
    };
    let arity = 10 + usize::from(with_progress);

    let mut rows = Vec::new();
    let mut classes = Vec::new();
    let mut progress = Vec::new();
    for (line_no, line) in iter {
        if line.is_empty() {
            return Err(Error::parse(line_no, "empty row"));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arity {
            return Err(Error::parse(
                line_no,
                format!("expected {arity} fields, found {}", fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(9);
        for (k, field) in fields[..9].iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    line_no,
                    format!("column {} (`{field}`) is not a number", TEXTURE_NAMES[k]),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    line_no,
                    format!("column {} must be finite", TEXTURE_NAMES[k]),
                ));
            }
            values.push(v);
        }
        let class = fields[9];
        if class.is_empty() {
            return Err(Error::parse(line_no, "class label is empty"));
        }
        if with_progress {
            let p: u32 = fields[10].parse().map_err(|_| {
                Error::parse(
                    line_no,
                    format!("progress (`{}`) is not a positive integer", fields[10]),
                )
            })?;
            if p == 0 {
                return Err(Error::parse(line_no, "progress must be positive"));
            }
            progress.push(p);
        }
        rows.push(values);
        classes.push(class.to_string());
    }
    DataSet::new(
        TEXTURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
        Some(classes),
        with_progress.then_some(progress),
    )
}

const PGM_MAXVAL: f64 = 65535.0;

/// Encodes an image as binary 16-bit PGM (P5). Intensities are scaled so the
/// brightest pixel maps to 65535; the scale factor is recorded in a `#`
/// comment so readers can undo it. Quantization makes this codec lossy; the
/// binary raster codec below is exact.
pub fn image_to_pgm(image: &SpeckleImage) -> Vec<u8> {
    let max = image.intensities.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let scale = if max > 0.0 { PGM_MAXVAL / max } else { 1.0 };
    let mut out = Vec::with_capacity(image.intensities.len() * 2 + 64);
    out.extend_from_slice(
        format!(
            "P5\n# scale: {}\n{} {}\n65535\n",
            fmt_f64(scale),
            image.width,
            image.height
        )
        .as_bytes(),
    );
    for &v in &image.intensities {
        let gray = (v * scale).round().clamp(0.0, PGM_MAXVAL) as u16;
        out.extend_from_slice(&gray.to_be_bytes());
    }
    out
}

struct PgmHeader {
    magic: [u8; 2],
    width: u32,
    height: u32,
    maxval: u32,
    scale: f64,
    body_offset: usize,
}

fn parse_pgm_header(bytes: &[u8]) -> Result<PgmHeader> {
    if bytes.len() < 2 || bytes[0] != b'P' || (bytes[1] != b'2' && bytes[1] != b'5') {
        return Err(Error::data("not a P2/P5 PGM image"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut scale = 1.0f64;
    let mut tokens: Vec<u32> = Vec::new();
    let mut pos = 2usize;
    // Header tokens (width, height, maxval) with `#` comments allowed
    // between them; a `# scale:` comment carries the intensity scale.
    while tokens.len() < 3 {
        match bytes.get(pos) {
            None => return Err(Error::data("truncated PGM header")),
            Some(b'#') => {
                let end = bytes[pos..]
                    .iter()
                    .position(|&b| b == b'\n')
                    .map(|e| pos + e)
                    .unwrap_or(bytes.len());
                let comment = String::from_utf8_lossy(&bytes[pos + 1..end]);
                if let Some(rest) = comment.trim().strip_prefix("scale:") {
                    scale = rest.trim().parse().map_err(|_| {
                        Error::data(format!("bad scale comment `{}`", comment.trim()))
                    })?;
                    if !(scale.is_finite() && scale > 0.0) {
                        return Err(Error::data("scale must be finite and positive"));
                    }
                }
                pos = end;
            }
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(_) => {
                let end = pos
                    + bytes[pos..]
                        .iter()
                        .position(|b| b.is_ascii_whitespace() || *b == b'#')
                        .unwrap_or(bytes.len() - pos);
                let token = std::str::from_utf8(&bytes[pos..end])
                    .map_err(|_| Error::data("PGM header is not ASCII"))?;
                tokens.push(
                    token
                        .parse()
                        .map_err(|_| Error::data(format!("bad PGM header token `{token}`")))?,
                );
                pos = end;
            }
        }
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ if magic[1] == b'5' => return Err(Error::data("missing PGM raster separator")),
        _ => {}
    }
    let (width, height, maxval) = (tokens[0], tokens[1], tokens[2]);
    if width == 0 || height == 0 {
        return Err(Error::data("PGM dimensions must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::data("PGM maxval must be in 1..=65535"));
    }
    Ok(PgmHeader {
        magic,
        width,
        height,
        maxval,
        scale,
        body_offset: pos,
    })
}

/// Decodes a P5 (binary) or P2 (ASCII) PGM image, undoing the recorded
/// intensity scale when a `# scale:` comment is present.
pub fn image_from_pgm(bytes: &[u8]) -> Result<SpeckleImage> {
    let header = parse_pgm_header(bytes)?;
    let n = header.width as usize * header.height as usize;
    let mut grays: Vec<u32> = Vec::with_capacity(n);
    if header.magic[1] == b'5' {
        let body = &bytes[header.body_offset..];
        let wide = header.maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        if body.len() < need {
            return Err(Error::data(format!(
                "PGM raster holds {} bytes, expected {need}",
                body.len()
            )));
        }
        if wide {
            for pair in body[..need].chunks_exact(2) {
                grays.push(u32::from(u16::from_be_bytes([pair[0], pair[1]])));
            }
        } else {
            grays.extend(body[..need].iter().map(|&b| u32::from(b)));
        }
    } else {
        let body = std::str::from_utf8(&bytes[header.body_offset..])
            .map_err(|_| Error::data("P2 raster is not ASCII"))?;
        for token in body.split_ascii_whitespace() {
            if token.starts_with('#') {
                return Err(Error::data("comments are not allowed in the P2 raster"));
            }
            grays.push(
                token
                    .parse()
                    .map_err(|_| Error::data(format!("bad P2 sample `{token}`")))?,
            );
        }
        if grays.len() != n {
            return Err(Error::data(format!(
                "P2 raster holds {} samples, expected {n}",
                grays.len()
            )));
        }
    }
    if let Some(bad) = grays.iter().find(|&&g| g > header.maxval) {
        return Err(Error::data(format!(
            "sample {bad} exceeds maxval {}",
            header.maxval
        )));
    }
    let intensities = grays
        .into_iter()
        .map(|g| f64::from(g) / header.scale)
        .collect();
    SpeckleImage::from_raster(header.width, header.height, intensities)
}

/// Encodes an image in the exact binary raster format: magic `SPKL1`,
/// little-endian u32 width and height, then the row-major f64 raster.
pub fn image_to_raster(image: &SpeckleImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + image.intensities.len() * 8);
    out.extend_from_slice(RASTER_MAGIC);
    out.extend_from_slice(&image.width.to_le_bytes());
    out.extend_from_slice(&image.height.to_le_bytes());
    for &v in &image.intensities {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes the exact binary raster format.
pub fn image_from_raster_bytes(bytes: &[u8]) -> Result<SpeckleImage> {
    if bytes.len() < 13 || &bytes[..5] != RASTER_MAGIC {
        return Err(Error::data("not an SPKL1 raster"));
    }
    let width = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
    let height = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes"));
    let n = width as usize * height as usize;
    let body = &bytes[13..];
    if body.len() != n * 8 {
        return Err(Error::data(format!(
            "raster holds {} bytes, expected {}",
            body.len(),
            n * 8
        )));
    }
    let intensities = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SpeckleImage::from_raster(width, height, intensities)
}

fn json_parse_error(e: &serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    }
}

/// Serializes a fitted model as pretty JSON with a trailing newline.
pub fn model_to_json(net: &BayesNet) -> Result<String> {
    let mut s = serde_json::to_string_pretty(net).map_err(|e| Error::data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses and version-checks a model JSON document.
pub fn model_from_json(text: &str) -> Result<BayesNet> {
    let net: BayesNet = serde_json::from_str(text).map_err(|e| json_parse_error(&e))?;
    if net.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::data(format!(
            "model format_version {} is not supported (expected {MODEL_FORMAT_VERSION})",
            net.format_version
        )));
    }
    Ok(net)
}

/// One line of the experiment summary CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub comparison: String,
    pub report: EvalReport,
    pub selected: Vec<String>,
}

/// Renders the experiment summary CSV. The leading comment documents the
/// progress numbering convention used by the companion feature table.
pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "# progress numbering: feature rows carry progress 1..N assigned in group order\n",
    );
    out.push_str("comparison,n_train,n_test,accuracy,sensitivity,specificity,selected_features\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.comparison,
            row.report.n_train,
            row.report.n_test,
            fmt_f64(row.report.accuracy),
            fmt_f64(row.report.sensitivity),
            fmt_f64(row.report.specificity),
            row.selected.join(";")
        ));
    }
    out
}

/// Renders the link-discovery report CSV: one row per surviving edge
/// incident to the tested attribute, with its mutual information in bits.
pub fn links_to_csv(report: &LinkReport) -> String {
    let mut out = format!("# verdict: {}\n", report.verdict);
    out.push_str("tested,attribute,score_bits\n");
    for (name, score) in &report.incident_edges {
        out.push_str(&format!(
            "{},{},{}\n",
            report.tested_attribute,
            name,
            fmt_f64(*score)
        ));
    }
    out
}

/// Renders per-row predictions: `row,predicted,p_<label>...` with 1-based
/// row numbers and posterior columns in the model's class-label order.
pub fn predictions_to_csv(predictions: &[Prediction], class_labels: &[String]) -> String {
    let mut out = String::from("row,predicted");
    for label in class_labels {
        out.push_str(&format!(",p_{label}"));
    }
    out.push('\n');
    for (i, pred) in predictions.iter().enumerate() {
        out.push_str(&format!("{},{}", i + 1, pred.label));
        for p in &pred.posterior {
            out.push_str(&format!(",{}", fmt_f64(*p)));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct VersionedEval<'a> {
    format_version: u32,
    #[serde(flatten)]
    report: &'a EvalReport,
}

/// Serializes one evaluation report as pretty JSON.
pub fn eval_report_to_json(report: &EvalReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&VersionedEval {
        format_version: REPORT_FORMAT_VERSION,
        report,
    })
    .map_err(|e| Error::data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct VersionedLinks<'a> {
    format_version: u32,
    skeleton: &'a Skeleton,
    report: &'a LinkReport,
}

/// Serializes the discovered skeleton plus the progress-link report.
pub fn link_report_to_json(skeleton: &Skeleton, report: &LinkReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&VersionedLinks {
        format_version: REPORT_FORMAT_VERSION,
        skeleton,
        report,
    })
    .map_err(|e| Error::data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
