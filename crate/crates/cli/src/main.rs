//! `speckle`: command-line front end for the speckle texture-classification
//! toolchain. This binary owns all filesystem and process concerns; every
//! algorithm lives in the library crate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 I/O
//! error. Diagnostics go to standard error; machine-readable output goes to
//! the requested files or to standard output.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use speckle_core::classifier::{
    classify, fit_cpts, learn_classifier_structure, Prediction, DEFAULT_T_CLASSIFIER,
    MODEL_FORMAT_VERSION,
};
use speckle_core::dataset::DataSet;
use speckle_core::discretize::{apply_discretization, fit_discretization, Method};
use speckle_core::eval::evaluate;
use speckle_core::experiment::{
    config_from_json, run_experiment, SourceKind, CONFIG_FORMAT_VERSION,
};
use speckle_core::format::{
    self, CSV_FORMAT_VERSION, RASTER_FORMAT_VERSION, REPORT_FORMAT_VERSION,
};
use speckle_core::links::{discover_links, DEFAULT_T_LINKS};
use speckle_core::speckle::{generate_speckle, Mode, SpeckleImage, SpeckleParams};
use speckle_core::texture::featurize_batch;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

fn version_text() -> &'static str {
    let mut s = format!("{}\nartifact format versions:\n", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "  feature csv        {CSV_FORMAT_VERSION}");
    let _ = writeln!(s, "  raster (pgm/spkl)  {RASTER_FORMAT_VERSION}");
    let _ = writeln!(s, "  model json         {MODEL_FORMAT_VERSION}");
    let _ = writeln!(s, "  experiment config  {CONFIG_FORMAT_VERSION}");
    let _ = write!(s, "  reports            {REPORT_FORMAT_VERSION}");
    Box::leak(s.into_boxed_str())
}

#[derive(Parser)]
#[command(name = "speckle", version = version_text(), about = "Speckle image synthesis, texture features, and dependency-learning toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    /// Per-pixel sum of independent unit phasors (single-pixel grain).
    Phasor,
    /// Band-limited field from a circular pupil (controllable grain size).
    Pupil,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic speckle image.
    Simulate {
        /// Field model.
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        /// Phasors per pixel (phasor mode).
        #[arg(long, default_value_t = 1000)]
        n: u32,
        /// Pupil radius as a fraction of the smaller image dimension (pupil mode).
        #[arg(long, default_value_t = 0.2)]
        pupil_radius: f64,
        /// Gaussian blur standard deviation in pixels; 0 disables.
        #[arg(long, default_value_t = 0.0)]
        blur_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; `.pgm` writes 16-bit PGM, `.spkl` the exact binary raster.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the nine texture features from images into a feature CSV.
    Features {
        /// Image files, or a single directory of `.pgm`/`.spkl` files
        /// (expanded in file-name order).
        #[arg(long, num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        /// Class label for every row.
        #[arg(long)]
        class: String,
        /// Number rows 1..N in input order in a progress column.
        #[arg(long)]
        progress: bool,
        #[arg(long, default_value_t = 30)]
        roi_size: u32,
        #[arg(long, default_value_t = 5)]
        stride: u32,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a classifier from a labeled feature CSV and store it as JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Information threshold in bits for feature selection/augmentation.
        #[arg(long, default_value_t = DEFAULT_T_CLASSIFIER)]
        t: f64,
        #[arg(long, default_value_t = 3)]
        bins: usize,
        #[arg(long, default_value = "eqfreq", value_parser = Method::from_str)]
        method: Method,
        /// Output model path.
        #[arg(long)]
        model: PathBuf,
    },
    /// Classify feature rows with a stored model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a stored model on labeled data.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Class counted as positive in the confusion matrix.
        #[arg(long)]
        positive_class: String,
        /// Output JSON path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discover dependency links between features, class, and progress.
    DiscoverLinks {
        #[arg(long)]
        data: PathBuf,
        /// Information threshold in bits.
        #[arg(long, default_value_t = DEFAULT_T_LINKS)]
        t: f64,
        #[arg(long, default_value_t = 3)]
        bins: usize,
        #[arg(long, default_value = "eqfreq", value_parser = Method::from_str)]
        method: Method,
        /// Output CSV path for the progress-edge report; standard output when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Optional JSON path for the full skeleton and report.
        #[arg(long)]
        skeleton: Option<PathBuf>,
    },
    /// Run the full three-group protocol from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the report bundle (created if missing).
        #[arg(long)]
        outdir: PathBuf,
    },
}

enum CliError {
    /// Data or validation failure (exit 2).
    Core(speckle_core::Error),
    /// Filesystem failure (exit 3).
    Io(String),
}

impl From<speckle_core::Error> for CliError {
    fn from(e: speckle_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_ctx<T>(r: std::io::Result<T>, action: &str, path: &Path) -> CliResult<T> {
    r.map_err(|e| CliError::Io(format!("cannot {action} `{}`: {e}", path.display())))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    io_ctx(std::fs::read(path), "read", path)
}

fn read_text(path: &Path) -> CliResult<String> {
    io_ctx(std::fs::read_to_string(path), "read", path)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    io_ctx(std::fs::write(path, bytes), "write", path)
}

/// Writes to the path, or to standard output when no path is given.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_dataset(path: &Path) -> CliResult<DataSet> {
    let text = read_text(path)?;
    Ok(format::dataset_from_csv(&text)?)
}

fn write_image(path: &Path, image: &SpeckleImage) -> CliResult {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let bytes = match ext {
        "pgm" => format::image_to_pgm(image),
        "spkl" => format::image_to_raster(image),
        other => {
            return Err(speckle_core::Error::param(
                "out",
                format!("unsupported image extension `{other}` (expected pgm or spkl)"),
            )
            .into())
        }
    };
    write_bytes(path, &bytes)
}

fn read_image(path: &Path) -> CliResult<SpeckleImage> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let bytes = read_bytes(path)?;
    let image = match ext {
        "pgm" => format::image_from_pgm(&bytes),
        "spkl" => format::image_from_raster_bytes(&bytes),
        other => Err(speckle_core::Error::data(format!(
            "unsupported image extension `{other}` in `{}` (expected pgm or spkl)",
            path.display()
        ))),
    };
    image.map_err(|e| {
        CliError::Core(speckle_core::Error::data(format!(
            "{}: {e}",
            path.display()
        )))
    })
}

/// A single directory argument expands to its pgm/spkl files in name order;
/// otherwise the arguments are taken as files in the given order.
fn expand_images(args: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    if args.len() == 1 && args[0].is_dir() {
        let dir = &args[0];
        let entries = io_ctx(std::fs::read_dir(dir), "list", dir)?;
        let mut files = Vec::new();
        for entry in entries {
            let entry = io_ctx(entry, "list", dir)?;
            let path = entry.path();
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            if path.is_file() && (ext == "pgm" || ext == "spkl") {
                files.push(path);
            }
        }
        files.sort();
        if files.is_empty() {
            return Err(speckle_core::Error::data(format!(
                "directory `{}` contains no .pgm or .spkl files",
                dir.display()
            ))
            .into());
        }
        Ok(files)
    } else {
        Ok(args.to_vec())
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Simulate {
            mode,
            width,
            height,
            n,
            pupil_radius,
            blur_sigma,
            seed,
            out,
        } => {
            let mode = match mode {
                ModeArg::Phasor => Mode::PhasorSum { phasor_count: n },
                ModeArg::Pupil => Mode::BandLimited { pupil_radius },
            };
            let params = SpeckleParams::new(width, height, mode, seed).with_blur(blur_sigma);
            let image = generate_speckle(&params)?;
            write_image(&out, &image)
        }
        Command::Features {
            images,
            class,
            progress,
            roi_size,
            stride,
            out,
        } => {
            let paths = expand_images(&images)?;
            let mut loaded = Vec::with_capacity(paths.len());
            for path in &paths {
                loaded.push(read_image(path)?);
            }
            let data = featurize_batch(&loaded, &class, roi_size, stride, progress)?;
            emit(out.as_deref(), &format::dataset_to_csv(&data)?)
        }
        Command::Train {
            data,
            t,
            bins,
            method,
            model,
        } => {
            let dataset = read_dataset(&data)?;
            let spec = fit_discretization(&dataset, method, bins)?;
            let disc = apply_discretization(&spec, &dataset)?;
            let net = fit_cpts(learn_classifier_structure(&disc, t)?, &disc)?;
            write_bytes(&model, format::model_to_json(&net)?.as_bytes())
        }
        Command::Classify { model, data, out } => {
            let net = format::model_from_json(&read_text(&model)?)?;
            let dataset = read_dataset(&data)?;
            let order: Vec<usize> = net
                .attributes
                .iter()
                .map(|name| {
                    dataset.attribute_index(name).ok_or_else(|| {
                        speckle_core::Error::data(format!("data is missing attribute `{name}`"))
                    })
                })
                .collect::<Result<_, _>>()?;
            let mut predictions: Vec<Prediction> = Vec::with_capacity(dataset.n_rows());
            for row in &dataset.rows {
                let values: Vec<f64> = order.iter().map(|&i| row[i]).collect();
                predictions.push(classify(&net, &values)?);
            }
            emit(
                out.as_deref(),
                &format::predictions_to_csv(&predictions, &net.class_labels),
            )
        }
        Command::Evaluate {
            model,
            data,
            positive_class,
            out,
        } => {
            let net = format::model_from_json(&read_text(&model)?)?;
            let dataset = read_dataset(&data)?;
            let report = evaluate(&net, &dataset, &positive_class)?;
            emit(out.as_deref(), &format::eval_report_to_json(&report)?)
        }
        Command::DiscoverLinks {
            data,
            t,
            bins,
            method,
            report,
            skeleton,
        } => {
            let dataset = read_dataset(&data)?;
            let spec = fit_discretization(&dataset, method, bins)?;
            let disc = apply_discretization(&spec, &dataset)?;
            let (graph, links) = discover_links(&disc, t)?;
            if let Some(path) = &skeleton {
                write_bytes(
                    path,
                    format::link_report_to_json(&graph, &links)?.as_bytes(),
                )?;
            }
            emit(report.as_deref(), &format::links_to_csv(&links))
        }
        Command::Experiment { config, outdir } => {
            let parsed = config_from_json(&read_text(&config)?)?;
            // CSV group paths resolve relative to the config file's directory.
            let base = config.parent().unwrap_or_else(|| Path::new("."));
            let mut sources = BTreeMap::new();
            for group in &parsed.groups {
                if group.source == SourceKind::Csv {
                    let rel = group.path.as_deref().expect("validated");
                    let dataset = read_dataset(&base.join(rel))?;
                    sources.insert(rel.to_string(), dataset);
                }
            }
            let bundle = run_experiment(&parsed, &sources)?;
            io_ctx(std::fs::create_dir_all(&outdir), "create", &outdir)?;
            write_bytes(&outdir.join("features.csv"), bundle.features_csv.as_bytes())?;
            write_bytes(&outdir.join("summary.csv"), bundle.summary_csv.as_bytes())?;
            write_bytes(&outdir.join("links.csv"), bundle.links_csv.as_bytes())?;
            write_bytes(
                &outdir.join("link_report.json"),
                format::link_report_to_json(&bundle.skeleton, &bundle.link_report)?.as_bytes(),
            )?;
            for row in &bundle.summary {
                write_bytes(
                    &outdir.join(format!("report_{}.json", row.comparison)),
                    format::eval_report_to_json(&row.report)?.as_bytes(),
                )?;
            }
            for (comparison, net) in &bundle.models {
                write_bytes(
                    &outdir.join(format!("model_{comparison}.json")),
                    format::model_to_json(net)?.as_bytes(),
                )?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version go to standard output with success; genuine
            // usage errors go to standard error with exit 1.
            let info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if info {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
