//! Synthetic laser-speckle image formation and contrast statistics.
//!
//! Two formation models are provided. `PhasorSum` realizes fully developed
//! speckle: every pixel independently sums N unit-amplitude phasors with
//! uniform random phases and takes the squared magnitude, which drives the
//! speckle contrast K toward 1. `BandLimited` fills a frequency-domain pupil
//! disk with unit-amplitude random phases and inverse-transforms it, giving
//! spatially correlated speckle whose grain size is set by the pupil radius.
//!
//! All generation is a pure function of the parameter record: the phase of
//! phasor j at pixel p is derived from the seed and the stream index
//! `p * N + j` (see [`crate::rng`]), so images are bit-identical across runs,
//! platforms, and any future parallel evaluation order.

use crate::error::{Error, Result};
use crate::rng::{mix64, GOLDEN};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Identifier of the phase stream algorithm, recorded as provenance.
pub const PHASE_GENERATOR: &str = "splitmix64-counter/v1";

/// Default sensor pixel pitch in micrometers (metadata only).
pub const DEFAULT_PIXEL_PITCH_UM: f64 = 2.8;
/// Default illumination wavelength in nanometers (metadata only).
pub const DEFAULT_WAVELENGTH_NM: f64 = 650.0;

/// Image-formation model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// Per-pixel sum of `phasor_count` independent unit phasors.
    PhasorSum { phasor_count: u32 },
    /// Random-phase pupil disk of radius `pupil_radius * min(width, height)`
    /// frequency bins, inverse-transformed; `pupil_radius` is a fraction of
    /// the Nyquist extent in (0, 0.5].
    BandLimited { pupil_radius: f64 },
}

/// Full description of one synthetic image; doubles as provenance metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeckleParams {
    pub width: u32,
    pub height: u32,
    pub mode: Mode,
    /// Gaussian blur applied to the intensity raster after formation; 0 = none.
    pub blur_sigma: f64,
    pub seed: u64,
    /// Sensor pixel pitch in micrometers. Metadata only.
    pub pixel_pitch_um: f64,
    /// Illumination wavelength in nanometers. Metadata only.
    pub wavelength_nm: f64,
}

impl SpeckleParams {
    /// Parameters with the metadata defaults and no blur.
    pub fn new(width: u32, height: u32, mode: Mode, seed: u64) -> Self {
        SpeckleParams {
            width,
            height,
            mode,
            blur_sigma: 0.0,
            seed,
            pixel_pitch_um: DEFAULT_PIXEL_PITCH_UM,
            wavelength_nm: DEFAULT_WAVELENGTH_NM,
        }
    }

    pub fn with_blur(mut self, sigma: f64) -> Self {
        self.blur_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 {
            return Err(Error::param("width", "must be at least 8 pixels"));
        }
        if self.height < 8 {
            return Err(Error::param("height", "must be at least 8 pixels"));
        }
        match self.mode {
            Mode::PhasorSum { phasor_count } => {
                if phasor_count < 2 {
                    return Err(Error::param("phasor_count", "must be at least 2"));
                }
                // Every phasor gets a distinct u64 stream index (pixel *
                // phasor_count + j), so the whole index space must fit in u64.
                // The generation loop relies on this bound to use wrapping
                // index arithmetic.
                let pixels = self.width as u64 * self.height as u64;
                if pixels.checked_mul(phasor_count as u64).is_none() {
                    return Err(Error::param(
                        "phasor_count",
                        "width * height * phasor_count exceeds the 64-bit stream index space",
                    ));
                }
            }
            Mode::BandLimited { pupil_radius } => {
                if !(pupil_radius > 0.0 && pupil_radius <= 0.5) {
                    return Err(Error::param(
                        "pupil_radius",
                        format!("must lie in (0, 0.5], got {pupil_radius}"),
                    ));
                }
            }
        }
        if self.blur_sigma.is_nan() || self.blur_sigma < 0.0 {
            return Err(Error::param(
                "blur_sigma",
                format!("must be nonnegative, got {}", self.blur_sigma),
            ));
        }
        Ok(())
    }
}

/// Nonnegative intensity raster plus the parameters that produced it.
///
/// `params` is `None` for rasters ingested from files, whose generation
/// provenance is unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeckleImage {
    pub width: u32,
    pub height: u32,
    /// Row-major, length = width * height, every value finite and >= 0.
    pub intensities: Vec<f64>,
    pub params: Option<SpeckleParams>,
}

impl SpeckleImage {
    /// Wraps an ingested raster after checking the type invariants.
    pub fn from_raster(width: u32, height: u32, intensities: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("width", "image dimensions must be positive"));
        }
        if intensities.len() != (width as usize) * (height as usize) {
            return Err(Error::data(format!(
                "raster length {} does not match {}x{}",
                intensities.len(),
                width,
                height
            )));
        }
        if let Some(bad) = intensities.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::data(format!(
                "intensities must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(SpeckleImage {
            width,
            height,
            intensities,
            params: None,
        })
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f64 {
        self.intensities[y as usize * self.width as usize + x as usize]
    }
}

/// Rectangular region, used to restrict contrast statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Population statistics of an intensity region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContrastStats {
    pub mean_intensity: f64,
    /// Population standard deviation (divisor n).
    pub sigma: f64,
    /// Speckle contrast K = sigma / mean.
    pub contrast: f64,
}

// fdlibm minimax kernel coefficients for sin and cos on [-pi/4, pi/4],
// kept in their published digit form for auditability (the extra digits
// round to the same f64 values).
#[allow(clippy::excessive_precision)]
mod coeffs {
    pub(super) const S1: f64 = -1.66666666666666324348e-01;
    pub(super) const S2: f64 = 8.33333333332248946124e-03;
    pub(super) const S3: f64 = -1.98412698298579493134e-04;
    pub(super) const S4: f64 = 2.75573137070700676789e-06;
    pub(super) const S5: f64 = -2.50507602534068634195e-08;
    pub(super) const S6: f64 = 1.58969099521155010221e-10;
    pub(super) const C1: f64 = 4.16666666666666019037e-02;
    pub(super) const C2: f64 = -1.38888888888741095749e-03;
    pub(super) const C3: f64 = 2.48015872894767294178e-05;
    pub(super) const C4: f64 = -2.75573143513906633035e-07;
    pub(super) const C5: f64 = 2.08757232129817482790e-09;
    pub(super) const C6: f64 = -1.13596475577881948265e-11;
}
use coeffs::{C1, C2, C3, C4, C5, C6, S1, S2, S3, S4, S5, S6};

/// (cos, sin) of the uniform random phase at `index` of the seed's stream.
///
/// The mixed word supplies the quadrant (low 2 bits) and the in-quadrant
/// offset rq in [-0.5, 0.5) (top 53 bits), so the phase (q + rq) * pi/2 is
/// uniform on a full turn and no argument reduction is needed. The kernel
/// polynomials are evaluated with `mul_add`, whose exactly-rounded semantics
/// make the result bit-identical on every platform. Max absolute error vs
/// arbitrary-precision sin/cos is about 1e-15.
#[inline(always)]
pub(crate) fn unit_phasor_at(seed: u64, index: u64) -> (f64, f64) {
    let bits = mix64(seed.wrapping_add(index.wrapping_mul(GOLDEN)));
    let q = bits & 3;
    // Exact: k * 2^-53 - 0.5 is representable for every 53-bit k.
    let rq = (bits >> 11) as f64 * (1.0 / 9007199254740992.0) - 0.5;
    let r = rq * std::f64::consts::FRAC_PI_2;
    let z = r * r;
    let w = z * z;
    let sp_t = S5.mul_add(z, S4);
    let sp_u = S3.mul_add(z, S2);
    let sp_v = S6.mul_add(w, sp_t).mul_add(w, sp_u).mul_add(z, S1);
    let sp = (z * r).mul_add(sp_v, r);
    let cp_t = C5.mul_add(z, C4);
    let cp_u = C3.mul_add(z, C2);
    let cp_v = C6.mul_add(w, cp_t).mul_add(w, cp_u).mul_add(z, C1);
    let cp = w.mul_add(cp_v, (-0.5f64).mul_add(z, 1.0));
    // sin(phi): q=0:+sp q=1:+cp q=2:-sp q=3:-cp
    // cos(phi): q=0:+cp q=1:-sp q=2:-cp q=3:+sp
    let odd = (q & 1) != 0;
    let s_base = if odd { cp } else { sp };
    let c_base = if odd { sp } else { cp };
    let s_sign = (q & 2) << 62;
    let c_sign = ((q ^ (q >> 1)) & 1) << 63;
    let s = f64::from_bits(s_base.to_bits() ^ s_sign);
    let c = f64::from_bits(c_base.to_bits() ^ c_sign);
    (c, s)
}

// Independent accumulator lanes in the phasor loop. The lane structure pins
// the summation order in the source so autovectorization cannot change bits.
const LANES: usize = 16;

fn generate_phasor_sum(params: &SpeckleParams, phasor_count: u32) -> Vec<f64> {
    let n = phasor_count as u64;
    let npx = params.width as usize * params.height as usize;
    let seed = mix64(params.seed);
    let inv_n = 1.0 / n as f64;
    // validate() guarantees width * height * phasor_count fits in u64, so all
    // wrapping index arithmetic below is exact. Wrapping ops keep the hot loop
    // free of overflow-check branches in debug-assertion builds, which would
    // otherwise block vectorization and triple the runtime.
    let blocks = n / LANES as u64;
    let tail = n % LANES as u64;
    let mut intensities = Vec::with_capacity(npx);
    for px in 0..npx as u64 {
        let mut idx = px.wrapping_mul(n);
        let mut re = [0.0f64; LANES];
        let mut im = [0.0f64; LANES];
        for _ in 0..blocks {
            for l in 0..LANES as u64 {
                let (c, s) = unit_phasor_at(seed, idx.wrapping_add(l));
                re[l as usize] += c;
                im[l as usize] += s;
            }
            idx = idx.wrapping_add(LANES as u64);
        }
        let (mut tr, mut ti) = (0.0f64, 0.0f64);
        for _ in 0..tail {
            let (c, s) = unit_phasor_at(seed, idx);
            tr += c;
            ti += s;
            idx = idx.wrapping_add(1);
        }
        for l in 0..LANES {
            tr += re[l];
            ti += im[l];
        }
        // |I_com|^2 with I_com scaled by 1/sqrt(N): mean intensity is 1.
        intensities.push((tr * tr + ti * ti) * inv_n);
    }
    intensities
}

fn generate_band_limited(params: &SpeckleParams, pupil_radius: f64) -> Vec<f64> {
    let w = params.width as usize;
    let h = params.height as usize;
    let seed = mix64(params.seed);
    let radius = pupil_radius * params.width.min(params.height) as f64;
    let r2 = radius * radius;

    // Pupil fill: unit phasors inside the disk around DC, zero outside.
    // The phase index depends only on the frequency bin, so enlarging the
    // pupil at a fixed seed keeps all previously present modes unchanged.
    let mut field = vec![Complex::new(0.0f64, 0.0); w * h];
    for ky in 0..h {
        let fy = if ky <= h / 2 {
            ky as i64
        } else {
            ky as i64 - h as i64
        };
        for kx in 0..w {
            let fx = if kx <= w / 2 {
                kx as i64
            } else {
                kx as i64 - w as i64
            };
            let d2 = (fx * fx + fy * fy) as f64;
            if d2 <= r2 {
                let (c, s) = unit_phasor_at(seed, (ky * w + kx) as u64);
                field[ky * w + kx] = Complex::new(c, s);
            }
        }
    }

    // Unnormalized 2-D inverse FFT (rows then columns); the final unit-mean
    // normalization absorbs all scale factors.
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_inverse(w);
    for row in field.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_inverse(h);
    let mut column = vec![Complex::new(0.0f64, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = field[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            field[y * w + x] = column[y];
        }
    }

    let mut intensities: Vec<f64> = field.iter().map(|c| c.norm_sqr()).collect();
    let sum: f64 = intensities.iter().sum();
    // At least the DC mode lies in the pupil, so the field is not all zero.
    let scale = (w * h) as f64 / sum;
    for v in &mut intensities {
        *v *= scale;
    }
    intensities
}

/// Generates a speckle image from the parameter record.
///
/// Deterministic: the same parameters yield a bit-identical image. If
/// `params.blur_sigma > 0`, the intensity raster is blurred as a final step
/// (see [`blur_image`]).
pub fn generate_speckle(params: &SpeckleParams) -> Result<SpeckleImage> {
    params.validate()?;
    let intensities = match params.mode {
        Mode::PhasorSum { phasor_count } => generate_phasor_sum(params, phasor_count),
        Mode::BandLimited { pupil_radius } => generate_band_limited(params, pupil_radius),
    };
    let image = SpeckleImage {
        width: params.width,
        height: params.height,
        intensities,
        params: Some(params.clone()),
    };
    if params.blur_sigma > 0.0 {
        blur_image(&image, params.blur_sigma)
    } else {
        Ok(image)
    }
}

/// Population contrast statistics over the image or a rectangle within it.
///
/// The region must contain at least 4 pixels and have positive mean
/// intensity; K = sigma / mean by construction.
pub fn contrast(image: &SpeckleImage, roi: Option<Rect>) -> Result<ContrastStats> {
    let rect = match roi {
        Some(r) => {
            if r.width == 0
                || r.height == 0
                || r.x.checked_add(r.width).is_none_or(|e| e > image.width)
                || r.y.checked_add(r.height).is_none_or(|e| e > image.height)
            {
                return Err(Error::param("roi", "rectangle must lie inside the image"));
            }
            r
        }
        None => Rect {
            x: 0,
            y: 0,
            width: image.width,
            height: image.height,
        },
    };
    let n = rect.width as usize * rect.height as usize;
    if n < 4 {
        return Err(Error::param("roi", "region must contain at least 4 pixels"));
    }

    let mut sum = 0.0f64;
    for y in rect.y..rect.y + rect.height {
        for x in rect.x..rect.x + rect.width {
            sum += image.at(x, y);
        }
    }
    let mean = sum / n as f64;
    if mean <= 0.0 {
        return Err(Error::Degenerate(
            "region mean intensity is zero; contrast undefined".into(),
        ));
    }
    let mut ss = 0.0f64;
    for y in rect.y..rect.y + rect.height {
        for x in rect.x..rect.x + rect.width {
            let d = image.at(x, y) - mean;
            ss += d * d;
        }
    }
    let sigma = (ss / n as f64).sqrt();
    Ok(ContrastStats {
        mean_intensity: mean,
        sigma,
        contrast: sigma / mean,
    })
}

/// Mirror-reflected index into [0, n): ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
#[inline]
fn reflect(i: i64, n: i64) -> usize {
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Separable Gaussian blur of the intensity raster.
///
/// Kernel half-width is ceil(3 sigma) and the kernel is normalized to unit
/// sum; edges are handled by mirror reflection. `sigma == 0` returns a
/// bit-identical copy. The image's provenance record is carried over
/// unchanged (it describes formation, not later processing).
pub fn blur_image(image: &SpeckleImage, sigma: f64) -> Result<SpeckleImage> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::param(
            "sigma",
            format!("must be nonnegative, got {sigma}"),
        ));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let half = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity(2 * half as usize + 1);
    let inv_two_s2 = 1.0 / (2.0 * sigma * sigma);
    for i in -half..=half {
        kernel.push((-(i as f64) * (i as f64) * inv_two_s2).exp());
    }
    let total: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= total;
    }

    let w = image.width as i64;
    let h = image.height as i64;
    let src = &image.intensities;
    // Horizontal pass.
    let mut tmp = vec![0.0f64; src.len()];
    for y in 0..h {
        let row = &src[(y * w) as usize..(y * w + w) as usize];
        for x in 0..w {
            let mut acc = 0.0f64;
            for (ki, &kv) in kernel.iter().enumerate() {
                acc += kv * row[reflect(x + ki as i64 - half, w)];
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (ki, &kv) in kernel.iter().enumerate() {
                acc += kv * tmp[(reflect(y + ki as i64 - half, h) as i64 * w + x) as usize];
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    Ok(SpeckleImage {
        width: image.width,
        height: image.height,
        intensities: out,
        params: image.params.clone(),
    })
}
