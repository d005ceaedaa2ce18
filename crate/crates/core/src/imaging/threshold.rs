//! Binarization operators: simple, Otsu, triangle and adaptive thresholding.
//!
//! All comparisons are strict (`pixel > T`), matching the reference library
//! the parameter tables were written against.

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::smooth::gaussian_kernel;

/// The five global thresholding rules, numbered as the parameter tables do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdType {
    Binary,
    BinaryInverted,
    Truncate,
    ToZero,
    ToZeroInverted,
}

impl ThresholdType {
    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(ThresholdType::Binary),
            1 => Ok(ThresholdType::BinaryInverted),
            2 => Ok(ThresholdType::Truncate),
            3 => Ok(ThresholdType::ToZero),
            4 => Ok(ThresholdType::ToZeroInverted),
            other => Err(Error::InvalidParameter(format!(
                "threshold type must be in 0..=4, got {other}"
            ))),
        }
    }

    #[inline]
    fn apply(self, pixel: u8, thresh: u8, max_value: u8) -> u8 {
        let above = pixel > thresh;
        match self {
            ThresholdType::Binary => if above { max_value } else { 0 },
            ThresholdType::BinaryInverted => if above { 0 } else { max_value },
            ThresholdType::Truncate => pixel.min(thresh),
            ThresholdType::ToZero => if above { pixel } else { 0 },
            ThresholdType::ToZeroInverted => if above { 0 } else { pixel },
        }
    }
}

/// Applies one global threshold value to every pixel.
pub fn simple_threshold(r: &Raster, thresh: u8, max_value: u8, ttype: ThresholdType) -> Raster {
    let pixels = r.pixels().iter().map(|&p| ttype.apply(p, thresh, max_value)).collect();
    Raster::new(r.width(), r.height(), pixels).expect("same dimensions")
}

fn histogram(r: &Raster) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in r.pixels() {
        hist[p as usize] += 1;
    }
    hist
}

/// Selects the threshold maximizing between-class variance
/// `w0*w1*(mu0-mu1)^2`, ties broken toward the smallest threshold, then
/// applies the chosen threshold globally. A constant image degenerates to
/// threshold 0.
pub fn otsu_threshold(r: &Raster, max_value: u8, ttype: ThresholdType) -> (Raster, u8) {
    let hist = histogram(r);
    let total = r.pixels().len() as f64;
    let total_sum: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let total_count = r.pixels().len() as u64;

    let mut best_t = 0u8;
    let mut best_var = -1.0f64;
    let mut count0 = 0u64;
    let mut sum0 = 0u64;
    for t in 0..=255usize {
        count0 += hist[t];
        sum0 += t as u64 * hist[t];
        let count1 = total_count - count0;
        let sum1 = total_sum - sum0;
        let var = if count0 == 0 || count1 == 0 {
            0.0
        } else {
            let w0 = count0 as f64 / total;
            let w1 = count1 as f64 / total;
            let mu0 = sum0 as f64 / count0 as f64;
            let mu1 = sum1 as f64 / count1 as f64;
            w0 * w1 * (mu0 - mu1) * (mu0 - mu1)
        };
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    (simple_threshold(r, best_t, max_value, ttype), best_t)
}

/// Histogram-geometric threshold selection: the line runs from the histogram
/// peak to the farthest non-empty bin, and the chosen bin maximizes
/// perpendicular distance to it on that side, ties broken toward the peak.
/// A single-bin histogram degenerates to the peak itself.
pub fn triangle_threshold(r: &Raster, max_value: u8, ttype: ThresholdType) -> (Raster, u8) {
    let hist = histogram(r);
    let peak = hist
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    let lo = hist.iter().position(|&c| c > 0).unwrap();
    let hi = hist.iter().rposition(|&c| c > 0).unwrap();

    let chosen = if lo == hi {
        peak
    } else {
        // the longer tail; ties fall to the bright side
        let far = if hi - peak >= peak - lo { hi } else { lo };
        // maximizing |cross product| against the peak->far chord is the
        // same argmax as perpendicular distance (the chord length is fixed)
        let dx = far as i128 - peak as i128;
        let dy = hist[far] as i128 - hist[peak] as i128;
        let mut best_bin = peak;
        let mut best_cross: i128 = -1;
        let range: Box<dyn Iterator<Item = usize>> = if far > peak {
            Box::new(peak..=far)
        } else {
            Box::new((far..=peak).rev())
        };
        for b in range {
            let cross = (dy * (b as i128 - peak as i128)
                - dx * (hist[b] as i128 - hist[peak] as i128))
                .abs();
            if cross > best_cross {
                best_cross = cross;
                best_bin = b;
            }
        }
        best_bin
    };
    let chosen = chosen as u8;
    (simple_threshold(r, chosen, max_value, ttype), chosen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveMethod {
    Mean,
    Gaussian,
}

impl AdaptiveMethod {
    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(AdaptiveMethod::Mean),
            1 => Ok(AdaptiveMethod::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "adaptiveMethod must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// Per-pixel threshold from the `block_size`-square neighborhood mean
/// (plain or Gaussian-weighted) minus `c`. Borders always replicate;
/// only the binary and inverted-binary rules apply.
pub fn adaptive_threshold(
    r: &Raster,
    max_value: u8,
    method: AdaptiveMethod,
    inverted: bool,
    block_size: usize,
    c: i64,
) -> Result<Raster> {
    if block_size < 3 || block_size % 2 == 0 {
        return Err(Error::ConstraintViolation(format!(
            "blockSize must be odd and >= 3, got {block_size}"
        )));
    }
    let local_mean = match method {
        AdaptiveMethod::Mean => window_means(r, block_size),
        AdaptiveMethod::Gaussian => gaussian_window_means(r, block_size)?,
    };
    let pixels = r
        .pixels()
        .iter()
        .zip(&local_mean)
        .map(|(&p, &mean)| {
            let above = p as f64 > mean - c as f64;
            match (above, inverted) {
                (true, false) | (false, true) => max_value,
                _ => 0,
            }
        })
        .collect();
    Ok(Raster::new(r.width(), r.height(), pixels).expect("same dimensions"))
}

/// Unweighted window means with replicate borders, via row/column prefix
/// sums over the replicated padding.
fn window_means(r: &Raster, block_size: usize) -> Vec<f64> {
    let radius = block_size / 2;
    let (w, h) = (r.width(), r.height());
    let count = (block_size * block_size) as f64;
    let padded = replicate_pad(r, radius);
    let pw = w + 2 * radius;
    // integral image over the padded buffer
    let mut integral = vec![0u64; (pw + 1) * (h + 2 * radius + 1)];
    let stride = pw + 1;
    for y in 0..h + 2 * radius {
        let mut row_sum = 0u64;
        for x in 0..pw {
            row_sum += padded[y * pw + x] as u64;
            integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row_sum;
        }
    }
    let mut means = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (x0, y0) = (x, y);
            let (x1, y1) = (x + block_size, y + block_size);
            let sum = integral[y1 * stride + x1] + integral[y0 * stride + x0]
                - integral[y0 * stride + x1]
                - integral[y1 * stride + x0];
            means.push(sum as f64 / count);
        }
    }
    means
}

/// Gaussian-weighted window means with replicate borders; separable passes
/// accumulate in f64.
fn gaussian_window_means(r: &Raster, block_size: usize) -> Result<Vec<f64>> {
    let kernel = gaussian_kernel(block_size)?;
    let radius = block_size / 2;
    let (w, h) = (r.width(), r.height());
    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        let row = r.row(y);
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &k) in kernel.iter().enumerate() {
                let sx = (x + i) as isize - radius as isize;
                let sx = sx.clamp(0, w as isize - 1) as usize;
                acc += k * row[sx] as f64;
            }
            horizontal[y * w + x] = acc;
        }
    }
    let mut means = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &k) in kernel.iter().enumerate() {
                let sy = (y + i) as isize - radius as isize;
                let sy = sy.clamp(0, h as isize - 1) as usize;
                acc += k * horizontal[sy * w + x];
            }
            means[y * w + x] = acc;
        }
    }
    Ok(means)
}

fn replicate_pad(r: &Raster, radius: usize) -> Vec<u8> {
    let (w, h) = (r.width(), r.height());
    let (pw, ph) = (w + 2 * radius, h + 2 * radius);
    let mut out = vec![0u8; pw * ph];
    for y in 0..ph {
        let sy = (y as isize - radius as isize).clamp(0, h as isize - 1) as usize;
        for x in 0..pw {
            let sx = (x as isize - radius as isize).clamp(0, w as isize - 1) as usize;
            out[y * pw + x] = r.get(sx, sy);
        }
    }
    out
}
