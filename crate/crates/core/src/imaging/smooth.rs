//! Smoothing filters: box, Gaussian, median and bilateral.
//!
//! Fractional results all go through the shared round-half-away-from-zero
//! rule so outputs compose with the rest of the pipeline.

use crate::error::{Error, Result};
use crate::raster::{border_index, BorderMode, Raster};

use super::round_clamp_u8;

fn require_odd(name: &str, ksize: usize) -> Result<()> {
    if ksize == 0 || ksize % 2 == 0 {
        return Err(Error::ConstraintViolation(format!(
            "{name} must be odd and >= 1, got {ksize}"
        )));
    }
    Ok(())
}

/// 1-D Gaussian weights for an odd `ksize`, normalized to sum 1. The sigma
/// follows the kernel-size rule `0.3*((ksize-1)*0.5 - 1) + 0.8`.
pub fn gaussian_kernel(ksize: usize) -> Result<Vec<f64>> {
    if ksize == 0 || ksize % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Gaussian kernel size must be odd and >= 1, got {ksize}"
        )));
    }
    let sigma = 0.3 * ((ksize as f64 - 1.0) * 0.5 - 1.0) + 0.8;
    let center = (ksize / 2) as f64;
    let weights: Vec<f64> = (0..ksize)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

/// Unweighted window mean under the given border mode. Constant borders
/// contribute zero-valued samples at full window weight; isolated borders
/// shrink the window and renormalize. Window sums come from an integral
/// image over the padded buffer, and the mean is rounded exactly on the
/// integer rational, so results are independent of the aperture size path.
pub fn box_blur(r: &Raster, ksize: usize, border: BorderMode) -> Result<Raster> {
    require_odd("box blur ksize", ksize)?;
    let radius = ksize / 2;
    let (w, h) = (r.width(), r.height());
    let (pw, ph) = (w + 2 * radius, h + 2 * radius);

    // padded sample values plus a mask of weights actually present
    let mut values = vec![0u8; pw * ph];
    let mut mask = vec![0u8; pw * ph];
    for y in 0..ph {
        for x in 0..pw {
            let sx = x as isize - radius as isize;
            let sy = y as isize - radius as isize;
            match r.sample(sx, sy, border) {
                Some(v) => {
                    values[y * pw + x] = v;
                    mask[y * pw + x] = 1;
                }
                None => {
                    if border == BorderMode::Constant {
                        mask[y * pw + x] = 1; // zero-valued sample
                    }
                }
            }
        }
    }

    let stride = pw + 1;
    let mut sum_int = vec![0u64; stride * (ph + 1)];
    let mut cnt_int = vec![0u64; stride * (ph + 1)];
    for y in 0..ph {
        let mut row_sum = 0u64;
        let mut row_cnt = 0u64;
        for x in 0..pw {
            row_sum += values[y * pw + x] as u64;
            row_cnt += mask[y * pw + x] as u64;
            sum_int[(y + 1) * stride + x + 1] = sum_int[y * stride + x + 1] + row_sum;
            cnt_int[(y + 1) * stride + x + 1] = cnt_int[y * stride + x + 1] + row_cnt;
        }
    }

    let window = |integral: &[u64], x: usize, y: usize| -> u64 {
        let (x1, y1) = (x + ksize, y + ksize);
        integral[y1 * stride + x1] + integral[y * stride + x]
            - integral[y * stride + x1]
            - integral[y1 * stride + x]
    };

    Raster::from_fn(w, h, |x, y| {
        let sum = window(&sum_int, x, y);
        let cnt = window(&cnt_int, x, y);
        // exact round-half-up on the non-negative rational sum/cnt; the
        // anchor pixel is always in the window so cnt >= 1
        ((2 * sum + cnt) / (2 * cnt)) as u8
    })
}

/// 2-D Gaussian convolution (outer product of the 1-D kernel) under the
/// given border mode.
pub fn gaussian_blur(r: &Raster, ksize: usize, border: BorderMode) -> Result<Raster> {
    require_odd("Gaussian blur ksize", ksize)?;
    let kernel = gaussian_kernel(ksize)?;
    let radius = (ksize / 2) as isize;
    let out = Raster::from_fn(r.width(), r.height(), |x, y| {
        let mut acc = 0.0f64;
        let mut weight = 0.0f64;
        for (j, ky) in kernel.iter().enumerate() {
            let dy = j as isize - radius;
            for (i, kx) in kernel.iter().enumerate() {
                let dx = i as isize - radius;
                let w = ky * kx;
                match r.sample(x as isize + dx, y as isize + dy, border) {
                    Some(v) => {
                        acc += w * v as f64;
                        weight += w;
                    }
                    None => {
                        if border == BorderMode::Constant {
                            weight += w; // zero sample keeps full kernel mass
                        }
                    }
                }
            }
        }
        round_clamp_u8(acc / weight)
    })?;
    Ok(out)
}

/// Window median with replicate borders. Rows slide a 256-bin histogram so
/// big apertures stay affordable.
pub fn median_blur(r: &Raster, ksize: usize) -> Result<Raster> {
    require_odd("median blur ksize", ksize)?;
    if ksize == 1 {
        return Ok(r.clone());
    }
    let radius = (ksize / 2) as isize;
    let (w, h) = (r.width(), r.height());
    let mid = (ksize * ksize) / 2; // index of the middle order statistic
    let mut pixels = Vec::with_capacity(w * h);

    let sample = |x: isize, y: isize| -> u8 {
        let sx = border_index(x, w, BorderMode::Replicate).unwrap();
        let sy = border_index(y, h, BorderMode::Replicate).unwrap();
        r.get(sx, sy)
    };

    let mut hist = [0u32; 256];
    for y in 0..h as isize {
        hist.fill(0);
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                hist[sample(dx, y + dy) as usize] += 1;
            }
        }
        pixels.push(histogram_median(&hist, mid));
        for x in 1..w as isize {
            for dy in -radius..=radius {
                hist[sample(x - radius - 1, y + dy) as usize] -= 1;
                hist[sample(x + radius, y + dy) as usize] += 1;
            }
            pixels.push(histogram_median(&hist, mid));
        }
    }
    Raster::new(w, h, pixels)
}

fn histogram_median(hist: &[u32; 256], mid: usize) -> u8 {
    let mut seen = 0usize;
    for (value, &count) in hist.iter().enumerate() {
        seen += count as usize;
        if seen > mid {
            return value as u8;
        }
    }
    255
}

/// Edge-preserving weighted mean over the diameter-`d` neighborhood with
/// replicate borders: spatial Gaussian times intensity-difference Gaussian.
pub fn bilateral_filter(r: &Raster, d: usize, sigma_color: f64, sigma_space: f64) -> Result<Raster> {
    if d == 0 {
        return Err(Error::InvalidParameter("bilateral d must be >= 1".into()));
    }
    if sigma_color <= 0.0 || sigma_space <= 0.0 {
        return Err(Error::InvalidParameter("bilateral sigmas must be positive".into()));
    }
    let radius = (d / 2) as isize;
    // range weights depend only on the absolute intensity difference
    let color_lut: Vec<f64> = (0..256)
        .map(|diff| {
            let diff = diff as f64;
            (-(diff * diff) / (2.0 * sigma_color * sigma_color)).exp()
        })
        .collect();
    let side = (2 * radius + 1) as usize;
    let mut space = vec![0.0f64; side * side];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let dist2 = (dx * dx + dy * dy) as f64;
            space[((dy + radius) as usize) * side + (dx + radius) as usize] =
                (-dist2 / (2.0 * sigma_space * sigma_space)).exp();
        }
    }
    let out = Raster::from_fn(r.width(), r.height(), |x, y| {
        let center = r.get(x, y) as f64;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let v = r
                    .sample(x as isize + dx, y as isize + dy, BorderMode::Replicate)
                    .unwrap() as f64;
                let w = space[((dy + radius) as usize) * side + (dx + radius) as usize]
                    * color_lut[(center - v).abs() as usize];
                num += w * v;
                den += w;
            }
        }
        round_clamp_u8(num / den)
    })?;
    Ok(out)
}
