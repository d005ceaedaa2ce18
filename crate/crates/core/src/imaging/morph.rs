//! Morphological transformations over rectangular all-ones structuring
//! elements: erosion, dilation and the five composites built from them.
//!
//! Rectangular elements make min/max separable, so each pass is a horizontal
//! then a vertical sliding-window extremum. For constant and isolated
//! borders, out-of-image samples take the identity element of the extremum
//! (255 for erosion, 0 for dilation), which keeps the erode/dilate duality
//! and the monotonicity bounds exact in every mode.

use crate::error::{Error, Result};
use crate::raster::{border_index, BorderMode, Raster, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn identity(self) -> u8 {
        match self {
            Extremum::Min => 255,
            Extremum::Max => 0,
        }
    }
}

/// One separable min/max pass along a line of length `n`.
///
/// `fetch(i)` returns the in-range sample; out-of-range coordinates map
/// through the border mode or fall back to the identity element. A monotonic
/// deque keeps the pass O(n + k) even for kernel sizes beyond the image.
fn line_pass(
    n: usize,
    kernel: usize,
    anchor: usize,
    border: BorderMode,
    ext: Extremum,
    fetch: impl Fn(usize) -> u8,
    out: &mut Vec<u8>,
) {
    let padded_len = n + kernel - 1;
    let value_at = |t: usize| -> u8 {
        let coord = t as isize - anchor as isize;
        match border_index(coord, n, border) {
            Some(idx) => fetch(idx),
            None => ext.identity(),
        }
    };
    // deque of padded indices whose values are strictly "better" than any
    // later candidate; front is the window extremum
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let better = |a: u8, b: u8| match ext {
        Extremum::Min => a <= b,
        Extremum::Max => a >= b,
    };
    for t in 0..padded_len {
        let v = value_at(t);
        while let Some(&back) = deque.back() {
            if better(v, value_at(back)) {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(t);
        // window for output i covers padded indices [i, i + kernel - 1]
        if t + 1 >= kernel {
            let i = t + 1 - kernel;
            while *deque.front().unwrap() < i {
                deque.pop_front();
            }
            out.push(value_at(*deque.front().unwrap()));
            if i + 1 == n {
                break;
            }
        }
    }
}

fn morph_pass(r: &Raster, se: StructuringElement, border: BorderMode, ext: Extremum) -> Raster {
    let (w, h) = (r.width(), r.height());
    let k = se.size();
    let anchor = se.anchor();

    // horizontal pass
    let mut horizontal = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = r.row(y);
        line_pass(w, k, anchor, border, ext, |x| row[x], &mut horizontal);
    }
    // vertical pass over the horizontal result
    let mut columns = Vec::with_capacity(w * h);
    for x in 0..w {
        line_pass(h, k, anchor, border, ext, |y| horizontal[y * w + x], &mut columns);
    }
    let mut pixels = vec![0u8; w * h];
    for x in 0..w {
        for y in 0..h {
            pixels[y * w + x] = columns[x * h + y];
        }
    }
    Raster::new(w, h, pixels).expect("same dimensions")
}

fn repeat(
    r: &Raster,
    se: StructuringElement,
    iterations: usize,
    border: BorderMode,
    ext: Extremum,
) -> Result<Raster> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be >= 1".into()));
    }
    let mut out = morph_pass(r, se, border, ext);
    for _ in 1..iterations {
        out = morph_pass(&out, se, border, ext);
    }
    Ok(out)
}

/// Window minimum over the structuring element, applied `iterations` times.
pub fn erode(
    r: &Raster,
    se: StructuringElement,
    iterations: usize,
    border: BorderMode,
) -> Result<Raster> {
    repeat(r, se, iterations, border, Extremum::Min)
}

/// Window maximum over the structuring element, applied `iterations` times.
pub fn dilate(
    r: &Raster,
    se: StructuringElement,
    iterations: usize,
    border: BorderMode,
) -> Result<Raster> {
    repeat(r, se, iterations, border, Extremum::Max)
}

/// The composite morphological operations. `iterations` applies to the
/// inner erode/dilate passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphMode {
    Opening,
    Closing,
    Gradient,
    TopHat,
    BlackHat,
}

pub fn morph_composite(
    r: &Raster,
    mode: MorphMode,
    se: StructuringElement,
    iterations: usize,
    border: BorderMode,
) -> Result<Raster> {
    let opening = |img: &Raster| -> Result<Raster> {
        dilate(&erode(img, se, iterations, border)?, se, iterations, border)
    };
    let closing = |img: &Raster| -> Result<Raster> {
        erode(&dilate(img, se, iterations, border)?, se, iterations, border)
    };
    match mode {
        MorphMode::Opening => opening(r),
        MorphMode::Closing => closing(r),
        MorphMode::Gradient => {
            let hi = dilate(r, se, iterations, border)?;
            let lo = erode(r, se, iterations, border)?;
            Ok(subtract_saturating(&hi, &lo))
        }
        MorphMode::TopHat => Ok(subtract_saturating(r, &opening(r)?)),
        MorphMode::BlackHat => Ok(subtract_saturating(&closing(r)?, r)),
    }
}

/// Pixelwise `a - b` floored at 0 so results stay valid 8-bit rasters.
fn subtract_saturating(a: &Raster, b: &Raster) -> Raster {
    let pixels = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| x.saturating_sub(y))
        .collect();
    Raster::new(a.width(), a.height(), pixels).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(k: usize) -> StructuringElement {
        StructuringElement::new(k).unwrap()
    }

    fn random_raster(w: usize, h: usize, seed: u64) -> Raster {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Raster::from_fn(w, h, |_, _| rng.gen()).unwrap()
    }

    /// Direct 2-D window extremum, the non-separable reference.
    fn window_oracle(r: &Raster, k: usize, border: BorderMode, erode_pass: bool) -> Raster {
        let anchor = (k / 2) as isize;
        Raster::from_fn(r.width(), r.height(), |x, y| {
            let mut acc = if erode_pass { 255u8 } else { 0u8 };
            for dy in 0..k as isize {
                for dx in 0..k as isize {
                    let sx = x as isize + dx - anchor;
                    let sy = y as isize + dy - anchor;
                    let v = r
                        .sample(sx, sy, border)
                        .unwrap_or(if erode_pass { 255 } else { 0 });
                    acc = if erode_pass { acc.min(v) } else { acc.max(v) };
                }
            }
            acc
        })
        .unwrap()
    }

    #[test]
    fn separable_pass_matches_window_oracle() {
        for seed in 0..4 {
            let r = random_raster(9, 7, seed);
            for k in [1usize, 2, 3, 4, 5, 11] {
                for border in BorderMode::ALL {
                    let e = erode(&r, se(k), 1, border).unwrap();
                    assert_eq!(e, window_oracle(&r, k, border, true), "erode k={k} {border:?}");
                    let d = dilate(&r, se(k), 1, border).unwrap();
                    assert_eq!(d, window_oracle(&r, k, border, false), "dilate k={k} {border:?}");
                }
            }
        }
    }

    #[test]
    fn kernel_one_is_identity() {
        let r = random_raster(6, 6, 5);
        for iterations in [1, 3] {
            assert_eq!(erode(&r, se(1), iterations, BorderMode::Replicate).unwrap(), r);
            assert_eq!(dilate(&r, se(1), iterations, BorderMode::Replicate).unwrap(), r);
        }
    }

    #[test]
    fn constant_rasters_are_fixpoints_and_residuals_vanish() {
        let r = Raster::constant(5, 4, 120).unwrap();
        for border in BorderMode::ALL {
            if border == BorderMode::Constant {
                continue; // identity padding still preserves constants, checked below
            }
            assert_eq!(erode(&r, se(3), 2, border).unwrap(), r);
            assert_eq!(dilate(&r, se(3), 2, border).unwrap(), r);
        }
        assert_eq!(erode(&r, se(3), 1, BorderMode::Constant).unwrap(), r);
        assert_eq!(dilate(&r, se(3), 1, BorderMode::Constant).unwrap(), r);
        for mode in [MorphMode::Gradient, MorphMode::TopHat, MorphMode::BlackHat] {
            let out = morph_composite(&r, mode, se(3), 1, BorderMode::Replicate).unwrap();
            assert!(out.pixels().iter().all(|&p| p == 0), "{mode:?}");
        }
    }

    #[test]
    fn erode_kills_isolated_white_and_dilate_spreads_it() {
        let mut px = vec![0u8; 9];
        px[4] = 255;
        let r = Raster::new(3, 3, px).unwrap();
        let e = erode(&r, se(3), 1, BorderMode::Replicate).unwrap();
        assert!(e.pixels().iter().all(|&p| p == 0));
        let d = dilate(&r, se(3), 1, BorderMode::Replicate).unwrap();
        assert!(d.pixels().iter().all(|&p| p == 255));
    }

    #[test]
    fn duality_under_inversion() {
        for seed in 0..5 {
            let r = random_raster(8, 6, seed);
            for border in BorderMode::ALL {
                for k in [2usize, 3, 4] {
                    let d = dilate(&r, se(k), 1, border).unwrap();
                    let via_erode = erode(&r.invert(), se(k), 1, border).unwrap().invert();
                    assert_eq!(d, via_erode, "k={k} {border:?} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn opening_removes_isolated_white_pixel() {
        let mut px = vec![0u8; 25];
        px[12] = 255;
        let r = Raster::new(5, 5, px).unwrap();
        let out = morph_composite(&r, MorphMode::Opening, se(3), 1, BorderMode::Replicate).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn opening_and_closing_are_idempotent() {
        for seed in 0..5 {
            let r = random_raster(7, 7, seed);
            for border in BorderMode::ALL {
                for mode in [MorphMode::Opening, MorphMode::Closing] {
                    let once = morph_composite(&r, mode, se(3), 1, border).unwrap();
                    let twice = morph_composite(&once, mode, se(3), 1, border).unwrap();
                    assert_eq!(once, twice, "{mode:?} {border:?} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn monotonicity_bounds() {
        for seed in 0..4 {
            let r = random_raster(8, 5, seed);
            for border in [BorderMode::Replicate, BorderMode::Reflect] {
                let e = erode(&r, se(3), 1, border).unwrap();
                let d = dilate(&r, se(3), 1, border).unwrap();
                for ((lo, mid), hi) in e.pixels().iter().zip(r.pixels()).zip(d.pixels()) {
                    assert!(lo <= mid && mid <= hi);
                }
            }
        }
    }

    #[test]
    fn iterations_compose() {
        let r = random_raster(9, 9, 1);
        let twice = erode(&r, se(3), 2, BorderMode::Replicate).unwrap();
        let manual = erode(
            &erode(&r, se(3), 1, BorderMode::Replicate).unwrap(),
            se(3),
            1,
            BorderMode::Replicate,
        )
        .unwrap();
        assert_eq!(twice, manual);
        assert!(erode(&r, se(3), 0, BorderMode::Replicate).is_err());
    }
}
