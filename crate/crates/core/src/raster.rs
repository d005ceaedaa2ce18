//! 8-bit grayscale rasters and the border conventions shared by every
//! operator in this crate.

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image. The pixel type keeps every value in
/// `[0, 255]` by construction; the length invariant is checked on creation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedInput(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::MalformedInput(format!(
                "raster of {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Raster { width, height, pixels })
    }

    /// Constant-valued raster.
    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self> {
        Raster::new(width, height, vec![value; width * height])
    }

    /// Builds a raster by evaluating `f(x, y)` over the grid.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Raster::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Photometric inversion `255 - p`, used by the erode/dilate duality.
    pub fn invert(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| 255 - p).collect(),
        }
    }

    /// Samples at signed coordinates under a border mode. `None` means the
    /// mode supplies no sample there (isolated) or asks for the constant
    /// fill value (constant); callers pick the fill appropriate to the
    /// operator (0 for linear filters, the min/max identity for morphology).
    #[inline]
    pub fn sample(&self, x: isize, y: isize, mode: BorderMode) -> Option<u8> {
        let sx = border_index(x, self.width, mode)?;
        let sy = border_index(y, self.height, mode)?;
        Some(self.get(sx, sy))
    }
}

/// Border extrapolation modes, numbered as the parameter tables do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BorderMode {
    /// Out-of-image samples take a fixed fill value.
    Constant,
    /// `aaaa|abcd|dddd`
    Replicate,
    /// `dcba|abcd|dcba` (edge pixel duplicated)
    Reflect,
    /// `dcb|abcd|cba` (edge pixel not duplicated; the default, code 3)
    Reflect101,
    /// Windows shrink to the pixels actually inside the image.
    Isolated,
}

impl BorderMode {
    pub const ALL: [BorderMode; 5] = [
        BorderMode::Constant,
        BorderMode::Replicate,
        BorderMode::Reflect,
        BorderMode::Reflect101,
        BorderMode::Isolated,
    ];

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(BorderMode::Constant),
            1 => Ok(BorderMode::Replicate),
            2 => Ok(BorderMode::Reflect),
            3 => Ok(BorderMode::Reflect101),
            4 => Ok(BorderMode::Isolated),
            other => Err(Error::InvalidParameter(format!(
                "borderType must be in 0..=4, got {other}"
            ))),
        }
    }

    pub fn code(self) -> i64 {
        match self {
            BorderMode::Constant => 0,
            BorderMode::Replicate => 1,
            BorderMode::Reflect => 2,
            BorderMode::Reflect101 => 3,
            BorderMode::Isolated => 4,
        }
    }
}

/// Maps a possibly out-of-range coordinate onto a source index, or `None`
/// when the mode supplies no in-image sample (constant, isolated).
pub fn border_index(i: isize, n: usize, mode: BorderMode) -> Option<usize> {
    let len = n as isize;
    if (0..len).contains(&i) {
        return Some(i as usize);
    }
    match mode {
        BorderMode::Constant | BorderMode::Isolated => None,
        BorderMode::Replicate => Some(i.clamp(0, len - 1) as usize),
        BorderMode::Reflect => {
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i - 1;
                } else if i >= len {
                    i = 2 * len - 1 - i;
                } else {
                    return Some(i as usize);
                }
            }
        }
        BorderMode::Reflect101 => {
            if len == 1 {
                return Some(0);
            }
            let mut i = i;
            loop {
                if i < 0 {
                    i = -i;
                } else if i >= len {
                    i = 2 * len - 2 - i;
                } else {
                    return Some(i as usize);
                }
            }
        }
    }
}

/// Rectangular all-ones structuring element of side `size`, anchored at the
/// center cell (`size / 2` on each axis, which also covers even sizes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    size: usize,
}

impl StructuringElement {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("kernel size must be >= 1".into()));
        }
        Ok(StructuringElement { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn anchor(&self) -> usize {
        self.size / 2
    }
}
