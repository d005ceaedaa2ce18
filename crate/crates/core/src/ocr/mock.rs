//! Deterministic synthetic engine: renders supported text onto a glyph-cell
//! grid and recognizes cells back by minimum Hamming distance against the
//! font, so closed-loop experiments run without an external binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::round_clamp_u8;
use crate::raster::Raster;

use super::font::{self, GLYPHS, GLYPH_H, GLYPH_W};

/// Each glyph pixel is drawn as a `SCALE`-square block, so one character cell
/// is `(5+1)*SCALE x (7+1)*SCALE` raster pixels. The scale keeps strokes two
/// pixels wide, which a 3x3 smoothing window can clean without erasing them.
pub const GLYPH_SCALE: usize = 2;
pub const CELL_W: usize = (GLYPH_W + 1) * GLYPH_SCALE;
pub const CELL_H: usize = (GLYPH_H + 1) * GLYPH_SCALE;

/// Degradations applied by the renderer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    /// Per-pixel probability of being flipped to pure black or white.
    pub salt_pepper_p: f64,
    /// Pulls foreground and background toward mid-gray; 1.0 is full contrast.
    pub contrast_scale: f64,
    /// Base paper value before contrast scaling.
    pub background: u8,
}

impl NoiseProfile {
    pub fn clean() -> Self {
        NoiseProfile { salt_pepper_p: 0.0, contrast_scale: 1.0, background: 255 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.salt_pepper_p) {
            return Err(Error::InvalidParameter(format!(
                "salt_pepper_p must be in [0,1], got {}",
                self.salt_pepper_p
            )));
        }
        if !(self.contrast_scale > 0.0 && self.contrast_scale <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contrast_scale must be in (0,1], got {}",
                self.contrast_scale
            )));
        }
        Ok(())
    }
}

/// Renders dark glyphs on a light background, one cell per character, then
/// applies contrast scaling and seeded salt-and-pepper flips. Deterministic
/// per `(text, noise, seed)`.
pub fn render_synthetic(text: &str, noise: &NoiseProfile, seed: u64) -> Result<Raster> {
    noise.validate()?;
    if text.is_empty() {
        return Err(Error::MalformedInput("cannot render empty text".into()));
    }
    let lines: Vec<Vec<usize>> = text
        .split('\n')
        .map(|line| {
            line.chars()
                .map(|c| {
                    font::glyph_index(c).ok_or_else(|| {
                        Error::MalformedInput(format!("unsupported character {c:?}"))
                    })
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let rows = lines.len();

    let c = noise.contrast_scale;
    let fg = round_clamp_u8(128.0 + (0.0 - 128.0) * c);
    let bg = round_clamp_u8(128.0 + (noise.background as f64 - 128.0) * c);

    let width = cols * CELL_W;
    let height = rows * CELL_H;
    let mut pixels = vec![bg; width * height];
    for (cy, line) in lines.iter().enumerate() {
        for (cx, &glyph) in line.iter().enumerate() {
            let rows_bits = &GLYPHS[glyph].1;
            for gy in 0..GLYPH_H {
                for gx in 0..GLYPH_W {
                    if rows_bits[gy] >> (GLYPH_W - 1 - gx) & 1 == 0 {
                        continue;
                    }
                    let x0 = cx * CELL_W + gx * GLYPH_SCALE;
                    let y0 = cy * CELL_H + gy * GLYPH_SCALE;
                    for dy in 0..GLYPH_SCALE {
                        for dx in 0..GLYPH_SCALE {
                            pixels[(y0 + dy) * width + x0 + dx] = fg;
                        }
                    }
                }
            }
        }
    }

    if noise.salt_pepper_p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for px in pixels.iter_mut() {
            if rng.gen::<f64>() < noise.salt_pepper_p {
                *px = if rng.gen::<bool>() { 255 } else { 0 };
            }
        }
    }
    Raster::new(width, height, pixels)
}

/// Template-matching recognizer over the cell grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockEngine {
    pub seed: u64,
    /// Cells whose best Hamming distance exceeds this (out of 35 template
    /// bits) emit a deterministic wrong character instead.
    pub reject_threshold: u32,
}

impl MockEngine {
    pub fn new(seed: u64) -> Self {
        MockEngine { seed, reject_threshold: 10 }
    }

    pub fn recognize(&self, r: &Raster) -> String {
        let cells_x = r.width() / CELL_W;
        let cells_y = r.height() / CELL_H;
        let masks: Vec<u64> = GLYPHS.iter().map(|&(_, rows)| font::mask(rows)).collect();
        let mut lines = Vec::with_capacity(cells_y);
        for cy in 0..cells_y {
            let mut line = String::with_capacity(cells_x);
            for cx in 0..cells_x {
                let bits = cell_bits(r, cx, cy);
                let (best_idx, best_dist) = masks
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| (i, (bits ^ m).count_ones()))
                    .min_by_key(|&(i, d)| (d, i))
                    .unwrap();
                let idx = if best_dist > self.reject_threshold {
                    let cell_index = (cy * cells_x + cx) as u64;
                    misread_index(self.seed, cell_index, bits, best_idx, masks.len())
                } else {
                    best_idx
                };
                line.push(GLYPHS[idx].0);
            }
            lines.push(line.trim_end().to_string());
        }
        let mut out = lines.join("\n");
        out.truncate(out.trim_end().len());
        out
    }
}

/// Extracts the 35-bit template of one cell: a template bit is ink when any
/// raster pixel of its block is dark.
fn cell_bits(r: &Raster, cx: usize, cy: usize) -> u64 {
    let mut bits = 0u64;
    for gy in 0..GLYPH_H {
        for gx in 0..GLYPH_W {
            let x0 = cx * CELL_W + gx * GLYPH_SCALE;
            let y0 = cy * CELL_H + gy * GLYPH_SCALE;
            'block: for dy in 0..GLYPH_SCALE {
                for dx in 0..GLYPH_SCALE {
                    if r.get(x0 + dx, y0 + dy) < 128 {
                        bits |= 1 << (gy * GLYPH_W + gx);
                        break 'block;
                    }
                }
            }
        }
    }
    bits
}

/// Deterministic wrong glyph for rejected cells, never the best match.
fn misread_index(seed: u64, cell_index: u64, bits: u64, best: usize, n: usize) -> usize {
    let mut h = fnv1a(seed.to_le_bytes(), 0xcbf29ce484222325);
    h = fnv1a(cell_index.to_le_bytes(), h);
    h = fnv1a(bits.to_le_bytes(), h);
    let k = (h % (n as u64 - 1)) as usize;
    if k >= best {
        k + 1
    } else {
        k
    }
}

fn fnv1a(bytes: [u8; 8], mut hash: u64) -> u64 {
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
