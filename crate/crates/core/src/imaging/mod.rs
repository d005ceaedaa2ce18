//! Native implementations of the fifteen pre-processing operators over 8-bit
//! grayscale rasters, plus the dispatch that applies an operator under a
//! concrete parameter assignment.
//!
//! Every operator is a pure function from valid rasters to valid rasters of
//! the same dimensions, so callers may fan work out across threads freely.

pub mod morph;
pub mod smooth;
pub mod threshold;

pub use crate::raster::{BorderMode, Raster, StructuringElement};
pub use morph::{dilate, erode, morph_composite, MorphMode};
pub use smooth::{bilateral_filter, box_blur, gaussian_blur, gaussian_kernel, median_blur};
pub use threshold::{
    adaptive_threshold, otsu_threshold, simple_threshold, triangle_threshold, AdaptiveMethod,
    ThresholdType,
};

use crate::error::{Error, Result};
use crate::params::{Operator, ParamAssignment};

/// Shared rounding rule: round half away from zero, then clamp to `[0, 255]`.
#[inline]
pub fn round_clamp_u8(x: f64) -> u8 {
    let r = x.round();
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// Luma conversion `round(0.299 R + 0.587 G + 0.114 B)` from per-channel
/// planes of equal length.
pub fn to_grayscale(width: usize, height: usize, r: &[u8], g: &[u8], b: &[u8]) -> Result<Raster> {
    let n = width * height;
    if r.len() != n || g.len() != n || b.len() != n {
        return Err(Error::MalformedInput(format!(
            "channel lengths {}/{}/{} do not match {width}x{height}",
            r.len(),
            g.len(),
            b.len()
        )));
    }
    let pixels = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| {
            round_clamp_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        })
        .collect();
    Raster::new(width, height, pixels)
}

/// Applies `assignment.algorithm()` to a raster. Parameter codes are decoded
/// here; parity violations surface as errors so infeasible points never
/// silently produce an image.
pub fn apply(assignment: &ParamAssignment, raster: &Raster) -> Result<Raster> {
    let get = |name: &str| assignment.get(name);
    let as_u8 = |v: i64| v as u8;
    match assignment.algorithm() {
        Operator::SimpleThreshold => {
            let ttype = ThresholdType::from_code(get("type")?)?;
            Ok(simple_threshold(raster, as_u8(get("thresh")?), as_u8(get("maxValue")?), ttype))
        }
        Operator::OtsuThreshold => {
            let ttype = ThresholdType::from_code(get("type")?)?;
            Ok(otsu_threshold(raster, as_u8(get("maxValue")?), ttype).0)
        }
        Operator::TriangleThreshold => {
            let ttype = ThresholdType::from_code(get("type")?)?;
            Ok(triangle_threshold(raster, as_u8(get("maxValue")?), ttype).0)
        }
        Operator::AdaptiveThreshold => {
            let method = AdaptiveMethod::from_code(get("adaptiveMethod")?)?;
            let inverted = match get("thresholdType")? {
                0 => false,
                1 => true,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "thresholdType must be 0 or 1, got {other}"
                    )))
                }
            };
            adaptive_threshold(
                raster,
                as_u8(get("maxValue")?),
                method,
                inverted,
                get("blockSize")? as usize,
                get("c")?,
            )
        }
        Operator::BoxBlur => {
            let border = BorderMode::from_code(get("borderType")?)?;
            box_blur(raster, get("ksize")? as usize, border)
        }
        Operator::GaussianBlur => {
            let border = BorderMode::from_code(get("borderType")?)?;
            gaussian_blur(raster, get("ksize")? as usize, border)
        }
        Operator::MedianBlur => median_blur(raster, get("ksize")? as usize),
        Operator::BilateralFilter => bilateral_filter(
            raster,
            get("d")? as usize,
            get("sigmaColor")? as f64,
            get("sigmaSpace")? as f64,
        ),
        Operator::Erosion | Operator::Dilation => {
            let se = StructuringElement::new(get("kernel")? as usize)?;
            let border = BorderMode::from_code(get("borderType")?)?;
            let iterations = get("iterations")? as usize;
            if assignment.algorithm() == Operator::Erosion {
                erode(raster, se, iterations, border)
            } else {
                dilate(raster, se, iterations, border)
            }
        }
        Operator::Opening
        | Operator::Closing
        | Operator::MorphGradient
        | Operator::TopHat
        | Operator::BlackHat => {
            let mode = match assignment.algorithm() {
                Operator::Opening => MorphMode::Opening,
                Operator::Closing => MorphMode::Closing,
                Operator::MorphGradient => MorphMode::Gradient,
                Operator::TopHat => MorphMode::TopHat,
                _ => MorphMode::BlackHat,
            };
            let se = StructuringElement::new(get("kernel")? as usize)?;
            let border = BorderMode::from_code(get("borderType")?)?;
            morph_composite(raster, mode, se, get("iterations")? as usize, border)
        }
    }
}
