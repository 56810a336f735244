//! Diagnostic overlays: tinted ground-truth mask plus point crosses.

use std::collections::BTreeSet;

use image::{Rgb, RgbImage};

use crate::affordance::NormPoint;
use crate::error::{Error, Result};
use crate::raster::Mask;

/// half length of a cross arm, pixels
pub const CROSS_ARM: u32 = 3;
pub const TINT: [u8; 3] = [0, 160, 255];
pub const GT_CROSS: [u8; 3] = [255, 0, 0];
pub const PRED_CROSS: [u8; 3] = [255, 255, 0];

/// Pixels covered by a one-pixel-wide cross centered on the point, clipped
/// to the image.
pub fn cross_pixels(p: NormPoint, width: u32, height: u32) -> Vec<(u32, u32)> {
    let (cx, cy) = p.to_pixel(width, height);
    let mut out = vec![(cx, cy)];
    for d in 1..=CROSS_ARM {
        if cx >= d {
            out.push((cx - d, cy));
        }
        if cx + d < width {
            out.push((cx + d, cy));
        }
        if cy >= d {
            out.push((cx, cy - d));
        }
        if cy + d < height {
            out.push((cx, cy + d));
        }
    }
    out
}

fn blend(src: Rgb<u8>) -> Rgb<u8> {
    Rgb(std::array::from_fn(|k| ((2 * src[k] as u16 + TINT[k] as u16) / 3) as u8))
}

/// Tints mask pixels and draws ground-truth then predicted crosses over
/// them. All other pixels are copied unchanged.
pub fn render_overlay(image: &RgbImage, mask: Option<&Mask>, gt: &[NormPoint], pred: &[NormPoint]) -> Result<RgbImage> {
    let (w, h) = image.dimensions();
    let mut out = image.clone();
    if let Some(m) = mask {
        if (m.width(), m.height()) != (w, h) {
            return Err(Error::Invalid(format!(
                "mask {}x{} does not match image {w}x{h}",
                m.width(),
                m.height()
            )));
        }
        for (x, y) in m.pixels() {
            out.put_pixel(x, y, blend(*image.get_pixel(x, y)));
        }
    }
    for (points, color) in [(gt, GT_CROSS), (pred, PRED_CROSS)] {
        for &p in points {
            for (x, y) in cross_pixels(p, w, h) {
                out.put_pixel(x, y, Rgb(color));
            }
        }
    }
    Ok(out)
}

/// Union of every cross footprint, for audits against the source image.
pub fn cross_footprint(points: &[NormPoint], width: u32, height: u32) -> BTreeSet<(u32, u32)> {
    points.iter().flat_map(|&p| cross_pixels(p, width, height)).collect()
}
