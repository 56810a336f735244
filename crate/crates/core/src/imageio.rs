//! PNG encoding of render buffers, masks and prompted images.

use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{FrameBuffers, Mask};

fn encode(pixels: &[u8], width: u32, height: u32, color: ExtendedColorType) -> Vec<u8> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(pixels, width, height, color)
        .expect("buffer length matches dimensions");
    out
}

pub fn rgb_image(fb: &FrameBuffers) -> Result<RgbImage> {
    let rgb = fb
        .rgb
        .as_ref()
        .ok_or_else(|| Error::Invalid("frame has no color buffer".into()))?;
    let raw: Vec<u8> = rgb.iter().flatten().copied().collect();
    Ok(RgbImage::from_raw(fb.width, fb.height, raw).expect("color buffer matches dimensions"))
}

pub fn encode_rgb(img: &RgbImage) -> Vec<u8> {
    encode(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
}

/// 8-bit grayscale, 255 inside.
pub fn encode_mask(mask: &Mask) -> Vec<u8> {
    let (w, h) = (mask.width(), mask.height());
    let mut px = vec![0u8; w as usize * h as usize];
    for (x, y) in mask.pixels() {
        px[y as usize * w as usize + x as usize] = 255;
    }
    encode(&px, w, h, ExtendedColorType::L8)
}

fn encode_l16(values: impl Iterator<Item = u16>, width: u32, height: u32) -> Vec<u8> {
    let bytes: Vec<u8> = values.flat_map(u16::to_ne_bytes).collect();
    encode(&bytes, width, height, ExtendedColorType::L16)
}

/// Depth in millimeters as 16-bit grayscale, 0 where invalid.
pub fn encode_depth_mm(fb: &FrameBuffers) -> Vec<u8> {
    let mm = fb.depth_map.iter().map(|&d| {
        if d > 0.0 {
            (d * 1000.0).round().clamp(1.0, u16::MAX as f64) as u16
        } else {
            0
        }
    });
    encode_l16(mm, fb.width, fb.height)
}

/// Instance ids as 16-bit grayscale.
pub fn encode_instances(fb: &FrameBuffers) -> Result<Vec<u8>> {
    if let Some(&id) = fb.instance_map.iter().find(|&&id| id > u16::MAX as u32) {
        return Err(Error::Invalid(format!("instance id {id} does not fit 16 bits")));
    }
    Ok(encode_l16(fb.instance_map.iter().map(|&id| id as u16), fb.width, fb.height))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<image::DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    Ok(open(path)?.into_rgb8())
}

/// Any non-zero luma counts as inside.
pub fn read_mask(path: &Path) -> Result<Mask> {
    let img = open(path)?.into_luma8();
    Ok(Mask::from_fn(img.width(), img.height(), |x, y| img.get_pixel(x, y).0[0] > 0))
}

pub fn image_dimensions(path: &Path) -> Result<(u32, u32)> {
    image::image_dimensions(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_depth_mm(path: &Path) -> Result<Vec<u16>> {
    Ok(open(path)?.into_luma16().into_raw())
}
