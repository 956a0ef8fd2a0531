//! PNG/JPEG helpers for masks, grayscale and RGB images.
//!
//! Masks and edge maps are persisted as single-channel 8-bit PNG holding
//! `{0, 255}`.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, Luma, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

fn image_err(e: image::ImageError) -> Error {
    Error::Image(e.to_string())
}

pub fn mask_to_luma(mask: &BinaryMask) -> image::GrayImage {
    let (w, h) = mask.dims();
    let data = mask.as_slice().iter().map(|&v| if v { 255 } else { 0 }).collect();
    image::GrayImage::from_raw(w as u32, h as u32, data).expect("buffer sized from mask")
}

/// Decodes a `{0, 255}` single-channel image into a mask. Any other value is
/// rejected so that masks are never silently re-thresholded.
pub fn luma_to_mask(img: &image::GrayImage) -> Result<BinaryMask> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut data = Vec::with_capacity(w * h);
    for (i, Luma([v])) in img.pixels().enumerate() {
        match v {
            0 => data.push(false),
            255 => data.push(true),
            other => {
                return Err(Error::Image(format!(
                    "mask pixel {i} has value {other}, expected 0 or 255"
                )))
            }
        }
    }
    BinaryMask::from_vec(w, h, data)
}

pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    mask_to_luma(mask)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(image_err)?;
    Ok(out.into_inner())
}

/// Decodes PNG bytes that must be single-channel 8-bit `{0, 255}`.
pub fn decode_mask_png(bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(image_err)?;
    match img {
        DynamicImage::ImageLuma8(g) => luma_to_mask(&g),
        other => Err(Error::Image(format!(
            "mask must be single-channel 8-bit, got {:?}",
            other.color()
        ))),
    }
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let bytes = encode_mask_png(mask)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask_png(&bytes)
}

pub fn gray_to_luma(img: &GrayImage) -> image::GrayImage {
    let (w, h) = img.dims();
    image::GrayImage::from_raw(w as u32, h as u32, img.as_slice().to_vec())
        .expect("buffer sized from image")
}

pub fn write_gray(img: &GrayImage, path: &Path) -> Result<()> {
    gray_to_luma(img)
        .save_with_format(path, ImageFormat::Png)
        .map_err(image_err)
}

pub fn write_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png).map_err(image_err)
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(image_err)?;
    Ok(out.into_inner())
}

/// Reads any PNG/JPEG as an 8-bit RGB image. Only images that already carry
/// three 8-bit channels are accepted.
pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    match img {
        DynamicImage::ImageRgb8(rgb) => Ok(rgb),
        other => Err(Error::Image(format!(
            "{}: expected 3-channel 8-bit image, got {:?}",
            path.display(),
            other.color()
        ))),
    }
}

/// Reads an image and reports its dimensions without caring about channels.
pub fn image_dims(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = image::image_dimensions(path)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    Ok((w as usize, h as usize))
}
