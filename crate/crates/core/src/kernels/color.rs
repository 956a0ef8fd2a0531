use image::{DynamicImage, RgbImage};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Rec. 601 luma, `round(0.299 R + 0.587 G + 0.114 B)`, in exact integer
/// arithmetic (halves round up).
pub fn rgb_to_gray(rgb: &RgbImage) -> GrayImage {
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
        })
        .collect();
    GrayImage::from_vec(w, h, data).expect("dimensions come from the source image")
}

/// Thermal JPG (3-channel, 8-bit) to grayscale.
pub fn thermal_jpg_to_gray(img: &DynamicImage) -> Result<GrayImage> {
    match img {
        DynamicImage::ImageRgb8(rgb) => Ok(rgb_to_gray(rgb)),
        other => Err(Error::invalid(format!(
            "expected a 3-channel 8-bit image, got {:?}",
            other.color()
        ))),
    }
}
