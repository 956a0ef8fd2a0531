use image::{Rgb, RgbImage};

use crate::kernels::dilate3x3;
use crate::raster::{BinaryMask, Raster, TemperatureGrid};

/// Breakpoints `(x, y_left, y_right)` of the jet colormap, per channel.
const JET_RED: &[(f64, f64, f64)] = &[(0.0, 0.0, 0.0), (0.35, 0.0, 0.0), (0.66, 1.0, 1.0), (0.89, 1.0, 1.0), (1.0, 0.5, 0.5)];
const JET_GREEN: &[(f64, f64, f64)] = &[
    (0.0, 0.0, 0.0),
    (0.125, 0.0, 0.0),
    (0.375, 1.0, 1.0),
    (0.64, 1.0, 1.0),
    (0.91, 0.0, 0.0),
    (1.0, 0.0, 0.0),
];
const JET_BLUE: &[(f64, f64, f64)] = &[(0.0, 0.5, 0.5), (0.11, 1.0, 1.0), (0.34, 1.0, 1.0), (0.65, 0.0, 0.0), (1.0, 0.0, 0.0)];

pub const BOUNDARY_ON_RGB: Rgb<u8> = Rgb([0, 255, 0]);
pub const BOUNDARY_ON_TIFF: Rgb<u8> = Rgb([255, 255, 255]);

fn channel(segments: &[(f64, f64, f64)]) -> [u8; 256] {
    let n = 256usize;
    let xs: Vec<f64> = segments.iter().map(|s| s.0 * (n - 1) as f64).collect();
    let mut out = [0u8; 256];
    for (i, slot) in out.iter_mut().enumerate() {
        let v = if i == 0 {
            segments[0].2
        } else if i == n - 1 {
            segments[segments.len() - 1].1
        } else {
            let xi = i as f64;
            let j = xs.iter().position(|&x| x >= xi).expect("last breakpoint is 255");
            let d = (xi - xs[j - 1]) / (xs[j] - xs[j - 1]);
            d * (segments[j].1 - segments[j - 1].2) + segments[j - 1].2
        };
        *slot = (v.clamp(0.0, 1.0) * 255.0) as u8;
    }
    out
}

/// The 256-entry jet lookup table.
pub fn jet_lut() -> [[u8; 3]; 256] {
    let (r, g, b) = (channel(JET_RED), channel(JET_GREEN), channel(JET_BLUE));
    std::array::from_fn(|i| [r[i], g[i], b[i]])
}

/// Maps `[lo, hi]` onto the jet table; values outside saturate.
pub fn render_jet(grid: &TemperatureGrid, lo: f64, hi: f64) -> RgbImage {
    let lut = jet_lut();
    let (w, h) = grid.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let t = (grid.get(x as usize, y as usize) - lo) / (hi - lo);
        let i = ((t * 256.0).floor().max(0.0) as usize).min(255);
        Rgb(lut[i])
    })
}

pub fn gray_to_rgb(gray: &Raster<u8>) -> RgbImage {
    let (w, h) = gray.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let g = *gray.get(x as usize, y as usize);
        Rgb([g, g, g])
    })
}

/// Nearest-neighbour resize, used when the RGB frame has another size than
/// the mask.
pub fn resize_mask(mask: &BinaryMask, width: usize, height: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    if (w, h) == (width, height) {
        return mask.clone();
    }
    Raster::from_fn(width, height, |x, y| *mask.get(x * w / width, y * h / height))
}

/// Paints the outer boundary of `mask` (`dilate(mask) - mask`) onto `base`.
pub fn boundary_overlay(base: &RgbImage, mask: &BinaryMask, color: Rgb<u8>) -> RgbImage {
    let (w, h) = (base.width() as usize, base.height() as usize);
    let mask = resize_mask(mask, w, h);
    let ring = dilate3x3(&mask);
    let mut out = base.clone();
    for y in 0..h {
        for x in 0..w {
            if *ring.get(x, y) && !*mask.get(x, y) {
                out.put_pixel(x as u32, y as u32, color);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_endpoints() {
        let lut = jet_lut();
        assert_eq!(lut[0], [0, 0, 127]);
        assert_eq!(lut[255], [127, 0, 0]);
    }

    #[test]
    fn overlay_marks_outer_ring_only() {
        let mask = Raster::from_fn(7, 7, |x, y| (2..5).contains(&x) && (2..5).contains(&y));
        let base = RgbImage::from_pixel(7, 7, Rgb([10, 10, 10]));
        let out = boundary_overlay(&base, &mask, BOUNDARY_ON_RGB);
        let painted = out.pixels().filter(|p| **p == BOUNDARY_ON_RGB).count();
        assert_eq!(painted, 25 - 9);
        assert_eq!(*out.get_pixel(3, 3), Rgb([10, 10, 10]));
    }

    #[test]
    fn jet_render_saturates() {
        let g = Raster::from_vec(3, 1, vec![-5.0, 250.0, 900.0]).unwrap();
        let img = render_jet(&g, 0.0, 500.0);
        let lut = jet_lut();
        assert_eq!(img.get_pixel(0, 0).0, lut[0]);
        assert_eq!(img.get_pixel(1, 0).0, lut[128]);
        assert_eq!(img.get_pixel(2, 0).0, lut[255]);
    }
}
