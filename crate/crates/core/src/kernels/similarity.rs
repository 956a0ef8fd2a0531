//! Mask overlap (IoU) and windowed structural similarity (SSIM).

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

/// Side of the square SSIM window (stride 1, border windows dropped).
pub const SSIM_WINDOW: usize = 8;
const DYNAMIC_RANGE: f64 = 255.0;

/// `|a ∧ b| / |a ∨ b|`; two empty masks score 1.0.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.same_dims(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Summed-area table with one row/column of zero padding.
struct Integral {
    stride: usize,
    data: Vec<i64>,
}

impl Integral {
    fn new(w: usize, h: usize, f: impl Fn(usize) -> i64) -> Self {
        let stride = w + 1;
        let mut data = vec![0i64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0i64;
            for x in 0..w {
                row += f(y * w + x);
                data[(y + 1) * stride + x + 1] = data[y * stride + x + 1] + row;
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn window(&self, x: usize, y: usize, n: usize) -> i64 {
        let s = self.stride;
        self.data[(y + n) * s + x + n] - self.data[y * s + x + n] - self.data[(y + n) * s + x]
            + self.data[y * s + x]
    }
}

/// Mean SSIM over all 8x8 windows, population statistics, L = 255.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_dims(b)?;
    let (w, h) = a.dims();
    let n = SSIM_WINDOW;
    if w < n || h < n {
        return Err(Error::invalid(format!(
            "ssim needs images of at least {n}x{n}, got {w}x{h}"
        )));
    }
    let (pa, pb) = (a.as_slice(), b.as_slice());
    let sa = Integral::new(w, h, |i| pa[i] as i64);
    let sb = Integral::new(w, h, |i| pb[i] as i64);
    let saa = Integral::new(w, h, |i| (pa[i] as i64).pow(2));
    let sbb = Integral::new(w, h, |i| (pb[i] as i64).pow(2));
    let sab = Integral::new(w, h, |i| pa[i] as i64 * pb[i] as i64);

    let c1 = (0.01 * DYNAMIC_RANGE).powi(2);
    let c2 = (0.03 * DYNAMIC_RANGE).powi(2);
    let count = (n * n) as i64;
    let norm = (count * count) as f64;

    let mut total = 0.0;
    for y in 0..=h - n {
        for x in 0..=w - n {
            let (xa, xb) = (sa.window(x, y, n), sb.window(x, y, n));
            // Exact integer numerators: N*Σab - Σa*Σb etc.
            let var_a = (count * saa.window(x, y, n) - xa * xa) as f64 / norm;
            let var_b = (count * sbb.window(x, y, n) - xb * xb) as f64 / norm;
            let cov = (count * sab.window(x, y, n) - xa * xb) as f64 / norm;
            let (mu_a, mu_b) = (xa as f64 / count as f64, xb as f64 / count as f64);
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    }
    Ok(total / ((w - n + 1) * (h - n + 1)) as f64)
}

/// SSIM of two masks rendered as `{0, 255}` images.
pub fn ssim_masks(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let to_gray = |m: &BinaryMask| m.map(|&v| if v { 255u8 } else { 0 });
    ssim(&to_gray(a), &to_gray(b))
}
