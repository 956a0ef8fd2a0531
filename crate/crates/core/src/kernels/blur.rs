use crate::error::{Error, Result};
use crate::raster::Raster;

/// Normalized 1-D Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian convolution with clamp-to-border replication.
pub fn gaussian_blur(grid: &Raster<f64>, sigma: f64) -> Result<Raster<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = grid.dims();

    let horizontal: Raster<f64> = Raster::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * grid.clamped(x as isize + i as isize - radius, y as isize))
            .sum()
    });
    Ok(Raster::from_fn(w, h, |x, y| -> f64 {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal.clamped(x as isize, y as isize + i as isize - radius))
            .sum()
    }))
}
