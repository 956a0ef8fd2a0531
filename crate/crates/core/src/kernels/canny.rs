//! Canny edge detection on temperature grids.
//!
//! Thresholds apply to the raw 3x3 Sobel response magnitude of the blurred
//! grid. Non-maximum suppression quantizes the gradient direction into four
//! sectors; a pixel survives if it is not below its backward neighbor and
//! strictly above its forward neighbor (relative tolerance `NMS_TIE_TOL`), so
//! a symmetric ridge yields a single-pixel line. The one-pixel image frame is
//! never an edge.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::kernels::gaussian_blur;
use crate::raster::{EdgeMap, Raster, TemperatureGrid};

const NMS_TIE_TOL: f64 = 1e-9;
const TAN_22_5: f64 = 0.414_213_562_373_095_03;
const TAN_67_5: f64 = 2.414_213_562_373_095;

pub struct Gradients {
    pub gx: Raster<f64>,
    pub gy: Raster<f64>,
    pub magnitude: Raster<f64>,
}

/// 3x3 Sobel gradients with clamp-to-border replication. `gy` is positive
/// when values increase downward.
pub fn sobel(grid: &Raster<f64>) -> Gradients {
    let (w, h) = grid.dims();
    let p = |x: usize, y: usize, dx: isize, dy: isize| grid.clamped(x as isize + dx, y as isize + dy);
    let gx = Raster::from_fn(w, h, |x, y| {
        (p(x, y, 1, -1) + 2.0 * p(x, y, 1, 0) + p(x, y, 1, 1))
            - (p(x, y, -1, -1) + 2.0 * p(x, y, -1, 0) + p(x, y, -1, 1))
    });
    let gy = Raster::from_fn(w, h, |x, y| {
        (p(x, y, -1, 1) + 2.0 * p(x, y, 0, 1) + p(x, y, 1, 1))
            - (p(x, y, -1, -1) + 2.0 * p(x, y, 0, -1) + p(x, y, 1, -1))
    });
    let magnitude = Raster::from_fn(w, h, |x, y| gx.get(x, y).hypot(*gy.get(x, y)));
    Gradients { gx, gy, magnitude }
}

/// Unit step `(dx, dy)` along the quantized gradient direction.
#[inline]
fn sector_step(gx: f64, gy: f64) -> (isize, isize) {
    let (ax, ay) = (gx.abs(), gy.abs());
    if ay < ax * TAN_22_5 {
        (1, 0)
    } else if ay >= ax * TAN_67_5 {
        (0, 1)
    } else if gx * gy > 0.0 {
        (1, 1)
    } else {
        (-1, 1)
    }
}

#[inline]
fn tol(a: f64, b: f64) -> f64 {
    NMS_TIE_TOL * a.abs().max(b.abs())
}

fn non_maximum_suppression(g: &Gradients) -> Raster<f64> {
    let (w, h) = g.magnitude.dims();
    let mut out = Raster::filled(w, h, 0.0);
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let m = *g.magnitude.get(x, y);
            if m <= 0.0 {
                continue;
            }
            let (dx, dy) = sector_step(*g.gx.get(x, y), *g.gy.get(x, y));
            let back = *g.magnitude.get((x as isize - dx) as usize, (y as isize - dy) as usize);
            let fwd = *g.magnitude.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            if m >= back - tol(m, back) && m > fwd + tol(m, fwd) {
                out.set(x, y, m);
            }
        }
    }
    out
}

fn hysteresis(nms: &Raster<f64>, low: f64, high: f64) -> EdgeMap {
    let (w, h) = nms.dims();
    let mut edges = EdgeMap::filled(w, h, false);
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let m = *nms.get(x, y);
            if m > 0.0 && m >= high {
                edges.set(x, y, true);
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                let m = *nms.get(nx, ny);
                if !*edges.get(nx, ny) && m > 0.0 && m >= low {
                    edges.set(nx, ny, true);
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    edges
}

/// Canny edges: Gaussian blur, Sobel, 4-sector NMS, 8-connected hysteresis.
pub fn canny(grid: &TemperatureGrid, low: f64, high: f64, sigma: f64) -> Result<EdgeMap> {
    if !(low >= 0.0) || !(low <= high) {
        return Err(Error::invalid(format!(
            "canny thresholds need 0 <= low <= high, got low={low} high={high}"
        )));
    }
    let blurred = gaussian_blur(grid, sigma)?;
    let gradients = sobel(&blurred);
    let thinned = non_maximum_suppression(&gradients);
    Ok(hysteresis(&thinned, low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gaussian_kernel;

    fn vertical_step(w: usize, h: usize, col: usize, cold: f64, hot: f64) -> TemperatureGrid {
        Raster::from_fn(w, h, |x, _| if x >= col { hot } else { cold })
    }

    #[test]
    fn constant_grid_has_no_edges() {
        let e = canny(&Raster::filled(16, 16, 250.0), 0.0, 10.0, 1.0).unwrap();
        assert_eq!(e.count_ones(), 0);
    }

    #[test]
    fn step_gives_single_column() {
        let g = vertical_step(32, 32, 16, 20.0, 420.0);
        let e = canny(&g, 100.0, 200.0, 1.0).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let expected = x == 16 && (1..31).contains(&y);
                assert_eq!(*e.get(x, y), expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn small_step_has_no_strong_pixels() {
        let k = gaussian_kernel(1.0);
        let c = k.len() / 2;
        // Blurred step difference across two columns is h * (w0 + w1); the
        // Sobel column weights sum to 4.
        let analytic_max = 4.0 * 50.0 * (k[c] + k[c + 1]);
        assert!(analytic_max < 200.0);
        let g = vertical_step(32, 32, 16, 20.0, 70.0);
        let grads = sobel(&gaussian_blur(&g, 1.0).unwrap());
        let max = grads.magnitude.as_slice().iter().cloned().fold(0.0, f64::max);
        assert!((max - analytic_max).abs() < 1e-9, "{max} vs {analytic_max}");
        let e = canny(&g, 100.0, 200.0, 1.0).unwrap();
        assert_eq!(e.count_ones(), 0);
    }

    #[test]
    fn rejects_inverted_thresholds() {
        let g = Raster::filled(8, 8, 0.0);
        assert!(canny(&g, 300.0, 200.0, 1.0).is_err());
        assert!(canny(&g, -1.0, 200.0, 1.0).is_err());
    }

    #[test]
    fn sector_quantization() {
        assert_eq!(sector_step(1.0, 0.0), (1, 0));
        assert_eq!(sector_step(0.0, 1.0), (0, 1));
        assert_eq!(sector_step(1.0, 1.0), (1, 1));
        assert_eq!(sector_step(-1.0, 1.0), (-1, 1));
        assert_eq!(sector_step(-1.0, -1.0), (1, 1));
    }
}
