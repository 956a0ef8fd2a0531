//! Row-major 2-D rasters shared by every pipeline stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense row-major raster. Pixel `(x, y)` is column `x`, row `y`, origin
/// top-left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Per-pixel temperature in degrees Celsius.
pub type TemperatureGrid = Raster<f64>;
/// 8-bit intensity image.
pub type GrayImage = Raster<u8>;
/// Foreground (`true`, fire) / background (`false`) labeling.
pub type BinaryMask = Raster<bool>;
/// Thin edge pixels produced by Canny.
pub type EdgeMap = Raster<bool>;
/// Euclidean distance (pixels) to the nearest edge pixel.
pub type DistanceField = Raster<f64>;

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "raster of {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index_of(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        let w = self.width;
        self.data[y * w + x] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Raster<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T: Copy> Raster<T> {
    /// Value at `(x, y)` with coordinates clamped to the border.
    #[inline]
    pub fn clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }
}

impl BinaryMask {
    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn complement(&self) -> BinaryMask {
        self.map(|&v| !v)
    }

    /// Is every foreground pixel of `self` also foreground in `other`?
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(&a, &b)| !a || b)
    }
}

/// Anything whose pixels can be read as real samples.
pub trait Samples {
    fn dims(&self) -> (usize, usize);
    fn sample(&self, index: usize) -> f64;
    fn sample_count(&self) -> usize {
        let (w, h) = self.dims();
        w * h
    }
}

impl Samples for Raster<f64> {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
    fn sample(&self, index: usize) -> f64 {
        self.data[index]
    }
}

impl Samples for Raster<u8> {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
    fn sample(&self, index: usize) -> f64 {
        f64::from(self.data[index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Raster::from_vec(0, 3, Vec::<u8>::new()).is_err());
        assert!(Raster::from_vec(2, 2, vec![1u8; 3]).is_err());
    }

    #[test]
    fn clamped_reads_replicate_border() {
        let r = Raster::from_vec(2, 2, vec![1u8, 2, 3, 4]).unwrap();
        assert_eq!(r.clamped(-5, -5), 1);
        assert_eq!(r.clamped(9, 0), 2);
        assert_eq!(r.clamped(1, 9), 4);
    }

    #[test]
    fn subset_relation() {
        let a = Raster::from_vec(2, 1, vec![true, false]).unwrap();
        let b = Raster::from_vec(2, 1, vec![true, true]).unwrap();
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }
}
