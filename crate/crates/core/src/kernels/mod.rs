//! Classical image-processing primitives composed by the labeling pipeline.

mod blur;
mod canny;
mod color;
mod edt;
mod morphology;
mod otsu;
mod similarity;

pub use blur::{gaussian_blur, gaussian_kernel};
pub use canny::{canny, sobel, Gradients};
pub use color::{rgb_to_gray, thermal_jpg_to_gray};
pub use edt::{euclidean_distance_transform, NO_EDGE_DISTANCE};
pub use morphology::{boundary, dilate3x3, erode3x3};
pub use otsu::{histogram_bin, otsu_histogram, otsu_threshold, OtsuResult, OTSU_BINS};
pub use similarity::{iou, ssim, ssim_masks, SSIM_WINDOW};

use crate::raster::{BinaryMask, Samples};

/// Foreground wherever `value >= threshold`.
pub fn binarize<S: Samples>(input: &S, threshold: f64) -> BinaryMask {
    let (w, h) = input.dims();
    let data = (0..input.sample_count())
        .map(|i| input.sample(i) >= threshold)
        .collect();
    BinaryMask::from_vec(w, h, data).expect("dimensions come from a valid raster")
}
