use crate::raster::BinaryMask;

fn neighborhood(mask: &BinaryMask, want_all: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let mut acc = want_all;
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                let v = *mask.get(nx, ny);
                if want_all {
                    acc &= v;
                } else {
                    acc |= v;
                }
            }
        }
        acc
    })
}

/// One pass of 3x3 erosion; pixels outside the image are ignored.
pub fn erode3x3(mask: &BinaryMask) -> BinaryMask {
    neighborhood(mask, true)
}

/// One pass of 3x3 dilation; pixels outside the image are ignored.
pub fn dilate3x3(mask: &BinaryMask) -> BinaryMask {
    neighborhood(mask, false)
}

/// Outer boundary ring: `dilate(mask) − mask`.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let grown = dilate3x3(mask);
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        *grown.get(x, y) && !*mask.get(x, y)
    })
}
