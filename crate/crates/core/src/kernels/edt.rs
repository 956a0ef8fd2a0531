//! Exact Euclidean distance transform (two separable passes of the lower
//! envelope of parabolas).

use crate::raster::{DistanceField, EdgeMap};

/// Distance reported everywhere when the edge map has no edge pixels.
pub const NO_EDGE_DISTANCE: f64 = f64::INFINITY;

// Stand-in for "no site" inside the 1-D passes; large but finite so the
// parabola intersections stay well defined.
const FAR: f64 = 1e20;

/// Squared distance transform of a sampled function, in place.
fn transform_1d(f: &mut [f64], v: &mut [usize], z: &mut [f64], out: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *slot = d * d + f[p];
    }
}

pub fn euclidean_distance_transform(edges: &EdgeMap) -> DistanceField {
    let (w, h) = edges.dims();
    if edges.count_ones() == 0 {
        return DistanceField::filled(w, h, NO_EDGE_DISTANCE);
    }
    let mut sq: Vec<f64> = edges
        .as_slice()
        .iter()
        .map(|&e| if e { 0.0 } else { FAR })
        .collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for x in 0..w {
        for y in 0..h {
            f[y] = sq[y * w + x];
        }
        transform_1d(&mut f[..h], &mut v[..h], &mut z[..h + 1], &mut out[..h]);
        for y in 0..h {
            sq[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&sq[y * w..(y + 1) * w]);
        transform_1d(&mut f[..w], &mut v[..w], &mut z[..w + 1], &mut out[..w]);
        sq[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    DistanceField::from_vec(w, h, sq.into_iter().map(f64::sqrt).collect())
        .expect("dimensions come from the edge map")
}
