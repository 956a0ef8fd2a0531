//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls the library's kernels.
#![allow(dead_code)]

use std::path::Path;

use firelabel::dataset::{Decision, ImageRecord, Manifest};
use firelabel::raster::{BinaryMask, Raster};
use firelabel::synth::{corpus_stem, gen_scene, random_spec, write_scene};

/// Exhaustive Otsu: every split of the 256-bin histogram is scored by exact
/// rational comparison of `(n1*S0 - n0*S1)^2 / (n0*n1)`. Returns the lowest
/// best background bin, or `None` when no split has two non-empty classes.
pub fn brute_otsu_bin(values: &[f64], lo: f64, hi: f64) -> Option<usize> {
    let mut hist = [0u128; 256];
    for &v in values {
        let t = (v - lo) / (hi - lo) * 256.0;
        let b = if t.is_nan() || t < 0.0 { 0 } else { (t.floor() as usize).min(255) };
        hist[b] += 1;
    }
    let mut best: Option<(usize, u128, u128)> = None;
    for t in 0..255 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for (b, &c) in hist.iter().enumerate() {
            if b <= t {
                n0 += c;
                s0 += c * b as u128;
            } else {
                n1 += c;
                s1 += c * b as u128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (n1 * s0).abs_diff(n0 * s1);
        let (num, den) = (d * d, n0 * n1);
        match best {
            Some((_, bn, bd)) if num * bd <= bn * den => {}
            _ => best = Some((t, num, den)),
        }
    }
    best.map(|(t, _, _)| t)
}

/// Distance to the nearest edge pixel by exhaustive search.
pub fn brute_edt(edges: &BinaryMask) -> Raster<f64> {
    let (w, h) = edges.dims();
    let pts: Vec<(f64, f64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| *edges.get(x, y))
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    Raster::from_fn(w, h, |x, y| {
        pts.iter()
            .map(|(ex, ey)| ((x as f64 - ex).powi(2) + (y as f64 - ey).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    })
}

/// Reference Canny: direct 2-D Gaussian convolution with replicated borders,
/// Sobel, angle-based direction sectors, suppression that keeps the first of
/// two equal maxima along the gradient, a zeroed one-pixel frame, and
/// hysteresis iterated to a fixed point.
pub fn reference_canny(img: &[Vec<f64>], low: f64, high: f64, sigma: f64) -> Vec<Vec<bool>> {
    let h = img.len();
    let w = img[0].len();
    let at = |y: isize, x: isize, src: &Vec<Vec<f64>>| {
        let yy = y.clamp(0, h as isize - 1) as usize;
        let xx = x.clamp(0, w as isize - 1) as usize;
        src[yy][xx]
    };
    let r = (3.0 * sigma).ceil() as isize;
    let mut k2 = vec![vec![0.0; (2 * r + 1) as usize]; (2 * r + 1) as usize];
    let g1: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s1: f64 = g1.iter().sum();
    for i in 0..(2 * r + 1) as usize {
        for j in 0..(2 * r + 1) as usize {
            k2[i][j] = g1[i] / s1 * (g1[j] / s1);
        }
    }
    let src = img.to_vec();
    let mut blur = vec![vec![0.0; w]; h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    acc += k2[(dy + r) as usize][(dx + r) as usize] * at(y as isize + dy, x as isize + dx, &src);
                }
            }
            blur[y][x] = acc;
        }
    }
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let mut gx = vec![vec![0.0; w]; h];
    let mut gy = vec![vec![0.0; w]; h];
    let mut mag = vec![vec![0.0; w]; h];
    for y in 0..h {
        for x in 0..w {
            let (mut sx, mut sy) = (0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let v = at(y as isize + i as isize - 1, x as isize + j as isize - 1, &blur);
                    sx += kx[i][j] * v;
                    sy += kx[j][i] * v;
                }
            }
            gx[y][x] = sx;
            gy[y][x] = sy;
            mag[y][x] = (sx * sx + sy * sy).sqrt();
        }
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    let mut nms = vec![vec![0.0; w]; h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let m = mag[y][x];
            if m <= 0.0 {
                continue;
            }
            let mut deg = gy[y][x].atan2(gx[y][x]).to_degrees();
            if deg < 0.0 {
                deg += 180.0;
            }
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&deg) {
                (1, 0)
            } else if deg < 67.5 {
                (1, 1)
            } else if deg < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let before = mag[(y as isize - dy) as usize][(x as isize - dx) as usize];
            let after = mag[(y as isize + dy) as usize][(x as isize + dx) as usize];
            let keep_before = m > before || close(m, before);
            let keep_after = m > after && !close(m, after);
            if keep_before && keep_after {
                nms[y][x] = m;
            }
        }
    }
    let mut edge: Vec<Vec<bool>> = nms.iter().map(|row| row.iter().map(|&m| m > 0.0 && m >= high).collect()).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                if edge[y][x] || !(nms[y][x] > 0.0 && nms[y][x] >= low) {
                    continue;
                }
                let mut touch = false;
                for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        touch |= edge[yy][xx];
                    }
                }
                if touch {
                    edge[y][x] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return edge;
        }
    }
}

pub fn rows_of(grid: &Raster<f64>) -> Vec<Vec<f64>> {
    let (w, h) = grid.dims();
    (0..h).map(|y| (0..w).map(|x| *grid.get(x, y)).collect()).collect()
}

/// Confusion-matrix scores: (iou0, iou1, acc0, acc1).
pub fn confusion_scores(pred: &[bool], gt: &[bool]) -> (f64, f64, f64, f64) {
    let mut cm = [[0usize; 2]; 2];
    for (&p, &g) in pred.iter().zip(gt) {
        cm[g as usize][p as usize] += 1;
    }
    let iou = |c: usize| {
        let tp = cm[c][c];
        let fp = cm[1 - c][c];
        let fn_ = cm[c][1 - c];
        if tp + fp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fp + fn_) as f64 }
    };
    let acc = |c: usize| {
        let n = cm[c][0] + cm[c][1];
        if n == 0 { 1.0 } else { cm[c][c] as f64 / n as f64 }
    };
    (iou(0), iou(1), acc(0), acc(1))
}

/// Per-location (excluded, final) decisions of the published curation table.
pub const CURATION_TABLE: [(&str, usize, usize); 4] = [
    ("Shoetank", 554, 731),
    ("Sycan2A", 40, 324),
    ("Sycan2D", 33, 225),
    ("Willamette Valley", 0, 232),
];

/// Manifest whose decisions mirror the curation table, interleaved so that
/// locations and verdicts are not contiguous.
pub fn curation_manifest() -> Manifest {
    let per_loc: Vec<Vec<ImageRecord>> = CURATION_TABLE
        .iter()
        .map(|&(loc, excluded, accepted)| {
            let n = excluded + accepted;
            (0..n)
                .map(|i| {
                    let id = format!("{}_{i:04}", loc.replace(' ', ""));
                    let mut r = ImageRecord::new(
                        id.clone(),
                        loc,
                        format!("rgb/{id}.jpg").into(),
                        format!("thermal/{id}.jpg").into(),
                        format!("tiff/{id}.tif").into(),
                    );
                    // Exactly `excluded` exclusions, spread through the location.
                    r.decision = if (i * excluded) / n != ((i + 1) * excluded) / n {
                        Decision::Excluded
                    } else {
                        Decision::Accepted
                    };
                    r
                })
                .collect()
        })
        .collect();
    let mut records = Vec::new();
    let longest = per_loc.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..longest {
        for recs in &per_loc {
            if let Some(r) = recs.get(i) {
                records.push(r.clone());
            }
        }
    }
    Manifest::new(serde_json::json!({"fixture": "curation table"}), records).unwrap()
}

/// Writes `n` random scenes of `w`x`h` under `dir`.
pub fn write_corpus(dir: &Path, n: usize, w: usize, h: usize) {
    for i in 0..n {
        let scene = gen_scene(&random_spec(i as u64, w, h)).unwrap();
        write_scene(&scene, dir, &corpus_stem(i)).unwrap();
    }
}

/// Every file under `dir` as (relative path, bytes), sorted.
pub fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
