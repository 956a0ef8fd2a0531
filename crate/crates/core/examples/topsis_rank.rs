//! Rank three candidate masks with TOPSIS.

use firelabel::topsis::{mask_criteria, topsis_rank, DecisionMatrix, DEFAULT_WEIGHTS};

fn main() -> firelabel::Result<()> {
    // iou_otsu, iou_thermal, temp_diff (cost), confidence, ssim
    let rows = vec![
        vec![0.82, 0.75, 3.2, 0.91, 0.88],
        vec![0.64, 0.93, 12.5, 0.72, 0.70],
        vec![0.90, 0.58, 0.8, 0.66, 0.93],
    ];
    let specs = mask_criteria(DEFAULT_WEIGHTS);
    let m = DecisionMatrix::new(rows, specs.clone())?;
    let r = topsis_rank(&m)?;
    for (i, c) in r.closeness.iter().enumerate() {
        let mark = if i == r.chosen_index { "  <- chosen" } else { "" };
        println!("mask {i}: C = {c:.6}{mark}");
    }

    let heavy_thermal = mask_criteria([0.05, 0.8, 0.05, 0.05, 0.05]);
    let m2 = DecisionMatrix::new(m.values().to_vec(), heavy_thermal)?;
    println!("with thermal agreement weighted 0.8: mask {}", topsis_rank(&m2)?.chosen_index);
    println!("criteria: {}", specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", "));
    Ok(())
}
