//! Segmentation and temperature-accuracy metrics, per image and batched.

use firelabel::metrics::{aggregate_seg, aggregate_temp, seg_scores, temp_tolerance_accuracy};
use firelabel::synth::{gen_scene, random_spec};

fn main() -> firelabel::Result<()> {
    let mut seg = Vec::new();
    let mut temp = Vec::new();
    for seed in 0..6 {
        let scene = gen_scene(&random_spec(seed, 64, 48))?;
        // A crude predictor: threshold the noisy temperature.
        let pred = scene.temperature.map(|&t| t >= 120.0);
        let s = seg_scores(&pred, &scene.ground_truth)?;
        let shifted = scene.temperature.map(|&t| t + 30.0);
        // Off by 30 °C everywhere: inside ±50, outside ±25.
        let a = temp_tolerance_accuracy(&shifted, &scene.temperature, &scene.ground_truth, 25.0)?;
        let b = temp_tolerance_accuracy(&shifted, &scene.temperature, &scene.ground_truth, 50.0)?;
        println!("scene {seed}: mIoU {:.3}  mAcc {:.3}  ±25 {:.3}  ±50 {:.3}", s.miou, s.macc, a.fraction_within, b.fraction_within);
        seg.push(s);
        temp.push(a);
    }
    let agg = aggregate_seg(&seg, 4)?;
    println!("batched: mIoU {:.3}  mAcc {:.3}  ±25 {:?}", agg.miou, agg.macc, aggregate_temp(&temp, 4)?);
    Ok(())
}
