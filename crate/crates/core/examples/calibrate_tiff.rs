//! Clip a radiometric TIFF to the sensor range and report saturation.
//!
//! cargo run --example calibrate_tiff [path.tif]

use firelabel::radiometric::{calibrate, grid_stats, load_tiff, saturation_report, write_tiff, CalibrationPolicy, LoadOptions};
use firelabel::synth::{gen_scene, random_spec};

fn main() -> firelabel::Result<()> {
    let tmp = std::env::temp_dir().join("firelabel_calibrate_example.tif");
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            write_tiff(&gen_scene(&random_spec(4, 64, 48))?.temperature, &tmp)?;
            tmp
        }
    };
    let policy = CalibrationPolicy::default();
    let raw = load_tiff(&path, &LoadOptions::default())?;
    let sat = saturation_report(&raw, &policy);
    let stats = grid_stats(&calibrate(&raw, &policy), &policy);
    println!("{}x{} from {}", raw.width(), raw.height(), path.display());
    println!("min {:.1}  max {:.1}  mean {:.1} °C", stats.min, stats.max, stats.mean);
    println!(
        "{} px above {} °C ({:.2}%), {} px at or above {} °C",
        sat.pixels_above_caution,
        policy.caution_threshold,
        100.0 * sat.fraction_caution,
        sat.pixels_at_or_above_clip_max,
        policy.clip_max
    );
    Ok(())
}
