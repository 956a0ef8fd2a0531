//! Place point prompts on a synthetic fire scene and draw them as ASCII.

use firelabel::autopoint::{autolocate, AutopointConfig};
use firelabel::radiometric::{calibrate, CalibrationPolicy};
use firelabel::synth::{gen_scene, Blob, BlobShape, SceneSpec};

fn main() -> firelabel::Result<()> {
    let spec = SceneSpec {
        width: 48,
        height: 24,
        background_temp: 25.0,
        blobs: vec![
            Blob { center: (14.0, 12.0), radius: 6.0, peak_temp: 420.0, shape: BlobShape::Square },
            Blob { center: (35.0, 11.0), radius: 8.0, peak_temp: 320.0, shape: BlobShape::Gaussian },
        ],
        noise_sigma: 3.0,
        seed: 1,
        fire_threshold: 100.0,
    };
    let scene = gen_scene(&spec)?;
    let grid = calibrate(&scene.temperature, &CalibrationPolicy::default());
    let points = autolocate(&grid, &AutopointConfig::default())?;
    println!("tau = {:.1} °C, {} positive, {} negative", points.tau, points.positives.len(), points.negatives.len());

    let mut canvas: Vec<Vec<char>> = (0..spec.height)
        .map(|y| (0..spec.width).map(|x| if *scene.ground_truth.get(x, y) { '#' } else { '.' }).collect())
        .collect();
    for p in &points.positives {
        canvas[p.y][p.x] = '+';
    }
    for p in &points.negatives {
        canvas[p.y][p.x] = '-';
    }
    for row in canvas {
        println!("{}", row.into_iter().collect::<String>());
    }
    Ok(())
}
