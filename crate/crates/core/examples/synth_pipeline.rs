//! Generate a synthetic corpus, run the full pipeline with the baseline
//! proposer and score the chosen masks against ground truth.
//!
//! cargo run --release --example synth_pipeline [count]

use firelabel::dataset::counts;
use firelabel::imageio::read_mask;
use firelabel::kernels::iou;
use firelabel::pipeline::{self, PipelineConfig};
use firelabel::synth::{corpus_stem, gen_scene, random_spec, write_scene};

fn main() -> firelabel::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let root = std::env::temp_dir().join("firelabel_synth_example");
    let _ = std::fs::remove_dir_all(&root);
    for i in 0..n {
        write_scene(&gen_scene(&random_spec(i as u64, 128, 96))?, &root.join("synth"), &corpus_stem(i))?;
    }
    let mut cfg = PipelineConfig::default();
    cfg.proposer.baseline = true;
    let t = std::time::Instant::now();
    let (manifest, summary, warnings) = pipeline::run(&root.join("synth"), &root.join("out"), &cfg, None)?;
    println!("{} records in {:.2?}, chosen histogram {:?}", summary.records, t.elapsed(), summary.chosen_histogram);
    for w in warnings {
        println!("warning: {w}");
    }
    let mut ious = Vec::new();
    for r in &manifest.records {
        let gt = read_mask(&root.join("synth/gt").join(format!("{}.png", r.id)))?;
        if let Some(m) = &r.mask_path {
            ious.push(iou(&read_mask(m)?, &gt)?);
        }
    }
    let good = ious.iter().filter(|&&v| v >= 0.9).count();
    println!("IoU >= 0.9 on {good}/{}; mean {:.3}", ious.len(), ious.iter().sum::<f64>() / ious.len() as f64);
    print!("{}", counts(&manifest));
    println!("outputs in {}", root.join("out").display());
    Ok(())
}
