//! Process a few synthetic scenes and serve them for review.
//!
//! cargo run --example review_server, then e.g.
//! curl localhost:8080/items?status=pending
//! curl -X POST -d '{"decision":"accepted"}' localhost:8080/items/synth_0000/decision

use firelabel::pipeline::{self, PipelineConfig};
use firelabel::synth::{corpus_stem, gen_scene, random_spec, write_scene};

#[tokio::main]
async fn main() -> firelabel::Result<()> {
    let root = std::env::temp_dir().join("firelabel_review_example");
    let _ = std::fs::remove_dir_all(&root);
    for i in 0..5 {
        write_scene(&gen_scene(&random_spec(i, 128, 96))?, &root.join("synth"), &corpus_stem(i as usize))?;
    }
    let mut cfg = PipelineConfig::default();
    cfg.proposer.baseline = true;
    let out = root.join("out");
    tokio::task::block_in_place(|| pipeline::run(&root.join("synth"), &out, &cfg, None))?;
    let addr = "127.0.0.1:8080".parse().unwrap();
    println!("serving {} on http://{addr} (ctrl-c to stop)", out.join("manifest.jsonl").display());
    firelabel::review::serve(&out.join("manifest.jsonl"), addr).await
}
