//! Talk to a segmentation service over HTTP. A local stub that runs the
//! built-in baseline stands in for the real model server.

use std::time::Duration;

use firelabel::autopoint::{autolocate, AutopointConfig};
use firelabel::proposer::stub::StubServer;
use firelabel::proposer::ExternalProposer;
use firelabel::synth::{gen_scene, random_spec};

fn main() -> firelabel::Result<()> {
    let scene = gen_scene(&random_spec(7, 96, 72))?;
    let points = autolocate(&scene.temperature, &AutopointConfig::default())?;

    let stub = StubServer::spawn_baseline()?;
    println!("stub listening at {}", stub.endpoint());
    let cache = std::env::temp_dir().join("firelabel_proposer_cache");
    let proposer = ExternalProposer::new(stub.endpoint(), Duration::from_secs(30), 2)?.with_cache(&cache);
    let set = proposer.propose(&scene.thermal_rgb(), &points)?;
    for (k, p) in set.proposals.iter().enumerate() {
        println!("proposal {k}: {:>5} px, confidence {:.3}", p.mask.count_ones(), p.confidence);
    }
    drop(stub);
    // Served from the cache now that the stub is gone.
    let again = proposer.propose(&scene.thermal_rgb(), &points)?;
    assert_eq!(again.confidences(), set.confidences());
    println!("cached response reused from {}", cache.display());
    Ok(())
}
