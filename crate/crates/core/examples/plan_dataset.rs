//! Samples a dataset plan and prints its attribute mix.

use std::collections::BTreeMap;

use glasstrack::procedural::{self, DemoSpec};
use glasstrack::seqplan::{build_dataset_plan, BackgroundCorpus, GenerationParams, ObjectCatalog};

fn main() -> glasstrack::Result<()> {
    let dir = std::env::temp_dir().join("glasstrack_plan_dataset");
    let spec = DemoSpec {
        backgrounds: 40,
        frames: 2,
        width: 32,
        height: 18,
    };
    let assets = procedural::write_demo_assets(&dir, &spec)?;
    let corpus = BackgroundCorpus::load(&assets.corpus)?;
    let catalog = ObjectCatalog::load(&assets.catalog)?;

    let plan = build_dataset_plan(42, 40, &corpus, &catalog, &GenerationParams::default())?;
    let mut tags: BTreeMap<String, usize> = BTreeMap::new();
    for config in &plan.sequences {
        for tag in config.attributes.tags() {
            *tags.entry(tag).or_default() += 1;
        }
    }
    println!("{} sequences, {} frames", plan.sequences.len(), plan.total_frames());
    for (tag, n) in tags {
        println!("  {tag:<16} {n}");
    }
    let first = &plan.sequences[0];
    println!(
        "{}: {} on {}, scale {:.3}, {:?}",
        first.id, first.object_instance_id, first.background_id, first.object_scale, first.attributes
    );
    Ok(())
}
