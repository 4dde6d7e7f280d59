//! Writes a procedural object catalog and background corpus.
//!
//! ```text
//! cargo run --example make_demo_assets -- demo_assets
//! ```

use std::path::PathBuf;

use glasstrack::procedural::{self, DemoSpec};
use glasstrack::seqplan::{BackgroundCorpus, ObjectCatalog};

fn main() -> glasstrack::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("glasstrack_demo_assets"));
    let assets = procedural::write_demo_assets(&dir, &DemoSpec::default())?;
    let corpus = BackgroundCorpus::load(&assets.corpus)?;
    let catalog = ObjectCatalog::load(&assets.catalog)?;
    println!("{} backgrounds -> {}", corpus.len(), assets.corpus.display());
    for (ty, instances) in catalog.by_type() {
        let ids: Vec<&str> = instances.iter().map(|e| e.instance_id.as_str()).collect();
        println!("  {ty:<9} {}", ids.join(", "));
    }
    println!("catalog -> {}", assets.catalog.display());
    Ok(())
}
