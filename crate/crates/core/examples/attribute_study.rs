//! Builds the 4 x 4 x 5 attribute study and shows how variations share
//! everything except the studied level.

use glasstrack::procedural::{self, DemoSpec};
use glasstrack::seqplan::{build_attribute_study_plan, Attribute, BackgroundCorpus, GenerationParams, ObjectCatalog};

fn main() -> glasstrack::Result<()> {
    let dir = std::env::temp_dir().join("glasstrack_attribute_study");
    let spec = DemoSpec {
        backgrounds: 5,
        frames: 2,
        width: 32,
        height: 18,
    };
    let assets = procedural::write_demo_assets(&dir, &spec)?;
    let corpus = BackgroundCorpus::load(&assets.corpus)?;
    let catalog = ObjectCatalog::load(&assets.catalog)?;
    let plan = build_attribute_study_plan(7, &corpus, &catalog, &GenerationParams::default())?;
    println!("{} study sequences", plan.sequences.len());
    for attribute in Attribute::ALL {
        println!("{attribute}:");
        for c in plan.sequences.iter().filter(|c| {
            let cell = c.study.expect("study cell");
            cell.attribute == attribute && cell.variation == 0
        }) {
            println!("  {:<18} {:?}", c.id, c.attributes);
        }
    }
    Ok(())
}
