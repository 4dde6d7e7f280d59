//! Plans and renders one short sequence with a distractor and occluder
//! stripes, then prints its ground truth.
//!
//! ```text
//! cargo run --release --example render_sequence -- out_dir
//! ```

use std::path::PathBuf;

use glasstrack::annotate;
use glasstrack::procedural::{self, DemoSpec};
use glasstrack::render::{self, RenderSettings};
use glasstrack::seqplan::{build_dataset_plan, BackgroundCorpus, GenerationParams, ObjectCatalog};

fn main() -> glasstrack::Result<()> {
    let root = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("glasstrack_render_sequence"));
    let spec = DemoSpec {
        backgrounds: 2,
        frames: 20,
        ..DemoSpec::default()
    };
    let assets = procedural::write_demo_assets(&root.join("assets"), &spec)?;
    let corpus = BackgroundCorpus::load(&assets.corpus)?;
    let catalog = ObjectCatalog::load(&assets.catalog)?;
    let params = GenerationParams {
        n_frames: 20,
        distractor_probability: 1.0,
        occlusion_probability: 1.0,
        ..GenerationParams::default()
    };
    let plan = build_dataset_plan(5, 1, &corpus, &catalog, &params)?;
    let config = &plan.sequences[0];
    println!("{:?}", config.attributes);

    let out = root.join(&config.id);
    let result = render::render_sequence(config, &corpus, &catalog, &out, &RenderSettings::default())?;
    for a in result.annotations.iter().step_by(4) {
        println!(
            "frame {:2}  target {}  distractor {}",
            a.frame_index,
            annotate::format_box(a.target_box),
            annotate::format_box(a.distractor_box)
        );
    }
    println!("frames, masks and ground truth in {}", out.display());
    Ok(())
}
