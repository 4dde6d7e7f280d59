//! Draws a 5:3 transparent/opaque training batch from two sample indices.

use glasstrack::rng::seeded;
use glasstrack::seqplan::{mix_batches, IndexedSequence, SampleIndex, Source};

fn index(prefix: &str, n: usize, frames: usize) -> SampleIndex {
    SampleIndex {
        sequences: (0..n)
            .map(|i| IndexedSequence {
                id: format!("{prefix}{i}"),
                frames,
            })
            .collect(),
    }
}

fn main() -> glasstrack::Result<()> {
    let transparent = index("glass_", 2039, 51);
    let opaque = index("opaque_", 500, 300);
    let batch = mix_batches(&transparent, &opaque, 64, &mut seeded(0))?;
    println!("transparent fraction {:.3}", batch.transparent_fraction());
    for e in batch.entries.iter().take(8) {
        let name = match e.source {
            Source::Transparent => &transparent.sequences[e.sequence].id,
            Source::Opaque => &opaque.sequences[e.sequence].id,
        };
        println!("  {name} frame {}", e.frame);
    }
    Ok(())
}
