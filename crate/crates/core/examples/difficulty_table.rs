//! Attribute difficulty table from per-sequence mean IoUs of a study run.

use glasstrack::evalkit::DifficultyTable;
use glasstrack::seqplan::{Attribute, StudyCell};

fn main() {
    // A tracker that degrades with stripe count and rotation speed.
    let mut entries = Vec::new();
    for attribute in Attribute::ALL {
        for level in 0..4 {
            for variation in 0..5 {
                let penalty = match attribute {
                    Attribute::Occlusion => 0.15 * level as f64,
                    Attribute::Rotation => 0.05 * level as f64,
                    _ => 0.02 * level as f64,
                };
                let noise = 0.01 * variation as f64;
                entries.push((
                    StudyCell {
                        attribute,
                        level,
                        variation,
                    },
                    0.8 - penalty - noise,
                ));
            }
        }
    }
    let table = DifficultyTable::from_sequence_means(&entries);
    println!("{:<14} {:>8} {:>8} {:>8} {:>8}", "attribute", "L0", "L1", "L2", "L3");
    for attribute in Attribute::ALL {
        let row: Vec<String> = (0..4)
            .map(|l| format!("{:>8.3}", table.get(attribute, l).unwrap_or(f64::NAN)))
            .collect();
        println!("{:<14} {}", attribute.name(), row.join(" "));
    }
}
