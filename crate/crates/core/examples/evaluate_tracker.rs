//! One-pass evaluation of two synthetic trackers against synthetic ground
//! truth: a jittery one and one that loses the target halfway.

use std::collections::BTreeMap;

use glasstrack::evalkit::{evaluate_tracker, per_attribute_report, BoxF, PRECISION_REPORT_PX};
use glasstrack::rng::seeded;
use rand::Rng;

fn main() -> glasstrack::Result<()> {
    let mut rng = seeded(1);
    let mut gt_set = Vec::new();
    for s in 0..4 {
        let gt: Vec<Option<BoxF>> = (0..50)
            .map(|k| Some(BoxF::new(40.0 + 2.0 * k as f64, 60.0 + s as f64 * 10.0, 30.0, 24.0)))
            .collect();
        gt_set.push((format!("seq_{s}"), gt));
    }

    let jitter: Vec<_> = gt_set
        .iter()
        .map(|(id, gt)| {
            let pred = gt
                .iter()
                .map(|b| b.map(|b| BoxF::new(b.x + rng.gen_range(-6.0..6.0), b.y + rng.gen_range(-6.0..6.0), b.w, b.h)))
                .collect();
            (id.clone(), gt.clone(), pred)
        })
        .collect();
    let drift: Vec<_> = gt_set
        .iter()
        .map(|(id, gt)| {
            let pred = gt
                .iter()
                .enumerate()
                .map(|(k, b)| if k < 25 { *b } else { None })
                .collect();
            (id.clone(), gt.clone(), pred)
        })
        .collect();

    let mut tags = BTreeMap::new();
    tags.insert("seq_0".to_string(), vec!["occlusion-1".to_string()]);
    tags.insert("seq_1".to_string(), vec!["occlusion-1".to_string(), "distractor".to_string()]);
    tags.insert("seq_2".to_string(), vec!["blur-3".to_string()]);
    tags.insert("seq_3".to_string(), vec![]);

    for (name, inputs) in [("jitter", &jitter), ("drift", &drift)] {
        let report = evaluate_tracker(name, inputs)?;
        println!(
            "{name}: AUC {:.4}, precision@{PRECISION_REPORT_PX}px {:.4}, mean IoU {:.4}",
            report.overall.success.auc, report.overall.precision.at_20, report.overall.mean_iou
        );
        let (table, _) = per_attribute_report(&report, &tags)?;
        for row in table {
            println!("  {:<12} {} seqs  AUC {:.4}", row.tag, row.sequences, row.auc);
        }
    }
    Ok(())
}
