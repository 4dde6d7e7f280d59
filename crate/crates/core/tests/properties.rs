use std::path::PathBuf;

use glasstrack::evalkit::{self, BoxF};
use glasstrack::seqplan::{
    self, AttributeLevels, BackgroundCorpus, BackgroundEntry, CatalogEntry, GenerationParams, ObjectCatalog, Volume,
};
use glasstrack::trajectory::{chord_spread, constant_speed_params, lagged_track, Spline, DISTRACTOR_LAG};
use glasstrack::math::Vec3;
use proptest::prelude::*;

fn corpus(n: usize) -> BackgroundCorpus {
    BackgroundCorpus {
        version: "p".into(),
        sequences: (0..n)
            .map(|i| BackgroundEntry {
                id: format!("bg{i}"),
                path: PathBuf::from(format!("bg{i}")),
                frames: 51,
            })
            .collect(),
        root: PathBuf::new(),
        source: None,
    }
}

fn catalog() -> ObjectCatalog {
    ObjectCatalog {
        version: "p".into(),
        instances: ["a1", "a2", "b1", "c1"]
            .iter()
            .map(|id| CatalogEntry {
                instance_id: id.to_string(),
                type_id: id[..1].to_string(),
                mesh: PathBuf::from(format!("{id}.obj")),
                volume: Volume::Full,
                material: None,
            })
            .collect(),
        root: PathBuf::new(),
        source: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_plans_are_valid(seed in any::<u64>(), n in 1usize..12) {
        let params = GenerationParams::default();
        let cat = catalog();
        let plan = seqplan::build_dataset_plan(seed, n, &corpus(12), &cat, &params).unwrap();
        let vocabulary = AttributeLevels::tag_vocabulary();
        for c in &plan.sequences {
            c.validate(&cat).unwrap();
            for p in c.control_points {
                prop_assert!(params.safe_region.contains(p));
            }
            prop_assert!((c.rotation_axis.length() - 1.0).abs() < 1e-9);
            prop_assert!(c.object_scale >= params.scale_range[0] && c.object_scale <= params.scale_range[1]);
            prop_assert!(c.attributes.tags().iter().all(|t| vocabulary.contains(t)));
            let spline = Spline::catmull_rom(c.control_points);
            let t = constant_speed_params(&spline, c.n_frames).unwrap();
            prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(chord_spread(&spline, &t) <= 1e-9);
        }
    }

    #[test]
    fn distractor_trails_the_target(seed in any::<u64>()) {
        let plan = seqplan::build_dataset_plan(seed, 1, &corpus(1), &catalog(), &GenerationParams::default()).unwrap();
        let spline = Spline::catmull_rom(plan.sequences[0].control_points);
        let t = constant_speed_params(&spline, 51).unwrap();
        let trail = lagged_track(&spline, &t, DISTRACTOR_LAG, Vec3::new(0.0, 0.0, 0.0));
        prop_assert_eq!(trail[0], spline.eval(0.0).unwrap());
        let total = spline.arc_length();
        // The last trailing point sits DISTRACTOR_LAG of the path behind the end.
        let gap = trail[50].distance(spline.eval(1.0).unwrap());
        prop_assert!(gap <= DISTRACTOR_LAG * total + 1e-6);
        prop_assert!(gap > 0.0);
    }

    #[test]
    fn success_curve_is_non_increasing(ious in prop::collection::vec(0.0f64..=1.0, 1..60)) {
        let curve = evalkit::success_curve(&ious).unwrap();
        prop_assert!(curve.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((curve.auc - curve.values.iter().sum::<f64>() / 21.0).abs() < 1e-12);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(
        a in (0.0f64..100.0, 0.0f64..100.0, 0.1f64..50.0, 0.1f64..50.0),
        b in (0.0f64..100.0, 0.0f64..100.0, 0.1f64..50.0, 0.1f64..50.0),
    ) {
        let a = BoxF::new(a.0, a.1, a.2, a.3);
        let b = BoxF::new(b.0, b.1, b.2, b.3);
        let v = evalkit::iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, evalkit::iou(&b, &a));
        prop_assert_eq!(evalkit::iou(&a, &a), 1.0);
    }
}
