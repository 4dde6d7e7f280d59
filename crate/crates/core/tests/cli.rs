use std::path::{Path, PathBuf};

use glasstrack::cli::{self, render_plan};
use glasstrack::procedural::{self, DemoSpec};
use glasstrack::render::{RenderSettings, META_FILE};
use glasstrack::seqplan::{Attribute, DatasetPlan};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["glasstrack".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    cli::run(argv)
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Demo {
    _dir: tempfile::TempDir,
    root: PathBuf,
    corpus: PathBuf,
    catalog: PathBuf,
}

fn demo(backgrounds: usize, frames: usize, width: u32, height: u32) -> Demo {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let assets = procedural::write_demo_assets(
        &root.join("assets"),
        &DemoSpec {
            backgrounds,
            frames,
            width,
            height,
        },
    )
    .unwrap();
    Demo {
        _dir: dir,
        root,
        corpus: assets.corpus,
        catalog: assets.catalog,
    }
}

fn plan(d: &Demo, n: usize, frames: usize, size: (u32, u32)) -> PathBuf {
    let out = d.root.join("plan.json");
    let code = run(&[
        "plan",
        "--corpus",
        &s(&d.corpus),
        "--catalog",
        &s(&d.catalog),
        "--sequences",
        &n.to_string(),
        "--frames",
        &frames.to_string(),
        "--width",
        &size.0.to_string(),
        "--height",
        &size.1.to_string(),
        "--seed",
        "3",
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0);
    out
}

fn tree_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn plan_is_reproducible_from_the_seed() {
    let d = demo(6, 8, 64, 36);
    let a = std::fs::read(plan(&d, 4, 8, (64, 36))).unwrap();
    let b = std::fs::read(plan(&d, 4, 8, (64, 36))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generate_is_independent_of_worker_count() {
    let d = demo(4, 6, 96, 54);
    let p = plan(&d, 3, 6, (96, 54));
    let one = d.root.join("one");
    let four = d.root.join("four");
    assert_eq!(run(&["generate", &s(&p), "--out", &s(&one), "--workers", "1", "--spp", "2"]), 0);
    assert_eq!(run(&["generate", &s(&p), "--out", &s(&four), "--workers", "4", "--spp", "2"]), 0);
    assert_eq!(tree_bytes(&one), tree_bytes(&four));
}

#[test]
fn generate_resumes_incomplete_sequences_only() {
    let d = demo(4, 5, 64, 36);
    let p = plan(&d, 3, 5, (64, 36));
    let plan = DatasetPlan::load(&p).unwrap();
    let out = d.root.join("data");
    let settings = RenderSettings {
        spp: 1,
        ..RenderSettings::default()
    };
    let first = render_plan(&plan, 0..3, &out, &settings, 2).unwrap();
    assert_eq!(first.rendered.len(), 3);

    let again = render_plan(&plan, 0..3, &out, &settings, 2).unwrap();
    assert_eq!(again.skipped.len(), 3);
    assert!(again.rendered.is_empty());

    let victim = &plan.sequences[1].id;
    std::fs::remove_file(out.join(victim).join(META_FILE)).unwrap();
    let resumed = render_plan(&plan, 0..3, &out, &settings, 2).unwrap();
    assert_eq!(resumed.rendered, vec![victim.clone()]);
    assert_eq!(resumed.skipped.len(), 2);

    // Different render settings invalidate finished sequences.
    let spp2 = RenderSettings {
        spp: 2,
        ..settings
    };
    let rerender = render_plan(&plan, 0..1, &out, &spp2, 2).unwrap();
    assert_eq!(rerender.rendered.len(), 1);
}

#[test]
fn range_renders_a_slice_of_the_plan() {
    let d = demo(4, 4, 48, 27);
    let p = plan(&d, 4, 4, (48, 27));
    let out = d.root.join("data");
    assert_eq!(run(&["generate", &s(&p), "--out", &s(&out), "--range", "1..3", "--spp", "1"]), 0);
    let mut dirs: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    assert_eq!(dirs, vec!["seq_000001", "seq_000002"]);
    assert_eq!(run(&["generate", &s(&p), "--out", &s(&out), "--range", "2..9"]), 2);
}

#[test]
fn corrupt_meshes_fail_their_sequences_with_exit_one() {
    let d = demo(4, 4, 48, 27);
    let p = plan(&d, 3, 4, (48, 27));
    let plan = DatasetPlan::load(&p).unwrap();
    let bad = &plan.sequences[0].object_instance_id;
    std::fs::write(d.root.join("assets/meshes").join(format!("{bad}.obj")), "v 0 0 0\nf 1 2 3\n").unwrap();
    let out = d.root.join("data");
    assert_eq!(run(&["generate", &s(&p), "--out", &s(&out), "--spp", "1"]), 1);
    assert!(!out.join(&plan.sequences[0].id).join(META_FILE).exists());
    for config in &plan.sequences[1..] {
        let uses_bad = &config.object_instance_id == bad || config.distractor_instance_id.as_ref() == Some(bad);
        assert_eq!(out.join(&config.id).join(META_FILE).exists(), !uses_bad, "{}", config.id);
    }
}

#[test]
fn missing_inputs_are_usage_errors() {
    let d = demo(2, 3, 32, 18);
    assert_eq!(run(&["plan", "--corpus", &s(&d.corpus), "--sequences", "1"]), 2);
    assert_eq!(run(&["plan", "--corpus", &s(&d.corpus), "--catalog", &s(&d.catalog), "--sequences", "3"]), 2);
    assert_eq!(run(&["generate", &s(&d.root.join("nope.json"))]), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let d = demo(3, 6, 32, 18);
    let cfg = d.root.join("run.json");
    let out = d.root.join("plan.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "corpus": d.corpus, "catalog": d.catalog, "sequences": 2,
            "frames": 6, "width": 32, "height": 18, "seed": 9
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(run(&["plan", "--config", &s(&cfg), "--frames", "4", "--out", &s(&out)]), 0);
    let plan = DatasetPlan::load(&out).unwrap();
    assert_eq!(plan.global_seed, 9);
    assert_eq!(plan.sequences.len(), 2);
    assert!(plan.sequences.iter().all(|c| c.n_frames == 4 && c.resolution.width == 32));

    std::fs::write(&cfg, r#"{"sequencez": 2}"#).unwrap();
    assert_eq!(run(&["plan", "--config", &s(&cfg), "--out", &s(&out)]), 2);
}

#[test]
fn study_renders_eighty_sequences_sharing_variations() {
    let d = demo(5, 3, 32, 18);
    let out = d.root.join("study");
    let code = run(&[
        "study", "--corpus", &s(&d.corpus), "--catalog", &s(&d.catalog), "--frames", "3", "--width", "32",
        "--height", "18", "--spp", "1", "--out", &s(&out),
    ]);
    assert_eq!(code, 0);
    let plan = DatasetPlan::load(&out.join(cli::STUDY_PLAN_FILE)).unwrap();
    assert_eq!(plan.sequences.len(), 80);
    let dirs = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 80);
    for v in 0..5 {
        let group: Vec<_> = plan.sequences.iter().filter(|c| c.study.unwrap().variation == v).collect();
        assert_eq!(group.len(), 16);
        assert!(group.iter().all(|c| c.control_points == group[0].control_points));
        assert!(group.iter().all(|c| c.background_id == group[0].background_id));
    }
    let occl: Vec<u32> = plan
        .sequences
        .iter()
        .filter(|c| c.study.unwrap().attribute == Attribute::Occlusion && c.study.unwrap().variation == 0)
        .map(|c| c.attributes.occlusion_stripes)
        .collect();
    assert_eq!(occl, vec![0, 7, 11, 20]);

    // GT-as-results difficulty table: every cell perfect.
    let results = d.root.join("results/gt");
    std::fs::create_dir_all(&results).unwrap();
    for c in &plan.sequences {
        std::fs::copy(out.join(&c.id).join("groundtruth.txt"), results.join(format!("{}.txt", c.id))).unwrap();
    }
    let report = d.root.join("report");
    let code = run(&[
        "eval", "--results", &s(&d.root.join("results")), "--gt", &s(&out), "--difficulty", "--out", &s(&report),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(report.join("report.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("difficulty,")).count(), 16);
}

#[test]
fn mix_accepts_plans_and_indices() {
    let d = demo(6, 4, 32, 18);
    let p = plan(&d, 5, 4, (32, 18));
    let out = d.root.join("batch.jsonl");
    let code = run(&[
        "mix", "--transparent", &s(&p), "--opaque", &s(&d.corpus), "--batch-size", "4000", "--seed", "1", "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4000);
    let transparent = lines.iter().filter(|v| v["source"] == "transparent").count() as f64 / 4000.0;
    assert!((transparent - 0.625).abs() < 0.03, "{transparent}");
    assert!(lines.iter().all(|v| v["frame"].as_u64().unwrap() < 4));
}

#[test]
fn convert_bg_builds_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("videos");
    for video in ["walk", "street"] {
        let vdir = input.join(video);
        std::fs::create_dir_all(&vdir).unwrap();
        for k in 0..3u8 {
            let img = image::RgbImage::from_fn(40, 30, |x, y| image::Rgb([x as u8 * 6, y as u8 * 8, k * 80]));
            img.save(vdir.join(format!("frame{k:02}.png"))).unwrap();
        }
    }
    let out = dir.path().join("corpus");
    assert_eq!(run(&["convert-bg", "--input", &s(&input), "--out", &s(&out), "--size", "20x15"]), 0);
    let corpus = glasstrack::seqplan::BackgroundCorpus::load(&out.join("corpus.json")).unwrap();
    assert_eq!(corpus.len(), 2);
    let entry = corpus.entry("walk").unwrap();
    assert_eq!(entry.frames, 3);
    let frame = glasstrack::pnm::read_ppm(&corpus.frame_path(entry, 2)).unwrap();
    assert_eq!((frame.width, frame.height), (20, 15));
}
