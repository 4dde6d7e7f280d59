//! One-pass evaluation (OPE) of tracker results against ground truth:
//! IoU and center error, success and precision curves, AUC, per-attribute
//! tables and the attribute difficulty table of the study plan.
//!
//! Scoring rules:
//! * the first frame initializes the tracker and is never scored;
//! * frames whose ground truth is `nan` are skipped;
//! * a missing (`nan`) prediction scores IoU 0 and an infinite center error;
//! * each sequence contributes equally to aggregate curves, whatever its
//!   length.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{self, Aabb, ATTRIBUTES_FILE, GROUNDTRUTH_FILE};
use crate::error::{write_json, Error, Result};
use crate::seqplan::{Attribute, AttributeLevels, StudyCell};

/// Number of IoU thresholds `0.00, 0.05, ..., 1.00`.
pub const SUCCESS_POINTS: usize = 21;
/// Largest center-error threshold in pixels; thresholds are `0..=50`.
pub const PRECISION_MAX_PX: usize = 50;
pub const PRECISION_REPORT_PX: usize = 20;

pub fn success_thresholds() -> Vec<f64> {
    (0..SUCCESS_POINTS).map(|k| k as f64 / 20.0).collect()
}

pub fn precision_thresholds() -> Vec<f64> {
    (0..=PRECISION_MAX_PX).map(|k| k as f64).collect()
}

/// Box with real-valued top-left corner and size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxF {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxF {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> BoxF {
        BoxF { x, y, w, h }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }
}

impl From<Aabb> for BoxF {
    fn from(b: Aabb) -> BoxF {
        BoxF::new(b.x as f64, b.y as f64, b.w as f64, b.h as f64)
    }
}

/// Intersection over union, 0 for disjoint or empty boxes.
pub fn iou(a: &BoxF, b: &BoxF) -> f64 {
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    // Areas from the same edge differences as the overlap, so a box scores
    // exactly 1 against itself.
    let edge_area = |r: &BoxF| ((r.x + r.w) - r.x).max(0.0) * ((r.y + r.h) - r.y).max(0.0);
    let union = edge_area(a) + edge_area(b) - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Euclidean distance between box centers.
pub fn center_error(a: &BoxF, b: &BoxF) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    /// Fraction of frames with IoU at or above each threshold.
    pub values: Vec<f64>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCurve {
    /// Fraction of frames with center error at or below each threshold.
    pub values: Vec<f64>,
    pub at_20: f64,
}

pub fn success_curve(ious: &[f64]) -> Result<SuccessCurve> {
    if ious.is_empty() {
        return Err(Error::NoScoredFrames);
    }
    let n = ious.len() as f64;
    let values: Vec<f64> = success_thresholds()
        .iter()
        .map(|&t| ious.iter().filter(|&&v| v >= t).count() as f64 / n)
        .collect();
    let auc = values.iter().sum::<f64>() / SUCCESS_POINTS as f64;
    Ok(SuccessCurve { values, auc })
}

pub fn precision_curve(errors: &[f64]) -> Result<PrecisionCurve> {
    if errors.is_empty() {
        return Err(Error::NoScoredFrames);
    }
    let n = errors.len() as f64;
    let values: Vec<f64> = precision_thresholds()
        .iter()
        .map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / n)
        .collect();
    let at_20 = values[PRECISION_REPORT_PX];
    Ok(PrecisionCurve { values, at_20 })
}

/// Parses one box per non-empty line, fields separated by commas, tabs or
/// spaces. A line of `nan` values is an absent box. Errors carry the 1-based
/// line number.
pub fn parse_boxes(text: &str) -> std::result::Result<Vec<Option<BoxF>>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err((i + 1, format!("expected 4 box fields, got {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|_| (i + 1, format!("bad box field {f:?}")))?;
        }
        if v.iter().any(|x| x.is_nan()) {
            out.push(None);
        } else if v.iter().all(|x| x.is_finite()) && v[2] >= 0.0 && v[3] >= 0.0 {
            out.push(Some(BoxF::new(v[0], v[1], v[2], v[3])));
        } else {
            return Err((i + 1, format!("invalid box {line:?}")));
        }
    }
    Ok(out)
}

pub fn read_boxes(path: &Path) -> Result<Vec<Option<BoxF>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_boxes(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Per-frame scores of one sequence after the OPE frame rules.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameScores {
    pub ious: Vec<f64>,
    pub errors: Vec<f64>,
}

pub fn score_sequence(
    sequence: &str,
    gt: &[Option<BoxF>],
    predicted: &[Option<BoxF>],
) -> Result<FrameScores> {
    if gt.len() != predicted.len() {
        return Err(Error::FrameCountMismatch {
            sequence: sequence.to_string(),
            expected: gt.len(),
            found: predicted.len(),
        });
    }
    let mut scores = FrameScores::default();
    for (g, p) in gt.iter().zip(predicted).skip(1) {
        let Some(g) = g else { continue };
        match p {
            Some(p) => {
                scores.ious.push(iou(g, p));
                scores.errors.push(center_error(g, p));
            }
            None => {
                scores.ious.push(0.0);
                scores.errors.push(f64::INFINITY);
            }
        }
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub sequence: String,
    pub scored_frames: usize,
    pub mean_iou: f64,
    pub success: SuccessCurve,
    pub precision: PrecisionCurve,
}

impl SequenceReport {
    pub fn from_scores(sequence: &str, scores: &FrameScores) -> Result<SequenceReport> {
        Ok(SequenceReport {
            sequence: sequence.to_string(),
            scored_frames: scores.ious.len(),
            mean_iou: mean(&scores.ious),
            success: success_curve(&scores.ious)?,
            precision: precision_curve(&scores.errors)?,
        })
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Equal-weight average of sequence results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sequences: usize,
    pub mean_iou: f64,
    pub success: SuccessCurve,
    pub precision: PrecisionCurve,
}

pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a SequenceReport>) -> Option<Aggregate> {
    let reports: Vec<&SequenceReport> = reports.into_iter().collect();
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let avg = |get: &dyn Fn(&SequenceReport) -> &[f64], len: usize| -> Vec<f64> {
        (0..len)
            .map(|k| reports.iter().map(|r| get(r)[k]).sum::<f64>() / n)
            .collect()
    };
    let success = avg(&|r| &r.success.values, SUCCESS_POINTS);
    let precision = avg(&|r| &r.precision.values, PRECISION_MAX_PX + 1);
    Some(Aggregate {
        sequences: reports.len(),
        mean_iou: reports.iter().map(|r| r.mean_iou).sum::<f64>() / n,
        success: SuccessCurve {
            auc: success.iter().sum::<f64>() / SUCCESS_POINTS as f64,
            values: success,
        },
        precision: PrecisionCurve {
            at_20: precision[PRECISION_REPORT_PX],
            values: precision,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub tag: String,
    pub sequences: usize,
    pub auc: f64,
    pub precision_at_20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerReport {
    pub tracker: String,
    pub overall: Aggregate,
    pub sequences: Vec<SequenceReport>,
    /// Sequences without any scored frame.
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_attribute: Option<Vec<AttributeScore>>,
}

/// One sequence's id, ground-truth boxes and predicted boxes.
pub type SequenceBoxes = (String, Vec<Option<BoxF>>, Vec<Option<BoxF>>);

/// Scores one tracker over `(sequence, ground truth, predictions)` triples.
pub fn evaluate_tracker(
    tracker: &str,
    sequences: &[SequenceBoxes],
) -> Result<TrackerReport> {
    let scored: Vec<(String, FrameScores)> = sequences
        .par_iter()
        .map(|(id, gt, pred)| score_sequence(id, gt, pred).map(|s| (id.clone(), s)))
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for (id, scores) in &scored {
        if scores.ious.is_empty() {
            warn!("{tracker}: sequence {id} has no scored frames, skipped");
            skipped.push(id.clone());
        } else {
            reports.push(SequenceReport::from_scores(id, scores)?);
        }
    }
    let overall = aggregate(&reports).ok_or(Error::NoScoredFrames)?;
    Ok(TrackerReport {
        tracker: tracker.to_string(),
        overall,
        sequences: reports,
        skipped,
        per_attribute: None,
    })
}

/// Per-tag AUC over the sequences carrying each tag. Tags are reported in
/// vocabulary order; tags with no scored sequence are left out with a
/// warning, which is also returned.
pub fn per_attribute_report(
    report: &TrackerReport,
    tags: &BTreeMap<String, Vec<String>>,
) -> Result<(Vec<AttributeScore>, Vec<String>)> {
    let vocabulary = AttributeLevels::tag_vocabulary();
    for (sequence, seq_tags) in tags {
        if let Some(tag) = seq_tags.iter().find(|t| !vocabulary.contains(t)) {
            return Err(Error::UnknownTag {
                sequence: sequence.clone(),
                tag: tag.clone(),
            });
        }
    }
    let mut table = Vec::new();
    let mut warnings = Vec::new();
    for tag in &vocabulary {
        let subset: Vec<&SequenceReport> = report
            .sequences
            .iter()
            .filter(|s| tags.get(&s.sequence).is_some_and(|t| t.contains(tag)))
            .collect();
        match aggregate(subset) {
            Some(agg) => table.push(AttributeScore {
                tag: tag.clone(),
                sequences: agg.sequences,
                auc: agg.success.auc,
                precision_at_20: agg.precision.at_20,
            }),
            None => {
                let msg = format!("{}: no sequences tagged {tag}, omitted", report.tracker);
                warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    Ok((table, warnings))
}

/// Mean IoU of one study cell over variations and trackers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyCell {
    pub attribute: Attribute,
    pub level: usize,
    pub mean_iou: f64,
    /// Number of (tracker, sequence) results averaged.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyTable {
    pub cells: Vec<DifficultyCell>,
}

impl DifficultyTable {
    pub fn get(&self, attribute: Attribute, level: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.attribute == attribute && c.level == level)
            .map(|c| c.mean_iou)
    }

    /// Builds the table from per-sequence mean IoUs.
    pub fn from_sequence_means(entries: &[(StudyCell, f64)]) -> DifficultyTable {
        let mut sums: BTreeMap<(Attribute, usize), (f64, usize)> = BTreeMap::new();
        for (cell, v) in entries {
            let e = sums.entry((cell.attribute, cell.level)).or_default();
            e.0 += v;
            e.1 += 1;
        }
        DifficultyTable {
            cells: sums
                .into_iter()
                .map(|((attribute, level), (sum, n))| DifficultyCell {
                    attribute,
                    level,
                    mean_iou: sum / n as f64,
                    samples: n,
                })
                .collect(),
        }
    }
}

/// A ground-truth tree: sequence directories holding `groundtruth.txt`.
#[derive(Debug, Clone)]
pub struct GroundTruthSet {
    pub root: PathBuf,
    pub sequences: Vec<String>,
}

impl GroundTruthSet {
    pub fn scan(root: &Path) -> Result<GroundTruthSet> {
        let mut sequences = Vec::new();
        for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            if entry.path().join(GROUNDTRUTH_FILE).is_file() {
                sequences.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        sequences.sort();
        if sequences.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no sequences with {GROUNDTRUTH_FILE} under {}",
                root.display()
            )));
        }
        Ok(GroundTruthSet {
            root: root.to_path_buf(),
            sequences,
        })
    }

    pub fn boxes(&self, sequence: &str) -> Result<Vec<Option<BoxF>>> {
        read_boxes(&self.root.join(sequence).join(GROUNDTRUTH_FILE))
    }

    /// Attribute files of every sequence, or `None` if any is missing.
    pub fn attributes(&self) -> Result<Option<BTreeMap<String, annotate::SequenceAttributes>>> {
        let mut out = BTreeMap::new();
        for s in &self.sequences {
            let dir = self.root.join(s);
            if !dir.join(ATTRIBUTES_FILE).is_file() {
                return Ok(None);
            }
            out.insert(s.clone(), annotate::read_attributes(&dir)?);
        }
        Ok(Some(out))
    }
}

/// Tracker directories under a results root, sorted by name.
pub fn list_trackers(results_root: &Path) -> Result<Vec<String>> {
    let mut trackers = Vec::new();
    for entry in std::fs::read_dir(results_root).map_err(|e| Error::io(results_root, e))? {
        let entry = entry.map_err(|e| Error::io(results_root, e))?;
        if entry.path().is_dir() {
            trackers.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    trackers.sort();
    if trackers.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no tracker directories under {}",
            results_root.display()
        )));
    }
    Ok(trackers)
}

fn result_path(results_root: &Path, tracker: &str, sequence: &str) -> PathBuf {
    results_root.join(tracker).join(format!("{sequence}.txt"))
}

fn check_coverage(results_root: &Path, trackers: &[String], gt: &GroundTruthSet) -> Result<()> {
    let missing: Vec<(String, String)> = trackers
        .iter()
        .flat_map(|t| gt.sequences.iter().map(move |s| (t.clone(), s.clone())))
        .filter(|(t, s)| !result_path(results_root, t, s).is_file())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::IncompleteCoverage(missing))
    }
}

fn load_tracker_inputs(
    results_root: &Path,
    tracker: &str,
    gt: &GroundTruthSet,
) -> Result<Vec<SequenceBoxes>> {
    gt.sequences
        .iter()
        .map(|s| {
            let truth = gt.boxes(s)?;
            let pred = read_boxes(&result_path(results_root, tracker, s))?;
            Ok((s.clone(), truth, pred))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub success_thresholds: Vec<f64>,
    pub precision_thresholds: Vec<f64>,
    pub trackers: Vec<TrackerReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<DifficultyTable>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    fn new(trackers: Vec<TrackerReport>) -> EvalReport {
        EvalReport {
            success_thresholds: success_thresholds(),
            precision_thresholds: precision_thresholds(),
            trackers,
            difficulty: None,
            warnings: Vec::new(),
        }
    }

    pub fn tracker(&self, name: &str) -> Option<&TrackerReport> {
        self.trackers.iter().find(|t| t.tracker == name)
    }
}

/// OPE over every tracker in `results_root` (`<tracker>/<seq_id>.txt`)
/// against a ground-truth tree. When every sequence has `attributes.json`
/// the per-attribute table is filled in as well.
pub fn ope_evaluate(results_root: &Path, gt_root: &Path) -> Result<EvalReport> {
    let gt = GroundTruthSet::scan(gt_root)?;
    let trackers = list_trackers(results_root)?;
    check_coverage(results_root, &trackers, &gt)?;
    let tags: Option<BTreeMap<String, Vec<String>>> = gt
        .attributes()?
        .map(|m| m.into_iter().map(|(k, v)| (k, v.tags)).collect());

    let mut warnings = Vec::new();
    if tags.is_none() {
        warnings.push("attributes.json missing for some sequences, per-attribute table skipped".to_string());
    }
    let mut reports = Vec::new();
    for tracker in &trackers {
        let inputs = load_tracker_inputs(results_root, tracker, &gt)?;
        let mut report = evaluate_tracker(tracker, &inputs)?;
        for s in &report.skipped {
            warnings.push(format!("{tracker}: sequence {s} has no scored frames, skipped"));
        }
        if let Some(tags) = &tags {
            let (table, w) = per_attribute_report(&report, tags)?;
            report.per_attribute = Some(table);
            warnings.extend(w);
        }
        reports.push(report);
    }
    let mut report = EvalReport::new(reports);
    report.warnings = warnings;
    Ok(report)
}

/// Difficulty table over a study ground-truth tree whose `attributes.json`
/// files carry the study cell of each sequence.
pub fn attribute_difficulty(results_root: &Path, gt_root: &Path) -> Result<EvalReport> {
    let gt = GroundTruthSet::scan(gt_root)?;
    let attrs = gt.attributes()?.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{} is not a study tree: attributes.json missing",
            gt_root.display()
        ))
    })?;
    let cells: BTreeMap<String, StudyCell> = attrs
        .iter()
        .filter_map(|(s, a)| a.study.map(|c| (s.clone(), c)))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no sequence carries a study cell",
            gt_root.display()
        )));
    }
    let trackers = list_trackers(results_root)?;
    check_coverage(results_root, &trackers, &gt)?;
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for tracker in &trackers {
        let inputs = load_tracker_inputs(results_root, tracker, &gt)?;
        let report = evaluate_tracker(tracker, &inputs)?;
        for s in &report.sequences {
            if let Some(cell) = cells.get(&s.sequence) {
                entries.push((*cell, s.mean_iou));
            }
        }
        reports.push(report);
    }
    let mut report = EvalReport::new(reports);
    report.difficulty = Some(DifficultyTable::from_sequence_means(&entries));
    Ok(report)
}

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    /// `overall`, `sequence`, `attribute` or `difficulty`.
    pub kind: String,
    pub tracker: String,
    pub key: String,
    pub count: usize,
    pub mean_iou: Option<f64>,
    pub auc: Option<f64>,
    pub precision_at_20: Option<f64>,
}

pub fn csv_rows(report: &EvalReport) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for t in &report.trackers {
        rows.push(CsvRow {
            kind: "overall".into(),
            tracker: t.tracker.clone(),
            key: "all".into(),
            count: t.overall.sequences,
            mean_iou: Some(t.overall.mean_iou),
            auc: Some(t.overall.success.auc),
            precision_at_20: Some(t.overall.precision.at_20),
        });
        for s in &t.sequences {
            rows.push(CsvRow {
                kind: "sequence".into(),
                tracker: t.tracker.clone(),
                key: s.sequence.clone(),
                count: s.scored_frames,
                mean_iou: Some(s.mean_iou),
                auc: Some(s.success.auc),
                precision_at_20: Some(s.precision.at_20),
            });
        }
        for a in t.per_attribute.iter().flatten() {
            rows.push(CsvRow {
                kind: "attribute".into(),
                tracker: t.tracker.clone(),
                key: a.tag.clone(),
                count: a.sequences,
                mean_iou: None,
                auc: Some(a.auc),
                precision_at_20: Some(a.precision_at_20),
            });
        }
    }
    for c in report.difficulty.iter().flat_map(|d| &d.cells) {
        rows.push(CsvRow {
            kind: "difficulty".into(),
            tracker: "all".into(),
            key: format!("{}-{}", c.attribute, c.level),
            count: c.samples,
            mean_iou: Some(c.mean_iou),
            auc: None,
            precision_at_20: None,
        });
    }
    rows
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join("report.json"), report)?;
    let csv_path = dir.join("report.csv");
    let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| csv_error(&csv_path, e))?;
    for row in csv_rows(report) {
        writer.serialize(row).map_err(|e| csv_error(&csv_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&csv_path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> BoxF {
        BoxF::new(x, y, w, h)
    }

    /// IoU by counting unit pixels of integer boxes.
    fn pixel_iou(a: (i32, i32, i32, i32), c: (i32, i32, i32, i32)) -> f64 {
        let inside = |bx: (i32, i32, i32, i32), x: i32, y: i32| {
            x >= bx.0 && x < bx.0 + bx.2 && y >= bx.1 && y < bx.1 + bx.3
        };
        let (mut inter, mut union) = (0, 0);
        for y in -5..30 {
            for x in -5..30 {
                let (ia, ic) = (inside(a, x, y), inside(c, x, y));
                inter += (ia && ic) as i32;
                union += (ia || ic) as i32;
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_examples() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(5.0, 5.0, 1.0, 1.0)), 0.0);
        let v = iou(&a, &b(1.0, 1.0, 2.0, 2.0));
        assert_eq!(v, 1.0 / 7.0);
        assert_eq!(v, pixel_iou((0, 0, 2, 2), (1, 1, 2, 2)));
    }

    #[test]
    fn center_error_examples() {
        let a = b(0.0, 0.0, 4.0, 4.0);
        assert_eq!(center_error(&a, &a), 0.0);
        assert_eq!(center_error(&a, &b(3.0, 4.0, 4.0, 4.0)), 5.0);
    }

    #[test]
    fn success_curve_examples() {
        assert_eq!(success_curve(&[1.0; 5]).unwrap().auc, 1.0);
        let miss = success_curve(&[0.0; 5]).unwrap();
        assert_eq!(miss.values[0], 1.0);
        assert!(miss.values[1..].iter().all(|&v| v == 0.0));
        assert!((miss.auc - 1.0 / 21.0).abs() < 1e-15);
        let half = success_curve(&[0.5, 0.5]).unwrap();
        assert!((half.auc - 11.0 / 21.0).abs() < 1e-15);
        assert!(matches!(success_curve(&[]), Err(Error::NoScoredFrames)));
    }

    #[test]
    fn precision_curve_examples() {
        assert!(precision_curve(&[0.0, 0.0]).unwrap().values.iter().all(|&v| v == 1.0));
        assert!(precision_curve(&[60.0]).unwrap().values.iter().all(|&v| v == 0.0));
        assert_eq!(precision_curve(&[10.0, 30.0]).unwrap().at_20, 0.5);
        assert!(precision_curve(&[]).is_err());
    }

    #[test]
    fn scoring_skips_init_and_absent_frames() {
        let g = Some(b(0.0, 0.0, 10.0, 10.0));
        let gt = vec![g, None, g, g];
        let pred = vec![None, g, None, g];
        let s = score_sequence("s", &gt, &pred).unwrap();
        assert_eq!(s.ious, vec![0.0, 1.0]);
        assert_eq!(s.errors[0], f64::INFINITY);
        assert!(matches!(
            score_sequence("s", &gt, &pred[..3]),
            Err(Error::FrameCountMismatch { .. })
        ));
    }

    #[test]
    fn parse_reports_line_numbers() {
        let ok = parse_boxes("1,2,3,4\n\n5\t6\t7\t8\nnan,nan,nan,nan\n").unwrap();
        assert_eq!(ok.len(), 3);
        assert_eq!(ok[2], None);
        assert_eq!(parse_boxes("1,2,3,4\n1,2,zz,4\n").unwrap_err().0, 2);
        assert_eq!(parse_boxes("1,2,3\n").unwrap_err().0, 1);
    }

    fn seq(id: &str, gt: &[Option<BoxF>], pred: &[Option<BoxF>]) -> (String, Vec<Option<BoxF>>, Vec<Option<BoxF>>) {
        (id.to_string(), gt.to_vec(), pred.to_vec())
    }

    #[test]
    fn sequences_weigh_equally() {
        let g = Some(b(0.0, 0.0, 10.0, 10.0));
        let far = Some(b(100.0, 100.0, 10.0, 10.0));
        let short = seq("a", &[g, g], &[g, g]);
        let long = seq("b", &[g; 11], &[far; 11]);
        let long10 = seq("b", &[g; 101], &[far; 101]);
        let r1 = evaluate_tracker("t", &[short.clone(), long]).unwrap();
        let r2 = evaluate_tracker("t", &[short, long10]).unwrap();
        assert_eq!(r1.overall.success.auc, r2.overall.success.auc);
        assert!((r1.overall.success.auc - (1.0 + 1.0 / 21.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn per_attribute_partitions() {
        let g = Some(b(0.0, 0.0, 10.0, 10.0));
        let far = Some(b(100.0, 100.0, 10.0, 10.0));
        let report = evaluate_tracker(
            "t",
            &[seq("a", &[g, g, g], &[g, g, g]), seq("b", &[g, g, g], &[g, far, far])],
        )
        .unwrap();
        let tags = BTreeMap::from([
            ("a".to_string(), vec!["blur-1".to_string()]),
            ("b".to_string(), vec!["occlusion-2".to_string()]),
        ]);
        let (table, warnings) = per_attribute_report(&report, &tags).unwrap();
        let get = |t: &str| table.iter().find(|a| a.tag == t).map(|a| a.auc);
        assert_eq!(get("blur-1"), Some(1.0));
        assert!((get("occlusion-2").unwrap() - 1.0 / 21.0).abs() < 1e-15);
        assert_eq!(get("distractor"), None);
        assert!(warnings.iter().any(|w| w.contains("distractor")));

        let shared = BTreeMap::from([
            ("a".to_string(), vec!["rotation-1".to_string()]),
            ("b".to_string(), vec!["rotation-1".to_string()]),
        ]);
        let (table, _) = per_attribute_report(&report, &shared).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].auc, report.overall.success.auc);

        let bad = BTreeMap::from([("a".to_string(), vec!["sparkle".to_string()])]);
        assert!(matches!(
            per_attribute_report(&report, &bad),
            Err(Error::UnknownTag { .. })
        ));
    }

    #[test]
    fn difficulty_cells_average() {
        let cell = StudyCell {
            attribute: Attribute::Blur,
            level: 2,
            variation: 0,
        };
        let t = DifficultyTable::from_sequence_means(&[(cell, 0.4), (cell, 0.6)]);
        assert_eq!(t.get(Attribute::Blur, 2), Some(0.5));
        assert_eq!(t.get(Attribute::Blur, 1), None);
    }

    fn arb_box() -> impl Strategy<Value = BoxF> {
        (-20.0f64..20.0, -20.0f64..20.0, 0.5f64..15.0, 0.5f64..15.0)
            .prop_map(|(x, y, w, h)| BoxF::new(x, y, w, h))
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in arb_box(), c in arb_box()) {
            let v = iou(&a, &c);
            prop_assert_eq!(v, iou(&c, &a));
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn curves_are_monotone_and_order_free(
            mut ious in proptest::collection::vec(0.0f64..=1.0, 1..60),
            mut errs in proptest::collection::vec(0.0f64..80.0, 1..60),
        ) {
            let s = success_curve(&ious).unwrap();
            prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!((0.0..=1.0).contains(&s.auc));
            let p = precision_curve(&errs).unwrap();
            prop_assert!(p.values.windows(2).all(|w| w[0] <= w[1]));
            ious.reverse();
            errs.reverse();
            prop_assert_eq!(success_curve(&ious).unwrap(), s);
            prop_assert_eq!(precision_curve(&errs).unwrap(), p);
        }
    }
}
